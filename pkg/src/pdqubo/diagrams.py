"""Persistence diagrams, diagonal projections and the augmented matching sides."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DomainError, ParseError
from .model import as_fraction

__all__ = [
    "DiagramPoint",
    "PersistenceDiagram",
    "Node",
    "AugmentedSides",
    "parse_diagram",
    "read_diagram",
    "diagonal_projection",
    "augment",
]


@dataclass(frozen=True)
class DiagramPoint:
    birth: Fraction
    death: Fraction

    def __post_init__(self):
        b, d = as_fraction(self.birth), as_fraction(self.death)
        if b < 0:
            raise DomainError(f"birth must be nonnegative, got {b}")
        if not d > b:
            raise DomainError(f"death must exceed birth, got ({b}, {d})")
        object.__setattr__(self, "birth", b)
        object.__setattr__(self, "death", d)

    def as_tuple(self) -> tuple[Fraction, Fraction]:
        return (self.birth, self.death)


@dataclass(frozen=True)
class PersistenceDiagram:
    """Finite multiset of off-diagonal points; duplicates are kept."""

    points: tuple[DiagramPoint, ...]
    label: str = ""

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence], label: str = "") -> PersistenceDiagram:
        return cls(tuple(DiagramPoint(b, d) for b, d in pairs), label)

    def __len__(self):
        return len(self.points)

    def scaled(self, factor) -> PersistenceDiagram:
        factor = as_fraction(factor)
        return PersistenceDiagram(
            tuple(DiagramPoint(p.birth * factor, p.death * factor) for p in self.points), self.label
        )


def parse_diagram(text: str, label: str = "") -> PersistenceDiagram:
    """Parse ``birth,death`` lines; ``#`` starts a comment, blank lines are skipped."""
    points = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 2:
            raise ParseError(f"expected 'birth,death', got {raw.strip()!r}", lineno, label or None)
        try:
            b, d = Fraction(fields[0]), Fraction(fields[1])
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"non-numeric or non-finite value in {raw.strip()!r}", lineno, label or None) from None
        try:
            points.append(DiagramPoint(b, d))
        except DomainError as exc:
            where = f"{label}:" if label else ""
            raise DomainError(f"{where}{lineno}: {exc}") from None
    return PersistenceDiagram(tuple(points), label)


def read_diagram(path) -> PersistenceDiagram:
    with open(path, encoding="utf-8") as fh:
        return parse_diagram(fh.read(), label=str(path))


def diagonal_projection(a: DiagramPoint) -> tuple[Fraction, Fraction]:
    """Nearest diagonal point in the sup norm: the midpoint ``((b+d)/2, (b+d)/2)``."""
    mid = (a.birth + a.death) / 2
    return (mid, mid)


@dataclass(frozen=True)
class Node:
    """A vertex of the augmented bipartite graph.

    ``kind`` is ``"x"``/``"y"`` for off-diagonal points of the first/second
    diagram, and ``"dx"``/``"dy"`` for the diagonal projection of the point
    ``x{index}``/``y{index}``.  Projections carry their partner's identity
    so that coinciding coordinates never merge two distinct nodes.
    """

    kind: str
    index: int
    coords: tuple[Fraction, Fraction]

    @property
    def id(self) -> str:
        return f"{self.kind}{self.index}"

    @property
    def is_diagonal(self) -> bool:
        return self.kind in ("dx", "dy")

    @property
    def side(self) -> str:
        """``"x"`` for the left side (X plus projections of Y), ``"y"`` otherwise."""
        return "x" if self.kind in ("x", "dy") else "y"


@dataclass(frozen=True)
class AugmentedSides:
    x_bar: tuple[Node, ...]
    y_bar: tuple[Node, ...]
    m: int
    n: int

    def partner(self, node: Node) -> Node:
        """Projection node of an off-diagonal point, or the point of a projection."""
        if node.kind == "x":
            return self.y_bar[self.n + node.index]
        if node.kind == "y":
            return self.x_bar[self.m + node.index]
        if node.kind == "dx":
            return self.x_bar[node.index]
        return self.y_bar[node.index]


def augment(X: PersistenceDiagram, Y: PersistenceDiagram) -> AugmentedSides:
    xs = [Node("x", i, p.as_tuple()) for i, p in enumerate(X.points)]
    ys = [Node("y", j, p.as_tuple()) for j, p in enumerate(Y.points)]
    dys = [Node("dy", j, diagonal_projection(p)) for j, p in enumerate(Y.points)]
    dxs = [Node("dx", i, diagonal_projection(p)) for i, p in enumerate(X.points)]
    return AugmentedSides(tuple(xs + dys), tuple(ys + dxs), len(X), len(Y))
