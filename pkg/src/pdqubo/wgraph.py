"""Wasserstein graph of two diagrams and its QUBO encoding.

Every edge of the graph is one binary variable.  Activated edges pay their
weight; every off-diagonal point pays ``gamma * (1 - degree)**2``.  With the
weights raised to the matching exponent, the energy of a valid matching is
its transport cost, so the ground state encodes the p-th power of the
Wasserstein distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .diagrams import AugmentedSides, Node, PersistenceDiagram, augment
from .errors import ParameterError, StructuralError
from .model import QuboModel, as_fraction, check_assignment
from .qubo_io import format_decimal

__all__ = [
    "Edge",
    "WassersteinGraph",
    "CompiledQubo",
    "Matching",
    "GAMMA_MARGIN",
    "check_exponents",
    "ground_cost",
    "edge_weight",
    "build_wasserstein_graph",
    "cost_hamiltonian",
    "constraint_hamiltonian",
    "compile_qubo",
    "default_gamma",
    "decode_matching",
    "format_edge_map",
    "num_qubits",
]

GAMMA_MARGIN = Fraction(1, 8)


def check_exponents(p, q):
    """Validate ``p`` (finite, >= 1) and ``q`` (>= 1, may be infinite)."""
    try:
        pf, qf = float(p), float(q)
    except (TypeError, ValueError):
        raise ParameterError(f"exponents must be numbers, got p={p!r}, q={q!r}") from None
    if not math.isfinite(pf) or pf < 1:
        raise ParameterError(f"p must be finite and >= 1, got {p}")
    if math.isnan(qf) or qf < 1:
        raise ParameterError(f"q must be >= 1 or inf, got {q}")
    return p, q


def _integral(value) -> int | None:
    f = as_fraction(value)
    return int(f) if f.denominator == 1 else None


def _power(base: Fraction, exponent) -> Fraction:
    k = _integral(exponent)
    if k is not None:
        return base**k
    if base == 0:
        return Fraction(0)
    return as_fraction(float(base) ** float(exponent))


def ground_cost(a: tuple, b: tuple, p, q) -> Fraction:
    """``||a - b||_q ** p``, exact whenever the exponents allow it."""
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    if math.isinf(float(q)):
        return _power(max(dx, dy), p)
    qi = _integral(q)
    if qi is None:
        s = float(dx) ** float(q) + float(dy) ** float(q)
        return as_fraction(s ** (float(p) / float(q))) if s else Fraction(0)
    s = dx**qi + dy**qi
    return _power(s, as_fraction(p) / qi)


def edge_weight(u: Node, v: Node, p, q) -> Fraction:
    """Weight of the pair ``(u, v)`` taken from opposite sides.

    A point and its own diagonal projection cost the sup-norm distance to the
    power ``p``; two off-diagonal points cost the ``q``-norm distance to the
    power ``p``.  Two diagonal nodes cost nothing.  Any other pairing is not
    an admissible edge.
    """
    if u.side == v.side:
        raise StructuralError(f"{u.id} and {v.id} lie on the same side")
    if u.side == "y":
        u, v = v, u
    if u.is_diagonal and v.is_diagonal:
        return Fraction(0)
    if not u.is_diagonal and not v.is_diagonal:
        return ground_cost(u.coords, v.coords, p, q)
    own = (u.kind == "x" and v.kind == "dx") or (u.kind == "dy" and v.kind == "y")
    if not own or u.index != v.index:
        raise StructuralError(f"{u.id} -> {v.id} pairs a point with a foreign projection")
    return ground_cost(u.coords, v.coords, p, math.inf)


@dataclass(frozen=True)
class Edge:
    u: Node
    v: Node
    theta: Fraction
    cls: str

    def endpoints_off_diagonal(self) -> tuple[Node, ...]:
        return tuple(w for w in (self.u, self.v) if not w.is_diagonal)


@dataclass(frozen=True)
class WassersteinGraph:
    sides: AugmentedSides
    edges: tuple[Edge, ...]
    p: object
    q: object

    @property
    def m(self) -> int:
        return self.sides.m

    @property
    def n(self) -> int:
        return self.sides.n

    def incidence(self) -> dict[str, list[int]]:
        """Edge indices incident to each node id."""
        inc: dict[str, list[int]] = {w.id: [] for w in self.sides.x_bar + self.sides.y_bar}
        for k, e in enumerate(self.edges):
            inc[e.u.id].append(k)
            inc[e.v.id].append(k)
        return inc

    def off_diagonal_nodes(self) -> list[Node]:
        s = self.sides
        return list(s.x_bar[: s.m]) + list(s.y_bar[: s.n])

    def max_weight(self) -> Fraction:
        return max(e.theta for e in self.edges)


def num_qubits(m: int, n: int) -> int:
    return m * n + m + n


def build_wasserstein_graph(X: PersistenceDiagram, Y: PersistenceDiagram, p=2, q=2) -> WassersteinGraph:
    check_exponents(p, q)
    sides = augment(X, Y)
    m, n = sides.m, sides.n
    xs, ys = sides.x_bar[:m], sides.y_bar[:n]
    edges = []
    for u in xs:
        for v in ys:
            edges.append(Edge(u, v, edge_weight(u, v, p, q), "E1"))
    for u in xs:
        v = sides.partner(u)
        edges.append(Edge(u, v, edge_weight(u, v, p, q), "E2"))
    for v in ys:
        u = sides.partner(v)
        edges.append(Edge(u, v, edge_weight(u, v, p, q), "E3"))
    return WassersteinGraph(sides, tuple(edges), p, q)


def cost_hamiltonian(W: WassersteinGraph) -> QuboModel:
    return QuboModel(len(W.edges), {k: e.theta for k, e in enumerate(W.edges)})


def constraint_hamiltonian(W: WassersteinGraph) -> QuboModel:
    """Sum over off-diagonal nodes of ``(1 - sum of incident edges)**2``, reduced with x*x = x."""
    inc = W.incidence()
    linear: dict[int, Fraction] = {}
    quadratic: dict[tuple[int, int], Fraction] = {}
    offset = Fraction(0)
    for w in W.off_diagonal_nodes():
        ks = inc[w.id]
        offset += 1
        for k in ks:
            linear[k] = linear.get(k, Fraction(0)) - 1
        for a, b in combinations(ks, 2):
            quadratic[(a, b)] = quadratic.get((a, b), Fraction(0)) + 2
    return QuboModel(len(W.edges), linear, quadratic, offset)


@dataclass(frozen=True)
class CompiledQubo:
    model: QuboModel
    edge_index: tuple[Edge, ...]
    gamma: Fraction

    def variable_of(self, edge: Edge) -> int:
        return self.edge_index.index(edge)


def compile_qubo(W: WassersteinGraph, gamma=None) -> CompiledQubo:
    """Encode ``W`` as ``H_cost + gamma * H_constraint``; ``gamma`` defaults to :func:`default_gamma`."""
    if gamma is None:
        gamma = default_gamma(W) if W.edges else Fraction(1)
    gamma = as_fraction(gamma)
    if gamma <= 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    model = cost_hamiltonian(W) + constraint_hamiltonian(W).scaled(gamma)
    return CompiledQubo(model, W.edges, gamma)


def default_gamma(W: WassersteinGraph) -> Fraction:
    """``(1 + 1/8) * max weight``, strictly above the bound; 1 when every weight is zero."""
    if not W.edges:
        raise ParameterError("penalty weight is undefined for a graph without edges")
    top = W.max_weight()
    if top == 0:
        return Fraction(1)
    return (1 + GAMMA_MARGIN) * top


@dataclass(frozen=True)
class Matching:
    pairs: tuple[Edge, ...]
    cost: Fraction
    constraint_violations: int
    penalty: int

    @property
    def valid(self) -> bool:
        return self.constraint_violations == 0


def decode_matching(x: Sequence[int], compiled: CompiledQubo, W: WassersteinGraph | None = None) -> Matching:
    """Read the activated edges of ``x`` back as a (possibly invalid) matching.

    ``penalty`` is the unweighted constraint value, so the QUBO energy of
    ``x`` is ``cost + gamma * penalty``.
    """
    edges = compiled.edge_index if W is None else W.edges
    if len(edges) != len(compiled.edge_index):
        raise StructuralError("graph does not match the compiled edge index")
    bits = check_assignment(x, len(edges))
    pairs = tuple(e for e, b in zip(edges, bits) if b)
    degree: dict[str, int] = {}
    for e in pairs:
        degree[e.u.id] = degree.get(e.u.id, 0) + 1
        degree[e.v.id] = degree.get(e.v.id, 0) + 1
    violations = 0
    penalty = 0
    seen = set()
    for e in edges:
        for w in (e.u, e.v):
            if w.id in seen:
                continue
            seen.add(w.id)
            d = degree.get(w.id, 0)
            if w.is_diagonal:
                violations += d > 1
            else:
                violations += d != 1
                penalty += (1 - d) ** 2
    cost = sum((e.theta for e in pairs), Fraction(0))
    return Matching(pairs, cost, violations, penalty)


def format_edge_map(compiled: CompiledQubo) -> str:
    lines = [
        f"{k} {e.cls} {e.u.id} {e.v.id} {format_decimal(e.theta)}" for k, e in enumerate(compiled.edge_index)
    ]
    return "\n".join(lines) + ("\n" if lines else "")
