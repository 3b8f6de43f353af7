"""Exact p-Wasserstein distances between persistence diagrams.

Two independent routes compute the optimal matching on the augmented
sides: plain enumeration of partial bijections, and a Hungarian assignment
solve of the square augmented cost matrix.  Both work in exact rationals
whenever the edge weights are rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .diagrams import AugmentedSides, PersistenceDiagram, augment
from .errors import SizeError, StructuralError
from .wgraph import check_exponents, edge_weight

__all__ = [
    "BRUTE_FORCE_CAP",
    "OracleResult",
    "brute_force_distance",
    "hungarian_distance",
    "linear_assignment",
    "matching_cost",
    "augmented_cost_matrix",
    "format_matching",
]

BRUTE_FORCE_CAP = 9


@dataclass(frozen=True)
class OracleResult:
    """``cost`` is the optimal transport cost (distance ** p)."""

    cost: Fraction
    distance: float
    matching: tuple[tuple[int, int], ...]
    sides: AugmentedSides

    @classmethod
    def from_matching(cls, cost, matching, sides, p) -> OracleResult:
        return cls(cost, float(cost) ** (1.0 / float(p)), tuple(matching), sides)


def matching_cost(X: PersistenceDiagram, Y: PersistenceDiagram, matching: Sequence[tuple[int, int]], p=2, q=2) -> Fraction:
    """Total weight of a perfect matching given as ``(x_bar index, y_bar index)`` pairs.

    Diagonal-to-diagonal pairs are free.  A pair joining a point to a
    projection other than its own raises :class:`StructuralError`.
    """
    sides = augment(X, Y)
    size = sides.m + sides.n
    pairs = [(int(i), int(j)) for i, j in matching]
    rows = sorted(i for i, _ in pairs)
    cols = sorted(j for _, j in pairs)
    if rows != list(range(size)) or cols != list(range(size)):
        raise StructuralError(f"not a perfect matching on {size} + {size} augmented nodes")
    return sum((edge_weight(sides.x_bar[i], sides.y_bar[j], p, q) for i, j in pairs), Fraction(0))


def _complete(choice: Sequence[int | None], m: int, n: int) -> list[tuple[int, int]]:
    """Extend a partial bijection X -> Y (None = to the diagonal) to the augmented sides."""
    pairs = []
    matched_y = set()
    free_right = []
    for i, j in enumerate(choice):
        if j is None:
            pairs.append((i, n + i))
        else:
            pairs.append((i, j))
            matched_y.add(j)
            free_right.append(n + i)
    free_left = []
    for j in range(n):
        if j in matched_y:
            free_left.append(m + j)
        else:
            pairs.append((m + j, j))
    pairs.extend(zip(free_left, free_right))
    return sorted(pairs)


def brute_force_distance(X: PersistenceDiagram, Y: PersistenceDiagram, p=2, q=2) -> OracleResult:
    """Minimum over every partial bijection between the two diagrams.

    Each point of ``X`` goes to a distinct point of ``Y`` or to its own
    projection; leftover points of ``Y`` go to their projections.  This
    enumerates every admissible perfect matching of the augmented sides up to
    the free permutations among diagonal-to-diagonal pairs.
    """
    check_exponents(p, q)
    m, n = len(X), len(Y)
    if m + n > BRUTE_FORCE_CAP:
        raise SizeError(f"brute force is capped at m + n <= {BRUTE_FORCE_CAP}, got {m + n}")
    sides = augment(X, Y)
    xs, ys = sides.x_bar[:m], sides.y_bar[:n]
    e1 = [[edge_weight(u, v, p, q) for v in ys] for u in xs]
    e2 = [edge_weight(u, sides.partner(u), p, q) for u in xs]
    e3 = [edge_weight(sides.partner(v), v, p, q) for v in ys]

    best_cost = None
    best_choice = None
    choice: list[int | None] = [None] * m
    used = [False] * n

    def recurse(i, acc):
        nonlocal best_cost, best_choice
        if i == m:
            total = acc + sum((e3[j] for j in range(n) if not used[j]), Fraction(0))
            if best_cost is None or total < best_cost:
                best_cost, best_choice = total, list(choice)
            return
        for j in range(n):
            if not used[j]:
                used[j] = True
                choice[i] = j
                recurse(i + 1, acc + e1[i][j])
                used[j] = False
        choice[i] = None
        recurse(i + 1, acc + e2[i])

    recurse(0, Fraction(0))
    return OracleResult.from_matching(best_cost, _complete(best_choice, m, n), sides, p)


def augmented_cost_matrix(sides: AugmentedSides, p=2, q=2) -> list[list[Fraction]]:
    """Square cost matrix over ``x_bar`` x ``y_bar`` with a finite surrogate for forbidden pairs."""
    size = sides.m + sides.n
    rows: list[list[Fraction | None]] = []
    finite_total = Fraction(0)
    for u in sides.x_bar:
        row = []
        for v in sides.y_bar:
            try:
                w = edge_weight(u, v, p, q)
            except StructuralError:
                w = None
            else:
                finite_total += w
            row.append(w)
        rows.append(row)
    big = finite_total + 1
    return [[big if w is None else w for w in row] for row in rows] if size else []


def linear_assignment(cost: Sequence[Sequence]) -> list[int]:
    """Hungarian method with row/column potentials on a square matrix.

    Returns ``col`` such that row ``i`` is assigned to column ``col[i]``.
    Entries may be any ordered field type (Fraction, float).
    """
    n = len(cost)
    if n == 0:
        return []
    if any(len(row) != n for row in cost):
        raise StructuralError("cost matrix must be square")
    inf = math.inf
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    owner = [0] * (n + 1)  # owner[j]: 1-based row assigned to column j
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = owner[j0]
            delta = inf
            j1 = 0
            row = cost[i0 - 1]
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[owner[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    col = [0] * n
    for j in range(1, n + 1):
        col[owner[j] - 1] = j - 1
    return col


def hungarian_distance(X: PersistenceDiagram, Y: PersistenceDiagram, p=2, q=2) -> OracleResult:
    check_exponents(p, q)
    sides = augment(X, Y)
    cost = augmented_cost_matrix(sides, p, q)
    col = linear_assignment(cost)
    matching = [(i, j) for i, j in enumerate(col)]
    total = sum((cost[i][j] for i, j in matching), Fraction(0))
    return OracleResult.from_matching(total, matching, sides, p)


def format_matching(result: OracleResult) -> list[str]:
    s = result.sides
    return [f"{s.x_bar[i].id} -> {s.y_bar[j].id}" for i, j in result.matching]
