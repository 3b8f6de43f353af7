"""QUBO and Ising models over exact rational coefficients.

Coefficients are stored as :class:`fractions.Fraction` so that energies,
change-of-variable identities and golden files are bit-stable.  Conversion
to ``float64`` happens only when a model is handed to a numerical kernel
(:meth:`QuboModel.to_numpy`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionError, DomainError, SizeError

__all__ = [
    "ENUMERATION_CAP",
    "QuboModel",
    "IsingModel",
    "LogicalGraph",
    "as_fraction",
    "check_assignment",
    "evaluate_qubo",
    "evaluate_ising",
    "ising_to_qubo",
    "qubo_to_ising",
    "logical_graph",
    "argmin_exhaustive",
]

ENUMERATION_CAP = 26

# low bits are tabulated once per model; high bits are streamed in chunks
_LOW_BITS = 12
_CHUNK_STATES = 1 << 22
_MAX_TIE_CANDIDATES = 4096


def as_fraction(value) -> Fraction:
    """Convert ``value`` to a Fraction.

    Floats go through their shortest round-trip decimal, so ``0.1`` becomes
    ``1/10`` rather than the binary expansion of the double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError(f"boolean is not a coefficient: {value!r}")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise DomainError(f"non-finite coefficient: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, np.integer):
        return Fraction(int(value))
    if isinstance(value, str):
        try:
            out = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a rational literal: {value!r}") from exc
        return out
    raise DomainError(f"unsupported coefficient type: {type(value).__name__}")


def _canonical_terms(num_vars, linear, quadratic):
    lin: dict[int, Fraction] = {}
    quad: dict[tuple[int, int], Fraction] = {}

    def check(i):
        if isinstance(i, bool) or not isinstance(i, (int, np.integer)):
            raise DomainError(f"variable index must be an integer, got {i!r}")
        i = int(i)
        if not 0 <= i < num_vars:
            raise DomainError(f"variable index {i} out of range for {num_vars} variables")
        return i

    for i, c in dict(linear or {}).items():
        i = check(i)
        lin[i] = lin.get(i, Fraction(0)) + as_fraction(c)
    for key, c in dict(quadratic or {}).items():
        i, j = key
        i, j = check(i), check(j)
        c = as_fraction(c)
        if i == j:
            # x*x == x on binary variables
            lin[i] = lin.get(i, Fraction(0)) + c
            continue
        if i > j:
            i, j = j, i
        quad[(i, j)] = quad.get((i, j), Fraction(0)) + c
    lin = {i: c for i, c in sorted(lin.items()) if c != 0}
    quad = {k: c for k, c in sorted(quad.items()) if c != 0}
    return lin, quad


@dataclass(frozen=True, eq=False)
class QuboModel:
    """Quadratic polynomial ``offset + sum h_i x_i + sum_{i<j} J_ij x_i x_j``.

    Construction canonicalizes the terms: diagonal pairs fold into the linear
    part, ``(j, i)`` keys merge into ``(i, j)``, and zero coefficients are
    dropped.
    """

    num_vars: int
    linear: Mapping[int, Fraction] = field(default_factory=dict)
    quadratic: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        if isinstance(self.num_vars, bool) or not isinstance(self.num_vars, (int, np.integer)):
            raise DomainError(f"num_vars must be an integer, got {self.num_vars!r}")
        if self.num_vars < 0:
            raise DomainError(f"num_vars must be nonnegative, got {self.num_vars}")
        object.__setattr__(self, "num_vars", int(self.num_vars))
        lin, quad = _canonical_terms(self.num_vars, self.linear, self.quadratic)
        object.__setattr__(self, "linear", MappingProxyType(lin))
        object.__setattr__(self, "quadratic", MappingProxyType(quad))
        object.__setattr__(self, "offset", as_fraction(self.offset))

    def __eq__(self, other):
        if not isinstance(other, QuboModel):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and dict(self.linear) == dict(other.linear)
            and dict(self.quadratic) == dict(other.quadratic)
            and self.offset == other.offset
        )

    def __repr__(self):
        return (
            f"QuboModel(num_vars={self.num_vars}, linear={dict(self.linear)}, "
            f"quadratic={dict(self.quadratic)}, offset={self.offset})"
        )

    def __add__(self, other: QuboModel) -> QuboModel:
        if not isinstance(other, QuboModel):
            return NotImplemented
        if other.num_vars != self.num_vars:
            raise DimensionError(f"cannot add models over {self.num_vars} and {other.num_vars} variables")
        lin = dict(self.linear)
        for i, c in other.linear.items():
            lin[i] = lin.get(i, Fraction(0)) + c
        quad = dict(self.quadratic)
        for k, c in other.quadratic.items():
            quad[k] = quad.get(k, Fraction(0)) + c
        return QuboModel(self.num_vars, lin, quad, self.offset + other.offset)

    def scaled(self, factor) -> QuboModel:
        factor = as_fraction(factor)
        return QuboModel(
            self.num_vars,
            {i: factor * c for i, c in self.linear.items()},
            {k: factor * c for k, c in self.quadratic.items()},
            factor * self.offset,
        )

    def coefficients(self) -> list[Fraction]:
        """All stored nonzero coefficients (offset excluded)."""
        return list(self.linear.values()) + list(self.quadratic.values())

    def to_numpy(self) -> tuple[np.ndarray, np.ndarray, float]:
        """Dense float64 ``(h, J, offset)`` with ``J`` strictly upper triangular."""
        n = self.num_vars
        h = np.zeros(n)
        J = np.zeros((n, n))
        for i, c in self.linear.items():
            h[i] = float(c)
        for (i, j), c in self.quadratic.items():
            J[i, j] = float(c)
        return h, J, float(self.offset)


@dataclass(frozen=True, eq=False)
class IsingModel:
    """Spin polynomial ``offset + sum h_i s_i + sum_{i<j} J_ij s_i s_j``, s in {-1, +1}."""

    num_vars: int
    fields: Mapping[int, Fraction] = field(default_factory=dict)
    couplings: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        if isinstance(self.num_vars, bool) or not isinstance(self.num_vars, (int, np.integer)):
            raise DomainError(f"num_vars must be an integer, got {self.num_vars!r}")
        if self.num_vars < 0:
            raise DomainError(f"num_vars must be nonnegative, got {self.num_vars}")
        object.__setattr__(self, "num_vars", int(self.num_vars))
        offset = as_fraction(self.offset)
        fields = {}
        for i, c in dict(self.fields or {}).items():
            fields[i] = as_fraction(c)
        couplings = {}
        for (i, j), c in dict(self.couplings or {}).items():
            if i == j:
                # s*s == 1 on spins
                offset += as_fraction(c)
                continue
            couplings[(i, j)] = as_fraction(c)
        lin, quad = _canonical_terms(self.num_vars, fields, couplings)
        object.__setattr__(self, "fields", MappingProxyType(lin))
        object.__setattr__(self, "couplings", MappingProxyType(quad))
        object.__setattr__(self, "offset", offset)

    def __eq__(self, other):
        if not isinstance(other, IsingModel):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and dict(self.fields) == dict(other.fields)
            and dict(self.couplings) == dict(other.couplings)
            and self.offset == other.offset
        )

    def __repr__(self):
        return (
            f"IsingModel(num_vars={self.num_vars}, fields={dict(self.fields)}, "
            f"couplings={dict(self.couplings)}, offset={self.offset})"
        )

    def coefficients(self) -> list[Fraction]:
        return list(self.fields.values()) + list(self.couplings.values())


@dataclass(frozen=True)
class LogicalGraph:
    """Weighted graph of a QUBO: one node per variable, one edge per nonzero coupling."""

    nodes: tuple[tuple[int, Fraction], ...]
    edges: tuple[tuple[int, int, Fraction], ...]

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def adjacency(self) -> dict[int, set[int]]:
        adj = {i: set() for i, _ in self.nodes}
        for i, j, _ in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj


def check_assignment(x: Sequence[int], num_vars: int) -> tuple[int, ...]:
    """Validate a binary assignment and return it as a tuple of ints."""
    bits = tuple(int(b) for b in x)
    if len(bits) != num_vars:
        raise DimensionError(f"assignment has length {len(bits)}, model has {num_vars} variables")
    if any(b not in (0, 1) for b in bits):
        raise DomainError(f"assignment entries must be 0 or 1: {bits}")
    return bits


def evaluate_qubo(model: QuboModel, x: Sequence[int]) -> Fraction:
    """Exact energy of ``x`` under ``model``."""
    bits = check_assignment(x, model.num_vars)
    energy = model.offset
    for i, c in model.linear.items():
        if bits[i]:
            energy += c
    for (i, j), c in model.quadratic.items():
        if bits[i] and bits[j]:
            energy += c
    return energy


def evaluate_ising(model: IsingModel, s: Sequence[int]) -> Fraction:
    """Exact energy of spin vector ``s`` (entries -1 or +1)."""
    spins = tuple(int(v) for v in s)
    if len(spins) != model.num_vars:
        raise DimensionError(f"spin vector has length {len(spins)}, model has {model.num_vars} variables")
    if any(v not in (-1, 1) for v in spins):
        raise DomainError(f"spins must be -1 or +1: {spins}")
    energy = model.offset
    for i, c in model.fields.items():
        energy += c * spins[i]
    for (i, j), c in model.couplings.items():
        energy += c * spins[i] * spins[j]
    return energy


def ising_to_qubo(ising: IsingModel) -> QuboModel:
    """Substitute ``s = 2x - 1``; energies agree state by state."""
    lin: dict[int, Fraction] = {}
    quad: dict[tuple[int, int], Fraction] = {}
    offset = ising.offset
    for i, h in ising.fields.items():
        lin[i] = lin.get(i, Fraction(0)) + 2 * h
        offset -= h
    for (i, j), J in ising.couplings.items():
        quad[(i, j)] = 4 * J
        lin[i] = lin.get(i, Fraction(0)) - 2 * J
        lin[j] = lin.get(j, Fraction(0)) - 2 * J
        offset += J
    return QuboModel(ising.num_vars, lin, quad, offset)


def qubo_to_ising(qubo: QuboModel) -> IsingModel:
    """Substitute ``x = (s + 1) / 2``; inverse of :func:`ising_to_qubo`."""
    fields: dict[int, Fraction] = {}
    couplings: dict[tuple[int, int], Fraction] = {}
    offset = qubo.offset
    for i, h in qubo.linear.items():
        fields[i] = fields.get(i, Fraction(0)) + h / 2
        offset += h / 2
    for (i, j), J in qubo.quadratic.items():
        couplings[(i, j)] = J / 4
        fields[i] = fields.get(i, Fraction(0)) + J / 4
        fields[j] = fields.get(j, Fraction(0)) + J / 4
        offset += J / 4
    return IsingModel(qubo.num_vars, fields, couplings, offset)


def logical_graph(qubo: QuboModel) -> LogicalGraph:
    nodes = tuple((i, qubo.linear.get(i, Fraction(0))) for i in range(qubo.num_vars))
    edges = tuple((i, j, c) for (i, j), c in qubo.quadratic.items())
    return LogicalGraph(nodes, edges)


def _bit_rows(indices: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width, dtype=np.int64)
    return ((indices[:, None] >> shifts) & 1).astype(np.float64)


def index_to_bits(index: int, width: int) -> tuple[int, ...]:
    """Bit ``i`` of the enumeration index is variable ``i`` (lowest index varies fastest)."""
    return tuple((index >> i) & 1 for i in range(width))


def argmin_exhaustive(model: QuboModel, cap: int = ENUMERATION_CAP) -> tuple[tuple[int, ...], Fraction]:
    """Globally minimal state by full enumeration of the hypercube.

    States are enumerated with variable 0 as the least significant bit; among
    states of equal exact energy the first in that order wins.  Energies are
    screened in float64 blocks and the surviving near-minimal candidates are
    re-ranked in exact arithmetic.
    """
    n = model.num_vars
    if n > cap:
        raise SizeError(f"{n} variables exceeds the enumeration cap of {cap}")
    if n == 0:
        return (), model.offset

    h, J, _ = model.to_numpy()
    scale = 1.0 + float(sum(abs(c) for c in model.coefficients()))
    tol = 1e-9 * scale

    k = min(n, _LOW_BITS)
    low = _bit_rows(np.arange(1 << k, dtype=np.int64), k)
    e_low = low @ h[:k] + np.einsum("ai,ij,aj->a", low, J[:k, :k], low)
    nh = n - k
    low_cross = low @ J[:k, k:]  # (2^k, nh)
    h_high, J_high = h[k:], J[k:, k:]
    chunk = max(1, _CHUNK_STATES >> k)

    best = math.inf
    cand_idx: list[np.ndarray] = []
    cand_e: list[np.ndarray] = []
    kept = 0
    for start in range(0, 1 << nh, chunk):
        stop = min(1 << nh, start + chunk)
        high = _bit_rows(np.arange(start, stop, dtype=np.int64), nh)
        e_high = high @ h_high + np.einsum("ai,ij,aj->a", high, J_high, high)
        energies = e_high[:, None] + high @ low_cross.T + e_low[None, :]
        m = float(energies.min())
        if m < best - tol:
            cand_idx, cand_e, kept = [], [], 0
        if m > best + tol:
            continue
        best = min(best, m)
        if kept >= _MAX_TIE_CANDIDATES:
            continue
        flat = np.flatnonzero(energies <= best + tol)[: _MAX_TIE_CANDIDATES - kept]
        cand_idx.append(flat + (start << k))
        cand_e.append(energies.ravel()[flat])
        kept += flat.size

    idx = np.concatenate(cand_idx)
    es = np.concatenate(cand_e)
    idx = idx[es <= best + tol]
    winner, winner_e = None, None
    for i in idx.tolist():
        bits = index_to_bits(i, n)
        e = evaluate_qubo(model, bits)
        if winner_e is None or e < winner_e:
            winner, winner_e = bits, e
    return winner, winner_e
