"""Classical stand-ins for an annealer: Metropolis, forward and reverse annealing.

Random numbers come from numpy's PCG64.  Read ``r`` of a run with master
seed ``s`` draws from ``SeedSequence(s, spawn_key=(r,))`` and nothing else,
so batching or reordering reads cannot change the result.  The kernels work
in float64; every recorded state is re-evaluated exactly before it is
reported, so a SampleSet never carries a stale energy.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numba
import numpy as np

from .errors import ParameterError
from .model import QuboModel, argmin_exhaustive, check_assignment, evaluate_qubo

__all__ = [
    "BURN_IN",
    "DEFAULT_SWEEPS",
    "Schedule",
    "SampleRecord",
    "SampleSet",
    "default_schedule",
    "default_reverse_schedule",
    "read_rng",
    "metropolis_chain",
    "anneal",
    "reverse_anneal",
    "exact_sampleset",
    "histogram",
    "format_samples",
    "format_histogram",
]

BURN_IN = 0.25
DEFAULT_SWEEPS = 1000
DEFAULT_PAUSE = 100
_BATCH_UNIFORMS = 1 << 21


@dataclass(frozen=True)
class Schedule:
    """Inverse-temperature schedule.

    A forward schedule ramps geometrically from ``beta_start`` up to
    ``beta_end`` over ``sweeps`` sweeps.  A reverse schedule spends half the
    sweeps descending to ``beta_mid``, holds there for ``pause_sweeps``, then
    climbs back to ``beta_end``.
    """

    kind: str = "forward"
    beta_start: float = 0.1
    beta_end: float = 10.0
    sweeps: int = DEFAULT_SWEEPS
    beta_mid: float | None = None
    pause_sweeps: int = 0

    def __post_init__(self):
        if self.kind not in ("forward", "reverse"):
            raise ParameterError(f"schedule kind must be 'forward' or 'reverse', got {self.kind!r}")
        betas = [self.beta_start, self.beta_end] + ([self.beta_mid] if self.kind == "reverse" else [])
        if any(b is None or not (b > 0 and math.isfinite(b)) for b in betas):
            raise ParameterError(f"inverse temperatures must be positive and finite: {betas}")
        if int(self.sweeps) != self.sweeps or self.sweeps < 1:
            raise ParameterError(f"sweeps must be a positive integer, got {self.sweeps}")
        if int(self.pause_sweeps) != self.pause_sweeps or self.pause_sweeps < 0:
            raise ParameterError(f"pause_sweeps must be a nonnegative integer, got {self.pause_sweeps}")
        if self.kind == "forward":
            if self.beta_end < self.beta_start:
                raise ParameterError("forward schedule needs beta_end >= beta_start")
            if self.pause_sweeps:
                raise ParameterError("pause_sweeps only applies to reverse schedules")
        elif self.beta_mid > min(self.beta_start, self.beta_end):
            raise ParameterError("reverse schedule needs beta_mid <= beta_start and beta_mid <= beta_end")
        for name in ("beta_start", "beta_end") + (("beta_mid",) if self.beta_mid is not None else ()):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "sweeps", int(self.sweeps))
        object.__setattr__(self, "pause_sweeps", int(self.pause_sweeps))

    def betas(self) -> np.ndarray:
        """One inverse temperature per sweep."""
        if self.kind == "forward":
            return np.geomspace(self.beta_start, self.beta_end, self.sweeps)
        down = self.sweeps // 2
        up = self.sweeps - down
        return np.concatenate(
            [
                np.geomspace(self.beta_start, self.beta_mid, down) if down else np.empty(0),
                np.full(self.pause_sweeps, self.beta_mid),
                np.geomspace(self.beta_mid, self.beta_end, up),
            ]
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.kind == "forward":
            d.pop("beta_mid")
            d.pop("pause_sweeps")
        return d


def _scales(model: QuboModel) -> tuple[float, float, float]:
    mags = [abs(float(c)) for c in model.coefficients()]
    if not mags:
        return 1.0, 1.0, 1.0
    return sum(mags) / len(mags), min(mags), max(mags)


def default_schedule(model: QuboModel, sweeps: int = DEFAULT_SWEEPS) -> Schedule:
    """Forward schedule scaled to the model's coefficients.

    Starts hot at ``0.1 / mean|coeff|`` and ends at ``10 / g`` where ``g`` is
    the smallest nonzero coefficient magnitude, floored at ``1e-3`` times the
    largest.
    """
    mean, low, high = _scales(model)
    beta_start = 0.1 / mean
    beta_end = max(beta_start, 10.0 / max(low, 1e-3 * high))
    return Schedule("forward", beta_start, beta_end, sweeps)


def default_reverse_schedule(model: QuboModel, sweeps: int = DEFAULT_SWEEPS, pause_sweeps: int = DEFAULT_PAUSE) -> Schedule:
    """Reverse schedule that starts and ends cold and dips to ``1 / max|coeff|``."""
    cold = default_schedule(model).beta_end
    _, _, high = _scales(model)
    return Schedule("reverse", cold, cold, sweeps, beta_mid=min(cold, 1.0 / high), pause_sweeps=pause_sweeps)


@dataclass(frozen=True)
class SampleRecord:
    state: tuple[int, ...]
    energy: Fraction
    count: int

    @property
    def bitstring(self) -> str:
        return "".join(map(str, self.state))


@dataclass(frozen=True)
class SampleSet:
    records: tuple[SampleRecord, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def num_reads(self) -> int:
        return sum(r.count for r in self.records)

    @property
    def first(self) -> SampleRecord:
        return self.records[0]

    def filter(self, predicate: Callable[[SampleRecord], bool]) -> SampleSet:
        return SampleSet(tuple(r for r in self.records if predicate(r)), dict(self.metadata))

    def __len__(self):
        return len(self.records)


def read_rng(seed: int, read: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(read,))))


def _float_model(model: QuboModel) -> tuple[np.ndarray, np.ndarray]:
    h, J, _ = model.to_numpy()
    return h, J + J.T


def _aggregate(model: QuboModel, states: np.ndarray, metadata: dict) -> SampleSet:
    n = model.num_vars
    if states.shape[0] == 0:
        return SampleSet((), metadata)
    if n == 0:
        records = (SampleRecord((), model.offset, int(states.shape[0])),)
        return SampleSet(records, metadata)
    uniq, counts = np.unique(states, axis=0, return_counts=True)
    records = []
    for row, count in zip(uniq.tolist(), counts.tolist()):
        state = tuple(int(b) for b in row)
        records.append(SampleRecord(state, evaluate_qubo(model, state), int(count)))
    records.sort(key=lambda r: (r.energy, r.state))
    return SampleSet(tuple(records), metadata)


@numba.njit(cache=True)
def _local_fields(h, Js, x):
    n = h.shape[0]
    f = h.copy()
    for i in range(n):
        if x[i]:
            for j in range(n):
                f[j] += Js[i, j]
    return f


@numba.njit(cache=True)
def _flip(Js, x, f, i):
    d = 1.0 - 2.0 * x[i]
    x[i] = 1 - x[i]
    n = x.shape[0]
    for j in range(n):
        f[j] += d * Js[i, j]


@numba.njit(cache=True)
def _metropolis_run(h, Js, x, f, beta, sites, uniforms, out, record_from, offset):
    """Random-site Metropolis; ``sites``/``uniforms`` are (sweeps, n)."""
    sweeps, n = sites.shape
    for s in range(sweeps):
        for k in range(n):
            i = sites[s, k]
            dE = (1.0 - 2.0 * x[i]) * f[i]
            if dE <= 0.0 or uniforms[s, k] < math.exp(-beta * dE):
                _flip(Js, x, f, i)
        r = offset + s - record_from
        if r >= 0:
            for i in range(n):
                out[r, i] = x[i]


@numba.njit(cache=True)
def _anneal_run(h, Js, x, betas, uniforms, keep_best, best):
    """Sequential-sweep Metropolis along ``betas``; optionally tracks the lowest state visited."""
    n = x.shape[0]
    f = _local_fields(h, Js, x)
    energy = 0.0
    best_energy = 0.0
    for i in range(n):
        best[i] = x[i]
    for s in range(betas.shape[0]):
        beta = betas[s]
        for i in range(n):
            dE = (1.0 - 2.0 * x[i]) * f[i]
            if dE <= 0.0 or uniforms[s, i] < math.exp(-beta * dE):
                _flip(Js, x, f, i)
                energy += dE
                if keep_best and energy < best_energy:
                    best_energy = energy
                    for j in range(n):
                        best[j] = x[j]


def metropolis_chain(model: QuboModel, beta: float, steps: int, seed: int = 0,
                     burn_in: float = BURN_IN, initial: Sequence[int] | None = None) -> SampleSet:
    """Fixed-temperature single-site Metropolis chain.

    Each sweep makes ``num_vars`` proposals, each flipping a uniformly chosen
    bit with probability ``min(1, exp(-beta * dE))``.  The state is recorded
    after every sweep once the first ``burn_in`` fraction has passed.
    """
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    if int(steps) != steps or steps < 1:
        raise ParameterError(f"steps must be a positive integer, got {steps}")
    if not 0 <= burn_in < 1:
        raise ParameterError(f"burn_in must lie in [0, 1), got {burn_in}")
    n = model.num_vars
    steps = int(steps)
    record_from = int(math.floor(burn_in * steps))
    meta = {"sampler": "metropolis", "seed": seed, "beta": float(beta), "steps": steps,
            "burn_in": burn_in, "num_reads": steps - record_from}
    rng = read_rng(seed, 0)
    if initial is None:
        x = rng.integers(0, 2, size=n).astype(np.int8)
    else:
        x = np.array(check_assignment(initial, n), dtype=np.int8)
    out = np.zeros((steps - record_from, n), dtype=np.int8)
    if n == 0:
        return _aggregate(model, out, meta)
    h, Js = _float_model(model)
    f = _local_fields(h, Js, x)
    chunk = max(1, _BATCH_UNIFORMS // n)
    for start in range(0, steps, chunk):
        stop = min(steps, start + chunk)
        sites = rng.integers(0, n, size=(stop - start, n))
        uniforms = rng.random((stop - start, n))
        _metropolis_run(h, Js, x, f, float(beta), sites, uniforms, out, record_from, start)
    return _aggregate(model, out, meta)


def _run_reads(model: QuboModel, schedule: Schedule, num_reads: int, seed: int,
               initial: np.ndarray | None, keep_best: bool) -> np.ndarray:
    n = model.num_vars
    states = np.zeros((num_reads, n), dtype=np.int8)
    if n == 0:
        return states
    h, Js = _float_model(model)
    betas = schedule.betas()
    best = np.zeros(n, dtype=np.int8)
    for r in range(num_reads):
        rng = read_rng(seed, r)
        if initial is None:
            x = rng.integers(0, 2, size=n).astype(np.int8)
        else:
            x = initial.copy()
        uniforms = rng.random((betas.shape[0], n))
        _anneal_run(h, Js, x, betas, uniforms, keep_best, best)
        states[r] = best if keep_best else x
    return states


def _check_reads(num_reads):
    if int(num_reads) != num_reads or num_reads < 1:
        raise ParameterError(f"num_reads must be a positive integer, got {num_reads}")
    return int(num_reads)


def anneal(model: QuboModel, schedule: Schedule | None = None, num_reads: int = 1000, seed: int = 0) -> SampleSet:
    """Simulated annealing from independent uniform random starts; records each read's final state."""
    schedule = default_schedule(model) if schedule is None else schedule
    if schedule.kind != "forward":
        raise ParameterError("anneal needs a forward schedule; use reverse_anneal")
    num_reads = _check_reads(num_reads)
    states = _run_reads(model, schedule, num_reads, seed, None, keep_best=False)
    meta = {"sampler": "anneal", "seed": seed, "schedule": schedule.to_dict(), "num_reads": num_reads}
    return _aggregate(model, states, meta)


def reverse_anneal(model: QuboModel, initial: Sequence[int], schedule: Schedule | None = None,
                   num_reads: int = 100, seed: int = 0) -> SampleSet:
    """Local search around ``initial``: heat to ``beta_mid``, pause, cool again.

    Each read reports the lowest-energy state it visited, ``initial``
    included, so the best record never lies above ``initial``.
    """
    schedule = default_reverse_schedule(model) if schedule is None else schedule
    if schedule.kind != "reverse":
        raise ParameterError("reverse_anneal needs a reverse schedule")
    x0 = np.array(check_assignment(initial, model.num_vars), dtype=np.int8)
    num_reads = _check_reads(num_reads)
    states = _run_reads(model, schedule, num_reads, seed, x0, keep_best=True)
    meta = {"sampler": "reverse_anneal", "seed": seed, "schedule": schedule.to_dict(),
            "num_reads": num_reads, "initial": "".join(map(str, x0.tolist()))}
    return _aggregate(model, states, meta)


def exact_sampleset(model: QuboModel) -> SampleSet:
    """The exhaustive ground state wrapped as a one-read SampleSet."""
    state, energy = argmin_exhaustive(model)
    return SampleSet((SampleRecord(state, energy, 1),), {"sampler": "exhaustive", "num_reads": 1})


def histogram(samples: SampleSet) -> list[tuple[Fraction, int]]:
    """Occurrences per distinct energy, ascending; no binning."""
    counts: dict[Fraction, int] = {}
    for r in samples.records:
        counts[r.energy] = counts.get(r.energy, 0) + r.count
    return sorted(counts.items())


def format_samples(samples: SampleSet) -> str:
    lines = [
        json.dumps({"state": r.bitstring, "energy": float(r.energy), "count": r.count})
        for r in samples.records
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def format_histogram(rows: Sequence[tuple[Fraction, int]]) -> str:
    lines = ["energy,occurrences"] + [f"{float(e)!r},{c}" for e, c in rows]
    return "\n".join(lines) + "\n"
