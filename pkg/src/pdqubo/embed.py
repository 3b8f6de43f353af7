"""Chimera hardware graphs and minor embedding of logical graphs.

Node numbering: qubit ``((r * cols + c) * 2 + shore) * L + k`` is position
``k`` of shore ``shore`` in the unit cell at row ``r``, column ``c``.  Each
cell is a complete bipartite K_{L,L} between its two shores.  Shore 0 couples
to the same position in the cell below, shore 1 to the cell on the right.
"""

from __future__ import annotations

import heapq
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ParameterError, StructuralError
from .model import IsingModel, LogicalGraph, QuboModel, ising_to_qubo, qubo_to_ising, evaluate_qubo
from .sampler import SampleRecord, SampleSet

__all__ = [
    "HardwareGraph",
    "Embedding",
    "Violation",
    "chimera",
    "chimera_edge_count",
    "graph_from_edges",
    "find_embedding",
    "validate_embedding",
    "chain_stats",
    "default_chain_strength",
    "embed_qubo",
    "unembed_sampleset",
    "format_edge_list",
    "format_embedding",
]

DEFAULT_TRIES = 10
_OVERLAP_ROUNDS = 64
_SHRINK_ROUNDS = 8
# negotiated-congestion prices for shared qubits
_PRESENT_START = 0.5
_PRESENT_GROWTH = 1.3
_HISTORY_STEP = 0.5


@dataclass(frozen=True)
class HardwareGraph:
    rows: int
    cols: int
    shore: int
    adjacency: tuple[tuple[int, ...], ...]

    @property
    def num_nodes(self) -> int:
        return len(self.adjacency)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u < v]

    def has_edge(self, u: int, v: int) -> bool:
        return 0 <= u < self.num_nodes and v in self.adjacency[u]

    def coordinates(self, q: int) -> tuple[int, int, int, int]:
        """``(row, col, shore, position)`` of qubit ``q``."""
        L = self.shore
        cell, rest = divmod(q, 2 * L)
        s, k = divmod(rest, L)
        r, c = divmod(cell, self.cols)
        return r, c, s, k


def chimera_edge_count(M: int, N: int, L: int) -> int:
    return M * N * L * L + L * (M * (N - 1) + N * (M - 1))


def chimera(M: int, N: int, L: int) -> HardwareGraph:
    for name, val in (("rows", M), ("cols", N), ("shore", L)):
        if isinstance(val, bool) or not isinstance(val, int) or val < 1:
            raise ParameterError(f"{name} must be a positive integer, got {val!r}")

    def q(r, c, s, k):
        return ((r * N + c) * 2 + s) * L + k

    adj: list[set[int]] = [set() for _ in range(2 * M * N * L)]

    def link(a, b):
        adj[a].add(b)
        adj[b].add(a)

    for r in range(M):
        for c in range(N):
            for k in range(L):
                for k2 in range(L):
                    link(q(r, c, 0, k), q(r, c, 1, k2))
                if r + 1 < M:
                    link(q(r, c, 0, k), q(r + 1, c, 0, k))
                if c + 1 < N:
                    link(q(r, c, 1, k), q(r, c + 1, 1, k))
    return HardwareGraph(M, N, L, tuple(tuple(sorted(a)) for a in adj))


def graph_from_edges(num_nodes: int, edges: Iterable[Sequence[int]]) -> LogicalGraph:
    """Unweighted logical graph, handy for structural embedding problems."""
    nodes = tuple((i, Fraction(0)) for i in range(num_nodes))
    seen = sorted({(min(u, v), max(u, v)) for u, v, *_ in edges if u != v})
    return LogicalGraph(nodes, tuple((u, v, Fraction(1)) for u, v in seen))


@dataclass(frozen=True)
class Embedding:
    """Logical vertex -> chain of hardware qubits (sorted tuple)."""

    chains: Mapping[int, tuple[int, ...]]

    @classmethod
    def from_chains(cls, chains: Mapping[int, Iterable[int]]) -> Embedding:
        return cls({int(v): tuple(sorted(int(q) for q in c)) for v, c in sorted(chains.items())})


@dataclass(frozen=True)
class Violation:
    kind: str  # "overlap" | "disconnection" | "missing-edge"
    detail: str


def _connected(chain: Sequence[int], hardware: HardwareGraph) -> bool:
    members = set(chain)
    start = chain[0]
    seen = {start}
    stack = [start]
    while stack:
        q = stack.pop()
        for r in hardware.adjacency[q]:
            if r in members and r not in seen:
                seen.add(r)
                stack.append(r)
    return seen == members


def validate_embedding(logical: LogicalGraph, hardware: HardwareGraph, emb: Embedding) -> list[Violation]:
    """All problems with ``emb``; an empty list means it is a valid minor embedding."""
    out: list[Violation] = []
    owner: dict[int, list[int]] = {}
    for v, chain in emb.chains.items():
        for q in chain:
            owner.setdefault(q, []).append(v)
    for q in sorted(owner):
        if len(owner[q]) > 1:
            out.append(Violation("overlap", f"qubit {q} is shared by chains {owner[q]}"))
    for v, _ in logical.nodes:
        chain = emb.chains.get(v, ())
        if not chain:
            out.append(Violation("disconnection", f"vertex {v} has an empty chain"))
            continue
        bad = [q for q in chain if not 0 <= q < hardware.num_nodes]
        if bad:
            out.append(Violation("disconnection", f"chain of vertex {v} uses unknown qubits {bad}"))
            continue
        if not _connected(chain, hardware):
            out.append(Violation("disconnection", f"chain of vertex {v} is not connected"))
    for u, v, _ in logical.edges:
        cu, cv = emb.chains.get(u, ()), set(emb.chains.get(v, ()))
        if not any(r in cv for q in cu if 0 <= q < hardware.num_nodes for r in hardware.adjacency[q]):
            out.append(Violation("missing-edge", f"no coupler between chains of {u} and {v}"))
    return out


def chain_stats(emb: Embedding) -> tuple[int, float, int]:
    """``(max chain length, mean chain length, total qubits)``."""
    sizes = [len(c) for c in emb.chains.values()]
    if not sizes:
        return 0, 0.0, 0
    return max(sizes), sum(sizes) / len(sizes), sum(sizes)


class _Router:
    """One attempt of chain growth with penalized shortest-path re-routing."""

    def __init__(self, adj: dict[int, set[int]], hardware: HardwareGraph, rng: random.Random):
        self.adj = adj
        self.hw = hardware.adjacency
        self.rng = rng
        self.chains: dict[int, set[int]] = {}
        self.usage = [0] * hardware.num_nodes
        self.history = [0.0] * hardware.num_nodes
        self.present = _PRESENT_START

    def weight(self, q: int, strict: bool) -> float:
        u = self.usage[q]
        if strict:
            return 1.0 if u == 0 else math.inf
        return (1.0 + self.history[q]) * (1.0 + self.present * u)

    def negotiate(self):
        """Raise the price of qubits that are still shared."""
        for q, u in enumerate(self.usage):
            if u > 1:
                self.history[q] += _HISTORY_STEP * (u - 1)
        self.present *= _PRESENT_GROWTH

    def _dijkstra(self, sources: set[int], strict: bool):
        # touching a neighbour through a qubit it already shares is not free
        dist = {s: 0.0 if self.usage[s] <= 1 else self.weight(s, False) for s in sources}
        parent: dict[int, int] = {}
        heap = [(dist[s], s) for s in sorted(sources)]
        heapq.heapify(heap)
        while heap:
            d, q = heapq.heappop(heap)
            if d > dist[q]:
                continue
            for r in self.hw[q]:
                w = self.weight(r, strict)
                if w == math.inf:
                    continue
                nd = d + w
                if nd < dist.get(r, math.inf):
                    dist[r] = nd
                    parent[r] = q
                    heapq.heappush(heap, (nd, r))
        return dist, parent

    def _pick(self, candidates: list[int]) -> int:
        return candidates[self.rng.randrange(len(candidates))]

    def route(self, v: int, strict: bool = False) -> set[int] | None:
        placed = [u for u in sorted(self.adj[v]) if u in self.chains]
        n_hw = len(self.usage)
        if not placed:
            costs = [self.weight(q, strict) for q in range(n_hw)]
            best = min(costs)
            if best == math.inf:
                return None
            return {self._pick([q for q in range(n_hw) if costs[q] == best])}
        trees = [(self.chains[u], *self._dijkstra(self.chains[u], strict)) for u in placed]
        best, roots = math.inf, []
        for q in range(n_hw):
            wq = self.weight(q, strict)
            if wq == math.inf:
                continue
            total = wq
            for chain, dist, _ in trees:
                dq = dist.get(q, math.inf)
                total += dq if q in chain else dq - wq
            if total == math.inf:
                continue
            if total < best:
                best, roots = total, [q]
            elif total == best:
                roots.append(q)
        if not roots:
            return None
        root = self._pick(roots)
        new = {root}
        for chain, _, parent in trees:
            q = root
            while q not in chain:
                new.add(q)
                q = parent[q]
        return new

    def assign(self, v: int, chain: set[int]):
        self.chains[v] = chain
        for q in chain:
            self.usage[q] += 1

    def rip(self, v: int) -> set[int]:
        chain = self.chains.pop(v)
        for q in chain:
            self.usage[q] -= 1
        return chain

    def overlapping(self) -> bool:
        return any(u > 1 for u in self.usage)

    def order(self) -> list[int]:
        """Random breadth-first order so each vertex mostly lands next to placed neighbours."""
        verts = sorted(self.adj)
        self.rng.shuffle(verts)
        seen, out = set(), []
        for s in verts:
            if s in seen:
                continue
            seen.add(s)
            queue = [s]
            while queue:
                v = queue.pop(0)
                out.append(v)
                nbrs = sorted(self.adj[v] - seen)
                self.rng.shuffle(nbrs)
                for u in nbrs:
                    seen.add(u)
                    queue.append(u)
        return out

    def run(self) -> dict[int, set[int]] | None:
        order = self.order()
        for v in order:
            chain = self.route(v)
            if chain is None:
                return None
            self.assign(v, chain)
        for _ in range(_OVERLAP_ROUNDS):
            if not self.overlapping():
                break
            self.negotiate()
            sweep = list(order)
            self.rng.shuffle(sweep)
            for v in sweep:
                old = self.rip(v)
                chain = self.route(v)
                self.assign(v, old if chain is None else chain)
        if self.overlapping():
            return None
        for _ in range(_SHRINK_ROUNDS):
            improved = False
            for v in order:
                old = self.rip(v)
                chain = self.route(v, strict=True)
                if chain is not None and len(chain) < len(old):
                    self.assign(v, chain)
                    improved = True
                else:
                    self.assign(v, old)
            if not improved:
                break
        return self.chains


def find_embedding(logical: LogicalGraph, hardware: HardwareGraph, seed: int = 0,
                   tries: int = DEFAULT_TRIES) -> Embedding | None:
    """Heuristic minor embedding; ``None`` when every attempt fails.

    A failure does not prove that no embedding exists.  Successful results
    always pass :func:`validate_embedding`.
    """
    if logical.num_nodes == 0 or hardware.num_nodes == 0:
        raise ParameterError("embedding needs nonempty logical and hardware graphs")
    adj = logical.adjacency()
    rng = random.Random(seed)
    for _ in range(tries):
        chains = _Router(adj, hardware, rng).run()
        if chains is None:
            continue
        emb = Embedding.from_chains(chains)
        if not validate_embedding(logical, hardware, emb):
            return emb
    return None


def default_chain_strength(model: QuboModel) -> Fraction:
    """``1 + max |coefficient|`` of the model in spin form."""
    coeffs = qubo_to_ising(model).coefficients()
    return 1 + max((abs(c) for c in coeffs), default=Fraction(0))


def embed_qubo(model: QuboModel, emb: Embedding, hardware: HardwareGraph, chain_strength=None) -> QuboModel:
    """Spread ``model`` over the hardware qubits of ``emb``.

    Works in spin form: each field is split equally over its chain, each
    coupling equally over the couplers joining the two chains, and every
    coupler inside a chain gets ``-chain_strength``.  The offset is shifted so
    that any state with intact chains has exactly its logical energy.
    """
    s = default_chain_strength(model) if chain_strength is None else Fraction(chain_strength)
    ising = qubo_to_ising(model)
    fields: dict[int, Fraction] = {}
    couplings: dict[tuple[int, int], Fraction] = {}
    offset = ising.offset
    for v in range(model.num_vars):
        if v not in emb.chains or not emb.chains[v]:
            raise StructuralError(f"logical variable {v} has no chain")
    for v, h in ising.fields.items():
        chain = emb.chains[v]
        for q in chain:
            fields[q] = fields.get(q, Fraction(0)) + h / len(chain)
    for (u, v), J in ising.couplings.items():
        cv = set(emb.chains[v])
        links = [(a, b) for a in emb.chains[u] for b in hardware.adjacency[a] if b in cv]
        if not links:
            raise StructuralError(f"no coupler between the chains of {u} and {v}")
        for a, b in links:
            key = (min(a, b), max(a, b))
            couplings[key] = couplings.get(key, Fraction(0)) + J / len(links)
    for v, chain in emb.chains.items():
        members = set(chain)
        for a in chain:
            for b in hardware.adjacency[a]:
                if a < b and b in members:
                    couplings[(a, b)] = couplings.get((a, b), Fraction(0)) - s
                    offset += s
    return ising_to_qubo(IsingModel(hardware.num_nodes, fields, couplings, offset))


def unembed_sampleset(samples: SampleSet, emb: Embedding, model: QuboModel) -> tuple[SampleSet, float]:
    """Map hardware samples back to logical states, discarding reads with broken chains.

    Returns the logical SampleSet and the fraction of reads discarded.
    """
    counts: dict[tuple[int, ...], int] = {}
    broken = 0
    total = 0
    for r in samples.records:
        total += r.count
        state = []
        for v in range(model.num_vars):
            values = {r.state[q] for q in emb.chains[v]}
            if len(values) != 1:
                break
            state.append(values.pop())
        else:
            key = tuple(state)
            counts[key] = counts.get(key, 0) + r.count
            continue
        broken += r.count
    records = sorted(
        (SampleRecord(s, evaluate_qubo(model, s), c) for s, c in counts.items()),
        key=lambda rec: (rec.energy, rec.state),
    )
    meta = dict(samples.metadata)
    rate = broken / total if total else 0.0
    meta.update(chain_break_discards=broken, discard_rate=rate)
    return SampleSet(tuple(records), meta), rate


def format_edge_list(hardware: HardwareGraph) -> str:
    return "".join(f"{u} {v}\n" for u, v in hardware.edges)


def format_embedding(emb: Embedding) -> str:
    return json.dumps({str(v): sorted(c) for v, c in sorted(emb.chains.items())})
