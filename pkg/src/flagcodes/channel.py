"""Multicast transmission of flags through a random linear network, and decoding.

At time step ``i`` the source sends ``y X_i`` on each outgoing edge, where the
rows of ``X_i`` are the first ``d_i`` vectors of an adapted basis of the sent
flag.  Every other node sends a fresh random combination of the packets it
holds.  The receiver accumulates ``W_i``, the span of everything received in
steps ``1..i``.

Packets are tracked as pairs (coefficients over ``x_1..x_{d_m}``, additive
error vector), so the matrices ``Y_i`` and ``E_i`` of ``Z_i = Y_i X_i + E_i``
are known exactly for every run.

Random draws happen in a fixed order, so a seed reproduces a run on any
implementation of :class:`~flagcodes.rng.XorShift64Star`.  For each step in
ascending order:

1. the error edges for the step are drawn with ``sample(#edges, errors_per_step)``;
2. edges are visited in order of (topological position of the tail, file order):
   an error edge draws ``n`` payload symbols; otherwise one Bernoulli loss draw
   is made when ``loss_prob > 0``; a surviving edge then draws one coefficient
   per packet available at its tail (``d_i`` at the source).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field, replace
from typing import Sequence

import networkx as nx
import numpy as np

from . import kernels
from .codes import FlagCode
from .errors import (
    AmbientMismatch,
    CapacityExceeded,
    EmptyCode,
    InconsistentInput,
    LengthMismatch,
    ParameterOutOfRange,
    ParseError,
    RetryLimitExceeded,
    RunTooLong,
)
from .flags import Flag, FlagType, StutteringFlag, Subspace, subspace_from_rows
from .gfq import Field, FieldMatrix, gf
from .rng import XorShift64Star

ROLES = ("source", "internal", "receiver")


# ---------------------------------------------------------------------------
# topology
# ---------------------------------------------------------------------------


@dataclass
class NetworkTopology:
    """Acyclic multigraph with one source; each edge carries one packet per step."""

    nodes: dict[str, str]
    edges: list[tuple[str, str]]

    def __post_init__(self):
        for name, role in self.nodes.items():
            if role not in ROLES:
                raise ParseError(f"node {name!r}: unknown role {role!r}")
        sources = [v for v, r in self.nodes.items() if r == "source"]
        if len(sources) != 1:
            raise ParseError(f"need exactly one source, found {len(sources)}")
        if not self.receivers:
            raise ParseError("need at least one receiver")
        for u, v in self.edges:
            if u not in self.nodes or v not in self.nodes:
                raise ParseError(f"edge {u}->{v} references an unknown node")
        self.source = sources[0]
        g = self.graph()
        if not nx.is_directed_acyclic_graph(g):
            raise ParseError("network has a directed cycle")
        if g.in_degree(self.source) > 0:
            raise ParseError("the source has incoming edges")
        reach = nx.descendants(g, self.source)
        for r in self.receivers:
            if r not in reach:
                raise ParseError(f"receiver {r!r} is unreachable from the source")
        pos = {v: i for i, v in enumerate(self.nodes)}
        self.order = list(nx.lexicographical_topological_sort(g, key=pos.__getitem__))
        rank = {v: i for i, v in enumerate(self.order)}
        self.edge_order = sorted(range(len(self.edges)), key=lambda e: (rank[self.edges[e][0]], e))

    @property
    def receivers(self) -> list[str]:
        return [v for v, r in self.nodes.items() if r == "receiver"]

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        for u, v in self.edges:
            if g.has_edge(u, v):
                g[u][v]["capacity"] += 1
            else:
                g.add_edge(u, v, capacity=1)
        return g

    def min_cut(self, receiver: str) -> int:
        return int(nx.maximum_flow_value(self.graph(), self.source, receiver))

    def to_text(self) -> str:
        lines = [f"node {v} {r}" for v, r in self.nodes.items()]
        lines += [f"edge {u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "NetworkTopology":
        nodes: dict[str, str] = {}
        edges: list[tuple[str, str]] = []
        for lineno, line in enumerate(text.splitlines(), 1):
            tok = line.split("#", 1)[0].split()
            if not tok:
                continue
            if tok[0] == "node" and len(tok) == 3:
                if tok[1] in nodes:
                    raise ParseError(f"line {lineno}: duplicate node {tok[1]!r}")
                nodes[tok[1]] = tok[2]
            elif tok[0] == "edge" and len(tok) == 3:
                edges.append((tok[1], tok[2]))
            else:
                raise ParseError(f"line {lineno}: cannot parse {line!r}")
        return cls(nodes, edges)

    @classmethod
    def read(cls, path) -> "NetworkTopology":
        with open(path) as fh:
            return cls.from_text(fh.read())


def butterfly() -> NetworkTopology:
    """The two-receiver butterfly network; min-cut 2 to each receiver."""
    nodes = {"s": "source", "a": "internal", "b": "internal", "c": "internal",
             "d": "internal", "t1": "receiver", "t2": "receiver"}
    edges = [("s", "a"), ("s", "b"), ("a", "c"), ("b", "c"), ("c", "d"),
             ("a", "t1"), ("d", "t1"), ("b", "t2"), ("d", "t2")]
    return NetworkTopology(nodes, edges)


def single_edge() -> NetworkTopology:
    return NetworkTopology({"s": "source", "t": "receiver"}, [("s", "t")])


# ---------------------------------------------------------------------------
# configuration and records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransmissionConfig:
    seed: int = 0
    mode: str = "random"
    loss_prob: float = 0.0
    errors_per_step: int = 0
    targeted: tuple[tuple[int, int], ...] | None = None
    target_total: int | None = None
    retry_limit: int = 1000
    buffering: str = "cumulative"
    require_rank_condition: bool = False
    receiver: str | None = None

    def __post_init__(self):
        if self.mode not in ("random", "targeted"):
            raise ParameterOutOfRange(f"unknown mode {self.mode!r}")
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ParameterOutOfRange("loss probability must lie in [0, 1]")
        if self.errors_per_step < 0 or self.retry_limit < 1:
            raise ParameterOutOfRange("counts must be non-negative and retry_limit >= 1")
        if self.buffering not in ("cumulative", "reset"):
            raise ParameterOutOfRange(f"unknown buffering {self.buffering!r}")
        if self.mode == "targeted" and (self.targeted is None) == (self.target_total is None):
            raise ParameterOutOfRange("targeted mode needs exactly one of targeted / target_total")
        if self.targeted is not None:
            object.__setattr__(self, "targeted", tuple((int(r), int(f)) for r, f in self.targeted))
            if any(r < 0 or f < 0 for r, f in self.targeted):
                raise ParameterOutOfRange("requested counts must be non-negative")
        if self.target_total is not None and self.target_total < 0:
            raise ParameterOutOfRange("target_total must be non-negative")


@dataclass
class TransmissionRecord:
    sent: Flag
    received: StutteringFlag
    Z: list[FieldMatrix]
    rho: tuple[int, ...]
    f: tuple[int, ...]
    error_count: int
    Y: list[FieldMatrix] | None = None
    E: list[FieldMatrix] | None = None
    receiver: str | None = None
    retries: int = 0


# ---------------------------------------------------------------------------
# error count
# ---------------------------------------------------------------------------


def _rank(F: Field, a: np.ndarray) -> int:
    if a.shape[0] == 0:
        return 0
    return int(kernels.rank(np.ascontiguousarray(a), *F.tables))


def chain_distance(A, B) -> tuple[int, tuple[int, ...], tuple[int, ...]]:
    """``(sum_i dim(A_i + B_i) - dim(A_i & B_i), rho, f)`` for chains of equal length.

    ``rho_i = dim A_i - dim(A_i & B_i)`` and ``f_i = dim B_i - dim(A_i & B_i)``.
    """
    if A.m != B.m:
        raise LengthMismatch(f"chains of lengths {A.m} and {B.m}")
    if A.n != B.n or A.field != B.field:
        raise AmbientMismatch("chains live in different ambient spaces")
    rho, f, total = [], [], 0
    for V, W in zip(A.members, B.members):
        join = _rank(A.field, np.vstack([V.basis.a, W.basis.a]))
        meet = V.dim + W.dim - join
        rho.append(V.dim - meet)
        f.append(W.dim - meet)
        total += join - meet
    assert total == sum(rho) + sum(f)
    return total, tuple(rho), tuple(f)


def error_count(L: Flag, G: StutteringFlag) -> tuple[int, tuple[int, ...], tuple[int, ...]]:
    """Error count ``E(L, G)`` with per-step erasures ``rho`` and errors ``f``."""
    return chain_distance(L, G)


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


def _combine(F: Field, coeffs: np.ndarray, rows: np.ndarray) -> np.ndarray:
    return kernels.matmul(np.ascontiguousarray(coeffs.reshape(1, -1)), np.ascontiguousarray(rows), F.add_t, F.mul_t)[0]


def check_capacity(net: NetworkTopology, ftype: FlagType, receiver: str) -> None:
    cut = net.min_cut(receiver)
    worst = max(ftype.increments, default=0)
    if worst > cut:
        raise CapacityExceeded(f"increment {worst} exceeds min-cut {cut} to {receiver!r}")


def _propagate_step(net, F, X, d_i, dm, n, buffers, cfg, rng):
    """One time step through the DAG; returns packets arriving at each receiver."""
    arrivals: dict[str, list[np.ndarray]] = {r: [] for r in net.receivers}
    error_edges = set(rng.sample(len(net.edges), min(cfg.errors_per_step, len(net.edges))))
    fresh: dict[str, list[np.ndarray]] = {v: [] for v in net.nodes}
    for e in net.edge_order:
        u, v = net.edges[e]
        if e in error_edges:
            pkt = np.concatenate([np.zeros(dm, dtype=np.int64), rng.vector(F.order, n)])
        else:
            if cfg.loss_prob > 0 and rng.bernoulli(cfg.loss_prob):
                continue
            if u == net.source:
                y = rng.vector(F.order, d_i)
                pkt = np.zeros(dm + n, dtype=np.int64)
                pkt[:d_i] = y
            else:
                held = buffers[u] + fresh[u]
                if not held:
                    continue
                c = rng.vector(F.order, len(held))
                pkt = _combine(F, c, np.stack(held))
        fresh[v].append(pkt)
        if v in arrivals:
            arrivals[v].append(pkt)
    for v, pk in fresh.items():
        buffers[v].extend(pk)
    return arrivals


def _simulate_random(net, L, cfg, rng, receiver):
    F, n = L.field, L.n
    dims = L.dims
    dm = dims[-1]
    X = L.adapted_basis
    buffers = {v: [] for v in net.nodes}
    Ys, Es, Zs = [], [], []
    retries = 0
    prev = 0
    for d_i in dims:
        if cfg.buffering == "reset":
            buffers = {v: [] for v in net.nodes}
        snapshot = {v: list(b) for v, b in buffers.items()}
        while True:
            arrivals = _propagate_step(net, F, X, d_i, dm, n, buffers, cfg, rng)
            pk = arrivals[receiver]
            P = np.stack(pk) if pk else np.zeros((0, dm + n), dtype=np.int64)
            Y = P[:, :d_i]
            if not cfg.require_rank_condition or _rank(F, Y[:, prev:d_i]) == d_i - prev:
                break
            retries += 1
            if retries >= cfg.retry_limit:
                raise RetryLimitExceeded("rank condition on the last k_i columns never met")
            buffers = {v: list(b) for v, b in snapshot.items()}
        Eerr = P[:, dm:]
        YX = kernels.matmul(np.ascontiguousarray(Y), np.ascontiguousarray(X[:d_i]), F.add_t, F.mul_t)
        Z = F.add_t[YX, Eerr]
        Ys.append(FieldMatrix._wrap(F, Y))
        Es.append(FieldMatrix._wrap(F, Eerr))
        Zs.append(FieldMatrix._wrap(F, Z))
        prev = d_i
    return Zs, Ys, Es, retries


def _random_in_span(F: Field, basis: np.ndarray, rng: XorShift64Star) -> np.ndarray:
    c = rng.vector(F.order, basis.shape[0])
    return _combine(F, c, basis)


def _targeted_once(L: Flag, plan, rng) -> list[np.ndarray] | None:
    """Build ``W_i = W_{i-1} + S_i + F_i`` realising ``plan``; None when infeasible."""
    F, n = L.field, L.n
    X = L.adapted_basis
    W = np.zeros((0, n), dtype=np.int64)
    increments = []
    for d_i, (rho, f) in zip(L.dims, plan):
        V = X[:d_i]
        target_s = d_i - rho
        if target_s < 0:
            return None
        # S starts as W_{i-1} & V_i so that (W_{i-1} + S) & V_i = S
        carry = subspace_from_rows(FieldMatrix._wrap(F, W)) & subspace_from_rows(FieldMatrix._wrap(F, V))
        S = carry.basis.a
        if S.shape[0] > target_s:
            return None
        while S.shape[0] < target_s:
            v = _random_in_span(F, V, rng)
            if _rank(F, np.vstack([S, v])) > S.shape[0]:
                S = np.vstack([S, v])
        new = np.vstack([W, S])
        cur = _rank(F, new)
        f_carry = cur - target_s
        if f_carry > f or f - f_carry > n - _rank(F, np.vstack([new, V])):
            return None
        while f_carry < f:
            v = rng.vector(F.order, n)
            if _rank(F, np.vstack([new, V, v])) > _rank(F, np.vstack([new, V])):
                new = np.vstack([new, v])
                f_carry += 1
        step_rows = subspace_from_rows(FieldMatrix._wrap(F, new)).basis.a
        increments.append(new[W.shape[0]:])
        W = step_rows
    return increments


def _random_plan(L: Flag, total: int, rng: XorShift64Star) -> list[tuple[int, int]]:
    m, n = L.m, L.n
    plan = [[0, 0] for _ in range(m)]
    slots = []
    for i, d in enumerate(L.dims):
        slots += [(i, 0)] * d + [(i, 1)] * (n - d)
    for idx in rng.sample(len(slots), min(total, len(slots))):
        i, kind = slots[idx]
        plan[i][kind] += 1
    return [tuple(p) for p in plan]


def _simulate_targeted(L: Flag, cfg: TransmissionConfig, rng: XorShift64Star):
    if cfg.targeted is not None:
        if len(cfg.targeted) != L.m:
            raise LengthMismatch(f"{len(cfg.targeted)} requested steps for a flag of length {L.m}")
        for (rho, _), d in zip(cfg.targeted, L.dims):
            if rho > d:
                raise ParameterOutOfRange(f"requested {rho} erasures at a step of dimension {d}")
    elif cfg.target_total > sum(L.dims) + sum(L.n - d for d in L.dims):
        raise ParameterOutOfRange("target_total exceeds the largest possible error count")
    for attempt in range(cfg.retry_limit):
        plan = list(cfg.targeted) if cfg.targeted is not None else _random_plan(L, cfg.target_total, rng)
        rows = _targeted_once(L, plan, rng)
        if rows is None:
            continue
        F = L.field
        Zs = [FieldMatrix._wrap(F, r) for r in rows]
        G = _chain_from_increments(F, L.n, rows)
        E, rho, f = error_count(L, G)
        if list(zip(rho, f)) == [tuple(p) for p in plan]:
            return Zs, attempt
    raise RetryLimitExceeded(f"could not realise the requested counts in {cfg.retry_limit} attempts")


def _chain_from_increments(F: Field, n: int, Zs: Sequence[np.ndarray]) -> StutteringFlag:
    members, acc = [], np.zeros((0, n), dtype=np.int64)
    for Z in Zs:
        acc = np.vstack([acc, Z])
        members.append(subspace_from_rows(FieldMatrix._wrap(F, acc)))
    return StutteringFlag(members, F, n)


def simulate_transfer(net: NetworkTopology | None, codeword: Flag, cfg: TransmissionConfig,
                      rng: XorShift64Star | None = None) -> TransmissionRecord:
    """Send ``codeword`` once and return what the receiver saw.

    Random mode pushes packets through ``net``.  Targeted mode builds the
    received chain directly with the requested per-step counts (``net`` is
    then only used for the capacity check and may be None).
    """
    rng = rng if rng is not None else XorShift64Star(cfg.seed)
    receiver = None
    if net is not None:
        receiver = cfg.receiver or net.receivers[0]
        if receiver not in net.receivers:
            raise ParameterOutOfRange(f"{receiver!r} is not a receiver")
        check_capacity(net, codeword.type, receiver)
    F, n = codeword.field, codeword.n
    Ys = Es = None
    if cfg.mode == "targeted":
        Zs, retries = _simulate_targeted(codeword, cfg, rng)
    else:
        if net is None:
            raise ParameterOutOfRange("random mode needs a network")
        Zs, Ys, Es, retries = _simulate_random(net, codeword, cfg, rng, receiver)
    G = _chain_from_increments(F, n, [Z.a for Z in Zs])
    E, rho, f = error_count(codeword, G)
    assert E == sum(rho) + sum(f)
    return TransmissionRecord(codeword, G, Zs, rho, f, E, Ys, Es, receiver, retries)


# ---------------------------------------------------------------------------
# decoders
# ---------------------------------------------------------------------------


@dataclass
class DecodeResult:
    codeword: Flag
    index: int
    error_count: int
    unique: bool
    counts: np.ndarray = dc_field(repr=False, default=None)


def decode_min_distance(code: FlagCode, G: StutteringFlag) -> DecodeResult:
    """Codeword minimising the error count; ``unique`` is False on a tie."""
    if len(code) == 0:
        raise EmptyCode("cannot decode with an empty code")
    if G.m != code.type.m:
        raise LengthMismatch(f"received chain of length {G.m}, code type has {code.type.m}")
    if G.n != code.n or G.field != code.field:
        raise AmbientMismatch("received chain lives in a different ambient space")
    Y = np.ascontiguousarray(G.adapted_basis, dtype=np.int64)
    dY = np.array(G.dims, dtype=np.int64)
    counts = np.asarray(kernels.error_counts(code.bases, np.array(code.type.dims, dtype=np.int64),
                                             Y, dY, *code.field.tables))
    best = int(counts.min())
    winners = np.flatnonzero(counts == best)
    idx = int(winners[0])
    return DecodeResult(code.codebook[idx], idx, best, len(winners) == 1, counts)


def erasure_pattern(L: Flag, erased) -> StutteringFlag:
    """Replace each erased member (1-based steps) by the last kept member before it."""
    erased = set(erased)
    F, n = L.field, L.n
    last = Subspace.zero(F, n)
    members = []
    for j, V in enumerate(L.members, 1):
        if j not in erased:
            last = V
        members.append(last)
    return StutteringFlag(members, F, n)


def deficient_runs(dims: Sequence[int]) -> list[tuple[int, int]]:
    """Maximal runs ``(start, length)`` of 1-based steps ``j`` with ``dims[j-1] < j``."""
    runs, start = [], None
    for j, d in enumerate(list(dims) + [None], 1):
        bad = d is not None and d < j
        if bad and start is None:
            start = j
        elif not bad and start is not None:
            runs.append((start, j - start))
            start = None
    return runs


def decode_derived_erasure(n: int, k: int, q: int, G: StutteringFlag) -> FieldMatrix:
    """Recover ``g`` in D^(k) from an erasure-only reception of ``Delta_0 g``.

    Each full-dimensional step ``j`` exposes rows ``max(1, j-k)..j`` of ``g``
    as the matching rows of the reduced echelon basis of ``W_j``.
    """
    F = gf(q)
    if G.m != n - 1:
        raise LengthMismatch(f"need a chain of length {n - 1}, got {G.m}")
    if G.n != n or G.field != F:
        raise AmbientMismatch("received chain does not live in GF(q)^n")
    dims = G.dims
    if any(d > j for j, d in enumerate(dims, 1)):
        raise InconsistentInput("a member is larger than the sent one; not an erasure-only input")
    for start, length in deficient_runs(dims):
        if length > k:
            raise RunTooLong(f"steps {start}..{start + length - 1} are deficient (run {length} > k={k})")
    rows: dict[int, np.ndarray] = {}
    for j, W in enumerate(G.members, 1):
        if W.dim != j:
            continue
        if W.pivots != tuple(range(j)):
            raise InconsistentInput(f"step {j} has pivots {W.pivots}, expected the first {j} columns")
        R = W.basis.a
        for r in range(max(1, j - k), j + 1):
            row = R[r - 1]
            if row[r:r + k].any():
                raise InconsistentInput(f"row {r} has entries on the zero superdiagonals")
            if r in rows and not np.array_equal(rows[r], row):
                raise InconsistentInput(f"row {r} read differently at two steps")
            rows[r] = row.copy()
    g = np.eye(n, dtype=np.int64)
    for r in range(1, n + 1):
        if r in rows:
            g[r - 1] = rows[r]
        elif r <= n - k - 1:
            raise InconsistentInput(f"row {r} could not be recovered")
    if not all(np.array_equal(g[r - 1], np.eye(n, dtype=np.int64)[r - 1]) for r in range(max(1, n - k), n + 1)):
        raise InconsistentInput("rows below the free region must be unit vectors")
    gm = FieldMatrix._wrap(F, g)
    sent = Flag([subspace_from_rows(gm.submatrix(0, j, 0, n)) for j in range(1, n)], F, n)
    for V, W in zip(sent.members, G.members):
        if not W <= V or (W.dim == V.dim and W != V):
            raise InconsistentInput("recovered matrix does not explain the received chain")
    return gm


# ---------------------------------------------------------------------------
# Monte Carlo harness
# ---------------------------------------------------------------------------

CSV_HEADER = ["trial", "seed", "sent_index", "sum_rho", "sum_f", "error_count",
              "decoded_index", "unique", "success"]


@dataclass
class TrialRow:
    trial: int
    seed: int
    sent_index: int
    sum_rho: int
    sum_f: int
    error_count: int
    decoded_index: int
    unique: bool
    success: bool

    def as_list(self) -> list:
        return [self.trial, self.seed, self.sent_index, self.sum_rho, self.sum_f, self.error_count,
                self.decoded_index, int(self.unique), int(self.success)]


@dataclass
class MonteCarloResult:
    rows: list[TrialRow]
    min_distance: int

    @property
    def trials(self) -> int:
        return len(self.rows)

    @property
    def successes(self) -> int:
        return sum(r.success for r in self.rows)

    @property
    def below_bound(self) -> list[TrialRow]:
        return [r for r in self.rows if r.error_count < self.min_distance]

    @property
    def below_bound_failures(self) -> int:
        return sum(not r.success for r in self.below_bound)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    @property
    def success_rate_below_bound(self) -> float:
        rows = self.below_bound
        return sum(r.success for r in rows) / len(rows) if rows else 1.0

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for r in self.rows:
                w.writerow(r.as_list())


def monte_carlo(code: FlagCode, net: NetworkTopology | None, cfg: TransmissionConfig, trials: int,
                min_distance: int | None = None) -> MonteCarloResult:
    """Independent trials, each with its own generator seeded from ``cfg.seed``."""
    if trials < 1:
        raise ParameterOutOfRange("need at least one trial")
    if min_distance is None:
        from .codes import code_min_distance
        min_distance = code_min_distance(code) if len(code) > 1 else code.n * code.type.m + 1
    master = XorShift64Star(cfg.seed)
    rows = []
    for t in range(trials):
        seed = master.next_u64()
        rng = XorShift64Star(seed)
        sent = rng.below(len(code))
        rec = simulate_transfer(net, code.codebook[sent], replace(cfg, seed=seed), rng)
        res = decode_min_distance(code, rec.received)
        ok = res.unique and res.index == sent
        rows.append(TrialRow(t, seed, sent, sum(rec.rho), sum(rec.f), rec.error_count, res.index, res.unique, ok))
    return MonteCarloResult(rows, min_distance)
