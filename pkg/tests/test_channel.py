from itertools import combinations

import numpy as np
import pytest

from flagcodes.channel import (
    CSV_HEADER,
    NetworkTopology,
    TransmissionConfig,
    butterfly,
    chain_distance,
    decode_derived_erasure,
    decode_min_distance,
    deficient_runs,
    erasure_pattern,
    error_count,
    monte_carlo,
    simulate_transfer,
    single_edge,
)
from flagcodes.codes import build_code, code_derived
from flagcodes.errors import (
    CapacityExceeded,
    EmptyCode,
    InconsistentInput,
    LengthMismatch,
    ParameterOutOfRange,
    ParseError,
    RetryLimitExceeded,
    RunTooLong,
)
from flagcodes.flags import FlagType, StutteringFlag, Subspace, flag_from_matrix, grassmann_distance, standard_flag, subspace_from_rows
from flagcodes.gfq import FieldMatrix, gf
from flagcodes.rng import XorShift64Star


def random_stuttering(F, n, m, rng):
    dims = sorted(int(x) for x in rng.integers(0, n + 1, size=m))
    g = FieldMatrix.random_invertible(F, n, rng)
    members = [subspace_from_rows(g.submatrix(0, d, 0, n)) if d else Subspace.zero(F, n) for d in dims]
    return StutteringFlag(members, F, n)


# -- topology ------------------------------------------------------------------------

def test_butterfly_topology():
    net = butterfly()
    assert net.source == "s" and net.receivers == ["t1", "t2"]
    assert net.min_cut("t1") == net.min_cut("t2") == 2
    assert net.order.index("s") == 0
    back = NetworkTopology.from_text(net.to_text())
    assert back.edges == net.edges and back.nodes == net.nodes


def test_parallel_edges_add_capacity():
    net = NetworkTopology.from_text("node s source\nnode t receiver\nedge s t\nedge s t\nedge s t\n")
    assert net.min_cut("t") == 3


@pytest.mark.parametrize("text", [
    "node s source\nnode t receiver\nedge s t\nedge t s\n",
    "node a internal\nnode t receiver\nedge a t\n",
    "node s source\nnode a internal\nnode t receiver\nedge s a\n",
    "node s source\nnode t receiver\nedge s x\n",
    "node s source\nnode t bogus\n",
    "node s source\nnode t receiver\nlink s t\n",
    "node s source\nnode t receiver\nnode u internal\nedge s t\nedge u s\n",
])
def test_topology_errors(text):
    with pytest.raises(ParseError):
        NetworkTopology.from_text(text)


# -- configuration ------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ParameterOutOfRange):
        TransmissionConfig(loss_prob=1.5)
    with pytest.raises(ParameterOutOfRange):
        TransmissionConfig(mode="targeted")
    with pytest.raises(ParameterOutOfRange):
        TransmissionConfig(buffering="sometimes")


# -- error count ----------------------------------------------------------------------

def test_error_count_examples(rng):
    F = gf(2)
    code = code_derived(4, 1, 2)
    L = code.codebook[5]
    assert error_count(L, StutteringFlag.from_flag(L)) == (0, (0, 0, 0), (0, 0, 0))
    zero = StutteringFlag([Subspace.zero(F, 4)] * 3, F, 4)
    assert error_count(L, zero) == (6, (1, 2, 3), (0, 0, 0))
    for a, b in combinations(code.codebook, 2):
        assert error_count(a, StutteringFlag.from_flag(b))[0] == 2 * grassmann_distance(a, b)
    with pytest.raises(LengthMismatch):
        error_count(L, StutteringFlag([Subspace.zero(F, 4)] * 2, F, 4))


@pytest.mark.parametrize("q", [2, 3])
def test_error_count_is_a_metric(q, rng):
    F = gf(q)
    for _ in range(200):
        n, m = int(rng.integers(2, 6)), int(rng.integers(1, 4))
        A, B, C = (random_stuttering(F, n, m, rng) for _ in range(3))
        ab = chain_distance(A, B)[0]
        assert ab == chain_distance(B, A)[0]
        assert (ab == 0) == (A == B)
        assert chain_distance(A, C)[0] <= ab + chain_distance(B, C)[0]


# -- simulation ----------------------------------------------------------------------

def test_zero_loss_recovers_codeword():
    code = code_derived(4, 1, 2)
    net = butterfly()
    for s in range(100):
        L = code.codebook[s % len(code)]
        rec = simulate_transfer(net, L, TransmissionConfig(seed=s, require_rank_condition=True))
        assert rec.error_count == 0 and rec.received == StutteringFlag.from_flag(L)


@pytest.mark.parametrize("buffering", ["cumulative", "reset"])
def test_random_mixing_record_invariants(buffering):
    code = build_code("sandwich", 2, m=1)
    net = butterfly()
    for s in range(40):
        L = code.codebook[s % len(code)]
        cfg = TransmissionConfig(seed=s, buffering=buffering, loss_prob=0.2 * (s % 3), errors_per_step=s % 2)
        rec = simulate_transfer(net, L, cfg)
        G = rec.received
        assert all(a <= b for a, b in zip(G.members, G.members[1:]))
        assert rec.error_count == sum(rec.rho) + sum(rec.f) == error_count(L, G)[0]
        X = L.adapted_basis
        for d, Y, E, Z in zip(L.dims, rec.Y, rec.E, rec.Z):
            assert Y.cols == d
            assert Z == Y @ FieldMatrix(L.field, X[:d]) + E
        if cfg.errors_per_step == 0:
            # erasures only: received spaces stay inside the sent ones
            assert all(W <= V for W, V in zip(G.members, L.members)) and sum(rec.f) == 0


def test_simulation_is_deterministic():
    code = code_derived(4, 1, 2)
    cfg = TransmissionConfig(seed=99, loss_prob=0.3, errors_per_step=1)
    a = simulate_transfer(butterfly(), code.codebook[3], cfg)
    b = simulate_transfer(butterfly(), code.codebook[3], cfg)
    assert a.received == b.received and a.Z == b.Z


def test_rank_condition_retry_limit():
    L = code_derived(4, 1, 2).codebook[0]
    with pytest.raises(RetryLimitExceeded):
        simulate_transfer(butterfly(), L, TransmissionConfig(loss_prob=1.0, require_rank_condition=True, retry_limit=5))


def test_capacity_exceeded():
    F = gf(2)
    L = standard_flag(FlagType(4, (1, 3)), F)
    with pytest.raises(CapacityExceeded):
        simulate_transfer(single_edge(), L, TransmissionConfig())
    # dimensions above the cut are fine as long as each increment fits
    simulate_transfer(butterfly(), standard_flag(FlagType(4, (1, 2, 3)), F), TransmissionConfig())


def test_targeted_single_erasure():
    code = code_derived(4, 1, 2)
    for idx, L in enumerate(code.codebook):
        for step in range(3):
            plan = tuple((1, 0) if i == step else (0, 0) for i in range(3))
            rec = simulate_transfer(None, L, TransmissionConfig(seed=idx, mode="targeted", targeted=plan))
            assert rec.error_count == 1 == error_count(L, rec.received)[0]
            assert rec.rho[step] == 1


def test_targeted_total_realised_exactly():
    code = build_code("sandwich", 2, m=1)
    r = XorShift64Star(5)
    for E in range(0, 5):
        L = code.codebook[r.below(len(code))]
        rec = simulate_transfer(butterfly(), L, TransmissionConfig(seed=E, mode="targeted", target_total=E))
        assert rec.error_count == E
        assert all(a <= b for a, b in zip(rec.received.members, rec.received.members[1:]))


def test_targeted_infeasible_request():
    L = code_derived(4, 1, 2).codebook[0]
    with pytest.raises(RetryLimitExceeded):
        simulate_transfer(None, L, TransmissionConfig(mode="targeted", targeted=((0, 0), (0, 0), (0, 2)), retry_limit=5))
    with pytest.raises(ParameterOutOfRange):
        simulate_transfer(None, L, TransmissionConfig(mode="targeted", targeted=((2, 0), (0, 0), (0, 0))))
    with pytest.raises(LengthMismatch):
        simulate_transfer(None, L, TransmissionConfig(mode="targeted", targeted=((0, 0),)))


# -- minimum-distance decoding -------------------------------------------------------

def test_decode_exact_codeword():
    code = code_derived(4, 1, 2)
    for i, L in enumerate(code.codebook):
        res = decode_min_distance(code, StutteringFlag.from_flag(L))
        assert res.index == i and res.error_count == 0 and res.unique


def test_decode_matches_brute_force_counts(rng):
    code = build_code("sandwich", 2, m=1)
    for _ in range(30):
        G = random_stuttering(code.field, 4, 3, rng)
        res = decode_min_distance(code, G)
        brute = [error_count(L, G)[0] for L in code.codebook]
        assert list(res.counts) == brute
        assert res.unique == (brute.count(min(brute)) == 1)


@pytest.mark.parametrize("construction,params", [("derived", {"n": 4, "k": 1}), ("sandwich", {"m": 1})])
def test_decoding_guarantee_below_bound(construction, params):
    code = build_code(construction, 2, **params)
    for E in range(0, 2):
        for s in range(60):
            sent = s % len(code)
            rec = simulate_transfer(None, code.codebook[sent], TransmissionConfig(seed=s, mode="targeted", target_total=E))
            res = decode_min_distance(code, rec.received)
            assert res.unique and res.index == sent


def test_decode_reports_ties():
    code = code_derived(4, 1, 2)
    found = False
    for a, b in combinations(code.codebook, 2):
        G = StutteringFlag([x & y for x, y in zip(a.members, b.members)], a.field, a.n)
        res = decode_min_distance(code, G)
        counts = list(res.counts)
        if counts.count(min(counts)) > 1:
            assert not res.unique
            found = True
            break
    assert found


def test_decode_errors():
    code = code_derived(4, 1, 2)
    F = gf(2)
    with pytest.raises(LengthMismatch):
        decode_min_distance(code, StutteringFlag([Subspace.zero(F, 4)], F, 4))
    empty = code_derived(4, 1, 2)
    empty.generators = []
    with pytest.raises(EmptyCode):
        decode_min_distance(empty, StutteringFlag([Subspace.zero(F, 4)] * 3, F, 4))


# -- erasure decoding ------------------------------------------------------------------

def test_deficient_runs():
    assert deficient_runs([1, 2, 3]) == []
    assert deficient_runs([0, 1, 3, 3, 3]) == [(1, 2), (4, 2)]


def test_erasure_decoder_no_erasures():
    code = code_derived(4, 1, 2)
    for g, L in zip(code.generators, code.codebook):
        assert decode_derived_erasure(4, 1, 2, StutteringFlag.from_flag(L)) == g


def test_erasure_decoder_examples():
    code = code_derived(5, 2, 2)
    for g, L in zip(code.generators, code.codebook):
        G = erasure_pattern(L, {2, 3})
        assert G.members[1] == G.members[2] == L.members[0]
        assert decode_derived_erasure(5, 2, 2, G) == g
    L = code_derived(4, 1, 2).codebook[6]
    with pytest.raises(RunTooLong):
        decode_derived_erasure(4, 1, 2, erasure_pattern(L, {1, 2}))


def test_erasure_decoder_random_subspaces_and_agreement(rng):
    code = code_derived(5, 2, 3)
    F = code.field
    for _ in range(80):
        idx = int(rng.integers(len(code)))
        L = code.codebook[idx]
        keep = [bool(rng.integers(0, 2)) for _ in range(4)]
        # random sub-flag: full members where kept, random smaller subspaces elsewhere, nested
        members, prev = [], Subspace.zero(F, 5)
        for j, (V, k) in enumerate(zip(L.members, keep), 1):
            if k:
                W = V
            else:
                extra = FieldMatrix(F, [[int(x) for x in rng.integers(0, 3, size=j)]]) @ FieldMatrix(F, L.adapted_basis[:j])
                W = prev + subspace_from_rows(extra)
                if W.dim == j:
                    W = prev
            members.append(W)
            prev = W
        G = StutteringFlag(members, F, 5)
        runs = deficient_runs(G.dims)
        if any(ln > 2 for _, ln in runs):
            with pytest.raises(RunTooLong):
                decode_derived_erasure(5, 2, 3, G)
            continue
        g = decode_derived_erasure(5, 2, 3, G)
        assert g == code.generators[idx]
        res = decode_min_distance(code, G)
        if res.unique:
            assert res.index == idx


def test_erasure_decoder_inconsistent_input():
    F = gf(2)
    L = code_derived(4, 1, 2).codebook[0]
    wrong = flag_from_matrix(FieldMatrix(F, [[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]), FlagType.full(4))
    with pytest.raises(InconsistentInput):
        decode_derived_erasure(4, 1, 2, StutteringFlag.from_flag(wrong))
    with pytest.raises(LengthMismatch):
        decode_derived_erasure(5, 1, 2, StutteringFlag.from_flag(L))


# -- Monte Carlo -----------------------------------------------------------------------

def test_monte_carlo_zero_injection_and_csv(tmp_path):
    code = code_derived(4, 1, 2)
    cfg = TransmissionConfig(seed=11, require_rank_condition=True)
    res = monte_carlo(code, butterfly(), cfg, 30)
    assert res.success_rate == 1.0 and all(r.error_count == 0 for r in res.rows)
    path = tmp_path / "out.csv"
    res.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER) == "trial,seed,sent_index,sum_rho,sum_f,error_count,decoded_index,unique,success"
    assert len(lines) == 31


def test_monte_carlo_deterministic():
    code = build_code("sandwich", 2, m=1)
    cfg = TransmissionConfig(seed=5, loss_prob=0.2, errors_per_step=1)
    a = monte_carlo(code, butterfly(), cfg, 25)
    b = monte_carlo(code, butterfly(), cfg, 25)
    assert [r.as_list() for r in a.rows] == [r.as_list() for r in b.rows]
    assert a.below_bound_failures == 0


def test_monte_carlo_above_bound_reports_failures():
    code = code_derived(4, 1, 2)
    res = monte_carlo(code, None, TransmissionConfig(seed=1, mode="targeted", target_total=2), 200)
    assert res.min_distance == 2 and res.below_bound == []
    assert res.trials - res.successes > 0


def test_monte_carlo_needs_trials():
    with pytest.raises(ParameterOutOfRange):
        monte_carlo(code_derived(4, 1, 2), butterfly(), TransmissionConfig(), 0)
