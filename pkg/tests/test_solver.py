import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import exhaustive_optimum, ratio_instance
from twocenter3d.generators import planted, planted_beta
from twocenter3d.miniball import candidate_radii, smallest_enclosing_ball
from twocenter3d.solver import (CRITICAL, NOT_COVERABLE, STRICT, ApproximateBySEB, DecisionOutcome,
                                InvalidRadius, SolverConfig, TwoCenterSolution, beta_lower_bound,
                                brute_force_decide, decide_cubic, decide_improved,
                                exponential_search, optimize_chan, optimize_reference, solve)

TOL = 1e-7


def _check_witness(P, out, r):
    c1, c2 = out.witness
    A, B = out.partition
    assert sorted(list(A) + list(B)) == list(range(len(P)))
    if len(A):
        assert np.linalg.norm(P[list(A)] - c1, axis=1).max() <= r + TOL
    if len(B):
        assert np.linalg.norm(P[list(B)] - c2, axis=1).max() <= r + TOL


def test_brute_force_examples(four_pairs):
    assert brute_force_decide(np.array([[0.0, 0, 0], [10, 0, 0]]), 0.1).variant == STRICT
    assert brute_force_decide(four_pairs, 1.0).variant == CRITICAL
    assert brute_force_decide(four_pairs, 0.99).variant == NOT_COVERABLE
    out = brute_force_decide(four_pairs, 1.01)
    assert out.variant == STRICT
    _check_witness(four_pairs, out, 1.01)


@pytest.mark.parametrize("engine", ["miniball", "polytope"])
def test_cubic_examples(four_pairs, engine):
    assert decide_cubic(np.array([[0.0, 0, 0], [10, 0, 0]]), 0.1, engine=engine).variant == STRICT
    assert decide_cubic(four_pairs, 1.0, engine=engine).variant == CRITICAL
    assert decide_cubic(four_pairs, 0.99, engine=engine).variant == NOT_COVERABLE


def _radius_ladder(P):
    cands = candidate_radii(P)
    rng = np.random.default_rng(len(P))
    picks = rng.choice(cands, size=min(3, len(cands)), replace=False)
    out = []
    for c in picks:
        out += [c * (1 - 1e-6), c, c * (1 + 1e-6)]
    return out


@pytest.mark.parametrize("seed", range(6))
def test_cubic_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(int(rng.integers(6, 12)), 3))
    for r in _radius_ladder(P):
        a = brute_force_decide(P, r)
        for engine in ("miniball", "polytope"):
            b = decide_cubic(P, r, engine=engine)
            assert a.variant == b.variant
            if b:
                _check_witness(P, b, r)


def test_cubic_tour_seed_invariance():
    rng = np.random.default_rng(5)
    P = rng.normal(size=(9, 3))
    r = optimize_reference(P).radius
    for rr in (r * 0.999, r, r * 1.001):
        assert decide_cubic(P, rr, seed=0).variant == decide_cubic(P, rr, seed=1).variant


def test_beta_lower_bound():
    assert beta_lower_bound(0.8, 1.0) == pytest.approx(0.5)
    assert beta_lower_bound(2 / 3, 1.0) == pytest.approx(1.0)
    assert beta_lower_bound(1.0, 1.0) == 0.0
    assert beta_lower_bound(1.0, 1.0, floor=0.05) == 0.05
    assert beta_lower_bound(0.1, 1.0) == 2.0
    with pytest.raises(InvalidRadius):
        beta_lower_bound(1.5, 1.0)


def test_improved_separated_clusters():
    inst = planted(10, seed=3, radius=1.0, distance=6.0)
    P = inst.points
    labels = np.array(inst.meta["labels"])
    r = max(smallest_enclosing_ball(P[labels == k]).radius for k in (0, 1)) * 1.01
    out = decide_improved(P, r, 1.0)
    assert out.variant == STRICT
    _check_witness(P, out, r)
    assert {frozenset(out.partition[0]), frozenset(out.partition[1])} == {
        frozenset(np.flatnonzero(labels == 0).tolist()), frozenset(np.flatnonzero(labels == 1).tolist())}


def test_improved_four_pairs(four_pairs):
    assert decide_improved(four_pairs, 1.0, 1.0).variant == CRITICAL


@pytest.mark.parametrize("seed", range(6))
def test_improved_matches_brute_force(seed):
    inst = planted(int(6 + seed), seed=seed, radius=1.0, distance=5.0)
    P, labels = inst.points, inst.meta["labels"]
    r_star = optimize_reference(P).radius
    for r in (r_star * 0.99, r_star, r_star * 1.01):
        beta = planted_beta(P, labels, r)
        if beta <= 0:
            continue
        beta = min(beta, 2.0)
        assert decide_improved(P, r, beta).variant == brute_force_decide(P, r).variant


@pytest.mark.parametrize("ratio, i", [(0.3, 1), (0.7, 2), (0.9, 4), (0.97, 6)])
def test_exponential_search_frozen(ratio, i):
    P = ratio_instance(ratio)
    r0 = smallest_enclosing_ball(P).radius
    r, got = exponential_search(P)
    assert got == i
    assert r == pytest.approx(r0 * (1 - 0.5 ** i))
    assert 0.5 ** i < 1 - ratio + 1e-12 <= 0.5 ** (i - 1) + 1e-12


def test_exponential_search_zero_optimum():
    P = np.array([[0.0, 0, 0], [10, 0, 0]])
    r, i = exponential_search(P)
    assert (r, i) == (2.5, 1)


@pytest.mark.parametrize("ratio, i", [(0.7, 2), (0.9, 4)])
def test_exponential_search_threshold_oracle(ratio, i):
    # decision stub accepting exactly r >= ratio
    def decide(r):
        return DecisionOutcome(STRICT if r >= ratio else NOT_COVERABLE)
    r, got = exponential_search(np.zeros((2, 3)), decide, r0=1.0)
    assert got == i and r == pytest.approx(1 - 0.5 ** i)


def test_chan_examples(four_pairs):
    P = np.array([[0.0, 0, 0], [10, 0, 0]])
    sol = solve(P, SolverConfig(algorithm="improved"))
    assert sol.radius == 0.0
    assert {tuple(sol.c1), tuple(sol.c2)} == {(0.0, 0.0, 0.0), (10.0, 0.0, 0.0)}
    sol = optimize_chan(four_pairs, 1.5, SolverConfig())
    assert sol.radius == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(8))
def test_chan_matches_reference(seed):
    rng = np.random.default_rng(100 + seed)
    P = rng.normal(size=(int(rng.integers(5, 12)), 3))
    ref = optimize_reference(P).radius
    for rho in (2, 4):
        sol = optimize_chan(P, smallest_enclosing_ball(P).radius, SolverConfig(rho=rho, seed=seed))
        assert sol.radius == pytest.approx(ref, rel=1e-9)


def test_reference_examples(tetra):
    assert optimize_reference(np.zeros((1, 3))).radius == 0.0
    assert optimize_reference(tetra).radius == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(3, 10), st.integers(0, 10 ** 6))
def test_reference_matches_exhaustive(n, seed):
    P = np.random.default_rng(seed).normal(size=(n, 3))
    assert optimize_reference(P).radius == pytest.approx(exhaustive_optimum(P), rel=1e-9, abs=1e-12)


def test_solve_epsilon_rules():
    P = ratio_instance(0.7)
    sol = solve(P, SolverConfig(epsilon=0.1))
    assert isinstance(sol, TwoCenterSolution)
    assert sol.radius == pytest.approx(0.7 * smallest_enclosing_ball(P).radius, rel=1e-9)
    P = ratio_instance(0.97)
    res = solve(P, SolverConfig(epsilon=0.3))
    assert isinstance(res, ApproximateBySEB) and res.approximate
    assert res.r_reached == pytest.approx(0.75 * res.ball.radius)


@pytest.mark.parametrize("algorithm", ["cubic", "improved", "auto", "bruteforce"])
@pytest.mark.parametrize("seed", range(4))
def test_solve_exact(algorithm, seed):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(int(rng.integers(4, 10)), 3))
    sol = solve(P, SolverConfig(algorithm=algorithm, seed=seed))
    assert sol.radius == pytest.approx(optimize_reference(P).radius, rel=1e-9)
    A, B = sol.partition
    for ids, c in ((A, sol.c1), (B, sol.c2)):
        if len(ids):
            assert np.linalg.norm(P[list(ids)] - c, axis=1).max() <= sol.radius + TOL
    assert sol.radius <= smallest_enclosing_ball(P).radius + TOL
    if "beta" in sol.meta and sol.meta["r_search"] < smallest_enclosing_ball(P).radius:
        r0 = smallest_enclosing_ball(P).radius
        assert sol.meta["beta"] >= (r0 / sol.meta["r_search"] - 1) - 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_decision_monotone_and_single_critical(seed):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(8, 3))
    r_star = optimize_reference(P).radius
    cands = sorted(candidate_radii(P))
    ladder = sorted(set(cands + [c * (1 + 1e-6) for c in cands] + [c * (1 - 1e-6) for c in cands]))
    seen = False
    for r in ladder:
        v = brute_force_decide(P, r).variant
        if seen:
            assert v == STRICT
        if v != NOT_COVERABLE:
            seen = True
        if v == CRITICAL:
            assert r == pytest.approx(r_star, rel=1e-9)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(algorithm="magic")
    with pytest.raises(ValueError):
        SolverConfig(epsilon=1.0)
    with pytest.raises(ValueError):
        SolverConfig(rho=1)
