"""Randomized structural invariants."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from consensus_lab.analysis import project
from consensus_lab.conditions import (
    ConditionParams,
    CutBalanceParams,
    Verdict,
    build_moreau_graph,
    check_cut_balance,
    check_property_B,
    check_property_C,
)
from consensus_lab.dynamics import SimConfig, propagator, simulate, simulate_multi_d
from consensus_lab.graphs import SelectorOracle, gamma_reduce
from consensus_lab.schedule import ConnectionSchedule

from helpers import random_piecewise, random_schedule

seeds = st.integers(0, 2 ** 32 - 1)
KINDS = ("zero", "constant", "hyperbolic", "inv_sqrt_left", "inv_cbrt_right")
N_CASES = settings(max_examples=100)


def brute_reachable(n, arrows):
    # transitive closure by repeated squaring of the boolean adjacency
    R = np.eye(n, dtype=bool)
    for j, k in arrows:
        R[j - 1, k - 1] = True
    for _ in range(n):
        R = R | ((R.astype(int) @ R.astype(int)) > 0)
    return {w + 1 for w in range(n) if R[:, w].all()}


@N_CASES
@given(seed=seeds, s=st.floats(0.0, 5.0), h=st.floats(1e-3, 3.0))
def test_propagator_row_stochastic(seed, s, h):
    sched = random_schedule(np.random.default_rng(seed), kinds=KINDS)
    P = propagator(sched, s, h)
    assert np.abs(P.sum(axis=1) - 1).max() <= 1e-12
    assert P.min() >= -1e-14


@N_CASES
@given(seed=seeds)
def test_support_contraction(seed):
    rng = np.random.default_rng(seed)
    sched = random_schedule(rng, kinds=KINDS)
    traj = simulate(sched, rng.normal(size=sched.n_agents), 6.0, SimConfig(max_step=0.25))
    x = traj.axis(0)
    assert np.all(np.diff(x.max(axis=1)) <= 1e-12)
    assert np.all(np.diff(x.min(axis=1)) >= -1e-12)


@N_CASES
@given(seed=seeds)
def test_projection_consistency(seed):
    rng = np.random.default_rng(seed)
    sched = random_schedule(rng, t_max=3.0)
    X0 = rng.normal(size=(sched.n_agents, 3))
    v = rng.normal(size=3)
    cfg = SimConfig(max_step=0.25)
    lhs = project(simulate_multi_d(sched, X0, 3.0, cfg), v).axis(0)
    rhs = simulate(sched, X0 @ v, 3.0, cfg).axis(0)
    assert np.abs(lhs - rhs).max() <= 1e-9


@N_CASES
@given(n=st.integers(1, 8), data=st.data())
def test_gamma_output_reachable(n, data):
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    choice = data.draw(st.lists(st.integers(1, n), min_size=len(pairs), max_size=len(pairs)))
    oracle = SelectorOracle(dict(zip(pairs, choice)))
    node = gamma_reduce(n, oracle)
    assert node in brute_reachable(n, oracle.induced_graph(n).arrows)


def periodic_pair_schedule(rng, period):
    f = random_piecewise(rng, n_cells=4, period=period, kinds=("zero", "constant", "hyperbolic"))
    return ConnectionSchedule(2, {(1, 2): f})


def separated_mu(rng, masses):
    # keep mu away from the attained masses so the comparison is not decided by rounding
    lo, hi = float(np.min(masses)), float(np.max(masses))
    for _ in range(100):
        mu = rng.uniform(0.3 * max(lo, 0.05), 1.5 * max(hi, 0.1))
        if np.abs(np.asarray(masses) - mu).min() > 1e-6:
            return mu
    return None


class TestPropertyBC:
    @N_CASES
    @given(seed=seeds, mult=st.integers(1, 3), n_windows=st.integers(3, 8))
    def test_equivalent_when_window_spans_periods(self, seed, mult, n_windows):
        rng = np.random.default_rng(seed)
        period = float(rng.uniform(0.5, 2.0))
        sched = periodic_pair_schedule(rng, period)
        T = mult * period
        H = n_windows * T
        fn = sched.entry(1, 2)
        mu = separated_mu(rng, [fn.integral(0.0, T)])
        if mu is None:
            return
        b = check_property_B(sched, (1, 2), ConditionParams(T=T, mu=mu, horizon=H))
        c = check_property_C(sched, (1, 2), [n * T for n in range(n_windows)], T, mu, max_gap=T)
        assert b.holds == c.holds

    @N_CASES
    @given(seed=seeds)
    def test_B_implies_C(self, seed):
        rng = np.random.default_rng(seed)
        sched = periodic_pair_schedule(rng, float(rng.uniform(0.5, 2.0)))
        T = float(rng.uniform(0.3, 2.5))
        H = 6 * T
        mu = float(rng.uniform(0.05, 2.0))
        b = check_property_B(sched, (1, 2), ConditionParams(T=T, mu=mu, horizon=H))
        c = check_property_C(sched, (1, 2), [n * T for n in range(6)], T, mu, max_gap=T)
        assert (not b.holds) or c.holds

    @N_CASES
    @given(seed=seeds)
    def test_C_implies_B_with_double_window(self, seed):
        rng = np.random.default_rng(seed)
        sched = periodic_pair_schedule(rng, float(rng.uniform(0.5, 2.0)))
        T = float(rng.uniform(0.3, 2.5))
        mu = float(rng.uniform(0.05, 2.0))
        c = check_property_C(sched, (1, 2), [n * T for n in range(8)], T, mu, max_gap=T)
        b = check_property_B(sched, (1, 2), ConditionParams(T=2 * T, mu=mu, horizon=8 * T))
        assert (not c.holds) or b.holds


@N_CASES
@given(seed=seeds, mu=st.floats(0.05, 1.5), shrink=st.floats(0.1, 1.0))
def test_moreau_monotone_in_mu(seed, mu, shrink):
    rng = np.random.default_rng(seed)
    sched = random_schedule(rng, n=3, t_max=8.0)
    g_hi, _, _ = build_moreau_graph(sched, 1.0, mu, 8.0)
    g_lo, _, _ = build_moreau_graph(sched, 1.0, mu * shrink, 8.0)
    assert g_hi.arrows <= g_lo.arrows


@N_CASES
@given(seed=seeds)
def test_cut_balance_symmetric(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    entries = {}
    for j, k in itertools.combinations(range(1, n + 1), 2):
        if rng.random() < 0.7:
            f = random_piecewise(rng, 6.0, kinds=("zero", "constant", "hyperbolic", "inv_sqrt_left"))
            entries[(j, k)] = entries[(k, j)] = f
    sched = ConnectionSchedule(n, entries)
    taus = tuple(float(t) for t in range(7))
    M = max(sched.window_matrix(a, b).sum() for a, b in zip(taus, taus[1:])) + 1e-12
    rep = check_cut_balance(sched, CutBalanceParams(taus, K=1.0, M=M))
    assert rep.verdict == Verdict.HOLDS


@pytest.mark.parametrize("n", [3, 5, 8])
def test_brute_reachable_oracle_sanity(n):
    # a directed cycle makes every node globally reachable
    arrows = {(i, i % n + 1) for i in range(1, n + 1)}
    assert brute_reachable(n, arrows) == set(range(1, n + 1))
