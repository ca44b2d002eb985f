"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (visible without ``-s``)
before asserting, so ``pytest tests/test_acceptance.py`` doubles as a report.
"""

import itertools
import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from consensus_lab.analysis import NOT_REACHED, diagnose, project
from consensus_lab.conditions import (
    ConditionParams,
    CutBalanceParams,
    Verdict,
    build_limit_graph_thm3,
    build_limit_graph_thm6,
    build_moreau_graph,
    check_cut_balance,
    check_property_B,
    check_property_C,
    estimate_limits,
)
from consensus_lab.dynamics import SimConfig, propagator, simulate, simulate_multi_d
from consensus_lab.graphs import DirectedGraph, SelectorOracle, gamma_reduce
from consensus_lab.schedule import ConnectionSchedule
from consensus_lab.scenarios import (
    LOG2,
    LOG_SQRT2,
    building_block,
    complete_uniform,
    cut_balance_counterexample,
    non_consensus_chain,
    six_particle_periodic,
    slow_pair,
    sparse_three_agent,
    unbounded_three_agent,
)

from helpers import random_piecewise, random_schedule


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, detail


def test_criterion_1_building_block(capsys):
    errs, start = [], time.perf_counter()
    for eta in (0.1, 0.5, 0.9):
        sc = building_block(m=1.0, eta=eta)
        traj = simulate(sc.schedule, sc.x0, sc.horizon, SimConfig(t_eval=(LOG2,)))
        end = 1 - eta / 2
        errs.append(np.abs(traj.state_at(LOG2) - [-1, -0.5, 0.5, 1]).max())
        errs.append(np.abs(traj.final.x - [-end, -end, end, end]).max())
    elapsed = time.perf_counter() - start
    ok = max(errs) <= 1e-9 and elapsed < 1.0
    report(capsys, 1, ok, f"building block max error {max(errs):.2e}, runtime {elapsed:.3f}s")


def test_criterion_2_chain(capsys):
    start = time.perf_counter()
    sc = non_consensus_chain(50)
    bounds = sc.hints["block_boundaries"]
    traj = simulate(sc.schedule, sc.x0, sc.horizon, SimConfig(t_eval=tuple(bounds[1:]), keep_steps=False))
    elapsed = time.perf_counter() - start
    expected = 2 * np.cumprod([math.exp(-1 / (j + 1) ** 2) for j in range(1, 51)])
    got = np.array([np.ptp(traj.state_at(t)) for t in bounds[1:]])
    err = np.abs(got - expected).max()
    floor = 2 * math.exp(-math.pi ** 2 / 6)
    d_min = traj.diameters().min()
    verdict = diagnose(traj, lower_bound=sc.diameter_lower_bound).verdict
    ok = err <= 1e-9 and d_min >= floor - 1e-12 and verdict == NOT_REACHED and elapsed < 10.0
    report(capsys, 2, ok, f"boundary error {err:.2e}, min diameter {d_min:.6f} vs floor {floor:.6f}, "
                          f"verdict {verdict}, runtime {elapsed:.2f}s")


def test_criterion_3_chain_graphs(capsys):
    sc = non_consensus_chain(50)
    t_seq = sc.hints["t_seq"]
    table = estimate_limits(sc.schedule, t_seq, 4.0)
    g3, r3 = build_limit_graph_thm3(table, schedule=sc.schedule)
    gm, rm, _ = build_moreau_graph(sc.schedule, 2.0, LOG_SQRT2, sc.horizon, t_seq=t_seq)
    want3 = DirectedGraph.from_codes(4, ["21", "34"])
    wantm = DirectedGraph.from_codes(4, ["21", "12", "23", "32", "34", "43"])
    warned = rm.witnesses.get("unbounded_gap_warning", False)
    ok = g3 == want3 and r3.verdict is Verdict.FAILS and gm == wantm and warned
    report(capsys, 3, ok, f"limit graph {g3.sorted_arrows()} ({r3.verdict}), "
                          f"Moreau graph {gm.sorted_arrows()}, gap warning {warned}")


def test_criterion_4_six_particle(capsys):
    sc = six_particle_periodic(n_periods=20)
    times = tuple(n + d for n in range(20) for d in (LOG_SQRT2, LOG2))
    traj = simulate(sc.schedule, sc.x0, sc.horizon, SimConfig(t_eval=times, keep_steps=False))
    a, b = [-3, -2, -1, 1, 2, 3], [-3, -2, -2, 2, 2, 3]
    err = max(max(np.abs(traj.state_at(n + LOG_SQRT2) - a).max(),
                  np.abs(traj.state_at(n + LOG2) - b).max()) for n in range(20))
    report(capsys, 4, err <= 1e-9, f"six-particle max error over 20 periods {err:.2e}")


def test_criterion_5_thm6(capsys):
    lines, ok = [], True
    for sc in (sparse_three_agent(), unbounded_three_agent()):
        table = estimate_limits(sc.schedule, sc.hints["t_seq"], sc.hints["window"], stride=sc.hints["stride"])
        _, rep = build_limit_graph_thm6(table, eps=0.1)
        traj = simulate(sc.schedule, [-1.0, 0.0, 1.0], 600.0, SimConfig(keep_steps=False))
        d = traj.diameters()
        mono = bool(np.all(np.diff(d) <= 1e-12))
        below = d[-1] < 1e-3
        hit = float(traj.times[np.argmax(d < 1e-3)]) if below else math.nan
        ok &= rep.verdict is Verdict.HOLDS and mono and below
        lines.append(f"{sc.name} {rep.verdict}, monotone {mono}, below 1e-3 at t={hit:.1f}")
    report(capsys, 5, ok, "; ".join(lines))


def test_criterion_6_cut_balance(capsys):
    sp = slow_pair()
    r_sp = check_cut_balance(sp.schedule, CutBalanceParams(sp.hints["cut_taus"], K=1.0))
    ce = cut_balance_counterexample()
    taus = tuple(float(t) for t in range(101))
    r_ce = check_cut_balance(ce.schedule, CutBalanceParams(taus, K=10.0))
    traj = simulate(ce.schedule, ce.x0, 60.0, SimConfig(keep_steps=False))
    table = estimate_limits(ce.schedule, ce.hints["t_seq"], ce.hints["window"])
    _, r3 = build_limit_graph_thm3(table, schedule=ce.schedule)
    ok = (r_sp.verdict is Verdict.HOLDS and r_ce.verdict is Verdict.FAILS
          and r_ce.witnesses["S"] == [1, 2] and traj.diameters()[-1] < 1e-6 and r3.holds)
    report(capsys, 6, ok, f"slow_pair {r_sp.verdict}; counterexample {r_ce.verdict} with S={r_ce.witnesses.get('S')} "
                          f"at cell {r_ce.witnesses.get('cell')}; diameter at t=60 {traj.diameters()[-1]:.2e}; "
                          f"thm3 {r3.verdict}")


def _invariants_case(seed):
    rng = np.random.default_rng(seed)
    kinds = ("zero", "constant", "hyperbolic", "inv_sqrt_left", "inv_cbrt_right")
    sched = random_schedule(rng, t_max=4.0, kinds=kinds)
    n = sched.n_agents
    fails = []
    P = propagator(sched, float(rng.uniform(0, 3)), float(rng.uniform(1e-3, 1.0)))
    if np.abs(P.sum(axis=1) - 1).max() > 1e-12 or P.min() < -1e-14:
        fails.append("stochastic")
    X0 = rng.normal(size=(n, 3))
    cfg = SimConfig(max_step=0.25)
    traj = simulate_multi_d(sched, X0, 4.0, cfg)
    for ax in range(3):
        x = traj.axis(ax)
        if np.any(np.diff(x.max(axis=1)) > 1e-12) or np.any(np.diff(x.min(axis=1)) < -1e-12):
            fails.append("contraction")
    v = rng.normal(size=3)
    if np.abs(project(traj, v).axis(0) - simulate(sched, X0 @ v, 4.0, cfg).axis(0)).max() > 1e-9:
        fails.append("projection")
    m = int(rng.integers(1, 9))
    oracle = SelectorOracle({p: int(rng.integers(1, m + 1)) for p in itertools.combinations(range(1, m + 1), 2)})
    R = np.eye(m, dtype=bool)
    for j, k in oracle.induced_graph(m).arrows:
        R[j - 1, k - 1] = True
    for _ in range(m):
        R = R | ((R.astype(int) @ R.astype(int)) > 0)
    if not R[:, gamma_reduce(m, oracle) - 1].all():
        fails.append("gamma")
    period = float(rng.uniform(0.5, 2.0))
    f = random_piecewise(rng, n_cells=4, period=period, kinds=("zero", "constant", "hyperbolic"))
    pair = ConnectionSchedule(2, {(1, 2): f})
    T = int(rng.integers(1, 4)) * period
    mu = float(rng.uniform(0.05, 2.0))
    if abs(f.integral(0.0, T) - mu) > 1e-6:
        b = check_property_B(pair, (1, 2), ConditionParams(T=T, mu=mu, horizon=6 * T)).holds
        c = check_property_C(pair, (1, 2), [k * T for k in range(6)], T, mu, max_gap=T).holds
        if b != c:
            fails.append("B<=>C")
    return fails


class TestCriterion7:
    failures: list = []
    cases = 0

    @settings(max_examples=100)
    @given(seed=st.integers(0, 2 ** 32 - 1))
    def test_invariants(self, seed):
        type(self).cases += 1
        type(self).failures.extend(_invariants_case(seed))

    def test_summary(self, capsys):
        cls = type(self)
        if cls.cases < 100:
            # selected on its own: run a fixed batch instead
            for seed in range(100 - cls.cases):
                cls.cases += 1
                cls.failures.extend(_invariants_case(seed))
        ok = cls.cases >= 100 and not cls.failures
        report(capsys, 7, ok, f"{cls.cases} randomized cases, failures {sorted(set(cls.failures)) or 'none'}")


def test_criterion_8_baseline(capsys):
    sc = complete_uniform(4, [-1.0, -1.0, 1.0, 1.0])
    times = tuple(np.linspace(0.25, 5.0, 20))
    traj = simulate(sc.schedule, sc.x0, 5.0, SimConfig(t_eval=times))
    rel = max(abs(np.ptp(traj.state_at(t)) / (np.ptp(sc.x0.x) * math.exp(-4 * t)) - 1) for t in times)
    report(capsys, 8, rel <= 1e-6, f"complete graph diameter relative error {rel:.2e} up to t=5")
