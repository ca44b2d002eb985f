"""Worked examples: schedules, initial states and analytically known facts.

Each constructor returns a :class:`Scenario`.  ``golden`` facts are values
that follow in closed form from the schedule; ``hints`` carry default
checker parameters (window length, mass threshold, sampling sequence) that
suit the example.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .dynamics import AgentState
from .errors import DomainError, ScenarioNotFound
from .schedule import (
    Constant,
    ConnectionSchedule,
    Hyperbolic,
    InvCbrtRight,
    InvSqrtLeft,
    PiecewiseFunction,
    Segment,
)

LOG_SQRT2 = 0.5 * math.log(2.0)
LOG2 = math.log(2.0)
# 2 exp(-pi^2/6): lower bound on the diameter of the non-consensus chain
CHAIN_DIAMETER_BOUND = 2.0 * math.exp(-math.pi ** 2 / 6.0)


@dataclass(frozen=True)
class GoldenFact:
    time: float
    description: str
    state: tuple[float, ...] | None = None
    diameter: float | None = None
    diameter_lower: float | None = None
    tol: float = 1e-9

    def to_dict(self) -> dict:
        out = {"time": self.time, "description": self.description, "tol": self.tol}
        if self.state is not None:
            out["state"] = list(self.state)
        if self.diameter is not None:
            out["diameter"] = self.diameter
        if self.diameter_lower is not None:
            out["diameter_lower"] = self.diameter_lower
        return out


@dataclass(frozen=True)
class Scenario:
    name: str
    schedule: ConnectionSchedule
    x0: AgentState
    horizon: float
    golden: tuple[GoldenFact, ...] = ()
    provenance: str = ""
    hints: Mapping = field(default_factory=dict)
    diameter_lower_bound: float | None = None

    def __post_init__(self):
        if self.x0.n_agents != self.schedule.n_agents:
            raise DomainError("initial state and schedule disagree on the number of agents")
        for fact in self.golden:
            if fact.state is not None and len(fact.state) != self.schedule.n_agents:
                raise DomainError(f"golden state at t={fact.time} has the wrong dimension")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "provenance": self.provenance,
            "horizon": self.horizon,
            "x0": np.asarray(self.x0.x).tolist(),
            "schedule": self.schedule.to_dict(),
            "golden": [g.to_dict() for g in self.golden],
            "diameter_lower_bound": self.diameter_lower_bound,
            "hints": {k: (list(v) if isinstance(v, (tuple, list, np.ndarray)) else v)
                      for k, v in self.hints.items()},
        }


def _schedule_from_pieces(n: int, pieces: Mapping[tuple[int, int], list],
                          period: float | None = None, horizon: float | None = None,
                          extra: Mapping | None = None) -> ConnectionSchedule:
    entries = {pair: PiecewiseFunction.from_pieces(p, period=period) for pair, p in pieces.items()}
    if extra:
        entries.update(extra)
    return ConnectionSchedule(n, entries, horizon=horizon)


# ---------------------------------------------------------------------------
# four-agent building block and the chain made of it
# ---------------------------------------------------------------------------


def _segment_d_length(eta: float, segment_d: str) -> float:
    if segment_d == "end_state":
        return 0.5 * math.log(2.0 / (2.0 - eta))
    if segment_d == "literal":
        return math.log(2.0 / (2.0 - eta))
    raise DomainError(f"segment_d must be 'end_state' or 'literal', got {segment_d!r}")


def block_duration(eta: float, segment_d: str = "end_state") -> float:
    """Length of one building block; ``log(4/(eta(2-eta)))`` when ``segment_d='literal'``."""
    return math.log(2.0 / eta) + _segment_d_length(eta, segment_d)


def _add_block(pieces: dict, eta: float, t0: float, segment_d: str) -> float:
    one = Constant(1.0)
    c_end = math.log(2.0 / eta)
    d_end = c_end + _segment_d_length(eta, segment_d)
    cells = [
        (0.0, LOG_SQRT2, [(1, 2), (2, 1), (3, 4), (4, 3)]),
        (LOG_SQRT2, LOG2, [(2, 3), (3, 2)]),
        (LOG2, c_end, [(2, 1), (3, 4)]),
        (c_end, d_end, [(1, 4), (4, 1)]),
    ]
    for lo, hi, pairs in cells:
        for pair in pairs:
            pieces.setdefault(pair, []).append((t0 + lo, t0 + hi, one))
    return t0 + d_end


def _check_eta(eta: float) -> None:
    if not 0.0 < eta < 1.0:
        raise DomainError(f"eta must lie in (0, 1), got {eta}")


def building_block(m: float = 1.0, eta: float = 0.5, segment_d: str = "end_state") -> Scenario:
    """One four-agent block steering ``(-m,-m,m,m)`` to ``±(1-eta/2) m``.

    ``segment_d='end_state'`` gives the last cell the length
    ``log(2/(2-eta))/2`` that makes the end state exact; ``'literal'`` uses the
    block length ``log(4/(eta(2-eta)))``, for which only the state at
    ``log(2/eta)`` is known in closed form.
    """
    _check_eta(eta)
    if not m > 0:
        raise DomainError("m must be positive")
    pieces: dict = {}
    end = _add_block(pieces, eta, 0.0, segment_d)
    schedule = _schedule_from_pieces(4, pieces, horizon=end)
    q = (1.0 - eta / 2.0) * m
    golden = [
        GoldenFact(LOG_SQRT2, "segment a leaves clustered pairs unchanged", (-m, -m, m, m)),
        GoldenFact(LOG2, "inner agents meet halfway", (-m, -m / 2, m / 2, m)),
        GoldenFact(math.log(2.0 / eta), "agents 2, 3 reach (1 - eta/2) m", (-m, -q, q, m)),
    ]
    if segment_d == "end_state":
        golden.append(GoldenFact(end, "block end state", (-q, -q, q, q), diameter=2 * q))
    return Scenario(
        name="building_block",
        schedule=schedule,
        x0=AgentState(0.0, [-m, -m, m, m]),
        horizon=end,
        golden=tuple(golden),
        provenance="four-agent building block of the non-consensus construction",
        hints={"T": 0.5, "mu": 0.1, "window": end, "eta": eta, "m": m},
    )


def chain_etas(n_blocks: int) -> np.ndarray:
    """``eta_n = 2 (1 - exp(-1/(n+1)^2))`` for ``n = 1..n_blocks``."""
    n = np.arange(1, n_blocks + 1, dtype=float)
    return -2.0 * np.expm1(-1.0 / (n + 1.0) ** 2)


def chain_scales(n_blocks: int) -> np.ndarray:
    """``m_n = prod_{j=1}^{n} exp(-1/(j+1)^2)`` for ``n = 0..n_blocks`` (``m_0 = 1``)."""
    j = np.arange(1, n_blocks + 1, dtype=float)
    return np.exp(-np.concatenate([[0.0], np.cumsum(1.0 / (j + 1.0) ** 2)]))


def non_consensus_chain(n_blocks: int = 50, segment_d: str = "end_state") -> Scenario:
    """Blocks with ``eta_n -> 0`` concatenated from ``(-1,-1,1,1)``; never reaches consensus."""
    if n_blocks < 1:
        raise DomainError("n_blocks must be >= 1")
    etas = chain_etas(n_blocks)
    pieces: dict = {}
    bounds = [0.0]
    for eta in etas:
        bounds.append(_add_block(pieces, float(eta), bounds[-1], segment_d))
    schedule = _schedule_from_pieces(4, pieces, horizon=bounds[-1])
    golden = []
    lower = None
    if segment_d == "end_state":
        ms = chain_scales(n_blocks)
        lower = CHAIN_DIAMETER_BOUND
        for n in range(1, n_blocks + 1):
            m = float(ms[n])
            golden.append(GoldenFact(bounds[n], f"state after block {n}", (-m, -m, m, m),
                                     diameter=2 * m, diameter_lower=CHAIN_DIAMETER_BOUND))
    return Scenario(
        name="non_consensus_chain",
        schedule=schedule,
        x0=AgentState(0.0, [-1.0, -1.0, 1.0, 1.0]),
        horizon=bounds[-1],
        golden=tuple(golden),
        provenance="building blocks with eta_n = 2(1 - exp(-1/(n+1)^2)); counterexample to consensus",
        hints={
            "T": 2.0,
            "mu": LOG_SQRT2,
            "t_seq": tuple(bounds[:-1]),
            "block_boundaries": tuple(bounds),
            "window": 4.0,
            "stride": 0.125,
            "cut_taus": tuple(float(t) for t in np.arange(0.0, bounds[-1], 1.0)),
            "K": 10.0,
        },
        diameter_lower_bound=lower,
    )


# ---------------------------------------------------------------------------
# six agents, periodic
# ---------------------------------------------------------------------------


def six_particle_periodic(pull_rate: float = 2.0, n_periods: int = 20) -> Scenario:
    """Six agents where the pair (3, 4) keeps being pulled apart every unit of time.

    On ``[n, n+log sqrt2]`` agents 3 and 4 attract each other at rate 1; on
    ``[n+log sqrt2, n+log 2]`` agent 3 follows agent 1 and agent 4 follows
    agent 6 at rate ``pull_rate``; the rest of each unit interval is idle.
    The listed golden states hold for ``pull_rate=2`` (rate 1 only moves the
    pulled agents to ``∓(3 - sqrt 2)``).
    """
    one = Constant(1.0)
    pull = Constant(pull_rate)
    pieces = {
        (3, 4): [(0.0, LOG_SQRT2, one)],
        (4, 3): [(0.0, LOG_SQRT2, one)],
        (3, 1): [(LOG_SQRT2, LOG2, pull)],
        (4, 6): [(LOG_SQRT2, LOG2, pull)],
    }
    schedule = _schedule_from_pieces(6, pieces, period=1.0, horizon=float(n_periods))
    golden = []
    if pull_rate == 2.0:
        for n in range(n_periods):
            golden.append(GoldenFact(n + LOG_SQRT2, f"mid-period {n}", (-3.0, -2.0, -1.0, 1.0, 2.0, 3.0)))
            golden.append(GoldenFact(n + LOG2, f"end of activity {n}", (-3.0, -2.0, -2.0, 2.0, 2.0, 3.0),
                                     diameter=6.0))
    return Scenario(
        name="six_particle_periodic",
        schedule=schedule,
        x0=AgentState(0.0, [-3.0, -2.0, -2.0, 2.0, 2.0, 3.0]),
        horizon=float(n_periods),
        golden=tuple(golden),
        provenance="six agents; the strongly connected pair (3, 4) never agrees",
        hints={"T": 1.0, "mu": 0.1, "t_seq": tuple(float(n) for n in range(n_periods - 1)),
               "window": 2.0, "stride": 1.0 / 16.0, "pull_rate": pull_rate},
    )


# ---------------------------------------------------------------------------
# sparse three-agent examples
# ---------------------------------------------------------------------------

_SPARSE_PAIRS = ((1, 2), (1, 3), (2, 3))


def _sparse_schedule(segments: Callable[[float], list], t_seq, period, n_terms, filler):
    if filler and any(p in _SPARSE_PAIRS for p in filler):
        raise DomainError("filler may only set connections other than a12, a13, a23")
    if t_seq is None:
        if period < 6.0:
            raise DomainError("activation period must be >= 6")
        pieces: dict = {}
        for pair, lo, hi, seg in segments(0.0):
            pieces.setdefault(pair, []).append((lo, hi, seg))
        horizon = n_terms * period
        starts = tuple(float(period * n) for n in range(n_terms))
        sched = _schedule_from_pieces(3, pieces, period=period, horizon=horizon, extra=filler)
        return sched, starts, horizon
    starts = tuple(float(t) for t in t_seq)
    if len(starts) < 1 or any(b - a < 6.0 for a, b in zip(starts, starts[1:])):
        raise DomainError("activation times need consecutive gaps >= 6")
    pieces = {}
    for t0 in starts:
        for pair, lo, hi, seg in segments(t0):
            pieces.setdefault(pair, []).append((lo, hi, seg))
    # room for one limit window of length 12 after the last activation time
    horizon = starts[-1] + 12.0
    return _schedule_from_pieces(3, pieces, horizon=horizon, extra=filler), starts, horizon


def sparse_three_agent(t_seq: Sequence[float] | None = None, period: float = 6.0,
                       n_terms: int = 100, filler: Mapping | None = None) -> Scenario:
    """Three agents, each pair linked once per activation time ``t_n``.

    Without ``t_seq`` the activations repeat every ``period`` time units
    (``t_n = n * period``).  ``filler`` supplies connection functions for the
    pairs left free by the construction; they default to zero.
    """
    one = Constant(1.0)

    def segs(t0):
        return [((1, 2), t0, t0 + 1, one), ((1, 3), t0 + 2, t0 + 3, one), ((2, 3), t0 + 4, t0 + 5, one)]

    sched, starts, horizon = _sparse_schedule(segs, t_seq, period, n_terms, filler)
    return Scenario(
        name="sparse_three_agent",
        schedule=sched,
        x0=AgentState(0.0, [-1.0, 0.0, 1.0]),
        horizon=horizon,
        provenance="three agents linked pairwise on disjoint unit windows after each t_n",
        hints={"t_seq": tuple(t for t in starts if t + 12.0 <= horizon), "window": 12.0, "stride": 0.25, "T": 6.0, "mu": 0.5,
               "eps_thm6": 0.1},
    )


def unbounded_three_agent(t_seq: Sequence[float] | None = None, period: float = 6.0,
                          n_terms: int = 100, filler: Mapping | None = None) -> Scenario:
    """As :func:`sparse_three_agent` with integrable singular connections for a12 and a23."""
    one = Constant(1.0)

    def segs(t0):
        return [((1, 2), t0, t0 + 1, InvSqrtLeft(t0)), ((1, 3), t0 + 2, t0 + 3, one),
                ((2, 3), t0 + 4, t0 + 5, InvCbrtRight(t0 + 5))]

    sched, starts, horizon = _sparse_schedule(segs, t_seq, period, n_terms, filler)
    return Scenario(
        name="unbounded_three_agent",
        schedule=sched,
        x0=AgentState(0.0, [-1.0, 0.0, 1.0]),
        horizon=horizon,
        provenance="three agents with unbounded but integrable connections",
        hints={"t_seq": tuple(t for t in starts if t + 12.0 <= horizon), "window": 12.0, "stride": 0.25, "T": 6.0, "mu": 0.5,
               "eps_thm6": 0.1},
    )


# ---------------------------------------------------------------------------
# cut-balance examples
# ---------------------------------------------------------------------------


def _forever(seg: Segment) -> PiecewiseFunction:
    return PiecewiseFunction([0.0, math.inf], [seg])


def cut_balance_counterexample(a32: PiecewiseFunction | None = None,
                               horizon: float = 100.0) -> Scenario:
    """Four agents: two mutually linked pairs, agent 2 always listens to agent 3.

    ``a32`` defaults to ``1/(1+t)``, which makes the cut ``S = {1, 2}``
    increasingly unbalanced while consensus still occurs.
    """
    one = _forever(Constant(1.0))
    a32 = a32 if a32 is not None else _forever(Hyperbolic(1.0, 0.0, 1.0))
    entries = {(1, 2): one, (2, 1): one, (3, 4): one, (4, 3): one, (2, 3): one, (3, 2): a32}
    sched = ConnectionSchedule(4, entries, horizon=horizon)
    t_last = horizon - 8.0
    return Scenario(
        name="cut_balance_counterexample",
        schedule=sched,
        x0=AgentState(0.0, [-1.0, -1.0, 1.0, 1.0]),
        horizon=horizon,
        provenance="reciprocity fails on the cut {1,2} while the limit graph has a reachable node",
        hints={"T": 1.0, "mu": 0.5, "window": 4.0, "stride": 0.25,
               "t_seq": tuple(float(t) for t in np.arange(0.0, t_last + 0.5, 1.0)),
               "cut_taus": tuple(float(t) for t in np.arange(0.0, horizon + 0.5, 1.0)),
               "K": 10.0},
    )


def slow_pair(horizon: float = 100.0) -> Scenario:
    """Three agents: fast pair (1, 2), slow symmetric link ``1/(t+1)`` between 2 and 3."""
    one = _forever(Constant(1.0))
    slow = _forever(Hyperbolic(1.0, 0.0, 1.0))
    entries = {(1, 2): one, (2, 1): one, (2, 3): slow, (3, 2): slow}
    sched = ConnectionSchedule(3, entries, horizon=horizon)
    t_last = horizon - 8.0
    return Scenario(
        name="slow_pair",
        schedule=sched,
        x0=AgentState(0.0, [-1.0, 0.0, 1.0]),
        horizon=horizon,
        provenance="symmetric decaying link: cut-balance applies, limit-graph conditions do not",
        hints={"T": 1.0, "mu": 0.1, "window": 4.0, "stride": 0.25,
               "t_seq": tuple(float(t) for t in np.arange(0.0, t_last + 0.5, 1.0)),
               "cut_taus": tuple(float(t) for t in np.arange(0.0, horizon + 0.5, 1.0)),
               "K": 1.0},
    )


def complete_uniform(n_agents: int = 4, x0: Sequence[float] | None = None,
                     horizon: float = 10.0) -> Scenario:
    """All-to-all unit connections; ``x_j - mean`` decays like ``exp(-N t)``."""
    if n_agents < 1:
        raise DomainError("n_agents must be positive")
    if x0 is None:
        x0 = [-1.0, -1.0, 1.0, 1.0] if n_agents == 4 else np.linspace(-1.0, 1.0, n_agents)
    x0 = np.asarray(x0, dtype=float)
    one = _forever(Constant(1.0))
    entries = {(j, k): one for j in range(1, n_agents + 1) for k in range(1, n_agents + 1) if j != k}
    sched = ConnectionSchedule(n_agents, entries)
    golden = []
    if x0.ndim == 1:
        mean = float(x0.mean())
        for t in (1.0, 2.0, 5.0):
            decay = math.exp(-n_agents * t)
            state = tuple(mean + (v - mean) * decay for v in x0)
            golden.append(GoldenFact(t, "exponential relaxation to the mean", state,
                                     diameter=float(np.ptp(x0)) * decay))
    return Scenario(
        name="complete_uniform",
        schedule=sched,
        x0=AgentState(0.0, x0),
        horizon=horizon,
        golden=tuple(golden),
        provenance="full connection baseline",
        hints={"T": 1.0, "mu": 0.5, "window": 4.0, "stride": 0.25,
               "t_seq": tuple(float(t) for t in range(int(horizon))),
               "cut_taus": tuple(float(t) for t in range(int(horizon) + 1)),
               "K": 1.0},
    )


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

SCENARIOS: dict[str, tuple[Callable[..., Scenario], str]] = {
    "building_block": (building_block, "one four-agent contraction block"),
    "non_consensus_chain": (non_consensus_chain, "concatenated blocks; no consensus"),
    "six_particle_periodic": (six_particle_periodic, "periodic six agents; pair (3,4) never agrees"),
    "sparse_three_agent": (sparse_three_agent, "sparse pairwise activations; pair-coverage limit graph"),
    "unbounded_three_agent": (unbounded_three_agent, "sparse activations with singular rates"),
    "cut_balance_counterexample": (cut_balance_counterexample, "unbalanced cut, reachable limit graph"),
    "slow_pair": (slow_pair, "symmetric 1/(t+1) link; cut-balance only"),
    "complete_uniform": (complete_uniform, "all-to-all unit connections"),
}


def get_scenario(name: str, **kwargs) -> Scenario:
    try:
        factory, _ = SCENARIOS[name]
    except KeyError:
        raise ScenarioNotFound(name) from None
    return factory(**kwargs)
