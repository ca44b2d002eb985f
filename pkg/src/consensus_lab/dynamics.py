"""Carathéodory simulation of ``x_j' = sum_k a_jk(t) (x_k - x_j)``.

Each step ``[s, s+h]`` applies ``exp(Omega)`` with ``Omega`` the exact
integral of the time-varying generator over the step.  ``exp`` of a matrix
with nonnegative off-diagonal entries and zero row sums is nonnegative and
row-stochastic, so support contraction holds step by step.  Steps never
straddle a schedule breakpoint; on cells where every active primitive is
constant the update is the exact flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import DomainError, NumericError
from .schedule import ConnectionSchedule


@dataclass(frozen=True)
class AgentState:
    """Positions of all agents at time ``t``; ``x`` has shape ``(N,)`` or ``(N, d)``."""

    t: float
    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim not in (1, 2) or x.shape[0] < 1:
            raise DomainError(f"state must have shape (N,) or (N, d), got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise NumericError("state has non-finite entries")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n_agents(self) -> int:
        return self.x.shape[0]

    @property
    def positions(self) -> np.ndarray:
        """Always ``(N, d)``."""
        return self.x if self.x.ndim == 2 else self.x[:, None]


@dataclass(frozen=True)
class StepRecord:
    t0: float
    t1: float
    generator: np.ndarray
    propagator: np.ndarray


@dataclass(frozen=True)
class SimConfig:
    """Stepping controls.

    ``max_step`` bounds the length of every step except those spent on
    cells where all connections vanish (``skip_idle``), which are crossed in
    one identity step.  ``t_eval`` forces steps to end at the given times so
    they appear among the recorded states.
    """

    max_step: float = 0.1
    breakpoint_alignment: bool = True
    record_stride: int = 1
    keep_steps: bool = True
    skip_idle: bool = True
    t_eval: tuple[float, ...] = ()
    row_sum_tol: float = 1e-12
    negativity_tol: float = 1e-14

    def __post_init__(self):
        if not self.max_step > 0:
            raise DomainError("max_step must be positive")
        if not self.breakpoint_alignment:
            raise DomainError("steps are always aligned to schedule breakpoints")
        if self.record_stride < 1:
            raise DomainError("record_stride must be >= 1")
        object.__setattr__(self, "t_eval", tuple(sorted(float(t) for t in self.t_eval)))


class Trajectory:
    """Recorded states of one simulation run.

    Attributes
    ----------
    times : ndarray, shape (K,)
    positions : ndarray, shape (K, N, d)
    steps : list of StepRecord
        Empty when the run was made with ``keep_steps=False``.
    """

    def __init__(self, times, positions, steps: Sequence[StepRecord] = ()):
        self.times = np.asarray(times, dtype=float)
        self.positions = np.asarray(positions, dtype=float)
        if self.positions.ndim != 3 or self.positions.shape[0] != self.times.shape[0]:
            raise DomainError("positions must have shape (K, N, d) matching times")
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("trajectory timestamps must be strictly increasing")
        self.steps = list(steps)

    @property
    def n_agents(self) -> int:
        return self.positions.shape[1]

    @property
    def dim(self) -> int:
        return self.positions.shape[2]

    def __len__(self):
        return self.times.shape[0]

    def axis(self, i: int = 0) -> np.ndarray:
        """Scalar trajectory of coordinate ``i``, shape ``(K, N)``."""
        return self.positions[:, :, i]

    @property
    def final(self) -> AgentState:
        return self.state(len(self) - 1)

    def state(self, index: int) -> AgentState:
        x = self.positions[index]
        return AgentState(self.times[index], x[:, 0] if self.dim == 1 else x)

    @property
    def states(self) -> list[AgentState]:
        return [self.state(i) for i in range(len(self))]

    def state_at(self, t: float) -> np.ndarray:
        """Positions at ``t`` (recorded value, or linear interpolation between records)."""
        ts = self.times
        if t < ts[0] - 1e-12 or t > ts[-1] + 1e-12:
            raise DomainError(f"time {t} outside recorded range [{ts[0]}, {ts[-1]}]")
        i = int(np.searchsorted(ts, t))
        for cand in (i - 1, i):
            if 0 <= cand < len(ts) and abs(ts[cand] - t) <= 1e-12 * max(1.0, abs(t)):
                out = self.positions[cand]
                return out[:, 0] if self.dim == 1 else out
        w = (t - ts[i - 1]) / (ts[i] - ts[i - 1])
        out = (1 - w) * self.positions[i - 1] + w * self.positions[i]
        return out[:, 0] if self.dim == 1 else out

    def diameters(self) -> np.ndarray:
        """Largest per-axis spread ``max_j x_j - min_j x_j`` at each record."""
        spread = self.positions.max(axis=1) - self.positions.min(axis=1)
        return spread.max(axis=1)


def _as_state(x0) -> AgentState:
    return x0 if isinstance(x0, AgentState) else AgentState(0.0, np.asarray(x0, dtype=float))


def propagator(schedule: ConnectionSchedule, s: float, h: float) -> np.ndarray:
    """``exp`` of the generator integrated over ``[s, s + h]``."""
    if not h > 0:
        raise DomainError(f"step length must be positive, got {h}")
    omega = schedule.generator(s, s + h)
    if not np.any(omega):
        return np.eye(schedule.n_agents)
    return expm(omega)


def _check_propagator(P: np.ndarray, cfg: SimConfig, t0: float, t1: float) -> None:
    if not np.all(np.isfinite(P)):
        raise NumericError(f"non-finite propagator on [{t0}, {t1}]")
    if P.min() < -cfg.negativity_tol:
        raise NumericError(f"propagator entry {P.min():.3e} < 0 on [{t0}, {t1}]")
    dev = np.abs(P.sum(axis=1) - 1.0).max()
    if dev > cfg.row_sum_tol:
        raise NumericError(f"propagator row sums off by {dev:.3e} on [{t0}, {t1}]")


def simulate(schedule: ConnectionSchedule, x0, t_end: float,
             cfg: SimConfig | None = None) -> Trajectory:
    """Integrate from ``x0`` (an :class:`AgentState` or array at t=0) to ``t_end``."""
    cfg = cfg or SimConfig()
    state = _as_state(x0)
    if state.n_agents != schedule.n_agents:
        raise DomainError(f"state has {state.n_agents} agents, schedule has {schedule.n_agents}")
    t = state.t
    t_end = float(t_end)
    if not t_end > t:
        raise DomainError(f"t_end={t_end} must exceed the initial time {t}")

    X = np.array(state.positions, dtype=float)
    n = schedule.n_agents
    identity = np.eye(n)
    events = [e for e in cfg.t_eval if t < e < t_end]
    ev = 0
    times, positions, steps = [t], [X.copy()], []
    last_omega, last_P = None, None
    n_steps = 0

    while t < t_end:
        while ev < len(events) and events[ev] <= t:
            ev += 1
        end = min(t_end, schedule.next_breakpoint(t), events[ev] if ev < len(events) else math.inf)
        if cfg.skip_idle and schedule.is_zero_on(t, end):
            t1 = end
        else:
            t1 = t + cfg.max_step
            if t1 >= end - 1e-12 * max(1.0, abs(end)):
                t1 = end
        omega = schedule.generator(t, t1)
        if not np.any(omega):
            P = identity
        elif last_omega is not None and np.array_equal(omega, last_omega):
            P = last_P
        else:
            P = expm(omega)
            _check_propagator(P, cfg, t, t1)
            last_omega, last_P = omega, P
        X = P @ X
        if not np.all(np.isfinite(X)):
            raise NumericError(f"state became non-finite at t={t1}")
        n_steps += 1
        if cfg.keep_steps:
            steps.append(StepRecord(t, t1, omega, P))
        at_event = ev < len(events) and t1 == events[ev]
        if n_steps % cfg.record_stride == 0 or at_event or t1 >= t_end:
            times.append(t1)
            positions.append(X.copy())
        t = t1
    return Trajectory(np.array(times), np.stack(positions), steps)


def simulate_multi_d(schedule: ConnectionSchedule, x0, t_end: float,
                     cfg: SimConfig | None = None) -> Trajectory:
    """Same as :func:`simulate` for ``d``-dimensional agents.

    Every coordinate axis is propagated by the same scalar propagators.
    """
    state = _as_state(x0)
    if state.x.ndim != 2:
        raise DomainError("simulate_multi_d expects a state of shape (N, d)")
    return simulate(schedule, state, t_end, cfg)
