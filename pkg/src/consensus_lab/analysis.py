"""Post-processing of trajectories.

Diameters, extremes and consensus verdicts; projection onto a direction;
a companion integrator for state-dependent interactions and the check that
such a run solves the linear system with effective connections
``a_jk(t) * phi(x_k - x_j)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .dynamics import SimConfig, Trajectory, _as_state
from .errors import DomainError, NumericError
from .schedule import ConnectionSchedule

REACHED = "reached"
NOT_REACHED = "not-reached"
UNDETERMINED = "undetermined"


@dataclass
class DiagnosticsReport:
    times: np.ndarray
    diameters: np.ndarray
    maxima: np.ndarray  # (K, d)
    minima: np.ndarray
    argmax_sets: list[list[int]]
    argmin_sets: list[list[int]]
    verdict: str
    tol: float
    reached_at: float | None = None
    lower_bound: float | None = None
    monotonicity_violations: list[dict] = field(default_factory=list)
    plateau_violations: list[dict] = field(default_factory=list)

    @property
    def final_diameter(self) -> float:
        return float(self.diameters[-1])

    def to_dict(self, series: bool = True) -> dict:
        out = {
            "verdict": self.verdict,
            "tol": self.tol,
            "reached_at": self.reached_at,
            "lower_bound": self.lower_bound,
            "final_time": float(self.times[-1]),
            "final_diameter": self.final_diameter,
            "initial_diameter": float(self.diameters[0]),
            "monotonicity_violations": self.monotonicity_violations,
            "plateau_violations": self.plateau_violations,
        }
        if series:
            out["times"] = self.times.tolist()
            out["diameters"] = self.diameters.tolist()
            out["final_argmax"] = self.argmax_sets[-1]
            out["final_argmin"] = self.argmin_sets[-1]
        return out

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("indent", 2)
        kwargs.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kwargs)


def diagnose(traj: Trajectory, tol: float = 1e-6, lower_bound: float | None = None,
             band: float = 1e-10, slack: float = 1e-12) -> DiagnosticsReport:
    """Summarise a trajectory and decide whether consensus was reached.

    Parameters
    ----------
    traj : Trajectory
    tol : float
        Consensus is ``reached`` once the diameter drops below ``tol``; the
        diameter never increases, so the statement persists.
    lower_bound : float, optional
        A proven lower bound on the diameter for all times.  ``not-reached``
        is reported only when one is supplied and the final diameter respects
        it; otherwise the verdict is ``undetermined``.
    band : float
        Width of the band defining the extremal index sets.
    slack : float
        Allowed increase of the maximum (decrease of the minimum) between
        records before a monotonicity violation is logged.
    """
    if len(traj) == 0:
        raise DomainError("empty trajectory")
    P = traj.positions
    mx = P.max(axis=1)
    mn = P.min(axis=1)
    diam = (mx - mn).max(axis=1)
    # extremal sets on the first axis (the scalar case)
    x = P[:, :, 0]
    top = [list(np.flatnonzero(row >= row.max() - band) + 1) for row in x]
    bot = [list(np.flatnonzero(row <= row.min() + band) + 1) for row in x]
    top = [[int(i) for i in s] for s in top]
    bot = [[int(i) for i in s] for s in bot]

    mono = []
    up = np.diff(mx, axis=0)
    down = np.diff(mn, axis=0)
    for i, ax in zip(*np.nonzero(up > slack)):
        mono.append({"t": float(traj.times[i + 1]), "axis": int(ax), "kind": "max increased",
                     "amount": float(up[i, ax])})
    for i, ax in zip(*np.nonzero(down < -slack)):
        mono.append({"t": float(traj.times[i + 1]), "axis": int(ax), "kind": "min decreased",
                     "amount": float(-down[i, ax])})

    # with the maximum flat between two records, some agent stays on top
    plateau = []
    for i in range(len(traj) - 1):
        if abs(mx[i + 1, 0] - mx[i, 0]) <= band and not set(top[i + 1]) & set(top[i]):
            plateau.append({"t": float(traj.times[i + 1]), "kind": "top set changed on a plateau"})

    below = np.flatnonzero(diam < tol)
    if below.size and diam[-1] < tol:
        verdict, at = REACHED, float(traj.times[below[0]])
    elif lower_bound is not None and diam[-1] >= lower_bound - slack:
        verdict, at = NOT_REACHED, None
    else:
        verdict, at = UNDETERMINED, None
    return DiagnosticsReport(traj.times.copy(), diam, mx, mn, top, bot, verdict, tol, at,
                             lower_bound, mono, plateau)


def project(traj: Trajectory, v) -> Trajectory:
    """Scalar trajectory ``y_j(t) = x_j(t) . v``."""
    v = np.asarray(v, dtype=float).ravel()
    if v.shape[0] != traj.dim:
        raise DomainError(f"direction has length {v.shape[0]}, trajectory dimension is {traj.dim}")
    if not np.linalg.norm(v) > 0:
        raise DomainError("direction vector must be nonzero")
    return Trajectory(traj.times.copy(), (traj.positions @ v)[:, :, None], traj.steps)


# ---------------------------------------------------------------------------
# state-dependent interactions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NonlinearInteraction:
    """Interaction kernel ``phi(r)`` with its declared sup bound and Lipschitz constant."""

    phi: Callable[[np.ndarray], np.ndarray]
    bound: float
    lipschitz: float
    arg_range: tuple[float, float] = (-np.inf, np.inf)
    name: str = "phi"

    def __post_init__(self):
        if not (self.bound >= 0 and self.lipschitz >= 0):
            raise DomainError("bound and Lipschitz constant must be nonnegative")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        lo, hi = self.arg_range
        if np.any((r < lo) | (r > hi)):
            raise DomainError(f"{self.name} evaluated outside its range [{lo}, {hi}]")
        out = np.asarray(self.phi(r), dtype=float)
        if np.any(out < 0):
            raise DomainError(f"{self.name} must be nonnegative")
        return out

    @classmethod
    def constant_one(cls) -> "NonlinearInteraction":
        return cls(lambda r: np.ones_like(r), 1.0, 0.0, name="one")

    @classmethod
    def cauchy(cls) -> "NonlinearInteraction":
        """``phi(r) = 1/(1 + r^2)``; Lipschitz constant ``3 sqrt(3)/8``."""
        return cls(lambda r: 1.0 / (1.0 + r * r), 1.0, 3.0 * np.sqrt(3.0) / 8.0, name="cauchy")


def _kernel(phi: NonlinearInteraction, x: np.ndarray) -> np.ndarray:
    # x: (N,) scalar state; returns phi(x_k - x_j) indexed [j, k]
    return phi(x[None, :] - x[:, None])


def simulate_nonlinear(schedule: ConnectionSchedule, phi: NonlinearInteraction, x0,
                       t_end: float, cfg: SimConfig | None = None) -> Trajectory:
    """Integrate ``x_j' = sum_k a_jk(t) phi(x_k - x_j) (x_k - x_j)`` for scalar states.

    Explicit midpoint stepping: the kernel is frozen at the predicted
    half-step state and each step applies ``exp`` of the window integrals of
    ``a_jk`` weighted by it.  Steps never cross schedule breakpoints.
    """
    cfg = cfg or SimConfig()
    state = _as_state(x0)
    if state.x.ndim != 1:
        raise DomainError("simulate_nonlinear supports scalar agents only")
    if state.n_agents != schedule.n_agents:
        raise DomainError("state and schedule disagree on the number of agents")
    t, t_end = state.t, float(t_end)
    if not t_end > t:
        raise DomainError("t_end must exceed the initial time")
    x = state.x.astype(float).copy()
    times, xs = [t], [x.copy()]

    def gen(W):
        G = W.copy()
        G[np.diag_indices_from(G)] = 0.0
        G[np.diag_indices_from(G)] = -G.sum(axis=1)
        return G

    n_steps = 0
    while t < t_end:
        end = min(t_end, schedule.next_breakpoint(t))
        t1 = min(end, t + cfg.max_step)
        if t1 >= end - 1e-12 * max(1.0, abs(end)):
            t1 = end
        tm = 0.5 * (t + t1)
        half = expm(gen(schedule.window_matrix(t, tm) * _kernel(phi, x))) @ x
        x = expm(gen(schedule.window_matrix(t, t1) * _kernel(phi, half))) @ x
        if not np.all(np.isfinite(x)):
            raise NumericError(f"state became non-finite at t={t1}")
        n_steps += 1
        if n_steps % cfg.record_stride == 0 or t1 >= t_end:
            times.append(t1)
            xs.append(x.copy())
        t = t1
    return Trajectory(np.array(times), np.array(xs)[:, :, None])


@dataclass
class LinearizationResult:
    times: np.ndarray
    effective: np.ndarray  # (S, N, N) sampled a~_jk
    residuals: np.ndarray  # (S,)
    bound_ok: bool
    max_ratio: float

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0


def linearize_nonlinear(schedule: ConnectionSchedule, phi: NonlinearInteraction,
                        traj: Trajectory, samples: int | None = None) -> LinearizationResult:
    """Sample ``a~_jk(t) = a_jk(t) phi(x_k - x_j)`` along a run of :func:`simulate_nonlinear`.

    The residual at an interior record ``t_i`` compares the central
    difference of ``x`` with ``sum_k a~_jk (x_k - x_j)``; records adjacent to
    a schedule breakpoint are skipped.  Also checks
    ``sup |a~_jk| <= sup |a_jk| * sup phi`` over the sampled times.
    """
    if traj.n_agents != schedule.n_agents or traj.dim != 1:
        raise DomainError("trajectory does not match the schedule (scalar agents required)")
    ts = traj.times
    X = traj.axis(0)
    idx = np.arange(1, len(ts) - 1)
    if samples is not None and idx.size > samples:
        idx = idx[np.linspace(0, idx.size - 1, samples).astype(int)]
    eff, res, keep = [], [], []
    sup_a = np.zeros((schedule.n_agents, schedule.n_agents))
    sup_eff = np.zeros_like(sup_a)
    for i in idx:
        t = ts[i]
        A = schedule.value_matrix(t)
        if not np.all(np.isfinite(A)):
            continue
        At = A * _kernel(phi, X[i])
        sup_a = np.maximum(sup_a, A)
        sup_eff = np.maximum(sup_eff, At)
        if schedule.breakpoints_between(ts[i - 1], ts[i + 1]):
            continue
        deriv = (X[i + 1] - X[i - 1]) / (ts[i + 1] - ts[i - 1])
        rhs = (At * (X[i][None, :] - X[i][:, None])).sum(axis=1)
        eff.append(At)
        res.append(np.abs(deriv - rhs).max())
        keep.append(t)
    # a_jk are piecewise given, so compare against the sup over the run's samples
    limit = sup_a * phi.bound
    ok = bool(np.all(sup_eff <= limit + 1e-12))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(limit > 0, sup_eff / np.where(limit > 0, limit, 1.0), 0.0)
    n = schedule.n_agents
    return LinearizationResult(np.array(keep), np.array(eff).reshape(-1, n, n),
                               np.array(res), ok, float(ratio.max()) if ratio.size else 0.0)
