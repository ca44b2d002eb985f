"""Finite-horizon checkers for sufficient consensus conditions.

Every checker returns a :class:`ConditionReport` whose verdict is one of
``holds-up-to-horizon``, ``fails`` or ``inconclusive``.  The conditions
quantify over infinite time, so ``holds-up-to-horizon`` only states that
nothing went wrong on the examined grid; reports carry that horizon.

Arrow convention: ``j -> k`` stands for the connection ``a_jk``, i.e. agent
``j`` is influenced by agent ``k``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import CapacityError, DomainError
from .graphs import (
    DirectedGraph,
    SelectorOracle,
    gamma_reduce,
    globally_reachable_nodes,
    pairwise_coverage,
    uncovered_pairs,
)
from .schedule import ConnectionSchedule

# absolute slack for mass comparisons (window integrals that equal mu exactly)
MASS_SLACK = 1e-10
MAX_CUT_AGENTS = 32


class Verdict(str, Enum):
    HOLDS = "holds-up-to-horizon"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"

    def __str__(self):
        return self.value


def _jsonable(obj):
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(v) for v in items]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, DirectedGraph):
        return [list(a) for a in obj.sorted_arrows()]
    return obj


@dataclass
class ConditionReport:
    condition: str
    verdict: Verdict
    horizon: float | None = None
    params: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    graph: DirectedGraph | None = None
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.verdict = Verdict(self.verdict)
        if self.verdict is Verdict.FAILS and not self.witnesses:
            raise ValueError("a failing report needs a witness")

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    def to_dict(self) -> dict:
        out = {
            "condition": self.condition,
            "verdict": self.verdict.value,
            "horizon": _jsonable(self.horizon),
            "params": _jsonable(self.params),
            "witnesses": _jsonable(self.witnesses),
        }
        if self.graph is not None:
            out["graph"] = {"n_nodes": self.graph.n_nodes,
                            "arrows": _jsonable(self.graph),
                            "edge_list": self.graph.to_edge_list()}
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("indent", 2)
        kwargs.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kwargs)


@dataclass(frozen=True)
class ConditionParams:
    """Window length ``T``, mass threshold ``mu`` and the examined horizon.

    ``stride`` defaults to ``T/8``.  ``eps`` is the positivity threshold for
    limit masses, ``delta`` the Cauchy tolerance for limit estimation.
    ``max_gap`` is an optional declared bound on ``t_{n+1} - t_n``.
    """

    T: float
    mu: float
    horizon: float
    stride: float | None = None
    t_seq: tuple[float, ...] | None = None
    eps: float = 1e-9
    delta: float = 1e-9
    max_gap: float | None = None

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError("T must be positive")
        if not self.mu > 0:
            raise DomainError("mu must be positive")
        if not self.horizon > self.T:
            raise DomainError(f"horizon {self.horizon} must exceed T={self.T}")
        if not self.eps >= 0:
            raise DomainError("eps must be >= 0")
        if not self.delta > 0:
            raise DomainError("delta must be positive")
        if self.stride is None:
            object.__setattr__(self, "stride", self.T / 8.0)
        elif not self.stride > 0:
            raise DomainError("stride must be positive")
        if self.t_seq is not None:
            object.__setattr__(self, "t_seq", _check_seq(self.t_seq))

    def echo(self) -> dict:
        out = {"T": self.T, "mu": self.mu, "horizon": self.horizon, "stride": self.stride}
        if self.max_gap is not None:
            out["max_gap"] = self.max_gap
        return out


@dataclass(frozen=True)
class CutBalanceParams:
    taus: tuple[float, ...]
    K: float = 1.0
    M: float = math.inf

    def __post_init__(self):
        taus = tuple(float(t) for t in self.taus)
        if len(taus) < 2:
            raise DomainError("the partition needs at least two times")
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise DomainError("partition times must be strictly increasing")
        if not self.M > 0:
            raise DomainError("M must be positive")
        if not self.K > 0:
            raise DomainError("K must be positive")
        object.__setattr__(self, "taus", taus)


def _check_seq(t_seq) -> tuple[float, ...]:
    seq = tuple(float(t) for t in t_seq)
    if any(b <= a for a, b in zip(seq, seq[1:])):
        raise DomainError("t_seq must be strictly increasing")
    return seq


def _pair_label(pair) -> str:
    return f"{pair[0]}{pair[1]}" if max(pair) <= 9 else f"{pair[0]},{pair[1]}"


# ---------------------------------------------------------------------------
# window grids
# ---------------------------------------------------------------------------


def window_grid(schedule: ConnectionSchedule, T: float, horizon: float, stride: float) -> np.ndarray:
    """Start times ``t`` in ``[0, horizon - T]`` for window checks.

    Uniform stride plus every schedule breakpoint ``b`` and ``b - T`` so that
    windows over piecewise-constant data are examined at their extrema.
    """
    end = horizon - T
    if not end >= 0:
        raise DomainError(f"horizon {horizon} must exceed T={T}")
    pts = set(np.arange(0.0, end, stride).tolist())
    pts.add(end)
    for b in schedule.breakpoints_between(0.0, horizon):
        for t in (b, b - T):
            if 0.0 <= t <= end:
                pts.add(t)
    return np.array(sorted(pts))


def _window_stack(schedule: ConnectionSchedule, starts, T: float) -> np.ndarray:
    return np.stack([schedule.window_matrix(t, t + T) for t in starts])


# ---------------------------------------------------------------------------
# single-pair properties
# ---------------------------------------------------------------------------


def _check_pair(schedule, pair):
    j, k = pair
    n = schedule.n_agents
    if j == k or not (1 <= j <= n and 1 <= k <= n):
        raise DomainError(f"invalid pair {pair} for {n} agents")


def check_property_B(schedule: ConnectionSchedule, pair: tuple[int, int],
                     params: ConditionParams) -> ConditionReport:
    """Every length-``T`` window on the grid carries mass at least ``mu``."""
    _check_pair(schedule, pair)
    fn = schedule.entry(*pair)
    grid = window_grid(schedule, params.T, params.horizon, params.stride)
    masses = np.array([fn.integral(t, t + params.T) for t in grid])
    bad = np.flatnonzero(masses < params.mu - MASS_SLACK)
    common = dict(condition=f"property_B[{_pair_label(pair)}]", horizon=params.horizon,
                  params={**params.echo(), "pair": list(pair)})
    if bad.size:
        i = int(bad[0])
        return ConditionReport(verdict=Verdict.FAILS,
                               witnesses={"pair": list(pair), "t": float(grid[i]),
                                          "mass": float(masses[i]), "n_failing": int(bad.size)},
                               **common)
    return ConditionReport(verdict=Verdict.HOLDS,
                           witnesses={"min_mass": float(masses.min()), "n_grid": int(grid.size)},
                           **common)


def estimate_property_A(schedule: ConnectionSchedule, pair: tuple[int, int],
                        T_list: Sequence[float], t0_list: Sequence[float],
                        horizon: float, stride: float | None = None):
    """Estimate ``limsup_T liminf_t`` of the window mass of one connection.

    Returns ``(ell_hat, report)`` where ``ell_hat`` is the largest, over
    ``T`` in ``T_list``, of the smallest window mass for start times in
    ``[max(t0_list), horizon - T]``.
    """
    _check_pair(schedule, pair)
    T_list = [float(T) for T in T_list]
    t0_list = [float(t) for t in t0_list]
    if not T_list or not t0_list:
        raise DomainError("T_list and t0_list must be nonempty")
    if any(b <= a for a, b in zip(T_list, T_list[1:])) or any(b <= a for a, b in zip(t0_list, t0_list[1:])):
        raise DomainError("T_list and t0_list must be increasing")
    if horizon - T_list[-1] <= t0_list[-1]:
        raise DomainError("horizon too small for the largest T and t0")
    fn = schedule.entry(*pair)
    table = np.zeros((len(T_list), len(t0_list)))
    for a, T in enumerate(T_list):
        grid = window_grid(schedule, T, horizon, stride or T / 8.0)
        masses = np.array([fn.integral(t, t + T) for t in grid])
        for b, t0 in enumerate(t0_list):
            table[a, b] = masses[grid >= t0].min()
    per_t0 = table.max(axis=0)
    ell = float(per_t0[-1])
    stable = bool(np.all(np.diff(per_t0) >= -MASS_SLACK))
    notes = [] if stable else ["estimate decreases as t0 grows; liminf may be smaller"]
    verdict = Verdict.HOLDS if ell > MASS_SLACK else Verdict.FAILS
    witnesses = {"ell_hat": ell, "per_t0": per_t0.tolist(), "stable": stable}
    report = ConditionReport(f"property_A[{_pair_label(pair)}]", verdict, horizon,
                             {"pair": list(pair), "T_list": T_list, "t0_list": t0_list},
                             witnesses, notes=notes)
    return ell, report


def gap_trend(gaps: np.ndarray, tol: float = 1e-9) -> bool:
    """Heuristic: do the gaps look unbounded?

    True when the largest gap is first attained in the last quarter of the
    sequence and exceeds the largest gap of the first quarter by ``tol``.
    """
    gaps = np.asarray(gaps, dtype=float)
    if gaps.size < 4:
        return False
    q = max(1, gaps.size // 4)
    top = int(np.argmax(gaps))
    return bool(top >= gaps.size - q and gaps[top] > gaps[:q].max() + tol)


def _gap_info(t_seq) -> dict:
    seq = np.asarray(t_seq, dtype=float)
    gaps = np.diff(seq)
    return {"max_gap": float(gaps.max()) if gaps.size else 0.0,
            "unbounded_gap_warning": bool(gap_trend(gaps))}


def check_property_C(schedule: ConnectionSchedule, pair: tuple[int, int],
                     t_seq: Sequence[float], T: float, mu: float,
                     max_gap: float | None = None) -> ConditionReport:
    """Windows ``[t_n, t_n + T]`` along a sampled sequence all carry mass ``>= mu``.

    Bounded gaps cannot be verified on a finite sequence.  With a declared
    ``max_gap`` the gaps are compared against it; without one, an upward gap
    trend makes the verdict inconclusive.
    """
    _check_pair(schedule, pair)
    seq = _check_seq(t_seq)
    if not seq:
        raise DomainError("t_seq must be nonempty")
    if not (T > 0 and mu > 0):
        raise DomainError("T and mu must be positive")
    fn = schedule.entry(*pair)
    masses = np.array([fn.integral(t, t + T) for t in seq])
    info = _gap_info(seq)
    common = dict(condition=f"property_C[{_pair_label(pair)}]", horizon=seq[-1] + T,
                  params={"pair": list(pair), "T": T, "mu": mu, "n_terms": len(seq),
                          "max_gap": max_gap})
    bad = np.flatnonzero(masses < mu - MASS_SLACK)
    if bad.size:
        n = int(bad[0])
        return ConditionReport(verdict=Verdict.FAILS,
                               witnesses={"pair": list(pair), "n": n, "t": seq[n],
                                          "mass": float(masses[n]), **info}, **common)
    if max_gap is not None and info["max_gap"] > max_gap * (1 + 1e-12) + MASS_SLACK:
        n = int(np.argmax(np.diff(seq)))
        return ConditionReport(verdict=Verdict.FAILS,
                               witnesses={"gap_index": n, **info}, **common)
    notes = []
    if info["unbounded_gap_warning"]:
        notes.append("gaps t_{n+1} - t_n trend upward; boundedness not supported by the data")
    verdict = Verdict.INCONCLUSIVE if info["unbounded_gap_warning"] and max_gap is None else Verdict.HOLDS
    return ConditionReport(verdict=verdict, witnesses={"min_mass": float(masses.min()), **info},
                           notes=notes, **common)


# ---------------------------------------------------------------------------
# graph conditions
# ---------------------------------------------------------------------------


def _window_masses(schedule, T, horizon, stride, t_seq):
    if t_seq is None:
        starts = window_grid(schedule, T, horizon, stride)
    else:
        starts = np.asarray(_check_seq(t_seq))
        if starts.size == 0:
            raise DomainError("t_seq must be nonempty")
    return starts, _window_stack(schedule, starts, T)


def build_moreau_graph(schedule: ConnectionSchedule, T: float, mu: float, horizon: float,
                       t_seq: Sequence[float] | None = None, stride: float | None = None,
                       max_gap: float | None = None):
    """Arrows whose every window carries mass ``mu``; Moreau and PE verdicts.

    Without ``t_seq`` windows start on the full grid of :func:`window_grid`.
    With ``t_seq`` only the windows ``[t_n, t_n + T]`` are examined, and
    the gap behaviour of the sequence enters the verdict as in
    :func:`check_property_C`.

    Returns
    -------
    graph : DirectedGraph
    moreau : ConditionReport
    pe : ConditionReport
    """
    params = ConditionParams(T, mu, horizon, stride)
    starts, W = _window_masses(schedule, T, horizon, params.stride, t_seq)
    n = schedule.n_agents
    min_mass = W.min(axis=0)
    max_mass = W.max(axis=0)
    ok = min_mass >= mu - MASS_SLACK
    arrows = frozenset((j + 1, k + 1) for j in range(n) for k in range(n) if j != k and ok[j, k])
    graph = DirectedGraph(n, arrows)
    failing = [(j + 1, k + 1) for j in range(n) for k in range(n) if j != k and not ok[j, k]]

    echo = params.echo()
    gap = {}
    if t_seq is not None:
        echo["t_seq"] = {"n_terms": int(starts.size), "first": float(starts[0]), "last": float(starts[-1])}
        gap = _gap_info(starts)
        if max_gap is not None:
            echo["max_gap"] = max_gap
    witness_pair = None
    if failing:
        # the most heavily connected of the failing pairs makes the best witness
        witness_pair = max(failing, key=lambda p: (max_mass[p[0] - 1, p[1] - 1], -failing.index(p)))
        jj, kk = witness_pair[0] - 1, witness_pair[1] - 1
        t_fail = float(starts[int(np.argmax(W[:, jj, kk] < mu - MASS_SLACK))])

    reach = sorted(globally_reachable_nodes(graph))
    gap_bad = bool(gap) and (gap["unbounded_gap_warning"] if max_gap is None else gap["max_gap"] > max_gap)
    notes = []
    if gap.get("unbounded_gap_warning"):
        notes.append("gaps t_{n+1} - t_n trend upward; boundedness not supported by the data")
    wit = {"reachable_nodes": reach, **gap}
    if failing:
        wit.update({"pair": list(witness_pair), "t": t_fail, "failing_pairs": [list(p) for p in failing]})
    if not reach:
        verdict = Verdict.FAILS
    elif gap_bad:
        verdict = Verdict.FAILS if max_gap is not None else Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.HOLDS
    moreau = ConditionReport("moreau", verdict, horizon, echo, wit, graph, notes)

    if failing:
        pe_verdict = Verdict.FAILS
        pe_wit = {"pair": list(witness_pair), "t": t_fail, "missing_arrows": [list(p) for p in failing]}
    elif gap_bad:
        pe_verdict = Verdict.INCONCLUSIVE if max_gap is None else Verdict.FAILS
        pe_wit = dict(gap)
    else:
        pe_verdict = Verdict.HOLDS
        pe_wit = {"complete": True, **gap}
    pe = ConditionReport("persistent_excitation", pe_verdict, horizon, echo, pe_wit, graph, list(notes))
    return graph, moreau, pe


def check_isc(schedule: ConnectionSchedule, T: float, mu: float,
              t_grid: Sequence[float] | None = None, horizon: float | None = None,
              stride: float | None = None):
    """Integral scrambling: every pair shares a target fed by both, at every grid time.

    A target ``k`` for the pair ``(i, j)`` needs arrows ``i -> k`` and
    ``j -> k``; self-arrows do not exist, so ``k`` differs from ``i`` and
    ``j``.  The smallest admissible ``k`` is selected.

    Returns
    -------
    report : ConditionReport
    selectors : list of SelectorOracle
        One per grid time (only complete selectors are kept).
    """
    if t_grid is None:
        if horizon is None:
            raise DomainError("give t_grid or horizon")
        params = ConditionParams(T, mu, horizon, stride)
        t_grid = window_grid(schedule, T, horizon, params.stride)
    grid = np.asarray(t_grid, dtype=float)
    if grid.size == 0:
        raise DomainError("t_grid must be nonempty")
    n = schedule.n_agents
    W = _window_stack(schedule, grid, T)
    strong = W >= mu - MASS_SLACK
    selectors = []
    nodes = set()
    echo = {"T": T, "mu": mu, "n_grid": int(grid.size)}
    hor = float(grid[-1] + T)
    for idx, t in enumerate(grid):
        oracle = SelectorOracle()
        for i, j in itertools.combinations(range(n), 2):
            both = strong[idx, i] & strong[idx, j]
            both[[i, j]] = False
            ks = np.flatnonzero(both)
            if ks.size == 0:
                return ConditionReport("isc", Verdict.FAILS, hor, echo,
                                       {"t": float(t), "pair": [i + 1, j + 1]}), selectors
            oracle[(i + 1, j + 1)] = int(ks[0]) + 1
        selectors.append(oracle)
        if n > 1:
            nodes.add(gamma_reduce(n, oracle))
    wit = {"gamma_nodes": sorted(nodes)}
    if n == 1:
        wit["gamma_nodes"] = [1]
    return ConditionReport("isc", Verdict.HOLDS, hor, echo, wit), selectors


def _subset_masks(n: int, chunk: int):
    """Proper nonempty subsets of ``range(n)`` as boolean rows, in chunks."""
    total = (1 << n) - 2
    bits = np.arange(n, dtype=np.int64)
    for lo in range(1, total + 1, chunk):
        codes = np.arange(lo, min(lo + chunk, total + 1), dtype=np.int64)
        yield codes, ((codes[:, None] >> bits) & 1).astype(float)


def check_cut_balance(schedule: ConnectionSchedule, params: CutBalanceParams,
                      chunk: int = 4096) -> ConditionReport:
    """Outgoing cut mass at most ``K`` times incoming mass, itself at most ``M``.

    Checked on every partition cell ``[tau_n, tau_{n+1}]`` and every proper
    nonempty subset ``S``; sums run over ``j`` in ``S`` and ``k`` outside.
    """
    n = schedule.n_agents
    if n > MAX_CUT_AGENTS:
        raise CapacityError(f"cut-balance enumeration supports at most {MAX_CUT_AGENTS} agents, got {n}")
    taus = params.taus
    echo = {"K": params.K, "M": params.M, "n_cells": len(taus) - 1,
            "tau_first": taus[0], "tau_last": taus[-1]}
    if n == 1:
        return ConditionReport("cut_balance", Verdict.HOLDS, taus[-1], echo, {"n_failing": 0})
    W = np.stack([schedule.window_matrix(a, b) for a, b in zip(taus, taus[1:])])
    first = None
    n_fail = 0
    for codes, S in _subset_masks(n, chunk):
        out = np.einsum("sj,cjk,sk->cs", S, W, 1.0 - S)
        inn = np.einsum("sj,ckj,sk->cs", S, W, 1.0 - S)
        bad = (out > params.K * inn + MASS_SLACK) | (params.K * inn > params.M + MASS_SLACK)
        n_fail += int(bad.sum())
        if bad.any():
            cells, subs = np.nonzero(bad)
            c = int(cells.min())
            s = int(subs[cells == c].min())
            if first is None or (c, codes[s]) < (first[0], first[1]):
                first = (c, int(codes[s]), float(out[c, s]), float(inn[c, s]))
    if first is None:
        return ConditionReport("cut_balance", Verdict.HOLDS, taus[-1], echo, {"n_failing": 0})
    c, code, out_s, in_s = first
    subset = [i + 1 for i in range(n) if code >> i & 1]
    wit = {"cell": c, "interval": [taus[c], taus[c + 1]], "S": subset,
           "outgoing": out_s, "incoming": in_s, "n_failing": n_fail}
    return ConditionReport("cut_balance", Verdict.FAILS, taus[-1], echo, wit)


# ---------------------------------------------------------------------------
# limit table and the limit-graph conditions
# ---------------------------------------------------------------------------


@dataclass
class LimitTable:
    """Window masses ``F_n(a, b)`` on a uniform grid of ``[0, W]``.

    Attributes
    ----------
    t_seq : tuple of float
    edges : ndarray, shape (m + 1,)
        Grid points ``0 = e_0 < ... < e_m = W``.
    cells : ndarray, shape (n_terms, N, N, m)
        Mass of each connection on each grid cell after ``t_n``.
    max_dev : ndarray, shape (N, N)
        Largest ``|F_p(a, b) - F_q(a, b)|`` over grid intervals and the last
        ``lookback`` terms.
    """

    t_seq: tuple[float, ...]
    edges: np.ndarray
    cells: np.ndarray
    lookback: int
    delta: float
    max_dev: np.ndarray

    @property
    def window(self) -> float:
        return float(self.edges[-1])

    @property
    def n_agents(self) -> int:
        return self.cells.shape[1]

    @property
    def converged(self) -> np.ndarray:
        return self.max_dev <= self.delta

    @property
    def all_converged(self) -> bool:
        n = self.n_agents
        return bool(all(self.converged[j, k] for j in range(n) for k in range(n) if j != k))

    def unconverged_pairs(self) -> list[tuple[int, int]]:
        n = self.n_agents
        return [(j + 1, k + 1) for j in range(n) for k in range(n)
                if j != k and not self.converged[j, k]]

    def _index(self, x: float) -> int:
        i = int(np.argmin(np.abs(self.edges - x)))
        if abs(self.edges[i] - x) > 1e-9 * max(1.0, self.window):
            raise DomainError(f"{x} is not a grid point of the limit table")
        return i

    def mass(self, n: int, a: float, b: float) -> np.ndarray:
        """``F_n(a, b)`` for all pairs (0-based matrix)."""
        ia, ib = self._index(a), self._index(b)
        if ib < ia:
            raise DomainError("need a <= b")
        return self.cells[n, :, :, ia:ib].sum(axis=-1)

    def limit(self, a: float, b: float) -> np.ndarray:
        """``F*(a, b)``, the last sampled term."""
        return self.mass(-1, a, b)


def estimate_limits(schedule: ConnectionSchedule, t_seq: Sequence[float], window: float,
                    stride: float | None = None, delta: float = 1e-9,
                    lookback: int = 4) -> LimitTable:
    """Tabulate the translated window masses along ``t_seq`` and test them for convergence."""
    seq = _check_seq(t_seq)
    if lookback < 1:
        raise DomainError("lookback must be >= 1")
    if len(seq) < lookback + 2:
        raise DomainError(f"t_seq needs at least {lookback + 2} terms, got {len(seq)}")
    if not window > 0 or not delta > 0:
        raise DomainError("window and delta must be positive")
    if schedule.horizon is not None and seq[-1] + window > schedule.horizon * (1 + 1e-12):
        raise DomainError(f"t_n + W = {seq[-1] + window} exceeds the schedule horizon {schedule.horizon}")
    stride = stride or window / 16.0
    m = max(1, int(round(window / stride)))
    edges = np.linspace(0.0, window, m + 1)
    n = schedule.n_agents
    cells = np.zeros((len(seq), n, n, m))
    for idx, t in enumerate(seq):
        for (j, k), fn in schedule.entries.items():
            cells[idx, j - 1, k - 1] = [fn.integral(t + a, t + b) for a, b in zip(edges, edges[1:])]
    tail = cells[-lookback:]
    max_dev = np.zeros((n, n))
    for p, q in itertools.combinations(range(tail.shape[0]), 2):
        D = np.cumsum(tail[p] - tail[q], axis=-1)
        D = np.concatenate([np.zeros((n, n, 1)), D], axis=-1)
        max_dev = np.maximum(max_dev, D.max(axis=-1) - D.min(axis=-1))
    return LimitTable(seq, edges, cells, lookback, delta, max_dev)


def _limit_verdict(name, graph, satisfied, table, schedule, echo, wit, fallback_ok):
    notes = ["finite-window proxy: positivity verified on [t, W] only"]
    unconv = table.unconverged_pairs()
    wit = {**wit, "unconverged_pairs": [list(p) for p in unconv]}
    if satisfied:
        return ConditionReport(name, Verdict.HOLDS, table.window, echo, wit, graph, notes)
    if unconv:
        if fallback_ok:
            notes.append("converged connections alone satisfy the graph condition")
            return ConditionReport(name, Verdict.HOLDS, table.window, echo, wit, graph, notes)
        notes.append("some connections do not settle along t_n")
        return ConditionReport(name, Verdict.INCONCLUSIVE, table.window, echo, wit, graph, notes)
    return ConditionReport(name, Verdict.FAILS, table.window, echo, wit, graph, notes)


def build_limit_graph_thm3(table: LimitTable, eps: float = 1e-9, tail: float | None = None,
                           schedule: ConnectionSchedule | None = None):
    """Arrows ``j -> k`` with ``F*(t, W) > eps`` at every tail-grid time ``t <= W - tail``.

    When some connections have not converged the condition is judged on the
    converged ones: a globally reachable node there settles the verdict,
    provided every unconverged connection is bounded (``schedule`` needed to
    confirm this).  Otherwise the verdict is inconclusive.
    """
    if eps < 0:
        raise DomainError("eps must be >= 0")
    W = table.window
    tail = W / 2.0 if tail is None else float(tail)
    if not 0 <= tail < W:
        raise DomainError("tail must lie in [0, W)")
    tgrid = table.edges[table.edges <= W - tail + 1e-12]
    n = table.n_agents
    ok = np.ones((n, n), dtype=bool)
    for t in tgrid:
        ok &= table.limit(float(t), W) > eps
    arrows = {(j + 1, k + 1) for j in range(n) for k in range(n) if j != k and ok[j, k]}
    graph = DirectedGraph(n, frozenset(arrows))
    reach = sorted(globally_reachable_nodes(graph))
    conv_graph = DirectedGraph(n, frozenset(a for a in arrows if table.converged[a[0] - 1, a[1] - 1]))
    conv_reach = sorted(globally_reachable_nodes(conv_graph))
    unconv = table.unconverged_pairs()
    bounded = schedule is not None and all(schedule.entry(*p).is_bounded for p in unconv)
    fallback = bool(conv_reach) and bounded
    echo = {"eps": eps, "window": W, "tail": tail, "lookback": table.lookback,
            "delta": table.delta, "n_terms": len(table.t_seq)}
    wit = {"reachable_nodes": conv_reach if unconv else reach, "limit_graph": sorted(arrows)}
    if unconv:
        graph = conv_graph
        wit["limit_graph"] = conv_graph.sorted_arrows()
    return graph, _limit_verdict("thm3", graph, bool(reach) and not unconv, table, schedule,
                                 echo, wit, fallback)


def build_limit_graph_thm6(table: LimitTable, eps: float = 1e-9):
    """Arrows with ``F*(0, W) > eps``; holds when every pair of agents is joined."""
    if eps < 0:
        raise DomainError("eps must be >= 0")
    n = table.n_agents
    total = table.limit(0.0, table.window)
    arrows = {(j + 1, k + 1) for j in range(n) for k in range(n) if j != k and total[j, k] > eps}
    graph = DirectedGraph(n, frozenset(arrows))
    unconv = table.unconverged_pairs()
    conv_graph = DirectedGraph(n, frozenset(a for a in arrows if table.converged[a[0] - 1, a[1] - 1]))
    covered = pairwise_coverage(graph)
    echo = {"eps": eps, "window": table.window, "lookback": table.lookback,
            "delta": table.delta, "n_terms": len(table.t_seq)}
    g = conv_graph if unconv else graph
    wit = {"limit_graph": g.sorted_arrows(), "uncovered_pairs": [list(p) for p in uncovered_pairs(g)]}
    return g, _limit_verdict("thm6", g, covered and not unconv, table, None, echo, wit,
                             pairwise_coverage(conv_graph))


# ---------------------------------------------------------------------------
# aggregate
# ---------------------------------------------------------------------------

CERTIFYING = ("moreau", "persistent_excitation", "isc", "cut_balance", "thm3", "thm6")


def certify(scenario, **overrides) -> ConditionReport:
    """Run every checker on a scenario and list the conditions that hold.

    Keyword overrides replace the scenario hints: ``T``, ``mu``, ``horizon``,
    ``stride``, ``t_seq``, ``window``, ``tail``, ``eps``, ``delta``,
    ``lookback``, ``cut_taus``, ``K``, ``M``.  The verdict is
    ``holds-up-to-horizon`` if at least one condition holds and
    ``inconclusive`` otherwise; failures of sufficient conditions never imply
    non-consensus.
    """
    hints = {**dict(scenario.hints), **{k: v for k, v in overrides.items() if v is not None}}
    sched = scenario.schedule
    T = float(hints.get("T", 1.0))
    mu = float(hints.get("mu", 0.5))
    horizon = float(hints.get("horizon", scenario.horizon))
    stride = hints.get("stride")
    reports: dict[str, ConditionReport] = {}

    _, reports["moreau"], reports["persistent_excitation"] = build_moreau_graph(
        sched, T, mu, horizon, stride=stride)
    reports["isc"], _ = check_isc(sched, T, mu, horizon=horizon, stride=stride)
    taus = hints.get("cut_taus") or tuple(np.arange(0.0, horizon + 1e-12, T).tolist())
    reports["cut_balance"] = check_cut_balance(
        sched, CutBalanceParams(tuple(taus), float(hints.get("K", 1.0)), float(hints.get("M", math.inf))))
    t_seq = hints.get("t_seq")
    if t_seq:
        table = estimate_limits(sched, t_seq, float(hints.get("window", 2 * T)),
                                delta=float(hints.get("delta", 1e-9)),
                                lookback=int(hints.get("lookback", 4)))
        eps = float(hints.get("eps", 1e-9))
        _, reports["thm3"] = build_limit_graph_thm3(table, eps, hints.get("tail"), sched)
        _, reports["thm6"] = build_limit_graph_thm6(table, float(hints.get("eps_thm6", eps)))

    certified = [name for name in CERTIFYING if name in reports and reports[name].holds]
    verdicts = {name: r.verdict.value for name, r in reports.items()}
    return ConditionReport(
        "certify",
        Verdict.HOLDS if certified else Verdict.INCONCLUSIVE,
        horizon,
        {"scenario": scenario.name, "T": T, "mu": mu},
        {"certified_by": certified, "verdicts": verdicts,
         "reports": {name: r.to_dict() for name, r in reports.items()}},
        notes=["sufficient conditions only; an empty list does not imply non-consensus"],
    )
