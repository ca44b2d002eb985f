"""Connection schedules built from piecewise-analytic primitives.

Every downstream computation (propagators, window tests, limit tables) only
consumes integrals of the connection functions over windows.  Each primitive
therefore carries its closed-form antiderivative, so window masses are exact
up to floating point rounding.

Agent indices in the public API are 1-based: ``schedule.entry(j, k)`` is the
influence of agent ``k`` on agent ``j``.  Matrices returned by
:class:`ConnectionSchedule` are 0-based numpy arrays with the same layout
(row ``j-1``, column ``k-1``).
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError

logger = logging.getLogger(__name__)

# relative tolerance used when comparing breakpoints produced by float sums
_BREAK_TOL = 1e-11


class _Unbounded:
    """Marker returned by ``value_at`` at an integrable singularity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNBOUNDED"

    def __reduce__(self):
        return (_Unbounded, ())


UNBOUNDED = _Unbounded()


def _tol(t: float) -> float:
    return _BREAK_TOL * max(1.0, abs(t))


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------


class Segment:
    """Base class of the closed-form primitives.

    Subclasses implement ``value``, ``integral`` over a sub-interval of the
    cell they occupy, and ``shift`` (``seg.shift(d).value(u) == seg.value(u + d)``).
    """

    kind: ClassVar[str]
    is_constant: ClassVar[bool] = False
    is_bounded: ClassVar[bool] = True

    def value(self, t: float) -> float:
        raise NotImplementedError

    def integral(self, a: float, b: float) -> float:
        raise NotImplementedError

    def shift(self, delta: float) -> "Segment":
        return self

    def singular_at(self, t: float) -> bool:
        return False

    def params(self) -> list[float]:
        return []

    def check_cell(self, lo: float, hi: float) -> None:
        """Raise DomainError if the primitive is not valid on ``[lo, hi]``."""


@dataclass(frozen=True)
class Zero(Segment):
    kind: ClassVar[str] = "zero"
    is_constant: ClassVar[bool] = True

    def value(self, t):
        return 0.0

    def integral(self, a, b):
        return 0.0


@dataclass(frozen=True)
class Constant(Segment):
    c: float

    kind: ClassVar[str] = "constant"
    is_constant: ClassVar[bool] = True

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c >= 0):
            raise DomainError(f"constant rate must be finite and >= 0, got {self.c}")

    def value(self, t):
        return float(self.c)

    def integral(self, a, b):
        return float(self.c) * (b - a)

    def params(self):
        return [self.c]


@dataclass(frozen=True)
class Hyperbolic(Segment):
    """``c / (t - t0 + offset)``; with ``t0=0, offset=1`` this is ``c/(t+1)``."""

    c: float
    t0: float = 0.0
    offset: float = 1.0

    kind: ClassVar[str] = "hyperbolic"

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c >= 0):
            raise DomainError(f"hyperbolic scale must be finite and >= 0, got {self.c}")

    def _den(self, t):
        return t - self.t0 + self.offset

    def value(self, t):
        return self.c / self._den(t)

    def integral(self, a, b):
        if b <= a:
            return 0.0
        return self.c * math.log1p((b - a) / self._den(a))

    def shift(self, delta):
        return Hyperbolic(self.c, self.t0 - delta, self.offset)

    def params(self):
        return [self.c, self.t0, self.offset]

    def check_cell(self, lo, hi):
        if self._den(lo) <= 0:
            raise DomainError(f"hyperbolic denominator is not positive at t={lo}")


@dataclass(frozen=True)
class InvSqrtLeft(Segment):
    """``1/sqrt(t - s) - 1``, clamped to zero for ``t > s + 1``."""

    s: float

    kind: ClassVar[str] = "inv_sqrt_left"
    is_bounded: ClassVar[bool] = False

    def value(self, t):
        u = t - self.s
        if u >= 1.0:
            return 0.0
        return 1.0 / math.sqrt(u) - 1.0

    def integral(self, a, b):
        lo = max(a - self.s, 0.0)
        hi = min(b - self.s, 1.0)
        if hi <= lo:
            return 0.0
        # antiderivative 2 sqrt(u) - u
        return 2.0 * (math.sqrt(hi) - math.sqrt(lo)) - (hi - lo)

    def shift(self, delta):
        return InvSqrtLeft(self.s - delta)

    def singular_at(self, t):
        return abs(t - self.s) <= _tol(t)

    def params(self):
        return [self.s]

    def check_cell(self, lo, hi):
        if lo < self.s - _tol(lo):
            raise DomainError(f"inv_sqrt_left singularity {self.s} lies after cell start {lo}")


@dataclass(frozen=True)
class InvCbrtRight(Segment):
    """``1/cbrt(e - t) - 1``, clamped to zero for ``t < e - 1``."""

    e: float

    kind: ClassVar[str] = "inv_cbrt_right"
    is_bounded: ClassVar[bool] = False

    def value(self, t):
        u = self.e - t
        if u >= 1.0:
            return 0.0
        return 1.0 / u ** (1.0 / 3.0) - 1.0

    def integral(self, a, b):
        lo = max(self.e - b, 0.0)
        hi = min(self.e - a, 1.0)
        if hi <= lo:
            return 0.0
        # in u = e - t the antiderivative is 1.5 u^(2/3) - u
        return 1.5 * (hi ** (2.0 / 3.0) - lo ** (2.0 / 3.0)) - (hi - lo)

    def shift(self, delta):
        return InvCbrtRight(self.e - delta)

    def singular_at(self, t):
        return abs(t - self.e) <= _tol(t)

    def params(self):
        return [self.e]

    def check_cell(self, lo, hi):
        if not math.isfinite(hi) or hi > self.e + _tol(hi):
            raise DomainError(f"inv_cbrt_right singularity {self.e} lies before cell end {hi}")


SEGMENT_KINDS: dict[str, type[Segment]] = {
    cls.kind: cls for cls in (Zero, Constant, Hyperbolic, InvSqrtLeft, InvCbrtRight)
}

ZERO_SEGMENT = Zero()


def make_segment(kind: str, params: Sequence[float] = ()) -> Segment:
    try:
        cls = SEGMENT_KINDS[kind]
    except KeyError:
        raise DomainError(f"unknown segment kind {kind!r}") from None
    return cls(*[float(p) for p in params])


# ---------------------------------------------------------------------------
# piecewise functions
# ---------------------------------------------------------------------------


class PiecewiseFunction:
    """Nonnegative function on ``[0, inf)`` tiled by primitives.

    Parameters
    ----------
    breakpoints : sequence of float
        Strictly increasing, starting at 0.  The last entry may be ``inf``.
    segments : sequence of Segment
        ``segments[i]`` is active on ``[breakpoints[i], breakpoints[i+1])``.
    period : float, optional
        When given, the function on ``[0, period)`` repeats forever and the
        last breakpoint must equal ``period``.  Otherwise the function is zero
        after the last (finite) breakpoint.
    """

    __slots__ = ("_breaks", "_segments", "_cum", "period")

    def __init__(self, breakpoints: Sequence[float], segments: Sequence[Segment],
                 period: float | None = None):
        breaks = [float(b) for b in breakpoints]
        segs = list(segments)
        if len(breaks) != len(segs) + 1:
            raise DomainError("need exactly one segment per breakpoint interval")
        if breaks[0] != 0.0:
            raise DomainError("breakpoints must start at 0")
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        if any(math.isinf(b) for b in breaks[:-1]) or math.isnan(sum(breaks[:-1])):
            raise DomainError("only the last breakpoint may be infinite")
        if period is not None:
            period = float(period)
            if not (math.isfinite(period) and period > 0):
                raise DomainError("period must be finite and positive")
            if abs(breaks[-1] - period) > _tol(period):
                raise DomainError("last breakpoint of a periodic function must equal the period")
            breaks[-1] = period
        for seg, lo, hi in zip(segs, breaks, breaks[1:]):
            seg.check_cell(lo, hi)
        cum = [0.0]
        for seg, lo, hi in zip(segs, breaks, breaks[1:]):
            mass = seg.integral(lo, hi) if math.isfinite(hi) else math.inf
            cum.append(cum[-1] + mass)
        self._breaks = breaks
        self._segments = segs
        self._cum = cum
        self.period = period

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[float, float, Segment]],
                    period: float | None = None) -> "PiecewiseFunction":
        """Build from ``(t0, t1, segment)`` triples; gaps are filled with zero."""
        pieces = sorted(pieces, key=lambda p: p[0])
        breaks = [0.0]
        segs: list[Segment] = []
        for t0, t1, seg in pieces:
            t0, t1 = float(t0), float(t1)
            if t0 < 0 or t1 <= t0:
                raise DomainError(f"invalid piece [{t0}, {t1}]")
            if t0 < breaks[-1] - _tol(t0):
                raise DomainError(f"piece starting at {t0} overlaps the previous one")
            if t0 > breaks[-1] + _tol(t0):
                segs.append(ZERO_SEGMENT)
                breaks.append(t0)
            segs.append(seg)
            breaks.append(t1)
        if period is not None:
            if breaks[-1] > period + _tol(period):
                raise DomainError("pieces extend beyond the period")
            if breaks[-1] < period - _tol(period):
                segs.append(ZERO_SEGMENT)
                breaks.append(period)
        if not segs:
            segs.append(ZERO_SEGMENT)
            breaks.append(period if period is not None else math.inf)
        return cls(breaks, segs, period=period)

    @classmethod
    def zero(cls) -> "PiecewiseFunction":
        return cls([0.0, math.inf], [ZERO_SEGMENT])

    @classmethod
    def constant(cls, c: float, start: float = 0.0, end: float = math.inf) -> "PiecewiseFunction":
        return cls.from_pieces([(start, end, Constant(c))])

    # -- queries ------------------------------------------------------------

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(self._breaks)

    @property
    def segments(self) -> tuple[Segment, ...]:
        return tuple(self._segments)

    @property
    def is_zero(self) -> bool:
        return all(isinstance(s, Zero) or (isinstance(s, (Constant, Hyperbolic)) and s.c == 0)
                   for s in self._segments)

    @property
    def is_bounded(self) -> bool:
        return all(s.is_bounded for s in self._segments)

    def pieces(self) -> list[tuple[float, float, Segment]]:
        """Nonzero pieces as ``(t0, t1, segment)`` in base coordinates."""
        return [(lo, hi, s) for s, lo, hi in zip(self._segments, self._breaks, self._breaks[1:])
                if not isinstance(s, Zero)]

    def _reduce(self, t: float) -> tuple[float, float]:
        if self.period is None:
            return 0.0, t
        k, r = divmod(t, self.period)
        return k, r

    def _index(self, r: float) -> int:
        # len(segments) means the zero tail past the last breakpoint
        return bisect.bisect_right(self._breaks, r) - 1

    def _segment_at(self, r: float) -> Segment:
        i = self._index(r)
        return self._segments[i] if i < len(self._segments) else ZERO_SEGMENT

    def value_at(self, t: float):
        """Rate at time ``t`` (right-continuous); ``UNBOUNDED`` at a singularity."""
        if not t >= 0:
            raise DomainError(f"time must be >= 0, got {t}")
        _, r = self._reduce(t)
        i = self._index(r)
        if i < len(self._segments) and self._segments[i].singular_at(r):
            return UNBOUNDED
        if i >= 1 and abs(r - self._breaks[i]) <= _tol(r) and self._segments[i - 1].singular_at(r):
            return UNBOUNDED
        if self.period is not None and r <= _tol(r) and self._segments[-1].singular_at(self.period):
            return UNBOUNDED
        seg = self._segments[i] if i < len(self._segments) else ZERO_SEGMENT
        return max(seg.value(r), 0.0)

    def _base_cum(self, r: float) -> float:
        i = self._index(r)
        if i >= len(self._segments):
            return self._cum[-1]
        return self._cum[i] + self._segments[i].integral(self._breaks[i], r)

    def _base_integral(self, a: float, b: float) -> float:
        i, j = self._index(a), self._index(b)
        m = len(self._segments)
        if i >= m:
            return 0.0
        if i == j:
            return self._segments[i].integral(a, b)
        head = self._segments[i].integral(a, self._breaks[i + 1])
        if j >= m:
            return head + (self._cum[m] - self._cum[i + 1])
        return head + (self._cum[j] - self._cum[i + 1]) + self._segments[j].integral(self._breaks[j], b)

    def integral(self, a: float, b: float) -> float:
        """Exact integral over ``[a, b]``."""
        if not (a >= 0 and b >= 0):
            raise DomainError(f"window [{a}, {b}] must lie in [0, inf)")
        if a > b:
            raise DomainError(f"window start {a} exceeds end {b}")
        if not math.isfinite(b):
            raise DomainError("window end must be finite")
        if a == b:
            return 0.0
        if self.period is None:
            return max(self._base_integral(a, b), 0.0)
        ka, ra = self._reduce(a)
        kb, rb = self._reduce(b)
        if ka == kb:
            return max(self._base_integral(ra, rb), 0.0)
        total = self._cum[-1]
        mass = (total - self._base_cum(ra)) + (kb - ka - 1) * total + self._base_cum(rb)
        return max(mass, 0.0)

    def next_breakpoint(self, t: float) -> float:
        """Smallest breakpoint strictly after ``t`` (``inf`` when none)."""
        if self.period is None:
            i = bisect.bisect_right(self._breaks, t + _tol(t))
            return self._breaks[i] if i < len(self._breaks) else math.inf
        P = self.period
        k, r = divmod(t, P)
        i = bisect.bisect_right(self._breaks, r + _tol(t))
        if i >= len(self._breaks):
            k, i = k + 1, 1
        nxt = k * P + self._breaks[i]
        while nxt <= t + _tol(t):
            i += 1
            if i >= len(self._breaks):
                k, i = k + 1, 1
            nxt = k * P + self._breaks[i]
        return nxt

    def breakpoints_between(self, a: float, b: float) -> list[float]:
        """All finite breakpoints in ``[a, b]`` (periodic copies expanded)."""
        if self.period is None:
            return [x for x in self._breaks if a <= x <= b and math.isfinite(x)]
        P = self.period
        out = []
        for k in range(int(math.floor(a / P)), int(math.floor(b / P)) + 1):
            for x in self._breaks[:-1]:
                t = k * P + x
                if a <= t <= b:
                    out.append(t)
        return out

    def is_constant_on(self, a: float, b: float) -> bool:
        if self.next_breakpoint(a) < b - _tol(b):
            return False
        _, r = self._reduce(0.5 * (a + b))
        return self._segment_at(r).is_constant

    def is_zero_on(self, a: float, b: float) -> bool:
        if self.next_breakpoint(a) < b - _tol(b):
            return False
        _, r = self._reduce(0.5 * (a + b))
        return isinstance(self._segment_at(r), Zero)

    def translate(self, t0: float) -> "PiecewiseFunction":
        """Return ``g`` with ``g(t) = f(t0 + t)``."""
        if not t0 >= 0:
            raise DomainError(f"translation must be >= 0, got {t0}")
        if t0 == 0:
            return self
        breaks, segs = self._breaks, self._segments
        if self.period is None:
            i = self._index(t0)
            if i >= len(segs):
                return PiecewiseFunction.zero()
            new_breaks = [0.0] + [b - t0 for b in breaks[i + 1:]]
            return PiecewiseFunction(new_breaks, [s.shift(t0) for s in segs[i:]])
        P = self.period
        _, r = divmod(t0, P)
        if r == 0:
            return self
        i = self._index(r)
        new_breaks = [0.0]
        new_segs: list[Segment] = []
        for j in range(i, len(segs)):
            new_segs.append(segs[j].shift(r))
            new_breaks.append(breaks[j + 1] - r)
        for j in range(0, i + 1):
            end = breaks[j + 1] if j < i else r
            if end - breaks[j] <= _tol(end):
                continue
            new_segs.append(segs[j].shift(r - P))
            new_breaks.append(end + P - r)
        new_breaks[-1] = P
        return _merge_tiny(new_breaks, new_segs, P)

    def __eq__(self, other):
        if not isinstance(other, PiecewiseFunction):
            return NotImplemented
        return (self._breaks == other._breaks and self._segments == other._segments
                and self.period == other.period)

    __hash__ = None

    def __repr__(self):
        body = ", ".join(f"[{lo:g},{hi:g}):{s.kind}{s.params()}" for lo, hi, s in self.pieces())
        per = f", period={self.period:g}" if self.period is not None else ""
        return f"PiecewiseFunction({body or 'zero'}{per})"


def _merge_tiny(breaks: list[float], segs: list[Segment], period: float) -> PiecewiseFunction:
    keep_b, keep_s = [breaks[0]], []
    for seg, hi in zip(segs, breaks[1:]):
        if hi - keep_b[-1] <= _tol(hi):
            continue
        keep_s.append(seg)
        keep_b.append(hi)
    keep_b[-1] = period
    return PiecewiseFunction(keep_b, keep_s, period=period)


# ---------------------------------------------------------------------------
# time reparametrisation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeMap:
    """Increasing time change ``rho`` with ``rho(0) = 0``, its inverse and derivative."""

    forward: Callable[[float], float]
    inverse: Callable[[float], float]
    derivative: Callable[[float], float]
    name: str = "custom"

    @classmethod
    def identity(cls) -> "TimeMap":
        return cls(lambda t: t, lambda s: s, lambda t: 1.0, name="identity")

    @classmethod
    def linear(cls, c: float) -> "TimeMap":
        if c <= 0:
            raise DomainError("linear time map needs a positive slope")
        return cls(lambda t: c * t, lambda s: s / c, lambda t: c, name=f"linear({c:g})")

    @classmethod
    def exponential(cls) -> "TimeMap":
        """``rho(t) = exp(t) - 1``."""
        return cls(math.expm1, math.log1p, math.exp, name="expm1")

    def validate(self, horizon: float = 50.0, samples: int = 257) -> None:
        if abs(self.forward(0.0)) > 1e-12:
            raise DomainError("time map must satisfy rho(0) = 0")
        ts = np.linspace(0.0, horizon, samples)
        vals = [self.forward(float(t)) for t in ts]
        if any(v2 <= v1 for v1, v2 in zip(vals, vals[1:])):
            raise DomainError("time map must be strictly increasing")
        if any(self.derivative(float(t)) < 0 for t in ts):
            raise DomainError("time map derivative must be nonnegative")
        for t, v in zip(ts[::16], vals[::16]):
            if abs(self.inverse(v) - t) > 1e-8 * max(1.0, t):
                raise DomainError("supplied inverse does not invert the time map")


class RescaledFunction:
    """``b(t) = a(rho(t)) * rho'(t)``; window masses are taken through ``rho``."""

    __slots__ = ("base", "rho")

    def __init__(self, base, rho: TimeMap):
        self.base = base
        self.rho = rho

    period = None

    @property
    def is_zero(self):
        return self.base.is_zero

    @property
    def is_bounded(self):
        # rho' may compensate a singularity or create one; be conservative
        return False

    def value_at(self, t):
        if not t >= 0:
            raise DomainError(f"time must be >= 0, got {t}")
        v = self.base.value_at(self.rho.forward(t))
        if v is UNBOUNDED:
            return v
        return v * self.rho.derivative(t)

    def integral(self, a, b):
        if a > b:
            raise DomainError(f"window start {a} exceeds end {b}")
        return self.base.integral(self.rho.forward(a), self.rho.forward(b))

    def next_breakpoint(self, t):
        nb = self.base.next_breakpoint(self.rho.forward(t))
        return self.rho.inverse(nb) if math.isfinite(nb) else math.inf

    def breakpoints_between(self, a, b):
        return [self.rho.inverse(x) for x in
                self.base.breakpoints_between(self.rho.forward(a), self.rho.forward(b))]

    def is_constant_on(self, a, b):
        return self.base.is_zero_on(self.rho.forward(a), self.rho.forward(b))

    def is_zero_on(self, a, b):
        return self.base.is_zero_on(self.rho.forward(a), self.rho.forward(b))

    def translate(self, t0):
        s0 = self.rho.forward(t0)
        rho = self.rho
        shifted = TimeMap(lambda t: rho.forward(t0 + t) - s0,
                          lambda s: rho.inverse(s + s0) - t0,
                          lambda t: rho.derivative(t0 + t),
                          name=f"{rho.name}+{t0:g}")
        return RescaledFunction(self.base.translate(s0), shifted)

    def __repr__(self):
        return f"RescaledFunction({self.base!r}, rho={self.rho.name})"


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------

_ZERO_FN = PiecewiseFunction.zero()


@dataclass(frozen=True)
class ConnectionSchedule:
    """The family of connection functions ``a_jk`` of an ``N``-agent system.

    ``entries`` maps 1-based ordered pairs ``(j, k)`` to functions; missing
    pairs are identically zero and diagonal pairs are dropped.  ``horizon``
    marks the end of the time range the schedule is meant to describe
    (``None`` for schedules defined on all of ``[0, inf)``).
    """

    n_agents: int
    entries: Mapping[tuple[int, int], PiecewiseFunction] = field(default_factory=dict)
    horizon: float | None = None

    def __post_init__(self):
        n = int(self.n_agents)
        if n < 1:
            raise DomainError("n_agents must be positive")
        clean = {}
        for (j, k), fn in dict(self.entries).items():
            if not (1 <= j <= n and 1 <= k <= n):
                raise DomainError(f"pair ({j}, {k}) outside 1..{n}")
            if j == k:
                logger.debug("dropping diagonal entry (%d, %d)", j, k)
                continue
            if fn.is_zero:
                continue
            clean[(int(j), int(k))] = fn
        object.__setattr__(self, "n_agents", n)
        object.__setattr__(self, "entries", clean)

    def entry(self, j: int, k: int):
        return self.entries.get((j, k), _ZERO_FN)

    def pairs(self) -> list[tuple[int, int]]:
        n = self.n_agents
        return [(j, k) for j in range(1, n + 1) for k in range(1, n + 1) if j != k]

    @property
    def is_bounded(self) -> bool:
        return all(fn.is_bounded for fn in self.entries.values())

    def is_symmetric(self) -> bool:
        return all(self.entries.get((k, j)) == fn for (j, k), fn in self.entries.items())

    def window_matrix(self, a: float, b: float) -> np.ndarray:
        """``W[j-1, k-1] = integral of a_jk over [a, b]``; zero diagonal."""
        W = np.zeros((self.n_agents, self.n_agents))
        for (j, k), fn in self.entries.items():
            W[j - 1, k - 1] = fn.integral(a, b)
        return W

    def generator(self, a: float, b: float) -> np.ndarray:
        """Integrated Laplacian-type generator over ``[a, b]``."""
        W = self.window_matrix(a, b)
        W[np.diag_indices_from(W)] = -W.sum(axis=1)
        return W

    def value_matrix(self, t: float) -> np.ndarray:
        A = np.zeros((self.n_agents, self.n_agents))
        for (j, k), fn in self.entries.items():
            v = fn.value_at(t)
            A[j - 1, k - 1] = math.inf if v is UNBOUNDED else v
        return A

    def next_breakpoint(self, t: float) -> float:
        return min((fn.next_breakpoint(t) for fn in self.entries.values()), default=math.inf)

    def breakpoints_between(self, a: float, b: float) -> list[float]:
        pts: set[float] = set()
        for fn in self.entries.values():
            pts.update(fn.breakpoints_between(a, b))
        return sorted(pts)

    def is_constant_on(self, a: float, b: float) -> bool:
        return all(fn.is_constant_on(a, b) for fn in self.entries.values())

    def is_zero_on(self, a: float, b: float) -> bool:
        return all(fn.is_zero_on(a, b) for fn in self.entries.values())

    def translate(self, t0: float) -> "ConnectionSchedule":
        horizon = None if self.horizon is None else max(self.horizon - t0, 0.0)
        return ConnectionSchedule(self.n_agents,
                                  {p: fn.translate(t0) for p, fn in self.entries.items()},
                                  horizon=horizon)

    # -- serialisation ------------------------------------------------------

    def to_dict(self) -> dict:
        entries = []
        for (j, k), fn in sorted(self.entries.items()):
            if not isinstance(fn, PiecewiseFunction):
                raise DomainError(f"entry ({j}, {k}) is not a piecewise primitive function")
            item = {
                "from": k,
                "to": j,
                "pieces": [
                    {"t0": lo, "t1": (hi if math.isfinite(hi) else None),
                     "kind": seg.kind, "params": seg.params()}
                    for lo, hi, seg in fn.pieces()
                ],
            }
            if fn.period is not None:
                item["period"] = fn.period
            entries.append(item)
        out = {"n_agents": self.n_agents, "entries": entries}
        if self.horizon is not None:
            out["horizon"] = self.horizon
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "ConnectionSchedule":
        try:
            n = int(data["n_agents"])
            entries = {}
            for item in data.get("entries", []):
                j, k = int(item["to"]), int(item["from"])
                pieces = [
                    (p["t0"], math.inf if p.get("t1") is None else p["t1"],
                     make_segment(p["kind"], p.get("params", [])))
                    for p in item["pieces"]
                ]
                if (j, k) in entries:
                    raise DomainError(f"duplicate entry for pair ({j}, {k})")
                entries[(j, k)] = PiecewiseFunction.from_pieces(pieces, period=item.get("period"))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed schedule document: {exc}") from exc
        return cls(n, entries, horizon=data.get("horizon"))


# ---------------------------------------------------------------------------
# functional interface
# ---------------------------------------------------------------------------


def value_at(f, t: float):
    return f.value_at(t)


def window_integral(f, a: float, b: float) -> float:
    return f.integral(a, b)


def translate(f, t0: float):
    return f.translate(t0)


def time_rescale(schedule: ConnectionSchedule, rho: TimeMap,
                 check_horizon: float = 50.0) -> ConnectionSchedule:
    """Reparametrise time: ``b_jk(t) = a_jk(rho(t)) * rho'(t)``.

    Window masses transform as ``b.integral(s, u) == a.integral(rho(s), rho(u))``.
    """
    rho.validate(horizon=check_horizon)
    if rho.name == "identity":
        return schedule
    horizon = None if schedule.horizon is None else rho.inverse(schedule.horizon)
    return ConnectionSchedule(schedule.n_agents,
                              {p: RescaledFunction(fn, rho) for p, fn in schedule.entries.items()},
                              horizon=horizon)
