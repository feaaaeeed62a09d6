"""Finite-horizon limit detection and the minimal averaging order.

A series is judged on tail windows ``[(1 - tail_fraction) T_j, T_j]`` at
sub-horizons ``T_j = T / 2**j``:

* Diverging when the window envelope ``max |x|`` grows with log-log slope above
  ``growth_tol``.
* Converged when the window oscillation ``max - min`` is non-increasing along
  the ladder and either already within ``abs_tol + rel_tol*|mean|`` or decaying
  like a power of the horizon (log-log slope at most ``-decay_tol``).
* Oscillating otherwise.

The limit value of a converged series is extrapolated from tail means at
horizons ``T * value_ratio**-i``. The slow part of an iterated average of
order ``q`` behaves like ``L + P(ln T)/T`` with ``deg P <= q - 1``, and that
model is fitted by least squares.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .averaging import MAX_ORDER, AverageStack, iter_levels, iterate_average
from .errors import ConfigError, InconclusiveError, PreconditionError
from .signals import SignalSpec, UniformGrid, UniformSignal, min_frequency, sample_spec

MIN_WINDOW_SAMPLES = 8
TREND_DEGREE = 4


class Verdict(str, enum.Enum):
    CONVERGED = "converged"
    OSCILLATING = "oscillating"
    DIVERGING = "diverging"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class DetectionPolicy:
    tail_fraction: float = 0.25
    ladder: int = 4
    abs_tol: float = 1e-4
    rel_tol: float = 1e-3
    growth_tol: float = 0.2
    decay_tol: float = 0.3
    min_horizon: float | None = None
    value_ladder: int = 8
    value_ratio: float = math.sqrt(2.0)
    max_log_degree: int = 4

    def __post_init__(self):
        if not 0 < self.tail_fraction <= 0.5:
            raise ConfigError(f"tail_fraction must be in (0, 1/2], got {self.tail_fraction}")
        if self.ladder < 2:
            raise ConfigError("detection ladder needs at least 2 horizons")
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ConfigError("tolerances must be non-negative")
        if self.value_ratio <= 1:
            raise ConfigError("value_ratio must exceed 1")
        if self.value_ladder < self.max_log_degree + 3:
            raise ConfigError("value_ladder must be at least max_log_degree + 3")

    def tolerance(self, mean: float) -> float:
        return self.abs_tol + self.rel_tol * abs(mean)

    def horizon_floor(self, omega_min: float | None = None) -> float:
        if self.min_horizon is not None:
            return self.min_horizon
        if omega_min:
            return 50 * 2 * math.pi / omega_min
        return 100.0

    def for_spec(self, spec: SignalSpec) -> "DetectionPolicy":
        """Copy with ``min_horizon`` resolved from the spec's slowest frequency."""
        return replace(self, min_horizon=self.horizon_floor(min_frequency(spec)))

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class LimitEstimate:
    verdict: Verdict
    value: float = math.nan
    oscillation: float = math.nan
    growth_exponent: float = math.nan
    horizon: float = math.nan
    tail_mean: float = math.nan
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def converged(self) -> bool:
        return self.verdict is Verdict.CONVERGED

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict.value,
            "value": _num(self.value),
            "oscillation": _num(self.oscillation),
            "growth_exponent": _num(self.growth_exponent),
            "horizon": _num(self.horizon),
            "tail_mean": _num(self.tail_mean),
        }
        out.update(self.diagnostics)
        return out


def _num(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _window(series: UniformSignal, horizon: float, fraction: float) -> np.ndarray:
    dt = series.grid.dt
    k1 = min(int(math.floor(horizon / dt + 1e-9)), series.grid.n - 1)
    k0 = int(math.ceil((1 - fraction) * horizon / dt - 1e-9))
    return series.samples[k0 : k1 + 1]


def residual_oscillation(window: np.ndarray) -> float:
    """Peak-to-peak of a tail window after removing a low-order polynomial trend.

    Isolates the oscillatory part from the slow drift that iterated averages
    carry at finite horizons.
    """
    x = np.linspace(-1.0, 1.0, len(window))
    trend = np.polynomial.polynomial.polyval(
        x, np.polynomial.polynomial.polyfit(x, window, TREND_DEGREE)
    )
    return float(np.ptp(window - trend))


def tail_window(series: UniformSignal, fraction: float = 0.25) -> np.ndarray:
    return _window(series, series.grid.horizon, fraction)


def _loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def extrapolate_horizon_limit(horizons, means, log_degree: int) -> float:
    """Least-squares intercept ``L`` of ``mean(T) = L + P(ln T)/T``."""
    H = np.asarray(horizons, dtype=float)
    M = np.asarray(means, dtype=float)
    ref = H.max()
    u = np.log(H / ref)
    cols = [np.ones_like(H)] + [u**i * ref / H for i in range(log_degree + 1)]
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), M, rcond=None)
    return float(coef[0])


def detect_limit(
    series: UniformSignal,
    policy: DetectionPolicy = DetectionPolicy(),
    log_degree: int = 0,
) -> LimitEstimate:
    T = series.grid.horizon
    floor = policy.horizon_floor()
    if T < floor:
        raise InconclusiveError(f"horizon {T:g} shorter than required {floor:g}")
    horizons = T / 2.0 ** np.arange(policy.ladder)
    windows = [_window(series, h, policy.tail_fraction) for h in horizons]
    if min(len(w) for w in windows) < MIN_WINDOW_SAMPLES:
        raise InconclusiveError("tail windows at the shortest sub-horizon are too short")

    osc = np.array([w.max() - w.min() for w in windows])
    means = np.array([w.mean() for w in windows])
    env = np.array([np.abs(w).max() for w in windows])
    diag = {
        "residual_oscillation": residual_oscillation(windows[0]),
        "ladder_horizons": horizons.tolist(),
        "ladder_oscillation": osc.tolist(),
        "ladder_mean": means.tolist(),
    }
    common = dict(oscillation=float(osc[0]), horizon=T, tail_mean=float(means[0]))

    if np.all(env > 0):
        growth = _loglog_slope(horizons, env)
        if growth > policy.growth_tol:
            return LimitEstimate(Verdict.DIVERGING, growth_exponent=growth,
                                 diagnostics=diag, **common)
    # Oscillation must not grow as the horizon grows (index 0 is the longest).
    slack = 1e-12 * (1 + env.max())
    monotone = bool(np.all(osc[:-1] <= osc[1:] + slack))
    within = osc[0] <= policy.tolerance(means[0])
    decaying = False
    if monotone and not within and np.all(osc > 0):
        decay = _loglog_slope(horizons, osc)
        diag["oscillation_decay_exponent"] = decay
        decaying = decay <= -policy.decay_tol
    if monotone and (within or decaying):
        value = limit_value(series, policy, log_degree)
        diag["log_degree"] = min(max(log_degree, 0), policy.max_log_degree)
        return LimitEstimate(Verdict.CONVERGED, value=value, diagnostics=diag, **common)
    return LimitEstimate(Verdict.OSCILLATING, diagnostics=diag, **common)


def smoothing_slack(policy: DetectionPolicy, scale: float = 0.0) -> float:
    """Oscillation differences below this are not resolved by the detrending."""
    return 1e-2 * policy.abs_tol + 1e-12 * (1 + abs(scale))


def limit_value(
    series: UniformSignal, policy: DetectionPolicy = DetectionPolicy(), log_degree: int = 0
) -> float:
    """Horizon-extrapolated limit estimate, falling back to the tail mean."""
    degree = min(max(log_degree, 0), policy.max_log_degree)
    value = _extrapolated_value(series, policy, degree)
    if value is None:
        value = float(tail_window(series, policy.tail_fraction).mean())
    return value


def _extrapolated_value(series, policy, degree) -> float | None:
    T = series.grid.horizon
    horizons = T / policy.value_ratio ** np.arange(policy.value_ladder)
    windows = [_window(series, h, policy.tail_fraction) for h in horizons]
    if min(len(w) for w in windows) < MIN_WINDOW_SAMPLES:
        return None
    means = [w.mean() for w in windows]
    return extrapolate_horizon_limit(horizons, means, degree)


@dataclass(frozen=True)
class OrderReport:
    m: int | None
    limit: float
    per_level: tuple[LimitEstimate, ...]
    q_max: int
    certified: bool | None = None

    @property
    def found(self) -> bool:
        return self.m is not None

    @property
    def stable_above(self) -> bool:
        """Every level from ``m`` up to ``q_max`` converged."""
        return self.found and all(e.converged for e in self.per_level[self.m :])

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "found": self.found,
            "limit": _num(self.limit),
            "q_max": self.q_max,
            "stable_above": self.stable_above,
            "certified": self.certified,
            "per_level": [e.to_dict() for e in self.per_level],
        }


def level_log_degree(q: int) -> int:
    return max(q - 1, 0)


def _detect_level(series, policy, q) -> LimitEstimate:
    try:
        return detect_limit(series, policy, level_log_degree(q))
    except InconclusiveError as exc:
        return LimitEstimate(Verdict.INCONCLUSIVE, horizon=series.grid.horizon,
                             diagnostics={"reason": str(exc)})


def order_from_levels(levels: Iterable[UniformSignal], policy: DetectionPolicy) -> OrderReport:
    """Detect each level of ``psi_0, psi_1, ...`` in turn; levels may stream."""
    per_level = tuple(_detect_level(level, policy, q) for q, level in enumerate(levels))
    m = next((q for q, e in enumerate(per_level) if e.converged), None)
    limit = per_level[m].value if m is not None else math.nan
    return OrderReport(m, limit, per_level, len(per_level) - 1)


def minimal_order(
    signal: UniformSignal,
    q_max: int = 6,
    policy: DetectionPolicy = DetectionPolicy(),
    max_order: int = MAX_ORDER,
) -> OrderReport:
    """Least ``q <= q_max`` whose iterated average converges (``m``)."""
    levels = itertools.chain([signal], iter_levels(signal, q_max, max_order))
    return order_from_levels(levels, policy)


def minimal_order_for_spec(
    spec: SignalSpec,
    grid: UniformGrid,
    q_max: int = 6,
    policy: DetectionPolicy = DetectionPolicy(),
    certify: bool = True,
) -> OrderReport:
    """``minimal_order`` on a sampled spec, with minimality re-checked at
    twice the horizon.

    If level ``m - 1`` converges on the doubled grid, the finite horizon had
    produced a false negative and the doubled-horizon report is returned.
    """
    policy = policy.for_spec(spec) if policy.min_horizon is None else policy
    report = minimal_order(sample_spec(spec, grid), q_max, policy)
    if not certify or not report.found or report.m == 0:
        return report
    doubled = UniformGrid(grid.t0, grid.dt, 2 * grid.n - 1)
    below = report.m - 1
    level = sample_spec(spec, doubled)
    if below > 0:
        level = iterate_average(level, below).level(below)
    if not _detect_level(level, policy, below).converged:
        return replace(report, certified=True)
    redo = minimal_order(sample_spec(spec, doubled), q_max, policy)
    return replace(redo, certified=False)


@dataclass(frozen=True)
class MatchReport:
    levels: tuple[int, ...]
    values: tuple[float, ...]
    oscillations: tuple[float, ...]
    deviations: dict
    tolerance: float
    means_agree: bool
    smoothing_monotone: bool

    @property
    def ok(self) -> bool:
        return self.means_agree and self.smoothing_monotone

    def to_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "values": [_num(v) for v in self.values],
            "oscillations": [_num(v) for v in self.oscillations],
            "deviations": {f"{a}-{b}": _num(d) for (a, b), d in self.deviations.items()},
            "tolerance": self.tolerance,
            "means_agree": self.means_agree,
            "smoothing_monotone": self.smoothing_monotone,
        }


def asymptotic_match(
    stack: AverageStack, m: int, policy: DetectionPolicy = DetectionPolicy()
) -> MatchReport:
    """Check that ``psi_m, psi_{m+1}, psi_{m+2}`` share one limit and that
    each extra averaging does not increase the tail oscillation.

    Oscillation here is the detrended peak-to-peak (``residual_oscillation``);
    the raw window range also contains the slow ``P(ln t)/t`` drift, which
    grows with the level at any finite horizon.
    """
    if m < 0 or m + 2 > stack.Q:
        raise PreconditionError(f"need a stack of depth >= {m + 2}, have {stack.Q}")
    levels = (m, m + 1, m + 2)
    estimates = [_detect_level(stack.level(q), policy, q) for q in levels]
    values = tuple(
        limit_value(stack.level(q), policy, level_log_degree(q)) for q in levels
    )
    T = stack.base.grid.horizon
    osc = tuple(
        residual_oscillation(_window(stack.level(q), T, policy.tail_fraction))
        for q in levels
    )
    tol = 10 * policy.tolerance(max(abs(v) for v in values))
    deviations = {
        (a, b): abs(values[i] - values[j])
        for i, a in enumerate(levels)
        for j, b in enumerate(levels)
        if i < j
    }
    agree = not any(e.verdict is Verdict.DIVERGING for e in estimates) and all(
        d <= tol for d in deviations.values()
    )
    slack = smoothing_slack(policy, max(np.abs(stack.level(m).samples[-1:])))
    monotone = all(osc[i + 1] <= osc[i] + slack for i in range(len(osc) - 1))
    return MatchReport(levels, values, osc, deviations, tol, agree, monotone)
