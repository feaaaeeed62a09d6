"""Laplace-domain side: closed-form transforms, ``lim_{s->0} s F(s)``,
iterated transforms and the time/Laplace agreement check.

Transforms are held as finite sums ``F(s) = sum c / (s - j beta)**r``. Every
family in :mod:`genfvt.signals` has an exact representation of that form,
since ``t**p exp(j beta t)`` maps to ``p! / (s - j beta)**(p + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .convergence import (
    DetectionPolicy,
    LimitEstimate,
    OrderReport,
    Verdict,
    minimal_order_for_spec,
)
from .errors import (
    AccuracyError,
    ConfigError,
    DomainError,
    PreconditionError,
    UnsupportedSpecError,
)
from .signals import (
    AlmostPeriodicPoly,
    Constant,
    FourierPoly,
    Monomial,
    MonomialOsc,
    SignalSpec,
    UniformGrid,
    min_frequency,
)

MAX_POWER = 12
MAX_ITERATED = 3


@dataclass(frozen=True)
class Term:
    c: complex
    beta: float
    r: int


@dataclass(frozen=True)
class TransformModel:
    terms: tuple[Term, ...]
    origin: SignalSpec | None = field(default=None, compare=False)

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        total = np.zeros(s.shape, dtype=complex)
        for term in self.terms:
            total = total + term.c / (s - 1j * term.beta) ** term.r
        return total

    def sF(self, s) -> np.ndarray:
        """``s F(s)`` at real ``s > 0`` (real by conjugate symmetry)."""
        s = np.asarray(s, dtype=float)
        return (s * self(s)).real

    @property
    def max_beta(self) -> float:
        return max((abs(t.beta) for t in self.terms), default=0.0)

    def to_dict(self) -> dict:
        return {
            "terms": [
                {"re": t.c.real, "im": t.c.imag, "beta": t.beta, "r": t.r}
                for t in self.terms
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TransformModel":
        return cls(
            tuple(
                Term(complex(d["re"], d["im"]), float(d["beta"]), int(d["r"]))
                for d in data["terms"]
            )
        )


def _power_terms(p: int, pairs) -> tuple[Term, ...]:
    if p > MAX_POWER:
        raise ConfigError(f"closed forms are provided for p <= {MAX_POWER}, got {p}")
    fact = math.factorial(p)
    return tuple(Term(complex(c) * fact, float(beta), p + 1) for beta, c in pairs if c != 0)


def closed_form_transform(spec: SignalSpec) -> TransformModel:
    if isinstance(spec, MonomialOsc):
        w, a = spec.omega, spec.scale
        if spec.phase == "sin":
            pairs = [(w, a / 2j), (-w, -a / 2j)]
        else:
            pairs = [(w, a / 2), (-w, a / 2)]
        return TransformModel(_power_terms(spec.p, pairs), spec)
    if isinstance(spec, FourierPoly):
        pairs = [(k * spec.omega, c) for k, c in sorted(spec.coefficients.items())]
        return TransformModel(_power_terms(spec.p, pairs), spec)
    if isinstance(spec, AlmostPeriodicPoly):
        merged: dict[float, complex] = {}
        for lam, c in spec.terms:
            merged[lam] = merged.get(lam, 0j) + c
        return TransformModel(_power_terms(spec.p, sorted(merged.items())), spec)
    if isinstance(spec, Constant):
        terms = (Term(complex(spec.value), 0.0, 1),) if spec.value != 0 else ()
        return TransformModel(terms, spec)
    if isinstance(spec, Monomial):
        return TransformModel(_power_terms(spec.p, [(0.0, spec.scale)]), spec)
    raise UnsupportedSpecError(f"no closed-form transform for {type(spec).__name__}")


# --- s -> 0 ladder ------------------------------------------------------------


@dataclass(frozen=True)
class LimitLadder:
    s0: float = 1e-1
    rho: float = 10 ** -0.5
    count: int = 9
    extrapolation_degree: int = 2
    growth_tol: float = 0.2
    stability_tol: float = 1e-6

    def __post_init__(self):
        if not self.s0 > 0:
            raise ConfigError("ladder start s0 must be positive")
        if not 0 < self.rho < 1:
            raise ConfigError("ladder ratio rho must lie in (0, 1)")
        if self.extrapolation_degree not in (1, 2):
            raise ConfigError("extrapolation_degree must be 1 or 2")
        if self.count < max(4, self.window + 1):
            raise ConfigError(f"ladder needs at least {max(4, self.window + 1)} points")

    @property
    def window(self) -> int:
        return self.extrapolation_degree + 2

    @property
    def s_values(self) -> np.ndarray:
        return self.s0 * self.rho ** np.arange(self.count)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def extrapolate_to_zero(s: Sequence[float], g: Sequence[float], ladder: LimitLadder) -> LimitEstimate:
    """Classify ``g(s)`` as ``s -> 0`` from its values on a decreasing ladder.

    Diverging if ``|g|`` grows like ``s**-k`` with ``k > growth_tol`` over the
    last window. Otherwise a polynomial of the ladder degree is fitted to each
    run of ``window`` consecutive points; the limit is the last intercept and
    is accepted when the last two intercepts agree.
    """
    s = np.asarray(s, dtype=float)
    g = np.asarray(g, dtype=float)
    w = ladder.window
    diag = {"s": s.tolist(), "g": g.tolist()}
    scale = float(np.max(np.abs(g))) if len(g) else 0.0
    if scale == 0.0:
        return LimitEstimate(Verdict.CONVERGED, value=0.0, oscillation=0.0,
                             horizon=float(s[-1]), diagnostics=diag)
    tail_s, tail_g = s[-w:], g[-w:]
    if np.all(tail_g != 0):
        slope = float(np.polyfit(np.log(tail_s), np.log(np.abs(tail_g)), 1)[0])
        diag["loglog_slope"] = slope
        if slope < -ladder.growth_tol:
            return LimitEstimate(Verdict.DIVERGING, growth_exponent=-slope,
                                 horizon=float(s[-1]), diagnostics=diag)
    intercepts = []
    for i in range(len(s) - w + 1):
        coef = np.polyfit(s[i : i + w], g[i : i + w], ladder.extrapolation_degree)
        intercepts.append(float(coef[-1]))
    diag["intercepts"] = intercepts
    spread = abs(intercepts[-1] - intercepts[-2])
    value = intercepts[-1]
    if spread <= ladder.stability_tol * (1 + abs(value)):
        return LimitEstimate(Verdict.CONVERGED, value=value, oscillation=spread,
                             horizon=float(s[-1]), diagnostics=diag)
    return LimitEstimate(Verdict.OSCILLATING, oscillation=spread, horizon=float(s[-1]),
                         tail_mean=value, diagnostics=diag)


def sF_limit(model: TransformModel, ladder: LimitLadder = LimitLadder()) -> LimitEstimate:
    s = ladder.s_values
    return extrapolate_to_zero(s, model.sF(s), ladder)


def taylor_coefficients(model: TransformModel, order: int) -> np.ndarray:
    """Coefficients ``a_0 .. a_order`` of ``s F(s) = sum a_n s**n`` at ``s = 0``.

    Terms with ``beta = 0`` contribute ``c s**(1 - r)``; they must have
    ``r = 1`` (a constant) to keep ``s F(s)`` analytic.
    """
    coeffs = np.zeros(order + 1, dtype=complex)
    for t in model.terms:
        if t.beta == 0:
            if t.r > 1:
                raise PreconditionError("s F(s) has a pole at s = 0")
            coeffs[0] += t.c
            continue
        a = 1j * t.beta
        lead = t.c * (-a) ** (-t.r)
        for n in range(order):
            coeffs[n + 1] += lead * math.comb(t.r + n - 1, n) * a ** (-n)
    return coeffs


def small_s_order(model: TransformModel, max_order: int = 24, rel_tol: float = 1e-10) -> int:
    """Order ``k`` of the zero of ``s F(s)`` at ``s = 0``."""
    coeffs = taylor_coefficients(model, max_order)
    # Cancellation between conjugate terms is judged against term magnitudes.
    sizes = np.zeros(max_order + 1)
    for t in model.terms:
        if t.beta != 0:
            base = abs(t.c) * abs(t.beta) ** (-t.r)
            for n in range(max_order):
                sizes[n + 1] += base * math.comb(t.r + n - 1, n) * abs(t.beta) ** (-n)
        else:
            sizes[0] += abs(t.c)
    nonzero = np.abs(coeffs) > rel_tol * np.maximum(sizes, 1e-300)
    if nonzero[0]:
        raise PreconditionError("s F(s) has a nonzero limit at s = 0")
    hits = np.flatnonzero(nonzero)
    if len(hits) == 0:
        raise PreconditionError(f"s F(s) vanishes to order > {max_order}")
    return int(hits[0])


# --- iterated transform ------------------------------------------------------


def _tail_values(model: TransformModel, Z: float, m: int, tol: float) -> np.ndarray:
    """``G_i(Z)`` for ``i = 0..m`` where ``G_i(x) = int_x^inf G_{i-1}(z) dz/z``.

    Each term is expanded as ``c sum_n C(r+n-1, n) a**n z**-(r+n)`` for
    ``|a| < Z``; every power integrates in closed form.
    """
    out = np.zeros(m + 1, dtype=complex)
    powers = np.arange(m + 1)
    for t in model.terms:
        a = 1j * t.beta
        if abs(a) / Z >= 0.5:
            raise AccuracyError(f"tail expansion point {Z:g} too close to pole {t.beta:g}")
        term_sum = np.zeros(m + 1, dtype=complex)
        for n in range(200):
            k = t.r + n
            coef = t.c * math.comb(k - 1, n) * a**n * Z ** (-k)
            term_sum += coef / float(k) ** powers
            if abs(coef) <= tol * abs(term_sum[0]):
                break
        else:
            raise AccuracyError("tail series did not converge")
        out += term_sum
    return out


def iterated_transform(
    model: TransformModel,
    m: int,
    s: float,
    points_per_decade: int = 200,
    zeta_max: float | None = None,
    tail_tol: float = 1e-16,
    check_tol: float = 1e-4,
) -> float:
    """``Psi_m(s)``: the ``m``-fold nested integral ``int_s^inf dz/z`` of ``F``.

    Integrated with the trapezoid rule on ``z = s exp(u)``; beyond
    ``zeta_max`` each term's tail is added in closed form. For ``m = 1`` the
    result is checked against ``psi1_exact``.
    """
    if m not in range(1, MAX_ITERATED + 1):
        raise ConfigError(f"iterated order must be in 1..{MAX_ITERATED}, got {m}")
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    Z = zeta_max or max(1e3, 1e3 * model.max_beta)
    Z = max(Z, 1e3 * s)
    n = int(math.ceil(points_per_decade * math.log10(Z / s))) + 1
    v = np.linspace(math.log(s), math.log(Z), n)
    h = v[1] - v[0]
    tails = _tail_values(model, Z, m, tail_tol)
    G = model(np.exp(v))
    for i in range(1, m + 1):
        pieces = 0.5 * h * (G[1:] + G[:-1])
        # Reverse cumulative integral from each node up to Z.
        rev = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
        G = rev + tails[i]
    value = float(G[0].real)
    if m == 1 and check_tol is not None:
        exact = psi1_exact(model, s)
        if abs(value - exact) > check_tol * max(1.0, abs(exact)):
            raise AccuracyError(
                f"Psi_1({s:g}) quadrature {value!r} disagrees with closed form {exact!r}"
            )
    return value


def psi1_exact(model: TransformModel, s: float) -> float:
    """Closed-form ``Psi_1(s) = int_s^inf F(z) dz / z``.

    Uses ``1/(z (z-a)**r) = (-a)**-r [1/z - sum_{i=1}^r (-a)**(i-1) / (z-a)**i]``.
    """
    total = 0j
    for t in model.terms:
        if t.beta == 0:
            total += t.c * s ** (-t.r) / t.r
            continue
        a = 1j * t.beta
        acc = np.log((s - a) / s)
        for i in range(2, t.r + 1):
            acc -= (-a) ** (i - 1) * (s - a) ** (1 - i) / (i - 1)
        total += t.c * (-a) ** (-t.r) * acc
    return float(total.real)


# --- central equality -----------------------------------------------------------


@dataclass(frozen=True)
class CentralEqualityReport:
    m: int | None
    samples: tuple[tuple[float, float, float | None], ...]
    max_gap: float
    time_limit: float
    laplace_limit: float
    agree: bool
    annotation: str
    order: OrderReport
    laplace: LimitEstimate
    telescoping_monotone: bool | None = None

    def to_dict(self) -> dict:
        def num(x):
            return None if x is None or not math.isfinite(x) else float(x)

        return {
            "m": self.m,
            "samples": [
                {"s": s, "sF": num(a), "sPsi_m": num(b) if b is not None else None}
                for s, a, b in self.samples
            ],
            "max_gap": num(self.max_gap),
            "time_limit": num(self.time_limit),
            "laplace_limit": num(self.laplace_limit),
            "agree": self.agree,
            "annotation": self.annotation,
            "telescoping_monotone": self.telescoping_monotone,
            "laplace": self.laplace.to_dict(),
        }


def limits_agree(time_limit: float, laplace_limit: float) -> bool:
    return abs(laplace_limit - time_limit) <= max(1e-4, 1e-3 * abs(time_limit))


def default_grid(spec: SignalSpec, periods: float = 4000.0, dt: float = 1e-2) -> UniformGrid:
    """Grid covering ``periods`` cycles of the slowest frequency (``T = 1000``
    for non-oscillating specs), sampling the fastest at least 60 times per cycle."""
    w_min = min_frequency(spec)
    T = periods * 2 * math.pi / w_min if w_min else 1000.0
    model_beta = None
    if isinstance(spec, (MonomialOsc, FourierPoly, AlmostPeriodicPoly)):
        model_beta = closed_form_transform(spec).max_beta
    if model_beta:
        dt = min(dt, 2 * math.pi / model_beta / 60)
    return UniformGrid.from_horizon(dt, T)


def verify_central_equality(
    spec: SignalSpec,
    q_max: int = 6,
    policy: DetectionPolicy = DetectionPolicy(),
    ladder: LimitLadder = LimitLadder(),
    grid: UniformGrid | None = None,
    gap_tol: float = 1e-2,
) -> CentralEqualityReport:
    model = closed_form_transform(spec)
    order = minimal_order_for_spec(spec, grid or default_grid(spec), q_max, policy)
    lap = sF_limit(model, ladder)
    s_vals = ladder.s_values
    sF = model.sF(s_vals)
    m = order.m
    notes = []
    psi = [None] * len(s_vals)
    gaps = np.zeros(len(s_vals))
    monotone = None
    if m is not None and 1 <= m <= MAX_ITERATED:
        psi = [s * iterated_transform(model, m, s) for s in s_vals]
        gaps = np.abs(np.array(psi) - sF)
        monotone = bool(np.all(np.diff(gaps) <= 1e-12))
    elif m == 0:
        notes.append("classical case m = 0: s Psi_m(s) = s F(s)")
    elif m is not None:
        notes.append(f"iterated transform skipped for m = {m} > {MAX_ITERATED}")
    samples = tuple((float(s), float(a), b) for s, a, b in zip(s_vals, sF, psi))
    max_gap = float(gaps[-1])

    if order.found and lap.converged:
        agree = limits_agree(order.limit, lap.value)
        if monotone is not None:
            agree = agree and monotone and max_gap <= gap_tol
        if not agree:
            notes.append("time and Laplace limits disagree")
    elif not order.found and lap.verdict is Verdict.DIVERGING:
        agree = True
        notes.append("no limit on either side")
    else:
        agree = False
        notes.append(
            f"time side {'found m=%d' % m if order.found else 'found no m'}, "
            f"Laplace side {lap.verdict.value}"
        )
    return CentralEqualityReport(
        m=m,
        samples=samples,
        max_gap=max_gap,
        time_limit=order.limit,
        laplace_limit=lap.value,
        agree=agree,
        annotation="; ".join(notes),
        order=order,
        laplace=lap,
        telescoping_monotone=monotone,
    )


# --- z side -------------------------------------------------------------------


def z_side_limit(
    numerator: Sequence[float],
    denominator: Sequence[float],
    ladder: LimitLadder = LimitLadder(),
) -> LimitEstimate:
    """``lim_{z->1+} (z - 1) F(z)`` for rational ``F = num/den``.

    Coefficients are listed from the highest power down, as in ``numpy.polyval``.
    """
    num = np.asarray(numerator, dtype=float)
    den = np.asarray(denominator, dtype=float)
    if den.size == 0 or not np.any(den != 0):
        raise DomainError("denominator polynomial is identically zero")
    s = ladder.s_values
    z = 1.0 + s
    den_vals = np.polyval(den, z)
    if np.any(den_vals == 0):
        raise DomainError("denominator vanishes on the approach to z = 1")
    g = s * np.polyval(num, z) / den_vals
    return extrapolate_to_zero(s, g, ladder)
