"""Signal families, uniform time grids and the CSV signal format.

Every analytic family here has the form ``t**p * phi(t)`` with ``phi`` a finite
trigonometric (or almost-periodic) sum, plus the constant and the bare monomial.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import ConfigError, DataError, DomainError

CSV_HEADER = ("t", "value")
GRID_REL_TOL = 1e-9
REALNESS_TOL = 1e-12


@dataclass(frozen=True)
class UniformGrid:
    t0: float
    dt: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"grid step must be positive, got dt={self.dt}")
        if self.n < 2:
            raise ConfigError(f"grid needs at least 2 points, got n={self.n}")
        if not (math.isfinite(self.t0) and self.t0 >= 0):
            raise ConfigError(f"grid origin must be >= 0, got t0={self.t0}")

    @classmethod
    def from_horizon(cls, dt: float, T: float) -> "UniformGrid":
        """Grid on ``[0, T]`` with step ``dt``; ``T`` is rounded to a whole step."""
        n = int(round(T / dt)) + 1
        return cls(0.0, float(dt), n)

    @property
    def horizon(self) -> float:
        return self.t0 + (self.n - 1) * self.dt

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n) * self.dt

    def point(self, k: int) -> float:
        return self.t0 + k * self.dt

    def index_of(self, t: float) -> int:
        return int(round((t - self.t0) / self.dt))


@dataclass(frozen=True)
class UniformSignal:
    grid: UniformGrid
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.shape != (self.grid.n,):
            raise DataError(
                f"expected {self.grid.n} samples, got shape {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            bad = int(np.flatnonzero(~np.isfinite(samples))[0])
            raise DataError(f"non-finite sample at index {bad}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def times(self) -> np.ndarray:
        return self.grid.times()

    def __len__(self):
        return self.grid.n

    def with_samples(self, samples) -> "UniformSignal":
        return UniformSignal(self.grid, samples)

    def truncated(self, n: int) -> "UniformSignal":
        """Leading ``n`` samples on the same grid origin and step."""
        return UniformSignal(
            UniformGrid(self.grid.t0, self.grid.dt, n), self.samples[:n]
        )


@dataclass(frozen=True)
class DiscreteSequence:
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise DataError("a discrete sequence must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise DataError("discrete sequence contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)


# --- signal specs -----------------------------------------------------------


@dataclass(frozen=True)
class MonomialOsc:
    """``scale * t**p * sin(omega t)`` (or ``cos`` with ``phase="cos"``)."""

    p: int
    omega: float = 1.0
    phase: str = "sin"
    scale: float = 1.0

    def __post_init__(self):
        _check_power(self.p, minimum=0)
        _check_omega(self.omega)
        if self.phase not in ("sin", "cos"):
            raise ConfigError(f"phase must be 'sin' or 'cos', got {self.phase!r}")


@dataclass(frozen=True)
class FourierPoly:
    """``t**p * sum_k c_k exp(j k omega t)`` over a finite set of harmonics."""

    p: int
    omega: float
    coefficients: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        _check_power(self.p, minimum=0)
        _check_omega(self.omega)
        coeffs = {int(k): complex(c) for k, c in dict(self.coefficients).items()}
        for k, c in coeffs.items():
            partner = coeffs.get(-k, 0j)
            if abs(partner - c.conjugate()) > REALNESS_TOL * (1 + abs(c)):
                raise ConfigError(
                    f"coefficients must satisfy c[-k] = conj(c[k]); broken at k={k}"
                )
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def c0(self) -> complex:
        return self.coefficients.get(0, 0j)


@dataclass(frozen=True)
class AlmostPeriodicPoly:
    """``t**p * sum_k c_k exp(j lambda_k t)`` with real, not necessarily
    commensurate, frequencies ``lambda_k``."""

    p: int
    terms: tuple[tuple[float, complex], ...] = ()

    def __post_init__(self):
        _check_power(self.p, minimum=0)
        terms = tuple((float(lam), complex(c)) for lam, c in self.terms)
        merged: dict[float, complex] = {}
        for lam, c in terms:
            merged[lam] = merged.get(lam, 0j) + c
        for lam, c in merged.items():
            partner = merged.get(-lam, 0j)
            if abs(partner - c.conjugate()) > REALNESS_TOL * (1 + abs(c)):
                raise ConfigError(
                    f"terms must come in conjugate frequency pairs; broken at {lam}"
                )
        object.__setattr__(self, "terms", terms)


@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class Monomial:
    """``scale * t**p``; no finite averaging order exists for it."""

    p: int
    scale: float = 1.0

    def __post_init__(self):
        _check_power(self.p, minimum=1)


SignalSpec = Union[MonomialOsc, FourierPoly, AlmostPeriodicPoly, Constant, Monomial]


def _check_power(p, minimum):
    if not isinstance(p, (int, np.integer)) or isinstance(p, bool) or p < minimum:
        raise ConfigError(f"power p must be an integer >= {minimum}, got {p!r}")


def _check_omega(omega):
    if not (math.isfinite(omega) and omega > 0):
        raise ConfigError(f"omega must be positive, got {omega!r}")


def sin_squared(p: int = 0, omega: float = 1.0) -> FourierPoly:
    """``t**p sin(omega t)**2 = t**p (1/2 - cos(2 omega t)/2)``."""
    return FourierPoly(p, omega, {0: 0.5, 2: -0.25, -2: -0.25})


def abs_sin(p: int = 0, omega: float = 1.0, harmonics: int = 64) -> FourierPoly:
    """``t**p |sin(omega t)|`` through its cosine series truncated after
    ``harmonics`` terms."""
    coeffs: dict[int, complex] = {0: 2 / math.pi}
    for n in range(1, harmonics + 1):
        c = -2 / (math.pi * (4 * n * n - 1))
        coeffs[2 * n] = c
        coeffs[-2 * n] = c
    return FourierPoly(p, omega, coeffs)


def min_frequency(spec: SignalSpec) -> float | None:
    """Slowest nonzero angular frequency present in the spec, if any."""
    if isinstance(spec, MonomialOsc):
        return spec.omega
    if isinstance(spec, FourierPoly):
        ks = [abs(k) for k, c in spec.coefficients.items() if k != 0 and c != 0]
        return min(ks) * spec.omega if ks else None
    if isinstance(spec, AlmostPeriodicPoly):
        lams = [abs(lam) for lam, c in spec.terms if lam != 0 and c != 0]
        return min(lams) if lams else None
    return None


def _complex_sum(spec, t):
    if isinstance(spec, FourierPoly):
        pairs = [(k * spec.omega, c) for k, c in sorted(spec.coefficients.items())]
    else:
        pairs = list(spec.terms)
    total = np.zeros(np.shape(t), dtype=complex)
    for freq, c in pairs:
        if c != 0:
            total = total + c * np.exp(1j * freq * t)
    return total


def _evaluate(spec: SignalSpec, t: np.ndarray) -> np.ndarray:
    if isinstance(spec, Constant):
        return np.full(np.shape(t), float(spec.value))
    if isinstance(spec, Monomial):
        return spec.scale * t**spec.p
    if isinstance(spec, MonomialOsc):
        trig = np.sin if spec.phase == "sin" else np.cos
        return spec.scale * t**spec.p * trig(spec.omega * t)
    if isinstance(spec, (FourierPoly, AlmostPeriodicPoly)):
        total = _complex_sum(spec, t)
        if np.any(np.abs(total.imag) > 1e-9 * (1 + np.abs(total.real))):
            raise DomainError("spec evaluates to a complex value; check conjugacy")
        return t**spec.p * total.real
    raise ConfigError(f"unsupported signal spec {type(spec).__name__}")


def eval_spec(spec: SignalSpec, t: float) -> float:
    t = float(t)
    if not math.isfinite(t):
        raise DomainError(f"evaluation time must be finite, got {t}")
    if t < 0:
        raise DomainError(f"evaluation time must be >= 0, got {t}")
    # Same vectorized path as sample_spec so the two agree bit for bit.
    return float(_evaluate(spec, np.array([t]))[0])


def eval_complex_sum(spec: FourierPoly | AlmostPeriodicPoly, t) -> np.ndarray:
    """The unreduced complex sum ``sum_k c_k exp(j f_k t)`` (without ``t**p``)."""
    return _complex_sum(spec, np.asarray(t, dtype=float))


def sample_spec(spec: SignalSpec, grid: UniformGrid) -> UniformSignal:
    return UniformSignal(grid, _evaluate(spec, grid.times()))


def rescale_time(spec: MonomialOsc) -> tuple[MonomialOsc, float]:
    """Reduce ``t**p sin(a t)`` to unit frequency.

    Returns ``(unit_spec, factor)`` with ``factor = a**-p`` such that the
    running average of ``spec`` at horizon ``t`` equals ``factor`` times the
    running average of ``unit_spec`` at horizon ``a*t``.
    """
    if not isinstance(spec, MonomialOsc):
        raise ConfigError("rescale_time applies to MonomialOsc specs only")
    unit = MonomialOsc(spec.p, 1.0, spec.phase, spec.scale)
    return unit, spec.omega ** (-spec.p)


# --- CSV --------------------------------------------------------------------


def write_csv(signal: UniformSignal, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for t, v in zip(signal.times(), signal.samples):
            writer.writerow((repr(float(t)), repr(float(v))))


def read_csv(path) -> UniformSignal:
    """Load a ``t,value`` CSV, validating that the time column is uniform."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise DataError(f"{path}: expected header 't,value', got {header}")
        ts: list[float] = []
        vs: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                ts.append(float(row[0]))
                vs.append(float(row[1]))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    return signal_from_arrays(ts, vs, source=str(path))


def signal_from_arrays(
    times: Sequence[float], values: Sequence[float], source: str = "<array>"
) -> UniformSignal:
    t = np.asarray(times, dtype=float)
    if len(t) < 2:
        raise DataError(f"{source}: need at least two rows")
    dt = t[1] - t[0]
    if not dt > 0:
        raise DataError(f"{source}: time column must increase")
    expected = t[0] + np.arange(len(t)) * dt
    # Relative 1e-9 on the step, plus printing round-off of large times.
    tol = GRID_REL_TOL * dt * np.arange(1, len(t) + 1) + 4 * np.spacing(np.abs(t))
    off = np.abs(t - expected) > tol
    if np.any(off):
        idx = int(np.flatnonzero(off)[0])
        # Row numbers are 1-based and count the header line.
        raise DataError(
            f"{source}: non-uniform time grid at row {idx + 2} (t={t[idx]!r})"
        )
    return UniformSignal(UniformGrid(float(t[0]), float(dt), len(t)), values)


# --- JSON form of specs ---------------------------------------------------


def _complex_from_json(value) -> complex:
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(float(re), float(im))
    if isinstance(value, dict):
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    return complex(float(value))


def spec_from_dict(data: Mapping) -> SignalSpec:
    """Build a spec from its JSON form, e.g. ``{"kind": "MonomialOsc", "p": 1}``.

    ``sin_squared`` and ``abs_sin`` are accepted as shorthands for the
    corresponding FourierPoly specs. Complex coefficients are written as
    ``[re, im]``, ``{"re": .., "im": ..}`` or a plain number.
    """
    data = dict(data)
    kind = data.pop("kind", None)
    try:
        if kind == "MonomialOsc":
            return MonomialOsc(
                int(data.get("p", 0)),
                float(data.get("omega", 1.0)),
                data.get("phase", "sin"),
                float(data.get("scale", 1.0)),
            )
        if kind == "FourierPoly":
            coeffs = {int(k): _complex_from_json(v) for k, v in data["coefficients"].items()}
            return FourierPoly(int(data.get("p", 0)), float(data.get("omega", 1.0)), coeffs)
        if kind == "AlmostPeriodicPoly":
            terms = tuple(
                (float(t["lambda"]), _complex_from_json(t.get("c", [t.get("re", 0.0), t.get("im", 0.0)])))
                for t in data["terms"]
            )
            return AlmostPeriodicPoly(int(data.get("p", 0)), terms)
        if kind == "Constant":
            return Constant(float(data["value"]))
        if kind == "Monomial":
            return Monomial(int(data["p"]), float(data.get("scale", 1.0)))
        if kind == "sin_squared":
            return sin_squared(int(data.get("p", 0)), float(data.get("omega", 1.0)))
        if kind == "abs_sin":
            return abs_sin(
                int(data.get("p", 0)),
                float(data.get("omega", 1.0)),
                int(data.get("harmonics", 64)),
            )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed {kind} spec: {exc!r}") from None
    raise ConfigError(f"unknown spec kind {kind!r}")


def spec_to_dict(spec: SignalSpec) -> dict:
    if isinstance(spec, MonomialOsc):
        return {"kind": "MonomialOsc", "p": spec.p, "omega": spec.omega,
                "phase": spec.phase, "scale": spec.scale}
    if isinstance(spec, FourierPoly):
        return {
            "kind": "FourierPoly",
            "p": spec.p,
            "omega": spec.omega,
            "coefficients": {
                str(k): [c.real, c.imag] for k, c in sorted(spec.coefficients.items())
            },
        }
    if isinstance(spec, AlmostPeriodicPoly):
        return {
            "kind": "AlmostPeriodicPoly",
            "p": spec.p,
            "terms": [{"lambda": lam, "c": [c.real, c.imag]} for lam, c in spec.terms],
        }
    if isinstance(spec, Constant):
        return {"kind": "Constant", "value": spec.value}
    if isinstance(spec, Monomial):
        return {"kind": "Monomial", "p": spec.p, "scale": spec.scale}
    raise ConfigError(f"unsupported signal spec {type(spec).__name__}")
