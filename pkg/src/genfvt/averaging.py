"""Expanding running means of sampled signals and sequences.

``running_average`` implements ``psi(t) = (1/t) int_0^t f``; applying it ``q``
times gives the order-``q`` iterated average ``psi_q`` (``psi_0 = f``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ConfigError, DataError, PreconditionError
from .signals import DiscreteSequence, UniformSignal

MAX_ORDER = 12

_BLOCK = 1024


def prefix_sum(x: np.ndarray) -> np.ndarray:
    """Inclusive cumulative sum with block-wise compensation.

    Each block of ``_BLOCK`` values is summed with ``np.cumsum`` and offset by
    a correctly rounded running total of the preceding blocks, so the error
    stays at the level of a single block rather than growing with ``len(x)``.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n <= _BLOCK:
        return np.cumsum(x)
    nb = -(-n // _BLOCK)
    padded = np.zeros(nb * _BLOCK)
    padded[:n] = x
    blocks = padded.reshape(nb, _BLOCK)
    local = np.cumsum(blocks, axis=1)
    offsets = np.empty(nb)
    partials: list[float] = []
    for b in range(nb):
        offsets[b] = math.fsum(partials)
        partials.append(math.fsum(blocks[b]))
        if len(partials) > 64:
            partials = [math.fsum(partials)]
    return (local + offsets[:, None]).ravel()[:n]


def _check_averagable(signal: UniformSignal):
    if signal.grid.t0 != 0:
        raise PreconditionError(
            f"running averages start at t=0; grid starts at t0={signal.grid.t0}"
        )
    if not np.all(np.isfinite(signal.samples)):
        raise DataError("signal contains non-finite samples")


def running_average(signal: UniformSignal) -> UniformSignal:
    """Running mean ``(1/t_k) int_0^{t_k} f`` by the cumulative trapezoid rule.

    The step cancels between the integral and ``t_k = k dt``, so the result
    is ``sum_{i<=k} (f_i + f_{i-1}) / (2k)``. At ``t = 0`` the limit value
    ``f(0)`` is used.

    Samples are centred on ``f(0)`` before summing, which makes constants
    exact fixed points in floating point too.
    """
    _check_averagable(signal)
    f0 = signal.samples[0]
    f = signal.samples - f0
    pair_sums = f[1:] + f[:-1]
    k = np.arange(1, len(f), dtype=float)
    out = np.empty_like(f)
    out[0] = 0.0
    out[1:] = prefix_sum(pair_sums) / (2.0 * k)
    out += f0
    return UniformSignal(signal.grid, out)


@dataclass(frozen=True)
class AverageStack:
    base: UniformSignal
    levels: tuple[UniformSignal, ...]

    @property
    def Q(self) -> int:
        return len(self.levels)

    def level(self, q: int) -> UniformSignal:
        """``psi_q``; ``q = 0`` is the base signal."""
        if not 0 <= q <= self.Q:
            raise ConfigError(f"level {q} not in stack of depth {self.Q}")
        return self.base if q == 0 else self.levels[q - 1]

    def __iter__(self):
        yield self.base
        yield from self.levels


def _check_order(Q, max_order):
    if not isinstance(Q, (int, np.integer)) or not 1 <= Q <= max_order:
        raise ConfigError(f"averaging order must be in [1, {max_order}], got {Q!r}")


def iter_levels(
    signal: UniformSignal, Q: int, max_order: int = MAX_ORDER
) -> Iterator[UniformSignal]:
    """Yield ``psi_1 .. psi_Q`` one at a time, holding only the previous level."""
    _check_order(Q, max_order)
    _check_averagable(signal)
    current = signal
    for _ in range(Q):
        current = running_average(current)
        yield current


def iterate_average(
    signal: UniformSignal, Q: int, max_order: int = MAX_ORDER
) -> AverageStack:
    return AverageStack(signal, tuple(iter_levels(signal, Q, max_order)))


@dataclass(frozen=True)
class DiscreteAverage:
    base: DiscreteSequence
    levels: tuple[DiscreteSequence, ...]

    def level(self, q: int) -> DiscreteSequence:
        return self.base if q == 0 else self.levels[q - 1]


def discrete_running_average(
    seq: DiscreteSequence, Q: int = 1, max_order: int = MAX_ORDER
) -> DiscreteAverage:
    """Arithmetic running means ``(1/(n+1)) sum_{k=0}^n`` applied ``Q`` times."""
    if len(seq) == 0:
        raise DataError("cannot average an empty sequence")
    _check_order(Q, max_order)
    counts = np.arange(1, len(seq) + 1, dtype=float)
    levels = []
    current = seq.values
    for _ in range(Q):
        current = prefix_sum(current) / counts
        levels.append(DiscreteSequence(current))
    return DiscreteAverage(seq, tuple(levels))


def shift_signal(signal: UniformSignal, K: float) -> UniformSignal:
    return signal.with_samples(signal.samples + K)
