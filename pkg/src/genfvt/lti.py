"""Resonant LTI systems ``(D^2 + w^2)^k y = 0`` whose solutions include
``t**p sin(w t)`` for ``p < k``.

Each block is put in companion form and integrated with classical RK4 at a
fixed step. For a linear autonomous system one RK4 step is the matrix
polynomial ``R(hA) = I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24``, so the
integration is done as repeated application of that matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convergence import DetectionPolicy, OrderReport, minimal_order
from .errors import AccuracyError, ConfigError, PreconditionError
from .signals import MonomialOsc, UniformGrid, UniformSignal, sample_spec

MAX_PURE_POWER = 6
MAX_STEP_PHASE = 0.1
_CHUNK = 2048


@dataclass(frozen=True)
class Block:
    omega: float
    multiplicity: int

    def __post_init__(self):
        if not self.omega > 0:
            raise ConfigError(f"block frequency must be positive, got {self.omega}")
        if self.multiplicity < 1:
            raise ConfigError("block multiplicity must be >= 1")

    @property
    def order(self) -> int:
        return 2 * self.multiplicity


@dataclass(frozen=True)
class ResonantSystem:
    blocks: tuple[Block, ...]

    def __post_init__(self):
        omegas = [b.omega for b in self.blocks]
        if len(set(omegas)) != len(omegas):
            raise ConfigError("block frequencies must be distinct")

    @property
    def dimension(self) -> int:
        return sum(b.order for b in self.blocks)

    @classmethod
    def from_dict(cls, data: dict) -> "ResonantSystem":
        return cls(tuple(Block(float(b["omega"]), int(b["p"])) for b in data["blocks"]))


def companion_matrix(block: Block) -> np.ndarray:
    """Companion matrix of ``(x^2 + w^2)^k`` acting on ``(y, y', ..., y^(2k-1))``."""
    base = np.polynomial.polynomial.Polynomial([block.omega**2, 0.0, 1.0])
    coeffs = (base**block.multiplicity).coef  # ascending, monic
    n = block.order
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -coeffs[:-1]
    return A


def rk4_step_matrix(A: np.ndarray, h: float) -> np.ndarray:
    hA = h * A
    M = np.eye(len(A))
    term = np.eye(len(A))
    for k in range(1, 5):
        term = term @ hA / k
        M = M + term
    return M


def ic_for_pure_term(p: int, omega: float) -> np.ndarray:
    """Derivatives ``y^(j)(0)``, ``j = 0..2p+1``, of ``y = t**p sin(omega t)``.

    By Leibniz only the ``p``-th derivative of ``t**p`` survives at 0, so
    ``y^(j)(0) = C(j, p) p! omega**(j-p) sin^((j-p))(0)``.
    """
    if not isinstance(p, int) or not 0 <= p <= MAX_PURE_POWER:
        raise ConfigError(f"p must be an integer in [0, {MAX_PURE_POWER}], got {p!r}")
    sin_derivs = (0, 1, 0, -1)
    out = np.zeros(2 * p + 2)
    for j in range(p, 2 * p + 2):
        k = j - p
        out[j] = math.comb(j, p) * math.factorial(p) * omega**k * sin_derivs[k % 4]
    return out


def _integrate_block(block, ic, h, n_steps, stride):
    A = companion_matrix(block)
    M = rk4_step_matrix(A, h)
    x = np.asarray(ic, dtype=float)
    n_out = n_steps // stride + 1
    out = np.empty(n_out)
    out[0] = x[0]
    if stride == 1:
        # Powers M^1..M^c propagate a whole chunk of outputs at once.
        powers = [M]
        for _ in range(_CHUNK - 1):
            powers.append(powers[-1] @ M)
        first_rows = np.array([P[0] for P in powers])
        done = 0
        while done < n_steps:
            c = min(_CHUNK, n_steps - done)
            out[done + 1 : done + 1 + c] = first_rows[:c] @ x
            x = powers[c - 1] @ x
            done += c
        return out
    Ms = np.linalg.matrix_power(M, stride)
    for k in range(1, n_out):
        x = Ms @ x
        out[k] = x[0]
    return out


def simulate(
    system: ResonantSystem,
    ic,
    grid: UniformGrid,
    substeps: int = 1,
) -> UniformSignal:
    """Sum of the block solutions sampled on ``grid``.

    ``ic`` is one derivative vector per block. The integration step is
    ``grid.dt / substeps``.
    """
    if grid.t0 != 0:
        raise PreconditionError("simulation grids must start at t = 0")
    ics = [np.asarray(v, dtype=float) for v in ic]
    if len(ics) != len(system.blocks):
        raise ConfigError(f"expected {len(system.blocks)} IC vectors, got {len(ics)}")
    h = grid.dt / substeps
    for block, v in zip(system.blocks, ics):
        if v.shape != (block.order,):
            raise ConfigError(
                f"block omega={block.omega} needs {block.order} initial values, got {v.shape}"
            )
        if block.omega * h > MAX_STEP_PHASE:
            raise AccuracyError(
                f"step {h:g} too large for omega={block.omega:g} "
                f"(omega*step must be <= {MAX_STEP_PHASE})"
            )
    total = np.zeros(grid.n)
    for block, v in zip(system.blocks, ics):
        total += _integrate_block(block, v, h, (grid.n - 1) * substeps, substeps)
    return UniformSignal(grid, total)


def pure_term_system(p: int, omega: float = 1.0) -> tuple[ResonantSystem, list[np.ndarray]]:
    """System and ICs whose solution is exactly ``t**p sin(omega t)``."""
    return ResonantSystem((Block(omega, p + 1),)), [ic_for_pure_term(p, omega)]


def normalized_error(simulated: UniformSignal, p: int, omega: float = 1.0) -> np.ndarray:
    """``|simulated - t**p sin(omega t)| / (1 + t**p)`` on the grid."""
    exact = sample_spec(MonomialOsc(p, omega), simulated.grid).samples
    t = simulated.times()
    return np.abs(simulated.samples - exact) / (1 + t**p)


@dataclass(frozen=True)
class RoundtripResult:
    order: OrderReport
    max_normalized_error: float
    simulated: UniformSignal


def roundtrip_order_check(
    p: int,
    omega: float = 1.0,
    horizon: float = 2000.0,
    dt: float = 1e-3,
    q_max: int = 6,
    policy: DetectionPolicy | None = None,
) -> RoundtripResult:
    """Simulate ``t**p sin(omega t)`` from its ODE and detect ``m`` on the
    simulated samples."""
    if not 0 <= p <= 3:
        raise ConfigError(f"roundtrip check supports p in 0..3, got {p}")
    system, ic = pure_term_system(p, omega)
    grid = UniformGrid.from_horizon(dt, horizon)
    sim = simulate(system, ic, grid)
    policy = policy or DetectionPolicy().for_spec(MonomialOsc(p, omega))
    report = minimal_order(sim, q_max, policy)
    return RoundtripResult(report, float(normalized_error(sim, p, omega).max()), sim)
