import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from genfvt.averaging import (
    discrete_running_average,
    iter_levels,
    iterate_average,
    prefix_sum,
    running_average,
    shift_signal,
)
from genfvt.errors import ConfigError, DataError, PreconditionError
from genfvt.signals import (
    DiscreteSequence,
    MonomialOsc,
    UniformGrid,
    UniformSignal,
    sample_spec,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def brute_average(values, dt):
    """Trapezoid running mean in exact rational arithmetic."""
    f = [Fraction(v) for v in values]
    dt = Fraction(dt)
    out = [f[0]]
    acc = Fraction(0)
    for k in range(1, len(f)):
        acc += (f[k] + f[k - 1]) * dt / 2
        out.append(acc / (k * dt))
    return [float(x) for x in out]


@settings(max_examples=40, deadline=None)
@given(arrays(float, st.integers(2, 60), elements=finite), st.sampled_from([1e-3, 0.1, 0.5]))
def test_running_average_matches_exact_rationals(values, dt):
    sig = UniformSignal(UniformGrid(0.0, dt, len(values)), values)
    got = running_average(sig).samples
    want = brute_average(values, dt)
    assert np.allclose(got, want, rtol=1e-12, atol=1e-12 * (1 + np.max(np.abs(values))))


@settings(max_examples=30, deadline=None)
@given(arrays(float, st.integers(1, 3000), elements=finite))
def test_prefix_sum_is_accurate(x):
    want = np.array([math.fsum(x[: i + 1]) for i in range(len(x))])
    # Error is bounded by one block's worth of rounding on the absolute sums.
    bound = 1e-12 * (1 + np.cumsum(np.abs(x)))
    assert np.all(np.abs(prefix_sum(x) - want) <= bound)


def test_prefix_sum_long_input_stays_tight():
    x = np.full(3_000_001, 0.1)
    got = prefix_sum(x)[-1]
    assert abs(got - math.fsum(x)) < 1e-8


def _signal(samples, dt=0.01):
    return UniformSignal(UniformGrid(0.0, dt, len(samples)), samples)


@settings(max_examples=40, deadline=None)
@given(arrays(float, st.integers(2, 3000), elements=finite), st.floats(-100, 100),
       st.integers(1, 6))
def test_shift_equivariance(values, K, Q):
    f = _signal(values)
    a = iterate_average(f, Q)
    b = iterate_average(shift_signal(f, K), Q)
    for q in range(1, Q + 1):
        assert np.max(np.abs(b.level(q).samples - a.level(q).samples - K)) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(arrays(float, st.integers(2, 2000), elements=finite), st.integers(0, 2**32 - 1),
       st.floats(-10, 10), st.floats(-10, 10))
def test_linearity(f_vals, seed, a, b):
    g_vals = np.random.default_rng(seed).uniform(-1e3, 1e3, len(f_vals))
    f, g = _signal(f_vals), _signal(g_vals)
    combo = iterate_average(_signal(a * f_vals + b * g_vals), 3)
    fa, ga = iterate_average(f, 3), iterate_average(g, 3)
    for q in (1, 2, 3):
        want = a * fa.level(q).samples + b * ga.level(q).samples
        scale = 1 + np.max(np.abs(a * fa.level(q).samples)) + np.max(np.abs(b * ga.level(q).samples))
        assert np.max(np.abs(combo.level(q).samples - want)) <= 1e-10 * scale


@settings(max_examples=40, deadline=None)
@given(finite, st.integers(2, 5000), st.integers(1, 12))
def test_constant_is_exact_fixed_point(c, n, Q):
    stack = iterate_average(_signal(np.full(n, c)), Q)
    for level in stack.levels:
        assert np.all(level.samples == c)


def _psi1_error(dt):
    psi = running_average(sample_spec(MonomialOsc(1), UniformGrid.from_horizon(dt, 100.0)))
    t = psi.times()
    sel = t >= 1.0 - 1e-9
    return np.max(np.abs(psi.samples[sel] - (np.sin(t[sel]) / t[sel] - np.cos(t[sel]))))


def test_quadrature_is_second_order():
    e = [_psi1_error(dt) for dt in (8e-3, 4e-3, 2e-3)]
    for a, b in zip(e, e[1:]):
        assert 1.8 <= math.log2(a / b) <= 2.2


@pytest.mark.parametrize("p", [0, 1, 2])
@pytest.mark.parametrize("a", [2.0, 0.5])
def test_frequency_scaling_identity(p, a):
    # psi_1 of t^p sin(a t) at t equals a^-p psi_1 of t^p sin t at a t.
    n = 20001
    fast = running_average(sample_spec(MonomialOsc(p, a), UniformGrid(0.0, 1e-2, n)))
    unit = running_average(sample_spec(MonomialOsc(p, 1.0), UniformGrid(0.0, a * 1e-2, n)))
    assert np.max(np.abs(fast.samples - a ** (-p) * unit.samples)) <= 1e-6


def test_discrete_matches_continuous_to_first_order():
    errs = []
    for dt in (1e-2, 5e-3):
        sig = sample_spec(MonomialOsc(0), UniformGrid.from_horizon(dt, 50.0))
        cont = running_average(sig).samples
        disc = discrete_running_average(DiscreteSequence(sig.samples)).level(1).values
        # Compare away from t = 0 where the 1/(n+1) vs 1/t offset is O(1).
        k = slice(int(1.0 / dt), None)
        errs.append(np.max(np.abs(cont[k] - disc[k])))
    assert errs[1] < 0.6 * errs[0]
    assert errs[1] < 1e-2


def test_discrete_running_mean_divides_by_count():
    avg = discrete_running_average(DiscreteSequence([1.0, 2.0, 3.0, 6.0]), Q=2)
    assert list(avg.level(1).values) == [1.0, 1.5, 2.0, 3.0]
    assert avg.level(2).values[-1] == pytest.approx((1 + 1.5 + 2 + 3) / 4)


def test_average_at_origin_is_previous_level():
    sig = sample_spec(MonomialOsc(0, 1.0, "cos"), UniformGrid.from_horizon(0.1, 10.0))
    stack = iterate_average(sig, 3)
    assert all(level.samples[0] == 1.0 for level in stack.levels)


def test_stack_access_and_streaming():
    sig = sample_spec(MonomialOsc(1), UniformGrid.from_horizon(0.1, 100.0))
    stack = iterate_average(sig, 3)
    assert stack.Q == 3 and stack.level(0) is sig
    assert len(list(stack)) == 4
    streamed = list(iter_levels(sig, 3))
    for a, b in zip(streamed, stack.levels):
        assert np.array_equal(a.samples, b.samples)
    with pytest.raises(ConfigError):
        stack.level(4)


def test_preconditions():
    sig = UniformSignal(UniformGrid(1.0, 0.1, 5), np.ones(5))
    with pytest.raises(PreconditionError):
        running_average(sig)
    good = _signal(np.ones(5))
    with pytest.raises(ConfigError):
        iterate_average(good, 0)
    with pytest.raises(ConfigError):
        iterate_average(good, 13)
    assert iterate_average(good, 13, max_order=20).Q == 13
    with pytest.raises(DataError):
        discrete_running_average(DiscreteSequence([]))
