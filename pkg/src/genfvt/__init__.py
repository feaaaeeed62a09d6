"""Iterated running averages and a generalized final-value theorem toolkit."""

__version__ = "0.1.0"

from .averaging import (
    AverageStack,
    discrete_running_average,
    iterate_average,
    running_average,
    shift_signal,
)
from .convergence import (
    DetectionPolicy,
    LimitEstimate,
    OrderReport,
    Verdict,
    asymptotic_match,
    detect_limit,
    minimal_order,
    minimal_order_for_spec,
)
from .laplace import (
    LimitLadder,
    closed_form_transform,
    iterated_transform,
    sF_limit,
    small_s_order,
    verify_central_equality,
    z_side_limit,
)
from .lti import ResonantSystem, roundtrip_order_check, simulate
from .signals import (
    AlmostPeriodicPoly,
    Constant,
    DiscreteSequence,
    FourierPoly,
    Monomial,
    MonomialOsc,
    UniformGrid,
    UniformSignal,
    read_csv,
    sample_spec,
    write_csv,
)
