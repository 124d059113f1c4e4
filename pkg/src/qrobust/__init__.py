"""Robustness and weight-of-resource toolkit for non-convex free sets.

Measures states, channels, and instruments against free sets given as
finite unions of convex pieces; builds and verifies the multicopy witness
families that certify those measures; and simulates the discrimination and
exclusion games in which they quantify the operational advantage.
"""

from .bloch import from_bloch, gellmann_basis, psd_via_s, s_poly, s_poly_all, shifted_operator, to_bloch
from .channels import (
    ChoiFreeSet,
    ChoiFreeSetUnion,
    ChoiOperator,
    Instrument,
    InstrumentFreeSet,
    apply_channel,
    apply_channel_to_second,
    channel_robustness,
    channel_witness,
    channel_witness_sweep,
    choi_from_kraus,
    depolarizing_choi,
    identity_choi,
    instrument_robustness,
    instrument_to_channel,
    measurement_instrument,
    state_discrimination_game,
    state_discrimination_worst_case,
)
from .errors import DegenerateShiftError, QRobustError, ResourceCapError, ValidationError
from .freesets import ConvexFreeSet, FreeSetUnion, barycenter, membership, qubit_axis_union, sample, support_contains
from .kernels import BACKEND
from .measures import (
    MeasureResult,
    feasibility,
    ray_parameter,
    robustness_convex,
    robustness_union,
    weight_convex,
    weight_union,
)
from .operators import (
    eigvals_hermitian,
    is_psd,
    kron,
    kron_power,
    partial_trace,
    random_density,
    trace_norm,
)
from .tasks import (
    Channel,
    ChannelEnsemble,
    POVM,
    discrimination_advantage,
    exclusion_advantage,
    helstrom,
    p_err,
    p_succ,
    witness_channels,
    worst_case_discrimination,
    worst_case_exclusion,
)
from .witness import (
    PolynomialForm,
    WitnessFamily,
    build_family,
    build_qubit_witness,
    build_witness_exact,
    build_witness_monomial,
    build_witness_symmetric,
    estimate_measure_via_witness,
    fit_s_polynomial,
    shift_family,
    verify_family,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Channel",
    "ChannelEnsemble",
    "ChoiFreeSet",
    "ChoiFreeSetUnion",
    "ChoiOperator",
    "ConvexFreeSet",
    "DegenerateShiftError",
    "FreeSetUnion",
    "Instrument",
    "InstrumentFreeSet",
    "MeasureResult",
    "POVM",
    "PolynomialForm",
    "QRobustError",
    "ResourceCapError",
    "ValidationError",
    "WitnessFamily",
    "apply_channel",
    "apply_channel_to_second",
    "barycenter",
    "build_family",
    "build_qubit_witness",
    "build_witness_exact",
    "build_witness_monomial",
    "build_witness_symmetric",
    "channel_robustness",
    "channel_witness",
    "channel_witness_sweep",
    "choi_from_kraus",
    "depolarizing_choi",
    "discrimination_advantage",
    "eigvals_hermitian",
    "estimate_measure_via_witness",
    "exclusion_advantage",
    "feasibility",
    "fit_s_polynomial",
    "from_bloch",
    "gellmann_basis",
    "helstrom",
    "identity_choi",
    "instrument_robustness",
    "instrument_to_channel",
    "is_psd",
    "kron",
    "kron_power",
    "measurement_instrument",
    "membership",
    "p_err",
    "p_succ",
    "partial_trace",
    "psd_via_s",
    "qubit_axis_union",
    "random_density",
    "ray_parameter",
    "robustness_convex",
    "robustness_union",
    "s_poly",
    "s_poly_all",
    "sample",
    "shift_family",
    "shifted_operator",
    "state_discrimination_game",
    "state_discrimination_worst_case",
    "support_contains",
    "to_bloch",
    "trace_norm",
    "verify_family",
    "weight_convex",
    "weight_union",
    "witness_channels",
    "worst_case_discrimination",
    "worst_case_exclusion",
]
