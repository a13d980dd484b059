"""Offline single change-point detection from a test sequence and two labeled
training sequences: type-based decoder with erasure, divergence toolkit,
optimal-resolution calculators, and a Monte Carlo simulation harness.
"""

__version__ = "0.1.0"

from .detector import (
    DetectionReport,
    LProfile,
    detect,
    detect_report,
    l_profile,
    threshold_value,
    type_counting_slack,
)
from .divergence import Nats, chi2, gjs, kl, l_statistic, sym_chi2
from .errors import ConfigError, InputError
from .model import (
    CategoricalDistribution,
    DecoderOutput,
    ProblemConfig,
    SubTypeTuple,
    SymbolSequence,
    ThresholdMode,
    TypeVector,
    load_distribution,
    load_sequence,
    split_types,
    type_of,
)
from .resolution import (
    Regime,
    RegimeQuery,
    ResolutionResult,
    Saturated,
    Side,
    erasure_normal_approx,
    g_min,
    invert_g_min,
    optimal_resolution_ld,
    optimal_resolution_md,
    optimal_resolution_r_infinity,
    resolution_cap,
    variance_v,
)
from .simulator import (
    CellResult,
    MonteCarloReport,
    SweepRow,
    TrialSpec,
    estimate,
    generate,
    phase_transition_sweep,
    physical_resolution,
    wilson_halfwidth,
)

__all__ = [
    "CategoricalDistribution",
    "CellResult",
    "ConfigError",
    "DecoderOutput",
    "DetectionReport",
    "InputError",
    "LProfile",
    "MonteCarloReport",
    "Nats",
    "ProblemConfig",
    "Regime",
    "RegimeQuery",
    "ResolutionResult",
    "Saturated",
    "Side",
    "SubTypeTuple",
    "SweepRow",
    "SymbolSequence",
    "ThresholdMode",
    "TrialSpec",
    "TypeVector",
    "chi2",
    "detect",
    "detect_report",
    "erasure_normal_approx",
    "estimate",
    "g_min",
    "generate",
    "gjs",
    "invert_g_min",
    "kl",
    "l_profile",
    "l_statistic",
    "load_distribution",
    "load_sequence",
    "optimal_resolution_ld",
    "optimal_resolution_md",
    "optimal_resolution_r_infinity",
    "phase_transition_sweep",
    "physical_resolution",
    "resolution_cap",
    "split_types",
    "sym_chi2",
    "threshold_value",
    "type_counting_slack",
    "type_of",
    "variance_v",
    "wilson_halfwidth",
]
