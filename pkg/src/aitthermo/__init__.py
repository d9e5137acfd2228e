"""Certified thermodynamic quantities of prefix-free machines.

For a machine with program-length spectrum ``m(n)`` and temperature ``T`` the
package encloses, with rigorous dyadic intervals,

    Z = sum_n m(n) 2**(-n/T)        F = -T log2 Z
    E = sum_n n m(n) 2**(-n/T) / Z  S = (E - F) / T
"""
from .compose import CompositeMachine, compose, convolve_spectra, power, vn_family
from .core import (
    BitString,
    FiniteSpectrum,
    LengthSpectrum,
    PrefixSet,
    RuleSpectrum,
    is_prefix_free,
    kraft_sum,
    power_law_spectrum,
    spectrum_of,
    unary_spectrum,
)
from .errors import (
    AITError,
    BudgetExhausted,
    DivisionByZeroInterval,
    EmptyDomain,
    NoConvergenceCertificate,
    NonPositiveArgument,
    NotFound,
    PrecisionExhausted,
    PredicateFailed,
    SpecParseError,
    TailUnbounded,
    Undefined,
    UnknownMachine,
    ZoneError,
)
from .machines import (
    EnumerationState,
    SpectrumMachine,
    TableMachine,
    UniversalMachine,
    builtin,
    check_predicates,
    complexity_upper,
    enumerate_domain,
    run,
)
from .randomness import CompressionProfile, RealSource, compression_profile, deficiency_probe, rest_bits
from .rigor import DyadicInterval, field_ops, log2, pow2
from .thermo import (
    Temperature,
    ThermoReport,
    detect_divergence,
    eval_E,
    eval_F,
    eval_S,
    eval_Z,
    evaluate,
    partial_Z,
    sweep,
    tail_bound_Z,
)

__version__ = "0.1.0"
