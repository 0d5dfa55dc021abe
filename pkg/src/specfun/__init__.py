"""Spectra and asymptotic behaviour of bounded vector-valued functions.

Resolvent (Laplace-type) transforms of sampled functions on the line and
half-line, three spectrum estimators, Laurent analysis of resolvents near
the imaginary axis, and stability checks for ``u' = A u + f``.
"""
from .errors import (
    ConfigError,
    ContourError,
    DomainError,
    ImaginaryAxisError,
    NumericalError,
    PreconditionError,
    ResolutionError,
    SolveError,
    SpanError,
    SpecfunError,
    TruncationError,
    UnboundedWarning,
)
from .evolution import (
    MildSolutionProblem,
    OperatorMatrix,
    ablv_check,
    cumulative_simpson,
    minh_stability_check,
    mild_residual,
    mild_solution,
    operator_ergodic_condition,
    resolvent_identity_check,
    sigma_i,
    spectral_inclusion_check,
)
from .funcspace import (
    AlmostAutomorphicSample,
    ExponentialDecay,
    FunctionSpec,
    Grid,
    Modulated,
    Orbit,
    SampledFunction,
    Sum,
    Tabulated,
    Translated,
    TrigPolynomial,
    modulate,
    quotient_norm_c0,
    sample,
    spec_from_dict,
    sup_norm,
    translate,
)
from .kernels import BACKEND
from .laurent import (
    ContourSpec,
    FunctionSampler,
    MatrixResolvent,
    gelfand_bound_check,
    laurent_coefficients,
    observed_bound,
    pole_classify,
    zero_spectrum_forces_zero,
)
from .resolvent import (
    ResolventQuery,
    abel_mean,
    carleman_transform,
    ergodic_limit,
    resolvent,
    resolvent_halfline,
    resolvent_line,
    resolvent_residual,
)
from .spectrum import (
    FrequencyGrid,
    SpectrumEstimate,
    beurling_score,
    beurling_spectrum,
    carleman_spectrum,
    classify_asymptotics,
    coincidence_check,
    reduced_spectrum_c0,
    trig_poly_recovery,
)

__version__ = "0.1.0"
