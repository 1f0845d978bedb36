"""Matrix-valued convolution equations with completely monotone and Bernstein
kernels: Sonine pairs, duality solutions, generalized fractional operators."""

from __future__ import annotations

from .analysis import (
    CertReport,
    bernstein_certify,
    cm_certify,
    duality_residual,
    licm_certify,
    sonine_residual,
)
from .calculus import (
    VectorTrajectory,
    d_A,
    j_A,
    roundtrip_DJ,
    roundtrip_JD,
    solve_relaxation,
)
from .convolve import (
    MomentTable,
    build_moments,
    discrete_convolve,
    solve_duality,
    solve_sonine,
    volterra_solve,
)
from .core import (
    DeltaPlusFunction,
    Grid,
    ProbeSet,
    SampledMatrixFunction,
    eval_sampled,
    make_graded_grid,
    make_probes,
    make_uniform_grid,
)
from .errors import (
    InvalidArgument,
    NumericalFailure,
    SonineError,
    Unsupported,
    UnsupportedKernel,
)
from .kernels import (
    BesselI,
    BesselK,
    Constant,
    DiagonalOfScalars,
    Exponential,
    KernelSpec,
    OneMinusExp,
    PowerLaw,
    ScalarTimesMatrix,
    SeriesKernel,
    SoninePartnerOfPowerLaw,
    TemperedPartner,
    TemperedPowerLaw,
    cell_moment,
    eval_kernel,
    laplace_closed_form,
    limit_inverse_at_zero,
    series_partner,
    sonine_partner,
)
from .laplace import Rhs, check_pd, check_structure, cross_check, numeric_laplace, transform_solve

__version__ = "0.1.0"

__all__ = [
    "BesselI",
    "BesselK",
    "CertReport",
    "Constant",
    "DeltaPlusFunction",
    "DiagonalOfScalars",
    "Exponential",
    "Grid",
    "InvalidArgument",
    "KernelSpec",
    "MomentTable",
    "NumericalFailure",
    "OneMinusExp",
    "PowerLaw",
    "ProbeSet",
    "Rhs",
    "SampledMatrixFunction",
    "ScalarTimesMatrix",
    "SeriesKernel",
    "SonineError",
    "SoninePartnerOfPowerLaw",
    "TemperedPartner",
    "TemperedPowerLaw",
    "Unsupported",
    "UnsupportedKernel",
    "VectorTrajectory",
    "annotations",
    "bernstein_certify",
    "build_moments",
    "cell_moment",
    "check_pd",
    "check_structure",
    "cm_certify",
    "cross_check",
    "d_A",
    "discrete_convolve",
    "duality_residual",
    "eval_kernel",
    "eval_sampled",
    "j_A",
    "laplace_closed_form",
    "licm_certify",
    "limit_inverse_at_zero",
    "make_graded_grid",
    "make_probes",
    "make_uniform_grid",
    "numeric_laplace",
    "roundtrip_DJ",
    "roundtrip_JD",
    "series_partner",
    "solve_duality",
    "solve_relaxation",
    "solve_sonine",
    "sonine_partner",
    "sonine_residual",
    "transform_solve",
    "volterra_solve",
    "__version__",
]
