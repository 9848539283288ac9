"""Zero-order nonlocal operators with logarithmic moduli.

The package evaluates singular integral operators whose kernels scale like
|x - y|^(-N) (the borderline below every fractional Laplacian), solves the
associated Dirichlet problems by collocation, and numerically verifies the
barrier constructions that drive their log-Hoelder regularity theory.

Layout: `logmod` (the truncated log modulus, seminorms, exponent fits),
`kernels` (special functions, kernel catalog, mollification), `geometry`
(domains and grids), `nonlocal_eval` (pointwise quadrature of the operators),
`solver` (dense collocation solves and Fredholm probes), `barriers` (barrier
fields and verifiers), `cli` (batch front end, installed as `logop`).
"""

from .geometry import Domain, Grid, GridFunction, build_grid
from .kernels import (
    KernelSpec,
    bessel_k1,
    digamma,
    gamma_fn,
    kernel_from_name,
    loglap_constants,
    mollify_kernel,
    schrodinger_weight,
)
from .logmod import RHO0, ell, fit_exponent, norm_X, norm_Y, seminorm_global
from .nonlocal_eval import (
    FieldFunction,
    QuadratureConfig,
    eval_J_conv,
    eval_LK,
    eval_loglap,
    eval_remainder,
    eval_schrodinger,
    sector_integral,
)
from .solver import (
    ProblemSpec,
    SolveReport,
    StiffnessMatrix,
    assemble,
    estimate_regularity,
    fredholm_probe,
    fredholm_sweep,
    solve_dirichlet,
    torsion_scan,
)
from .barriers import (
    verify_boundary_barrier,
    verify_bump,
    verify_composite,
    verify_exponential,
    verify_gain,
    verify_sector,
    verify_tail,
)

__version__ = "0.1.0"

__all__ = [
    "Domain",
    "Grid",
    "GridFunction",
    "build_grid",
    "KernelSpec",
    "bessel_k1",
    "digamma",
    "gamma_fn",
    "kernel_from_name",
    "loglap_constants",
    "mollify_kernel",
    "schrodinger_weight",
    "RHO0",
    "ell",
    "fit_exponent",
    "norm_X",
    "norm_Y",
    "seminorm_global",
    "FieldFunction",
    "QuadratureConfig",
    "eval_J_conv",
    "eval_LK",
    "eval_loglap",
    "eval_remainder",
    "eval_schrodinger",
    "sector_integral",
    "ProblemSpec",
    "SolveReport",
    "StiffnessMatrix",
    "assemble",
    "estimate_regularity",
    "fredholm_probe",
    "fredholm_sweep",
    "solve_dirichlet",
    "torsion_scan",
    "verify_boundary_barrier",
    "verify_bump",
    "verify_composite",
    "verify_exponential",
    "verify_gain",
    "verify_sector",
    "verify_tail",
]
