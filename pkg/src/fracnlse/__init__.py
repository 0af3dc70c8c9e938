"""Numerical laboratory for normalized ground states of a fractional NLS
energy combining a Sobolev-critical power with a mass-supercritical,
Sobolev-subcritical perturbation on a periodic box.

The package provides spectral operators for the fractional Laplacian,
exact scaling transport of the invariant summary under mass-preserving
dilations, fiber-map analysis on the constraint manifold, constrained
descent to the ground state, estimation of the critical Sobolev and
Gagliardo-Nirenberg constants, and a battery of self-verification checks
covering the identities and inequalities the solver relies on.
"""

from .constants import (ConstantsReport, OptimizerConfig, estimate_constants,
                        estimate_gn, estimate_sobolev, gn_quotient,
                        load_constants, probe_fields, save_constants,
                        sobolev_quotient)
from .fiber import (DegenerateFiberError, FiberProfile,
                    fiber_derivative_residual, fiber_energy, fiber_pohozaev,
                    fiber_root, scale_summary)
from .fields import (DecayGuardError, Field, FieldSummary,
                     boundary_mass_fraction, dense_oracle_frac_laplacian,
                     dilate, field_to_csv, frac_laplacian, load_field,
                     lp_norm_pow, make_field, sample, save_field, seminorm_sq,
                     summarize)
from .functionals import (GeometryReport, energy, geometry_lower_bound,
                          gradient_field, lagrange_multiplier,
                          manifold_identity_residual, pohozaev, rho)
from .grids import GridSpec, make_grid
from .params import DerivedExponents, ModelParams, derived_exponents
from .solver import (Diagnostics, SolveConfig, SolveReport, SweepEntry,
                     SweepReport, compactness_threshold, diagnose,
                     pohozaev_project, project_tangent, radial_symmetrize,
                     renormalize_mass, solve_ground_state,
                     stationarity_residual, sweep_eta)
from .verify import CheckResult, run_checks

__version__ = "0.1.0"

__all__ = [
    "CheckResult",
    "ConstantsReport",
    "DecayGuardError",
    "DegenerateFiberError",
    "DerivedExponents",
    "Diagnostics",
    "FiberProfile",
    "Field",
    "FieldSummary",
    "GeometryReport",
    "GridSpec",
    "ModelParams",
    "OptimizerConfig",
    "SolveConfig",
    "SolveReport",
    "SweepEntry",
    "SweepReport",
    "boundary_mass_fraction",
    "compactness_threshold",
    "dense_oracle_frac_laplacian",
    "derived_exponents",
    "diagnose",
    "dilate",
    "energy",
    "estimate_constants",
    "estimate_gn",
    "estimate_sobolev",
    "fiber_derivative_residual",
    "fiber_energy",
    "fiber_pohozaev",
    "fiber_root",
    "field_to_csv",
    "frac_laplacian",
    "geometry_lower_bound",
    "gn_quotient",
    "gradient_field",
    "lagrange_multiplier",
    "load_constants",
    "load_field",
    "lp_norm_pow",
    "make_field",
    "make_grid",
    "manifold_identity_residual",
    "pohozaev",
    "pohozaev_project",
    "probe_fields",
    "project_tangent",
    "radial_symmetrize",
    "renormalize_mass",
    "rho",
    "run_checks",
    "sample",
    "save_constants",
    "save_field",
    "scale_summary",
    "seminorm_sq",
    "sobolev_quotient",
    "solve_ground_state",
    "stationarity_residual",
    "summarize",
    "sweep_eta",
    "__version__",
]
