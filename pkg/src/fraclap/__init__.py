"""Spectral and restricted fractional Laplacians on an interval.

Two operator families built from the same order parameter: the spectral one
acts through the zero-boundary sine eigenbasis of the interval, the
restricted one through the whole-line multiplier |xi|^(2s) on functions
supported in the closed interval.  The package evaluates both quadratic
forms for s > -1, solves the degenerate-elliptic extension problems (trace
data for positive orders, flux data for negative ones) on the half-plane and
the cylinder, and ships a harness that turns the comparison, dilation-limit,
and pointwise-order statements into falsifiable numerical verdicts.
"""

from .errors import (ArgumentError, ConfigError, DomainError, FormDivergence,
                     SmoothnessError, SolverError, SupportError)
from .grids import (FractionalOrder, GridFunction, IntervalDomain, Regime,
                    classify_order, sample)
from .transforms import (FourierGrid, MeanZeroCheck, MeanZeroVerdict,
                         SineSpectrum, check_mean_zero, fourier_transform,
                         laplacian_power_int, plancherel_integral,
                         sine_coefficients)
from .navier import (NavierFormResult, apply_navier, q_form_navier,
                     q_form_navier_dilated)
from .dirichlet import (DirichletFormResult, apply_dirichlet,
                        q_form_dirichlet, riesz_potential_oracle)
from .extension import (EnergyReport, ExtensionField, ExtensionKind,
                        HardyCheck, bessel_profile, c_sigma, cs_dual_extension,
                        cs_extension, energy_report, hardy_check,
                        st_dual_extension, st_extension, trace_values,
                        weighted_energy, weighted_normal_derivative)
from .fdsolve import fd_solve_dual
from .harness import (ComparisonVerdict, DilationReport, IdentityCheck,
                      PointwiseReport, ReductionReport, Relation,
                      predicted_relation, random_compact_field,
                      verify_comparison, verify_dilation_limit,
                      verify_extension_identities, verify_pointwise,
                      verify_reduction)
from . import battery

__version__ = "0.1.0"
