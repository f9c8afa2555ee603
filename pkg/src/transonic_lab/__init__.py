"""Transonic flow numerics: sonic-line classification, truncated-series Cauchy
solves, FBI-transform wavefront detection, the conjugation identities on
complex characteristics and norm-ratio growth for the elliptic Cauchy problem.
"""
from .errors import (DegenerateDirectionError, FBIOverflowError, FrameTooLargeError, MultiplicityError,
                     QuadratureError, SeriesError, TransonicError, VacuumLimitError)
from .gasdyn import (FlowState, GasModel, Regime, VelocityField, classify, classify_arrays, density,
                     flux_matrix, mach, read_field_csv, sonic_line, sound_speed)
from .eigenstructure import eigen_decompose, quadratic_eigenvalues, track_eigenpairs
from .series import BivariateSeries, SeriesSolution, ck_solve, residual
from .cutoff import CutoffSpec
from .microlocal import (Datum1D, FBIQuery, analyticity_test, decay_profile, fbi_transform, generalized_fbi,
                         gaussian_fbi_closed_form, load_datum)
from .conjugation import (ProblemFrame, boundary_integrals, build_fields, conservation_residual,
                          diagonalizer_fields, est_basic_check, solve_B, solve_zeta, u_recovery_integrals)
from .illposedness import (GrowthRegion, NormKind, NormSpec, gevrey_norm, growth_experiment,
                           modal_linear_solution, sobolev_norm)
from .pipeline import DEFAULT_PIPELINE, run_pipeline

__version__ = "0.1.0"
