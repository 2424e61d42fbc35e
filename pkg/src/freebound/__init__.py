"""Expected-energy shape optimization for exterior free-boundary problems.

An annular domain lies between a random starlike interior boundary and a
controlled outer boundary.  The package solves the Dirichlet problem on that
annulus with a Nystrom boundary-element method, differentiates the energy
J = flux + lam^2 area with respect to the outer shape, and drives a
projected stochastic gradient method whose iterates approach the free
boundary of the expected-energy problem.  Closed-form concentric-circle
answers (Lambert-W radii, explicit energies) serve as oracles throughout.
"""

from .errors import (DegenerateAnnulus, DimensionMismatch, FreeboundError,
                     GapTooSmall, InfeasibleSet, NonpositiveRadius, NotConvex,
                     OrderingViolated, ResampleLimitExceeded)
from .geometry import (AdmissibleSet, DiscreteBoundary, RadialCurve,
                       SupportFunction, discretize_radial, envelope,
                       eval_series, fit_series, load_coeffs,
                       project_admissible, save_coeffs)
from .laplace import (AnnularDomain, BoundarySolution, default_node_count,
                      dirichlet_energy, energy_of, evaluate_interior,
                      solve_dirichlet, solve_state)
from .oracle import (TwoPointRadiusLaw, crossing_check, energy_circles,
                     expected_energy_two_point, free_radius, lambert_w,
                     minimize_expected_energy)
from .optimizer import (RandomBoundaryModel, SgdConfig, SgdTrajectory,
                        default_model, estimate_expected_objective,
                        estimate_value_and_gradient, flat_amplitude_model,
                        minimize_sample_average, run_sgd, sample_interior)
from .shape_calculus import (CoercivityFamily, coercivity_probe,
                             coercivity_ratios, gradient_radial,
                             gradient_support, h12_norm_sq,
                             hessian_quadratic_form, objective_radial,
                             objective_support, radial_domain,
                             shape_gradient_density, support_domain)

__version__ = "0.1.0"

__all__ = [
    "AdmissibleSet", "AnnularDomain", "BoundarySolution", "CoercivityFamily",
    "DegenerateAnnulus", "DimensionMismatch", "DiscreteBoundary",
    "FreeboundError", "GapTooSmall", "InfeasibleSet", "NonpositiveRadius",
    "NotConvex", "OrderingViolated", "RadialCurve", "RandomBoundaryModel",
    "ResampleLimitExceeded", "SgdConfig", "SgdTrajectory", "SupportFunction",
    "TwoPointRadiusLaw", "coercivity_probe", "coercivity_ratios",
    "crossing_check", "default_model", "default_node_count",
    "dirichlet_energy", "discretize_radial", "energy_circles", "energy_of",
    "envelope", "estimate_expected_objective", "estimate_value_and_gradient",
    "eval_series", "evaluate_interior", "expected_energy_two_point",
    "fit_series", "flat_amplitude_model", "free_radius", "gradient_radial",
    "gradient_support", "h12_norm_sq", "hessian_quadratic_form",
    "lambert_w", "load_coeffs", "minimize_expected_energy",
    "minimize_sample_average", "objective_radial", "objective_support",
    "project_admissible", "radial_domain", "run_sgd", "sample_interior",
    "save_coeffs", "shape_gradient_density", "solve_dirichlet", "solve_state",
    "support_domain",
]
