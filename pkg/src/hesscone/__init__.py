"""hesscone: potential theory for elliptic cones of symmetric matrices.

Cone membership and duality, plurisubharmonic classification of sampled
functions, free dimensions, Garding-hyperbolic polynomial analysis, boundary
convexity, and a monotone finite-difference solver for the associated
degenerate-elliptic Dirichlet problem.
"""

from .config import DEFAULT, Tolerances, rng
from .cones import (ConeSpec, ConvexEllipticSet, MembershipVerdict,
                    complex_lines_cone, convex_elliptic_membership,
                    dual_membership, ellipticity_check, free_dim_verify,
                    free_subspace_check, lines_cone, planes_cone, polar_check,
                    psplus_membership, ray_cone_membership, trace_cone)
from .dirichlet import (DirichletProblem, SolveReport, StencilSet,
                        cone_monotonicity_check, discretize_operator,
                        ma_solve_2d, perron_solve, reference_harmonic,
                        residual)
from .exprs import Expr
from .fields import (GridField, PointClassification, hessian_fd,
                     hull_estimate, psh_classify, smooth_max,
                     smooth_max_field, subaffine_check)
from .garding import (MAPolynomial, cone_ellipticity_E2, derived_poly,
                      det_real, eval_ma, garding_membership,
                      hyperbolicity_test, linearization, roots_of_pA, sigma,
                      sigma_cone, slag_im, theorem_E3_check)
from .geometry import (DomainSpec, SubmanifoldSpec, annulus_2d,
                       boundary_convexity_check, dist_sq_hessian_check,
                       exhaustion_check, global_defining_function,
                       strict_constant_C, tube_report, unit_ball)
from .linalg import (EigenSystem, InputError, Plane, SymMatrix, eig_sym,
                     frob_inner, outer, plane_projection, trace_on_plane)

__version__ = "0.1.0"
