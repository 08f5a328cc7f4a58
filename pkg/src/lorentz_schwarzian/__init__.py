"""Schwarzian derivatives, Lorentz curvature of worldlines on RP^1 x RP^1, and
numerical checks of the curvature/Schwarzian correspondence."""

from .diffeo import (CircleDiffeo, ComposedDiffeo, FourierDiffeo, MobiusDiffeo, Rotation,
                     fixed_point_free, from_descriptor, random_diffeo)
from .errors import (DomainError, GenerationError, IntegrationError, SingularityError,
                     TimelikeError)
from .jets import Jet3, elementary_jet, jet_compose
from .metric import (MetricQuad, QuadMetric, custom_metric, extra_term, flat_metric,
                     normal_form, random_quad, scalar_curvature, transform_quad)
from .projective import MobiusMap, PairMobius, RP1Point
from .schwarzian import (count_zeros_periodic, projective_schwarzian, relative_schwarzian,
                         schwarzian)
from .worldline import (Worldline, curvature_formula, curvature_oracle, identity_rhs, graph,
                        graph_angle, proper_time, rho_prime_lhs, theorem_residual, vertices)

__version__ = "0.1.0"
