"""Numerics for interpolating sequences in Hardy spaces of the unit ball of C^n."""

from .errors import (CapacityError, ConstructionError, DegenerateSequenceError,
                     DimensionMismatchError, EmptyRegionError, ExponentError, HardyError,
                     InfeasibleSeparationError, InsufficientDataError, InvalidArgumentError,
                     InvalidPointError, QuadratureError)
from .geometry import BoundaryPoint, Point, hermitian_inner, metric_d, pseudo_distance
from .quadrature import QuadratureRule, build_rule, lp_norm, pairing
from .kernels import cauchy_kernel, certify_H2, certify_H3, kernel_norm, normalized_kernel
from .sequences import PointSequence, accumulating, explicit, radial, random_separated, spiral
from .dual_systems import (DualSystem, dual_bound_constant, dual_system_h2, dual_system_hp,
                           gram_matrix, lemma23_check)
from .carleson import (carleson_measure, carleson_report, embedding_constant,
                       hormander_crosscheck, tent_constant)
from .interpolation import (ExponentSystem, balayage_identity_check, build_extension,
                            exponent_split, factor_target, gamma_constant,
                            holder_pipeline_check, interpolation_constant)

__version__ = "0.1.0"
