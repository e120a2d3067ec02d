"""Exception hierarchy shared across the package."""


class HardyError(Exception):
    """Base class for every error raised by hardyinterp."""


class DimensionMismatchError(HardyError, ValueError):
    """Two vectors live in ambient spaces of different dimension."""


class InvalidPointError(HardyError, ValueError):
    """A ball point is not strictly inside the ball, or a boundary point is degenerate."""


class InvalidArgumentError(HardyError, ValueError):
    pass


class CapacityError(HardyError):
    """A quadrature rule would exceed the node budget."""


class QuadratureError(HardyError):
    """Non-finite integrand or an under-resolved norm.

    ``node_index`` is set when a specific node produced a non-finite value.
    """

    def __init__(self, message, node_index=None):
        super().__init__(message)
        self.node_index = node_index


class DegenerateSequenceError(HardyError):
    """The kernel Gram matrix of a sequence is numerically singular.

    Attributes
    ----------
    pair : tuple of int or None
        Indices of the closest pair in the sequence.
    distance : float
        Pseudo-hyperbolic distance of that pair.
    condition : float
        Condition number of the normalized Gram matrix (may be inf).
    near_duplicate : bool
        True when the closest pair is itself within the duplicate floor, as
        opposed to a sequence that is merely ill-conditioned as a whole.
    """

    def __init__(self, message, pair=None, distance=float("nan"),
                 condition=float("inf"), near_duplicate=False):
        super().__init__(message)
        self.pair = pair
        self.distance = distance
        self.condition = condition
        self.near_duplicate = near_duplicate


class EmptyRegionError(HardyError):
    """A sampling filter left no admissible samples."""


class InsufficientDataError(HardyError):
    pass


class ExponentError(HardyError, ValueError):
    """An exponent triple violates the ordering or the q/p' > 1 requirement.

    ``q`` and ``ratio`` (q/p') are filled in when they could be computed.
    """

    def __init__(self, message, q=None, ratio=None):
        super().__init__(message)
        self.q = q
        self.ratio = ratio


class InfeasibleSeparationError(HardyError):
    pass


class ConstructionError(HardyError):
    """An extension failed to reproduce its targets.

    ``worst_index`` is the sequence index with the largest residual.
    """

    def __init__(self, message, worst_index=None, residual=float("nan")):
        super().__init__(message)
        self.worst_index = worst_index
        self.residual = residual
