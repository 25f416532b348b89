"""Exception hierarchy shared by all hopred modules."""


class HopredError(Exception):
    """Base class for every error raised by hopred."""


# -- model validation -------------------------------------------------------

class ModelError(HopredError, ValueError):
    """A model violates one of its structural invariants."""


class EmptyModel(ModelError):
    def __init__(self):
        super().__init__("model has no states (period_count must be >= 1)")


class RateLengthMismatch(ModelError):
    def __init__(self, n_forward, n_backward):
        self.n_forward = n_forward
        self.n_backward = n_backward
        super().__init__(
            f"forward_rates has {n_forward} entries but backward_rates has {n_backward}")


class NonPositiveForwardRate(ModelError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"forward rate at index {index} must be > 0 (got {value!r})")


class NegativeBackwardRate(ModelError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"backward rate at index {index} must be >= 0 (got {value!r})")


class NonFiniteRate(ModelError):
    def __init__(self, which, index, value):
        self.which = which
        self.index = index
        self.value = value
        super().__init__(f"{which} rate at index {index} is not finite (got {value!r})")


class NonPositiveStep(ModelError):
    def __init__(self, value):
        self.value = value
        super().__init__(f"step length must be > 0 (got {value!r})")


class NonPositiveScale(ModelError):
    def __init__(self, value):
        self.value = value
        super().__init__(f"scale factor must be > 0 (got {value!r})")


class InvalidParameter(ModelError):
    def __init__(self, name, value, requirement):
        self.name = name
        self.value = value
        super().__init__(f"{name} {requirement} (got {value!r})")


# -- file I/O ---------------------------------------------------------------

class ParseError(HopredError, ValueError):
    """The model file is not valid JSON."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class SchemaError(HopredError, ValueError):
    """The model file parsed but does not match the schema."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"field {field!r}: {message}")


# -- numerics ---------------------------------------------------------------

class NumericalError(HopredError, ArithmeticError):
    """A numerical procedure failed to produce a trustworthy result."""


class NumericalOverflow(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    def __init__(self, value, error, panels):
        self.value = value
        self.error = error
        self.panels = panels
        super().__init__(
            f"quadrature did not converge with {panels} panels "
            f"(last value {value!r}, error estimate {error!r})")


class NonConvergent(NumericalError):
    def __init__(self, value, error, tolerance):
        self.value = value
        self.error = error
        self.tolerance = tolerance
        super().__init__(
            f"extrapolation error {error!r} exceeds tolerance {tolerance!r} "
            f"(value {value!r})")


# -- reductions -------------------------------------------------------------

class ReductionError(HopredError):
    """No reduced model with the requested properties exists."""


class Infeasible(ReductionError):
    """The (V, D)-preserving one-state rates are not a valid model."""

    def __init__(self, forward_rate, backward_rate):
        self.forward_rate = forward_rate
        self.backward_rate = backward_rate
        super().__init__(
            f"one-state rates u_r={forward_rate!r}, w_r={backward_rate!r} "
            "are not both admissible (need u_r > 0, w_r >= 0)")


class DegenerateVelocity(ReductionError):
    def __init__(self, gamma):
        self.gamma = gamma
        super().__init__(
            f"cycle factor gamma={gamma!r} equals 1 (zero mean velocity); "
            "the two-state construction is undefined")


class InfeasibleAggregates(ReductionError):
    def __init__(self, denominator, reason):
        self.denominator = denominator
        self.reason = reason
        super().__init__(f"{reason} (denominator {denominator!r})")


class NoRealFactorization(ReductionError):
    def __init__(self, u, w, sigma, reason):
        self.u = u
        self.w = w
        self.sigma = sigma
        self.reason = reason
        super().__init__(f"cannot factorize u={u!r}, w={w!r}, sigma={sigma!r}: {reason}")


# -- simulation -------------------------------------------------------------

class SimulationError(HopredError):
    pass


class SimulationConfigError(SimulationError, ValueError):
    pass


class DegenerateHorizon(SimulationError, ValueError):
    def __init__(self, expected_jumps):
        self.expected_jumps = expected_jumps
        super().__init__(
            f"horizon gives only ~{expected_jumps:.3g} expected jumps (need >= 100)")


class JumpCapExceeded(SimulationError):
    def __init__(self, cap):
        self.cap = cap
        super().__init__(f"first-passage trial exceeded {cap} jumps without absorbing")
