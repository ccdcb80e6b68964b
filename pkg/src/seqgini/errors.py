"""Exception hierarchy shared by the library and the CLI."""


class SeqGiniError(Exception):
    """Base class for all package errors."""


class ValidationError(SeqGiniError, ValueError):
    """Invalid configuration or input; the CLI maps it to exit code 2."""


class RejectedObservationError(ValidationError):
    """An income that is zero, negative or not finite."""

    def __init__(self, value, index=None):
        self.value = value
        self.index = index
        where = "" if index is None else f" at position {index}"
        super().__init__(f"rejected observation {value!r}{where}: incomes must be finite and > 0")


class InsufficientSampleError(ValidationError):
    """An estimator was asked for a sample smaller than it is defined on."""

    def __init__(self, what, n, needed):
        self.n = n
        self.needed = needed
        super().__init__(f"{what} needs at least {needed} observations, got {n}")


class InsufficientReplicationsError(ValidationError):
    pass


class InvariantViolationError(SeqGiniError):
    pass


class SeqGiniRuntimeError(SeqGiniError, RuntimeError):
    """Failure while running a procedure; the CLI maps it to exit code 3."""


class InsufficientDataError(SeqGiniRuntimeError):
    """The observation stream ran out before the stopping rule was met."""

    def __init__(self, n_reached, last_threshold):
        self.n_reached = n_reached
        self.last_threshold = last_threshold
        super().__init__(
            f"stream exhausted after {n_reached} observations before stopping "
            f"(last threshold {last_threshold:.6g})"
        )


class ReplicationError(SeqGiniRuntimeError):
    """A single replication inside a study failed."""

    def __init__(self, replication, reason):
        self.replication = replication
        self.reason = reason
        super().__init__(f"replication {replication}: {reason}")


class NumericalIntegrationError(SeqGiniRuntimeError):
    def __init__(self, integral, detail):
        self.integral = integral
        super().__init__(f"quadrature for {integral} did not converge: {detail}")
