"""Exception hierarchy shared by the estimator, simulator and electronics models."""


class CalibrationError(Exception):
    """Base class for all package errors."""


class DomainError(CalibrationError, ValueError):
    """An argument lies outside the domain of the operation."""


class SaturationError(DomainError):
    """Rate times time constant reached 1: the counting chain is fully blocked."""


class NoSignalError(CalibrationError):
    """Trigger counts do not exceed the background: there is nothing to calibrate."""


class InconsistentCountsError(CalibrationError):
    """Counts that violate the record invariants (e.g. more accidentals than coincidences)."""


class ContractViolation(CalibrationError, ValueError):
    """Input breaks a documented precondition, e.g. an unsorted timestamp stream."""


class NoPeakError(CalibrationError):
    """The interval histogram is empty, so no coincidence peak can be located."""


class InsufficientDataError(CalibrationError):
    """The event streams ran out before the requested number of start-stop pairs."""

    def __init__(self, message, pairs_collected):
        super().__init__(message)
        self.pairs_collected = pairs_collected
