class EqMirrorError(Exception):
    exitCode = 1


class InputError(EqMirrorError, ValueError):
    pass


class NovikovZeroDivisionError(EqMirrorError, ZeroDivisionError):
    pass


class HypothesisViolation(EqMirrorError):
    """A mathematical precondition of an operation does not hold for the given data"""

    exitCode = 2


class TruncationError(EqMirrorError):
    exitCode = 2


class ConvergenceError(EqMirrorError):
    exitCode = 2
