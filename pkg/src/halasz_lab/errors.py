"""Exception types raised across the package."""


class LabError(Exception):
    """Base class for all errors raised by halasz_lab."""


class InvalidArgumentError(LabError, ValueError):
    pass


class OutOfRangeError(LabError, ValueError):
    pass


class IncompleteSpecError(LabError, ValueError):
    def __init__(self, prime: int):
        super().__init__(f"function spec has no value for prime {prime}")
        self.prime = prime


class DegenerateParametersError(LabError, ValueError):
    pass


class TooLargeError(LabError, ValueError):
    pass


class PoleError(LabError, ZeroDivisionError):
    pass


class UnsupportedForComplexError(LabError, TypeError):
    pass
