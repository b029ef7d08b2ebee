"""Exception types shared across the package."""


class LogitCalibError(Exception):
    """Base class for all structured errors raised by this package."""


class DataError(LogitCalibError):
    """Invalid, malformed, or inconsistent input data."""


class FitError(LogitCalibError):
    """A density or parameter fit could not be performed."""
