# tsvf/errors.py
"""
Exception hierarchy. Library code raises these; only tsvf.cli maps them to
exit codes.
"""


class TsvfError(Exception):
    pass


class DimensionError(TsvfError, ValueError):
    pass


class ZeroStateError(TsvfError, ValueError):
    pass


class NotHermitianError(TsvfError, ValueError):
    pass


class NotProjectorError(TsvfError, ValueError):
    pass


class NullEnsembleError(TsvfError):
    """The pre/post-selection is incompatible with measuring this observable."""


class TimeWindowError(TsvfError, ValueError):
    pass


class OrthogonalSelectionError(TsvfError):
    """Pre- and post-selected states are orthogonal; the weak value is undefined."""


class NotMeasurableError(TsvfError, ValueError):
    pass


class ConfigError(TsvfError, ValueError):
    pass


class SearchFailedError(TsvfError):
    pass


class ProblemFileError(TsvfError, ValueError):
    pass
