"""Exception hierarchy shared across the package."""


class CredroError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(CredroError):
    """An input value violates a documented precondition."""


class InfeasibleBoxError(ValidationError):
    """Interval bounds admit no probability vector summing to one."""


class UnsupportedDimensionError(ValidationError):
    """Operation is only defined for a restricted number of classes."""


class UndefinedMetricError(CredroError):
    """Metric is undefined for the given inputs (e.g. single-class AUROC)."""


class UndefinedNormalizationError(CredroError):
    """Normalization is undefined (base accuracy already at 100%)."""


class TrainingError(CredroError):
    """Training diverged or otherwise failed; message names epoch/batch."""


class DataFormatError(CredroError):
    """A file is malformed; message names the offending line or offset."""


class ChecksumError(DataFormatError):
    """Binary model file failed checksum verification."""


class OracleMismatchError(CredroError):
    """A brute-force oracle disagreed with the implementation under test."""
