"""Exception hierarchy.

The CLI maps ``DataError`` to exit code 2 and ``FitError`` to exit code 3.
"""


class GravfitError(Exception):
    pass


# data ingestion / design construction --------------------------------------


class DataError(GravfitError):
    pass


class NetworkError(DataError):
    """Download failed; safe to retry."""

    retryable = True

    def __init__(self, url, reason):
        super().__init__(f"failed to fetch {url}: {reason}")
        self.url = url
        self.reason = reason


class ArchiveFormatError(DataError):
    pass


class MissingMemberError(DataError):
    pass


class UnsupportedVersionError(DataError):
    def __init__(self, version):
        super().__init__(
            f"unsupported .dta format version byte {version!r}; "
            "only legacy versions 104-115 are readable, convert the file to CSV instead"
        )
        self.version = version


class TruncatedFileError(DataError):
    def __init__(self, offset, needed, what="data"):
        super().__init__(f"file truncated at byte offset {offset}: needed {needed} more bytes for {what}")
        self.offset = offset


class CSVParseError(DataError):
    def __init__(self, row, column, value):
        super().__init__(f"non-numeric cell {value!r} at row {row}, column {column!r}")
        self.row = row
        self.column = column


class EmptyInputError(DataError):
    pass


class ColumnNameError(DataError, KeyError):
    def __init__(self, name):
        DataError.__init__(self, f"no column named {name!r}")
        self.name = name

    def __str__(self):
        return self.args[0]


class DomainError(DataError, ValueError):
    pass


class MissingValueError(DataError):
    pass


class EmptyDesignError(DataError):
    pass


# numerics -------------------------------------------------------------------


class FitError(GravfitError):
    pass


class RankDeficiencyError(FitError):
    def __init__(self, column, index):
        super().__init__(f"design matrix is rank deficient: column {column!r} (index {index}) is linearly dependent")
        self.column = column
        self.index = index


class DefinitenessError(FitError):
    def __init__(self, pivot):
        super().__init__(f"matrix is not positive definite (pivot {pivot})")
        self.pivot = pivot


class NonConvergenceError(FitError):
    def __init__(self, message, last_iterate=None, trace=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.trace = trace


class DivergenceError(FitError):
    pass


class SearchFailureError(FitError):
    def __init__(self, message, a, trace=None):
        super().__init__(message)
        self.a = a
        self.trace = trace
