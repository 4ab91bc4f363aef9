from typing import Iterable, Optional, Tuple

logger = None

def set_logger(log):
    global logger
    logger = log


class Error(str):
    """A string that's marked as an error"""
    pass


class DecileDiffBaseException(Exception):
    """Base of all decilediff errors. Subclasses define the process exit code the CLI maps them to"""
    exit_code = 1

    def __init__(self, message, log=None):
        Exception.__init__(self, message)
        if log is not None:
            if not hasattr(log, 'error'):
                log = logger
            if log is not None:
                log.error(message)
        self.logged = log is not None


# --- parse errors (exit code 2)

class ParseError(DecileDiffBaseException):
    exit_code = 2

class EmptyInput(ParseError):
    def __init__(self, source: str = "input"):
        self.source = source
        super().__init__(f"{source}: no data rows")

class HeaderMismatch(ParseError):
    def __init__(self, source: str, expected: str, found: str):
        self.expected, self.found = expected, found
        super().__init__(f"{source}: line 1: expected header '{expected}', found '{found}'")

class WrongColumnCount(ParseError):
    def __init__(self, source: str, row: int, expected: int, found: int):
        self.row, self.expected, self.found = row, expected, found
        super().__init__(f"{source}: line {row}: expected {expected} fields, found {found}")

class NonNumericField(ParseError):
    def __init__(self, source: str, row: int, col: int, token: str):
        self.row, self.col, self.token = row, col, token
        super().__init__(f"{source}: line {row}, column {col}: '{token}' is not a finite number")

class DuplicateSeries(ParseError):
    def __init__(self, source: str, row: int, key: Tuple):
        self.row, self.key = row, key
        super().__init__(f"{source}: line {row}: duplicate series '{key[0]}'")

class NonPositiveIndex(ParseError):
    def __init__(self, source: str, row: int, value: float):
        self.row, self.value = row, value
        super().__init__(f"{source}: line {row}: deflator index {value} is not a positive finite number")

class DuplicateYear(ParseError):
    def __init__(self, source: str, row: int, label: str):
        self.row, self.label = row, label
        super().__init__(f"{source}: line {row}: year '{label}' appears more than once")


# --- validation errors (exit code 3)

class DecileValidationError(DecileDiffBaseException):
    exit_code = 3

class InvalidSeries(DecileValidationError):
    pass

class MetaMismatch(DecileValidationError):
    def __init__(self, field: str, first, second):
        self.field = field
        super().__init__(f"series disagree on {field}: {first} vs {second}")

class NotChronological(DecileValidationError):
    def __init__(self, earlier: str, later: str):
        self.earlier, self.later = earlier, later
        super().__init__(f"'{later}' does not follow '{earlier}' in the chronology")

class UnknownLabel(DecileValidationError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"'{label}' is not in the dataset chronology")

class MissingDeflatorYear(DecileValidationError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"deflator has no index for '{label}'")

class AlreadyReal(DecileValidationError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"series '{label}' is already in real terms")

class InvalidParameter(DecileValidationError):
    pass

class NotDivisibleByTen(DecileValidationError):
    def __init__(self, count: int):
        self.count = count
        super().__init__(f"{count} records cannot be split into ten equal deciles")

class InsufficientSeries(DecileValidationError):
    def __init__(self, count: int, lag: int):
        self.count, self.lag = count, lag
        super().__init__(f"lag {lag} needs at least {lag + 1} series, got {count}")

class WrongDegree(DecileValidationError):
    def __init__(self, degree, expected: int = 1):
        self.degree = degree
        super().__init__(f"expected a degree-{expected} table, got degree {degree}")

class LabelSetMismatch(DecileValidationError):
    def __init__(self, missing: Iterable[str], extra: Iterable[str]):
        self.missing, self.extra = sorted(missing), sorted(extra)
        parts = []
        if self.missing:
            parts.append(f"missing from produced table: {', '.join(self.missing)}")
        if self.extra:
            parts.append(f"not in reference table: {', '.join(self.extra)}")
        super().__init__("pair labels differ; " + "; ".join(parts))

class ManifestError(DecileValidationError):
    pass

class SchemaError(DecileValidationError):
    pass

class ParameterValidationError(DecileValidationError):
    pass


# --- fit errors (exit code 4)

class FitError(DecileDiffBaseException):
    exit_code = 4

class InvalidDegree(FitError):
    def __init__(self, degree):
        self.degree = degree
        super().__init__(f"polynomial degree must be at least 1, got {degree}")

class DegreeTooHigh(FitError):
    def __init__(self, degree: int, npoints: int):
        self.degree, self.npoints = degree, npoints
        super().__init__(f"degree {degree} needs at least {degree + 1} points, got {npoints}")

class RankDeficient(FitError):
    def __init__(self, degree: int, distinct: int):
        self.degree, self.distinct = degree, distinct
        super().__init__(f"degree {degree} needs at least {degree + 1} distinct x values, got {distinct}")

class DegenerateVariance(FitError):
    def __init__(self, ss_res: float):
        self.ss_res = ss_res
        super().__init__(f"constant data with nonzero residual sum of squares {ss_res:g}")


# --- I/O errors (exit code 5)

class FileIOError(DecileDiffBaseException):
    exit_code = 5

class MissingFile(FileIOError):
    def __init__(self, name: str, path: str):
        self.name, self.path = name, path
        super().__init__(f"'{name}': {path} doesn't exist")


EXIT_CODES = {
    0: "success",
    ParseError.exit_code: "parse error",
    DecileValidationError.exit_code: "validation error",
    FitError.exit_code: "fit error",
    FileIOError.exit_code: "I/O error",
}

def exit_code_for(exc: Optional[BaseException]) -> int:
    if exc is None:
        return 0
    if isinstance(exc, DecileDiffBaseException):
        return exc.exit_code
    if isinstance(exc, OSError):
        return FileIOError.exit_code
    return 1
