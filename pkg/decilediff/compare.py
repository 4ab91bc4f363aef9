"""Row-by-row comparison of a produced coefficient table with a reference one, e.g. an embedded appendix table"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .exceptions import LabelSetMismatch, WrongDegree, InvalidParameter
from .ingest import format_number
from .model import FitTable


@dataclass(frozen=True)
class Tolerances:
    """Absolute tolerances per coefficient column (P1, P2, ...) and for R² (percentage points).
    Columns beyond the given coefficient tolerances reuse the last one"""
    coefficients: Tuple[float, ...] = (0.0,)
    r_squared: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(t) for t in self.coefficients) or (0.0,))
        if any(t < 0 for t in self.coefficients) or self.r_squared < 0:
            raise InvalidParameter("tolerances must not be negative")

    @classmethod
    def from_list(cls, values: Sequence[float]) -> "Tolerances":
        """[t] applies t everywhere; [t1, ..., tk, r] gives coefficient tolerances then the R² tolerance"""
        values = [float(v) for v in values]
        if not values:
            return cls()
        if len(values) == 1:
            return cls((values[0],), values[0])
        return cls(tuple(values[:-1]), values[-1])

    def coefficient(self, column: int) -> float:
        return self.coefficients[min(column, len(self.coefficients) - 1)]


@dataclass(frozen=True)
class RowComparison:
    pair_label: str
    # produced - reference, per coefficient; empty if either side is a failed fit
    coefficient_deltas: Tuple[float, ...]
    r_squared_delta: Optional[float]
    passed: bool
    note: str = ""


@dataclass
class ComparisonReport:
    rows: List[RowComparison] = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(row.passed for row in self.rows)

    @property
    def failed(self) -> int:
        return len(self.rows) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0


def compare_tables(produced: FitTable, reference: FitTable, tolerances: Tolerances = Tolerances()) -> ComparisonReport:
    """Compares two tables with the same pair labels. Rows are reported in reference order"""
    missing = set(reference.labels) - set(produced.labels)
    extra = set(produced.labels) - set(reference.labels)
    if missing or extra:
        raise LabelSetMismatch(missing, extra)
    if produced.degree != reference.degree:
        raise WrongDegree(produced.degree, reference.degree)

    report = ComparisonReport()
    for ref in reference:
        rec = produced[ref.pair_label]
        if not (rec.ok and ref.ok):
            both_failed = not rec.ok and not ref.ok
            note = "both fits failed" if both_failed else f"fit failed in {'produced' if ref.ok else 'reference'} table"
            report.rows.append(RowComparison(ref.pair_label, (), None, both_failed, note))
            continue
        deltas = tuple(a - b for a, b in zip(rec.coefficients, ref.coefficients))
        r2_delta = rec.r_squared_percent - ref.r_squared_percent
        passed = all(abs(d) <= tolerances.coefficient(i) for i, d in enumerate(deltas)) and \
                 abs(r2_delta) <= tolerances.r_squared
        report.rows.append(RowComparison(ref.pair_label, deltas, r2_delta, passed))
    return report


def comparison_header(degree: int) -> List[str]:
    return ["pair"] + [f"d_p{i}" for i in range(1, degree + 2)] + ["d_r2", "passed"]


def comparison_rows(report: ComparisonReport, degree: int) -> List[Dict]:
    names = comparison_header(degree)
    rows = []
    for row in report.rows:
        deltas = list(row.coefficient_deltas) if row.coefficient_deltas else [None] * (degree + 1)
        rows.append(dict(zip(names, [row.pair_label] + deltas + [row.r_squared_delta, row.passed])))
    return rows


def format_comparison(report: ComparisonReport, degree: int, precision: str = "full") -> str:
    def fmt(value):
        if value is None:
            return ""
        if isinstance(value, bool):
            return "pass" if value else "FAIL"
        if isinstance(value, float):
            return format_number(value) if precision == "full" else f"{value:.4g}"
        return str(value)

    lines = [",".join(comparison_header(degree))]
    for row in comparison_rows(report, degree):
        lines.append(",".join(fmt(value) for value in row.values()))
    return "\n".join(lines) + "\n"
