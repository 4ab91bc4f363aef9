"""Domain vocabulary: decile series, their metadata, and fit records/tables.

All types here are frozen dataclasses, so they can be shared freely between threads.
"""
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .basetypes import LabelledEnum
from .exceptions import Error, InvalidSeries, InvalidParameter, WrongDegree, DuplicateSeries

NUM_DECILES = 10


class Variable(LabelledEnum):
    income = "income"
    expenditure = "expenditure"


class Flow(LabelledEnum):
    gross = "gross"
    disposable = "disposable"
    unspecified = "unspecified"


class MeasureKind(LabelledEnum):
    mean = "mean"
    lower_limit = "lower_limit"


class BasisKind(LabelledEnum):
    nominal = "nominal"
    real = "real"


class Period(LabelledEnum):
    annual = "annual"
    weekly = "weekly"


@dataclass(frozen=True)
class VariableKind:
    variable: Variable = Variable.income
    flow: Flow = Flow.unspecified

    def __post_init__(self):
        object.__setattr__(self, "variable", Variable.parse(self.variable))
        object.__setattr__(self, "flow", Flow.parse(self.flow))
        # the income tables do not split gross/disposable, the expenditure tables always do
        if self.flow is Flow.unspecified and self.variable is not Variable.income:
            raise InvalidParameter(f"{self.variable} needs a gross or disposable flow")

    def __str__(self):
        if self.flow is Flow.unspecified:
            return str(self.variable)
        return f"{self.flow} {self.variable}"


@dataclass(frozen=True)
class Measure:
    kind: MeasureKind = MeasureKind.mean

    def __post_init__(self):
        object.__setattr__(self, "kind", MeasureKind.parse(self.kind))

    def __str__(self):
        return self.kind.cli_name


@dataclass(frozen=True)
class Basis:
    kind: BasisKind = BasisKind.nominal
    base_year: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", BasisKind.parse(self.kind))
        if self.kind is BasisKind.real and not self.base_year:
            raise InvalidParameter("a real basis needs a base year")
        if self.kind is BasisKind.nominal and self.base_year is not None:
            raise InvalidParameter("a nominal basis takes no base year")

    @classmethod
    def nominal(cls):
        return cls(BasisKind.nominal)

    @classmethod
    def real(cls, base_year: str):
        return cls(BasisKind.real, str(base_year))

    @property
    def is_real(self):
        return self.kind is BasisKind.real

    def __str__(self):
        return f"real({self.base_year})" if self.is_real else "nominal"


@dataclass(frozen=True)
class SeriesMeta:
    """Everything about a decile series except its label and values"""
    variable_kind: VariableKind = VariableKind()
    measure: Measure = Measure()
    basis: Basis = Basis()
    period: Period = Period.annual
    unit: str = ""

    def __post_init__(self):
        object.__setattr__(self, "period", Period.parse(self.period))

    # order in which mismatches are reported
    FIELDS = ("variable_kind", "measure", "basis", "period", "unit")


@dataclass(frozen=True)
class DecileSeries:
    """One year's ten decile values. values[i] belongs to income decile i+1 (ascending income)"""
    label: str
    variable_kind: VariableKind
    measure: Measure
    basis: Basis
    period: Period
    unit: str
    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) != NUM_DECILES:
            raise InvalidSeries(f"series '{self.label}': expected {NUM_DECILES} decile values, got {len(values)}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "label", str(self.label))
        object.__setattr__(self, "period", Period.parse(self.period))

    @classmethod
    def from_meta(cls, label: str, meta: SeriesMeta, values: Sequence[float]):
        return cls(label, meta.variable_kind, meta.measure, meta.basis, meta.period, meta.unit, tuple(values))

    @property
    def meta(self) -> SeriesMeta:
        return SeriesMeta(self.variable_kind, self.measure, self.basis, self.period, self.unit)

    @property
    def key(self):
        return series_key(self)


def series_key(series: DecileSeries) -> Tuple:
    """Canonical identity of a series; two series with equal keys are duplicates"""
    return (series.label, series.variable_kind, series.measure, series.basis, series.period)


def validate_series(series: DecileSeries) -> List[Error]:
    """Checks a series against the model invariants. Returns a list of violations, empty if the series is valid.
    Never raises and has no side effects."""
    report = []
    values = series.values
    if len(values) != NUM_DECILES:
        report.append(Error(f"expected {NUM_DECILES} decile values, got {len(values)}"))
    bad = [i + 1 for i, v in enumerate(values) if not math.isfinite(v)]
    if bad:
        report.append(Error(f"non-finite values in decile(s) {', '.join(map(str, bad))}"))
    # expenditure deciles are keyed to income rank, so only income must be monotone
    elif series.variable_kind.variable is Variable.income:
        if any(b < a for a, b in zip(values, values[1:])):
            report.append(Error("income deciles not non-decreasing"))
    return report


def check_conventions(series: DecileSeries) -> List[str]:
    """Returns warnings for breaches of the usual data conventions (income annual, expenditure weekly)"""
    expected = Period.annual if series.variable_kind.variable is Variable.income else Period.weekly
    if series.period is not expected:
        return [f"series '{series.label}': {series.variable_kind.variable} data is usually {expected}, got {series.period}"]
    return []


@dataclass(frozen=True)
class FitRecord:
    """One row of a coefficient table. Coefficients are highest power first (P1, P2 for a straight line).

    A pair whose fit failed is kept as a record with no coefficients and an error marker."""
    pair_label: str
    coefficients: Tuple[float, ...] = ()
    r_squared_percent: Optional[float] = None
    error: Optional[Error] = None

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if self.error is None:
            if not self.coefficients:
                raise InvalidParameter(f"{self.pair_label}: fit record without coefficients")
            if self.r_squared_percent is None or not self.r_squared_percent <= 100:
                raise InvalidParameter(f"{self.pair_label}: R² must not exceed 100%, got {self.r_squared_percent}")
        else:
            object.__setattr__(self, "error", Error(self.error))

    @classmethod
    def failed(cls, pair_label: str, error) -> "FitRecord":
        return cls(pair_label, (), None, Error(str(error)))

    @property
    def ok(self):
        return self.error is None

    @property
    def degree(self) -> Optional[int]:
        return len(self.coefficients) - 1 if self.ok else None

    @property
    def p1(self):
        return self.coefficients[0]

    @property
    def p2(self):
        return self.coefficients[1]


@dataclass(frozen=True)
class FitTableMeta:
    degree: int = 1
    variable_kind: Optional[VariableKind] = None
    measure: Optional[Measure] = None
    basis: Optional[Basis] = None
    title: str = ""


@dataclass(frozen=True)
class FitTable:
    """Year-pair-keyed collection of fit records, in chronological order"""
    meta: FitTableMeta
    records: Tuple[FitRecord, ...] = field(default_factory=tuple)

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        seen = set()
        for row, rec in enumerate(records, 2):
            if rec.pair_label in seen:
                raise DuplicateSeries("fit table", row, (rec.pair_label,))
            seen.add(rec.pair_label)
            if rec.ok and rec.degree != self.meta.degree:
                raise WrongDegree(rec.degree, self.meta.degree)

    @property
    def degree(self):
        return self.meta.degree

    @property
    def labels(self) -> List[str]:
        return [rec.pair_label for rec in self.records]

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, label: str) -> FitRecord:
        for rec in self.records:
            if rec.pair_label == label:
                return rec
        raise KeyError(label)
