"""Synthetic household microdata from parametric income models, and its aggregation into income-ranked deciles.

Incomes follow one of the classic models (exponential/Boltzmann-Gibbs, lognormal/Gibrat, Pareto). Expenditure is
made-up scaffolding, not an economic model: disposable expenditure is a fixed propensity of income with bounded
multiplicative noise, and gross expenditure adds a fixed indirect-tax wedge on top.

Random numbers come from numpy's PCG64 bit generator, so a seed reproduces a sample exactly.
"""
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Type

import numpy as np

import decilediff
from .exceptions import InvalidParameter, NotDivisibleByTen, EmptyInput
from .ingest import DatasetManifest
from .model import (NUM_DECILES, DecileSeries, SeriesMeta, VariableKind, Variable, Flow, Measure, MeasureKind,
                    Basis, Period)

RNG_ALGORITHM = "PCG64"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class HouseholdRecord:
    income: float
    expenditure_gross: float
    expenditure_disposable: float

    def __post_init__(self):
        if not self.income > 0:
            raise InvalidParameter(f"household income must be positive, got {self.income}")
        if not (self.expenditure_gross >= 0 and self.expenditure_disposable >= 0):
            raise InvalidParameter("household expenditure must not be negative")

    def select(self, variable_kind: VariableKind) -> float:
        """The value of the given variable for this household"""
        if variable_kind.variable is Variable.income:
            return self.income
        if variable_kind.flow is Flow.gross:
            return self.expenditure_gross
        return self.expenditure_disposable


class IncomeModel(ABC):
    """A parametric income distribution"""
    name = None

    @abstractmethod
    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        pass

    @property
    @abstractmethod
    def mean(self) -> float:
        pass

    @staticmethod
    def _positive(name, value):
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise InvalidParameter(f"{name} must be a positive number, got {value}")


@dataclass(frozen=True)
class ExponentialIncome(IncomeModel):
    """Boltzmann-Gibbs: P(x) ~ exp(-x/T)"""
    temperature: float
    name = "exponential"

    def __post_init__(self):
        self._positive("temperature", self.temperature)

    def sample(self, rng, n):
        return rng.exponential(self.temperature, n)

    @property
    def mean(self):
        return float(self.temperature)


@dataclass(frozen=True)
class LognormalIncome(IncomeModel):
    """Gibrat: log(x) is normal with mean mu and standard deviation sigma"""
    mu: float
    sigma: float
    name = "lognormal"

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise InvalidParameter(f"mu must be finite, got {self.mu}")
        self._positive("sigma", self.sigma)

    def sample(self, rng, n):
        return rng.lognormal(self.mu, self.sigma, n)

    @property
    def mean(self):
        return math.exp(self.mu + self.sigma ** 2 / 2)


@dataclass(frozen=True)
class ParetoIncome(IncomeModel):
    """Pareto tail: P(X > x) = (xmin/x)^alpha for x >= xmin"""
    alpha: float
    xmin: float
    name = "pareto"

    def __post_init__(self):
        self._positive("alpha", self.alpha)
        self._positive("xmin", self.xmin)

    def sample(self, rng, n):
        # numpy's pareto() is the Lomax (shifted) form
        return self.xmin * (1.0 + rng.pareto(self.alpha, n))

    @property
    def mean(self):
        return self.alpha * self.xmin / (self.alpha - 1) if self.alpha > 1 else math.inf


INCOME_MODELS: Dict[str, Type[IncomeModel]] = {
    cls.name: cls for cls in (ExponentialIncome, LognormalIncome, ParetoIncome)
}


def make_income_model(name: str, **params) -> IncomeModel:
    cls = INCOME_MODELS.get(name)
    if cls is None:
        raise InvalidParameter(f"unknown income model '{name}', expected one of: {', '.join(INCOME_MODELS)}")
    try:
        return cls(**params)
    except TypeError as exc:
        raise InvalidParameter(f"{name} model: {exc}")


@dataclass(frozen=True)
class ExpenditureRule:
    propensity: float = 0.8     # share of income spent, in (0, 1]
    noise: float = 0.1          # half-width of the uniform multiplicative noise, in [0, 1)
    tax_wedge: float = 0.2      # gross = disposable * (1 + tax_wedge)

    def __post_init__(self):
        if not 0 < self.propensity <= 1:
            raise InvalidParameter(f"propensity must be in (0, 1], got {self.propensity}")
        if not 0 <= self.noise < 1:
            raise InvalidParameter(f"noise must be in [0, 1), got {self.noise}")
        if not self.tax_wedge >= 0:
            raise InvalidParameter(f"tax wedge must not be negative, got {self.tax_wedge}")


def _records(income: np.ndarray, disposable: np.ndarray, wedge: float) -> List[HouseholdRecord]:
    gross = disposable * (1 + wedge)
    return [HouseholdRecord(float(i), float(g), float(d)) for i, g, d in zip(income, gross, disposable)]


def sample_households(model: IncomeModel, n: int, rule: ExpenditureRule = ExpenditureRule(),
                      seed: int = 0, rng: Optional[np.random.Generator] = None) -> List[HouseholdRecord]:
    """Draws n households. Incomes come first from the stream, then the expenditure noise"""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidParameter(f"number of households must be a positive integer, got {n}")
    rng = rng or make_rng(seed)
    # a zero draw has probability ~2^-53, but income must stay strictly positive
    income = np.maximum(model.sample(rng, n), np.finfo(float).tiny)
    noise = rng.uniform(-rule.noise, rule.noise, n) if rule.noise else np.zeros(n)
    disposable = rule.propensity * income * (1 + noise)
    return _records(income, disposable, rule.tax_wedge)


def _income_order(records: Sequence[HouseholdRecord]) -> np.ndarray:
    # equal incomes keep their list order
    return np.argsort(np.array([rec.income for rec in records]), kind="stable")


def deciles_from_microdata(records: Sequence[HouseholdRecord], variable_kind: VariableKind, measure: Measure,
                           label: str, unit: str = "", period: Period = Period.annual,
                           basis: Basis = Basis()) -> DecileSeries:
    """Ranks households by income, splits them into ten equal groups and reduces each group to its mean
    (measure = mean) or its minimum (measure = lower limit) of the selected variable"""
    if not records:
        raise EmptyInput("household records")
    if len(records) % NUM_DECILES:
        raise NotDivisibleByTen(len(records))
    values = np.array([rec.select(variable_kind) for rec in records])[_income_order(records)]
    groups = values.reshape(NUM_DECILES, -1)
    if measure.kind is MeasureKind.mean:
        reduced = groups.mean(axis=1)
    else:
        reduced = groups.min(axis=1)
    return DecileSeries(label, variable_kind, measure, basis, period, unit, tuple(reduced.tolist()))


def grow_households(records: Sequence[HouseholdRecord], growth: float, rank_tilt: float = 0.0) -> List[HouseholdRecord]:
    """Scales every household by 1 + growth + rank_tilt * r, with r its income rank in [0, 1].

    Income rank order is kept as long as every factor is positive and rank_tilt >= 0"""
    n = len(records)
    ranks = np.empty(n)
    ranks[_income_order(records)] = np.arange(n) / max(n - 1, 1)
    factors = 1.0 + growth + rank_tilt * ranks
    if np.any(factors <= 0):
        raise InvalidParameter(f"growth {growth} with rank tilt {rank_tilt} makes incomes non-positive")
    return [HouseholdRecord(rec.income * f, rec.expenditure_gross * f, rec.expenditure_disposable * f)
            for rec, f in zip(records, factors.tolist())]


def synth_panel(model: IncomeModel, labels: Sequence[str], n: int, meta: SeriesMeta,
                growth: float = 0.02, rank_tilt: float = 0.0, volatility: float = 0.0,
                rule: ExpenditureRule = ExpenditureRule(), seed: int = 0) -> Tuple[List[DecileSeries], DatasetManifest]:
    """A chronologically ordered panel: one sample of households, grown from year to year.

    Each year's growth rate is `growth`, plus a normal shock of standard deviation `volatility`"""
    if not labels:
        raise InvalidParameter("a panel needs at least one year label")
    rng = make_rng(seed)
    households = sample_households(model, n, rule, rng=rng)
    panel = []
    for position, label in enumerate(labels):
        if position:
            rate = growth + (rng.normal(0.0, volatility) if volatility else 0.0)
            households = grow_households(households, rate, rank_tilt)
        panel.append(deciles_from_microdata(households, meta.variable_kind, meta.measure, str(label),
                                            meta.unit, meta.period, meta.basis))
    decilediff.logger().debug(f"synthesized {len(panel)} years from {n} {model.name} households")
    notes = f"synthetic {model} households={n} seed={seed} rng={RNG_ALGORITHM}"
    return panel, DatasetManifest([str(label) for label in labels], meta.unit, notes)


def linear_panel(base_values: Sequence[float], labels: Sequence[str], step: float,
                 meta: SeriesMeta) -> List[DecileSeries]:
    """A panel where decile i grows by exactly step * i per year, so every pair's plot set lies on a line"""
    base = np.asarray(base_values, dtype=float)
    growth = step * np.arange(1, NUM_DECILES + 1)
    return [DecileSeries.from_meta(str(label), meta, base + position * growth)
            for position, label in enumerate(labels)]
