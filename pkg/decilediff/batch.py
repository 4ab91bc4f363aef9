"""Fits across all year pairs of a panel: coefficient tables, the degree/lag grid and slope-sign analysis"""
import statistics
from dataclasses import dataclass
from multiprocessing.pool import ThreadPool
from typing import Iterable, List, Optional, Sequence, Tuple

import decilediff
from .basetypes import EmptyListDefault, LabelledEnum
from .dyndist import diff_series, build_plot_set
from .exceptions import FitError, InsufficientSeries, InvalidDegree, InvalidParameter, MetaMismatch, WrongDegree
from .ingest import DatasetManifest, format_number
from .model import DecileSeries, FitRecord, FitTable, FitTableMeta, SeriesMeta
from .polyfit import fit

__all__ = ["FitTable", "GridRow", "GridResult", "SlopeSign", "R2Summary", "pair_fits", "degree_lag_grid",
           "slope_sign_report", "positive_slopes", "r2_summary", "format_grid", "grid_rows"]

MAX_DEGREE = 9
GRID_HEADER = ["lag", "degree", "mean_r2", "min_r2", "max_r2", "pairs"]


def _check_panel(series: Sequence[DecileSeries]):
    if not series:
        raise InsufficientSeries(0, 1)
    first = series[0].meta
    for item in series[1:]:
        for name in SeriesMeta.FIELDS:
            if getattr(item.meta, name) != getattr(first, name):
                raise MetaMismatch(name, getattr(first, name), getattr(item.meta, name))


def _fit_pair(args) -> FitRecord:
    earlier, later, degree, chronology = args
    diffs = diff_series(earlier, later, chronology)
    try:
        result = fit(build_plot_set(diffs), degree)
    except FitError as exc:
        decilediff.logger().warning(f"{diffs.pair_label}: {exc}")
        return FitRecord.failed(diffs.pair_label, f"{type(exc).__name__}: {exc}")
    decilediff.logger().debug(f"{diffs.pair_label}: coefficients {result.coefficients}, R² {result.r_squared_percent:.2f}%")
    return result.to_record(diffs.pair_label)


def pair_fits(series: Sequence[DecileSeries], lag: int, degree: int,
              chronology: Optional[DatasetManifest] = None,
              include_span: bool = False, workers: int = 1) -> FitTable:
    """Fits every pair (series[i], series[i+lag]) of a chronologically ordered panel.

    A pair whose fit fails is kept in the table as an error record. If include_span is set, the first-to-last
    pair is appended as well (unless lag already covers it). Pairs are fitted on `workers` threads; the table
    is always in chronological order."""
    if degree < 1:
        raise InvalidDegree(degree)
    if lag < 1:
        raise InvalidParameter(f"lag must be at least 1, got {lag}")
    _check_panel(series)
    if len(series) < lag + 1:
        raise InsufficientSeries(len(series), lag)
    jobs = [(series[i], series[i + lag], degree, chronology) for i in range(len(series) - lag)]
    if include_span and lag != len(series) - 1:
        jobs.append((series[0], series[-1], degree, chronology))

    if workers > 1 and len(jobs) > 1:
        with ThreadPool(min(workers, len(jobs))) as pool:
            records = pool.map(_fit_pair, jobs)
    else:
        records = [_fit_pair(job) for job in jobs]

    meta = series[0].meta
    return FitTable(FitTableMeta(degree=degree, variable_kind=meta.variable_kind, measure=meta.measure,
                                 basis=meta.basis), tuple(records))


@dataclass(frozen=True)
class GridRow:
    lag: int
    degree: int
    mean_r2: float
    min_r2: float
    max_r2: float
    pairs: int


@dataclass
class GridResult:
    rows: List[GridRow] = EmptyListDefault()
    # (lag, degree) cells with no fittable pair
    absent: List[Tuple[int, int]] = EmptyListDefault()

    def cell(self, lag: int, degree: int) -> Optional[GridRow]:
        for row in self.rows:
            if row.lag == lag and row.degree == degree:
                return row
        return None


def degree_lag_grid(series: Sequence[DecileSeries], degrees: Iterable[int], lags: Iterable[int],
                    chronology: Optional[DatasetManifest] = None, workers: int = 1) -> GridResult:
    """Summarizes R² over all pairs for every (lag, degree) combination, sorted by (lag, degree)"""
    degrees, lags = sorted(set(degrees)), sorted(set(lags))
    if not degrees or not lags:
        raise InvalidParameter("degree and lag sets must not be empty")
    for degree in degrees:
        if not 1 <= degree <= MAX_DEGREE:
            raise InvalidParameter(f"degree must be between 1 and {MAX_DEGREE}, got {degree}")
    _check_panel(series)
    log = decilediff.logger()
    grid = GridResult()
    for lag in lags:
        for degree in degrees:
            if lag < 1 or len(series) < lag + 1:
                grid.absent.append((lag, degree))
                continue
            table = pair_fits(series, lag, degree, chronology=chronology, workers=workers)
            values = [rec.r_squared_percent for rec in table if rec.ok]
            if not values:
                grid.absent.append((lag, degree))
                continue
            row = GridRow(lag, degree, statistics.fmean(values), min(values), max(values), len(values))
            log.debug(f"lag {lag} degree {degree}: mean R² {row.mean_r2:.2f}% over {row.pairs} pair(s)")
            grid.rows.append(row)
    return grid


def format_grid(grid: GridResult) -> str:
    lines = [",".join(GRID_HEADER)]
    for row in grid.rows:
        lines.append(",".join([str(row.lag), str(row.degree), format_number(row.mean_r2),
                               format_number(row.min_r2), format_number(row.max_r2), str(row.pairs)]))
    return "\n".join(lines) + "\n"


def grid_rows(grid: GridResult) -> List[dict]:
    return [dict(zip(GRID_HEADER, (row.lag, row.degree, row.mean_r2, row.min_r2, row.max_r2, row.pairs)))
            for row in grid.rows]


class SlopeSign(LabelledEnum):
    positive = "positive"
    negative = "negative"
    zero = "zero"


ZERO_SLOPE = 1e-12


def slope_sign_report(table: FitTable) -> List[Tuple[str, SlopeSign]]:
    """Classifies each successful record of a straight-line table by the sign of its slope P1"""
    if table.degree != 1:
        raise WrongDegree(table.degree, 1)
    report = []
    for rec in table:
        if not rec.ok:
            continue
        if abs(rec.p1) < ZERO_SLOPE:
            sign = SlopeSign.zero
        else:
            sign = SlopeSign.positive if rec.p1 > 0 else SlopeSign.negative
        report.append((rec.pair_label, sign))
    return report


def positive_slopes(table: FitTable) -> List[str]:
    return [label for label, sign in slope_sign_report(table) if sign is SlopeSign.positive]


@dataclass(frozen=True)
class R2Summary:
    count: int
    above: int
    below_labels: Tuple[str, ...]
    mean_r2: float
    threshold: float
    failed: int = 0

    @property
    def below(self):
        return len(self.below_labels)


def r2_summary(table: FitTable, threshold: float = 80.0) -> R2Summary:
    """Counts fits at or above an R² threshold (percent); labels those below it"""
    fitted = [rec for rec in table if rec.ok]
    below = tuple(rec.pair_label for rec in fitted if rec.r_squared_percent < threshold)
    mean = statistics.fmean(rec.r_squared_percent for rec in fitted) if fitted else float("nan")
    return R2Summary(count=len(fitted), above=len(fitted) - len(below), below_labels=below, mean_r2=mean,
                     threshold=threshold, failed=len(table) - len(fitted))
