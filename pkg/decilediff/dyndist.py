"""Difference distributions between two years of decile data.

For two years of the same decile measure, the per-decile changes are ranked in ascending order and each is
paired with the share of the population whose change is strictly larger. For the mean measure the smallest
change gets 90% and the largest 0%; for the lower-limit measure the smallest gets 100% and the largest 10%.
The changes are used as they are (linear scale, no partial sums).
"""
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .exceptions import MetaMismatch, NotChronological, InvalidSeries
from .ingest import DatasetManifest, format_number
from .model import NUM_DECILES, DecileSeries, SeriesMeta, Measure, MeasureKind

PERCENT_LADDERS = {
    MeasureKind.mean:        (90.0, 80.0, 70.0, 60.0, 50.0, 40.0, 30.0, 20.0, 10.0, 0.0),
    MeasureKind.lower_limit: (100.0, 90.0, 80.0, 70.0, 60.0, 50.0, 40.0, 30.0, 20.0, 10.0),
}


def percentage_ladder(measure: Measure) -> Tuple[float, ...]:
    return PERCENT_LADDERS[measure.kind]


def pair_label(earlier: str, later: str) -> str:
    return f"{later}/{earlier}"


@dataclass(frozen=True)
class DifferenceSet:
    """deltas[i] is the change in decile i+1 from the earlier to the later year"""
    earlier_label: str
    later_label: str
    deltas: Tuple[float, ...]
    meta: SeriesMeta

    def __post_init__(self):
        deltas = tuple(float(d) for d in self.deltas)
        if len(deltas) != NUM_DECILES or not all(math.isfinite(d) for d in deltas):
            raise InvalidSeries(f"{self.pair_label}: expected {NUM_DECILES} finite differences, got {deltas}")
        object.__setattr__(self, "deltas", deltas)

    @property
    def pair_label(self):
        return pair_label(self.earlier_label, self.later_label)


@dataclass(frozen=True)
class CumulativePlotSet:
    """Ten (difference, cumulative population percentage) points, differences ascending"""
    points: Tuple[Tuple[float, float], ...]
    measure: Measure
    pair_label: str = ""

    def __post_init__(self):
        points = tuple((float(x), float(p)) for x, p in self.points)
        object.__setattr__(self, "points", points)
        xs = [x for x, _ in points]
        if any(b < a for a, b in zip(xs, xs[1:])):
            raise InvalidSeries(f"{self.pair_label}: plot set x values must be ascending")
        if tuple(p for _, p in points) != percentage_ladder(self.measure):
            raise InvalidSeries(f"{self.pair_label}: percentages do not match the {self.measure} ladder")

    @property
    def xs(self) -> np.ndarray:
        return np.array([x for x, _ in self.points])

    @property
    def ps(self) -> np.ndarray:
        return np.array([p for _, p in self.points])

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def diff_series(earlier: DecileSeries, later: DecileSeries,
                chronology: Optional[DatasetManifest] = None) -> DifferenceSet:
    """Per-decile differences later - earlier. The two years need not be consecutive.

    If a manifest is given, later must come after earlier in its chronology."""
    first, second = earlier.meta, later.meta
    for name in SeriesMeta.FIELDS:
        if getattr(first, name) != getattr(second, name):
            raise MetaMismatch(name, getattr(first, name), getattr(second, name))
    if chronology is not None:
        if chronology.position(later.label) <= chronology.position(earlier.label):
            raise NotChronological(earlier.label, later.label)
    elif earlier.label == later.label:
        raise NotChronological(earlier.label, later.label)
    deltas = np.subtract(later.values, earlier.values)
    return DifferenceSet(earlier.label, later.label, tuple(deltas.tolist()), first)


def build_plot_set(diffs: DifferenceSet) -> CumulativePlotSet:
    # stable sort: equal differences keep decile order
    xs = np.sort(np.asarray(diffs.deltas), kind="stable")
    ladder = percentage_ladder(diffs.meta.measure)
    return CumulativePlotSet(tuple(zip(xs.tolist(), ladder)), diffs.meta.measure, diffs.pair_label)


def format_plot_set(plot_set: CumulativePlotSet) -> str:
    lines = ["x,p"] + [f"{format_number(x)},{format_number(p)}" for x, p in plot_set.points]
    return "\n".join(lines) + "\n"


def plot_set_rows(plot_set: CumulativePlotSet) -> Sequence[dict]:
    return [dict(x=x, p=p) for x, p in plot_set.points]
