"""Reading and writing the delimited text formats: decile tables, deflators, fit tables and dataset manifests.

All formats are UTF-8, comma-separated, '.' decimal mark, with a mandatory header row:

    decile table:   label,d1,d2,...,d10
    deflator:       year,index
    fit table:      pair,p1,p2,r2        (pair,p1,...,p<d+1>,r2 for degree d)
"""
import csv
import math
import dataclasses
import os.path
import re
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import yaml
from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

import decilediff
from .basetypes import EmptyListDefault
from .exceptions import (EmptyInput, HeaderMismatch, WrongColumnCount, NonNumericField, DuplicateSeries,
                         NonPositiveIndex, DuplicateYear, InvalidSeries, MissingDeflatorYear, AlreadyReal,
                         ManifestError, UnknownLabel, FileIOError)
from .model import (NUM_DECILES, DecileSeries, SeriesMeta, Basis, FitRecord, FitTable, FitTableMeta, VariableKind,
                    Measure, validate_series, check_conventions)

DECILE_HEADER = ["label"] + [f"d{i}" for i in range(1, NUM_DECILES + 1)]
DEFLATOR_HEADER = ["year", "index"]

# plain decimal or scientific notation; rejects nan/inf, thousands separators and underscores
_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")


def fit_header(degree: int) -> List[str]:
    return ["pair"] + [f"p{i}" for i in range(1, degree + 2)] + ["r2"]


def format_number(value: float) -> str:
    """Shortest text that parses back to exactly the same float"""
    return np.format_float_positional(value, trim="-")


def _parse_number(token: str, source: str, row: int, col: int) -> float:
    text = token.strip()
    if not _NUMBER.fullmatch(text):
        raise NonNumericField(source, row, col, token)
    value = float(text)
    # "1e400" matches the grammar but overflows
    if not math.isfinite(value):
        raise NonNumericField(source, row, col, token)
    return value


def _rows(text: str, header: Sequence[str], source: str, variable_width=False) -> Iterator[Tuple[int, List[str]]]:
    """Checks the header, then yields (line number, fields) for every non-blank data row.
    If variable_width is set, only the first and last header names are checked, and the header width is used
    for the rest of the file"""
    lines = text.splitlines()
    reader = csv.reader(lines)
    found = None
    width = len(header)
    for lineno, fields in enumerate(reader, 1):
        if not fields or all(not f.strip() for f in fields):
            continue
        fields = [f.strip() for f in fields]
        if found is None:
            found = fields
            names = [f.lower() for f in fields]
            if variable_width:
                ok = len(names) >= 3 and names[0] == header[0] and names[-1] == header[-1]
                width = len(names)
            else:
                ok = names == list(header)
            if not ok:
                raise HeaderMismatch(source, ",".join(header), ",".join(fields))
            continue
        if len(fields) != width:
            raise WrongColumnCount(source, lineno, width, len(fields))
        yield lineno, fields
    if found is None:
        raise EmptyInput(source)


def parse_decile_table(text: str, meta: SeriesMeta, source: str = "decile table", strict=True) -> List[DecileSeries]:
    """Parses a decile table into series, one per row, in row order.
    If strict is set, a series violating the model invariants raises InvalidSeries; otherwise it is returned as is
    and left for validate_series() to report"""
    log = decilediff.logger()
    series = []
    keys = set()
    for lineno, fields in _rows(text, DECILE_HEADER, source):
        values = [_parse_number(tok, source, lineno, col) for col, tok in enumerate(fields[1:], 2)]
        item = DecileSeries.from_meta(fields[0], meta, values)
        if item.key in keys:
            raise DuplicateSeries(source, lineno, item.key)
        keys.add(item.key)
        violations = validate_series(item)
        if violations and strict:
            raise InvalidSeries(f"{source}: line {lineno}: {'; '.join(violations)}")
        for warning in check_conventions(item):
            log.warning(warning)
        series.append(item)
    if not series:
        raise EmptyInput(source)
    log.debug(f"{source}: read {len(series)} decile series")
    return series


def format_decile_table(series: Sequence[DecileSeries]) -> str:
    lines = [",".join(DECILE_HEADER)]
    for item in series:
        lines.append(",".join([item.label] + [format_number(v) for v in item.values]))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Deflator:
    """Price index by year label, used to convert nominal values to real ones"""
    index: Dict[str, float]
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "index", dict(self.index))
        for row, (label, value) in enumerate(self.index.items(), 2):
            if not (value > 0 and math.isfinite(value)):
                raise NonPositiveIndex(self.description or "deflator", row, value)

    def __getitem__(self, label):
        try:
            return self.index[label]
        except KeyError:
            raise MissingDeflatorYear(label)

    def __contains__(self, label):
        return label in self.index


def parse_deflator(text: str, description: str = "", source: str = "deflator") -> Deflator:
    index = {}
    for lineno, (label, token) in _rows(text, DEFLATOR_HEADER, source):
        value = _parse_number(token, source, lineno, 2)
        if label in index:
            raise DuplicateYear(source, lineno, label)
        if value <= 0:
            raise NonPositiveIndex(source, lineno, value)
        index[label] = value
    return Deflator(index, description or source)


def to_real(series: DecileSeries, deflator: Deflator, base_year: str) -> DecileSeries:
    """Expresses a nominal series in the prices of base_year: v * index[base_year] / index[label]"""
    if series.basis.is_real:
        raise AlreadyReal(series.label)
    base_year = str(base_year)
    factor = deflator[base_year] / deflator[series.label]
    return dataclasses.replace(series, values=tuple(v * factor for v in series.values), basis=Basis.real(base_year))


def parse_fit_table(text: str, meta: Optional[FitTableMeta] = None, source: str = "fit table") -> FitTable:
    """Parses a coefficient table. The degree is inferred from the header (pair,p1,...,r2) unless meta gives it.
    Rows with all numeric fields empty are failed fits and become error records"""
    records = []
    degree = None
    for lineno, fields in _rows(text, fit_header(1), source, variable_width=True):
        degree = len(fields) - 3
        label, numbers = fields[0], fields[1:]
        if all(not tok for tok in numbers):
            records.append(FitRecord.failed(label, "fit failed"))
            continue
        values = [_parse_number(tok, source, lineno, col) for col, tok in enumerate(numbers, 2)]
        records.append(FitRecord(label, tuple(values[:-1]), values[-1]))
    if degree is None:
        raise EmptyInput(source)
    if meta is None:
        meta = FitTableMeta(degree=degree)
    elif meta.degree != degree:
        meta = dataclasses.replace(meta, degree=degree)
    return FitTable(meta, tuple(records))


def _format_fixed(value: float, precision: str, r2=False) -> str:
    if precision == "full":
        return format_number(value)
    if r2:
        return f"{value:.2f}"
    return f"{value:.4g}"


def format_fit_table(table: FitTable, precision: str = "appendix") -> str:
    """Formats a fit table. precision is "appendix" (4 significant digits, R² to 2 decimals) or "full"
    (shortest exact representation)"""
    ncoeff = table.degree + 1
    lines = [",".join(fit_header(table.degree))]
    for rec in table.records:
        if rec.ok:
            fields = [_format_fixed(c, precision) for c in rec.coefficients]
            fields.append(_format_fixed(rec.r_squared_percent, precision, r2=True))
        else:
            fields = [""] * (ncoeff + 1)
        lines.append(",".join([rec.pair_label] + fields))
    return "\n".join(lines) + "\n"


def fit_table_rows(table: FitTable) -> List[Dict]:
    """Fit table as a list of dicts keyed by the CSV column names, for JSON output"""
    names = fit_header(table.degree)
    rows = []
    for rec in table.records:
        values = list(rec.coefficients) + [rec.r_squared_percent] if rec.ok else [None] * (len(names) - 1)
        row = dict(zip(names, [rec.pair_label] + values))
        if not rec.ok:
            row["error"] = str(rec.error)
        rows.append(row)
    return rows


@dataclass
class DatasetManifest:
    """Chronological ordering of the (opaque) year labels of a dataset"""
    chronology: List[str] = EmptyListDefault()
    unit: str = ""
    notes: str = ""

    def __post_init__(self):
        self.chronology = [str(label) for label in self.chronology]
        seen = set()
        for label in self.chronology:
            if label in seen:
                raise ManifestError(f"chronology lists '{label}' more than once")
            seen.add(label)

    def position(self, label: str) -> int:
        try:
            return self.chronology.index(label)
        except ValueError:
            raise UnknownLabel(label)

    def order(self, series: Sequence[DecileSeries]) -> List[DecileSeries]:
        """Returns the series sorted by chronology"""
        return sorted(series, key=lambda item: self.position(item.label))


def load_manifest(path: str) -> DatasetManifest:
    try:
        conf = OmegaConf.merge(OmegaConf.structured(DatasetManifest), OmegaConf.load(path))
    except OSError as exc:
        raise FileIOError(f"{path}: {exc.strerror or exc}")
    except OmegaConfBaseException as exc:
        raise ManifestError(f"{path}: {exc}")
    except yaml.YAMLError as exc:
        raise ManifestError(f"{path}: invalid YAML: {exc}")
    return DatasetManifest(**OmegaConf.to_container(conf))


def format_manifest(manifest: DatasetManifest) -> str:
    return OmegaConf.to_yaml(OmegaConf.structured(manifest))


def manifest_from_series(series: Sequence[DecileSeries], unit: str = "", notes: str = "") -> DatasetManifest:
    """Manifest for series already in chronological order"""
    return DatasetManifest([item.label for item in series], unit, notes)


_APPENDIX_DIR = os.path.join(os.path.dirname(__file__), "appendix")


def _appendix_index() -> Dict:
    return OmegaConf.to_container(OmegaConf.load(os.path.join(_APPENDIX_DIR, "appendix.yml")))


def appendix_titles() -> Dict[int, str]:
    return {int(number): entry["title"] for number, entry in _appendix_index().items()}


def load_appendix(number: int) -> FitTable:
    """Loads one of the five embedded degree-1 coefficient tables (1: mean income ... 5: lower limit on gross
    expenditure)"""
    index = _appendix_index()
    entry = index.get(int(number))
    if entry is None:
        raise UnknownLabel(f"appendix:{number}")
    path = os.path.join(_APPENDIX_DIR, entry["file"])
    with open(path, encoding="utf-8") as stream:
        text = stream.read()
    meta = FitTableMeta(degree=1, variable_kind=VariableKind(entry["variable"], entry["flow"]),
                        measure=Measure(entry["measure"]), title=entry["title"])
    return parse_fit_table(text, meta, source=f"appendix {number}")
