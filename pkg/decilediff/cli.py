"""decilediff command-line tool.

Flags are generated from the command schemas in commands.yml, validated per command before any work is done,
and collected into a RunConfig. Output files are written atomically (temporary file, then rename).
"""
import argparse
import csv
import io
import json
import os
import os.path
import sys
import tempfile
from dataclasses import dataclass, field, fields
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

import decilediff
from . import ingest
from .batch import pair_fits, degree_lag_grid, format_grid, grid_rows, slope_sign_report, r2_summary
from .compare import Tolerances, compare_tables, comparison_rows, format_comparison
from .dyndist import diff_series, build_plot_set, format_plot_set, plot_set_rows
from .exceptions import (EXIT_CODES, DecileDiffBaseException, ParameterValidationError, InvalidParameter,
                         FileIOError, UnknownLabel, ManifestError, DecileValidationError, exit_code_for)
from .ingest import DatasetManifest
from .model import (DecileSeries, SeriesMeta, VariableKind, Measure, Basis, Period, Variable, Flow, FitTable,
                    validate_series)
from .polyfit import fit, sample_curve, CURVE_SAMPLES
from .schema import CommandSchema, load_command_schemas
from .synthgen import make_income_model, synth_panel
from .validate import validate_parameters


@dataclass
class RunConfig:
    """Validated parameters of one command invocation"""
    command: str
    input: Optional[str] = None
    manifest: Optional[str] = None
    reference: Optional[str] = None
    output: Optional[str] = None
    format: str = "csv"
    variable: str = "income"
    flow: Optional[str] = None
    measure: str = "mean"
    basis: str = "nominal"
    deflator: Optional[str] = None
    base_year: Optional[str] = None
    unit: Optional[str] = None
    period: Optional[str] = None
    earlier: Optional[str] = None
    later: Optional[str] = None
    degree: int = 1
    degrees: List[int] = field(default_factory=lambda: [1])
    lag: int = 1
    lags: List[int] = field(default_factory=lambda: [1])
    span: bool = False
    workers: int = 1
    precision: str = "appendix"
    model: str = "exponential"
    params: List[str] = field(default_factory=list)
    households: int = 1000
    years: List[str] = field(default_factory=list)
    growth: float = 0.02
    rank_tilt: float = 0.0
    volatility: float = 0.0
    seed: int = 0
    tolerance: List[float] = field(default_factory=lambda: [0.0])
    threshold: float = 80.0
    config: Optional[str] = None
    log_level: Optional[str] = None

    @classmethod
    def from_params(cls, command: str, params: Dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        kw = {name.replace("-", "_"): value for name, value in params.items()}
        unknown = set(kw) - known
        if unknown:
            raise ParameterValidationError(f"{command}: unsupported parameter(s) {', '.join(sorted(unknown))}")
        return cls(command=command, **kw)


def _schemas() -> Dict[str, CommandSchema]:
    return load_command_schemas()


def build_parser(schemas: Optional[Dict[str, CommandSchema]] = None) -> argparse.ArgumentParser:
    """One flat parser: the command is positional, and every flag of every command is listed under --help"""
    schemas = schemas or _schemas()
    epilog = "exit codes:\n" + "\n".join(f"  {code}  {meaning}" for code, meaning in sorted(EXIT_CODES.items()))
    epilog += "\n\ncommands:\n" + "\n".join(f"  {name:10s} {schema.info}" for name, schema in schemas.items())
    parser = argparse.ArgumentParser(prog="decilediff",
                                     description="Dynamic decile difference distributions and their polynomial fits",
                                     epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("command", choices=list(schemas), help="command to run")
    seen = set()
    for command, schema in schemas.items():
        for name, param in schema.inputs_outputs.items():
            if name in seen:
                continue
            seen.add(name)
            info = param.info
            if param.choices:
                info += f" ({'|'.join(map(str, param.choices))})"
            if param.dtype == "bool":
                parser.add_argument(f"--{name}", action="store_true", default=argparse.SUPPRESS, help=info)
            else:
                parser.add_argument(f"--{name}", default=argparse.SUPPRESS, metavar=param.metavar or name.upper(),
                                    help=info)
    return parser


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Parses the command line (merged over an optional --config YAML file) into a validated RunConfig"""
    schemas = _schemas()
    args = vars(build_parser(schemas).parse_args(argv))
    command = args.pop("command")
    params = {name.replace("_", "-"): value for name, value in args.items()}
    schema = schemas[command]

    if params.get("config"):
        try:
            file_conf = OmegaConf.load(params["config"])
        except OSError as exc:
            raise FileIOError(f"{params['config']}: {exc.strerror or exc}")
        except OmegaConfBaseException as exc:
            raise ParameterValidationError(f"{params['config']}: {exc}")
        params = OmegaConf.to_container(OmegaConf.merge(file_conf, params))

    # level names are case-insensitive, as for $DECILEDIFF_LOG_LEVEL
    if isinstance(params.get("log-level"), str):
        params["log-level"] = params["log-level"].upper()

    validated = validate_parameters(params, schema.inputs_outputs, fqname=command,
                                    outputs=schema.outputs.keys() | {"output"}, create_dirs=True)
    return RunConfig.from_params(command, validated)


# --- helpers shared by the commands

def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as stream:
            return stream.read()
    except OSError as exc:
        raise FileIOError(f"{path}: {exc.strerror or exc}")


def write_atomic(path: Optional[str], text: str):
    """Writes text to path via a temporary file in the same directory, or to stdout if path is None"""
    if path is None:
        sys.stdout.write(text)
        return
    dirname = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmpname = tempfile.mkstemp(dir=dirname, prefix=".decilediff-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as stream:
                stream.write(text)
            os.replace(tmpname, path)
        except BaseException:
            if os.path.exists(tmpname):
                os.unlink(tmpname)
            raise
    except OSError as exc:
        raise FileIOError(f"{path}: {exc.strerror or exc}")


def csv_text(header: Sequence[str], rows: List[Dict]) -> str:
    """Formats dict rows as CSV; None is an empty field, floats use the shortest exact form"""
    def fmt(value):
        if value is None:
            return ""
        if isinstance(value, bool):
            return str(value).lower()
        if isinstance(value, float):
            return ingest.format_number(value)
        return str(value)

    stream = io.StringIO()
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(row.get(name)) for name in header])
    return stream.getvalue()


def _render(config: RunConfig, rows: List[Dict], text: str) -> str:
    if config.format == "json":
        return json.dumps(rows, indent=2, ensure_ascii=False) + "\n"
    return text


def _series_meta(config: RunConfig, basis: Basis) -> SeriesMeta:
    variable = Variable.parse(config.variable)
    variable_kind = VariableKind(variable, config.flow or Flow.unspecified)
    if config.period:
        period = Period.parse(config.period)
    else:
        period = Period.annual if variable is Variable.income else Period.weekly
    return SeriesMeta(variable_kind, Measure(config.measure), basis, period, config.unit or "")


def load_panel(config: RunConfig) -> Tuple[List[DecileSeries], DatasetManifest]:
    """Reads the input decile table in chronological order, converted to real terms if requested"""
    log = decilediff.logger()
    manifest = ingest.load_manifest(config.manifest) if config.manifest else None
    if manifest is not None and not config.unit and manifest.unit:
        config.unit = manifest.unit
    deflate = config.basis == "real" and config.deflator is not None
    if config.basis == "real" and not config.base_year:
        raise ParameterValidationError(f"{config.command}: --basis real needs --base-year")
    if config.deflator is not None and config.basis != "real":
        raise ParameterValidationError(f"{config.command}: --deflator needs --basis real")
    basis = Basis.real(config.base_year) if config.basis == "real" and not deflate else Basis.nominal()

    series = ingest.parse_decile_table(_read(config.input), _series_meta(config, basis), source=config.input)
    if manifest is None:
        manifest = ingest.manifest_from_series(series)
    else:
        series = manifest.order(series)
    if deflate:
        deflator = ingest.parse_deflator(_read(config.deflator), source=config.deflator)
        series = [ingest.to_real(item, deflator, config.base_year) for item in series]
        log.info(f"converted {len(series)} series to {config.base_year} prices")
    log.info(f"{config.input}: {len(series)} years of {series[0].variable_kind} ({series[0].measure})")
    return series, manifest


def _select_pair(config: RunConfig, series: List[DecileSeries]) -> Tuple[DecileSeries, DecileSeries]:
    by_label = {item.label: item for item in series}
    earlier = config.earlier or series[0].label
    later = config.later or series[-1].label
    for label in (earlier, later):
        if label not in by_label:
            raise UnknownLabel(label)
    return by_label[earlier], by_label[later]


def _load_fit_table(name: str) -> FitTable:
    if name.startswith("appendix:"):
        number = name.split(":", 1)[1]
        if not number.isdigit():
            raise InvalidParameter(f"'{name}': expected appendix:N")
        return ingest.load_appendix(int(number))
    return ingest.parse_fit_table(_read(name), source=name)


def _fit_table_text(config: RunConfig, table: FitTable) -> str:
    return _render(config, ingest.fit_table_rows(table), ingest.format_fit_table(table, config.precision))


# --- commands

def cmd_validate(config: RunConfig) -> int:
    log = decilediff.logger()
    manifest = ingest.load_manifest(config.manifest) if config.manifest else None
    meta = _series_meta(config, Basis.real(config.base_year) if config.basis == "real" else Basis.nominal())
    series = ingest.parse_decile_table(_read(config.input), meta, source=config.input, strict=False)
    rows = []
    for item in series:
        for violation in validate_series(item):
            rows.append(dict(label=item.label, violation=str(violation)))
    if manifest is not None:
        labels = {item.label for item in series}
        for item in series:
            if item.label not in manifest.chronology:
                rows.append(dict(label=item.label, violation="label not in manifest chronology"))
        for label in manifest.chronology:
            if label not in labels:
                log.warning(f"manifest lists '{label}', which has no row in {config.input}")
    write_atomic(config.output, _render(config, rows, csv_text(["label", "violation"], rows)))
    if rows:
        log.error(f"{config.input}: {len(rows)} violation(s)")
        return DecileValidationError.exit_code
    log.info(f"{config.input}: {len(series)} series, no violations")
    return 0


def cmd_fit_pair(config: RunConfig) -> int:
    series, manifest = load_panel(config)
    earlier, later = _select_pair(config, series)
    diffs = diff_series(earlier, later, manifest)
    result = fit(build_plot_set(diffs), config.degree)
    decilediff.logger().info(f"{diffs.pair_label}: R² = {result.r_squared_percent:.2f}%")
    table = FitTable(ingest.FitTableMeta(degree=config.degree, variable_kind=earlier.variable_kind,
                                         measure=earlier.measure, basis=earlier.basis),
                     (result.to_record(diffs.pair_label),))
    write_atomic(config.output, _fit_table_text(config, table))
    return 0


def cmd_batch(config: RunConfig) -> int:
    series, manifest = load_panel(config)
    table = pair_fits(series, config.lag, config.degree, chronology=manifest, include_span=config.span,
                      workers=config.workers)
    failed = sum(not rec.ok for rec in table)
    decilediff.logger().info(f"fitted {len(table) - failed} of {len(table)} pair(s) at lag {config.lag}")
    write_atomic(config.output, _fit_table_text(config, table))
    return 0


def cmd_grid(config: RunConfig) -> int:
    series, manifest = load_panel(config)
    grid = degree_lag_grid(series, config.degrees, config.lags, chronology=manifest, workers=config.workers)
    for lag, degree in grid.absent:
        decilediff.logger().warning(f"no fittable pairs at lag {lag}, degree {degree}")
    write_atomic(config.output, _render(config, grid_rows(grid), format_grid(grid)))
    return 0


def _year_labels(years: List[str]) -> List[str]:
    if len(years) == 1 and ":" in years[0]:
        first, last = years[0].split(":", 1)
        if not (first.strip().isdigit() and last.strip().isdigit()) or int(last) < int(first):
            raise InvalidParameter(f"invalid year range '{years[0]}'")
        return [str(year) for year in range(int(first), int(last) + 1)]
    return list(years)


def _model_params(params: List[str]) -> Dict[str, float]:
    result = {}
    for item in params:
        name, sep, value = item.partition("=")
        try:
            result[name.strip()] = float(value)
        except ValueError:
            sep = ""
        if not sep:
            raise InvalidParameter(f"model parameter '{item}': expected name=value")
    return result


def cmd_synth(config: RunConfig) -> int:
    model = make_income_model(config.model, **_model_params(config.params))
    meta = _series_meta(config, Basis.nominal())
    panel, manifest = synth_panel(model, _year_labels(config.years), config.households, meta,
                                  growth=config.growth, rank_tilt=config.rank_tilt, volatility=config.volatility,
                                  seed=config.seed)
    write_atomic(config.output, ingest.format_decile_table(panel))
    if config.manifest:
        write_atomic(config.manifest, ingest.format_manifest(manifest))
    decilediff.logger().info(f"wrote {len(panel)} synthetic years to {config.output}")
    return 0


def curve_path(points_path: str) -> str:
    stem, ext = os.path.splitext(points_path)
    return f"{stem}.curve{ext}"


def cmd_plot_data(config: RunConfig) -> int:
    series, manifest = load_panel(config)
    earlier, later = _select_pair(config, series)
    plot_set = build_plot_set(diff_series(earlier, later, manifest))
    result = fit(plot_set, config.degree)
    curve = sample_curve(result, min(plot_set.xs), max(plot_set.xs), CURVE_SAMPLES)
    curve_rows = [dict(x=x, p=p) for x, p in curve]
    curve_text = "x,p\n" + "".join(f"{ingest.format_number(x)},{ingest.format_number(p)}\n" for x, p in curve)
    write_atomic(config.output, _render(config, plot_set_rows(plot_set), format_plot_set(plot_set)))
    write_atomic(curve_path(config.output), _render(config, curve_rows, curve_text))
    decilediff.logger().info(f"{plot_set.pair_label}: wrote points to {config.output}, curve to {curve_path(config.output)}")
    return 0


def cmd_compare(config: RunConfig) -> int:
    log = decilediff.logger()
    produced = _load_fit_table(config.input)
    reference = _load_fit_table(config.reference)
    report = compare_tables(produced, reference, Tolerances.from_list(config.tolerance))
    rows = comparison_rows(report, reference.degree)
    write_atomic(config.output, _render(config, rows, format_comparison(report, reference.degree, config.precision)))
    log.info(f"{report.passed} row(s) within tolerance, {report.failed} outside")
    return 0 if report.ok else DecileValidationError.exit_code


def cmd_summary(config: RunConfig) -> int:
    log = decilediff.logger()
    table = _load_fit_table(config.input)
    summary = r2_summary(table, config.threshold)
    signs = dict(slope_sign_report(table)) if table.degree == 1 else {}
    rows = []
    for rec in table:
        rows.append(dict(pair=rec.pair_label, r2=rec.r_squared_percent,
                         slope=str(signs[rec.pair_label]) if rec.pair_label in signs else None,
                         below_threshold=(rec.r_squared_percent < config.threshold) if rec.ok else None))
    header = ["pair", "r2", "slope", "below_threshold"]
    write_atomic(config.output, _render(config, rows, csv_text(header, rows)))
    log.info(f"{summary.above} of {summary.count} fit(s) have R² >= {summary.threshold:g}%, mean {summary.mean_r2:.2f}%")
    if summary.below_labels:
        log.info(f"below threshold: {', '.join(summary.below_labels)}")
    positive = [label for label, sign in signs.items() if str(sign) == "positive"]
    if positive:
        log.info(f"positive slope: {', '.join(positive)}")
    return 0


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "validate": cmd_validate,
    "fit-pair": cmd_fit_pair,
    "batch": cmd_batch,
    "grid": cmd_grid,
    "synth": cmd_synth,
    "plot-data": cmd_plot_data,
    "compare": cmd_compare,
    "summary": cmd_summary,
}


def run(config: RunConfig) -> int:
    """Runs one command. Errors are reported as a single diagnostic line; returns the exit code"""
    log = decilediff.logger()
    if config.log_level:
        decilediff.set_log_level(config.log_level)
    try:
        return COMMANDS[config.command](config)
    except DecileDiffBaseException as exc:
        log.error(f"{config.command}: {type(exc).__name__}: {exc}")
        return exc.exit_code
    except OSError as exc:
        log.error(f"{config.command}: {exc}")
        return exit_code_for(exc)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = parse_config(argv)
    except DecileDiffBaseException as exc:
        decilediff.logger().error(f"{type(exc).__name__}: {exc}")
        return exc.exit_code
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
