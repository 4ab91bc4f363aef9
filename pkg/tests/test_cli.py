import json

import pytest

import decilediff

from decilediff import ingest
from decilediff.cli import main, build_parser, parse_config, curve_path, RunConfig
from decilediff.exceptions import EXIT_CODES, ParameterValidationError
from decilediff.schema import load_command_schemas

TABLE = """label,d1,d2,d3,d4,d5,d6,d7,d8,d9,d10
2009,100,200,300,400,500,600,700,800,900,1000
2010,112,215,322,430,531,650,745,866,960,1090
2011,118,230,331,455,560,675,790,880,1010,1150
"""


def write(path, text):
    path.write_text(text)
    return str(path)


def synth(tmp_path, years="1977:2011", seed=3):
    data, manifest = str(tmp_path / "panel.csv"), str(tmp_path / "panel.yml")
    assert main(["synth", "--years", years, "--households", "500", "--seed", str(seed), "--growth", "0.03",
                 "--rank-tilt", "0.01", "--volatility", "0.02", "--output", data, "--manifest", manifest]) == 0
    return data, manifest


def test_help_lists_flags_and_exit_codes():
    text = build_parser().format_help()
    for schema in load_command_schemas().values():
        for name in schema.inputs_outputs:
            assert f"--{name}" in text
    for code, meaning in EXIT_CODES.items():
        assert f"{code}  {meaning}" in text
    for command in ("validate", "fit-pair", "batch", "grid", "synth", "plot-data", "compare", "summary"):
        assert command in text


def test_parse_config(tmp_path):
    infile = write(tmp_path / "t.csv", TABLE)
    config = parse_config(["batch", "--input", infile, "--lag", "2", "--span"])
    assert isinstance(config, RunConfig)
    assert (config.command, config.lag, config.span, config.degree, config.measure) == ("batch", 2, True, 1, "mean")

    # command-line flags override the config file
    conf = write(tmp_path / "run.yml", f"input: {infile}\ndegree: 2\nlag: 1\n")
    config = parse_config(["batch", "--config", conf, "--lag", "2"])
    assert (config.input, config.degree, config.lag) == (infile, 2, 2)

    with pytest.raises(ParameterValidationError):
        parse_config(["batch", "--input", infile, "--earlier", "2009"])
    with pytest.raises(ParameterValidationError):
        parse_config(["batch"])


def test_batch_on_synthetic_panel(tmp_path):
    data, manifest = synth(tmp_path)
    assert len(ingest.load_manifest(manifest).chronology) == 35

    out = tmp_path / "out" / "fits.csv"
    assert main(["batch", "--input", data, "--manifest", manifest, "--lag", "1", "--degree", "1",
                 "--output", str(out)]) == 0
    table = ingest.parse_fit_table(out.read_text())
    assert len(table) == 34
    assert table.labels[0] == "1978/1977"

    assert main(["batch", "--input", data, "--manifest", manifest, "--span", "--workers", "4",
                 "--format", "json", "--output", str(out)]) == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 35 and rows[-1]["pair"] == "2011/1977"
    assert set(rows[0]) == {"pair", "p1", "p2", "r2"}


def test_end_to_end_determinism(tmp_path):
    outputs = []
    for run in ("a", "b"):
        path = tmp_path / run
        path.mkdir()
        data, manifest = synth(path, years="2000:2012", seed=21)
        out = path / "fits.csv"
        assert main(["batch", "--input", data, "--manifest", manifest, "--precision", "full",
                     "--output", str(out)]) == 0
        outputs.append((open(data, "rb").read(), out.read_bytes()))
    assert outputs[0] == outputs[1]


def test_input_untouched_and_idempotent(tmp_path):
    infile = write(tmp_path / "t.csv", TABLE)
    out = tmp_path / "grid.csv"
    argv = ["grid", "--input", infile, "--lags", "1,2", "--degrees", "1,2", "--output", str(out)]
    assert main(argv) == 0
    first = out.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first
    assert (tmp_path / "t.csv").read_text() == TABLE
    lines = first.decode().splitlines()
    assert lines[0] == "lag,degree,mean_r2,min_r2,max_r2,pairs"
    assert [line.split(",")[:2] for line in lines[1:]] == [["1", "1"], ["1", "2"], ["2", "1"], ["2", "2"]]


def test_fit_pair(tmp_path):
    infile = write(tmp_path / "t.csv", TABLE)
    out = tmp_path / "pair.csv"
    assert main(["fit-pair", "--input", infile, "--earlier", "2009", "--later", "2010", "--output", str(out)]) == 0
    table = ingest.parse_fit_table(out.read_text())
    assert table.labels == ["2010/2009"]
    # default pair is first against last
    assert main(["fit-pair", "--input", infile, "--degree", "2", "--output", str(out)]) == 0
    table = ingest.parse_fit_table(out.read_text())
    assert table.labels == ["2011/2009"] and table.degree == 2

    same = write(tmp_path / "same.csv", TABLE.splitlines()[0] + "\n" + TABLE.splitlines()[1] + "\n" +
                 TABLE.splitlines()[1].replace("2009", "2010", 1) + "\n")
    assert main(["fit-pair", "--input", same, "--output", str(out)]) == 4
    assert main(["fit-pair", "--input", infile, "--earlier", "2010", "--later", "2009"]) == 3
    assert main(["fit-pair", "--input", infile, "--earlier", "1999"]) == 3


def test_plot_data(tmp_path):
    infile = write(tmp_path / "t.csv", TABLE)
    out = tmp_path / "plots" / "pair.dat"
    assert main(["plot-data", "--input", infile, "--earlier", "2009", "--later", "2011", "--output", str(out)]) == 0
    points = out.read_text().splitlines()
    assert points[0] == "x,p" and len(points) == 11
    assert [line.split(",")[1] for line in points[1:]] == ["90", "80", "70", "60", "50", "40", "30", "20", "10", "0"]
    curve_file = curve_path(str(out))
    assert curve_file == str(tmp_path / "plots" / "pair.curve.dat")
    curve = open(curve_file).read().splitlines()
    assert curve[0] == "x,p" and len(curve) == 201
    xs = [float(line.split(",")[0]) for line in points[1:]]
    assert float(curve[1].split(",")[0]) == min(xs)
    assert float(curve[-1].split(",")[0]) == pytest.approx(max(xs))

    assert main(["plot-data", "--input", infile]) == 3


def test_real_basis(tmp_path):
    infile = write(tmp_path / "t.csv", TABLE)
    deflator = write(tmp_path / "cpi.csv", "year,index\n2009,100\n2010,102\n2011,105\n")
    out = tmp_path / "real.csv"
    assert main(["batch", "--input", infile, "--basis", "real", "--deflator", deflator, "--base-year", "2009",
                 "--precision", "full", "--output", str(out)]) == 0
    real = ingest.parse_fit_table(out.read_text())
    assert main(["batch", "--input", infile, "--precision", "full", "--output", str(out)]) == 0
    nominal = ingest.parse_fit_table(out.read_text())
    assert real.labels == nominal.labels
    assert real["2010/2009"].coefficients != nominal["2010/2009"].coefficients

    # already-real data only needs the base year
    assert main(["batch", "--input", infile, "--basis", "real", "--base-year", "2009", "--output", str(out)]) == 0
    assert main(["batch", "--input", infile, "--basis", "real", "--output", str(out)]) == 3
    missing = write(tmp_path / "short.csv", "year,index\n2009,100\n")
    assert main(["batch", "--input", infile, "--basis", "real", "--deflator", missing, "--base-year", "2009",
                 "--output", str(out)]) == 3


def test_validate_command(tmp_path):
    infile = write(tmp_path / "t.csv", TABLE)
    out = tmp_path / "report.csv"
    assert main(["validate", "--input", infile, "--output", str(out)]) == 0
    assert out.read_text() == "label,violation\n"

    bad = write(tmp_path / "bad.csv", TABLE + "2012,10,5,30,40,50,60,70,80,90,100\n")
    assert main(["validate", "--input", bad, "--output", str(out)]) == 3
    assert out.read_text().splitlines()[1] == "2012,income deciles not non-decreasing"

    expenditure = write(tmp_path / "exp.csv", TABLE + "2012,10,5,30,40,50,60,70,80,90,100\n")
    assert main(["validate", "--input", expenditure, "--variable", "expenditure", "--flow", "gross",
                 "--output", str(out)]) == 0


def test_exit_codes(tmp_path):
    infile = write(tmp_path / "t.csv", TABLE)
    assert main(["batch", "--input", str(tmp_path / "nosuch.csv")]) == 5
    assert main(["batch", "--input", write(tmp_path / "h.csv", "year,a,b\n")]) == 2
    assert main(["batch", "--input", write(tmp_path / "n.csv", TABLE.replace("745", "7x5"))]) == 2
    assert main(["batch", "--input", infile, "--measure", "median"]) == 3
    assert main(["batch", "--input", infile, "--lag", "5"]) == 3
    assert main(["grid", "--input", infile, "--degrees", "12"]) == 3
    out = tmp_path / "deg0.csv"
    assert main(["batch", "--input", infile, "--degree", "0", "--output", str(out)]) == 4
    assert not out.exists()
    assert main(["synth", "--years", "2000:2002", "--households", "55", "--output", str(tmp_path / "s.csv")]) == 3
    assert main(["synth", "--years", "2000:2002", "--params", "sigma=1", "--output", str(tmp_path / "s.csv")]) == 3


def test_compare_and_summary(tmp_path):
    reference = tmp_path / "app1.csv"
    reference.write_text(ingest.format_fit_table(ingest.load_appendix(1), "full"))
    out = tmp_path / "cmp.csv"
    assert main(["compare", "--input", str(reference), "--reference", "appendix:1", "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "pair,d_p1,d_p2,d_r2,passed" and len(lines) == 36
    assert all(line.endswith(",pass") for line in lines[1:])

    changed = tmp_path / "changed.csv"
    changed.write_text(reference.read_text().replace("1979/1978,-0.0138,", "1979/1978,-0.0139,"))
    assert main(["compare", "--input", str(changed), "--reference", "appendix:1", "--output", str(out)]) == 3
    assert main(["compare", "--input", str(changed), "--reference", "appendix:1", "--tolerance", "0.001",
                 "--output", str(out)]) == 0
    assert main(["compare", "--input", str(changed), "--reference", "appendix:2", "--output", str(out)]) == 3
    assert main(["compare", "--input", str(changed), "--reference", "appendix:9", "--output", str(out)]) == 3

    assert main(["summary", "--input", "appendix:2", "--format", "json", "--output", str(out)]) == 0
    rows = {row["pair"]: row for row in json.loads(out.read_text())}
    assert len(rows) == 13
    assert rows["2009/2008"]["slope"] == "positive" and rows["2009/2008"]["below_threshold"] is True
    assert rows["2010/2009"]["slope"] == "negative" and rows["2010/2009"]["below_threshold"] is False

    assert main(["summary", "--input", "appendix:5", "--threshold", "50", "--output", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "pair,r2,slope,below_threshold"

    # fit tables read from files, on either side of the comparison
    assert main(["compare", "--input", str(reference), "--reference", str(reference), "--output", str(out)]) == 0
    assert main(["compare", "--input", "appendix:1", "--reference", str(changed), "--output", str(out)]) == 3
    assert main(["summary", "--input", str(reference), "--output", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 36


def test_stdout(tmp_path, capsys):
    infile = write(tmp_path / "t.csv", TABLE)
    assert main(["batch", "--input", infile, "--log-level", "WARNING"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "pair,p1,p2,r2"
    assert len(out.splitlines()) == 3
    # level names are case-insensitive
    assert parse_config(["batch", "--input", infile, "--log-level", "debug"]).log_level == "DEBUG"
    decilediff.set_log_level("INFO")


if __name__ == "__main__":
    test_batch_on_synthetic_panel()
