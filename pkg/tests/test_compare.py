import pytest

from decilediff import ingest
from decilediff.compare import Tolerances, compare_tables, comparison_rows, format_comparison
from decilediff.exceptions import LabelSetMismatch, WrongDegree, InvalidParameter
from decilediff.model import FitRecord, FitTable, FitTableMeta


def table(*records, degree=1):
    return FitTable(FitTableMeta(degree=degree), records)


def test_reflexive():
    for number in range(1, 6):
        reference = ingest.load_appendix(number)
        report = compare_tables(reference, reference)
        assert report.ok and report.passed == len(reference) and report.failed == 0
        assert all(row.coefficient_deltas == (0.0, 0.0) and row.r_squared_delta == 0.0 for row in report.rows)


def test_tolerances():
    reference = table(FitRecord("1979/1978", (-0.0139, 77.85), 94.29))
    produced = table(FitRecord("1979/1978", (-0.0138, 77.85), 94.29))
    assert compare_tables(produced, reference, Tolerances.from_list([1e-3])).ok
    assert not compare_tables(produced, reference).ok

    report = compare_tables(produced, reference, Tolerances((1e-3, 0.0), 0.0))
    row = report.rows[0]
    assert row.passed
    assert row.coefficient_deltas[0] == pytest.approx(1e-4)

    shifted = table(FitRecord("1979/1978", (-0.0138, 77.95), 94.0))
    assert not compare_tables(shifted, reference, Tolerances.from_list([1e-3, 0.05, 1.0])).ok
    assert compare_tables(shifted, reference, Tolerances.from_list([1e-3, 0.2, 1.0])).ok

    tol = Tolerances.from_list([0.1, 0.2, 0.5])
    assert (tol.coefficient(0), tol.coefficient(1), tol.coefficient(5), tol.r_squared) == (0.1, 0.2, 0.2, 0.5)
    assert Tolerances.from_list([]) == Tolerances()
    with pytest.raises(InvalidParameter):
        Tolerances((-1.0,), 0.0)


def test_label_mismatch():
    reference = table(FitRecord("b/a", (1.0, 2.0), 90.0), FitRecord("c/b", (1.0, 2.0), 90.0))
    produced = table(FitRecord("b/a", (1.0, 2.0), 90.0), FitRecord("d/c", (1.0, 2.0), 90.0))
    with pytest.raises(LabelSetMismatch) as info:
        compare_tables(produced, reference)
    assert info.value.missing == ["c/b"] and info.value.extra == ["d/c"]
    assert "c/b" in str(info.value) and "d/c" in str(info.value)

    with pytest.raises(WrongDegree):
        compare_tables(table(FitRecord("b/a", (1.0, 2.0, 3.0), 90.0), degree=2), table(FitRecord("b/a", (1.0, 2.0), 90.0)))


def test_failed_rows():
    reference = table(FitRecord("b/a", (1.0, 2.0), 90.0), FitRecord.failed("c/b", "fit failed"),
                      FitRecord.failed("d/c", "fit failed"))
    produced = table(FitRecord.failed("b/a", "RankDeficient"), FitRecord.failed("c/b", "RankDeficient"),
                     FitRecord("d/c", (1.0, 2.0), 90.0))
    report = compare_tables(produced, reference)
    assert [row.passed for row in report.rows] == [False, True, False]
    assert report.rows[1].note == "both fits failed"
    assert report.rows[0].note == "fit failed in produced table"
    assert report.rows[2].note == "fit failed in reference table"


def test_report_format():
    reference = table(FitRecord("b/a", (1.0, 2.0), 90.0), FitRecord.failed("c/b", "fit failed"))
    produced = table(FitRecord("b/a", (1.5, 2.0), 91.0), FitRecord.failed("c/b", "fit failed"))
    report = compare_tables(produced, reference, Tolerances.from_list([0.1]))
    assert format_comparison(report, 1).splitlines() == ["pair,d_p1,d_p2,d_r2,passed", "b/a,0.5,0,1,FAIL",
                                                         "c/b,,,,pass"]
    rows = comparison_rows(report, 1)
    assert rows[0] == dict(pair="b/a", d_p1=0.5, d_p2=0.0, d_r2=1.0, passed=False)
    assert rows[1]["d_p1"] is None and rows[1]["passed"] is True


if __name__ == "__main__":
    test_reflexive()
