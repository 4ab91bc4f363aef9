import numpy as np
import pytest

from decilediff.dyndist import PERCENT_LADDERS
from decilediff.exceptions import InvalidDegree, DegreeTooHigh, RankDeficient, DegenerateVariance
from decilediff.model import MeasureKind
from decilediff.polyfit import fit, evaluate, r_squared, sample_curve, PolynomialFit

LADDERS = [np.array(PERCENT_LADDERS[MeasureKind.mean]), np.array(PERCENT_LADDERS[MeasureKind.lower_limit])]


def closed_form_line(x, p):
    """Two-parameter OLS from the textbook sums"""
    xbar, pbar = x.mean(), p.mean()
    slope = ((x - xbar) * (p - pbar)).sum() / ((x - xbar) ** 2).sum()
    intercept = pbar - slope * xbar
    ss_res = ((p - (slope * x + intercept)) ** 2).sum()
    ss_tot = ((p - pbar) ** 2).sum()
    return slope, intercept, 100 * (1 - ss_res / ss_tot)


def random_plot_sets(seed, count):
    rng = np.random.Generator(np.random.PCG64(seed))
    for i in range(count):
        yield np.sort(rng.uniform(-200, 200, 10)), LADDERS[i % 2]


def sse(coefficients, x, p):
    residuals = p - np.polyval(coefficients, x)
    return float(np.dot(residuals, residuals))


def test_exact_line():
    x = np.linspace(-150, 230, 10)
    result = fit(list(zip(x, -0.5 * x + 70)), 1)
    assert isinstance(result, PolynomialFit)
    assert result.coefficients == pytest.approx((-0.5, 70), rel=1e-9)
    assert result.slope == pytest.approx(-0.5) and result.intercept == pytest.approx(70)
    assert result.r_squared_percent == pytest.approx(100, abs=1e-9)
    assert result.n_points == 10 and result.degree == 1


def test_three_points():
    result = fit([(0, 0), (1, 1), (2, 3)], 1)
    assert result.coefficients == pytest.approx((1.5, -1 / 6), rel=1e-12)
    assert result.r_squared_percent == pytest.approx(2700 / 28, abs=1e-9)
    assert result.ss_res == pytest.approx(1 / 6)
    assert result.ss_tot == pytest.approx(42 / 9)
    assert r_squared([(0, 0), (1, 1), (2, 3)], result) == pytest.approx(2700 / 28, abs=1e-9)


def test_exact_recovery():
    x = np.array([-180.0, -120, -75, -20, 5, 40, 90, 130, 170, 210])
    for coefficients in [(0.001, -0.5, 70), (2e-6, -1e-4, -0.3, 55), (-0.25, 42)]:
        degree = len(coefficients) - 1
        result = fit(list(zip(x, np.polyval(coefficients, x))), degree)
        assert result.coefficients == pytest.approx(coefficients, rel=1e-9)
        assert result.r_squared_percent == pytest.approx(100, abs=1e-9)


def test_ols_oracle():
    for x, p in random_plot_sets(1, 1000):
        slope, intercept, r2 = closed_form_line(x, p)
        result = fit(list(zip(x, p)), 1)
        assert result.coefficients == pytest.approx((slope, intercept), rel=1e-9)
        assert result.r_squared_percent == pytest.approx(r2, abs=1e-9)
        assert result.gradient_norm < 1e-8


def test_nesting():
    for x, p in random_plot_sets(2, 200):
        values = [fit(list(zip(x, p)), degree).r_squared_percent for degree in range(1, 6)]
        for lower, higher in zip(values, values[1:]):
            assert higher >= lower - 1e-9


def test_interpolation():
    for x, p in random_plot_sets(3, 50):
        result = fit(list(zip(x, p)), 9)
        assert result.ss_res <= 1e-6
        assert result.r_squared_percent == pytest.approx(100, abs=1e-6)


def test_optimality():
    for x, p in random_plot_sets(4, 50):
        for degree in (1, 2):
            result = fit(list(zip(x, p)), degree)
            best = sse(result.coefficients, x, p)
            for i, c in enumerate(result.coefficients):
                eps = 1e-6 * max(1.0, abs(c))
                for sign in (1, -1):
                    perturbed = list(result.coefficients)
                    perturbed[i] += sign * eps
                    assert sse(perturbed, x, p) >= best - 1e-9 * max(1.0, best)


def test_errors():
    with pytest.raises(InvalidDegree):
        fit([(0, 1), (1, 2)], 0)
    with pytest.raises(DegreeTooHigh):
        fit([(0, 1), (1, 2), (2, 4)], 3)
    with pytest.raises(RankDeficient):
        fit([(0, p) for p in LADDERS[0]], 1)
    with pytest.raises(RankDeficient):
        fit([(0, 90), (0, 80), (1, 70), (1, 60)], 2)
    with pytest.raises(DegenerateVariance):
        r_squared([(0, 5), (1, 5)], (1.0, 0.0))


def test_r_squared():
    points = [(0, 0), (1, 1), (2, 3)]
    assert r_squared(points, (1.5, -1 / 6)) == pytest.approx(2700 / 28)
    assert r_squared(points, (0.0, 4 / 3)) == pytest.approx(0, abs=1e-12)
    # R² is not clamped
    assert r_squared(points, (-3.0, 0.0)) < 0
    # constant data fitted exactly
    assert fit([(0, 5), (1, 5), (2, 5)], 1).r_squared_percent == 100


def test_evaluate():
    assert evaluate((-0.5, 70), 0) == 70
    assert evaluate((-0.5, 70), 100) == 20
    assert evaluate((1, 0, 0), 3) == 9
    result = fit([(0, 0), (1, 1), (2, 3)], 1)
    assert result(2) == pytest.approx(17 / 6)
    assert evaluate(result, np.array([0.0, 1.0])) == pytest.approx([-1 / 6, 4 / 3])


def test_sample_curve():
    result = fit([(0, 0), (1, 1), (2, 3)], 1)
    curve = sample_curve(result, -1, 3)
    assert len(curve) == 200
    assert curve[0] == pytest.approx((-1, -1.5 - 1 / 6))
    assert curve[-1] == pytest.approx((3, 4.5 - 1 / 6))
    assert len(sample_curve(result, 0, 1, n=5)) == 5


if __name__ == "__main__":
    test_ols_oracle()
