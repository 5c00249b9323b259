import numpy as np
import pytest

from stereodepth.errors import InsufficientData, SingularSystem
from stereodepth.estimator import (
    design_matrix,
    expand_features,
    fit_polynomial,
    monomial_exponents,
    n_coefficients,
)


@pytest.mark.parametrize("inputs, degree, expected", [
    ([2.0], 2, [1, 2, 4]),
    ([7.5], 0, [1]),
    ([2.0, 3.0], 2, [1, 2, 3, 4, 6, 9]),
])
def test_expand_features_examples(inputs, degree, expected):
    assert expand_features(inputs, degree) == expected


@pytest.mark.parametrize("arity, degree, count", [(1, 5, 6), (2, 5, 21), (2, 0, 1), (1, 0, 1)])
def test_coefficient_counts(arity, degree, count):
    assert n_coefficients(arity, degree) == count


def test_graded_lex_order():
    assert monomial_exponents(2, 3) == (
        (0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3))


def test_design_matrix_matches_expand_features():
    rng = np.random.default_rng(0)
    z = rng.normal(size=(20, 2))
    a = design_matrix(z, 5)
    for row, point in zip(a, z):
        np.testing.assert_allclose(row, expand_features(list(point), 5), rtol=1e-13)


def test_fit_reproduces_line():
    x = np.linspace(1, 30, 40)
    model = fit_polynomial(x, 3 + 2 * x, degree=5, ridge_lambda=0)
    np.testing.assert_allclose(model.predict(x), 3 + 2 * x, atol=1e-8)
    assert model.predict([10.0])[0] == pytest.approx(23, abs=1e-6)


def test_fit_reproduces_quintic_exactly():
    rng = np.random.default_rng(1)
    x = rng.uniform(-3, 4, 30)
    y = 1 - 2 * x + 0.5 * x**3 - 0.1 * x**5
    model = fit_polynomial(x, y, degree=5, ridge_lambda=0)
    np.testing.assert_allclose(model.predict(x), y, rtol=1e-6)


def test_fit_reproduces_bivariate_polynomial():
    rng = np.random.default_rng(2)
    x = rng.uniform(1, 5, (60, 2))
    y = 2 + x[:, 0] * x[:, 1] - x[:, 1] ** 4 + 0.3 * x[:, 0] ** 2 * x[:, 1] ** 3
    model = fit_polynomial(x, y, degree=5, ridge_lambda=0)
    np.testing.assert_allclose(model.predict(x), y, rtol=1e-6)


def test_constant_targets_with_ridge():
    x = np.linspace(10, 100, 50)
    model = fit_polynomial(x, np.full(50, 4.25), degree=5, ridge_lambda=1e-3)
    assert model.coefficients[0] == pytest.approx(4.25, abs=1e-9)
    np.testing.assert_allclose(model.coefficients[1:], 0, atol=1e-9)


def test_normalization_is_recorded():
    x = np.array([1.0, 2, 3, 4, 5, 6, 7])
    model = fit_polynomial(x, x**2, degree=2, ridge_lambda=0)
    assert model.input_shift == (4.0,)
    assert model.input_scale == (pytest.approx(2.0),)
    assert model.training_range == ((1.0, 7.0),)


def test_ridge_shrinks_non_intercept_coefficients():
    rng = np.random.default_rng(3)
    x = rng.uniform(0, 1, 40)
    y = np.sin(6 * x) + rng.normal(0, 0.1, 40)
    plain = fit_polynomial(x, y, degree=5, ridge_lambda=0)
    ridged = fit_polynomial(x, y, degree=5, ridge_lambda=10.0)
    assert np.linalg.norm(ridged.coefficients[1:]) < np.linalg.norm(plain.coefficients[1:])


def test_insufficient_data():
    with pytest.raises(InsufficientData):
        fit_polynomial([1.0, 2, 3, 4, 5], [1.0, 2, 3, 4, 5], degree=5)


def test_singular_system_on_duplicates():
    x = np.tile([[100.0, 20.0]], (30, 1))
    with pytest.raises(SingularSystem):
        fit_polynomial(x, np.full(30, 2.5), degree=5, ridge_lambda=0)
    # too few distinct disparities for a quintic
    with pytest.raises(SingularSystem):
        fit_polynomial(np.repeat([1.0, 2, 3], 5), np.ones(15), degree=5, ridge_lambda=0)


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        fit_polynomial(np.r_[np.arange(9.0), np.nan], np.arange(10.0), degree=2)


def test_in_range_flags():
    x = np.linspace(10, 20, 30)
    model = fit_polynomial(x, x, degree=1)
    assert model.in_range([10.0, 15.0, 20.0]).all()
    assert not model.in_range([9.99])[0]
    assert not model.in_range([20.01])[0]
