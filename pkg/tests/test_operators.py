import math

import numpy as np
import pytest
from scipy.special import betainc, comb

from tapmeans.operators import (
    BlockMultiplier,
    TapParameters,
    apply_block_multiplier,
    kernel_convolution,
    lambda_coeff,
    lambda_sequence,
    leis_mean,
    leis_multiplier,
    poisson_mean,
    poisson_rho_derivative,
    radial_derivative,
    tap_mean,
    taylor_form,
    y_poisson_kernel,
)
from tapmeans.spectral import (
    SpectralFunction,
    analyze,
    partial_sum,
    project_Y,
    random_function,
    synthesize,
)


def _brute_lambda(nu, r, rho):
    if nu < r:
        return 1.0
    return sum(comb(nu, j, exact=True) * (1 - rho) ** j * rho ** (nu - j) for j in range(r))


def test_lambda_spot_values():
    assert abs(lambda_coeff(2, 2, 0.5) - 0.75) < 1e-15
    assert abs(lambda_coeff(3, 2, 0.5) - 0.5) < 1e-15


def test_lambda_endpoints():
    for nu in range(0, 30):
        for r in range(1, 6):
            assert lambda_coeff(nu, r, 1.0) == 1.0
            assert lambda_coeff(nu, r, 0.0) == (1.0 if nu < r else 0.0)


def test_lambda_matches_direct_sum_and_beta_tail():
    for nu in (0, 1, 5, 17, 60):
        for r in (1, 2, 4, 7):
            for rho in (0.05, 0.3, 0.77, 0.999):
                v = lambda_coeff(nu, r, rho)
                assert v == pytest.approx(_brute_lambda(nu, r, rho), rel=1e-12, abs=1e-300)
                if nu >= r:
                    assert abs(1.0 - betainc(r, nu - r + 1, 1 - rho) - v) < 1e-13


def test_lambda_large_nu_small_rho_no_underflow_garbage():
    lam = lambda_sequence(5000, 3, 1e-3)
    assert np.all(np.isfinite(lam)) and np.all((lam >= 0) & (lam <= 1))
    # exact value C(4,2) 1e-3^2 (1-1e-3)^2 + ... is tiny but not garbage
    assert lam[4] == pytest.approx(_brute_lambda(4, 3, 1e-3), rel=1e-12)
    lam_hi = lambda_sequence(100000, 4, 0.999)
    assert np.all(np.diff(lam_hi[4:]) <= 0)


def test_partition_of_unity():
    for nu in (0, 3, 10, 25):
        for rho in (0.2, 0.6, 0.95):
            total = sum(comb(nu, j) * (1 - rho) ** j * rho ** (nu - j) for j in range(nu + 1))
            assert total == pytest.approx(1.0, abs=1e-13)
            assert lambda_coeff(nu, nu + 1, rho) == 1.0


def test_lambda_rejects_bad_input():
    with pytest.raises(ValueError):
        lambda_coeff(-1, 2, 0.5)
    with pytest.raises(ValueError):
        lambda_sequence(4, 0, 0.5)
    with pytest.raises(ValueError):
        TapParameters(1.0, 2)
    with pytest.raises(ValueError):
        TapParameters(0.5, 0)


def test_block_multiplier_examples():
    f = random_function(np.random.default_rng(0), 2, 3)
    ident = BlockMultiplier(np.ones(7))
    assert apply_block_multiplier(f, ident).max_abs_diff(f) == 0.0
    kill_mean = BlockMultiplier(np.r_[0.0, np.ones(6)])
    g = apply_block_multiplier(f, kill_mean)
    assert g.coeff((0, 0)) == 0 and (f - g).max_abs_diff(partial_sum(f, 0)) == 0.0

    h = SpectralFunction.from_modes(2, 2, {(1, 0): 1.0, (1, -1): 1.0})
    out = apply_block_multiplier(h, BlockMultiplier(np.arange(5) + 1.0))
    assert out.coeff((1, 0)) == 2.0 and out.coeff((1, -1)) == 3.0


def test_block_multiplier_rejects_short_sequence():
    f = random_function(np.random.default_rng(1), 1, 5)
    with pytest.raises(ValueError):
        apply_block_multiplier(f, BlockMultiplier(np.ones(3)))


def test_real_flag_preserved_only_by_real_multipliers():
    f = random_function(np.random.default_rng(2), 2, 3)
    assert apply_block_multiplier(f, BlockMultiplier(np.linspace(0, 1, 7))).real
    assert not apply_block_multiplier(f, BlockMultiplier(1j * np.ones(7))).real


def test_composition_is_pointwise_product():
    a = BlockMultiplier(np.linspace(1, 2, 9))
    b = BlockMultiplier(np.linspace(3, 0, 9))
    f = random_function(np.random.default_rng(3), 2, 4)
    lhs = (a * b)(f)
    assert lhs.max_abs_diff(a(b(f))) < 1e-15
    assert np.array_equal((a * b).values, (b * a).values)


def test_poisson_mean():
    f = random_function(np.random.default_rng(4), 2, 4)
    assert poisson_mean(f, 0.0).max_abs_diff(partial_sum(f, 0)) == 0.0
    e = SpectralFunction.mode((2, -1), K=3)
    assert poisson_mean(e, 0.4).coeff((2, -1)) == pytest.approx(0.4 ** 3)
    assert poisson_mean(poisson_mean(f, 0.3), 0.7).max_abs_diff(poisson_mean(f, 0.21)) < 1e-14


def test_tap_mean_examples():
    f = random_function(np.random.default_rng(5), 2, 4)
    assert tap_mean(f, 0.6, 1).max_abs_diff(poisson_mean(f, 0.6)) < 1e-15
    for r in (1, 2, 3):
        assert tap_mean(f, 0.0, r).max_abs_diff(partial_sum(f, r - 1)) == 0.0
    low = partial_sum(f, 2)
    for rho in (0.1, 0.5, 0.9):
        assert tap_mean(low, rho, 3).max_abs_diff(low) == 0.0
    assert tap_mean(f, TapParameters(0.3, 2)).max_abs_diff(tap_mean(f, 0.3, 2)) == 0.0


def test_radial_derivative():
    e = SpectralFunction.mode((1, 2), K=2)
    assert radial_derivative(e, 2).coeff((1, 2)) == 6.0
    c = SpectralFunction.from_modes(1, 2, {(0,): 5.0})
    assert np.all(radial_derivative(c, 1).coeffs == 0)
    f = random_function(np.random.default_rng(6), 2, 4)
    ab = radial_derivative(radial_derivative(f, 2), 3)
    ba = radial_derivative(radial_derivative(f, 3), 2)
    assert ab.max_abs_diff(ba) <= 1e-14 * np.max(np.abs(ab.coeffs))


def test_rho_derivative():
    f = random_function(np.random.default_rng(7), 2, 4)
    assert poisson_rho_derivative(f, 0.3, 0).max_abs_diff(poisson_mean(f, 0.3)) < 1e-16
    e = SpectralFunction.mode((1, 1), K=2)
    assert poisson_rho_derivative(e, 0.5, 1).coeff((1, 1)) == pytest.approx(1.0)
    for r in (1, 2, 3):
        lhs = poisson_rho_derivative(f, 0.8, r) * 0.8 ** r
        rhs = radial_derivative(poisson_mean(f, 0.8), r)
        assert lhs.max_abs_diff(rhs) <= 1e-14 * max(1.0, np.max(np.abs(rhs.coeffs)))


def test_rho_derivative_matches_finite_difference():
    f = random_function(np.random.default_rng(8), 1, 6)
    rho, h = 0.6, 1e-5
    fd = (poisson_mean(f, rho + h) - poisson_mean(f, rho - h)) * (0.5 / h)
    assert fd.max_abs_diff(poisson_rho_derivative(f, rho, 1)) < 1e-8


def test_taylor_form():
    f = random_function(np.random.default_rng(9), 3, 3)
    assert taylor_form(f, 0.4, 1).max_abs_diff(poisson_mean(f, 0.4)) < 1e-16
    for r in range(1, 6):
        for rho in (0.1, 0.5, 0.9, 0.99):
            assert taylor_form(f, rho, r).max_abs_diff(tap_mean(f, rho, r)) < 1e-12


def test_leis_examples():
    f = random_function(np.random.default_rng(10), 1, 5)
    assert leis_mean(f, 0.3, 1).max_abs_diff(f) == 0.0
    for r in (1, 2, 5):
        assert leis_multiplier(10, 0.2, r).values[0] == 1.0
    assert leis_multiplier(4, 0.5, 2).values[2] == 0.0


def test_leis_differs_from_tap_at_first_order():
    # the Leis sum expands at rho = 1, so for r = 2 it is 1 - nu(1-rho)
    # while lambda_{nu,2} = 1 - O((1-rho)^2)
    nu = np.arange(6, dtype=float)
    for rho in (0.99, 0.999):
        gap = lambda_sequence(5, 2, rho) - leis_multiplier(5, rho, 2).values
        h = 1 - rho
        assert np.max(np.abs(gap - nu * h)) < nu.max() ** 2 * h ** 2


def test_kernel_closed_form():
    assert np.allclose(y_poisson_kernel(0.0, 2, 6).values, 1.0)
    m = 64
    x = 2 * np.pi * np.arange(m) / m
    for rho in (0.2, 0.7):
        classical = (1 - rho ** 2) / (1 - 2 * rho * np.cos(x) + rho ** 2)
        assert np.max(np.abs(y_poisson_kernel(rho, 1, m).values - classical)) < 1e-12
    with pytest.raises(ValueError):
        y_poisson_kernel(1.0, 2, 8)


def test_kernel_coefficients_on_both_orthants():
    # the closed form carries rho^|k| on Z^d_+ and on -Z^d_+; the latter is
    # larger than Z^d_- (e.g. k = (-1, 0)), outside Y
    rho, K = 0.5, 6
    c = analyze(y_poisson_kernel(rho, 2, 64), K)
    assert abs(c.coeff((0, 0)) - 1.0) < 1e-15
    assert abs(c.coeff((2, 1)) - rho ** 3) < 1e-15
    assert abs(c.coeff((-2, -1)) - rho ** 3) < 1e-15
    assert abs(c.coeff((-1, 0)) - rho) < 1e-15
    assert abs(c.coeff((1, -1))) < 1e-15
    assert abs(c.coeff((3, -2))) < 1e-15


def test_kernel_convolution_is_poisson_mean_on_Y():
    rng = np.random.default_rng(11)
    for d in (1, 2, 3):
        f = project_Y(random_function(rng, d, 4, real=False))
        m = 72
        for rho in (0.3, 0.6):
            conv = kernel_convolution(f, y_poisson_kernel(rho, d, m))
            assert conv.max_abs_diff(synthesize(poisson_mean(f, rho), m)) < 1e-12


def test_operators_commute_with_project_Y():
    f = random_function(np.random.default_rng(12), 2, 4, real=False)
    for op in (lambda g: tap_mean(g, 0.7, 3), lambda g: radial_derivative(g, 2),
               lambda g: poisson_rho_derivative(g, 0.4, 1)):
        assert op(project_Y(f)).max_abs_diff(project_Y(op(f))) == 0.0


def test_falling_factorial_product():
    from tapmeans.operators import falling_factorial
    nu = np.arange(12)
    for n in range(5):
        expect = [math.perm(int(v), n) if v >= n else 0 for v in nu]
        assert np.array_equal(falling_factorial(nu, n), np.array(expect, dtype=float))
