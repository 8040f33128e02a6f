import math

import numpy as np
import pytest

from entropy_lab.functionals import (
    ENTROPY_BOUND,
    converged_total_entropy,
    default_grid,
    eq8_check,
    grad_sq,
    grad_total_entropy,
    grid_fourier,
    gs_apply,
    p_norm,
    shannon_entropy,
    sq_functional,
    sq_of,
    total_entropy,
)
from entropy_lab.grid import DegenerateInputError, GridFunction, QuadratureGrid, SupportError
from entropy_lab.oscillator_basis import CoefficientVector, Symmetry, fourier_coefficients, synthesize

from conftest import gaussian_entropy_oracle

# -int rho log rho for rho = |phi_1|^2: x^2 times a Gaussian is a chi density with
# three degrees of freedom, whose log moment gives (1/2) log 2 + gamma - 1/2.
PHI1_ENTROPY = 0.5 * math.log(2.0) + np.euler_gamma - 0.5


def random_vector(rng, n, sym=Symmetry.FULL):
    a = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / (1.0 + np.arange(n))
    a = np.where(sym.allows(np.arange(n)), a, 0)
    return CoefficientVector(a.real if sym.is_real else a, sym)


# p-norms ----------------------------------------------------------------------

def test_p_norm_examples():
    g = default_grid(0)
    gauss = np.exp(-math.pi * g.nodes ** 2)
    assert p_norm(GridFunction(g, 2 ** 0.25 * gauss), 2) == pytest.approx(1.0, abs=1e-10)
    assert p_norm(GridFunction(g, gauss), 1) == pytest.approx(1.0, abs=1e-10)
    for p in (1.0, 1.5, 2.0, 4.0):
        f = GridFunction(g, gauss)
        assert p_norm(f.scaled(3.0), p) == pytest.approx(3 * p_norm(f, p), rel=1e-14)


def test_grid_function_rejects_nonfinite():
    g = QuadratureGrid(1.0, 4)
    v = np.zeros(9)
    v[3] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        GridFunction(g, v)


# Shannon entropy ---------------------------------------------------------------

def test_gaussian_entropy():
    f = synthesize(CoefficientVector.single(0), default_grid(0))
    assert shannon_entropy(f) == pytest.approx(gaussian_entropy_oracle(), abs=1e-8)


def test_entropy_scale_invariant():
    f = synthesize(CoefficientVector.single(0), default_grid(0))
    assert shannon_entropy(f.scaled(5.0)) == pytest.approx(shannon_entropy(f), abs=1e-14)


def test_phi1_entropy_closed_form():
    f = synthesize(CoefficientVector.single(1), default_grid(1))
    assert shannon_entropy(f) == pytest.approx(PHI1_ENTROPY, abs=1e-8)


def test_phi1_entropy_refinement_oracle():
    # plain trapezoid on (h/4, 2L) and (h/8, 2L); the x^2 log x^2 kink at the zero
    # leaves an h^3 error, removed by one extrapolation step
    base = default_grid(1)

    def plain(n_scale):
        g = QuadratureGrid(2 * base.half_width, 2 * n_scale * base.n_half)
        x = g.nodes
        rho = 4 * math.sqrt(2) * math.pi * x * x * np.exp(-2 * math.pi * x * x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return g.integrate(np.where(rho > 0, -rho * np.log(rho), 0.0))

    oracle = (8 * plain(8) - plain(4)) / 7
    f = synthesize(CoefficientVector.single(1), base)
    assert shannon_entropy(f) == pytest.approx(oracle, abs=1e-8)


def test_entropy_zero_function():
    with pytest.raises(DegenerateInputError):
        shannon_entropy(GridFunction(QuadratureGrid(1.0, 4), np.zeros(9)))


# total entropy -----------------------------------------------------------------

def test_total_gaussian():
    assert total_entropy(CoefficientVector.single(0)).total == pytest.approx(ENTROPY_BOUND, abs=1e-8)


def test_total_phi1():
    r = total_entropy(CoefficientVector.single(1))
    assert r.total == pytest.approx(2 * PHI1_ENTROPY, abs=1e-8)
    assert r.total == r.S_position + r.S_momentum


def test_odd_fplus_equal_entropies(rng):
    for _ in range(5):
        c = random_vector(rng, 24, Symmetry.ODD_FPLUS)
        r = total_entropy(c)
        assert r.S_position == r.S_momentum


@pytest.mark.parametrize("lam", [2, -1, 1j, 0.1])
def test_total_scale_invariance(rng, lam):
    c = random_vector(rng, 12)
    assert total_entropy(c.scaled(lam)).total == pytest.approx(total_entropy(c).total, abs=1e-13)


def test_lower_bound_random_full(rng):
    vals = [total_entropy(random_vector(rng, int(rng.integers(1, 33)))).total for _ in range(1000)]
    assert min(vals) >= ENTROPY_BOUND - 1e-7


def test_odd_bound_random_odd(rng):
    vals = [total_entropy(random_vector(rng, int(rng.integers(2, 33)), Symmetry.ODD)).total
            for _ in range(1000)]
    assert min(vals) >= 2 * ENTROPY_BOUND - 1e-6


def test_refinement_stability(rng):
    for _ in range(3):
        c = random_vector(rng, 20)
        g = default_grid(c.highest_nonzero())
        assert abs(total_entropy(c, g.refined()).total - total_entropy(c, g).total) < 1e-8


def test_converged_total_entropy(rng):
    c = random_vector(rng, 16, Symmetry.ODD)
    r = converged_total_entropy(c)
    assert r.tolerance < 1e-9
    assert r.total == pytest.approx(total_entropy(c).total, abs=1e-8)


# S_q and G_s -------------------------------------------------------------------

def test_sq_vanishes_at_two(rng):
    for _ in range(3):
        assert abs(sq_of(random_vector(rng, 10), 2.0)) < 1e-9


def test_sq_gaussian_q4():
    ref = 0.5 * (0.25 * math.log(4) - 0.75 * math.log(4 / 3))
    assert sq_of(CoefficientVector.single(0), 4.0) == pytest.approx(ref, abs=1e-7)


def test_sq_homogeneous(rng):
    c = random_vector(rng, 10)
    g = default_grid(9)
    f, ft = synthesize(c, g), synthesize(fourier_coefficients(c), g)
    assert sq_functional(f.scaled(2.5j), ft.scaled(2.5j), 3.0) == pytest.approx(sq_functional(f, ft, 3.0), abs=1e-13)


def test_sq_rejects_small_q():
    c = CoefficientVector.single(0)
    with pytest.raises(ValueError):
        sq_of(c, 1.5)


def test_gs_identity_at_two():
    f = synthesize(CoefficientVector.single(0), default_grid(0))
    np.testing.assert_allclose(gs_apply(f, 2.0).values, f.values, atol=1e-12)


@pytest.mark.parametrize("s", [1.5, 2.0, 3.0])
def test_gs_homogeneity(rng, s):
    # G_s(lam f) = lam |lam|^(s-2) / |lam|^s G_s(f) = G_s(f) / lam for lam > 0
    g = QuadratureGrid(3.0, 300)
    f = GridFunction(g, np.exp(-g.nodes ** 2) * (1 + 0.3 * rng.standard_normal(g.size)))
    np.testing.assert_allclose(gs_apply(f.scaled(2.0), s).values, 0.5 * gs_apply(f, s).values, rtol=1e-12)


def test_gs_odd_in_sign(rng):
    g = QuadratureGrid(3.0, 300)
    f = GridFunction(g, rng.standard_normal(g.size))
    np.testing.assert_allclose(gs_apply(f.scaled(-1.0), 3.0).values, -gs_apply(f, 3.0).values, rtol=1e-14)


def test_gs_zero():
    with pytest.raises(DegenerateInputError):
        gs_apply(GridFunction(QuadratureGrid(1.0, 4), np.zeros(9)), 3.0)


# gradients ---------------------------------------------------------------------

def test_gradient_radial_zero():
    c = CoefficientVector.single(0, size=6)
    g = grad_total_entropy(c)
    assert abs(np.vdot(c.coeffs, g).real) < 1e-8


def test_gradient_odd_fplus_fd(rng):
    from entropy_lab.oscillator_basis import active_indices

    idx = active_indices(Symmetry.ODD_FPLUS, 8)
    for _ in range(10):
        b = rng.standard_normal(idx.size) / (1.0 + idx)
        make = lambda v: CoefficientVector.from_active(Symmetry.ODD_FPLUS, idx, v)
        g = np.real(grad_total_entropy(make(b)))
        fd = np.array([(total_entropy(make(b + 1e-5 * e)).total - total_entropy(make(b - 1e-5 * e)).total) / 2e-5
                       for e in np.eye(idx.size)])
        assert np.abs(fd - g).max() / np.abs(g).max() < 1e-5


def test_grad_sq_gaussian():
    assert np.abs(grad_sq(CoefficientVector.single(0), 4.0).values).max() < 1e-7


def test_grad_sq_unitary(rng):
    c = random_vector(rng, 10)
    c = c.scaled(1 / math.sqrt(c.norm2()))
    assert np.abs(grad_sq(c, 2.0).values).max() < 1e-9


def test_grad_sq_phi1_fd(rng):
    c = CoefficientVector.single(1, size=12)
    g = default_grid(11)
    res = grad_sq(c, 4.0, g)
    assert np.abs(res.values).max() > 1e-3
    for _ in range(3):
        # odd directions keep the zero of psi at the origin, where |psi|^p stays smooth in eps
        a = np.zeros(12, dtype=complex)
        a[1::2] = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        d = CoefficientVector(a, Symmetry.ODD)
        dpsi = synthesize(d, g).values
        predicted = float(g.integrate(np.conj(dpsi) * res.values).real)
        eps = 1e-6
        up = sq_of(CoefficientVector(c.coeffs + eps * d.coeffs), 4.0, g)
        dn = sq_of(CoefficientVector(c.coeffs - eps * d.coeffs), 4.0, g)
        fd = (up - dn) / (2 * eps)
        assert predicted == pytest.approx(fd, rel=1e-5, abs=1e-9)


# grid Fourier --------------------------------------------------------------------

def test_grid_fourier_gaussian():
    g = QuadratureGrid(8.0, 800)
    f = GridFunction(g, np.exp(-math.pi * g.nodes ** 2))
    assert np.abs(grid_fourier(f).values - f.values).max() < 1e-8


def test_grid_fourier_phi1():
    g = default_grid(1)
    f = synthesize(CoefficientVector.single(1), g)
    assert np.abs(grid_fourier(f).values - 1j * f.values).max() < 1e-8


def test_grid_fourier_inverse_roundtrip(rng):
    c = random_vector(rng, 10)
    f = synthesize(c, default_grid(9))
    back = grid_fourier(grid_fourier(f), inverse=True)
    assert np.abs(back.values - f.values).max() < 1e-10


def test_grid_fourier_support_error():
    g = QuadratureGrid(1.0, 100)
    with pytest.raises(SupportError):
        grid_fourier(GridFunction(g, np.exp(-g.nodes ** 2)))


# right derivative ----------------------------------------------------------------

def test_eq8_gaussian():
    c = CoefficientVector.single(0)
    assert abs(eq8_check(c, 1e-3) - ENTROPY_BOUND) < 1e-2
    assert abs(eq8_check(c, 1e-4) - ENTROPY_BOUND) < 1e-3


def test_eq8_phi1_monotone():
    c = CoefficientVector.single(1)
    ref = total_entropy(c).total
    errs = [eq8_check(c, s) - ref for s in (1e-2, 1e-3, 1e-4)]
    assert abs(errs[0]) > abs(errs[1]) > abs(errs[2])
    assert all(e < 0 for e in errs)          # one-sided approach from below
    assert 5 < errs[0] / errs[1] < 20 and 5 < errs[1] / errs[2] < 20


def test_eq8_limit_above_bound(rng):
    c = random_vector(rng, 8)
    assert eq8_check(c, 1e-4) >= ENTROPY_BOUND - 1e-3


def test_eq8_step_range():
    with pytest.raises(ValueError):
        eq8_check(CoefficientVector.single(0), 0.5)
