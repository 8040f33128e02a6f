import math

import numpy as np
import pytest

from entropy_lab.grid import QuadratureGrid, SupportError
from entropy_lab.oscillator_basis import (
    MAX_INDEX,
    CoefficientVector,
    Symmetry,
    active_indices,
    basis_values,
    eval_basis,
    fourier_coefficients,
    project_subspace,
    support_radius,
    synthesize,
)
from entropy_lab.functionals import default_grid, grid_fourier


def hermite_oracle(n, x):
    """phi_n via numpy's physicists' Hermite series at u = sqrt(2 pi) x, normalized in closed form."""
    u = math.sqrt(2 * math.pi) * x
    coef = np.zeros(n + 1)
    coef[n] = 1.0
    norm = 2 ** 0.25 / math.sqrt(2.0 ** n * math.factorial(n))
    return norm * np.polynomial.hermite.hermval(u, coef) * np.exp(-math.pi * x * x)


def test_phi0_at_zero():
    assert eval_basis(0, 0.0) == pytest.approx(2 ** 0.25, abs=1e-15)


def test_phi1_at_zero():
    assert eval_basis(1, 0.0) == 0.0


@pytest.mark.parametrize("x", [0.3, 1.7, 4.1])
def test_parity_phi5(x):
    assert eval_basis(5, -x) == -eval_basis(5, x)


def test_parity_exact_on_grid():
    g = default_grid(40)
    vals = basis_values(40, g.nodes)
    sign = (-1.0) ** np.arange(41)
    assert np.array_equal(vals[:, ::-1], sign[:, None] * vals)


def test_matches_hermite_series():
    x = np.linspace(-3, 3, 61)
    vals = basis_values(20, x)
    for n in range(21):
        np.testing.assert_allclose(vals[n], hermite_oracle(n, x), atol=1e-12)


def test_cap_exceeded():
    with pytest.raises(ValueError, match="cap"):
        eval_basis(MAX_INDEX + 1, 0.1)
    assert MAX_INDEX >= 512


def test_large_index_bounded():
    x = np.linspace(-25, 25, 2001)
    vals = basis_values(1000, x)[1000]
    assert np.all(np.isfinite(vals))
    assert np.abs(vals).max() < 1.2


def test_tails_small_at_support_radius():
    for n in (10, 128, 512):
        r = support_radius(n)
        assert abs(eval_basis(n, r)) < 1e-14


def test_orthonormality():
    g = default_grid(15)
    v = basis_values(15, g.nodes)
    gram = np.array([[g.integrate(v[i] * v[j]) for j in range(16)] for i in range(16)])
    assert np.abs(gram - np.eye(16)).max() < 1e-10


def test_synthesize_single_term():
    g = default_grid(0)
    f = synthesize(CoefficientVector.single(0), g)
    np.testing.assert_allclose(f.values, 2 ** 0.25 * np.exp(-math.pi * g.nodes ** 2), atol=1e-15)


def test_synthesize_imaginary_phi1_unit_norm():
    c = CoefficientVector(np.array([0, 1j]), Symmetry.ODD)
    f = synthesize(c, default_grid(1))
    assert f.l2_norm() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(f.values, 1j * eval_basis(1, default_grid(1).nodes), atol=1e-15)


def test_synthesize_two_terms_parseval():
    a = np.zeros(6)
    a[1] = a[5] = 1 / math.sqrt(2)
    c = CoefficientVector(a, Symmetry.ODD_FPLUS)
    assert synthesize(c, default_grid(5)).l2_norm() == pytest.approx(1.0, abs=1e-12)


def test_synthesize_linear(rng):
    g = default_grid(9)
    a = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    b = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    fa = synthesize(CoefficientVector(a), g).values
    fb = synthesize(CoefficientVector(b), g).values
    fab = synthesize(CoefficientVector(2 * a - 3j * b), g).values
    np.testing.assert_allclose(fab, 2 * fa - 3j * fb, atol=1e-13)


def test_synthesize_support_error():
    with pytest.raises(SupportError, match="support radius"):
        synthesize(CoefficientVector.single(30), QuadratureGrid(3.0, 300))


def test_odd_synthesis_is_odd(rng):
    a = np.zeros(20, dtype=complex)
    a[1::2] = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    f = synthesize(CoefficientVector(a, Symmetry.ODD), default_grid(19))
    np.testing.assert_array_equal(f.values[::-1], -f.values)


def test_fourier_coefficient_examples():
    assert np.array_equal(fourier_coefficients(CoefficientVector([0, 1, 0, 0])).coeffs, [0, 1j, 0, 0])
    assert np.array_equal(fourier_coefficients(CoefficientVector([1, 0, 0, 0])).coeffs, [1, 0, 0, 0])


def test_fourier_four_times_identity(rng):
    for _ in range(5):
        c = CoefficientVector(rng.standard_normal(17) + 1j * rng.standard_normal(17))
        f = c
        for _ in range(4):
            f = fourier_coefficients(f)
        assert np.array_equal(f.coeffs, c.coeffs)


def test_fourier_class_behaviour():
    a = np.zeros(10)
    a[[1, 5, 9]] = [0.3, -1.0, 2.0]
    c = CoefficientVector(a, Symmetry.ODD_FPLUS)
    f = fourier_coefficients(c)
    assert f.symmetry is Symmetry.ODD
    assert np.array_equal(f.coeffs, 1j * c.coeffs)
    odd = CoefficientVector(np.array([0, 1, 0, 2j]), Symmetry.ODD)
    assert fourier_coefficients(odd).symmetry is Symmetry.ODD


def test_fourier_consistency_with_grid(rng):
    for _ in range(4):
        c = CoefficientVector(rng.standard_normal(16) + 1j * rng.standard_normal(16))
        g = default_grid(15)
        lhs = grid_fourier(synthesize(c, g)).values
        rhs = synthesize(fourier_coefficients(c), g).values
        assert np.abs(lhs - rhs).max() < 1e-8


def test_project_examples():
    assert np.array_equal(project_subspace(CoefficientVector(np.ones(6)), "odd").coeffs, [0, 1, 0, 1, 0, 1])
    c = CoefficientVector(np.array([0, 2 + 3j, 0, 0, 0, 4]))
    assert np.array_equal(project_subspace(c, "odd_fplus").coeffs, [0, 2, 0, 0, 0, 4])


def test_project_idempotent(rng):
    c = CoefficientVector(rng.standard_normal(13) + 1j * rng.standard_normal(13))
    for sym in Symmetry:
        once = project_subspace(c, sym)
        assert np.array_equal(project_subspace(once, sym).coeffs, once.coeffs)


def test_class_invariants_enforced():
    with pytest.raises(ValueError, match="outside"):
        CoefficientVector(np.array([1.0, 1.0]), Symmetry.ODD)
    with pytest.raises(ValueError, match="real"):
        CoefficientVector(np.array([0, 1j]), Symmetry.ODD_FPLUS)
    with pytest.raises(ValueError, match="outside"):
        CoefficientVector(np.array([0, 0, 0, 1.0]), Symmetry.ODD_FPLUS)


def test_active_indices():
    idx = active_indices("odd_fplus", 128)
    assert idx.size == 64 and idx[0] == 1 and idx[-1] == 253 and np.all(idx % 4 == 1)
    assert np.array_equal(active_indices("odd", 4), [1, 3, 5, 7])
    assert np.array_equal(active_indices("full", 3), [0, 1, 2])
    with pytest.raises(ValueError):
        active_indices("full", 0)
