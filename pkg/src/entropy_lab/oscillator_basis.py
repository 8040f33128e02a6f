"""Harmonic-oscillator basis for the Fourier kernel exp(2*pi*i*x*y).

The functions are ``phi_n(x) = (2*pi)**0.25 * psi_n(sqrt(2*pi)*x)`` where
``psi_n`` are the standard unit-norm Hermite functions.  With this scaling
``phi_0(x) = 2**0.25 * exp(-pi*x**2)`` and the Fourier transform acts
diagonally, ``F phi_n = i**n phi_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .grid import GridFunction, QuadratureGrid, SupportError

MAX_INDEX = 2048
FOURIER_KERNEL = "exp(+2*pi*i*x*y), unit L2 norm"

_RESCALE = 1e100
_LOG_RESCALE = math.log(_RESCALE)


class Symmetry(str, Enum):
    FULL = "full"
    ODD = "odd"
    ODD_FPLUS = "odd_fplus"

    @classmethod
    def parse(cls, value: "Symmetry | str") -> "Symmetry":
        if isinstance(value, cls):
            return value
        return cls(str(value).replace("-", "_"))

    @property
    def is_real(self) -> bool:
        return self is Symmetry.ODD_FPLUS

    def allows(self, n: np.ndarray | int) -> np.ndarray | bool:
        n = np.asarray(n)
        if self is Symmetry.FULL:
            return np.ones(n.shape, dtype=bool)
        if self is Symmetry.ODD:
            return n % 2 == 1
        return n % 4 == 1


def active_indices(symmetry: Symmetry | str, basis_size: int) -> np.ndarray:
    """Basis indices carried by a truncation of dimension ``basis_size``.

    ``full`` keeps ``phi_0..phi_{N-1}``.  ``odd`` keeps the first N odd
    functions ``phi_1, phi_3, ..., phi_{2N-1}``.  ``odd_fplus`` is the real,
    ``F = +i`` part of that same odd truncation, i.e. the indices ``n = 1 mod 4``
    below ``2N``.
    """
    sym = Symmetry.parse(symmetry)
    if basis_size < 1:
        raise ValueError(f"basis size must be >= 1, got {basis_size}")
    if sym is Symmetry.FULL:
        idx = np.arange(basis_size)
    else:
        idx = np.arange(1, 2 * basis_size, 2)
        if sym is Symmetry.ODD_FPLUS:
            idx = idx[idx % 4 == 1]
    if idx[-1] > MAX_INDEX:
        raise ValueError(f"basis index {idx[-1]} exceeds the cap {MAX_INDEX}")
    return idx


@dataclass(frozen=True)
class BasisSpec:
    max_index: int
    convention: str = FOURIER_KERNEL

    def __post_init__(self):
        _check_index(self.max_index)


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """Expansion coefficients ``a_0..a_max`` tagged with a symmetry class."""

    coeffs: np.ndarray
    symmetry: Symmetry = Symmetry.FULL

    def __post_init__(self):
        a = np.array(self.coeffs, dtype=complex).reshape(-1)
        if a.size == 0:
            raise ValueError("coefficient vector is empty")
        _check_index(a.size - 1)
        if not np.all(np.isfinite(a)):
            raise ValueError("coefficients must be finite")
        sym = Symmetry.parse(self.symmetry)
        n = np.arange(a.size)
        if np.any(a[~sym.allows(n)] != 0):
            raise ValueError(f"coefficients outside the {sym.value} class are nonzero")
        if sym.is_real and np.any(a.imag != 0):
            raise ValueError("odd_fplus coefficients must be real")
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", a)
        object.__setattr__(self, "symmetry", sym)

    @classmethod
    def from_active(cls, symmetry, indices, values, size: int | None = None) -> "CoefficientVector":
        indices = np.asarray(indices)
        a = np.zeros(size or int(indices.max()) + 1, dtype=complex)
        a[indices] = values
        return cls(a, Symmetry.parse(symmetry))

    @classmethod
    def single(cls, n: int, size: int | None = None, value: complex = 1.0) -> "CoefficientVector":
        a = np.zeros(size or n + 1, dtype=complex)
        a[n] = value
        return cls(a, Symmetry.FULL)

    @property
    def max_index(self) -> int:
        return self.coeffs.size - 1

    def highest_nonzero(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else 0

    def norm2(self) -> float:
        """Squared Parseval norm."""
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def scaled(self, factor: complex) -> "CoefficientVector":
        sym = self.symmetry
        if sym.is_real and complex(factor).imag != 0:
            sym = Symmetry.ODD
        return CoefficientVector(self.coeffs * factor, sym)

    def padded(self, size: int) -> "CoefficientVector":
        if size < self.coeffs.size:
            raise ValueError("cannot pad to a smaller size")
        a = np.zeros(size, dtype=complex)
        a[: self.coeffs.size] = self.coeffs
        return CoefficientVector(a, self.symmetry)


def _check_index(n: int) -> None:
    if n < 0:
        raise ValueError(f"basis index must be nonnegative, got {n}")
    if n > MAX_INDEX:
        raise ValueError(f"basis index {n} exceeds the cap {MAX_INDEX}")


def support_radius(max_index: int) -> float:
    """Half-width beyond which every ``phi_n``, ``n <= max_index``, is negligible."""
    return math.sqrt((2 * max_index + 1) / (2 * math.pi)) * 1.5 + 4.0


def basis_values(max_index: int, x) -> np.ndarray:
    """Array of shape ``(max_index + 1, len(x))`` holding ``phi_n(x)``.

    Runs the normalized three-term recurrence on mantissas and keeps a
    per-point log scale, so neither the polynomial growth nor the Gaussian
    tail over- or underflows in intermediate steps.
    """
    _check_index(max_index)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = math.sqrt(2 * math.pi) * x
    out = np.empty((max_index + 1, x.size))
    log_scale = 0.25 * math.log(2.0) - math.pi * x * x
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    out[0] = np.exp(log_scale)
    for n in range(max_index):
        nxt = math.sqrt(2.0 / (n + 1)) * u * cur - math.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if big.any():
            cur[big] /= _RESCALE
            prev[big] /= _RESCALE
            log_scale[big] += _LOG_RESCALE
        with np.errstate(under="ignore"):
            out[n + 1] = cur * np.exp(log_scale)
    return out


def eval_basis(n: int, x) -> float | np.ndarray:
    """``phi_n(x)``; scalar in, scalar out."""
    _check_index(n)
    vals = basis_values(n, x)[n]
    return float(vals[0]) if np.ndim(x) == 0 else vals


def basis_derivatives(indices, x, order: int) -> np.ndarray:
    """``d^k phi_n / dx^k`` for ``k = 0..order``; shape ``(order+1, len(indices), len(x))``.

    Uses the ladder identity ``phi_n' = sqrt(pi) (sqrt(n) phi_{n-1} - sqrt(n+1) phi_{n+1})``.
    """
    indices = np.asarray(indices, dtype=int)
    top = int(indices.max()) + order
    vals = basis_values(top, x)
    out = np.empty((order + 1, indices.size, vals.shape[1]))
    out[0] = vals[indices]
    n = np.arange(top + 1)[:, None]
    cur = vals
    for k in range(1, order + 1):
        d = np.zeros_like(cur)
        d[1:-1] = math.sqrt(math.pi) * (np.sqrt(n[1:-1]) * cur[:-2] - np.sqrt(n[1:-1] + 1) * cur[2:])
        d[0] = -math.sqrt(math.pi) * cur[1]
        cur = d
        out[k] = cur[indices]
    return out


def derivative_coefficients(c: CoefficientVector) -> CoefficientVector:
    """Expansion of ``d psi/dx`` (one index longer than ``c``)."""
    a = np.concatenate([c.coeffs, [0.0]])
    m = np.arange(a.size)
    d = np.zeros_like(a)
    d[:-1] += np.sqrt(m[1:]) * a[1:]
    d[1:] -= np.sqrt(m[1:]) * a[:-1]
    return CoefficientVector(math.sqrt(math.pi) * d, Symmetry.FULL)


def synthesize(c: CoefficientVector, grid: QuadratureGrid) -> GridFunction:
    """Samples of ``sum_n a_n phi_n`` on ``grid``."""
    top = c.highest_nonzero()
    need = support_radius(top)
    if grid.half_width < need:
        raise SupportError(
            f"grid half-width {grid.half_width:g} is below the support radius {need:.4g} "
            f"required for index {top}"
        )
    active = np.flatnonzero(c.coeffs)
    vals = basis_values(top, grid.nodes)[active]
    return GridFunction(grid, c.coeffs[active] @ vals, c)


def fourier_coefficients(c: CoefficientVector) -> CoefficientVector:
    """Coefficients of the Fourier transform: ``a_n -> i**n a_n``."""
    phases = np.array([1, 1j, -1, -1j])[np.arange(c.coeffs.size) % 4]
    a = c.coeffs * phases
    sym = c.symmetry
    if sym.is_real:
        # F = +i sector: the transform is i times a real vector
        sym = Symmetry.ODD
    return CoefficientVector(a, sym)


def project_subspace(c: CoefficientVector, symmetry: Symmetry | str) -> CoefficientVector:
    """Zero the coefficients outside ``symmetry`` (and drop imaginary parts for odd_fplus)."""
    sym = Symmetry.parse(symmetry)
    a = np.where(sym.allows(np.arange(c.coeffs.size)), c.coeffs, 0)
    if sym.is_real:
        a = a.real.astype(complex)
    return CoefficientVector(a, sym)
