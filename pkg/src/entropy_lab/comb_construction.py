"""Delta combs, bi-Gaussian comb constructions and their limits.

A comb ``d0 = sum_n b_n delta(x - x_n)`` with ``x_n = x0 + n r`` and
``|b_n| = b`` is paired with a two-variable profile ``psi2`` to build

    plain             psi1(x)  = sum_n b_n psi2(a x,   (x - x_n)/a)
    primed            psi1'(x) = sum_n b_n psi2(a x_n, (x - x_n)/a)
    truncated         plain, each term kept only on its cell [x_n - r/2, x_n + r/2)
    truncated_primed  primed, each term kept only on its cell

With the alternating comb ``b_n = (-1)^n``, ``x_n = n + 1/2`` and the
symmetric Gaussian ``exp(-pi (x^2 + y^2))`` the plain and primed variants are
the odd bi-Gaussians ``Phi_a`` and ``Phi'_a``.

Comb parameters are kept as exact sympy numbers so the duality algebra and
the derived constants can be checked with zero tolerance.  Profiles are
centered Gaussians, for which every norm, entropy and Fourier transform has
a closed form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Optional

import mpmath
import numpy as np
import sympy as sp
from scipy.optimize import minimize_scalar

from .functionals import (
    ENTROPY_BOUND,
    conjugate_exponent,
    gs_apply,
    grid_fourier,
    p_norm,
)
from .grid import GridFunction, QuadratureGrid, ResolutionError, SupportError

A_FLOOR = 0.05              # smallest a used for quadrature-backed checks
TERM_FLOOR = 1e-16          # comb terms whose envelope falls below this (relative) are dropped
VALUE_FLOOR = 1e-300        # each term is evaluated wherever it exceeds this
SPACING_RATIO = 24          # default comb grid spacing is a / SPACING_RATIO
ODD_LIMIT = 2.0 * ENTROPY_BOUND


class DomainError(ValueError):
    """An argument lies outside the range an operation supports."""


class InadmissibleCombError(ValueError):
    """The comb is not known to have a comb as its Fourier transform."""


# ---------------------------------------------------------------------------
# delta combs
# ---------------------------------------------------------------------------

def _exact(v) -> sp.Expr:
    if isinstance(v, sp.Basic):
        return v
    if isinstance(v, Fraction):
        return sp.Rational(v.numerator, v.denominator)
    if isinstance(v, float):
        return sp.Rational(v)
    return sp.sympify(v)


def _turns(v) -> sp.Expr:
    """Reduce a phase given in turns to [0, 1)."""
    v = _exact(v)
    return v - sp.floor(v)


@dataclass(frozen=True)
class DeltaComb:
    """``sum_n b_n delta(x - x0 - n r)`` with ``b_n = b exp(2 pi i (phase0 + phase_step n))``.

    Phases are in turns.  ``pattern``, when given, replaces the linear phase
    rule by a periodic one (``b_n = b exp(2 pi i pattern[n mod len])``).
    ``dual`` holds the Fourier transform once it has been established to be a
    comb, in which case ``admissible`` is set.
    """

    x0: sp.Expr
    r: sp.Expr
    b: sp.Expr
    phase0: sp.Expr = sp.Integer(0)
    phase_step: sp.Expr = sp.Integer(0)
    pattern: Optional[tuple] = None
    dual: Optional["DeltaComb"] = field(default=None, compare=False, repr=False)
    admissible: bool = False

    def __post_init__(self):
        for name in ("x0", "r", "b"):
            object.__setattr__(self, name, _exact(getattr(self, name)))
        object.__setattr__(self, "phase0", _turns(self.phase0))
        object.__setattr__(self, "phase_step", _turns(self.phase_step))
        if self.pattern is not None:
            if len(self.pattern) == 0:
                raise ValueError("phase pattern is empty")
            object.__setattr__(self, "pattern", tuple(_turns(t) for t in self.pattern))
        if not (self.r.is_positive and self.b.is_positive):
            raise ValueError(f"comb needs r > 0 and b > 0, got r={self.r}, b={self.b}")
        if not self.x0.is_real:
            raise ValueError(f"comb offset must be real, got {self.x0}")

    # presets -------------------------------------------------------------
    @classmethod
    def alternating(cls, x0=sp.Rational(1, 2), r=1, b=1) -> "DeltaComb":
        return admit(cls(x0, r, b, 0, sp.Rational(1, 2)))

    @classmethod
    def uniform(cls, x0=0, r=1, b=1) -> "DeltaComb":
        return admit(cls(x0, r, b, 0, 0))

    @classmethod
    def linear(cls, x0, r, b, phase0=0, phase_step=0) -> "DeltaComb":
        return admit(cls(x0, r, b, phase0, phase_step))

    @classmethod
    def periodic(cls, x0, r, b, pattern) -> "DeltaComb":
        return cls(x0, r, b, pattern=tuple(pattern))

    # evaluation ------------------------------------------------------------
    @property
    def rule(self) -> str:
        if self.pattern is not None:
            return "periodic"
        if self.phase_step == sp.Rational(1, 2) and self.phase0 == 0:
            return "alternating"
        if self.phase_step == 0 and self.phase0 == 0:
            return "uniform"
        return "linear"

    def phase(self, n: int) -> sp.Expr:
        if self.pattern is not None:
            return self.pattern[n % len(self.pattern)]
        return _turns(self.phase0 + self.phase_step * n)

    def weight_exact(self, n: int) -> sp.Expr:
        return sp.nsimplify(self.b * sp.exp(2 * sp.pi * sp.I * self.phase(n)))

    def weight(self, n: int) -> complex:
        t = self.phase(n)
        quarter = 4 * t
        if quarter.is_integer:
            # exact signs for the common quarter-turn phases
            return float(self.b) * (1, 1j, -1, -1j)[int(quarter) % 4]
        return float(self.b) * cmath.exp(2j * math.pi * float(t))

    def position(self, n: int) -> float:
        return float(self.x0 + n * self.r)


def _linear_form(d: DeltaComb) -> tuple[sp.Expr, sp.Expr] | None:
    """``(phase0, phase_step)`` if the phase rule is linear in n, else None."""
    if d.pattern is None:
        return d.phase0, d.phase_step
    pat = d.pattern
    step = _turns(pat[1] - pat[0]) if len(pat) > 1 else sp.Integer(0)
    for k, t in enumerate(pat):
        if _turns(t - pat[0] - k * step) != 0:
            return None
    if _turns(step * len(pat)) != 0:
        return None
    return pat[0], step


def _raw_dual(d: DeltaComb) -> DeltaComb:
    form = _linear_form(d)
    if form is None:
        raise InadmissibleCombError(
            f"phase rule {d.rule!r} is not linear; its transform is not decided here"
        )
    phase0, step = form
    # Poisson summation: sum_n exp(2 pi i n (step + k r)) = (1/r) sum_m delta(k - (m - step)/r)
    r_t = 1 / d.r
    b_t = d.b / d.r
    x0_t = -step / d.r
    step_t = d.x0 / d.r
    phase0_t = phase0 - step * d.x0 / d.r
    # reindex so the offset lies in [0, r_t)
    k = -sp.floor(x0_t / r_t)
    x0_t = x0_t + k * r_t
    phase0_t = phase0_t + k * step_t
    return DeltaComb(x0_t, r_t, b_t, phase0_t, step_t)


def admit(d: DeltaComb) -> DeltaComb:
    """Attach the Fourier-dual comb and mark ``d`` admissible."""
    base = replace(d, dual=None, admissible=False)
    dual = replace(_raw_dual(base), admissible=True)
    return replace(base, dual=dual, admissible=True)


def comb_fourier_dual(d: DeltaComb) -> DeltaComb:
    """The Fourier transform of ``d`` as a comb, itself marked admissible.

    Raises :class:`InadmissibleCombError` when the phase rule is not linear.
    """
    dual = d.dual if d.dual is not None else _raw_dual(d)
    # the transform of the dual is the reflection of d, not d itself
    return admit(dual)


def same_lattice(d: DeltaComb, e: DeltaComb) -> bool:
    return sp.simplify(d.x0 - e.x0) == 0 and sp.simplify(d.r - e.r) == 0


def eigenphase(d: DeltaComb) -> sp.Expr | None:
    """``lambda`` with ``F d = lambda d`` when the dual sits on the same lattice, else None."""
    dt = comb_fourier_dual(d)
    if not same_lattice(d, dt) or sp.simplify(d.b - dt.b) != 0:
        return None
    ratios = {sp.simplify(_turns(dt.phase(n) - d.phase(n))) for n in range(4)}
    if len(ratios) != 1:
        return None
    return sp.nsimplify(sp.exp(2 * sp.pi * sp.I * ratios.pop()))


def dilate(d: DeltaComb, mu) -> DeltaComb:
    """Comb for ``sqrt(mu) d0(mu x)``: positions shrink by ``mu``, weights by ``sqrt(mu)``."""
    mu = _exact(mu)
    if not mu.is_positive:
        raise ValueError(f"dilatation factor must be positive, got {mu}")
    out = replace(d, x0=d.x0 / mu, r=d.r / mu, b=d.b / sp.sqrt(mu), dual=None, admissible=False)
    return admit(out) if d.admissible else out


def dual_identity_residual(d: DeltaComb) -> sp.Expr:
    """``b^2/r - b~^2/r~``, which vanishes identically for admissible combs."""
    dt = _require_dual(d)
    return sp.simplify(d.b ** 2 / d.r - dt.b ** 2 / dt.r)


def _require_dual(d: DeltaComb) -> DeltaComb:
    if not d.admissible or d.dual is None:
        raise InadmissibleCombError("comb is not marked admissible")
    return d.dual


def _nonnegative(expr: sp.Expr) -> bool:
    expr = sp.simplify(expr)
    verdict = expr.is_nonnegative
    if verdict is not None:
        return bool(verdict)
    # sympy's evalf carries rigorous error control; ask for enough digits to fix the sign
    val = expr.evalf(60)
    if val == 0:
        return True
    return bool(val > 0)


@dataclass(frozen=True)
class CombConstants:
    C_q: sp.Expr
    C: sp.Expr
    bounds_ok: bool
    p: sp.Expr
    q: sp.Expr


def comb_constants(d: DeltaComb, p=2) -> CombConstants:
    """Exact ``C_q = log(b/b~ r~^(1/q) / r^(1/p))`` and ``C = -log(r r~)``.

    ``bounds_ok`` checks ``C_q >= -(1/2q) log q + (1/2p) log p`` and
    ``C >= -1 + log 2``.
    """
    dt = _require_dual(d)
    p = _exact(p)
    if not (p > 1 and p <= 2):
        raise DomainError(f"p must lie in (1, 2], got {p}")
    q = sp.simplify(p / (p - 1))
    C_q = sp.simplify(sp.log(sp.simplify(d.b / dt.b * dt.r ** (1 / q) / d.r ** (1 / p))))
    C = sp.simplify(-sp.log(sp.simplify(d.r * dt.r)))
    ok_q = _nonnegative(C_q + sp.log(q) / (2 * q) - sp.log(p) / (2 * p))
    ok_c = _nonnegative(C + 1 - sp.log(2))
    return CombConstants(C_q, C, ok_q and ok_c, p, q)


# ---------------------------------------------------------------------------
# Gaussian profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianProfile2D:
    """``psi2(x, y) = N exp(-A x^2/2 - B y^2/2 - C x y)`` with positive definite real part."""

    N: complex
    A: complex
    B: complex
    C: complex = 0.0

    def __post_init__(self):
        for name in ("N", "A", "B", "C"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.N == 0:
            raise DomainError("profile amplitude must be nonzero")
        P = self.real_form
        if not (P[0, 0] > 0 and np.linalg.det(P) > 0):
            raise DomainError(f"real part of the quadratic form is not positive definite: {P.tolist()}")

    @classmethod
    def symmetric(cls, amplitude: complex = 1.0) -> "GaussianProfile2D":
        """``exp(-pi (x^2 + y^2))``."""
        return cls(amplitude, 2 * math.pi, 2 * math.pi, 0.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.A, self.C], [self.C, self.B]])

    @property
    def real_form(self) -> np.ndarray:
        return self.matrix.real

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.N * np.exp(-0.5 * self.A * x * x - 0.5 * self.B * y * y - self.C * x * y)

    def p_norm(self, p: float) -> float:
        """``(int int |psi2|^p)^(1/p) = |N| (2 pi / (p sqrt(det Re M)))^(1/p)``."""
        det = float(np.linalg.det(self.real_form))
        return abs(self.N) * (2 * math.pi / (p * math.sqrt(det))) ** (1.0 / p)

    def entropy(self) -> float:
        """Two-dimensional ``-int rho log rho`` of ``rho = |psi2|^2 / ||psi2||^2``."""
        det = float(np.linalg.det(self.real_form))
        return 1.0 + math.log(math.pi) - 0.5 * math.log(det)

    def x_decay(self) -> float:
        """Smallest curvature of ``log|psi2|`` along x after maximizing over y."""
        P = self.real_form
        return P[0, 0] - P[0, 1] ** 2 / P[1, 1]

    def min_curvature(self) -> float:
        return float(np.linalg.eigvalsh(self.real_form)[0])


def _sqrt_det(M: np.ndarray) -> complex:
    # eigenvalues of a complex symmetric matrix with positive definite real part
    # have positive real part, so principal roots give the analytic continuation
    lam = np.linalg.eigvals(M)
    return complex(np.prod(np.sqrt(lam.astype(complex))))


def profile_transform(psi2: GaussianProfile2D) -> GaussianProfile2D:
    """Two-dimensional Fourier transform ``int int exp(2 pi i (u x + v y)) psi2(x, y)``."""
    M = psi2.matrix
    Mt = 4 * math.pi ** 2 * np.linalg.inv(M)
    N = psi2.N * 2 * math.pi / _sqrt_det(M)
    return GaussianProfile2D(N, Mt[0, 0], Mt[1, 1], Mt[0, 1])


def transpose(psi2: GaussianProfile2D) -> GaussianProfile2D:
    return GaussianProfile2D(psi2.N, psi2.B, psi2.A, psi2.C)


def profile_fourier(psi2: GaussianProfile2D) -> GaussianProfile2D:
    """``T psi2~``: the profile carried by the Fourier transform of a comb construction."""
    return transpose(profile_transform(psi2))


def weak_limit_constant(psi2: GaussianProfile2D) -> complex:
    """``K = int psi2(0, x) dx = N sqrt(2 pi / B)``."""
    return psi2.N * cmath.sqrt(2 * math.pi / psi2.B)


def profile_sq(psi2: GaussianProfile2D, q: float) -> float:
    """``-log(||psi2~||_q / ||psi2||_p)`` in closed form."""
    p = conjugate_exponent(q)
    return -math.log(profile_transform(psi2).p_norm(q) / psi2.p_norm(p))


def profile_total_entropy(psi2: GaussianProfile2D) -> float:
    return psi2.entropy() + profile_transform(psi2).entropy()


def limit_pnorm(d: DeltaComb, psi2: GaussianProfile2D, p: float) -> float:
    """Small-a limit of ``||psi1||_p``: ``b r^(-1/p) ||psi2||_p``."""
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    return float(d.b) * float(d.r) ** (-1.0 / p) * psi2.p_norm(p)


@dataclass(frozen=True)
class LimitEntropy:
    Sq_limit: float
    S_limit: float


def limit_entropy(d: DeltaComb, psi2: GaussianProfile2D, p=2) -> LimitEntropy:
    """Small-a limits ``S_q(psi2) + C_q`` and ``S(psi2) + C`` for an admissible comb."""
    consts = comb_constants(d, p)
    q = float(consts.q)
    return LimitEntropy(
        profile_sq(psi2, q) + float(consts.C_q),
        profile_total_entropy(psi2) + float(consts.C),
    )


# ---------------------------------------------------------------------------
# comb functions on grids
# ---------------------------------------------------------------------------

class Variant(str, Enum):
    PLAIN = "plain"
    PRIMED = "primed"
    TRUNCATED = "truncated"
    TRUNCATED_PRIMED = "truncated_primed"

    @property
    def primed(self) -> bool:
        return self in (Variant.PRIMED, Variant.TRUNCATED_PRIMED)

    @property
    def truncated(self) -> bool:
        return self in (Variant.TRUNCATED, Variant.TRUNCATED_PRIMED)


@dataclass(frozen=True)
class CombFunction:
    comb: DeltaComb
    profile: GaussianProfile2D
    a: float
    variant: Variant = Variant.PLAIN

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        _check_a(self.a)

    @property
    def window(self) -> range:
        """Comb indices whose envelope exceeds ``TERM_FLOOR`` of the peak."""
        s = self.profile.x_decay()
        reach = math.sqrt(2 * math.log(1 / TERM_FLOOR) / s) / self.a
        x0, r = float(self.comb.x0), float(self.comb.r)
        lo = math.floor((-reach - x0) / r) - 1
        hi = math.ceil((reach - x0) / r) + 1
        return range(lo, hi + 1)


def _check_a(a: float) -> None:
    if not (0 < a <= 1):
        raise DomainError(f"a must lie in (0, 1], got {a}")


def comb_grid(a: float, profile: GaussianProfile2D | None = None,
              spacing_ratio: float = SPACING_RATIO) -> QuadratureGrid:
    """Grid resolving width-a structure and covering the width-1/a envelope."""
    _check_a(a)
    profile = profile or GaussianProfile2D.symmetric()
    reach = math.sqrt(2 * 40 * math.log(10) / profile.x_decay()) / a
    return QuadratureGrid.from_spacing(max(5.0 / a, reach), a / spacing_ratio)


def _check_grid(cf: CombFunction, grid: QuadratureGrid) -> None:
    if grid.spacing > cf.a / 20 * (1 + 1e-12):
        raise ResolutionError(
            f"spacing {grid.spacing:.4g} exceeds a/20 = {cf.a / 20:.4g}"
        )
    if grid.half_width < 5.0 / cf.a * (1 - 1e-12):
        raise SupportError(f"half-width {grid.half_width:.4g} is below 5/a = {5 / cf.a:.4g}")


def _fraction(v: sp.Expr) -> Fraction | float:
    v = sp.nsimplify(v)
    if v.is_Rational:
        return Fraction(int(v.p), int(v.q))
    return float(v)


def _cell(grid: QuadratureGrid, d: DeltaComb, n: int) -> tuple[int, int]:
    """Node index range of ``[x_n - r/2, x_n + r/2)``, decided in exact arithmetic."""
    centre = d.x0 + n * d.r
    lo = grid.first_node_at_or_above(_fraction(centre - d.r / 2))
    hi = grid.first_node_at_or_above(_fraction(centre + d.r / 2))
    return lo, hi


def _slice(grid: QuadratureGrid, centre: float, half: float) -> tuple[int, int]:
    h, n = grid.spacing, grid.n_half
    lo = max(int(math.floor((centre - half) / h)) + n, 0)
    hi = min(int(math.ceil((centre + half) / h)) + n + 1, grid.size)
    return lo, hi


def _term(profile: GaussianProfile2D, a: float, xn: float, x: np.ndarray, primed: bool) -> np.ndarray:
    first = a * xn if primed else a * x
    return profile(first, (x - xn) / a)


def _accumulate(cf: CombFunction, grid: QuadratureGrid, other: CombFunction | None = None) -> np.ndarray:
    """Samples of ``cf`` or, with ``other``, of ``cf - other`` summed term by term.

    Differencing inside each term keeps full relative accuracy even when the
    two functions agree to far below double precision.
    """
    d = cf.comb
    reach = cf.a * math.sqrt(2 * math.log(1 / VALUE_FLOOR) / cf.profile.min_curvature())
    window = cf.window
    if other is not None:
        reach = max(reach, other.a * math.sqrt(2 * math.log(1 / VALUE_FLOOR) / other.profile.min_curvature()))
        window = range(min(window.start, other.window.start), max(window.stop, other.window.stop))
    out = np.zeros(grid.size, dtype=complex)
    x_all = grid.nodes
    for n in window:
        xn = d.position(n)
        lo, hi = _slice(grid, xn, reach)
        if lo >= hi:
            continue
        x = x_all[lo:hi]
        idx = np.arange(lo, hi)
        cell = _cell(grid, d, n) if (cf.variant.truncated or (other and other.variant.truncated)) else None

        def piece(f: CombFunction) -> np.ndarray:
            t = _term(f.profile, f.a, xn, x, f.variant.primed)
            if f.variant.truncated:
                t = np.where((idx >= cell[0]) & (idx < cell[1]), t, 0.0)
            return t

        val = piece(cf)
        if other is not None:
            val = val - piece(other)
        out[lo:hi] += d.weight(n) * val
    return out


def eval_comb_function(cf: CombFunction, grid: QuadratureGrid | None = None) -> GridFunction:
    """Samples of a comb construction (grid must satisfy ``h <= a/20`` and ``L >= 5/a``)."""
    grid = grid or comb_grid(cf.a, cf.profile)
    _check_grid(cf, grid)
    return GridFunction(grid, _accumulate(cf, grid))


def phi_a(x, a: float, primed: bool = False) -> np.ndarray:
    """Odd bi-Gaussians by direct summation of the nearest terms.

    ``Phi_a(x) = sum_n (-1)^n exp(-pi a^2 x^2) exp(-pi (x - n - 1/2)^2 / a^2)``;
    the primed family uses ``exp(-pi a^2 (n + 1/2)^2)`` as the envelope.
    """
    _check_a(a)
    x = np.asarray(x, dtype=float)
    reach = int(math.ceil(a * math.sqrt(2 * math.log(1 / VALUE_FLOOR) / (2 * math.pi)))) + 1
    base = np.floor(x)
    out = np.zeros_like(x)
    for k in range(-reach - 1, reach + 1):
        n = base + k
        xn = n + 0.5
        sign = 1.0 - 2.0 * (n % 2)
        env = xn if primed else x
        out += sign * np.exp(-math.pi * a * a * env * env - math.pi * (x - xn) ** 2 / (a * a))
    return out


def alternating_function(a: float, variant: Variant | str = Variant.PLAIN) -> CombFunction:
    return CombFunction(DeltaComb.alternating(), GaussianProfile2D.symmetric(), a, Variant(variant))


def equivalence_gap(d: DeltaComb, psi2: GaussianProfile2D, a: float, p: float = 2.0,
                    pair=(Variant.PLAIN, Variant.PRIMED), grid: QuadratureGrid | None = None) -> float:
    """``||variant1 - variant2||_p`` at this a, differenced term by term."""
    v1, v2 = (Variant(v) for v in pair)
    if v1 is v2:
        return 0.0
    f1, f2 = CombFunction(d, psi2, a, v1), CombFunction(d, psi2, a, v2)
    grid = grid or comb_grid(a, psi2)
    _check_grid(f1, grid)
    return p_norm(GridFunction(grid, _accumulate(f1, grid, f2)), p)


def construction_distance(d: DeltaComb, psi2: GaussianProfile2D, phi2: GaussianProfile2D,
                          a: float, p: float = 2.0, variant=Variant.PLAIN) -> float:
    """``||<d0, psi2>_a - <d0, phi2>_a||_p`` for two profiles on the same comb."""
    f1 = CombFunction(d, psi2, a, variant)
    f2 = CombFunction(d, phi2, a, variant)
    grid = comb_grid(a, psi2)
    g2 = comb_grid(a, phi2)
    if g2.half_width > grid.half_width:
        grid = g2
    _check_grid(f1, grid)
    return p_norm(GridFunction(grid, _accumulate(f1, grid, f2)), p)


def fourier_partner(cf: CombFunction) -> CombFunction:
    """Construction equal to the Fourier transform of ``cf`` (untruncated variants only)."""
    if cf.variant.truncated:
        raise DomainError("truncated constructions have no closed-form transform")
    dual = comb_fourier_dual(cf.comb)
    variant = Variant.PLAIN if cf.variant.primed else Variant.PRIMED
    return CombFunction(dual, profile_fourier(cf.profile), cf.a, variant)


def stationarity_residual(d: DeltaComb | None, psi2: GaussianProfile2D, a: float, q: float,
                          grid: QuadratureGrid | None = None) -> float:
    """``||(G_p - F^-1 G_q F) psi||_q`` for the unit-L2-norm construction at a.

    With ``d=None`` the input is the one-variable Gaussian ``psi2(0, y)``.
    The forward transform uses the exact dual construction; only the inverse
    transform is done on the grid.
    """
    if not q >= 2:
        raise DomainError(f"q must be >= 2, got {q}")
    p = conjugate_exponent(q)
    if d is None:
        grid = grid or QuadratureGrid.from_spacing(12.0, 0.01)
        x = grid.nodes
        psi = GridFunction(grid, psi2(0.0, x))
        B = psi2.B
        amp = psi2.N * cmath.sqrt(2 * math.pi / B)
        psi_t = GridFunction(grid, amp * np.exp(-2 * math.pi ** 2 * x * x / B))
    else:
        _require_dual(d)
        cf = CombFunction(d, psi2, a, Variant.PLAIN)
        partner = fourier_partner(cf)
        grid = grid or comb_grid(a, psi2)
        psi = eval_comb_function(cf, grid)
        psi_t = GridFunction(grid, _accumulate(partner, grid))
    scale = 1.0 / psi.l2_norm()
    psi, psi_t = psi.scaled(scale), psi_t.scaled(scale)
    back = grid_fourier(gs_apply(psi_t, q), inverse=True, edge_tol=1e-9)
    residual = GridFunction(grid, gs_apply(psi, p).values - back.values)
    return p_norm(residual, q)


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    a: float
    mu: float
    residual: float

    @property
    def poor(self) -> bool:
        return self.residual > 0.1


def _unit(v: np.ndarray, grid: QuadratureGrid) -> np.ndarray:
    n = math.sqrt(float(grid.integrate(np.abs(v) ** 2).real))
    return v / n


def _fit_residual(target: np.ndarray, grid: QuadratureGrid, a: float, mu: float) -> float:
    model = _unit(phi_a(mu * grid.nodes, a), grid)
    ov = complex(grid.integrate(model * target))
    phase = ov / abs(ov) if ov != 0 else 1.0
    diff = target - phase * model
    return math.sqrt(max(float(grid.integrate(np.abs(diff) ** 2).real), 0.0))


def _golden(fun, xs: np.ndarray, k: int, tol: float) -> tuple[float, float]:
    """Golden-section refinement of ``fun`` around scan point ``xs[k]``."""
    lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
    inner = np.linspace(lo, hi, 5)
    vals = [fun(x) for x in inner]
    j = int(np.argmin(vals))
    if j in (0, 4):
        return float(inner[j]), float(vals[j])
    res = minimize_scalar(fun, bracket=(inner[j - 1], inner[j], inner[j + 1]), method="golden",
                          options={"xtol": tol})
    if res.fun <= vals[j] and xs[0] <= res.x <= xs[-1]:
        return float(res.x), float(res.fun)
    return float(inner[j]), float(vals[j])


def fit_bigaussian(f: GridFunction, a_range=(A_FLOOR, 1.0), mu_range=(0.5, 2.0),
                   tol: float = 1e-10) -> FitResult:
    """Best ``Phi_a(mu x)`` (normalized, any overall phase) for an odd function.

    A coarse scan over ``(a, mu)`` picks a cell; golden-section search over
    ``a`` nested inside golden-section search over ``mu`` refines it.
    """
    grid = f.grid
    v = f.values
    norm = f.l2_norm()
    if norm == 0:
        raise DomainError("cannot fit the zero function")
    odd_part = 0.5 * (v - v[::-1])
    if math.sqrt(float(grid.integrate(np.abs(v - odd_part) ** 2).real)) > 1e-6 * norm:
        raise DomainError("fit_bigaussian needs an odd function")
    target = np.conj(v) / norm

    a_grid = np.linspace(*a_range, 20)
    mu_grid = np.linspace(*mu_range, 16)
    scan = np.array([[_fit_residual(target, grid, a, mu) for a in a_grid] for mu in mu_grid])
    jm, ja = np.unravel_index(int(np.argmin(scan)), scan.shape)

    def inner(mu: float) -> tuple[float, float]:
        return _golden(lambda a: _fit_residual(target, grid, a, mu), a_grid, ja, tol)

    mu, _ = _golden(lambda m: inner(m)[1], mu_grid, jm, tol)
    a, _ = inner(mu)
    return FitResult(a, mu, _fit_residual(target, grid, a, mu))


# ---------------------------------------------------------------------------
# high-precision bi-Gaussian entropies
# ---------------------------------------------------------------------------

_LN10 = math.log(10.0)


def _bigaussian_mp(a: float, primed: bool, ctx, K: int):
    """``(S, ||.||_2^2)`` of ``Phi_a`` or ``Phi'_a`` by trapezoid sums in ``ctx`` precision.

    Nodes are ``j/K``; every integer is a node.  On each unit cell the five
    nearest Gaussian terms are advanced by exact multiplicative recurrences,
    so only one exponential per term per cell and one logarithm per node are
    needed.  The integrand is even, so only ``x >= 0`` is summed.
    """
    mpf = ctx.mpf
    A = mpf(a)
    h = mpf(1) / K
    c_env = ctx.pi * A * A
    c_loc = ctx.pi / (A * A)
    q = ctx.exp(-2 * h * h * ((0 if primed else c_env) + c_loc))
    half = mpf(1) / 2
    xmax = math.sqrt((ctx.dps + 5) * _LN10 / (2 * math.pi)) / a + 1
    s0 = mpf(0)
    s1 = mpf(0)
    for m in range(int(math.ceil(xmax))):
        x = mpf(m)
        terms = []
        for n in range(m - 2, m + 3):
            xn = n + half
            e0 = -c_env * (xn if primed else x) ** 2 - c_loc * (x - xn) ** 2
            e1 = -c_env * (xn if primed else x + h) ** 2 - c_loc * (x + h - xn) ** 2
            val = ctx.exp(e0)
            terms.append([val if n % 2 == 0 else -val, ctx.exp(e1 - e0)])
        for k in range(K):
            v = ctx.fsum(t[0] for t in terms)
            if v != 0:
                u = v * v
                w = h / 2 if (m == 0 and k == 0) else h
                s0 += w * u
                s1 += w * u * 2 * ctx.log(abs(v))
            for t in terms:
                t[0] *= t[1]
                t[1] *= q
    M = 2 * s0
    return -2 * s1 / M + ctx.log(M), M


@dataclass(frozen=True)
class BigaussianPoint:
    a: float
    S_position: float
    S_momentum: float
    total: float
    norm2: float
    total_limit_gap: float
    norm_limit_gap: float


def bigaussian_point(a: float) -> BigaussianPoint:
    """Entropies and L2 norm of ``Phi_a`` with the gaps to their small-a limits.

    Both gaps shrink like ``exp(-pi / (2 a^2))``, far below double precision,
    so the sums run in multiprecision with ``pi/(2 a^2 ln 10) + 15`` digits.
    The log singularities at the zeros of ``Phi_a`` limit the quadrature to a
    relative accuracy of about 1e-3 on the gaps themselves.
    """
    if not (A_FLOOR <= a <= 1):
        raise DomainError(f"a must lie in [{A_FLOOR}, 1], got {a}")
    dps = int(math.pi / (2 * a * a * _LN10)) + 15
    K = max(60, int(math.ceil(30 / a)), int(math.ceil((math.sqrt(2 * dps * _LN10 / math.pi) + 4) / a)))
    ctx = mpmath.MPContext()
    ctx.dps = dps
    S0, M0 = _bigaussian_mp(a, False, ctx, K)
    S1, M1 = _bigaussian_mp(a, True, ctx, K)
    total = S0 + S1
    return BigaussianPoint(
        a=a,
        S_position=float(S0),
        S_momentum=float(S1),
        total=float(total),
        norm2=float(ctx.sqrt(M0)),
        total_limit_gap=float(total - 2 * (1 - ctx.log(2))),
        norm_limit_gap=float(ctx.sqrt(M0) - 1 / ctx.sqrt(2)),
    )
