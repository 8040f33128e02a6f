"""Norms, entropies and the Hausdorff-Young functional on quadrature grids.

The entropy integrand ``rho*log(rho)`` is smooth except near zeros of the
wavefunction.  A zero ``zeta = a + i*eps`` of an analytic ``psi`` makes
``|psi|^2 log|psi|^2`` behave like ``T(t) log(t**2 + eps**2)`` with ``t = x - a``
and ``T`` the Taylor polynomial of ``|psi|^2`` at ``a``.  Plain trapezoid sums
converge only like ``h**3`` there.  For oscillator expansions each zero
within a few spacings of the axis is located by Newton's method, the model
term is multiplied by a flat-top window ``exp(-(t/w)**8)``, and its trapezoid
sum is swapped for its exact integral.  The remainder is smooth, so the
trapezoid rule is spectrally accurate again.  Gradients are exact
derivatives of the corrected value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import digamma, gamma

from .oscillator_basis import (
    CoefficientVector,
    Symmetry,
    basis_derivatives,
    basis_values,
    fourier_coefficients,
    support_radius,
    synthesize,
)
from .grid import DegenerateInputError, GridFunction, QuadratureGrid, SupportError

DEFAULT_TOL = 1e-9
RHO_FLOOR = 1e-300
ENTROPY_BOUND = 1.0 - math.log(2.0)

_WINDOW_RATIO = 30.0    # flat-top window half-width in grid spacings
_DEGREE = 6             # Taylor degree of |psi|^2 kept in the subtracted model
_EPS_CUTOFF = 3.0       # zeros further than this many spacings off the axis are left alone
_NEWTON_STEPS = 10
_FACTORIALS = np.array([math.factorial(k) for k in range(_DEGREE + 2)], dtype=float)


def default_spacing(max_index: int) -> float:
    """Grid spacing that resolves every product of basis functions up to ``max_index``."""
    band = math.sqrt((2 * max_index + 1) / (2 * math.pi)) + 2.0
    return min(0.025, 1.0 / (12.0 * band))


def default_grid(max_index: int) -> QuadratureGrid:
    return QuadratureGrid.from_spacing(support_radius(max_index), default_spacing(max_index))


@dataclass(frozen=True)
class EntropyReport:
    S_position: float
    S_momentum: float
    total: float
    norm2: float
    tolerance: float = DEFAULT_TOL


# ---------------------------------------------------------------------------
# plain grid functionals
# ---------------------------------------------------------------------------

def p_norm(f: GridFunction, p: float) -> float:
    if not (math.isfinite(p) and p >= 1):
        raise ValueError(f"p must be finite and >= 1, got {p}")
    return float(f.grid.integrate(np.abs(f.values) ** p).real) ** (1.0 / p)


def _plain_entropy(grid: QuadratureGrid, values: np.ndarray) -> float:
    u = np.abs(values) ** 2
    m = float(grid.integrate(u).real)
    if not m > 0:
        raise DegenerateInputError("entropy of the zero function is undefined")
    rho = u / m
    keep = rho > RHO_FLOOR
    log_rho = np.zeros_like(rho)
    log_rho[keep] = np.log(rho[keep])
    return -float(grid.integrate(rho * log_rho))


def shannon_entropy(f: GridFunction) -> float:
    """``-int rho log rho`` with ``rho = |f|^2/||f||^2`` (0 log 0 = 0).

    Uses the zero-corrected rule when ``f`` carries its oscillator expansion.
    """
    if f.source is not None and np.any(f.source.coeffs != 0):
        idx = np.flatnonzero(f.source.coeffs)
        engine = _engine(tuple(idx), f.grid)
        return engine.entropy(f.source.coeffs[idx])[0]
    return _plain_entropy(f.grid, f.values)


# ---------------------------------------------------------------------------
# corrected entropy for oscillator expansions
# ---------------------------------------------------------------------------

def _window_integral(j: int, w: float) -> float:
    """``int t**j exp(-(t/w)**8) dt``."""
    if j % 2:
        return 0.0
    return 0.25 * w ** (j + 1) * gamma((j + 1) / 8.0)


def _log_moment(j: int, w: float) -> float:
    """``int t**j log(t**2) exp(-(t/w)**8) dt``."""
    if j % 2:
        return 0.0
    s = (j + 1) / 8.0
    return 0.25 * w ** (j + 1) * gamma(s) * (2.0 * math.log(w) + 0.25 * digamma(s))


class _WindowMoments:
    """``I_j(eps) = int t**j log(t**2 + eps**2) W(t) dt`` and ``dI_j/deps`` for small ``eps/w``.

    With ``s = eps**2``, ``dI_{2k}/ds`` reduces to the plain moments of ``W`` plus
    ``(-s)**k int W/(t**2+s)``; the latter is ``pi/sqrt(s)`` plus a power series
    whose coefficients are Mellin transforms of ``W - 1``.
    """

    def __init__(self, degree: int, w: float):
        self.degree = degree
        self.base = np.array([_log_moment(j, w) for j in range(degree + 1)])
        self.plain = np.array([_window_integral(j, w) for j in range(degree + 1)])
        # int (W - 1) t**(-2m-2) dt, m = 0..3
        self.tail = np.array([0.25 * w ** (-2 * m - 1) * gamma((-2 * m - 1) / 8.0) for m in range(4)])

    def __call__(self, eps):
        eps = np.asarray(eps, dtype=float)
        val = np.repeat(self.base[:, None], eps.size, axis=1)
        der = np.zeros_like(val)
        for j in range(0, self.degree + 1, 2):
            k = j // 2
            for i in range(k):
                wv = self.plain[2 * (k - 1 - i)]
                val[j] += (-1) ** i * wv * eps ** (2 * i + 2) / (i + 1)
                der[j] += (-1) ** i * wv * 2 * eps ** (2 * i + 1)
            sv = 2 * math.pi * eps ** (2 * k + 1) / (2 * k + 1)
            sd = 2 * math.pi * eps ** (2 * k)
            for m, cm in enumerate(self.tail):
                sv = sv + cm * (-1) ** m * eps ** (2 * m + 2 * k + 2) / (m + k + 1)
                sd = sd + cm * (-1) ** m * 2 * eps ** (2 * m + 2 * k + 1)
            val[j] += (-1) ** k * sv
            der[j] += (-1) ** k * sd
        return val, der


class EntropyEngine:
    """Entropy and its gradient for expansions over a fixed set of basis indices."""

    def __init__(self, indices, grid: QuadratureGrid):
        self.indices = np.asarray(indices, dtype=int)
        self.grid = grid
        top = int(self.indices.max())
        need = support_radius(top)
        if grid.half_width < need:
            raise SupportError(
                f"grid half-width {grid.half_width:g} is below the support radius {need:.4g}"
            )
        self.basis = basis_values(top, grid.nodes)[self.indices]
        h = grid.spacing
        self.weights = np.full(grid.size, h)
        self.weights[[0, -1]] *= 0.5
        self.window = _WINDOW_RATIO * h
        self.moments = _WindowMoments(_DEGREE, self.window)

    def synthesize(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b)
        if np.iscomplexobj(b):
            return b.real @ self.basis + 1j * (b.imag @ self.basis)
        return b @ self.basis

    def entropy(self, b: np.ndarray, with_grad: bool = False):
        """Return ``(S, dS)`` where ``dS[n] = dS/d(Re b_n) + i dS/d(Im b_n)``."""
        psi = self.synthesize(b)
        u = (psi * np.conj(psi)).real if np.iscomplexobj(psi) else psi * psi
        w = self.weights
        m = float(np.dot(w, u))
        if not m > 0:
            raise DegenerateInputError("entropy of the zero function is undefined")
        rho = u / m
        keep = rho > RHO_FLOOR
        log_rho = np.zeros_like(rho)
        log_rho[keep] = np.log(rho[keep])
        s_plain = -float(np.dot(w, rho * log_rho))

        grad = None
        if with_grad:
            kernel = w * psi * (log_rho + s_plain)
            grad = -(2.0 / m) * self._project(kernel)

        corr = self._zero_correction(b, psi, u, m, with_grad)
        if corr is None:
            return s_plain, grad
        delta, dgrad = corr
        if with_grad:
            grad = grad + dgrad
        return s_plain + delta, grad

    def _project(self, g: np.ndarray) -> np.ndarray:
        if np.iscomplexobj(g):
            return self.basis @ g.real + 1j * (self.basis @ g.imag)
        return self.basis @ g

    def _taylor(self, b, a):
        d = basis_derivatives(self.indices, a, _DEGREE + 1) / _FACTORIALS[: _DEGREE + 2, None, None]
        return d, np.einsum("n,knz->kz", b, d)

    def _find_zeros(self, b, u):
        """Complex zeros ``a + i*eps`` of the expansion lying within ``3h`` of the real axis."""
        x = self.grid.nodes
        h = self.grid.spacing
        inner = u[1:-1]
        cand = np.flatnonzero((inner < u[:-2]) & (inner <= u[2:])) + 1
        if cand.size:
            cand = cand[np.maximum(u[cand - 1], u[cand + 1]) > 1e-250 * u.max()]
        if cand.size:
            # parabola through three nodes: drop minima whose depth puts the zero far off the axis
            um, u0, up = u[cand - 1], u[cand], u[cand + 1]
            c2 = 0.5 * (um - 2 * u0 + up)
            low = u0 - (up - um) ** 2 / (16 * np.where(c2 > 0, c2, 1.0))
            cand = cand[(c2 <= 0) | (low <= (2 * _EPS_CUTOFF) ** 2 * c2)]
        if cand.size == 0:
            return None
        # each grid minimum seeds both roots of the local quadratic model, which
        # catches pairs of zeros closer together than the spacing
        cand = np.concatenate([cand, cand])
        far = np.arange(cand.size) >= cand.size // 2
        a = x[cand].astype(float)
        powers = np.arange(_DEGREE + 2)[:, None]
        ok = np.ones(a.size, dtype=bool)
        for sweep in range(3):
            d, P = self._taylor(b, a)
            scale = np.sum(np.abs(P) * h ** powers, axis=0)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                disc = np.sqrt((P[1] * P[1] - 4 * P[0] * P[2]).astype(complex))
                pick = np.real(np.conj(P[1]) * disc) >= 0
                if sweep == 0:
                    pick ^= far
                den = -P[1] - np.where(pick, disc, -disc)
                tau = np.where(den != 0, 2 * P[0] / den, 0.0) + 0j
                for _ in range(_NEWTON_STEPS):
                    tk = tau ** powers
                    p = np.sum(P * tk, axis=0)
                    dp = np.sum(powers[1:] * P[1:] * tk[:-1], axis=0)
                    tau = tau - np.where(dp != 0, p / dp, 0.0)
                resid = np.abs(np.sum(P * tau ** powers, axis=0))
            ok &= np.isfinite(tau) & (resid <= 1e-8 * scale) & (np.abs(tau) < 4 * h)
            tau = np.where(ok, tau, 0.0)
            if sweep < 2:
                a = a + tau.real
        eps = tau.imag
        ok &= (np.abs(a - x[cand]) <= 1.5 * h) & (np.abs(eps) < _EPS_CUTOFF * h)
        if not ok.any():
            return None
        keep = np.flatnonzero(ok)
        order = keep[np.argsort(a[keep], kind="stable")]
        uniq = [order[0]]
        for i in order[1:]:
            if abs(a[i] - a[uniq[-1]]) > 1e-9 * h or abs(eps[i] - eps[uniq[-1]]) > 1e-9 * h:
                uniq.append(i)
        uniq = np.array(uniq)
        return cand[uniq], a[uniq], eps[uniq], d[:, :, uniq], P[:, uniq]

    def _zero_correction(self, b, psi, u, m, with_grad):
        found = self._find_zeros(b, u)
        if found is None:
            return None
        cand, a, eps_s, d, P = found
        h = self.grid.spacing
        deg = _DEGREE
        r = np.empty((deg + 2, a.size))
        for j in range(deg + 2):
            r[j] = sum(np.real(np.conj(P[k]) * P[j - k]) for k in range(j + 1))

        x = self.grid.nodes
        wdt = self.window
        half = int(math.ceil(1.6 * wdt / h))
        cols = cand[:, None] + np.arange(-half, half + 1)
        inside = (cols >= 0) & (cols < x.size)
        t = x[np.clip(cols, 0, x.size - 1)] - a[:, None]
        eps = np.abs(eps_s)
        q = t * t + (eps * eps)[:, None]
        pos = q > 0
        lg = np.zeros_like(q)
        lg[pos] = np.log(q[pos])
        win = np.where(inside, np.exp(-((t / wdt) ** 8)), 0.0)
        js = np.arange(deg + 1)[:, None, None]
        tj = t[None] ** js                                   # (deg+1, nz, width)
        I, dI = self.moments(eps)
        K = I - h * np.sum(tj * (lg * win)[None], axis=2)    # (deg+1, nz)
        D = np.sum(r[: deg + 1] * K, axis=0)
        live = np.abs(D / m) >= 1e-18
        if not live.any():
            return None
        delta = -float(np.sum(D[live])) / m
        if not with_grad:
            return delta, None

        sel = np.flatnonzero(live)
        t, q, pos, lg, win, tj, K, D = t[sel], q[sel], pos[sel], lg[sel], win[sel], tj[:, sel], K[:, sel], D[sel]
        r, d, P, eps, eps_s, dI = r[:, sel], d[:, :, sel], P[:, sel], eps[sel], eps_s[sel], dI[:, sel]
        inv_q = np.zeros_like(q)
        inv_q[pos] = 1.0 / q[pos]
        dwin = -8.0 * t**7 / wdt**8 * win
        tjm1 = np.zeros_like(tj)
        tjm1[1:] = js[1:] * t[None] ** (js[1:] - 1)
        dmu = (tjm1 * lg + tj * (2 * t * inv_q)) * win + tj * (lg * dwin)
        Da = np.sum(r[: deg + 1] * h * dmu.sum(axis=2), axis=0)
        dK_eps = dI - h * np.sum(tj * (2 * eps[:, None] * inv_q * win), axis=2)
        De = np.sum(r[: deg + 1] * dK_eps, axis=0)

        # zeta = a + i*eps_s moves with the coefficients: d zeta = -phi(zeta)/psi'(zeta) db
        powers = np.arange(deg + 2)[:, None]
        tau = 1j * eps_s
        tk = tau[None] ** powers                              # (deg+2, nz)
        dpsi = np.sum(powers[1:] * P[1:] * tk[:-1], axis=0)
        g = -np.einsum("knz,kz->nz", d, tk) / dpsi
        ga = np.conj(g)
        ge = np.where(eps_s >= 0, 1.0, -1.0) * 1j * np.conj(g)
        dD = Da * ga + De * ge
        for j in range(deg + 1):
            grj = 2.0 * np.einsum("knz,kz->nz", d[: j + 1], P[j::-1])
            dD = dD + K[j] * (grj + (j + 1) * r[j + 1] * ga)
        dm = 2.0 * self._project(self.weights * psi)
        grad = -np.sum(dD, axis=1) / m + float(np.sum(D)) * dm / m**2
        return delta, grad


@lru_cache(maxsize=8)
def _engine(indices: tuple, grid: QuadratureGrid) -> EntropyEngine:
    return EntropyEngine(np.array(indices), grid)


def _phases(indices: np.ndarray) -> np.ndarray:
    return np.array([1, 1j, -1, -1j])[indices % 4]


def _grid_for(c: CoefficientVector, grid: QuadratureGrid | None) -> QuadratureGrid:
    return grid if grid is not None else default_grid(c.highest_nonzero())


def _active(c: CoefficientVector) -> np.ndarray:
    idx = np.flatnonzero(c.coeffs)
    if idx.size == 0:
        raise DegenerateInputError("coefficient vector is zero")
    return idx


def total_entropy(c: CoefficientVector, grid: QuadratureGrid | None = None) -> EntropyReport:
    """Position plus momentum entropy; the momentum side uses the exact basis phases."""
    idx = _active(c)
    g = _grid_for(c, grid)
    engine = _engine(tuple(idx), g)
    a = c.coeffs[idx]
    if c.symmetry.is_real:
        a = a.real
    s_pos, _ = engine.entropy(a)
    if c.symmetry is Symmetry.ODD_FPLUS:
        s_mom = s_pos            # F psi = i psi, so |psi~| = |psi| pointwise
    else:
        s_mom, _ = engine.entropy(_phases(idx) * c.coeffs[idx])
    return EntropyReport(s_pos, s_mom, s_pos + s_mom, c.norm2())


def grad_total_entropy(c: CoefficientVector, grid: QuadratureGrid | None = None,
                       indices=None) -> np.ndarray:
    """Gradient of the total entropy over the active coefficients of ``c``'s class.

    Real for ``odd_fplus``; otherwise complex, ``dS/dRe(a_n) + i dS/dIm(a_n)``.
    ``indices`` defaults to every index of the class up to ``c.max_index``.
    """
    if indices is None:
        indices = np.flatnonzero(c.symmetry.allows(np.arange(c.coeffs.size)))
    indices = np.asarray(indices)
    _active(c)
    g = grid if grid is not None else default_grid(int(indices.max()))
    engine = _engine(tuple(indices), g)
    a = c.coeffs[indices]
    if c.symmetry.is_real:
        _, gp = engine.entropy(a.real, with_grad=True)
        return 2.0 * gp.real
    ph = _phases(indices)
    _, gp = engine.entropy(a, with_grad=True)
    _, gm = engine.entropy(ph * a, with_grad=True)
    return gp + np.conj(ph) * gm


def converged_total_entropy(c: CoefficientVector, tol: float = DEFAULT_TOL,
                            grid: QuadratureGrid | None = None, max_refinements: int = 6) -> EntropyReport:
    """Refine the spacing (then the width) until successive totals agree within ``tol``."""
    g = _grid_for(c, grid)
    prev = total_entropy(c, g)
    for _ in range(max_refinements):
        g = g.refined()
        cur = total_entropy(c, g)
        diff = abs(cur.total - prev.total)
        prev = cur
        if diff < tol:
            wide = total_entropy(c, g.widened())
            diff = max(diff, abs(wide.total - cur.total))
            if diff < tol:
                return EntropyReport(cur.S_position, cur.S_momentum, cur.total, cur.norm2, max(diff, 1e-15))
    return EntropyReport(prev.S_position, prev.S_momentum, prev.total, prev.norm2, diff)


# ---------------------------------------------------------------------------
# Hausdorff-Young functional
# ---------------------------------------------------------------------------

def conjugate_exponent(q: float) -> float:
    return q / (q - 1.0)


def sq_functional(f: GridFunction, f_tilde: GridFunction, q: float) -> float:
    """``-log(||f_tilde||_q / ||f||_p)`` with ``1/p + 1/q = 1``."""
    if not q >= 2:
        raise ValueError(f"q must be >= 2, got {q}")
    p = conjugate_exponent(q)
    den = p_norm(f, p)
    if not den > 0:
        raise DegenerateInputError("p-norm of the input vanishes")
    return -math.log(p_norm(f_tilde, q) / den)


def gs_apply(f: GridFunction, s: float) -> GridFunction:
    """``f |f|^(s-2) / ||f||_s^s`` pointwise."""
    if not s > 1:
        raise ValueError(f"s must exceed 1, got {s}")
    norm_s = float(f.grid.integrate(np.abs(f.values) ** s).real)
    if not norm_s > 0:
        raise DegenerateInputError("s-norm of the input vanishes")
    mag = np.abs(f.values)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(mag > 0, f.values * mag ** (s - 2.0), 0.0)
    return GridFunction(f.grid, out / norm_s)


def grid_fourier(f: GridFunction, inverse: bool = False, edge_tol: float = 1e-12) -> GridFunction:
    """Trapezoid approximation of ``int exp(+-2 pi i x y) f(y) dy`` on the same nodes.

    With ``x_J = J h`` the kernel is ``exp(i theta J K)``, ``theta = +-2 pi h^2``,
    and ``JK = (J^2 + K^2 - (K - J)^2)/2`` turns the sum into a convolution
    (Bluestein).  The chirps are formed directly from ``theta J^2 / 2`` rather
    than as powers of ``exp(i theta)``, whose rounding would grow with ``J^2``.
    Validation only: entropies of expansions always use the exact diagonal
    transform.
    """
    v = f.values
    peak = np.abs(v).max()
    if peak == 0:
        return GridFunction(f.grid, np.zeros_like(v))
    if f.edge_magnitude() > edge_tol * max(peak, 1.0):
        raise SupportError(
            f"function is {f.edge_magnitude():.2e} at the grid edge; widen the grid"
        )
    g = f.grid
    n, h = g.n_half, g.spacing
    theta = (-1.0 if inverse else 1.0) * 2 * math.pi * h * h
    J = np.arange(-n, n + 1, dtype=float)
    chirp = np.exp(0.5j * theta * J * J)
    D = np.arange(-2 * n, 2 * n + 1, dtype=float)
    kernel = np.exp(-0.5j * theta * D * D)
    conv = fftconvolve(v * chirp, kernel, mode="full")
    return GridFunction(g, h * chirp * conv[2 * n: 4 * n + 1])


def grad_sq(c: CoefficientVector, q: float, grid: QuadratureGrid | None = None) -> GridFunction:
    """Residual ``(G_p - F^-1 G_q F) psi``; pairing ``Re int conj(dpsi) * residual`` gives ``d S_q``."""
    if not q >= 2:
        raise ValueError(f"q must be >= 2, got {q}")
    g = _grid_for(c, grid)
    p = conjugate_exponent(q)
    psi = synthesize(c, g)
    psi_t = synthesize(fourier_coefficients(c), g)
    back = grid_fourier(gs_apply(psi_t, q), inverse=True, edge_tol=1e-9)
    return GridFunction(g, gs_apply(psi, p).values - back.values)


def sq_of(c: CoefficientVector, q: float, grid: QuadratureGrid | None = None) -> float:
    g = _grid_for(c, grid)
    return sq_functional(synthesize(c, g), synthesize(fourier_coefficients(c), g), q)


def eq8_check(c: CoefficientVector, step: float, grid: QuadratureGrid | None = None) -> float:
    """One-sided difference ``4 S_{2+step} / step``, which tends to the total entropy.

    ``|psi|^(2+step)`` has an ``x^2 log|x|``-type kink at each zero of psi whose
    trapezoid error is O(h^3) and survives the division by ``step``, so the
    default grid is refined twice.
    """
    if not 0 < step <= 0.1:
        raise ValueError(f"step must lie in (0, 0.1], got {step}")
    if grid is None:
        grid = _grid_for(c, None).refined().refined()
    return 4.0 * sq_of(c, 2.0 + step, grid) / step
