"""Minimization of the total entropy over truncated oscillator expansions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .oscillator_basis import CoefficientVector, Symmetry, active_indices, synthesize
from .functionals import (
    EntropyEngine,
    EntropyReport,
    default_grid,
    default_spacing,
    total_entropy,
)
from .grid import QuadratureGrid
from .parallel import ordered_map

ALGORITHMS = ("quasi_newton", "simplex")
_ALIASES = {"lbfgs": "quasi_newton", "l-bfgs": "quasi_newton", "nelder-mead": "simplex"}


@dataclass(frozen=True)
class MinimizeConfig:
    """``basis_size`` is the dimension of the odd (or full) truncation.

    ``full`` uses ``phi_0..phi_{N-1}``, ``odd`` uses the first N odd functions and
    ``odd_fplus`` the real ``F = +i`` part of that odd truncation.
    """

    basis_size: int
    symmetry: Symmetry = Symmetry.ODD_FPLUS
    algorithm: str = "quasi_newton"
    max_iterations: int = 20000
    tol: float = 1e-7
    seed: int = 0
    restarts: int = 3
    spacing: Optional[float] = None
    half_width: Optional[float] = None
    initial: Optional[tuple] = None      # explicit start over the active indices

    def __post_init__(self):
        object.__setattr__(self, "symmetry", Symmetry.parse(self.symmetry))
        algo = _ALIASES.get(self.algorithm, self.algorithm)
        if algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        object.__setattr__(self, "algorithm", algo)
        if self.basis_size < 1:
            raise ValueError(f"basis size must be >= 1, got {self.basis_size}")
        if not self.tol > 0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")

    @property
    def indices(self) -> np.ndarray:
        return active_indices(self.symmetry, self.basis_size)

    def grid(self) -> QuadratureGrid:
        top = int(self.indices[-1])
        base = default_grid(top)
        width = self.half_width or base.half_width
        return QuadratureGrid.from_spacing(width, self.spacing or default_spacing(top))


@dataclass(frozen=True)
class StartRecord:
    label: str
    total: float
    iterations: int
    converged: bool


@dataclass(frozen=True, eq=False)
class MinimizeResult:
    coeffs: CoefficientVector
    report: EntropyReport
    iterations: int
    converged: bool
    grad_norm: float
    config: MinimizeConfig
    grid: QuadratureGrid
    starts: tuple = field(default_factory=tuple)

    @property
    def total(self) -> float:
        return self.report.total


# ---------------------------------------------------------------------------
# objective
# ---------------------------------------------------------------------------

_PHASE = np.array([1, 1j, -1, -1j])


class EntropyObjective:
    """Total entropy as a function of real parameters.

    Real parametrization (one parameter per index) is used for ``odd_fplus`` and
    for single Fourier sectors ``n = k mod 4``, where ``|F psi| = |psi|`` and the
    total is twice the position entropy.  Otherwise the parameters are the real
    parts followed by the imaginary parts.
    """

    def __init__(self, indices, grid: QuadratureGrid, real: bool):
        self.indices = np.asarray(indices)
        self.grid = grid
        self.real = real
        self.engine = EntropyEngine(self.indices, grid)
        self.phases = _PHASE[self.indices % 4]
        self.single_sector = np.unique(self.indices % 4).size == 1
        if real and not self.single_sector:
            raise ValueError("a real parametrization needs a single Fourier sector")
        self.size = self.indices.size if real else 2 * self.indices.size
        self.evaluations = 0

    def coeffs(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if self.real:
            return v.astype(complex)
        n = self.indices.size
        return v[:n] + 1j * v[n:]

    def params(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=complex)
        return b.real.copy() if self.real else np.concatenate([b.real, b.imag])

    def __call__(self, v, with_grad: bool = True):
        self.evaluations += 1
        if self.real:
            s, g = self.engine.entropy(np.asarray(v, dtype=float), with_grad)
            return (2 * s, 2 * g.real) if with_grad else 2 * s
        b = self.coeffs(v)
        sp, gp = self.engine.entropy(b, with_grad)
        if self.single_sector:
            sm, gm = sp, gp          # |F psi| = |psi| pointwise
        else:
            sm, gm = self.engine.entropy(self.phases * b, with_grad)
        if not with_grad:
            return sp + sm
        g = gp + np.conj(self.phases) * gm
        return sp + sm, np.concatenate([g.real, g.imag])


# ---------------------------------------------------------------------------
# optimizers
# ---------------------------------------------------------------------------

@dataclass
class OptimizeOutcome:
    x: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)     # objective after each accepted step


def lbfgs(fun: Callable, x0, tol: float = 1e-7, max_iter: int = 20000, memory: int = 10,
          normalize: bool = True, stall: int = 50) -> OptimizeOutcome:
    """Limited-memory BFGS with Armijo backtracking for scale-invariant objectives.

    ``fun(x)`` returns ``(value, gradient)``.  After every accepted step the
    iterate is rescaled to unit norm; the objective does not change, and the
    gradient (homogeneous of degree -1) is rescaled with it.  A run whose
    objective stops moving (less than ``1e-14`` relative over ``stall`` steps)
    ends there; it counts as converged only if the gradient test passes.
    """
    x = np.array(x0, dtype=float)
    if normalize:
        x /= np.linalg.norm(x)
    f, g = fun(x)
    s_hist: list = []
    y_hist: list = []
    it = 0
    fails = 0
    trail = [f]
    while it < max_iter:
        gmax = float(np.max(np.abs(g)))
        if gmax < tol:
            return OptimizeOutcome(x, f, gmax, it, True, trail)
        # two-loop recursion
        q = g.copy()
        alphas = []
        for s, y in zip(reversed(s_hist), reversed(y_hist)):
            rho = 1.0 / np.dot(y, s)
            al = rho * np.dot(s, q)
            alphas.append((rho, al))
            q -= al * y
        if s_hist:
            q *= np.dot(s_hist[-1], y_hist[-1]) / np.dot(y_hist[-1], y_hist[-1])
        else:
            q *= min(1.0, 0.1 / max(np.linalg.norm(g), 1e-300))
        for (s, y), (rho, al) in zip(zip(s_hist, y_hist), reversed(alphas)):
            q += s * (al - rho * np.dot(y, q))
        d = -q
        slope = float(np.dot(g, d))
        if slope >= 0:
            d = -g * min(1.0, 0.1 / np.linalg.norm(g))
            slope = float(np.dot(g, d))
            s_hist.clear()
            y_hist.clear()
        t = 1.0
        accepted = False
        for _ in range(60):
            xn = x + t * d
            fn, gn = fun(xn)
            if fn <= f + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        it += 1
        if not accepted:
            # retry along steepest descent with fresh memory before giving up
            fails += 1
            s_hist.clear()
            y_hist.clear()
            if fails >= 3:
                return OptimizeOutcome(x, f, gmax, it, False, trail)
            continue
        fails = 0
        if normalize:
            nrm = np.linalg.norm(xn)
            xn = xn / nrm
            gn = gn * nrm
        s = xn - x
        y = gn - g
        if np.dot(s, y) > 1e-16 * np.linalg.norm(s) * np.linalg.norm(y):
            s_hist.append(s)
            y_hist.append(y)
            if len(s_hist) > memory:
                s_hist.pop(0)
                y_hist.pop(0)
        x, f, g = xn, fn, gn
        trail.append(f)
        if len(trail) > stall and trail[-stall - 1] - f <= 1e-14 * max(1.0, abs(f)):
            break
    gmax = float(np.max(np.abs(g)))
    return OptimizeOutcome(x, f, gmax, it, gmax < tol, trail)


def nelder_mead(fun: Callable, x0, tol: float = 1e-8, max_iter: int = 20000,
                max_restarts: int = 20) -> OptimizeOutcome:
    """Nelder-Mead with coefficients (1, 2, 0.5, 0.5), restarted until a restart stops improving.

    The scale of the parameters is pinned by the penalty ``(|x|^2 - 1)^2``, which
    vanishes on the unit sphere and leaves the minimum value unchanged.
    """

    def penalized(v):
        return fun(v) + (np.dot(v, v) - 1.0) ** 2

    x = np.array(x0, dtype=float)
    x /= np.linalg.norm(x)
    f = penalized(x)
    total_it = 0
    converged = False
    for _ in range(max_restarts):
        res = _scipy_minimize(
            penalized, x, method="Nelder-Mead",
            options={"xatol": tol, "fatol": 1e-14, "maxiter": max(max_iter - total_it, 1),
                     "maxfev": 10 * max_iter, "adaptive": False},
        )
        total_it += int(res.nit)
        improved = f - res.fun
        x, f = res.x, float(res.fun)
        if res.status == 0 and improved <= 1e-13:
            converged = True
            break
        if total_it >= max_iter:
            break
    x = x / np.linalg.norm(x)
    return OptimizeOutcome(x, float(fun(x)), float("nan"), total_it, converged)


# ---------------------------------------------------------------------------
# starts and drivers
# ---------------------------------------------------------------------------

def random_start(indices, real: bool, rng: np.random.Generator) -> np.ndarray:
    """Unit-norm random coefficients with a ``1/(1+n)`` amplitude taper."""
    taper = 1.0 / (1.0 + np.asarray(indices, dtype=float))
    b = rng.standard_normal(len(indices)) * taper
    if not real:
        b = b + 1j * rng.standard_normal(len(indices)) * taper
    return b / np.linalg.norm(b)


def align_phase(b: np.ndarray) -> np.ndarray:
    """Fix the free phase: the lowest-index significant coefficient becomes real and positive."""
    b = np.asarray(b, dtype=complex)
    nz = np.flatnonzero(np.abs(b) > 1e-6 * np.abs(b).max())
    if nz.size == 0:
        return b
    lead = b[nz[0]]
    out = b * (abs(lead) / lead)
    out[nz[0]] = abs(lead)  # exactly real, not real up to rounding
    return out


def _run(objective: EntropyObjective, start: np.ndarray, cfg: MinimizeConfig) -> OptimizeOutcome:
    x0 = objective.params(start)
    if cfg.algorithm == "quasi_newton":
        return lbfgs(objective, x0, cfg.tol, cfg.max_iterations)
    return nelder_mead(lambda v: objective(v, with_grad=False), x0, cfg.tol, cfg.max_iterations)


def _plan_starts(cfg: MinimizeConfig):
    """Seeded starting points: random ones plus, for complex classes, one per Fourier sector.

    A sector start first minimizes within the real ``n = k mod 4`` subspace and is
    then released into the whole class with a small seeded perturbation.
    """
    idx = cfg.indices
    real = cfg.symmetry.is_real
    rng = np.random.default_rng(cfg.seed)
    plans = []
    if cfg.initial is not None:
        b = np.asarray(cfg.initial, dtype=complex)
        if b.shape != idx.shape:
            raise ValueError(f"initial vector needs {idx.size} entries, got {b.size}")
        plans.append(("initial", b, None))
        return plans
    for k in range(cfg.restarts):
        plans.append((f"random[{k}]", random_start(idx, real, rng), None))
    if not real:
        for sector in sorted(set(idx % 4)):
            sub = idx[idx % 4 == sector]
            if sub.size == idx.size:
                continue
            plans.append((f"sector[{sector}]", random_start(sub, True, rng), sub))
    return plans


def _execute(plan, cfg: MinimizeConfig, grid: QuadratureGrid, objective: EntropyObjective):
    label, start, sub = plan
    idx = cfg.indices
    iterations = 0
    if sub is not None:
        inner = EntropyObjective(sub, grid, real=True)
        out = _run(inner, start, cfg)
        iterations += out.iterations
        b = np.zeros(idx.size, dtype=complex)
        b[np.searchsorted(idx, sub)] = out.x
        kick = np.random.default_rng([cfg.seed, int(sub[0])]).standard_normal(2 * idx.size)
        start = b + 1e-3 * (kick[: idx.size] + 1j * kick[idx.size:])
    out = _run(objective, start, cfg)
    out.iterations += iterations
    return label, out


def minimize_entropy(cfg: MinimizeConfig, workers: int | None = None) -> MinimizeResult:
    """Multi-start minimization; the lowest total wins, ties broken by start order."""
    grid = cfg.grid()
    idx = cfg.indices
    objective = EntropyObjective(idx, grid, real=cfg.symmetry.is_real)
    plans = _plan_starts(cfg)
    outcomes = ordered_map(lambda p: _execute(p, cfg, grid, objective), plans, workers)
    records = tuple(
        StartRecord(label, float(out.value), out.iterations, out.converged) for label, out in outcomes
    )
    best_label, best = min(outcomes, key=lambda lo: lo[1].value)
    b = align_phase(objective.coeffs(best.x))
    b = b / np.linalg.norm(b)
    if cfg.symmetry.is_real:
        b = b.real
    c = CoefficientVector.from_active(cfg.symmetry, idx, b, size=int(idx[-1]) + 1)
    report = total_entropy(c, grid)
    refined = total_entropy(c, grid.refined())
    report = EntropyReport(report.S_position, report.S_momentum, report.total, report.norm2,
                           max(abs(refined.total - report.total), 1e-15))
    grad_norm = best.grad_norm
    if cfg.algorithm == "quasi_newton":
        _, g = objective(objective.params(b))
        grad_norm = float(np.max(np.abs(g)))
    return MinimizeResult(c, report, sum(r.iterations for r in records), best.converged,
                          grad_norm, cfg, grid, records)


def entropy_vs_N(cfg: MinimizeConfig, sizes, workers: int | None = None) -> list[tuple[int, float]]:
    """Totals for increasing truncations, each warm-started from the previous minimizer.

    Because the truncations are nested and every accepted step lowers the
    objective, the totals are non-increasing in N.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes) or len(set(sizes)) != len(sizes):
        raise ValueError("sizes must be strictly ascending")
    table = []
    prev: Optional[MinimizeResult] = None
    for n in sizes:
        if prev is None:
            step_cfg = _replace(cfg, basis_size=n)
        else:
            idx = active_indices(cfg.symmetry, n)
            warm = np.zeros(idx.size, dtype=complex)
            old = prev.config.indices
            warm[np.searchsorted(idx, old)] = prev.coeffs.coeffs[old]
            step_cfg = _replace(cfg, basis_size=n, initial=tuple(warm))
        prev = minimize_entropy(step_cfg, workers)
        table.append((n, prev.total))
    return table


def _replace(cfg: MinimizeConfig, **changes) -> MinimizeConfig:
    from dataclasses import replace

    return replace(cfg, **changes)


@dataclass(frozen=True)
class CrossCheckReport:
    quasi_newton_total: float
    simplex_total: float
    total_gap: float
    coeff_gap: float
    agree: bool
    quasi_newton_converged: bool
    simplex_converged: bool


def cross_check(cfg: MinimizeConfig, workers: int | None = None,
                total_tol: float = 1e-5, coeff_tol: float = 1e-3) -> CrossCheckReport:
    """Run both algorithms from the same seeded starts and compare."""
    if cfg.basis_size > 32:
        raise ValueError("cross_check is limited to basis sizes <= 32")
    qn = minimize_entropy(_replace(cfg, algorithm="quasi_newton"), workers)
    sx = minimize_entropy(_replace(cfg, algorithm="simplex", tol=max(cfg.tol, 1e-8)), workers)
    a = align_phase(qn.coeffs.coeffs)
    b = align_phase(sx.coeffs.coeffs)
    gap_t = abs(qn.total - sx.total)
    gap_c = float(np.max(np.abs(a / np.linalg.norm(a) - b / np.linalg.norm(b))))
    return CrossCheckReport(qn.total, sx.total, gap_t, gap_c,
                            gap_t < total_tol and gap_c < coeff_tol, qn.converged, sx.converged)


def gaussian_fit_mass(c: CoefficientVector, grid: QuadratureGrid | None = None) -> float:
    """Largest normalized overlap ``|<g, psi>|^2 / (|g|^2 |psi|^2)`` with a Gaussian ``g``.

    ``g(x) = exp(-pi (alpha x^2 + beta x))`` with complex ``alpha`` (positive real
    part) and complex ``beta`` covers dilations, shifts, modulations and chirps.
    """
    g = grid or default_grid(c.highest_nonzero())
    psi = synthesize(c, g)
    x = g.nodes
    npsi = psi.l2_norm() ** 2

    def overlap(p):
        alpha = math.exp(p[0]) + 1j * p[1]
        beta = p[2] + 1j * p[3]
        gv = np.exp(-math.pi * (alpha * x * x + beta * x))
        num = abs(g.integrate(np.conj(gv) * psi.values)) ** 2
        den = float(g.integrate(np.abs(gv) ** 2).real) * npsi
        return -num / den

    res = _scipy_minimize(overlap, np.zeros(4), method="Nelder-Mead",
                          options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000})
    return float(-res.fun)
