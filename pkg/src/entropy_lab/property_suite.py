"""Executable checklist: every result under test bound to a named numerical check.

Each check returns measured and reference values plus a pass flag.  Checks
run concurrently.  The report is ordered by check id, and its body (every
line not starting with ``#``) is a pure function of the tier and seed.
"""

from __future__ import annotations

import math
import threading
import time
import zlib
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import sympy as sp

from . import comb_construction as combs
from .oscillator_basis import CoefficientVector, Symmetry, active_indices, basis_values, fourier_coefficients, synthesize
from .comb_construction import DeltaComb, GaussianProfile2D, Variant
from .functionals import (
    ENTROPY_BOUND,
    default_grid,
    eq8_check,
    grad_sq,
    grad_total_entropy,
    grid_fourier,
    shannon_entropy,
    sq_of,
    total_entropy,
)
from .grid import GridFunction
from .minimizer import MinimizeConfig, cross_check, entropy_vs_N, gaussian_fit_mass, minimize_entropy
from .parallel import ordered_map

SCHEMA = "entropy-lab-suite/1"
REF_MIN_N128 = 0.61370581
REF_ODD_BOUND = 0.61370564
ODD_BOUND = 2.0 * ENTROPY_BOUND
TIERS = ("fast", "all")


@dataclass(frozen=True)
class Outcome:
    measured: float
    reference: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class CheckSpec:
    id: str
    tolerance: float
    tier: str
    run: Callable[[np.random.Generator], Outcome] = field(compare=False, repr=False)
    status: str = "active"      # or "out_of_scope"
    note: str = ""


@dataclass(frozen=True)
class CheckRecord:
    id: str
    tier: str
    status: str                 # pass / fail / error / out_of_scope
    measured: Optional[float]
    reference: Optional[float]
    tolerance: Optional[float]
    detail: str
    runtime: float

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True)
class SuiteReport:
    tier: str
    seed: int
    records: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records if r.status != "out_of_scope")

    def to_text(self, generated: str | None = None) -> str:
        lines = ["# entropy-lab property suite"]
        if generated:
            lines.append(f"# generated: {generated}")
        lines += [f"schema: {SCHEMA}", f"tier: {self.tier}", f"seed: {self.seed}", ""]
        for r in self.records:
            lines.append(f"[{r.id}]")
            lines.append(f"tier: {r.tier}")
            lines.append(f"status: {r.status}")
            if r.status != "out_of_scope":
                lines.append(f"measured: {_fmt(r.measured)}")
                lines.append(f"reference: {_fmt(r.reference)}")
                lines.append(f"tolerance: {_fmt(r.tolerance)}")
            if r.detail:
                lines.append(f"detail: {r.detail}")
            lines.append(f"# runtime: {r.runtime:.3f} s")
            lines.append("")
        counted = [r for r in self.records if r.status != "out_of_scope"]
        n_pass = sum(r.passed for r in counted)
        lines.append(f"summary: {n_pass}/{len(counted)} passed")
        lines.append(f"aggregate: {'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"

    def to_kv(self) -> str:
        out = [f"suite.schema={SCHEMA}", f"suite.tier={self.tier}", f"suite.seed={self.seed}"]
        for r in self.records:
            out.append(f"{r.id}.status={r.status}")
            if r.status != "out_of_scope":
                out.append(f"{r.id}.measured={_fmt(r.measured)}")
                out.append(f"{r.id}.reference={_fmt(r.reference)}")
                out.append(f"{r.id}.tolerance={_fmt(r.tolerance)}")
                out.append(f"{r.id}.pass={'true' if r.passed else 'false'}")
        out.append(f"suite.pass={'true' if self.passed else 'false'}")
        return "\n".join(out) + "\n"


def report_body(text: str) -> str:
    """The part of a report that must be reproducible: every line not starting with ``#``."""
    return "\n".join(line for line in text.splitlines() if not line.startswith("#")) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "-"
    return format(float(v), ".9g")


def _fmts(values) -> str:
    return "[" + ", ".join(_fmt(v) for v in values) + "]"


# ---------------------------------------------------------------------------
# shared expensive results
# ---------------------------------------------------------------------------

class _Memo:
    """Per-key memoization that computes each value once even under concurrent requests."""

    def __init__(self):
        self._values: dict = {}
        self._locks: dict = {}
        self._guard = threading.Lock()

    def get(self, key, make):
        with self._guard:
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            if key not in self._values:
                self._values[key] = make()
            return self._values[key]


_MEMO = _Memo()


def _bigaussian(a: float) -> combs.BigaussianPoint:
    return _MEMO.get(("bigauss", a), lambda: combs.bigaussian_point(a))


def _n128():
    return _MEMO.get("n128", lambda: minimize_entropy(MinimizeConfig(128, Symmetry.ODD_FPLUS, seed=0), workers=1))


def _strictly_decreasing(values) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

def _random_vector(rng, size: int, symmetry: Symmetry) -> CoefficientVector:
    n = np.arange(size)
    a = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / (1.0 + n)
    a = np.where(symmetry.allows(n), a, 0)
    if symmetry.is_real:
        a = a.real
    return CoefficientVector(a, symmetry)


def check_eq3_sampling(rng) -> Outcome:
    vals = [total_entropy(_random_vector(rng, 32, Symmetry.FULL)).total for _ in range(300)]
    m = min(vals)
    return Outcome(m, ENTROPY_BOUND, m >= ENTROPY_BOUND - 1e-7, "min over 300 random full vectors, N=32")


def check_conj1_sampling(rng) -> Outcome:
    vals = [total_entropy(_random_vector(rng, 32, Symmetry.ODD)).total for _ in range(300)]
    m = min(vals)
    return Outcome(m, ODD_BOUND, m >= ODD_BOUND - 1e-6, "min over 300 random odd vectors, max index 31")


def check_conj1_reference(rng) -> Outcome:
    v = round(ODD_BOUND, 8)
    return Outcome(v, REF_ODD_BOUND, abs(v - REF_ODD_BOUND) < 5e-9, "2(1 - log 2) rounded to 8 digits")


def check_entropy_convergence(rng) -> Outcome:
    pts = [_bigaussian(a) for a in (0.2, 0.1, 0.05)]
    gaps = [abs(p.total_limit_gap) for p in pts]
    ok = _strictly_decreasing(gaps) and gaps[-1] < 1e-3
    return Outcome(gaps[-1], 0.0, ok, f"|S(Phi_a) - 2(1-log 2)| at a=0.2,0.1,0.05: {_fmts(gaps)}")


def check_norm_convergence(rng) -> Outcome:
    pts = [_bigaussian(a) for a in (0.2, 0.1, 0.05)]
    gaps = [abs(p.norm_limit_gap) for p in pts]
    ok = _strictly_decreasing(gaps) and gaps[-1] < 1e-3
    return Outcome(gaps[-1], 0.0, ok, f"| ||Phi_a||_2 - 1/sqrt2 | at a=0.2,0.1,0.05: {_fmts(gaps)}")


def check_lemma1_gap(rng) -> Outcome:
    d, g = DeltaComb.alternating(), GaussianProfile2D.symmetric()
    gaps = [combs.equivalence_gap(d, g, a, 2.0, (Variant.PLAIN, Variant.PRIMED)) for a in (0.2, 0.1, 0.05)]
    ok = _strictly_decreasing(gaps) and gaps[-1] < 1e-3
    return Outcome(gaps[-1], 0.0, ok, f"||Phi_a - Phi'_a||_2 at a=0.2,0.1,0.05: {_fmts(gaps)}")


def check_lemma1_truncation(rng) -> Outcome:
    d, g = DeltaComb.alternating(), GaussianProfile2D.symmetric()
    pair = (Variant.PRIMED, Variant.TRUNCATED_PRIMED)
    g1 = combs.equivalence_gap(d, g, 0.1, 2.0, pair)
    g2 = combs.equivalence_gap(d, g, 0.05, 2.0, pair)
    ratio = g1 / g2
    return Outcome(ratio, 4.0, ratio >= 4.0, f"gaps at a=0.1,0.05: {_fmts([g1, g2])}")


def _preset_combs():
    half = sp.Rational(1, 2)
    base = [
        DeltaComb.alternating(),
        DeltaComb.uniform(),
        DeltaComb.linear(sp.Rational(1, 3), sp.Rational(3, 4), 2, sp.Rational(1, 8), sp.Rational(1, 5)),
    ]
    out = list(base)
    for d in base:
        for mu in (2, 3, sp.Rational(1, 5), half):
            out.append(combs.dilate(d, mu))
    return out


def check_lemma2(rng) -> Outcome:
    res = [combs.dual_identity_residual(d) for d in _preset_combs()]
    bad = sum(r != 0 for r in res)
    return Outcome(bad, 0, bad == 0, f"exact b^2/r - b~^2/r~ over {len(res)} combs")


_P_VALUES = (sp.Integer(2), sp.Rational(4, 3), sp.Rational(3, 2), sp.Rational(6, 5), sp.Rational(101, 100))


def check_prop2_alternating(rng) -> Outcome:
    d = DeltaComb.alternating()
    consts = [combs.comb_constants(d, p) for p in _P_VALUES]
    bad = sum(c.C_q != 0 or c.C != 0 for c in consts)
    return Outcome(bad, 0, bad == 0, "C_q and C exactly zero for p in {2, 4/3, 3/2, 6/5, 101/100}")


def check_prop2_uniform(rng) -> Outcome:
    c = combs.comb_constants(DeltaComb.uniform(), 2)
    return Outcome(float(c.C), 0.0, c.C == 0 and c.C_q == 0, "uniform integer comb")


def check_prop2_dilatation(rng) -> Outcome:
    d = DeltaComb.alternating()
    bad = 0
    for mu in (3, sp.Rational(1, 7)):
        e = combs.dilate(d, mu)
        bad += sp.simplify(e.r / e.b ** 2 - d.r / d.b ** 2) != 0
        for p in _P_VALUES[:3]:
            c0, c1 = combs.comb_constants(d, p), combs.comb_constants(e, p)
            bad += sp.simplify(c0.C_q - c1.C_q) != 0 or sp.simplify(c0.C - c1.C) != 0
    return Outcome(bad, 0, bad == 0, "r/b^2, C_q, C under mu in {3, 1/7}")


def check_eq30(rng) -> Outcome:
    bad = 0
    total = 0
    for d in _preset_combs():
        for p in _P_VALUES:
            total += 1
            bad += not combs.comb_constants(d, p).bounds_ok
    return Outcome(bad, 0, bad == 0, f"bounds checked exactly on {total} (comb, p) pairs")


def check_cor2_sharp(rng) -> Outcome:
    d, g = DeltaComb.alternating(), GaussianProfile2D.symmetric()
    s2 = combs.limit_entropy(d, g, 2).S_limit
    sq4 = combs.limit_entropy(d, g, sp.Rational(4, 3)).Sq_limit
    ref4 = 0.25 * math.log(4) - 0.75 * math.log(4 / 3)
    err = max(abs(s2 - ODD_BOUND), abs(sq4 - ref4))
    return Outcome(err, 0.0, err < 1e-12, f"S limit {_fmt(s2)}, S_4 limit {_fmt(sq4)}")


def check_cor2_chirped(rng) -> Outcome:
    d = DeltaComb.alternating()
    chirped = GaussianProfile2D(1.0, 2 * math.pi, 8.0 + 3.0j)
    s = combs.limit_entropy(d, chirped, 2).S_limit
    return Outcome(s, ODD_BOUND, s > ODD_BOUND + 1e-6, "chirped profile (complex B) lies strictly above")


def check_prop1_limit(rng) -> Outcome:
    d, g = DeltaComb.alternating(), GaussianProfile2D.symmetric()
    e = combs.dilate(d, 2)
    lim = combs.limit_pnorm(e, g, 2.0)
    quad = combs.eval_comb_function(combs.CombFunction(e, g, 0.02)).l2_norm()
    exact = [combs.limit_pnorm(d, g, 2.0) - 1 / math.sqrt(2), combs.limit_pnorm(d, g, 1.0) - 1.0]
    err = max(abs(quad - lim), *map(abs, exact))
    return Outcome(quad, lim, abs(quad - lim) < 1e-3 and max(map(abs, exact)) < 1e-12,
                   f"dilated comb, quadrature at a=0.02 vs limit; exact limits off by {_fmt(err)}")


def check_prop3_decay(rng) -> Outcome:
    d, g = DeltaComb.alternating(), GaussianProfile2D.symmetric()
    r = [combs.stationarity_residual(d, g, a, 4.0) for a in (0.2, 0.1)]
    return Outcome(r[1], r[0], r[1] < r[0], f"q=4 residual at a=0.2,0.1: {_fmts(r)}")


def check_prop3_gaussian(rng) -> Outcome:
    g = GaussianProfile2D.symmetric()
    vals = [combs.stationarity_residual(None, g, 0.2, q) for q in (3.0, 4.0, 6.0)]
    vals.append(float(np.abs(grad_sq(CoefficientVector.single(0), 4.0).values).max()))
    m = max(vals)
    return Outcome(m, 0.0, m < 1e-7, "plain Gaussian, q in {3, 4, 6} and basis residual at q=4")


def check_prop3_unitary(rng) -> Outcome:
    d, g = DeltaComb.alternating(), GaussianProfile2D.symmetric()
    m = max(combs.stationarity_residual(d, g, a, 2.0) for a in (0.2, 0.1))
    return Outcome(m, 0.0, m < 1e-9, "q=2 residual at a=0.2,0.1")


def check_eq8(rng) -> Outcome:
    c1 = CoefficientVector.single(1)
    ref = total_entropy(c1).total
    errs = [abs(eq8_check(c1, s) - ref) for s in (1e-2, 1e-3, 1e-4)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = _strictly_decreasing(errs) and all(5.0 < r < 20.0 for r in ratios)
    g_err = abs(eq8_check(CoefficientVector.single(0), 1e-4) - ENTROPY_BOUND)
    ok = ok and g_err < 1e-3
    return Outcome(errs[-1], 0.0, ok, f"phi_1 errors at steps 1e-2,1e-3,1e-4: {_fmts(errs)}; ratios {_fmts(ratios)}")


def check_gradient_fd(rng) -> Outcome:
    idx = active_indices(Symmetry.ODD_FPLUS, 8)
    worst = 0.0
    for _ in range(10):
        b = rng.standard_normal(idx.size) / (1.0 + idx)
        c = CoefficientVector.from_active(Symmetry.ODD_FPLUS, idx, b)
        g = np.real(grad_total_entropy(c))
        fd = np.empty_like(g)
        for j in range(idx.size):
            e = np.zeros_like(b)
            e[j] = 1e-5
            up = total_entropy(CoefficientVector.from_active(Symmetry.ODD_FPLUS, idx, b + e)).total
            dn = total_entropy(CoefficientVector.from_active(Symmetry.ODD_FPLUS, idx, b - e)).total
            fd[j] = (up - dn) / 2e-5
        worst = max(worst, float(np.abs(fd - g).max() / np.abs(g).max()))
    return Outcome(worst, 0.0, worst < 1e-5, "10 random odd_fplus vectors, N=8, step 1e-5")


def check_gradient_complex(rng) -> Outcome:
    worst = 0.0
    for _ in range(3):
        c = _random_vector(rng, 8, Symmetry.FULL)
        g = grad_total_entropy(c)
        a = c.coeffs
        fd = np.empty(a.size, dtype=complex)
        for j in range(a.size):
            parts = []
            for unit in (1.0, 1j):
                e = np.zeros(a.size, dtype=complex)
                e[j] = 1e-5 * unit
                up = total_entropy(CoefficientVector(a + e)).total
                dn = total_entropy(CoefficientVector(a - e)).total
                parts.append((up - dn) / 2e-5)
            fd[j] = parts[0] + 1j * parts[1]
        worst = max(worst, float(np.abs(fd - g).max() / np.abs(g).max()))
    return Outcome(worst, 0.0, worst < 1e-5, "3 random full complex vectors, N=8")


def check_fourier_phi(rng) -> Outcome:
    errs = []
    for a in (0.29, 0.15):
        grid = combs.comb_grid(a)
        f = GridFunction(grid, combs.phi_a(grid.nodes, a))
        errs.append(float(np.abs(grid_fourier(f).values - 1j * combs.phi_a(grid.nodes, a, primed=True)).max()))
    return Outcome(max(errs), 0.0, max(errs) < 1e-6, f"sup |F Phi_a - i Phi'_a| at a=0.29,0.15: {_fmts(errs)}")


def check_fourier_period(rng) -> Outcome:
    bad = 0
    for _ in range(5):
        c = _random_vector(rng, 24, Symmetry.FULL)
        f = c
        for _ in range(4):
            f = fourier_coefficients(f)
        bad += not np.array_equal(f.coeffs, c.coeffs)
    return Outcome(bad, 0, bad == 0, "F^4 = identity on coefficients, bitwise")


def check_fourier_basis(rng) -> Outcome:
    worst = 0.0
    for _ in range(5):
        c = _random_vector(rng, 16, Symmetry.FULL)
        g = default_grid(c.highest_nonzero())
        lhs = grid_fourier(synthesize(c, g)).values
        rhs = synthesize(fourier_coefficients(c), g).values
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return Outcome(worst, 0.0, worst < 1e-8, "grid transform vs exact phases, N=16")


def check_poisson(rng) -> Outcome:
    lam_alt = combs.eigenphase(DeltaComb.alternating())
    lam_uni = combs.eigenphase(DeltaComb.uniform())
    ok = lam_alt == sp.I and lam_uni == 1
    return Outcome(0 if ok else 1, 0, ok, f"alternating eigenphase {lam_alt}, uniform {lam_uni}")


def check_profile_duality(rng) -> Outcome:
    g = GaussianProfile2D.symmetric()
    t = combs.profile_fourier(g)
    fixed = max(abs(t.N - g.N), abs(t.A - g.A), abs(t.B - g.B), abs(t.C - g.C))
    a = 0.1
    d = DeltaComb.alternating()
    cf = combs.CombFunction(d, g, a)
    grid = combs.comb_grid(a)
    twice = combs.fourier_partner(combs.fourier_partner(cf))
    lhs = combs.eval_comb_function(twice, grid).values
    rhs = grid_fourier(grid_fourier(combs.eval_comb_function(cf, grid))).values
    err = float(np.abs(lhs - rhs).max())
    return Outcome(err, 0.0, fixed < 1e-12 and err < 1e-5,
                   f"symmetric profile fixed to {_fmt(fixed)}; double transform at a=0.1")


def check_weak_limit(rng) -> Outcome:
    vals = [
        combs.weak_limit_constant(GaussianProfile2D.symmetric()),
        combs.weak_limit_constant(GaussianProfile2D.symmetric(2.0)),
        combs.weak_limit_constant(GaussianProfile2D(1.0, 2 * math.pi, 4 * math.pi)),
    ]
    ref = [1.0, 2.0, 1 / math.sqrt(2)]
    err = max(abs(v - r) for v, r in zip(vals, ref))
    return Outcome(err, 0.0, err < 1e-14, "K for symmetric, doubled amplitude, B=4 pi")


def check_cor1(rng) -> Outcome:
    d = DeltaComb.alternating()
    g1 = GaussianProfile2D.symmetric()
    g2 = GaussianProfile2D(1.0, 2 * math.pi, 4 * math.pi)
    dist = [combs.construction_distance(d, g1, g2, a) for a in (0.2, 0.1, 0.05)]
    floor = 0.5 * dist[0]
    return Outcome(min(dist), floor, min(dist) > floor, f"distance at a=0.2,0.1,0.05: {_fmts(dist)}")


def check_sq_gaussian(rng) -> Outcome:
    c0 = CoefficientVector.single(0)
    ref = 0.5 * (0.25 * math.log(4) - 0.75 * math.log(4 / 3))
    v4, v2 = sq_of(c0, 4.0), sq_of(c0, 2.0)
    return Outcome(v4, ref, abs(v4 - ref) < 1e-7 and abs(v2) < 1e-9, f"S_2 = {_fmt(v2)}")


def check_orthonormality(rng) -> Outcome:
    g = default_grid(15)
    vals = basis_values(15, g.nodes)
    gram = np.array([[g.integrate(vals[i] * vals[j]) for j in range(16)] for i in range(16)])
    err = float(np.abs(gram - np.eye(16)).max())
    return Outcome(err, 0.0, err < 1e-10, "Gram matrix of phi_0..phi_15")


def check_entropy_gaussian(rng) -> Outcome:
    s = shannon_entropy(synthesize(CoefficientVector.single(0), default_grid(0)))
    ref = 0.5 * ENTROPY_BOUND
    return Outcome(s, ref, abs(s - ref) < 1e-8, "S(phi_0)")


def check_min_full(rng) -> Outcome:
    r = minimize_entropy(MinimizeConfig(16, Symmetry.FULL, seed=1), workers=1)
    mass = gaussian_fit_mass(r.coeffs)
    ok = abs(r.total - ENTROPY_BOUND) < 1e-6 and mass >= 0.999999
    return Outcome(r.total, ENTROPY_BOUND, ok, f"full class N=16 seed 1; Gaussian fit mass {_fmt(mass)}")


def check_min_n128(rng) -> Outcome:
    r = _n128()
    v = r.total
    ok = abs(v - REF_MIN_N128) <= 5e-7 and REF_ODD_BOUND - 1e-7 <= v <= 0.6137060
    return Outcome(v, REF_MIN_N128, ok,
                   f"odd_fplus N=128, converged={r.converged}, gradient sup {_fmt(r.grad_norm)}")


def check_min_neutrality(rng) -> Outcome:
    real = minimize_entropy(MinimizeConfig(32, Symmetry.ODD_FPLUS, seed=0), workers=1)
    cplx = minimize_entropy(MinimizeConfig(32, Symmetry.ODD, seed=0), workers=1)
    gap = abs(real.total - cplx.total)
    return Outcome(cplx.total, real.total, gap < 1e-6, f"odd vs odd_fplus at N=32, gap {_fmt(gap)}")


def check_entropy_vs_n(rng) -> Outcome:
    table = entropy_vs_N(MinimizeConfig(4, Symmetry.ODD_FPLUS, seed=0), [4, 8, 16, 32])
    totals = [t for _, t in table]
    ok = _strictly_decreasing(totals) and min(totals) >= ODD_BOUND - 1e-6
    return Outcome(totals[-1], ODD_BOUND, ok, f"totals at N=4,8,16,32: {_fmts(totals)}")


def check_cross(rng) -> Outcome:
    rep = cross_check(MinimizeConfig(8, Symmetry.ODD_FPLUS, seed=0), workers=1)
    return Outcome(rep.total_gap, 0.0, rep.agree,
                   f"quasi-Newton {_fmt(rep.quasi_newton_total)}, simplex {_fmt(rep.simplex_total)}, "
                   f"coefficient gap {_fmt(rep.coeff_gap)}")


def check_fit(rng) -> Outcome:
    r = _n128()
    f = synthesize(r.coeffs, r.grid)
    fit = combs.fit_bigaussian(f)
    ok = 0.27 <= fit.a <= 0.31
    return Outcome(fit.a, 0.29, ok, f"mu {_fmt(fit.mu)}, residual {_fmt(fit.residual)}")


def _oos(rng) -> Outcome:
    raise AssertionError("out-of-scope checks are never run")


CHECKS: tuple[CheckSpec, ...] = (
    CheckSpec("basis.orthonormality", 1e-10, "fast", check_orthonormality),
    CheckSpec("conj1.bound_sampling", 1e-6, "fast", check_conj1_sampling),
    CheckSpec("conj1.entropy_convergence", 1e-3, "fast", check_entropy_convergence),
    CheckSpec("conj1.reference", 5e-9, "fast", check_conj1_reference),
    CheckSpec("conj2.sq_gaussian", 1e-7, "fast", check_sq_gaussian),
    CheckSpec("conj3.fit_a", 0.02, "slow", check_fit),
    CheckSpec("cor1.distance_floor", 0.0, "fast", check_cor1),
    CheckSpec("cor2.chirped_above", 1e-6, "fast", check_cor2_chirped),
    CheckSpec("cor2.sharp_values", 1e-12, "fast", check_cor2_sharp),
    CheckSpec("entropy.gaussian", 1e-8, "fast", check_entropy_gaussian),
    CheckSpec("eq3.bound_sampling", 1e-7, "fast", check_eq3_sampling),
    CheckSpec("eq30.bounds", 0.0, "fast", check_eq30),
    CheckSpec("eq8.right_derivative", 1e-3, "fast", check_eq8),
    CheckSpec("fourier.basis_consistency", 1e-8, "fast", check_fourier_basis),
    CheckSpec("fourier.coefficients_period", 0.0, "fast", check_fourier_period),
    CheckSpec("fourier.phi_duality", 1e-6, "fast", check_fourier_phi),
    CheckSpec("fourier.poisson_comb", 0.0, "fast", check_poisson),
    CheckSpec("fourier.profile_duality", 1e-5, "fast", check_profile_duality),
    CheckSpec("grad.complex_fd", 1e-5, "fast", check_gradient_complex),
    CheckSpec("grad.finite_difference", 1e-5, "fast", check_gradient_fd),
    CheckSpec("lemma1.gap_decay", 1e-3, "fast", check_lemma1_gap),
    CheckSpec("lemma1.truncation_decay", 4.0, "fast", check_lemma1_truncation),
    CheckSpec("lemma2.identity", 0.0, "fast", check_lemma2),
    CheckSpec("min.cross_check", 1e-5, "slow", check_cross),
    CheckSpec("min.entropy_vs_N", 1e-6, "slow", check_entropy_vs_n),
    CheckSpec("min.full_gaussian", 1e-6, "fast", check_min_full),
    CheckSpec("min.symmetry_neutrality", 1e-6, "slow", check_min_neutrality),
    CheckSpec("minN128.value", 5e-7, "slow", check_min_n128),
    CheckSpec("oos.example_functional", 0.0, "fast", _oos, "out_of_scope",
              "illustrative F = F0 + F1 functional"),
    CheckSpec("oos.gaussian_kernel_theorem", 0.0, "fast", _oos, "out_of_scope",
              "cited background on Gaussian-kernel maximizers"),
    CheckSpec("oos.higher_dimensions", 0.0, "fast", _oos, "out_of_scope", "n > 1 dimensions"),
    CheckSpec("oos.weak_topology", 0.0, "fast", _oos, "out_of_scope",
              "weak convergence clause of the third conjecture; the fit is a proxy"),
    CheckSpec("prop1.limit_pnorm", 1e-3, "fast", check_prop1_limit),
    CheckSpec("prop1.norm_convergence", 1e-3, "fast", check_norm_convergence),
    CheckSpec("prop2.C_alternating", 0.0, "fast", check_prop2_alternating),
    CheckSpec("prop2.C_uniform", 0.0, "fast", check_prop2_uniform),
    CheckSpec("prop2.dilatation_invariance", 0.0, "fast", check_prop2_dilatation),
    CheckSpec("prop3.gaussian_residual", 1e-7, "fast", check_prop3_gaussian),
    CheckSpec("prop3.residual_decay", 0.0, "fast", check_prop3_decay),
    CheckSpec("prop3.unitary_residual", 1e-9, "fast", check_prop3_unitary),
    CheckSpec("weak_limit.constant", 1e-14, "fast", check_weak_limit),
)


def _check_ids_unique() -> None:
    ids = [c.id for c in CHECKS]
    if len(ids) != len(set(ids)):
        raise RuntimeError("duplicate check ids")


_check_ids_unique()


def select_checks(tier: str) -> list[CheckSpec]:
    if tier not in TIERS:
        raise ValueError(f"tier must be one of {TIERS}, got {tier!r}")
    chosen = [c for c in CHECKS if tier == "all" or c.tier == "fast"]
    return sorted(chosen, key=lambda c: c.id)


def _run_check(spec: CheckSpec, seed: int) -> CheckRecord:
    if spec.status == "out_of_scope":
        return CheckRecord(spec.id, spec.tier, "out_of_scope", None, None, None, spec.note, 0.0)
    rng = np.random.default_rng([seed, zlib.crc32(spec.id.encode())])
    t0 = time.perf_counter()
    try:
        out = spec.run(rng)
    except Exception as exc:      # failures are data, not exceptions
        return CheckRecord(spec.id, spec.tier, "error", None, None, spec.tolerance,
                           f"{type(exc).__name__}: {exc}", time.perf_counter() - t0)
    status = "pass" if out.passed else "fail"
    return CheckRecord(spec.id, spec.tier, status, float(out.measured), float(out.reference),
                       spec.tolerance, out.detail, time.perf_counter() - t0)


def run_suite(tier: str = "fast", seed: int = 7, workers: int | None = None) -> SuiteReport:
    """Run the selected checks concurrently; the report is ordered by check id."""
    specs = select_checks(tier)
    records = ordered_map(lambda s: _run_check(s, seed), specs, workers)
    return SuiteReport(tier, seed, tuple(records))
