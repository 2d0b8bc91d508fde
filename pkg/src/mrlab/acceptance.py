"""Ensemble acceptance checks, one function per criterion.

Each function returns a :class:`CriterionResult`; :func:`run_all` prints one
PASS/FAIL line per criterion.  Ensembles are seeded, so results are
reproducible.
"""
from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, linalg

from . import analytic
from .algebra import InclusionSpec, State, random_state, restrict, tensor_split_pair, trace_distance
from .lab import sample_pair, trial_streams
from .measures import (
    LpParams,
    alt_chain,
    entropy_difference,
    fidelity,
    fuchs_vdg_check,
    lp_norm,
    lp_norm_variational,
)
from .recovery import (
    QuadratureSpec,
    exact_sufficiency_check,
    harmonic_density,
    petz_map,
    petz_map_any,
    recovery_report,
    rotated_petz,
    universal_recovery,
)
from .standard_form import EmbeddingIsometry, HSVector

ENSEMBLE_BLOCKS = ("2x2", "2x3", "3x3")


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:2d} {self.title}: {self.detail} ({self.seconds:.1f}s)"


def _timed(number, title):
    def wrap(fn):
        def inner(*args, **kwargs):
            start = time.perf_counter()
            passed, detail = fn(*args, **kwargs)
            return CriterionResult(number, title, bool(passed), detail, time.perf_counter() - start)

        inner.__name__ = fn.__name__
        inner.__doc__ = fn.__doc__
        return inner

    return wrap


def _random_vector(n, rng):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return HSVector(z / np.linalg.norm(z))


@lru_cache(maxsize=None)
def recovery_ensemble(blocks, trials=1000, seed=20240):
    """Recovery reports over a random ensemble (70% full-rank ``ρ``, full-rank ``σ``)."""
    spec = InclusionSpec.parse(blocks)
    quad = QuadratureSpec()
    out = []
    for _, rng in trial_streams(seed, trials):
        rho, sigma = sample_pair(spec, rng, "random")
        out.append(recovery_report(spec, rho, sigma, quad))
    return out


@_timed(1, "strengthened monotonicity")
def criterion_1(trials=1000):
    parts, ok = [], True
    for blocks in ENSEMBLE_BLOCKS:
        reps = recovery_ensemble(blocks, trials)
        clamped = sum(r.clamped for r in reps)
        bad = sum((not r.monotonicity_ok) and not r.clamped for r in reps)
        worst = min(r.monotonicity_gap + 1e-8 + r.quadrature_error for r in reps if not r.clamped)
        ok &= bad == 0
        parts.append(f"{blocks}: {bad} violations/{len(reps)}, {clamped} clamped, min margin {worst:.3e}")
    return ok, "; ".join(parts)


@_timed(2, "universal recovery bounds")
def criterion_2(trials=1000):
    parts, ok = [], True
    for blocks in ENSEMBLE_BLOCKS:
        reps = recovery_ensemble(blocks, trials)
        d = min(r.recovery_distance_gap + 1e-7 for r in reps)
        f = min(r.recovery_fidelity_gap + 1e-8 for r in reps)
        bad = sum(r.recovery_distance_gap < -1e-7 or r.recovery_fidelity_gap < -1e-8 for r in reps)
        ok &= bad == 0
        parts.append(f"{blocks}: {bad} violations, margins {d:.3e}/{f:.3e}")
    return ok, "; ".join(parts)


@_timed(3, "saturation witness")
def criterion_3():
    spec = InclusionSpec.parse("2x2")
    rho = State(np.diag([1.0, 0, 0, 0]))
    sigma = State(np.eye(4) / 4)
    rep = recovery_report(spec, rho, sigma)
    target = np.diag([0.5, 0.5, 0, 0])
    e1 = abs(rep.delta_s - np.log(2))
    e2 = abs(-2 * np.log(rep.recovered_fidelity) - np.log(2))
    e3 = float(np.abs(rep.recovered - target).max())
    ok = e1 <= 1e-9 and e2 <= 1e-9 and e3 <= 1e-9
    return ok, f"|ΔS − ln2| = {e1:.2e}, |−2lnF − ln2| = {e2:.2e}, state error {e3:.2e}"


@_timed(4, "exact sufficiency of split pairs")
def criterion_4(trials=200):
    specs = [InclusionSpec.parse(b) for b in ("2x2", "2x3", "3x3", "2x2,1x3")]
    worst_ds, worst_d, worst_i = 0.0, 0.0, 0.0
    for i, (_, rng) in enumerate(trial_streams(4004, trials)):
        spec = specs[i % len(specs)]
        rho, sigma = tensor_split_pair(spec, rng)
        rep = exact_sufficiency_check(spec, rho, sigma)
        worst_ds = max(worst_ds, abs(rep.delta_s))
        worst_d = max(worst_d, rep.recovery_distance)
        worst_i = max(worst_i, rep.intertwining_residual)
    ok = worst_ds <= 1e-10 and worst_d <= 1e-9
    return ok, f"max |ΔS| {worst_ds:.2e}, max distance {worst_d:.2e}, intertwining {worst_i:.2e}"


@_timed(5, "L_p endpoints and variational oracle")
def criterion_5(trials=500, variational=50):
    e1 = e2 = 0.0
    for _, rng in trial_streams(5005, trials):
        n = int(rng.integers(2, 7))
        rank = int(rng.integers(1, n + 1))
        psi = random_state(n, rank=rank, seed=rng)
        zeta = _random_vector(n, rng)
        p1 = lp_norm(zeta, LpParams(1.0, psi))
        e1 = max(e1, abs(p1 - fidelity(psi, State(zeta.state(), validate=False))))
        basis = linalg.orth(psi.matrix, rcond=1e-10)
        proj = basis @ basis.conj().T
        p2 = lp_norm(zeta, LpParams(2.0, psi))
        e2 = max(e2, abs(p2 - np.linalg.norm(proj @ zeta.matrix)))
    e3 = 0.0
    for _, rng in trial_streams(5006, variational):
        n = int(rng.integers(2, 5))
        psi = random_state(n, rank=int(rng.integers(1, n + 1)), seed=rng)
        zeta = _random_vector(n, rng)
        p = float(rng.uniform(1.0, 2.0))
        params = LpParams(p, psi)
        e3 = max(e3, abs(float(lp_norm_variational(zeta, params)) - lp_norm(zeta, params)))
    ok = e1 <= 1e-10 and e2 <= 1e-10 and e3 <= 1e-6
    return ok, f"p=1 {e1:.2e}, p=2 {e2:.2e}, variational {e3:.2e}"


@_timed(6, "first-law slopes")
def criterion_6(trials=50):
    worst, mono, refused = 0.0, True, 0
    for i, (_, rng) in enumerate(trial_streams(6006, trials)):
        n = (4, 6)[i % 2]
        psi = HSVector(random_state(n, seed=rng).sqrt())
        v = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        res = analytic.first_law_slope(psi, analytic.perturbation_family(psi, v))
        at = int(np.argmin(np.abs(res.lambdas - 1e-4)))
        worst = max(worst, abs(res.petz_slopes[at]), abs(res.lp_slopes[at]))
        mono &= res.monotone
        try:
            analytic.first_law_slope(psi, analytic.perturbation_family(psi, v, 0.5))
        except analytic.PreconditionError:
            refused += 1
    ok = worst <= 1e-2 and mono and refused == trials
    return ok, f"max |slope| at 1e-4 {worst:.2e}, monotone {mono}, violators refused {refused}/{trials}"


@_timed(7, "Gaussian filtering")
def criterion_7(trials=50):
    worst_off, worst_slack, worst_id = 0.0, np.inf, 0.0
    for i, (_, rng) in enumerate(trial_streams(7007, trials)):
        n = (4, 6)[i % 2]
        rho, sigma = random_state(n, seed=rng), random_state(n, seed=rng)
        curve = analytic.filtering_entropy_curve(rho, sigma, "gaussian", (1e1, 1e2, 1e3, 1e4))
        worst_off = max(worst_off, abs(curve.final_offset))
        for P in (1.0, 2.0, 4.0):
            b = analytic.filter_bounds(rho, sigma, analytic.FilterSpec("gaussian", P))
            worst_slack = min(worst_slack, b.slack)
            worst_id = max(worst_id, b.identity_residual)
    ok = worst_off <= 1e-4 and worst_slack >= -1e-8 and worst_id <= 1e-10
    return ok, f"max |offset| {worst_off:.2e}, min bound slack {worst_slack:.2e}, identity {worst_id:.2e}"


def kernel_masses(theta):
    """``∫α_θ``, ``∫β_θ`` by adaptive quadrature, split at the kernel peak."""
    a = integrate.quad(lambda t: analytic.hirschman_kernels(theta, t)[0], -np.inf, np.inf,
                       points=None, epsabs=1e-13, epsrel=1e-13, limit=400)[0]
    b = integrate.quad(lambda t: analytic.hirschman_kernels(theta, t)[1], -np.inf, np.inf,
                       epsabs=1e-13, epsrel=1e-13, limit=400)[0]
    return a, b


@_timed(8, "logarithmic three-lines bound")
def criterion_8(trials=200):
    specs = [InclusionSpec.parse(b) for b in ("2x2", "2x3")]
    worst = np.inf
    for i, (_, rng) in enumerate(trial_streams(8008, trials)):
        spec = specs[i % 2]
        rho, sigma = random_state(spec.n, seed=rng), random_state(spec.n, seed=rng)
        fam = analytic.GammaFamily(spec, rho, sigma)
        for th in (0.1, 0.25, 0.4):
            worst = min(worst, analytic.hirschman_check(fam, th).gap)
    mass_err = 0.0
    for th in (0.1, 0.25, 0.4):
        a, b = kernel_masses(th)
        mass_err = max(mass_err, abs(a - 1), abs(b - 1))
    p_mass = integrate.quad(harmonic_density, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
    mass_err = max(mass_err, abs(p_mass - 1))
    ok = worst >= -1e-6 and mass_err <= 1e-10
    return ok, f"min gap {worst:.3e}, kernel mass error {mass_err:.2e}"


@_timed(9, "inequality chains")
def criterion_9(trials=1000):
    worst_alt, worst_f = np.inf, np.inf
    for _, rng in trial_streams(9009, trials):
        n = int(rng.integers(2, 7))
        psi = random_state(n, rank=int(rng.integers(1, n + 1)), seed=rng)
        zeta = _random_vector(n, rng)
        p = float(rng.uniform(1.0, 2.0))
        worst_alt = min(worst_alt, alt_chain(zeta, psi, p).slack())
        rho = random_state(n, rank=int(rng.integers(1, n + 1)), seed=rng)
        sigma = random_state(n, rank=int(rng.integers(1, n + 1)), seed=rng)
        f = fuchs_vdg_check(rho, sigma, tol=np.inf)
        worst_f = min(worst_f, f.mid - f.lhs, f.rhs - f.mid)
    ok = worst_alt >= -1e-10 and worst_f >= -1e-10
    return ok, f"min ALT slack {worst_alt:.2e}, min trace-distance sandwich slack {worst_f:.2e}"


@_timed(10, "structural invariants")
def criterion_10(trials=20, gamma_trials=50):
    chan_err, iso_err = 0.0, 0.0
    specs = [InclusionSpec.parse(b) for b in ("2x2", "2x3", "2x2,1x3", "1x2,2x1")]
    for i, (_, rng) in enumerate(trial_streams(10010, trials)):
        spec = specs[i % len(specs)]
        sigma = random_state(spec.n, seed=rng)
        chans = [petz_map(spec, sigma), universal_recovery(spec, sigma, QuadratureSpec()),
                 universal_recovery(spec, sigma)]
        chans += [rotated_petz(spec, sigma, t) for t in (-2.0, -0.5, 0.3, 1.8)]
        singular = random_state(spec.n, rank=max(1, spec.n - 2), seed=rng)
        chans.append(petz_map_any(spec, singular))
        for ch in chans:
            chan_err = max(chan_err, ch.unital_residual(), -ch.min_choi_eigenvalue())
        v = EmbeddingIsometry(spec, sigma).matrix()
        gram = v.conj().T @ v
        proj = v @ v.conj().T
        iso_err = max(iso_err, float(np.abs(gram - np.eye(gram.shape[0])).max()),
                      float(np.abs(proj @ proj - proj).max()))
    g0, deriv = 0.0, 0.0
    for i, (_, rng) in enumerate(trial_streams(10011, gamma_trials)):
        spec = specs[i % 2]
        rho, sigma = random_state(spec.n, seed=rng), random_state(spec.n, seed=rng)
        fam = analytic.GammaFamily(spec, rho, sigma)
        g0 = max(g0, float(np.abs(fam(0).matrix - rho.sqrt()).max()))
        deriv = max(deriv, analytic.gamma_derivative_at_zero(fam).residual)
    ok = chan_err <= 1e-9 and iso_err <= 1e-12 and g0 <= 1e-12 and deriv <= 1e-6
    return ok, (f"channel residual {chan_err:.2e}, isometry {iso_err:.2e}, "
                f"Γ(0) {g0:.2e}, derivative {deriv:.2e}")


@_timed(11, "Ξ residual emission")
def criterion_11(trials=50, stream=None):
    specs = [InclusionSpec.parse(b) for b in ("2x2", "2x3")]
    emitted, mono, above = 0, True, True
    finals = []
    for i, (_, rng) in enumerate(trial_streams(11011, trials)):
        spec = specs[i % 2]
        rho, sigma = random_state(spec.n, seed=rng), random_state(spec.n, seed=rng)
        rep = analytic.xi_gap(spec, rho, sigma)
        if np.all(np.isfinite(rep.residuals)):
            emitted += 1
        mono &= bool(np.all(np.diff(rep.tau_minima) <= 1e-15))
        above &= bool(rep.tau_minima[-1] >= rep.g[0] - 1e-6)
        finals.append(rep.residuals[-1])
        if stream is not None:
            stream.write(f"  xi trial {i}: residuals {np.array2string(rep.residuals, precision=3)}\n")
    ok = emitted == trials and mono and above
    return ok, (f"{emitted}/{trials} emitted, τ-grid minima monotone {mono}, above g {above}, "
                f"median residual at smallest θ {np.median(finals):.2e}")


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11)


def run_all(stream=sys.stdout):
    results = []
    for fn in CRITERIA:
        res = fn()
        results.append(res)
        if stream is not None:
            stream.write(res.line() + "\n")
            stream.flush()
    return results
