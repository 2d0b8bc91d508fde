"""Interpolating vectors, Hirschman interpolation, first-law slopes and spectral filtering."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .algebra import InclusionSpec, State, Spectrum, as_state, embed, restrict
from .measures import (
    LpParams,
    entropy_difference,
    lp_norm,
    modular_expectation,
    relative_entropy,
    schatten_norm,
)
from .recovery import PreconditionError, harmonic_density, petz_predual
from .standard_form import EmbeddingIsometry, HSVector, RelativeModular, connes_cocycle, polar_cone

STRIP_TOL = 1e-14


class DomainError(ValueError):
    """A complex argument lies outside the admissible strip."""


def _batched_embed(spec, b):
    # ι applied along the last two axes
    b_index, label = spec.index_maps
    same = label[:, None] == label[None, :]
    return b[..., b_index[:, None], b_index[None, :]] * same


def _batched_power(spec_obj, zs):
    # Σ_j λ_j^z P_j for each z, on the support
    lv = spec_obj.log_values
    ph = np.exp(np.multiply.outer(zs, lv))
    v = spec_obj.vectors
    return np.einsum("ij,zj,kj->zik", v, ph, v.conj())


# -- the interpolating vector ------------------------------------------------------------


class GammaFamily:
    """Data for ``Γ(z) = σ_A^z ι(σ_B^{-z} ρ_B^z) ρ_A^{1/2 - z}``.

    Parameters
    ----------
    spec : InclusionSpec
    rho, sigma : State
        States on ``A``.
    vector : HSVector, optional
        A vector inducing ``ρ`` that is not the cone representative, for
        example a filtered vector.  With ``vector = ξ w`` (``ξ`` in the cone)
        the family is ``Γ_ξ(z) w``.
    filtered : bool
        Allow the extended strip ``-1/2 < Re z <= 1/2`` for rank-deficient inputs.
    """

    def __init__(self, spec, rho, sigma, vector=None, filtered=False):
        self.spec = spec
        if vector is not None:
            xi, w = polar_cone(vector)
            rho = State(xi.matrix @ xi.matrix.conj().T)
            self.tail = w
            self.psi = vector if isinstance(vector, HSVector) else HSVector(vector)
        else:
            rho = as_state(rho)
            self.tail = None
            self.psi = HSVector(rho.sqrt())
        self.rho = rho
        self.sigma = as_state(sigma)
        self.rho_b = restrict(spec, rho)
        self.sigma_b = restrict(spec, self.sigma)
        self.filtered = filtered
        self.full_rank = rho.faithful and self.sigma.faithful

    def check(self, z):
        if self.full_rank:
            return
        re = np.real(z)
        lo = -0.5 if self.filtered else 0.0
        if np.any(re < lo - STRIP_TOL) or np.any(re > 0.5 + STRIP_TOL):
            raise DomainError(
                f"Re z = {np.min(re):.3g}..{np.max(re):.3g} is outside [{lo}, 1/2] "
                "for rank-deficient, unfiltered input"
            )

    def values(self, zs):
        """Matrices ``Γ(z)`` for an array of ``z``; shape ``(len(zs), n, n)``."""
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        self.check(zs)
        sa = _batched_power(self.sigma.spectrum, zs)
        mid = _batched_power(self.sigma_b.spectrum, -zs) @ _batched_power(self.rho_b.spectrum, zs)
        ra = _batched_power(self.rho.spectrum, 0.5 - zs)
        out = sa @ _batched_embed(self.spec, mid) @ ra
        if self.tail is not None:
            out = out @ self.tail
        return out

    def __call__(self, z):
        return HSVector(self.values([z])[0])


def gamma_vector(fam, z):
    """Closed-form ``Γ(z)`` as a vector."""
    return fam(z)


def gamma_abstract(fam, z):
    """``Δ^z_{σ_A,ρ_A} V_ρ Δ^{-z}_{σ_B,ρ_B} |ρ_B^{1/2}⟩`` from standard-form pieces."""
    fam.check(z)
    v = EmbeddingIsometry(fam.spec, fam.rho, projected=True)
    dm_a = RelativeModular(fam.sigma, fam.rho)
    dm_b = RelativeModular(fam.sigma_b, fam.rho_b)
    inner = dm_b.power(-z, HSVector(fam.rho_b.sqrt(), "B"))
    out = dm_a.power(z, v.apply(inner))
    return out.right(fam.tail) if fam.tail is not None else out


def gamma_boundary_cocycle(fam, t):
    """``Γ(it)`` as ``(Dσ_A:Dρ_A)_t ρ_A^{it} ι((Dσ_B:Dρ_B)_{-t}) ρ_A^{-it} ρ_A^{1/2}``."""
    r = fam.rho.spectrum
    out = (connes_cocycle(fam.sigma, fam.rho, t) @ r.power(1j * t)
           @ embed(fam.spec, connes_cocycle(fam.sigma_b, fam.rho_b, -t))
           @ r.power(-1j * t) @ r.power(0.5))
    return HSVector(out @ fam.tail if fam.tail is not None else out)


@dataclass
class TopStateReport:
    t: float
    min_slack: float
    max_abs_diff: float
    samples: int

    @property
    def ok(self):
        return self.min_slack >= -1e-10


def gamma_top_state_check(fam, t, samples=16, seed=0):
    """Compare ``⟨Γ(1/2+it)| a |Γ(1/2+it)⟩`` with ``tr(P_t(ρ_B) a)`` over PSD ``a``.

    The first sample is ``a = 1``; the rest are random Wishart matrices.
    """
    g = fam.values([0.5 + 1j * t])[0]
    top = g @ g.conj().T
    rec = petz_predual(fam.spec, fam.sigma, fam.rho_b.matrix, t)
    rng = np.random.default_rng(seed)
    n = fam.spec.n
    slacks, diffs = [], []
    for k in range(samples):
        if k == 0:
            a = np.eye(n)
        else:
            x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            a = x @ x.conj().T / n
        lhs = np.trace(top @ a).real
        rhs = np.trace(rec @ a).real
        slacks.append(rhs - lhs)
        diffs.append(abs(rhs - lhs))
    return TopStateReport(float(t), float(min(slacks)), float(max(diffs)), samples)


@dataclass
class DerivativeResult:
    value: float
    error_bound: float
    target: float
    h: float

    @property
    def residual(self):
        return abs(self.value - self.target)

    @property
    def ok(self):
        return self.residual <= max(1e-6, self.error_bound)


def gamma_derivative_at_zero(fam, h=1e-4):
    """Derivative of ``2 Re⟨ψ|Γ(z)⟩`` at ``z = 0`` with Richardson extrapolation.

    Central differences with steps ``h`` and ``h/2`` are combined as
    ``(4 D(h/2) − D(h)) / 3``.  The error bound is ``10 h² |g'''|`` with the
    third derivative estimated from ``D(h) − D(h/2)``.  The target value is
    ``−2 (S_A − S_B)``.
    """
    if not (fam.full_rank or fam.filtered):
        raise DomainError("derivative at z = 0 needs full-rank or filtered input")
    zs = np.array([h, -h, h / 2, -h / 2])
    vals = fam.values(zs)
    psi = fam.psi.matrix
    g = 2.0 * np.einsum("ij,zij->z", psi.conj(), vals).real
    d1 = (g[0] - g[1]) / (2 * h)
    d2 = (g[2] - g[3]) / h
    value = (4 * d2 - d1) / 3
    third = 8.0 * abs(d1 - d2) / h**2
    target = -2.0 * entropy_difference(fam.spec, fam.rho, fam.sigma)
    return DerivativeResult(float(value), float(10 * h**2 * third), float(target), h)


# -- Hirschman interpolation ----------------------------------------------------------------


def hirschman_kernels(theta, t):
    """Boundary kernels ``(α_θ(t), β_θ(t))`` of the three-lines improvement on the strip of width 1/2."""
    if not 0.0 < theta < 0.5:
        raise ValueError(f"theta must lie in (0, 1/2), got {theta}")
    t = np.asarray(t, dtype=float)
    s = np.sin(2 * np.pi * theta)
    c = np.cos(2 * np.pi * theta)
    # divide through by cosh 2πt to stay finite for large |t|
    e = np.exp(-2 * np.pi * np.abs(t))
    sech = 2 * e / (1 + e * e)
    alpha = s * sech / ((1 - 2 * theta) * (1 - c * sech))
    beta = s * sech / (2 * theta * (1 + c * sech))
    return alpha, beta


def hirschman_grid(theta, t_max=8.0, per_width=8):
    """Trapezoid nodes resolving the kernel poles at ``t = ±iθ`` and ``±i(1/2 − θ)``."""
    h = min(theta, 0.5 - theta) / per_width
    m = int(np.ceil(t_max / h))
    t = h * np.arange(-m, m + 1)
    return t, np.full(t.size, h)


@dataclass
class HirschmanReport:
    theta: float
    p0: float
    p1: float
    p_theta: float
    lhs: float
    rhs: float
    kernel_mass: tuple

    @property
    def gap(self):
        return self.rhs - self.lhs


def _lp_norms(mats, p, rho):
    w = rho.power(1.0 / p - 0.5)
    s = np.linalg.svd(w[None] @ mats, compute_uv=False)
    if p == 1.0:
        return s.sum(axis=1)
    return (s**p).sum(axis=1) ** (1.0 / p)


def hirschman_check(fam, theta, p0=2.0, p1=1.0, quad=None):
    """Evaluate both sides of the logarithmic three-lines bound for ``G = Γ``.

    ``ln‖Γ(θ)‖_{p_θ} ≤ ∫ [(1−2θ) α_θ ln‖Γ(it)‖_{p0} + 2θ β_θ ln‖Γ(1/2+it)‖_{p1}] dt``
    with ``1/p_θ = (1−2θ)/p0 + 2θ/p1``; norms are taken relative to ``ρ``.

    Parameters
    ----------
    quad : tuple (t, w), optional
        Nodes and weights for the ``t`` integral; defaults to :func:`hirschman_grid`.
    """
    for p in (p0, p1):
        if not 1.0 <= p <= 2.0:
            raise ValueError("p0 and p1 must lie in [1, 2]")
    t, w = hirschman_grid(theta) if quad is None else quad
    p_theta = 1.0 / ((1 - 2 * theta) / p0 + 2 * theta / p1)
    alpha, beta = hirschman_kernels(theta, t)
    left = fam.values(1j * t)
    right = fam.values(0.5 + 1j * t)
    n0 = _lp_norms(left, p0, fam.rho)
    n1 = _lp_norms(right, p1, fam.rho)
    rhs = np.sum(w * ((1 - 2 * theta) * alpha * np.log(n0) + 2 * theta * beta * np.log(n1)))
    lhs = np.log(_lp_norms(fam.values([theta]), p_theta, fam.rho)[0])
    mass = (float(np.sum(w * alpha)), float(np.sum(w * beta)))
    return HirschmanReport(theta, p0, p1, p_theta, float(lhs), float(rhs), mass)


# -- first law ------------------------------------------------------------------------------

DEFAULT_LAMBDAS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)


@dataclass
class FirstLawResult:
    lambdas: np.ndarray
    petz_slopes: np.ndarray
    lp_slopes: np.ndarray
    ratios: np.ndarray

    def _monotone(self, s):
        a = np.abs(s)
        return bool(np.all(a[1:] <= a[:-1] + 1e-12))

    @property
    def monotone(self):
        return self._monotone(self.petz_slopes) and self._monotone(self.lp_slopes)

    @property
    def final(self):
        return float(max(abs(self.petz_slopes[-1]), abs(self.lp_slopes[-1])))


def check_vanishing(psi, family, lambdas=DEFAULT_LAMBDAS, factor=0.1):
    """Ratios ``‖ζ_λ − ψ‖² / λ``; raises unless the last is at most ``factor`` times the first."""
    psi = psi if isinstance(psi, HSVector) else HSVector(psi)
    ratios = np.array([(family(lam) - psi).norm() ** 2 / lam for lam in lambdas])
    if ratios[-1] > factor * ratios[0]:
        raise PreconditionError(
            f"‖ζ_λ − ψ‖²/λ does not vanish: {ratios[0]:.3e} at λ={lambdas[0]:g}, "
            f"{ratios[-1]:.3e} at λ={lambdas[-1]:g}"
        )
    return ratios


def first_law_slope(psi, family, lambda_grid=DEFAULT_LAMBDAS, exponent_schedule=None):
    """Slopes ``(1/λ) ln⟨ζ_λ|Δ^x_{ψ,ζ_λ}|ζ_λ⟩`` and ``(1/λ) ln‖ζ_λ‖_{p,ψ}`` along a family.

    Parameters
    ----------
    psi : HSVector
        Normalized reference vector; its density on the algebra is ``ψ ψ*``.
    family : callable
        ``λ ↦ ζ_λ``, normalized vectors with ``ζ_0 = ψ``.
    exponent_schedule : tuple of callables, optional
        ``(x(λ), p(λ))`` with ``0 <= x <= 1 − ε`` and ``1 <= p <= 2``;
        defaults to ``x = 1/2`` and ``p = 3/2``.

    Raises
    ------
    PreconditionError
        If ``‖ζ_λ − ψ‖² / λ`` is not seen to vanish on the grid.
    """
    psi = psi if isinstance(psi, HSVector) else HSVector(psi)
    lambdas = np.asarray(lambda_grid, dtype=float)
    x_of, p_of = exponent_schedule or (lambda lam: 0.5, lambda lam: 1.5)
    ratios = check_vanishing(psi, family, lambdas)
    dens = Spectrum(psi.state())
    petz, lp = [], []
    for lam in lambdas:
        zeta = family(lam)
        x, p = float(x_of(lam)), float(p_of(lam))
        if not (0.0 <= x < 1.0 and 1.0 <= p <= 2.0):
            raise ValueError(f"exponents out of range at λ={lam}: x={x}, p={p}")
        val = modular_expectation(zeta, dens, x).real
        petz.append(np.log(val) / lam)
        nrm = schatten_norm(dens.power(1.0 / p - 0.5) @ zeta.matrix, p)
        lp.append(np.log(nrm) / lam)
    return FirstLawResult(lambdas, np.array(petz), np.array(lp), ratios)


def perturbation_family(psi, v, power=1.0):
    """``λ ↦ normalize(ψ + λ^power v)``; ``power = 1/2`` violates the vanishing condition."""
    psi = psi if isinstance(psi, HSVector) else HSVector(psi)
    v = v if isinstance(v, HSVector) else HSVector(v)

    def family(lam):
        return (psi + v * (lam**power)).normalized()

    return family


# -- spectral filtering -----------------------------------------------------------------------

FAMILIES = ("gaussian", "compact_bump")


def _bump(p):
    p = np.asarray(p, dtype=float)
    inside = np.abs(p) < 1.0
    safe = np.where(inside, p, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe**2)), 0.0)


@lru_cache(maxsize=4)
def _bump_nodes(count=1600):
    # Gauss–Legendre nodes on [0, 1]; the profile is flat to all orders at 1
    u, w = np.polynomial.legendre.leggauss(count)
    p = 0.5 * (u + 1.0)
    return p, 0.5 * w * _bump(p)


def _bump_time(t, shift=0.0):
    """``f(t + i·shift) = (1/2π) ∫ f̃(p) e^{-p·shift} e^{ipt} dp`` for the bump profile."""
    p, w = _bump_nodes()
    t = np.atleast_1d(np.asarray(t, dtype=float))
    # fold p -> -p using evenness of the profile
    cosh_w, sinh_w = w * np.cosh(p * shift), w * np.sinh(p * shift)
    ph = np.multiply.outer(t, p)
    re = np.cos(ph) @ cosh_w
    im = -(np.sin(ph) @ sinh_w)
    return (re + 1j * im) / np.pi


def _bump_antiderivative(t):
    # ∫_0^t f(s) ds for the unshifted profile
    p, w = _bump_nodes()
    return (np.sin(np.multiply.outer(np.atleast_1d(t), p)) @ (w / p)) / np.pi


@lru_cache(maxsize=64)
def _bump_l1(shift=0.0, t_max=600.0, step=0.05):
    """``∫ |f(t + i·shift)| dt`` for the bump profile.

    Unshifted, ``f`` is real: the integral is assembled exactly between its
    sign changes from the antiderivative.  Shifted, ``|f|`` is smooth and
    decays at the ends, so the trapezoid rule converges fast.
    """
    t = np.arange(0.0, t_max + step, step)
    f = _bump_time(t, shift)
    if shift == 0.0:
        fr = f.real
        idx = np.nonzero(np.signbit(fr[:-1]) != np.signbit(fr[1:]))[0]
        zeros = [optimize.brentq(lambda s: _bump_time(s)[0].real, t[i], t[i + 1], xtol=1e-14)
                 for i in idx]
        pts = np.concatenate([[0.0], zeros, [t_max]])
        prim = _bump_antiderivative(pts)
        return float(2.0 * np.abs(np.diff(prim)).sum())
    # |f(t + iθ)| is even in t because the profile is real and even
    return float(2.0 * integrate.trapezoid(np.abs(f), t))


@dataclass(frozen=True)
class FilterSpec:
    """Filtering profile ``f̃`` scaled to ``f̃_P(p) = f̃(p / P)``.

    Attributes
    ----------
    family : {"gaussian", "compact_bump"}
    P : float
        Cutoff scale.
    scale : float
        Value ``f̃(0)``; :func:`filter_vector` can retune it to normalize ``ψ_P``.
    """

    family: str = "gaussian"
    P: float = 10.0
    scale: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown filter family {self.family!r}")
        if not self.P > 0:
            raise ValueError("P must be positive")

    def profile(self, p):
        """``f̃(p)`` (unscaled argument)."""
        if self.family == "gaussian":
            return self.scale * np.exp(-0.5 * np.asarray(p, dtype=float) ** 2)
        return self.scale * _bump(p)

    def profile_P(self, p):
        return self.profile(np.asarray(p, dtype=float) / self.P)

    def time(self, t):
        """``f(t)``, with ``f̃(p) = ∫ e^{-itp} f(t) dt``."""
        t = np.asarray(t, dtype=float)
        if self.family == "gaussian":
            return self.scale / np.sqrt(2 * np.pi) * np.exp(-0.5 * t**2)
        return self.scale * _bump_time(t.ravel()).real.reshape(t.shape)

    def time_P(self, t):
        return self.P * self.time(np.asarray(t) * self.P)

    @property
    def sup_norm(self):
        return float(self.scale)

    @property
    def l1_norm(self):
        """``‖f‖₁``."""
        if self.family == "gaussian":
            return float(self.scale)
        return float(self.scale * _bump_l1(0.0))

    def shifted_l1_norm(self, shift=None):
        """``‖f(· + i·shift)‖₁``, by default at ``shift = P/2``."""
        shift = self.P / 2 if shift is None else shift
        if self.family == "gaussian":
            return float(self.scale * np.exp(0.5 * shift**2))
        return float(self.scale * _bump_l1(float(shift)))

    def with_scale(self, scale):
        return FilterSpec(self.family, self.P, float(scale))


class _Bi:
    # bi-eigenbasis of ln Δ_{σ,ρ}
    def __init__(self, rho, sigma):
        self.s, self.u = np.linalg.eigh(as_state(sigma).matrix)
        self.r, self.w = np.linalg.eigh(as_state(rho).matrix)
        self.s = np.clip(self.s, 0, None)
        self.r = np.clip(self.r, 0, None)
        with np.errstate(divide="ignore"):
            self.L = np.log(self.s)[:, None] - np.log(self.r)[None, :]
        self.live = (self.s[:, None] > 1e-14) & (self.r[None, :] > 1e-14)


def filter_vector(rho, sigma, filt, normalize=False):
    """``ψ_P = f̃_P(−ln Δ_{σ,ρ}) |ρ^{1/2}⟩`` as a spectral mask.

    ``ln Δ_{σ,ρ}`` has eigenvalues ``ln s_i − ln r_j`` in the bi-eigenbasis of
    ``σ`` and ``ρ``; off the joint support the operator acts as zero.

    Returns
    -------
    HSVector, FilterSpec
        The filtered vector and the spec actually used (rescaled when
        ``normalize`` is true so that ``‖ψ_P‖ = 1``).
    """
    bi = _Bi(rho, sigma)
    core = bi.u.conj().T @ as_state(rho).sqrt() @ bi.w
    mask = np.where(bi.live, filt.profile_P(-np.where(bi.live, bi.L, 0.0)), 0.0)
    out = bi.u @ (mask * core) @ bi.w.conj().T
    if normalize:
        nrm = np.linalg.norm(out)
        filt = filt.with_scale(filt.scale / nrm)
        out = out / nrm
    return HSVector(out), filt


def filter_operator(rho, sigma, filt):
    """``a_P = ∫ f_P(t) σ^{it} ρ^{-it} dt`` in closed form; ``ψ_P = a_P ψ``."""
    bi = _Bi(rho, sigma)
    mask = np.where(bi.live, filt.profile_P(-np.where(bi.live, bi.L, 0.0)), 0.0)
    return bi.u @ (mask * (bi.u.conj().T @ bi.w)) @ bi.w.conj().T


def filter_operator_quadrature(rho, sigma, filt, t_max=None, nodes=4001):
    """``a_P`` by trapezoid quadrature of the cocycle integral (Gaussian profiles)."""
    if filt.family != "gaussian":
        raise ValueError("time-domain quadrature is provided for the Gaussian family")
    t_max = 40.0 / filt.P if t_max is None else t_max
    t = np.linspace(-t_max, t_max, nodes)
    h = t[1] - t[0]
    f = filt.time_P(t)
    sp, rp = as_state(sigma).spectrum, as_state(rho).spectrum
    out = np.zeros((sp.dim, sp.dim), dtype=complex)
    for tk, fk in zip(t, f):
        out += h * fk * connes_cocycle(sp, rp, tk)
    return out


@dataclass
class FilterBounds:
    a_norm: float
    l1: float
    identity_residual: float
    domination_min_eig: float
    shifted_l1: float

    @property
    def slack(self):
        return min(self.l1 - self.a_norm, self.domination_min_eig)


def filter_bounds(rho, sigma, filt):
    """Check ``ψ_P = a_P ψ``, ``‖a_P‖ ≤ ‖f‖₁`` and ``ω_{ψ_P} ≤ ‖f(·+iP/2)‖₁² ω_σ``."""
    psi_p, _ = filter_vector(rho, sigma, filt)
    a = filter_operator(rho, sigma, filt)
    psi = as_state(rho).sqrt()
    resid = float(np.abs(a @ psi - psi_p.matrix).max())
    a_norm = float(np.linalg.norm(a, 2))
    shifted = filt.shifted_l1_norm()
    diff = shifted**2 * as_state(sigma).matrix - psi_p.state()
    dom = float(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)).min())
    return FilterBounds(a_norm, filt.l1_norm, resid, dom, shifted)


@dataclass
class FilterCurve:
    family: str
    P: np.ndarray
    entropies: np.ndarray
    scales: np.ndarray
    target: float
    l1_norm: float

    @property
    def final_offset(self):
        return float(self.entropies[-1] - self.target)


def filtering_entropy_curve(rho, sigma, filter_family="gaussian", P_grid=(1e1, 1e2, 1e3)):
    """``S(ψ_P | σ)`` along ``P_grid`` with ``f̃(0)`` retuned so that ``‖ψ_P‖ = 1``."""
    rho, sigma = as_state(rho), as_state(sigma)
    ent, scales = [], []
    for P in P_grid:
        vec, used = filter_vector(rho, sigma, FilterSpec(filter_family, float(P)), normalize=True)
        st = State(vec.state(), validate=False)
        ent.append(float(relative_entropy(st, sigma)))
        scales.append(used.scale)
    l1 = FilterSpec(filter_family, 1.0).l1_norm
    return FilterCurve(filter_family, np.asarray(P_grid, float), np.array(ent),
                       np.array(scales), float(relative_entropy(rho, sigma)), l1)


# -- the Ξ vector -------------------------------------------------------------------------------


def _xi_core(spec, rho, sigma, z):
    rho, sigma = as_state(rho), as_state(sigma)
    rb, sb = restrict(spec, rho), restrict(spec, sigma)
    return embed(spec, rb.power(z) @ sb.power(-z)) @ sigma.power(z) @ rho.sqrt()


def xi_vector(spec, rho, sigma, tau, z):
    """``Ξ(z, τ) = ι(ρ_B^z σ_B^{-z}) σ_A^z ρ_A^{1/2} τ^{-z}``."""
    return HSVector(_xi_core(spec, rho, sigma, z) @ as_state(tau).power(-z))


def xi_g(spec, rho, sigma, theta):
    """``g(θ) = ‖ι(ρ_B^θ σ_B^{-θ}) σ_A^θ ρ_A^{1/2}‖_{p_θ}`` with ``p_θ = 2/(1+2θ)``."""
    return schatten_norm(_xi_core(spec, rho, sigma, theta), 2.0 / (1.0 + 2.0 * theta))


def xi_tau_infimum(spec, rho, sigma, theta, levels=6, a_max=1.5):
    """Minimum of ``‖Ξ(θ, τ)‖`` over ``τ ∝ (X*X)^a`` on nested dyadic ``a``-grids.

    Returns
    -------
    ndarray, shape (levels,)
        Running minima, one per refinement level; non-increasing by construction.
    """
    x = _xi_core(spec, rho, sigma, theta)
    m = Spectrum(x.conj().T @ x)
    mins, best = [], np.inf
    for level in range(levels):
        for a in np.linspace(0.0, a_max, 2**level + 1):
            tau_vals = m.values**a
            tau = m.apply(tau_vals / tau_vals.sum())
            val = np.linalg.norm(x @ Spectrum(tau).power(-theta))
            best = min(best, float(val))
        mins.append(best)
    return np.array(mins)


@dataclass
class XiReport:
    thetas: np.ndarray
    g: np.ndarray
    residuals: np.ndarray
    delta_s: float
    tau_minima: np.ndarray = field(default=None)


def xi_gap(spec, rho, sigma, theta_grid=(1e-1, 1e-2, 1e-3, 1e-4, 1e-5), tau_levels=6):
    """Residuals ``(1/θ) ln g(θ) + ΔS`` on a ``θ``-grid; reported, not asserted."""
    ds = float(entropy_difference(spec, rho, sigma))
    thetas = np.asarray(theta_grid, dtype=float)
    g = np.array([xi_g(spec, rho, sigma, th) for th in thetas])
    res = np.log(g) / thetas + ds
    tau = xi_tau_infimum(spec, rho, sigma, float(thetas[0]), tau_levels)
    return XiReport(thetas, g, res, ds, tau)
