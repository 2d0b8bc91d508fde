"""Entropic and distance measures between states and vectors."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .algebra import State, Spectrum, as_state, restrict, trace_distance
from .standard_form import HSVector, RelativeModular, cone_rep


class Divergent(float):
    """Infinite value produced by a support mismatch rather than by overflow."""

    def __new__(cls, reason=""):
        obj = super().__new__(cls, np.inf)
        obj.reason = reason
        return obj

    def __repr__(self):
        return f"Divergent({self.reason!r})"


def is_divergent(x):
    return isinstance(x, Divergent)


class InequalityViolation(AssertionError):
    """An inequality that must hold was violated beyond tolerance."""


def _support_leak(rho, sigma):
    # weight of rho outside the support of sigma
    p = sigma.spectrum.projector()
    return float(np.real(np.trace(rho.matrix)) - np.real(np.trace(p @ rho.matrix)))


def relative_entropy(rho, sigma):
    """Umegaki relative entropy ``tr ρ (ln ρ − ln σ)``.

    Returns
    -------
    float or Divergent
        A :class:`Divergent` infinity when the support of ``ρ`` is not contained
        in the support of ``σ`` (weight outside above ``ρ``'s support cutoff).
    """
    rho, sigma = as_state(rho), as_state(sigma)
    if rho.dim != sigma.dim:
        raise ValueError("states have different dimensions")
    if _support_leak(rho, sigma) > rho.spectrum.cutoff:
        return Divergent("support of rho not contained in support of sigma")
    lam = rho.spectrum.values
    s_rho = float(np.sum(lam * np.log(lam)))
    cross = float(np.real(np.trace(rho.matrix @ sigma.log())))
    return s_rho - cross


def entropy_difference(spec, rho, sigma):
    """``S_A(ρ|σ) − S_B(ρ∘ι|σ∘ι)``, non-negative by monotonicity."""
    rho, sigma = as_state(rho), as_state(sigma)
    s_a = relative_entropy(rho, sigma)
    if is_divergent(s_a):
        return s_a
    s_b = relative_entropy(restrict(spec, rho), restrict(spec, sigma))
    return s_a - s_b


def schatten_norm(x, p):
    """Schatten ``p``-norm from the singular values of ``x``."""
    s = np.linalg.svd(x, compute_uv=False)
    if p == 1:
        return float(s.sum())
    return float(np.sum(s**p) ** (1.0 / p))


def fidelity(rho, sigma):
    """Uhlmann fidelity ``‖√ρ √σ‖₁`` (not squared)."""
    rho, sigma = as_state(rho), as_state(sigma)
    return schatten_norm(rho.sqrt() @ sigma.sqrt(), 1)


def fidelity_optimal_unitary(rho, sigma):
    """Commutant unitary ``u`` maximizing ``|⟨ξ_σ|ξ_ρ u⟩| = |tr(√σ √ρ u)|``."""
    rho, sigma = as_state(rho), as_state(sigma)
    a, _, bh = np.linalg.svd(sigma.sqrt() @ rho.sqrt())
    return bh.conj().T @ a.conj().T


def cone_overlap(rho, sigma, u):
    """``|⟨ξ_σ| ξ_ρ u⟩|`` for a commutant element ``u``."""
    rho, sigma = as_state(rho), as_state(sigma)
    return float(abs(np.trace(sigma.sqrt() @ rho.sqrt() @ u)))


@dataclass(frozen=True)
class LpParams:
    """Parameters of an Araki–Masuda norm.

    Attributes
    ----------
    p : float
        Exponent in ``[1, 2]``.
    reference_state : State
        Density of the reference vector ``ψ``.
    commutant_flag : bool
        Norm relative to the commutant (the default) or to the algebra itself.
    """

    p: float
    reference_state: State
    commutant_flag: bool = True

    def __post_init__(self):
        if not 1.0 <= self.p <= 2.0:
            raise ValueError(f"p must lie in [1, 2], got {self.p}")
        object.__setattr__(self, "reference_state", as_state(self.reference_state))


def _lp_operand(zeta, params):
    z = zeta.matrix if isinstance(zeta, HSVector) else np.asarray(zeta)
    w = params.reference_state.power(1.0 / params.p - 0.5)
    return w @ z if params.commutant_flag else z @ w


def lp_norm(zeta, params):
    """Araki–Masuda norm ``(tr|ρ^{1/p − 1/2} ζ|^p)^{1/p}`` of a vector.

    At ``p = 2`` this is the norm of ``π(ψ) ζ``; at ``p = 1`` it is the
    fidelity between the functionals induced by ``ψ`` and ``ζ``.
    """
    return schatten_norm(_lp_operand(zeta, params), params.p)


@dataclass
class VariationalResult:
    value: float
    converged: bool
    starts: int
    converged_starts: int

    def __float__(self):
        return float(self.value)


def _frechet_power(lam, r):
    # divided differences of x -> x^{-r}
    fl = lam ** (-r)
    dl = lam[:, None] - lam[None, :]
    num = fl[:, None] - fl[None, :]
    close = np.abs(dl) <= 1e-10 * max(lam.max(), 1e-300)
    mid = 0.5 * (lam[:, None] + lam[None, :])
    deriv = -r * mid ** (-r - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = np.where(close, deriv, num / np.where(close, 1.0, dl))
    return fl, gamma


def lp_norm_variational(zeta, params, starts=32, maxiter=2000, seed=0):
    """Numerical infimum ``inf_χ ‖Δ'^{1/2 − 1/p}_{χ,ψ} ζ‖`` over unit vectors ``χ``.

    Independent of :func:`lp_norm`: ``χ`` is optimized directly with a
    quasi-Newton method and an exact gradient, restarted from random points.

    Returns
    -------
    VariationalResult
        Best value found and convergence flags; budget exhaustion is flagged,
        not raised.
    """
    z = zeta.matrix if isinstance(zeta, HSVector) else np.asarray(zeta)
    n = z.shape[0]
    if n > 9:
        raise ValueError("variational oracle is limited to dimension <= 9")
    r = 1.0 / params.p - 0.5
    ref = params.reference_state
    if params.commutant_flag:
        y = ref.power(r) @ z
    else:
        # the algebra version is the commutant version of the adjoint vector
        y = ref.power(r) @ z.conj().T
    m = y.conj().T @ y
    if r == 0.0:
        value = float(np.sqrt(max(np.trace(m).real, 0.0)))
        return VariationalResult(value, True, 1, 1)

    size = n * n

    def objective(x):
        chi = (x[:size] + 1j * x[size:]).reshape(n, n)
        nrm = np.vdot(chi, chi).real
        tau = chi.conj().T @ chi / nrm
        lam, v = np.linalg.eigh(0.5 * (tau + tau.conj().T))
        if lam[0] <= 1e-14:
            return 1e30, np.zeros_like(x)
        fl, gamma = _frechet_power(lam, r)
        t_op = (v * fl) @ v.conj().T
        f = np.trace(t_op @ m @ t_op).real
        h = m @ t_op + t_op @ m
        g = v @ (gamma * (v.conj().T @ h @ v)) @ v.conj().T
        c = np.trace(g @ tau).real
        k = chi @ g - c * chi
        grad = (2.0 / nrm) * np.concatenate([k.real.ravel(), k.imag.ravel()])
        return f, grad

    rng = np.random.default_rng(seed)
    best, n_conv = np.inf, 0
    for _ in range(starts):
        x0 = rng.standard_normal(2 * size)
        res = minimize(objective, x0, jac=True, method="BFGS",
                       options={"maxiter": maxiter, "gtol": 1e-11})
        ok = bool(res.success) or res.status == 2
        n_conv += ok
        if res.fun < best:
            best = float(res.fun)
    return VariationalResult(float(np.sqrt(best)), n_conv > 0, starts, n_conv)


def petz_renyi(rho, sigma, alpha):
    """Petz–Rényi divergence ``(1/(α−1)) ln tr ρ^α σ^{1−α}`` for ``0 < α < 1``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    rho, sigma = as_state(rho), as_state(sigma)
    q = np.trace(rho.power(alpha) @ sigma.power(1.0 - alpha)).real
    if q <= 0.0:
        return Divergent("orthogonal supports")
    return float(np.log(q) / (alpha - 1.0))


def sandwiched_renyi(rho, sigma, alpha):
    """Sandwiched Rényi divergence for ``1/2 <= α < 1`` through the ``L_{2α}`` norm.

    ``(1/(α−1)) ln ‖ξ_ρ‖_{2α,σ}^{2α}`` with ``ξ_ρ`` the cone representative.
    """
    if not 0.5 <= alpha < 1.0:
        raise ValueError("alpha must lie in [1/2, 1)")
    rho, sigma = as_state(rho), as_state(sigma)
    norm = lp_norm(cone_rep(rho), LpParams(2.0 * alpha, sigma))
    if norm <= 0.0:
        return Divergent("orthogonal supports")
    return float(2.0 * alpha * np.log(norm) / (alpha - 1.0))


def modular_expectation(zeta, psi_density, z):
    """``⟨ζ|Δ^z_{ψ,ζ}|ζ⟩`` with ``Δ_{ψ,ζ} = l(ρ_ψ) r((ζ*ζ)^{-1})``."""
    zeta = zeta if isinstance(zeta, HSVector) else HSVector(zeta)
    dm = RelativeModular(psi_density, zeta.commutant_state())
    return zeta.inner(dm.power(z, zeta))


class AltChain(NamedTuple):
    lower: float
    mid: float
    upper: float

    def slack(self):
        """Smallest margin among ``0 ≤ lower ≤ mid ≤ upper``."""
        return min(self.lower, self.mid - self.lower, self.upper - self.mid)


def alt_chain(zeta, psi_density, p):
    """Terms of ``1 − ⟨ζ|Δ^{2/p−1}|ζ⟩ ≤ 1 − ‖ζ‖_p² ≤ 1 − ⟨ζ|Δ^{1−p/2}|ζ⟩^{2/p}``.

    Parameters
    ----------
    zeta : HSVector
        Normalized vector.
    psi_density : State
        Density of the reference vector on the algebra.
    p : float
        Exponent in ``[1, 2]``.
    """
    lower = 1.0 - modular_expectation(zeta, psi_density, 2.0 / p - 1.0).real
    mid = 1.0 - lp_norm(zeta, LpParams(p, psi_density)) ** 2
    upper = 1.0 - max(modular_expectation(zeta, psi_density, 1.0 - p / 2.0).real, 0.0) ** (2.0 / p)
    return AltChain(float(lower), float(mid), float(upper))


def harnack_ratios(zeta, psi, z_grid):
    """Empirical ratios ``Re(1 − ⟨ζ|Δ^z_{ψ,ζ}|ζ⟩) / ‖ζ − ψ‖²`` over ``z_grid``.

    ``psi`` is a normalized vector; its density on the algebra is ``ψ ψ*``.
    """
    zeta = zeta if isinstance(zeta, HSVector) else HSVector(zeta)
    psi = psi if isinstance(psi, HSVector) else HSVector(psi)
    dist2 = (zeta - psi).norm() ** 2
    dens = Spectrum(psi.state())
    h = np.array([1.0 - modular_expectation(zeta, dens, z).real for z in z_grid])
    return h / dist2 if dist2 > 0 else np.full(len(z_grid), np.nan)


class FvdG(NamedTuple):
    lhs: float
    mid: float
    rhs: float


def fuchs_vdg_check(rho, sigma, tol=1e-10):
    """Return ``(1 − F, ‖ρ − σ‖₁/2, √(1 − F²))`` and check the ordering.

    Raises
    ------
    InequalityViolation
        If ``lhs ≤ mid ≤ rhs`` fails by more than ``tol``.
    """
    f = min(fidelity(rho, sigma), 1.0)
    out = FvdG(1.0 - f, 0.5 * trace_distance(as_state(rho), as_state(sigma)),
               float(np.sqrt(max(1.0 - f * f, 0.0))))
    if out.lhs > out.mid + tol or out.mid > out.rhs + tol:
        raise InequalityViolation(f"Fuchs-van de Graaf ordering fails: {out}")
    return out
