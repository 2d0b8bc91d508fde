"""Petz recovery, rotated Petz maps and the universal recovery channel.

Conventions
-----------
The modular flow of a density ``σ`` is ``ς_t(a) = σ^{it} a σ^{-it}``.  The
rotated Petz map used throughout is

    α^t = ς^B_t ∘ α ∘ ς^A_{-t},

whose predual is ``ρ_B ↦ σ_A^{1/2+it} ι(σ_B^{-1/2-it} ρ_B σ_B^{-1/2+it}) σ_A^{1/2-it}``.
The universal recovery channel averages ``α^t`` against
``p(t) = π / (cosh(2πt) + 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .algebra import (
    DimensionError,
    InclusionSpec,
    State,
    Spectrum,
    SupportError,
    as_state,
    embed,
    restrict,
    trace_distance,
)
from .measures import entropy_difference, fidelity, is_divergent
from .standard_form import EmbeddingIsometry, HSVector, RelativeModular, modular_conjugation

LN_FLOOR = 1e-300
SCHEMES = ("tanh-legendre", "trapezoid")


class PreconditionError(ValueError):
    """An operation was called outside its admissible input range."""


def harmonic_density(t):
    """``p(t) = π / (cosh 2πt + 1)``, a probability density on the real line."""
    # π / (cosh 2x + 1) = (π/2) sech² x, written to avoid overflow
    e = np.exp(-2.0 * np.pi * np.abs(np.asarray(t, dtype=float)))
    return 2.0 * np.pi * e / (1.0 + e) ** 2


def harmonic_characteristic(omega):
    """``∫ e^{iωt} p(t) dt = (ω/2) / sinh(ω/2)``."""
    omega = np.asarray(omega, dtype=float)
    half = 0.5 * omega
    small = np.abs(half) < 1e-8
    safe = np.where(small, 1.0, half)
    with np.errstate(over="ignore"):
        val = safe / np.sinh(safe)
    return np.where(small, 1.0 - half**2 / 6.0, val)


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization of ``∫ g(t) p(t) dt``.

    Attributes
    ----------
    node_count : int
        Number of nodes, at least 8.
    t_clamp : float
        Largest ``|t|`` evaluated, at least 4.
    scheme : {"tanh-legendre", "trapezoid"}
        ``"tanh-legendre"`` substitutes ``u = tanh(πt)``, which turns the
        weight into the constant ``1/2`` on ``[-1, 1]``, and applies
        Gauss–Legendre in ``u``.  ``"trapezoid"`` uses equispaced nodes on
        ``[-t_clamp, t_clamp]`` with weights ``h p(t)``, renormalized to sum 1.
    """

    node_count: int = 48
    t_clamp: float = 6.0
    scheme: str = "tanh-legendre"

    def __post_init__(self):
        if int(self.node_count) < 8:
            raise ValueError(f"node_count must be >= 8, got {self.node_count}")
        if not self.t_clamp >= 4.0:
            raise ValueError(f"t_clamp must be >= 4, got {self.t_clamp}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        object.__setattr__(self, "node_count", int(self.node_count))

    @cached_property
    def _rule(self):
        if self.scheme == "tanh-legendre":
            u, w = np.polynomial.legendre.leggauss(self.node_count)
            t = np.arctanh(u) / np.pi
            clamped = bool(np.any(np.abs(t) > self.t_clamp))
            return np.clip(t, -self.t_clamp, self.t_clamp), 0.5 * w, clamped
        t = np.linspace(-self.t_clamp, self.t_clamp, self.node_count)
        w = harmonic_density(t)
        return t, w / w.sum(), False

    @property
    def nodes(self):
        return self._rule[0]

    @property
    def weights(self):
        return self._rule[1]

    @property
    def clamped(self):
        """True when a node had to be moved to ``±t_clamp``."""
        return self._rule[2]

    def integrate(self, values):
        """Weighted sum of samples taken at :attr:`nodes` (leading axis)."""
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))

    def coarse(self):
        """Rule with half the nodes, used for the self-convergence error estimate."""
        return QuadratureSpec(max(8, self.node_count // 2), self.t_clamp, self.scheme)

    def characteristic(self, omega):
        """Discrete analogue ``Σ_k w_k e^{iωt_k}`` of :func:`harmonic_characteristic`."""
        omega = np.asarray(omega, dtype=float)
        phase = np.exp(1j * np.multiply.outer(omega, self.nodes))
        return phase @ self.weights


class Channel:
    """Unital CP map ``α : A → B`` stored through its predual.

    Parameters
    ----------
    stack : ndarray, shape (d_B, d_B, n, n)
        ``stack[c, d]`` is the predual image of the matrix unit ``E_cd``;
        entries outside the block pattern of ``B`` are zero.
    block_mask : ndarray of bool, shape (d_B, d_B)
    metadata : dict
    """

    def __init__(self, stack, block_mask, metadata=None):
        self.stack = np.asarray(stack, dtype=complex)
        self.block_mask = np.asarray(block_mask, dtype=bool)
        self.metadata = dict(metadata or {})
        d, d2, n, n2 = self.stack.shape
        if d != d2 or n != n2 or self.block_mask.shape != (d, d):
            raise DimensionError("inconsistent channel shapes")

    @property
    def d_B(self):
        return self.stack.shape[0]

    @property
    def n(self):
        return self.stack.shape[2]

    @classmethod
    def from_predual(cls, fn, n, block_mask, metadata=None):
        """Build from a linear predual map ``fn`` on carrier matrices of ``B``."""
        d = block_mask.shape[0]
        stack = np.zeros((d, d, n, n), dtype=complex)
        for c, e in zip(*np.nonzero(block_mask)):
            unit = np.zeros((d, d), dtype=complex)
            unit[c, e] = 1.0
            stack[c, e] = fn(unit)
        return cls(stack, block_mask, metadata)

    @classmethod
    def from_action(cls, fn, n, block_mask, metadata=None):
        """Build from a Heisenberg action ``fn`` on matrices of ``A``.

        Uses ``P(E_cd)_{ji} = tr(P(E_cd) E_ij) = α(E_ij)_{dc}``.
        """
        d = block_mask.shape[0]
        stack = np.zeros((d, d, n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                unit = np.zeros((n, n), dtype=complex)
                unit[i, j] = 1.0
                stack[:, :, j, i] = np.asarray(fn(unit)).T
        stack[~block_mask] = 0.0
        return cls(stack, block_mask, metadata)

    def predual(self, x):
        """Schrödinger picture ``B_* → A_*``."""
        x = x.matrix if isinstance(x, State) else np.asarray(x)
        return np.einsum("cd,cdij->ij", np.where(self.block_mask, x, 0), self.stack)

    def action(self, a):
        """Heisenberg picture ``A → B``: ``α(a)_{cd} = tr(P(E_dc) a)``."""
        a = np.asarray(a)
        return np.einsum("dcij,ji->cd", self.stack, a)

    def choi(self):
        """``Σ_{cd} E_cd ⊗ P(E_cd)`` over the block pattern of ``B``."""
        d, n = self.d_B, self.n
        return self.stack.transpose(0, 2, 1, 3).reshape(d * n, d * n)

    def unital_residual(self):
        return float(np.abs(self.action(np.eye(self.n)) - np.eye(self.d_B)).max())

    def min_choi_eigenvalue(self):
        c = self.choi()
        return float(np.linalg.eigvalsh(0.5 * (c + c.conj().T)).min())

    def is_unital(self, tol=1e-10):
        return self.unital_residual() <= tol

    def is_cp(self, tol=1e-10):
        return self.min_choi_eigenvalue() >= -tol

    def __sub__(self, other):
        return Channel(self.stack - other.stack, self.block_mask, {"difference": True})

    def norm(self):
        """Operator norm of the Choi matrix."""
        return float(np.linalg.norm(self.choi(), 2))


def _block_eigh(spec, x):
    # eigendecomposition respecting the block structure of B
    d = spec.d_B
    q = np.zeros(d)
    w = np.zeros((d, d), dtype=complex)
    off = spec.b_offsets
    for i in range(len(spec.blocks)):
        sl = slice(off[i], off[i + 1])
        blk = x[sl, sl]
        vals, vecs = np.linalg.eigh(0.5 * (blk + blk.conj().T))
        q[sl] = vals
        w[sl, sl] = vecs
    return q, w


def _require_faithful(sigma, what):
    if not sigma.faithful:
        raise SupportError(
            f"{what} needs a faithful sigma (rank {sigma.support_rank} < {sigma.dim}); "
            "use compress() and nonfaithful_extend() for singular reference states"
        )


class PetzData:
    """Spectral data of ``σ`` shared by all rotated Petz evaluations.

    Parameters
    ----------
    spec : InclusionSpec
    sigma : State
        Faithful state on ``A``.
    """

    def __init__(self, spec, sigma):
        sigma = as_state(sigma)
        _require_faithful(sigma, "the Petz map")
        self.spec = spec
        self.sigma = sigma
        s, u = np.linalg.eigh(sigma.matrix)
        self.s, self.u = s, u
        self.sigma_b = restrict(spec, sigma)
        self.q, self.w = _block_eigh(spec, self.sigma_b.matrix)
        if self.q.min() <= 0 or s.min() <= 0:
            raise SupportError("sigma is numerically singular")
        self.ut = u.conj().T @ embed(spec, self.w)
        b_index, label = spec.index_maps
        self.b_index, self.label = b_index, label

    @cached_property
    def _coupling(self):
        # K[a, b, x, y] = Σ over same-label pairs (p, q) with b_index (x, y) of ut[a, p] conj(ut[b, q])
        spec = self.spec
        p, q, bp, bq = spec._pairs
        d = spec.d_B
        onehot = np.zeros((p.size, d * d))
        onehot[np.arange(p.size), bp * d + bq] = 1.0
        k = np.einsum("al,bl,lk->abk", self.ut[:, p], self.ut[:, q].conj(), onehot)
        return k.reshape(spec.n, spec.n, d, d)

    def frequencies(self):
        """``ω[a, b, x, y] = ln s_a − ln s_b − ln q_x + ln q_y``."""
        ls, lq = np.log(self.s), np.log(self.q)
        return (ls[:, None, None, None] - ls[None, :, None, None]
                - lq[None, None, :, None] + lq[None, None, None, :])

    def predual_stack(self, multiplier):
        """Predual images of all matrix units for a Fourier multiplier.

        Parameters
        ----------
        multiplier : callable
            Maps the frequency array to complex weights: ``e^{itω}`` gives the
            rotated map at ``t``, a quadrature characteristic or the exact
            ``(ω/2)/sinh(ω/2)`` gives an average over ``t``.
        """
        phi = multiplier(self.frequencies())
        scale = np.sqrt(self.s)[:, None] * np.sqrt(self.s)[None, :]
        qh = 1.0 / np.sqrt(self.q)
        core = phi * self._coupling * (qh[:, None] * qh[None, :])[None, None]
        # R[a, b, c, d] = Σ_xy core[a, b, x, y] conj(W[c, x]) W[d, y]
        r = np.einsum("abxy,cx,dy->cdab", core, self.w.conj(), self.w) * scale[None, None]
        stack = np.einsum("ia,cdab,jb->cdij", self.u, r, self.u.conj())
        stack[~self.spec.block_mask] = 0.0
        return stack

    def sweep_inputs(self, rho):
        """Inputs of :func:`mrlab.kernels.recovery_sweep` for a state ``ρ`` on ``A``."""
        rho = as_state(rho)
        rho_b = restrict(self.spec, rho.matrix)
        qh = 1.0 / np.sqrt(self.q)
        y = (self.w.conj().T @ rho_b @ self.w) * (qh[:, None] * qh[None, :])
        sqrt_rho = self.u.conj().T @ rho.sqrt() @ self.u
        return dict(
            sqrt_rho=np.ascontiguousarray(sqrt_rho),
            s=np.ascontiguousarray(self.s),
            ut=np.ascontiguousarray(self.ut),
            y=np.ascontiguousarray(y),
            lq=np.ascontiguousarray(np.log(self.q)),
            b_index=np.ascontiguousarray(self.b_index),
            label=np.ascontiguousarray(self.label),
        )

    def sweep(self, rho, t, w):
        """Fidelities ``F(ρ, P_t(ρ_B))`` at nodes ``t`` and ``Σ_k w_k P_{t_k}(ρ_B)``."""
        inp = self.sweep_inputs(rho)
        fid, rec = kernels.recovery_sweep(
            inp["sqrt_rho"], inp["s"], inp["ut"], inp["y"], inp["lq"],
            inp["b_index"], inp["label"],
            np.ascontiguousarray(t, dtype=float), np.ascontiguousarray(w, dtype=float),
        )
        return fid, self.u @ rec @ self.u.conj().T


def _petz_action_abstract(spec, sigma, t=0.0):
    # α^t(a) = ς^B_t( J_B V* J_A l(ς^A_{-t}(a)) J_A V J_B |1_B⟩ ), flows as modular unitaries
    v = EmbeddingIsometry(spec, sigma)
    flow_a = RelativeModular(sigma, sigma)
    flow_b = RelativeModular(v.sigma_b, v.sigma_b)
    one_b = HSVector(np.eye(spec.d_B, dtype=complex), "B")
    cone = modular_conjugation(v.apply(modular_conjugation(one_b)))

    def action(a):
        rotated = flow_a.power(-1j * t, HSVector(a)).matrix if t else np.asarray(a)
        vec = modular_conjugation(v.adjoint(modular_conjugation(cone.left(rotated))))
        out = flow_b.power(1j * t, vec) if t else vec
        return out.matrix

    return action


def petz_map(spec, sigma):
    """Petz recovery channel assembled from ``J_B V_σ* J_A (·) J_A V_σ J_B``."""
    sigma = as_state(sigma)
    _require_faithful(sigma, "the Petz map")
    return Channel.from_action(
        _petz_action_abstract(spec, sigma), spec.n, spec.block_mask,
        {"kind": "petz", "t": 0.0, "route": "abstract"},
    )


def petz_predual(spec, sigma, x, t=0.0):
    """Closed form ``σ_A^{1/2+it} ι(σ_B^{-1/2-it} x σ_B^{-1/2+it}) σ_A^{1/2-it}``."""
    sigma = as_state(sigma)
    _require_faithful(sigma, "the Petz map")
    sb = restrict(spec, sigma)
    x = x.matrix if isinstance(x, State) else np.asarray(x)
    inner = sb.power(-0.5 - 1j * t) @ x @ sb.power(-0.5 + 1j * t)
    return sigma.power(0.5 + 1j * t) @ embed(spec, spec.pinch(inner)) @ sigma.power(0.5 - 1j * t)


def rotated_petz(spec, sigma, t, route="closed"):
    """Rotated Petz channel ``α^t = ς^B_t ∘ α ∘ ς^A_{-t}``.

    Parameters
    ----------
    route : {"closed", "spectral", "abstract"}
        ``"closed"`` evaluates the predual closed form on matrix units,
        ``"spectral"`` uses the Fourier-multiplier tensor and ``"abstract"``
        composes modular flows with ``J`` and ``V_σ``.
    """
    sigma = as_state(sigma)
    _require_faithful(sigma, "the rotated Petz map")
    meta = {"kind": "rotated_petz", "t": float(t), "route": route}
    if route == "closed":
        return Channel.from_predual(lambda x: petz_predual(spec, sigma, x, t),
                                    spec.n, spec.block_mask, meta)
    if route == "spectral":
        data = PetzData(spec, sigma)
        return Channel(data.predual_stack(lambda om: np.exp(1j * t * om)), spec.block_mask, meta)
    if route == "abstract":
        return Channel.from_action(_petz_action_abstract(spec, sigma, t), spec.n,
                                   spec.block_mask, meta)
    raise ValueError(f"unknown route {route!r}")


def universal_recovery(spec, sigma, quad=None):
    """Universal recovery channel ``∫ α^t p(t) dt``.

    Parameters
    ----------
    quad : QuadratureSpec or None
        Discretization of the ``t`` integral.  ``None`` evaluates the integral
        exactly through the Fourier multiplier ``(ω/2)/sinh(ω/2)``.
    """
    sigma = as_state(sigma)
    _require_faithful(sigma, "the universal recovery channel")
    data = PetzData(spec, sigma)
    if quad is None:
        stack = data.predual_stack(harmonic_characteristic)
        meta = {"kind": "universal", "quadrature": "exact"}
    else:
        stack = data.predual_stack(quad.characteristic)
        meta = {"kind": "universal", "quadrature": quad}
    return Channel(stack, spec.block_mask, meta)


# -- support-compressed construction for singular reference states ---------------------


class CompressedInclusion:
    """Compression of ``ι`` to the supports of a possibly singular ``σ``.

    With isometries ``W_A`` onto the support of ``σ`` and ``W_B`` (block-wise)
    onto the support of ``σ_B``, the compressed map
    ``b ↦ W_A* ι(W_B b W_B*) W_A`` is unital and completely positive, and the
    compressed reference states are faithful.
    """

    def __init__(self, spec, sigma):
        sigma = as_state(sigma)
        self.spec = spec
        self.sigma = sigma
        self.sigma_b = restrict(spec, sigma)
        if sigma.faithful:
            self.w_a = np.eye(spec.n, dtype=complex)
        else:
            self.w_a = sigma.spectrum.vectors
        q, w = _block_eigh(spec, self.sigma_b.matrix)
        cut = self.sigma_b.spectrum.cutoff
        cols, sizes = [], []
        off = spec.b_offsets
        for i in range(len(spec.blocks)):
            idx = [j for j in range(off[i], off[i + 1]) if q[j] > cut]
            if len(idx) == off[i + 1] - off[i]:
                # keep the original basis on fully supported blocks
                idx_cols = np.eye(spec.d_B, dtype=complex)[:, off[i]:off[i + 1]]
                cols.append(idx_cols)
            elif idx:
                cols.append(w[:, idx])
            if idx:
                sizes.append(len(idx))
        self.w_b = np.concatenate(cols, axis=1)
        self.b_sizes = tuple(sizes)
        self.n = self.w_a.shape[1]
        self.d_B = self.w_b.shape[1]
        offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        mask = np.zeros((self.d_B, self.d_B), dtype=bool)
        for i in range(len(sizes)):
            mask[offs[i]:offs[i + 1], offs[i]:offs[i + 1]] = True
        self.block_mask = mask
        self.pi_b = self.w_b @ self.w_b.conj().T
        self.sigma_a_c = State(self.w_a.conj().T @ sigma.matrix @ self.w_a)
        self.sigma_b_c = State(self.w_b.conj().T @ self.sigma_b.matrix @ self.w_b, "B")

    def embed(self, b):
        return self.w_a.conj().T @ embed(self.spec, self.w_b @ np.asarray(b) @ self.w_b.conj().T) @ self.w_a

    def restrict(self, x):
        return self.w_b.conj().T @ restrict(self.spec, self.w_a @ np.asarray(x) @ self.w_a.conj().T) @ self.w_b

    def compress_a(self, x):
        return self.w_a.conj().T @ np.asarray(x) @ self.w_a


def compress(spec, sigma):
    return CompressedInclusion(spec, sigma)


def compressed_petz(comp, t=0.0):
    """Rotated Petz channel of the compressed inclusion (faithful compressed states)."""
    sa, sb = comp.sigma_a_c, comp.sigma_b_c

    def predual(x):
        inner = sb.power(-0.5 - 1j * t) @ x @ sb.power(-0.5 + 1j * t)
        return sa.power(0.5 + 1j * t) @ comp.embed(np.where(comp.block_mask, inner, 0)) @ sa.power(0.5 - 1j * t)

    return Channel.from_predual(predual, comp.n, comp.block_mask,
                                {"kind": "compressed_petz", "t": float(t)})


def nonfaithful_extend(spec, sigma, inner, comp=None):
    """Extend a channel of the compressed inclusion to ``A → B``.

    ``α(a) = W_B α_π(W_A* a W_A) W_B* + σ(a) (1 − π_B)``; in the predual this
    reads ``P(x) = W_A P_π(W_B* x W_B) W_A* + tr(x (1 − π_B)) σ``.
    """
    sigma = as_state(sigma)
    comp = comp if comp is not None else CompressedInclusion(spec, sigma)
    if inner.n != comp.n or inner.d_B != comp.d_B:
        raise DimensionError(
            f"inner channel has dims (A {inner.n}, B {inner.d_B}); supports need "
            f"(A {comp.n}, B {comp.d_B})"
        )
    comp_out = np.eye(spec.d_B) - comp.pi_b

    def predual(x):
        xc = comp.w_b.conj().T @ x @ comp.w_b
        body = comp.w_a @ inner.predual(xc) @ comp.w_a.conj().T
        return body + np.trace(x @ comp_out) * sigma.matrix

    meta = dict(inner.metadata)
    meta.update({"kind": "nonfaithful_extension", "inner": inner.metadata.get("kind")})
    return Channel.from_predual(predual, spec.n, spec.block_mask, meta)


def petz_map_any(spec, sigma, t=0.0):
    """Rotated Petz channel for any ``σ``, through the compressed construction if needed."""
    sigma = as_state(sigma)
    if sigma.faithful:
        return rotated_petz(spec, sigma, t) if t else petz_map(spec, sigma)
    comp = CompressedInclusion(spec, sigma)
    return nonfaithful_extend(spec, sigma, compressed_petz(comp, t), comp)


# -- verification reports ---------------------------------------------------------------


@dataclass
class SufficiencyReport:
    delta_s: float
    intertwining_residual: float
    recovery_distance: float
    t_grid: np.ndarray = field(repr=False)

    @property
    def passed(self):
        return self.intertwining_residual <= 1e-8 and self.recovery_distance <= 1e-7


def exact_sufficiency_check(spec, rho, sigma, t_grid=None):
    """Check exact recovery for a pair with vanishing entropy loss.

    Verifies ``V_ψ* Δ^{it}_{σ,ρ;A} |ψ_A⟩ = Δ^{it}_{σ,ρ;B} |ψ_B⟩`` on a ``t`` grid
    and ``‖ρ − P(ρ_B)‖₁`` for the Petz map.

    Raises
    ------
    PreconditionError
        If the entropy difference exceeds ``1e-8``.
    """
    rho, sigma = as_state(rho), as_state(sigma)
    ds = entropy_difference(spec, rho, sigma)
    if is_divergent(ds) or ds > 1e-8:
        raise PreconditionError(f"entropy difference {ds!r} exceeds 1e-8; pair is not sufficient")
    t_grid = np.linspace(-3.0, 3.0, 13) if t_grid is None else np.asarray(t_grid, float)
    rho_b = restrict(spec, rho)
    sigma_b = restrict(spec, sigma)
    v = EmbeddingIsometry(spec, rho, projected=True)
    dm_a = RelativeModular(sigma, rho)
    dm_b = RelativeModular(sigma_b, rho_b)
    psi_a = HSVector(rho.sqrt())
    psi_b = HSVector(rho_b.sqrt(), "B")
    resid = 0.0
    for t in t_grid:
        lhs = v.adjoint(dm_a.power(1j * t, psi_a)).matrix
        rhs = dm_b.power(1j * t, psi_b).matrix
        resid = max(resid, float(np.abs(lhs - rhs).max()))
    rec = petz_map_any(spec, sigma).predual(rho_b.matrix)
    dist = trace_distance(rho.matrix, rec)
    return SufficiencyReport(float(ds), resid, dist, t_grid)


@dataclass
class RecoveryReport:
    """Strengthened monotonicity and recovery checks for one ``(ρ, σ)`` instance."""

    delta_s: float
    log_fidelity_integral: float
    quadrature_error: float
    monotonicity_gap: float
    recovered_fidelity: float
    recovered_distance: float
    eps_bound: float
    recovery_fidelity_gap: float
    recovery_distance_gap: float
    clamped: bool
    min_fidelity: float
    recovered: np.ndarray = field(repr=False, default=None)
    fidelities: np.ndarray = field(repr=False, default=None)

    @property
    def monotonicity_ok(self):
        return self.monotonicity_gap >= -(1e-8 + self.quadrature_error)

    @property
    def recovery_ok(self):
        return self.recovery_distance_gap >= -1e-7 and self.recovery_fidelity_gap >= -1e-8


def recovery_report(spec, rho, sigma, quad=None, data=None):
    """Evaluate the strengthened monotonicity and recovery bounds for one instance.

    Returns
    -------
    RecoveryReport
        ``monotonicity_gap = ΔS + 2 Q[ln F(ρ, P_t(ρ_B))]`` with quadrature error
        ``2|Q_N − Q_{N/2}|``; the universal recovery ``ρ_rec`` with its
        distance, the bound ``2√(1 − e^{−ΔS})`` and ``ΔS + 2 ln F(ρ, ρ_rec)``.
    """
    quad = QuadratureSpec() if quad is None else quad
    rho, sigma = as_state(rho), as_state(sigma)
    data = PetzData(spec, sigma) if data is None else data
    ds = entropy_difference(spec, rho, sigma)
    fid, rec = data.sweep(rho, quad.nodes, quad.weights)
    coarse = quad.coarse()
    fid_c, _ = data.sweep(rho, coarse.nodes, coarse.weights)
    clamped = bool(fid.min() < LN_FLOOR or fid_c.min() < LN_FLOOR) or quad.clamped
    q_fine = float(quad.integrate(np.log(np.maximum(fid, LN_FLOOR))))
    q_coarse = float(coarse.integrate(np.log(np.maximum(fid_c, LN_FLOOR))))
    qerr = 2.0 * abs(q_fine - q_coarse)
    rec = 0.5 * (rec + rec.conj().T)
    f_rec = fidelity(rho, State(rec, validate=False))
    dist = trace_distance(rho.matrix, rec)
    eps = 2.0 * np.sqrt(max(1.0 - np.exp(-ds), 0.0))
    return RecoveryReport(
        delta_s=float(ds),
        log_fidelity_integral=q_fine,
        quadrature_error=qerr,
        monotonicity_gap=float(ds + 2.0 * q_fine),
        recovered_fidelity=f_rec,
        recovered_distance=dist,
        eps_bound=float(eps),
        recovery_fidelity_gap=float(ds + 2.0 * np.log(max(f_rec, LN_FLOOR))),
        recovery_distance_gap=float(eps - dist),
        clamped=clamped,
        min_fidelity=float(fid.min()),
        recovered=rec,
        fidelities=fid,
    )
