"""Hilbert–Schmidt standard form of a matrix algebra.

Vectors are matrices ``|m⟩`` with ``⟨m₁|m₂⟩ = tr(m₁* m₂)``; the algebra acts by
left multiplication, its commutant by right multiplication, and the modular
conjugation is the matrix adjoint.  Operators on the Hilbert space are never
materialized: they act through left and right matrix products.
"""
from __future__ import annotations

import numpy as np

from .algebra import State, Spectrum, SupportError, as_state, embed, restrict


class HSVector:
    """Vector ``|m⟩`` of the Hilbert–Schmidt space.

    Parameters
    ----------
    matrix : array_like
        Square matrix representing the vector.
    algebra_tag : {"A", "B"}
    """

    __slots__ = ("matrix", "algebra_tag")

    def __init__(self, matrix, algebra_tag="A"):
        self.matrix = np.asarray(matrix, dtype=complex)
        self.algebra_tag = algebra_tag

    def __repr__(self):
        return f"HSVector(shape={self.matrix.shape}, norm={self.norm():.6g})"

    def inner(self, other):
        """``⟨self|other⟩``, antilinear in the first slot."""
        return complex(np.vdot(self.matrix, _mat(other)))

    def norm(self):
        return float(np.linalg.norm(self.matrix))

    def normalized(self):
        return HSVector(self.matrix / self.norm(), self.algebra_tag)

    def __add__(self, other):
        return HSVector(self.matrix + _mat(other), self.algebra_tag)

    def __sub__(self, other):
        return HSVector(self.matrix - _mat(other), self.algebra_tag)

    def __mul__(self, c):
        return HSVector(c * self.matrix, self.algebra_tag)

    __rmul__ = __mul__

    def left(self, a):
        """``l(a)|m⟩ = |a m⟩``."""
        return HSVector(a @ self.matrix, self.algebra_tag)

    def right(self, a):
        """``r(a)|m⟩ = |m a⟩``, the commutant action."""
        return HSVector(self.matrix @ a, self.algebra_tag)

    def state(self):
        """Density matrix ``m m*`` of the functional induced on the algebra."""
        return self.matrix @ self.matrix.conj().T

    def commutant_state(self):
        """Density matrix ``m* m`` of the functional induced on the commutant."""
        return self.matrix.conj().T @ self.matrix


def _mat(v):
    return v.matrix if isinstance(v, HSVector) else np.asarray(v)


def _spectrum(x):
    if isinstance(x, State):
        return x.spectrum
    if isinstance(x, Spectrum):
        return x
    return Spectrum(np.asarray(x))


def modular_conjugation(v):
    """``J|m⟩ = |m*⟩``."""
    return HSVector(_mat(v).conj().T, getattr(v, "algebra_tag", "A"))


def cone_rep(rho):
    """Natural-cone representative ``|ρ^{1/2}⟩``."""
    rho = as_state(rho)
    return HSVector(rho.sqrt(), rho.algebra_tag)


def polar_cone(v, abs_tol=1e-12):
    """Split a vector as ``|v⟩ = r(w)|ξ⟩`` with ``ξ`` in the natural cone.

    Returns
    -------
    xi : HSVector
        ``(v v*)^{1/2}``, the cone vector inducing the same state on the algebra.
    w : ndarray
        Partial isometry with ``v = ξ w`` (a commutant element acting on the right).
    """
    m = _mat(v)
    x, s, yh = np.linalg.svd(m)
    keep = s > max(abs_tol, abs_tol * (s[0] if s.size else 0.0))
    x, s, yh = x[:, keep], s[keep], yh[keep]
    xi = (x * s) @ x.conj().T
    w = x @ yh
    return HSVector(xi, getattr(v, "algebra_tag", "A")), w


class RelativeModular:
    """Relative modular operator ``Δ_{φ,ψ} = l(σ_φ) r(σ_ψ^{-1})``.

    Parameters
    ----------
    left_state : State or ndarray
        Density multiplying from the left (the ``φ`` slot).
    right_state : State or ndarray
        Density whose inverse multiplies from the right (the ``ψ`` slot).
    commutant : bool
        If true, build the commutant operator ``Δ'_{φ,ψ} = r(σ_φ) l(σ_ψ^{-1})``.

    Notes
    -----
    Powers are taken on the support ``π(φ) π'(ψ)``; the complement maps to zero.
    """

    def __init__(self, left_state, right_state, commutant=False):
        self.left = _spectrum(left_state)
        self.right = _spectrum(right_state)
        self.commutant = commutant

    def power(self, z, v):
        """Apply ``Δ^z`` to ``v``."""
        m = _mat(v)
        if self.commutant:
            out = self.right.power(-z) @ m @ self.left.power(z)
        else:
            out = self.left.power(z) @ m @ self.right.power(-z)
        return HSVector(out, getattr(v, "algebra_tag", "A"))

    def log_eigenvalues(self):
        """Eigenvalues ``ln s_i − ln r_j`` of ``ln Δ`` in the bi-eigenbasis."""
        return self.left.log_values[:, None] - self.right.log_values[None, :]


def apply_modular_power(dm, z, v):
    """``Δ^z |v⟩`` for a :class:`RelativeModular` ``dm``."""
    return dm.power(z, v)


def connes_cocycle(psi, phi, t):
    """Cocycle ``ψ^{it} φ^{-it}`` evaluated on supports."""
    return _spectrum(psi).power(1j * t) @ _spectrum(phi).power(-1j * t)


class EmbeddingIsometry:
    """Isometry ``V_σ : K → H`` with ``V_σ |b σ_B^{1/2}⟩ = |ι(b) σ_A^{1/2}⟩``.

    Parameters
    ----------
    spec : InclusionSpec
    sigma : State
        Faithful state on ``A``.
    projected : bool
        Allow non-faithful ``σ`` by using generalized inverses; the result is
        then only a partial isometry.

    Raises
    ------
    SupportError
        If ``σ`` is not faithful and ``projected`` is false.
    """

    def __init__(self, spec, sigma, projected=False):
        sigma = as_state(sigma)
        if not projected and not sigma.faithful:
            raise SupportError(
                "embedding isometry needs a faithful state; "
                "use the support-compressed construction in mrlab.recovery"
            )
        self.spec = spec
        self.sigma = sigma
        self.sigma_b = restrict(spec, sigma)
        self._sa_half = sigma.power(0.5)
        self._sb_mhalf = self.sigma_b.power(-0.5)

    def apply(self, x):
        """``V|x⟩ = |ι(x σ_B^{-1/2}) σ_A^{1/2}⟩``."""
        return HSVector(embed(self.spec, _mat(x) @ self._sb_mhalf) @ self._sa_half)

    def adjoint(self, v):
        """``V*|m⟩ = |E(m σ_A^{1/2}) σ_B^{-1/2}⟩`` with ``E`` the restriction map."""
        return HSVector(restrict(self.spec, _mat(v) @ self._sa_half) @ self._sb_mhalf, "B")

    def k_basis(self):
        """Orthonormal matrix-unit basis of ``K`` (block-diagonal matrices)."""
        d = self.spec.d_B
        out = []
        for c, e in zip(*np.nonzero(self.spec.block_mask)):
            unit = np.zeros((d, d), dtype=complex)
            unit[c, e] = 1.0
            out.append(unit)
        return out

    def matrix(self):
        """Dense ``n² × dim_B`` matrix of ``V`` (row-major vectorization); test use only."""
        cols = [self.apply(e).matrix.ravel() for e in self.k_basis()]
        return np.stack(cols, axis=1)
