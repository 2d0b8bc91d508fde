"""Finite type-I inclusions, density matrices and support-aware spectral calculus.

A subalgebra ``B = ⊕_i M_{m_i}`` sits inside ``A = M_n`` through
``b ↦ ⊕_i b_i ⊗ 1_{k_i}`` with ``n = Σ m_i k_i``.  Matrices on ``B`` are
stored on the carrier space of dimension ``Σ m_i`` as block-diagonal arrays.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import block_diag

ABS_TOL = 1e-12
REL_TOL = 1e-12
CLUSTER_GAP = 1e-10


class DimensionError(ValueError):
    """Raised when a matrix does not conform to the expected shape or blocks."""


class SupportError(ValueError):
    """Raised when an operation needs a faithful state and gets a singular one."""


def _cluster_means(values, scale):
    # replace nearly degenerate eigenvalues by the mean of their cluster so that
    # functions of the matrix only see spectral projectors
    if values.size < 2:
        return values
    out = values.copy()
    gap = CLUSTER_GAP * scale
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size or values[i] - values[i - 1] > gap:
            if i - start > 1:
                out[start:i] = values[start:i].mean()
            start = i
    return out


class Spectrum:
    """Eigendecomposition of a Hermitian PSD matrix restricted to its support.

    Parameters
    ----------
    matrix : ndarray
        Hermitian positive semi-definite matrix.
    abs_tol, rel_tol : float
        An eigenvalue ``λ`` belongs to the support iff
        ``λ > max(abs_tol, rel_tol * λ_max)``.

    Notes
    -----
    Every function of the matrix is evaluated on the support only, so that
    ``power(z)`` with ``Re z < 0`` is the generalized inverse power and
    ``power(0)`` is the support projector.
    """

    def __init__(self, matrix, abs_tol=ABS_TOL, rel_tol=REL_TOL):
        m = np.asarray(matrix)
        h = 0.5 * (m + m.conj().T)
        w, v = np.linalg.eigh(h)
        lam_max = max(float(w[-1]), 0.0)
        self.cutoff = max(abs_tol, rel_tol * lam_max)
        keep = w > self.cutoff
        self.all_values = w
        self.values = _cluster_means(w[keep], lam_max)
        self.vectors = v[:, keep]
        self.dim = m.shape[0]

    @property
    def rank(self):
        return int(self.values.size)

    @property
    def log_values(self):
        return np.log(self.values)

    def apply(self, values):
        """Return ``Σ values_j P_j`` for per-eigenvalue ``values`` on the support."""
        return (self.vectors * values) @ self.vectors.conj().T

    def power(self, z):
        if z == 0:
            return self.projector()
        if np.isrealobj(z) or np.imag(z) == 0:
            return self.apply(self.values ** np.real(z))
        return self.apply(np.exp(z * self.log_values))

    def log(self):
        return self.apply(self.log_values)

    def projector(self):
        return self.vectors @ self.vectors.conj().T


@dataclass(frozen=True)
class InclusionSpec:
    """Block structure of an inclusion ``B = ⊕ M_{m_i} → A = M_n``.

    Parameters
    ----------
    blocks : sequence of (m, k)
        Block size ``m`` and multiplicity ``k`` of each summand.

    Examples
    --------
    >>> spec = InclusionSpec([(2, 2)])
    >>> spec.n, spec.dim_B, spec.d_B
    (4, 4, 2)
    """

    blocks: tuple

    def __post_init__(self):
        blocks = tuple((int(m), int(k)) for m, k in self.blocks)
        if not blocks:
            raise DimensionError("an inclusion needs at least one block")
        for m, k in blocks:
            if m < 1 or k < 1:
                raise DimensionError(f"block sizes must be positive, got {(m, k)}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def parse(cls, text):
        """Build a spec from ``"MxK[,MxK...]"``."""
        parts = [p.strip() for p in str(text).split(",") if p.strip()]
        blocks = []
        for p in parts:
            match = re.fullmatch(r"(\d+)\s*[xX]\s*(\d+)", p)
            if match is None:
                raise DimensionError(f"cannot parse block {p!r}; expected MxK")
            blocks.append((int(match.group(1)), int(match.group(2))))
        return cls(tuple(blocks))

    def __str__(self):
        return ",".join(f"{m}x{k}" for m, k in self.blocks)

    @property
    def n(self):
        return sum(m * k for m, k in self.blocks)

    @property
    def dim_B(self):
        return sum(m * m for m, _ in self.blocks)

    @property
    def d_B(self):
        """Dimension of the carrier space of ``B``."""
        return sum(m for m, _ in self.blocks)

    @property
    def b_sizes(self):
        return tuple(m for m, _ in self.blocks)

    @cached_property
    def b_offsets(self):
        return np.concatenate([[0], np.cumsum(self.b_sizes)]).astype(int)

    @cached_property
    def index_maps(self):
        """Integer maps describing the embedding.

        Returns
        -------
        b_index : ndarray of int, shape (n,)
            Carrier index of ``B`` feeding each basis vector of ``A``.
        copy_label : ndarray of int, shape (n,)
            Label of the (block, copy) pair; ``ι(b)[p, q]`` vanishes unless the
            labels of ``p`` and ``q`` agree.
        """
        b_index, label = [], []
        off_b, lab = 0, 0
        for m, k in self.blocks:
            for alpha in range(m):
                for c in range(k):
                    b_index.append(off_b + alpha)
                    label.append(lab + c)
            off_b += m
            lab += k
        return np.array(b_index, dtype=np.intp), np.array(label, dtype=np.intp)

    @cached_property
    def _pairs(self):
        b_index, label = self.index_maps
        p, q = np.nonzero(label[:, None] == label[None, :])
        return p, q, b_index[p], b_index[q]

    @cached_property
    def block_mask(self):
        """Boolean mask of the block-diagonal pattern on the ``B`` carrier."""
        mask = np.zeros((self.d_B, self.d_B), dtype=bool)
        off = self.b_offsets
        for i in range(len(self.blocks)):
            mask[off[i]:off[i + 1], off[i]:off[i + 1]] = True
        return mask

    def pinch(self, x):
        """Zero the off-block entries of a carrier matrix."""
        return np.where(self.block_mask, x, 0)

    def check_b(self, b):
        b = np.asarray(b)
        if b.shape != (self.d_B, self.d_B):
            raise DimensionError(f"expected a {self.d_B}x{self.d_B} matrix on B, got {b.shape}")
        off = np.where(self.block_mask, 0, b)
        if np.any(off) and np.abs(off).max() > 1e-12 * max(np.abs(b).max(), 1.0):
            raise DimensionError("matrix is not block diagonal for this inclusion")
        return b

    def check_a(self, a):
        a = np.asarray(a)
        if a.shape != (self.n, self.n):
            raise DimensionError(f"expected a {self.n}x{self.n} matrix on A, got {a.shape}")
        return a


def embed(spec, b):
    """Embed an observable of ``B`` into ``A`` as ``⊕ b_i ⊗ 1_{k_i}``."""
    b = spec.check_b(b)
    p, q, bp, bq = spec._pairs
    out = np.zeros((spec.n, spec.n), dtype=np.result_type(b, float))
    out[p, q] = b[bp, bq]
    return out


def restrict(spec, rho):
    """Restrict a matrix on ``A`` to ``B`` (block-wise partial trace).

    Accepts a :class:`State` or a raw matrix; returns the same kind.
    """
    is_state = isinstance(rho, State)
    x = spec.check_a(rho.matrix if is_state else rho)
    p, q, bp, bq = spec._pairs
    out = np.zeros((spec.d_B, spec.d_B), dtype=np.result_type(x, float))
    np.add.at(out, (bp, bq), x[p, q])
    if is_state:
        return State(out, "B", abs_tol=rho.abs_tol, rel_tol=rho.rel_tol)
    return out


class State:
    """Density matrix with a cached support-restricted spectrum.

    Parameters
    ----------
    matrix : array_like
        Hermitian PSD matrix of unit trace.
    algebra_tag : {"A", "B"}
    abs_tol, rel_tol : float
        Support cutoff parameters.
    validate : bool
        Check hermiticity, positivity and normalization.
    """

    __slots__ = ("matrix", "algebra_tag", "abs_tol", "rel_tol", "spectrum")

    def __init__(self, matrix, algebra_tag="A", abs_tol=ABS_TOL, rel_tol=REL_TOL, validate=True):
        if algebra_tag not in ("A", "B"):
            raise ValueError("algebra_tag must be 'A' or 'B'")
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"a state needs a square matrix, got shape {m.shape}")
        if validate:
            scale = max(np.abs(m).max(), 1.0)
            herm = np.abs(m - m.conj().T).max()
            if herm > 1e-12 * scale:
                raise ValueError(f"matrix is not Hermitian (residual {herm:.2e})")
            tr = np.trace(m).real
            if abs(tr - 1.0) > 1e-12:
                raise ValueError(f"trace is {tr!r}, expected 1")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        self.matrix = m
        self.algebra_tag = algebra_tag
        self.abs_tol = abs_tol
        self.rel_tol = rel_tol
        self.spectrum = Spectrum(m, abs_tol, rel_tol)
        if validate and self.spectrum.all_values[0] < -1e-12:
            raise ValueError(f"matrix has negative eigenvalue {self.spectrum.all_values[0]:.2e}")

    def __repr__(self):
        return f"State(dim={self.dim}, rank={self.support_rank}, tag={self.algebra_tag!r})"

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def support_rank(self):
        return self.spectrum.rank

    @property
    def faithful(self):
        return self.spectrum.rank == self.dim

    def power(self, z):
        """``ρ^z`` on the support, zero on its complement."""
        return self.spectrum.power(z)

    def log(self):
        return self.spectrum.log()

    def sqrt(self):
        return self.spectrum.power(0.5)

    def expect(self, a):
        return np.trace(self.matrix @ a)


def as_state(x, tag="A"):
    return x if isinstance(x, State) else State(x, tag)


def support_projection(rho):
    """Orthogonal projector onto the support of ``rho``."""
    return as_state(rho).spectrum.projector()


def trace_distance(rho, sigma):
    """Trace norm ``‖ρ − σ‖₁`` of the difference of two density matrices.

    The value ranges over ``[0, 2]``.
    """
    a = rho.matrix if isinstance(rho, State) else np.asarray(rho)
    b = sigma.matrix if isinstance(sigma, State) else np.asarray(sigma)
    if isinstance(rho, State) and isinstance(sigma, State) and rho.algebra_tag != sigma.algebra_tag:
        raise ValueError("states live on different algebras")
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    d = a - b
    d = 0.5 * (d + d.conj().T)
    return float(np.abs(np.linalg.eigvalsh(d)).sum())


def random_state(dim, rank=None, seed=None, tag="A"):
    """Random density matrix ``G G* / tr(G G*)`` with ``G`` complex Ginibre of shape (dim, rank).

    Parameters
    ----------
    dim, rank : int
        ``1 <= rank <= dim``; ``rank=None`` means full rank.
    seed : int, SeedSequence or Generator
        Anything accepted by :func:`numpy.random.default_rng`.
    """
    rank = dim if rank is None else int(rank)
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}], got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return State(rho, tag)


def random_unitary(dim, seed=None):
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_block_state(spec, seed=None, full_rank=True):
    """Random block-diagonal state on the carrier of ``B``."""
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(len(spec.blocks)))
    out = np.zeros((spec.d_B, spec.d_B), dtype=complex)
    off = spec.b_offsets
    for i, (m, _) in enumerate(spec.blocks):
        blk = random_state(m, m if full_rank else max(1, m - 1), rng).matrix
        out[off[i]:off[i + 1], off[i]:off[i + 1]] = weights[i] * blk
    return State(out, "B")


def tensor_split_pair(spec, seed=None):
    """Pair ``(ρ, σ)`` that agree on the relative commutant of ``B``.

    Within block ``i`` both states have the form ``w_i x_i ⊗ ω_i`` with a
    common ``ω_i`` on the multiplicity space, so that restriction to ``B``
    loses no relative information.
    """
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(len(spec.blocks)))
    q = rng.dirichlet(np.ones(len(spec.blocks)))
    rho_blocks, sigma_blocks = [], []
    for i, (m, k) in enumerate(spec.blocks):
        omega = random_state(k, k, rng).matrix
        rho_blocks.append(p[i] * np.kron(random_state(m, m, rng).matrix, omega))
        sigma_blocks.append(q[i] * np.kron(random_state(m, m, rng).matrix, omega))
    return State(block_diag(*rho_blocks)), State(block_diag(*sigma_blocks))


def regularize(rho, eps):
    """Mix with the tracial state: ``(1 − ε) ρ + ε 1/n``."""
    m = rho.matrix if isinstance(rho, State) else np.asarray(rho)
    n = m.shape[0]
    tag = rho.algebra_tag if isinstance(rho, State) else "A"
    return State((1.0 - eps) * m + eps * np.eye(n) / n, tag)
