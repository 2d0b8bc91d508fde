"""Pure numpy implementation of the hot kernels."""
import numpy as np


def recovery_sweep(sqrt_rho, s, ut, y, lq, b_index, label, t, w):
    """Rotated Petz recoveries over a node set, in the eigenbasis of ``σ_A``.

    Parameters
    ----------
    sqrt_rho : (n, n) complex
        ``ρ^{1/2}`` in the ``σ_A`` eigenbasis.
    s : (n,) float
        Eigenvalues of ``σ_A``.
    ut : (n, n) complex
        ``U* ι(W)`` with ``U`` and ``W`` the eigenvectors of ``σ_A`` and ``σ_B``.
    y : (d_B, d_B) complex
        ``σ_B^{-1/2} ρ_B σ_B^{-1/2}`` in the ``σ_B`` eigenbasis.
    lq : (d_B,) float
        Log-eigenvalues of ``σ_B``.
    b_index, label : (n,) int
        Index maps of the inclusion.
    t, w : (N,) float
        Nodes and weights.

    Returns
    -------
    fid : (N,) float
        ``F(ρ, P_t(ρ_B))`` per node.
    rec : (n, n) complex
        ``Σ_k w_k P_{t_k}(ρ_B)`` in the ``σ_A`` eigenbasis.
    """
    t = np.asarray(t, dtype=float)
    dq = lq[:, None] - lq[None, :]
    yt = y[None] * np.exp(-1j * t[:, None, None] * dq[None])
    same = label[:, None] == label[None, :]
    emb = yt[:, b_index[:, None], b_index[None, :]] * same[None]
    m = ut[None] @ emb @ ut.conj().T[None]
    ls = np.log(s)
    left = np.sqrt(s)[None, :] * np.exp(1j * t[:, None] * ls[None, :])
    p = left[:, :, None] * m * left.conj()[:, None, :]
    rec = np.tensordot(w, p, axes=(0, 0))
    x = sqrt_rho[None] @ p @ sqrt_rho[None]
    x = 0.5 * (x + x.conj().transpose(0, 2, 1))
    ev = np.linalg.eigvalsh(x)
    fid = np.sqrt(np.clip(ev, 0.0, None)).sum(axis=1)
    return fid, rec
