# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same contract as the numpy module ``_kernels_py``."""
import numpy as np
from libc.math cimport cos, sin, sqrt
from scipy.linalg.cython_blas cimport zgemm
from scipy.linalg.cython_lapack cimport zheev


cdef inline void _matmul(double complex* a, double complex* b, double complex* c,
                         int n) noexcept nogil:
    # row-major c = a @ b; column-major this is c^T = b^T a^T
    cdef double complex one = 1.0, zero = 0.0
    cdef char nn = b'N'
    zgemm(&nn, &nn, &n, &n, &n, &one, b, &n, a, &n, &zero, c, &n)


cdef inline void _matmul_adj_right(double complex* a, double complex* b, double complex* c,
                                   int n) noexcept nogil:
    # row-major c = a @ b^H; column-major this is c^T = conj(b) a^T = (b^T)^H a^T
    cdef double complex one = 1.0, zero = 0.0
    cdef char cc = b'C'
    cdef char nn = b'N'
    zgemm(&cc, &nn, &n, &n, &n, &one, b, &n, a, &n, &zero, c, &n)


def recovery_sweep(const double complex[:, ::1] sqrt_rho,
                   const double[::1] s,
                   const double complex[:, ::1] ut,
                   const double complex[:, ::1] y,
                   const double[::1] lq,
                   const Py_ssize_t[::1] b_index,
                   const Py_ssize_t[::1] label,
                   const double[::1] t,
                   const double[::1] w):
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t d = lq.shape[0]
    cdef Py_ssize_t nodes = t.shape[0]
    cdef Py_ssize_t k, a, b, p, q
    cdef int nn = <int>n, lwork = <int>(4 * n), info = 0
    cdef double tk, wk, acc, ev
    cdef double complex z

    fid_arr = np.zeros(nodes, dtype=np.float64)
    rec_arr = np.zeros((n, n), dtype=np.complex128)
    emb_arr = np.zeros((n, n), dtype=np.complex128)
    m1_arr = np.zeros((n, n), dtype=np.complex128)
    pt_arr = np.zeros((n, n), dtype=np.complex128)
    x_arr = np.zeros((n, n), dtype=np.complex128)
    ls_arr = np.log(np.asarray(s))
    sh_arr = np.sqrt(np.asarray(s))
    pha_arr = np.zeros(n, dtype=np.complex128)
    phb_arr = np.zeros(d, dtype=np.complex128)
    eig_arr = np.zeros(n, dtype=np.float64)
    work_arr = np.zeros(4 * n, dtype=np.complex128)
    rwork_arr = np.zeros(max(1, 3 * n - 2), dtype=np.float64)
    sr_arr = np.ascontiguousarray(sqrt_rho, dtype=np.complex128).copy()
    ut_arr = np.ascontiguousarray(ut, dtype=np.complex128).copy()

    cdef double[::1] fid = fid_arr
    cdef double complex[:, ::1] rec = rec_arr
    cdef double complex[:, ::1] emb = emb_arr
    cdef double complex[:, ::1] m1 = m1_arr
    cdef double complex[:, ::1] pt = pt_arr
    cdef double complex[:, ::1] x = x_arr
    cdef double complex[:, ::1] sr = sr_arr
    cdef double complex[:, ::1] u = ut_arr
    cdef double[::1] ls = ls_arr
    cdef double[::1] sh = sh_arr
    cdef double complex[::1] pha = pha_arr
    cdef double complex[::1] phb = phb_arr
    cdef double[::1] eig = eig_arr
    cdef double complex[::1] work = work_arr
    cdef double[::1] rwork = rwork_arr
    cdef char jobz = b'N'
    cdef char uplo = b'U'

    with nogil:
        for k in range(nodes):
            tk = t[k]
            wk = w[k]
            for a in range(n):
                pha[a] = sh[a] * (cos(tk * ls[a]) + 1j * sin(tk * ls[a]))
            for a in range(d):
                phb[a] = cos(tk * lq[a]) - 1j * sin(tk * lq[a])
            # ι(σ_B^{-it} Y σ_B^{it}) in the σ_B eigenbasis
            for p in range(n):
                for q in range(n):
                    if label[p] == label[q]:
                        emb[p, q] = phb[b_index[p]] * y[b_index[p], b_index[q]] * phb[b_index[q]].conjugate()
                    else:
                        emb[p, q] = 0
            _matmul(&u[0, 0], &emb[0, 0], &m1[0, 0], nn)
            _matmul_adj_right(&m1[0, 0], &u[0, 0], &pt[0, 0], nn)
            for a in range(n):
                for b in range(n):
                    z = pha[a] * pt[a, b] * pha[b].conjugate()
                    pt[a, b] = z
                    rec[a, b] = rec[a, b] + wk * z
            _matmul(&sr[0, 0], &pt[0, 0], &m1[0, 0], nn)
            _matmul(&m1[0, 0], &sr[0, 0], &x[0, 0], nn)
            # row-major storage is read as the transpose, which has the same spectrum
            zheev(&jobz, &uplo, &nn, &x[0, 0], &nn, &eig[0], &work[0], &lwork, &rwork[0], &info)
            acc = 0.0
            for a in range(n):
                ev = eig[a]
                if ev > 0.0:
                    acc = acc + sqrt(ev)
            fid[k] = acc if info == 0 else -1.0
    if np.any(fid_arr < 0):
        raise np.linalg.LinAlgError("eigenvalue solver did not converge")
    return fid_arr, rec_arr
