# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled time-stepping kernels.

Same contracts as ``_reference``: a window is a uniform sequence of
exponential units exp(-i dt (H + p X + q Y)) applied left to right, each
evaluated exactly via zheev.  LAPACK is column-major, so the row-major
Hermitian buffer it receives is the conjugate of the intended matrix; the
eigenvector rows it returns are conjugated on extraction to compensate.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin
from scipy.linalg.cython_lapack cimport zheev

cnp.import_array()

DEF NMAX = 16

ctypedef double complex zdouble


cdef inline void _matmul(int n, zdouble *a, zdouble *b, zdouble *out) noexcept:
    # out = a @ b, row-major
    cdef int i, j, k
    cdef zdouble acc
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(n):
                acc = acc + a[i * n + k] * b[k * n + j]
            out[i * n + j] = acc


cdef inline void _matmul_adj_left(int n, zdouble *a, zdouble *b, zdouble *out) noexcept:
    # out = a† @ b
    cdef int i, j, k
    cdef zdouble acc
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(n):
                acc = acc + a[k * n + i].conjugate() * b[k * n + j]
            out[i * n + j] = acc


cdef int _eigh(int n, zdouble *h, zdouble *vecs, double *vals,
               zdouble *work, int lwork, double *rwork, zdouble *buf) noexcept:
    """Eigendecomposition of a Hermitian row-major matrix.

    Fills vecs (row-major, columns are eigenvectors) and ascending vals.
    Returns the LAPACK info code.
    """
    cdef int info = 0, i, j
    cdef char jobz = b'V', uplo = b'L'
    for i in range(n * n):
        buf[i] = h[i]
    zheev(&jobz, &uplo, &n, buf, &n, vals, work, &lwork, rwork, &info)
    # buf now holds eigenvectors of h^T = conj(h) column-major; conjugate
    # its row-major rows to get the eigenvectors of h.
    for i in range(n):
        for j in range(n):
            vecs[i * n + j] = buf[j * n + i].conjugate()
    return info


cdef inline void _step_unitary(int n, zdouble *vecs, double *vals, double dt,
                               zdouble *out) noexcept:
    # out = V diag(exp(-i vals dt)) V†
    cdef int i, j, k
    cdef zdouble acc, ph
    cdef zdouble phases[NMAX]
    for k in range(n):
        phases[k] = cos(vals[k] * dt) - 1j * sin(vals[k] * dt)
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(n):
                acc = acc + vecs[i * n + k] * phases[k] * vecs[j * n + k].conjugate()
            out[i * n + j] = acc


cdef inline void _build_h(int n, zdouble *h0, zdouble *x, zdouble *y,
                          double p, double q, zdouble *out) noexcept:
    cdef int i
    for i in range(n * n):
        out[i] = h0[i] + p * x[i] + q * y[i]


cdef double _defect(int n, zdouble *u) noexcept:
    # largest |(U†U - I)_ij|
    cdef int i, j, k
    cdef zdouble acc
    cdef double worst = 0.0
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(n):
                acc = acc + u[k * n + i].conjugate() * u[k * n + j]
            if i == j:
                acc = acc - 1
            if abs(acc) > worst:
                worst = abs(acc)
    return worst


def evolve(h_static, x_op, y_op, p, q, double dt, int store_stride=0):
    """See ``_reference.evolve``."""
    cdef cnp.ndarray[zdouble, ndim=2, mode="c"] h0_arr = np.ascontiguousarray(h_static, dtype=complex)
    cdef cnp.ndarray[zdouble, ndim=2, mode="c"] x_arr = np.ascontiguousarray(x_op, dtype=complex)
    cdef cnp.ndarray[zdouble, ndim=2, mode="c"] y_arr = np.ascontiguousarray(y_op, dtype=complex)
    cdef cnp.ndarray[double, ndim=1, mode="c"] p_arr = np.ascontiguousarray(p, dtype=float)
    cdef cnp.ndarray[double, ndim=1, mode="c"] q_arr = np.ascontiguousarray(q, dtype=float)
    cdef int n = h0_arr.shape[0]
    cdef Py_ssize_t m = p_arr.shape[0]
    if n > NMAX:
        raise ValueError(f"kernel supports dimensions up to {NMAX}, got {n}")

    cdef cnp.ndarray[zdouble, ndim=2, mode="c"] u_arr = np.eye(n, dtype=complex)
    cdef cnp.ndarray[zdouble, ndim=3, mode="c"] cp_arr
    cdef Py_ssize_t n_stored = 0
    if store_stride > 0:
        cp_arr = np.empty((m // store_stride + 1, n, n), dtype=complex)
        cp_arr[0] = u_arr
        n_stored = 1
    else:
        cp_arr = np.empty((0, n, n), dtype=complex)

    cdef zdouble h_buf[NMAX * NMAX]
    cdef zdouble vecs[NMAX * NMAX]
    cdef zdouble g_buf[NMAX * NMAX]
    cdef zdouble tmp[NMAX * NMAX]
    cdef zdouble scratch[NMAX * NMAX]
    cdef double vals[NMAX]
    cdef double rwork[3 * NMAX]
    cdef int lwork = 2 * NMAX * NMAX
    cdef zdouble work[2 * NMAX * NMAX]

    cdef zdouble *u = &u_arr[0, 0]
    cdef zdouble *h0p = &h0_arr[0, 0]
    cdef zdouble *xp = &x_arr[0, 0]
    cdef zdouble *yp = &y_arr[0, 0]
    cdef Py_ssize_t s
    cdef int i, info

    for s in range(m):
        _build_h(n, h0p, xp, yp, p_arr[s], q_arr[s], h_buf)
        info = _eigh(n, h_buf, vecs, vals, work, lwork, rwork, scratch)
        if info != 0:
            raise RuntimeError(f"zheev failed with info={info} at unit {s}")
        _step_unitary(n, vecs, vals, dt, g_buf)
        _matmul(n, g_buf, u, tmp)
        for i in range(n * n):
            u[i] = tmp[i]
        if store_stride > 0 and (s + 1) % store_stride == 0:
            cp_arr[n_stored] = u_arr
            n_stored += 1

    cdef double defect = _defect(n, u)
    if store_stride > 0:
        return u_arr, cp_arr[:n_stored], defect
    return u_arr, None, defect


def gate_grad(h_static, x_op, y_op, p, q, double dt, int phys_stride,
              target, int d_ess, double guard_weight):
    """See ``_reference.gate_grad``."""
    cdef cnp.ndarray[zdouble, ndim=2, mode="c"] h0_arr = np.ascontiguousarray(h_static, dtype=complex)
    cdef cnp.ndarray[zdouble, ndim=2, mode="c"] x_arr = np.ascontiguousarray(x_op, dtype=complex)
    cdef cnp.ndarray[zdouble, ndim=2, mode="c"] y_arr = np.ascontiguousarray(y_op, dtype=complex)
    cdef cnp.ndarray[zdouble, ndim=2, mode="c"] t_arr = np.ascontiguousarray(target, dtype=complex)
    cdef cnp.ndarray[double, ndim=1, mode="c"] p_arr = np.ascontiguousarray(p, dtype=float)
    cdef cnp.ndarray[double, ndim=1, mode="c"] q_arr = np.ascontiguousarray(q, dtype=float)
    cdef int n = h0_arr.shape[0]
    cdef Py_ssize_t m = p_arr.shape[0]
    if n > NMAX:
        raise ValueError(f"kernel supports dimensions up to {NMAX}, got {n}")
    if phys_stride < 1 or m % phys_stride != 0:
        raise ValueError("window length must be a multiple of phys_stride")
    cdef Py_ssize_t n_phys = m // phys_stride
    cdef double w_mid = 1.0 / n_phys
    cdef bint has_guard = n > d_ess

    cdef cnp.ndarray[zdouble, ndim=3, mode="c"] vec_store = np.empty((m, n, n), dtype=complex)
    cdef cnp.ndarray[double, ndim=2, mode="c"] val_store = np.empty((m, n), dtype=float)
    cdef cnp.ndarray[double, ndim=1, mode="c"] gp = np.zeros(m)
    cdef cnp.ndarray[double, ndim=1, mode="c"] gq = np.zeros(m)
    cdef cnp.ndarray[zdouble, ndim=2, mode="c"] u_arr = np.eye(n, dtype=complex)

    cdef zdouble h_buf[NMAX * NMAX]
    cdef zdouble g_buf[NMAX * NMAX]
    cdef zdouble tmp[NMAX * NMAX]
    cdef zdouble tmp2[NMAX * NMAX]
    cdef zdouble scratch[NMAX * NMAX]
    cdef zdouble lam[NMAX * NMAX]
    cdef zdouble f_cur[NMAX * NMAX]
    cdef zdouble xv[NMAX * NMAX]
    cdef zdouble yv[NMAX * NMAX]
    cdef zdouble core[NMAX * NMAX]
    cdef double vals[NMAX]
    cdef double rwork[3 * NMAX]
    cdef int lwork = 2 * NMAX * NMAX
    cdef zdouble work[2 * NMAX * NMAX]

    cdef zdouble *u = &u_arr[0, 0]
    cdef zdouble *h0p = &h0_arr[0, 0]
    cdef zdouble *xp = &x_arr[0, 0]
    cdef zdouble *yp = &y_arr[0, 0]
    cdef zdouble *tp = &t_arr[0, 0]
    cdef Py_ssize_t s, b
    cdef int i, j, k, info
    cdef double guard_pen = 0.0, wgt

    # ---- forward pass -----------------------------------------------------
    for s in range(m):
        _build_h(n, h0p, xp, yp, p_arr[s], q_arr[s], h_buf)
        info = _eigh(n, h_buf, &vec_store[s, 0, 0], &val_store[s, 0], work, lwork, rwork, scratch)
        if info != 0:
            raise RuntimeError(f"zheev failed with info={info} at unit {s}")
        _step_unitary(n, &vec_store[s, 0, 0], &val_store[s, 0], dt, g_buf)
        _matmul(n, g_buf, u, tmp)
        for i in range(n * n):
            u[i] = tmp[i]
        if has_guard and (s + 1) % phys_stride == 0:
            b = (s + 1) // phys_stride
            wgt = w_mid * (0.5 if b == n_phys else 1.0)
            for i in range(d_ess, n):
                for k in range(d_ess):
                    guard_pen += wgt * abs(u[i * n + k]) ** 2 / d_ess
    # boundary b=0 contributes nothing: U(0) = I has empty guard block

    cdef double defect = _defect(n, u)

    # overlap = Tr_ess(T† U) / d
    cdef zdouble overlap = 0
    for j in range(n):
        for k in range(d_ess):
            overlap = overlap + tp[j * n + k].conjugate() * u[j * n + k]
    overlap = overlap / d_ess
    cdef double infidelity = 1.0 - (overlap.real ** 2 + overlap.imag ** 2)

    # ---- adjoint (reverse) pass -------------------------------------------
    # lam holds transpose(dJ/dU) accumulated back to the current boundary
    cdef zdouble e_coef
    for i in range(n * n):
        lam[i] = 0
        f_cur[i] = u[i]
    e_coef = -overlap.conjugate() / d_ess
    for j in range(n):
        for k in range(d_ess):
            lam[k * n + j] = e_coef * tp[j * n + k].conjugate()
    if has_guard:
        wgt = guard_weight * w_mid * 0.5 / d_ess
        for j in range(d_ess, n):
            for k in range(d_ess):
                lam[k * n + j] = lam[k * n + j] + wgt * f_cur[j * n + k].conjugate()

    cdef double h_half
    cdef double diff, mean, sinc_v
    cdef zdouble phi_ab, s_ab
    cdef double gp_s, gq_s
    cdef zdouble *vv
    cdef double *ww

    for s in range(m, 0, -1):
        vv = &vec_store[s - 1, 0, 0]
        ww = &val_store[s - 1, 0]
        _step_unitary(n, vv, ww, dt, g_buf)
        # f_prev = G† f_cur
        _matmul_adj_left(n, g_buf, f_cur, tmp)
        for i in range(n * n):
            f_cur[i] = tmp[i]
        # xv = V† X V, yv = V† Y V
        _matmul_adj_left(n, vv, xp, tmp)
        _matmul(n, tmp, vv, xv)
        _matmul_adj_left(n, vv, yp, tmp)
        _matmul(n, tmp, vv, yv)
        # core = (V† F_prev Λ V)^T ∘ Φ
        _matmul(n, f_cur, lam, tmp)
        _matmul_adj_left(n, vv, tmp, tmp2)
        _matmul(n, tmp2, vv, core)
        gp_s = 0.0
        gq_s = 0.0
        for i in range(n):
            for j in range(n):
                diff = 0.5 * dt * (ww[i] - ww[j])
                mean = 0.5 * dt * (ww[i] + ww[j])
                if fabs(diff) < 1e-8:
                    sinc_v = 1.0 - diff * diff / 6.0
                else:
                    sinc_v = sin(diff) / diff
                phi_ab = -1j * dt * (cos(mean) - 1j * sin(mean)) * sinc_v
                s_ab = core[j * n + i] * phi_ab
                gp_s += 2.0 * (s_ab * xv[i * n + j]).real
                gq_s += 2.0 * (s_ab * yv[i * n + j]).real
        gp[s - 1] = gp_s
        gq[s - 1] = gq_s
        # Λ <- Λ G_s, then inject the boundary cost at s-1 if applicable
        _matmul(n, lam, g_buf, tmp)
        for i in range(n * n):
            lam[i] = tmp[i]
        if has_guard and (s - 1) % phys_stride == 0 and s - 1 > 0:
            b = (s - 1) // phys_stride
            wgt = guard_weight * w_mid * (0.5 if b == n_phys else 1.0) / d_ess
            for j in range(d_ess, n):
                for k in range(d_ess):
                    lam[k * n + j] = lam[k * n + j] + wgt * f_cur[j * n + k].conjugate()

    return infidelity, guard_pen, gp, gq, u_arr, defect
