"""Pure-numpy time-stepping kernels.

A propagation window is a uniform sequence of M "exponential units": the
product of exp(-i * dt * (H_static + p[s] X + q[s] Y)) for s = 0..M-1, each
evaluated exactly through an eigendecomposition of the (Hermitian) step
Hamiltonian.  Higher-order integrators are expressed by the caller as a
choice of effective (p, q) arrays and unit duration, so the kernels never
need to know which scheme is in use.

The compiled Cython kernel in ``_core`` implements the same two entry
points; this module is the import-time fallback and the agreement oracle
for the kernel tests.
"""

from __future__ import annotations

import numpy as np

# steps per eigh batch; bounds temporary memory at ~few MB
_CHUNK = 8192


def _step_unitaries(h_static, x_op, y_op, p, q, dt):
    """Eigendecompose a chunk of step Hamiltonians.

    Returns (unitaries, eigvecs, eigvals) with shapes (m,N,N), (m,N,N), (m,N).
    """
    h = (
        h_static[None, :, :]
        + p[:, None, None] * x_op[None, :, :]
        + q[:, None, None] * y_op[None, :, :]
    )
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * dt * w)
    steps = np.einsum("mij,mj,mkj->mik", v, phases, v.conj())
    return steps, v, w


def _unitarity_defect(u):
    n = u.shape[0]
    return float(np.max(np.abs(u.conj().T @ u - np.eye(n))))


def evolve(h_static, x_op, y_op, p, q, dt, store_stride=0):
    """Sequential product of step exponentials.

    Parameters
    ----------
    h_static, x_op, y_op : (N, N) complex arrays
    p, q : (M,) float arrays of drive coefficients per exponential unit
    dt : float
        Duration of one exponential unit (ns).
    store_stride : int
        If > 0, record the running unitary after every ``store_stride``
        units (the initial identity is always included).

    Returns
    -------
    (u_final, checkpoints, defect)
        ``checkpoints`` is a (K, N, N) array or None; ``defect`` is the
        max-abs entry of U†U - I at the final unitary.
    """
    m = len(p)
    n = h_static.shape[0]
    u = np.eye(n, dtype=complex)
    stored = [u.copy()] if store_stride > 0 else None
    for start in range(0, m, _CHUNK):
        stop = min(start + _CHUNK, m)
        steps, _, _ = _step_unitaries(
            h_static, x_op, y_op, p[start:stop], q[start:stop], dt
        )
        for s in range(stop - start):
            u = steps[s] @ u
            if store_stride > 0 and (start + s + 1) % store_stride == 0:
                stored.append(u.copy())
    defect = _unitarity_defect(u)
    checkpoints = np.array(stored) if stored is not None else None
    return u, checkpoints, defect


def _frechet_phi(w, dt):
    """Entrywise divided-difference factors of the exponential map.

    Phi[a, b] = (e^{-i w_a dt} - e^{-i w_b dt}) / (w_a - w_b), evaluated
    stably as -i dt e^{-i (w_a+w_b) dt / 2} sinc((w_a - w_b) dt / 2).
    """
    diff = 0.5 * dt * (w[:, None] - w[None, :])
    mean = 0.5 * dt * (w[:, None] + w[None, :])
    small = np.abs(diff) < 1e-8
    safe = np.where(small, 1.0, diff)
    sinc = np.where(small, 1.0 - diff * diff / 6.0, np.sin(safe) / safe)
    return -1j * dt * np.exp(-1j * mean) * sinc


def gate_grad(
    h_static,
    x_op,
    y_op,
    p,
    q,
    dt,
    phys_stride,
    target,
    d_ess,
    guard_weight,
):
    """Gate-synthesis objective and its exact gradient in (p, q).

    The cost is  J = infidelity + guard_weight * guard_penalty  with

        infidelity   = 1 - |Tr_ess(target† U(T)) / d|^2
        guard_penalty = time average (trapezoid over physical step
                        boundaries) of the mean guard population of the
                        essential-state columns of U(t)

    Physical step boundaries are every ``phys_stride`` exponential units.
    Returns (infidelity, guard_penalty, gp, gq, u_final, defect) where
    gp/gq are dJ/dp[s], dJ/dq[s].
    """
    m = len(p)
    n = h_static.shape[0]
    if m % max(phys_stride, 1) != 0:
        raise ValueError("window length must be a multiple of phys_stride")
    n_phys = m // phys_stride
    w_mid = dt * phys_stride / (dt * m)  # trapezoid weight, interior boundary
    guard = n > d_ess

    # forward pass: store eigensystem of every unit and U at every boundary
    eigvecs = np.empty((m, n, n), dtype=complex)
    eigvals = np.empty((m, n), dtype=float)
    fwd = np.empty((m + 1, n, n), dtype=complex)
    fwd[0] = np.eye(n, dtype=complex)
    u = fwd[0].copy()
    for start in range(0, m, _CHUNK):
        stop = min(start + _CHUNK, m)
        steps, v, w = _step_unitaries(h_static, x_op, y_op, p[start:stop], q[start:stop], dt)
        eigvecs[start:stop] = v
        eigvals[start:stop] = w
        for s in range(stop - start):
            u = steps[s] @ u
            fwd[start + s + 1] = u
    defect = _unitarity_defect(u)

    # objective pieces; Tr_ess(T† U) = sum over essential columns of conj(T) * U
    overlap = np.sum(target[:, :d_ess].conj() * u[:, :d_ess]) / d_ess
    infidelity = 1.0 - float(np.abs(overlap) ** 2)

    guard_pen = 0.0
    if guard:
        for b in range(n_phys + 1):
            wgt = w_mid * (0.5 if b in (0, n_phys) else 1.0)
            block = fwd[b * phys_stride][d_ess:, :d_ess]
            guard_pen += wgt * float(np.sum(np.abs(block) ** 2)) / d_ess

    # adjoint (reverse) pass
    def cost_adjoint(u_state, boundary_index):
        """E = dJ/dU at a stored state (zero off the physical boundaries)."""
        e = np.zeros((n, n), dtype=complex)
        if guard:
            wgt = w_mid * (0.5 if boundary_index in (0, n_phys) else 1.0)
            e[d_ess:, :d_ess] = (
                guard_weight * wgt / d_ess
            ) * u_state[d_ess:, :d_ess].conj()
        return e

    gp = np.zeros(m)
    gq = np.zeros(m)
    lam = cost_adjoint(u, n_phys).T.copy()
    e_fid = np.zeros((n, n), dtype=complex)
    e_fid[:, :d_ess] = -(np.conj(overlap) / d_ess) * target[:, :d_ess].conj()
    lam += e_fid.T
    for s in range(m, 0, -1):
        v = eigvecs[s - 1]
        wv = eigvals[s - 1]
        phases = np.exp(-1j * dt * wv)
        g_step = (v * phases) @ v.conj().T
        f_prev = fwd[s - 1]
        phi = _frechet_phi(wv, dt)
        xv = v.conj().T @ x_op @ v
        yv = v.conj().T @ y_op @ v
        core = (v.conj().T @ f_prev @ lam @ v).T * phi
        gp[s - 1] = 2.0 * np.real(np.sum(core * xv))
        gq[s - 1] = 2.0 * np.real(np.sum(core * yv))
        lam = lam @ g_step
        if (s - 1) % phys_stride == 0:
            lam += cost_adjoint(f_prev, (s - 1) // phys_stride).T
    return infidelity, guard_pen, gp, gq, u, defect
