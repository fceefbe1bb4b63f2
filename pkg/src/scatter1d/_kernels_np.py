"""Pure-numpy propagation kernels, vectorized over the energy axis.

Reference implementations of the kernel contracts; `_kernels_nb` holds the
jitted equivalents. The spatial recurrence stays a Python loop but every
step operates on whole energy batches, so this path remains usable when
numba is unavailable (SCATTER1D_BACKEND=numpy).
"""
import numpy as np


def numerov_transmit(tgrid, psi0, psi1, idx_p):
    """Forward Numerov sweep; see _kernels_nb.numerov_transmit."""
    ne, nx = tgrid.shape
    pm = np.array(psi0, dtype=np.complex128)
    pc = np.array(psi1, dtype=np.complex128)
    out_p = np.where(idx_p == 0, pm, pc)  # correct for idx_p <= 1
    for i in range(2, nx):
        pn = ((2.0 + 10.0 * tgrid[:, i - 1]) * pc
              - (1.0 - tgrid[:, i - 2]) * pm) / (1.0 - tgrid[:, i])
        pm = pc
        pc = pn
        hit = idx_p == i
        if hit.any():
            out_p[hit] = pc[hit]
    return out_p, pc


def _sym_inv(a00, a01):
    """Inverse of [[a00, a01], [a01, a00]] batched; returns (i00, i01)."""
    det = a00 * a00 - a01 * a01
    return a00 / det, -a01 / det


def _mul(m00, m01, m10, m11, n00, n01, n10, n11):
    return (m00 * n00 + m01 * n10, m00 * n01 + m01 * n11,
            m10 * n00 + m11 * n10, m10 * n01 + m11 * n11)


def _inv(m00, m01, m10, m11):
    det = m00 * m11 - m01 * m10
    return m11 / det, -m01 / det, -m10 / det, m00 / det


def coupled_ratio_sweep(ve, vo, energies, h, phi1, idx_p, idx_q):
    """Renormalized Numerov for coupled parity channels; see _kernels_nb."""
    ne = energies.shape[0]
    c = h * h / 12.0
    if np.any(idx_p < 2) or np.any(idx_q <= idx_p):
        raise ValueError("matching indices must satisfy 2 <= idx_p < idx_q")
    iq_max = int(idx_q.max())

    def tmats(n):
        return c * 2.0 * (ve[n] - energies), np.full(ne, c * 2.0 * vo[n])

    taa, tab = tmats(0)
    f0_00, f0_10 = 1.0 - taa, -tab
    taa, tab = tmats(1)
    a00, a01 = 1.0 - taa, -tab
    f1 = _mul(a00, a01, a01, a00,
              phi1[:, 0, 0], phi1[:, 0, 1], phi1[:, 1, 0], phi1[:, 1, 1])
    i00, i01, i10, i11 = _inv(*f1)
    g = _mul(f0_00, np.zeros(ne), f0_10, np.zeros(ne), i00, i01, i10, i11)
    j00, j01 = _sym_inv(a00, a01)
    u00, u01 = 12.0 * j00 - 10.0, 12.0 * j01
    r00, r01 = u00 - g[0], u01 - g[1]
    r10, r11 = u01 - g[2], u00 - g[3]

    acc = [np.ones(ne), np.zeros(ne), np.zeros(ne), np.ones(ne)]
    for n in range(2, iq_max):
        taa, tab = tmats(n)
        j00, j01 = _sym_inv(1.0 - taa, -tab)
        u00, u01 = 12.0 * j00 - 10.0, 12.0 * j01
        i00, i01, i10, i11 = _inv(r00, r01, r10, r11)
        r00, r01 = u00 - i00, u01 - i01
        r10, r11 = u01 - i10, u00 - i11
        live = (n >= idx_p) & (n < idx_q)
        if live.any():
            prod = _mul(r00, r01, r10, r11, *acc)
            for comp, upd in zip(acc, prod):
                comp[live] = upd[live]

    phi_p = np.empty((ne, 2, 2))
    phi_q = np.empty((ne, 2, 2))
    taa_p = c * 2.0 * (ve[idx_p] - energies)
    tab_p = c * 2.0 * vo[idx_p]
    j00, j01 = _sym_inv(1.0 - taa_p, -tab_p)
    phi_p[:, 0, 0] = phi_p[:, 1, 1] = j00
    phi_p[:, 0, 1] = phi_p[:, 1, 0] = j01
    taa_q = c * 2.0 * (ve[idx_q] - energies)
    tab_q = c * 2.0 * vo[idx_q]
    j00, j01 = _sym_inv(1.0 - taa_q, -tab_q)
    out = _mul(j00, j01, j01, j00, *acc)
    phi_q[:, 0, 0], phi_q[:, 0, 1] = out[0], out[1]
    phi_q[:, 1, 0], phi_q[:, 1, 1] = out[2], out[3]
    return phi_p, phi_q
