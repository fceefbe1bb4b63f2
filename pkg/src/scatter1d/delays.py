"""Partial and proper time delays from the energy-dependent S-matrix.

Partial delays are energy derivatives of the S-matrix eigenphases,
evaluated through the Hellmann-Feynman route tau_j = Im[e^{-i s_j}
(v_j^T S' v_j)] to avoid differentiating unwrapped phases. Proper delays
are the eigenvalues of the lifetime matrix Q = -i S^dag dS/dE. Energy
derivatives use a two-step central-difference stencil combined by one
Richardson extrapolation; the half-step disagreement doubles as the
error estimate.

Everything here works in atomic units; callers convert for I/O.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from . import smatrix as sm
from .potentials import Potential
from .solver import SolverSettings, solve_batch

#: Derivative step h = max(H_MIN, H_REL * E), hartree.
H_MIN = 1e-5
H_REL = 1e-4


class DerivativeError(RuntimeError):
    """Finite-difference derivative failed its internal error check."""


class ProfileDomainError(ValueError):
    """Spectral profile is not contained in the energy grid."""


def derivative_step(e):
    return np.maximum(H_MIN, H_REL * np.asarray(e, dtype=float))


def s_derivative(s_of_e: Callable[[float], np.ndarray], e: float, h: float | None = None):
    """dS/dE by Richardson-combined central differences.

    `s_of_e` maps energy to a 2x2 complex matrix with smooth entries
    (matrix elements need no unwrapping). Returns (S', err) where err is
    the half-step disagreement, an O(h^2) error estimate for the plain
    stencil and an upper bound for the extrapolated one.
    """
    if h is None:
        h = float(derivative_step(e))
    d_h = (s_of_e(e + h) - s_of_e(e - h)) / (2.0 * h)
    d_h2 = (s_of_e(e + 0.5 * h) - s_of_e(e - 0.5 * h)) / h
    err = float(np.max(np.abs(d_h2 - d_h)))
    return (4.0 * d_h2 - d_h) / 3.0, err


def _richardson(f_ph, f_mh, f_ph2, f_mh2, h):
    d_h = (f_ph - f_mh) / (2.0 * h)
    d_h2 = (f_ph2 - f_mh2) / h
    return (4.0 * d_h2 - d_h) / 3.0


@dataclass(frozen=True, eq=False)
class LifetimeMatrix:
    """Hermitized lifetime matrix with its eigensystem (delays in a.u.)."""

    E: float
    q: np.ndarray             # (2,2) complex Hermitian
    eigenvalues: np.ndarray   # (2,) float, descending
    vectors: np.ndarray       # (2,2) complex columns matching eigenvalues
    hermiticity_residual: float

    @property
    def trace(self) -> float:
        return float(self.q[0, 0].real + self.q[1, 1].real)


def lifetime_matrix(s: sm.SMatrix, s_prime: np.ndarray, tol: float = 1e-8) -> LifetimeMatrix:
    """Q = -i S^dag S' hermitized; eigenvalues are the proper delays."""
    q_raw = -1j * s.m.conj().T @ s_prime
    herm = 0.5 * (q_raw + q_raw.conj().T)
    resid = float(np.max(np.abs(q_raw - q_raw.conj().T))) * 0.5
    scale = max(1.0, float(np.max(np.abs(herm))))
    if resid > 1e2 * tol * scale:
        raise DerivativeError(
            f"lifetime matrix at E={s.E:g} is non-Hermitian beyond tolerance "
            f"(residual {resid:.3e}); dS/dE too noisy")
    w, v = np.linalg.eigh(herm)
    return LifetimeMatrix(E=s.E, q=herm, eigenvalues=w[::-1].copy(),
                          vectors=v[:, ::-1].copy(), hermiticity_residual=resid)


def partial_delays(s: sm.SMatrix, s_prime: np.ndarray, eig: sm.EigenSystem) -> np.ndarray:
    """Hellmann-Feynman partial delays, ordered like `eig`'s channels."""
    out = np.empty(2)
    for j in range(2):
        v = eig.vectors[:, j]
        out[j] = np.imag(np.conj(eig.eigenvalues[j]) * (v @ s_prime @ v))
    return out


def closed_form_delays(alpha, alpha_p, beta_p, gamma, gamma_p):
    """Delays from the parameter derivatives.

    Partial (channel 1 on the cos(chi) >= 0 branch, so the symmetric
    limit gives tau_1 = beta' + alpha'):

        tau_{1,2} = beta' +- (cos a cos g a' - sin a sin g g') / sqrt(1 - cos^2 g sin^2 a)

    Proper, ordered by value:

        q_{1,2} = beta' +- sqrt(a'^2 + sin^2 a g'^2)

    Returns (partial (..., 2), proper (..., 2)) arrays.
    """
    alpha, gamma = np.asarray(alpha, float), np.asarray(gamma, float)
    alpha_p, beta_p, gamma_p = (np.asarray(v, float) for v in (alpha_p, beta_p, gamma_p))
    sa, ca = np.sin(alpha), np.cos(alpha)
    sg, cg = np.sin(gamma), np.cos(gamma)
    u = sa * cg
    den = np.sqrt(np.maximum(1.0 - u * u, 0.0))
    num = ca * cg * alpha_p - sa * sg * gamma_p
    tiny = den < 1e-9
    if np.any(tiny & (np.abs(num) > 1e-12)):
        warnings.warn("near-degenerate eigenphases: partial-delay split ill-conditioned")
    ratio = np.where(tiny, 0.0, num / np.where(tiny, 1.0, den))
    part = np.stack([beta_p + ratio, beta_p - ratio], axis=-1)
    root = np.sqrt(alpha_p**2 + (sa * gamma_p) ** 2)
    prop = np.stack([beta_p + root, beta_p - root], axis=-1)
    return part, prop


def sum_rule_check(s: sm.SMatrix, s_prime: np.ndarray, tau_part, tau_prop, beta_p: float) -> float:
    """Worst residual among the channel-sum identities.

    The partial-delay sum, the proper-delay sum and tr Q must all equal
    2 beta'. Returns max |deviation| in atomic time units.
    """
    trq = float(np.trace(-1j * s.m.conj().T @ s_prime).real)
    return max(abs(float(np.sum(tau_part)) - trq),
               abs(float(np.sum(tau_prop)) - trq),
               abs(trq - 2.0 * float(beta_p)))


def dwell_time_spectral(profile: Callable[[float], np.ndarray], energies, q_mats) -> float:
    """Dwell time of a wave packet as the spectral expectation of Q.

    `profile` maps energy to the complex 2-vector of channel amplitudes;
    its density must be contained in `energies` (endpoints below 1e-6 of
    the peak) and normalized to unit integral. The quadrature is Simpson
    on uniform grids, trapezoid otherwise; the result is divided by the
    numerically integrated norm to remove quadrature bias.
    """
    e = np.asarray(energies, dtype=float)
    q = np.asarray(q_mats)
    psi = np.array([np.asarray(profile(ei), dtype=complex) for ei in e])
    dens = np.sum(np.abs(psi) ** 2, axis=1)
    peak = float(dens.max())
    if peak == 0.0:
        raise ProfileDomainError("profile vanishes on the whole grid")
    if dens[0] > 1e-6 * peak or dens[-1] > 1e-6 * peak:
        raise ProfileDomainError("profile support exceeds the energy grid")
    expect = np.real(np.einsum("ni,nij,nj->n", psi.conj(), q, psi))
    spacing = np.diff(e)
    uniform = np.allclose(spacing, spacing[0], rtol=1e-9)
    if uniform:
        num = simpson(expect, x=e)
        den = simpson(dens, x=e)
    else:
        num = np.trapezoid(expect, e)
        den = np.trapezoid(dens, e)
    if abs(den - 1.0) > 0.05:
        warnings.warn(f"profile norm deviates from 1 ({den:.4g}); renormalizing")
    return float(num / den)


@dataclass(eq=False)
class DelaySpectrum:
    """Per-energy scattering parameters, delays and diagnostics (a.u.).

    Channel 1 of the partial delays is fixed at the lowest grid energy
    (largest proper delay) and followed across the grid by eigenvector
    overlap; the proper-delay columns are tracked the same way so that
    row-wise channels correspond. `tau_prop_sorted` gives the
    value-ordered pair (q_1 >= q_2) for envelope work.
    """

    energies: np.ndarray
    k: np.ndarray
    s_mats: np.ndarray        # (n, 2, 2)
    s_prime: np.ndarray       # (n, 2, 2)
    s_prime_err: np.ndarray   # (n,)
    alpha: np.ndarray         # signed, smooth gauge
    beta: np.ndarray          # unwrapped
    gamma: np.ndarray         # unwrapped, smooth gauge
    gamma_defined: np.ndarray
    alpha_p: np.ndarray
    beta_p: np.ndarray
    gamma_p: np.ndarray
    eig_values: np.ndarray    # (n, 2) complex, tracked channels
    eig_vectors: np.ndarray   # (n, 2, 2) real, tracked columns
    q_mats: np.ndarray        # (n, 2, 2) complex
    q_vectors: np.ndarray     # (n, 2, 2) complex, tracked columns
    tau_part: np.ndarray      # (n, 2) Hellmann-Feynman, tracked
    tau_part_fd: np.ndarray   # (n, 2) finite-difference eigenphase route
    tau_prop: np.ndarray      # (n, 2) tracked
    sum_rule_residual: np.ndarray
    hermiticity_residual: np.ndarray
    field_meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.energies.size

    @property
    def tau_avg(self) -> np.ndarray:
        return 0.5 * np.sum(self.tau_part, axis=1)

    @property
    def tau_prop_sorted(self) -> np.ndarray:
        return np.sort(self.tau_prop, axis=1)[:, ::-1]

    @property
    def c_criterion(self) -> np.ndarray:
        c = self.gamma - 2.0 * self.energies * self.gamma_p
        return np.where(self.gamma_defined, c, np.nan)

    @property
    def channel1_is_plus_branch(self) -> np.ndarray:
        """True where tracked channel 1 is the cos(chi) >= 0 eigenbranch."""
        chi1 = sm.wrap_angle(np.angle(self.eig_values[:, 0]) - self.beta)
        return np.cos(chi1) >= 0.0

    def closed_form_tau_part(self) -> np.ndarray:
        """Closed-form partial delays rearranged into the tracked order."""
        part, _ = closed_form_delays(self.alpha, self.alpha_p, self.beta_p,
                                     self.gamma, self.gamma_p)
        plus_first = self.channel1_is_plus_branch
        return np.where(plus_first[:, None], part, part[:, ::-1])

    def closed_form_tau_prop(self) -> np.ndarray:
        """Closed-form proper delays, value-ordered (compare tau_prop_sorted)."""
        _, prop = closed_form_delays(self.alpha, self.alpha_p, self.beta_p,
                                     self.gamma, self.gamma_p)
        return prop


def _pair_columns(ref: np.ndarray, cur: np.ndarray):
    """Permutation of cur's columns maximizing overlap with ref's."""
    ov = np.abs(ref.conj().T @ cur)
    if ov[0, 0] + ov[1, 1] >= ov[0, 1] + ov[1, 0]:
        return (0, 1)
    return (1, 0)


def _align_signs(ref: np.ndarray, cur: np.ndarray) -> np.ndarray:
    """Flip column phases of cur to align with ref (real vectors: signs)."""
    out = cur.copy()
    for j in range(2):
        ip = np.vdot(ref[:, j], cur[:, j])
        if abs(ip) > 0:
            out[:, j] = cur[:, j] * np.conj(ip / abs(ip))
    return out


def compute_delay_spectrum(pot: Potential, energies,
                           settings: SolverSettings | None = None) -> DelaySpectrum:
    """Full delay analysis of a potential over an energy grid (hartree).

    Solves the scattering problem on a five-point energy stencil around
    every grid point, extracts gauge-smoothed parameters, and assembles
    partial delays (Hellmann-Feynman plus the finite-difference
    eigenphase cross-route), the lifetime matrix and proper delays, and
    the channel-sum diagnostics.
    """
    e = np.atleast_1d(np.asarray(energies, dtype=float))
    if e.size == 0 or np.any(e <= 0):
        raise ValueError("need a nonempty grid of positive energies")
    if e.size > 1 and np.any(np.diff(e) <= 0):
        raise ValueError("energy grid must be strictly increasing")
    he = derivative_step(e)
    if settings is None:
        settings = SolverSettings.for_potential(pot, float(e.max() + he.max()))

    stencil = np.stack([e, e + he, e - he, e + 0.5 * he, e - 0.5 * he])
    batch = solve_batch(pot, stencil.ravel(), settings)
    n = e.size
    r_l = batch.r_l.reshape(5, n)
    r_r = batch.r_r.reshape(5, n)
    t = batch.t.reshape(5, n)

    s_all = np.empty((5, n, 2, 2), dtype=complex)
    s_all[:, :, 0, 0] = r_l
    s_all[:, :, 0, 1] = s_all[:, :, 1, 0] = t
    s_all[:, :, 1, 1] = r_r
    s_mats = s_all[0]
    s_prime = _richardson(s_all[1], s_all[2], s_all[3], s_all[4], he[:, None, None])
    d_h = (s_all[1] - s_all[2]) / (2.0 * he[:, None, None])
    d_h2 = (s_all[3] - s_all[4]) / he[:, None, None]
    s_prime_err = np.max(np.abs(d_h2 - d_h), axis=(1, 2))

    alpha, beta, gamma, defined = sm.smooth_params_series(r_l[0], r_r[0], t[0])
    al = np.empty((5, n))
    be = np.empty((5, n))
    ga = np.empty((5, n))
    al[0], be[0], ga[0] = alpha, beta, gamma
    for row in range(1, 5):
        al[row], be[row], ga[row], _ = sm.match_params_gauge(
            r_l[row], r_r[row], t[row], alpha, beta, gamma)
    alpha_p = _richardson(al[1], al[2], al[3], al[4], he)
    beta_p = _richardson(be[1], be[2], be[3], be[4], he)
    gamma_p = _richardson(ga[1], ga[2], ga[3], ga[4], he)

    eig_values = np.empty((n, 2), dtype=complex)
    eig_vectors = np.empty((n, 2, 2))
    q_mats = np.empty((n, 2, 2), dtype=complex)
    q_vectors = np.empty((n, 2, 2), dtype=complex)
    tau_part = np.empty((n, 2))
    tau_part_fd = np.empty((n, 2))
    tau_prop = np.empty((n, 2))
    sum_res = np.empty(n)
    herm_res = np.empty(n)

    for i in range(n):
        s_i = sm.SMatrix(E=float(e[i]), basis="directional", m=s_mats[i])
        eig = sm.eigen_decompose(s_i, tol=settings.tol)
        lam, vec = eig.eigenvalues, eig.vectors
        life = lifetime_matrix(s_i, s_prime[i], tol=settings.tol)

        if i == 0:
            # channel 1 = branch connected to the larger proper delay
            if np.abs(life.vectors[:, 0].conj() @ vec[:, 1]) > \
                    np.abs(life.vectors[:, 0].conj() @ vec[:, 0]):
                lam, vec = lam[::-1], vec[:, ::-1]
        else:
            perm = _pair_columns(eig_vectors[i - 1], vec)
            lam, vec = lam[list(perm)], vec[:, list(perm)]
            vec = _align_signs(eig_vectors[i - 1], vec).real
        eig_values[i], eig_vectors[i] = lam, vec

        # proper channels paired to the previous point (values stay exact)
        qv = life.vectors
        qe = life.eigenvalues
        ref = q_vectors[i - 1] if i else vec.astype(complex)
        perm = _pair_columns(ref, qv)
        qv, qe = qv[:, list(perm)], qe[list(perm)]
        q_vectors[i] = _align_signs(ref, qv)
        q_mats[i] = life.q
        tau_prop[i] = qe
        herm_res[i] = life.hermiticity_residual

        # finite-difference eigenphase derivatives (cross-route)
        s_row = np.empty((4, 2))
        for row in range(1, 5):
            s_r = sm.SMatrix(E=0.0, basis="directional", m=s_all[row, i])
            eig_r = sm.eigen_decompose(s_r, tol=settings.tol)
            perm = _pair_columns(vec, eig_r.vectors)
            lam_r = eig_r.eigenvalues[list(perm)]
            base = np.angle(lam)
            s_row[row - 1] = base + sm.wrap_angle(np.angle(lam_r) - base)
        tau_part_fd[i] = _richardson(s_row[0], s_row[1], s_row[2], s_row[3], he[i])

        if abs(lam[0] - lam[1]) < 1e-6:
            tau_part[i] = tau_part_fd[i]
        else:
            for j in range(2):
                v = vec[:, j]
                tau_part[i, j] = np.imag(np.conj(lam[j]) * (v @ s_prime[i] @ v))

        sum_res[i] = sum_rule_check(s_i, s_prime[i], tau_part[i], tau_prop[i],
                                    beta_p[i])

    return DelaySpectrum(
        energies=e, k=np.sqrt(2.0 * e), s_mats=s_mats, s_prime=s_prime,
        s_prime_err=s_prime_err, alpha=alpha, beta=beta, gamma=gamma,
        gamma_defined=defined, alpha_p=alpha_p, beta_p=beta_p, gamma_p=gamma_p,
        eig_values=eig_values, eig_vectors=eig_vectors, q_mats=q_mats,
        q_vectors=q_vectors, tau_part=tau_part, tau_part_fd=tau_part_fd,
        tau_prop=tau_prop, sum_rule_residual=sum_res,
        hermiticity_residual=herm_res)


def delay_point(pot: Potential, e: float, settings: SolverSettings | None = None) -> DelaySpectrum:
    """One-energy convenience wrapper around compute_delay_spectrum."""
    return compute_delay_spectrum(pot, [float(e)], settings=settings)
