"""2x2 S-matrices: construction, (alpha, beta, gamma) parameterization,
eigen-decomposition and basis transforms.

Conventions. The directional basis orders channels (left, right) with
reflections on the diagonal:

    S = [[r_l, t], [t, r_r]],   t = cos(alpha) e^{i beta},
    r_{l,r} = i sin(alpha) e^{i (beta +- gamma)}.

A unitary symmetric S determines (alpha, beta, gamma) up to the gauge
(alpha, gamma) ~ (-alpha, gamma + pi) and 2*pi branches. Single-matrix
extraction returns the canonical point alpha in [0, pi/2]; series
extraction keeps gamma smooth across reflection zeros by letting
sin(alpha) carry a sign, which is what makes gamma identically zero for
origin-symmetric potentials.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

#: Directional -> parity change of basis; columns are the even and odd
#: channel vectors. Fixed once so that a free particle maps to diag(1, -1)
#: and symmetric potentials diagonalize with Eq(12)-compatible signs.
U_PARITY = np.array([[1.0, -1.0], [1.0, 1.0]]) / np.sqrt(2.0)

#: Indeterminacy floor: below this |sin(alpha)| the reflection phase (and
#: with it gamma) carries no information.
SIN_ALPHA_FLOOR = 1e-7


class SMatrixError(ValueError):
    """S-matrix violates a structural requirement beyond tolerance."""


def wrap_angle(x):
    """Wrap to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x), TWO_PI)


@dataclass(frozen=True, eq=False)
class SMatrix:
    """Basis-tagged 2x2 scattering matrix at one energy (hartree)."""

    E: float
    basis: str  # directional | parity | directional_variant
    m: np.ndarray

    @property
    def unitarity_residual(self) -> float:
        g = self.m.conj().T @ self.m - np.eye(2)
        return float(np.max(np.abs(g)))

    @property
    def symmetry_residual(self) -> float:
        return float(abs(self.m[0, 1] - self.m[1, 0]))


@dataclass(frozen=True)
class SParams:
    """The three real parameters of a unitary symmetric S-matrix.

    alpha in [0, pi/2] when extracted from a single matrix; series code
    may carry a signed alpha (see module docstring). gamma_defined is
    False at reflectionless points, where gamma is carried over.
    """

    alpha: float
    beta: float
    gamma: float
    gamma_defined: bool = True


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenphases and real orthonormal eigenvectors of a symmetric S.

    Channel 1 is the branch with cos(chi) >= 0, which reduces to
    s_1 = beta + alpha for symmetric potentials. route_residual records
    the worst disagreement between the direct 2x2 eigensolve and the
    closed-form routes.
    """

    s: np.ndarray            # (2,) eigenphases, wrapped
    eigenvalues: np.ndarray  # (2,) complex, unit modulus
    vectors: np.ndarray      # (2,2) real orthonormal columns
    chi: np.ndarray          # (2,) chi_plus, chi_minus (nan if unavailable)
    route_residual: float


def from_amplitudes(amps, tol: float = 1e-8) -> SMatrix:
    """Directional S-matrix [[r_l, t], [t, r_r]] from solver amplitudes."""
    worst = max(amps.flux_residual_left, amps.flux_residual_right,
                amps.reciprocity_residual, amps.phase_relation_residual)
    if worst > 1e3 * tol:
        raise SMatrixError(
            f"amplitudes at E={amps.E:g} violate flux/reciprocity invariants "
            f"(worst residual {worst:.3e})")
    t = 0.5 * (amps.t_l + amps.t_r)
    m = np.array([[amps.r_l, t], [t, amps.r_r]])
    return SMatrix(E=amps.E, basis="directional", m=m)


def channel_mixing_variant(amps) -> SMatrix:
    """Alternative matrix [[t, r_r], [r_l, t]] with transmissions on the
    diagonal. Unitary always, but symmetric only when r_l = r_r, so it is
    not a valid S-matrix for asymmetric potentials; its symmetry_residual
    equals |r_r - r_l|."""
    t = 0.5 * (amps.t_l + amps.t_r)
    m = np.array([[t, amps.r_r], [amps.r_l, t]])
    return SMatrix(E=amps.E, basis="directional_variant", m=m)


def _canonical_params(r_l, r_r, t):
    """Canonical (alpha, beta, gamma, defined) with alpha in [0, pi/2].

    Vectorized; gamma is the circular mean of the two reflection-phase
    estimates and lies in (-pi, pi].
    """
    r_l, r_r, t = np.asarray(r_l), np.asarray(r_r), np.asarray(t)
    alpha = np.arccos(np.clip(np.abs(t), 0.0, 1.0))
    beta = np.angle(t)
    g_l = np.angle(r_l) - beta - 0.5 * np.pi
    g_r = beta + 0.5 * np.pi - np.angle(r_r)
    gamma = np.angle(np.exp(1j * g_l) + np.exp(1j * g_r))
    defined = np.sin(alpha) >= SIN_ALPHA_FLOOR
    return alpha, beta, gamma, defined


def extract_params(s: SMatrix, prev: SParams | None = None, tol: float = 1e-8) -> SParams:
    """Invert the parameterization for a single directional S-matrix.

    beta and gamma branches are chosen nearest `prev` when given.
    Raises SMatrixError when |t| exceeds 1 beyond tolerance or when the
    two reflection phases give inconsistent gamma.
    """
    if s.basis != "directional":
        raise SMatrixError("parameter extraction expects the directional basis")
    r_l, t, r_r = s.m[0, 0], s.m[0, 1], s.m[1, 1]
    if abs(t) > 1.0 + tol:
        raise SMatrixError(f"|t| = {abs(t):.12g} exceeds 1")
    alpha, beta, gamma, defined = _canonical_params(r_l, r_r, t)
    alpha, beta, gamma = float(alpha), float(beta), float(gamma)
    if defined:
        g_l = np.angle(r_l) - beta - 0.5 * np.pi
        g_r = beta + 0.5 * np.pi - np.angle(r_r)
        # consistency in the complex plane, so tiny |r| cannot blow it up
        mismatch = np.sin(alpha) * abs(wrap_angle(g_l - g_r))
        if mismatch > 1e3 * tol:
            raise SMatrixError(
                f"gamma from r_l vs r_r inconsistent (residual {mismatch:.3e})")
    if not defined:
        gamma = prev.gamma if prev is not None else 0.0
    elif prev is not None:
        gamma = prev.gamma + wrap_angle(gamma - prev.gamma)
    if prev is not None:
        beta = prev.beta + wrap_angle(beta - prev.beta)
    return SParams(alpha=alpha, beta=beta, gamma=gamma, gamma_defined=bool(defined))


def reconstruct(params: SParams, E: float = np.nan) -> SMatrix:
    """Rebuild the directional S-matrix from (alpha, beta, gamma)."""
    sa, ca = np.sin(params.alpha), np.cos(params.alpha)
    eb = np.exp(1j * params.beta)
    t = ca * eb
    r_l = 1j * sa * eb * np.exp(1j * params.gamma)
    r_r = 1j * sa * eb * np.exp(-1j * params.gamma)
    return SMatrix(E=E, basis="directional", m=np.array([[r_l, t], [t, r_r]]))


def smooth_params_series(r_l, r_r, t):
    """Gauge-smoothed (alpha, beta, gamma) series over an ordered grid.

    Returns (alpha, beta, gamma, defined) arrays. beta is 2*pi-unwrapped.
    alpha carries the sign of the reflection amplitude so that gamma stays
    continuous through reflection zeros: at each step the candidates
    (+alpha_c, gamma_c) and (-alpha_c, gamma_c + pi) are resolved by gamma
    continuity. Points with undefined gamma inherit the previous value.
    """
    alpha_c, beta, gamma_c, defined = _canonical_params(r_l, r_r, t)
    beta = np.unwrap(np.atleast_1d(beta))
    alpha_c = np.atleast_1d(alpha_c)
    gamma_c = np.atleast_1d(gamma_c)
    defined = np.atleast_1d(defined)

    n = alpha_c.size
    alpha = np.empty(n)
    gamma = np.empty(n)
    sign = 1.0
    g_prev = 0.0
    have_ref = False
    for i in range(n):
        if not defined[i]:
            alpha[i] = sign * alpha_c[i]
            gamma[i] = g_prev if have_ref else 0.0
            continue
        if not have_ref:
            alpha[i] = alpha_c[i]
            gamma[i] = gamma_c[i]
            sign, g_prev, have_ref = 1.0, gamma_c[i], True
            continue
        d_plus = abs(wrap_angle(gamma_c[i] - g_prev))
        d_minus = abs(wrap_angle(gamma_c[i] + np.pi - g_prev))
        if d_minus < d_plus:
            alpha[i] = -alpha_c[i]
            gamma[i] = g_prev + wrap_angle(gamma_c[i] + np.pi - g_prev)
        else:
            alpha[i] = alpha_c[i]
            gamma[i] = g_prev + wrap_angle(gamma_c[i] - g_prev)
        sign = np.sign(alpha[i]) or 1.0
        g_prev = gamma[i]
    # backfill leading undefined stretch with the first defined gamma
    if have_ref:
        first = int(np.argmax(defined))
        gamma[:first] = gamma[first]
    return alpha, beta, gamma, defined


def match_params_gauge(r_l, r_r, t, alpha_ref, beta_ref, gamma_ref):
    """Params of off-grid samples expressed in the gauge of a reference point.

    Used for derivative stencils: each sample's canonical parameters are
    mapped onto the branch/gauge of (alpha_ref, beta_ref, gamma_ref).
    Returns (alpha, beta, gamma, defined) arrays.
    """
    alpha_c, beta_c, gamma_c, defined = _canonical_params(r_l, r_r, t)
    beta = beta_ref + wrap_angle(beta_c - beta_ref)
    d_plus = np.abs(wrap_angle(gamma_c - gamma_ref))
    d_minus = np.abs(wrap_angle(gamma_c + np.pi - gamma_ref))
    take_minus = d_minus < d_plus
    alpha = np.where(take_minus, -alpha_c, alpha_c)
    gamma = gamma_ref + np.where(
        take_minus, wrap_angle(gamma_c + np.pi - gamma_ref), wrap_angle(gamma_c - gamma_ref))
    # keep the reference sign where gamma carries no information
    fallback = np.where(np.asarray(alpha_ref) < 0, -alpha_c, alpha_c)
    alpha = np.where(defined, alpha, fallback)
    gamma = np.where(defined, gamma, gamma_ref)
    return alpha, beta, gamma, defined


def eigen_decompose(s: SMatrix, tol: float = 1e-8) -> EigenSystem:
    """Eigenphases and real eigenvectors of a unitary symmetric 2x2 matrix.

    The direct route diagonalizes with a real rotation (possible because a
    symmetric unitary matrix has real eigenvectors); the quadratic formula
    for the eigenvalues and, in the directional basis, the closed form

        chi_pm = angle of (x = +-sqrt(1 - sin^2 a cos^2 g), y = sin a cos g)

    serve as redundant routes whose worst disagreement is recorded.
    """
    m = s.m
    if abs(m[0, 1] - m[1, 0]) > 1e3 * tol:
        raise SMatrixError("eigen-decomposition requires a symmetric matrix")
    a, b, t = m[0, 0], m[1, 1], 0.5 * (m[0, 1] + m[1, 0])
    theta = 0.5 * np.arctan2(2.0 * abs(t) ** 2, ((a - b) * np.conj(t)).real)
    c, sn = np.cos(theta), np.sin(theta)
    v1 = np.array([c, sn])
    v2 = np.array([-sn, c])
    lam1 = a * c * c + 2.0 * t * sn * c + b * sn * sn
    lam2 = a * sn * sn - 2.0 * t * sn * c + b * c * c
    off = a * (-sn) * c + t * (c * c - sn * sn) + b * sn * c

    lam = np.array([lam1, lam2])
    vecs = np.column_stack([v1, v2])

    # quadratic route: mean +- sqrt
    mean = 0.5 * (a + b)
    root = np.sqrt((0.5 * (a - b)) ** 2 + t * t + 0j)
    quad = np.array([mean + root, mean - root])
    resid_quad = min(max(abs(lam[0] - quad[0]), abs(lam[1] - quad[1])),
                     max(abs(lam[0] - quad[1]), abs(lam[1] - quad[0])))

    chi = np.array([np.nan, np.nan])
    resid_chi = 0.0
    if s.basis == "directional":
        alpha, beta, gamma, defined = _canonical_params(m[0, 0], m[1, 1], t)
        u = np.sin(alpha) * np.cos(gamma) if defined else 0.0
        w = np.sqrt(max(1.0 - u * u, 0.0))
        chi = np.array([np.arctan2(u, w), np.arctan2(u, -w)])
        closed = np.exp(1j * (beta + chi))
        # order channel 1 on the cos(chi) >= 0 branch
        if abs(lam[0] - closed[0]) + abs(lam[1] - closed[1]) > \
                abs(lam[0] - closed[1]) + abs(lam[1] - closed[0]):
            lam = lam[::-1]
            vecs = vecs[:, ::-1]
        resid_chi = max(abs(lam[0] - closed[0]), abs(lam[1] - closed[1]))

    resid = float(max(abs(off), resid_quad, resid_chi,
                      abs(abs(lam[0]) - 1.0), abs(abs(lam[1]) - 1.0)))
    if resid > 1e4 * tol:
        raise SMatrixError(
            f"eigen routes disagree (residual {resid:.3e}); branch convention suspect")
    return EigenSystem(s=np.angle(lam), eigenvalues=lam, vectors=vecs,
                       chi=chi, route_residual=resid)


def parity_matrix_from_params(params: SParams) -> np.ndarray:
    """Closed-form parity-basis S-matrix from (alpha, beta, gamma)."""
    sa, ca = np.sin(params.alpha), np.cos(params.alpha)
    sg, cg = np.sin(params.gamma), np.cos(params.gamma)
    eb = np.exp(1j * params.beta)
    return eb * np.array([[1j * sa * cg + ca, sa * sg],
                          [sa * sg, 1j * sa * cg - ca]])


def to_parity_basis(s: SMatrix, tol: float = 1e-8) -> SMatrix:
    """Transform a directional S-matrix to the parity (even/odd) basis.

    Computed as U_p^dagger S U_p and cross-checked against the closed form
    evaluated from the extracted parameters; disagreement indicates a
    broken phase convention and raises.
    """
    if s.basis != "directional":
        raise SMatrixError("to_parity_basis expects the directional basis")
    mp = U_PARITY.conj().T @ s.m @ U_PARITY
    params = extract_params(s, tol=tol)
    if params.gamma_defined or np.cos(params.alpha) > 0:
        closed = parity_matrix_from_params(params)
        resid = float(np.max(np.abs(mp - closed)))
        if params.gamma_defined and resid > 1e4 * tol:
            raise SMatrixError(
                f"parity transform routes disagree (residual {resid:.3e})")
    return SMatrix(E=s.E, basis="parity", m=mp)
