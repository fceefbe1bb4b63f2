"""Short-range 1D potentials: declarative specs, evaluation and geometry helpers.

Every potential evaluates in atomic units: positions in bohr, values in
hartree. Factory helpers accept eV / angstrom and convert once, so specs
built from lab units carry no unit state afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .units import angstrom_to_bohr, ev_to_hartree


class PotentialError(ValueError):
    """Invalid potential definition or evaluation request."""


class NotShortRangeError(PotentialError):
    """Potential does not decay below the requested threshold."""


@dataclass(frozen=True)
class Potential:
    """Base class; subclasses implement value(x) for x in bohr."""

    def value(self, x):
        raise NotImplementedError

    @property
    def char_length(self) -> float:
        """Shortest length scale of the potential, in bohr."""
        raise NotImplementedError

    @property
    def breakpoints(self) -> tuple:
        """Jump discontinuities (bohr); solvers align their grids to these."""
        return ()

    def __call__(self, x):
        return self.value(x)


@dataclass(frozen=True)
class GaussianSum(Potential):
    """Sum of Gaussian wells: V(x) = -depth * sum_j f_j exp(-[(x - c_j)/width]^2).

    `terms` is a sequence of (prefactor, center) pairs with centers in bohr.
    depth in hartree, width in bohr. Positive depth means attractive wells.
    """

    depth: float
    width: float
    terms: tuple = ()

    def __post_init__(self):
        if not np.isfinite(self.depth):
            raise PotentialError("depth must be finite")
        if not (self.width > 0 and np.isfinite(self.width)):
            raise PotentialError("width must be positive and finite")
        clean = tuple((float(f), float(c)) for f, c in self.terms)
        if not clean:
            raise PotentialError("at least one Gaussian term required")
        if not all(np.isfinite(f) and np.isfinite(c) for f, c in clean):
            raise PotentialError("non-finite Gaussian term")
        object.__setattr__(self, "terms", clean)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for f, c in self.terms:
            out += f * np.exp(-(((x - c) / self.width) ** 2))
        return -self.depth * out

    @property
    def char_length(self) -> float:
        return self.width


@dataclass(frozen=True)
class Resonance(Potential):
    """Oscillating-sign potential with a Gaussian envelope supporting a
    long-lived quasi-bound state:

        V(x) = E_scale * exp(-[x/d - 1/2]^2) * atan(2 sin(2 x/d))

    with d = width (bohr) and E_scale fixed at 1 eV, which places the
    delay enhancement inside the sub-10 eV window used throughout.
    """

    width: float

    _E_SCALE = ev_to_hartree(1.0)

    def __post_init__(self):
        if not (self.width > 0 and np.isfinite(self.width)):
            raise PotentialError("width must be positive and finite")

    def value(self, x):
        u = np.asarray(x, dtype=float) / self.width
        return self._E_SCALE * np.exp(-((u - 0.5) ** 2)) * np.arctan(2.0 * np.sin(2.0 * u))

    @property
    def char_length(self) -> float:
        return self.width


@dataclass(frozen=True)
class SechWell(Potential):
    """Reflectionless well V(x) = -1 / (d^2 cosh^2(x/d)), d = width in bohr.

    Only the attractive sign is reflectionless; the tests pin |t|^2 = 1.
    """

    width: float

    def __post_init__(self):
        if not (self.width > 0 and np.isfinite(self.width)):
            raise PotentialError("width must be positive and finite")

    def value(self, x):
        u = np.asarray(x, dtype=float) / self.width
        # sech^2 via exp to avoid cosh overflow at large |x|
        sech = 2.0 * np.exp(-np.abs(u)) / (1.0 + np.exp(-2.0 * np.abs(u)))
        return -(sech**2) / self.width**2

    @property
    def char_length(self) -> float:
        return self.width


@dataclass(frozen=True)
class SquareBarrier(Potential):
    """Rectangular barrier of given height (hartree) on [-half_width, half_width].

    Not one of the showcase potentials; exists because its scattering
    amplitudes have an exact closed form used as a solver oracle.
    """

    height: float
    half_width: float

    def __post_init__(self):
        if not np.isfinite(self.height):
            raise PotentialError("height must be finite")
        if not (self.half_width > 0 and np.isfinite(self.half_width)):
            raise PotentialError("half_width must be positive and finite")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= self.half_width, self.height, 0.0)

    @property
    def char_length(self) -> float:
        return self.half_width

    @property
    def breakpoints(self) -> tuple:
        return (-self.half_width, self.half_width)


@dataclass(frozen=True)
class Tabulated(Potential):
    """Sampled potential with monotone cubic (PCHIP) interpolation.

    Values are clamped to zero outside the sample range, which keeps the
    potential short range; the samples must therefore already have decayed
    at both ends (|V| < 1e-6 * max|V|).
    """

    x: tuple
    v: tuple
    _interp: Callable = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        xa = np.asarray(self.x, dtype=float)
        va = np.asarray(self.v, dtype=float)
        if xa.ndim != 1 or xa.shape != va.shape or xa.size < 4:
            raise PotentialError("need matching 1D arrays with >= 4 samples")
        if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(va))):
            raise PotentialError("non-finite samples")
        if np.any(np.diff(xa) <= 0):
            raise PotentialError("sample grid must be strictly increasing")
        vmax = np.max(np.abs(va))
        if vmax > 0 and max(abs(va[0]), abs(va[-1])) > 1e-6 * vmax:
            raise PotentialError("tabulated potential must decay at its boundaries")
        object.__setattr__(self, "x", tuple(xa))
        object.__setattr__(self, "v", tuple(va))
        object.__setattr__(self, "_interp", PchipInterpolator(xa, va, extrapolate=False))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = self._interp(x)
        return np.where(np.isnan(out), 0.0, out)

    @property
    def char_length(self) -> float:
        return float(np.min(np.diff(np.asarray(self.x)))) * 4.0


@dataclass(frozen=True)
class Shifted(Potential):
    """inner potential displaced by dx (bohr): V(x) = inner(x - dx)."""

    inner: Potential
    dx: float

    def __post_init__(self):
        if not np.isfinite(self.dx):
            raise PotentialError("dx must be finite")
        if not isinstance(self.inner, Potential):
            raise PotentialError("inner must be a Potential")

    def value(self, x):
        return self.inner.value(np.asarray(x, dtype=float) - self.dx)

    @property
    def char_length(self) -> float:
        return self.inner.char_length

    @property
    def breakpoints(self) -> tuple:
        return tuple(b + self.dx for b in self.inner.breakpoints)


def shift(pot: Potential, dx: float) -> Potential:
    """Displace a potential by dx bohr, collapsing nested shifts."""
    if isinstance(pot, Shifted):
        return shift(pot.inner, pot.dx + dx)
    if dx == 0.0:
        return pot
    return Shifted(pot, dx)


def evaluate(pot: Potential, x):
    """Evaluate V(x); x in bohr, result in hartree."""
    return pot.value(x)


def support_radius(pot: Potential, eps_v: float | None = None, margin: float | None = None) -> float:
    """Radius X beyond which |V| stays below eps_v, plus a safety margin.

    The default threshold is 1e-12 of the scanned maximum of |V| and the
    default margin is twice the characteristic length. Raises
    NotShortRangeError if no such radius exists within 1000 char lengths.
    """
    d = pot.char_length
    step = d / 8.0
    cap = 1000.0 * d
    xs = np.arange(0.0, cap + step, step)
    vr = np.abs(pot.value(xs))
    vl = np.abs(pot.value(-xs))
    vmax = max(vr.max(), vl.max())
    if eps_v is None:
        eps_v = 1e-12 * vmax
    if margin is None:
        margin = 2.0 * d
    if vmax == 0.0:
        return margin
    if eps_v <= 0:
        raise PotentialError("eps_v must be positive")
    big = np.nonzero((vr >= eps_v) | (vl >= eps_v))[0]
    if big.size and big[-1] == xs.size - 1:
        raise NotShortRangeError(
            f"|V| does not decay below {eps_v:g} within {cap:g} bohr")
    x_decay = xs[big[-1]] if big.size else 0.0
    return x_decay + margin


def parity_split(pot: Potential):
    """Even/odd components about the origin, as functions of r >= 0.

    V(x) = V_even(|x|) + sgn(x) V_odd(|x|) holds pointwise.
    """

    def v_even(r):
        r = np.asarray(r, dtype=float)
        return 0.5 * (pot.value(r) + pot.value(-r))

    def v_odd(r):
        r = np.asarray(r, dtype=float)
        return 0.5 * (pot.value(r) - pot.value(-r))

    return v_even, v_odd


def gaussian_chain(depth_ev: float, width_ang: float, prefactors) -> GaussianSum:
    """Gaussians of common width at centers 2*j*width, j indexed around 0.

    `prefactors` lists f_j for j = -(n//2) .. +(n//2); length must be odd.
    """
    pf = list(prefactors)
    if len(pf) % 2 != 1:
        raise PotentialError("prefactor list must have odd length")
    d = angstrom_to_bohr(width_ang)
    jmax = len(pf) // 2
    terms = [(pf[j + jmax], 2.0 * j * d) for j in range(-jmax, jmax + 1)]
    return GaussianSum(depth=ev_to_hartree(depth_ev), width=d, terms=tuple(terms))


def example_potential(name: str) -> Potential:
    """The six showcase potentials V1..V6 (2 eV / 1 angstrom family)."""
    key = name.strip().upper()
    d_ang = 1.0
    if key == "V1":
        return gaussian_chain(2.0, d_ang, [1, 1, 1, 1, 1])
    if key == "V2":
        return gaussian_chain(2.0, d_ang, [1 + j / 3 for j in range(-2, 3)])
    if key == "V3":
        return shift(example_potential("V1"), 2.0 * angstrom_to_bohr(d_ang))
    if key == "V4":
        return Resonance(width=angstrom_to_bohr(d_ang))
    if key == "V5":
        return SechWell(width=angstrom_to_bohr(d_ang))
    if key == "V6":
        return shift(example_potential("V5"), angstrom_to_bohr(3.0))
    raise PotentialError(f"unknown example potential {name!r} (expected V1..V6)")


EXAMPLE_NAMES = ("V1", "V2", "V3", "V4", "V5", "V6")
