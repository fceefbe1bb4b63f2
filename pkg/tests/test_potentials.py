import numpy as np
import pytest

from scatter1d import potentials as P
from scatter1d import units as U


def test_unit_round_trips():
    vals = np.array([1e-6, 0.1, 1.0, 27.3, 1234.5])
    assert np.allclose(U.hartree_to_ev(U.ev_to_hartree(vals)), vals, rtol=1e-14)
    assert np.allclose(U.angstrom_to_bohr(U.bohr_to_angstrom(vals)), vals, rtol=1e-14)
    assert np.allclose(U.fs_to_aut(U.aut_to_fs(vals)), vals, rtol=1e-14)


def test_v1_value_at_origin_matches_direct_summation():
    # direct summation of the five-Gaussian chain at x = 0
    expected_ev = -2.0 * (1.0 + 2.0 * np.exp(-4.0) + 2.0 * np.exp(-16.0))
    v1 = P.example_potential("V1")
    got = U.hartree_to_ev(float(v1.value(0.0)))
    assert got == pytest.approx(expected_ev, rel=1e-13)
    assert got == pytest.approx(-2.073263005695636, rel=1e-12)


def test_v2_prefactor_asymmetry():
    v2 = P.example_potential("V2")
    d = U.angstrom_to_bohr(1.0)
    # at +-4d the outermost terms dominate with prefactors 5/3 vs 1/3
    ratio_far = float(v2.value(4 * d) / v2.value(-4 * d))
    assert abs(ratio_far - 5.0) < 0.15
    # at +-2d the inner pair dominates with 4/3 vs 2/3
    ratio_near = float(v2.value(2 * d) / v2.value(-2 * d))
    assert abs(ratio_near - 2.0) < 0.01


def test_shift_identity_exact():
    v1 = P.example_potential("V1")
    v3 = P.example_potential("V3")  #
    d = U.angstrom_to_bohr(1.0)
    x = np.linspace(-3, 9, 57)
    assert np.array_equal(v3.value(x), v1.value(x - 2 * d))
    assert float(v3.value(2 * d)) == float(v1.value(0.0))


def test_shift_composition_collapses():
    base = P.example_potential("V2")
    nested = P.shift(P.shift(base, 1.5), -0.7)
    assert isinstance(nested, P.Shifted)
    assert not isinstance(nested.inner, P.Shifted)
    assert nested.dx == pytest.approx(0.8)
    x = np.linspace(-10, 10, 101)
    assert np.allclose(nested.value(x), base.value(x - 0.8), rtol=0, atol=0)


def test_parity_split_reconstruction():
    rng = np.random.default_rng(7)
    for name in ("V1", "V2", "V3", "V4"):
        pot = P.example_potential(name)
        v_even, v_odd = P.parity_split(pot)
        x = rng.uniform(-12, 12, size=100)
        rebuilt = v_even(np.abs(x)) + np.sign(x) * v_odd(np.abs(x))
        ref = pot.value(x)
        scale = np.max(np.abs(ref)) or 1.0
        assert np.max(np.abs(rebuilt - ref)) < 1e-14 * scale


def test_parity_split_symmetric_has_no_odd_part():
    v_even, v_odd = P.parity_split(P.example_potential("V1"))
    r = np.linspace(0, 10, 201)
    assert np.max(np.abs(v_odd(r))) < 1e-16
    v_even2, v_odd2 = P.parity_split(P.example_potential("V2"))
    d = U.angstrom_to_bohr(1.0)
    assert abs(float(v_odd2(2 * d))) > 1e-4


def test_support_radius_zero_potential_is_margin():
    class Zero(P.Potential):
        def value(self, x):
            return np.zeros_like(np.asarray(x, dtype=float))

        @property
        def char_length(self):
            return 2.0

    assert P.support_radius(Zero()) == pytest.approx(4.0)


def test_support_radius_covers_tail():
    v1 = P.example_potential("V1")
    x = P.support_radius(v1)
    vmax = abs(float(v1.value(0.0)))
    probe = np.linspace(x, x + 20, 200)
    assert np.max(np.abs(v1.value(probe))) < 1e-12 * vmax
    # stepping back past the safety margin re-enters the tail
    assert np.max(np.abs(v1.value(probe - 4.5))) > 1e-12 * vmax


def test_support_radius_shift_grows_linearly():
    v1 = P.example_potential("V1")
    dx = U.angstrom_to_bohr(3.0)
    x0 = P.support_radius(v1)
    x1 = P.support_radius(P.shift(v1, dx))
    assert x1 == pytest.approx(x0 + dx, abs=0.3)


def test_support_radius_rejects_long_range():
    class Coulombish(P.Potential):
        def value(self, x):
            x = np.asarray(x, dtype=float)
            return -1.0 / (1.0 + np.abs(x))

        @property
        def char_length(self):
            return 1.0

    with pytest.raises(P.NotShortRangeError):
        P.support_radius(Coulombish())


def test_validation_errors():
    with pytest.raises(P.PotentialError):
        P.GaussianSum(depth=np.nan, width=1.0, terms=((1.0, 0.0),))
    with pytest.raises(P.PotentialError):
        P.GaussianSum(depth=1.0, width=-1.0, terms=((1.0, 0.0),))
    with pytest.raises(P.PotentialError):
        P.SechWell(width=0.0)
    with pytest.raises(P.PotentialError):
        P.gaussian_chain(2.0, 1.0, [1, 1])  # even length
    with pytest.raises(P.PotentialError):
        P.example_potential("V9")


def test_tabulated_interpolation_and_clamping():
    xs = np.linspace(-8, 8, 161)
    vals = -0.1 * np.exp(-(xs**2))
    tab = P.Tabulated(x=tuple(xs), v=tuple(vals))
    probe = np.linspace(-7.9, 7.9, 97)
    assert np.max(np.abs(tab.value(probe) + 0.1 * np.exp(-(probe**2)))) < 5e-5
    # clamped to zero outside the samples
    assert np.all(tab.value(np.array([-50.0, 9.0, 100.0])) == 0.0)
    # refuses samples that have not decayed
    with pytest.raises(P.PotentialError):
        P.Tabulated(x=tuple(np.linspace(-1, 1, 9)),
                    v=tuple(np.full(9, -0.5)))


def test_resonance_and_sech_forms():
    d = U.angstrom_to_bohr(1.0)
    v4 = P.example_potential("V4")
    x = 0.25 * np.pi * d  # sin(2x/d) = 1
    expected = U.ev_to_hartree(1.0) * np.exp(-((0.25 * np.pi - 0.5) ** 2)) * np.arctan(2.0)
    assert float(v4.value(x)) == pytest.approx(expected, rel=1e-12)
    v5 = P.example_potential("V5")
    assert float(v5.value(0.0)) == pytest.approx(-1.0 / d**2, rel=1e-12)
    assert float(v5.value(3 * d)) == pytest.approx(-1.0 / (d * np.cosh(3.0)) ** 2, rel=1e-12)
    # attractive everywhere
    assert np.all(v5.value(np.linspace(-5, 5, 50)) < 0)
