import numpy as np
import pytest

from scatter1d import potentials as P
from scatter1d import smatrix as sm
from scatter1d import solver as sv
from scatter1d.units import angstrom_to_bohr, ev_to_hartree


class Zero(P.Potential):
    def value(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    @property
    def char_length(self):
        return 1.0


ZERO_SETTINGS = sv.SolverSettings(h=0.02, x_match=5.0, match_sep_max=2.0)


def test_free_particle_amplitudes():
    amps = sv.solve_batch(Zero(), ev_to_hartree(np.array([0.3, 2.0, 9.0])), ZERO_SETTINGS)
    assert np.max(np.abs(amps.r_l)) < 1e-10
    assert np.max(np.abs(amps.r_r)) < 1e-10
    assert np.max(np.abs(amps.t_l - 1.0)) < 1e-10
    assert np.max(np.abs(amps.t_r - 1.0)) < 1e-10


def test_invariants_all_examples(potentials_by_name, e_grid):
    for name, pot in potentials_by_name.items():
        st = sv.SolverSettings.for_potential(pot, float(e_grid.max()))
        batch = sv.solve_batch(pot, e_grid, st)
        assert batch.max_residual() < 1e-8, name


def test_single_energy_residual_fields():
    pot = P.example_potential("V2")
    amps = sv.solve_at_energy(pot, ev_to_hartree(2.0))
    assert amps.flux_residual_left < 1e-10
    assert amps.flux_residual_right < 1e-10
    assert amps.reciprocity_residual < 1e-10
    assert amps.phase_relation_residual < 1e-10
    assert amps.k == pytest.approx(np.sqrt(2 * ev_to_hartree(2.0)))


def test_grid_convergence_halving():
    pot = P.example_potential("V2")
    e = ev_to_hartree(np.array([0.5, 2.0, 8.0]))
    st = sv.SolverSettings.for_potential(pot, float(e.max()))
    st2 = sv.SolverSettings(h=st.h / 2, x_match=st.x_match,
                            match_sep_max=st.match_sep_max, tol=st.tol)
    a1, a2 = sv.solve_batch(pot, e, st), sv.solve_batch(pot, e, st2)
    for f in ("r_l", "r_r", "t_l", "t_r"):
        assert np.max(np.abs(getattr(a1, f) - getattr(a2, f))) < 1e-6


def test_v5_perfect_transmission():
    pot = P.example_potential("V5")
    amps = sv.solve_at_energy(pot, ev_to_hartree(2.0))
    assert abs(abs(amps.t_l) ** 2 - 1.0) < 1e-6
    assert abs(amps.r_l) < 1e-6


def test_rejects_nonpositive_energy():
    with pytest.raises(ValueError):
        sv.solve_at_energy(P.example_potential("V1"), -1.0)
    with pytest.raises(ValueError):
        sv.solve_batch(P.example_potential("V1"), [0.1, 0.0])
    with pytest.raises(ValueError):
        sv.analytic_square_barrier(0.1, 1.0, 0.0)


def test_too_coarse_grid_raises():
    st = sv.SolverSettings(h=0.5, x_match=10.0, match_sep_max=2.0)
    with pytest.raises(sv.SolverError):
        sv.solve_batch(P.example_potential("V1"), [ev_to_hartree(10.0)], st)


# --- analytic square-barrier oracle ---

def test_barrier_oracle_limits():
    a, e = angstrom_to_bohr(1.0), ev_to_hartree(2.0)
    amp = sv.analytic_square_barrier(1e-14, a, e)
    assert abs(amp.r_l) < 1e-10 and abs(amp.t_l - 1.0) < 1e-10
    u = ev_to_hartree(1.0)
    t2 = abs(sv.analytic_square_barrier(u, a, 2 * u).t_l) ** 2
    t10 = abs(sv.analytic_square_barrier(u, a, 10 * u).t_l) ** 2
    assert t10 > t2
    assert sv.analytic_square_barrier(u, a, 5 * u).max_residual < 1e-12


def test_barrier_regression_anchor():
    # derived once by exact piecewise matching and frozen
    amp = sv.analytic_square_barrier(ev_to_hartree(5.0), angstrom_to_bohr(1.0),
                                     ev_to_hartree(2.0))
    assert amp.r_l == pytest.approx(-0.9439540633673019 + 0.06489365822490548j, abs=1e-12)
    assert amp.t_l == pytest.approx(-0.02219641749275364 - 0.3228728208211965j, abs=1e-12)


def test_barrier_numerov_vs_analytic():
    u, a = ev_to_hartree(5.0), angstrom_to_bohr(1.0)
    bar = P.SquareBarrier(height=u, half_width=a)
    st = sv.SolverSettings.for_potential(bar, ev_to_hartree(12.0))
    for e_ev in (0.5, 2.0, 4.9, 5.0, 5.1, 8.0, 12.0):
        e = ev_to_hartree(e_ev)
        num = sv.solve_at_energy(bar, e, st)
        ana = sv.analytic_square_barrier(u, a, e)
        assert abs(num.t_l - ana.t_l) < 1e-6, e_ev
        assert abs(num.r_l - ana.r_l) < 1e-6, e_ev


# --- coupled-channel parity solver ---

def test_parity_free_particle_is_diag_one_minus_one():
    s = sv.solve_parity_batch(Zero(), [ev_to_hartree(2.0)], ZERO_SETTINGS)[0]
    assert np.max(np.abs(s - np.diag([1.0, -1.0]))) < 1e-9


def test_parity_symmetric_channels_decouple():
    pot = P.example_potential("V1")
    st = sv.SolverSettings.for_potential(pot, ev_to_hartree(2.0))
    s = sv.solve_parity_channels(pot, ev_to_hartree(2.0), st)
    assert abs(s.m[0, 1]) < 1e-8
    assert abs(s.m[1, 0]) < 1e-8
    assert s.unitarity_residual < 1e-8


def test_parity_matches_transformed_cartesian(potentials_by_name):
    e = ev_to_hartree(2.0)
    for name, pot in potentials_by_name.items():
        st = sv.SolverSettings.for_potential(pot, e)
        s_dir = sm.from_amplitudes(sv.solve_at_energy(pot, e, st))
        s_par = sm.to_parity_basis(s_dir)
        s_rad = sv.solve_parity_channels(pot, e, st)
        assert np.max(np.abs(s_par.m - s_rad.m)) < 1e-6, name


def test_lattice_wavenumber_matches_k_for_fine_grids():
    k = np.array([0.1, 0.5, 1.0])
    kt = sv.lattice_wavenumber(k, 1e-3)
    assert np.allclose(kt, k, rtol=1e-10)
    # dispersion correction has the right sign and order
    kt2 = sv.lattice_wavenumber(np.array([1.0]), 0.1)
    assert kt2[0] > 1.0
    assert kt2[0] - 1.0 == pytest.approx(0.1**4 / 480, rel=0.05)
