import numpy as np
import pytest

from scatter1d import SolverSettings, compute_delay_spectrum, example_potential
from scatter1d.delays import H_MIN, H_REL
from scatter1d.units import ev_to_hartree

ACCEPTANCE_GRID_EV = (0.1, 10.0, 200)


@pytest.fixture(scope="session")
def e_grid():
    lo, hi, count = ACCEPTANCE_GRID_EV
    return ev_to_hartree(np.linspace(lo, hi, count))


@pytest.fixture(scope="session")
def potentials_by_name():
    return {name: example_potential(name) for name in
            ("V1", "V2", "V3", "V4", "V5", "V6")}


@pytest.fixture(scope="session")
def spectra(potentials_by_name, e_grid):
    """Delay spectra of V1..V6 on the acceptance grid, computed once."""
    out = {}
    e_max = float(e_grid.max()) * (1.0 + 2.0 * H_REL) + 2.0 * H_MIN
    for name, pot in potentials_by_name.items():
        settings = SolverSettings.for_potential(pot, e_max)
        out[name] = compute_delay_spectrum(pot, e_grid, settings=settings)
    return out
