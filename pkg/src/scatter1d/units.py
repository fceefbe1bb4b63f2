"""Unit conversions between atomic units and lab units (eV, angstrom, fs).

All internal computations use Hartree atomic units (hbar = m_e = e = 1).
Energies are hartree, lengths bohr, times atomic time units.
"""

EV_PER_HARTREE = 27.211386245988
ANGSTROM_PER_BOHR = 0.529177210903
FS_PER_AUT = 0.024188843265857


def ev_to_hartree(e):
    return e / EV_PER_HARTREE


def hartree_to_ev(e):
    return e * EV_PER_HARTREE


def angstrom_to_bohr(x):
    return x / ANGSTROM_PER_BOHR


def bohr_to_angstrom(x):
    return x * ANGSTROM_PER_BOHR


def aut_to_fs(t):
    return t * FS_PER_AUT


def fs_to_aut(t):
    return t / FS_PER_AUT
