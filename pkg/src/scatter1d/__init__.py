"""Scattering matrices and Wigner-Smith time delays for short-range 1D potentials.

Compute reflection/transmission amplitudes at fixed energy, assemble the
unitary symmetric S-matrix and its three-parameter form, and derive
partial (eigenphase-derivative) and proper (lifetime-matrix) time delays,
including displacement laws and an intrinsic-symmetry detector.
"""

from ._backend import active_backend
from .analysis import (MinimalGap, ShiftScan, SymmetryVerdict, minimal_gap,
                       shift_scan, symmetry_test)
from .delays import (DelaySpectrum, LifetimeMatrix, closed_form_delays,
                     compute_delay_spectrum, delay_point, dwell_time_spectral,
                     lifetime_matrix, partial_delays, s_derivative,
                     sum_rule_check)
from .potentials import (EXAMPLE_NAMES, GaussianSum, Potential, Resonance,
                         SechWell, Shifted, SquareBarrier, Tabulated,
                         evaluate, example_potential, gaussian_chain,
                         parity_split, shift, support_radius)
from .smatrix import (EigenSystem, SMatrix, SParams, U_PARITY,
                      channel_mixing_variant, eigen_decompose, extract_params,
                      from_amplitudes, reconstruct, to_parity_basis)
from .solver import (AmplitudeBatch, ScatteringAmplitudes, SolverSettings,
                     analytic_square_barrier, solve_at_energy, solve_batch,
                     solve_parity_batch, solve_parity_channels)

__version__ = "0.1.0"

__all__ = [
    "active_backend", "AmplitudeBatch", "channel_mixing_variant",
    "closed_form_delays", "compute_delay_spectrum", "delay_point",
    "DelaySpectrum", "dwell_time_spectral", "eigen_decompose", "EigenSystem",
    "evaluate", "EXAMPLE_NAMES", "example_potential", "extract_params",
    "from_amplitudes", "gaussian_chain", "GaussianSum", "lifetime_matrix",
    "LifetimeMatrix", "minimal_gap", "MinimalGap", "parity_split",
    "partial_delays", "Potential", "reconstruct", "Resonance",
    "s_derivative", "ScatteringAmplitudes", "SechWell", "shift", "shift_scan",
    "Shifted", "ShiftScan", "SMatrix", "solve_at_energy", "solve_batch",
    "solve_parity_batch", "solve_parity_channels", "SolverSettings",
    "SParams", "SquareBarrier", "sum_rule_check", "support_radius",
    "symmetry_test", "SymmetryVerdict", "Tabulated", "to_parity_basis",
    "U_PARITY",
]
