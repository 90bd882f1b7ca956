"""
固体コアを持つ減衰付きEuler方程式の数値モジュール
"""

from physics.equilibrium import GasParameters, EquilibriumProfile, build_profile, radius_from_mass
from physics.stencils import Grid, build_grid
from physics.solver import SimState, Trajectory, initial_state, apply_perturbation, evolve
from physics.diagnostics import EnergyReport, DecayFit, energy_report, fit_decay_rate
from physics.spectrum import SpectrumResult, assemble_linearized, eigen_modes, predicted_delta
from physics.errors import CorevacError

__all__ = [
    'GasParameters',
    'EquilibriumProfile',
    'build_profile',
    'radius_from_mass',
    'Grid',
    'build_grid',
    'SimState',
    'Trajectory',
    'initial_state',
    'apply_perturbation',
    'evolve',
    'EnergyReport',
    'DecayFit',
    'energy_report',
    'fit_decay_rate',
    'SpectrumResult',
    'assemble_linearized',
    'eigen_modes',
    'predicted_delta',
    'CorevacError'
]
