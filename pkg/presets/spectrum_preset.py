#!/usr/bin/env python3
"""
線形化作用素のスペクトルの確認
"""
import numpy as np

from core.preset import BasePreset
from physics.spectrum import assemble_linearized, eigen_modes, lambda_roots, predicted_delta
from utils.parser import at_most, make_check

MESH_TOLERANCE = 1e-4
FLOOR_TOLERANCE = 1e-3
ROOT_TOLERANCE = 1e-12


class SpectrumPreset(BasePreset):
    """スペクトルプリセット"""

    name = "spectrum"
    description = "一般化固有値 μ_k の正値性、格子細分化と重み下限への安定性を確認"

    def _solve(self, profile, n_cells, weight_floor):
        grid = self.build_grid(profile, n_cells)
        operator = assemble_linearized(profile, grid, self.config.gravity_enabled)
        return eigen_modes(operator, self.config.n_keep, weight_floor)

    def execute(self):
        config = self.config
        profile = self.build_equilibrium()
        coarse = self._solve(profile, config.n_cells, config.weight_floor)
        fine = self._solve(profile, config.compare_n_cells, config.weight_floor)
        floored = self._solve(profile, config.n_cells, 2.0 * config.weight_floor)
        self.spectrum = coarse

        n = min(coarse.n_modes, fine.n_modes)
        mesh_change = float(np.max(np.abs(fine.mu[:n] - coarse.mu[:n]) / np.abs(coarse.mu[:n])))
        floor_change = float(np.max(np.abs(floored.mu[:n] - coarse.mu[:n]) / np.abs(coarse.mu[:n])))
        roots = lambda_roots(coarse.mu)
        root_error = float(np.max(np.abs(roots ** 2 + roots + coarse.mu[:, None])))

        self.values["mu_min"] = float(coarse.mu[0])
        self.values["max_growth"] = coarse.max_growth
        self.values["symmetry_defect"] = coarse.symmetry_defect
        self.values["residual_max"] = float(np.max(coarse.residuals))
        self.add_check(make_check("全ての μ_k > 0", coarse.n_unstable == 0, float(coarse.mu[0]), "> 0",
                                  f"不安定モード {coarse.n_unstable} 個"))
        self.add_check(make_check("全モードの max Re λ < 0", coarse.max_growth < 0.0, coarse.max_growth, "< 0"))
        self.add_check(at_most(f"μ_k の相対差 N={config.n_cells} と N={config.compare_n_cells}",
                               mesh_change, MESH_TOLERANCE))
        self.add_check(at_most("重み下限を2倍にした時の μ_k の相対差", floor_change, FLOOR_TOLERANCE))
        self.add_check(at_most("λ² + λ + μ の再代入誤差", root_error, ROOT_TOLERANCE))

        if coarse.n_unstable == 0:
            delta = predicted_delta(coarse)
            self.values["predicted_delta"] = delta
            self.add_check(make_check("予測減衰率 δ_pred", 0.0 < delta <= 1.0, delta, "(0, 1]"))
