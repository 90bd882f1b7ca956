#!/usr/bin/env python3
"""
半径条件の範囲での線形安定性の確認

(γ, R) の組ごとに一般化固有値を求め、全ての μ_k が正であることを確かめます。
ケースは互いに独立なので --jobs で並列に実行できます。
"""
from concurrent.futures import ThreadPoolExecutor

from core.preset import BasePreset
from physics.equilibrium import GasParameters
from physics.spectrum import assemble_linearized, eigen_modes
from utils.file_utils import log_message
from utils.parser import make_check


def window_radius(gas, fraction):
    """r₀ + fraction·(4r₀/(3-α) - r₀)"""
    r0 = gas.core_radius
    upper = 4.0 * r0 / (3.0 - gas.alpha)
    return r0 + fraction * (upper - r0)


class WindowSweepPreset(BasePreset):
    """半径条件スイーププリセット"""

    name = "window-sweep"
    description = "γ と R を半径条件の範囲で変えて全ての μ_k > 0 を確認"

    def _cases(self):
        base = self.config.gas
        cases = []
        for gamma in self.config.sweep_gammas:
            gas = GasParameters(gamma, base.pressure_const, base.core_gravity, base.core_radius,
                                base.self_gravity_const)
            if gas.alpha >= 3.0:
                log_message("WARNING", f"gamma={gamma:g} では半径条件が空なのでスキップします")
                continue
            for fraction in self.config.sweep_radius_fractions:
                cases.append((gas, fraction))
        return cases

    def _solve(self, case):
        gas, fraction = case
        profile = self.build_equilibrium(gas, window_radius(gas, fraction))
        operator = assemble_linearized(profile, self.build_grid(profile), self.config.gravity_enabled)
        return profile, eigen_modes(operator, self.config.n_keep, self.config.weight_floor)

    def execute(self):
        cases = self._cases()
        with ThreadPoolExecutor(max_workers=self.jobs) as executor:
            results = list(executor.map(self._solve, cases))

        for (gas, fraction), (profile, spectrum) in zip(cases, results):
            label = f"gamma={gas.gamma:.6g}, R={profile.outer_radius:.6g}"
            mu_min = float(spectrum.mu[0])
            self.values[f"mu_min ({label})"] = mu_min
            self.add_check(make_check(f"全ての μ_k > 0 ({label})", spectrum.n_unstable == 0, mu_min, "> 0",
                                      f"R/上限 = {fraction:g}, max Re λ = {spectrum.max_growth:.6g}"))
