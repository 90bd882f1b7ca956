#!/usr/bin/env python3
"""
小さな摂動の指数減衰と各点収束の確認

摂動を加えた平衡状態を時間発展させ、全エネルギーの減衰率、速度と自由境界の収束、
質量保存、物理的真空条件の持続、楕円型評価の比、線形スペクトルとの整合を調べます。
"""
import math

import numpy as np

from core.preset import BasePreset
from physics.diagnostics import elliptic_ratio, fit_decay_rate, pointwise_decay_check, vacuum_slope
from physics.equilibrium import check_radius_window
from physics.errors import CorevacError
from physics.spectrum import assemble_linearized, eigen_modes, predicted_delta
from utils.parser import at_least, at_most, error_check, make_check, relative_close, within

MIN_ENERGY_R2 = 0.99
MIN_POINTWISE_R2 = 0.95
BOUNDARY_RATE_TOLERANCE = 0.3
MAX_MASS_DRIFT = 1e-6
SLOPE_BOUNDS = (-10.0, -0.1)
ELLIPTIC_GROWTH = 10.0
ELLIPTIC_MESH_TOLERANCE = 0.2
# 遷移の後とみなす時刻
TRANSIENT_TIME = 1.0


class DecayPreset(BasePreset):
    """減衰プリセット"""

    name = "decay"
    description = "小さな摂動の全エネルギーが指数減衰し、速度と自由境界が収束することを確認"

    def execute(self):
        config = self.config
        profile = self.build_equilibrium()
        window_check = check_radius_window(profile)
        self.values["outer_radius"] = profile.outer_radius
        self.values["radius_window_upper"] = window_check.upper_bound
        self.add_check(make_check("半径条件 r₀ < R ≤ 4r₀/(3-α)", window_check.passed, window_check.margin,
                                  "margin >= 0", window_check.note, warn_only=True))

        initial, trajectory = self.run_evolution(profile)
        self.record_trajectory(trajectory)
        scale = profile.sigma_scale / profile.outer_radius ** 2

        initial_slope = vacuum_slope(initial)
        self.values["initial_vacuum_slope"] = initial_slope
        self.add_check(make_check("初期データの物理的真空条件", math.isfinite(initial_slope) and initial_slope < 0.0,
                                  initial_slope, "< 0"))

        times = trajectory.times
        energies = np.array([report.total for report in trajectory.reports])
        fit = fit_decay_rate(times, energies, config.fit_window)
        self.fits["energy"] = fit
        self.values["delta_hat"] = fit.delta_hat
        self.add_check(make_check("エネルギー減衰率 δ̂", fit.delta_hat > 0.0, fit.delta_hat, "> 0"))
        self.add_check(at_least("エネルギーのフィット r²", fit.r_squared, MIN_ENERGY_R2))

        lo = int(np.argmin(np.abs(times - config.fit_start)))
        hi = int(np.argmin(np.abs(times - config.fit_end)))
        expected = math.exp(-fit.delta_hat * (times[hi] - times[lo]))
        self.add_check(within("E(t_hi)/E(t_lo) と e^{-δ̂Δt} の比", energies[hi] / energies[lo] / expected, 0.8, 1.2))

        self._check_pointwise(trajectory, fit)
        self._check_invariants(trajectory, scale)
        self._check_elliptic(profile, trajectory)
        self._check_spectrum(profile, fit)
        self._check_monotone(times, energies)

    def _check_pointwise(self, trajectory, energy_fit):
        pointwise = pointwise_decay_check(trajectory, self.config.fit_window)
        labels = {
            "velocity": "速度 max|u|",
            "boundary": "自由境界 |R(t)-R|",
            "density": "密度 max|ρ-ρ̄|/ρ̄",
            "boundary_speed": "境界の速さ |dR/dt|",
        }
        for name, label in labels.items():
            fit = getattr(pointwise, name)
            if fit is None:
                if name in ("velocity", "boundary"):
                    self.add_check(make_check(f"{label} の減衰", False, 0.0, "> 0", "系列が恒等的に 0 です"))
                continue
            self.fits[name] = fit
            self.values[f"{name}_delta"] = fit.delta_hat
            if name in ("velocity", "boundary"):
                self.add_check(make_check(f"{label} の減衰率", fit.delta_hat > 0.0, fit.delta_hat, "> 0"))
                self.add_check(at_least(f"{label} のフィット r²", fit.r_squared, MIN_POINTWISE_R2))
        if pointwise.boundary is not None:
            self.add_check(relative_close("自由境界の減衰率と δ̂/2", pointwise.boundary.delta_hat,
                                          energy_fit.delta_hat / 2.0, BOUNDARY_RATE_TOLERANCE))

    def _check_invariants(self, trajectory, scale):
        masses = np.array([row["mass"] for row in self.rows])
        drift = float(np.max(np.abs(masses - masses[0])) / masses[0])
        self.values["mass_drift"] = drift
        self.add_check(at_most("再構成した総質量の変化", drift, MAX_MASS_DRIFT))

        slopes = np.array([row["vacuum_slope"] for row in self.rows]) / scale
        lower, upper = SLOPE_BOUNDS
        self.add_check(within("真空境界の傾き/(Ā^{γ-1}/R²) の最小", float(np.min(slopes)), lower, upper))
        self.add_check(within("真空境界の傾き/(Ā^{γ-1}/R²) の最大", float(np.max(slopes)), lower, upper))

        ratios = [report.sup_norm / report.total for report in trajectory.reports if report.total > 0.0]
        if ratios:
            self.values["sup_norm_ratio_max"] = float(max(ratios))
            self.add_check(make_check("sup ノルム/E の最大", math.isfinite(max(ratios)), float(max(ratios)), "finite"))

    def _check_elliptic(self, profile, trajectory):
        config = self.config
        ratio = elliptic_ratio(trajectory)
        first = ratio.first_after(config.fit_start)
        self.values["elliptic_ratio_max"] = ratio.max_ratio
        if first is None or not first > 0.0:
            self.add_check(make_check("楕円型評価の比", False, ratio.max_ratio, "< 10 × 初期値", "遷移後の標本がありません"))
        else:
            self.add_check(make_check("楕円型評価の比 E_{0,1}/(E_0+E_1)",
                                      math.isfinite(ratio.max_ratio) and ratio.max_ratio < ELLIPTIC_GROWTH * first,
                                      ratio.max_ratio, f"< {ELLIPTIC_GROWTH:g} × {first:.6g}"))
        if config.compare_mesh:
            _, fine = self.run_evolution(profile, config.compare_n_cells)
            fine_ratio = elliptic_ratio(fine)
            self.values["elliptic_ratio_max_fine"] = fine_ratio.max_ratio
            self.add_check(relative_close(f"楕円型評価の比 N={config.n_cells} と N={config.compare_n_cells}",
                                          fine_ratio.max_ratio, ratio.max_ratio, ELLIPTIC_MESH_TOLERANCE))

    def _check_spectrum(self, profile, energy_fit):
        config = self.config
        try:
            operator = assemble_linearized(profile, self.build_grid(profile), config.gravity_enabled)
            self.spectrum = eigen_modes(operator, config.n_keep, config.weight_floor)
            delta_pred = predicted_delta(self.spectrum)
        except CorevacError as e:
            check = error_check("線形スペクトルとの整合", e)
            check["status"] = "Warning"
            self.add_check(check)
            return
        self.values["predicted_delta"] = delta_pred
        self.add_check(relative_close("δ̂ と予測減衰率 δ_pred", energy_fit.delta_hat, delta_pred,
                                      config.delta_tolerance, warn_only=True))

    def _check_monotone(self, times, energies):
        after = energies[times > TRANSIENT_TIME]
        increases = int(np.count_nonzero(after[1:] > after[:-1] * (1.0 + 1e-12)))
        self.values["energy_increases"] = increases
        self.add_check(make_check("遷移後の全エネルギーの単調減少", increases == 0, float(increases), "== 0",
                                  warn_only=True))
