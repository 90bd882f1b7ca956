#!/usr/bin/env python3
"""
平衡解の定常性の確認

摂動なしの平衡状態を時間発展させ、ζ が丸め誤差の範囲で 0 のままであることを確かめます。
"""
import numpy as np

from core.preset import BasePreset
from utils.parser import at_most, make_check

MAX_ZETA = 1e-10
MAX_ENERGY = 1e-18


class StationarityPreset(BasePreset):
    """定常性プリセット"""

    name = "stationarity"
    description = "摂動なしの平衡状態が t_end まで定常に保たれることを確認"

    def execute(self):
        profile = self.build_equilibrium()
        self.values["outer_radius"] = profile.outer_radius
        self.values["total_mass"] = profile.total_mass

        _, trajectory = self.run_evolution(profile)
        self.record_trajectory(trajectory)

        max_zeta = max(float(np.max(np.abs(state.zeta))) for state in trajectory.states)
        max_energy = max(report.total for report in trajectory.reports)
        pinned = all(state.zeta[0] == 0.0 and state.zeta_t[0] == 0.0 for state in trajectory.states)

        self.add_check(at_most("最大変位 max|ζ|", max_zeta, MAX_ZETA))
        self.add_check(at_most("全エネルギー E(t)", max_energy, MAX_ENERGY))
        self.add_check(make_check("コア表面での固定 ζ(r₀)=ζ_t(r₀)=0", pinned, float(pinned), "== 1"))
