#!/usr/bin/env python3
"""
境界近傍での Hardy 不等式の数値的な確認
"""
import math

from core.preset import BasePreset
from physics.diagnostics import hardy_refinement, hardy_test_family
from utils.parser import at_most, make_check

MAX_CHANGE = 0.05


class HardyPreset(BasePreset):
    """Hardy 不等式プリセット"""

    name = "hardy"
    description = "試験関数 {1, σ, (R-y)²} で Hardy 比が有限かつ格子細分化で安定なことを確認"

    def execute(self):
        config = self.config
        profile = self.build_equilibrium()
        family = hardy_test_family(profile)
        for k in config.hardy_k_values:
            for name, test_fn in family.items():
                result = hardy_refinement(profile, k, test_fn, config.n_cells, config.grading_power)
                label = f"k={k:g}, F={name}"
                self.values[f"ratio ({label})"] = result.fine.ratio
                self.add_check(make_check(f"Hardy 比が有限 ({label})", math.isfinite(result.fine.ratio),
                                          result.fine.ratio, "finite"))
                self.add_check(at_most(f"Hardy 比の細分化による変化 ({label})", result.relative_change, MAX_CHANGE))
