#!/usr/bin/env python3
"""
自己重力を含む Euler-Poisson 平衡の確認

弱い自己重力 G で平衡方程式を積分し、G = 0 の陽的解の半径と比較します。
"""
from core.preset import BasePreset
from physics.equilibrium import GasParameters, equilibrium_density, poisson_from_mass, solve_poisson_equilibrium
from utils.parser import at_most, make_check, relative_close, within

MAX_RESIDUAL = 1e-8
MASS_INVERSION_TOLERANCE = 1e-6
# G を半分にした時の R_G - R の比 (G について1次なら 2)
FIRST_ORDER_BOUNDS = (1.7, 2.3)


class PoissonEquilibriumPreset(BasePreset):
    """Euler-Poisson 平衡プリセット"""

    name = "poisson-equilibrium"
    description = "弱い自己重力の平衡解が陽的解の半径を再現し、ODE 残差が小さいことを確認"

    def execute(self):
        config = self.config
        gas = config.gas
        no_gravity = GasParameters(gas.gamma, gas.pressure_const, gas.core_gravity, gas.core_radius)
        reference = self.build_equilibrium(no_gravity)
        central_density = config.central_density or equilibrium_density(reference, gas.core_radius)
        self.values["central_density"] = central_density
        self.values["closed_form_radius"] = reference.outer_radius

        profile = solve_poisson_equilibrium(gas, central_density, config.radius_cap_factor)
        self.values["first_zero_radius"] = profile.first_zero_radius
        self.values["total_mass"] = profile.total_mass
        self.add_check(relative_close("R_G と陽的解の半径", profile.first_zero_radius, reference.outer_radius,
                                      config.radius_tolerance))
        self.add_check(at_most("ODE 残差の最大", profile.max_residual, MAX_RESIDUAL))

        half_gas = GasParameters(gas.gamma, gas.pressure_const, gas.core_gravity, gas.core_radius,
                                 0.5 * gas.self_gravity_const)
        half = solve_poisson_equilibrium(half_gas, central_density, config.radius_cap_factor)
        shift_full = profile.first_zero_radius - reference.outer_radius
        shift_half = half.first_zero_radius - reference.outer_radius
        if gas.self_gravity_const > 0.0 and shift_half != 0.0:
            order_ratio = shift_full / shift_half
            self.values["first_order_ratio"] = order_ratio
            self.add_check(within("G→0 での1次収束 (R_G(G)-R)/(R_G(G/2)-R)", order_ratio, *FIRST_ORDER_BOUNDS,
                                  warn_only=True))

        ladder = [solve_poisson_equilibrium(gas, factor * central_density, config.radius_cap_factor).total_mass
                  for factor in (0.5, 1.0, 2.0)]
        increasing = all(b > a for a, b in zip(ladder, ladder[1:]))
        self.add_check(make_check("総質量が中心密度について単調増加", increasing, ladder[-1] - ladder[0], "> 0"))

        inverted = poisson_from_mass(gas, profile.total_mass, config.radius_cap_factor)
        self.values["inverted_central_density"] = inverted.central_density
        self.add_check(relative_close("質量から求めた中心密度", inverted.central_density, central_density,
                                      MASS_INVERSION_TOLERANCE))
