#!/usr/bin/env python3
"""
固体コアを持つ減衰付きEuler方程式の平衡解

陽的な平衡密度、質量と半径の関係とその逆問題、安定性定理の半径条件、
および自己重力を含むEuler-Poisson平衡のODE解法を提供します。
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import fixed_quad, quad, solve_ivp
from scipy.optimize import brentq

from physics.errors import DomainError, MassExceedsThreshold, NoZeroFound, NonConvergence
from utils.file_utils import log_message


@dataclass(frozen=True)
class GasParameters:
    """
    気体とコアの物理定数

    Attributes:
        gamma (float): 断熱指数 γ (> 1)
        pressure_const (float): p = Aρ^γ の定数 A
        core_gravity (float): コアの重力定数 g₀ = G₀M₀
        core_radius (float): コア半径 r₀
        self_gravity_const (float): 自己重力定数 G (0 で無効)
    """

    gamma: float
    pressure_const: float = 1.0
    core_gravity: float = 1.0
    core_radius: float = 1.0
    self_gravity_const: float = 0.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise DomainError("gamma は 1 より大きい必要があります", gamma=self.gamma)
        if not self.pressure_const > 0.0:
            raise DomainError("pressure_const は正である必要があります", pressure_const=self.pressure_const)
        if not self.core_gravity > 0.0:
            raise DomainError("core_gravity は正である必要があります", core_gravity=self.core_gravity)
        if not self.core_radius > 0.0:
            raise DomainError("core_radius は正である必要があります", core_radius=self.core_radius)
        if not self.self_gravity_const >= 0.0:
            raise DomainError("self_gravity_const は非負である必要があります",
                              self_gravity_const=self.self_gravity_const)

    @property
    def alpha(self):
        return 1.0 / (self.gamma - 1.0)


@dataclass(frozen=True)
class EquilibriumProfile:
    """
    陽的な平衡解 ρ̄(r) = Ā(1/r - 1/R)^{1/(γ-1)}

    Attributes:
        params (GasParameters): 物理定数
        outer_radius (float): 真空境界の半径 R
        abar (float): 係数 Ā
        alpha (float): α = 1/(γ-1)
        total_mass (float): 大気の総質量 M
        mass_star (float): γ < 4/3 での質量上限 M* (それ以外は +inf)
    """

    params: GasParameters
    outer_radius: float
    abar: float
    alpha: float
    total_mass: float
    mass_star: float

    @property
    def core_radius(self):
        return self.params.core_radius

    @property
    def sigma_scale(self):
        """Ā^{γ-1}"""
        return self.abar ** (self.params.gamma - 1.0)


@dataclass(frozen=True, eq=False)
class PoissonEquilibriumProfile:
    """
    自己重力を含む平衡解 ρ̄*(r) の数値解

    Attributes:
        params (GasParameters): 物理定数
        central_density (float): コア表面での密度 ρ̄*(r₀)
        first_zero_radius (float): 密度の最初の零点 R_G
        radii (ndarray): 適応メッシュの節点
        density_samples (ndarray): 節点での ρ̄*
        enclosed_mass (ndarray): 節点での ∫_{r₀}^r ρ̄* τ² dτ
        total_mass (float): 大気の総質量 M'
        residuals (ndarray): 各メッシュ区間でのODE残差
    """

    params: GasParameters
    central_density: float
    first_zero_radius: float
    radii: np.ndarray
    density_samples: np.ndarray
    enclosed_mass: np.ndarray
    total_mass: float
    residuals: np.ndarray = field(repr=False)

    @property
    def max_residual(self):
        return float(np.max(self.residuals)) if self.residuals.size else 0.0


def compute_abar(params):
    """
    平衡密度の係数 Ā = ((γ-1)g₀/(γA))^{1/(γ-1)} を計算する

    Parameters:
        params (GasParameters): 物理定数

    Returns:
        float: Ā
    """
    gamma = params.gamma
    base = (gamma - 1.0) * params.core_gravity / (gamma * params.pressure_const)
    return base ** (1.0 / (gamma - 1.0))


def mass_star(params):
    """
    γ < 4/3 の場合の質量上限 M* (γ ≥ 4/3 では +inf)
    """
    gamma = params.gamma
    if gamma >= 4.0 / 3.0:
        return math.inf
    abar = compute_abar(params)
    exponent = -(4.0 - 3.0 * gamma) / (gamma - 1.0)
    return 4.0 * math.pi * abar * (gamma - 1.0) / (4.0 - 3.0 * gamma) * params.core_radius ** exponent


def _mass_integral(params, abar, outer_radius):
    r0 = params.core_radius
    if outer_radius <= r0:
        return 0.0
    alpha = params.alpha
    # (1/r - 1/R)^α = (R - r)^α (rR)^{-α}; 端点の特異性は QAWS の重みで扱う
    value, _ = quad(lambda r: r ** 2 * (r * outer_radius) ** (-alpha), r0, outer_radius,
                    weight="alg", wvar=(0.0, alpha), epsabs=0.0, epsrel=1e-10, limit=200)
    return 4.0 * math.pi * abar * value


def build_profile(params, outer_radius):
    """
    外半径 R を指定して平衡解を構築する

    Parameters:
        params (GasParameters): 物理定数
        outer_radius (float): 外半径 R (> r₀)

    Returns:
        EquilibriumProfile: 平衡解
    """
    if not outer_radius > params.core_radius:
        raise DomainError("外半径はコア半径より大きい必要があります",
                          outer_radius=outer_radius, core_radius=params.core_radius)
    abar = compute_abar(params)
    return EquilibriumProfile(
        params=params,
        outer_radius=float(outer_radius),
        abar=abar,
        alpha=params.alpha,
        total_mass=_mass_integral(params, abar, outer_radius),
        mass_star=mass_star(params),
    )


def equilibrium_density(profile, r):
    """
    平衡密度 ρ̄(r) を評価する (r ≥ R では 0)

    Parameters:
        profile (EquilibriumProfile): 平衡解
        r (float or ndarray): 半径 (≥ r₀)

    Returns:
        float or ndarray: 密度
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < profile.core_radius):
        raise DomainError("半径がコア半径より小さい値です", r_min=float(np.min(r_arr)))
    s = np.clip(1.0 / r_arr - 1.0 / profile.outer_radius, 0.0, None)
    density = profile.abar * s ** profile.alpha
    return float(density) if np.ndim(r) == 0 else density


def sigma_and_slope(profile, y):
    """
    σ(y) = Ā^{γ-1}(1/y - 1/R) とその傾き σ_y = -Ā^{γ-1}/y² を返す

    Parameters:
        profile (EquilibriumProfile): 平衡解
        y (float or ndarray): [r₀, R] のラベル

    Returns:
        tuple: (σ, σ_y)
    """
    y_arr = np.asarray(y, dtype=float)
    r0 = profile.core_radius
    big_r = profile.outer_radius
    tol = 1e-12 * big_r
    if np.any(y_arr < r0 - tol) or np.any(y_arr > big_r + tol):
        raise DomainError("y が [r₀, R] の範囲外です",
                          y_min=float(np.min(y_arr)), y_max=float(np.max(y_arr)))
    scale = profile.sigma_scale
    sigma = np.clip(scale * (1.0 / y_arr - 1.0 / big_r), 0.0, None)
    slope = -scale / y_arr ** 2
    if np.ndim(y) == 0:
        return float(sigma), float(slope)
    return sigma, slope


def total_mass(profile):
    """
    総質量 M = 4πĀ∫_{r₀}^R (1/r - 1/R)^{1/(γ-1)} r² dr を適応求積で計算する
    """
    return _mass_integral(profile.params, profile.abar, profile.outer_radius)


def mass_radius_curve(params, radii):
    """
    質量-半径関係 M(R) を複数の半径で評価する

    Parameters:
        params (GasParameters): 物理定数
        radii (iterable): 外半径のリスト

    Returns:
        ndarray: 各半径での総質量
    """
    abar = compute_abar(params)
    return np.array([_mass_integral(params, abar, float(radius)) for radius in radii])


def radius_from_mass(params, target_mass, max_iter=200):
    """
    総質量から外半径 R を求める (質量は R について狭義単調増加)

    Parameters:
        params (GasParameters): 物理定数
        target_mass (float): 目標質量 (> 0)
        max_iter (int): 反復回数の上限

    Returns:
        EquilibriumProfile: 目標質量を持つ平衡解
    """
    if not target_mass > 0.0:
        raise DomainError("目標質量は正である必要があります", target_mass=target_mass)
    limit = mass_star(params)
    if target_mass >= limit:
        raise MassExceedsThreshold("目標質量が上限 M* 以上です",
                                   target_mass=target_mass, mass_star=limit)

    r0 = params.core_radius
    abar = compute_abar(params)

    def mass_gap(radius):
        return _mass_integral(params, abar, radius) - target_mass

    lower = r0 * (1.0 + 1e-9)
    if mass_gap(lower) >= 0.0:
        return build_profile(params, lower)

    upper = 2.0 * r0
    doublings = 0
    while mass_gap(upper) < 0.0:
        upper *= 2.0
        doublings += 1
        if doublings > 80:
            raise NonConvergence("質量のブラケットに失敗しました", target_mass=target_mass, upper=upper)

    try:
        radius = brentq(mass_gap, lower, upper, xtol=1e-14 * r0, rtol=1e-14, maxiter=max_iter)
    except RuntimeError as e:
        raise NonConvergence(f"半径の反復が収束しません: {e}", target_mass=target_mass) from e

    log_message("DEBUG", f"radius_from_mass: M={target_mass:.6g} -> R={radius:.12g}")
    return build_profile(params, radius)


@dataclass(frozen=True)
class RadiusWindowCheck:
    """安定性定理の半径条件 r₀ < R ≤ 4r₀/(3-α) の判定結果"""

    passed: bool
    margin: float
    upper_bound: float
    note: str = ""


def check_radius_window(profile):
    """
    半径条件 r₀ < R ≤ 4r₀/(3-α) を判定する

    γ ≤ 4/3 (α ≥ 3) では条件が空なので注記付きで合格とします。

    Parameters:
        profile (EquilibriumProfile): 平衡解

    Returns:
        RadiusWindowCheck: 判定結果と余裕 4r₀/(3-α) - R
    """
    r0 = profile.core_radius
    big_r = profile.outer_radius
    alpha = profile.alpha
    if alpha >= 3.0:
        return RadiusWindowCheck(passed=big_r > r0, margin=math.inf, upper_bound=math.inf,
                                 note="gamma <= 4/3: radius window is vacuous")
    upper = 4.0 * r0 / (3.0 - alpha)
    return RadiusWindowCheck(passed=bool(r0 < big_r <= upper), margin=upper - big_r, upper_bound=upper)


def equilibrium_residual(profile, mesh):
    """
    平衡方程式 A(ρ̄^γ)_r + g₀ρ̄/r² = 0 の相対残差の最大値を解析式で評価する

    Parameters:
        profile (EquilibriumProfile): 平衡解
        mesh (iterable): (r₀, R) 内の評価点

    Returns:
        float: max |A(ρ̄^γ)_r + g₀ρ̄/r²| / (g₀ρ̄/r²)
    """
    params = profile.params
    r = np.atleast_1d(np.asarray(mesh, dtype=float))
    gamma = params.gamma
    s = 1.0 / r - 1.0 / profile.outer_radius
    rho = profile.abar * s ** profile.alpha
    # (ρ̄^γ)_r = -Ā^γ (α+1) s^α / r²
    pressure_gradient = -params.pressure_const * profile.abar ** gamma * (profile.alpha + 1.0) * s ** profile.alpha / r ** 2
    gravity = params.core_gravity * rho / r ** 2
    return float(np.max(np.abs(pressure_gradient + gravity) / gravity))


def solve_poisson_equilibrium(params, central_density, radius_cap_factor=1e3, rtol=1e-12, atol=1e-14):
    """
    Euler-Poisson 平衡方程式
    A(ρ̄*^γ)_r = -ρ̄*/r² (g₀ + 4πG∫_{r₀}^r ρ̄* τ² dτ)
    をコア表面から外向きに積分し、密度の最初の零点 R_G を求める

    比エンタルピー h = Aγ/(γ-1) ρ^{γ-1} を未知数にすると零点近傍でも滑らかになります。

    Parameters:
        params (GasParameters): 物理定数 (γ ≥ 4/3)
        central_density (float): ρ̄*(r₀)
        radius_cap_factor (float): 積分の打ち切り半径 (r₀ の倍数)

    Returns:
        PoissonEquilibriumProfile: 数値平衡解
    """
    gamma = params.gamma
    if gamma < 4.0 / 3.0:
        raise DomainError("Euler-Poisson 平衡は γ ≥ 4/3 でのみ一意です", gamma=gamma)
    if not central_density > 0.0:
        raise DomainError("中心密度は正である必要があります", central_density=central_density)

    a_const = params.pressure_const
    g0 = params.core_gravity
    big_g = params.self_gravity_const
    r0 = params.core_radius
    alpha = params.alpha
    enthalpy_factor = a_const * gamma / (gamma - 1.0)

    def density_of(h):
        return (np.maximum(h, 0.0) / enthalpy_factor) ** alpha

    def rhs(r, state):
        h, m = state
        return [-(g0 + 4.0 * math.pi * big_g * m) / r ** 2, density_of(h) * r ** 2]

    def surface(r, state):
        return state[0]

    surface.terminal = True
    surface.direction = -1

    h0 = enthalpy_factor * central_density ** (gamma - 1.0)
    radius_cap = radius_cap_factor * r0
    sol = solve_ivp(rhs, (r0, radius_cap), [h0, 0.0], method="DOP853", rtol=rtol, atol=atol,
                    events=surface, dense_output=True)
    if sol.status == -1:
        raise NonConvergence(f"ODE積分に失敗しました: {sol.message}", central_density=central_density)
    if len(sol.t_events[0]) == 0:
        raise NoZeroFound("打ち切り半径までに密度が零になりません",
                          central_density=central_density, radius_cap=radius_cap)

    radius_g = float(sol.t_events[0][0])
    radii = sol.t.copy()
    radii[-1] = radius_g
    enthalpy = sol.y[0].copy()
    enthalpy[-1] = 0.0
    enclosed = sol.y[1].copy()
    density = density_of(enthalpy)

    # 各区間で積分形の残差を評価する
    residuals = np.zeros(len(radii) - 1)
    for k in range(len(radii) - 1):
        a, b = radii[k], radii[k + 1]
        if b <= a:
            continue
        grav, _ = fixed_quad(lambda r: (g0 + 4.0 * math.pi * big_g * sol.sol(r)[1]) / r ** 2, a, b, n=10)
        mass, _ = fixed_quad(lambda r: density_of(sol.sol(r)[0]) * r ** 2, a, b, n=10)
        residuals[k] = max(abs(enthalpy[k + 1] - enthalpy[k] + grav),
                           abs(enclosed[k + 1] - enclosed[k] - mass))

    profile = PoissonEquilibriumProfile(
        params=params,
        central_density=float(central_density),
        first_zero_radius=radius_g,
        radii=radii,
        density_samples=density,
        enclosed_mass=enclosed,
        total_mass=4.0 * math.pi * float(enclosed[-1]),
        residuals=residuals,
    )
    log_message("DEBUG", f"Poisson平衡: rho_c={central_density:.6g}, R_G={radius_g:.12g}, "
                         f"M'={profile.total_mass:.6g}, residual={profile.max_residual:.2e}")
    return profile


def poisson_from_mass(params, target_mass, radius_cap_factor=1e3):
    """
    中心密度を二分法で調整し、総質量 M' が目標値となる Euler-Poisson 平衡を求める

    Parameters:
        params (GasParameters): 物理定数
        target_mass (float): 目標質量 M'

    Returns:
        PoissonEquilibriumProfile: 数値平衡解
    """
    if not target_mass > 0.0:
        raise DomainError("目標質量は正である必要があります", target_mass=target_mass)

    def mass_gap(log_density):
        profile = solve_poisson_equilibrium(params, math.exp(log_density), radius_cap_factor)
        return profile.total_mass - target_mass

    # 自己重力なしの陽的解から初期ブラケットを作る
    no_gravity = GasParameters(params.gamma, params.pressure_const, params.core_gravity, params.core_radius)
    seed = equilibrium_density(radius_from_mass(no_gravity, target_mass), params.core_radius)
    lower = upper = math.log(seed)
    for _ in range(80):
        if mass_gap(lower) <= 0.0:
            break
        lower -= math.log(2.0)
    else:
        raise NonConvergence("中心密度の下側ブラケットに失敗しました", target_mass=target_mass)
    for _ in range(80):
        if mass_gap(upper) >= 0.0:
            break
        upper += math.log(2.0)
    else:
        raise NonConvergence("中心密度の上側ブラケットに失敗しました", target_mass=target_mass)

    if lower == upper:
        return solve_poisson_equilibrium(params, math.exp(lower), radius_cap_factor)
    try:
        log_density = brentq(mass_gap, lower, upper, xtol=1e-14, rtol=1e-14, maxiter=200)
    except RuntimeError as e:
        raise NonConvergence(f"中心密度の反復が収束しません: {e}", target_mass=target_mass) from e
    return solve_poisson_equilibrium(params, math.exp(log_density), radius_cap_factor)
