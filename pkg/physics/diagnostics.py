#!/usr/bin/env python3
"""
重み付きエネルギー汎関数と各種診断

E_j, E_{j,i}, D_j の計算、減衰率のフィット、Hardy不等式と楕円型評価の数値的な確認、
物理的真空条件の傾き、Euler座標への再構成を提供します。
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.integrate import simpson

from physics.errors import (DegenerateDenominator, DomainError, HypothesisViolated, InsufficientSamples,
                            JacobianDegenerate, NonpositiveEnergy, OrderUnavailable)
from physics.solver import acceleration, operator_derivative
from physics.stencils import build_grid, fd_weights
from physics.equilibrium import sigma_and_slope
from utils.file_utils import log_message

MAX_TIME_ORDER = 2
DEFAULT_ORDER_CAP = 3
MIN_FIT_SAMPLES = 10
DENOMINATOR_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class EnergyReport:
    """
    ある時刻での重み付き汎関数

    Attributes:
        time (float): 時刻
        e_j (ndarray): E_j (j = 0..j_max)
        e_ji (ndarray): E_{j,i} を [j, i] に格納した行列 (未定義の要素は 0)
        d_j (ndarray): D_j (j = 0..j_max)
        total (float): E(t) = Σ E_j + Σ E_{j,i}
        dissipation_total (float): Σ D_j
        j_max (int): 時間微分の最高階数
        regularity_order (int): 解析で必要な微分の階数 n = 4 + [α]
        sup_norm (float): max|ζ|² + max|ζ_t|² + max|ζ_tt|² + max|ζ_y|² + max|ζ_ty|²
    """

    time: float
    e_j: np.ndarray
    e_ji: np.ndarray
    d_j: np.ndarray
    total: float
    dissipation_total: float
    j_max: int
    regularity_order: int
    sup_norm: float

    @property
    def order_cap(self):
        return self.e_ji.shape[1] - 1


@dataclass(frozen=True)
class DecayFit:
    """
    (t, ln E) の最小二乗直線

    Attributes:
        delta_hat (float): 減衰率 δ̂ (= -傾き)
        intercept (float): 窓の開始時刻での ln E
        r_squared (float): 決定係数
        window (tuple): (t_lo, t_hi)
        n_samples (int): 窓内の標本数
    """

    delta_hat: float
    intercept: float
    r_squared: float
    window: tuple
    n_samples: int


@dataclass(frozen=True, eq=False)
class EulerianFields:
    """Euler座標に戻した密度・速度と自由境界の位置"""

    radii: np.ndarray
    density: np.ndarray
    velocity: np.ndarray
    boundary_radius: float


@dataclass(frozen=True)
class EllipticRatio:
    """
    E_{0,1}/(E_0+E_1) の時系列

    Attributes:
        max_ratio (float): 最大値 (標本がなければ 0)
        times (tuple): 分母が正だった時刻
        ratios (tuple): 各時刻での比
    """

    max_ratio: float
    times: tuple = ()
    ratios: tuple = ()

    @property
    def n_samples(self):
        return len(self.ratios)

    def first_after(self, t_lo):
        """t_lo 以降の最初の比 (なければ None)"""
        for t, ratio in zip(self.times, self.ratios):
            if t >= t_lo:
                return ratio
        return None


@dataclass(frozen=True)
class HardyResult:
    lhs: float
    rhs: float
    ratio: float


@dataclass(frozen=True)
class HardyRefinement:
    """格子 N と 2N での Hardy 比の比較"""

    coarse: HardyResult
    fine: HardyResult
    relative_change: float


@dataclass
class PointwiseDecay:
    """
    各点収束のフィット結果 (系列が恒等的に 0 のときは None)

    Attributes:
        velocity (DecayFit): max|u| の包絡線
        boundary (DecayFit): |R(t) - R| の包絡線
        density (DecayFit): max|ρ - ρ̄|/ρ̄ の包絡線
        boundary_speed (DecayFit): |dR/dt| の包絡線
        trivial (bool): 全系列が 0 でフィットを省略したかどうか
        series (dict): フィットに使った元の系列
    """

    velocity: DecayFit = None
    boundary: DecayFit = None
    density: DecayFit = None
    boundary_speed: DecayFit = None
    trivial: bool = False
    series: dict = field(default_factory=dict)


def regularity_order(alpha):
    return 4 + int(math.floor(alpha + 1e-12))


def time_derivatives(state, j_max=MAX_TIME_ORDER):
    """
    [ζ, ζ_t, ..., ∂_t^{j_max+1}ζ] を返す

    ζ_tt は方程式から、ζ_ttt は方程式を時間微分した
    ζ_ttt = -ζ_tt + N'(ζ)[ζ_t] から求めます。
    """
    if j_max > MAX_TIME_ORDER or j_max < 0:
        raise OrderUnavailable("時間微分は 2 階までです", j_max=j_max, limit=MAX_TIME_ORDER)
    fields = [state.zeta, state.zeta_t]
    if j_max >= 1:
        fields.append(acceleration(state))
    if j_max >= 2:
        zeta_ttt = -fields[2] + operator_derivative(state, state.zeta_t)
        zeta_ttt[0] = 0.0
        fields.append(zeta_ttt)
    return fields


def _weights(state):
    background = state.background
    alpha = state.profile.alpha
    return state.grid.nodes, background.sigma, alpha


def _energy_from_fields(state, fields, j):
    y, sigma, alpha = _weights(state)
    grid = state.grid
    a = fields[j]
    b = fields[j + 1]
    ya_y = y * (grid.d1 @ a)
    energy = grid.integrate(y ** 4 * sigma ** alpha * (a ** 2 + b ** 2)
                            + y ** 2 * sigma ** (alpha + 1.0) * (a ** 2 + ya_y ** 2))
    dissipation = grid.integrate(y ** 4 * sigma ** alpha * b ** 2
                                 + y ** 2 * sigma ** (alpha + 1.0) * (a ** 2 + ya_y ** 2))
    return energy, dissipation


def _energy_ji_from_fields(state, fields, j, i):
    y, sigma, alpha = _weights(state)
    grid = state.grid
    d_i = grid.derivative(fields[j], i)
    d_next = grid.d1 @ d_i
    return grid.integrate(y ** 2 * sigma ** (alpha + i - 1.0) * d_i ** 2
                          + y ** 4 * sigma ** (alpha + i + 1.0) * d_next ** 2)


def energy_j(state, j, j_max=MAX_TIME_ORDER):
    """
    E_j = ∫[y⁴σ^α|∂_t^j(ζ,ζ_t)|² + y²σ^{α+1}|∂_t^j(ζ,yζ_y)|²]dy

    Parameters:
        state (SimState): 状態
        j (int): 時間微分の階数 (0..j_max)
        j_max (int): 計算する最高階数 (≤ 2)

    Returns:
        float: E_j
    """
    if not 0 <= j <= j_max:
        raise OrderUnavailable("時間微分の階数が範囲外です", j=j, j_max=j_max)
    fields = time_derivatives(state, j)
    return _energy_from_fields(state, fields, j)[0]


def dissipation_j(state, j, j_max=MAX_TIME_ORDER):
    """D_j = ∫[y⁴σ^α|∂_t^{j+1}ζ|² + y²σ^{α+1}|∂_t^j(ζ,yζ_y)|²]dy"""
    if not 0 <= j <= j_max:
        raise OrderUnavailable("時間微分の階数が範囲外です", j=j, j_max=j_max)
    fields = time_derivatives(state, j)
    return _energy_from_fields(state, fields, j)[1]


def energy_ji(state, j, i, order_cap=DEFAULT_ORDER_CAP):
    """
    E_{j,i} = ∫[y²σ^{α+i-1}(∂_t^j∂_y^iζ)² + y⁴σ^{α+i+1}(∂_t^j∂_y^{i+1}ζ)²]dy

    Parameters:
        state (SimState): 状態
        j (int): 時間微分の階数 (≤ 2)
        i (int): 空間微分の階数 (≥ 1)
        order_cap (int): j + i の上限

    Returns:
        float: E_{j,i}
    """
    if i < 1 or j < 0 or j > MAX_TIME_ORDER or j + i > order_cap:
        raise OrderUnavailable("E_{j,i} の階数が範囲外です", j=j, i=i, order_cap=order_cap)
    fields = time_derivatives(state, max(j - 1, 0))
    return _energy_ji_from_fields(state, fields, j, i)


def energy_report(state, j_max=MAX_TIME_ORDER, order_cap=DEFAULT_ORDER_CAP):
    """
    ある時刻の全ての汎関数をまとめて計算する

    Parameters:
        state (SimState): 状態
        j_max (int): 時間微分の最高階数
        order_cap (int): E_{j,i} の j + i の上限

    Returns:
        EnergyReport: 汎関数の一覧
    """
    fields = time_derivatives(state, j_max)
    e_j = np.zeros(j_max + 1)
    d_j = np.zeros(j_max + 1)
    for j in range(j_max + 1):
        e_j[j], d_j[j] = _energy_from_fields(state, fields, j)

    e_ji = np.zeros((j_max + 1, order_cap + 1))
    for j in range(j_max + 1):
        for i in range(1, order_cap - j + 1):
            e_ji[j, i] = _energy_ji_from_fields(state, fields, j, i)

    grid = state.grid
    zeta_y = grid.d1 @ state.zeta
    zeta_ty = grid.d1 @ state.zeta_t
    zeta_tt = fields[2] if len(fields) > 2 else np.zeros_like(state.zeta)
    sup_norm = sum(float(np.max(np.abs(values))) ** 2
                   for values in (state.zeta, state.zeta_t, zeta_tt, zeta_y, zeta_ty))

    return EnergyReport(
        time=float(state.time),
        e_j=e_j,
        e_ji=e_ji,
        d_j=d_j,
        total=float(e_j.sum() + e_ji.sum()),
        dissipation_total=float(d_j.sum()),
        j_max=j_max,
        regularity_order=regularity_order(state.profile.alpha),
        sup_norm=sup_norm,
    )


def ellipticity(report):
    """1つのレポートから E_{0,1}/(E_0+E_1) を計算する"""
    if report.e_j.size < 2 or report.e_ji.shape[1] < 2:
        raise OrderUnavailable("E_1 と E_{0,1} が必要です", j_max=report.j_max)
    denominator = report.e_j[0] + report.e_j[1]
    if not denominator > DENOMINATOR_FLOOR:
        raise DegenerateDenominator("E_0+E_1 がアンダーフローしています", time=report.time)
    return float(report.e_ji[0, 1] / denominator)


def elliptic_ratio(trajectory):
    """
    軌道全体での E_{0,1}/(E_0+E_1) の最大値

    分母が 1e-300 以下の時刻は除外し、標本がなければ最大値 0 を返します。

    Parameters:
        trajectory (Trajectory): 時間発展の記録

    Returns:
        EllipticRatio: 最大値と時系列
    """
    times, ratios = [], []
    for report in trajectory.reports:
        try:
            ratio = ellipticity(report)
        except DegenerateDenominator:
            continue
        times.append(report.time)
        ratios.append(ratio)
    if not ratios:
        return EllipticRatio(max_ratio=0.0)
    return EllipticRatio(max_ratio=float(max(ratios)), times=tuple(times), ratios=tuple(ratios))


def _boundary_half_integral(nodes, sigma, power, integrand, start):
    """
    ∫_{start}^R σ^power·g dy (g = integrand)

    内部のセルは台形則、σ が 0 になる最後のセルでは σ ≈ s(R-y) として積分します。
    """
    mask = nodes > start
    y = np.concatenate(([start], nodes[mask]))
    g = np.concatenate(([np.interp(start, nodes, integrand)], integrand[mask]))
    sig = np.concatenate(([np.interp(start, nodes, sigma)], sigma[mask]))

    body = sig[:-1] ** power * g[:-1]
    inner = 0.0
    if len(y) > 2:
        inner = float(np.sum(0.5 * (body[:-1] + body[1:]) * np.diff(y[:-1])))
    h = y[-1] - y[-2]
    slope = sig[-2] / h
    g_avg = 0.5 * (g[-2] + g[-1])
    last = g_avg * slope ** power * h ** (power + 1.0) / (power + 1.0)
    return inner + last


def hardy_check(profile, grid, k, values, derivative):
    """
    境界側半区間 I_b = [(R+r₀)/2, R) での Hardy 不等式の両辺を評価する

    lhs = ∫σ^{k-2}F², rhs = ∫σ^k(F² + F_y²)

    Parameters:
        profile (EquilibriumProfile): 平衡解
        grid (Grid): 格子
        k (float): 指数 (> 1)
        values (ndarray): 節点での F
        derivative (ndarray): 節点での F_y

    Returns:
        HardyResult: (lhs, rhs, lhs/rhs)。F ≡ 0 なら全て 0
    """
    if not k > 1.0:
        raise DomainError("Hardy 不等式の指数は 1 より大きい必要があります", k=k)
    values = np.asarray(values, dtype=float)
    derivative = np.asarray(derivative, dtype=float)
    if not np.any(values) and not np.any(derivative):
        return HardyResult(lhs=0.0, rhs=0.0, ratio=0.0)

    nodes = grid.nodes
    sigma, _ = sigma_and_slope(profile, nodes)
    sigma[-1] = 0.0
    start = 0.5 * (profile.outer_radius + profile.core_radius)
    lhs = _boundary_half_integral(nodes, sigma, k - 2.0, values ** 2, start)
    rhs = _boundary_half_integral(nodes, sigma, k, values ** 2 + derivative ** 2, start)
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        raise HypothesisViolated("Hardy 不等式の積分が有限ではありません", k=k, lhs=lhs, rhs=rhs)
    ratio = lhs / rhs if rhs > 0.0 else math.inf
    return HardyResult(lhs=lhs, rhs=rhs, ratio=ratio)


def hardy_test_family(profile):
    """
    Hardy 確認用の試験関数 {1, σ, (R-y)²}

    Returns:
        dict: 名前 -> y から (F, F_y) を返す関数
    """
    big_r = profile.outer_radius

    def one(y):
        return np.ones_like(y), np.zeros_like(y)

    def sigma(y):
        value, slope = sigma_and_slope(profile, y)
        return np.clip(value, 0.0, None), slope

    def gap_squared(y):
        return (big_r - y) ** 2, -2.0 * (big_r - y)

    return {"one": one, "sigma": sigma, "gap_squared": gap_squared}


def hardy_refinement(profile, k, test_fn, n_cells, grading_power=2.0):
    """
    格子 N と 2N で Hardy 比を比較する

    右辺が細分化で2倍を超えて増えるか、比が有限でなければ発散とみなします。
    """
    results = []
    for n in (n_cells, 2 * n_cells):
        grid = build_grid(profile, n, grading_power)
        values, derivative = test_fn(grid.nodes)
        results.append(hardy_check(profile, grid, k, values, derivative))
    coarse, fine = results
    if fine.rhs > 2.0 * coarse.rhs or not math.isfinite(fine.ratio):
        raise HypothesisViolated("細分化で右辺が発散しています", k=k, coarse=coarse.rhs, fine=fine.rhs)
    change = abs(fine.ratio - coarse.ratio) / coarse.ratio if coarse.ratio > 0.0 else 0.0
    return HardyRefinement(coarse=coarse, fine=fine, relative_change=change)


def fit_decay_rate(times, energies, window):
    """
    (t, ln E) に最小二乗直線を当てはめて減衰率を求める

    Parameters:
        times (array-like): 時刻
        energies (array-like): 各時刻の値
        window (tuple): (t_lo, t_hi)

    Returns:
        DecayFit: フィット結果 (E が一定なら δ̂ = 0, r² = 0)
    """
    t_lo, t_hi = float(window[0]), float(window[1])
    if not t_lo < t_hi:
        raise DomainError("フィット窓は t_lo < t_hi である必要があります", t_lo=t_lo, t_hi=t_hi)
    t = np.asarray(times, dtype=float)
    e = np.asarray(energies, dtype=float)
    tol = 1e-9 * max(1.0, abs(t_hi))
    mask = (t >= t_lo - tol) & (t <= t_hi + tol)
    n = int(np.count_nonzero(mask))
    if n < MIN_FIT_SAMPLES:
        raise InsufficientSamples("フィット窓内の標本が不足しています", n_samples=n, required=MIN_FIT_SAMPLES)
    t_win = t[mask]
    e_win = e[mask]
    if np.any(e_win <= 0.0):
        raise NonpositiveEnergy("非正の値を対数フィットできません", minimum=float(np.min(e_win)))

    log_e = np.log(e_win)
    if np.ptp(log_e) == 0.0:
        return DecayFit(delta_hat=0.0, intercept=float(log_e[0]), r_squared=0.0,
                        window=(t_lo, t_hi), n_samples=n)
    fit = stats.linregress(t_win, log_e)
    return DecayFit(
        delta_hat=float(-fit.slope),
        intercept=float(fit.intercept + fit.slope * t_lo),
        r_squared=float(fit.rvalue ** 2),
        window=(t_lo, t_hi),
        n_samples=n,
    )


def _jacobian(state):
    y = state.grid.nodes
    w = 1.0 + state.zeta
    jac = w + y * (state.grid.d1 @ state.zeta)
    if np.any(jac <= 0.0) or np.any(w <= 0.0):
        k = int(np.argmin(jac))
        raise JacobianDegenerate("ヤコビアンが正ではありません", y=float(y[k]), jacobian=float(jac[k]))
    return w, jac


def eulerian_reconstruct(state):
    """
    Lagrange 座標の解から Euler 座標の量を再構成する

    r = y(1+ζ), ρ = ρ̄/((1+ζ)²(1+ζ+yζ_y)), u = yζ_t, R(t) = R(1+ζ(R,t))
    """
    w, jac = _jacobian(state)
    y = state.grid.nodes
    density = state.background.rho_bar / (w ** 2 * jac)
    density[-1] = 0.0
    return EulerianFields(
        radii=y * w,
        density=density,
        velocity=y * state.zeta_t,
        boundary_radius=float(state.profile.outer_radius * w[-1]),
    )


def eulerian_mass(fields):
    """再構成した場から総質量 4π∫ρr²dr を計算する"""
    return 4.0 * math.pi * float(simpson(fields.density * fields.radii ** 2, x=fields.radii))


def vacuum_slope(state):
    """
    自由境界での ρ^{γ-1} の r 方向の傾き (片側6点の差分)

    物理的真空では有限かつ負になります。
    """
    w, jac = _jacobian(state)
    gamma = state.profile.params.gamma
    radii = state.grid.nodes * w
    enthalpy = state.background.sigma / (w ** 2 * jac) ** (gamma - 1.0)
    weights = fd_weights(radii[-1], radii[-6:], 1)
    return float(weights[:, 1] @ enthalpy[-6:])


def _envelope(series):
    # 後ろ向きの累積最大値: max_{s ≥ t}|x(s)|
    return np.maximum.accumulate(np.abs(series)[::-1])[::-1]


def pointwise_series(trajectory):
    """
    各スナップショットでの max|u|, |R(t)-R|, max|ρ-ρ̄|/ρ̄, |dR/dt| の系列
    """
    velocity, boundary, density, speed = [], [], [], []
    for state in trajectory.states:
        fields = eulerian_reconstruct(state)
        big_r = state.profile.outer_radius
        rho_bar = state.background.rho_bar
        interior = rho_bar > 1e-10 * np.max(rho_bar)
        velocity.append(float(np.max(np.abs(fields.velocity))))
        boundary.append(abs(fields.boundary_radius - big_r))
        w, jac = _jacobian(state)
        deviation = np.abs(1.0 / (w ** 2 * jac) - 1.0)[interior]
        density.append(float(np.max(deviation)) if deviation.size else 0.0)
        speed.append(abs(big_r * float(state.zeta_t[-1])))
    return {
        "velocity": np.array(velocity),
        "boundary": np.array(boundary),
        "density": np.array(density),
        "boundary_speed": np.array(speed),
    }


def pointwise_decay_check(trajectory, window):
    """
    速度・自由境界・密度の各点収束を指数フィットで確認する

    振動する系列は後ろ向きの累積最大値 (包絡線) をフィットします。

    Parameters:
        trajectory (Trajectory): 減衰実験の軌道
        window (tuple): フィット窓 (t_lo, t_hi)

    Returns:
        PointwiseDecay: 各系列の DecayFit
    """
    series = pointwise_series(trajectory)
    times = trajectory.times
    t_lo, t_hi = window
    in_window = (times >= t_lo) & (times <= t_hi)
    result = PointwiseDecay(series=series)
    if all(not np.any(values[in_window]) for values in series.values()):
        log_message("DEBUG", "各点収束: 全ての系列が 0 のためフィットを省略します")
        result.trivial = True
        return result
    for name, values in series.items():
        envelope = _envelope(values)
        if not np.any(envelope[in_window]):
            continue
        setattr(result, name, fit_decay_rate(times, envelope, window))
    return result
