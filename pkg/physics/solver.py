#!/usr/bin/env python3
"""
Lagrange座標での摂動 ζ(y,t) の時間発展

η = y(1+ζ) を区分4次 Lagrange 要素で表し、ポテンシャル
    V(η) = Σ_g m_g [A q_g^{γ-1}/(γ-1) - g_g/η_g],  q = ρ̄y²/(η²η_y),  m = w ρ̄y²
の勾配と質量行列 M = ∫ρ̄y² φ_iφ_j dy を使った半離散方程式
    M(η_tt + η_t) = -(∇V(η) - ∇V(y))
を解きます。η(r₀) = r₀ は固定で、y = R では ρ̄ = 0 のため境界条件は自然に満たされます。
平衡の勾配を差し引くので ζ ≡ 0 は丸め誤差なしに静止状態になります。
"""
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy import linalg, sparse
from scipy.integrate import cumulative_simpson
from scipy.sparse.linalg import splu

from physics.equilibrium import equilibrium_density, sigma_and_slope
from physics.errors import AmplitudeTooLarge, CflViolation, CorevacError, DomainError, EvolutionError, JacobianDegenerate
from utils.file_utils import is_debug, log_message

DEFAULT_CFL = 0.4
DEFAULT_JACOBIAN_FLOOR = 0.1
MAX_AMPLITUDE = 0.05
# 減衰時間 (=1) に対する時間刻みの上限
MAX_DT = 0.1
COMPLEX_STEP = 1e-20
# 古典的 RK4 の虚軸上の安定限界
_RK4_IMAGINARY_LIMIT = 2.0 * math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class WeakForm:
    """
    Gauss 点で標本化したポテンシャル V(η) の係数

    Attributes:
        basis (ElementBasis): 要素の基底
        params (GasParameters): 気体定数
        load (ndarray): ρ̄y²
        mass (ndarray): 求積重み込みの ρ̄y²
        self_pull (ndarray): 4πG∫_{r₀}^y ρ̄τ²dτ
    """

    basis: object
    params: object
    load: np.ndarray
    mass: np.ndarray
    self_pull: np.ndarray

    def pull(self, gravity_enabled):
        """η² を掛けた重力加速度 g₀ (+ 4πG m(y))"""
        if gravity_enabled and self.params.self_gravity_const > 0.0:
            return self.params.core_gravity + self.self_pull
        return self.params.core_gravity

    def _work(self, radius, slope):
        # m A q^{γ-1}
        exponent = self.params.gamma - 1.0
        return self.mass * self.params.pressure_const * (self.load / (radius ** 2 * slope)) ** exponent

    def gradient(self, radius, slope, pull):
        """
        節点値に対する ∇V

        Parameters:
            radius (ndarray): Gauss 点での η
            slope (ndarray): Gauss 点での η_y
            pull (float or ndarray): pull(gravity_enabled) の値

        Returns:
            ndarray: ∇V
        """
        work = self._work(radius, slope)
        along = -2.0 * work / radius + self.mass * pull / radius ** 2
        across = -work / slope
        return self.basis.values.T @ along + self.basis.slopes.T @ across

    def hessian(self, radius, slope, pull):
        """∇²V (対称化した csr_matrix)"""
        exponent = self.params.gamma - 1.0
        work = self._work(radius, slope)
        along = 2.0 * (2.0 * exponent + 1.0) * work / radius ** 2 - 2.0 * self.mass * pull / radius ** 3
        mixed = 2.0 * exponent * work / (radius * slope)
        across = (exponent + 1.0) * work / slope ** 2
        values = self.basis.values
        slopes = self.basis.slopes
        hessian = (values.T @ sparse.diags(along) @ values
                   + values.T @ sparse.diags(mixed) @ slopes
                   + slopes.T @ sparse.diags(mixed) @ values
                   + slopes.T @ sparse.diags(across) @ slopes)
        return (0.5 * (hessian + hessian.T)).tocsr()


@dataclass(frozen=True, eq=False)
class Background:
    """
    格子上に標本化した平衡量

    Attributes:
        profile (EquilibriumProfile): 平衡解
        grid (Grid): 格子
        sigma (ndarray): σ(y)
        sigma_y (ndarray): σ_y(y)
        rho_bar (ndarray): ρ̄(y)
        enclosed_mass (ndarray): ∫_{r₀}^y ρ̄ τ² dτ (Lagrange座標では時間によらない)
        weak_form (WeakForm): ポテンシャルの係数
        mass_matrix (csr_matrix): 質量行列 M
        mass_factor (SuperLU): 自由節点の M の LU 分解
        rest_force (ndarray): ∇V(y) (自己重力なし)
        rest_force_self_gravity (ndarray): ∇V(y) (自己重力あり)
    """

    profile: object
    grid: object
    sigma: np.ndarray
    sigma_y: np.ndarray
    rho_bar: np.ndarray
    enclosed_mass: np.ndarray
    weak_form: WeakForm
    mass_matrix: sparse.csr_matrix
    mass_factor: object
    rest_force: np.ndarray
    rest_force_self_gravity: np.ndarray

    def rest(self, gravity_enabled):
        if gravity_enabled and self.profile.params.self_gravity_const > 0.0:
            return self.rest_force_self_gravity
        return self.rest_force

    def solve_mass(self, rhs):
        """自由節点で M_ff x = rhs を解く (複素数は実部と虚部に分ける)"""
        if np.iscomplexobj(rhs):
            return (self.mass_factor.solve(np.ascontiguousarray(rhs.real))
                    + 1j * self.mass_factor.solve(np.ascontiguousarray(rhs.imag)))
        return self.mass_factor.solve(np.ascontiguousarray(rhs, dtype=float))

    @cached_property
    def max_frequency(self):
        """自己重力を除いた線形化作用素の最大振動数 √μ_max"""
        hessian = restoring_hessian(self)[1:, 1:].toarray()
        mass = self.mass_matrix[1:, 1:].toarray()
        top = len(mass) - 1
        values = linalg.eigh(hessian, mass, eigvals_only=True, subset_by_index=[top, top])
        return math.sqrt(max(float(values[0]), 0.0))


def build_background(profile, grid):
    """平衡量を格子上で一度だけ評価する"""
    y = grid.nodes
    sigma, sigma_y = sigma_and_slope(profile, y)
    sigma[-1] = 0.0
    rho_bar = equilibrium_density(profile, y)
    rho_bar[-1] = 0.0
    enclosed = cumulative_simpson(rho_bar * y ** 2, x=y, initial=0.0)

    basis = grid.basis
    points = basis.points
    load = equilibrium_density(profile, points) * points ** 2
    weak_form = WeakForm(
        basis=basis,
        params=profile.params,
        load=load,
        mass=basis.weights * load,
        self_pull=4.0 * math.pi * profile.params.self_gravity_const * (basis.values @ enclosed),
    )
    mass_matrix = (basis.values.T @ sparse.diags(weak_form.mass) @ basis.values).tocsr()
    radius = basis.values @ y
    slope = basis.slopes @ y
    return Background(
        profile=profile,
        grid=grid,
        sigma=sigma,
        sigma_y=sigma_y,
        rho_bar=rho_bar,
        enclosed_mass=enclosed,
        weak_form=weak_form,
        mass_matrix=mass_matrix,
        mass_factor=splu(mass_matrix[1:, 1:].tocsc()),
        rest_force=weak_form.gradient(radius, slope, weak_form.pull(False)),
        rest_force_self_gravity=weak_form.gradient(radius, slope, weak_form.pull(True)),
    )


@dataclass(frozen=True, eq=False)
class SimState:
    """
    時刻 t での摂動場

    Attributes:
        background (Background): 平衡量
        zeta (ndarray): ζ
        zeta_t (ndarray): ζ_t
        time (float): 時刻
        gravity_enabled (bool): 自己重力項を加えるかどうか
        jacobian_floor (float): η_y = 1+ζ+yζ_y の下限
    """

    background: Background
    zeta: np.ndarray
    zeta_t: np.ndarray
    time: float = 0.0
    gravity_enabled: bool = False
    jacobian_floor: float = DEFAULT_JACOBIAN_FLOOR

    @property
    def profile(self):
        return self.background.profile

    @property
    def grid(self):
        return self.background.grid

    @property
    def eta(self):
        """物理半径 η = y(1+ζ)"""
        return self.grid.nodes * (1.0 + self.zeta)


@dataclass
class Trajectory:
    """
    時間発展の記録

    Attributes:
        snapshot_times (list): スナップショット時刻
        states (list): SimState のスナップショット
        reports (list): 各スナップショットの EnergyReport
    """

    snapshot_times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    reports: list = field(default_factory=list)

    def append(self, state, report):
        self.snapshot_times.append(state.time)
        self.states.append(state)
        self.reports.append(report)

    @property
    def times(self):
        return np.asarray(self.snapshot_times, dtype=float)


def initial_state(profile, grid, gravity_enabled=False, jacobian_floor=DEFAULT_JACOBIAN_FLOOR):
    """
    平衡状態 ζ ≡ 0, ζ_t ≡ 0 を作る
    """
    background = build_background(profile, grid)
    zeros = np.zeros_like(grid.nodes)
    return SimState(background=background, zeta=zeros, zeta_t=zeros.copy(),
                    gravity_enabled=gravity_enabled, jacobian_floor=jacobian_floor)


def _with_pins(values):
    values = np.array(values, dtype=values.dtype)
    values[0] = 0.0
    return values


def _deformation(background, zeta, jacobian_floor):
    # Gauss 点での η と η_y
    basis = background.grid.basis
    y = background.grid.nodes
    dilation = 1.0 + zeta
    radius = basis.values @ (y * dilation)
    slope = basis.slopes @ (y * dilation)
    if (np.any(np.real(slope) <= jacobian_floor) or np.any(np.real(radius) <= 0.0)
            or np.any(np.real(dilation) <= 0.0)):
        k = int(np.argmin(np.real(slope)))
        raise JacobianDegenerate("ヤコビアンが下限を下回りました",
                                 y=float(basis.points[k]), jacobian=float(np.real(slope[k])), floor=jacobian_floor)
    return radius, slope


def restoring_force(background, zeta, gravity_enabled=False, jacobian_floor=DEFAULT_JACOBIAN_FLOOR):
    """
    復元力 ∇V(η) - ∇V(y) を節点ごとに返す (η = y(1+ζ))

    複素数の ζ も受け付けます。

    Parameters:
        background (Background): 平衡量
        zeta (ndarray): ζ
        gravity_enabled (bool): 自己重力項の有無
        jacobian_floor (float): ヤコビアンの下限

    Returns:
        ndarray: 復元力 (1行目は固定された y = r₀ の反力)
    """
    form = background.weak_form
    radius, slope = _deformation(background, zeta, jacobian_floor)
    return form.gradient(radius, slope, form.pull(gravity_enabled)) - background.rest(gravity_enabled)


def restoring_hessian(background, gravity_enabled=False):
    """平衡 η = y での ∇²V"""
    form = background.weak_form
    y = background.grid.nodes
    basis = background.grid.basis
    return form.hessian(basis.values @ y, basis.slopes @ y, form.pull(gravity_enabled))


def spatial_operator(background, zeta, gravity_enabled=False, jacobian_floor=DEFAULT_JACOBIAN_FLOOR):
    """
    減衰項を除いた加速度 N(ζ) = -Y⁻¹M⁻¹(∇V(η) - ∇V(y)) を計算する

    複素数の ζ も受け付けます (複素ステップ微分で方向微分を取るため)。

    Parameters:
        background (Background): 平衡量
        zeta (ndarray): ζ
        gravity_enabled (bool): 自己重力項の有無
        jacobian_floor (float): ヤコビアンの下限

    Returns:
        ndarray: N(ζ) (y = r₀ では 0)
    """
    force = restoring_force(background, zeta, gravity_enabled, jacobian_floor)
    accel = np.zeros_like(force)
    accel[1:] = -background.solve_mass(force[1:]) / background.grid.nodes[1:]
    return accel


def acceleration(state):
    """
    ζ_tt = -ζ_t + N(ζ) を返す (y = r₀ では 0)
    """
    accel = -state.zeta_t + spatial_operator(state.background, state.zeta,
                                             state.gravity_enabled, state.jacobian_floor)
    return _with_pins(accel)


def operator_derivative(state, direction):
    """
    N の ζ における方向微分 N'(ζ)[direction] を複素ステップで計算する
    """
    perturbed = state.zeta + 1j * COMPLEX_STEP * direction
    value = spatial_operator(state.background, perturbed, state.gravity_enabled, state.jacobian_floor)
    return np.imag(value) / COMPLEX_STEP


def apply_perturbation(state, mode, amplitude, kind="displacement"):
    """
    正弦波形 ε·sin(mπ(y-r₀)/(2(R-r₀))) の摂動を加える

    Parameters:
        state (SimState): 元の状態
        mode (int): モード番号 m
        amplitude (float): 振幅 ε (|ε| ≤ 0.05)
        kind (str): "displacement" (ζ) または "velocity" (ζ_t)

    Returns:
        SimState: 摂動を加えた状態
    """
    if abs(amplitude) > MAX_AMPLITUDE:
        raise AmplitudeTooLarge("摂動の振幅が上限を超えています", amplitude=amplitude, limit=MAX_AMPLITUDE)
    if kind not in ("displacement", "velocity"):
        raise DomainError("摂動の種類が不正です", kind=kind)
    if amplitude == 0.0:
        return state

    profile = state.profile
    y = state.grid.nodes
    r0 = profile.core_radius
    shape = np.sin(mode * math.pi * (y - r0) / (2.0 * (profile.outer_radius - r0)))
    if kind == "displacement":
        return replace(state, zeta=_with_pins(state.zeta + amplitude * shape), zeta_t=_with_pins(state.zeta_t))
    return replace(state, zeta=_with_pins(state.zeta), zeta_t=_with_pins(state.zeta_t + amplitude * shape))


def stable_dt(state, cfl=DEFAULT_CFL):
    """
    線形化作用素の最大振動数に基づく時間刻み

    平衡での最大振動数 ω_max に、音速 c² ∝ (1+ζ)^{2-2γ}η_y^{-γ-1} の平衡からの
    最大の増加率を掛けたものを RK4 の虚軸上の安定限界 2√2 で割ります。

    Parameters:
        state (SimState): 状態
        cfl (float): CFL 係数

    Returns:
        float: 時間刻み (減衰時間の 0.1 倍以下)
    """
    gamma = state.profile.params.gamma
    basis = state.grid.basis
    radius = basis.values @ state.eta
    slope = basis.slopes @ state.eta
    stretch = np.abs(radius / basis.points) ** (2.0 - 2.0 * gamma) * np.abs(slope) ** (-gamma - 1.0)
    frequency = state.background.max_frequency * math.sqrt(float(np.max(stretch)))
    if not frequency > 0.0:
        return MAX_DT
    return min(cfl * _RK4_IMAGINARY_LIMIT / frequency, MAX_DT)


def step(state, dt, operator=None, check_cfl=True, cfl=DEFAULT_CFL):
    """
    積分因子付きの4段 Runge-Kutta 法で1ステップ進める

    速度を V = e^{τ}ζ_t と置き換えると減衰項 -ζ_t は厳密に処理され、
        ζ' = e^{-τ}V,  V' = e^{τ}N(ζ)
    に古典的 RK4 を適用します。

    Parameters:
        state (SimState): 現在の状態
        dt (float): 時間刻み
        operator (callable, optional): N(ζ) の代わりに使う関数 (検証用)
        check_cfl (bool): CFL 条件を確認するかどうか

    Returns:
        SimState: dt 後の状態
    """
    if check_cfl:
        limit = stable_dt(state, cfl)
        if dt > limit * (1.0 + 1e-12):
            raise CflViolation("時間刻みが安定条件を超えています", dt=dt, limit=limit)

    if operator is None:
        def operator(zeta):
            return spatial_operator(state.background, zeta, state.gravity_enabled, state.jacobian_floor)

    half = 0.5 * dt
    e_half = math.exp(-half)
    e_full = math.exp(-dt)
    z0 = state.zeta
    v0 = state.zeta_t

    k1z = v0
    k1v = operator(z0)
    z = z0 + half * k1z
    v = v0 + half * k1v
    k2z = e_half * v
    k2v = operator(z) / e_half
    z = z0 + half * k2z
    v = v0 + half * k2v
    k3z = e_half * v
    k3v = operator(z) / e_half
    z = z0 + dt * k3z
    v = v0 + dt * k3v
    k4z = e_full * v
    k4v = operator(z) / e_full

    z1 = z0 + dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
    v1 = e_full * (v0 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v))
    return replace(state, zeta=_with_pins(z1), zeta_t=_with_pins(v1), time=state.time + dt)


def evolve(state, t_end, snapshot_every, cfl=DEFAULT_CFL, reporter=None):
    """
    t_end まで時間発展させ、snapshot_every ごとに状態とエネルギーを記録する

    Parameters:
        state (SimState): 初期状態
        t_end (float): 終了時刻
        snapshot_every (float): 記録間隔
        cfl (float): CFL 係数
        reporter (callable, optional): SimState -> EnergyReport (既定は diagnostics.energy_report)

    Returns:
        Trajectory: 記録
    """
    if not t_end > state.time:
        raise DomainError("終了時刻は現在時刻より後である必要があります", t_end=t_end, time=state.time)
    if not snapshot_every > 0.0:
        raise DomainError("記録間隔は正である必要があります", snapshot_every=snapshot_every)
    if reporter is None:
        from physics.diagnostics import energy_report
        reporter = energy_report

    t_start = state.time
    n_snapshots = int(math.ceil((t_end - t_start) / snapshot_every - 1e-9))
    targets = [min(t_start + k * snapshot_every, t_end) for k in range(1, n_snapshots + 1)]

    log_message("INFO", f"時間発展を開始します: t={t_start:g} -> {t_end:g}, N={state.grid.n_cells}, "
                        f"p={state.grid.grading_power:g}")
    trajectory = Trajectory()
    trajectory.append(state, reporter(state))
    n_steps = 0
    for target in targets:
        tolerance = 1e-12 * max(1.0, abs(target))
        while state.time < target - tolerance:
            try:
                dt = min(stable_dt(state, cfl), target - state.time)
                state = step(state, dt, check_cfl=False)
            except CorevacError as e:
                raise EvolutionError(f"t={state.time:.6g} で時間発展に失敗しました: {e}",
                                     failure_time=state.time, cause=e) from e
            n_steps += 1
        state = replace(state, time=target)
        trajectory.append(state, reporter(state))
        if is_debug() and trajectory.reports[-1] is not None:
            log_message("DEBUG", f"t={target:.4f}: E={trajectory.reports[-1].total:.6e}, steps={n_steps}")

    log_message("INFO", f"時間発展が終了しました: {n_steps} ステップ, {len(trajectory.states)} スナップショット")
    return trajectory
