#!/usr/bin/env python3
"""
平衡解まわりの線形化作用素とそのスペクトル

線形化方程式
    yρ̄ζ_tt + yρ̄ζ_t + {Aρ̄^γ[(4-3γ)ζ - γyζ_y]}_y - 4Aρ̄^γζ_y = 0
を時間発展と同じ要素で離散化すると、ζ の節点値について
    W(ζ_tt + ζ_t) + Lζ = 0,  L = Y∇²V(y)Y,  W = YMY
となります (Y = diag(y))。L と W はどちらも対称で W は正定値なので、
一般化固有値問題 Lv = μWv の固有値は実数です。ζ = e^{λt}v から得られる
λ² + λ + μ = 0 で減衰率を予測します。
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, sparse

from physics.errors import EigensolverFailure, UnstableMode
from physics.solver import build_background, restoring_hessian
from utils.file_utils import log_message

DEFAULT_WEIGHT_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class LinearizedOperator:
    """
    線形化作用素

    Attributes:
        matrix (csr_matrix): L = Y∇²V(y)Y
        weight (csr_matrix): W = YMY
        hessian (csr_matrix): η の節点値に対する ∇²V(y)
        background (Background): 平衡量 (質量行列の分解を使う)
    """

    matrix: sparse.csr_matrix
    weight: sparse.csr_matrix
    hessian: sparse.csr_matrix
    background: object

    def apply(self, values):
        """L を適用する (1行目は y = r₀ の Dirichlet 行)"""
        result = self.matrix @ values
        result[0] = values[0]
        return result

    def divided(self, values):
        """W で割った形 Kv = Y⁻¹M⁻¹∇²V(y)Yv (y = r₀ では 0)"""
        y = self.background.grid.nodes
        force = self.hessian @ (y * values)
        result = np.zeros_like(force)
        result[1:] = self.background.solve_mass(force[1:]) / y[1:]
        return result

    def acceleration(self, values):
        """ζ_t = 0 での線形化加速度 -Kζ"""
        return -self.divided(values)

    def pencil(self):
        """固定された y = r₀ を除いた (L, W) の密行列"""
        return self.matrix[1:, 1:].toarray(), self.weight[1:, 1:].toarray()


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """
    一般化固有値と時間固有値

    Attributes:
        mu (ndarray): 昇順の μ_k (保持したモード)
        lambda_pairs (ndarray): 形状 (n_modes, 2) の λ±
        predicted_delta (float): 予測減衰率 (不安定モードがあれば NaN)
        n_modes (int): 保持したモード数
        residuals (ndarray): ‖Lv - μWv‖/‖v‖
        max_growth (float): 全モードでの max Re λ
        n_unstable (int): 全モードのうち μ ≤ 0 のモード数
        symmetry_defect (float): max|L - Lᵀ|/max|L|
        n_floored (int): W の対角成分を下限まで引き上げた行数
    """

    mu: np.ndarray
    lambda_pairs: np.ndarray
    predicted_delta: float
    n_modes: int
    residuals: np.ndarray
    max_growth: float = math.nan
    n_unstable: int = 0
    symmetry_defect: float = 0.0
    n_floored: int = 0


def assemble_linearized(profile, grid, gravity_enabled=False):
    """
    線形化された空間作用素 L と重み W を組み立てる

    Parameters:
        profile (EquilibriumProfile): 平衡解
        grid (Grid): 格子 (solver と同じ要素)
        gravity_enabled (bool): 自己重力項の線形化を加えるかどうか

    Returns:
        LinearizedOperator: 作用素
    """
    background = build_background(profile, grid)
    hessian = restoring_hessian(background, gravity_enabled)
    scale = sparse.diags(grid.nodes)
    return LinearizedOperator(
        matrix=(scale @ hessian @ scale).tocsr(),
        weight=(scale @ background.mass_matrix @ scale).tocsr(),
        hessian=hessian,
        background=background,
    )


def lambda_roots(mu):
    """
    λ² + λ + μ = 0 の根 λ± = (-1 ± √(1-4μ))/2

    Parameters:
        mu (float or ndarray): μ

    Returns:
        ndarray: 形状 (..., 2) の複素数 (λ+, λ-)
    """
    disc = np.emath.sqrt(1.0 - 4.0 * np.asarray(mu, dtype=complex))
    return np.stack([(-1.0 + disc) / 2.0, (-1.0 - disc) / 2.0], axis=-1)


def _slow_rates(mu):
    # 各モードの 2·(-max Re λ)
    roots = lambda_roots(mu)
    return -2.0 * np.max(roots.real, axis=-1)


def eigen_modes(operator, n_keep, weight_floor=DEFAULT_WEIGHT_FLOOR):
    """
    一般化固有値問題 Lv = μWv を密行列で全て解く

    固定された y = r₀ の未知数は除きます。W の対角成分が floor·max 未満の行は
    下限まで引き上げます。成長率と不安定モード数は保持しないモードも含めて数えます。

    Parameters:
        operator (LinearizedOperator): assemble_linearized の結果
        n_keep (int): 保持するモード数
        weight_floor (float): 重みの相対下限

    Returns:
        SpectrumResult: μ の小さい順に n_keep 個
    """
    stiffness, weight = operator.pencil()
    scale = np.max(np.abs(stiffness))
    symmetry_defect = float(np.max(np.abs(stiffness - stiffness.T)) / scale) if scale > 0.0 else 0.0
    stiffness = 0.5 * (stiffness + stiffness.T)

    diagonal = np.diag(weight).copy()
    floored = np.flatnonzero(diagonal < weight_floor * np.max(diagonal))
    weight[floored, floored] = weight_floor * np.max(diagonal)

    try:
        values, vectors = linalg.eigh(stiffness, weight)
    except (linalg.LinAlgError, ValueError) as e:
        raise EigensolverFailure(f"固有値計算に失敗しました: {e}",
                                 condition=float(np.linalg.cond(weight))) from e
    if not np.all(np.isfinite(values)):
        raise EigensolverFailure("固有値に有限でない値が含まれています",
                                 condition=float(np.linalg.cond(weight)), n_unknowns=len(diagonal))

    max_growth = float(np.max(lambda_roots(values).real))
    n_unstable = int(np.count_nonzero(values <= 0.0))
    mu = values[:n_keep]
    modes = vectors[:, :n_keep]
    residuals = np.array([
        np.linalg.norm(stiffness @ modes[:, k] - mu[k] * (weight @ modes[:, k])) / np.linalg.norm(modes[:, k])
        for k in range(len(mu))
    ])
    # 全て正なら最小の μ が最も遅いモードになる
    delta = float(np.min(_slow_rates(mu))) if mu.size and n_unstable == 0 else math.nan
    log_message("DEBUG", f"固有値: n={len(diagonal)}, mu_min={values[0]:.8g}, max Re lambda={max_growth:.6g}, "
                         f"不安定={n_unstable}, 下限={len(floored)}")
    return SpectrumResult(
        mu=mu,
        lambda_pairs=lambda_roots(mu),
        predicted_delta=delta,
        n_modes=len(mu),
        residuals=residuals,
        max_growth=max_growth,
        n_unstable=n_unstable,
        symmetry_defect=symmetry_defect,
        n_floored=len(floored),
    )


def predicted_delta(result):
    """
    予測減衰率 δ_pred = 2·min_k(-max Re λ_k)

    μ_min ≤ 1/4 なら 1 - √(1-4μ_min)、μ_min > 1/4 なら 1 (減衰で頭打ち) になります。

    Parameters:
        result (SpectrumResult): eigen_modes の結果

    Returns:
        float: δ_pred (≤ 1)
    """
    mu = np.asarray(result.mu, dtype=float)
    bad = np.flatnonzero(mu <= 0.0)
    if bad.size:
        raise UnstableMode("非正の固有値があります", mode=int(bad[0]), mu=float(mu[bad[0]]))
    if result.n_unstable:
        raise UnstableMode("保持していないモードに非正の固有値があります",
                           n_unstable=result.n_unstable, max_growth=result.max_growth)
    return float(min(1.0, np.min(_slow_rates(mu))))
