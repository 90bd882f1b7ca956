#!/usr/bin/env python3
"""
真空境界側に集中する格子、有限差分ステンシルと4次要素の基底
"""
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from physics.errors import DomainError, InvalidGrading

# 4次精度の端点補正付き台形則 (計算座標で一様)
_END_CORRECTION = np.array([17.0, 59.0, 43.0, 49.0]) / 48.0

# 時間発展の弱形式に使う Lagrange 要素の次数と要素ごとの Gauss 点数
ELEMENT_DEGREE = 4
GAUSS_POINTS = 8


@dataclass(frozen=True, eq=False)
class ElementBasis:
    """
    区分4次 Lagrange 要素の求積点での値と y 微分

    要素は計算座標 s で連続する4セルで、要素内の節点は s について等間隔です。

    Attributes:
        points (ndarray): 求積点のラベル y_g (写像の厳密値、常に R より内側)
        weights (ndarray): 求積重み (dy/ds を含む)
        values (csr_matrix): 節点値から求積点での値への行列
        slopes (csr_matrix): 節点値から求積点での y 微分への行列
    """

    points: np.ndarray
    weights: np.ndarray
    values: sparse.csr_matrix
    slopes: sparse.csr_matrix

    def integrate(self, integrand):
        return float(self.weights @ integrand)


@dataclass(frozen=True, eq=False)
class Grid:
    """
    ラベル区間 [r₀, R] 上の格子

    Attributes:
        nodes (ndarray): 狭義単調増加の節点 y₀ = r₀ < ... < y_N = R
        quad_weights (ndarray): 節点ごとの求積重み
        grading_power (float): 格子の集中指数 p (≥ 1)
        d1 (csr_matrix): 1階微分行列
        d2 (csr_matrix): 2階微分行列
        basis (ElementBasis): 時間発展に使う要素の基底
    """

    nodes: np.ndarray
    quad_weights: np.ndarray
    grading_power: float
    d1: sparse.csr_matrix
    d2: sparse.csr_matrix
    basis: ElementBasis

    @property
    def n_cells(self):
        return len(self.nodes) - 1

    def integrate(self, values):
        """節点値の求積"""
        return float(self.quad_weights @ values)

    def derivative(self, values, order=1):
        """1階微分行列を order 回適用する"""
        result = values
        for _ in range(order):
            result = self.d1 @ result
        return result


def fd_weights(z, x, m):
    """
    任意の節点 x 上で点 z における m 階までの有限差分重みを計算する (Fornberg の方法)

    Parameters:
        z (float): 評価点
        x (ndarray): ステンシルの節点
        m (int): 最高の微分階数

    Returns:
        ndarray: 形状 (len(x), m+1) の重み。列 k が k 階微分の重み
    """
    n = len(x)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def _stencil_indices(k, n_nodes):
    # 内部は中心5点、両端の近くは片側6点
    if 2 <= k <= n_nodes - 3:
        return np.arange(k - 2, k + 3)
    if k < 2:
        return np.arange(0, 6)
    return np.arange(n_nodes - 6, n_nodes)


def differentiation_matrices(nodes):
    """
    非一様格子上の1階・2階微分行列を組み立てる

    Parameters:
        nodes (ndarray): 節点

    Returns:
        tuple: (d1, d2) の csr_matrix
    """
    n_nodes = len(nodes)
    rows, cols, data1, data2 = [], [], [], []
    for k in range(n_nodes):
        idx = _stencil_indices(k, n_nodes)
        weights = fd_weights(nodes[k], nodes[idx], 2)
        rows.extend([k] * len(idx))
        cols.extend(idx.tolist())
        data1.extend(weights[:, 1].tolist())
        data2.extend(weights[:, 2].tolist())
    shape = (n_nodes, n_nodes)
    d1 = sparse.csr_matrix((data1, (rows, cols)), shape=shape)
    d2 = sparse.csr_matrix((data2, (rows, cols)), shape=shape)
    return d1, d2


def quadrature_weights(n_cells, length, grading_power):
    """
    写像 y(s) = r₀ + L(1 - (1-s)^p) の計算座標 s で端点補正付き台形則を使った求積重み

    y'(s) が3次以下の多項式 (p ≤ 4 の整数) なら定数関数の積分は丸め誤差まで厳密です。
    """
    s = np.arange(n_cells + 1) / n_cells
    base = np.ones(n_cells + 1)
    base[:4] = _END_CORRECTION
    base[-4:] = _END_CORRECTION[::-1]
    jacobian = grading_power * length * (1.0 - s) ** (grading_power - 1.0)
    return base * jacobian / n_cells


def element_basis(core_radius, length, n_cells, grading_power):
    """
    ELEMENT_DEGREE 個のセルをまとめた Lagrange 要素の基底を Gauss 点で評価する

    Parameters:
        core_radius (float): r₀
        length (float): R - r₀
        n_cells (int): セル数 (ELEMENT_DEGREE の倍数)
        grading_power (float): 集中指数 p

    Returns:
        ElementBasis: 基底
    """
    if n_cells % ELEMENT_DEGREE:
        raise DomainError(f"セル数は {ELEMENT_DEGREE} の倍数である必要があります", n_cells=n_cells)
    xi, xi_weights = np.polynomial.legendre.leggauss(GAUSS_POINTS)
    xi = 0.5 * (xi + 1.0)
    xi_weights = 0.5 * xi_weights
    reference = np.linspace(0.0, 1.0, ELEMENT_DEGREE + 1)
    # table[g, i, k]: 参照要素の節点 i の k 階微分の重み
    table = np.array([fd_weights(x, reference, 1) for x in xi])

    n_elements = n_cells // ELEMENT_DEGREE
    ds = ELEMENT_DEGREE / n_cells
    s = (np.arange(n_elements)[:, None] + xi[None, :]) * ds
    points = core_radius + length * (1.0 - (1.0 - s) ** grading_power)
    dyds = grading_power * length * (1.0 - s) ** (grading_power - 1.0)

    shape = (n_elements, GAUSS_POINTS, ELEMENT_DEGREE + 1)
    rows = np.broadcast_to(np.arange(n_elements * GAUSS_POINTS).reshape(n_elements, GAUSS_POINTS, 1), shape)
    cols = np.broadcast_to((ELEMENT_DEGREE * np.arange(n_elements))[:, None, None]
                           + np.arange(ELEMENT_DEGREE + 1)[None, None, :], shape)
    value_data = np.broadcast_to(table[None, :, :, 0], shape)
    slope_data = table[None, :, :, 1] / (ds * dyds[:, :, None])
    matrix_shape = (n_elements * GAUSS_POINTS, n_cells + 1)
    values = sparse.csr_matrix((value_data.ravel(), (rows.ravel(), cols.ravel())), shape=matrix_shape)
    slopes = sparse.csr_matrix((slope_data.ravel(), (rows.ravel(), cols.ravel())), shape=matrix_shape)
    return ElementBasis(points=points.ravel(), weights=(xi_weights[None, :] * ds * dyds).ravel(),
                        values=values, slopes=slopes)


def grid_nodes(core_radius, outer_radius, n_cells, grading_power):
    """
    節点 y_k = r₀ + (R-r₀)(1 - (1-k/N)^p) を返す (両端は厳密に r₀ と R)
    """
    if grading_power < 1.0:
        raise InvalidGrading("格子の集中指数は 1 以上である必要があります", grading_power=grading_power)
    s = np.arange(n_cells + 1) / n_cells
    nodes = core_radius + (outer_radius - core_radius) * (1.0 - (1.0 - s) ** grading_power)
    nodes[0] = core_radius
    nodes[-1] = outer_radius
    return nodes


def build_grid(profile, n_cells, grading_power=2.0):
    """
    真空境界側に集中した格子と微分行列・求積重みを作る

    Parameters:
        profile (EquilibriumProfile): 平衡解
        n_cells (int): セル数 N (≥ 8, ELEMENT_DEGREE の倍数)
        grading_power (float): 集中指数 p (≥ 1)

    Returns:
        Grid: 格子
    """
    if grading_power < 1.0:
        raise InvalidGrading("格子の集中指数は 1 以上である必要があります", grading_power=grading_power)
    if n_cells < 8 or n_cells % ELEMENT_DEGREE:
        raise DomainError(f"セル数は 8 以上の {ELEMENT_DEGREE} の倍数である必要があります", n_cells=n_cells)

    r0 = profile.core_radius
    big_r = profile.outer_radius
    length = big_r - r0
    nodes = grid_nodes(r0, big_r, n_cells, grading_power)

    d1, d2 = differentiation_matrices(nodes)
    return Grid(
        nodes=nodes,
        quad_weights=quadrature_weights(n_cells, length, grading_power),
        grading_power=float(grading_power),
        d1=d1,
        d2=d2,
        basis=element_basis(r0, length, n_cells, grading_power),
    )
