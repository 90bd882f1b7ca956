#!/usr/bin/env python3
"""
実験プリセットの基本クラスと動的ロード

プリセット名 "window-sweep" は presets/window_sweep_preset.py のクラスに、
既定値は presets/configs/window_sweep.yaml に対応します。
"""
import glob
import importlib
import inspect
import os

from core.config import load_document
from core.report import RunReport, snapshot_rows
from physics.equilibrium import build_profile, radius_from_mass
from physics.errors import UnknownPreset
from physics.solver import apply_perturbation, evolve, initial_state
from physics.diagnostics import energy_report
from physics.stencils import build_grid
from utils.file_utils import log_message

PRESETS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "presets")


class BasePreset:
    """
    実験プリセットの基本クラス

    サブクラスは name, description を定義し、execute() で検証項目を返します。
    """

    name = None
    description = ""

    def __init__(self, config, output_dir="artifacts", jobs=1):
        self.config = config
        self.output_dir = output_dir
        self.jobs = max(1, int(jobs))
        self.checks = []
        self.values = {}
        self.fits = {}
        self.spectrum = None
        self.rows = []

    def run(self):
        """
        プリセットを実行して RunReport を返す
        """
        log_message("INFO", f"プリセット {self.name} を実行します")
        self.execute()
        return RunReport(
            preset=self.name,
            config=self.config,
            rows=self.rows,
            checks=self.checks,
            fits=self.fits,
            spectrum=self.spectrum,
            values=self.values,
        )

    def execute(self):
        raise NotImplementedError

    def add_check(self, check):
        self.checks.append(check)
        measured = check.get("measured")
        shown = f"{measured:.6g}" if isinstance(measured, float) else measured
        log_message("INFO", f"{check['name']}: {check['status']} (測定値 {shown}, 基準 {check['threshold']})")
        return check

    def build_equilibrium(self, gas=None, outer_radius=None):
        """設定の R または M から平衡解を作る"""
        gas = gas or self.config.gas
        if outer_radius is not None:
            return build_profile(gas, outer_radius)
        if self.config.outer_radius is not None:
            return build_profile(gas, self.config.outer_radius)
        return radius_from_mass(gas, self.config.target_mass)

    def build_grid(self, profile, n_cells=None):
        return build_grid(profile, n_cells or self.config.n_cells, self.config.grading_power)

    def run_evolution(self, profile, n_cells=None):
        """
        設定の摂動を加えて t_end まで時間発展させる

        Returns:
            tuple: (初期状態, Trajectory)
        """
        config = self.config
        grid = self.build_grid(profile, n_cells)
        state = initial_state(profile, grid, gravity_enabled=config.gravity_enabled,
                              jacobian_floor=config.jacobian_floor)
        state = apply_perturbation(state, config.mode, config.amplitude, config.kind)

        def reporter(snapshot):
            return energy_report(snapshot, config.j_max, config.order_cap)

        trajectory = evolve(state, config.t_end, config.snapshot_every, cfl=config.cfl, reporter=reporter)
        return state, trajectory

    def record_trajectory(self, trajectory):
        self.rows = snapshot_rows(trajectory)


def _module_name(preset_name):
    return preset_name.lower().replace('-', '_')


def load_preset_class(preset_name):
    """
    プリセット名からプリセットクラスを読み込む

    Parameters:
        preset_name (str): プリセット名

    Returns:
        type: BasePreset のサブクラス
    """
    if preset_name not in get_available_presets():
        raise UnknownPreset(f"未知のプリセットです: {preset_name}",
                            available=",".join(get_available_presets()))
    module = importlib.import_module(f"presets.{_module_name(preset_name)}_preset")
    for _, obj in inspect.getmembers(module, inspect.isclass):
        if issubclass(obj, BasePreset) and obj is not BasePreset and obj.name == preset_name:
            return obj
    raise UnknownPreset(f"プリセットクラスが見つかりません: {preset_name}")


def get_available_presets():
    """
    presets ディレクトリにあるプリセット名の一覧 (ハイフン区切り)
    """
    names = []
    for path in sorted(glob.glob(os.path.join(PRESETS_DIR, "*_preset.py"))):
        base = os.path.basename(path)[:-len("_preset.py")]
        names.append(base.replace('_', '-'))
    return names


def load_preset_defaults(preset_name):
    """
    presets/configs/<preset>.yaml の既定値を平坦化して返す (なければ空)
    """
    path = os.path.join(PRESETS_DIR, "configs", f"{_module_name(preset_name)}.yaml")
    if not os.path.exists(path):
        return {}
    with open(path, 'r', encoding='utf-8') as f:
        return load_document(f.read(), source=path)


def describe_presets():
    """(名前, 説明) の一覧"""
    return [(name, load_preset_class(name).description) for name in get_available_presets()]
