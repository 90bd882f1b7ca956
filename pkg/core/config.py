#!/usr/bin/env python3
"""
シナリオ設定ファイルの読み込みと検証

設定ファイルはドット区切りのキーを持つ YAML です。

    preset: decay
    gas.gamma: 1.6666666666666667
    radius.outer: 2.5
    grid.n_cells: 256

入れ子の書き方 (gas: {gamma: ...}) も同じキーに平坦化して受け付けます。
"""
import os
from dataclasses import dataclass, fields

import yaml

from physics.equilibrium import GasParameters
from physics.errors import DomainError, ParseError, ValidationError


def _to_float(value):
    if isinstance(value, bool):
        raise ValueError("bool は数値として扱えません")
    return float(value)


def _to_int(value):
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise ValueError("整数ではありません")
    return int(value)


def _to_floats(value):
    if not isinstance(value, (list, tuple)) or not value:
        raise ValueError("数値のリストではありません")
    return tuple(_to_float(item) for item in value)


def _to_str(value):
    if not isinstance(value, str) or not value:
        raise ValueError("文字列ではありません")
    return value


def _to_bool(value):
    if not isinstance(value, bool):
        raise ValueError("true/false ではありません")
    return value


def _optional(converter):
    def convert(value):
        return None if value is None else converter(value)
    return convert


# 既定値の表: キー -> (属性名, 既定値, 変換関数, 値の条件, 条件の説明)
FIELD_TABLE = {
    "preset": ("preset", None, _to_str, None, "プリセット名"),
    "gas.gamma": ("gamma", 5.0 / 3.0, _to_float, lambda v: v > 1.0, "> 1"),
    "gas.pressure_const": ("pressure_const", 1.0, _to_float, lambda v: v > 0.0, "> 0"),
    "gas.core_gravity": ("core_gravity", 1.0, _to_float, lambda v: v > 0.0, "> 0"),
    "gas.core_radius": ("core_radius", 1.0, _to_float, lambda v: v > 0.0, "> 0"),
    "gas.self_gravity_const": ("self_gravity_const", 0.0, _to_float, lambda v: v >= 0.0, ">= 0"),
    "radius.outer": ("outer_radius", None, _optional(_to_float), lambda v: v is None or v > 0.0, "> 0"),
    "radius.mass": ("target_mass", None, _optional(_to_float), lambda v: v is None or v > 0.0, "> 0"),
    "grid.n_cells": ("n_cells", 256, _to_int, lambda v: v >= 8 and v % 4 == 0, ">= 8, multiple of 4"),
    "grid.grading_power": ("grading_power", 2.0, _to_float, lambda v: v >= 1.0, ">= 1"),
    "run.t_end": ("t_end", 40.0, _to_float, lambda v: v > 0.0, "> 0"),
    "run.snapshot_every": ("snapshot_every", 0.5, _to_float, lambda v: v > 0.0, "> 0"),
    "run.cfl": ("cfl", 0.4, _to_float, lambda v: 0.0 < v <= 1.0, "(0, 1]"),
    "run.fit_start": ("fit_start", 5.0, _to_float, lambda v: v >= 0.0, ">= 0"),
    "run.fit_end": ("fit_end", 40.0, _to_float, lambda v: v > 0.0, "> 0"),
    "run.jacobian_floor": ("jacobian_floor", 0.1, _to_float, lambda v: 0.0 < v < 1.0, "(0, 1)"),
    "perturbation.mode": ("mode", 1, _to_int, lambda v: v >= 1, ">= 1"),
    "perturbation.amplitude": ("amplitude", 0.0, _to_float, lambda v: abs(v) <= 0.05, "|amplitude| <= 0.05"),
    "perturbation.kind": ("kind", "displacement", _to_str,
                          lambda v: v in ("displacement", "velocity"), "displacement | velocity"),
    "diagnostics.j_max": ("j_max", 2, _to_int, lambda v: 0 <= v <= 2, "0..2"),
    "diagnostics.order_cap": ("order_cap", 3, _to_int, lambda v: v >= 1, ">= 1"),
    "diagnostics.compare_mesh": ("compare_mesh", False, _to_bool, None, "true | false"),
    "spectrum.n_keep": ("n_keep", 5, _to_int, lambda v: v >= 1, ">= 1"),
    "spectrum.weight_floor": ("weight_floor", 1e-10, _to_float, lambda v: 0.0 < v < 1.0, "(0, 1)"),
    "spectrum.compare_n_cells": ("compare_n_cells", 512, _to_int, lambda v: v >= 8 and v % 4 == 0,
                                 ">= 8, multiple of 4"),
    "spectrum.delta_tolerance": ("delta_tolerance", 0.25, _to_float, lambda v: v > 0.0, "> 0"),
    "sweep.gammas": ("sweep_gammas", (1.4, 5.0 / 3.0, 2.0), _to_floats,
                     lambda v: all(g > 1.0 for g in v), "each > 1"),
    "sweep.radius_fractions": ("sweep_radius_fractions", (0.25, 0.5, 1.0), _to_floats,
                               lambda v: all(0.0 < f <= 1.0 for f in v), "each in (0, 1]"),
    "hardy.k_values": ("hardy_k_values", (1.5, 2.0, 3.0), _to_floats,
                       lambda v: all(k > 1.0 for k in v), "each > 1"),
    "poisson.central_density": ("central_density", None, _optional(_to_float),
                                lambda v: v is None or v > 0.0, "> 0"),
    "poisson.radius_cap_factor": ("radius_cap_factor", 1e3, _to_float, lambda v: v > 1.0, "> 1"),
    "poisson.radius_tolerance": ("radius_tolerance", 1e-4, _to_float, lambda v: v > 0.0, "> 0"),
}

GAS_KEYS = ("gas.gamma", "gas.pressure_const", "gas.core_gravity", "gas.core_radius", "gas.self_gravity_const")
RADIUS_KEYS = ("radius.outer", "radius.mass")


@dataclass(frozen=True)
class ScenarioConfig:
    """
    検証済みのシナリオ設定 (乱数を使わないので設定から結果が一意に決まる)
    """

    preset: str
    gas: GasParameters
    outer_radius: float
    target_mass: float
    n_cells: int
    grading_power: float
    t_end: float
    snapshot_every: float
    cfl: float
    fit_start: float
    fit_end: float
    jacobian_floor: float
    mode: int
    amplitude: float
    kind: str
    j_max: int
    order_cap: int
    compare_mesh: bool
    n_keep: int
    weight_floor: float
    compare_n_cells: int
    delta_tolerance: float
    sweep_gammas: tuple
    sweep_radius_fractions: tuple
    hardy_k_values: tuple
    central_density: float
    radius_cap_factor: float
    radius_tolerance: float

    @property
    def gravity_enabled(self):
        return self.gas.self_gravity_const > 0.0

    @property
    def fit_window(self):
        return (self.fit_start, self.fit_end)

    def to_flat(self):
        """ドット区切りキーの辞書 (None の値は省く)"""
        flat = {}
        for key, (attr, *_rest) in FIELD_TABLE.items():
            if key in GAS_KEYS:
                value = getattr(self.gas, attr)
            else:
                value = getattr(self, attr)
            if value is None:
                continue
            flat[key] = list(value) if isinstance(value, tuple) else value
        return flat


def flatten(document, prefix=""):
    """
    入れ子の辞書をドット区切りのキーに平坦化する

    Parameters:
        document (dict): YAML から読んだ辞書
        prefix (str): 上位のキー

    Returns:
        dict: 平坦化した辞書
    """
    flat = {}
    for key, value in document.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def load_document(text, source="<config>"):
    """
    YAML 文字列を読み込んで平坦化した辞書を返す

    Raises:
        ParseError: YAML の構文エラー (行番号付き) またはトップレベルが辞書でない場合
    """
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ParseError(f"設定ファイルを解析できません: {getattr(e, 'problem', e)}", source=source, line=line) from e
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ParseError("設定ファイルのトップレベルはキーと値の組である必要があります", source=source, line=1)
    flat = {}
    for key, value in flatten(document).items():
        if not isinstance(key, str):
            raise ParseError("キーは文字列である必要があります", source=source, key=key)
        flat[key] = value
    return flat


def _merge(layers):
    # radius.* は最も優先度の高い層からまとめて採用する
    merged = {}
    for layer in layers:
        if any(key in layer for key in RADIUS_KEYS):
            for key in RADIUS_KEYS:
                merged.pop(key, None)
        merged.update(layer)
    return merged


def build_config(flat):
    """
    平坦化した辞書から ScenarioConfig を作る (既定値で補完し、値を検証する)

    Raises:
        ValidationError: 未知のキー、不正な値、または R と M の同時指定
    """
    unknown = sorted(key for key in flat if key not in FIELD_TABLE)
    if unknown:
        raise ValidationError(f"未知のキーがあります: {', '.join(unknown)}", keys=unknown)

    values = {}
    for key, (attr, default, converter, check, rule) in FIELD_TABLE.items():
        raw = flat.get(key, default)
        if raw is None and default is None and key != "preset":
            values[key] = None
            continue
        try:
            value = converter(raw)
        except (TypeError, ValueError) as e:
            raise ValidationError(f"{key} の値が不正です: {raw!r} ({e})", field=key) from e
        if check is not None and not check(value):
            raise ValidationError(f"{key} の値 {value!r} は条件 {rule} を満たしません", field=key)
        values[key] = value

    given = [key for key in RADIUS_KEYS if values[key] is not None]
    if len(given) != 1:
        raise ValidationError("radius.outer と radius.mass のどちらか一方だけを指定してください",
                              field="radius", given=given)
    if not values["run.fit_start"] < values["run.fit_end"]:
        raise ValidationError("run.fit_start は run.fit_end より小さい必要があります", field="run.fit_start")

    try:
        gas = GasParameters(*(values[key] for key in GAS_KEYS))
    except DomainError as e:
        raise ValidationError(f"gas の値が不正です: {e}", field="gas") from e
    if values["radius.outer"] is not None and not values["radius.outer"] > gas.core_radius:
        raise ValidationError("radius.outer は gas.core_radius より大きい必要があります", field="radius.outer")

    kwargs = {FIELD_TABLE[key][0]: value for key, value in values.items() if key not in GAS_KEYS}
    kwargs["gas"] = gas
    names = {f.name for f in fields(ScenarioConfig)}
    return ScenarioConfig(**{name: kwargs[name] for name in names})


def parse_config(text, base=None, source="<config>"):
    """
    設定ファイルの文字列を検証済みの ScenarioConfig にする

    Parameters:
        text (str): YAML 文字列
        base (dict): 既定値の表の上に重ねる平坦化済みの値 (プリセットの既定値)
        source (str): エラーメッセージ用のファイル名

    Returns:
        ScenarioConfig: 設定
    """
    flat = load_document(text, source)
    layers = [base or {}, flat]
    return build_config(_merge(layers))


def serialize_config(config):
    """
    設定をドット区切りキーの YAML 文字列にする (parse_config で同じ設定に戻る)
    """
    return yaml.safe_dump(config.to_flat(), sort_keys=False, default_flow_style=None, allow_unicode=True)


def load_config(path, preset_defaults=None):
    """
    設定ファイルを読み込む

    プリセットの既定値 (presets/configs/<preset>.yaml) を既定値の表とファイルの間に重ねます。

    Parameters:
        path (str): 設定ファイルのパス
        preset_defaults (callable): プリセット名から平坦化済みの既定値を返す関数

    Returns:
        ScenarioConfig: 設定
    """
    if not os.path.exists(path):
        raise ValidationError(f"設定ファイルが見つかりません: {path}", field="config")
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    flat = load_document(text, source=path)
    base = {}
    preset = flat.get("preset")
    if preset_defaults is not None and isinstance(preset, str):
        base = preset_defaults(preset)
    return build_config(_merge([base, flat]))

