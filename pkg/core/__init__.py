"""
数値実験ランナーのコア機能モジュール
"""

from core.config import ScenarioConfig, parse_config, serialize_config, load_config
from core.report import Report, RunReport, emit_csv
from core.preset import BasePreset, load_preset_class, get_available_presets
from core.preset_runner import PresetRunner, run_preset

__all__ = [
    'ScenarioConfig',
    'parse_config',
    'serialize_config',
    'load_config',
    'Report',
    'RunReport',
    'emit_csv',
    'BasePreset',
    'load_preset_class',
    'get_available_presets',
    'PresetRunner',
    'run_preset'
]
