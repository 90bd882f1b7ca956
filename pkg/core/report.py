#!/usr/bin/env python3
"""
レポート生成機能を提供するモジュール

時系列の CSV、結果の JSON、検証項目の HTML サマリーを出力します。
出力内容は設定だけで決まり、実行時刻や所要時間は含めません。
"""
import csv
import html
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from core.config import serialize_config
from physics.diagnostics import eulerian_mass, eulerian_reconstruct, vacuum_slope
from physics.errors import OutputError
from utils.parser import STATUSES, format_number, overall_status

CSV_COLUMNS = ["t", "E0", "E1", "E2", "E01", "E_total", "D0", "max_zeta", "max_u", "R_t", "mass", "vacuum_slope"]


@dataclass
class RunReport:
    """
    1回のプリセット実行の結果

    Attributes:
        preset (str): プリセット名
        config (ScenarioConfig): 設定
        rows (list): スナップショットごとの CSV 行 (dict)
        checks (list): 検証項目
        fits (dict): 名前 -> DecayFit
        spectrum (SpectrumResult): スペクトル (求めた場合)
        values (dict): その他の測定値
        elapsed (float): 所要時間 [秒] (ログにのみ出力)
    """

    preset: str
    config: object
    rows: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    spectrum: object = None
    values: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def status(self):
        return overall_status(self.checks)

    @property
    def passed(self):
        return self.status == "Success"


def snapshot_rows(trajectory):
    """
    軌道から CSV の行を作る

    Parameters:
        trajectory (Trajectory): 時間発展の記録

    Returns:
        list: CSV_COLUMNS をキーとする dict のリスト
    """
    rows = []
    for state, report in zip(trajectory.states, trajectory.reports):
        fields = eulerian_reconstruct(state)
        e_j = report.e_j
        rows.append({
            "t": report.time,
            "E0": e_j[0],
            "E1": e_j[1] if e_j.size > 1 else math.nan,
            "E2": e_j[2] if e_j.size > 2 else math.nan,
            "E01": report.e_ji[0, 1] if report.e_ji.shape[1] > 1 else math.nan,
            "E_total": report.total,
            "D0": report.d_j[0],
            "max_zeta": float(np.max(np.abs(state.zeta))),
            "max_u": float(np.max(np.abs(fields.velocity))),
            "R_t": fields.boundary_radius,
            "mass": eulerian_mass(fields),
            "vacuum_slope": vacuum_slope(state),
        })
    return rows


def emit_csv(report, path):
    """
    時系列を CSV に書き出す (17桁、LF 改行)

    Parameters:
        report (RunReport): 結果
        path (str): 出力先

    Returns:
        str: 出力ファイルの絶対パス
    """
    try:
        with open(path, 'w', newline='', encoding='utf-8') as csvfile:
            writer = csv.DictWriter(csvfile, fieldnames=CSV_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in report.rows:
                writer.writerow({name: format_number(row[name]) for name in CSV_COLUMNS})
    except OSError as e:
        raise OutputError(f"CSV を書き出せません: {e}", path=path) from e
    return os.path.abspath(path)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [_jsonable(value.real), _jsonable(value.imag)]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def _fit_dict(fit):
    if fit is None:
        return None
    return {
        "delta_hat": fit.delta_hat,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "window": list(fit.window),
        "n_samples": fit.n_samples,
    }


def _spectrum_dict(spectrum):
    if spectrum is None:
        return None
    return {
        "mu": spectrum.mu,
        "lambda_pairs": spectrum.lambda_pairs,
        "predicted_delta": spectrum.predicted_delta,
        "n_modes": spectrum.n_modes,
        "residuals": spectrum.residuals,
        "max_growth": spectrum.max_growth,
        "n_unstable": spectrum.n_unstable,
        "symmetry_defect": spectrum.symmetry_defect,
        "n_floored": spectrum.n_floored,
    }


def report_document(report):
    """RunReport を JSON に書ける辞書にする"""
    return _jsonable({
        "preset": report.preset,
        "status": report.status,
        "config": report.config.to_flat() if report.config is not None else None,
        "checks": report.checks,
        "fits": {name: _fit_dict(fit) for name, fit in report.fits.items()},
        "spectrum": _spectrum_dict(report.spectrum),
        "values": report.values,
        "n_snapshots": len(report.rows),
        "csv_columns": CSV_COLUMNS,
    })


class Report:
    """レポート生成クラス

    実行結果の CSV・JSON・HTML を出力ディレクトリに生成します。
    """

    def __init__(self, run_report, output_dir):
        """
        Parameters:
            run_report (RunReport): 実行結果
            output_dir (str): 出力ディレクトリ
        """
        self.run_report = run_report
        self.output_dir = output_dir

    def _path(self, filename):
        try:
            os.makedirs(self.output_dir, exist_ok=True)
        except OSError as e:
            raise OutputError(f"出力ディレクトリを作成できません: {e}", path=self.output_dir) from e
        return os.path.join(self.output_dir, filename)

    def generate_csv(self, filename='timeseries.csv'):
        return emit_csv(self.run_report, self._path(filename))

    def generate_json(self, filename='report.json'):
        """
        JSON 形式の結果を生成する

        Returns:
            str: 出力ファイルのパス
        """
        path = self._path(filename)
        try:
            with open(path, 'w', newline='\n', encoding='utf-8') as f:
                json.dump(report_document(self.run_report), f, indent=2, ensure_ascii=False, allow_nan=False)
                f.write("\n")
        except OSError as e:
            raise OutputError(f"JSON を書き出せません: {e}", path=path) from e
        return os.path.abspath(path)

    def generate_config(self, filename='config.yaml'):
        """実際に使われた設定 (既定値で補完済み) を保存する"""
        path = self._path(filename)
        try:
            with open(path, 'w', newline='\n', encoding='utf-8') as f:
                f.write(serialize_config(self.run_report.config))
        except OSError as e:
            raise OutputError(f"設定を書き出せません: {e}", path=path) from e
        return os.path.abspath(path)

    def generate_html(self, filename='report.html'):
        """
        HTML形式のサマリーを生成する

        Returns:
            str: 出力ファイルのパス
        """
        path = self._path(filename)
        try:
            with open(path, 'w', newline='\n', encoding='utf-8') as f:
                f.write(self._generate_html_content())
        except OSError as e:
            raise OutputError(f"HTML を書き出せません: {e}", path=path) from e
        return os.path.abspath(path)

    def _generate_html_content(self):
        report = self.run_report
        table_rows = []
        for check in report.checks:
            measured = check.get("measured")
            shown = format_number(measured) if isinstance(measured, (int, float)) and not isinstance(measured, bool) else measured
            table_rows.append(
                f'<tr><td>{html.escape(str(check["name"]))}</td>'
                f'<td class="{check["status"]}">{check["status"]}</td>'
                f'<td>{html.escape(str(shown))}</td>'
                f'<td>{html.escape(str(check["threshold"]))}</td>'
                f'<td>{html.escape(str(check.get("description", "")))}</td></tr>'
            )

        value_items = []
        for name, value in report.values.items():
            shown = format_number(value) if isinstance(value, float) else value
            value_items.append(f'<div class="value-item">{html.escape(str(name))}: {html.escape(str(shown))}</div>')

        status = report.status
        summary_class = "summary-success" if status == "Success" else "summary-failed"
        counts = {name: sum(1 for c in report.checks if c["status"] == name)
                  for name in STATUSES}
        summary = (f'<div class="summary-box {summary_class}"><strong>{html.escape(report.preset)}: {status}</strong>'
                   f' (成功: {counts["Success"]}, 失敗: {counts["Failed"]}, 警告: {counts["Warning"]},'
                   f' エラー: {counts["Error"]})</div>')

        return HTML_TEMPLATE.format(
            preset=html.escape(report.preset),
            summary=summary,
            table_rows="\n            ".join(table_rows),
            values="\n    ".join(value_items) or "<p>なし</p>",
        )


HTML_TEMPLATE = '''<!DOCTYPE html>
<html>
<head>
    <meta charset="utf-8">
    <meta name="viewport" content="width=device-width, initial-scale=1.0">
    <title>数値実験の検証結果: {preset}</title>
    <style>
        body {{
            font-family: 'Segoe UI', Tahoma, Geneva, Verdana, sans-serif;
            line-height: 1.6;
            color: #333;
            max-width: 1200px;
            margin: 0 auto;
            padding: 20px;
            background-color: #f5f5f5;
        }}
        h1 {{
            border-bottom: 2px solid #ddd;
            padding-bottom: 10px;
        }}
        table {{
            width: 100%;
            border-collapse: collapse;
            margin-bottom: 20px;
        }}
        th, td {{
            padding: 8px 12px;
            text-align: left;
            border-bottom: 1px solid #ddd;
        }}
        .Success {{ background-color: #dff0d8; color: #3c763d; font-weight: bold; }}
        .Failed {{ background-color: #f2dede; color: #a94442; font-weight: bold; }}
        .Warning {{ background-color: #fcf8e3; color: #8a6d3b; font-weight: bold; }}
        .Error {{ background-color: #f2dede; color: #8a1f11; font-weight: bold; }}
        .summary-box {{ margin: 20px 0; padding: 15px; border-left: 5px solid #ddd; }}
        .summary-success {{ border-left-color: #3c763d; background-color: #dff0d8; }}
        .summary-failed {{ border-left-color: #a94442; background-color: #f2dede; }}
        .value-item {{ margin-bottom: 5px; padding: 5px; border-bottom: 1px solid #eee; }}
    </style>
</head>
<body>
    <h1>数値実験の検証結果: {preset}</h1>
    {summary}
    <h2>検証項目</h2>
    <table>
        <thead>
            <tr><th>項目</th><th>判定</th><th>測定値</th><th>基準</th><th>補足</th></tr>
        </thead>
        <tbody>
            {table_rows}
        </tbody>
    </table>
    <h2>測定値</h2>
    {values}
</body>
</html>
'''
