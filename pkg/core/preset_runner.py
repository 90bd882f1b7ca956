#!/usr/bin/env python3
"""
プリセットの実行とレポート出力を管理するクラス
"""
import os
import time
import traceback

from core.preset import load_preset_class
from core.report import Report, RunReport
from physics.errors import CorevacError
from utils.file_utils import is_debug, log_message, setup_logging
from utils.parser import error_check


def run_preset(config, output_dir, jobs=1, html_report=True):
    """
    設定で指定されたプリセットを実行して成果物を書き出す

    Parameters:
        config (ScenarioConfig): 設定
        output_dir (str): 出力ディレクトリ
        jobs (int): 並列に実行するケース数 (window-sweep など)
        html_report (bool): HTML サマリーを出力するかどうか

    Returns:
        tuple: (RunReport, 出力ファイルの辞書)
    """
    preset_class = load_preset_class(config.preset)
    preset = preset_class(config, output_dir=output_dir, jobs=jobs)

    started = time.perf_counter()
    try:
        run_report = preset.run()
    except CorevacError as e:
        log_message("ERROR", f"{config.preset} の実行に失敗しました: {e}")
        if is_debug():
            traceback.print_exc()
        run_report = RunReport(preset=config.preset, config=config, rows=preset.rows,
                               checks=preset.checks + [error_check("実行", e)],
                               fits=preset.fits, spectrum=preset.spectrum, values=preset.values)
    run_report.elapsed = time.perf_counter() - started
    log_message("INFO", f"{config.preset}: {run_report.status} (所要時間 {run_report.elapsed:.2f} 秒)")

    report = Report(run_report, output_dir)
    paths = {
        "csv": report.generate_csv(),
        "json": report.generate_json(),
        "config": report.generate_config(),
    }
    if html_report:
        paths["html"] = report.generate_html()
    return run_report, paths


class PresetRunner:
    """
    ログの設定とプリセットの実行を管理するクラス
    """

    def __init__(self, config, output_dir, log_dir="logs", jobs=1, silent=False, html_report=True):
        """
        Parameters:
            config (ScenarioConfig): 設定
            output_dir (str): 出力ディレクトリ
            log_dir (str): ログディレクトリ
            jobs (int): 並列数
            silent (bool): ログファイルへの出力を行わない
            html_report (bool): HTML サマリーを出力するかどうか
        """
        self.config = config
        self.output_dir = output_dir
        self.log_dir = log_dir
        self.jobs = jobs
        self.silent = silent
        self.html_report = html_report
        self.log_file = None
        self.paths = {}

    def setup(self):
        """
        出力ディレクトリとログファイルを準備する
        """
        os.makedirs(self.output_dir, exist_ok=True)
        if not self.silent:
            self.log_file, self.stdout_redirector = setup_logging(self.log_dir, self.config.preset)
            self.stdout_redirector.start_redirect()

    def run(self):
        """
        プリセットを実行する

        Returns:
            RunReport: 実行結果
        """
        self.setup()
        try:
            try:
                run_report, self.paths = run_preset(self.config, self.output_dir, self.jobs, self.html_report)
            except Exception as e:
                # プリセット外の予期しない例外も結果として残す
                log_message("ERROR", f"予期しないエラーが発生しました: {e}")
                if is_debug():
                    traceback.print_exc()
                run_report = RunReport(preset=self.config.preset, config=self.config,
                                       checks=[error_check("実行", e)])
                self.paths = {}
            for kind, path in self.paths.items():
                log_message("INFO", f"{kind.upper()} を出力しました: {path}")
            if self.log_file:
                log_message("INFO", f"ログファイル: {self.log_file}")
        finally:
            if not self.silent and hasattr(self, 'stdout_redirector'):
                self.stdout_redirector.stop_redirect()
        return run_report
