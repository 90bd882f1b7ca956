#!/usr/bin/env python3
"""
corevac メインスクリプト

固体コアを持つ減衰付きEuler方程式の数値実験 (プリセット) を実行し、
時系列の CSV と結果の JSON/HTML を出力します。
"""
import sys

from core.config import load_config
from core.parser import parse_arguments
from core.preset import describe_presets, load_preset_class, load_preset_defaults
from core.preset_runner import PresetRunner
from physics.errors import CorevacError
from utils.file_utils import get_platform_info, log_message, resolve_output_dir, set_debug
from utils.parser import STATUSES

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def list_available_presets():
    """
    利用可能なプリセットの一覧を表示する
    """
    print("利用可能なプリセット:")
    for name, description in describe_presets():
        print(f"  - {name}: {description}")


def main(argv=None):
    """
    メイン処理

    Returns:
        int: 終了コード
    """
    args = parse_arguments(argv)

    if args.command == 'presets':
        list_available_presets()
        return EXIT_OK

    set_debug(args.debug)
    platform_info = get_platform_info()
    log_message("INFO", f"実行環境: {platform_info['system']} {platform_info['release']} ({platform_info['machine']})")
    log_message("INFO", f"Python バージョン: {platform_info['python']}")

    # 設定とプリセット名の誤りは実行前に検出する
    try:
        config = load_config(args.config, preset_defaults=load_preset_defaults)
        load_preset_class(config.preset)
    except CorevacError as e:
        log_message("ERROR", str(e))
        return EXIT_CONFIG

    output_dir = resolve_output_dir(args.out)
    runner = PresetRunner(config, output_dir, log_dir=args.log_dir, jobs=args.jobs,
                          silent=args.silent, html_report=not args.no_html)
    run_report = runner.run()

    counts = {name: sum(1 for check in run_report.checks if check['status'] == name)
              for name in STATUSES}
    print(f"\n[サマリー] プリセット: {config.preset}, 判定: {run_report.status}, "
          f"成功: {counts['Success']}, 失敗: {counts['Failed']}, 警告: {counts['Warning']}, エラー: {counts['Error']}")

    return EXIT_OK if run_report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
