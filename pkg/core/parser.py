#!/usr/bin/env python3
"""
コマンドライン引数の解析モジュール
"""
import argparse
import os


def build_parser():
    """
    corevac コマンドの引数パーサを作る

    Returns:
        argparse.ArgumentParser: パーサ
    """
    parser = argparse.ArgumentParser(
        prog='corevac',
        description='固体コアを持つ減衰付きEuler方程式の数値実験ツール',
        formatter_class=argparse.RawTextHelpFormatter)
    subparsers = parser.add_subparsers(dest='command', required=True)

    run_parser = subparsers.add_parser(
        'run', help='設定ファイルのプリセットを実行',
        formatter_class=argparse.RawTextHelpFormatter)
    run_parser.add_argument('-c', '--config',
                            required=True,
                            help='シナリオ設定ファイル (YAML)')
    run_parser.add_argument('-o', '--out',
                            default=None,
                            help='成果物出力のディレクトリ\n'
                                 '(優先順位: --out > 環境変数 COREVAC_OUT > artifacts)')
    run_parser.add_argument('-j', '--jobs',
                            type=int,
                            default=1,
                            help='並列に実行するケース数 (デフォルト: 1)')
    run_parser.add_argument('--log-dir',
                            default='logs',
                            help='ログ出力のディレクトリ (デフォルト: logs)')
    run_parser.add_argument('--debug',
                            action='store_true',
                            help='デバッグモード (DEBUG メッセージとトレースバックを出力)')
    run_parser.add_argument('-s', '--silent',
                            action='store_true',
                            help='サイレントモード (ログファイルへの出力を行わない)')
    run_parser.add_argument('--no-html',
                            action='store_true',
                            help='HTMLサマリーの生成を無効化')

    subparsers.add_parser('presets', help='利用可能なプリセット一覧を表示')
    return parser


def parse_arguments(argv=None):
    """
    コマンドライン引数を解析する

    Returns:
        argparse.Namespace: 解析された引数
    """
    args = build_parser().parse_args(argv)
    if args.command == 'run':
        args.config = os.path.abspath(args.config)
        args.log_dir = os.path.abspath(args.log_dir)
    return args
