#!/usr/bin/env python3
"""
ログ出力とファイル操作に関するユーティリティ関数
"""
import datetime
import hashlib
import os
import platform
import sys

OUTPUT_ENV_VAR = "COREVAC_OUT"
DEFAULT_OUTPUT_DIR = "artifacts"

_DEBUG = False


class Tee:
    """
    標準出力と標準エラー出力をログファイルにも書き出すためのクラス
    """
    def __init__(self, filename, mode='a'):
        self.file = open(filename, mode, encoding='utf-8')
        self.stdout = sys.stdout
        self.stderr = sys.stderr

    def start_redirect(self):
        """リダイレクト開始"""
        sys.stdout = self
        sys.stderr = self

    def stop_redirect(self):
        """リダイレクト停止"""
        sys.stdout = self.stdout
        sys.stderr = self.stderr
        self.file.close()

    def write(self, obj):
        self.file.write(obj)
        self.stdout.write(obj)
        self.file.flush()

    def flush(self):
        self.file.flush()
        self.stdout.flush()


def set_debug(enabled):
    """DEBUG レベルのメッセージ出力を切り替える"""
    global _DEBUG
    _DEBUG = bool(enabled)


def is_debug():
    return _DEBUG


def log_message(level, message):
    """
    "[LEVEL] message" 形式でメッセージを出力する

    Parameters:
        level (str): INFO, WARNING, ERROR, DEBUG のいずれか
        message (str): メッセージ
    """
    level = level.upper()
    if level == "DEBUG" and not _DEBUG:
        return
    print(f"[{level}] {message}")


def get_platform_info():
    """
    実行プラットフォームの情報を取得

    Returns:
        dict: プラットフォーム情報
    """
    return {
        'system': platform.system(),
        'release': platform.release(),
        'version': platform.version(),
        'machine': platform.machine(),
        'python': platform.python_version()
    }


def resolve_output_dir(cli_value=None):
    """
    出力ディレクトリを決定する (--out > 環境変数 COREVAC_OUT > artifacts)

    Parameters:
        cli_value (str): --out で指定された値

    Returns:
        str: 絶対パス
    """
    if cli_value:
        return os.path.abspath(cli_value)
    env_value = os.environ.get(OUTPUT_ENV_VAR)
    if env_value:
        return os.path.abspath(env_value)
    return os.path.abspath(DEFAULT_OUTPUT_DIR)


def setup_logging(log_dir, preset_name):
    """
    ログファイルのパスを決めて Tee を作成する

    Parameters:
        log_dir (str): ログディレクトリ
        preset_name (str): プリセット名

    Returns:
        tuple: (log_file_path, tee)
    """
    os.makedirs(log_dir, exist_ok=True)
    timestamp_str = datetime.datetime.now().strftime("%Y%m%d_%H%M%S")
    # 安全なファイル名を作成（無効な文字をエスケープ）
    safe_name = "".join([c if c.isalnum() or c in ['_', '-'] else '_' for c in preset_name])
    log_file_path = os.path.join(log_dir, f"corevac_{safe_name}_{timestamp_str}.log")
    tee = Tee(log_file_path, 'w')
    return log_file_path, tee


def file_checksum(path):
    """
    ファイルの SHA-256 を返す (成果物の決定性の確認用)
    """
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(65536), b''):
            digest.update(chunk)
    return digest.hexdigest()
