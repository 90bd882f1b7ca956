"""
数値実験ランナーのユーティリティモジュール
"""

from utils.file_utils import Tee, get_platform_info, log_message, set_debug, resolve_output_dir, setup_logging, file_checksum
from utils.parser import format_number, make_check, error_check, overall_status

__all__ = [
    'Tee',
    'get_platform_info',
    'log_message',
    'set_debug',
    'resolve_output_dir',
    'setup_logging',
    'file_checksum',
    'format_number',
    'make_check',
    'error_check',
    'overall_status'
]
