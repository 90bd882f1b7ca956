#!/usr/bin/env python3
"""
数値の書式と検証項目(チェック)の組み立てに関するユーティリティ関数
"""
import math

STATUSES = ("Success", "Failed", "Warning", "Error")


def format_number(value):
    """
    17桁の有効数字で数値を文字列にする (IEEE-754 の倍精度を一意に表せる桁数)

    Parameters:
        value (float): 値

    Returns:
        str: 書式化した文字列 (nan/inf はそのまま)
    """
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return "%.17g" % value


def make_check(name, passed, measured, threshold, description="", warn_only=False):
    """
    検証項目を1件作る

    Parameters:
        name (str): 検証項目名
        passed (bool): 合否
        measured: 測定値
        threshold (str): 判定基準の説明
        description (str): 補足
        warn_only (bool): 不合格を Failed ではなく Warning として扱う

    Returns:
        dict: 検証項目
    """
    if passed:
        status = "Success"
    else:
        status = "Warning" if warn_only else "Failed"
    return {
        "name": name,
        "status": status,
        "measured": measured,
        "threshold": threshold,
        "description": description,
    }


def error_check(name, error):
    """例外から Error 状態の検証項目を作る"""
    code = getattr(error, "code", type(error).__name__)
    return {
        "name": name,
        "status": "Error",
        "measured": None,
        "threshold": "",
        "description": f"{code}: {error}",
    }


def at_most(name, measured, limit, description="", warn_only=False):
    """measured ≤ limit の検証項目"""
    passed = measured is not None and math.isfinite(measured) and measured <= limit
    return make_check(name, passed, measured, f"<= {limit:g}", description, warn_only)


def at_least(name, measured, limit, description="", warn_only=False):
    """measured ≥ limit の検証項目"""
    passed = measured is not None and math.isfinite(measured) and measured >= limit
    return make_check(name, passed, measured, f">= {limit:g}", description, warn_only)


def within(name, measured, lower, upper, description="", warn_only=False):
    """lower ≤ measured ≤ upper の検証項目"""
    passed = measured is not None and math.isfinite(measured) and lower <= measured <= upper
    return make_check(name, passed, measured, f"[{lower:g}, {upper:g}]", description, warn_only)


def relative_close(name, measured, reference, tolerance, description="", warn_only=False):
    """|measured - reference| ≤ tolerance·|reference| の検証項目 (測定値は相対差)"""
    if reference == 0.0 or not math.isfinite(measured):
        diff = math.inf
    else:
        diff = abs(measured - reference) / abs(reference)
    return make_check(name, diff <= tolerance, diff, f"relative <= {tolerance:g}",
                      description or f"measured={measured:.6g}, reference={reference:.6g}", warn_only)


def overall_status(checks):
    """
    検証項目全体の状態を決める (Warning は合否に影響しない)

    Returns:
        str: Error > Failed > Success の順で最も重い状態
    """
    statuses = {check["status"] for check in checks}
    if "Error" in statuses:
        return "Error"
    if "Failed" in statuses:
        return "Failed"
    return "Success"

