"""
実験プリセット

各モジュール <name>_preset.py が BasePreset のサブクラスを1つ定義し、
既定値を configs/<name>.yaml に置きます。
"""
