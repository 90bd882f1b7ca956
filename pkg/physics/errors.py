#!/usr/bin/env python3
"""
数値実験で発生するエラーの定義

各エラーは固定のエラーコード(code)を持ち、レポートやログにそのまま出力されます。
"""


class CorevacError(Exception):
    """全エラーの基底クラス"""

    code = "corevac_error"

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context

    def __str__(self):
        text = super().__str__()
        if self.context:
            details = ", ".join(f"{key}={value}" for key, value in sorted(self.context.items()))
            return f"[{self.code}] {text} ({details})"
        return f"[{self.code}] {text}"


class DomainError(CorevacError):
    code = "domain_error"


class MassExceedsThreshold(CorevacError):
    code = "mass_exceeds_threshold"


class NonConvergence(CorevacError):
    code = "non_convergence"


class NoZeroFound(CorevacError):
    code = "no_zero_found"


class InvalidGrading(CorevacError):
    code = "invalid_grading"


class JacobianDegenerate(CorevacError):
    code = "jacobian_degenerate"


class AmplitudeTooLarge(CorevacError):
    code = "amplitude_too_large"


class CflViolation(CorevacError):
    code = "cfl_violation"


class EvolutionError(CorevacError):
    """時間発展中のエラー(発生時刻 failure_time を保持)"""

    code = "evolution_error"

    def __init__(self, message, failure_time, cause=None, **context):
        super().__init__(message, failure_time=failure_time, **context)
        self.failure_time = failure_time
        self.cause = cause
        if cause is not None:
            self.code = cause.code


class OrderUnavailable(CorevacError):
    code = "order_unavailable"


class DegenerateDenominator(CorevacError):
    code = "degenerate_denominator"


class HypothesisViolated(CorevacError):
    code = "hypothesis_violated"


class InsufficientSamples(CorevacError):
    code = "insufficient_samples"


class NonpositiveEnergy(CorevacError):
    code = "nonpositive_energy"


class EigensolverFailure(CorevacError):
    code = "eigensolver_failure"


class UnstableMode(CorevacError):
    code = "unstable_mode"


class ParseError(CorevacError):
    code = "parse_error"


class ValidationError(CorevacError):
    code = "validation_error"


class UnknownPreset(CorevacError):
    code = "unknown_preset"


class OutputError(CorevacError):
    code = "io_error"
