from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str
    source: str = ""

    def __str__(self) -> str:
        where = f"{self.source}:" if self.source else ""
        return f"{where}{self.line}:{self.col}: {self.message}"


class ApiaError(Exception):
    pass


class DslError(ApiaError):
    """All diagnostics collected while reading one input file."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class InconsistentEffects(ApiaError):
    def __init__(self, fluent: str, laws: tuple):
        self.fluent = fluent
        self.laws = laws
        rendered = "; ".join(str(law) for law in laws)
        super().__init__(f"contradictory effects on {fluent}: {rendered}")


class PolicyInconsistency(ApiaError):
    def __init__(self, message: str, rules: tuple = ()):
        self.rules = tuple(rules)
        super().__init__(message)


class DanglingWaiver(ApiaError):
    pass


class IntentionError(ApiaError):
    pass


class DiagnosisFailure(ApiaError):
    pass


class ScenarioError(ApiaError):
    pass
