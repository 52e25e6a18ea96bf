"""
Excepciones del proyecto.

Todas heredan también de la excepción estándar equivalente (ValueError,
RuntimeError) para que el código llamador pueda capturarlas sin importar
este módulo.
"""

from __future__ import annotations


class LmabError(Exception):
    """Base de todos los errores propios."""


class ConfigError(LmabError, ValueError):
    """Configuración inválida (CLI → exit code 2)."""


class EnumerationGuardError(LmabError, RuntimeError):
    """La enumeración exacta Z^H supera la guarda; usar Monte Carlo."""


class PlanningBudgetError(LmabError, RuntimeError):
    """El DP de beliefs supera la guarda de estados; usar QMDP."""


class StageError(LmabError, RuntimeError):
    """Fallo en una etapa del pipeline (CLI → exit code 3)."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
