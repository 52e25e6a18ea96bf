"""
Lectura/escritura de instancias, políticas, configuraciones y reportes.

Todo fichero es JSON UTF-8. Los floats se serializan con `json.dumps`
(repr de Python), por lo que escribir y releer una instancia devuelve los
mismos dobles bit a bit.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError

from src.errors import ConfigError
from src.model.instance import LmabInstance
from src.model.policies import PolicyTree
from src.schemas.config_schema import RunConfigSchema, SweepConfigSchema
from src.schemas.instance_schema import InstanceDocument, PolicyTreeDocument

logger = logging.getLogger(__name__)


def _write_json(path: str | Path, payload: dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(payload, indent=2, ensure_ascii=False, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    logger.debug("Escrito %s", path)
    return path


def _read_document(path: str | Path, schema: type[BaseModel]) -> Any:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as err:
        raise ConfigError(f"No existe el fichero: {path}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"JSON inválido en {path}: {err}") from err
    return validate_document(raw, schema, source=str(path))


def validate_document(raw: Any, schema: type[BaseModel], source: str = "<dict>") -> Any:
    """Valida contra el schema; errores de contrato se convierten en ConfigError."""
    try:
        return schema.model_validate(raw)
    except ValidationError as err:
        raise ConfigError(f"{schema.__name__} inválido en {source}:\n{err}") from err


# ============================================================================
# INSTANCIAS Y POLÍTICAS
# ============================================================================


def write_instance(inst: LmabInstance, path: str | Path) -> Path:
    return _write_json(path, InstanceDocument.from_instance(inst).model_dump(exclude_none=True))


def read_instance(path: str | Path) -> LmabInstance:
    doc: InstanceDocument = _read_document(path, InstanceDocument)
    try:
        return doc.to_instance()
    except ValueError as err:
        raise ConfigError(f"Instancia inválida en {path}: {err}") from err


def write_policy(tree: PolicyTree, A: int, path: str | Path) -> Path:
    return _write_json(path, PolicyTreeDocument.from_policy(tree, A).model_dump())


def read_policy(path: str | Path) -> PolicyTree:
    doc: PolicyTreeDocument = _read_document(path, PolicyTreeDocument)
    return doc.to_policy()


# ============================================================================
# CONFIGURACIONES Y REPORTES
# ============================================================================


_INSTANCE_SOURCES = ("instance_path", "generator")


def _apply_overrides(raw: dict[str, Any], overrides: dict[str, Any] | None) -> dict[str, Any]:
    merged = dict(raw)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    # una fuente de instancia del CLI sustituye a la del fichero
    for source in _INSTANCE_SOURCES:
        if source in overrides:
            for other in _INSTANCE_SOURCES:
                if other != source:
                    merged.pop(other, None)
    merged.update(overrides)
    return merged


def load_run_config(
    path: str | Path | None, overrides: dict[str, Any] | None = None
) -> RunConfigSchema:
    """Carga una configuración; los flags del CLI (no-None) tienen prioridad."""
    raw: dict[str, Any] = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (FileNotFoundError, json.JSONDecodeError) as err:
            raise ConfigError(f"No se pudo leer la configuración {path}: {err}") from err
    return validate_document(_apply_overrides(raw, overrides), RunConfigSchema, str(path))


def load_sweep_config(
    path: str | Path,
    base_overrides: dict[str, Any] | None = None,
    sweep_overrides: dict[str, Any] | None = None,
) -> SweepConfigSchema:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (FileNotFoundError, json.JSONDecodeError) as err:
        raise ConfigError(f"No se pudo leer la configuración {path}: {err}") from err

    # un fichero de ejecución simple también vale como base del barrido
    if "base" not in raw:
        raw = {"base": raw}
    raw["base"] = _apply_overrides(raw["base"], base_overrides)
    raw["sweep"] = _apply_overrides(raw.get("sweep", {}), sweep_overrides)
    return validate_document(raw, SweepConfigSchema, str(path))


def write_report(report: dict[str, Any], path: str | Path) -> Path:
    return _write_json(path, report)
