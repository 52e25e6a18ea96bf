"""
Barridos de experimentos: un parámetro (H, M o N) sobre una rejilla,
R repeticiones por punto y varios pipelines.

Semillas derivadas de forma determinista:
    SeedSequence(seed_base, spawn_key=(índice_rejilla, repetición))
Todos los pipelines de un mismo (punto, repetición) comparten semilla e
instancia. Las filas se emiten en orden (punto, pipeline, repetición)
independientemente del número de workers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.errors import ConfigError, LmabError
from src.model.instance import LmabInstance
from src.pipeline.runner import CSV_COLUMNS, resolve_instance, run_pipeline
from src.schemas.config_schema import RunConfigSchema, SweepConfigSchema

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepJob:
    grid_index: int
    grid_value: int
    pipeline: str
    repetition: int
    config: RunConfigSchema
    instance: LmabInstance | None
    error: str | None = None


def derive_seed(base_seed: int, grid_index: int, repetition: int) -> int:
    seq = np.random.SeedSequence(base_seed, spawn_key=(grid_index, repetition))
    return int(seq.generate_state(1)[0])


def _grid_instance(
    base: RunConfigSchema, vary: str, grid_index: int, value: int, shared: LmabInstance | None
) -> LmabInstance:
    if vary != "m":
        assert shared is not None
        return shared.with_horizon(value) if vary == "h" else shared

    assert base.generator is not None
    gen = base.generator
    seed = gen.seed if gen.seed is not None else base.seed
    gen_seed = int(np.random.SeedSequence(seed, spawn_key=(grid_index,)).generate_state(1)[0])
    update: dict[str, Any] = {"m": value, "seed": gen_seed}
    if gen.rank is not None and gen.rank > value:
        logger.info("[Sweep] rango %d recortado a M=%d", gen.rank, value)
        update["rank"] = value
    cfg = base.model_copy(update={"generator": gen.model_copy(update=update)})
    return resolve_instance(cfg)


def build_jobs(sweep_cfg: SweepConfigSchema) -> list[SweepJob]:
    """
    Expande el barrido en trabajos. Una configuración base inválida lanza
    ConfigError; un punto de rejilla inválido produce trabajos con `error`
    que `run_job` convierte en filas `failed`.
    """
    base, plan = sweep_cfg.base, sweep_cfg.sweep
    shared: LmabInstance | None = None
    if plan.vary == "m":
        if base.generator is None:
            raise ConfigError("Barrer M requiere una configuración con generator")
    else:
        shared = resolve_instance(base)

    jobs = []
    for gi, value in enumerate(plan.grid):
        instance: LmabInstance | None = None
        error: str | None = None
        try:
            instance = _grid_instance(base, plan.vary, gi, value, shared)
        except (LmabError, ValueError) as err:
            error = str(err)
            logger.warning("[Sweep] punto %s=%d inválido: %s", plan.vary, value, err)
        for pipeline in plan.pipelines:
            for rep in range(plan.reps):
                update: dict[str, Any] = {
                    "pipeline": pipeline,
                    "seed": derive_seed(base.seed, gi, rep),
                    "output": None,
                }
                if plan.vary == "n":
                    update["n"] = value
                if plan.vary == "h":
                    update["horizon"] = value
                jobs.append(
                    SweepJob(
                        gi, value, pipeline, rep, base.model_copy(update=update), instance, error
                    )
                )
    return jobs


def run_job(job: SweepJob, grid_param: str) -> dict[str, Any]:
    """Ejecuta un trabajo; un fallo produce una fila `failed` en lugar de abortar."""
    try:
        if job.instance is None:
            raise ConfigError(job.error or "instancia no disponible")
        report = run_pipeline(job.config, job.instance)
        return report.to_row(grid_param, job.grid_value)
    except Exception as err:
        logger.warning(
            "[Sweep] %s en %s=%d (rep %d) falló: %s",
            job.pipeline,
            grid_param,
            job.grid_value,
            job.repetition,
            err,
        )
        row: dict[str, Any] = {col: np.nan for col in CSV_COLUMNS}
        row.update(
            pipeline=job.pipeline,
            grid_param=grid_param,
            grid_value=job.grid_value,
            seed=job.config.seed,
            wallclock_ms=0.0,
            status="failed",
        )
        return row


def run_sweep(sweep_cfg: SweepConfigSchema, progress: bool = True) -> pd.DataFrame:
    plan = sweep_cfg.sweep
    jobs = build_jobs(sweep_cfg)
    logger.info(
        "[Sweep] %d ejecuciones: %s ∈ %s × %s × %d reps",
        len(jobs),
        plan.vary,
        plan.grid,
        plan.pipelines,
        plan.reps,
    )

    params = [plan.vary] * len(jobs)
    bar = tqdm(total=len(jobs), desc="Barrido", unit="run", disable=not progress)
    if plan.workers == 1:
        rows = []
        for job, param in zip(jobs, params):
            rows.append(run_job(job, param))
            bar.update(1)
    else:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            rows = []
            # map conserva el orden de entrada
            for row in pool.map(run_job, jobs, params):
                rows.append(row)
                bar.update(1)
    bar.close()

    failed = sum(row["status"] == "failed" for row in rows)
    if failed:
        logger.warning("[Sweep] %d de %d ejecuciones fallidas", failed, len(rows))
    return pd.DataFrame(rows, columns=list(CSV_COLUMNS))


def write_sweep_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info("[Sweep] CSV escrito en %s (%d filas)", path, len(frame))
    return path
