"""
CLI `lmab`
==========

    lmab run --config run.json [--pipeline ed-mle --n 50000 ...]
    lmab sweep --config sweep.json --vary h --grid 2:9 --reps 10
    lmab gen-instance --m 4 --a 20 --z 2 --rank 4 --out inst.json
    lmab eval --instance inst.json --policy pol.json

Códigos de salida: 0 éxito, 2 configuración inválida, 3 fallo de etapa.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from src.config import Config
from src.errors import ConfigError, EnumerationGuardError, LmabError
from src.generators.instance_generator import LmabInstanceGenerator
from src.model.instance import SeparationConfig, validate_instance
from src.model.oracles import exact_policy_value
from src.model.simulator import monte_carlo_policy_value
from src.pipeline.runner import run_pipeline
from src.pipeline.sweep import run_sweep, write_sweep_csv
from src.schemas.config_schema import PIPELINES
from src.storage.instance_store import (
    load_run_config,
    load_sweep_config,
    read_instance,
    read_policy,
    write_instance,
    write_report,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3


def _banner(title: str) -> None:
    print("=" * 70)
    print(f"  {title}")
    print("=" * 70)


def _delta(value: str) -> float | str:
    if value == "auto":
        return value
    try:
        return float(value)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"delta debe ser un número o 'auto': {value}") from err


def parse_grid(text: str) -> list[int]:
    """'2:9' → [2..9] (inclusivo); '2,4,8' → [2, 4, 8]."""
    try:
        if ":" in text:
            lo, hi = (int(part) for part in text.split(":"))
            grid = list(range(lo, hi + 1))
        else:
            grid = [int(part) for part in text.split(",") if part]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"Rejilla inválida: {text!r}") from err
    if not grid:
        raise argparse.ArgumentTypeError(f"Rejilla vacía: {text!r}")
    return grid


# ============================================================================
# SUBCOMANDOS
# ============================================================================


def _run_overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {
        "instance_path": args.instance,
        "pipeline": args.pipeline,
        "horizon": args.horizon,
        "n0": args.n0,
        "n1": args.n1,
        "n": args.n,
        "eval_episodes": args.eval_episodes,
        "epsilon": args.epsilon,
        "delta_sub": args.delta_sub,
        "delta_tsr": args.delta_tsr,
        "w_min": args.w_min,
        "oracle": True if args.oracle else None,
        "seed": args.seed,
        "output": args.output,
    }


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_run_config(args.config, _run_overrides(args))
    _banner(f"LMAB run: pipeline {cfg.pipeline}")
    report = run_pipeline(cfg)

    out = Path(cfg.output or Path(Config.OUTPUT_DIR) / f"run_{cfg.pipeline}_{cfg.seed}")
    out.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame([report.to_row()]).to_csv(out.with_suffix(".csv"), index=False, lineterminator="\n")
    write_report(report.to_dict(), out.with_suffix(".json"))

    print(f"  Recompensa por paso: {report.per_step_reward:.4f} ± {report.stderr:.4f}")
    if report.wasserstein is not None:
        print(f"  Wasserstein(θ̂, θ*):  {report.wasserstein:.4g}")
    if report.optimal_value is not None:
        print(f"  V* por paso:         {report.optimal_value / report.H:.4f}")
    print(f"  Episodios usados:    {report.episodes_used:,}")
    if report.flags:
        print(f"  Avisos:              {', '.join(report.flags)}")
    print(f"  Salida:              {out.with_suffix('.csv')}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    sweep_overrides = {
        "vary": args.vary,
        "grid": args.grid,
        "reps": args.reps,
        "pipelines": args.pipelines.split(",") if args.pipelines else None,
        "workers": args.workers,
    }
    cfg = load_sweep_config(args.config, {"seed": args.seed}, sweep_overrides)
    plan = cfg.sweep
    _banner(f"LMAB sweep: {plan.vary} ∈ {plan.grid}")
    frame = run_sweep(cfg, progress=not args.quiet)

    out = Path(args.output or Path(Config.OUTPUT_DIR) / f"sweep_{plan.vary}_{cfg.base.seed}.csv")
    write_sweep_csv(frame, out)

    ok = frame[frame["status"] == "ok"]
    if not ok.empty:
        summary = ok.groupby(["grid_value", "pipeline"], sort=True)["per_step_reward"].mean()
        print(summary.unstack("pipeline").to_string(float_format=lambda x: f"{x:.4f}"))
    print(f"\n  Filas: {len(frame)} ({int((frame['status'] == 'failed').sum())} fallidas)")
    print(f"  Salida: {out}")
    return EXIT_OK


def cmd_gen_instance(args: argparse.Namespace) -> int:
    gen = LmabInstanceGenerator(seed=args.seed)
    try:
        if args.gaussian:
            inst = gen.generate_gaussian_instance(args.m, args.a, args.h, args.rank)
        else:
            separation = None if args.gamma is None else SeparationConfig(args.gamma)
            inst = gen.generate_instance(args.m, args.a, args.z, args.h, args.rank, separation)
    except ValueError as err:
        raise ConfigError(str(err)) from err

    report = validate_instance(inst)
    if not report.passed:
        raise ConfigError(f"Instancia generada inválida: {sorted(report.codes)}")
    path = write_instance(inst, args.out)
    print(f"  Instancia M={inst.M}, A={inst.A}, Z={inst.Z}, H={inst.H} → {path}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    inst = read_instance(args.instance)
    policy = read_policy(args.policy)
    if inst.H > policy.depth:
        raise ConfigError(f"Política de profundidad {policy.depth} < H={inst.H}")
    try:
        value = exact_policy_value(inst, policy)
        print(f"  V(π) exacto: {value:.10g}  (por paso {value / inst.H:.6f})")
    except EnumerationGuardError:
        rng = np.random.default_rng(args.seed)
        est = monte_carlo_policy_value(inst, policy, args.episodes, rng)
        print(f"  V(π) Monte Carlo: {est.mean:.6f} ± {est.stderr:.6f} ({est.episodes} episodios)")
    return EXIT_OK


# ============================================================================
# PARSER
# ============================================================================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lmab", description="Aprendizaje en bandidos latentes")
    parser.add_argument("--log-level", default=Config.LOG_LEVEL)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Una ejecución de pipeline")
    run.add_argument("--config")
    run.add_argument("--instance")
    run.add_argument("--pipeline", choices=PIPELINES)
    run.add_argument("--horizon", type=int)
    run.add_argument("--n0", type=int)
    run.add_argument("--n1", type=int)
    run.add_argument("--n", type=int)
    run.add_argument("--eval-episodes", type=int)
    run.add_argument("--epsilon", type=float)
    run.add_argument("--delta-sub", type=_delta)
    run.add_argument("--delta-tsr", type=_delta)
    run.add_argument("--w-min", type=float)
    run.add_argument("--oracle", action="store_true")
    run.add_argument("--seed", type=int)
    run.add_argument("--output", help="Prefijo de salida (.csv y .json)")
    run.set_defaults(handler=cmd_run)

    sweep = sub.add_parser("sweep", help="Barrido sobre H, M o N")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--vary", choices=("h", "m", "n"))
    sweep.add_argument("--grid", type=parse_grid)
    sweep.add_argument("--reps", type=int)
    sweep.add_argument("--pipelines", help="Lista separada por comas")
    sweep.add_argument("--workers", type=int)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--output")
    sweep.add_argument("--quiet", action="store_true")
    sweep.set_defaults(handler=cmd_sweep)

    gen = sub.add_parser("gen-instance", help="Genera una instancia aleatoria")
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--a", type=int, required=True)
    gen.add_argument("--z", type=int, default=2)
    gen.add_argument("--h", type=int, default=3)
    gen.add_argument("--rank", type=int)
    gen.add_argument("--gamma", type=float)
    gen.add_argument("--gaussian", action="store_true")
    gen.add_argument("--seed", type=int, default=Config.SEED)
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=cmd_gen_instance)

    ev = sub.add_parser("eval", help="Valor de una política en una instancia")
    ev.add_argument("--instance", required=True)
    ev.add_argument("--policy", required=True)
    ev.add_argument("--episodes", type=int, default=Config.EVAL_EPISODES)
    ev.add_argument("--seed", type=int, default=Config.SEED)
    ev.set_defaults(handler=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return int(args.handler(args))
    except ConfigError as err:
        logger.error("Configuración inválida: %s", err)
        return EXIT_CONFIG
    except LmabError as err:
        logger.error("Fallo de etapa: %s", err)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
