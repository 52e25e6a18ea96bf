"""
Orquestación de una ejecución completa.

Pipelines:
    algorithm1-moments → Paso 1 (subespacio + núcleo) → Paso 2 (tensores +
                         emparejamiento de momentos, con un arranque EM sobre
                         N episodios núcleo si N > 0) → Paso 3 (recuperación) →
                         planificación → evaluación
    ed-mle             → Paso 1 → datos núcleo + init espectral + EM → Paso 3 → …
    tensor-init-em     → como ed-mle, reportando la init espectral pura y la refinada
    ucb                → UCB1 ingenuo sobre la mezcla
    genie              → QMDP sobre la instancia verdadera

Cada etapa se cronometra y sus fallos se relanzan como StageError con la
etiqueta de la etapa. Streams de semilla independientes para entrenamiento,
selección de w_min y evaluación.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.design.optimal_design import CoreSet, select_core_coordinates, solve_optimal_design
from src.errors import ConfigError, EnumerationGuardError, LmabError, PlanningBudgetError, StageError
from src.generators.instance_generator import (
    generate_random_gaussian_instance,
    generate_random_instance,
)
from src.mle.dataset import MleDataset, collect_mle_data, empirical_core_tensors
from src.mle.em import EmState, em_fit
from src.mle.spectral import init_spectral
from src.model.instance import LmabInstance, SeparationConfig
from src.model.oracles import exact_policy_value
from src.model.policies import Policy
from src.model.simulator import LmabEnvironment, MonteCarloEstimate, monte_carlo_policy_value
from src.moments.matching import BandConstraints, FitResult, MatchConfig, fit_moments
from src.moments.params import LatentParams
from src.moments.tensors import (
    MomentTensor,
    delta_tsr_schedule,
    estimate_moment_tensor,
    exact_moment_tensor,
    moment_residual,
)
from src.moments.wasserstein import wasserstein_distance
from src.planning.exact import plan_exact
from src.planning.qmdp import qmdp_policy
from src.planning.ucb import ucb_baseline
from src.recover.gaussian import gaussian_raw_moment_tensor
from src.recover.reward_model import recover_gaussian_means, recover_reward_model
from src.schemas.config_schema import RunConfigSchema
from src.storage.instance_store import read_instance
from src.subspace.second_moment import (
    delta_sub_schedule,
    estimate_second_moment,
    exact_second_moment,
    feature_matrix_from_subspace,
    top_m_eigenspace,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS: tuple[str, ...] = (
    "pipeline",
    "grid_param",
    "grid_value",
    "seed",
    "per_step_reward",
    "stderr",
    "wasserstein",
    "residual_max",
    "wallclock_ms",
    "status",
)


# ============================================================================
# REPORTE
# ============================================================================


def _finite_json(value: Any) -> Any:
    """NaN/±inf → None, recorriendo dicts y listas; JSON estricto sin NaN."""
    if isinstance(value, dict):
        return {key: _finite_json(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_json(item) for item in value]
    if isinstance(value, np.ndarray):
        return _finite_json(value.tolist())
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


@dataclass
class RunReport:
    pipeline: str
    seed: int
    M: int
    A: int
    H: int
    per_step_reward: float = math.nan
    stderr: float = math.nan
    wasserstein: float | None = None
    residuals: list[float] = field(default_factory=list)
    episodes_used: int = 0
    selection_episodes: int = 0
    optimal_value: float | None = None
    genie_value: float | None = None
    stage_ms: dict[str, float] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)
    model_summary: dict[str, Any] = field(default_factory=dict)
    extra: dict[str, float] = field(default_factory=dict)
    status: str = "ok"
    record_wallclock: bool = False
    policy: Policy | None = field(default=None, repr=False)
    model: LmabInstance | None = field(default=None, repr=False)

    @property
    def residual_max(self) -> float:
        return max(self.residuals) if self.residuals else math.nan

    @property
    def wallclock_ms(self) -> float:
        return float(sum(self.stage_ms.values())) if self.record_wallclock else 0.0

    def to_row(self, grid_param: str = "", grid_value: float | str = "") -> dict[str, Any]:
        return {
            "pipeline": self.pipeline,
            "grid_param": grid_param,
            "grid_value": grid_value,
            "seed": self.seed,
            "per_step_reward": self.per_step_reward,
            "stderr": self.stderr,
            "wasserstein": math.nan if self.wasserstein is None else self.wasserstein,
            "residual_max": self.residual_max,
            "wallclock_ms": self.wallclock_ms,
            "status": self.status,
        }

    def to_dict(self) -> dict[str, Any]:
        payload = {
            "pipeline": self.pipeline,
            "seed": self.seed,
            "M": self.M,
            "A": self.A,
            "H": self.H,
            "status": self.status,
            "per_step_reward": self.per_step_reward,
            "stderr": self.stderr,
            "wasserstein": self.wasserstein,
            "residuals": self.residuals,
            "episodes_used": self.episodes_used,
            "selection_episodes": self.selection_episodes,
            "optimal_value": self.optimal_value,
            "genie_value": self.genie_value,
            "flags": self.flags,
            "model": self.model_summary,
            "extra": self.extra,
            "stage_ms": self.stage_ms if self.record_wallclock else {},
        }
        return _finite_json(payload)


class _StageClock:
    """Cronometra etapas y etiqueta sus fallos."""

    def __init__(self, report: RunReport) -> None:
        self.report = report

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        except (StageError, ConfigError):
            raise
        except Exception as err:
            raise StageError(name, f"{type(err).__name__}: {err}") from err
        finally:
            self.report.stage_ms[name] = self.report.stage_ms.get(name, 0.0) + 1e3 * (
                time.perf_counter() - start
            )


# ============================================================================
# INSTANCIA Y SEMILLAS
# ============================================================================


def resolve_instance(cfg: RunConfigSchema) -> LmabInstance:
    """Instancia desde fichero o generador; `horizon` sobrescribe H."""
    if cfg.instance_path is not None:
        inst = read_instance(cfg.instance_path)
    else:
        gen = cfg.generator
        assert gen is not None
        rng = np.random.default_rng(cfg.seed if gen.seed is None else gen.seed)
        try:
            if gen.gaussian:
                rank = min(gen.m, gen.a) if gen.rank is None else gen.rank
                inst = generate_random_gaussian_instance(gen.m, gen.a, gen.h, rank, rng)
            else:
                rank = min(gen.m, gen.a * (gen.z - 1)) if gen.rank is None else gen.rank
                separation = None if gen.gamma is None else SeparationConfig(gen.gamma)
                inst = generate_random_instance(
                    gen.m, gen.a, gen.z, gen.h, rank, rng, separation=separation
                )
        except ValueError as err:
            raise ConfigError(f"Parámetros de generador inválidos: {err}") from err
    if cfg.horizon is not None and cfg.horizon != inst.H:
        inst = inst.with_horizon(cfg.horizon)
    return inst


def _seed_streams(seed: int) -> tuple[np.random.Generator, ...]:
    """(entrenamiento, selección, evaluación, evaluación auxiliar)."""
    return tuple(np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4))


# ============================================================================
# ETAPAS COMPARTIDAS
# ============================================================================


def _learn_core(
    env: LmabEnvironment,
    inst: LmabInstance,
    cfg: RunConfigSchema,
    rng: np.random.Generator,
    clock: _StageClock,
) -> CoreSet:
    with clock.stage("subspace"):
        if cfg.oracle:
            est = exact_second_moment(inst)
        else:
            est = estimate_second_moment(env, cfg.n0, rng)
        sub = top_m_eigenspace(est, inst.M)
        support_values = None if inst.is_gaussian else inst.support.values  # type: ignore[union-attr]
        phi = feature_matrix_from_subspace(sub, inst.A, support_values)

    with clock.stage("design"):
        design = solve_optimal_design(phi, cfg.design_tol, cfg.design_max_iter)
        core = select_core_coordinates(phi, design)
    logger.info("[Diseño] Núcleo de n=%d pares, g(ρ)=%.4g", core.n, design.g_value)
    return core


def _em_on_core(
    env: LmabEnvironment,
    inst: LmabInstance,
    core: CoreSet,
    cfg: RunConfigSchema,
    rng: np.random.Generator,
) -> tuple[MleDataset, LatentParams, EmState] | None:
    """N episodios ED sobre el núcleo, init espectral y EM; None si N=0."""
    data = collect_mle_data(env, core, cfg.n, rng)
    if data.N == 0:
        return None
    init = init_spectral(None, inst.M, rng, data=data)
    return data, init, em_fit(data, init, cfg.em_max_iter, cfg.em_tol)


def _plan(model: LmabInstance, report: RunReport) -> Policy:
    if model.is_gaussian:
        return qmdp_policy(model)
    try:
        return plan_exact(model).policy
    except PlanningBudgetError as err:
        logger.warning("[Plan] %s → QMDP", err)
        if "qmdp_fallback" not in report.flags:
            report.flags.append("qmdp_fallback")
        return qmdp_policy(model)


def _evaluate(
    inst: LmabInstance, policy: Policy, episodes: int, rng: np.random.Generator
) -> MonteCarloEstimate:
    return monte_carlo_policy_value(inst, policy, episodes, rng)


def _finish(
    report: RunReport,
    inst: LmabInstance,
    policy: Policy,
    cfg: RunConfigSchema,
    eval_rng: np.random.Generator,
    clock: _StageClock,
) -> RunReport:
    report.policy = policy
    with clock.stage("evaluation"):
        est = _evaluate(inst, policy, cfg.eval_episodes, eval_rng)
        report.per_step_reward = est.mean / inst.H
        report.stderr = est.stderr / inst.H
        _reference_values(report, inst)
    logger.info(
        "[Eval] %s: recompensa por paso %.4f ± %.4f",
        report.pipeline,
        report.per_step_reward,
        report.stderr,
    )
    return report


def _reference_values(report: RunReport, inst: LmabInstance) -> None:
    """V* y V(genie) exactos cuando la enumeración cabe en las guardas."""
    if inst.is_gaussian:
        return
    try:
        report.optimal_value = plan_exact(inst).value
    except PlanningBudgetError:
        report.optimal_value = None
    try:
        report.genie_value = exact_policy_value(inst, qmdp_policy(inst))
    except EnumerationGuardError:
        report.genie_value = None


def _true_core_params(inst: LmabInstance, core: CoreSet) -> LatentParams:
    return LatentParams(inst.weights, core.restrict(inst.flat_reward_vectors()))


def _w_min_levels(cfg: RunConfigSchema, M: int) -> list[float]:
    if cfg.w_min is not None:
        return [cfg.w_min]
    return [1.0 / (M * 2**i) for i in range(cfg.w_min_levels)]


# ============================================================================
# ALGORITMO 1 (MOMENTOS)
# ============================================================================


def _moment_tensors(
    env: LmabEnvironment,
    inst: LmabInstance,
    core: CoreSet,
    cfg: RunConfigSchema,
    max_order: int,
    rng: np.random.Generator,
) -> list[MomentTensor]:
    tensors = []
    for order in range(1, max_order + 1):
        if cfg.oracle:
            tensors.append(exact_moment_tensor(inst, core, order))
        elif inst.is_gaussian:
            tensors.append(gaussian_raw_moment_tensor(env, core, order, cfg.n1, rng))
        else:
            tensors.append(estimate_moment_tensor(env, core, order, cfg.n1, rng))
    return tensors


def _deltas(cfg: RunConfigSchema, inst: LmabInstance, n: int, w_min: float) -> tuple[float, float]:
    Z = max(inst.Z, 1)
    delta_sub = (
        delta_sub_schedule(cfg.epsilon, inst.M, Z, inst.H, w_min)
        if cfg.delta_sub == "auto"
        else float(cfg.delta_sub)
    )
    delta_tsr = (
        delta_tsr_schedule(cfg.epsilon, inst.M, Z, inst.H, n)
        if cfg.delta_tsr == "auto"
        else float(cfg.delta_tsr)
    )
    return delta_sub, delta_tsr


def run_algorithm1(cfg: RunConfigSchema, instance: LmabInstance | None = None) -> RunReport:
    inst = instance if instance is not None else resolve_instance(cfg)
    train_rng, select_rng, eval_rng, _ = _seed_streams(cfg.seed)
    env = LmabEnvironment(inst)
    report = RunReport(
        "algorithm1-moments", cfg.seed, inst.M, inst.A, inst.H, record_wallclock=cfg.record_wallclock
    )
    clock = _StageClock(report)

    identifiable = inst.H >= 2 * inst.M - 1
    max_order = min(inst.H, 2 * inst.M - 1)
    if inst.is_gaussian and not identifiable:
        logger.warning("[Gauss] H=%d < 2M−1=%d: fuera del régimen identificable", inst.H, 2 * inst.M - 1)

    core = _learn_core(env, inst, cfg, train_rng, clock)
    with clock.stage("tensors"):
        tensors = _moment_tensors(env, inst, core, cfg, max_order, train_rng)

    # arranque EM para el emparejamiento no convexo (solo discreto y con datos)
    initial: LatentParams | None = None
    if not (inst.is_gaussian or cfg.oracle) and cfg.n > 0:
        with clock.stage("em_start"):
            fitted = _em_on_core(env, inst, core, cfg, train_rng)
        if fitted is not None:
            initial = fitted[2].params
            report.extra["em_start_log_likelihood"] = fitted[2].log_likelihood
    report.episodes_used = env.episodes_used

    best: tuple[float, FitResult, LmabInstance, Policy] | None = None
    levels = _w_min_levels(cfg, inst.M)
    for w_min in levels:
        delta_sub, delta_tsr = _deltas(cfg, inst, core.n, w_min)
        with clock.stage("matching"):
            bands = (
                None
                if inst.is_gaussian
                else BandConstraints.from_core(core, inst.A, inst.Z, inst.M, delta_sub)
            )
            match_cfg = MatchConfig(
                M=inst.M,
                delta_tsr=delta_tsr,
                max_order=max_order,
                delta_sub=delta_sub,
                w_min=w_min,
                lower=-1.0 if inst.is_gaussian else 0.0,
                upper=1.0,
                bands=bands,
                restarts=cfg.restarts,
            )
            fit = fit_moments(tensors, match_cfg, initial=initial, rng=train_rng)

        with clock.stage("recovery"):
            if inst.is_gaussian:
                model = recover_gaussian_means(fit.params, core, inst.H)
            else:
                assert inst.support is not None
                model = recover_reward_model(fit.params, core, inst.support, inst.H).instance

        with clock.stage("planning"):
            policy = _plan(model, report)

        if len(levels) == 1:
            best = (0.0, fit, model, policy)
            break
        with clock.stage("selection"):
            score = _evaluate(inst, policy, cfg.selection_episodes, select_rng).mean
        report.selection_episodes += cfg.selection_episodes
        logger.info("[Paso 3] w_min=%.4g → V̂=%.4f", w_min, score)
        if best is None or score > best[0]:
            best = (score, fit, model, policy)

    assert best is not None
    _, fit, model, policy = best
    report.residuals = fit.residuals
    report.extra["fit_restart"] = float(fit.restart)
    if not fit.success:
        report.flags.append("delta_tsr_not_reached")
    report.wasserstein = wasserstein_distance(_true_core_params(inst, core), fit.params)
    report.model = model
    report.model_summary = {
        "weights": model.weights.tolist(),
        "core_size": core.n,
        "band_violation": fit.band_violation,
    }
    return _finish(report, inst, policy, cfg, eval_rng, clock)


# ============================================================================
# ED + MLE Y LÍNEAS BASE
# ============================================================================


def _mle_fit(
    env: LmabEnvironment,
    inst: LmabInstance,
    core: CoreSet,
    cfg: RunConfigSchema,
    rng: np.random.Generator,
    clock: _StageClock,
    report: RunReport,
) -> tuple[LatentParams, LatentParams]:
    """(init espectral, ajuste EM); con N=0 ambos son la init uniforme."""
    if inst.is_gaussian:
        raise ConfigError(f"El pipeline {report.pipeline} requiere recompensas discretas")

    with clock.stage("mle"):
        fitted = _em_on_core(env, inst, core, cfg, rng)
        if fitted is None:
            logger.warning("[EM] N=0: ajuste degenerado, init uniforme")
            report.flags.append("degenerate_fit")
            flat = LatentParams.uniform(inst.M, core.n, 1.0 / inst.Z)
            return flat, flat
        data, init, state = fitted
        report.residuals = moment_residual(state.params, empirical_core_tensors(data, 3))
        report.extra["log_likelihood"] = state.log_likelihood
        report.extra["em_iterations"] = float(state.iteration)
    return init, state.params


def _recover_and_plan(
    params: LatentParams,
    inst: LmabInstance,
    core: CoreSet,
    clock: _StageClock,
    report: RunReport,
) -> Policy:
    assert inst.support is not None
    with clock.stage("recovery"):
        model = recover_reward_model(params, core, inst.support, inst.H).instance
    with clock.stage("planning"):
        return _plan(model, report)


def run_ed_mle(cfg: RunConfigSchema, instance: LmabInstance | None = None) -> RunReport:
    inst = instance if instance is not None else resolve_instance(cfg)
    train_rng, _, eval_rng, _ = _seed_streams(cfg.seed)
    env = LmabEnvironment(inst)
    report = RunReport("ed-mle", cfg.seed, inst.M, inst.A, inst.H, record_wallclock=cfg.record_wallclock)
    clock = _StageClock(report)

    core = _learn_core(env, inst, cfg, train_rng, clock)
    _, params = _mle_fit(env, inst, core, cfg, train_rng, clock, report)
    report.episodes_used = env.episodes_used
    report.wasserstein = wasserstein_distance(_true_core_params(inst, core), params)
    report.model_summary = {"weights": params.weights.tolist(), "core_size": core.n}

    policy = _recover_and_plan(params, inst, core, clock, report)
    return _finish(report, inst, policy, cfg, eval_rng, clock)


def _run_tensor_init(cfg: RunConfigSchema, inst: LmabInstance) -> RunReport:
    train_rng, _, eval_rng, aux_rng = _seed_streams(cfg.seed)
    env = LmabEnvironment(inst)
    report = RunReport(
        "tensor-init-em", cfg.seed, inst.M, inst.A, inst.H, record_wallclock=cfg.record_wallclock
    )
    clock = _StageClock(report)

    core = _learn_core(env, inst, cfg, train_rng, clock)
    init, refined = _mle_fit(env, inst, core, cfg, train_rng, clock, report)
    report.episodes_used = env.episodes_used
    truth = _true_core_params(inst, core)
    report.wasserstein = wasserstein_distance(truth, init)
    report.extra["em_wasserstein"] = wasserstein_distance(truth, refined)

    refined_policy = _recover_and_plan(refined, inst, core, clock, report)
    with clock.stage("evaluation"):
        est = _evaluate(inst, refined_policy, cfg.eval_episodes, aux_rng)
    report.extra["em_per_step_reward"] = est.mean / inst.H
    report.extra["em_stderr"] = est.stderr / inst.H

    policy = _recover_and_plan(init, inst, core, clock, report)
    return _finish(report, inst, policy, cfg, eval_rng, clock)


def run_baseline(cfg: RunConfigSchema, instance: LmabInstance | None = None) -> RunReport:
    inst = instance if instance is not None else resolve_instance(cfg)
    if cfg.pipeline == "tensor-init-em":
        return _run_tensor_init(cfg, inst)

    train_rng, _, eval_rng, _ = _seed_streams(cfg.seed)
    report = RunReport(cfg.pipeline, cfg.seed, inst.M, inst.A, inst.H, record_wallclock=cfg.record_wallclock)
    clock = _StageClock(report)

    if cfg.pipeline == "ucb":
        env = LmabEnvironment(inst)
        with clock.stage("ucb"):
            result = ucb_baseline(env, cfg.n, train_rng, cfg.ucb_c)
        report.episodes_used = env.episodes_used
        report.extra["training_per_step_reward"] = result.per_step_reward
        report.model_summary = {"best_arm": result.best_arm}
        policy: Policy = result.policy
    elif cfg.pipeline == "genie":
        with clock.stage("planning"):
            policy = qmdp_policy(inst)
    else:
        raise ConfigError(f"run_baseline no admite el pipeline {cfg.pipeline!r}")

    return _finish(report, inst, policy, cfg, eval_rng, clock)


def run_pipeline(cfg: RunConfigSchema, instance: LmabInstance | None = None) -> RunReport:
    """Despacha según `cfg.pipeline`."""
    logger.info("[Run] pipeline=%s seed=%d", cfg.pipeline, cfg.seed)
    try:
        if cfg.pipeline == "algorithm1-moments":
            return run_algorithm1(cfg, instance)
        if cfg.pipeline == "ed-mle":
            return run_ed_mle(cfg, instance)
        return run_baseline(cfg, instance)
    except LmabError:
        raise
    except ValueError as err:
        raise StageError("setup", str(err)) from err
