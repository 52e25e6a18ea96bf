"""
Paso 2: ajuste de parámetros por emparejamiento de momentos.

Mínimos cuadrados penalizados sobre todos los órdenes:

    F(ŵ, ν̂) = Σ_{l ≤ L} ‖Σ_m ŵ_m ν̂_m^{⊗l} − T̂_l‖²_F  +  κ · (violación de bandas)²

con ŵ en el símplex (suelo w_min), ν̂ en la caja y las bandas de
consistencia con el subespacio sobre v̂_m = T̂ ν̂_m:

    |Σ_z v̂_m(a, z) − 1| ≤ Z·r_m      −r_m ≤ v̂_m ≤ 1 + r_m      r_m = 2√M δ_sub / √ŵ_m

Etapas: gradiente proyectado con Armijo desde varios puntos de partida
(inicial dado, espectral, Dirichlet aleatorios); el mejor residuo gana
(empate → menor índice). Si no alcanza δ_tsr, pulido SLSQP con las bandas
como restricciones duras. Al final, proyección de Dykstra sobre las bandas
si aún quedan violaciones.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from src.design.optimal_design import CoreSet
from src.mle.spectral import init_spectral
from src.moments.params import LatentParams
from src.moments.tensors import MomentTensor, mixture_tensor

logger = logging.getLogger(__name__)

_MIN_STEP = 1e-14
_BAND_TOL = 1e-9


# ============================================================================
# RESTRICCIONES
# ============================================================================


@dataclass(frozen=True, eq=False)
class BandConstraints:
    """Bandas de consistencia de T̂ν̂ con tablas de probabilidad válidas."""

    transform: np.ndarray
    group_rows: np.ndarray
    Z: int
    scale: float

    @classmethod
    def from_core(cls, core: CoreSet, A: int, Z: int, M: int, delta_sub: float) -> BandConstraints:
        T = core.transform
        return cls(
            transform=T,
            group_rows=T.reshape(A, Z, -1).sum(axis=1),
            Z=Z,
            scale=2.0 * math.sqrt(M) * delta_sub,
        )

    def radius(self, w: np.ndarray) -> np.ndarray:
        return self.scale / np.sqrt(np.maximum(w, 1e-12))

    def _terms(self, w: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, ...]:
        r = self.radius(w)[:, None]
        t = V @ self.transform.T
        s = V @ self.group_rows.T - 1.0
        lo = np.maximum(0.0, -r - t)
        hi = np.maximum(0.0, t - 1.0 - r)
        grp = np.maximum(0.0, np.abs(s) - self.Z * r)
        return lo, hi, grp, s

    def violation(self, w: np.ndarray, V: np.ndarray) -> float:
        lo, hi, grp, _ = self._terms(w, V)
        return float(max(lo.max(), hi.max(), grp.max()))

    def penalty(self, w: np.ndarray, V: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        lo, hi, grp, s = self._terms(w, V)
        value = float((lo**2).sum() + (hi**2).sum() + (grp**2).sum())
        dr = -0.5 * self.scale * np.maximum(w, 1e-12) ** -1.5
        grad_w = -2.0 * dr * (lo.sum(axis=1) + hi.sum(axis=1) + self.Z * grp.sum(axis=1))
        grad_V = 2.0 * ((hi - lo) @ self.transform + (grp * np.sign(s)) @ self.group_rows)
        return value, grad_w, grad_V

    def slacks(self, w: np.ndarray, V: np.ndarray) -> np.ndarray:
        r = self.radius(w)[:, None]
        t = V @ self.transform.T
        s = V @ self.group_rows.T - 1.0
        return np.concatenate(
            [(t + r).ravel(), (1.0 + r - t).ravel(), (self.Z * r - s).ravel(), (self.Z * r + s).ravel()]
        )

    def slack_jacobian(self, w: np.ndarray, M: int, n: int) -> np.ndarray:
        d, A = self.transform.shape[0], self.group_rows.shape[0]
        dr = -0.5 * self.scale * np.maximum(w, 1e-12) ** -1.5
        blocks = []
        for rows, sign_v, r_mult in (
            (self.transform, 1.0, 1.0),
            (self.transform, -1.0, 1.0),
            (self.group_rows, -1.0, self.Z),
            (self.group_rows, 1.0, self.Z),
        ):
            k = rows.shape[0]
            jac = np.zeros((M * k, M + M * n))
            for m in range(M):
                jac[m * k : (m + 1) * k, m] = r_mult * dr[m]
                jac[m * k : (m + 1) * k, M + m * n : M + (m + 1) * n] = sign_v * rows
            blocks.append(jac)
        assert blocks[0].shape[0] == M * d and blocks[2].shape[0] == M * A
        return np.vstack(blocks)


@dataclass(frozen=True)
class MatchConfig:
    M: int
    delta_tsr: float
    max_order: int
    delta_sub: float | None = None
    w_min: float = 0.0
    lower: float = 0.0
    upper: float = 1.0
    bands: BandConstraints | None = field(default=None, repr=False)
    restarts: int = 3
    max_iter: int = 500
    penalty: float = 10.0
    polish: bool = True

    def __post_init__(self) -> None:
        if self.delta_tsr <= 0:
            raise ValueError(f"delta_tsr debe ser > 0, recibido: {self.delta_tsr}")
        if self.max_order < 1:
            raise ValueError(f"max_order debe ser ≥ 1, recibido: {self.max_order}")
        if self.M < 1:
            raise ValueError(f"M debe ser ≥ 1, recibido: {self.M}")


@dataclass(frozen=True)
class FitResult:
    params: LatentParams
    residuals: list[float]
    success: bool
    restart: int
    band_violation: float = 0.0

    @property
    def max_residual(self) -> float:
        return max(self.residuals)


# ============================================================================
# OBJETIVO
# ============================================================================


def project_simplex(w: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """Proyección euclídea sobre {w ≥ floor, Σw = 1}."""
    M = w.size
    mass = 1.0 - M * floor
    if mass <= 0.0:
        return np.full(M, 1.0 / M)
    u = w - floor
    s = np.sort(u)[::-1]
    css = np.cumsum(s) - mass
    ind = np.arange(1, M + 1)
    cond = s - css / ind > 0
    theta = css[cond][-1] / ind[cond][-1]
    return np.maximum(u - theta, 0.0) + floor


def _partial_contractions(R: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(⟨R, ν_m^{⊗l}⟩, Σ_k contracción de R con ν_m en todos los modos salvo k)."""
    order = R.ndim
    M, n = V.shape
    total = np.zeros((M, n))
    for k in range(order):
        cur = np.moveaxis(R, k, 0)
        if order == 1:
            total += cur[None, :]
            continue
        X = cur @ V.T
        for _ in range(order - 2):
            X = np.einsum("...jm,mj->...m", X, V)
        total += X.T
    full = np.einsum("mj,mj->m", total, V) / order
    return full, total


class _Objective:
    def __init__(self, tensors: list[MomentTensor], config: MatchConfig) -> None:
        self.tensors = tensors
        self.config = config

    def residuals(self, w: np.ndarray, V: np.ndarray) -> list[np.ndarray]:
        return [mixture_tensor(w, V, t.order) - t.entries for t in self.tensors]

    def value(self, w: np.ndarray, V: np.ndarray, with_bands: bool = True) -> float:
        f = sum(float((R**2).sum()) for R in self.residuals(w, V))
        if with_bands and self.config.bands is not None:
            f += self.config.penalty * self.config.bands.penalty(w, V)[0]
        return f

    def value_and_grad(
        self, w: np.ndarray, V: np.ndarray, with_bands: bool = True
    ) -> tuple[float, np.ndarray, np.ndarray]:
        f = 0.0
        gw = np.zeros_like(w)
        gV = np.zeros_like(V)
        for R in self.residuals(w, V):
            f += float((R**2).sum())
            full, partial = _partial_contractions(R, V)
            gw += 2.0 * full
            gV += 2.0 * w[:, None] * partial
        if with_bands and self.config.bands is not None:
            pv, pw, pV = self.config.bands.penalty(w, V)
            f += self.config.penalty * pv
            gw += self.config.penalty * pw
            gV += self.config.penalty * pV
        return f, gw, gV

    def max_residual(self, w: np.ndarray, V: np.ndarray) -> float:
        return max(float(np.abs(R).max()) for R in self.residuals(w, V))


# ============================================================================
# OPTIMIZADORES
# ============================================================================


def _projected_gradient(
    obj: _Objective, w: np.ndarray, V: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    cfg = obj.config
    w = project_simplex(w, cfg.w_min)
    V = np.clip(V, cfg.lower, cfg.upper)
    step = 1.0

    for _ in range(cfg.max_iter):
        f, gw, gV = obj.value_and_grad(w, V)
        while True:
            w_new = project_simplex(w - step * gw, cfg.w_min)
            V_new = np.clip(V - step * gV, cfg.lower, cfg.upper)
            dw, dV = w_new - w, V_new - V
            sq = float((dw**2).sum() + (dV**2).sum())
            model = f + float((gw * dw).sum() + (gV * dV).sum()) + sq / (2.0 * step)
            if obj.value(w_new, V_new) <= model or step < _MIN_STEP:
                break
            step *= 0.5
        if step < _MIN_STEP or sq < 1e-24:
            break
        w, V = w_new, V_new
        step *= 2.0
        if obj.max_residual(w, V) <= cfg.delta_tsr:
            break
    return w, V


def _slsqp_polish(
    obj: _Objective, w: np.ndarray, V: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    cfg = obj.config
    M, n = V.shape

    def split(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return x[:M], x[M:].reshape(M, n)

    def fun(x: np.ndarray) -> tuple[float, np.ndarray]:
        ww, VV = split(x)
        f, gw, gV = obj.value_and_grad(ww, VV, with_bands=False)
        return f, np.concatenate([gw, gV.ravel()])

    constraints: list[dict[str, object]] = [
        {
            "type": "eq",
            "fun": lambda x: np.array([x[:M].sum() - 1.0]),
            "jac": lambda x: np.concatenate([np.ones(M), np.zeros(M * n)])[None, :],
        }
    ]
    bands = cfg.bands
    if bands is not None:
        constraints.append(
            {
                "type": "ineq",
                "fun": lambda x: bands.slacks(*split(x)),
                "jac": lambda x: bands.slack_jacobian(x[:M], M, n),
            }
        )

    bounds = [(cfg.w_min, 1.0)] * M + [(cfg.lower, cfg.upper)] * (M * n)
    res = minimize(
        fun,
        np.concatenate([w, V.ravel()]),
        jac=True,
        method="SLSQP",
        bounds=bounds,
        constraints=constraints,
        options={"maxiter": 300, "ftol": 1e-16},
    )
    ww, VV = split(np.asarray(res.x))
    return project_simplex(ww, cfg.w_min), np.clip(VV, cfg.lower, cfg.upper)


def _dykstra_bands(
    w: np.ndarray, V: np.ndarray, cfg: MatchConfig, sweeps: int = 200
) -> np.ndarray:
    """Proyección de cada ν̂_m sobre caja ∩ bandas con ŵ fijo."""
    bands = cfg.bands
    assert bands is not None
    r = bands.radius(w)
    out = V.copy()
    slabs_rows = np.vstack([bands.transform, bands.group_rows])
    d = bands.transform.shape[0]

    for m in range(V.shape[0]):
        lo = np.concatenate([np.full(d, -r[m]), np.full(len(bands.group_rows), 1.0 - bands.Z * r[m])])
        hi = np.concatenate([np.full(d, 1.0 + r[m]), np.full(len(bands.group_rows), 1.0 + bands.Z * r[m])])
        norms = (slabs_rows**2).sum(axis=1)
        x = out[m].copy()
        incr = np.zeros((len(slabs_rows) + 1, x.size))
        for _ in range(sweeps):
            for i, row in enumerate(slabs_rows):
                if norms[i] == 0.0:
                    continue
                y = x + incr[i]
                t = row @ y
                x_new = y
                if t > hi[i]:
                    x_new = y - (t - hi[i]) / norms[i] * row
                elif t < lo[i]:
                    x_new = y + (lo[i] - t) / norms[i] * row
                incr[i] = y - x_new
                x = x_new
            y = x + incr[-1]
            x = np.clip(y, cfg.lower, cfg.upper)
            incr[-1] = y - x
            t_all = slabs_rows @ x
            if max((lo - t_all).max(), (t_all - hi).max()) <= _BAND_TOL:
                break
        out[m] = x
    return out


# ============================================================================
# API
# ============================================================================


def _starts(
    tensors: list[MomentTensor],
    config: MatchConfig,
    initial: LatentParams | None,
    rng: np.random.Generator,
) -> list[LatentParams]:
    n = tensors[0].dim
    starts: list[LatentParams] = []
    if initial is not None:
        starts.append(initial)
    if config.max_order >= 3 or config.M == 1:
        starts.append(init_spectral(tensors, config.M, rng, lower=config.lower, upper=config.upper))
    for _ in range(config.restarts):
        starts.append(
            LatentParams(
                rng.dirichlet(np.ones(config.M)),
                rng.uniform(config.lower, config.upper, size=(config.M, n)),
            )
        )
    if not starts:
        starts.append(LatentParams.uniform(config.M, n, 0.5 * (config.lower + config.upper)))
    return starts


def fit_moments(
    tensors: list[MomentTensor],
    config: MatchConfig,
    initial: LatentParams | None = None,
    rng: np.random.Generator | None = None,
) -> FitResult:
    """
    Busca (ŵ, ν̂) con ‖Σ ŵ_m ν̂_m^{⊗l} − T̂_l‖∞ ≤ δ_tsr para l = 1..max_order.

    Nunca falla por resultado numérico: devuelve el mejor ajuste y sus
    residuos por orden; `success` indica si se alcanzó δ_tsr.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    by_order = {t.order: t for t in tensors}
    missing = [order for order in range(1, config.max_order + 1) if order not in by_order]
    if missing:
        raise ValueError(f"Faltan tensores de orden {missing}")
    used = [by_order[order] for order in range(1, config.max_order + 1)]
    obj = _Objective(used, config)

    best: tuple[float, int, np.ndarray, np.ndarray] | None = None
    for idx, start in enumerate(_starts(used, config, initial, rng)):
        w, V = _projected_gradient(obj, start.weights.copy(), start.core_values.copy())
        score = obj.max_residual(w, V)
        logger.debug("[Paso 2] Reinicio %d: residuo máx %.3g", idx, score)
        if best is None or score < best[0]:
            best = (score, idx, w, V)

    assert best is not None
    score, restart, w, V = best

    if config.polish and score > config.delta_tsr:
        w_p, V_p = _slsqp_polish(obj, w, V)
        polished = obj.max_residual(w_p, V_p)
        if polished < score:
            logger.debug("[Paso 2] Pulido SLSQP: %.3g → %.3g", score, polished)
            w, V, score = w_p, V_p, polished

    violation = 0.0
    if config.bands is not None:
        violation = config.bands.violation(w, V)
        if violation > _BAND_TOL:
            V = _dykstra_bands(w, V, config)
            violation = config.bands.violation(w, V)

    params = LatentParams(w, V)
    residuals = [float(np.abs(R).max()) for R in obj.residuals(params.weights, params.core_values)]
    success = max(residuals) <= config.delta_tsr
    if not success:
        logger.warning(
            "[Paso 2] δ_tsr=%.3g no alcanzado: residuo máx %.3g", config.delta_tsr, max(residuals)
        )
    return FitResult(params, residuals, success, restart, violation)
