"""Command handlers: each takes a RunConfig and returns (text, exit code)"""
import asyncio
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.cli.schemas import RunConfig, TableDocument, VerdictDocument
from src.core.config import get_settings
from src.core.exceptions import NonExistence
from src.core.logging_config import log
from src.core.schemas import Branch, DiscreteRadialMeasure, Involution, QParams, TruncationPolicy
from src.services import density, jacobi, qcalc, radial, typeb
from src.services.verification import get_verification_service, grid

Result = Tuple[str, int]


def _trunc(cfg: RunConfig) -> TruncationPolicy:
    return TruncationPolicy.default(cfg.tol)


def _table(cfg: RunConfig, frame: pd.DataFrame) -> str:
    """CSV (the default for tables) or a versioned JSON document of the same rows"""
    if cfg.output_format("csv") == "csv":
        return frame.to_csv(index=False, float_format="%.17g")
    document = TableDocument(
        command=cfg.command,
        alpha=cfg.alpha,
        q=cfg.q,
        columns=list(frame.columns),
        # object dtype hands pydantic plain Python scalars instead of numpy ones
        rows=frame.astype(object).to_dict(orient="records"),
    )
    return document.model_dump_json(by_alias=True, indent=2)


def measure(cfg: RunConfig) -> Result:
    """Radial measure for the classifier's branch; t-deformed when --t is given.

    Raises NonExistence unless --force is set and q >= 0.
    """
    params = cfg.params
    verdict = radial.classify(params, cfg.eps)
    mu = radial.construct(params, _trunc(cfg), force=cfg.force, eps=cfg.eps)
    warning = None if verdict.exists else f"signed measure: no radial representation ({verdict.reason})"
    if cfg.t is not None:
        mu = radial.t_deform(mu, cfg.t)
    log.info(f"Measure at alpha={params.alpha}, q={params.q}: {len(mu.atoms)} atoms, branch {verdict.branch.value}")
    if cfg.output_format("json") == "csv":
        return radial.to_csv(mu), 0
    return radial.to_json(mu, warning), 0


def classify(cfg: RunConfig) -> Result:
    params = cfg.params
    verdict = radial.classify(params, cfg.eps)
    if cfg.output_format("json") == "csv":
        frame = pd.DataFrame(
            [{"alpha": params.alpha, "q": params.q, "exists": verdict.exists, "branch": verdict.branch.value, "reason": verdict.reason}]
        )
        return frame.to_csv(index=False), 0
    document = VerdictDocument(
        alpha=params.alpha,
        q=params.q,
        exists=verdict.exists,
        branch=verdict.branch.value,
        reason=verdict.reason,
    )
    return document.model_dump_json(by_alias=True, indent=2), 0


def moments(cfg: RunConfig) -> Result:
    """Radial moments (closed form and atoms) beside the moments m_{2k} of nu
    (tridiagonal and quadrature), k <= kmax"""
    params, trunc = cfg.params, _trunc(cfg)
    levels = max(cfg.kmax, 1)
    by_jacobi = jacobi.moments_from_jacobi(jacobi.mp_jacobi(params, levels), 2 * cfg.kmax)
    by_quadrature = density.quadrature_moments(params, 2 * cfg.kmax, trunc, cfg.quad_order)
    try:
        mu: Optional[DiscreteRadialMeasure] = radial.construct(params, trunc, eps=cfg.eps)
    except NonExistence as e:
        log.info(f"No radial measure: {e}")
        mu = None

    frame = pd.DataFrame(
        {
            "k": range(cfg.kmax + 1),
            "target": [qcalc.target_moment(params, k) for k in range(cfg.kmax + 1)],
            "tridiagonal": [by_jacobi[2 * k] for k in range(cfg.kmax + 1)],
            "quadrature": [by_quadrature[2 * k] for k in range(cfg.kmax + 1)],
            "radial": [radial.moment(mu, 2 * k) if mu is not None else math.nan for k in range(cfg.kmax + 1)],
        }
    )
    return _table(cfg, frame), 0


def density_table(cfg: RunConfig) -> Result:
    """x,density on a uniform interior grid of the support"""
    params, trunc = cfg.params, _trunc(cfg)
    interval = density.support(params.q)
    points = max(cfg.grid, 2)
    xs = np.linspace(interval.lo, interval.hi, points + 2)[1:-1]
    frame = pd.DataFrame({"x": xs, "density": [density.nu_density(x, params, trunc) for x in xs]})
    return _table(cfg, frame), 0


def typeb_table(cfg: RunConfig) -> Result:
    """Gram norms of f^{⊗k} against Fock norms, and vacuum moments against the tridiagonal ones"""
    params = cfg.params
    top = min(cfg.n, typeb.GRAM_RANK_CAP)
    involution = Involution.identity(2)
    f = np.array([1.0, 0.0])
    tridiagonal = jacobi.moments_from_jacobi(jacobi.mp_jacobi(params, max(top, 1)), 2 * top)
    rows: List[Dict[str, Any]] = []
    for k in range(top + 1):
        gram = typeb.aq_gram([typeb.tensor_power(f, k)], params, involution, n=k)[0, 0]
        rows.append(
            {
                "k": k,
                "gram_norm": float(gram),
                "fock_norm": typeb.fock_norm(params, k),
                "vacuum_moment": typeb.vacuum_moment(params, 2 * k),
                "tridiagonal_moment": tridiagonal[2 * k],
            }
        )
    return _table(cfg, pd.DataFrame(rows)), 0


def verify(cfg: RunConfig) -> Result:
    """Residual table of the named suite(s); exit 1 on any failure.

    Flags left at their defaults use the shared service instance.
    """
    defaults = RunConfig.model_fields
    overrides: Dict[str, Any] = {}
    if cfg.dim != defaults["dim"].default:
        overrides["dim"] = cfg.dim
    if cfg.n != defaults["n"].default:
        overrides["rank"] = min(cfg.n, typeb.GRAM_RANK_CAP)
    if cfg.quad_order is not None:
        overrides["quad_order"] = cfg.quad_order
    if cfg.tol is not None:
        overrides["tol"] = cfg.tol
    if cfg.grid != defaults["grid"].default:
        overrides["grid_size"] = cfg.grid
    reports = get_verification_service(**overrides).run(cfg.suite)
    frame = pd.DataFrame([check.model_dump() for report in reports for check in report.checks])
    passed = all(report.passed for report in reports)
    return _table(cfg, frame), 0 if passed else 1


def _sweep_row(alpha: float, q: float, trunc: TruncationPolicy, eps: Optional[float]) -> Dict[str, Any]:
    params = QParams(alpha=alpha, q=q)
    verdict = radial.classify(params, eps)
    if q >= 0.0:
        min_weight = radial.rho_nu_alpha_q(params, trunc).min_weight
    elif verdict.branch == Branch.ALPHA_EQ_Q:
        min_weight = radial.rho_nu_qq(q, trunc).min_weight
    else:
        min_weight = math.nan
    return {
        "alpha": alpha,
        "q": q,
        "exists": verdict.exists,
        "branch": verdict.branch.value,
        "min_weight": min_weight,
    }


async def _sweep_cells(cells: List[Tuple[float, float]], trunc: TruncationPolicy, eps: Optional[float]) -> List[Dict[str, Any]]:
    """Evaluate grid cells concurrently, at most sweep_workers at a time"""
    semaphore = asyncio.Semaphore(get_settings().sweep_workers)

    async def evaluate(alpha: float, q: float) -> Dict[str, Any]:
        async with semaphore:
            return await asyncio.to_thread(_sweep_row, alpha, q, trunc, eps)

    return await asyncio.gather(*(evaluate(alpha, q) for alpha, q in cells))


def sweep(cfg: RunConfig) -> Result:
    """Existence map alpha,q,exists,branch,min_weight; rows sorted by (alpha, q)"""
    if cfg.alpha is not None and cfg.q is not None:
        cells = [(cfg.alpha, cfg.q)]
    else:
        axis = grid(cfg.grid)
        cells = [(float(alpha), float(q)) for alpha in axis for q in axis]
    log.info(f"Sweeping {len(cells)} grid cells")
    rows = asyncio.run(_sweep_cells(cells, _trunc(cfg), cfg.eps))
    frame = pd.DataFrame(rows, columns=["alpha", "q", "exists", "branch", "min_weight"])
    frame = frame.sort_values(["alpha", "q"], kind="stable").reset_index(drop=True)
    return _table(cfg, frame), 0


HANDLERS = {
    "measure": measure,
    "classify": classify,
    "moments": moments,
    "density": density_table,
    "typeb": typeb_table,
    "verify": verify,
    "sweep": sweep,
}
