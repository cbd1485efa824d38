"""Discrete radial measures: atom algebra, the radial Bargmann constructions
for nu_{alpha,q}, the existence classifier and the t-deformation.

Every constructor returns a canonical DiscreteRadialMeasure: positions
strictly increasing, positions closer than ``merge_tol`` merged, weights
below ``zero_weight`` dropped. Infinite atom series are cut once the
estimated tail mass falls below ten times the truncation tolerance; the
estimate is kept in the measure's truncation record.
"""
import math
from typing import Callable, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.core.config import get_settings
from src.core.exceptions import NonExistence, ParameterError
from src.core.logging_config import log
from src.core.schemas import (
    Atom,
    Branch,
    DiscreteRadialMeasure,
    ExistenceVerdict,
    MeasureDocument,
    QParams,
    TruncationPolicy,
    TruncationRecord,
)
from src.services.qcalc import q_pochhammer_inf


def canonicalize(
    positions,
    weights,
    alpha: Optional[float] = None,
    q: Optional[float] = None,
    truncation: Optional[TruncationRecord] = None,
) -> DiscreteRadialMeasure:
    """Sort, merge near-coincident positions and drop negligible weights"""
    settings = get_settings()
    r = np.asarray(positions, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if r.shape != w.shape:
        raise ParameterError("positions and weights must have the same length")
    if np.any(r < 0.0) or not np.all(np.isfinite(r)) or not np.all(np.isfinite(w)):
        raise ParameterError("radial atoms need finite nonnegative positions and finite weights")

    atoms: Tuple[Atom, ...] = ()
    if r.size:
        order = np.argsort(r, kind="stable")
        r, w = r[order], w[order]
        # a new group starts wherever the gap to the previous atom exceeds merge_tol
        starts = np.flatnonzero(np.concatenate(([True], np.diff(r) > settings.merge_tol)))
        merged_r = r[starts]
        merged_w = np.add.reduceat(w, starts)
        keep = np.abs(merged_w) >= settings.zero_weight
        atoms = tuple(Atom(r=float(x), w=float(y)) for x, y in zip(merged_r[keep], merged_w[keep]))

    return DiscreteRadialMeasure(
        atoms=atoms,
        alpha=alpha,
        q=q,
        truncation=truncation or TruncationRecord(terms=len(atoms)),
    )


def point_mass(r: float, w: float = 1.0) -> DiscreteRadialMeasure:
    """w * delta_r"""
    return canonicalize([r], [w])


def from_atoms(atoms: List[Tuple[float, float]], **meta) -> DiscreteRadialMeasure:
    """Measure from (r, w) pairs in any order"""
    if not atoms:
        return canonicalize([], [], **meta)
    positions, weights = zip(*atoms)
    return canonicalize(positions, weights, **meta)


def moment(mu: DiscreteRadialMeasure, two_k: int) -> float:
    """sum_atoms w r^{2k}; moment(mu, 0) is the total mass"""
    if two_k < 0 or two_k % 2:
        raise ParameterError(f"radial moments are taken at even orders, got {two_k}")
    r, w = mu.positions(), mu.weights()
    return math.fsum(w * np.power(r, two_k))


def moments(mu: DiscreteRadialMeasure, k_max: int) -> List[float]:
    """moment(mu, 2k) for k = 0..k_max"""
    return [moment(mu, 2 * k) for k in range(k_max + 1)]


def dilate(mu: DiscreteRadialMeasure, t: float) -> DiscreteRadialMeasure:
    """Push-forward by r -> t r"""
    if not t > 0.0:
        raise ParameterError(f"dilation factor must be positive, got {t}")
    return canonicalize(t * mu.positions(), mu.weights(), mu.alpha, mu.q, mu.truncation)


def mellin_convolve(mu: DiscreteRadialMeasure, nu: DiscreteRadialMeasure) -> DiscreteRadialMeasure:
    """Multiplicative convolution: atoms at r_i s_j with weights w_i v_j"""
    positions = np.outer(mu.positions(), nu.positions())
    weights = np.outer(mu.weights(), nu.weights())
    residual = (
        mu.truncation.residual * float(np.abs(nu.weights()).sum())
        + nu.truncation.residual * float(np.abs(mu.weights()).sum())
    )
    record = TruncationRecord(
        tol=max(mu.truncation.tol, nu.truncation.tol),
        terms=positions.size,
        residual=residual,
    )
    return canonicalize(positions, weights, truncation=record)


def _geometric_series(
    first: float,
    ratio: Callable[[int], float],
    ratio_bound: Callable[[int], float],
    trunc: TruncationPolicy,
) -> Tuple[List[float], float]:
    """Terms c_0 = first, c_n = c_{n-1} ratio(n), cut when the tail bound
    |c_{n-1}| b / (1 - b) with b = ratio_bound(n) drops below 10 tol.

    ratio_bound(n) must dominate |ratio(m)| for every m >= n.
    """
    terms = [first]
    residual = math.inf
    for n in range(1, trunc.max_terms):
        bound = ratio_bound(n)
        if bound < 1.0:
            residual = abs(terms[-1]) * bound / (1.0 - bound)
            if residual < 10.0 * trunc.tol:
                break
        terms.append(terms[-1] * ratio(n))
    else:
        log.warning(f"Atom series hit max_terms={trunc.max_terms}, tail estimate {residual:.3e}")
    return terms, residual


def _q_zero_measure(params: QParams, trunc: TruncationPolicy) -> DiscreteRadialMeasure:
    """(1 + alpha) delta_1 - alpha delta_0"""
    alpha = params.alpha
    record = TruncationRecord(tol=trunc.tol, terms=2, residual=0.0)
    return canonicalize([0.0, 1.0], [-alpha, 1.0 + alpha], alpha, params.q, record)


def rho_alpha_q(params: QParams, trunc: Optional[TruncationPolicy] = None) -> DiscreteRadialMeasure:
    """Signed measure (-alpha;q)_inf sum_n (-alpha)^n / (q;q)_n delta_{q^{n/2}}
    with even moments (-alpha;q)_k"""
    alpha, q = params.alpha, params.q
    if q < 0.0:
        raise ParameterError(f"rho_alpha_q needs q in [0, 1), got q={q}")
    trunc = trunc or TruncationPolicy.default()
    if q == 0.0:
        return _q_zero_measure(params, trunc)

    prefactor = q_pochhammer_inf(-alpha, q, trunc)
    weights, residual = _geometric_series(
        prefactor,
        ratio=lambda n: -alpha / (1.0 - q ** n),
        ratio_bound=lambda n: abs(alpha) / (1.0 - q ** n),
        trunc=trunc,
    )
    positions = q ** (np.arange(len(weights)) / 2.0)
    log.debug(f"rho_alpha_q({alpha}, {q}): {len(weights)} atoms, tail {residual:.3e}")
    record = TruncationRecord(tol=trunc.tol, terms=len(weights), residual=residual)
    return canonicalize(positions, weights, alpha, q, record)


def rho_nu_alpha_q(params: QParams, trunc: Optional[TruncationPolicy] = None) -> DiscreteRadialMeasure:
    """Radial measure with even moments (-alpha;q)_k [k]_q!, signed when alpha > q.

    For q > 0 the atoms sit at (1-q)^{-1/2} q^{n/2} with weights
    (-alpha, q; q)_inf u_n, u_n = q^n h_n(-alpha/q | q) / (q;q)_n. The u_n
    follow from the Rogers-Szego recurrence,

        u_{n+1} = ((q - alpha) u_n + alpha q u_{n-1}) / (1 - q^{n+1}),

    whose characteristic roots q and -alpha set the decay rate.

    Since the q-binomials are positive, |u_n| <= (n+1) rho^n / (q;q)_inf^2
    with rho = max(q, |alpha|), so the weights beyond index N sum to at most
    |(-alpha;q)_inf| / (q;q)_inf * rho^N ((N+1)(1-rho) + rho) / (1-rho)^2.
    The bound holds from the first term on, including while u_n still grows.
    """
    alpha, q = params.alpha, params.q
    if q < 0.0:
        raise ParameterError(f"rho_nu_alpha_q is undefined for q < 0, got q={q}")
    trunc = trunc or TruncationPolicy.default()
    if q == 0.0:
        return _q_zero_measure(params, trunc)

    shifted = q_pochhammer_inf(-alpha, q, trunc)
    euler = q_pochhammer_inf(q, q, trunc)
    prefactor = shifted * euler
    rate = max(q, abs(alpha))
    scale = abs(shifted) / euler / (1.0 - rate) ** 2
    u = [1.0, (q - alpha) / (1.0 - q)]
    residual = math.inf
    for n in range(1, trunc.max_terms - 1):
        count = n + 1
        residual = scale * rate ** count * (count * (1.0 - rate) + 1.0)
        if residual < 10.0 * trunc.tol:
            break
        u.append(((q - alpha) * u[n] + alpha * q * u[n - 1]) / (1.0 - q ** (n + 1)))
    else:
        log.warning(f"rho_nu_alpha_q({alpha}, {q}) hit max_terms, tail estimate {residual:.3e}")

    weights = prefactor * np.asarray(u)
    positions = (1.0 - q) ** -0.5 * q ** (np.arange(len(u)) / 2.0)
    log.debug(f"rho_nu_alpha_q({alpha}, {q}): {len(u)} atoms, tail {residual:.3e}")
    record = TruncationRecord(tol=trunc.tol, terms=len(u), residual=residual)
    return canonicalize(positions, weights, alpha, q, record)


def rho_nu_qq(q: float, trunc: Optional[TruncationPolicy] = None) -> DiscreteRadialMeasure:
    """Positive radial measure for alpha = q != 0: atoms at (1-q)^{-1/2} |q|^n
    with weights (q^2;q^2)_inf q^{2n} / (q^2;q^2)_n"""
    if q == 0.0 or not -1.0 < q < 1.0:
        raise ParameterError(f"rho_nu_qq needs q in (-1, 1) without 0, got q={q}")
    trunc = trunc or TruncationPolicy.default()
    q2 = q * q
    weights, residual = _geometric_series(
        q_pochhammer_inf(q2, q2, trunc),
        ratio=lambda n: q2 / (1.0 - q2 ** n),
        ratio_bound=lambda n: q2 / (1.0 - q2 ** n),
        trunc=trunc,
    )
    positions = (1.0 - q) ** -0.5 * abs(q) ** np.arange(len(weights))
    log.debug(f"rho_nu_qq({q}): {len(weights)} atoms, tail {residual:.3e}")
    record = TruncationRecord(tol=trunc.tol, terms=len(weights), residual=residual)
    return canonicalize(positions, weights, q, q, record)


def rho_q_gaussian(q: float, trunc: Optional[TruncationPolicy] = None) -> DiscreteRadialMeasure:
    """Radial q-Gaussian measure, even moments [k]_q!"""
    if not 0.0 <= q < 1.0:
        raise ParameterError(f"radial q-Gaussian needs q in [0, 1), got q={q}")
    base = rho_alpha_q(QParams(alpha=-q, q=q), trunc)
    scaled = dilate(base, (1.0 - q) ** -0.5)
    return scaled.model_copy(update={"alpha": 0.0, "q": q})


def rho_nu_qq_scaled(q: float, trunc: Optional[TruncationPolicy] = None) -> DiscreteRadialMeasure:
    """alpha = q measure built as the (1+q)^{1/2} dilation of the radial q^2-Gaussian"""
    if q == 0.0 or not -1.0 < q < 1.0:
        raise ParameterError(f"rho_nu_qq_scaled needs q in (-1, 1) without 0, got q={q}")
    scaled = dilate(rho_q_gaussian(q * q, trunc), math.sqrt(1.0 + q))
    return scaled.model_copy(update={"alpha": q, "q": q})


def classify(params: QParams, eps: Optional[float] = None) -> ExistenceVerdict:
    """Existence of a radial Bargmann representation of nu_{alpha,q}.

    Exists iff (q >= 0 and alpha <= q) or alpha = q != 0. The alpha = q
    comparison is exact unless ``eps`` (or the configured default) is positive.
    """
    alpha, q = params.alpha, params.q
    eps = get_settings().alpha_eq_q_eps if eps is None else eps
    alpha_eq_q = alpha == q if eps <= 0.0 else abs(alpha - q) <= eps

    if q == 0.0 and alpha <= 0.0:
        return ExistenceVerdict(exists=True, branch=Branch.Q_ZERO, reason="q = 0 and alpha <= 0")
    if q > 0.0 and alpha < q:
        return ExistenceVerdict(exists=True, branch=Branch.Q_POS_ALPHA_LT, reason="q > 0 and alpha < q")
    if alpha_eq_q and q != 0.0:
        return ExistenceVerdict(exists=True, branch=Branch.ALPHA_EQ_Q, reason="alpha = q != 0")
    if q >= 0.0:
        return ExistenceVerdict(exists=False, branch=Branch.NONE, reason="alpha > q >= 0")
    return ExistenceVerdict(exists=False, branch=Branch.NONE, reason="q < 0 and alpha != q")


def construct(
    params: QParams,
    trunc: Optional[TruncationPolicy] = None,
    force: bool = False,
    eps: Optional[float] = None,
) -> DiscreteRadialMeasure:
    """Radial measure of nu_{alpha,q} for the classifier's branch.

    With ``force`` a rejected q >= 0 point yields the signed measure
    instead of raising NonExistence.
    """
    verdict = classify(params, eps)
    if verdict.branch in (Branch.Q_ZERO, Branch.Q_POS_ALPHA_LT):
        return rho_nu_alpha_q(params, trunc)
    if verdict.branch == Branch.ALPHA_EQ_Q:
        return rho_nu_qq(params.q, trunc).model_copy(update={"alpha": params.alpha})
    if force and params.q >= 0.0:
        log.warning(f"Forcing signed radial measure at alpha={params.alpha}, q={params.q}: {verdict.reason}")
        return rho_nu_alpha_q(params, trunc)
    raise NonExistence(verdict)


def is_nonnegative(mu: DiscreteRadialMeasure, tol: Optional[float] = None) -> bool:
    """True iff every weight is >= -tol"""
    tol = get_settings().weight_tol if tol is None else tol
    return bool(np.all(mu.weights() >= -tol))


def t_deform(mu: DiscreteRadialMeasure, t: float) -> DiscreteRadialMeasure:
    """(1 - 1/t) delta_0 + (1/t) mu"""
    if not t >= 1.0:
        raise ParameterError(f"t-deformation needs t >= 1, got {t}")
    positions = np.concatenate(([0.0], mu.positions()))
    weights = np.concatenate(([1.0 - 1.0 / t], mu.weights() / t))
    return canonicalize(positions, weights, mu.alpha, mu.q, mu.truncation)


def kesten_radial(t: float) -> DiscreteRadialMeasure:
    """(1 - 1/t) delta_0 + (1/t) delta_{sqrt t}"""
    if not t >= 1.0:
        raise ParameterError(f"Kesten radial measure needs t >= 1, got {t}")
    return canonicalize([0.0, math.sqrt(t)], [1.0 - 1.0 / t, 1.0 / t])


def to_document(mu: DiscreteRadialMeasure, warning: Optional[str] = None) -> MeasureDocument:
    return MeasureDocument(
        alpha=mu.alpha,
        q=mu.q,
        atoms=list(mu.atoms),
        truncation=mu.truncation,
        warning=warning,
    )


def to_json(mu: DiscreteRadialMeasure, warning: Optional[str] = None) -> str:
    """Serialize as an "aqfock/1" JSON document"""
    return to_document(mu, warning).model_dump_json(by_alias=True, exclude_none=True, indent=2)


def from_json(text: str) -> DiscreteRadialMeasure:
    """Parse an "aqfock/1" JSON document back into a measure"""
    document = MeasureDocument.model_validate_json(text)
    return DiscreteRadialMeasure(
        atoms=tuple(document.atoms),
        alpha=document.alpha,
        q=document.q,
        truncation=document.truncation,
    )


def to_csv(mu: DiscreteRadialMeasure) -> str:
    """CSV with header r,w, one atom per row, positions ascending"""
    frame = pd.DataFrame({"r": mu.positions(), "w": mu.weights()})
    return frame.to_csv(index=False, float_format="%.17g")
