"""Density of the (alpha,q)-Gaussian law nu_{alpha,q} and quadrature against it"""
import cmath
import math
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.core.config import get_settings
from src.core.exceptions import NearPole, OutOfSupport, ParameterError
from src.core.logging_config import log
from src.core.schemas import QParams, SupportInterval, TruncationPolicy
from src.services.qcalc import q_pochhammer_inf

POLE_GUARD = 1e-12
IMAG_GUARD = 1e-10


def support(q: float) -> SupportInterval:
    """(-2/sqrt(1-q), 2/sqrt(1-q))"""
    if not -1.0 < q < 1.0:
        raise ParameterError(f"support needs |q| < 1, got q={q}")
    hi = 2.0 / math.sqrt(1.0 - q)
    return SupportInterval(lo=-hi, hi=hi)


def _g_products(x: np.ndarray, b: complex, q: float, trunc: TruncationPolicy) -> np.ndarray:
    """g(x, b; q) for every entry of x"""
    qk = q ** np.arange(trunc.terms(q), dtype=float)
    s = np.asarray(x, dtype=float)[..., None] * math.sqrt(1.0 - q)
    factors = 1.0 - b * s * qk + b * b * qk * qk
    return np.prod(factors, axis=-1)


def g_factor(
    x: float,
    b: complex,
    params: QParams,
    trunc: Optional[TruncationPolicy] = None,
) -> complex:
    """Truncated prod_k (1 - b x sqrt(1-q) q^k + b^2 q^{2k}) = prod_k |1 - b e^{i theta} q^k|^2
    for real b, where x sqrt(1-q) = 2 cos(theta)"""
    trunc = trunc or TruncationPolicy.default()
    return complex(_g_products(np.asarray(x), complex(b), params.q, trunc))


def _weight_ratio(x: np.ndarray, params: QParams, trunc: TruncationPolicy) -> np.ndarray:
    """g(x,1) g(x,-1) g(x,sqrt q) g(x,-sqrt q) / (g(x,i gamma) g(x,-i gamma)), gamma^2 = -alpha"""
    q = params.q
    gamma = cmath.sqrt(-params.alpha)
    sqrt_q = cmath.sqrt(q)
    numerator = (
        _g_products(x, 1.0, q, trunc)
        * _g_products(x, -1.0, q, trunc)
        * _g_products(x, sqrt_q, q, trunc)
        * _g_products(x, -sqrt_q, q, trunc)
    )
    denominator = _g_products(x, 1j * gamma, q, trunc) * _g_products(x, -1j * gamma, q, trunc)
    if np.any(np.abs(denominator) < POLE_GUARD):
        raise NearPole(f"density denominator below {POLE_GUARD} at alpha={params.alpha}, q={q}")
    ratio = numerator / denominator
    imag = np.abs(ratio.imag)
    if np.any(imag > IMAG_GUARD * np.maximum(np.abs(ratio.real), POLE_GUARD)):
        log.warning(f"Density kept imaginary part up to {imag.max():.3e} at alpha={params.alpha}, q={q}")
    return ratio.real


def _prefactor(params: QParams, trunc: TruncationPolicy) -> float:
    """(q, -alpha; q)_inf / (2 pi)"""
    q = params.q
    return q_pochhammer_inf(q, q, trunc) * q_pochhammer_inf(-params.alpha, q, trunc) / (2.0 * math.pi)


def nu_density(x: float, params: QParams, trunc: Optional[TruncationPolicy] = None) -> float:
    """Density of nu_{alpha,q} at an interior point x"""
    trunc = trunc or TruncationPolicy.default()
    q = params.q
    hi = support(q).hi
    if not abs(x) < hi:
        raise OutOfSupport(x, hi)
    edge = math.sqrt((1.0 - q) / (4.0 - (1.0 - q) * x * x))
    ratio = float(_weight_ratio(np.asarray([x]), params, trunc)[0])
    return _prefactor(params, trunc) * edge * ratio


def q_gaussian_density(x: float, q: float, trunc: Optional[TruncationPolicy] = None) -> float:
    """(sqrt(1-q)/pi) sin(theta) prod_{n>=1} (1-q^n) |1 - q^n e^{2i theta}|^2, x sqrt(1-q) = 2 cos(theta)"""
    if not 0.0 <= q < 1.0:
        raise ParameterError(f"q-Gaussian density needs q in [0, 1), got q={q}")
    trunc = trunc or TruncationPolicy.default()
    hi = support(q).hi
    if not abs(x) < hi:
        raise OutOfSupport(x, hi)
    theta = math.acos(max(-1.0, min(1.0, x * math.sqrt(1.0 - q) / 2.0)))
    rotation = cmath.exp(2j * theta)
    product = 1.0
    for n in range(1, trunc.terms(q) + 1):
        qn = q ** n
        product *= (1.0 - qn) * abs(1.0 - qn * rotation) ** 2
    return math.sqrt(1.0 - q) / math.pi * math.sin(theta) * product


@lru_cache(maxsize=16)
def theta_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to (0, pi); read-only"""
    if order < 1:
        raise ParameterError(f"quadrature order must be >= 1, got {order}")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    theta = (nodes + 1.0) * (math.pi / 2.0)
    scaled = weights * (math.pi / 2.0)
    theta.setflags(write=False)
    scaled.setflags(write=False)
    return theta, scaled


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    params: QParams,
    trunc: Optional[TruncationPolicy] = None,
    quad_order: Optional[int] = None,
) -> float:
    """Integral of f against nu_{alpha,q}.

    With x = 2 cos(theta) / sqrt(1-q) the Jacobian cancels the
    inverse-square-root edge factor, leaving a smooth integrand on
    (0, pi). f receives the whole node array and may return a scalar.
    """
    trunc = trunc or TruncationPolicy.default()
    quad_order = quad_order or get_settings().quad_order
    theta, weights = theta_rule(quad_order)
    x = 2.0 * np.cos(theta) / math.sqrt(1.0 - params.q)
    density = _prefactor(params, trunc) * _weight_ratio(x, params, trunc)
    values = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    return float(np.sum(weights * density * values))


def quadrature_moments(
    params: QParams,
    k_max: int,
    trunc: Optional[TruncationPolicy] = None,
    quad_order: Optional[int] = None,
) -> List[float]:
    """int x^k nu_{alpha,q}(dx) for k = 0..k_max"""
    if k_max < 0:
        raise ParameterError(f"k_max must be >= 0, got {k_max}")
    return [integrate(lambda x, k=k: x ** k, params, trunc, quad_order) for k in range(k_max + 1)]
