"""q-calculus primitives: q-numbers, q-factorials, q-shifted factorials,
q-binomials and Rogers-Szego polynomials.

All functions are pure. Finite and infinite q-shifted factorials are
accumulated with mpmath when the ``extended`` precision setting is active.
The Rogers-Szego sum form always runs in mpmath at ``extended_dps``: its
alternating terms cancel for z < 0. Every other routine works in double
precision.
"""
import math
from typing import Iterable, Literal, Optional

import mpmath

from src.core.config import get_settings
from src.core.exceptions import ParameterError
from src.core.schemas import QParams, TruncationPolicy


def _product(factors: Iterable[float]) -> float:
    """Product of factors, in extended precision when configured"""
    settings = get_settings()
    if settings.extended:
        with mpmath.workdps(settings.extended_dps):
            return float(mpmath.fprod(mpmath.mpf(f) for f in factors))
    return math.prod(factors)


def _shifted_product(a: float, q: float, count: int) -> float:
    """prod_{l=0}^{count-1} (1 - a q^l), factors formed in extended precision when configured"""
    settings = get_settings()
    if settings.extended:
        with mpmath.workdps(settings.extended_dps):
            a_mp, q_mp = mpmath.mpf(a), mpmath.mpf(q)
            return float(mpmath.fprod(1 - a_mp * q_mp ** ell for ell in range(count)))
    return math.prod(1.0 - a * q ** ell for ell in range(count))


def q_number(n: int, q: float) -> float:
    """[n]_q = 1 + q + ... + q^{n-1}; [0]_q = 0"""
    if n < 0:
        raise ParameterError(f"q-number needs n >= 0, got {n}")
    return math.fsum(q ** j for j in range(n))


def q_factorial(k: int, q: float) -> float:
    """[k]_q! = [1]_q [2]_q ... [k]_q with [0]_q! = 1"""
    if k < 0:
        raise ParameterError(f"q-factorial needs k >= 0, got {k}")
    return _product(q_number(ell, q) for ell in range(1, k + 1))


def q_pochhammer(a: float, q: float, k: int) -> float:
    """(a;q)_k = prod_{l=1}^{k} (1 - a q^{l-1})"""
    if k < 0:
        raise ParameterError(f"q-shifted factorial needs k >= 0, got {k}")
    return _shifted_product(a, q, k)


def q_pochhammer_inf(a: float, q: float, trunc: Optional[TruncationPolicy] = None) -> float:
    """Truncated (a;q)_inf = prod_{l=1}^{N*} (1 - a q^{l-1}).

    N* = trunc.terms(q). Every omitted factor differs from 1 by at most
    |a| tol / (1 - |q|).
    """
    if abs(q) >= 1.0:
        raise ParameterError(f"(a;q)_inf needs |q| < 1, got q={q}")
    trunc = trunc or TruncationPolicy.default()
    return _shifted_product(a, q, trunc.terms(q))


def q_binomial(n: int, ell: int, q: float) -> float:
    """Gaussian binomial coefficient via the multiplicative recursion over ell"""
    if n < 0 or not 0 <= ell <= n:
        raise ParameterError(f"q-binomial needs 0 <= l <= n, got n={n}, l={ell}")
    ell = min(ell, n - ell)
    value = 1.0
    for j in range(1, ell + 1):
        value *= (1.0 - q ** (n - j + 1)) / (1.0 - q ** j)
    return value


def rogers_szego(
    n: int,
    z: float,
    q: float,
    method: Literal["sum", "recurrence"] = "sum",
) -> float:
    """Rogers-Szego polynomial h_n(z|q) = sum_l qbinom(n, l; q) z^l.

    ``method="recurrence"`` evaluates
    h_{n+1} = (z + 1) h_n - (1 - q^n) z h_{n-1} instead; it returns exact
    zeros at z = -1 for odd n.
    """
    if n < 0:
        raise ParameterError(f"Rogers-Szego degree must be >= 0, got {n}")
    if method == "sum":
        with mpmath.workdps(get_settings().extended_dps):
            z_mp, q_mp = mpmath.mpf(z), mpmath.mpf(q)
            total = mpmath.mpf(0)
            binom = mpmath.mpf(1)
            for ell in range(n + 1):
                if ell:
                    binom *= (1 - q_mp ** (n - ell + 1)) / (1 - q_mp ** ell)
                total += binom * z_mp ** ell
            return float(total)
    if method == "recurrence":
        prev, cur = 1.0, 1.0 + z
        if n == 0:
            return prev
        for m in range(1, n):
            prev, cur = cur, (z + 1.0) * cur - (1.0 - q ** m) * z * prev
        return cur
    raise ParameterError(f"unknown evaluation method {method!r}")


def pochhammer(k: float, n: int) -> float:
    """Rising factorial (k)_n = k (k+1) ... (k+n-1)"""
    if n < 0:
        raise ParameterError(f"Pochhammer symbol needs n >= 0, got {n}")
    return math.prod(k + j for j in range(n))


def euler_sum(a: float, q: float, trunc: Optional[TruncationPolicy] = None) -> float:
    """sum_{n>=0} a^n / (q;q)_n, which equals 1 / (a;q)_inf for |a| < 1"""
    if abs(q) >= 1.0 or abs(a) >= 1.0:
        raise ParameterError(f"Euler's series needs |a|, |q| < 1, got a={a}, q={q}")
    trunc = trunc or TruncationPolicy.default()
    term, total = 1.0, 1.0
    for n in range(1, trunc.max_terms):
        term *= a / (1.0 - q ** n)
        total += term
        if abs(term) < trunc.tol * abs(total):
            break
    return total


def target_moment(params: QParams, k: int) -> float:
    """Radial moment target (-alpha;q)_k [k]_q!"""
    return q_pochhammer(-params.alpha, params.q, k) * q_factorial(k, params.q)


def carleman_bound(q: float, k: int) -> float:
    """(4 / (1 - |q|))^k, which dominates |(-alpha;q)_k [k]_q!|"""
    return (4.0 / (1.0 - abs(q))) ** k
