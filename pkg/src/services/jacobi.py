"""Three-term recurrence engine: Jacobi sequences, monic orthogonal
polynomials, norms and moments through the tridiagonal quantum decomposition"""
import math
from typing import List

import numpy as np

from src.core.exceptions import ParameterError
from src.core.logging_config import log
from src.core.schemas import JacobiSequence, MonicPolynomial, QParams
from src.services.qcalc import q_number


def mp_jacobi(params: QParams, n_max: int) -> JacobiSequence:
    """q-Meixner-Pollaczek data: omega_n = (1 + alpha q^{n-1}) [n]_q, alpha_n = 0"""
    if n_max < 1:
        raise ParameterError(f"n_max must be >= 1, got {n_max}")
    alpha, q = params.alpha, params.q
    omega = tuple((1.0 + alpha * q ** (n - 1)) * q_number(n, q) for n in range(1, n_max + 1))
    return JacobiSequence(omega=omega, alpha_seq=(0.0,) * n_max)


def polynomial(J: JacobiSequence, n: int) -> MonicPolynomial:
    """Coefficients of P_n from x P_n = P_{n+1} + omega_n P_{n-1} + alpha_n P_n"""
    if not 0 <= n <= J.levels:
        raise ParameterError(f"P_{n} needs {n} Jacobi levels, sequence has {J.levels}")
    prev = np.zeros(1)
    cur = np.array([1.0])
    for m in range(n):
        nxt = np.zeros(m + 2)
        nxt[1:] += cur
        nxt[: m + 1] -= J.alpha_seq[m] * cur
        if m >= 1:
            nxt[:m] -= J.omega_at(m) * prev
        prev, cur = cur, nxt
    cur[-1] = 1.0
    return MonicPolynomial(coeffs=tuple(float(c) for c in cur))


def norm_squared(J: JacobiSequence, n: int) -> float:
    """[omega_n]! = omega_0 omega_1 ... omega_n"""
    if not 0 <= n <= J.levels:
        raise ParameterError(f"[omega_{n}]! needs {n} levels, sequence has {J.levels}")
    return math.prod(J.omega_at(k) for k in range(n + 1))


def jacobi_matrix(J: JacobiSequence, size: int) -> np.ndarray:
    """Symmetric tridiagonal T: diagonal alpha_n, off-diagonal sqrt(omega_n)"""
    if not 1 <= size <= J.levels + 1:
        raise ParameterError(f"tridiagonal matrix of size {size} needs {size - 1} levels")
    diagonal = np.array([J.alpha_seq[i] if i < J.levels else 0.0 for i in range(size)])
    off = np.sqrt(np.array(J.omega[: size - 1], dtype=float))
    return np.diag(diagonal) + np.diag(off, 1) + np.diag(off, -1)


def moments_from_jacobi(J: JacobiSequence, k_max: int) -> List[float]:
    """m_k = (T^k)_{0,0} for k = 0..k_max.

    A closed walk of length k never climbs above level ceil(k/2), so the
    matrix only needs that many levels.
    """
    if k_max < 0:
        raise ParameterError(f"k_max must be >= 0, got {k_max}")
    levels = (k_max + 1) // 2
    if levels > J.levels:
        raise ParameterError(f"moments up to {k_max} need {levels} levels, sequence has {J.levels}")
    T = jacobi_matrix(J, levels + 1)
    v = np.zeros(levels + 1)
    v[0] = 1.0
    moments = [1.0]
    for _ in range(k_max):
        v = T @ v
        moments.append(float(v[0]))
    log.debug(f"Moments from {levels + 1}x{levels + 1} tridiagonal matrix up to k={k_max}")
    return moments


def hankel_matrix(moments: List[float], size: int) -> np.ndarray:
    """(m_{i+j})_{i,j < size}"""
    if 2 * size - 1 > len(moments):
        raise ParameterError(f"Hankel matrix of size {size} needs {2 * size - 1} moments")
    return np.array([[moments[i + j] for j in range(size)] for i in range(size)], dtype=float)


def meixner_limit_coefficient(beta: float, q: float, n: int) -> float:
    """Scaled Jacobi coefficient (1 - q^{2 beta + n - 1}) [n]_q / (4 (1 - q)) at alpha = -q^{2 beta}"""
    return (1.0 - q ** (2.0 * beta + n - 1)) * q_number(n, q) / (4.0 * (1.0 - q))


def meixner_limit_value(beta: float, n: int) -> float:
    """q -> 1 limit (n + 2 beta - 1) n / 4: Jacobi sequence of the symmetric Meixner law"""
    return (n + 2.0 * beta - 1.0) * n / 4.0
