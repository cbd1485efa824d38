"""One-mode (alpha,q)-operators on the truncated basis Phi_0..Phi_{dim-1}.

Phi_n = z^n / sqrt([omega_n]!). Creation is multiplication by z, annihilation
the alpha-deformed Jackson derivative. Every identity is asserted on the
leading (dim-1) block only: a+ maps Phi_{dim-1} out of the truncated space,
so the last row and column carry truncation artifacts.
"""
from fractions import Fraction
from typing import Dict

import numpy as np

from src.core.exceptions import ParameterError
from src.core.logging_config import log
from src.core.schemas import JacobiSequence, OperatorMatrix, PolyCoeffs, QParams, SuiteReport
from src.services.jacobi import meixner_limit_coefficient, meixner_limit_value, mp_jacobi, norm_squared
from src.services.qcalc import q_number

RELATION_TOL = 1e-12


def _require_levels(J: JacobiSequence, dim: int) -> None:
    if dim < 1:
        raise ParameterError(f"dim must be >= 1, got {dim}")
    if J.levels < dim:
        raise ParameterError(f"dim {dim} needs omega_1..omega_{dim}, sequence has {J.levels}")


def creation(J: JacobiSequence, dim: int) -> OperatorMatrix:
    """a+[n+1, n] = sqrt(omega_{n+1})"""
    _require_levels(J, dim)
    entries = np.diag(np.sqrt(np.asarray(J.omega[: dim - 1], dtype=float)), -1)
    return OperatorMatrix(dim=dim, entries=entries)


def annihilation(J: JacobiSequence, dim: int) -> OperatorMatrix:
    """a-[n-1, n] = sqrt(omega_n); a- Phi_0 = 0"""
    _require_levels(J, dim)
    entries = np.diag(np.sqrt(np.asarray(J.omega[: dim - 1], dtype=float)), 1)
    return OperatorMatrix(dim=dim, entries=entries)


def conservation(J: JacobiSequence, dim: int) -> OperatorMatrix:
    """a° = diag(alpha_n)"""
    _require_levels(J, dim)
    return OperatorMatrix(dim=dim, entries=np.diag(np.asarray(J.alpha_seq[:dim], dtype=float)))


def position_operator(J: JacobiSequence, dim: int) -> OperatorMatrix:
    """a+ + a- + a°"""
    return creation(J, dim) + annihilation(J, dim) + conservation(J, dim)


def number_operator(dim: int) -> OperatorMatrix:
    return OperatorMatrix(dim=dim, entries=np.diag(np.arange(dim, dtype=float)))


def m_matrix(params: QParams, dim: int) -> OperatorMatrix:
    """M_{alpha,q} = I + alpha q^{2N}"""
    n = np.arange(dim)
    return OperatorMatrix(dim=dim, entries=np.diag(1.0 + params.alpha * params.q ** (2 * n)))


def z_dq2_matrix(q: float, dim: int) -> OperatorMatrix:
    """Z D_{q^2} = diag([n]_{q^2})"""
    return OperatorMatrix(dim=dim, entries=np.diag([q_number(n, q * q) for n in range(dim)]))


def _qcomm(A: np.ndarray, B: np.ndarray, s) -> np.ndarray:
    return A @ B - s * (B @ A)


def q_commutator(A: OperatorMatrix, B: OperatorMatrix, s: float) -> OperatorMatrix:
    """[A, B]_s = AB - s BA"""
    if A.dim != B.dim:
        raise ParameterError(f"q-commutator of {A.dim}x{A.dim} and {B.dim}x{B.dim} matrices")
    return OperatorMatrix.of(_qcomm(A.entries, B.entries, s))


def phi_coeffs(J: JacobiSequence, n: int, length: int = 0) -> PolyCoeffs:
    """Monomial coefficients of Phi_n = z^n / sqrt([omega_n]!)"""
    coeffs = np.zeros(max(length, n + 1))
    coeffs[n] = 1.0 / np.sqrt(norm_squared(J, n))
    return coeffs


def jackson(coeffs: PolyCoeffs, q: float) -> PolyCoeffs:
    """D_q: z^n -> [n]_q z^{n-1}"""
    c = np.asarray(coeffs, dtype=float)
    if c.size <= 1:
        return np.zeros(1)
    return np.array([q_number(n, q) * c[n] for n in range(1, c.size)])


def alpha_jackson(coeffs: PolyCoeffs, params: QParams) -> PolyCoeffs:
    """D_{alpha,q}: z^n -> (1 + alpha q^{n-1}) [n]_q z^{n-1}"""
    c = np.asarray(coeffs, dtype=float)
    if c.size <= 1:
        return np.zeros(1)
    alpha, q = params.alpha, params.q
    return np.array([(1.0 + alpha * q ** (n - 1)) * q_number(n, q) * c[n] for n in range(1, c.size)])


def _evaluate(coeffs: PolyCoeffs, z: float) -> float:
    return float(np.polynomial.polynomial.polyval(z, np.asarray(coeffs, dtype=float)))


def _derivative_at_zero(coeffs: PolyCoeffs) -> float:
    c = np.asarray(coeffs, dtype=float)
    return float(c[1]) if c.size > 1 else 0.0


def jackson_at(coeffs: PolyCoeffs, q: float, z: float) -> float:
    """(f(z) - f(qz)) / ((1-q) z), and f'(0) at z = 0"""
    if z == 0.0:
        return _derivative_at_zero(coeffs)
    return (_evaluate(coeffs, z) - _evaluate(coeffs, q * z)) / ((1.0 - q) * z)


def alpha_jackson_at(coeffs: PolyCoeffs, params: QParams, z: float) -> float:
    """Pointwise D_{alpha,q} f(z).

    q != 0: D_q f(z) + alpha (D_{1/q} f)(q^2 z)
    q == 0: D_0 f(z) + alpha f'(0)
    """
    alpha, q = params.alpha, params.q
    if q == 0.0:
        return jackson_at(coeffs, 0.0, z) + alpha * _derivative_at_zero(coeffs)
    return jackson_at(coeffs, q, z) + alpha * jackson_at(coeffs, 1.0 / q, q * q * z)


def rational_operators(params: QParams, dim: int) -> Dict[str, np.ndarray]:
    """Exact Fraction matrices of a+, a-, M in the monomial basis z^n.

    The monomial basis differs from Phi_n by a diagonal rescaling, which
    leaves every commutation relation checked here unchanged.
    """
    alpha, q = Fraction(params.alpha), Fraction(params.q)
    zero, one = Fraction(0), Fraction(1)

    def q_num(n: int) -> Fraction:
        return sum((q ** j for j in range(n)), zero)

    up = np.full((dim, dim), zero, dtype=object)
    down = np.full((dim, dim), zero, dtype=object)
    m = np.full((dim, dim), zero, dtype=object)
    identity = np.full((dim, dim), zero, dtype=object)
    for n in range(dim):
        m[n, n] = one + alpha * q ** (2 * n)
        identity[n, n] = one
        if n >= 1:
            up[n, n - 1] = one
            down[n - 1, n] = (one + alpha * q ** (n - 1)) * q_num(n)
    return {"up": up, "down": down, "m": m, "identity": identity, "alpha": alpha, "q": q}


def _max_abs(block: np.ndarray) -> float:
    return float(max((abs(v) for v in block.ravel()), default=0.0))


def verify_relations(params: QParams, dim: int, rational: bool = False) -> SuiteReport:
    """Check the one-mode commutation relations on the leading (dim-1) block.

    [a-,a+]_q = M, [a-,M]_{q^2} = (1-q^2) a-, [M,a+]_{q^2} = (1-q^2) a+,
    plus [a-,a+]_{q^2} = (1+q) I when alpha = q and [a-,M] = [M,a+] = 0
    when alpha = 0. ``rational`` runs the same checks in exact arithmetic.
    """
    if dim < 3:
        raise ParameterError(f"relation checks need dim >= 3, got {dim}")
    report = SuiteReport(suite="fock1")
    lead = slice(0, dim - 1)

    if rational:
        ops = rational_operators(params, dim)
        up, down, m, identity = ops["up"], ops["down"], ops["m"], ops["identity"]
        alpha, q = ops["alpha"], ops["q"]
        one = Fraction(1)
    else:
        J = mp_jacobi(params, dim)
        up, down = creation(J, dim).entries, annihilation(J, dim).entries
        m, identity = m_matrix(params, dim).entries, np.eye(dim)
        alpha, q = params.alpha, params.q
        one = 1.0

    relations = [
        ("[a-,a+]_q = M", _qcomm(down, up, q) - m),
        ("[a-,M]_q2 = (1-q^2) a-", _qcomm(down, m, q * q) - (one - q * q) * down),
        ("[M,a+]_q2 = (1-q^2) a+", _qcomm(m, up, q * q) - (one - q * q) * up),
    ]
    if alpha == q:
        relations.append(("[a-,a+]_q2 = (1+q) I", _qcomm(down, up, q * q) - (one + q) * identity))
    if alpha == 0:
        relations.append(("[a-,M]_1 = 0", _qcomm(down, m, one)))
        relations.append(("[M,a+]_1 = 0", _qcomm(m, up, one)))
    if not rational:
        zdq2 = z_dq2_matrix(params.q, dim).entries
        relations.append(("M = (1+alpha) I - alpha (1-q^2) Z D_q2", (1.0 + alpha) * identity - alpha * (1.0 - q * q) * zdq2 - m))

    mode = "rational" if rational else "float"
    for name, residual in relations:
        check = report.add(
            name,
            _max_abs(residual[lead, lead]),
            RELATION_TOL,
            detail=f"dim={dim}, {mode}, full-matrix residual={_max_abs(residual):.3e}",
        )
        log.info(f"fock1 {name}: {check.residual:.3e} ({'ok' if check.passed else 'FAILED'})")
    return report


def scaled_limit_check(beta: float, q: float, dim: int, tolerance: float = 1e-2) -> SuiteReport:
    """q -> 1 limits at alpha = -q^{2 beta}, reported as relative deviations.

    M_{alpha,q} / (1 - q^2) -> N + beta on the diagonal, and the scaled
    Jacobi coefficients approach (n + 2 beta - 1) n / 4.
    """
    if not 0.0 < q < 1.0:
        raise ParameterError(f"scaled limit needs 0 < q < 1, got q={q}")
    if not beta > 0.0:
        raise ParameterError(f"beta must be positive, got {beta}")
    report = SuiteReport(suite="fock1")
    alpha = -(q ** (2.0 * beta))

    n = np.arange(dim, dtype=float)
    scaled_m = (1.0 + alpha * q ** (2.0 * n)) / (1.0 - q * q)
    m_dev = np.max(np.abs(scaled_m - (n + beta)) / (n + beta))
    report.add("M/(1-q^2) -> N+beta", m_dev, tolerance, detail=f"beta={beta}, q={q}, n<{dim}")

    levels = range(1, dim)
    jacobi_dev = max(
        (
            abs(meixner_limit_coefficient(beta, q, k) - meixner_limit_value(beta, k)) / meixner_limit_value(beta, k)
            for k in levels
        ),
        default=0.0,
    )
    report.add("scaled omega_n -> (n+2beta-1)n/4", jacobi_dev, tolerance, detail=f"beta={beta}, q={q}, n<{dim}")
    return report
