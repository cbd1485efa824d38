"""Pydantic domain types shared by the numerical services"""
import math
from enum import Enum
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.config import get_settings


class QParams(BaseModel):
    """Deformation pair (alpha, q) on the open square (-1, 1)^2"""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=-1.0, lt=1.0, description="alpha deformation parameter")
    q: float = Field(gt=-1.0, lt=1.0, description="q deformation parameter")


class TruncationPolicy(BaseModel):
    """Cutoff rule for every infinite product and sum"""

    model_config = ConfigDict(frozen=True)

    tol: float = Field(gt=0.0, description="Tail cutoff")
    max_terms: int = Field(gt=0, description="Hard cap on retained terms")

    @classmethod
    def default(cls, tol: Optional[float] = None) -> "TruncationPolicy":
        """Policy built from application settings"""
        settings = get_settings()
        return cls(
            tol=tol if tol is not None else settings.trunc_tol,
            max_terms=settings.trunc_max_terms,
        )

    def terms(self, q: float) -> int:
        """N* = min{n : |q|^n < tol}, capped by max_terms"""
        aq = abs(q)
        if aq == 0.0:
            return 1
        if aq >= 1.0:
            return self.max_terms
        n = math.ceil(math.log(self.tol) / math.log(aq))
        # guard the float log estimate on both sides
        while n > 1 and aq ** (n - 1) < self.tol:
            n -= 1
        while aq ** n >= self.tol:
            n += 1
        return min(n, self.max_terms)


class JacobiSequence(BaseModel):
    """Jacobi coefficients (omega_n, alpha_n); omega_0 = 1 is implicit"""

    model_config = ConfigDict(frozen=True)

    omega: Tuple[float, ...] = Field(description="omega_1 .. omega_N")
    alpha_seq: Tuple[float, ...] = Field(description="alpha_0 .. alpha_{N-1}")

    @field_validator("omega")
    @classmethod
    def _positive_omega(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        for n, w in enumerate(value, start=1):
            if not w > 0.0:
                raise ValueError(f"omega_{n} = {w} must be positive")
        return value

    @model_validator(mode="after")
    def _same_length(self) -> "JacobiSequence":
        if len(self.omega) != len(self.alpha_seq):
            raise ValueError("omega and alpha_seq must have the same length")
        return self

    @property
    def levels(self) -> int:
        return len(self.omega)

    def omega_at(self, n: int) -> float:
        """omega_n with the convention omega_0 = 1"""
        return 1.0 if n == 0 else self.omega[n - 1]


class MonicPolynomial(BaseModel):
    """Dense coefficients c_0..c_n, low degree first, c_n = 1"""

    model_config = ConfigDict(frozen=True)

    coeffs: Tuple[float, ...]

    @field_validator("coeffs")
    @classmethod
    def _monic(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not value or value[-1] != 1.0:
            raise ValueError("leading coefficient must be exactly 1")
        return value

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, np.asarray(self.coeffs))


class Atom(BaseModel):
    """Weighted point mass at radius r"""

    model_config = ConfigDict(frozen=True)

    r: float = Field(ge=0.0)
    w: float


class TruncationRecord(BaseModel):
    """How an infinite atom series was cut"""

    model_config = ConfigDict(frozen=True)

    tol: float = 0.0
    terms: int = 0
    residual: float = 0.0


class DiscreteRadialMeasure(BaseModel):
    """Finite, possibly signed, atomic measure on [0, inf) in canonical form"""

    model_config = ConfigDict(frozen=True)

    atoms: Tuple[Atom, ...]
    alpha: Optional[float] = None
    q: Optional[float] = None
    truncation: TruncationRecord = TruncationRecord()

    @field_validator("atoms")
    @classmethod
    def _increasing(cls, value: Tuple[Atom, ...]) -> Tuple[Atom, ...]:
        for left, right in zip(value, value[1:]):
            if not right.r > left.r:
                raise ValueError("atom positions must be strictly increasing")
        return value

    def positions(self) -> np.ndarray:
        return np.array([a.r for a in self.atoms], dtype=float)

    def weights(self) -> np.ndarray:
        return np.array([a.w for a in self.atoms], dtype=float)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights()))

    @property
    def min_weight(self) -> float:
        weights = self.weights()
        return float(weights.min()) if weights.size else 0.0


class Branch(str, Enum):
    """Case of the existence theorem that supplies the radial measure"""

    Q_ZERO = "Q_ZERO"
    Q_POS_ALPHA_LT = "Q_POS_ALPHA_LT"
    ALPHA_EQ_Q = "ALPHA_EQ_Q"
    NONE = "NONE"


class ExistenceVerdict(BaseModel):
    """Answer to: does nu_{alpha,q} admit a radial Bargmann representation?"""

    model_config = ConfigDict(frozen=True)

    exists: bool
    branch: Branch
    reason: str

    @model_validator(mode="after")
    def _branch_matches(self) -> "ExistenceVerdict":
        if (self.branch == Branch.NONE) == self.exists:
            raise ValueError("branch NONE must coincide with exists = false")
        return self


class SupportInterval(BaseModel):
    """Open support (-2/sqrt(1-q), 2/sqrt(1-q)) of nu_{alpha,q}"""

    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float

    @model_validator(mode="after")
    def _ordered(self) -> "SupportInterval":
        if not self.lo < self.hi:
            raise ValueError("support requires lo < hi")
        return self


class OperatorMatrix(BaseModel):
    """Dense operator on the truncated basis Phi_0 .. Phi_{dim-1}"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int = Field(gt=0)
    entries: np.ndarray

    @model_validator(mode="after")
    def _square(self) -> "OperatorMatrix":
        if self.entries.shape != (self.dim, self.dim):
            raise ValueError(f"entries must be {self.dim}x{self.dim}")
        return self

    @classmethod
    def of(cls, entries: np.ndarray) -> "OperatorMatrix":
        return cls(dim=entries.shape[0], entries=entries)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix.of(self.entries @ other.entries)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix.of(self.entries + other.entries)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix.of(self.entries - other.entries)

    def scaled(self, s) -> "OperatorMatrix":
        return OperatorMatrix.of(self.entries * s)

    def leading_block(self) -> np.ndarray:
        """Rows/columns 0..dim-2: the part unaffected by truncation"""
        return self.entries[: self.dim - 1, : self.dim - 1]


# Monomial coefficients of a truncated analytic function, low degree first
PolyCoeffs = np.ndarray


class SignedPermutation(BaseModel):
    """Bijection of {+-1..+-n} with sigma(-k) = -sigma(k), stored by images of 1..n"""

    model_config = ConfigDict(frozen=True)

    images: Tuple[int, ...]

    @field_validator("images")
    @classmethod
    def _signed_bijection(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if sorted(abs(v) for v in value) != list(range(1, len(value) + 1)):
            raise ValueError(f"{value} is not a signed permutation")
        return value

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, k: int) -> int:
        image = self.images[abs(k) - 1]
        return image if k > 0 else -image

    @classmethod
    def identity(cls, n: int) -> "SignedPermutation":
        return cls(images=tuple(range(1, n + 1)))

    @classmethod
    def generator(cls, i: int, n: int) -> "SignedPermutation":
        """pi_0 = (1, -1); pi_i = (i, i+1) for 1 <= i <= n-1"""
        images = list(range(1, n + 1))
        if i == 0:
            images[0] = -1
        elif 1 <= i < n:
            images[i - 1], images[i] = images[i], images[i - 1]
        else:
            raise ValueError(f"no generator pi_{i} in rank {n}")
        return cls(images=tuple(images))

    def compose(self, other: "SignedPermutation") -> "SignedPermutation":
        """(self o other)(k) = self(other(k))"""
        return SignedPermutation(images=tuple(self(other(k)) for k in range(1, self.n + 1)))

    def inverse(self) -> "SignedPermutation":
        images = [0] * self.n
        for k, image in enumerate(self.images, start=1):
            images[abs(image) - 1] = k if image > 0 else -k
        return SignedPermutation(images=tuple(images))


class GroupTable(BaseModel):
    """All 2^n n! elements of Sigma_n with their (l1, l2) statistics"""

    model_config = ConfigDict(frozen=True)

    n: int
    elements: Tuple[SignedPermutation, ...]
    words: Tuple[Tuple[int, ...], ...]
    l1: Tuple[int, ...]
    l2: Tuple[int, ...]

    @model_validator(mode="after")
    def _complete(self) -> "GroupTable":
        expected = 2 ** self.n * math.factorial(self.n)
        if not len(self.elements) == len(self.words) == len(self.l1) == len(self.l2) == expected:
            raise ValueError(f"group table of rank {self.n} must hold {expected} elements")
        if self.elements[0] != SignedPermutation.identity(self.n) or self.l1[0] or self.l2[0]:
            raise ValueError("first element must be the identity with l1 = l2 = 0")
        return self


class Involution(BaseModel):
    """Self-adjoint involution f -> f-bar on the real one-particle space R^d"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray

    @model_validator(mode="after")
    def _involutive(self) -> "Involution":
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("involution must be a square matrix")
        if not np.allclose(m, m.T, atol=1e-14):
            raise ValueError("involution must be symmetric")
        if not np.allclose(m @ m, np.eye(m.shape[0]), atol=1e-14):
            raise ValueError("involution must square to the identity")
        return self

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, d: int) -> "Involution":
        return cls(matrix=np.eye(d))

    @classmethod
    def negation(cls, d: int) -> "Involution":
        return cls(matrix=-np.eye(d))

    @classmethod
    def signature(cls, signs: List[int]) -> "Involution":
        return cls(matrix=np.diag(np.asarray(signs, dtype=float)))


class CheckResult(BaseModel):
    """One verified identity: its residual and the tolerance it was held to"""

    suite: str
    name: str
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""


class SuiteReport(BaseModel):
    """All checks of one verification suite"""

    suite: str
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add(self, name: str, residual: float, tolerance: float, detail: str = "") -> CheckResult:
        residual = float(residual)
        check = CheckResult(
            suite=self.suite,
            name=name,
            residual=residual,
            tolerance=tolerance,
            passed=bool(residual <= tolerance),
            detail=detail,
        )
        self.checks.append(check)
        return check


class MeasureDocument(BaseModel):
    """Versioned JSON form of a DiscreteRadialMeasure"""

    schema_: Literal["aqfock/1"] = Field(default="aqfock/1", alias="schema")
    alpha: Optional[float] = None
    q: Optional[float] = None
    atoms: List[Atom]
    truncation: TruncationRecord = TruncationRecord()
    warning: Optional[str] = None

    model_config = ConfigDict(populate_by_name=True)
