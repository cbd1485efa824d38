"""Named verification suites run by the command line `verify` command"""
import math
from typing import Callable, Dict, List, Optional

import numpy as np

from src.core.exceptions import ParameterError
from src.core.logging_config import log
from src.core.schemas import Involution, QParams, SuiteReport, TruncationPolicy
from src.services import density, fock1, jacobi, qcalc, radial, typeb

MOMENT_POINTS = [(-0.5, 0.5), (0.2, 0.6), (-0.9, 0.0), (0.5, 0.5), (-0.3, -0.3)]
ORTHOGONALITY_POINTS = [(-0.5, 0.5), (0.3, 0.6), (0.5, 0.5)]
RELATION_POINTS = [(0.0, 0.5), (0.5, 0.5), (-0.3, 0.7)]
GRAM_POINTS = [(0.0, 0.0), (-0.4, 0.3), (0.5, -0.5), (0.7, 0.2), (-0.8, -0.6)]
SIGN_GRID_Q = [-0.5, -0.1, 0.1, 0.5]
SIGN_GRID_X = np.linspace(-5.0, 5.0, 1001)
SUITES = ("qcalc", "radial", "density", "fock1", "typeb")


def grid(size: int) -> np.ndarray:
    """Uniform grid over [-0.95, 0.95]; zero lands exactly on 0.0 for odd sizes"""
    return np.round(np.linspace(-0.95, 0.95, size), 12) + 0.0


class VerificationService:
    """Runs the property checks behind each suite name"""

    def __init__(
        self,
        dim: int = 24,
        rank: int = 4,
        quad_order: Optional[int] = None,
        tol: float = 1e-18,
        grid_size: int = 41,
    ):
        self.dim = dim
        self.rank = rank
        self.quad_order = quad_order
        self.trunc = TruncationPolicy.default(tol)
        self.grid_size = grid_size
        self._suites: Dict[str, Callable[[], SuiteReport]] = {
            "qcalc": self.qcalc_suite,
            "radial": self.radial_suite,
            "density": self.density_suite,
            "fock1": self.fock1_suite,
            "typeb": self.typeb_suite,
        }

    def run(self, name: str) -> List[SuiteReport]:
        """Run one suite by name, or every suite for "all" """
        if name == "all":
            names = list(SUITES)
        elif name in self._suites:
            names = [name]
        else:
            raise ParameterError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
        reports = []
        for suite in names:
            log.info(f"Running verification suite: {suite}")
            report = self._suites[suite]()
            failed = [check.name for check in report.checks if not check.passed]
            if failed:
                log.warning(f"Suite {suite}: {len(failed)} failed checks: {failed}")
            else:
                log.info(f"Suite {suite}: all {len(report.checks)} checks passed")
            reports.append(report)
        return reports

    def qcalc_suite(self) -> SuiteReport:
        report = SuiteReport(suite="qcalc")

        worst = 0.0
        for q in (-0.8, -0.3, 0.0, 0.4, 0.9):
            for z in (-1.5, -1.0, -0.3, 0.7, 1.2):
                for n in range(31):
                    by_sum = qcalc.rogers_szego(n, z, q, "sum")
                    by_rec = qcalc.rogers_szego(n, z, q, "recurrence")
                    worst = max(worst, abs(by_sum - by_rec) / max(1.0, abs(by_sum)))
        report.add("h_n sum = recurrence, n<=30", worst, 1e-12)

        zeros = max(
            abs(qcalc.rogers_szego(n, -1.0, q, "recurrence"))
            for q in (-0.8, -0.5, 0.0, 0.5, 0.8)
            for n in range(1, 20, 2)
        )
        report.add("h_n(-1|q) = 0 for odd n<=19", zeros, 1e-12)

        lowest = min(
            qcalc.rogers_szego(n, x, q, "recurrence")
            for q in SIGN_GRID_Q
            for x in SIGN_GRID_X
            for n in range(0, 21, 2)
        )
        report.add("h_n > 0 for even n<=20", max(0.0, -lowest), 0.0, detail=f"min value {lowest:.3e}")

        wrong_sign = sum(
            1
            for q in SIGN_GRID_Q
            for x in SIGN_GRID_X
            if abs(x + 1.0) >= 1e-12
            for n in range(1, 20, 2)
            if (qcalc.rogers_szego(n, x, q, "recurrence") > 0.0) != (x > -1.0)
        )
        report.add("odd h_n changes sign only at -1", wrong_sign, 0)

        worst = 0.0
        for q in (-0.8, -0.5, -0.2, 0.2, 0.5, 0.8):
            for k in range(21):
                lhs = qcalc.q_pochhammer(-q, q, k) * qcalc.q_factorial(k, q)
                rhs = (1.0 + q) ** k * qcalc.q_factorial(k, q * q)
                worst = max(worst, abs(lhs - rhs) / abs(rhs))
        report.add("(-q;q)_k [k]_q! = (1+q)^k [k]_q2!", worst, 1e-12)

        excess = 0.0
        for alpha in grid(11):
            for q in grid(11):
                params = QParams(alpha=alpha, q=q)
                for k in range(21):
                    excess = max(excess, abs(qcalc.target_moment(params, k)) - qcalc.carleman_bound(q, k))
        report.add("|(-alpha;q)_k [k]_q!| <= (4/(1-|q|))^k", max(0.0, excess), 0.0)

        worst = max(
            abs(qcalc.euler_sum(a, q, self.trunc) * qcalc.q_pochhammer_inf(a, q, self.trunc) - 1.0)
            for a in (-0.7, 0.3, 0.6)
            for q in (-0.5, 0.2, 0.7)
        )
        report.add("Euler: sum a^n/(q;q)_n = 1/(a;q)_inf", worst, 1e-12)
        return report

    def radial_suite(self) -> SuiteReport:
        report = SuiteReport(suite="radial")

        for alpha, q in MOMENT_POINTS:
            params = QParams(alpha=alpha, q=q)
            mu = radial.construct(params, self.trunc)
            worst = max(
                abs(radial.moment(mu, 2 * k) - qcalc.target_moment(params, k)) / abs(qcalc.target_moment(params, k))
                for k in range(13)
            )
            report.add(f"moments of ({alpha}, {q}) = (-alpha;q)_k [k]_q!", worst, 1e-8, detail=f"{len(mu.atoms)} atoms")

        mismatches = 0
        weakest = 0.0
        mass_gap = 0.0
        for alpha in grid(self.grid_size):
            for q in grid(self.grid_size):
                if q < 0.0:
                    continue
                mu = radial.rho_nu_alpha_q(QParams(alpha=alpha, q=q), self.trunc)
                nonnegative = radial.is_nonnegative(mu)
                if nonnegative != (alpha <= q):
                    mismatches += 1
                if alpha > q:
                    weakest = max(weakest, mu.min_weight + 1e-6)
                else:
                    mass_gap = max(mass_gap, abs(mu.total_mass - 1.0))
        report.add("nonnegative weights iff alpha <= q (q >= 0)", mismatches, 0, detail=f"{self.grid_size}x{self.grid_size} grid")
        report.add("some weight < -1e-6 whenever alpha > q >= 0", max(0.0, weakest), 0.0)
        report.add("unit mass whenever alpha <= q, q >= 0", mass_gap, 1e-10)

        worst = 0.0
        for q in (-0.8, -0.4, 0.3, 0.7):
            mu = radial.rho_nu_qq(q, self.trunc)
            worst = max(worst, max(0.0, -mu.min_weight))
        report.add("rho_nu_qq weights nonnegative", worst, 0.0)

        worst = 0.0
        for q in (0.2, 0.5, 0.8):
            direct = radial.rho_nu_qq(q, self.trunc)
            via_alpha = radial.rho_nu_alpha_q(QParams(alpha=q, q=q), self.trunc)
            scaled = radial.rho_nu_qq_scaled(q, self.trunc)
            for k in range(13):
                target = radial.moment(direct, 2 * k)
                worst = max(
                    worst,
                    abs(radial.moment(via_alpha, 2 * k) - target) / target,
                    abs(radial.moment(scaled, 2 * k) - target) / target,
                )
        report.add("alpha = q constructions agree", worst, 1e-10)

        worst = 0.0
        for alpha, q in ((-0.5, 0.5), (0.3, 0.6), (0.6, 0.4)):
            params = QParams(alpha=alpha, q=q)
            direct = radial.rho_nu_alpha_q(params, self.trunc)
            product = radial.mellin_convolve(radial.rho_alpha_q(params, self.trunc), radial.rho_q_gaussian(q, self.trunc))
            worst = max(worst, _leading_atom_gap(direct, product, 30))
        report.add("rho_nu = rho_alpha_q (x) radial q-Gaussian", worst, 1e-12, detail="30 outermost atoms")

        mu = radial.rho_nu_alpha_q(QParams(alpha=-0.5, q=0.5), self.trunc)
        worst = 0.0
        for t in (1.0, 1.5, 3.0):
            deformed = radial.t_deform(mu, t)
            worst = max(worst, abs(radial.moment(deformed, 0) - 1.0))
            for k in range(1, 13):
                worst = max(worst, abs(radial.moment(deformed, 2 * k) - radial.moment(mu, 2 * k) / t))
        report.add("t-deformation scales moments by 1/t", worst, 1e-12)

        worst = 0.0
        for t in (1.0, 2.0, 4.0):
            left = radial.moments(radial.dilate(radial.kesten_radial(t), 1.0 / math.sqrt(t)), 6)
            right = radial.moments(radial.construct(QParams(alpha=(1.0 - t) / t, q=0.0)), 6)
            worst = max(worst, max(abs(a - b) for a, b in zip(left, right)))
        report.add("Kesten radial measure = nu_{(1-t)/t, 0}", worst, 1e-12)
        return report

    def density_suite(self) -> SuiteReport:
        report = SuiteReport(suite="density")
        for alpha, q in ORTHOGONALITY_POINTS:
            params = QParams(alpha=alpha, q=q)
            J = jacobi.mp_jacobi(params, 8)
            polys = [jacobi.polynomial(J, n) for n in range(7)]
            worst = 0.0
            for m in range(7):
                for n in range(7):
                    value = density.integrate(lambda x, a=polys[m], b=polys[n]: a(x) * b(x), params, self.trunc, self.quad_order)
                    expected = jacobi.norm_squared(J, n) if m == n else 0.0
                    worst = max(worst, abs(value - expected) / max(1.0, jacobi.norm_squared(J, n)))
            report.add(f"orthogonality at ({alpha}, {q}), m,n<=6", worst, 1e-6)

            by_quadrature = density.quadrature_moments(params, 8, self.trunc, self.quad_order)
            by_recurrence = jacobi.moments_from_jacobi(J, 8)
            gap = max(abs(a - b) for a, b in zip(by_quadrature, by_recurrence))
            report.add(f"quadrature moments at ({alpha}, {q}) = tridiagonal", gap, 1e-6)

            hi = density.support(q).hi
            interior = np.linspace(-hi, hi, 1002)[1:-1]
            lowest = min(density.nu_density(x, params, self.trunc) for x in interior[::10])
            report.add(f"density at ({alpha}, {q}) nonnegative", max(0.0, -lowest), 0.0)
        return report

    def fock1_suite(self) -> SuiteReport:
        report = SuiteReport(suite="fock1")
        for alpha, q in RELATION_POINTS:
            params = QParams(alpha=alpha, q=q)
            report.checks.extend(fock1.verify_relations(params, self.dim).checks)
        report.checks.extend(fock1.verify_relations(QParams(alpha=0.5, q=0.5), self.dim, rational=True).checks)
        report.checks.extend(fock1.scaled_limit_check(1.0, 0.999, 11).checks)

        params = QParams(alpha=-0.4, q=0.3)
        J = jacobi.mp_jacobi(params, 14)
        X = fock1.position_operator(J, 14).entries
        moments = jacobi.moments_from_jacobi(J, 12)
        gap = max(abs(np.linalg.matrix_power(X, 2 * k)[0, 0] - moments[2 * k]) for k in range(7))
        report.add("(a+ + a-)^{2k}[0,0] = m_2k", gap, 1e-12)
        return report

    def typeb_suite(self) -> SuiteReport:
        report = SuiteReport(suite="typeb")
        rank = min(self.rank, typeb.GRAM_RANK_CAP)
        for n in range(1, rank + 1):
            table = typeb.get_group_table(n)
            expected = 2 ** n * math.factorial(n)
            report.add(f"|Sigma_{n}| = {expected}", abs(len(table.elements) - expected), 0)
            broken = [name for name, holds in typeb.braid_relations(n).items() if not holds]
            report.add(f"braid relations, n={n}", len(broken), 0, detail=", ".join(broken))
        for n in range(1, min(rank, 3) + 1):
            report.add(f"(l1, l2) well defined, n={n}", 0 if typeb.length_statistics_consistent(n) else 1, 0)

        worst = 0.0
        for alpha, q in GRAM_POINTS:
            params = QParams(alpha=alpha, q=q)
            for sign in (1.0, -1.0):
                involution = Involution(matrix=sign * np.eye(2))
                f = np.array([1.0, 0.0])
                for k in range(1, rank + 1):
                    norm = typeb.aq_gram([typeb.tensor_power(f, k)], params, involution)[0, 0]
                    worst = max(worst, abs(norm - typeb.fock_norm(params, k, sign)))
        report.add("Gram norm of f^{⊗k} = [omega_k]!", worst, 1e-12, detail=f"k<={rank}, J=+-I")

        params = QParams(alpha=-0.4, q=0.3)
        chain = jacobi.moments_from_jacobi(jacobi.mp_jacobi(params, 4), 8)
        quadrature = density.quadrature_moments(params, 8, self.trunc, self.quad_order)
        gap = max(
            max(abs(typeb.vacuum_moment(params, k) - chain[k]), abs(chain[k] - quadrature[k]))
            for k in range(9)
        )
        report.add("vacuum = tridiagonal = quadrature moments, k<=8", gap, 1e-6)

        for alpha, q in ((0.0, 0.4), (0.5, -0.5), (-0.4, 0.3)):
            report.checks.extend(typeb.check_commutation(QParams(alpha=alpha, q=q), 2, 2).checks)
        return report


def _leading_atom_gap(left, right, count: int) -> float:
    """Largest position/weight difference over the `count` outermost atoms"""
    a, b = left.atoms[-count:], right.atoms[-count:]
    if len(a) != len(b):
        return math.inf
    return max(max(abs(x.r - y.r), abs(x.w - y.w)) for x, y in zip(a, b))


_verification_service: Optional[VerificationService] = None


def get_verification_service(**overrides) -> VerificationService:
    """Shared default service instance, or a fresh one when overrides are given"""
    global _verification_service
    if overrides:
        return VerificationService(**overrides)
    if _verification_service is None:
        _verification_service = VerificationService()
    return _verification_service
