"""
Tests for discrete radial measures and the existence classifier.
"""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.exceptions import NonExistence, ParameterError
from src.core.schemas import Branch, QParams, TruncationPolicy
from src.services import radial
from src.services.qcalc import q_factorial, q_pochhammer_inf, target_moment
from src.services.verification import MOMENT_POINTS, grid

FINE = TruncationPolicy(tol=1e-18, max_terms=10000)

atom_lists = st.lists(
    st.tuples(
        st.floats(min_value=0.1, max_value=3.0, allow_nan=False),
        st.floats(min_value=-2.0, max_value=2.0, allow_nan=False),
    ),
    min_size=1,
    max_size=5,
)


def outermost(mu, count):
    return mu.atoms[-count:]


def test_canonicalize_merges_and_drops():
    """Test sorting, merging of coincident positions and zero-weight removal"""
    mu = radial.canonicalize([1.0, 0.5, 1.0 + 1e-16, 2.0], [1.0, 2.0, 3.0, 0.0])
    assert [(a.r, a.w) for a in mu.atoms] == [(0.5, 2.0), (1.0, 4.0)]
    assert mu.total_mass == 6.0

    cancelled = radial.from_atoms([(1.0, 1.0), (1.0, -1.0)])
    assert cancelled.atoms == ()
    assert radial.from_atoms([]).total_mass == 0.0


def test_canonicalize_rejects_bad_input():
    """Test negative positions and mismatched arrays"""
    with pytest.raises(ParameterError):
        radial.canonicalize([-0.1, 1.0], [1.0, 1.0])
    with pytest.raises(ParameterError):
        radial.canonicalize([1.0], [1.0, 2.0])
    with pytest.raises(ParameterError):
        radial.canonicalize([math.inf], [1.0])


def test_moment_even_orders_only():
    """Test sum w r^{2k} and the odd-order guard"""
    mu = radial.point_mass(2.0, 3.0)
    assert radial.moment(mu, 0) == 3.0
    assert radial.moment(mu, 4) == 48.0
    assert radial.moments(mu, 2) == [3.0, 12.0, 48.0]
    with pytest.raises(ParameterError):
        radial.moment(mu, 3)


@given(atoms=atom_lists, t=st.floats(min_value=0.2, max_value=3.0), k=st.integers(min_value=0, max_value=4))
def test_dilation_scales_moments(atoms, t, k):
    """Test moment(D_t mu, 2k) = t^{2k} moment(mu, 2k)"""
    mu = radial.from_atoms(atoms)
    scale = math.fsum(abs(a.w) * a.r ** (2 * k) for a in mu.atoms) * t ** (2 * k)
    assert abs(radial.moment(radial.dilate(mu, t), 2 * k) - t ** (2 * k) * radial.moment(mu, 2 * k)) <= 1e-9 * scale + 1e-12


@settings(max_examples=60)
@given(left=atom_lists, right=atom_lists, k=st.integers(min_value=0, max_value=4))
def test_mellin_convolution_multiplies_moments(left, right, k):
    """Test moment(mu * nu, 2k) = moment(mu, 2k) moment(nu, 2k)"""
    mu, nu = radial.from_atoms(left), radial.from_atoms(right)
    conv = radial.mellin_convolve(mu, nu)

    def absolute(m):
        return math.fsum(abs(a.w) * a.r ** (2 * k) for a in m.atoms)

    scale = absolute(mu) * absolute(nu)
    assert abs(radial.moment(conv, 2 * k) - radial.moment(mu, 2 * k) * radial.moment(nu, 2 * k)) <= 1e-9 * scale + 1e-12


def test_dilate_rejects_nonpositive_factor():
    """Test dilate guard"""
    with pytest.raises(ParameterError):
        radial.dilate(radial.point_mass(1.0), 0.0)


@pytest.mark.parametrize("alpha,q", MOMENT_POINTS)
def test_radial_moments_match_target(alpha, q):
    """Test moments of the constructed measure against (-alpha;q)_k [k]_q!"""
    params = QParams(alpha=alpha, q=q)
    mu = radial.construct(params, FINE)
    for k in range(13):
        target = target_moment(params, k)
        assert abs(radial.moment(mu, 2 * k) - target) / abs(target) < 1e-8


def test_q_zero_closed_form():
    """Test rho at q = 0 is -alpha delta_0 + (1 + alpha) delta_1"""
    mu = radial.rho_nu_alpha_q(QParams(alpha=-0.5, q=0.0))
    assert [(a.r, a.w) for a in mu.atoms] == [(0.0, 0.5), (1.0, 0.5)]
    signed = radial.rho_alpha_q(QParams(alpha=0.3, q=0.0))
    assert [(a.r, a.w) for a in signed.atoms] == [(0.0, -0.3), (1.0, 1.3)]


def test_rho_alpha_q_moments():
    """Test even moments (-alpha;q)_k of the signed measure"""
    mu = radial.rho_alpha_q(QParams(alpha=0.4, q=0.6), FINE)
    assert radial.moment(mu, 0) == pytest.approx(1.0, abs=1e-12)
    assert radial.moment(mu, 2) == pytest.approx(1.4, rel=1e-10)
    assert radial.moment(mu, 4) == pytest.approx(1.736, rel=1e-10)
    assert mu.min_weight < 0.0
    with pytest.raises(ParameterError):
        radial.rho_alpha_q(QParams(alpha=0.0, q=-0.2))


def test_truncation_record():
    """Test the tail estimate stays under ten times the tolerance"""
    trunc = TruncationPolicy(tol=1e-14, max_terms=10000)
    mu = radial.rho_nu_alpha_q(QParams(alpha=-0.5, q=0.5), trunc)
    assert mu.truncation.tol == 1e-14
    assert mu.truncation.residual < 1e-13
    assert mu.truncation.terms >= len(mu.atoms)


def test_radial_q_gaussian():
    """Test even moments [k]_q! of the radial q-Gaussian"""
    q = 0.5
    mu = radial.rho_q_gaussian(q, FINE)
    assert mu.alpha == 0.0
    assert mu.q == q
    for k in range(10):
        assert radial.moment(mu, 2 * k) == pytest.approx(q_factorial(k, q), rel=1e-10)
    with pytest.raises(ParameterError):
        radial.rho_q_gaussian(-0.1)


def test_positivity_dichotomy():
    """Test the classifier and weight signs agree on the 41x41 grid"""
    for alpha in grid(41):
        for q in grid(41):
            params = QParams(alpha=alpha, q=q)
            if q < 0.0:
                assert radial.classify(params).exists == (alpha == q)
                continue
            assert radial.classify(params).exists == (alpha <= q)
            mu = radial.rho_nu_alpha_q(params, FINE)
            if alpha <= q:
                assert radial.is_nonnegative(mu), (alpha, q, mu.min_weight)
            else:
                assert mu.min_weight < -1e-6, (alpha, q, mu.min_weight)


def test_mass_and_moments_on_grid():
    """Test unit mass and the target moments on every 41x41 cell with q > 0 and alpha <= q"""
    for alpha in grid(41):
        for q in grid(41):
            if q <= 0.0 or alpha > q:
                continue
            params = QParams(alpha=alpha, q=q)
            mu = radial.rho_nu_alpha_q(params, FINE)
            assert abs(mu.total_mass - 1.0) <= 1e-10, (alpha, q, len(mu.atoms), mu.total_mass)
            for k in range(1, 13):
                target = target_moment(params, k)
                assert abs(radial.moment(mu, 2 * k) - target) <= 1e-8 * abs(target), (alpha, q, k)


def test_truncation_waits_for_growing_terms():
    """Test the series is not cut while u_n still grows near q = 1"""
    params = QParams(alpha=-0.9, q=0.95)
    mu = radial.rho_nu_alpha_q(params, FINE)
    assert len(mu.atoms) > 100
    assert mu.total_mass == pytest.approx(1.0, abs=1e-10)
    assert mu.truncation.residual < 10.0 * FINE.tol


@pytest.fixture
def negative_q_signed_measure():
    """Signed atoms at q^n / (1-q) for q < 0, alpha != q, whose moments are (-alpha;q)_k [k]_q!"""
    alpha, q = 0.2, -0.5
    u = [1.0, (q - alpha) / (1.0 - q)]
    for n in range(1, 120):
        u.append(((q - alpha) * u[n] + alpha * q * u[n - 1]) / (1.0 - q ** (n + 1)))
    weights = q_pochhammer_inf(-alpha, q) * q_pochhammer_inf(q, q) * np.asarray(u)
    positions = q ** np.arange(len(u)) / (1.0 - q)
    return QParams(alpha=alpha, q=q), positions, weights


def test_negative_q_moments_force_negative_positions(negative_q_signed_measure):
    """Test the q < 0 moment sequence is carried by atoms on both sides of 0"""
    params, positions, weights = negative_q_signed_measure
    assert positions.min() < 0.0 < positions.max()
    for k in range(9):
        target = target_moment(params, k)
        assert math.fsum(weights * positions ** k) == pytest.approx(target, rel=1e-9)
    # the squared-radius measure of a radial representation would live on [0, inf)
    with pytest.raises(ParameterError):
        radial.canonicalize(positions, weights)
    assert not radial.classify(params).exists


def test_is_nonnegative_tolerance():
    """Test the weight tolerance"""
    mu = radial.from_atoms([(0.0, -1e-13), (1.0, 1.0)])
    assert radial.is_nonnegative(mu)
    assert not radial.is_nonnegative(mu, tol=0.0)


@pytest.mark.parametrize("q", [-0.8, -0.4, 0.3, 0.7])
def test_alpha_equals_q_measure(q):
    """Test rho_nu_qq is positive with moments (-q;q)_k [k]_q!"""
    mu = radial.rho_nu_qq(q, FINE)
    assert mu.min_weight >= 0.0
    assert mu.alpha == q
    params = QParams(alpha=q, q=q)
    for k in range(13):
        assert radial.moment(mu, 2 * k) == pytest.approx(target_moment(params, k), rel=1e-10)


@pytest.mark.parametrize("q", [-0.6, -0.2, 0.5])
def test_alpha_equals_q_scaled_construction(q):
    """Test the (1+q)^{1/2} dilation of the radial q^2-Gaussian atom by atom"""
    direct = radial.rho_nu_qq(q, FINE)
    scaled = radial.rho_nu_qq_scaled(q, FINE)
    assert len(direct.atoms) == len(scaled.atoms)
    assert np.allclose(direct.positions(), scaled.positions(), rtol=1e-12, atol=1e-300)
    assert np.allclose(direct.weights(), scaled.weights(), rtol=1e-10, atol=1e-300)
    assert scaled.alpha == q


@pytest.mark.parametrize("q", [0.2, 0.5, 0.8])
def test_alpha_equals_q_routes_agree(q):
    """Test rho_nu_qq against rho_nu_alpha_q at alpha = q > 0"""
    direct = radial.rho_nu_qq(q, FINE)
    via_alpha = radial.rho_nu_alpha_q(QParams(alpha=q, q=q), FINE)
    for k in range(13):
        assert radial.moment(via_alpha, 2 * k) == pytest.approx(radial.moment(direct, 2 * k), rel=1e-10)


def test_rho_nu_qq_rejects_zero():
    """Test q = 0 is not an alpha = q point"""
    with pytest.raises(ParameterError):
        radial.rho_nu_qq(0.0)
    with pytest.raises(ParameterError):
        radial.rho_nu_qq_scaled(0.0)


def test_negative_q_positions_use_absolute_value():
    """Test alpha = q < 0 atoms sit at (1-q)^{-1/2} |q|^n"""
    q = -0.5
    mu = radial.rho_nu_qq(q, FINE)
    expected = (1.0 - q) ** -0.5 * 0.5 ** np.arange(len(mu.atoms))
    assert np.allclose(mu.positions(), np.sort(expected), rtol=1e-14)
    assert mu.positions().min() > 0.0


@pytest.mark.parametrize("alpha,q", [(-0.5, 0.5), (0.3, 0.6), (0.6, 0.4)])
def test_factorization_through_q_gaussian(alpha, q):
    """Test rho_nu = rho_alpha_q convolved with the radial q-Gaussian atom by atom.

    Only the 30 outermost atoms are compared: the two routes stop their series
    at different depths, so the innermost atoms, whose weights sit below the
    truncation tolerance, differ in number and merging.
    """
    params = QParams(alpha=alpha, q=q)
    direct = radial.rho_nu_alpha_q(params, FINE)
    product = radial.mellin_convolve(radial.rho_alpha_q(params, FINE), radial.rho_q_gaussian(q, FINE))
    for x, y in zip(outermost(direct, 30), outermost(product, 30), strict=True):
        assert x.r == pytest.approx(y.r, abs=1e-12)
        assert x.w == pytest.approx(y.w, abs=1e-12)


def test_t_deformation():
    """Test mass 1 and moments scaled by 1/t"""
    mu = radial.rho_nu_alpha_q(QParams(alpha=-0.5, q=0.5), FINE)
    for t in (1.0, 1.5, 3.0):
        deformed = radial.t_deform(mu, t)
        assert radial.moment(deformed, 0) == pytest.approx(1.0, abs=1e-12)
        for k in range(1, 13):
            assert radial.moment(deformed, 2 * k) == pytest.approx(radial.moment(mu, 2 * k) / t, rel=1e-12)
    with pytest.raises(ParameterError):
        radial.t_deform(mu, 0.5)


def test_kesten_radial():
    """Test the rescaled Kesten radial measure is nu_{(1-t)/t, 0}"""
    for t in (1.0, 2.0, 4.0):
        left = radial.moments(radial.dilate(radial.kesten_radial(t), 1.0 / math.sqrt(t)), 6)
        right = radial.moments(radial.construct(QParams(alpha=(1.0 - t) / t, q=0.0)), 6)
        assert left == pytest.approx(right, abs=1e-12)
    with pytest.raises(ParameterError):
        radial.kesten_radial(0.9)


@pytest.mark.parametrize(
    "alpha,q,exists,branch",
    [
        (-0.9, 0.0, True, Branch.Q_ZERO),
        (0.0, 0.0, True, Branch.Q_ZERO),
        (0.0, 0.5, True, Branch.Q_POS_ALPHA_LT),
        (-0.7, 0.2, True, Branch.Q_POS_ALPHA_LT),
        (0.3, 0.3, True, Branch.ALPHA_EQ_Q),
        (-0.3, -0.3, True, Branch.ALPHA_EQ_Q),
        (0.5, 0.0, False, Branch.NONE),
        (0.5, 0.2, False, Branch.NONE),
        (0.2, -0.3, False, Branch.NONE),
        (-0.5, -0.3, False, Branch.NONE),
    ],
)
def test_classify(alpha, q, exists, branch):
    """Test the existence classifier on each branch"""
    verdict = radial.classify(QParams(alpha=alpha, q=q))
    assert verdict.exists is exists
    assert verdict.branch == branch


def test_classify_reasons_and_eps():
    """Test rejection reasons and the alpha = q tolerance"""
    assert radial.classify(QParams(alpha=0.5, q=0.2)).reason == "alpha > q >= 0"
    assert radial.classify(QParams(alpha=0.2, q=-0.3)).reason == "q < 0 and alpha != q"
    near = QParams(alpha=-0.3 + 1e-9, q=-0.3)
    assert radial.classify(near).branch == Branch.NONE
    assert radial.classify(near, eps=1e-6).branch == Branch.ALPHA_EQ_Q


def test_construct_non_existence():
    """Test NonExistence and the forced signed measure"""
    params = QParams(alpha=0.5, q=0.2)
    with pytest.raises(NonExistence) as info:
        radial.construct(params)
    assert info.value.verdict.reason == "alpha > q >= 0"

    forced = radial.construct(params, FINE, force=True)
    assert forced.min_weight < 0.0
    assert radial.moment(forced, 4) == pytest.approx(target_moment(params, 2), rel=1e-8)

    with pytest.raises(NonExistence):
        radial.construct(QParams(alpha=0.2, q=-0.3), force=True)


def test_construct_alpha_equals_q_negative():
    """Test construct picks rho_nu_qq for alpha = q < 0"""
    mu = radial.construct(QParams(alpha=-0.3, q=-0.3), FINE)
    assert (mu.alpha, mu.q) == (-0.3, -0.3)
    assert radial.is_nonnegative(mu)


def test_json_round_trip():
    """Test the aqfock/1 JSON document"""
    mu = radial.construct(QParams(alpha=-0.5, q=0.5))
    text = radial.to_json(mu)
    document = json.loads(text)
    assert document["schema"] == "aqfock/1"
    assert "warning" not in document
    assert set(document["atoms"][0]) == {"r", "w"}
    assert set(document["truncation"]) == {"tol", "terms", "residual"}
    assert radial.from_json(text) == mu

    warned = json.loads(radial.to_json(mu, warning="signed"))
    assert warned["warning"] == "signed"


def test_csv_output():
    """Test the r,w CSV layout"""
    text = radial.to_csv(radial.rho_nu_alpha_q(QParams(alpha=-0.5, q=0.0)))
    lines = text.strip().splitlines()
    assert lines[0] == "r,w"
    assert lines[1:] == ["0,0.5", "1,0.5"]
