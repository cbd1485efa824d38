"""
Tests for the type-B group, its action on tensors and the (alpha,q)-Gram operator.
"""

import math
from itertools import permutations, product

import numpy as np
import pytest

from src.core.exceptions import ParameterError, SingularGram
from src.core.schemas import Involution, QParams, SignedPermutation
from src.services import typeb
from src.services.jacobi import moments_from_jacobi, mp_jacobi
from src.services.qcalc import q_number
from src.services.verification import GRAM_POINTS

SWAP = Involution(matrix=np.array([[0.0, 1.0], [1.0, 0.0]]))


def length_counts(n: int) -> list:
    """Coefficients of prod_{i=1}^n [2i]_t"""
    counts = np.ones(1, dtype=int)
    for i in range(1, n + 1):
        counts = np.convolve(counts, np.ones(2 * i, dtype=int))
    return counts.tolist()


def permutation_operator(n: int, d: int, q: float) -> np.ndarray:
    """sum over S_n of q^{inversions} times the factor permutation"""
    size = d ** n
    P = np.zeros((size, size))
    for perm in permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        for indices in product(range(d), repeat=n):
            moved = [0] * n
            for j, i in enumerate(indices):
                moved[perm[j]] = i
            P[np.ravel_multi_index(tuple(moved), (d,) * n), np.ravel_multi_index(indices, (d,) * n)] += q ** inversions
    return P


def test_group_sizes():
    """Test |Sigma_n| = 2^n n!"""
    for n in range(1, 5):
        assert len(typeb.get_group_table(n).elements) == 2 ** n * math.factorial(n)
    assert typeb.get_group_table(3) is typeb.get_group_table(3)
    with pytest.raises(ParameterError):
        typeb.enumerate_group(0)
    with pytest.raises(ParameterError):
        typeb.enumerate_group(6)


def test_rank_one_table():
    """Test Sigma_1 = {e, pi_0}"""
    table = typeb.get_group_table(1)
    assert [sigma.images for sigma in table.elements] == [(1,), (-1,)]
    assert table.words == ((), (0,))
    assert table.l1 == (0, 1)
    assert table.l2 == (0, 0)


def test_length_distribution():
    """Test the number of elements of each length against prod [2i]_t"""
    for n in range(1, 5):
        table = typeb.get_group_table(n)
        lengths = [l1 + l2 for l1, l2 in zip(table.l1, table.l2)]
        assert lengths == [len(word) for word in table.words]
        counts = np.bincount(lengths).tolist()
        assert counts == length_counts(n)


def test_braid_relations():
    """Test the Coxeter relations and the exact order of pi_0 pi_1"""
    for n in range(1, 5):
        relations = typeb.braid_relations(n)
        assert all(relations.values()), relations
    assert "(pi_0 pi_1)^4" in typeb.braid_relations(2)
    assert typeb.evaluate_word((0, 1) * 2, 2) != SignedPermutation.identity(2)
    assert typeb.evaluate_word((1, 2) * 2, 3) != SignedPermutation.identity(3)


def test_signed_permutations():
    """Test generators, composition and inverses"""
    assert SignedPermutation.generator(0, 3).images == (-1, 2, 3)
    assert SignedPermutation.generator(2, 3).images == (1, 3, 2)
    sigma = SignedPermutation(images=(-2, 3, 1))
    assert sigma(-1) == 2
    assert sigma.compose(sigma.inverse()) == SignedPermutation.identity(3)
    for element in typeb.get_group_table(3).elements:
        assert element.inverse().compose(element) == SignedPermutation.identity(3)
    with pytest.raises(ValueError):
        SignedPermutation.generator(3, 3)
    with pytest.raises(ValueError):
        SignedPermutation(images=(1, -1))


def test_reduced_words():
    """Test every element has reduced words of its BFS length only"""
    for n in range(1, 4):
        table = typeb.get_group_table(n)
        words = typeb.reduced_words(n)
        for sigma, word in zip(table.elements, table.words):
            assert word in words[sigma.images]
            for reduced in words[sigma.images]:
                assert len(reduced) == len(word)
                assert typeb.evaluate_word(reduced, n) == sigma
    longest = SignedPermutation(images=(-1, -2))
    assert typeb.reduced_words(2)[longest.images] == {(0, 1, 0, 1), (1, 0, 1, 0)}
    with pytest.raises(ParameterError):
        typeb.reduced_words(4)


def test_length_statistics_consistent():
    """Test (l1, l2) does not depend on the reduced word"""
    for n in range(1, 4):
        assert typeb.length_statistics_consistent(n)


def test_act_examples():
    """Test the transposition moves factors and pi_0 applies J to the first one"""
    J = Involution.signature([1, -1])
    e01 = typeb.basis_tensor((0, 1), 2)
    e10 = typeb.basis_tensor((1, 0), 2)
    assert np.array_equal(typeb.act(SignedPermutation.generator(1, 2), e01, J), e10)
    assert np.array_equal(typeb.act(SignedPermutation.generator(0, 2), e10, J), -e10)
    assert np.array_equal(typeb.act(SignedPermutation.generator(0, 2), e01, J), e01)
    with pytest.raises(ParameterError):
        typeb.act(SignedPermutation.identity(2), np.ones(3), J)


def test_act_is_homomorphism():
    """Test U(sigma tau) = U(sigma) U(tau)"""
    rng = np.random.default_rng(7)
    F = rng.standard_normal(8)
    elements = typeb.get_group_table(3).elements
    for sigma in elements[::5]:
        for tau in elements[::7]:
            left = typeb.act(sigma.compose(tau), F, SWAP)
            right = typeb.act(sigma, typeb.act(tau, F, SWAP), SWAP)
            assert np.allclose(left, right, atol=1e-14)


def test_tensor_helpers():
    """Test basis tensors, tensor powers and B+(f)"""
    assert typeb.basis_tensor((), 2).tolist() == [1.0]
    assert typeb.tensor_power(np.array([1.0, 2.0]), 0).tolist() == [1.0]
    assert typeb.tensor_power(np.array([1.0, 2.0]), 2).tolist() == [1.0, 2.0, 2.0, 4.0]
    F = np.array([0.5, -1.0])
    f = np.array([2.0, 3.0])
    B = typeb.creation_operator(f, 1)
    assert B.shape == (4, 2)
    assert np.allclose(B @ F, np.kron(F, f))


@pytest.mark.parametrize("alpha,q", GRAM_POINTS)
def test_gram_norms_of_tensor_powers(alpha, q):
    """Test ||f^{⊗k}||^2 = prod (1 + alpha <f, f-bar> q^{j-1}) [j]_q for J = +-I"""
    params = QParams(alpha=alpha, q=q)
    f = np.array([1.0, 0.0])
    for sign in (1.0, -1.0):
        J = Involution(matrix=sign * np.eye(2))
        for k in range(1, 5):
            norm = typeb.aq_gram([typeb.tensor_power(f, k)], params, J)[0, 0]
            assert norm == pytest.approx(typeb.fock_norm(params, k, sign), abs=1e-12)


def test_generating_function_of_statistics():
    """Test sum alpha^{l1} q^{l2} over Sigma_n on R^1"""
    params = QParams(alpha=0.3, q=-0.6)
    J = Involution.identity(1)
    for n in range(5):
        P = typeb.aq_operator(n, params, J)
        assert P.shape == (1, 1)
        assert P[0, 0] == pytest.approx(typeb.fock_norm(params, n), rel=1e-13)


@pytest.mark.parametrize("q", [-0.7, 0.0, 0.4])
def test_alpha_zero_is_symmetric_group_operator(q):
    """Test P_n at alpha = 0 only sees S_n, weighted by inversions"""
    params = QParams(alpha=0.0, q=q)
    expected = permutation_operator(3, 2, q)
    for J in (Involution.identity(2), Involution.signature([1, -1]), SWAP):
        assert np.allclose(typeb.aq_operator(3, params, J), expected, atol=1e-14)


@pytest.mark.parametrize("alpha,q", [(0.5, -0.5), (-0.8, 0.6), (0.9, 0.9)])
def test_gram_operator_positive_definite(alpha, q):
    """Test P_n is symmetric with positive spectrum"""
    P = typeb.aq_operator(3, QParams(alpha=alpha, q=q), SWAP)
    assert np.allclose(P, P.T, atol=1e-14)
    assert np.linalg.eigvalsh(P).min() > 0.0


def test_gram_guards():
    """Test rank limits and the explicit rank over R^1"""
    params = QParams(alpha=0.2, q=0.3)
    assert typeb.aq_operator(0, params, Involution.identity(2)).tolist() == [[1.0]]
    with pytest.raises(ParameterError):
        typeb.aq_operator(5, params, Involution.identity(1))
    with pytest.raises(ParameterError):
        typeb.aq_gram([np.ones(1)], params, Involution.identity(1))
    assert typeb.aq_gram([np.ones(1)], params, Involution.identity(1), n=2)[0, 0] == pytest.approx(typeb.fock_norm(params, 2))
    with pytest.raises(ParameterError):
        typeb.aq_gram([np.ones(3)], params, Involution.identity(2), n=1)
    assert typeb.aq_gram([], params, Involution.identity(2)).shape == (0, 0)


def test_annihilation_is_adjoint():
    """Test <B-(f) G, F>_n = <G, B+(f) F>_{n+1}"""
    params = QParams(alpha=-0.4, q=0.3)
    J = SWAP
    rng = np.random.default_rng(3)
    f = rng.standard_normal(2)
    F, G = rng.standard_normal(4), rng.standard_normal(8)
    lowered = typeb.annihilation_operator(f, 2, params, J) @ G
    left = lowered @ typeb.aq_operator(2, params, J) @ F
    right = G @ typeb.aq_operator(3, params, J) @ (typeb.creation_operator(f, 2) @ F)
    assert left == pytest.approx(right, rel=1e-10, abs=1e-12)


def test_singular_gram(monkeypatch):
    """Test SingularGram when the lower Gram matrix cannot be inverted"""
    monkeypatch.setattr(typeb, "aq_operator", lambda n, params, J: np.zeros((J.d ** n, J.d ** n)))
    with pytest.raises(SingularGram):
        typeb.annihilation_operator(np.ones(2), 1, QParams(alpha=0.0, q=0.0), Involution.identity(2))


@pytest.mark.parametrize(
    "alpha,q,J",
    [
        (0.5, -0.5, None),
        (0.0, 0.4, None),
        (-0.4, 0.3, Involution.signature([1, -1])),
        (0.3, 0.6, SWAP),
    ],
)
def test_commutation_relation(alpha, q, J):
    """Test B-(f) B+(g) - q B+(g) B-(f) = <f,g> + alpha <Jf,g> q^{2N}"""
    report = typeb.check_commutation(QParams(alpha=alpha, q=q), 2, 2, J)
    assert report.passed, [(c.name, c.residual) for c in report.checks]
    assert report.checks[-1].residual < typeb.COMMUTATION_TOL


@pytest.mark.parametrize(
    "alpha,q,J",
    [
        (0.5, -0.5, None),
        (0.7, 0.2, Involution.signature([1, -1])),
    ],
)
def test_left_creation_breaks_commutation(monkeypatch, alpha, q, J):
    """Test creation in the first slot, f ⊗ F, does not satisfy the relation"""
    monkeypatch.setattr(typeb, "creation_operator", lambda f, n: np.kron(np.asarray(f, dtype=float)[:, None], np.eye(f.size ** n)))
    report = typeb.check_commutation(QParams(alpha=alpha, q=q), 2, 2, J)
    assert not report.passed
    assert report.checks[-1].residual > 0.1


def test_commutation_guards():
    """Test involution dimension and rank limits"""
    params = QParams(alpha=0.1, q=0.1)
    with pytest.raises(ParameterError):
        typeb.check_commutation(params, 2, 1, Involution.identity(3))
    with pytest.raises(ParameterError):
        typeb.check_commutation(params, 2, 4)


def test_gram_chain():
    """Test Gram-norm ratios reproduce omega_n"""
    params = QParams(alpha=-0.4, q=0.3)
    chain = typeb.gram_chain(params, 4)
    assert chain == pytest.approx(list(mp_jacobi(params, 4).omega), rel=1e-13)
    with pytest.raises(ParameterError):
        typeb.gram_chain(params, 2, Involution.identity(2))


def test_vacuum_moments():
    """Test vacuum moments against the tridiagonal ones"""
    params = QParams(alpha=-0.4, q=0.3)
    tridiagonal = moments_from_jacobi(mp_jacobi(params, 4), 8)
    for k in range(9):
        assert typeb.vacuum_moment(params, k) == pytest.approx(tridiagonal[k], abs=1e-13)
    assert typeb.vacuum_moment(params, 6, chain=typeb.gram_chain(params, 3)) == pytest.approx(tridiagonal[6], rel=1e-12)
    assert typeb.vacuum_moment(params, 5) == 0.0
    with pytest.raises(ParameterError):
        typeb.vacuum_moment(params, 9)
    with pytest.raises(ParameterError):
        typeb.vacuum_moment(params, 6, chain=[1.0])


def test_vacuum_moments_negative_pairing():
    """Test <f, f-bar> = -1 flips the sign of alpha in the chain"""
    params = QParams(alpha=0.5, q=0.2)
    flipped = moments_from_jacobi(mp_jacobi(QParams(alpha=-0.5, q=0.2), 2), 4)
    assert typeb.vacuum_moment(params, 4, pairing=-1.0) == pytest.approx(flipped[4])
    assert typeb.fock_norm(params, 2, -1.0) == pytest.approx(0.5 * 0.9 * q_number(2, 0.2))
