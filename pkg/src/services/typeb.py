"""Coxeter group of type B and the (alpha,q)-inner product on tensor powers of R^d.

Sigma_n acts on (R^d)^{⊗n} by U(sigma): the j-th tensor factor moves to
slot |sigma(j)| and picks up the involution J when sigma(j) < 0, so
U(sigma tau) = U(sigma) U(tau). The (alpha,q)-operator
P_n = sum_sigma alpha^{l1(sigma)} q^{l2(sigma)} U(sigma) defines the inner
product <F, G>_{alpha,q} = F^T P_n G.
"""
from collections import deque
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from src.core.config import get_settings
from src.core.exceptions import ParameterError, SingularGram
from src.core.logging_config import log
from src.core.schemas import GroupTable, Involution, QParams, SignedPermutation, SuiteReport
from src.services.qcalc import q_number

GROUP_RANK_CAP = 5
GRAM_RANK_CAP = 4
GRAM_COND_LIMIT = 1e12
COMMUTATION_TOL = 1e-10


def enumerate_group(n: int) -> GroupTable:
    """BFS over right multiplication by pi_0..pi_{n-1}.

    The first word reaching an element is a shortest one; l1 counts its
    pi_0 letters and l2 the remaining ones.
    """
    cap = min(GROUP_RANK_CAP, get_settings().max_typeb_rank)
    if not 1 <= n <= cap:
        raise ParameterError(f"group rank must be in 1..{cap}, got {n}")
    generators = [SignedPermutation.generator(i, n) for i in range(n)]
    identity = SignedPermutation.identity(n)

    elements = [identity]
    words: List[Tuple[int, ...]] = [()]
    seen = {identity.images: 0}
    queue = deque([0])
    while queue:
        index = queue.popleft()
        sigma = elements[index]
        for i, generator in enumerate(generators):
            tau = sigma.compose(generator)
            if tau.images in seen:
                continue
            seen[tau.images] = len(elements)
            elements.append(tau)
            words.append(words[index] + (i,))
            queue.append(len(elements) - 1)

    l1 = tuple(word.count(0) for word in words)
    l2 = tuple(len(word) - ones for word, ones in zip(words, l1))
    log.debug(f"Enumerated Sigma_{n}: {len(elements)} elements, longest word {max(map(len, words))}")
    return GroupTable(n=n, elements=tuple(elements), words=tuple(words), l1=l1, l2=l2)


@lru_cache(maxsize=None)
def get_group_table(n: int) -> GroupTable:
    """Cached enumerate_group"""
    return enumerate_group(n)


def evaluate_word(word: Sequence[int], n: int) -> SignedPermutation:
    """pi_{w_1} pi_{w_2} ... pi_{w_m}"""
    sigma = SignedPermutation.identity(n)
    for i in word:
        sigma = sigma.compose(SignedPermutation.generator(i, n))
    return sigma


def braid_relations(n: int) -> Dict[str, bool]:
    """Exact check of pi_i^2 = e, (pi_0 pi_1)^4 = e, (pi_i pi_{i+1})^3 = e and
    (pi_i pi_j)^2 = e for |i - j| >= 2"""
    if n < 1:
        raise ParameterError(f"rank must be >= 1, got {n}")
    identity = SignedPermutation.identity(n)
    relations: Dict[str, bool] = {}
    for i in range(n):
        relations[f"pi_{i}^2"] = evaluate_word((i, i), n) == identity
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1:
                order = 4 if i == 0 else 3
            else:
                order = 2
            relations[f"(pi_{i} pi_{j})^{order}"] = evaluate_word((i, j) * order, n) == identity
    return relations


def reduced_words(n: int) -> Dict[Tuple[int, ...], Set[Tuple[int, ...]]]:
    """Every reduced word of every element, keyed by images; n <= 3"""
    if not 1 <= n <= 3:
        raise ParameterError(f"exhaustive reduced words are limited to n <= 3, got {n}")
    table = get_group_table(n)
    depth = {sigma.images: len(word) for sigma, word in zip(table.elements, table.words)}
    generators = [SignedPermutation.generator(i, n) for i in range(n)]
    found: Dict[Tuple[int, ...], Set[Tuple[int, ...]]] = {table.elements[0].images: {()}}
    for sigma in sorted(table.elements, key=lambda s: depth[s.images]):
        for word in found.get(sigma.images, ()):
            for i, generator in enumerate(generators):
                tau = sigma.compose(generator)
                if depth[tau.images] == depth[sigma.images] + 1:
                    found.setdefault(tau.images, set()).add(word + (i,))
    return found


def length_statistics_consistent(n: int) -> bool:
    """All reduced words of each element share the same (l1, l2)"""
    table = get_group_table(n)
    words = reduced_words(n)
    for sigma, l1, l2 in zip(table.elements, table.l1, table.l2):
        for word in words[sigma.images]:
            if (word.count(0), len(word) - word.count(0)) != (l1, l2):
                log.warning(f"Reduced word {word} of {sigma.images} disagrees with (l1, l2) = ({l1}, {l2})")
                return False
    return True


def _apply(sigma: SignedPermutation, tensor: np.ndarray, J: np.ndarray) -> np.ndarray:
    """U(sigma) on the first sigma.n axes of tensor; trailing axes are batch axes"""
    n = sigma.n
    out = tensor
    for j in range(1, n + 1):
        if sigma(j) < 0:
            out = np.moveaxis(np.tensordot(J, out, axes=([1], [j - 1])), 0, j - 1)
    axes = [0] * n
    for j in range(1, n + 1):
        axes[abs(sigma(j)) - 1] = j - 1
    return np.transpose(out, axes + list(range(n, out.ndim)))


def basis_tensor(indices: Sequence[int], d: int) -> np.ndarray:
    """e_{i_1} ⊗ ... ⊗ e_{i_n}, flattened"""
    vector = np.zeros(d ** len(indices))
    vector[np.ravel_multi_index(tuple(indices), (d,) * len(indices)) if indices else 0] = 1.0
    return vector


def tensor_power(f: np.ndarray, n: int) -> np.ndarray:
    """f^{⊗n}, flattened; the vacuum for n = 0"""
    vector = np.ones(1)
    for _ in range(n):
        vector = np.kron(vector, f)
    return vector


def act(sigma: SignedPermutation, tensor: np.ndarray, J: Involution) -> np.ndarray:
    """U(sigma) applied to a flattened rank-n tensor"""
    d, n = J.d, sigma.n
    tensor = np.asarray(tensor, dtype=float)
    if tensor.size != d ** n:
        raise ParameterError(f"tensor of size {tensor.size} is not of rank {n} over R^{d}")
    return _apply(sigma, tensor.reshape((d,) * n), J.matrix).reshape(-1)


@lru_cache(maxsize=32)
def _action_matrices(n: int, d: int, j_bytes: bytes) -> Tuple[np.ndarray, ...]:
    """U(sigma) as d^n x d^n matrices, in group table order"""
    J = np.frombuffer(j_bytes, dtype=float).reshape(d, d)
    size = d ** n
    batch = np.eye(size).reshape((d,) * n + (size,))
    matrices = []
    for sigma in get_group_table(n).elements:
        u = _apply(sigma, batch, J).reshape(size, size)
        u.setflags(write=False)
        matrices.append(u)
    return tuple(matrices)


def aq_operator(n: int, params: QParams, J: Involution) -> np.ndarray:
    """P_n = sum_sigma alpha^{l1} q^{l2} U(sigma), with 0^0 = 1; P_0 = [[1]]"""
    if n == 0:
        return np.ones((1, 1))
    if not 1 <= n <= GRAM_RANK_CAP:
        raise ParameterError(f"Gram rank must be in 0..{GRAM_RANK_CAP}, got {n}")
    table = get_group_table(n)
    matrices = _action_matrices(n, J.d, np.ascontiguousarray(J.matrix, dtype=float).tobytes())
    P = np.zeros_like(matrices[0])
    for u, l1, l2 in zip(matrices, table.l1, table.l2):
        P += params.alpha ** l1 * params.q ** l2 * u
    return P


def aq_gram(
    tensors: Sequence[np.ndarray],
    params: QParams,
    J: Involution,
    n: Optional[int] = None,
) -> np.ndarray:
    """(<F_i, F_j>_{alpha,q})_{i,j} for flattened tensors of a common rank.

    The rank is read off the tensor size unless given; over R^1 it must be given.
    """
    if not tensors:
        return np.zeros((0, 0))
    X = np.column_stack([np.asarray(t, dtype=float) for t in tensors])
    size = X.shape[0]
    if n is None:
        if J.d == 1:
            raise ParameterError("rank of tensors over R^1 must be given explicitly")
        n = int(round(np.log(size) / np.log(J.d)))
    if J.d ** n != size:
        raise ParameterError(f"tensors of size {size} are not of rank {n} over R^{J.d}")
    return X.T @ aq_operator(n, params, J) @ X


def creation_operator(f: np.ndarray, n: int) -> np.ndarray:
    """B+(f) from rank n to rank n+1: F -> F ⊗ f.

    The new factor goes in the last slot. pi_0 flips the first slot, and
    with left creation f ⊗ F the relation
    B-(f) B+(g) - q B+(g) B-(f) = <f,g> + alpha <Jf,g> q^{2N} fails,
    e.g. by 0.375 at (alpha, q) = (0.5, -0.5) with J = I.
    """
    f = np.asarray(f, dtype=float)
    return np.kron(np.eye(f.size ** n), f[:, None])


def annihilation_operator(f: np.ndarray, n: int, params: QParams, J: Involution) -> np.ndarray:
    """B-(f) from rank n+1 to rank n: the adjoint of B+(f) for the (alpha,q)-inner products"""
    P_n = aq_operator(n, params, J)
    P_next = aq_operator(n + 1, params, J)
    try:
        return np.linalg.solve(P_n, creation_operator(f, n).T @ P_next)
    except np.linalg.LinAlgError as e:
        raise SingularGram(f"rank-{n} Gram matrix is singular: {e}", float(np.linalg.cond(P_n)))


def check_commutation(params: QParams, d: int, rank: int, J: Optional[Involution] = None) -> SuiteReport:
    """B-(f) B+(g) - q B+(g) B-(f) = <f,g> I + alpha <Jf,g> q^{2N} on ranks 0..rank,
    for every pair of basis vectors f, g of R^d"""
    J = J or Involution.identity(d)
    if J.d != d:
        raise ParameterError(f"involution acts on R^{J.d}, expected R^{d}")
    if not 0 <= rank <= GRAM_RANK_CAP - 1:
        raise ParameterError(f"commutation rank must be in 0..{GRAM_RANK_CAP - 1}, got {rank}")
    report = SuiteReport(suite="typeb")
    grams = [aq_operator(n, params, J) for n in range(rank + 2)]

    regular = True
    for n, P in enumerate(grams):
        cond = float(np.linalg.cond(P))
        if not np.isfinite(cond) or cond > 1e8:
            log.warning(f"Rank-{n} Gram near singular at alpha={params.alpha}, q={params.q}: cond={cond:.3e}")
        check = report.add(f"Gram rank {n} regular", cond if np.isfinite(cond) else np.inf, GRAM_COND_LIMIT)
        regular = regular and check.passed
    if not regular:
        report.add("B-B+ - qB+B- = <f,g> + alpha <Jf,g> q^2N", np.inf, COMMUTATION_TOL, detail="singular Gram")
        return report

    basis = np.eye(d)
    # lowering[n][a]: B-(e_a) from rank n+1 to rank n
    lowering = [
        [np.linalg.solve(grams[n], creation_operator(basis[a], n).T @ grams[n + 1]) for a in range(d)]
        for n in range(rank + 1)
    ]
    worst = 0.0
    for n in range(rank + 1):
        identity = np.eye(d ** n)
        for a in range(d):
            for b in range(d):
                lhs = lowering[n][a] @ creation_operator(basis[b], n)
                if n > 0:
                    lhs = lhs - params.q * creation_operator(basis[b], n - 1) @ lowering[n - 1][a]
                pairing = basis[a] @ basis[b] + params.alpha * (J.matrix @ basis[a]) @ basis[b] * params.q ** (2 * n)
                worst = max(worst, float(np.max(np.abs(lhs - pairing * identity))))
    check = report.add(
        "B-B+ - qB+B- = <f,g> + alpha <Jf,g> q^2N",
        worst,
        COMMUTATION_TOL,
        detail=f"d={d}, rank<={rank}, alpha={params.alpha}, q={params.q}",
    )
    log.info(f"typeb commutation residual {check.residual:.3e} ({'ok' if check.passed else 'FAILED'})")
    return report


def fock_norm(params: QParams, n: int, pairing: float = 1.0) -> float:
    """prod_{j=1}^n (1 + alpha <f, f-bar> q^{j-1}) [j]_q for a unit f"""
    value = 1.0
    for j in range(1, n + 1):
        value *= (1.0 + params.alpha * pairing * params.q ** (j - 1)) * q_number(j, params.q)
    return value


def gram_chain(params: QParams, levels: int, J: Optional[Involution] = None) -> List[float]:
    """omega_1..omega_levels as ratios of Gram norms of f^{⊗n}, f the unit vector of R^1"""
    J = J or Involution.identity(1)
    if J.d != 1:
        raise ParameterError("Gram chain coefficients are read off the one-dimensional space")
    f = np.ones(1)
    norms = [float(tensor_power(f, n) @ aq_operator(n, params, J) @ tensor_power(f, n)) for n in range(levels + 1)]
    return [norms[n] / norms[n - 1] for n in range(1, levels + 1)]


def vacuum_moment(
    params: QParams,
    k: int,
    pairing: float = 1.0,
    chain: Optional[Sequence[float]] = None,
) -> float:
    """<Omega, G^k Omega> by the chain recursion

        G f^{⊗n} = f^{⊗(n+1)} + omega_n f^{⊗(n-1)},
        omega_n = (1 + alpha <f, f-bar> q^{n-1}) [n]_q.

    ``chain`` overrides omega_1.. (for instance with gram_chain).
    """
    if k < 0 or k > 8:
        raise ParameterError(f"vacuum moments are computed for 0 <= k <= 8, got {k}")
    if k % 2:
        return 0.0
    top = k // 2
    if chain is None:
        chain = [(1.0 + params.alpha * pairing * params.q ** (n - 1)) * q_number(n, params.q) for n in range(1, top + 1)]
    elif len(chain) < top:
        raise ParameterError(f"chain of length {len(chain)} cannot reach level {top}")
    v = np.zeros(top + 1)
    v[0] = 1.0
    for _ in range(k):
        nxt = np.zeros_like(v)
        nxt[1:] += v[:-1]
        for n in range(1, top + 1):
            nxt[n - 1] += chain[n - 1] * v[n]
        v = nxt
    return float(v[0])
