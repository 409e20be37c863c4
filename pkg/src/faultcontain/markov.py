"""Absorbing Markov chains and the closed-form containment bounds.

For an absorbing chain with transient block ``Q`` the fundamental matrix is
``N = (I - Q)^{-1}``.  Expected steps to absorption are ``a = N 1`` and their
variance is ``(2N - I) a - a**2``.  Neither ``N`` nor any other inverse is
formed: with ``b = N a`` the variance equals ``2b - a - a**2``, so two linear
solves against ``I - Q`` suffice.  When ``I - Q`` is upper triangular under
the given state order the solves are back-substitutions.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConstructionError, ContractError, StructuralError

ROW_TOL = 1e-12


def harmonic(d: int) -> float:
    return math.fsum(1.0 / i for i in range(1, d + 1))


@dataclass(frozen=True)
class AbsorbingChain:
    """Row-stochastic matrix with a single absorbing state.

    Parameters
    ----------
    labels : sequence of str
        One label per state.
    matrix : ndarray, shape (m, m)
        Transition probabilities; row ``i`` is the distribution after one
        step from state ``i``.
    absorbing : int
        Index of the absorbing state.
    """

    labels: tuple
    matrix: np.ndarray
    absorbing: int

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != len(self.labels):
            raise ContractError("matrix must be square and match the labels")
        if not 0 <= self.absorbing < m.shape[0]:
            raise ContractError("absorbing index out of range")
        if (m < 0).any():
            raise ContractError("negative transition probability")
        drift = np.abs(m.sum(axis=1) - 1.0)
        bad = int(np.argmax(drift))
        if drift[bad] > ROW_TOL:
            raise ContractError(
                f"row {self.labels[bad]} sums to {m[bad].sum()!r}, off by {drift[bad]:.3g}"
            )
        unit = np.zeros(m.shape[0])
        unit[self.absorbing] = 1.0
        if not np.array_equal(m[self.absorbing], unit):
            raise ContractError("absorbing row must be the unit vector on itself")

    @property
    def transient(self) -> list[int]:
        return [i for i in range(len(self.labels)) if i != self.absorbing]

    def index(self, label) -> int:
        return self.labels.index(label)


@dataclass(frozen=True)
class ChainSolution:
    """Expected steps to absorption and their variance, per transient state."""

    chain: AbsorbingChain
    expected: np.ndarray
    variance: np.ndarray

    def _pos(self, label) -> int:
        i = self.chain.index(label)
        if i == self.chain.absorbing:
            return -1
        return self.chain.transient.index(i)

    def expected_from(self, label) -> float:
        k = self._pos(label)
        return 0.0 if k < 0 else float(self.expected[k])

    def variance_from(self, label) -> float:
        k = self._pos(label)
        return 0.0 if k < 0 else float(self.variance[k])


def _check_reachability(chain: AbsorbingChain) -> None:
    # reverse BFS from the absorbing state over positive transitions
    m = chain.matrix
    n = m.shape[0]
    seen = [False] * n
    seen[chain.absorbing] = True
    queue = deque([chain.absorbing])
    preds = [np.flatnonzero(m[:, j] > 0) for j in range(n)]
    while queue:
        j = queue.popleft()
        for i in preds[j]:
            if not seen[i]:
                seen[i] = True
                queue.append(int(i))
    for i in range(n):
        if not seen[i]:
            raise StructuralError(f"absorbing state unreachable from state {chain.labels[i]}")


def solve_absorbing(chain: AbsorbingChain) -> ChainSolution:
    """Expected absorption time and its variance from every transient state.

    Raises
    ------
    StructuralError
        If some transient state cannot reach the absorbing state, in which
        case ``I - Q`` is singular.
    """
    _check_reachability(chain)
    t = chain.transient
    q = chain.matrix[np.ix_(t, t)]
    a_mat = np.eye(len(t)) - q
    ones = np.ones(len(t))
    if np.allclose(a_mat, np.triu(a_mat), rtol=0.0, atol=0.0):
        a = solve_triangular(a_mat, ones)
        b = solve_triangular(a_mat, a)
    else:
        a = np.linalg.solve(a_mat, ones)
        b = np.linalg.solve(a_mat, a)
    var = 2.0 * b - a - a * a
    # round-off can leave a tiny negative variance for deterministic states
    var[np.abs(var) < 1e-12] = 0.0
    return ChainSolution(chain, a, var)


# ---------------------------------------------------------------- message fault

def message_chain(d: int) -> AbsorbingChain:
    """Number of unresolved conflict nodes after a corrupted broadcast.

    States are labelled ``d, d-1, .., 0`` (unresolved count); each unresolved
    node resolves per round with probability 1/2, so ``k -> k-j`` has
    probability ``C(k, j) / 2**k``.  State 0 is absorbing.
    """
    if d < 1:
        raise ContractError("message_chain needs d >= 1")
    m = np.zeros((d + 1, d + 1))
    for k in range(d + 1):
        row = d - k
        for j in range(k + 1):
            m[row, d - (k - j)] = math.comb(k, j) * 0.5 ** k
    return AbsorbingChain(tuple(range(d, -1, -1)), m, d)


def _check_q(d, q):
    if d < 1:
        raise ContractError("d must be >= 1")
    if not 0.0 < q < 1.0:
        raise ContractError("q must lie in (0, 1)")


def _survival(d: int, q: float, l: int) -> float:
    # 1 - (1 - q^l)^d without cancellation for small q^l
    if l == 0:
        return 1.0
    return -math.expm1(d * math.log1p(-(q ** l)))


def expected_series(d: int, q: float = 0.5, tol: float = 1e-12) -> float:
    """E[X_d] = sum_{l>=0} (1 - (1 - q^l)^d), the max of d geometric variables.

    The sum stops once the tail bound ``d q^L / (1 - q)`` drops below
    ``tol``; the bound itself is then added.
    """
    _check_q(d, q)
    terms = []
    l = 0
    while True:
        tail = d * q ** l / (1.0 - q)
        if tail < tol:
            break
        terms.append(_survival(d, q, l))
        l += 1
    return math.fsum(terms) + tail


def _weighted_series(d: int, q: float, tol: float) -> float:
    # sum_{l>=1} l (1 - (1 - q^l)^d) plus its tail bound
    terms = []
    l = 1
    while True:
        tail = d * q ** l * (l * (1.0 - q) + q) / (1.0 - q) ** 2
        if tail < tol:
            break
        terms.append(l * _survival(d, q, l))
        l += 1
    return math.fsum(terms) + tail


def variance_series(d: int, q: float = 0.5, tol: float = 1e-12) -> float:
    """Var[X_d] = 2 sum_{l>=1} l (1 - (1 - q^l)^d) + E - E**2."""
    _check_q(d, q)
    e = expected_series(d, q, tol)
    return 2.0 * _weighted_series(d, q, tol) + e - e * e


def harmonic_bound(d: int, q: float = 0.5) -> float:
    """Closed-form approximation -H_d / ln q + 1/2 of E[X_d]."""
    _check_q(d, q)
    return -harmonic(d) / math.log(q) + 0.5


def containment_bound_message(d: int) -> float:
    """H_d / ln 2 + 1/2 rounds for a corrupted broadcast hitting d nodes."""
    return harmonic_bound(d, 0.5)


def variance_formula(d: int) -> float:
    """Closed-form variance estimate sum_{i<=d} 1/i**2 / ln(2)**2 + 1/4."""
    if d < 1:
        raise ContractError("d must be >= 1")
    return math.fsum(1.0 / (i * i) for i in range(1, d + 1)) / math.log(2) ** 2 + 0.25


def weighted_integral_bound(d: int, q: float = 0.5) -> float:
    """Integral upper bound sum_{i<=d} H_i / i / ln(q)**2 of sum l (1-(1-q^l)^d)."""
    _check_q(d, q)
    h = 0.0
    acc = []
    for i in range(1, d + 1):
        h += 1.0 / i
        acc.append(h / i)
    return math.fsum(acc) / math.log(q) ** 2


def variance_bound() -> float:
    """pi**2 / (6 ln(2)**2) + 1/4, the d-independent variance bound."""
    return math.pi ** 2 / (6.0 * math.log(2) ** 2) + 0.25


# ---------------------------------------------------------------- memory fault

def memory_chain(d: int) -> AbsorbingChain:
    """Recovery chain after a memory corruption of a node with d conflicts.

    States are ``I, C0, .., Cd, P, F`` with ``F`` absorbing.
    """
    if d < 1:
        raise ContractError("memory_chain needs d >= 1")
    labels = ("I",) + tuple(f"C{i}" for i in range(d + 1)) + ("P", "F")
    size = d + 4
    I, P, F = 0, d + 2, d + 3

    def C(i):
        return 1 + i

    m = np.zeros((size, size))
    h = 0.5 ** (d + 1)
    m[I, P] = (d - 1) / (2 * d) + h / d
    m[I, C(0)] = (d - 1) / d * h + 1 / (2 * d)
    for j in range(1, d + 1):
        m[I, C(j)] = math.comb(d, d - j) * h
    for i in range(d + 1):
        r = d - i
        for j in range(i, d + 1):
            m[C(i), C(j)] = (
                math.comb(r, d - j) * 0.5 ** (r + 1)
                + math.comb(r, j - i) * 0.25 ** r * (3 ** (d - j) - 2 ** (d - j)) / (r + 1)
            )
        if i < d:
            m[C(i), P] = 0.75 ** r / (r + 1) + (r - 1) / (2 * (r + 1))
    m[C(d), P] = 0.5
    m[P, F] = 1.0
    m[F, F] = 1.0
    drift = np.abs(m.sum(axis=1) - 1.0).max()
    if drift > ROW_TOL:
        raise ConstructionError(f"memory_chain({d}) rows drift by {drift:.3g}")
    return AbsorbingChain(labels, m, F)


def dominating_chain(d: int, lower_bounds, labels: Sequence | None = None) -> AbsorbingChain:
    """Upper-triangular chain from lower bounds ``p_ij`` (i < j) on progress.

    States ``0..d``; state ``d`` absorbs.  Entries on or below the diagonal of
    ``lower_bounds`` are ignored, and each diagonal entry takes the residual
    mass ``1 - sum_{j>i} p_ij``.
    """
    p = np.array(lower_bounds, dtype=float)
    if p.shape != (d + 1, d + 1):
        raise ContractError(f"lower_bounds must have shape ({d + 1}, {d + 1})")
    p = np.triu(p, k=1)
    if (p < 0).any():
        raise ContractError("lower bounds must be nonnegative")
    mass = p.sum(axis=1)
    if (mass > 1.0 + ROW_TOL).any():
        i = int(np.argmax(mass))
        raise ContractError(f"row {i} carries mass {mass[i]!r} > 1")
    p[np.diag_indices(d + 1)] = np.clip(1.0 - mass, 0.0, 1.0)
    p[d] = 0.0
    p[d, d] = 1.0
    return AbsorbingChain(tuple(labels) if labels else tuple(range(d + 1)), p, d)


def containment_bound_memory(delta_i: int) -> float:
    """H_{delta_i} / ln 2 + 11/2 rounds for a single memory corruption."""
    if delta_i < 1:
        raise ContractError("delta_i must be >= 1")
    return harmonic(delta_i) / math.log(2) + 5.5
