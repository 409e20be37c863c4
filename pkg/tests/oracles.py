"""Independent reference computations used by the tests.

Each oracle evaluates a quantity by a route different from the package:
exact rational arithmetic, inclusion-exclusion, explicit matrix inversion,
networkx or brute-force enumeration.
"""

from fractions import Fraction
from itertools import combinations
from math import comb

import networkx as nx
import numpy as np


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


def brute_independent_degree(g, v):
    nbrs = list(g.neighbors(v))
    for size in range(len(nbrs), 0, -1):
        for sub in combinations(nbrs, size):
            if all(not g.has_edge(a, b) for a, b in combinations(sub, 2)):
                return size
    return 0


def max_geometric_moments(d, q=Fraction(1, 2)):
    """Exact mean and variance of the max of d iid geometric(1-q) on {1,2,..}.

    Inclusion-exclusion over the minimum of j variables, which is geometric
    with success probability 1 - q**j.
    """
    m1 = Fraction(0)
    m2 = Fraction(0)
    for j in range(1, d + 1):
        s = 1 - q ** j
        sign = 1 if j % 2 else -1
        m1 += sign * comb(d, j) / s
        m2 += sign * comb(d, j) * (2 - s) / (s * s)
    return m1, m2 - m1 * m1


def absorbing_by_inverse(p, absorbing):
    """Literal fundamental-matrix route: N = inv(I - Q), a = N 1, (2N - I)a - a^2."""
    t = [i for i in range(p.shape[0]) if i != absorbing]
    q = p[np.ix_(t, t)]
    n = np.linalg.inv(np.eye(len(t)) - q)
    a = n.sum(axis=1)
    return a, (2 * n - np.eye(len(t))) @ a - a * a


def memory_chain_exact(d):
    """Transition rows of the memory recovery chain in exact arithmetic."""
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    size = d + 4
    I, P, F = 0, d + 2, d + 3
    m = [[Fraction(0)] * size for _ in range(size)]
    m[I][P] = Fraction(d - 1, 2 * d) + Fraction(1, d) * half ** (d + 1)
    m[I][1] = Fraction(d - 1, d) * half ** (d + 1) + Fraction(1, 2 * d)
    for j in range(1, d + 1):
        m[I][1 + j] = comb(d, d - j) * half ** (d + 1)
    for i in range(d + 1):
        for j in range(i, d + 1):
            m[1 + i][1 + j] = comb(d - i, d - j) * half ** (d - i + 1) + Fraction(
                1, d - i + 1
            ) * comb(d - i, j - i) * quarter ** (d - i) * (3 ** (d - j) - 2 ** (d - j))
        if i < d:
            m[1 + i][P] = Fraction(1, d - i + 1) * Fraction(3, 4) ** (d - i) + Fraction(
                d - i - 1, 2 * (d - i + 1)
            )
    m[1 + d][P] = half
    m[P][F] = Fraction(1)
    m[F][F] = Fraction(1)
    return m


def expected_exact_upper(m, absorbing):
    """Exact expected absorption times for an upper-triangular chain."""
    size = len(m)
    e = [Fraction(0)] * size
    for i in range(size - 1, -1, -1):
        if i == absorbing:
            continue
        rest = sum(m[i][j] * e[j] for j in range(i + 1, size) if j != absorbing)
        e[i] = (1 + rest) / (1 - m[i][i])
    return e
