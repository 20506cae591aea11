"""Independent reference implementations used only by the tests."""
import itertools
from fractions import Fraction

import numpy as np


def energy_double_loop(state, q_matrix):
    """Exact sum over i <= j of Q_ij x_i x_j, rounded once at the end."""
    d = len(state)
    total = Fraction(0)
    for i in range(d):
        for j in range(i, d):
            if state[i] and state[j]:
                total += Fraction(float(q_matrix[i][j]))
    return float(total)


def all_states_reversed(d):
    """Every binary state of length d, largest code first."""
    return [np.array(s, dtype=np.uint8) for s in reversed(list(itertools.product((0, 1), repeat=d)))]


def energy_full_quadratic(states, q_matrix):
    """x' Q x with the full (not triangular) product, as a second vectorized route."""
    x = np.asarray(states, dtype=float)
    sym = (q_matrix + q_matrix.T) / 2.0
    return np.einsum("ri,ij,rj->r", x, sym, x)


def boltzmann_ground_probability(q_matrix, beta):
    d = q_matrix.shape[0]
    states = np.array(list(itertools.product((0, 1), repeat=d)), dtype=float)
    e = energy_full_quadratic(states, q_matrix)
    w = np.exp(-beta * (e - e.min()))
    return float(w[np.isclose(e, e.min(), atol=1e-12)].sum() / w.sum())


def is_connected(nodes, edges):
    nodes = set(nodes)
    adj = {n: set() for n in nodes}
    for a, b in edges:
        if a in nodes and b in nodes:
            adj[a].add(b)
            adj[b].add(a)
    start = next(iter(nodes))
    seen, stack = {start}, [start]
    while stack:
        for n in adj[stack.pop()]:
            if n not in seen:
                seen.add(n)
                stack.append(n)
    return seen == nodes
