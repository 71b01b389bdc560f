"""Independent reference computations shared by the tests."""

import itertools

import numpy as np


def has_zero_line(m):
    return bool((~m.any(axis=0)).any() or (~m.any(axis=1)).any())


def orbit_count(m_a, m_b, alphabet=(-1, 0, 1), filter_trivial=True):
    """Oracle: union-find over all matrices with the group's generators."""
    mats = [np.array(t, dtype=float).reshape(m_a, m_b)
            for t in itertools.product(alphabet, repeat=m_a * m_b)]
    index = {m.tobytes(): i for i, m in enumerate(mats)}
    parent = list(range(len(mats)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def moves(m):
        for i in range(m_a):
            x = m.copy()
            x[i] *= -1
            yield x
        for j in range(m_b):
            x = m.copy()
            x[:, j] *= -1
            yield x
        for i in range(m_a - 1):
            yield m[[*range(i), i + 1, i, *range(i + 2, m_a)]]
        for j in range(m_b - 1):
            yield m[:, [*range(j), j + 1, j, *range(j + 2, m_b)]]
        if m_a == m_b:
            yield m.T.copy()

    for i, m in enumerate(mats):
        for x in moves(m):
            a, b = find(i), find(index[(x + 0.0).tobytes()])
            if a != b:
                parent[a] = b
    roots = {find(i) for i, m in enumerate(mats) if not (filter_trivial and has_zero_line(m))}
    return len(roots)


def random_group_element(m, rng):
    a, b = m.shape
    x = m[rng.permutation(a)][:, rng.permutation(b)]
    x = x * rng.choice([-1, 1], size=(a, 1)) * rng.choice([-1, 1], size=(1, b))
    if a == b and rng.random() < 0.5:
        x = x.T
    return x
