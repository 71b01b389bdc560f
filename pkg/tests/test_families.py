import math

import numpy as np
import pytest

from dimwitness.core import bob_value_from_gram, constant_gram_determinant, vectors_from_gram
from dimwitness.errors import DomainError
from dimwitness.families import (
    bgamma_analytic,
    bgamma_gram,
    bgamma_matrix,
    chsh_matrix,
    stationary_gram_value,
    zn_matrix,
)


def test_bgamma_matrix_layout():
    m = bgamma_matrix(3, 1.0).matrix
    assert m.tolist() == [[1, -1, 0], [1, 0, -1], [0, 1, -1], [1, 1, 1]]
    assert bgamma_matrix(5, 2.0).shape == (11, 5)
    assert zn_matrix(4).shape == (6, 4)
    assert np.array_equal(chsh_matrix().matrix, [[1, 1], [1, -1]])


def test_bgamma_domain():
    with pytest.raises(DomainError):
        bgamma_matrix(3, 0.0)
    with pytest.raises(DomainError):
        bgamma_matrix(1, 1.0)


@pytest.mark.parametrize("m_b", range(2, 9))
@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0, 3.0])
def test_stationary_gram_attains_closed_form(m_b, gamma):
    fa = bgamma_analytic(m_b, gamma)
    g = bgamma_gram(m_b, gamma)
    assert bob_value_from_gram(bgamma_matrix(m_b, gamma), g) == pytest.approx(fa.t_max, rel=1e-12)
    # feasibility: the constant Gram matrix is PSD, by the determinant oracle
    for k in range(1, m_b + 1):
        assert constant_gram_determinant(1.0, fa.x_star, k) >= -1e-12
    assert np.linalg.det(g.entries) == pytest.approx(
        constant_gram_determinant(1.0, fa.x_star, m_b), abs=1e-9)


def test_x_star_known_value():
    assert stationary_gram_value(3, 1.0) == pytest.approx(-1 / 8)
    assert bgamma_analytic(3, 1.0).t_max == pytest.approx(6.0)
    # gamma^2 = m_B / 2 gives orthogonal Bob vectors
    assert stationary_gram_value(4, math.sqrt(2)) == pytest.approx(0.0, abs=1e-15)


def test_closed_form_is_a_local_maximum_over_constant_grams():
    m_b, gamma = 4, 1.3
    expr = bgamma_matrix(m_b, gamma)
    x0 = stationary_gram_value(m_b, gamma)
    lo = -1 / (m_b - 1)

    def value(x):
        g = np.full((m_b, m_b), x)
        np.fill_diagonal(g, 1.0)
        return bob_value_from_gram(expr, g)

    grid = np.linspace(lo + 1e-9, 1.0, 2001)
    assert max(value(x) for x in grid) <= value(x0) + 1e-12


def test_stationary_vectors_embed_in_full_dimension():
    g = bgamma_gram(5, 1.0)
    v = vectors_from_gram(g, 5)
    assert np.allclose(v @ v.T, g.entries, atol=1e-10)
