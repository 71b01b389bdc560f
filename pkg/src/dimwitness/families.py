"""The gamma-weighted hypercube family, its gamma=0 ancestor, and CHSH."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dimwitness.core import BellExpression, GramMatrix, pair_list
from dimwitness.errors import DomainError


@dataclass(frozen=True)
class FamilyAnalytic:
    m_b: int
    gamma: float
    t_max: float
    x_star: float


def _difference_rows(m_b: int) -> np.ndarray:
    if m_b < 2:
        raise DomainError("the family needs at least two Bob settings")
    pairs = pair_list(m_b)
    rows = np.zeros((len(pairs), m_b))
    for r, (i, j) in enumerate(pairs):
        rows[r, j] = 1.0
        rows[r, i] = -1.0
    return rows


def bgamma_matrix(m_b: int, gamma: float) -> BellExpression:
    """Pair-difference rows in pair order plus one row with every entry ``gamma``.

    The expression has ``m_B (m_B - 1) / 2 + 1`` rows.
    """
    if gamma <= 0:
        raise DomainError("gamma must be positive; use zn_matrix for gamma = 0")
    rows = _difference_rows(m_b)
    return BellExpression(np.vstack([rows, np.full((1, m_b), float(gamma))]))


def zn_matrix(m_b: int) -> BellExpression:
    return BellExpression(_difference_rows(m_b))


def chsh_matrix() -> BellExpression:
    return BellExpression([[1.0, 1.0], [1.0, -1.0]])


def stationary_gram_value(m_b: int, gamma: float) -> float:
    return (2 * gamma**2 - m_b) / (2 * gamma**2 + m_b * (m_b - 1))


def bgamma_analytic(m_b: int, gamma: float) -> FamilyAnalytic:
    """Full-dimension maximum ``m_B sqrt(gamma^2 + m_B (m_B - 1) / 2)`` and the
    common off-diagonal Gram value at which it is attained."""
    if m_b < 2:
        raise DomainError("the family needs at least two Bob settings")
    t_max = m_b * math.sqrt(gamma**2 + m_b * (m_b - 1) / 2)
    return FamilyAnalytic(m_b=m_b, gamma=float(gamma), t_max=t_max,
                          x_star=stationary_gram_value(m_b, gamma))


def bgamma_gram(m_b: int, gamma: float) -> GramMatrix:
    x = stationary_gram_value(m_b, gamma)
    g = np.full((m_b, m_b), x)
    np.fill_diagonal(g, 1.0)
    return GramMatrix(g)
