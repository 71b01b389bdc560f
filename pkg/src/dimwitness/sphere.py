"""The continuum expression with kernel ``m <x, y>`` on the sphere ``S^(m-1)``.

Closed forms use ``s_i = int_0^pi sin^i(phi) dphi``.  For ``n < m`` the
maximum over ``n``-dimensional strategies is
``T^n = (s_(m-1) / s_m) (s_n / s_(n-1))``; for ``n >= m`` it is 1.  Letting
``m -> inf`` leaves ``s_n / s_(n-1)``, and ``n = 1`` gives the classical
value.  Monte Carlo discretization turns the expression into an ordinary
finite Bell matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dimwitness.core import BellExpression, normalize_rows
from dimwitness.errors import DomainError
from dimwitness.optimizer import DimensionProfile, ProfileEntry

_S_CACHE = [math.pi, 2.0]


def s_integral(i: int) -> float:
    """``int_0^pi sin^i(phi) dphi`` via ``s_i = s_(i-2) (i-1) / i``."""
    if i < 0:
        raise DomainError("s_i is defined for i >= 0")
    while len(_S_CACHE) <= i:
        k = len(_S_CACHE)
        _S_CACHE.append(_S_CACHE[k - 2] * (k - 1) / k)
    return _S_CACHE[i]


def limit_Tn(n: int) -> float:
    if n < 1:
        raise DomainError("n must be at least 1")
    return s_integral(n) / s_integral(n - 1)


def limit_ratio(n: int) -> float:
    """Quantum-to-classical ratio ``(pi/2) s_n / s_(n-1)`` for ``m -> inf``."""
    return math.pi / 2 * limit_Tn(n)


def wallis_limit_Tn(n: int) -> float:
    """``s_n / s_(n-1)`` from the even/odd Wallis products."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if n % 2 == 0:
        prod = math.prod((2 * i + 1) ** 2 / ((2 * i + 1) ** 2 - 1) for i in range(1, n // 2))
        return math.pi / 4 * prod
    prod = math.prod((2 * i) ** 2 / ((2 * i) ** 2 - 1) for i in range(1, (n - 1) // 2 + 1))
    return 2 / math.pi * prod


def analytic_Tn(m: int | float, n: int) -> float:
    """Maximum with ``n``-dimensional strategies; ``m = math.inf`` selects the limit."""
    if n < 1 or m < 1:
        raise DomainError("m and n must be at least 1")
    if math.isinf(m):
        return limit_Tn(n)
    if n >= m:
        return 1.0
    m = int(m)
    return s_integral(m - 1) / s_integral(m) * limit_Tn(n)


def lambda_value(m: int, n: int) -> float:
    """Common value ``s_(m-1) / (n s_(n-1))`` of the optimal-strategy coefficients."""
    if not 1 <= n <= m:
        raise DomainError("lambda needs 1 <= n <= m")
    return s_integral(m - 1) / (n * s_integral(n - 1))


@dataclass(frozen=True)
class SphereParams:
    m: int | float
    n: int

    @property
    def value(self) -> float:
        return analytic_Tn(self.m, self.n)

    @property
    def ratio(self) -> float:
        return self.value / analytic_Tn(self.m, 1)


def sphere_points(m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    return normalize_rows(rng.standard_normal((count, m)))


def sample_sphere_expression(m: int, k: int, seed: int):
    """Return ``(expr, x, y)``: the discretized expression and the sampled
    Alice (``x``) and Bob (``y``) setting points."""
    if m < 2 or k < 1:
        raise DomainError("need m >= 2 and at least one point")
    rng = np.random.default_rng(seed)
    x = sphere_points(m, k, rng)
    y = sphere_points(m, k, rng)
    return BellExpression(m * (x @ y.T) / k**2), x, y


def discretize_sphere_expression(m: int, k: int, seed: int) -> BellExpression:
    """``M_kl = m <x_k, y_l> / K^2`` for ``K`` i.i.d. uniform points per party."""
    return sample_sphere_expression(m, k, seed)[0]


def analytic_sphere_strategy(m: int, n: int, points) -> np.ndarray:
    """Normalized projection of each point onto its last ``n`` coordinates.

    Points (numerically) orthogonal to that subspace get its first basis vector.
    """
    y = np.atleast_2d(np.asarray(points, dtype=float))
    if y.shape[1] != m:
        raise DomainError(f"points must lie in R^{m}")
    if not 1 <= n <= m:
        raise DomainError("need 1 <= n <= m")
    proj = y[:, m - n:]
    norms = np.linalg.norm(proj, axis=1, keepdims=True)
    small = norms < 1e-12
    e1 = np.zeros(n)
    e1[0] = 1.0
    return np.where(small, e1, proj / np.where(small, 1.0, norms))


def lambda_monte_carlo(m: int, n: int, samples: int, seed: int) -> np.ndarray:
    """Estimate ``lambda_i = E[<e_(m-n+i), y> b_i(y)]`` for ``i = 1..n``."""
    y = sphere_points(m, samples, np.random.default_rng(seed))
    b = analytic_sphere_strategy(m, n, y)
    return np.mean(y[:, m - n:] * b, axis=0)


def analytic_profile(m: int | float, n_max: int) -> DimensionProfile:
    return DimensionProfile([ProfileEntry(n, analytic_Tn(m, n), True, 0, "analytic")
                             for n in range(1, n_max + 1)])
