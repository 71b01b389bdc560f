"""Correlation Bell expressions, vector strategies and Gram matrices.

A correlation Bell expression is a real matrix ``M`` of shape ``(m_A, m_B)``.
Its value on a strategy of unit vectors ``a_i, b_j`` in ``R^n`` is
``sum_ij M_ij <a_i, b_j>``; ``T^n`` denotes the maximum of that value over
all strategies in ``R^n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dimwitness.errors import DimensionError, DomainError, NumericalError, RankError

UNIT_TOL = 1e-12
PSD_TOL = -1e-9
RADICAND_TOL = -1e-12
ZERO_NORM = 1e-14


@dataclass(frozen=True, eq=False)
class BellExpression:
    """Coefficient matrix ``M_ij`` of a correlation Bell expression."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise DimensionError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise DomainError("Bell coefficients must be finite")
        if not np.any(m):
            raise DomainError("all-zero Bell expression")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def entries(self) -> list[list[float]]:
        return self.matrix.tolist()

    def __eq__(self, other):
        if not isinstance(other, BellExpression):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.matrix.shape, self.matrix.tobytes()))

    def __repr__(self):
        return f"BellExpression({self.entries!r})"


def _check_unit(vectors: np.ndarray, who: str) -> None:
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise DomainError(f"{who} vectors must have unit norm (worst deviation "
                          f"{np.max(np.abs(norms - 1.0)):.3e})")


@dataclass(frozen=True, eq=False)
class Strategy:
    """Unit vectors for Alice (one per row) and Bob (one per column) in ``R^dim``."""

    alice: np.ndarray
    bob: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.array(self.alice, dtype=float))
        b = np.atleast_2d(np.array(self.bob, dtype=float))
        if a.shape[1] != b.shape[1]:
            raise DimensionError(f"Alice vectors live in R^{a.shape[1]}, Bob's in R^{b.shape[1]}")
        _check_unit(a, "Alice")
        _check_unit(b, "Bob")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "alice", a)
        object.__setattr__(self, "bob", b)

    @property
    def dim(self) -> int:
        return self.alice.shape[1]


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Symmetric, unit-diagonal, positive semidefinite matrix ``X_ij = b_i . b_j``."""

    entries: np.ndarray

    def __post_init__(self):
        g = np.array(self.entries, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimensionError(f"Gram matrix must be square, got shape {g.shape}")
        if not np.allclose(g, g.T, rtol=0, atol=UNIT_TOL):
            raise DomainError("Gram matrix is not symmetric")
        if np.any(np.abs(np.diag(g) - 1.0) > UNIT_TOL):
            raise DomainError("Gram matrix diagonal must be 1")
        g = (g + g.T) / 2
        np.fill_diagonal(g, 1.0)
        lo = np.linalg.eigvalsh(g)[0]
        if lo < PSD_TOL:
            raise DomainError(f"Gram matrix is not positive semidefinite (min eigenvalue {lo:.3e})")
        g.setflags(write=False)
        object.__setattr__(self, "entries", g)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def pair_values(self) -> np.ndarray:
        """Off-diagonal entries ``x_nu`` in single-index (pair) order."""
        return np.array([self.entries[i, j] for i, j in pair_list(self.size)])


def pair_index(i: int, j: int) -> int:
    """Single index ``nu = (i-1)(i-2)/2 + j`` of the 1-based pair ``i > j``."""
    if not 1 <= j < i:
        raise DomainError(f"pair index needs 1 <= j < i, got i={i}, j={j}")
    return (i - 1) * (i - 2) // 2 + j


def pair_list(m: int) -> list[tuple[int, int]]:
    """0-based pairs ``(i, j)`` with ``i > j`` listed in ``nu`` order."""
    return [(i, j) for i in range(1, m) for j in range(i)]


def normalize_rows(v: np.ndarray) -> np.ndarray:
    """Normalize the last axis; vanishing rows become the first basis vector."""
    v = np.asarray(v, dtype=float)
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    small = norms < ZERO_NORM
    out = v / np.where(small, 1.0, norms)
    if np.any(small):
        e1 = np.zeros(v.shape[-1])
        e1[0] = 1.0
        out = np.where(small, e1, out)
    return out


def _bob_array(expr: BellExpression, bob) -> np.ndarray:
    b = np.atleast_2d(np.asarray(bob, dtype=float))
    if b.shape[0] != expr.cols:
        raise DimensionError(f"expression has {expr.cols} columns but {b.shape[0]} Bob vectors")
    return b


def evaluate_strategy(expr: BellExpression, s: Strategy) -> float:
    """Return ``sum_ij M_ij <a_i, b_j>``."""
    if s.alice.shape[0] != expr.rows or s.bob.shape[0] != expr.cols:
        raise DimensionError(
            f"strategy has {s.alice.shape[0]}x{s.bob.shape[0]} vectors, expression is "
            f"{expr.rows}x{expr.cols}")
    return float(np.sum(expr.matrix * (s.alice @ s.bob.T)))


def optimal_alice(expr: BellExpression, bob) -> np.ndarray:
    """Alice's best response: each ``a_i`` parallel to ``sum_j M_ij b_j``."""
    b = _bob_array(expr, bob)
    return normalize_rows(expr.matrix @ b)


def bob_value(expr: BellExpression, bob) -> float:
    """Value with Alice playing optimally: ``sum_i |sum_j M_ij b_j|``."""
    b = _bob_array(expr, bob)
    return float(np.linalg.norm(expr.matrix @ b, axis=1).sum())


def pair_coefficients(expr: BellExpression) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(C, Y)`` with ``C_k = sum_i M_ki^2`` and ``Y_k,nu = M_ki M_kj``."""
    m = expr.matrix
    c = np.sum(m * m, axis=1)
    pairs = pair_list(expr.cols)
    if not pairs:
        return c, np.zeros((expr.rows, 0))
    ii = np.array([p[0] for p in pairs])
    jj = np.array([p[1] for p in pairs])
    return c, m[:, ii] * m[:, jj]


def bob_value_from_gram(expr: BellExpression, gram) -> float:
    """``sum_k l_k`` with ``l_k = sqrt(C_k + 2 sum_nu Y_k,nu x_nu)``."""
    g = gram if isinstance(gram, GramMatrix) else GramMatrix(gram)
    if g.size != expr.cols:
        raise DimensionError(f"Gram matrix is {g.size}x{g.size}, expression has {expr.cols} columns")
    c, y = pair_coefficients(expr)
    radicand = c + 2.0 * (y @ g.pair_values())
    if np.any(radicand < RADICAND_TOL):
        raise NumericalError(f"negative radicand {radicand.min():.3e} in row length")
    return float(np.sqrt(np.clip(radicand, 0.0, None)).sum())


def gram_of(vectors) -> GramMatrix:
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    _check_unit(v, "Gram")
    g = v @ v.T
    np.fill_diagonal(g, 1.0)
    return GramMatrix((g + g.T) / 2)


def effective_rank(gram, tol: float = 1e-8) -> int:
    """Number of eigenvalues above ``tol`` times the largest one."""
    g = gram.entries if isinstance(gram, GramMatrix) else np.asarray(gram, dtype=float)
    w = np.linalg.eigvalsh(g)
    return int(np.sum(w > tol * w[-1]))


def vectors_from_gram(gram, n: int, tol: float = 1e-8) -> np.ndarray:
    """Unit vectors in ``R^n`` whose Gram matrix is ``gram``.

    Uses an eigendecomposition, so rank-deficient matrices factor without
    pivoting issues.
    """
    g = gram if isinstance(gram, GramMatrix) else GramMatrix(gram)
    rank = effective_rank(g, tol)
    if rank > n:
        raise RankError(f"Gram matrix has rank {rank}, cannot embed in R^{n}")
    w, u = np.linalg.eigh(g.entries)
    order = np.argsort(w)[::-1][:n]
    w = np.clip(w[order], 0.0, None)
    vecs = np.zeros((g.size, n))
    vecs[:, : len(order)] = u[:, order] * np.sqrt(w)
    return normalize_rows(vecs)


def constant_gram_determinant(p: float, q: float, k: int) -> float:
    """Determinant of the ``k x k`` matrix with diagonal ``p`` and off-diagonal ``q``."""
    if k < 1:
        raise DomainError("matrix size must be at least 1")
    return (p + (k - 1) * q) * (p - q) ** (k - 1)


def witness_dimension(n: int, field: str = "complex") -> int:
    """Local Hilbert-space dimension certified by a gap ``T^n < T^(n+1)``.

    ``d``-dimensional systems cannot exceed ``T^n`` when ``n = 2d - 1``
    (complex) or ``n = d`` (real), so values in ``(T^n, T^(n+1)]`` need
    local dimension larger than ``d``.
    """
    if n < 1:
        raise DomainError("Euclidean dimension must be at least 1")
    if field == "complex":
        return (n + 1) // 2
    if field == "real":
        return n
    raise DomainError(f"field must be 'real' or 'complex', got {field!r}")
