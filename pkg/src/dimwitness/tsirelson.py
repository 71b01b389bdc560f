"""Quantum realizations of vector strategies from anticommuting involutions.

Vectors in ``R^m`` map to observables ``sum_k v_k G_k`` built from ``m``
pairwise anticommuting Hermitian involutions on ``D = 2^floor(m/2)``
dimensions.  With the maximally entangled state, Bob's observable is
transposed in the computational basis so that
``<psi| A (x) B |psi> = Tr(A B^T) / D = a . b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from dimwitness.core import BellExpression, Strategy, evaluate_strategy
from dimwitness.errors import CapacityError, DimensionError

GENERATOR_CAP = 12

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _kron(factors) -> np.ndarray:
    return reduce(np.kron, factors, np.eye(1, dtype=complex))


def clifford_generators(m: int) -> list[np.ndarray]:
    """First ``m`` Jordan-Wigner generators on ``k = floor(m/2)`` qubits."""
    if not 1 <= m <= GENERATOR_CAP:
        raise CapacityError(f"need 1 <= m <= {GENERATOR_CAP}, got {m}")
    k = m // 2
    gens = []
    for j in range(k):
        head = [_Z] * j
        tail = [_I] * (k - j - 1)
        gens.append(_kron(head + [_X] + tail))
        gens.append(_kron(head + [_Y] + tail))
    gens.append(_kron([_Z] * k))
    return gens[:m]


@dataclass(frozen=True)
class QuantumRealization:
    local_dim: int
    generators: tuple
    alice_obs: tuple
    bob_obs: tuple
    state: np.ndarray

    def correlation(self, i: int, j: int) -> float:
        """``<psi| A_i (x) B_j |psi>`` evaluated on the state as a ``D x D`` coefficient matrix."""
        d = self.local_dim
        psi = self.state.reshape(d, d)
        val = np.trace(psi.conj().T @ self.alice_obs[i] @ psi @ self.bob_obs[j].T)
        return float(val.real)

    def correlations(self) -> np.ndarray:
        return np.array([[self.correlation(i, j) for j in range(len(self.bob_obs))]
                         for i in range(len(self.alice_obs))])

    def bell_value(self, expr: BellExpression) -> float:
        return float(np.sum(expr.matrix * self.correlations()))


def maximally_entangled(d: int) -> np.ndarray:
    psi = np.zeros(d * d, dtype=complex)
    psi[:: d + 1] = 1.0 / np.sqrt(d)
    return psi


def realize(alice, bob) -> QuantumRealization:
    s = Strategy(alice, bob)
    m = s.dim
    gens = clifford_generators(m)
    d = gens[0].shape[0]
    stack = np.stack(gens)
    alice_obs = tuple(np.tensordot(a, stack, axes=1) for a in s.alice)
    bob_obs = tuple(np.tensordot(b, stack, axes=1).T for b in s.bob)
    return QuantumRealization(d, tuple(gens), alice_obs, bob_obs, maximally_entangled(d))


@dataclass(frozen=True)
class VerificationReport:
    correlation_residual: float
    involution_residual: float
    anticommutator_residual: float
    hermiticity_residual: float
    realized_value: float
    vector_value: float
    passed: bool


def verify_realization(r: QuantumRealization, expr: BellExpression, target: Strategy,
                       tol: float = 1e-10) -> VerificationReport:
    """Compare a realization with the vector strategy it should reproduce."""
    if len(r.alice_obs) != expr.rows or len(r.bob_obs) != expr.cols:
        raise DimensionError("realization and expression shapes differ")
    eye = np.eye(r.local_dim)
    corr = r.correlations()
    corr_res = float(np.max(np.abs(corr - target.alice @ target.bob.T)))
    observables = r.alice_obs + r.bob_obs
    inv_res = max(float(np.max(np.abs(o @ o - eye))) for o in observables)
    herm_res = max(float(np.max(np.abs(o - o.conj().T))) for o in observables)
    anti = 0.0
    for k, gk in enumerate(r.generators):
        for l, gl in enumerate(r.generators[k:], start=k):
            want = 2 * eye if k == l else 0 * eye
            anti = max(anti, float(np.max(np.abs(gk @ gl + gl @ gk - want))))
    realized = float(np.sum(expr.matrix * corr))
    vector = evaluate_strategy(expr, target)
    passed = max(corr_res, inv_res, herm_res, anti, abs(realized - vector)) < tol
    return VerificationReport(corr_res, inv_res, anti, herm_res, realized, vector, passed)


def _complex_json(a: np.ndarray) -> dict:
    return {"real": np.real(a).tolist(), "imag": np.imag(a).tolist()}


def realization_to_json(r: QuantumRealization) -> dict:
    return {
        "local_dim": r.local_dim,
        "generators": [_complex_json(g) for g in r.generators],
        "alice": [_complex_json(a) for a in r.alice_obs],
        "bob": [_complex_json(b) for b in r.bob_obs],
        "state": _complex_json(r.state),
    }

