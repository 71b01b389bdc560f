import numpy as np
import pytest

from dimwitness.core import Strategy, normalize_rows
from dimwitness.errors import CapacityError, DimensionError
from dimwitness.families import bgamma_matrix, chsh_matrix
from dimwitness.tsirelson import (
    clifford_generators,
    maximally_entangled,
    realization_to_json,
    realize,
    verify_realization,
)


def kron_correlation(r, i, j):
    """Oracle: <psi| A_i (x) B_j |psi> on the full D^2 state vector."""
    psi = r.state
    return float(np.real(psi.conj() @ np.kron(r.alice_obs[i], r.bob_obs[j]) @ psi))


@pytest.mark.parametrize("m", range(1, 9))
def test_generators_anticommute(m):
    gens = clifford_generators(m)
    d = 2 ** (m // 2)
    assert len(gens) == m
    eye = np.eye(d)
    for k, g in enumerate(gens):
        assert g.shape == (d, d)
        assert np.allclose(g, g.conj().T)
        for l, h in enumerate(gens):
            want = 2 * eye if k == l else 0 * eye
            assert np.allclose(g @ h + h @ g, want, atol=1e-14)
            assert np.trace(g @ h).real / d == pytest.approx(float(k == l))


def test_generator_cap():
    with pytest.raises(CapacityError):
        clifford_generators(13)
    with pytest.raises(CapacityError):
        clifford_generators(0)


def test_maximally_entangled_state():
    psi = maximally_entangled(4)
    assert np.linalg.norm(psi) == pytest.approx(1.0)
    assert np.allclose(psi.reshape(4, 4), np.eye(4) / 2)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_correlations_match_kron_oracle_and_dot_products(m):
    rng = np.random.default_rng(m)
    a = normalize_rows(rng.standard_normal((3, m)))
    b = normalize_rows(rng.standard_normal((4, m)))
    r = realize(a, b)
    for i in range(3):
        for j in range(4):
            assert r.correlation(i, j) == pytest.approx(kron_correlation(r, i, j), abs=1e-12)
            assert r.correlation(i, j) == pytest.approx(a[i] @ b[j], abs=1e-12)


def test_bgamma_optimum_realizes_on_a_qubit():
    expr = bgamma_matrix(3, 1.0)
    x = -1 / 8
    g = np.full((3, 3), x) + (1 - x) * np.eye(3)
    w, u = np.linalg.eigh(g)
    bob = normalize_rows(u * np.sqrt(np.clip(w, 0, None)))
    h = expr.matrix @ bob
    alice = normalize_rows(h)
    r = realize(alice, bob)
    assert r.local_dim == 2
    rep = verify_realization(r, expr, Strategy(alice, bob))
    assert rep.passed
    assert rep.realized_value == pytest.approx(6.0, abs=1e-10)


def test_verify_detects_shape_mismatch():
    r = realize([[1.0, 0.0]], [[0.0, 1.0]])
    with pytest.raises(DimensionError):
        verify_realization(r, chsh_matrix(), Strategy([[1.0, 0.0]], [[0.0, 1.0]]))


def test_json_export_shapes():
    r = realize([[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
    out = realization_to_json(r)
    assert out["local_dim"] == 2
    assert len(out["generators"]) == 3
    assert np.array(out["state"]["real"]).shape == (4,)
