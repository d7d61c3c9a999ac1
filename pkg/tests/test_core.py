import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpoly.core import (
    MultipartiteState,
    PureState,
    canonical_eigenbasis,
    eig_hermitian,
    generalized_paulis,
    haar_isometry,
    make_named_state,
    partial_trace,
    purify,
    random_density,
    random_pure,
    tensor,
)

seeds = st.integers(0, 2**32 - 1)


def dm(m, dims=(2,)):
    return MultipartiteState(np.asarray(m, dtype=complex), dims)


def test_tensor_of_maximally_mixed():
    s = tensor(dm(np.eye(2) / 2), dm(np.eye(2) / 2))
    assert s.dims == (2, 2)
    assert np.allclose(s.matrix, np.eye(4) / 4)


def test_tensor_of_pure_kets():
    zero = PureState([1, 0], (2,))
    s = tensor(zero, zero)
    assert isinstance(s, PureState)
    assert np.allclose(s.vector, [1, 0, 0, 0])


def test_tensor_bell_with_ancilla():
    s = tensor(make_named_state("bell:+"), PureState([1, 0], (2,), ("C",)))
    assert s.n_parties == 3
    assert np.allclose(s.marginal(["C"]).matrix, np.diag([1, 0]))


def test_tensor_renames_clashing_labels():
    s = tensor(dm(np.eye(2) / 2), dm(np.eye(2) / 2))
    assert len(set(s.labels)) == 2


def test_partial_trace_examples():
    assert np.allclose(make_named_state("bell:+").marginal(["A"]).matrix, np.eye(2) / 2)
    assert np.allclose(make_named_state("ghz:4").marginal([0]).matrix, np.eye(2) / 2)
    rng = np.random.default_rng(1)
    ra, rb = random_density((2,), rng), random_density((3,), rng)
    assert np.allclose(tensor(ra, rb).marginal([0]).matrix, ra.matrix, atol=1e-14)


def test_partial_trace_needs_a_party():
    with pytest.raises(ValueError, match="no parties kept"):
        partial_trace(make_named_state("bell:+"), [])


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_partial_trace_composes(seed):
    s = random_density((2, 3, 2), np.random.default_rng(seed))
    once = s.marginal([0])
    twice = s.marginal([0, 1]).marginal([0])
    assert np.max(np.abs(once.matrix - twice.matrix)) <= 1e-12


def test_validation_rejects_bad_input():
    with pytest.raises(ValueError, match="Hermitian"):
        dm([[0.5, 0.2], [0.0, 0.5]])
    with pytest.raises(ValueError, match="trace"):
        dm(np.eye(2))
    with pytest.raises(ValueError, match="positive"):
        dm([[1.5, 0], [0, -0.5]])
    with pytest.raises(ValueError, match="norm"):
        PureState([1, 1], (2,))
    with pytest.raises(ValueError):
        MultipartiteState(np.eye(4) / 4, (2, 3))


def test_state_arrays_are_read_only():
    s = make_named_state("bell:+")
    with pytest.raises(ValueError):
        s.vector[0] = 0


def test_eig_hermitian_examples():
    w, _ = eig_hermitian(dm(np.eye(2) / 2))
    assert np.allclose(w, [0.5, 0.5])
    w, v = eig_hermitian(dm(np.diag([0.25, 0.75])))
    assert np.allclose(w, [0.75, 0.25])
    assert np.allclose(np.abs(v), [[0, 1], [1, 0]])


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_eigendecomposition_reconstructs(seed):
    s = random_density((4,), np.random.default_rng(seed))
    w, v = eig_hermitian(s, clip=False)
    assert np.max(np.abs((v * w) @ v.conj().T - s.matrix)) <= 1e-10


def test_canonical_eigenbasis_is_deterministic_under_degeneracy():
    w, v = canonical_eigenbasis(np.eye(2) / 2)
    assert np.allclose(w, [0.5, 0.5])
    assert np.allclose(v, np.eye(2))
    u = haar_isometry(4, 4, np.random.default_rng(3))
    rho = u @ np.diag([0.4, 0.4, 0.2, 0.0]) @ u.conj().T
    _, v1 = canonical_eigenbasis(rho)
    _, v2 = canonical_eigenbasis(rho.copy())
    assert np.array_equal(v1, v2)
    assert np.allclose(v1.conj().T @ v1, np.eye(4))


def test_purify_examples():
    p = purify(dm(np.eye(2) / 2))
    assert p.n_parties == 2
    assert np.allclose(p.marginal([0]).matrix, np.eye(2) / 2)
    p = purify(make_named_state("bell:+"))
    assert np.allclose(p.marginal([0, 1]).matrix, make_named_state("bell:+").density().matrix)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_purify_reproduces_input(seed):
    s = random_density((2, 2), np.random.default_rng(seed), rank=2)
    p = purify(s)
    assert p.dim == 8
    assert np.max(np.abs(p.marginal([0, 1]).matrix - s.matrix)) <= 1e-10


def test_paulis_qubit():
    p = generalized_paulis(2)
    assert np.allclose(p.Z, np.diag([1, -1]))
    assert np.allclose(p.X, [[0, 1], [1, 0]])


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_paulis_weyl_relations(d):
    p = generalized_paulis(d)
    eye = np.eye(d)
    assert np.isclose(p.omega, np.exp(2j * np.pi / d))
    assert np.max(np.abs(np.linalg.matrix_power(p.Z, d) - eye)) <= 1e-12
    assert np.max(np.abs(np.linalg.matrix_power(p.X, d) - eye)) <= 1e-12
    assert np.allclose(p.Z @ p.X, p.omega * p.X @ p.Z)
    assert np.allclose(p.X @ p.X.conj().T, eye)
    assert np.allclose(p.Z @ p.Z.conj().T, eye)


def test_paulis_in_rotated_basis():
    u = haar_isometry(3, 3, np.random.default_rng(0))
    p = generalized_paulis(3, u)
    assert np.allclose(p.Z @ u[:, 1], p.omega * u[:, 1])
    assert np.allclose(p.X @ u[:, 0], u[:, 1])


def test_named_states():
    ghz = make_named_state("ghz:4")
    expected = np.zeros(16)
    expected[[0, 15]] = 1 / np.sqrt(2)
    assert np.allclose(ghz.vector, expected)
    assert ghz.labels == ("A", "B1", "B2", "B3")
    assert ghz.name == "ghz:4"
    assert np.allclose(make_named_state("bell:+").vector, [1, 0, 0, 1] / np.sqrt(2))
    a, b = make_named_state("haar:3:seed=7"), make_named_state("haar:3:seed=7")
    assert np.isclose(np.linalg.norm(a.vector), 1)
    assert np.array_equal(a.vector, b.vector)
    assert np.allclose(make_named_state("w:3").vector[[1, 2, 4]], 1 / np.sqrt(3))
    assert np.linalg.matrix_rank(make_named_state("mixed:2:seed=1:rank=2").matrix) == 2


@pytest.mark.parametrize("spec", ["ghz", "ghz:1", "foo:3", "haar:3:colour=2", "product:2"])
def test_unknown_named_state(spec):
    with pytest.raises(ValueError, match="known specs"):
        make_named_state(spec)


@settings(max_examples=20, deadline=None)
@given(seeds, seeds)
def test_tensor_of_valid_states_is_valid(s1, s2):
    a = random_density((2,), np.random.default_rng(s1))
    b = random_pure((3,), np.random.default_rng(s2))
    t = tensor(a, b)
    assert abs(np.trace(t.matrix) - 1) < 1e-12
    assert np.linalg.eigvalsh(t.matrix)[0] > -1e-12
