import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpoly.core import (
    MultipartiteState,
    PureState,
    haar_isometry,
    make_named_state,
    random_density,
    random_pure,
    tensor,
)
from qpoly.ensembles import (
    Ensemble,
    RankOneMeasurement,
    build_ccq,
    ccq_blocks,
    eigen_ensemble,
    hjw_ensemble,
    induced_ensemble,
    measurement_from_isometry,
    post_measurement_pure_states,
)

seeds = st.integers(0, 2**32 - 1)
H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
GHZ_PAIR = MultipartiteState(np.diag([0.5, 0, 0, 0.5]), (2, 2))


def test_ensemble_validation():
    m = make_named_state("bell:+")
    with pytest.raises(ValueError):
        Ensemble([0.5, 0.6], (m, m))
    with pytest.raises(ValueError):
        Ensemble([1.0], (m, m))
    with pytest.raises(ValueError, match="different systems"):
        Ensemble([0.5, 0.5], (m, PureState([1, 0], (2,))))


def test_identity_mixer_gives_eigendecomposition():
    rho = random_density((2, 2), np.random.default_rng(0), rank=3)
    ens = hjw_ensemble(rho, np.eye(3))
    w = np.linalg.eigvalsh(rho.matrix)[::-1][:3]
    assert np.allclose(ens.weights, w)
    for p, m in zip(ens.weights, ens.members):
        assert np.allclose(rho.matrix @ m.vector, p * m.vector)


def test_hadamard_mixer_on_ghz_pair_gives_bell_states():
    ens = hjw_ensemble(GHZ_PAIR, H)
    assert np.allclose(ens.weights, [0.5, 0.5])
    bells = [np.array([1, 0, 0, 1]) / np.sqrt(2), np.array([1, 0, 0, -1]) / np.sqrt(2)]
    for m, b in zip(ens.members, bells):
        assert abs(abs(np.vdot(m.vector, b)) - 1) < 1e-12


def test_mixer_shape_checked():
    with pytest.raises(ValueError, match="columns"):
        hjw_ensemble(GHZ_PAIR, np.eye(3))
    with pytest.raises(ValueError, match="orthonormal"):
        hjw_ensemble(GHZ_PAIR, np.ones((2, 2)))


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(0, 4))
def test_hjw_reconstructs_parent(seed, rank, extra):
    rng = np.random.default_rng(seed)
    rho = random_density((2, 2), rng, rank=rank)
    ens = hjw_ensemble(rho, haar_isometry(rank + extra, rank, rng))
    assert ens.residual() <= 1e-10
    assert eigen_ensemble(rho).residual() <= 1e-10


def test_measurement_from_isometry_examples():
    m = measurement_from_isometry(np.eye(2), "B")
    assert np.allclose(m.operators[0], np.diag([1, 0]))
    m = measurement_from_isometry(H, "B")
    assert np.allclose(m.operators[0], np.full((2, 2), 0.5))
    assert np.allclose(m.operators[1], [[0.5, -0.5], [-0.5, 0.5]])
    m = measurement_from_isometry(haar_isometry(4, 2, np.random.default_rng(5)), "B")
    assert len(m) == 4
    assert np.allclose(sum(m.operators), np.eye(2))
    assert all(np.linalg.matrix_rank(op, tol=1e-10) == 1 for op in m.operators)


def test_measurement_validation():
    with pytest.raises(ValueError, match="identity"):
        RankOneMeasurement("B", (np.diag([1, 0]),))
    with pytest.raises(ValueError, match="rank"):
        RankOneMeasurement("B", (np.eye(2),))
    with pytest.raises(ValueError, match="positive"):
        RankOneMeasurement("B", (np.diag([2, 0]), np.diag([-1, 1])))


def test_induced_ensemble_examples():
    bell = make_named_state("bell:+")
    ens = induced_ensemble(bell, measurement_from_isometry(np.eye(2), "B1"))
    assert np.allclose(ens.weights, [0.5, 0.5])
    assert np.allclose(ens.members[0].matrix, np.diag([1, 0]))
    assert np.allclose(ens.members[1].matrix, np.diag([0, 1]))

    rng = np.random.default_rng(2)
    ra = random_density((2,), rng)
    prod = tensor(ra, random_density((3,), rng))
    ens = induced_ensemble(prod, measurement_from_isometry(haar_isometry(5, 3, rng), prod.labels[1]))
    for m in ens.members:
        assert np.allclose(m.matrix, ra.matrix, atol=1e-12)

    ghz = make_named_state("ghz:3")
    ens = induced_ensemble(ghz.density(), measurement_from_isometry(np.eye(4), ["B1", "B2"]))
    assert len(ens) == 2
    for m in ens.members:
        assert m.purity() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(0, 3))
def test_induced_ensemble_reconstructs_marginal(seed, extra):
    rng = np.random.default_rng(seed)
    rho = random_density((2, 3), rng)
    m = measurement_from_isometry(haar_isometry(3 + extra, 3, rng), "B1")
    ens = induced_ensemble(rho, m)
    assert ens.residual() <= 1e-10
    assert np.allclose(ens.parent, rho.marginal([0]).matrix)


def test_post_measurement_examples():
    ghz = make_named_state("ghz:3")
    ens = post_measurement_pure_states(ghz, measurement_from_isometry(np.eye(2), "B1"))
    assert np.allclose(ens.weights, [0.5, 0.5])
    assert ens.labels == ("A", "B2")
    assert abs(ens.members[0].vector[0]) == pytest.approx(1)
    assert abs(ens.members[1].vector[3]) == pytest.approx(1)

    phi = tensor(make_named_state("bell:+"), PureState([0.6, 0.8], (2,), ("C",)))
    ens = post_measurement_pure_states(phi, measurement_from_isometry(H, "C"))
    for m in ens.members:
        assert abs(abs(np.vdot(m.vector, make_named_state("bell:+").vector)) - 1) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 4))
def test_post_measurement_states_are_pure_and_consistent(seed, n):
    rng = np.random.default_rng(seed)
    psi = random_pure((2, 2, 2), rng)
    m = measurement_from_isometry(haar_isometry(n, 2, rng), "B1")
    pure = post_measurement_pure_states(psi, m)
    mixed = induced_ensemble(psi.density(), m)
    assert pure.residual() <= 1e-10
    a_marginals = [s.marginal([0]).matrix for s in pure.members]
    for p1, p2, a, b in zip(pure.weights, mixed.weights, a_marginals, mixed.members):
        assert abs(p1 - p2) <= 1e-10
        assert np.max(np.abs(a - b.marginal([0]).matrix)) <= 1e-10


def test_post_measurement_needs_pure_input():
    with pytest.raises(TypeError):
        post_measurement_pure_states(GHZ_PAIR, measurement_from_isometry(np.eye(2), "B1"))


def _ccq_by_brute_force(rho, d):
    """Direct sum over x, y of |x><x| (x) |y><y| (x) twirled rho."""
    from qpoly.core import canonical_eigenbasis, generalized_paulis

    rb = rho.marginal([1]).matrix
    _, basis = canonical_eigenbasis(rb)
    p = generalized_paulis(d, basis)
    da = rho.dims[0]
    out = 0
    for x in range(d):
        for y in range(d):
            u = np.kron(np.eye(da), np.linalg.matrix_power(p.X, x) @ np.linalg.matrix_power(p.Z, y))
            reg = np.zeros((d * d, d * d))
            reg[x * d + y, x * d + y] = 1
            out = out + np.kron(reg, u @ rho.matrix @ u.conj().T) / d**2
    return out


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_ccq_identities(seed):
    rho = random_density((2, 2), np.random.default_rng(seed))
    om = build_ccq(rho)
    assert om.dim == 16
    assert np.trace(om.matrix).real == pytest.approx(1, abs=1e-12)
    assert np.allclose(om.marginal(["X"]).matrix, np.eye(2) / 2)
    assert np.allclose(om.marginal(["Y"]).matrix, np.eye(2) / 2)
    expected = np.kron(rho.marginal([0]).matrix, np.eye(2) / 2)
    assert np.max(np.abs(om.marginal(["A", "B"]).matrix - expected)) <= 1e-12
    assert np.max(np.abs(om.matrix - _ccq_by_brute_force(rho, 2))) <= 1e-12


def test_ccq_blocks_shape_and_qutrit():
    rho = random_density((2, 3), np.random.default_rng(4))
    blocks = ccq_blocks(rho)
    assert blocks.shape == (3, 3, 6, 6)
    assert np.allclose(blocks.mean(axis=(0, 1)), np.kron(rho.marginal([0]).matrix, np.eye(3) / 3))
