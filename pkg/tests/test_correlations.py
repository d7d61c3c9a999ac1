import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpoly.core import MultipartiteState, PureState, haar_isometry, make_named_state, random_density, random_pure, tensor
from qpoly.correlations import (
    check_tradeoff_prop1,
    check_tradeoff_prop2,
    pure_qUD_shortcut,
    q_discord,
    q_unlocalizable_discord,
    q_unlocalizable_discord_report,
)
from qpoly.ensembles import induced_ensemble, measurement_from_isometry, post_measurement_pure_states
from qpoly.entropy import q_difference, q_expectation, tsallis_entropy, xi_q
from qpoly.optimize import OptimizerConfig

seeds = st.integers(0, 2**32 - 1)
BELL = make_named_state("bell:+")


def test_discord_examples(cfg):
    assert q_discord(BELL.density(), 2.0, cfg) == pytest.approx(0.5, abs=1e-9)
    prod = tensor(PureState([0.6, 0.8], (2,)), PureState([1, 0], (2,)))
    assert abs(q_discord(prod.density(), 1.5, cfg)) <= 1e-12
    classical = MultipartiteState(np.diag([0.4, 0.1, 0.2, 0.3]), (2, 2))
    assert abs(q_discord(classical, 1.0, cfg)) <= 5e-3


def test_unlocalizable_discord_examples(cfg):
    assert q_unlocalizable_discord(BELL.density(), 2.0, cfg) == pytest.approx(0.5, abs=1e-9)
    prod = tensor(PureState([0.6, 0.8], (2,)), PureState([1, 0], (2,)))
    assert abs(q_unlocalizable_discord(prod.density(), 1.5, cfg)) <= 1e-12


@pytest.mark.parametrize("q", [1.0, 1.5, 2.0])
def test_pure_unlocalizable_discord_is_entropy_of_measured_side(q, cfg):
    psi = random_pure((2, 2), np.random.default_rng(8))
    value = q_unlocalizable_discord(psi.density(), q, cfg)
    assert value == pytest.approx(tsallis_entropy(psi.marginal([1]), q), abs=1e-6)


@settings(max_examples=25, deadline=None)
@given(seeds, st.floats(1.0, 3.0))
def test_shortcut_matches_schmidt_partner(seed, q):
    psi = random_pure((2, 3), np.random.default_rng(seed))
    assert abs(pure_qUD_shortcut(psi, q) - tsallis_entropy(psi.marginal([0]), q)) <= 1e-12


def test_shortcut_needs_pure_state():
    with pytest.raises(TypeError):
        pure_qUD_shortcut(BELL.density(), 2.0)


@settings(max_examples=25, deadline=None)
@given(seeds, st.floats(0.5, 3.0), st.integers(2, 4))
def test_definitional_identity(seed, q, n):
    rng = np.random.default_rng(seed)
    rho = random_density((2, 2), rng)
    m = measurement_from_isometry(haar_isometry(n, 2, rng), "B1")
    ens = induced_ensemble(rho, m)
    members = [tsallis_entropy(s, q) for s in ens.members]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        chi = q_difference(ens, q)
    assert abs(chi + q_expectation(ens.weights, members, q) - tsallis_entropy(rho.marginal([0]), q)) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(seeds, st.floats(1.0, 3.0), st.integers(2, 4))
def test_pure_tripartite_coupling(seed, q, n):
    rng = np.random.default_rng(seed)
    psi = random_pure((2, 2, 2), rng)
    m = measurement_from_isometry(haar_isometry(n, 2, rng), "B1")
    pure = post_measurement_pure_states(psi, m)
    e = [tsallis_entropy(s.marginal([0]), q) for s in pure.members]
    chi = q_difference(induced_ensemble(psi.marginal([0, 1]), m), q)
    assert abs(q_expectation(pure.weights, e, q) + chi - tsallis_entropy(psi.marginal([0]), q)) <= 1e-10


@pytest.mark.parametrize("seed", [0, 1])
def test_product_states_carry_no_discord(seed):
    rng = np.random.default_rng(seed)
    prod = tensor(random_density((2,), rng), random_density((2,), rng))
    cfg = OptimizerConfig(restarts=8)
    assert q_discord(prod, 1.0, cfg) <= 1e-9
    assert q_unlocalizable_discord(prod, 1.0, cfg) <= 1e-9


def test_unlocalizable_discord_bound_direction(cfg):
    value, rep = q_unlocalizable_discord_report(make_named_state("ghz:3").marginal([0, 1]), 1.5, cfg)
    assert rep.bound_direction == "upper-bound-of-min"
    assert value >= 0


@pytest.mark.parametrize("seed", [0, 1])
def test_tradeoff_identities_at_q_one(seed):
    psi = random_pure((2, 2, 2), np.random.default_rng(seed))
    cfg = OptimizerConfig(restarts=16, seed=seed)
    first, second = check_tradeoff_prop1(psi, 1.0, cfg)
    third = check_tradeoff_prop2(psi, 1.0, cfg)
    for rep in (first, second, third):
        assert not rep.diagnostic
        assert abs(rep.residual) <= 5e-3


def test_tradeoff_on_ghz3(cfg):
    first, second = check_tradeoff_prop1(make_named_state("ghz:3"), 1.5, cfg)
    assert first.diagnostic
    assert first.rhs_terms["J_q(AB)"] >= xi_q(1.5) - 1e-6
    assert abs(first.rhs_terms["E_q(AC)"]) <= 1e-9
    assert set(first.certificates) == {"J_q(AB)", "E_q(AC)"}
    third = check_tradeoff_prop2(make_named_state("ghz:3"), 2.0, cfg)
    assert np.isfinite(third.residual)
    assert set(third.certificates) == {"ud_q(BA)", "uE_q(CA)"}


def test_tradeoff_on_product(cfg):
    psi = make_named_state("product:0+1")
    first, second = check_tradeoff_prop1(psi, 1.5, cfg)
    third = check_tradeoff_prop2(psi, 1.5, cfg)
    for rep in (first, second, third):
        assert all(abs(v) <= 1e-12 for v in rep.rhs_terms.values())
        assert abs(rep.residual) <= 1e-12


def test_tradeoff_needs_three_party_pure_state():
    with pytest.raises(ValueError):
        check_tradeoff_prop1(make_named_state("ghz:4"), 1.0)
    with pytest.raises(ValueError):
        check_tradeoff_prop2(make_named_state("ghz:3").density(), 1.0)
