"""Generator, Bayes-oracle and evaluation-helper tests."""

import numpy as np
import pytest

from structsvm.simulate import (
    LogisticModelSpec,
    active_effects_from_columns,
    ar1_covariance,
    bayes_error,
    example_spec,
    generalization_error,
    generate_example,
    heredity_frequency,
    obeys_heredity,
)


def test_example_specs():
    for name, q in (("example1", 7), ("example2", 7), ("example3", 5),
                    ("example4", 5), ("example5", 5)):
        spec = example_spec(name)
        assert spec.q == q
    assert example_spec("example1").rho == 0.0
    assert example_spec("example4").rho == 0.5     # nonparametric default
    assert example_spec("example1", rho=0.5).rho == 0.5
    with pytest.raises(ValueError):
        example_spec("example9")


def test_ar1_covariance_structure():
    cov = ar1_covariance(4, 0.5)
    np.testing.assert_allclose(np.diag(cov), 1.0)
    assert cov[0, 1] == 0.5
    assert cov[0, 3] == 0.125
    np.testing.assert_array_equal(ar1_covariance(3, 0.0), np.eye(3))


def test_generator_moments():
    spec = example_spec("example1", rho=0.5)
    Z, y = generate_example(spec, 200_000, np.random.default_rng(0))
    assert set(np.unique(y)) == {-1.0, 1.0}
    emp = np.cov(Z.T)
    np.testing.assert_allclose(np.diag(emp), 1.0, atol=0.02)
    assert emp[0, 1] == pytest.approx(0.5, abs=0.02)
    assert emp[0, 2] == pytest.approx(0.25, abs=0.02)
    assert np.abs(Z.mean(axis=0)).max() < 0.02


def test_class_probability_near_origin():
    # eta(0) = 1, so P(y = 1 | z ~ 0) ~ 1 / (1 + e^-1) ~ 0.731
    spec = example_spec("example1")
    Z, y = generate_example(spec, 400_000, np.random.default_rng(1))
    near = np.max(np.abs(Z[:, [0, 2]]), axis=1) < 0.1
    frac = np.mean(y[near] > 0)
    assert frac == pytest.approx(0.731, abs=0.03)


def test_bayes_error_trivial_cases():
    # eta identically 0: both classes equally likely, Bayes error 1/2
    flat = LogisticModelSpec("flat", 2, 0.0, lambda Z: np.zeros(Z.shape[0]))
    assert bayes_error(flat, 50_000, 0) == pytest.approx(0.5, abs=1e-12)
    # huge |eta|: labels deterministic, Bayes error ~ 0
    sure = LogisticModelSpec("sure", 2, 0.0, lambda Z: 100.0 * np.sign(Z[:, 0]))
    assert bayes_error(sure, 50_000, 0) < 1e-10


def test_bayes_error_matches_reference_values():
    # desk-scale check; the acceptance suite redoes these at 10^6 samples
    for name, rho, want in (("example1", 0.0, 0.133), ("example1", 0.5, 0.130),
                            ("example2", 0.5, 0.121), ("example3", 0.0, 0.113)):
        got = bayes_error(example_spec(name, rho), 200_000, seed=0)
        assert got == pytest.approx(want, abs=0.005), (name, rho)


def test_bayes_error_deterministic():
    spec = example_spec("example2")
    assert bayes_error(spec, 30_000, 7) == bayes_error(spec, 30_000, 7)


def test_generalization_error():
    y = np.array([1.0, -1.0, 1.0, -1.0])
    assert generalization_error(np.array([5.0, -1.0, 2.0, -0.5]), y) == 0.0
    assert generalization_error(np.array([-5.0, 1.0, -2.0, 0.5]), y) == 1.0
    assert generalization_error(np.zeros(4), y) == 0.5    # zeros count as +1
    with pytest.raises(ValueError):
        generalization_error(np.empty(0), np.empty(0))


def test_bayes_rule_on_sample_attains_bayes_error():
    spec = example_spec("example3")
    Z, y = generate_example(spec, 100_000, np.random.default_rng(3))
    err = generalization_error(spec.linear_predictor(Z), y)
    ref = bayes_error(spec, 200_000, seed=0)
    assert err == pytest.approx(ref, abs=0.005)
    # flipping the rule gives the complement
    assert generalization_error(-spec.linear_predictor(Z), y) \
        == pytest.approx(1.0 - err, abs=1e-12)


def _second_opinion(active, parents, policy):
    """Independent re-implementation of the heredity predicate."""
    if policy == "strong":
        return all(p in active for e in active for p in parents.get(e, ()))
    if policy == "weak":
        return all(
            (not parents.get(e)) or any(p in active for p in parents[e])
            for e in active
        )
    return True


def test_obeys_heredity_against_second_opinion():
    parents = {0: frozenset(), 1: frozenset(), 2: frozenset(),
               3: frozenset((0, 1)), 4: frozenset((1, 2)), 5: frozenset((0,))}
    rng = np.random.default_rng(17)
    ids = list(parents)
    for _ in range(300):
        active = {e for e in ids if rng.random() < 0.45}
        for policy in ("strong", "weak", "none"):
            assert obeys_heredity(active, parents, policy) \
                == _second_opinion(active, parents, policy), (active, policy)


def test_obeys_heredity_edge_cases():
    parents = {0: frozenset(), 1: frozenset((0,))}
    assert obeys_heredity(set(), parents, "strong")          # empty set complies
    assert obeys_heredity({0}, parents, "strong")
    assert not obeys_heredity({1}, parents, "strong")
    assert not obeys_heredity({1}, parents, "weak")
    assert obeys_heredity({0, 1}, parents, "weak")


def test_active_effects_from_columns():
    cmap = {0: (0, 1), 1: (1, 3), 2: (3, 4)}
    coefs = np.array([0.5, 0.0, 1e-12, 0.0])
    assert active_effects_from_columns(coefs, cmap) == {0}
    coefs = np.array([0.0, 0.0, 2.0, -1.0])
    assert active_effects_from_columns(coefs, cmap) == {1, 2}


def test_heredity_frequency():
    from structsvm.expand import HeredityGraph
    g = HeredityGraph({0: frozenset(), 1: frozenset((0,))})
    sets = [{0}, {0, 1}, {1}, set()]
    assert heredity_frequency(sets, g, "strong") == pytest.approx(3 / 4)
    assert heredity_frequency([], g, "strong") == 0.0
