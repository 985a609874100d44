import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.linear_model import Ridge
from sklearn.pipeline import make_pipeline

from ltdahp.activation import ActivationSpec, ScaledActivation
from ltdahp.features import (
    HypothesisSpec,
    LtDaHPFeatures,
    Normalizer,
    OutOfDomainError,
    build_space,
    column_index,
    design_matrix,
    normalize_inputs,
    project_to_ball,
    thresholds,
)
from ltdahp.sphere import SphereConfig


@pytest.mark.parametrize("l,expected", [(2, [0, 0.5]), (1, [0.5]), (4, [-0.25, 0, 0.25, 0.5])])
def test_thresholds_examples(l, expected):
    np.testing.assert_array_equal(thresholds(l), expected)


@pytest.mark.parametrize("l", [0, -3])
def test_thresholds_reject(l):
    with pytest.raises(ValueError):
        thresholds(l)


def test_build_space_default():
    spec = build_space(3, 4)
    assert (spec.n, spec.n_features) == (16, 64)
    assert spec.K == pytest.approx(4 * math.log(15), rel=1e-15)


def test_build_space_smallest():
    spec = build_space(2, 1)
    assert spec.n == 1 and spec.n_features == 1
    np.testing.assert_array_equal(spec.thresholds, [0.5])
    assert spec.K == pytest.approx(math.log(2))


def test_build_space_override():
    spec = build_space(3, 3, n=10)
    assert spec.n_features == 30


@pytest.mark.parametrize("d,l", [(1, 2), (3, 0)])
def test_build_space_rejects(d, l):
    with pytest.raises(ValueError):
        build_space(d, l)


def test_build_space_refined_weights_still_unit():
    spec = build_space(3, 2, refine_steps=20)
    np.testing.assert_allclose(np.linalg.norm(spec.inner_weights.points, axis=1), 1, atol=1e-12)


def test_design_matrix_origin_row():
    spec = build_space(3, 4)
    row = design_matrix(spec, np.zeros((1, 3)))[0]
    expected = np.tile(spec.activation(-spec.thresholds), spec.n)
    np.testing.assert_array_equal(row, expected)


def test_design_matrix_heaviside_boundary_is_one():
    spec = build_space(2, 2, activation="heaviside")
    x = spec.thresholds[0] * spec.inner_weights.points[0]
    assert design_matrix(spec, x[None, :])[0, column_index(0, 0, spec.l)] == 1.0


def test_design_matrix_hand_example():
    spec = HypothesisSpec(2, 2, SphereConfig([[1.0, 0.0]]), thresholds(2),
                          ScaledActivation(ActivationSpec("logistic"), 2 * math.log(3)))
    row = design_matrix(spec, [[0.5, 0.0]])[0]
    np.testing.assert_allclose(row, [0.75, 0.5], rtol=1e-15)


def test_design_matrix_rejects_outside_ball():
    spec = build_space(3, 2)
    X = np.zeros((5, 3))
    X[3] = [1.0, 1e-4, 0]
    with pytest.raises(OutOfDomainError, match="row 3"):
        design_matrix(spec, X)


def test_column_order_round_trip():
    n, l = 7, 5
    seen = {column_index(j, k, l) for j in range(n) for k in range(l)}
    assert seen == set(range(n * l))


def test_design_matrix_entries_match_definition():
    spec = build_space(3, 3)
    X = project_to_ball(np.random.default_rng(0).uniform(-1, 1, (20, 3)))
    Phi = design_matrix(spec, X)
    W, b, act = spec.inner_weights.points, spec.thresholds, spec.activation
    for i in (0, 7, 19):
        for j in range(spec.n):
            for k in range(spec.l):
                assert Phi[i, column_index(j, k, spec.l)] == act(W[j] @ X[i] - b[k])


@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(1, 5))
@settings(max_examples=30, deadline=None)
def test_design_matrix_properties(seed, d, l):
    spec = build_space(d, l, n=min(l ** (d - 1), 60))
    X = project_to_ball(np.random.default_rng(seed).uniform(-1, 1, (15, d)))
    Phi = design_matrix(spec, X)
    assert Phi.shape == (15, spec.n_features)
    assert np.all((Phi >= 0) & (Phi <= 1))
    np.testing.assert_array_equal(Phi, design_matrix(spec, X))
    # nonincreasing over the threshold index for each weight
    blocks = Phi.reshape(15, spec.n, spec.l)
    assert np.all(np.diff(blocks, axis=2) <= 0)


def test_normalize_single_point_goes_to_origin():
    Z, norm = normalize_inputs([[3.0, -2.0, 7.0]])
    np.testing.assert_array_equal(Z, [[0, 0, 0]])


def test_normalize_column_span():
    X = np.array([[0.0, 1.0], [10.0, 2.0], [5.0, 1.5]])
    Z, _ = normalize_inputs(X)
    assert Z[1, 0] == pytest.approx(1 / math.sqrt(2))


def test_normalize_identity_on_cube():
    X = np.array([[-1.0, 1.0, 0.5], [1.0, -1.0, -0.5], [0.0, 0.0, 0.0], [0.2, 0.3, -1.0], [0.1, 0.1, 1.0]])
    Z, _ = normalize_inputs(X)
    np.testing.assert_allclose(Z, X / math.sqrt(3), rtol=1e-15)


def test_normalize_lands_in_ball_and_reuses_map():
    X = np.random.default_rng(1).normal(size=(200, 4)) * [1, 10, 100, 0.1]
    Z, norm = normalize_inputs(X)
    assert np.linalg.norm(Z, axis=1).max() <= 1 + 1e-12
    np.testing.assert_array_equal(norm.transform(X), Z)


def test_normalize_rejects_empty():
    with pytest.raises(ValueError):
        normalize_inputs(np.empty((0, 3)))


def test_normalizer_constant_column():
    norm = Normalizer([1.0, 0.0], [1.0, 2.0])
    np.testing.assert_allclose(norm.transform([[5.0, 2.0]]), [[0.0, 1 / math.sqrt(2)]])


def test_project_to_ball():
    Z = project_to_ball([[3.0, 4.0], [0.1, 0.2]])
    np.testing.assert_allclose(Z, [[0.6, 0.8], [0.1, 0.2]])


def test_transformer_in_pipeline():
    rng = np.random.default_rng(2)
    X = rng.uniform(-1, 1, (300, 3))
    y = np.sin(X.sum(axis=1))
    pipe = make_pipeline(LtDaHPFeatures(l=3), Ridge(alpha=1e-6)).fit(X, y)
    assert pipe.score(X, y) > 0.95
    feats = LtDaHPFeatures(l=3).fit(X)
    assert feats.transform(X).shape == (300, 27)
    assert feats.get_params()["l"] == 3
