import numpy as np
import pytest
from sklearn.base import clone
from sklearn.model_selection import cross_val_score

from ltdahp.bench import gen_toy, rmse
from ltdahp.estimator import (
    Dataset,
    LtDaHPRegressor,
    LtRaHPRegressor,
    fit_ltdahp,
    fit_ltrahp,
    load_model,
    predict,
    save_model,
)
from ltdahp.features import build_space, design_matrix, normalize_inputs
from ltdahp.solver import ridge_objective


@pytest.fixture(scope="module")
def toy():
    return gen_toy(300, 0.1, seed=4)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros((0, 3)), np.zeros(0))
    with pytest.raises(ValueError):
        Dataset(np.zeros((4, 1)), np.zeros(4))
    with pytest.raises(ValueError):
        Dataset(np.zeros((4, 2)), np.zeros(3))
    with pytest.raises(ValueError):
        Dataset([[np.nan, 0.0]], [1.0])


def test_exactly_representable_target_is_recovered(toy):
    Z, _ = normalize_inputs(toy.X)
    spec = build_space(3, 3)
    y = design_matrix(spec, Z)[:, 0]
    model = fit_ltdahp(Dataset(toy.X, y), l=3, lam=0.0)
    assert rmse(model.predict(toy.X), y) < 1e-6
    np.testing.assert_allclose(model.predict(toy.X[:5]), y[:5], atol=1e-6)


def test_constant_target_single_feature_projection(toy):
    c = 0.7
    y = np.full(toy.m, c)
    model = fit_ltdahp(Dataset(toy.X, y), l=1, n=1, lam=0.0)
    Z, _ = normalize_inputs(toy.X)
    phi = design_matrix(build_space(3, 1, n=1), Z)[:, 0]
    projection = phi * (phi @ y) / (phi @ phi)
    np.testing.assert_allclose(model.decision_function(toy.X), projection, atol=1e-6)
    np.testing.assert_allclose(model.predict(toy.X), np.clip(projection, -c, c), atol=1e-6)


def test_fit_is_deterministic(toy, tmp_path):
    a = fit_ltdahp(toy, l=4)
    b = fit_ltdahp(toy, l=4)
    save_model(a, tmp_path / "a.txt")
    save_model(b, tmp_path / "b.txt")
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()


def test_training_objective_not_worse_than_zero(toy):
    model = fit_ltdahp(toy, l=4)
    Phi = design_matrix(model.spec_, model.normalizer_.transform(toy.X))
    assert ridge_objective(Phi, toy.y, model.coef_, model.lam) <= \
        ridge_objective(Phi, toy.y, np.zeros_like(model.coef_), model.lam)


def test_bound_defaults_to_max_abs_target(toy):
    model = fit_ltdahp(toy, l=2)
    assert model.bound_ == np.max(np.abs(toy.y))
    assert LtDaHPRegressor(l=2, bound=0.25).fit(toy.X, toy.y).bound_ == 0.25


def test_predictions_bounded_including_far_queries(toy):
    model = fit_ltdahp(toy, l=5, lam=1e-8)
    Q = np.random.default_rng(0).normal(scale=5.0, size=(5000, 3))
    assert np.all(np.abs(model.predict(Q)) <= model.bound_)


def test_zero_coefficients_predict_zero(toy):
    model = fit_ltdahp(toy, l=2)
    model.coef_ = np.zeros_like(model.coef_)
    np.testing.assert_array_equal(predict(model, toy.X[:10]), 0.0)


def test_dimension_mismatch(toy):
    model = fit_ltdahp(toy, l=2)
    with pytest.raises(ValueError):
        model.predict(np.zeros((3, 4)))


def test_save_load_predictions_bit_identical(toy, tmp_path):
    for model in (fit_ltdahp(toy, l=4), fit_ltrahp(toy, N=50, K=8.0, seed=3)):
        path = tmp_path / f"{model.scheme}.txt"
        model.save(path, comments=["hello=1"])
        loaded = load_model(path)
        Q = np.random.default_rng(1).uniform(-1.5, 1.5, (400, 3))
        assert model.predict(Q).tobytes() == loaded.predict(Q).tobytes()
        assert path.read_text().startswith("LTDAHP1\n# hello=1\n")
        assert loaded.scheme == model.scheme


def test_model_file_layout(toy, tmp_path):
    model = fit_ltdahp(toy, l=2)
    model.save(tmp_path / "m.txt")
    lines = (tmp_path / "m.txt").read_text().splitlines()
    assert lines[0] == "LTDAHP1"
    for key in ("scheme ltdahp", "d 3", "l 2", "n 4", "lambda 0.0001", "activation logistic"):
        assert key in lines
    assert "weights 4" in lines and "thresholds 2" in lines and "coefficients 8" in lines


def test_load_rejects_garbage(tmp_path):
    p = tmp_path / "x.txt"
    p.write_text("hello\n")
    with pytest.raises(ValueError):
        load_model(p)


def test_ltrahp_seeded(toy):
    a = fit_ltrahp(toy, N=40, K=4.0, seed=9)
    b = fit_ltrahp(toy, N=40, K=4.0, seed=9)
    c = fit_ltrahp(toy, N=40, K=4.0, seed=10)
    np.testing.assert_array_equal(a.coef_, b.coef_)
    np.testing.assert_array_equal(a.weights_, b.weights_)
    cross = np.linalg.norm(a.weights_[:, None, :] - c.weights_[None, :, :], axis=2)
    assert cross.min() > 0
    assert np.all(np.abs(a.thresholds_) <= 0.5)
    np.testing.assert_allclose(np.linalg.norm(a.weights_, axis=1), 1.0, atol=1e-12)


def test_ltrahp_requires_integer_seed(toy):
    with pytest.raises(ValueError):
        LtRaHPRegressor(n_neurons=10).fit(toy.X, toy.y)


def test_sklearn_compatibility(toy):
    est = LtDaHPRegressor(l=3)
    assert clone(est).get_params() == est.get_params()
    scores = cross_val_score(est, toy.X, toy.y, cv=3, scoring="neg_root_mean_squared_error")
    assert np.all(np.isfinite(scores))
    est.set_params(l=2)
    assert est.fit(toy.X, toy.y).n_hidden_ == 8
    ra = clone(LtRaHPRegressor(n_neurons=20, random_state=1)).fit(toy.X, toy.y)
    assert ra.n_hidden_ == 20


def test_fit_beats_mean_predictor(toy):
    model = fit_ltdahp(toy, l=3)
    assert model.score(toy.X, toy.y) > 0.3
