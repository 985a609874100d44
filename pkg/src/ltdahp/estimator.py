"""Two-stage regressors: deterministic (LtDaHP) and random (LtRaHP) hidden layers.

Both estimators normalise the inputs into the unit ball, evaluate a fixed
sigmoid hidden layer, solve a ridge problem for the output coefficients and
clip predictions to ``[-M, M]``.  They differ only in how the hidden layer is
chosen.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .activation import ActivationSpec, ScaledActivation
from .features import (
    HypothesisSpec,
    Normalizer,
    build_space,
    design_matrix,
    normalize_inputs,
    paired_design_matrix,
    project_to_ball,
)
from .solver import DEFAULT_LAMBDA, ridge_solve, truncate
from .sphere import SphereConfig

__all__ = [
    "Dataset",
    "LtDaHPRegressor",
    "LtRaHPRegressor",
    "fit_ltdahp",
    "fit_ltrahp",
    "predict",
    "save_model",
    "load_model",
    "MODEL_MAGIC",
]

MODEL_MAGIC = "LTDAHP1"


@dataclass(frozen=True)
class Dataset:
    """Inputs ``X`` (m, d), targets ``y`` (m,) and where they came from."""

    X: np.ndarray
    y: np.ndarray
    provenance: str = "memory"

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float).ravel()
        if X.ndim != 2:
            raise ValueError(f"X must be 2-d, got shape {X.shape}")
        if X.shape[0] < 1:
            raise ValueError("dataset is empty")
        if X.shape[1] < 2:
            raise ValueError(f"need at least 2 input columns, got {X.shape[1]}")
        if y.shape[0] != X.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def subset(self, idx, provenance=None):
        return Dataset(self.X[idx], self.y[idx], provenance or self.provenance)


class _TwoStageRegressor(RegressorMixin, BaseEstimator):
    scheme = None

    def _hidden_layer(self, d):
        raise NotImplementedError

    def _features(self, Z):
        raise NotImplementedError

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=float, y_numeric=True)
        if X.shape[1] < 2:
            raise ValueError(f"need at least 2 input features, got {X.shape[1]}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam!r}")
        Z, self.normalizer_ = normalize_inputs(X)
        self._hidden_layer(X.shape[1])
        Phi = self._features(Z)
        self.coef_ = ridge_solve(Phi, y, self.lam)
        if self.bound is not None:
            if not self.bound > 0:
                raise ValueError(f"bound must be > 0, got {self.bound!r}")
            self.bound_ = float(self.bound)
        else:
            peak = float(np.max(np.abs(y)))
            self.bound_ = peak if peak > 0 else 1.0
        self.fit_timestamp_ = time.time()
        return self

    def decision_function(self, X):
        """Untruncated network output."""
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, dtype=float, reset=False)
        Z = project_to_ball(self.normalizer_.transform(X))
        return self._features(Z) @ self.coef_

    def predict(self, X):
        return truncate(self.decision_function(X), self.bound_)

    def save(self, path, comments=()):
        save_model(self, path, comments)


class LtDaHPRegressor(_TwoStageRegressor):
    """Two-stage regressor with deterministically assigned hidden parameters.

    Inner weights are equal-area points on the sphere, thresholds are the
    grid ``-1/2 + k/l``, and the output layer is a ridge least-squares fit.
    No randomness is involved: refitting on the same data reproduces the
    model bit for bit.

    Parameters
    ----------
    l : int, default=4
        Number of thresholds; the main complexity knob.
    n : int or None, default=None
        Number of inner weights, ``l**(d-1)`` when None.
    K : float or None, default=None
        Activation scale.  ``l log(l^2 - 1)`` (``log 2`` for l = 1) for the
        logistic function when None.
    activation : {"logistic", "heaviside"}, default="logistic"
    lam : float, default=1e-4
        Ridge weight; the data term is averaged over samples.
    bound : float or None, default=None
        Truncation level M.  ``max |y|`` of the training targets when None.
    tau : float or None, default=None
        Riesz exponent for optional refinement of the inner weights.
    refine_steps : int, default=0
        Energy-descent steps applied to the inner weights; 0 keeps the raw
        equal-area centres.

    Attributes
    ----------
    spec_ : HypothesisSpec
    normalizer_ : Normalizer
    coef_ : ndarray of shape (n * l,)
        Output coefficients, weight-major.
    bound_ : float
    """

    scheme = "ltdahp"

    def __init__(self, l=4, n=None, K=None, activation="logistic", lam=DEFAULT_LAMBDA,
                 bound=None, tau=None, refine_steps=0):
        self.l = l
        self.n = n
        self.K = K
        self.activation = activation
        self.lam = lam
        self.bound = bound
        self.tau = tau
        self.refine_steps = refine_steps

    def _hidden_layer(self, d):
        self.spec_ = build_space(d, self.l, self.activation, K=self.K, n=self.n,
                                 tau=self.tau, refine_steps=self.refine_steps)

    def _features(self, Z):
        return design_matrix(self.spec_, Z)

    @property
    def n_hidden_(self):
        return self.spec_.n_features


class LtRaHPRegressor(_TwoStageRegressor):
    """Two-stage regressor with randomly drawn hidden parameters (the ELM baseline).

    Each of the ``n_neurons`` hidden units gets its own inner weight, drawn
    uniformly on the sphere by normalising a standard normal vector, and its
    own threshold, drawn uniformly on [-1/2, 1/2].  Draws come from
    ``numpy.random.default_rng(random_state)`` and an integer seed is
    required.
    """

    scheme = "ltrahp"

    def __init__(self, n_neurons=64, K=1.0, activation="logistic", lam=DEFAULT_LAMBDA,
                 bound=None, random_state=None):
        self.n_neurons = n_neurons
        self.K = K
        self.activation = activation
        self.lam = lam
        self.bound = bound
        self.random_state = random_state

    def _hidden_layer(self, d):
        if self.random_state is None or isinstance(self.random_state, bool) \
                or int(self.random_state) != self.random_state:
            raise ValueError("LtRaHPRegressor needs an integer random_state")
        if int(self.n_neurons) != self.n_neurons or self.n_neurons < 1:
            raise ValueError(f"n_neurons must be a positive integer, got {self.n_neurons!r}")
        rng = np.random.default_rng(int(self.random_state))
        W = rng.standard_normal((int(self.n_neurons), d))
        W /= np.linalg.norm(W, axis=1, keepdims=True)
        self.weights_ = W
        self.thresholds_ = rng.uniform(-0.5, 0.5, int(self.n_neurons))
        self.activation_ = ScaledActivation(ActivationSpec(self.activation), float(self.K))

    def _features(self, Z):
        return paired_design_matrix(self.weights_, self.thresholds_, self.activation_, Z)

    @property
    def n_hidden_(self):
        return self.weights_.shape[0]


def fit_ltdahp(data: Dataset, l, activation="logistic", lam=DEFAULT_LAMBDA, n=None, K=None, **kw):
    return LtDaHPRegressor(l=l, n=n, K=K, activation=activation, lam=lam, **kw).fit(data.X, data.y)


def fit_ltrahp(data: Dataset, N, K, lam=DEFAULT_LAMBDA, seed=None, activation="logistic", **kw):
    return LtRaHPRegressor(n_neurons=N, K=K, activation=activation, lam=lam,
                           random_state=seed, **kw).fit(data.X, data.y)


def predict(model, X):
    return model.predict(X)


# ---------------------------------------------------------------------------
# Model files


def _fmt(v):
    return f"{float(v):.17g}"


def _row(values):
    return " ".join(_fmt(v) for v in values)


def save_model(model, path, comments=()):
    """Write a fitted model as line-oriented text (header ``LTDAHP1``).

    Reals are printed with 17 significant digits so that loading restores
    every parameter exactly.  The fit timestamp is not written, which keeps
    the file a pure function of data and hyperparameters.
    """
    check_is_fitted(model, "coef_")
    lines = [MODEL_MAGIC]
    lines += [f"# {c}" for c in comments]
    lines.append(f"scheme {model.scheme}")
    norm = model.normalizer_
    if model.scheme == "ltdahp":
        spec = model.spec_
        W, b, K, act = spec.inner_weights.points, spec.thresholds, spec.K, spec.activation.base.kind
        lines += [f"d {spec.d}", f"l {spec.l}", f"n {spec.n}"]
    else:
        W, b, K, act = model.weights_, model.thresholds_, model.activation_.K, model.activation
        lines += [f"d {W.shape[1]}", f"N {W.shape[0]}", f"seed {int(model.random_state)}"]
    lines += [
        f"K {_fmt(K)}",
        f"lambda {_fmt(model.lam)}",
        f"M {_fmt(model.bound_)}",
        f"activation {act}",
    ]
    if model.scheme == "ltdahp":
        tau = "none" if model.tau is None else _fmt(model.tau)
        lines += [f"tau {tau}", f"refine_steps {int(model.refine_steps)}"]
    lines += [
        f"normalizer_lo {_row(norm.lo)}",
        f"normalizer_hi {_row(norm.hi)}",
        f"normalizer_scale {_fmt(norm.scale)}",
        f"weights {W.shape[0]}",
    ]
    lines += [_row(w) for w in W]
    lines.append(f"thresholds {b.size}")
    lines.append(_row(b))
    lines.append(f"coefficients {model.coef_.size}")
    lines += [_fmt(c) for c in model.coef_]
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path):
    """Inverse of :func:`save_model`."""
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0].strip() != MODEL_MAGIC:
        raise ValueError(f"{path}: not a model file (missing {MODEL_MAGIC} header)")
    head = {}
    pos = 1

    def block(count):
        nonlocal pos
        rows = lines[pos:pos + count]
        if len(rows) != count:
            raise ValueError(f"{path}: truncated model file")
        pos += count
        return rows

    while pos < len(lines):
        key, _, rest = lines[pos].strip().partition(" ")
        pos += 1
        if key == "weights":
            W = np.array([[float(v) for v in r.split()] for r in block(int(rest))])
        elif key == "thresholds":
            b = np.array([float(v) for v in block(1)[0].split()]) if int(rest) else np.empty(0)
        elif key == "coefficients":
            coef = np.array([float(r) for r in block(int(rest))])
        else:
            head[key] = rest.strip()

    d = int(head["d"])
    norm = Normalizer(
        [float(v) for v in head["normalizer_lo"].split()],
        [float(v) for v in head["normalizer_hi"].split()],
        float(head["normalizer_scale"]),
    )
    K = float(head["K"])
    act = head["activation"]
    if head["scheme"] == "ltdahp":
        tau = None if head.get("tau", "none") == "none" else float(head["tau"])
        model = LtDaHPRegressor(l=int(head["l"]), n=int(head["n"]), K=K, activation=act,
                                lam=float(head["lambda"]), tau=tau,
                                refine_steps=int(head.get("refine_steps", 0)))
        model.spec_ = HypothesisSpec(d, int(head["l"]), SphereConfig(W), b,
                                     ScaledActivation(ActivationSpec(act), K))
    elif head["scheme"] == "ltrahp":
        model = LtRaHPRegressor(n_neurons=int(head["N"]), K=K, activation=act,
                                lam=float(head["lambda"]), random_state=int(head["seed"]))
        model.weights_ = W
        model.thresholds_ = b
        model.activation_ = ScaledActivation(ActivationSpec(act), K)
    else:
        raise ValueError(f"{path}: unknown scheme {head['scheme']!r}")
    if coef.size != W.shape[0] * (b.size if head["scheme"] == "ltdahp" else 1):
        raise ValueError(f"{path}: coefficient count does not match the hidden layer")
    model.normalizer_ = norm
    model.coef_ = coef
    model.bound_ = float(head["M"])
    model.n_features_in_ = d
    return model
