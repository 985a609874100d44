"""Hidden-layer construction: threshold grid, hypothesis space and design matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .activation import ActivationSpec, ScaledActivation, default_K
from .sphere import SphereConfig, eq_points, refine_energy, RieszParams

__all__ = [
    "OutOfDomainError",
    "HypothesisSpec",
    "Normalizer",
    "thresholds",
    "build_space",
    "column_index",
    "design_matrix",
    "paired_design_matrix",
    "normalize_inputs",
    "project_to_ball",
    "LtDaHPFeatures",
]

BALL_TOL = 1e-9


class OutOfDomainError(ValueError):
    """An input row lies outside the closed unit ball."""


def thresholds(l: int) -> np.ndarray:
    """Equally spaced thresholds ``-1/2 + k/l`` for ``k = 1..l``."""
    if int(l) != l or l < 1:
        raise ValueError(f"l must be a positive integer, got {l!r}")
    l = int(l)
    return np.array([-0.5 + k / l for k in range(1, l + 1)])


@dataclass(frozen=True)
class HypothesisSpec:
    """Span of ``phi(K (alpha_j . x - b_k))`` over ``j = 1..n``, ``k = 1..l``."""

    d: int
    l: int
    inner_weights: SphereConfig
    thresholds: np.ndarray
    activation: ScaledActivation

    def __post_init__(self):
        b = np.array(self.thresholds, dtype=float)
        b.setflags(write=False)
        object.__setattr__(self, "thresholds", b)
        if self.inner_weights.ambient_dim != self.d:
            raise ValueError(
                f"inner weights live in R^{self.inner_weights.ambient_dim}, expected R^{self.d}"
            )
        if b.shape != (self.l,):
            raise ValueError(f"expected {self.l} thresholds, got shape {b.shape}")

    @property
    def n(self) -> int:
        return self.inner_weights.n

    @property
    def n_features(self) -> int:
        return self.n * self.l

    @property
    def K(self) -> float:
        return self.activation.K


def build_space(d, l, activation="logistic", K=None, n=None, tau=None, refine_steps=0):
    """Deterministic hidden layer for input dimension ``d`` and ``l`` thresholds.

    ``n`` defaults to ``l**(d-1)`` inner weights taken from :func:`eq_points`.
    ``K`` defaults to :func:`~ltdahp.activation.default_K`.  With
    ``refine_steps > 0`` the inner weights are further relaxed towards a
    minimal Riesz ``tau``-energy configuration (``tau`` defaults to ``d``).
    """
    if int(d) != d or d < 2:
        raise ValueError(f"d must be an integer >= 2, got {d!r}")
    if int(l) != l or l < 1:
        raise ValueError(f"l must be a positive integer, got {l!r}")
    d, l = int(d), int(l)
    act = activation if isinstance(activation, ActivationSpec) else ActivationSpec(activation)
    if n is None:
        n = max(1, l ** (d - 1))
    elif int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    weights = eq_points(d, int(n))
    if refine_steps:
        tau = float(d) if tau is None else float(tau)
        if tau < d - 1:
            raise ValueError(f"tau must be >= d - 1 = {d - 1}, got {tau}")
        weights = refine_energy(weights, RieszParams(tau), max_steps=int(refine_steps))
    if K is None:
        K = default_K(act, l)
    return HypothesisSpec(d, l, weights, thresholds(l), ScaledActivation(act, float(K)))


def column_index(j: int, k: int, l: int) -> int:
    """Design-matrix column of weight ``j`` and threshold ``k`` (both 0-based), weight-major."""
    return j * l + k


def _check_ball(X):
    norms = np.linalg.norm(X, axis=1)
    bad = np.flatnonzero(norms > 1.0 + BALL_TOL)
    if bad.size:
        i = int(bad[0])
        raise OutOfDomainError(f"row {i} has norm {norms[i]!r} > 1; inputs must lie in the unit ball")


def design_matrix(spec: HypothesisSpec, X) -> np.ndarray:
    """``(m, n*l)`` matrix with entry ``phi(K (alpha_j . x_i - b_k))`` at column ``j*l + k``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != spec.d:
        raise ValueError(f"expected an (m, {spec.d}) array, got shape {X.shape}")
    _check_ball(X)
    proj = X @ spec.inner_weights.points.T
    pre = proj[:, :, None] - spec.thresholds[None, None, :]
    return spec.activation(pre).reshape(X.shape[0], spec.n_features)


def paired_design_matrix(weights, biases, act: ScaledActivation, X) -> np.ndarray:
    """``(m, N)`` matrix with entry ``phi(K (w_j . x_i - b_j))``; no product structure."""
    X = np.asarray(X, dtype=float)
    _check_ball(X)
    return act(X @ np.asarray(weights).T - np.asarray(biases)[None, :])


@dataclass(frozen=True)
class Normalizer:
    """Per-column affine map onto [-1, 1] followed by a global ``1/sqrt(d)`` scale."""

    lo: np.ndarray
    hi: np.ndarray
    scale: float = field(default=None)

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float)
        hi = np.array(self.hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be 1-d arrays of equal length")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if self.scale is None:
            object.__setattr__(self, "scale", 1.0 / math.sqrt(lo.size))

    @property
    def d(self) -> int:
        return self.lo.size

    def transform(self, X):
        X = np.asarray(X, dtype=float)
        span = self.hi - self.lo
        const = span == 0
        safe = np.where(const, 1.0, span)
        Z = 2.0 * (X - self.lo) / safe - 1.0
        Z[:, const] = 0.0
        return Z * self.scale


def normalize_inputs(X_raw):
    """Fit a :class:`Normalizer` on ``X_raw`` and return ``(X, normalizer)``.

    Training points land in the unit ball; constant columns map to 0.
    """
    X_raw = np.asarray(X_raw, dtype=float)
    if X_raw.ndim != 2 or X_raw.shape[0] < 1 or X_raw.shape[1] < 1:
        raise ValueError(f"need a non-empty (m, d) array, got shape {X_raw.shape}")
    if not np.all(np.isfinite(X_raw)):
        raise ValueError("inputs must be finite")
    norm = Normalizer(X_raw.min(axis=0), X_raw.max(axis=0))
    return norm.transform(X_raw), norm


def project_to_ball(X):
    """Radially project rows with norm > 1 onto the unit sphere."""
    X = np.array(X, dtype=float)
    norms = np.linalg.norm(X, axis=1)
    out = norms > 1.0
    X[out] /= norms[out, None]
    return X


class LtDaHPFeatures(TransformerMixin, BaseEstimator):
    """Transformer producing the deterministic hidden-layer outputs.

    ``fit`` learns the input normalisation and builds the hypothesis space;
    ``transform`` normalises, projects stray points into the unit ball and
    evaluates the design matrix.

    Parameters
    ----------
    l : int, default=4
        Number of thresholds.
    n : int or None, default=None
        Number of inner weights; ``l**(d-1)`` when None.
    K : float or None, default=None
        Activation scale; the default rule for ``activation`` when None.
    activation : {"logistic", "heaviside"}, default="logistic"
    tau : float or None, default=None
        Riesz exponent used when ``refine_steps > 0``; defaults to ``d``.
    refine_steps : int, default=0
        Projected-gradient steps applied to the EQ inner weights.
    """

    def __init__(self, l=4, n=None, K=None, activation="logistic", tau=None, refine_steps=0):
        self.l = l
        self.n = n
        self.K = K
        self.activation = activation
        self.tau = tau
        self.refine_steps = refine_steps

    def fit(self, X, y=None):
        X = validate_data(self, X, dtype=float)
        if X.shape[1] < 2:
            raise ValueError(f"need at least 2 input features, got {X.shape[1]}")
        _, self.normalizer_ = normalize_inputs(X)
        self.spec_ = build_space(
            X.shape[1], self.l, self.activation, K=self.K, n=self.n,
            tau=self.tau, refine_steps=self.refine_steps,
        )
        return self

    def transform(self, X):
        check_is_fitted(self, "spec_")
        X = validate_data(self, X, dtype=float, reset=False)
        return design_matrix(self.spec_, project_to_ball(self.normalizer_.transform(X)))
