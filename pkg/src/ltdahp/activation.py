"""Sigmoid activations, their K-scaling and the rules for choosing K."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

__all__ = [
    "ACTIVATIONS",
    "ActivationSpec",
    "ScaledActivation",
    "evaluate",
    "choose_K_logistic",
    "tail_threshold_L",
    "default_K",
]


def _heaviside(t):
    return np.where(np.asarray(t) >= 0, 1.0, 0.0)


# name -> (phi, upper tail gap 1 - phi(u), lower tail phi(-u)) for u >= 0
ACTIVATIONS = {
    "logistic": (expit, lambda u: expit(-u), lambda u: expit(-u)),
    "heaviside": (_heaviside, lambda u: 1.0 - _heaviside(u), lambda u: _heaviside(-u)),
}


@dataclass(frozen=True)
class ActivationSpec:
    """A bounded sigmoid, identified by its lowercase token."""

    kind: str = "logistic"

    def __post_init__(self):
        if self.kind not in ACTIVATIONS:
            raise ValueError(f"unsupported activation {self.kind!r}; expected one of {sorted(ACTIVATIONS)}")

    def __call__(self, t):
        return ACTIVATIONS[self.kind][0](t)

    def tail_gap(self, u):
        """Worst deviation from the limits 1 (at +u) and 0 (at -u)."""
        _, upper, lower = ACTIVATIONS[self.kind]
        return max(float(upper(u)), float(lower(u)))


@dataclass(frozen=True)
class ScaledActivation:
    """``t -> phi(K t)``."""

    base: ActivationSpec
    K: float

    def __post_init__(self):
        if not (self.K > 0 and math.isfinite(self.K)):
            raise ValueError(f"K must be a finite number > 0, got {self.K!r}")

    def __call__(self, t):
        return self.base(self.K * np.asarray(t, dtype=float))


def evaluate(act: ScaledActivation, t):
    return act(t)


def choose_K_logistic(l: int) -> float:
    """Smallest admissible K for the logistic function: ``l log(l^2 - 1)``, or ``log 2`` for l = 1."""
    if int(l) != l or l < 1:
        raise ValueError(f"l must be a positive integer, got {l!r}")
    if l == 1:
        return math.log(2.0)
    return l * math.log(l * l - 1.0)


def tail_threshold_L(act: ActivationSpec, eps: float) -> float:
    """Smallest L with ``|phi(u) - 1| < eps`` for u >= L and ``|phi(u)| < eps`` for u <= -L.

    Found by bisection on the monotone tails: the bracket starts at [0, 1] and
    the right end doubles until the tail condition holds.  Bisection runs
    until the bracket cannot shrink in floating point, well inside 1e-9.
    """
    if not (0 < eps < 0.5):
        raise ValueError(f"eps must lie in (0, 1/2), got {eps!r}")
    if act.kind == "heaviside":
        # exact tails: the infimum over admissible L is 0
        return 0.0
    if act.tail_gap(0.0) < eps:
        return 0.0
    lo, hi = 0.0, 1.0
    while act.tail_gap(hi) >= eps:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise ValueError(f"{act.kind} never reaches tail tolerance {eps!r}")
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return hi
        if act.tail_gap(mid) < eps:
            hi = mid
        else:
            lo = mid


def default_K(act: ActivationSpec, l: int) -> float:
    """K used when none is given: the closed-form logistic rule, else ``l * L(1/l^2)``.

    ``L(1/l^2)`` is undefined for l = 1 and zero for a step function; in
    those cases K = 1 is returned since any K > 0 leaves a step unchanged.
    """
    if act.kind == "logistic":
        return choose_K_logistic(l)
    if l < 2:
        return 1.0
    K = l * tail_threshold_L(act, 1.0 / (l * l))
    return K if K > 0 else 1.0
