"""k-fold cross-validated grid search for the two-stage regressors."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.model_selection import KFold

from .estimator import Dataset, LtDaHPRegressor, LtRaHPRegressor
from .solver import DEFAULT_LAMBDA

__all__ = ["CvPlan", "CvReport", "kfold_cv", "default_grids", "fold_seed", "candidate_key"]

SCHEMES = ("ltdahp", "ltrahp")


@dataclass
class CvPlan:
    """Folds, fold-shuffling seed and candidate grid.

    Candidates are dicts: ``{"l": 4}`` (optionally ``"n"``, ``"K"``) for
    ltdahp, ``{"N": 64, "K": 8.0}`` for ltrahp.  A ``"lam"`` entry in a
    candidate overrides the plan-wide ``lam``.
    """

    grid: list
    k: int = 10
    seed: int = 0
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"need at least 2 folds, got {self.k}")
        if not self.grid:
            raise ValueError("candidate grid is empty")


@dataclass
class CvReport:
    scheme: str
    d: int
    candidates: list
    fold_rmse: np.ndarray  # (n_candidates, k)
    folds: list  # validation index arrays
    fold_seeds: np.ndarray | None = None  # (n_candidates, k) for ltrahp
    selected_index: int = field(init=False)

    def __post_init__(self):
        mean = self.mean_rmse
        order = sorted(range(len(self.candidates)),
                       key=lambda i: (mean[i],) + candidate_key(self.scheme, self.candidates[i], self.d))
        self.selected_index = order[0]

    @property
    def mean_rmse(self):
        return self.fold_rmse.mean(axis=1)

    @property
    def std_rmse(self):
        return self.fold_rmse.std(axis=1)

    @property
    def selected(self):
        return self.candidates[self.selected_index]

    def to_csv(self, comments=()):
        buf = io.StringIO()
        for c in comments:
            buf.write(f"# {c}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["candidate", "fold", "rmse"])
        for i, cand in enumerate(self.candidates):
            for j, r in enumerate(self.fold_rmse[i]):
                w.writerow([_label(cand), j, f"{r:.17g}"])
        return buf.getvalue()

    def summary(self):
        lines = [f"{'candidate':<28} {'mean_rmse':>12} {'std_rmse':>12}"]
        for i, cand in enumerate(self.candidates):
            mark = " *" if i == self.selected_index else ""
            lines.append(f"{_label(cand):<28} {self.mean_rmse[i]:>12.6g} {self.std_rmse[i]:>12.6g}{mark}")
        return "\n".join(lines)


def _label(cand):
    return ";".join(f"{k}={v}" for k, v in cand.items())


def candidate_key(scheme, cand, d):
    """Model-size ordering used to break ties: smaller N first, then smaller l or K."""
    if scheme == "ltdahp":
        l = cand["l"]
        n = cand.get("n") or max(1, l ** (d - 1))
        return (n * l, l, cand.get("K") or 0.0)
    return (cand["N"], cand["K"])


def fold_seed(base_seed, candidate_index, fold):
    """Seed for one (candidate, fold) fit of the random scheme."""
    ss = np.random.SeedSequence([int(base_seed), int(candidate_index), int(fold)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _make_model(scheme, cand, lam, seed=None):
    lam = cand.get("lam", lam)
    if scheme == "ltdahp":
        return LtDaHPRegressor(l=cand["l"], n=cand.get("n"), K=cand.get("K"), lam=lam)
    return LtRaHPRegressor(n_neurons=cand["N"], K=cand["K"], lam=lam, random_state=seed)


def kfold_cv(data: Dataset, plan: CvPlan, scheme: str, seed=None) -> CvReport:
    """Mean held-out RMSE of every candidate over ``plan.k`` folds.

    Folds come from a seeded shuffle and are shared by all candidates.  For
    the random scheme each (candidate, fold) fit draws its hidden layer from
    a seed derived from ``seed`` (required), recorded in the report.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if plan.k > data.m:
        raise ValueError(f"{plan.k} folds requested for {data.m} samples")
    if scheme == "ltrahp" and seed is None:
        raise ValueError("the random scheme needs a seed")
    splits = list(KFold(n_splits=plan.k, shuffle=True, random_state=plan.seed).split(data.X))
    rmse = np.empty((len(plan.grid), plan.k))
    seeds = np.zeros((len(plan.grid), plan.k), dtype=np.int64) if scheme == "ltrahp" else None
    for i, cand in enumerate(plan.grid):
        for j, (tr, va) in enumerate(splits):
            s = None
            if seeds is not None:
                s = seeds[i, j] = fold_seed(seed, i, j)
            model = _make_model(scheme, cand, plan.lam, s).fit(data.X[tr], data.y[tr])
            r = model.predict(data.X[va]) - data.y[va]
            rmse[i, j] = math.sqrt(float(r @ r) / r.size)
    return CvReport(scheme, data.d, list(plan.grid), rmse, [va for _, va in splits], seeds)


def default_grids(d: int, m: int):
    """Default candidate grids for both schemes.

    ltdahp: ``l = 1..ceil(2 m^(1/(d+2)))``, keeping only ``l**d <= min(m, 4000)``
    (``l = 1`` always stays).  ltrahp: ``N`` in 16, 32, ... up to
    ``min(m, 4096)`` and ``K`` in 1, 2, 4, ..., 32.
    """
    if d < 2 or m < 1:
        raise ValueError(f"need d >= 2 and m >= 1, got d={d}, m={m}")
    top = math.ceil(2.0 * m ** (1.0 / (d + 2)))
    cap = min(m, 4000)
    ls = [l for l in range(1, top + 1) if l == 1 or l ** d <= cap]
    ncap = min(m, 4096)
    Ns = []
    N = 16
    while N <= ncap:
        Ns.append(N)
        N *= 2
    if not Ns:
        Ns = [ncap]
    Ks = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
    return {
        "ltdahp": [{"l": l} for l in ls],
        "ltrahp": [{"N": N, "K": K} for N in Ns for K in Ks],
        "l": ls,
        "N": Ns,
        "K": Ks,
    }
