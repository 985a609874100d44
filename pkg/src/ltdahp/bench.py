"""Synthetic benchmark, dataset ingestion and experiment protocols."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from .activation import choose_K_logistic
from .estimator import Dataset, LtDaHPRegressor, LtRaHPRegressor
from .modelsel import CvPlan, default_grids, kfold_cv
from .solver import DEFAULT_LAMBDA

__all__ = [
    "TOY_DIM",
    "toy_eval",
    "gen_toy",
    "toy_test_set",
    "rmse",
    "derive_seed",
    "ExperimentGrid",
    "phase_mapping",
    "phase_diagram",
    "RateResult",
    "loglog_slope",
    "rate_experiment",
    "compare_schemes",
    "read_csv",
    "load_csv",
    "write_rows",
    "render_heatmap",
    "THEORETICAL_RATE",
]

TOY_DIM = 3
TRAIN_STREAM, TEST_STREAM = 0, 1
# squared-error exponent -2r/(2r+d) for smoothness r = 2 in d = 3
THEORETICAL_RATE = -4.0 / 7.0


def toy_eval(x):
    """``(1 - |x|)_+^4 (4 |x| + 1)``; accepts a single point or an (m, 3) array."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    val = np.maximum(1.0 - r, 0.0) ** 4 * (4.0 * r + 1.0)
    return float(val) if val.ndim == 0 else val


def _rng(seed, stream):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(stream,)))


def _toy(m, sigma, seed, noisy, stream):
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    rng = _rng(seed, stream)
    X = rng.uniform(-1.0, 1.0, size=(int(m), TOY_DIM))
    y = toy_eval(X)
    if noisy and sigma > 0:
        y = y + sigma * rng.standard_normal(int(m))
    return X, y


def gen_toy(m, sigma=0.1, seed=0, noisy=True) -> Dataset:
    """``m`` points uniform on [-1, 1]^3 with targets ``f(x) + N(0, sigma^2)`` noise."""
    X, y = _toy(m, sigma, seed, noisy, TRAIN_STREAM)
    return Dataset(X, y, f"toy(m={m},sigma={sigma},seed={seed},noisy={noisy})")


def toy_test_set(m=1000, seed=0) -> Dataset:
    """Noiseless test set drawn from a stream disjoint from every training seed."""
    X, y = _toy(m, 0.0, seed, False, TEST_STREAM)
    return Dataset(X, y, f"toy-test(m={m},seed={seed})")


def rmse(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float).ravel()
    truth = np.asarray(truth, dtype=float).ravel()
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions, {truth.size} targets")
    if pred.size == 0:
        raise ValueError("rmse of empty vectors")
    diff = pred - truth
    return math.sqrt(float(diff @ diff) / diff.size)


def derive_seed(*keys) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, dtype=np.uint32)[0])


# ---------------------------------------------------------------------------
# Phase diagram


@dataclass
class ExperimentGrid:
    m_list: list
    N_list: list
    repeats: int = 10
    scheme: str = "ltdahp"
    cells: list = field(default_factory=list)

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if not self.m_list or not self.N_list:
            raise ValueError("m_list and N_list must be non-empty")
        if self.scheme not in ("ltdahp", "ltrahp"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


def phase_mapping(N, d=TOY_DIM):
    """Threshold count and weight count used for a requested neuron count N."""
    l = max(1, int(round(N ** (1.0 / d))))
    n = math.ceil(N / l)
    return l, n


def phase_diagram(grid: ExperimentGrid, lam=DEFAULT_LAMBDA, sigma=0.1, seed=0, K=None,
                  max_entries=5e7, test_size=1000):
    """Mean test RMSE over an (m, N) sweep, written into ``grid.cells``.

    For ltdahp the requested N is realised as ``n * l`` with
    :func:`phase_mapping`.  For ltrahp the K rule of the mapped ``l`` is used
    unless ``K`` is given.  Cells whose design matrix would exceed
    ``max_entries`` entries (``m * N``) are kept in the table, flagged as
    skipped.  Training sets depend on (seed, m, repeat) only, so every N
    column of a row sees the same data.
    """
    test = toy_test_set(test_size, seed)
    grid.cells = []
    for mi, m in enumerate(grid.m_list):
        for N in grid.N_list:
            l, n = phase_mapping(N)
            cell = {"m": int(m), "N": int(N), "l": l, "n": n, "repeats": grid.repeats,
                    "skipped": int(m * N > max_entries), "rmse": []}
            if not cell["skipped"]:
                for r in range(grid.repeats):
                    data = gen_toy(m, sigma, derive_seed(seed, m, r))
                    if grid.scheme == "ltdahp":
                        model = LtDaHPRegressor(l=l, n=n, lam=lam)
                    else:
                        model = LtRaHPRegressor(n_neurons=N, lam=lam,
                                                K=K if K is not None else choose_K_logistic(l),
                                                random_state=derive_seed(seed, m, N, r))
                    model.fit(data.X, data.y)
                    cell["rmse"].append(rmse(model.predict(test.X), test.y))
            vals = np.asarray(cell["rmse"])
            cell["mean_rmse"] = float(vals.mean()) if vals.size else math.nan
            cell["std_rmse"] = float(vals.std()) if vals.size else math.nan
            grid.cells.append(cell)
    return grid.cells


# ---------------------------------------------------------------------------
# Learning-rate study


@dataclass
class RateResult:
    rows: list
    slope: float
    reference: float = THEORETICAL_RATE


def loglog_slope(m_list, errors) -> float:
    """Least-squares slope of log(error) against log(m)."""
    x = np.log(np.asarray(m_list, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def _cv_fit(data, scheme, lam, folds, seed, N=None, repeat_seed=0):
    """Fit with CV-selected hyperparameters; returns (model, selected candidate)."""
    grids = default_grids(data.d, data.m)
    if scheme == "ltdahp":
        grid = grids["ltdahp"]
    elif N is None:
        grid = grids["ltrahp"]
    else:
        grid = [{"N": int(N), "K": K} for K in grids["K"]]
    k = min(folds, data.m)
    report = kfold_cv(data, CvPlan(grid, k=k, seed=seed, lam=lam), scheme, seed=repeat_seed)
    best = report.selected
    if scheme == "ltdahp":
        model = LtDaHPRegressor(l=best["l"], n=best.get("n"), lam=lam)
    else:
        model = LtRaHPRegressor(n_neurons=best["N"], K=best["K"], lam=lam, random_state=repeat_seed)
    return model.fit(data.X, data.y), best


def rate_experiment(m_list, repeats=10, scheme="ltdahp", lam=DEFAULT_LAMBDA, sigma=0.1,
                    seed=0, folds=10, test_size=1000) -> RateResult:
    """Squared test error against sample size, with CV-selected complexity.

    Returns the per-m mean and std of the squared RMSE and the slope of
    log(mean squared error) against log(m).
    """
    m_list = [int(m) for m in m_list]
    if len(m_list) < 4 or any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ValueError("m_list must be strictly increasing with at least 4 entries")
    test = toy_test_set(test_size, seed)
    rows = []
    for m in m_list:
        errs = []
        for r in range(repeats):
            data = gen_toy(m, sigma, derive_seed(seed, m, r))
            model, _ = _cv_fit(data, scheme, lam, folds, seed=r, repeat_seed=r)
            errs.append(rmse(model.predict(test.X), test.y) ** 2)
        rows.append({"m": m, "mean_sq_err": float(np.mean(errs)), "std": float(np.std(errs))})
    slope = loglog_slope(m_list, [row["mean_sq_err"] for row in rows])
    return RateResult(rows, slope)


# ---------------------------------------------------------------------------
# Scheme comparison


def compare_schemes(m_list=(2000,), repeats=10, lam=DEFAULT_LAMBDA, sigma=0.1, seed=0,
                    folds=10, test_size=1000):
    """Test RMSE and training time of both schemes at matched neuron counts.

    In repeat ``r`` both schemes train on the same data.  LtDaHP selects
    ``l`` by cross-validation; LtRaHP then uses the same N, tunes K by
    cross-validation and draws its hidden layer with seed ``r``.  Training
    time includes the cross-validation.
    """
    test = toy_test_set(test_size, seed)
    rows = []
    for m in m_list:
        per = {"ltdahp": {"rmse": [], "sec": [], "N": []}, "ltrahp": {"rmse": [], "sec": [], "N": []}}
        for r in range(repeats):
            data = gen_toy(m, sigma, derive_seed(seed, m, r))
            t0 = time.perf_counter()
            da, _ = _cv_fit(data, "ltdahp", lam, folds, seed=r)
            t1 = time.perf_counter()
            N = da.n_hidden_
            ra, _ = _cv_fit(data, "ltrahp", lam, folds, seed=r, N=N, repeat_seed=r)
            t2 = time.perf_counter()
            for name, model, sec in (("ltdahp", da, t1 - t0), ("ltrahp", ra, t2 - t1)):
                per[name]["rmse"].append(rmse(model.predict(test.X), test.y))
                per[name]["sec"].append(sec)
                per[name]["N"].append(N)
        for name, vals in per.items():
            rows.append({
                "scheme": name,
                "m": int(m),
                "N": float(np.mean(vals["N"])),
                "mean_rmse": float(np.mean(vals["rmse"])),
                "std": float(np.std(vals["rmse"])),
                "train_seconds": float(np.mean(vals["sec"])),
                "rmse": list(vals["rmse"]),
            })
    return rows


def trend_is_decreasing(m_values, errors) -> bool:
    """Spearman correlation of error against m is negative."""
    return spearmanr(m_values, errors).statistic < 0


# ---------------------------------------------------------------------------
# CSV input / output


def read_csv(path, target=None, provenance=None) -> Dataset:
    """Headered numeric CSV as a :class:`Dataset`; ``target`` defaults to the last column.

    ``target`` may be a column name or a 0-based index.  Non-numeric cells
    raise ``ValueError`` naming the 1-based data row and the column.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file")
    with path.open(newline="") as fh:
        reader = csv.reader(row for row in fh if row.strip() and not row.startswith("#"))
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = []
        for i, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise ValueError(f"{path}: row {i} has {len(row)} fields, expected {len(header)}")
            vals = []
            for j, cell in enumerate(row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric value {cell!r} at row {i}, column {header[j]!r}"
                    ) from None
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    if target is None:
        t = len(header) - 1
    elif isinstance(target, int) or (isinstance(target, str) and target.isdigit() and target not in header):
        t = int(target)
    elif target in header:
        t = header.index(target)
    else:
        raise ValueError(f"{path}: target column {target!r} not found")
    A = np.array(rows)
    X = np.delete(A, t, axis=1)
    return Dataset(X, A[:, t], provenance or f"file:{path}")


def load_csv(path, target=None, split_fraction=0.8, seed=0):
    """Read a CSV and split it into shuffled (train, test) datasets."""
    if not 0 < split_fraction <= 1:
        raise ValueError(f"split_fraction must be in (0, 1], got {split_fraction}")
    data = read_csv(path, target)
    perm = np.random.default_rng(seed).permutation(data.m)
    n_train = min(data.m, max(1, int(round(split_fraction * data.m))))
    tr, te = perm[:n_train], perm[n_train:]
    train = data.subset(tr, data.provenance + ":train")
    test = data.subset(te, data.provenance + ":test") if te.size else None
    return train, test


def write_rows(path, columns, rows, comments=()):
    """Write dict rows as CSV with ``# key=value`` comment lines on top."""
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row[c]) for c in columns])
    Path(path).write_text(buf.getvalue())


def _cell(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return v


def render_heatmap(phase_csv, out_path):
    """Render a phase-diagram CSV (rows m, columns N) to an image file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(phase_csv, newline="") as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    ms = sorted({int(r["m"]) for r in rows})
    Ns = sorted({int(r["N"]) for r in rows})
    Z = np.full((len(ms), len(Ns)), np.nan)
    for r in rows:
        if not int(r["skipped"]):
            Z[ms.index(int(r["m"])), Ns.index(int(r["N"]))] = float(r["mean_rmse"])
    fig, ax = plt.subplots(figsize=(6, 4.5))
    im = ax.imshow(Z, origin="lower", aspect="auto", cmap="jet")
    ax.set_xticks(range(len(Ns)), [str(N) for N in Ns])
    ax.set_yticks(range(len(ms)), [str(m) for m in ms])
    ax.set_xlabel("number of neurons N")
    ax.set_ylabel("number of samples m")
    fig.colorbar(im, ax=ax, label="mean test RMSE")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
