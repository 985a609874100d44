"""Command-line entry point: ``ltdahp <command> [flags]``.

Every file written carries the fully resolved configuration as ``#`` comment
lines, so a run can be repeated from its outputs alone.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
import time

import numpy as np

from . import bench
from .activation import ACTIVATIONS
from .estimator import LtDaHPRegressor, LtRaHPRegressor, load_model
from .modelsel import CvPlan, default_grids, kfold_cv
from .solver import DEFAULT_LAMBDA
from .sphere import RieszParams, eq_points, min_pairwise_distance, refine_energy, riesz_energy, save_points


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _echo(args):
    skip = {"func", "bench_func"}
    out = []
    for key, val in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(val, list):
            val = ",".join(str(v) for v in val)
        out.append(f"{'lambda' if key == 'lam' else key}={val}")
    return out


def _threads(args):
    n = getattr(args, "threads", None)
    if not n:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


# ---------------------------------------------------------------------------


def cmd_points(args):
    if args.tau is None:
        args.tau = float(args.d)
    config = eq_points(args.d, args.n)
    if args.refine_steps:
        config = refine_energy(config, RieszParams(args.tau), max_steps=args.refine_steps)
    save_points(config, args.out, comments=_echo(args))
    print(f"wrote {config.n} points in R^{config.ambient_dim} to {args.out}")
    print(f"min_pairwise_distance {min_pairwise_distance(config):.17g}")
    energy = riesz_energy(config, RieszParams(args.tau)) if config.n > 1 else 0.0
    print(f"riesz_energy(tau={args.tau:g}) {energy:.17g}")


def _train_model(args, data):
    grids = default_grids(data.d, data.m)
    if args.scheme == "ltdahp":
        if args.cv:
            plan = CvPlan(grids["ltdahp"], k=min(args.folds, data.m), seed=args.seed, lam=args.lam)
            report = kfold_cv(data, plan, "ltdahp")
            print(report.summary())
            args.l = report.selected["l"]
        model = LtDaHPRegressor(l=args.l, n=args.n, K=args.K, activation=args.activation,
                                lam=args.lam, tau=args.tau, refine_steps=args.refine_steps)
        model.fit(data.X, data.y)
        # echo the resolved hidden-layer sizes, not the None placeholders
        args.n, args.K = model.spec_.n, model.spec_.K
        return model, {"l": args.l, "n": args.n, "K": args.K}
    else:
        if args.cv:
            Ns = [args.N] if args.N is not None else grids["N"]
            Ks = [args.K] if args.K is not None else grids["K"]
            grid = [{"N": N, "K": K} for N in Ns for K in Ks]
            plan = CvPlan(grid, k=min(args.folds, data.m), seed=args.seed, lam=args.lam)
            report = kfold_cv(data, plan, "ltrahp", seed=args.seed)
            print(report.summary())
            args.N, args.K = report.selected["N"], report.selected["K"]
        if args.N is None:
            args.N = 64
        if args.K is None:
            args.K = 1.0
        model = LtRaHPRegressor(n_neurons=args.N, K=args.K, activation=args.activation,
                                lam=args.lam, random_state=args.seed)
        return model.fit(data.X, data.y), {"N": args.N, "K": args.K}


def cmd_train(args):
    if args.scheme == "ltrahp" and args.seed is None:
        raise ValueError("--seed is required for --scheme ltrahp")
    if args.seed is None:
        args.seed = 0
    data = bench.read_csv(args.data, args.target)
    t0 = time.perf_counter()
    model, chosen = _train_model(args, data)
    seconds = time.perf_counter() - t0
    model.save(args.out, comments=_echo(args))
    train_rmse = bench.rmse(model.predict(data.X), data.y)
    print("selected " + " ".join(f"{k}={v}" for k, v in chosen.items()))
    print(f"hidden_units {model.n_hidden_}")
    print(f"train_rmse {train_rmse:.17g}")
    print(f"train_seconds {seconds:.3f}")
    print(f"wrote model to {args.out}")


def _query(args, model):
    """Feature matrix and targets (None when the file has no target column)."""
    data = bench.read_csv(args.data, args.target)
    d = model.n_features_in_
    if data.d == d:
        return data.X, data.y
    if data.d + 1 == d and args.target is None:
        return np.column_stack([data.X, data.y]), None
    raise ValueError(f"{args.data}: {data.d} feature columns, model expects {d}")


def cmd_predict(args):
    model = load_model(args.model)
    X, _ = _query(args, model)
    pred = model.predict(X)
    bench.write_rows(args.out, ["prediction"], [{"prediction": float(p)} for p in pred],
                     comments=_echo(args))
    print(f"wrote {pred.size} predictions to {args.out}")


def cmd_eval(args):
    model = load_model(args.model)
    X, y = _query(args, model)
    if y is None:
        raise ValueError(f"{args.data}: no target column to evaluate against")
    print(f"rmse {bench.rmse(model.predict(X), y):.17g}")


def cmd_bench_toy(args):
    data = bench.gen_toy(args.m, args.sigma, args.seed, noisy=not args.noiseless)
    rows = [dict(x1=float(x[0]), x2=float(x[1]), x3=float(x[2]), y=float(t)) for x, t in zip(data.X, data.y)]
    bench.write_rows(args.out, ["x1", "x2", "x3", "y"], rows, comments=_echo(args))
    print(f"wrote {data.m} toy samples to {args.out}")


def cmd_bench_phase(args):
    grid = bench.ExperimentGrid(args.m_list, args.n_list, args.repeats, args.scheme)
    cells = bench.phase_diagram(grid, lam=args.lam, sigma=args.sigma, seed=args.seed, K=args.K,
                                max_entries=args.max_entries)
    comments = _echo(args) + ["mapping: l = max(1, round(N^(1/3))), n = ceil(N / l)"]
    bench.write_rows(args.out, ["m", "N", "mean_rmse", "std_rmse", "repeats", "skipped"], cells,
                     comments=comments)
    for c in cells:
        flag = " (skipped)" if c["skipped"] else ""
        print(f"m={c['m']:<6} N={c['N']:<6} mean_rmse={c['mean_rmse']:.6g}{flag}")
    print(f"wrote {len(cells)} cells to {args.out}")


def cmd_bench_rate(args):
    res = bench.rate_experiment(args.m_list, args.repeats, args.scheme, lam=args.lam,
                                sigma=args.sigma, seed=args.seed, folds=args.folds)
    comments = _echo(args) + [f"slope={res.slope:.17g}", f"reference_slope={res.reference:.17g}"]
    bench.write_rows(args.out, ["m", "mean_sq_err", "std"], res.rows, comments=comments)
    for row in res.rows:
        print(f"m={row['m']:<6} mean_sq_err={row['mean_sq_err']:.6g}")
    print(f"slope {res.slope:.6f}")
    print(f"theoretical slope -4/7 = {res.reference:.6f}")
    print(f"wrote {args.out}")


def cmd_bench_compare(args):
    rows = bench.compare_schemes(args.m_list, args.repeats, lam=args.lam, sigma=args.sigma,
                                 seed=args.seed, folds=args.folds)
    bench.write_rows(args.out, ["scheme", "m", "N", "mean_rmse", "std", "train_seconds"], rows,
                     comments=_echo(args))
    for r in rows:
        print(f"{r['scheme']:<7} m={r['m']:<6} N={r['N']:<8g} mean_rmse={r['mean_rmse']:.6g} "
              f"train_seconds={r['train_seconds']:.3f}")
    print(f"wrote {args.out}")


def cmd_bench_heatmap(args):
    bench.render_heatmap(args.input, args.out)
    print(f"wrote {args.out}")


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="ltdahp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--threads", type=int, default=None, help="cap on BLAS threads")

    sp = sub.add_parser("points", help="equal-area points on the sphere")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--tau", type=float, default=None, help="Riesz exponent (default d)")
    sp.add_argument("--refine-steps", type=int, default=0)
    sp.add_argument("--out", default="points.csv")
    common(sp)
    sp.set_defaults(func=cmd_points)

    sp = sub.add_parser("train", help="fit a model on a CSV file")
    sp.add_argument("--data", required=True)
    sp.add_argument("--target", default=None, help="target column name or index (default: last)")
    sp.add_argument("--scheme", choices=["ltdahp", "ltrahp"], default="ltdahp")
    sp.add_argument("--l", type=int, default=4)
    sp.add_argument("--n", type=int, default=None, help="inner weights (ltdahp)")
    sp.add_argument("--N", type=int, default=None, help="hidden units (ltrahp)")
    sp.add_argument("--K", type=float, default=None)
    sp.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    sp.add_argument("--activation", choices=sorted(ACTIVATIONS), default="logistic")
    sp.add_argument("--tau", type=float, default=None)
    sp.add_argument("--refine-steps", type=int, default=0)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--cv", action="store_true", help="select hyperparameters by k-fold CV")
    sp.add_argument("--folds", type=int, default=10)
    sp.add_argument("--out", default="model.txt")
    common(sp)
    sp.set_defaults(func=cmd_train)

    for name, func, helptext in (("predict", cmd_predict, "write predictions for a CSV file"),
                                 ("eval", cmd_eval, "RMSE of a model on a CSV file")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--model", required=True)
        sp.add_argument("--data", required=True)
        sp.add_argument("--target", default=None)
        if name == "predict":
            sp.add_argument("--out", default="predictions.csv")
        common(sp)
        sp.set_defaults(func=func)

    bp = sub.add_parser("bench", help="synthetic experiments")
    bsub = bp.add_subparsers(dest="bench_command", required=True)

    def experiment(sp, m_default, repeats_default):
        sp.add_argument("--m-list", "--m", dest="m_list", type=_int_list, default=m_default)
        sp.add_argument("--repeats", type=int, default=repeats_default)
        sp.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
        sp.add_argument("--sigma", type=float, default=0.1, help="noise standard deviation")
        sp.add_argument("--seed", type=int, default=0)
        common(sp)

    sp = bsub.add_parser("toy", help="write a toy dataset")
    sp.add_argument("--m", type=int, default=1000)
    sp.add_argument("--sigma", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--noiseless", action="store_true")
    sp.add_argument("--out", default="toy.csv")
    common(sp)
    sp.set_defaults(func=cmd_bench_toy)

    sp = bsub.add_parser("phase", help="(m, N) phase diagram")
    experiment(sp, [20, 50, 100, 200, 500, 1000, 2000], 10)
    sp.add_argument("--n-list", "--n", dest="n_list", type=_int_list, default=[5, 10, 20, 50, 100, 200, 500])
    sp.add_argument("--scheme", choices=["ltdahp", "ltrahp"], default="ltdahp")
    sp.add_argument("--K", type=float, default=None)
    sp.add_argument("--max-entries", type=float, default=5e7)
    sp.add_argument("--out", default="phase.csv")
    sp.set_defaults(func=cmd_bench_phase)

    sp = bsub.add_parser("rate", help="error decay against sample size")
    experiment(sp, [125, 250, 500, 1000, 2000, 4000], 10)
    sp.add_argument("--scheme", choices=["ltdahp", "ltrahp"], default="ltdahp")
    sp.add_argument("--folds", type=int, default=10)
    sp.add_argument("--out", default="rate.csv")
    sp.set_defaults(func=cmd_bench_rate)

    sp = bsub.add_parser("compare", help="LtDaHP against LtRaHP at matched N")
    experiment(sp, [2000], 10)
    sp.add_argument("--folds", type=int, default=10)
    sp.add_argument("--out", default="compare.csv")
    sp.set_defaults(func=cmd_bench_compare)

    sp = bsub.add_parser("heatmap", help="render phase.csv to an image")
    sp.add_argument("--in", dest="input", default="phase.csv")
    sp.add_argument("--out", default="phase.png")
    sp.set_defaults(func=cmd_bench_heatmap)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _threads(args):
            args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
