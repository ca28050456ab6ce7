"""Command-line entry point: ``stretchyreg <command> [flags]``.

Commands: fit, eval, sweep-q, sweep-order, contour, boundary.

Any flag may also come from a JSON file passed with ``--config``; its keys
are flag names (``"q-list"``, ``"lambda"``, ...). Command-line flags win.
Failures print one JSON object ``{"error": <category>, "message": ...}`` on
stderr and exit non-zero.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .datasets import Dataset, load_delimited, load_prostate, split, synthetic_three_points
from .exceptions import DimensionError, EmptyInputError, StretchyError
from .model import (
    ClassifierConfig,
    classify,
    evaluate,
    fit_model,
    load_model,
    save_model,
)
from .polybasis import count_terms
from .stretchy import MIN_Q_GAP, contour_grid

B_MODE_FLAGS = {
    "zero": "zero",
    "raw-mean": "raw_mean",
    "a-raw-mean": "a_times_raw_mean",
    "custom": "custom",
}

EXIT_ERROR = 1
EXIT_USAGE = 2


class UsageError(Exception):
    category = "usage"


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    return [float(v) for v in str(text).replace(" ", "").split(",") if v]


def _ints(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    if isinstance(text, int):
        return [text]
    out = []
    for part in str(text).replace(" ", "").split(","):
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _check_q(q: float) -> float:
    if abs(q - 1.0) < MIN_Q_GAP:
        raise UsageError(f"q={q:g} is not allowed: the stretch exponent 1/(q-1) is undefined")
    return q


# dataset handling


def _load_data(args) -> Dataset:
    if args.data is None:
        raise UsageError("--data is required")
    if args.data == "synthetic":
        return synthetic_three_points()
    if args.data == "prostate":
        return load_prostate()
    delim = "\t" if args.delimiter in ("tab", "\\t") else args.delimiter
    return load_delimited(args.data, delim, args.target, args.split_col, args.train_value)


def _train_test(ds: Dataset):
    if ds.split is None:
        return ds, None
    return split(ds)


def _use_transform(args, ds: Dataset) -> bool:
    if args.transform == "auto":
        return ds.name != "synthetic"
    return args.transform == "on"


def _model_kwargs(args, ds: Dataset, q=None, order=None) -> dict:
    b_mode = B_MODE_FLAGS.get(args.b_mode)
    if b_mode is None:
        raise UsageError(f"unknown --b-mode {args.b_mode!r}; choose from {sorted(B_MODE_FLAGS)}")
    b = _floats(args.b) if args.b is not None else None
    return dict(
        order=args.order if order is None else order,
        q=args.q if q is None else q,
        lam=args.lam,
        mode=args.mode,
        transform=_use_transform(args, ds),
        a=args.a,
        b_mode=b_mode,
        b=b,
    )


def _resolved_config(args) -> dict:
    skip = {"func", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# output helpers


def _emit(text: str, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _csv(rows, header, config=None) -> str:
    buf = io.StringIO()
    if config is not None:
        buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _metrics(model, ds, args):
    if ds is None or ds.n_samples == 0:
        return None
    rep = evaluate(model, ds.X, ds.y, args.sparsity_eps)
    return rep


# commands


def cmd_fit(args) -> int:
    _check_q(args.q)
    if not args.out:
        raise UsageError("fit requires --out MODEL.json")
    ds = _load_data(args)
    train, test = _train_test(ds)
    t0 = time.perf_counter()
    model, info = fit_model(train.X, train.y, **_model_kwargs(args, ds),
                            provenance={"dataset": ds.name})
    wall = time.perf_counter() - t0
    save_model(model, args.out)
    report = {"model": str(args.out), **info, "n_coefficients": len(model.alpha)}
    report["train"] = _metrics(model, train, args).to_dict()
    te = _metrics(model, test, args)
    report["test"] = None if te is None else te.to_dict()
    report["config"] = _resolved_config(args)
    report["provenance"] = {"wall_time_s": wall}
    _emit(_json(report), args.report)
    return 0


def cmd_eval(args) -> int:
    if not args.model:
        raise UsageError("eval requires --model")
    model = load_model(args.model)
    ds = _load_data(args)
    rows = args.rows
    if rows == "auto":
        rows = "test" if ds.split is not None else "all"
    if rows in ("train", "test"):
        train, test = split(ds)
        ds = train if rows == "train" else test
    if ds.n_samples == 0:
        raise EmptyInputError(f"no {rows} rows to evaluate")
    if ds.n_features != model.n_features:
        raise DimensionError(
            f"model expects {model.n_features} features, dataset has {ds.n_features}"
        )
    rep = evaluate(model, ds.X, ds.y, args.sparsity_eps)
    doc = rep.to_dict(include_residuals=args.residuals)
    doc["rows"] = rows
    if args.format == "csv":
        keys = ["rows", "n", "mse", "std_err", "resid_std", "nnz"]
        text = _csv([[_fmt(doc[k]) for k in keys]], keys)
    else:
        text = _json(doc)
    _emit(text, args.out)
    return 0


def _degree_rows(model, limit=100):
    alpha = model.alpha
    deg = model.basis.degrees
    rows = []
    for k in range(model.basis.r + 1):
        vals = alpha[deg == k]
        if len(alpha) <= limit:
            for i, v in enumerate(sorted(vals, reverse=True)):
                rows.append((f"deg{k}[{i}]", float(v)))
        else:
            rows.append((f"deg{k}_max_abs", float(np.max(np.abs(vals)))))
            rows.append((f"deg{k}_l1", float(np.sum(np.abs(vals)))))
    return rows


def cmd_sweep_q(args) -> int:
    if args.q_list is None:
        raise UsageError("sweep-q requires --q-list")
    qs = [_check_q(q) for q in _floats(args.q_list)]
    if not qs:
        raise UsageError("--q-list is empty")
    ds = _load_data(args)
    train, test = _train_test(ds)
    eval_set = test if test is not None and test.n_samples else train
    cells = []
    for q in qs:
        cell = {"q": q}
        t0 = time.perf_counter()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                model, info = fit_model(train.X, train.y, **_model_kwargs(args, ds, q=q),
                                        provenance={"dataset": ds.name})
            tr = evaluate(model, train.X, train.y, args.sparsity_eps)
            ev = evaluate(model, eval_set.X, eval_set.y, args.sparsity_eps)
            cell.update(status="ok", solver_mode=info["solver_mode"], condition=info["condition"],
                        alpha=model.alpha.tolist(), train_mse=tr.mse, mse=ev.mse,
                        std_err=ev.std_err, resid_std=ev.resid_std, nnz=ev.nnz,
                        _model=model)
        except StretchyError as exc:
            cell.update(status=f"error:{exc.category}", message=str(exc))
        cell["_wall"] = time.perf_counter() - t0
        cells.append(cell)

    ok = [c for c in cells if c["status"] == "ok"]
    names = None
    if ok:
        m0 = ok[0]["_model"]
        names = m0.basis.term_names(list(ds.feature_names))
        names = ["intercept" if n == "1" else n for n in names]
    header = ["parameter"] + [f"q={c['q']:g}" for c in cells]
    rows = []
    if ok and m0.basis.r <= 1:
        for j, name in enumerate(names):
            rows.append([f"alpha{j}:{name}"] + [
                _fmt(c["alpha"][j]) if c["status"] == "ok" else c["status"] for c in cells])
    elif ok:
        labels = [lab for lab, _ in _degree_rows(m0)]
        per = {id(c): dict(_degree_rows(c["_model"])) for c in ok}
        for lab in labels:
            rows.append([lab] + [
                _fmt(per[id(c)][lab]) if c["status"] == "ok" else c["status"] for c in cells])
    for key in ("train_mse", "mse", "std_err", "resid_std", "nnz", "solver_mode"):
        rows.append([key] + [_fmt(c[key]) if c["status"] == "ok" else c["status"] for c in cells])
    rows.append(["status"] + [c["status"] for c in cells])

    config = _resolved_config(args)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep_q.csv").write_text(_csv(rows, header, config), encoding="utf-8")
    plot = []
    for c in ok:
        for j, v in enumerate(c["alpha"]):
            plot.append([_fmt(c["q"]), j, names[j], _fmt(v)])
    (out / "sweep_q_plot.csv").write_text(
        _csv(plot, ["q", "index", "term", "value"], config), encoding="utf-8")
    doc = {
        "config": config,
        "eval_rows": "test" if eval_set is not train else "train",
        "terms": names,
        "cells": [{k: v for k, v in c.items() if not k.startswith("_")} for c in cells],
        "provenance": {"wall_time_s": [c["_wall"] for c in cells]},
    }
    (out / "sweep_q.json").write_text(_json(doc), encoding="utf-8")
    sys.stdout.write((out / "sweep_q.csv").read_text(encoding="utf-8"))
    return 0 if len(ok) == len(cells) else EXIT_ERROR


def cmd_sweep_order(args) -> int:
    orders = _ints(args.orders)
    if not orders:
        raise UsageError("--orders is empty")
    _check_q(args.q)
    ds = _load_data(args)
    train, test = _train_test(ds)
    # fail on unrepresentable term counts before any fitting
    Ds = [count_terms(ds.n_features, r) for r in orders]
    cells = []
    largest = None
    for r, D in zip(orders, Ds):
        cell = {"order": r, "D": D}
        t0 = time.perf_counter()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                model, info = fit_model(train.X, train.y, **_model_kwargs(args, ds, order=r),
                                        provenance={"dataset": ds.name})
            tr = evaluate(model, train.X, train.y, args.sparsity_eps)
            cell.update(status="ok", solver_mode=info["solver_mode"], condition=info["condition"],
                        train_mse=tr.mse, train_std_err=tr.std_err)
            if test is not None and test.n_samples:
                te = evaluate(model, test.X, test.y, args.sparsity_eps)
                cell.update(test_mse=te.mse, test_std_err=te.std_err)
            cell["nnz"] = tr.nnz
            if largest is None or r >= largest[0]:
                largest = (r, model)
        except StretchyError as exc:
            cell.update(status=f"error:{exc.category}", message=str(exc))
        cell["_wall"] = time.perf_counter() - t0
        cells.append(cell)

    keys = ["order", "D", "train_mse", "test_mse", "test_std_err", "nnz", "solver_mode", "status"]
    rows = [[_fmt(c.get(k, "")) for k in keys] for c in cells]
    config = _resolved_config(args)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep_order.csv").write_text(_csv(rows, keys, config), encoding="utf-8")
    doc = {"config": config,
           "cells": [{k: v for k, v in c.items() if not k.startswith("_")} for c in cells],
           "provenance": {"wall_time_s": [c["_wall"] for c in cells]}}
    (out / "sweep_order.json").write_text(_json(doc), encoding="utf-8")
    if args.plot_alpha and largest is not None:
        r, model = largest
        plot = [[j, _fmt(float(v))] for j, v in enumerate(model.alpha)]
        (out / f"sweep_order_alpha_r{r}.csv").write_text(
            _csv(plot, ["index", "value"], config), encoding="utf-8")
    sys.stdout.write((out / "sweep_order.csv").read_text(encoding="utf-8"))
    return 0 if all(c["status"] == "ok" for c in cells) else EXIT_ERROR


def cmd_contour(args) -> int:
    try:
        grid = contour_grid(args.space, args.exponent, args.grid_min, args.grid_max, args.steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [[_fmt(float(x1)), _fmt(float(x2)), "nan" if np.isnan(v) else _fmt(float(v))]
            for x1, x2, v in grid]
    _emit(_csv(rows, ["x1", "x2", "value"]), args.out)
    return 0


def cmd_boundary(args) -> int:
    if not args.model:
        raise UsageError("boundary requires --model")
    model = load_model(args.model)
    if model.n_features != 2:
        raise DimensionError(f"boundary grids need a 2-input model, got d={model.n_features}")
    axis = np.linspace(args.grid_min, args.grid_max, args.steps)
    x1, x2 = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([x1.ravel(), x2.ravel()])
    g = model.predict(pts)
    labels = classify(g, ClassifierConfig(tau=args.tau))
    rows = [[_fmt(float(a)), _fmt(float(b)), _fmt(float(s)), int(c)]
            for (a, b), s, c in zip(pts, g, labels)]
    _emit(_csv(rows, ["x1", "x2", "g", "class"]), args.out)
    return 0


# parser


def _add_data_flags(p):
    p.add_argument("--data", help="delimited file, or 'synthetic' / 'prostate'")
    p.add_argument("--target", default="lpsa")
    p.add_argument("--split-col", dest="split_col", default=None)
    p.add_argument("--train-value", dest="train_value", default="T")
    p.add_argument("--delimiter", default="tab")


def _add_model_flags(p, order=1, q=2.0, lam=0.0, a=1.0, b_mode="zero", mode="auto"):
    p.add_argument("--order", type=int, default=order)
    p.add_argument("--q", type=float, default=q)
    p.add_argument("--lambda", dest="lam", type=float, default=lam)
    p.add_argument("--a", type=float, default=a)
    p.add_argument("--b-mode", dest="b_mode", default=b_mode, choices=sorted(B_MODE_FLAGS))
    p.add_argument("--b", default=None, help="comma-separated offsets for --b-mode custom")
    p.add_argument("--mode", default=mode, choices=["auto", "primal", "dual"])
    p.add_argument("--transform", default="auto", choices=["auto", "on", "off"],
                   help="auto: off for the synthetic set, on otherwise")


def _add_eval_flags(p):
    p.add_argument("--sparsity-eps", dest="sparsity_eps", type=float, default=1e-3)
    p.add_argument("--tau", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stretchyreg", description="Stretchy polynomial regression: fits, evaluations and parameter sweeps.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model and write it as JSON")
    _add_data_flags(p)
    _add_model_flags(p)
    _add_eval_flags(p)
    p.add_argument("--out", help="model JSON path")
    p.add_argument("--report", help="fit report path (default stdout)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="evaluate a saved model")
    _add_data_flags(p)
    _add_eval_flags(p)
    p.add_argument("--model")
    p.add_argument("--rows", default="auto", choices=["auto", "train", "test", "all"])
    p.add_argument("--residuals", action="store_true")
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep-q", help="one fit per q value")
    _add_data_flags(p)
    _add_model_flags(p)
    _add_eval_flags(p)
    p.add_argument("--q-list", dest="q_list")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_sweep_q)

    p = sub.add_parser("sweep-order", help="one fit per polynomial order")
    _add_data_flags(p)
    _add_model_flags(p, q=1.0001, lam=1e-4, a=1e-5, b_mode="a-raw-mean", mode="dual")
    _add_eval_flags(p)
    p.add_argument("--orders", default="1-10", help="e.g. '1-10' or '1,2,5'")
    p.add_argument("--plot-alpha", dest="plot_alpha", action="store_true",
                   help="write coefficient-vs-index data for the largest order")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_sweep_order)

    p = sub.add_parser("contour", help="measure values on a 2-D grid")
    p.add_argument("--space", default="lp", choices=["lp", "qtilde", "qspace", "qspace2"])
    p.add_argument("--exponent", type=float, default=2.0)
    p.add_argument("--grid-min", dest="grid_min", type=float, default=-1.0)
    p.add_argument("--grid-max", dest="grid_max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--out")
    p.set_defaults(func=cmd_contour)

    p = sub.add_parser("boundary", help="decision values of a 2-input model on a grid")
    p.add_argument("--model")
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--grid-min", dest="grid_min", type=float, default=0.0)
    p.add_argument("--grid-max", dest="grid_max", type=float, default=0.4)
    p.add_argument("--steps", type=int, default=81)
    p.add_argument("--out")
    p.set_defaults(func=cmd_boundary)

    for p in sub.choices.values():
        p.add_argument("--config", help="JSON file of flag values")
    return parser


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        values = {}
        for key, val in cfg.items():
            dest = key.lstrip("-").replace("-", "_")
            dest = {"lambda": "lam"}.get(dest, dest)
            if dest not in known:
                raise UsageError(f"unknown config key {key!r} for command {args.command}")
            values[dest] = val
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(json.dumps({"error": "usage", "message": str(exc)}) + "\n")
        return EXIT_USAGE
    except StretchyError as exc:
        sys.stderr.write(json.dumps({"error": exc.category, "message": str(exc)}) + "\n")
        return EXIT_ERROR
    except ValueError as exc:
        sys.stderr.write(json.dumps({"error": "invalid_argument", "message": str(exc)}) + "\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "io_error", "message": str(exc)}) + "\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
