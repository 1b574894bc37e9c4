"""Command-line front end: train, predict, benchmark.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver failure.
Models are saved as versioned JSON artifacts that reload to bit-identical
predictions; all numerical work lives in the library modules.
"""

import argparse
import json
import sys
import warnings

import numpy as np
import pandas as pd

from . import benchmark as bench
from .expand import expand_with_dummies
from .l1svm import fit_l1_svm
from .l2svm import default_lambda_grid, fit_l2_svm, fit_l2_svm_svd_reduced
from .lp import MaxPivotsExceeded
from .splines import SplineBasis, basis_design, fit_initial_nonparametric, nonparametric_graph
from .structured import (
    EmptyInitial,
    StructuredFitSpec,
    fit_nonparametric_structured,
    fit_structured,
)

ARTIFACT_VERSION = 1

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3

_POLICY = {"garrote": "none", "shsvm": "strong", "whsvm": "weak",
           "np-shsvm": "strong", "np-whsvm": "weak"}


class DataError(Exception):
    pass


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# CSV ingestion


def load_csv(path, schema_path=None):
    """Read a labeled CSV: a "y" column in {+1,-1} (or {0,1}, auto-mapped
    with a warning) plus numeric feature columns, with categorical columns
    declared in an optional JSON sidecar. Missing values are a hard error."""
    categorical_cols = {}
    if schema_path:
        try:
            with open(schema_path) as fh:
                schema = json.load(fh)
        except FileNotFoundError:
            raise DataError(f"no such schema file: {schema_path}")
        decl = schema.get("categorical", {})
        if isinstance(decl, list):
            decl = {name: None for name in decl}
        categorical_cols = decl
    try:
        df = pd.read_csv(path)
    except FileNotFoundError:
        raise DataError(f"no such file: {path}")
    return parse_frame(df, categorical_cols)


def parse_frame(df, categorical_cols):
    if "y" not in df.columns:
        raise DataError('CSV must contain a label column named "y"')
    if df.isna().any().any():
        raise DataError("CSV contains missing values")

    labels = df["y"]
    uniq = set(labels.unique().tolist())
    if uniq <= {1, -1}:
        y = labels.to_numpy(dtype=float)
    elif uniq <= {0, 1}:
        warnings.warn("labels look like {0,1}; mapping 0 -> -1")
        y = np.where(labels.to_numpy() == 1, 1.0, -1.0)
    else:
        raise DataError(f"labels must be in {{+1,-1}} or {{0,1}}, got {sorted(uniq)}")

    resolved = {}
    for name, levels in categorical_cols.items():
        if name not in df.columns:
            raise DataError(f"schema declares unknown column {name!r}")
        observed = sorted(map(str, df[name].unique().tolist()))
        if levels is None:
            levels = observed
        elif not set(observed) <= set(map(str, levels)):
            raise DataError(f"column {name!r} has levels outside the schema")
        resolved[name] = [str(lv) for lv in levels]
    categorical_cols = resolved

    feature_names = [c for c in df.columns if c != "y"]
    Z = np.empty((len(df), len(feature_names)))
    categorical = {}
    for j, name in enumerate(feature_names):
        if name in categorical_cols:
            levels = categorical_cols[name]
            codes = pd.Categorical(df[name].astype(str), categories=levels).codes
            Z[:, j] = codes.astype(float)
            categorical[j] = levels
        else:
            col = pd.to_numeric(df[name], errors="coerce")
            if col.isna().any():
                raise DataError(f"column {name!r} is not numeric; declare it "
                                "categorical in the schema")
            Z[:, j] = col.to_numpy(dtype=float)
    return Z, y, feature_names, categorical


# ---------------------------------------------------------------------------
# Artifacts


def _poly_artifact_expansion(expansion, feature_names, categorical):
    return {
        "type": "polynomial",
        "q": len(feature_names),
        "columns": feature_names,
        "categorical": {str(j): lv for j, lv in categorical.items()},
        "mean": expansion.mean_.tolist(),
        "scale": expansion.scale_.tolist(),
    }


def _spline_artifact_expansion(bases, feature_names):
    return {
        "type": "spline",
        "q": len(feature_names),
        "columns": feature_names,
        "degree": bases[0].degree,
        "knots": [b.knots.tolist() for b in bases],
    }


def _rebuild_design(artifact, Z):
    exp = artifact["expansion"]
    if exp["type"] == "polynomial":
        codes = {int(j): list(range(len(lv))) for j, lv in exp["categorical"].items()}
        expansion, _ = expand_with_dummies(exp["q"], codes)
        expansion.mean_ = np.array(exp["mean"])
        expansion.scale_ = np.array(exp["scale"])
        return expansion.transform(Z)
    bases = [
        SplineBasis(j, exp["degree"], np.array(knots),
                    float(knots[0]), float(knots[-1]))
        for j, knots in enumerate(exp["knots"])
    ]
    return basis_design(bases, Z)


def artifact_decisions(artifact, Z):
    X = _rebuild_design(artifact, Z)
    model = artifact["model"]
    return X @ np.array(model["coefficients"]) + model["intercept"]


def save_artifact(artifact, path):
    with open(path, "w") as fh:
        json.dump(artifact, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_artifact(path):
    try:
        with open(path) as fh:
            artifact = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"no such model file: {path}")
    if artifact.get("format_version") != ARTIFACT_VERSION:
        raise DataError("unsupported model artifact version")
    return artifact


# ---------------------------------------------------------------------------
# train


def _parse_grid(text):
    if text.startswith(("log:", "lin:")):
        kind, lo, hi, num = text.split(":")
        lo, hi, num = float(lo), float(hi), int(num)
        pts = np.geomspace(lo, hi, num) if kind == "log" else np.linspace(lo, hi, num)
        return list(pts)
    return [float(v) for v in text.split(",")]


def _tuning_grid(args, method):
    if args.grid:
        return _parse_grid(args.grid)
    if method in bench.NONPARAMETRIC_METHODS:
        return list(np.linspace(0.5, 30.0, 30))
    return list(np.geomspace(1e-3, 1e3, 30))


def _train_model(args, Z, y, feature_names, categorical):
    method = args.method
    seed = args.seed

    if method in bench.NONPARAMETRIC_METHODS:
        if categorical:
            raise DataError("nonparametric methods require all-continuous features")
        lam_grid = list(np.geomspace(1e-2, 1e2, 10))
        _, lam0 = bench.kfold_cv(
            Z, y, lambda A, b, v: _NpCvModel(A, b, v), lam_grid,
            args.cv or 5, seed)
        init = fit_initial_nonparametric(Z, y, lam0)
        scores = init.effect_scores(Z)
        graph = nonparametric_graph(Z.shape[1], _POLICY[method])

        def fit_np(value):
            return fit_nonparametric_structured(scores, y, graph, "constraint", value)

        if args.big_m is not None:
            value = args.big_m
        elif args.cv:
            # CV refits the initial estimator inside each fold
            _, value = bench.kfold_cv(
                Z, y, lambda A, b, v: _NpCvStructured(A, b, v, lam0, _POLICY[method]),
                _tuning_grid(args, method), args.cv, seed)
        else:
            raise UsageError("provide --big-m or --cv for nonparametric methods")
        fit = fit_np(value)
        order = sorted(graph.parents)
        coef = np.concatenate([
            np.asarray(init.main_coefs[j]) * fit.theta[j] for j in range(init.q)
        ] + [
            np.asarray(init.pair_coefs[pr]) * fit.theta[e]
            for e, pr in zip(order[init.q:],
                             [(r, j) for r in range(init.q) for j in range(r + 1, init.q)])
        ])
        artifact = {
            "format_version": ARTIFACT_VERSION,
            "method": method,
            "tuning": {"form": "constraint", "value": float(value)},
            "seed": seed,
            "expansion": _spline_artifact_expansion(init.bases, feature_names),
            "initial": {"intercept": init.intercept,
                        "coefficients": np.concatenate(
                            [np.asarray(c) for c in init.main_coefs]
                            + [init.pair_coefs[k] for k in sorted(init.pair_coefs)]).tolist()},
            "model": {"intercept": fit.intercept,
                      "coefficients": coef.tolist(),
                      "theta": {str(e): fit.theta[e] for e in order},
                      "active_effects": list(map(int, fit.active_effects))},
        }
        return artifact, fit

    # the data matrix holds level codes 0..L-1, not the labels
    codes = {j: list(range(len(lv))) for j, lv in categorical.items()}
    expansion, graph = expand_with_dummies(Z.shape[1], codes)
    X = expansion.fit(Z).transform(Z)
    if np.all(y == y[0]):
        raise DataError("training data contains a single class")

    if method == "l2":
        grid = _tuning_grid(args, method)
        if args.lam is not None:
            value = args.lam
        elif args.cv:
            _, value = bench.kfold_cv(X, y, lambda A, b, v: fit_l2_svm(A, b, v),
                                      grid, args.cv, seed)
        else:
            raise UsageError("provide --lambda or --cv for l2")
        fit = fit_l2_svm(X, y, value)
        model = {"intercept": fit.intercept, "coefficients": fit.coefficients.tolist()}
        tuning = {"form": "lagrangian", "value": float(value)}
        initial = None
    elif method == "l1":
        grid = _tuning_grid(args, method)
        if args.lam is not None:
            value = args.lam
        elif args.cv:
            _, value = bench.kfold_cv(X, y, lambda A, b, v: fit_l1_svm(A, b, v),
                                      grid, args.cv, seed)
        else:
            raise UsageError("provide --lambda or --cv for l1")
        fit = fit_l1_svm(X, y, value)
        model = {"intercept": fit.intercept, "coefficients": fit.coefficients.tolist(),
                 "active_columns": fit.active_set.tolist()}
        tuning = {"form": "lagrangian", "value": float(value)}
        initial = None
    elif method in ("garrote", "shsvm", "whsvm"):
        lam_grid = default_lambda_grid(X.shape[0], X.shape[1])
        _, lam0 = bench.kfold_cv(X, y, lambda A, b, v: fit_l2_svm(A, b, v),
                                 lam_grid, args.cv or 5, seed)
        init = fit_l2_svm(X, y, lam0)
        graph.policy = _POLICY[method]

        def fit_at(form, val):
            return fit_structured(X, y, StructuredFitSpec(
                init.coefficients, graph, expansion.column_map, form, val))

        if args.lam is not None:
            form, value = "lagrangian", args.lam
        elif args.big_m is not None:
            form, value = "constraint", args.big_m
        elif args.cv:
            form = "lagrangian"
            _, value = bench.kfold_cv(X, y, lambda A, b, v: fit_at("lagrangian", v),
                                      _tuning_grid(args, method), args.cv, seed)
        else:
            raise UsageError("provide --lambda, --big-m or --cv")
        fit = fit_at(form, value)
        model = {"intercept": fit.intercept,
                 "coefficients": fit.effective_coefficients.tolist(),
                 "theta": {str(e): t for e, t in sorted(fit.theta.items())},
                 "active_effects": list(map(int, fit.active_effects))}
        tuning = {"form": form, "value": float(value)}
        initial = {"intercept": init.intercept, "coefficients": init.coefficients.tolist()}
    else:
        raise UsageError(f"unknown method {method!r}")

    artifact = {
        "format_version": ARTIFACT_VERSION,
        "method": method,
        "tuning": tuning,
        "seed": seed,
        "expansion": _poly_artifact_expansion(expansion, feature_names, categorical),
        "model": model,
    }
    if initial is not None:
        artifact["initial"] = initial
    return artifact, fit


class _NpCvModel:
    def __init__(self, Ztr, ytr, lam):
        self._init = fit_initial_nonparametric(Ztr, ytr, lam)

    def decision(self, Z):
        return self._init.effect_scores(Z).sum(axis=1) + self._init.intercept


class _NpCvStructured:
    def __init__(self, Ztr, ytr, value, lam0, policy):
        self._init = fit_initial_nonparametric(Ztr, ytr, lam0)
        graph = nonparametric_graph(Ztr.shape[1], policy)
        self._fit = fit_nonparametric_structured(
            self._init.effect_scores(Ztr), ytr, graph, "constraint", value)

    def decision(self, Z):
        scores = self._init.effect_scores(Z)
        order = sorted(self._fit.theta)
        theta = np.array([self._fit.theta[e] for e in order])
        return scores @ theta + self._fit.intercept


def cmd_train(args):
    Z, y, names, categorical = load_csv(args.csv, args.schema)
    artifact, _ = _train_model(args, Z, y, names, categorical)
    save_artifact(artifact, args.out)
    dec = artifact_decisions(artifact, Z)
    hinge = float(np.maximum(0.0, 1.0 - y * dec).sum())
    print(f"method: {artifact['method']}")
    print(f"tuning: {artifact['tuning']['form']} = {artifact['tuning']['value']:g}")
    if "theta" in artifact["model"]:
        active = artifact["model"]["active_effects"]
        print(f"active effects ({len(active)}): {active}")
    elif "active_columns" in artifact["model"]:
        active = artifact["model"]["active_columns"]
        print(f"active columns ({len(active)}): {active}")
    print(f"training hinge: {hinge:.6f}")
    print(f"saved model to {args.out}")
    return EXIT_OK


def cmd_predict(args):
    artifact = load_artifact(args.model)
    Z, _, names, _ = _load_predict_csv(args.csv, artifact)
    if names != artifact["expansion"]["columns"]:
        raise DataError(
            "feature columns do not match the model "
            f"(expected {artifact['expansion']['columns']}, got {names})")
    labels = np.where(artifact_decisions(artifact, Z) >= 0.0, 1, -1)
    out = "\n".join(str(v) for v in labels) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return EXIT_OK


def _load_predict_csv(path, artifact):
    """Prediction input: same feature columns, label column optional."""
    try:
        df = pd.read_csv(path)
    except FileNotFoundError:
        raise DataError(f"no such file: {path}")
    if "y" not in df.columns:
        df = df.copy()
        df["y"] = 1
    names = artifact["expansion"]["columns"]
    categorical = {names[int(j)]: lv
                   for j, lv in artifact["expansion"].get("categorical", {}).items()}
    return parse_frame(df, categorical)


def cmd_benchmark(args):
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"no such config file: {args.config}")
    report = bench.run_benchmark(raw)
    prefix = args.out or "report"
    with open(prefix + ".json", "w") as fh:
        fh.write(report.to_json() + "\n")
    with open(prefix + ".csv", "w") as fh:
        fh.write(report.to_csv())
    print(report.to_csv(), end="")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="structsvm",
        description="Structured variable selection for SVMs (garrote scaling "
                    "with heredity constraints)")
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="fit a model on a CSV dataset")
    tr.add_argument("--csv", required=True)
    tr.add_argument("--method", required=True,
                    choices=["l2", "l1", "garrote", "shsvm", "whsvm",
                             "np-shsvm", "np-whsvm"])
    tr.add_argument("--lambda", dest="lam", type=float)
    tr.add_argument("--big-m", dest="big_m", type=float)
    tr.add_argument("--cv", type=int, metavar="K")
    tr.add_argument("--grid", help='comma list, or "log:LO:HI:N" / "lin:LO:HI:N"')
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--schema", help="JSON sidecar declaring categorical columns")
    tr.add_argument("--out", required=True)
    tr.set_defaults(func=cmd_train)

    pr = sub.add_parser("predict", help="label a CSV with a saved model")
    pr.add_argument("--model", required=True)
    pr.add_argument("--csv", required=True)
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_predict)

    bm = sub.add_parser("benchmark", help="run a simulation benchmark config")
    bm.add_argument("--config", required=True)
    bm.add_argument("--out", help="output prefix for .json/.csv reports")
    bm.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, bench.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (MaxPivotsExceeded, EmptyInitial, RuntimeError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
