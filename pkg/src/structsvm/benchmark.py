"""Monte-Carlo benchmark harness and cross-validation tuning.

Replicates the simulation protocol of the comparison tables: per replicate,
draw an independent train/test pair, fit every competitor across its tuning
grid and record the smallest test error over the grid (oracle tuning).
Replicate r of a run with seed s uses the stream SeedSequence(s, spawn_key=(r,)),
so reports are pure functions of their config and aggregation order never
matters.
"""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .expand import expand_polynomial
from .l1svm import fit_l1_svm
from .l2svm import default_lambda_grid, fit_l2_svm, fit_l2_svm_svd_reduced
from .simulate import (
    NONPARAMETRIC_EXAMPLES,
    active_effects_from_columns,
    bayes_error,
    example_spec,
    generate_example,
    generalization_error,
    heredity_frequency,
)
from .splines import basis_design, build_basis, fit_initial_nonparametric, nonparametric_graph
from .structured import (
    StructuredFitSpec,
    decision_values,
    fit_nonparametric_structured,
    fit_structured,
)

PARAMETRIC_METHODS = ("l2", "l1", "garrote", "shsvm", "whsvm")
NONPARAMETRIC_METHODS = ("np-shsvm", "np-whsvm")
ALL_METHODS = PARAMETRIC_METHODS + NONPARAMETRIC_METHODS

_POLICY = {"garrote": "none", "shsvm": "strong", "whsvm": "weak",
           "np-shsvm": "strong", "np-whsvm": "weak"}

_CONFIG_KEYS = {
    "example", "rho", "n_train", "n_test", "replications", "seed", "methods",
    "grids", "bayes_mc", "num_basis", "cv_folds", "initial_grid_size",
}

_CONFIG_DEFAULTS = {
    "rho": None, "n_test": 2000, "replications": 20, "seed": 0,
    "grids": {}, "bayes_mc": 100_000, "num_basis": 5, "cv_folds": 5,
    "initial_grid_size": 20,
}


class ConfigError(ValueError):
    pass


def load_config(raw: dict) -> dict:
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    for key in ("example", "n_train", "methods"):
        if key not in raw:
            raise ConfigError(f"missing required config key: {key}")
    cfg = dict(_CONFIG_DEFAULTS)
    cfg.update(raw)
    for m in cfg["methods"]:
        if m not in ALL_METHODS:
            raise ConfigError(f"unknown method {m!r}; choose from {ALL_METHODS}")
    return cfg


def stratified_folds(y, k: int, rng):
    """Per-class shuffled round-robin assignment; returns a fold-index array."""
    y = np.asarray(y)
    fold = np.empty(y.shape[0], dtype=int)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        fold[idx] = np.arange(idx.size) % k
    return fold


def kfold_cv(X, y, fitter, grid, k: int, seed):
    """Smallest mean CV misclassification over the grid and its tuning value.

    `fitter(X_train, y_train, value)` must return an object accepted by
    `structured.decision_values`. If a fold loses a class entirely, refolds
    once with a fresh stream, then raises.
    """
    if k < 2:
        raise ValueError("need at least 2 folds")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    rng = np.random.default_rng(seed)
    for attempt in range(2):
        fold = stratified_folds(y, k, rng)
        ok = all(np.unique(y[fold != f]).size == 2 for f in range(k))
        if ok:
            break
        if attempt == 1:
            raise ValueError("a CV fold lost a class even after refolding")
    errs = np.zeros(len(grid))
    for f in range(k):
        tr, te = fold != f, fold == f
        for gi, val in enumerate(grid):
            model = fitter(X[tr], y[tr], val)
            errs[gi] += generalization_error(decision_values(model, X[te]), y[te]) * te.sum()
    errs /= y.size
    best = int(np.argmin(errs))
    return float(errs[best]), grid[best]


@dataclass
class BenchmarkReport:
    config: dict
    bayes: float
    method_errors: dict                 # method -> list of per-replicate errors
    best_tunings: dict                  # method -> list of per-replicate values
    l1_strong_frequency: float = None
    l1_weak_frequency: float = None
    extras: dict = field(default_factory=dict)

    def mean(self, method):
        return float(np.mean(self.method_errors[method]))

    def stderr(self, method):
        e = np.asarray(self.method_errors[method])
        return float(e.std(ddof=1) / np.sqrt(e.size)) if e.size > 1 else 0.0

    def to_json_dict(self):
        out = {
            "config": self.config,
            "bayes_error": self.bayes,
            "methods": {
                m: {
                    "mean_error": self.mean(m),
                    "stderr": self.stderr(m),
                    "errors": list(map(float, self.method_errors[m])),
                    "best_tunings": list(map(float, self.best_tunings[m])),
                }
                for m in self.method_errors
            },
        }
        if self.l1_strong_frequency is not None:
            out["l1_strong_heredity_frequency"] = self.l1_strong_frequency
            out["l1_weak_heredity_frequency"] = self.l1_weak_frequency
        return out

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    def to_csv(self):
        """Table mirroring the papers' layout: one row per method plus Bayes."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "mean_error", "stderr"])
        for m in self.method_errors:
            w.writerow([m, f"{self.mean(m):.4f}", f"{self.stderr(m):.4f}"])
        w.writerow(["bayes", f"{self.bayes:.4f}", ""])
        return buf.getvalue()


def default_grid(method: str, n_effects: int):
    if method in NONPARAMETRIC_METHODS:
        # big-M budget form: linear grid up to "every theta at one"
        return list(np.linspace(0.0, float(n_effects), 30)[1:])
    return list(np.geomspace(1e-3, 1e3, 30))


def _oracle_best(fits_and_errors):
    """Smallest test error over the grid; ties keep the earliest grid point."""
    errs = [e for _, e, _ in fits_and_errors]
    best = int(np.argmin(errs))
    return fits_and_errors[best]


def _run_parametric_replicate(cfg, spec, methods, grids, rng, rep_seed, results):
    n = cfg["n_train"]
    Ztr, ytr = generate_example(spec, n, rng)
    Zte, yte = generate_example(spec, cfg["n_test"], rng)
    expansion, graph = expand_polynomial(spec.q, include_quadratic=True)
    Xtr = expansion.fit(Ztr).transform(Ztr)
    Xte = expansion.transform(Zte)
    p = Xtr.shape[1]

    init = None
    if any(m in methods for m in ("garrote", "shsvm", "whsvm")):
        lam_grid = default_lambda_grid(n, p, cfg["initial_grid_size"])
        _, lam0 = kfold_cv(Xtr, ytr, lambda A, b, v: fit_l2_svm(A, b, v),
                           lam_grid, cfg["cv_folds"], rep_seed)
        init = fit_l2_svm(Xtr, ytr, lam0)

    for m in methods:
        runs = []
        for val in grids[m]:
            if m == "l2":
                fit = fit_l2_svm(Xtr, ytr, val)
            elif m == "l1":
                fit = fit_l1_svm(Xtr, ytr, val)
            else:
                graph.policy = _POLICY[m]
                fit = fit_structured(Xtr, ytr, StructuredFitSpec(
                    init.coefficients, graph, expansion.column_map,
                    "lagrangian", val))
            err = generalization_error(decision_values(fit, Xte), yte)
            runs.append((fit, err, val))
        fit, err, val = _oracle_best(runs)
        results["errors"][m].append(err)
        results["tunings"][m].append(val)
        if m == "l1":
            active = active_effects_from_columns(fit.coefficients, expansion.column_map)
            results["l1_active"].append((active, graph.parents))


_NP_INITIAL_LAMBDAS = tuple(np.geomspace(1e-2, 1e2, 10))


def _run_nonparametric_replicate(cfg, spec, methods, grids, rng, rep_seed, results):
    n = cfg["n_train"]
    Ztr, ytr = generate_example(spec, n, rng)
    Zte, yte = generate_example(spec, cfg["n_test"], rng)
    nb = cfg["num_basis"]

    # bases depend only on the training sample, so share them across the
    # initial-ridge grid; each competitor is oracle-tuned over its whole
    # tuning surface (lambda0 x M for the structured fits, lambda for l2)
    inits = [fit_initial_nonparametric(Ztr, ytr, lam0, num_functions=nb)
             for lam0 in _NP_INITIAL_LAMBDAS]
    scores = [(init.effect_scores(Ztr), init.effect_scores(Zte)) for init in inits]

    bases = inits[0].bases
    Btr = Bte = None
    if "l2" in methods:
        Btr = basis_design(bases, Ztr)
        Bte = basis_design(bases, Zte)

    for m in methods:
        runs = []
        if m == "l2":
            for val in grids[m]:
                fit = fit_l2_svm_svd_reduced(Btr, ytr, val)
                err = generalization_error(decision_values(fit, Bte), yte)
                runs.append((fit, err, val))
        else:
            graph = nonparametric_graph(spec.q, _POLICY[m])
            for Str, Ste in scores:
                for val in grids[m]:
                    fit = fit_nonparametric_structured(Str, ytr, graph, "constraint", val)
                    err = generalization_error(decision_values(fit, Ste), yte)
                    runs.append((fit, err, val))
        _, err, val = _oracle_best(runs)
        results["errors"][m].append(err)
        results["tunings"][m].append(val)


def run_benchmark(config: dict) -> BenchmarkReport:
    cfg = load_config(config)
    spec = example_spec(cfg["example"], cfg["rho"])
    cfg["rho"] = spec.rho
    methods = list(cfg["methods"])
    nonparametric = cfg["example"] in NONPARAMETRIC_EXAMPLES
    if nonparametric:
        bad = [m for m in methods if m not in NONPARAMETRIC_METHODS + ("l2",)]
    else:
        bad = [m for m in methods if m not in PARAMETRIC_METHODS]
    if bad:
        raise ConfigError(
            f"method(s) {bad} not applicable to {cfg['example']}")

    n_effects = spec.q + spec.q * (spec.q - 1) // 2
    grids = {m: list(cfg["grids"].get(m) or default_grid(m, n_effects)) for m in methods}

    results = {"errors": {m: [] for m in methods},
               "tunings": {m: [] for m in methods},
               "l1_active": []}
    for rep in range(cfg["replications"]):
        ss = np.random.SeedSequence(entropy=cfg["seed"], spawn_key=(rep,))
        rng = np.random.default_rng(ss)
        rep_seed = ss.spawn(1)[0]
        if nonparametric:
            _run_nonparametric_replicate(cfg, spec, methods, grids, rng, rep_seed, results)
        else:
            _run_parametric_replicate(cfg, spec, methods, grids, rng, rep_seed, results)

    bayes = bayes_error(spec, cfg["bayes_mc"], np.random.SeedSequence(entropy=cfg["seed"], spawn_key=(0xB,)))

    report = BenchmarkReport(
        config={**cfg, "grids": {m: list(map(float, g)) for m, g in grids.items()}},
        bayes=bayes,
        method_errors=results["errors"],
        best_tunings=results["tunings"],
    )
    if results["l1_active"]:
        sets = [a for a, _ in results["l1_active"]]
        parents = results["l1_active"][0][1]
        from .expand import HeredityGraph
        g = HeredityGraph(parents)
        report.l1_strong_frequency = heredity_frequency(sets, g, "strong")
        report.l1_weak_frequency = heredity_frequency(sets, g, "weak")
    return report
