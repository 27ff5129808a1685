"""End-to-end runs behind the CLI subcommands.

Every run writes its outputs plus a JSON echo of the configuration that
produced them.  CSV files are the numeric contract; SVGs are drawn from them.
"""

import csv
import json
import math
import os

import numpy as np

from .data import CorruptionSpec, corrupt, load_predictions
from .decomposition import calibrate_energies, decompose
from .estimator import QIPFUncertainty
from .exceptions import InvalidParameterError, ShapeError
from .kernel_field import KernelField, field_moments
from .metrics import evaluate
from .networks import ensemble_score, mc_dropout_score, predict_raw, train_ensemble
from .plotting import plot_metric_vs_severity, plot_sine_csv

METHODS = ("qipf", "mc-dropout", "ensemble")
TABLE_METRICS = ("roc_auc", "pr_auc", "point_biserial")


def write_config(path, config):
    with open(path, "w") as fh:
        json.dump(config, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _fmt(v):
    v = float(v)
    return repr(v) if math.isfinite(v) else "nan"


def sine_wave(n=512, freq=50.0, rate=512.0):
    """``n`` samples of a unit-amplitude sine wave at ``freq`` Hz."""
    return np.sin(2 * np.pi * freq * np.arange(n) / rate)


def parse_grid(spec):
    """``"lo:hi:steps"`` -> ``steps + 1`` evenly spaced points (``steps=0`` gives ``[lo]``)."""
    try:
        lo, hi, steps = spec.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise InvalidParameterError(f"grid must look like lo:hi:steps, got {spec!r}") from None
    if steps < 0 or (steps > 0 and not hi > lo):
        raise InvalidParameterError(f"invalid grid {spec!r}")
    if steps == 0:
        return np.array([lo])
    return np.linspace(lo, hi, steps + 1)


def demo_sine(out_dir, widths=(0.15, 0.3, 0.5), m=8, grid="-2:2:400", n_samples=512, freq=50.0, rate=512.0, plot=True):
    """IPF, base QIPF and the first ``m`` modes of a sine wave over a 1-D grid.

    Energies are calibrated on the grid itself.  Returns the CSV paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    xs = parse_grid(grid)
    samples = sine_wave(n_samples, freq, rate)
    paths = []
    for width in widths:
        field = KernelField(samples, width)
        energies = calibrate_energies(field, xs.reshape(-1, 1), m=m)
        spectrum = decompose(xs.reshape(-1, 1), field, energies)
        density = field_moments(xs.reshape(-1, 1), field).ipf
        path = os.path.join(out_dir, f"sine_sigma_{width:g}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "ipf", "qipf"] + [f"mode_{p}" for p in spectrum.orders])
            for i, x in enumerate(xs):
                w.writerow([_fmt(x), _fmt(density[i]), _fmt(spectrum.base_qipf[i])] + [_fmt(v) for v in spectrum.modes[i]])
        if plot:
            plot_sine_csv(path, path[:-4] + ".svg", title=f"kernel width {width:g}", clip=10.0)
        paths.append(path)
    write_config(
        os.path.join(out_dir, "config.json"),
        {
            "subcommand": "demo-sine",
            "widths": list(widths),
            "modes": m,
            "grid": grid,
            "samples": n_samples,
            "frequency": freq,
            "sample_rate": rate,
        },
    )
    return paths


def write_scores(spectrum, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["base_qipf"] + [f"mode_{p}" for p in spectrum.orders] + ["score"])
        for base, modes, score in zip(spectrum.base_qipf, spectrum.modes, spectrum.score):
            w.writerow([_fmt(base)] + [_fmt(v) for v in modes] + [_fmt(score)])


def read_score_column(path, column="score"):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if column not in (reader.fieldnames or []):
            raise InvalidParameterError(f"{path} has no column {column!r}")
        return np.array([float(r[column]) for r in reader])


def fit_qipf(train_preds, m=4, sigma_factor="auto", factor_grid=None, val_frac=0.2, downsample_n=6000, seed=0, mode_orders=None, sigma=None):
    kwargs = {} if factor_grid is None else {"factor_grid": tuple(factor_grid)}
    est = QIPFUncertainty(
        n_modes=m,
        mode_orders=mode_orders,
        sigma=sigma,
        sigma_factor=sigma_factor,
        val_frac=val_frac,
        downsample_n=downsample_n,
        random_state=seed,
        **kwargs,
    )
    return est.fit(train_preds.logits, train_preds.labels)


def _qipf_echo(est):
    return {
        "silverman_sigma": est.silverman_sigma_,
        "sigma_factor": est.sigma_factor_,
        "sigma": est.sigma_,
        "inducing_points": est.field_.n_points,
        "energies": {"base": est.energies_.base, "modes": list(est.energies_.modes)},
        "mode_orders": list(est.energies_.orders),
    }


def score_files(train_path, test_path, out_path, m=4, sigma_factor="auto", factor_grid=None, val_frac=0.2, downsample_n=6000, seed=0, sigma=None):
    """Score a test prediction file against a field built from training predictions."""
    train_preds = load_predictions(train_path)
    test_preds = load_predictions(test_path)
    if train_preds.n_classes != test_preds.n_classes:
        raise ShapeError(f"train has {train_preds.n_classes} logits per row, test has {test_preds.n_classes}")
    est = fit_qipf(train_preds, m, sigma_factor, factor_grid, val_frac, downsample_n, seed, sigma=sigma)
    spectrum = est.decompose(test_preds.logits)
    write_scores(spectrum, out_path)
    write_config(
        _echo_path(out_path),
        {
            "subcommand": "score",
            "train": train_path,
            "test": test_path,
            "modes": m,
            "sigma_policy": "fixed" if sigma is not None else sigma_factor,
            "factor_grid": list(est.factor_grid),
            "val_frac": val_frac,
            "downsample_n": downsample_n,
            "seed": seed,
            **_qipf_echo(est),
        },
    )
    return spectrum


def _echo_path(out_path):
    root, _ = os.path.splitext(out_path)
    return root + ".config.json"


def sweep(
    dataset,
    model,
    out_dir,
    corruption="rotation",
    severities=range(6),
    methods=METHODS,
    m=4,
    sigma_factor="auto",
    factor_grid=None,
    val_frac=0.2,
    downsample_n=6000,
    dropout_rate=0.2,
    mc_samples=100,
    ensemble_size=10,
    ensemble=None,
    seed=0,
    plot=True,
    extra_config=None,
):
    """Corrupt the test split at each severity and evaluate every method.

    All methods are judged against the errors of ``model`` itself.  The
    ensemble is trained here (seeds ``seed + 1 ...``) unless ``ensemble``
    supplies members.  Returns the per-severity rows.
    """
    methods = tuple(methods)
    for method in methods:
        if method not in METHODS:
            raise InvalidParameterError(f"unknown method {method!r}; choose from {METHODS}")
    severities = [int(s) for s in severities]
    specs = [CorruptionSpec(corruption, s) for s in severities]
    os.makedirs(os.path.join(out_dir, "reports"), exist_ok=True)

    train_preds = predict_raw(model, dataset.X_train, dataset.y_train)
    est = None
    if "qipf" in methods:
        est = fit_qipf(train_preds, m, sigma_factor, factor_grid, val_frac, downsample_n, seed)
    if "ensemble" in methods and ensemble is None:
        params = model.get_params()
        params.pop("random_state")
        epochs = params.pop("epochs")
        lr = params.pop("learning_rate")
        ensemble = train_ensemble(dataset, size=ensemble_size, seed=seed + 1, epochs=epochs, learning_rate=lr, **params)
    if "ensemble" in methods and len(ensemble) < 2:
        raise InvalidParameterError("ensemble needs at least 2 members")

    rows = []
    for spec in specs:
        X = corrupt(dataset.X_test, spec)
        preds = predict_raw(model, X, dataset.y_test)
        errors = preds.errors
        for method in methods:
            if method == "qipf":
                scores = est.uncertainty(preds.logits)
            elif method == "mc-dropout":
                scores = mc_dropout_score(model, X, rate=dropout_rate, T=mc_samples, seed=seed + spec.severity)
            else:
                scores = ensemble_score(ensemble, X)
            report = evaluate(
                scores,
                errors,
                method=method,
                corruption=spec.kind,
                severity=spec.severity,
                parameter=spec.parameter,
                seed=seed,
            )
            report.to_json(os.path.join(out_dir, "reports", f"{method}_{spec.kind}_s{spec.severity}.json"))
            rows.append(
                {
                    "method": method,
                    "severity": spec.severity,
                    "parameter": spec.parameter,
                    "n": int(errors.size),
                    "n_errors": int(errors.sum()),
                    "mean_score": float(np.mean(scores)),
                    "roc_auc": report.roc_auc,
                    "pr_auc": report.pr_auc,
                    "point_biserial": report.point_biserial,
                }
            )

    fields = ["method", "severity", "parameter", "n", "n_errors", "mean_score", *TABLE_METRICS]
    with open(os.path.join(out_dir, "metrics_by_severity.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([r["method"], r["severity"], _fmt(r["parameter"]), r["n"], r["n_errors"]] + [_fmt(r[k]) for k in fields[5:]])

    with open(os.path.join(out_dir, "table.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method"] + [f"{k}_{stat}" for k in TABLE_METRICS for stat in ("mean", "std")])
        for method in methods:
            cells = []
            for k in TABLE_METRICS:
                vals = np.array([r[k] for r in rows if r["method"] == method], dtype=float)
                vals = vals[np.isfinite(vals)]
                cells += [_fmt(vals.mean()), _fmt(vals.std())] if vals.size else ["nan", "nan"]
            w.writerow([method] + cells)

    if plot:
        for k in TABLE_METRICS:
            finite = [r for r in rows if math.isfinite(r[k])]
            plot_metric_vs_severity(finite, k, os.path.join(out_dir, f"{k}_vs_severity.svg"), title=corruption)

    config = {
        "subcommand": "sweep",
        "corruption": corruption,
        "severities": severities,
        "methods": list(methods),
        "modes": m,
        "sigma_policy": sigma_factor,
        "val_frac": val_frac,
        "downsample_n": downsample_n,
        "dropout_rate": dropout_rate,
        "mc_samples": mc_samples,
        "ensemble_size": None if ensemble is None else len(ensemble),
        "seed": seed,
        "dataset": {"generator": dataset.generator, "seed": dataset.seed, "params": dataset.params},
        "model": {"layer_sizes": model.layer_sizes_, "params": model.get_params()},
    }
    if est is not None:
        config["qipf"] = _qipf_echo(est)
    config.update(extra_config or {})
    write_config(os.path.join(out_dir, "config.json"), config)
    return rows
