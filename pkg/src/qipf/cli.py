"""Command-line interface.

Failures exit with status 2 and print one line, ``error: <category>: <message>``,
to stderr.
"""

import argparse
import os
import sys

from . import pipeline
from .data import CORRUPTION_KINDS, CorruptionSpec, Dataset, corrupt, load_predictions, make_blobs, make_moons, save_predictions
from .exceptions import InvalidParameterError, QIPFError
from .metrics import evaluate
from .networks import ToyMLP, ensemble_score, mc_dropout_score, predict_raw, train, train_ensemble


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _sigma_factor(text):
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--sigma-factor must be 'auto' or a number, got {text!r}") from None


def _add_qipf_args(p):
    p.add_argument("--modes", type=int, default=4, help="number of Hermite modes (default 4)")
    p.add_argument("--sigma-factor", type=_sigma_factor, default="auto", help="'auto' or a multiplier on Silverman's width")
    p.add_argument("--factor-grid", type=_floats, default=None, help="comma-separated candidate factors for 'auto'")
    p.add_argument("--val-frac", type=float, default=0.2, help="held-out fraction for the factor search")
    p.add_argument("--downsample-n", type=int, default=6000, help="max inducing points (capped at train size)")
    p.add_argument("--sigma", type=float, default=None, help="absolute kernel width; overrides --sigma-factor")


def _add_dataset_args(p):
    p.add_argument("--dataset", default="blobs", help="dataset JSON path, or generator name: blobs | moons")
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--k", type=int, default=2, help="classes (blobs)")
    p.add_argument("--spread", type=float, default=0.3, help="within-class std (blobs)")
    p.add_argument("--noise", type=float, default=0.1, help="noise (moons)")


def _dataset(args):
    if os.path.exists(args.dataset):
        return Dataset.load(args.dataset)
    if args.dataset == "blobs":
        return make_blobs(args.n, args.k, args.spread, seed=args.seed)
    if args.dataset == "moons":
        return make_moons(args.n, args.noise, seed=args.seed)
    raise InvalidParameterError(f"--dataset must be a JSON file or one of blobs, moons; got {args.dataset!r}")


def _corrupted_test(dataset, args):
    spec = CorruptionSpec(args.corruption, args.severity)
    return spec, corrupt(dataset.X_test, spec)


def cmd_demo_sine(args):
    paths = pipeline.demo_sine(args.out, widths=args.widths, m=args.modes, grid=args.grid, n_samples=args.samples, plot=not args.no_plots)
    for path in paths:
        print(path)


def cmd_train(args):
    os.makedirs(args.out, exist_ok=True)
    dataset = _dataset(args)
    model = train(dataset, epochs=args.epochs, learning_rate=args.lr, seed=args.seed, dropout_rate=args.dropout)
    dataset.save(os.path.join(args.out, "dataset.json"))
    model.save(os.path.join(args.out, "model.json"))
    save_predictions(predict_raw(model, dataset.X_train, dataset.y_train), os.path.join(args.out, "train_preds.csv"))
    save_predictions(predict_raw(model, dataset.X_test, dataset.y_test), os.path.join(args.out, "test_preds.csv"))
    pipeline.write_config(
        os.path.join(args.out, "config.json"),
        {
            "subcommand": "train",
            "dataset": {"generator": dataset.generator, "seed": dataset.seed, "params": dataset.params},
            "epochs": args.epochs,
            "learning_rate": args.lr,
            "dropout": args.dropout,
            "seed": args.seed,
            "training_accuracy": model.training_accuracy_,
        },
    )
    print(f"training accuracy {model.training_accuracy_:.4f}")


def cmd_corrupt(args):
    dataset = Dataset.load(args.dataset)
    model = ToyMLP.load(args.model)
    spec, X = _corrupted_test(dataset, args)
    save_predictions(predict_raw(model, X, dataset.y_test), args.out)
    pipeline.write_config(
        pipeline._echo_path(args.out),
        {"subcommand": "corrupt", "dataset": args.dataset, "model": args.model, "corruption": spec.kind, "severity": spec.severity, "parameter": spec.parameter},
    )


def cmd_score(args):
    pipeline.score_files(
        args.train,
        args.test,
        args.out,
        m=args.modes,
        sigma_factor=args.sigma_factor,
        factor_grid=args.factor_grid,
        val_frac=args.val_frac,
        downsample_n=args.downsample_n,
        seed=args.seed,
        sigma=args.sigma,
    )


def cmd_evaluate(args):
    scores = pipeline.read_score_column(args.scores, args.column)
    preds = load_predictions(args.predictions)
    if scores.size != len(preds):
        raise InvalidParameterError(f"{args.scores} has {scores.size} rows but {args.predictions} has {len(preds)}")
    report = evaluate(scores, preds.errors, bins=args.bins, method=args.method, scores_file=args.scores, predictions_file=args.predictions)
    report.to_json(args.out)
    if args.curves_dir:
        os.makedirs(args.curves_dir, exist_ok=True)
        report.write_curves(os.path.join(args.curves_dir, "roc.csv"), os.path.join(args.curves_dir, "pr.csv"))
    pipeline.write_config(pipeline._echo_path(args.out), {"subcommand": "evaluate", **{k: v for k, v in vars(args).items() if k != "func"}})
    print(f"roc_auc={report.roc_auc!r} pr_auc={report.pr_auc!r} point_biserial={report.point_biserial!r}")


def cmd_baseline(args):
    dataset = Dataset.load(args.dataset)
    model = ToyMLP.load(args.model)
    spec, X = _corrupted_test(dataset, args)
    if args.method == "mc-dropout":
        scores = mc_dropout_score(model, X, rate=args.rate, T=args.mc_samples, seed=args.seed)
    else:
        if args.members:
            members = [ToyMLP.load(p) for p in args.members]
        else:
            params = model.get_params()
            members = train_ensemble(
                dataset,
                size=args.ensemble_size,
                seed=args.seed,
                epochs=params["epochs"],
                learning_rate=params["learning_rate"],
                hidden_layer_sizes=params["hidden_layer_sizes"],
                batch_size=params["batch_size"],
            )
        scores = ensemble_score(members, X)
    with open(args.out, "w") as fh:
        fh.write("score\n")
        for s in scores:
            fh.write(f"{float(s)!r}\n")
    pipeline.write_config(
        pipeline._echo_path(args.out),
        {"subcommand": "baseline", **{k: v for k, v in vars(args).items() if k != "func"}, "parameter": spec.parameter},
    )


def cmd_sweep(args):
    dataset = _dataset(args)
    if args.model:
        model = ToyMLP.load(args.model)
    else:
        model = train(dataset, epochs=args.epochs, learning_rate=args.lr, seed=args.seed)
    ensemble = [ToyMLP.load(p) for p in args.members] if args.members else None
    rows = pipeline.sweep(
        dataset,
        model,
        args.out,
        corruption=args.corruption,
        severities=args.severities,
        methods=args.methods,
        m=args.modes,
        sigma_factor=args.sigma_factor,
        factor_grid=args.factor_grid,
        val_frac=args.val_frac,
        downsample_n=args.downsample_n,
        dropout_rate=args.rate,
        mc_samples=args.mc_samples,
        ensemble_size=args.ensemble_size,
        ensemble=ensemble,
        seed=args.seed,
        plot=not args.no_plots,
    )
    for r in rows:
        print(f"{r['method']:<11} severity={r['severity']} errors={r['n_errors']:>3} roc_auc={r['roc_auc']:.4f} pr_auc={r['pr_auc']:.4f}")


def build_parser():
    parser = argparse.ArgumentParser(prog="qipf", description="Kernel-field uncertainty modes for classifier predictions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo-sine", help="IPF, QIPF and modes of a 50 Hz sine wave")
    p.add_argument("--widths", type=_floats, default=[0.15, 0.3, 0.5])
    p.add_argument("--modes", type=int, default=8)
    p.add_argument("--grid", default="-2:2:400", help="lo:hi:steps, giving steps + 1 points (write --grid=-2:2:400 for a negative lo)")
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--no-plots", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_demo_sine)

    p = sub.add_parser("train", help="generate a dataset and train the toy MLP")
    _add_dataset_args(p)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("corrupt", help="write raw predictions of the corrupted test split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--corruption", choices=CORRUPTION_KINDS, default="rotation")
    p.add_argument("--severity", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("score", help="QIPF modes and score for a test prediction file")
    p.add_argument("--train", required=True, help="training prediction CSV")
    p.add_argument("--test", required=True, help="test prediction CSV")
    _add_qipf_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", help="error-detection metrics for a score column")
    p.add_argument("--scores", required=True)
    p.add_argument("--predictions", required=True, help="prediction CSV the scores belong to")
    p.add_argument("--column", default="score")
    p.add_argument("--method", default="qipf")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--curves-dir", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="MC-Dropout or ensemble scores on the (corrupted) test split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=("mc-dropout", "ensemble"), required=True)
    p.add_argument("--rate", type=float, default=0.2)
    p.add_argument("--mc-samples", type=int, default=100)
    p.add_argument("--ensemble-size", type=int, default=10)
    p.add_argument("--members", nargs="*", default=None, help="ensemble member model files")
    p.add_argument("--corruption", choices=CORRUPTION_KINDS, default="rotation")
    p.add_argument("--severity", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("sweep", help="evaluate methods across corruption severities")
    _add_dataset_args(p)
    p.add_argument("--model", default=None, help="model JSON; trained from the dataset if omitted")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--corruption", choices=CORRUPTION_KINDS, default="rotation")
    p.add_argument("--severities", type=_ints, default=list(range(6)))
    p.add_argument("--methods", type=lambda t: [s for s in t.split(",") if s], default=list(pipeline.METHODS))
    _add_qipf_args(p)
    p.add_argument("--rate", type=float, default=0.2, help="MC-Dropout rate")
    p.add_argument("--mc-samples", type=int, default=100)
    p.add_argument("--ensemble-size", type=int, default=10)
    p.add_argument("--members", nargs="*", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-plots", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except QIPFError as exc:
        print(f"error: {exc.category}: {exc}".replace("\n", " "), file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: io: {exc}".replace("\n", " "), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
