import csv
import json

import numpy as np
import pytest

from qipf.cli import main
from qipf.data import PredictionSet, load_predictions, save_predictions
from qipf.estimator import QIPFUncertainty
from qipf.pipeline import parse_grid, read_score_column


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    out = tmp_path_factory.mktemp("train")
    assert main(["train", "--dataset", "blobs", "--spread", "0.8", "--epochs", "60", "--seed", "7", "--out", str(out)]) == 0
    return out


def sweep_args(trained, out):
    return [
        "sweep", "--dataset", str(trained / "dataset.json"), "--model", str(trained / "model.json"),
        "--severities", "0,3,5", "--mc-samples", "10", "--ensemble-size", "2", "--epochs", "60",
        "--sigma-factor", "1.0", "--seed", "1", "--out", str(out),
    ]  # fmt: skip


class TestGrid:
    def test_points(self):
        assert parse_grid("-2:2:400").size == 401
        assert parse_grid("0:1:0").tolist() == [0.0]
        assert parse_grid("0:1:1").tolist() == [0.0, 1.0]

    def test_bad(self):
        with pytest.raises(Exception):
            parse_grid("1:2")


class TestDemoSine:
    def test_outputs(self, tmp_path, capsys):
        assert main(["demo-sine", "--widths", "0.15,0.3,0.5", "--grid=-2:2:400", "--out", str(tmp_path)]) == 0
        for w in ("0.15", "0.3", "0.5"):
            table = rows(tmp_path / f"sine_sigma_{w}.csv")
            assert len(table) == 402
            assert table[0] == ["x", "ipf", "qipf"] + [f"mode_{p}" for p in range(1, 9)]
            assert (tmp_path / f"sine_sigma_{w}.svg").exists()
        assert json.loads((tmp_path / "config.json").read_text())["modes"] == 8

    def test_single_point_grid(self, tmp_path):
        assert main(["demo-sine", "--widths", "0.3", "--grid", "0:1:0", "--no-plots", "--out", str(tmp_path)]) == 0
        assert len(rows(tmp_path / "sine_sigma_0.3.csv")) == 2

    def test_replot_from_csv(self, tmp_path):
        from qipf.plotting import plot_sine_csv

        main(["demo-sine", "--widths", "0.3", "--grid=-1:1:50", "--out", str(tmp_path)])
        csv_path = tmp_path / "sine_sigma_0.3.csv"
        before = csv_path.read_bytes()
        plot_sine_csv(str(csv_path), str(tmp_path / "again.svg"), title="kernel width 0.3", clip=10.0)
        assert csv_path.read_bytes() == before
        assert (tmp_path / "again.svg").read_bytes() == (tmp_path / "sine_sigma_0.3.svg").read_bytes()


class TestScore:
    def test_single_row_self(self, tmp_path):
        path = tmp_path / "one.csv"
        save_predictions(PredictionSet([[0.3, 1.2]], [1]), path)
        out = tmp_path / "scores.csv"
        assert main(["score", "--train", str(path), "--test", str(path), "--sigma", "0.5", "--out", str(out)]) == 0
        table = rows(out)
        assert table[0] == ["base_qipf", "mode_1", "mode_2", "mode_3", "mode_4", "score"]
        assert [float(v) for v in table[1]] == [0.0] * 6

    def test_library_agreement(self, trained, tmp_path):
        out = tmp_path / "scores.csv"
        args = ["score", "--train", str(trained / "train_preds.csv"), "--test", str(trained / "test_preds.csv"), "--out", str(out)]
        assert main(args) == 0
        train = load_predictions(trained / "train_preds.csv")
        test = load_predictions(trained / "test_preds.csv")
        est = QIPFUncertainty().fit(train.logits, train.labels)
        assert np.array_equal(read_score_column(out), est.uncertainty(test.logits))
        echo = json.loads((tmp_path / "scores.config.json").read_text())
        assert echo["sigma_policy"] == "auto"
        assert echo["silverman_sigma"] == est.silverman_sigma_ and echo["sigma_factor"] == est.sigma_factor_

    def test_dimension_mismatch(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        save_predictions(PredictionSet([[0.0, 1.0], [1.0, 0.0]], [0, 1]), a)
        save_predictions(PredictionSet([[0.0, 1.0, 2.0]], [0]), b)
        assert main(["score", "--train", str(a), "--test", str(b), "--sigma", "1", "--out", str(tmp_path / "s.csv")]) == 2
        err = capsys.readouterr().err.strip()
        assert err.startswith("error: shape:") and "\n" not in err


class TestPipeline:
    def test_corrupt_and_evaluate(self, trained, tmp_path, capsys):
        preds = tmp_path / "rot3.csv"
        assert main(["corrupt", "--dataset", str(trained / "dataset.json"), "--model", str(trained / "model.json"),
                     "--corruption", "rotation", "--severity", "3", "--out", str(preds)]) == 0  # fmt: skip
        scores = tmp_path / "scores.csv"
        assert main(["score", "--train", str(trained / "train_preds.csv"), "--test", str(preds), "--sigma-factor", "1", "--out", str(scores)]) == 0
        report = tmp_path / "report.json"
        assert main(["evaluate", "--scores", str(scores), "--predictions", str(preds), "--curves-dir", str(tmp_path / "c"), "--out", str(report)]) == 0
        data = json.loads(report.read_text())
        assert data["metadata"]["method"] == "qipf"
        assert (tmp_path / "c" / "roc.csv").exists()

    @pytest.mark.parametrize("method", ["mc-dropout", "ensemble"])
    def test_baseline(self, trained, tmp_path, method):
        out = tmp_path / "b.csv"
        args = ["baseline", "--dataset", str(trained / "dataset.json"), "--model", str(trained / "model.json"),
                "--method", method, "--mc-samples", "5", "--ensemble-size", "2", "--out", str(out)]  # fmt: skip
        assert main(args) == 0
        assert np.all(read_score_column(out) >= 0)
        assert (tmp_path / "b.config.json").exists()

    def test_missing_file(self, tmp_path, capsys):
        assert main(["evaluate", "--scores", str(tmp_path / "nope.csv"), "--predictions", "x", "--out", str(tmp_path / "r.json")]) == 2
        assert capsys.readouterr().err.startswith("error: io:")


class TestSweep:
    def test_schema_and_determinism(self, trained, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(sweep_args(trained, a)) == 0
        assert main(sweep_args(trained, b)) == 0
        for name in ("table.csv", "metrics_by_severity.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        table = rows(a / "table.csv")
        assert [r[0] for r in table[1:]] == ["qipf", "mc-dropout", "ensemble"]
        assert all(len(r) == 7 for r in table)
        for method in ("qipf", "mc-dropout", "ensemble"):
            for s in (0, 3, 5):
                assert (a / "reports" / f"{method}_rotation_s{s}.json").exists()
        for metric in ("roc_auc", "pr_auc", "point_biserial"):
            assert (a / f"{metric}_vs_severity.svg").exists()
        echo = json.loads((a / "config.json").read_text())
        assert echo["severities"] == [0, 3, 5] and echo["qipf"]["sigma_factor"] == 1.0

    def test_clean_severity(self, trained, tmp_path):
        out = tmp_path / "s0"
        args = sweep_args(trained, out)
        args[args.index("0,3,5")] = "0"
        assert main(args) == 0
        by_sev = rows(out / "metrics_by_severity.csv")
        assert {r[1] for r in by_sev[1:]} == {"0"}
        test = load_predictions(trained / "test_preds.csv")
        assert all(int(r[4]) == int(test.errors.sum()) for r in by_sev[1:])

    def test_single_member_ensemble(self, trained, tmp_path, capsys):
        args = sweep_args(trained, tmp_path / "x") + ["--members", str(trained / "model.json")]
        assert main(args) == 2
        assert capsys.readouterr().err.startswith("error: invalid-parameter:")

    def test_unknown_method(self, trained, tmp_path):
        assert main(sweep_args(trained, tmp_path / "x") + ["--methods", "qipf,foo"]) == 2
