"""End-to-end CLI coverage on a small pipeline, including exit codes."""

import numpy as np
import pytest

from credro.cli import main
from credro.io import read_predictions, read_uq_csv


def run(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """gen-data -> train -> predict for a small binary problem."""
    root = tmp_path_factory.mktemp("pipe")
    (root / "id.cfg").write_text(
        "kind = blobs\nn = 400\nclasses = 2\nradius = 1.0\nsigma = 0.3\nseed = 5\n"
    )
    (root / "ood.cfg").write_text(
        "kind = ring_ood\nn = 200\nclasses = 2\nradius = 1.0\nsigma = 0.3\nseed = 6\n"
    )
    (root / "train.cfg").write_text(
        "delta_g = 0.5\nensemble_size = 3\nepochs = 5\nseed = 11\n"
    )
    assert run("gen-data", "--spec", str(root / "id.cfg"), "--out", str(root / "id.csv")) == 0
    assert run("gen-data", "--spec", str(root / "ood.cfg"), "--out", str(root / "ood.csv")) == 0
    assert (
        run(
            "train",
            "--config", str(root / "train.cfg"),
            "--data", str(root / "id.csv"),
            "--out", str(root / "model"),
        )
        == 0
    )
    for name in ("id", "ood"):
        assert (
            run(
                "predict",
                "--model-dir", str(root / "model"),
                "--data", str(root / f"{name}.csv"),
                "--out", str(root / f"pred_{name}.csv"),
            )
            == 0
        )
    return root


class TestPipeline:
    def test_predictions_well_formed(self, pipeline):
        pred = read_predictions(pipeline / "pred_id.csv")
        assert pred.n_members == 3
        assert pred.n_classes == 2
        assert pred.n_instances == 400

    def test_uq_width_on_binary(self, pipeline):
        out = pipeline / "uq_width.csv"
        assert (
            run("uq", "--pred", str(pipeline / "pred_id.csv"), "--measure", "width",
                "--out", str(out))
            == 0
        )
        _, _, measure, values = read_uq_csv(out)
        assert measure == "width"
        assert values.size == 400
        assert np.all((values >= 0) & (values <= 1))

    def test_uq_auto_resolves_to_width_for_binary(self, pipeline):
        out = pipeline / "uq_auto.csv"
        assert (
            run("uq", "--pred", str(pipeline / "pred_id.csv"), "--out", str(out)) == 0
        )
        _, _, measure, _ = read_uq_csv(out)
        assert measure == "width"

    def test_eval_ood_report(self, pipeline):
        for name in ("id", "ood"):
            assert (
                run("uq", "--pred", str(pipeline / f"pred_{name}.csv"),
                    "--measure", "mi", "--out", str(pipeline / f"uq_{name}.csv"))
                == 0
            )
        report = pipeline / "ood_report.csv"
        assert (
            run("eval-ood", "--id", str(pipeline / "uq_id.csv"),
                "--ood", str(pipeline / "uq_ood.csv"), "--out", str(report))
            == 0
        )
        text = report.read_text().splitlines()
        assert text[0] == "metric,value"
        auroc_line = next(l for l in text if l.startswith("auroc,"))
        assert 0.0 <= float(auroc_line.split(",")[1]) <= 1.0

    def test_eval_ood_perfectly_separated(self, pipeline, tmp_path):
        from credro.io import write_uq_csv

        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_uq_csv(a, range(5), [0] * 5, "mi", [0.1, 0.2, 0.1, 0.15, 0.12])
        write_uq_csv(b, range(5), [-1] * 5, "mi", [0.9, 0.8, 0.85, 0.95, 0.99])
        report = tmp_path / "r.csv"
        assert run("eval-ood", "--id", str(a), "--ood", str(b), "--out", str(report)) == 0
        assert "auroc,1.0" in report.read_text()

    def test_eval_select_report(self, pipeline):
        report = pipeline / "select_report.csv"
        assert (
            run("eval-select", "--pred", str(pipeline / "pred_id.csv"),
                "--measure", "width", "--out", str(report))
            == 0
        )
        lines = report.read_text().splitlines()
        assert lines[0] == "metric,value"
        blank = lines.index("")
        header = lines[blank + 1]
        assert header.startswith("rejection_rate,accuracy_pct")
        curve_rows = lines[blank + 2 :]
        assert len(curve_rows) == 101
        first = curve_rows[0].split(",")
        last = curve_rows[-1].split(",")
        assert float(first[0]) == 0.0
        assert float(last[0]) == 1.0
        assert float(last[1]) == 100.0


class TestExitCodes:
    def test_unknown_flag_is_usage_error(self, pipeline):
        assert run("uq", "--nope", "x") == 1

    def test_unknown_command_is_usage_error(self):
        assert run("frobnicate") == 1

    def test_missing_file_is_usage_error(self, tmp_path):
        assert (
            run("uq", "--pred", str(tmp_path / "absent.csv"),
                "--out", str(tmp_path / "o.csv"))
            == 1
        )

    def test_malformed_file_is_data_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("instance_id,label,member,p_0,p_1\n0,1,0,0.9,0.6\n")
        assert run("uq", "--pred", str(bad), "--out", str(tmp_path / "o.csv")) == 2

    def test_width_on_multiclass_is_data_error(self, tmp_path):
        from credro.io import Predictions, write_predictions

        probs = np.full((2, 2, 3), 1 / 3)
        pred = Predictions(np.arange(2), np.zeros(2, dtype=np.int64), probs)
        path = tmp_path / "p3.csv"
        write_predictions(path, pred)
        assert (
            run("uq", "--pred", str(path), "--measure", "width",
                "--out", str(tmp_path / "o.csv"))
            == 2
        )

    def test_unlabeled_training_data_rejected(self, pipeline, tmp_path):
        assert (
            run("train", "--config", str(pipeline / "train.cfg"),
                "--data", str(pipeline / "ood.csv"), "--out", str(tmp_path / "m"))
            == 2
        )


class TestOracleCheckCommand:
    def test_passes_with_small_trial_count(self, capsys):
        assert run("oracle-check", "--trials", "12", "--seed", "3") == 0
        out = capsys.readouterr().out
        assert "all oracle checks passed" in out


class TestDeterminism:
    def test_training_outputs_byte_identical_across_worker_counts(self, pipeline, tmp_path):
        a, b = tmp_path / "ma", tmp_path / "mb"
        for out, workers in ((a, "1"), (b, "3")):
            assert (
                run("train", "--config", str(pipeline / "train.cfg"),
                    "--data", str(pipeline / "id.csv"), "--out", str(out),
                    "--workers", workers)
                == 0
            )
        files_a = sorted(p.name for p in a.iterdir())
        files_b = sorted(p.name for p in b.iterdir())
        assert files_a == files_b
        for name in files_a:
            assert (a / name).read_bytes() == (b / name).read_bytes()
