"""Tests for the command-line interface and its data plumbing.

The CLI is exercised in-process through ``cli.main(argv)``.  Oracles:
  * hand-written LIBSVM lines with known dense equivalents;
  * a serializer round-trip on a synthetic 100-line file;
  * re-running a command with the same seed must reproduce output files
    byte for byte;
  * fit/predict through the CLI must agree with the same pipeline run
    directly against the library.
"""

import json
import math

import numpy as np
import pytest

from polyakern import cli, learn
from polyakern.distributions import Gamma
from polyakern.errors import ParseError
from polyakern.feature_maps import BINNING, FeatureMapConfig, build_map, featurize
from polyakern.polya_kernels import KernelSpec, eval_ft, eval_kernel, parse_kernel_spec
from polyakern.rng import RandomStream


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n")


class TestParseLibsvm:
    def test_basic_line(self, tmp_path):
        f = tmp_path / "d.txt"
        write_lines(f, ["1 1:0.5 3:-1"])
        ds = cli.parse_libsvm(f)
        np.testing.assert_array_equal(ds.points, [[0.5, 0.0, -1.0]])
        np.testing.assert_array_equal(ds.targets, [1.0])

    def test_empty_feature_list_gives_zero_vector(self, tmp_path):
        f = tmp_path / "d.txt"
        write_lines(f, ["2.5 2:1.0", "3.5"])
        ds = cli.parse_libsvm(f)
        np.testing.assert_array_equal(ds.points[1], [0.0, 0.0])
        assert ds.targets[1] == 3.5

    def test_width_is_max_index_across_lines(self, tmp_path):
        f = tmp_path / "d.txt"
        write_lines(f, ["0 1:1", "1 5:2"])
        ds = cli.parse_libsvm(f)
        assert ds.points.shape == (2, 5)
        assert ds.points[1, 4] == 2.0

    def test_blank_lines_skipped(self, tmp_path):
        f = tmp_path / "d.txt"
        f.write_text("1 1:1\n\n2 1:2\n")
        ds = cli.parse_libsvm(f)
        assert len(ds.targets) == 2

    @pytest.mark.parametrize(
        "line", ["x 1:1", "1 one:1", "1 1:abc", "1 2", "1 0:5"]
    )
    def test_malformed_second_line_reports_line_number(self, tmp_path, line):
        f = tmp_path / "d.txt"
        write_lines(f, ["1 1:1", line])
        with pytest.raises(ParseError, match="line 2"):
            cli.parse_libsvm(f)

    def test_empty_file_rejected(self, tmp_path):
        f = tmp_path / "d.txt"
        f.write_text("\n\n")
        with pytest.raises(ParseError):
            cli.parse_libsvm(f)

    def test_write_read_roundtrip_on_synthetic_file(self, tmp_path):
        stream = RandomStream(404)
        n, d = 100, 7
        dense = stream.normal(n * d).reshape(n, d)
        dense[stream.uniform(n * d).reshape(n, d) < 0.5] = 0.0  # make it sparse
        targets = stream.normal(n)
        dense[0, d - 1] = 1.25  # pin the width even if the last column thins out
        f = tmp_path / "round.txt"
        cli.write_libsvm(f, dense, targets)
        ds = cli.parse_libsvm(f)
        np.testing.assert_array_equal(ds.points, dense)
        np.testing.assert_array_equal(ds.targets, targets)


class TestNormalize:
    def test_train_column_spans_unit_interval(self):
        X = np.array([[0.0], [10.0], [5.0]])
        ds = learn.Dataset.full(X, np.zeros(3))
        out = cli.normalize(ds)
        np.testing.assert_allclose(out.points[:, 0], [-1.0, 1.0, 0.0])

    def test_constant_column_maps_to_zero(self):
        X = np.array([[3.0, 1.0], [3.0, 2.0]])
        ds = learn.Dataset.full(X, np.zeros(2))
        out = cli.normalize(ds)
        np.testing.assert_array_equal(out.points[:, 0], [0.0, 0.0])

    def test_map_is_fit_on_train_rows_only(self):
        X = np.array([[0.0], [10.0], [20.0]])
        ds = learn.Dataset(X, np.zeros(3), train_idx=[0, 1], test_idx=[2])
        out = cli.normalize(ds)
        # Train spans {0,10} → [−1,1]; the held-out 20 exceeds the range.
        np.testing.assert_allclose(out.points[:, 0], [-1.0, 1.0, 3.0])

    def test_empty_train_rejected(self):
        ds = learn.Dataset(np.zeros((2, 1)), np.zeros(2), train_idx=[], test_idx=[0, 1])
        with pytest.raises(ValueError):
            cli.normalize(ds)


class TestKernelCommands:
    def test_eval_matches_library(self, tmp_path, capsys):
        spec_text = "gamma:s=2,theta=1"
        assert cli.main(["kernel", "eval", "--kernel", spec_text, "0", "0.5", "2"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "r,k"
        spec = parse_kernel_spec(spec_text)
        for line, r in zip(lines[1:], [0.0, 0.5, 2.0]):
            got_r, got_k = map(float, line.split(","))
            assert got_r == r
            assert got_k == pytest.approx(eval_kernel(spec, r), abs=1e-15)

    def test_ft_spot_value_log_two(self, capsys):
        assert cli.main(["kernel", "ft", "--kernel", "gamma:s=1,theta=1", "1"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "t,ft"
        assert float(lines[1].split(",")[1]) == pytest.approx(math.log(2.0), abs=1e-9)

    def test_table_has_three_columns(self, tmp_path):
        out = tmp_path / "table.csv"
        code = cli.main([
            "kernel", "table", "--kernel", "rayleigh:sigma=1",
            "--max", "4", "--points", "9", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "r,k,ft"
        assert len(lines) == 10
        first = lines[1].split(",")
        assert float(first[0]) == 0.0
        assert float(first[1]) == 1.0
        spec = parse_kernel_spec("rayleigh:sigma=1")
        r, k, ft = map(float, lines[4].split(","))
        assert k == pytest.approx(eval_kernel(spec, r), abs=1e-15)
        assert ft == pytest.approx(eval_ft(spec, r).value, abs=1e-12)

    def test_bad_kernel_spec_is_single_line_error(self, capsys):
        code = cli.main(["kernel", "eval", "--kernel", "nosuch:a=1", "1"])
        assert code != 0
        err_lines = capsys.readouterr().err.strip().splitlines()
        assert len(err_lines) == 1
        record = json.loads(err_lines[0])
        assert "error" in record


def make_regression_file(path, seed=11, n=60, d=2):
    stream = RandomStream(seed)
    X = stream.uniform(n * d).reshape(n, d) * 4.0
    y = np.sin(X[:, 0]) + 0.5 * np.cos(X[:, 1 % d]) + 0.05 * stream.normal(n)
    cli.write_libsvm(path, X, y)
    return X, y


def make_classification_file(path, seed=12, per_class=20, classes=2):
    stream = RandomStream(seed)
    centers = np.array([[0.0, 0.0], [4.0, 4.0], [-4.0, 4.0]])[:classes]
    pts, labels = [], []
    for idx, center in enumerate(centers):
        pts.append(center + 0.4 * stream.child(idx).normal(2 * per_class).reshape(per_class, 2))
        labels.append(np.full(per_class, float(idx)))
    X = np.vstack(pts)
    y = np.concatenate(labels)
    cli.write_libsvm(path, X, y)
    return X, y


class TestFeatures:
    def test_binning_features_and_metadata(self, tmp_path):
        data = tmp_path / "d.txt"
        make_regression_file(data, n=12)
        prefix = tmp_path / "feat"
        code = cli.main([
            "features", str(data), "--map", "binning",
            "--kernel", "gamma:s=2,theta=1;tau=1", "--copies", "8", "--seed", "5",
            "--out", str(prefix),
        ])
        assert code == 0
        lines = (tmp_path / "feat.features.txt").read_text().strip().splitlines()
        assert len(lines) == 12
        for line in lines:
            entries = line.split()
            assert len(entries) == 8  # one nonzero per copy
            for entry in entries:
                row, value = entry.split(":")
                assert int(row) >= 0
                assert float(value) == pytest.approx(1.0 / math.sqrt(8.0))
        meta = json.loads((tmp_path / "feat.meta.json").read_text())
        assert meta["kind"] == "binning"
        assert meta["copies"] == 8
        assert meta["seed"] == 5
        assert "gamma" in meta["kernel"]

    def test_fourier_features_dense(self, tmp_path):
        data = tmp_path / "d.txt"
        make_regression_file(data, n=6)
        prefix = tmp_path / "rf"
        code = cli.main([
            "features", str(data), "--map", "fourier_real",
            "--kernel", "cauchy:scale=1", "--copies", "4", "--seed", "3",
            "--out", str(prefix),
        ])
        assert code == 0
        lines = (tmp_path / "rf.features.txt").read_text().strip().splitlines()
        assert len(lines) == 6
        assert all(len(line.split()) == 4 for line in lines)
        values = [float(e.split(":")[1]) for e in lines[0].split()]
        assert all(abs(v) <= math.sqrt(2.0 / 4.0) + 1e-12 for v in values)

    def test_features_runs_are_byte_identical(self, tmp_path):
        data = tmp_path / "d.txt"
        make_regression_file(data, n=10)
        outputs = []
        for name in ("a", "b"):
            prefix = tmp_path / name
            assert cli.main([
                "features", str(data), "--map", "binning",
                "--kernel", "gamma:s=2,theta=1", "--copies", "4", "--seed", "9",
                "--out", str(prefix),
            ]) == 0
            outputs.append((tmp_path / f"{name}.features.txt").read_bytes())
        assert outputs[0] == outputs[1]

    def test_env_var_sets_default_seed(self, tmp_path, monkeypatch):
        monkeypatch.setenv("POLYAKERN_SEED", "4242")
        data = tmp_path / "d.txt"
        make_regression_file(data, n=5)
        prefix = tmp_path / "env"
        assert cli.main([
            "features", str(data), "--map", "binning",
            "--kernel", "gamma:s=2,theta=1", "--copies", "2", "--out", str(prefix),
        ]) == 0
        meta = json.loads((tmp_path / "env.meta.json").read_text())
        assert meta["seed"] == 4242


class TestApproxError:
    def test_synthetic_curves(self, tmp_path):
        out = tmp_path / "err.csv"
        code = cli.main([
            "approx-error", "--kernel", "gamma:s=2,theta=1", "--map",
            "fourier_complex,binning", "--copies", "1,4", "--trials", "3",
            "--seed", "7", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "kind,copies,theory,empirical_mean,empirical_stderr"
        assert len(lines) == 5  # 2 kinds × 2 sizes
        rows = [line.split(",") for line in lines[1:]]
        by_key = {(r[0], int(r[1])): [float(v) for v in r[2:]] for r in rows}
        # Binning beats the complex Fourier map in theory for this kernel.
        assert by_key[("binning", 4)][0] < by_key[("fourier_complex", 4)][0]
        # Theory is a relative error in (0, 1]-ish range and shrinks with D.
        assert by_key[("binning", 4)][0] < by_key[("binning", 1)][0]

    def test_reruns_identical(self, tmp_path):
        args = [
            "approx-error", "--kernel", "gamma:s=2,theta=1", "--map", "binning",
            "--copies", "2", "--trials", "2", "--seed", "3",
        ]
        outs = []
        for name in ("x.csv", "y.csv"):
            out = tmp_path / name
            assert cli.main(args + ["--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestFitPredict:
    def test_regression_fit_predict_matches_library(self, tmp_path):
        data = tmp_path / "train.txt"
        make_regression_file(data, seed=21, n=40)
        model_path = tmp_path / "model.json"
        assert cli.main([
            "fit", str(data), "--task", "regression", "--map", "binning",
            "--kernel", "gamma:s=2,theta=1", "--tau", "1.0", "--copies", "16",
            "--lambda", "0.1", "--seed", "13", "--out", str(model_path),
        ]) == 0
        bundle = json.loads(model_path.read_text())
        assert bundle["task"] == "regression"
        assert bundle["map"]["kind"] == "binning"

        preds_path = tmp_path / "preds.csv"
        assert cli.main([
            "predict", str(data), "--model", str(model_path), "--out", str(preds_path),
        ]) == 0
        lines = preds_path.read_text().strip().splitlines()
        assert lines[0] == "index,prediction"
        got = np.array([float(line.split(",")[1]) for line in lines[1:]])

        # Replicate the pipeline directly against the library.
        ds = cli.normalize(cli.parse_libsvm(data))
        spec = KernelSpec(Gamma(s=2.0, theta=1.0), tau=1.0)
        cfg = FeatureMapConfig(kind=BINNING, kernel=spec, dim=2, copies=16, seed=13)
        state = build_map(cfg)
        batch = featurize(state, ds.points)
        model = learn.fit(state, batch, ds.targets, lam=0.1)
        expected = learn.predict(model, ds.points)
        np.testing.assert_allclose(got, expected, atol=1e-9)

    def test_binary_classification_accuracy(self, tmp_path):
        data = tmp_path / "train.txt"
        X, y = make_classification_file(data, classes=2)
        model_path = tmp_path / "model.json"
        assert cli.main([
            "fit", str(data), "--task", "binary", "--map", "binning",
            "--kernel", "gamma:s=2,theta=1", "--copies", "32", "--lambda", "0.1",
            "--seed", "3", "--out", str(model_path),
        ]) == 0
        preds_path = tmp_path / "p.csv"
        assert cli.main([
            "predict", str(data), "--model", str(model_path), "--out", str(preds_path),
        ]) == 0
        lines = preds_path.read_text().strip().splitlines()[1:]
        got = np.array([float(line.split(",")[1]) for line in lines])
        assert (got == y).mean() >= 0.9

    def test_multiclass_runs_and_stores_classes(self, tmp_path):
        data = tmp_path / "train.txt"
        X, y = make_classification_file(data, classes=3, per_class=15)
        model_path = tmp_path / "model.json"
        assert cli.main([
            "fit", str(data), "--task", "multiclass", "--map", "binning",
            "--kernel", "gamma:s=2,theta=1", "--copies", "32", "--lambda", "0.1",
            "--seed", "4", "--out", str(model_path),
        ]) == 0
        bundle = json.loads(model_path.read_text())
        assert bundle["classes"] == [0.0, 1.0, 2.0]

    def test_binary_task_rejects_three_classes(self, tmp_path):
        data = tmp_path / "train.txt"
        make_classification_file(data, classes=3, per_class=5)
        code = cli.main([
            "fit", str(data), "--task", "binary", "--map", "binning",
            "--kernel", "gamma:s=2,theta=1", "--copies", "4", "--lambda", "0.1",
            "--out", str(tmp_path / "m.json"),
        ])
        assert code != 0

    def test_fourier_regression_roundtrip(self, tmp_path):
        data = tmp_path / "train.txt"
        make_regression_file(data, seed=22, n=30)
        model_path = tmp_path / "model.json"
        assert cli.main([
            "fit", str(data), "--task", "regression", "--map", "fourier_real",
            "--kernel", "cauchy:scale=1", "--copies", "24", "--lambda", "0.1",
            "--seed", "6", "--out", str(model_path),
        ]) == 0
        preds_path = tmp_path / "p.csv"
        assert cli.main([
            "predict", str(data), "--model", str(model_path), "--out", str(preds_path),
        ]) == 0
        got = np.array([
            float(line.split(",")[1])
            for line in preds_path.read_text().strip().splitlines()[1:]
        ])
        assert np.all(np.isfinite(got))
        assert got.std() > 0.0


class TestCv:
    def test_cv_reports_best_and_table(self, tmp_path, capsys):
        data = tmp_path / "train.txt"
        make_regression_file(data, seed=31, n=40)
        out = tmp_path / "cv.csv"
        code = cli.main([
            "cv", str(data), "--family", "gamma", "--shapes", "2.0",
            "--taus", "0.5,2.0", "--lambdas", "0.1", "--copies", "8",
            "--folds", "4", "--seed", "17", "--out", str(out),
        ])
        assert code == 0
        best = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert best["family"] == "gamma"
        assert best["tau"] in (0.5, 2.0)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "shape,tau,lambda,score"
        assert len(lines) == 3

    def test_cv_deterministic(self, tmp_path, capsys):
        data = tmp_path / "train.txt"
        make_regression_file(data, seed=32, n=24)
        args = [
            "cv", str(data), "--family", "gamma", "--shapes", "1.0",
            "--taus", "1.0", "--lambdas", "0.1,1.0", "--copies", "4",
            "--seed", "8",
        ]
        assert cli.main(args) == 0
        first = capsys.readouterr().out
        assert cli.main(args) == 0
        second = capsys.readouterr().out
        assert first == second


class TestBench:
    def test_rows_per_method_and_size(self, tmp_path):
        data = tmp_path / "train.txt"
        make_regression_file(data, seed=41, n=60)
        out = tmp_path / "bench.csv"
        code = cli.main([
            "bench", str(data), "--task", "regression",
            "--map", "fourier_real,binning", "--kernel", "gamma:s=2,theta=1",
            "--copies", "4,8", "--trials", "2", "--lambda", "0.1",
            "--seed", "19", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == (
            "method,copies,theory_rel_error,empirical_rel_error,"
            "empirical_stderr,metric"
        )
        assert len(lines) == 5  # 2 methods × 2 sizes
        for line in lines[1:]:
            fields = line.split(",")
            assert fields[0] in ("fourier_real", "binning")
            assert int(fields[1]) in (4, 8)
            assert all(np.isfinite(float(v)) for v in fields[2:])

    def test_single_trial_single_size(self, tmp_path):
        data = tmp_path / "train.txt"
        make_regression_file(data, seed=42, n=30)
        out = tmp_path / "bench.csv"
        assert cli.main([
            "bench", str(data), "--task", "regression", "--map", "binning",
            "--kernel", "gamma:s=2,theta=1", "--copies", "8", "--trials", "1",
            "--lambda", "0.1", "--seed", "20", "--out", str(out),
        ]) == 0
        assert len(out.read_text().strip().splitlines()) == 2

    def test_bench_is_byte_identical(self, tmp_path):
        data = tmp_path / "train.txt"
        make_regression_file(data, seed=43, n=30)
        outs = []
        for name in ("b1.csv", "b2.csv"):
            out = tmp_path / name
            assert cli.main([
                "bench", str(data), "--task", "regression", "--map", "binning",
                "--kernel", "gamma:s=2,theta=1", "--copies", "4", "--trials", "2",
                "--lambda", "0.1", "--seed", "21", "--out", str(out),
            ]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_subsample_and_descending_sizes_rejected(self, tmp_path):
        data = tmp_path / "train.txt"
        make_regression_file(data, seed=44, n=40)
        out = tmp_path / "bench.csv"
        code = cli.main([
            "bench", str(data), "--task", "regression", "--map", "binning",
            "--kernel", "gamma:s=2,theta=1", "--copies", "8,4", "--trials", "1",
            "--lambda", "0.1", "--out", str(out),
        ])
        assert code != 0
        assert cli.main([
            "bench", str(data), "--task", "regression", "--map", "binning",
            "--kernel", "gamma:s=2,theta=1", "--copies", "4", "--trials", "1",
            "--lambda", "0.1", "--subsample", "20", "--seed", "5",
            "--out", str(out),
        ]) == 0


class TestErrorRecords:
    def test_missing_file(self, capsys):
        code = cli.main(["fit", "/nonexistent/data.txt", "--task", "regression",
                         "--map", "binning", "--kernel", "gamma:s=2,theta=1",
                         "--copies", "2", "--lambda", "0.1",
                         "--out", "/tmp/never.json"])
        assert code != 0
        err = capsys.readouterr().err.strip().splitlines()
        record = json.loads(err[-1])
        assert "error" in record

    def test_unknown_subcommand(self, capsys):
        code = cli.main(["frobnicate"])
        assert code != 0
        err = capsys.readouterr().err.strip().splitlines()
        assert any(line.startswith("{") for line in err)

    def test_parse_error_reports_line(self, tmp_path, capsys):
        data = tmp_path / "bad.txt"
        data.write_text("1 1:1\n1 nope\n")
        code = cli.main(["features", str(data), "--map", "binning",
                         "--kernel", "gamma:s=2,theta=1", "--copies", "2",
                         "--out", str(tmp_path / "f")])
        assert code != 0
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert "line 2" in record["error"]
