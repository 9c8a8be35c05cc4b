import json

import numpy as np
import pytest

from eegrid.cli import EXIT_FAIL, EXIT_INVALID, EXIT_OK, main
from eegrid.config import ExperimentConfig
from eegrid import selftest


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth")
    assert main(["synthesize", "--out", str(root), "--subjects", "8", "--seconds", "10"]) == EXIT_OK
    return root


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_synthesize_layout(dataset):
    assert len(list((dataset / "recordings").glob("*.f32"))) == 8
    assert (dataset / "labels.csv").read_text().startswith("subject,trial,label")
    assert (dataset / "montage.csv").exists()


def test_extract_then_experiment(dataset, tmp_path, capsys):
    common = ["--data-dir", str(dataset), "--output_dir", str(tmp_path), "--model", "1",
              "--features", "energy", "--folds", "4", "--montage", "montage.csv"]
    code, out, _ = run(capsys, ["extract", *common])
    assert code == EXIT_OK
    info = json.loads(out)
    assert info["samples"].endswith(f"samples-{info['extraction_hash']}.f32")
    code, out, err = run(capsys, ["experiment", *common])
    assert code == EXIT_OK
    lines = [json.loads(l) for l in out.splitlines()]
    assert len(lines) == 5 and lines[-1]["fold"] == "aggregate"
    assert "summary written" in err
    assert len({l["config_hash"] for l in lines}) == 1


def test_config_file_with_flag_override(dataset, tmp_path, capsys):
    cfg = ExperimentConfig(data_dir=str(dataset), output_dir=str(tmp_path), model=1, features="energy",
                           folds=4, classifier="knn5")
    cfg.save(tmp_path / "c.json")
    code, out, _ = run(capsys, ["experiment", "--config", str(tmp_path / "c.json"), "--classifier", "knn3"])
    assert code == EXIT_OK
    expected = cfg.replace(classifier="knn3").config_hash()
    assert json.loads(out.splitlines()[0])["config_hash"] == expected


def test_compare_with_suffixed_overrides(tmp_path, capsys):
    data = tmp_path / "data"
    assert main(["synthesize", "--out", str(data), "--subjects", "32", "--seconds", "20"]) == EXIT_OK
    capsys.readouterr()
    code, out, err = run(capsys, ["compare", "--data_dir", str(data), "--output_dir", str(tmp_path),
                                  "--model", "1", "--features", "energy", "--folds", "16", "--model_2", "2"])
    assert code == EXIT_OK
    lines = [json.loads(l) for l in out.splitlines()]
    assert len(lines) == 17
    cfg1 = ExperimentConfig(data_dir=str(data), model=1, features="energy", folds=16)
    hashes = [cfg1.config_hash(), cfg1.replace(model=2).config_hash()]
    assert all(l["config_hashes"] == hashes for l in lines)
    assert lines[-1]["fold"] == "comparison" and 0 < lines[-1]["p_value"] <= 1
    assert "compare-" in err


def test_compare_too_few_nonzero_pairs(dataset, tmp_path, capsys):
    cfg2 = ExperimentConfig(data_dir=str(dataset), model=2, features="energy", folds=4)
    cfg2.save(tmp_path / "arm2.json")
    code, _, err = run(capsys, ["compare", "--data_dir", str(dataset), "--output_dir", str(tmp_path),
                                "--model", "1", "--features", "energy", "--folds", "4",
                                "--config2", str(tmp_path / "arm2.json")])
    assert code == EXIT_INVALID
    assert "nonzero pairs" in err


def test_compare_needs_second_arm(dataset, capsys):
    code, _, err = run(capsys, ["compare", "--data_dir", str(dataset)])
    assert code == EXIT_INVALID and "second arm" in err


def test_interp_dump(dataset, tmp_path, capsys):
    code, out, _ = run(capsys, ["interp-dump", "--data_dir", str(dataset), "--output_dir", str(tmp_path),
                                "--features", "energy", "--sample", "3", "--out", str(tmp_path / "dump")])
    assert code == EXIT_OK
    info = json.loads(out)
    assert len(info["slices"]) == 5
    grid = np.loadtxt(tmp_path / "dump" / f"{info['slices'][0]}.csv", delimiter=",")
    assert grid.shape == (15, 15)
    assert (tmp_path / "dump" / f"{info['slices'][0]}.pgm").read_text().startswith("P2")
    code, _, err = run(capsys, ["interp-dump", "--data_dir", str(dataset), "--output_dir", str(tmp_path),
                                "--features", "energy", "--sample", "9999"])
    assert code == EXIT_INVALID and "sample index" in err


@pytest.mark.parametrize("argv,message", [
    (["experiment", "--grid_size", "12"], "grid_size"),
    (["experiment", "--task", "Dominance"], "task"),
    (["extract", "--data_dir", "/nonexistent/eegrid"], "not found"),
])
def test_validation_errors_exit_nonzero(argv, message, capsys):
    code, _, err = run(capsys, argv)
    assert code == EXIT_INVALID
    assert message in err


def test_bad_config_file(tmp_path, capsys):
    (tmp_path / "c.json").write_text('{"grid": 15}')
    code, _, err = run(capsys, ["experiment", "--config", str(tmp_path / "c.json")])
    assert code == EXIT_INVALID and "unknown config keys" in err


def test_selftest_passes(capsys):
    code, out, _ = run(capsys, ["selftest"])
    assert code == EXIT_OK
    assert out.count("PASS") == len(selftest.CHECKS) and "FAIL" not in out


def test_selftest_reports_failures(monkeypatch, capsys):
    monkeypatch.setattr(selftest, "CHECKS", [("broken", lambda rng: (False, "nope")),
                                             ("crash", lambda rng: 1 / 0)])
    code, out, _ = run(capsys, ["selftest"])
    assert code == EXIT_FAIL
    assert out.count("FAIL") == 2 and "ZeroDivisionError" in out
