import json

import numpy as np
import pytest

from distsig.cli import main
from distsig.spectral import high_freq_fraction


def _read_coeffs(path):
    rows = [line.split(",") for line in path.read_text().strip().splitlines()[1:]]
    return np.array([float(r[2]) for r in rows])


# --- argument handling -----------------------------------------------------

def test_unknown_subcommand(capsys):
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


def test_no_subcommand(capsys):
    assert main([]) == 2
    capsys.readouterr()


def test_unknown_flag(capsys):
    assert main(["bounds", "--bogus", "1"]) == 2
    capsys.readouterr()


def test_missing_required_out(capsys):
    assert main(["gen-sbm", "--blocks", "5,5"]) == 2
    capsys.readouterr()


def test_bad_blocks_value(tmp_path, capsys):
    rc = main(["gen-sbm", "--blocks", "5,x", "--out", str(tmp_path / "g")])
    assert rc == 2
    assert "blocks" in capsys.readouterr().err


# --- gen-sbm ---------------------------------------------------------------

def test_gen_sbm_writes_files(tmp_path, capsys):
    out = tmp_path / "toy"
    assert main(["gen-sbm", "--blocks", "10,10", "--p-in", "0.5",
                 "--p-out", "0.05", "--seed", "3", "--out", str(out)]) == 0
    assert (tmp_path / "toy.graph").is_file()
    assert (tmp_path / "toy.labels").is_file()
    assert "20 nodes" in capsys.readouterr().out


def test_gen_sbm_rerun_byte_identical(tmp_path, capsys):
    args = ["gen-sbm", "--blocks", "8,8", "--seed", "5", "--p-in", "0.4"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    capsys.readouterr()
    assert (tmp_path / "a.graph").read_bytes() == (tmp_path / "b.graph").read_bytes()
    assert (tmp_path / "a.labels").read_bytes() == (tmp_path / "b.labels").read_bytes()


# --- bounds ----------------------------------------------------------------

def test_bounds_clean_run(tmp_path, capsys):
    out = tmp_path / "report.json"
    rc = main(["bounds", "--trials", "20", "--seed", "11", "--out", str(out)])
    assert rc == 0
    msg = capsys.readouterr().out
    assert "20 instances, 0 violation(s)" in msg
    report = json.loads(out.read_text())
    assert report["violations"] == []
    assert len(report["instances"]) == 20


def test_bounds_summary_only(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["bounds", "--trials", "5", "--summary-only", "--out", str(out)]) == 0
    capsys.readouterr()
    assert "instances" not in json.loads(out.read_text())


def test_bounds_rerun_byte_identical(tmp_path, capsys):
    args = ["bounds", "--trials", "10", "--seed", "2"]
    assert main(args + ["--out", str(tmp_path / "r1.json")]) == 0
    assert main(args + ["--out", str(tmp_path / "r2.json")]) == 0
    capsys.readouterr()
    assert (tmp_path / "r1.json").read_bytes() == (tmp_path / "r2.json").read_bytes()


# --- spectrum --------------------------------------------------------------

def test_spectrum_block_labels_low_frequency(tmp_path, capsys):
    prefix = tmp_path / "spec"
    rc = main(["spectrum", "--dataset", "sbm", "--blocks", "30,30",
               "--p-in", "0.4", "--p-out", "0.02", "--seed", "1",
               "--out", str(prefix)])
    assert rc == 0
    assert "2 spectrum file(s)" in capsys.readouterr().out
    lab = _read_coeffs(tmp_path / "spec_label.csv")
    rnd = _read_coeffs(tmp_path / "spec_random.csv")
    assert high_freq_fraction(lab, 0.5) < high_freq_fraction(rnd, 0.5)


def test_spectrum_with_probs(tmp_path, capsys):
    n = 40
    probs = np.random.default_rng(0).dirichlet(np.ones(3), size=n)
    pp = tmp_path / "p.npy"
    np.save(pp, probs)
    rc = main(["spectrum", "--dataset", "sbm", "--blocks", "20,20",
               "--p-in", "0.4", "--seed", "1", "--probs", str(pp),
               "--out", str(tmp_path / "s")])
    assert rc == 0
    assert "5 spectrum file(s)" in capsys.readouterr().out
    for s in range(3):
        assert (tmp_path / f"s_class{s}.csv").is_file()


def test_spectrum_probs_shape_mismatch(tmp_path, capsys):
    np.save(tmp_path / "bad.npy", np.full((7, 2), 0.5))
    rc = main(["spectrum", "--dataset", "sbm", "--blocks", "20,20",
               "--probs", str(tmp_path / "bad.npy"), "--out", str(tmp_path / "s")])
    assert rc == 3
    assert "do not match" in capsys.readouterr().err


def test_spectrum_rerun_byte_identical(tmp_path, capsys):
    args = ["spectrum", "--dataset", "sbm", "--blocks", "15,15", "--seed", "8",
            "--p-in", "0.4", "--p-out", "0.05"]
    assert main(args + ["--out", str(tmp_path / "x")]) == 0
    assert main(args + ["--out", str(tmp_path / "y")]) == 0
    capsys.readouterr()
    assert (tmp_path / "x_label.csv").read_bytes() == (tmp_path / "y_label.csv").read_bytes()
    assert (tmp_path / "x_random.csv").read_bytes() == (tmp_path / "y_random.csv").read_bytes()


# --- train -----------------------------------------------------------------

def test_train_sbm_writes_metrics(tmp_path, capsys):
    out = tmp_path / "run.json"
    rc = main(["train", "--dataset", "sbm", "--blocks", "30,30",
               "--p-in", "0.3", "--p-out", "0.02", "--variant", "r",
               "--eta", "0.1", "--epochs", "15", "--seed", "4",
               "--val-size", "15", "--test-size", "30", "--out", str(out)])
    assert rc == 0
    assert "variant=r" in capsys.readouterr().out
    payload = json.loads(out.read_text())
    assert payload["config"]["variant"] == "r"
    assert len(payload["per_epoch"]) == 15
    probs = np.load(tmp_path / "run.json.probs.npy")
    assert probs.shape == (60, 2)
    assert np.allclose(probs.sum(axis=1), 1.0)


def test_train_rerun_byte_identical(tmp_path, capsys):
    args = ["train", "--dataset", "sbm", "--blocks", "20,20", "--epochs", "10",
            "--seed", "9", "--val-size", "10", "--test-size", "20"]
    assert main(args + ["--out", str(tmp_path / "m1.json")]) == 0
    assert main(args + ["--out", str(tmp_path / "m2.json")]) == 0
    capsys.readouterr()
    assert (tmp_path / "m1.json").read_bytes() == (tmp_path / "m2.json").read_bytes()
    assert (tmp_path / "m1.json.probs.npy").read_bytes() == \
        (tmp_path / "m2.json.probs.npy").read_bytes()


def test_train_tune_flag(tmp_path, capsys):
    out = tmp_path / "tuned.json"
    rc = main(["train", "--dataset", "sbm", "--blocks", "20,20",
               "--variant", "gcn", "--epochs", "8", "--tune",
               "--val-size", "10", "--test-size", "20", "--out", str(out)])
    assert rc == 0
    # plain model ignores eta, so the tie resolves to the first grid point
    assert json.loads(out.read_text())["config"]["eta"] == 0.1
    capsys.readouterr()


def test_train_from_files(tmp_path, capsys):
    prefix = tmp_path / "data"
    assert main(["gen-sbm", "--blocks", "100,100", "--p-in", "0.15",
                 "--p-out", "0.01", "--seed", "2", "--out", str(prefix)]) == 0
    rc = main(["train", "--dataset", "file", "--graph", f"{prefix}.graph",
               "--labels", f"{prefix}.labels", "--epochs", "12",
               "--out", str(tmp_path / "file_run.json")])
    assert rc == 0
    capsys.readouterr()
    assert (tmp_path / "file_run.json").is_file()


def test_train_file_needs_paths(capsys):
    assert main(["train", "--dataset", "file", "--epochs", "5"]) == 2
    assert "--graph" in capsys.readouterr().err


def test_train_label_size_mismatch(tmp_path, capsys):
    assert main(["gen-sbm", "--blocks", "10,10", "--out", str(tmp_path / "g")]) == 0
    (tmp_path / "short.labels").write_text("0\n1\n")
    rc = main(["train", "--dataset", "file", "--graph", str(tmp_path / "g.graph"),
               "--labels", str(tmp_path / "short.labels"), "--epochs", "5"])
    assert rc == 3
    assert "does not match" in capsys.readouterr().err


def test_train_missing_graph_file(tmp_path, capsys):
    rc = main(["train", "--dataset", "file", "--graph", str(tmp_path / "no.graph"),
               "--labels", str(tmp_path / "no.labels"), "--epochs", "5"])
    assert rc == 3
    capsys.readouterr()


def test_train_cora_without_data_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("DISTSIG_DATA_DIR", raising=False)
    rc = main(["train", "--dataset", "cora", "--epochs", "5"])
    assert rc == 3
    assert "DISTSIG_DATA_DIR" in capsys.readouterr().err


def test_train_bad_variant(capsys):
    assert main(["train", "--variant", "mystery"]) == 2
    capsys.readouterr()


# --- analyze ---------------------------------------------------------------

def test_analyze_csv(tmp_path, capsys):
    probs = np.random.default_rng(1).dirichlet(np.ones(4), size=12)
    pp = tmp_path / "probs.npy"
    np.save(pp, probs)
    out = tmp_path / "nu.csv"
    rc = main(["analyze", "--probs", str(pp), "--tag", "demo", "--out", str(out)])
    assert rc == 0
    capsys.readouterr()
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "epsilon,kind,count,model_tag"
    assert len(lines) == 9  # four epsilons, two kinds each
    assert all(line.endswith(",demo") for line in lines[1:])


def test_analyze_missing_probs(tmp_path, capsys):
    rc = main(["analyze", "--probs", str(tmp_path / "none.npy"),
               "--out", str(tmp_path / "o.csv")])
    assert rc == 3
    capsys.readouterr()
