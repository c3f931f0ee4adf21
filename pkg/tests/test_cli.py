import json

import numpy as np
import pandas as pd
import pytest

import main
from core.network import FiringMatrix, verify_memorization
from core.single_pass import train_single_pass
from utils.file_formats import write_matrix


@pytest.fixture
def zeros_matrix(tmp_path):
    path = tmp_path / "zeros.mat"
    write_matrix(FiringMatrix(np.zeros((4, 3), dtype=np.uint8)), path)
    return path


@pytest.fixture
def worked_file(tmp_path, worked_matrix):
    path = tmp_path / "worked.mat"
    write_matrix(worked_matrix, path)
    return path


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_bound_invert_prints_integer(capsys):
    code = main.main(["bound-invert", "--N", "10", "--p", "0.5", "--eta-tilde", "0.125",
                      "--target", "1e-3"])
    assert code == 0
    assert capsys.readouterr().out.strip() == "34002"


def test_bound_eval_json(capsys):
    assert main.main(["bound-eval", "--L", "100", "--N", "2"]) == 0
    doc = _json(capsys)
    assert doc["clamped"] == 1.0
    assert doc["total"] == pytest.approx(296.7, abs=0.15)


def test_bound_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main.main(["bound-sweep", "--n-list", "10,100", "--targets", "1e-3,1e-6",
                      "--out", str(out)]) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["N", "target", "L_min", "bound_at_L_min",
                                   "term_hebb", "term_binom"]
    assert frame["L_min"].tolist()[:2] == pytest.approx([34002, 46058], abs=1)


def test_train_then_verify_zero_instance(tmp_path, zeros_matrix, capsys):
    net = tmp_path / "zero.net"
    assert main.main(["train", "--matrix", str(zeros_matrix), "--out", str(net)]) == 0
    assert main.main(["verify", "--net", str(net), "--matrix", str(zeros_matrix)]) == 0
    assert _json(capsys)["perfect"] is True


def test_verify_imperfect_exits_one(tmp_path, capsys):
    mat = tmp_path / "bad.mat"
    write_matrix(FiringMatrix(np.array([[1, 0]], dtype=np.uint8)), mat)
    net = tmp_path / "bad.net"
    main.main(["train", "--matrix", str(mat), "--out", str(net)])
    assert main.main(["verify", "--net", str(net), "--matrix", str(mat)]) == 1
    assert _json(capsys)["perfect"] is False


def test_round_trip_matches_in_memory(tmp_path, rng, capsys):
    for i in range(5):
        A = FiringMatrix((rng.random((300, 3)) < 0.5).astype(np.uint8))
        mat, net = tmp_path / f"a{i}.mat", tmp_path / f"a{i}.net"
        write_matrix(A, mat)
        main.main(["train", "--matrix", str(mat), "--out", str(net)])
        code = main.main(["verify", "--net", str(net), "--matrix", str(mat)])
        capsys.readouterr()
        expected = verify_memorization(train_single_pass(A, 0.5, 0.125), A).perfect
        assert code == (0 if expected else 1)


def test_multi_pass_train_writes_history(tmp_path, worked_file, capsys):
    net, hist = tmp_path / "dense.net", tmp_path / "hist.csv"
    code = main.main(["train", "--matrix", str(worked_file), "--mode", "multi",
                      "--order", "cyclic", "--history", str(hist), "--out", str(net)])
    assert code == 0
    assert json.loads(net.read_text())["mode"] == "multi-pass"
    assert list(pd.read_csv(hist).columns) == ["update_index", "residual_max", "residual_l2"]


def test_run_replays_sequence(tmp_path, worked_file, capsys):
    net = tmp_path / "w.net"
    main.main(["train", "--matrix", str(worked_file), "--out", str(net)])
    code = main.main(["run", "--net", str(net), "--matrix", str(worked_file),
                      "--init-col", "1", "--steps", "3"])
    assert code == 0
    assert capsys.readouterr().out.split() == ["011", "101", "011"]


def test_run_needs_an_initial_state(tmp_path, worked_file):
    net = tmp_path / "w.net"
    main.main(["train", "--matrix", str(worked_file), "--out", str(net)])
    assert main.main(["run", "--net", str(net)]) == 2


def test_mc_report_and_dump(tmp_path, capsys):
    dump = tmp_path / "trials.csv"
    code = main.main(["mc", "--L", "1", "--N", "2", "--p", "0.5", "--eta-tilde", "0.125",
                      "--trials", "4096", "--seed", "7", "--dump-trials", str(dump)])
    assert code == 0
    doc = _json(capsys)
    assert doc["ci_low"] <= 0.5 <= doc["ci_high"]
    assert "elapsed_seconds" in doc
    trials = pd.read_csv(dump)
    assert list(trials.columns) == ["trial_index", "perfect", "failure_count"]
    assert len(trials) == 4096


def test_mc_output_is_reproducible(tmp_path):
    outs = []
    for workers in ("1", "2"):
        out = tmp_path / f"mc{workers}.json"
        main.main(["mc", "--L", "8", "--N", "3", "--trials", "64", "--seed", "5",
                   "--workers", workers, "--no-timing", "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_exhaustive_and_capacity(capsys):
    assert main.main(["exhaustive", "--L", "1", "--N", "2"]) == 0
    assert _json(capsys)["probability"] == pytest.approx(0.5)
    assert main.main(["capacity", "--L", "1000000", "--N", "100"]) == 0
    assert _json(capsys)["multi_pass_per_connection_lb"] == 1.0


def test_mgf_command(capsys):
    assert main.main(["mgf", "--L", "10", "--N", "5", "--t", "0", "--samples", "1000"]) == 0
    doc = _json(capsys)
    assert doc["estimate"] == 1.0 and doc["bound"] == 1.0


def test_rank_on_file_and_survey(worked_file, capsys):
    assert main.main(["rank", "--matrix", str(worked_file)]) == 0
    assert _json(capsys) == {"L": 3, "N": 2, "rank": 2, "full_rank": True, "estimate": False}
    assert main.main(["rank", "--L", "20", "--N", "5", "--trials", "10"]) == 0
    assert _json(capsys)["trials"] == 10


def test_parameter_errors_exit_two(caplog):
    assert main.main(["bound-eval", "--L", "10", "--N", "1"]) == 2
    assert main.main(["exhaustive", "--L", "5", "--N", "5"]) == 2
    assert "exhaustive" in caplog.text


def test_missing_file_exits_two(tmp_path):
    assert main.main(["verify", "--net", str(tmp_path / "no.net"),
                      "--matrix", str(tmp_path / "no.mat")]) == 2


def test_malformed_matrix_exits_two(tmp_path):
    bad = tmp_path / "bad.mat"
    bad.write_text("2 3\n101\n10\n")
    assert main.main(["rank", "--matrix", str(bad)]) == 2


def test_usage_error_exits_two():
    with pytest.raises(SystemExit) as info:
        main.main(["bound-invert", "--N", "10"])
    assert info.value.code == 2


def test_non_ascii_matrix_exits_two(tmp_path):
    bad = tmp_path / "accent.mat"
    bad.write_bytes("2 2\n10\n1é\n".encode("utf-8"))
    assert main.main(["rank", "--matrix", str(bad)]) == 2


def test_non_utf8_network_exits_two(tmp_path, worked_file):
    net = tmp_path / "garbled.net"
    net.write_bytes(b"\xff\xfe{\x00}\x00")
    assert main.main(["verify", "--net", str(net), "--matrix", str(worked_file)]) == 2


@pytest.mark.parametrize("col", ["0", "3", "99"])
def test_run_rejects_init_col_outside_matrix(tmp_path, worked_file, col):
    net = tmp_path / "w.net"
    main.main(["train", "--matrix", str(worked_file), "--out", str(net)])
    assert main.main(["run", "--net", str(net), "--matrix", str(worked_file),
                      "--init-col", col]) == 2


def test_unknown_log_level_exits_two(monkeypatch):
    monkeypatch.setattr(main.config, "LOG_LEVEL", "LOUD")
    assert main.main(["bound-eval", "--L", "100", "--N", "2"]) == 2


def test_bad_workers_default_is_a_usage_error(monkeypatch):
    monkeypatch.setattr(main.config, "DEFAULT_WORKERS", "many")
    with pytest.raises(SystemExit) as info:
        main.main(["mc", "--L", "4", "--N", "2", "--trials", "2"])
    assert info.value.code == 2
