import json

import numpy as np
import pytest

import config
from core.errors import FormatError
from core.multi_pass import TrainConfig, sgd_train
from core.network import FiringMatrix, margins
from core.single_pass import train_single_pass
from utils.file_formats import (
    dumps_network, format_matrix, loads_network, parse_matrix, read_matrix,
    read_network, write_matrix, write_network,
)


def test_matrix_text_layout(worked_matrix):
    assert format_matrix(worked_matrix) == "3 2\n10\n01\n11\n"


def test_matrix_file_round_trip(tmp_path, rng):
    A = FiringMatrix((rng.random((9, 13)) < 0.4).astype(np.uint8))
    path = tmp_path / "a.mat"
    write_matrix(A, path)
    assert read_matrix(path) == A


@pytest.mark.parametrize("text,message", [
    ("", "empty"),
    ("3\n101\n", "header"),
    ("2 3\n101\n", "rows"),
    ("2 3\n101\n10\n", "characters"),
    ("2 3\n101\n1x1\n", "0/1"),
])
def test_malformed_matrix_files(text, message):
    with pytest.raises(FormatError, match=message):
        parse_matrix(text)


def test_matrix_tolerates_trailing_blank_lines():
    assert parse_matrix("1 2\n10\n\n\n").bits.tolist() == [[1, 0]]


def test_single_pass_document_is_lossless(worked_matrix):
    net = train_single_pass(worked_matrix, 0.5, 0.125)
    doc = json.loads(dumps_network(net))
    assert doc["mode"] == "single-pass"
    assert doc["format_version"] == config.NETWORK_FORMAT_VERSION
    assert doc["weights"]["counts"] == net.counts.tolist()
    assert float.fromhex(doc["theta"]) == 0.1875
    assert loads_network(dumps_network(net)) == net


def test_irrational_p_survives_reload(tmp_path, rng):
    p = 1 / 3
    A = FiringMatrix((rng.random((30, 6)) < p).astype(np.uint8))
    net = train_single_pass(A, p, 0.2)
    path = tmp_path / "net.json"
    write_network(net, path)
    loaded = read_network(path)
    assert loaded.params.p == p
    assert np.array_equal(margins(loaded, A), margins(net, A))


def test_dense_weights_are_bit_exact(tmp_path, rng):
    A = FiringMatrix((rng.random((16, 8)) < 0.5).astype(np.uint8))
    A = FiringMatrix(np.vstack([A.bits, np.ones((1, 8), dtype=np.uint8)]))
    net = sgd_train(A, TrainConfig.from_epochs(8, 30, eta_tilde=0.3))
    path = tmp_path / "dense.json"
    write_network(net, path)
    loaded = read_network(path)
    assert loaded == net
    assert loaded.weights().tobytes() == net.weights().tobytes()


def test_version_mismatch_rejected(worked_matrix):
    doc = json.loads(dumps_network(train_single_pass(worked_matrix, 0.5, 0.125)))
    doc["format_version"] = 99
    with pytest.raises(FormatError, match="format_version"):
        loads_network(json.dumps(doc))


def test_unknown_mode_rejected(worked_matrix):
    doc = json.loads(dumps_network(train_single_pass(worked_matrix, 0.5, 0.125)))
    doc["mode"] = "three-pass"
    with pytest.raises(FormatError):
        loads_network(json.dumps(doc))


def test_bad_hex_rejected(worked_matrix):
    doc = json.loads(dumps_network(train_single_pass(worked_matrix, 0.5, 0.125)))
    doc["p"] = "half"
    with pytest.raises(FormatError, match="hexadecimal"):
        loads_network(json.dumps(doc))


def test_not_json_rejected():
    with pytest.raises(FormatError):
        loads_network("{not json")


def test_output_is_stable(worked_matrix):
    net = train_single_pass(worked_matrix, 0.5, 0.125)
    assert dumps_network(net) == dumps_network(loads_network(dumps_network(net)))
    assert dumps_network(net).endswith("}\n")
