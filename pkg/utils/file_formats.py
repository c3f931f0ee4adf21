"""
SEQMEM - FILE FORMATS
Pattern-matrix text files and versioned network JSON documents
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

import config
from core.errors import FormatError
from core.multi_pass import DenseNetwork
from core.network import FiringMatrix, NetworkParams
from core.single_pass import SinglePassNetwork

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
AnyNetwork = Union[SinglePassNetwork, DenseNetwork]


# ── Matrix files ──────────────────────────────────────────────────────────

def format_matrix(A: FiringMatrix) -> str:
    lines = [f"{A.L} {A.N}"]
    lines.extend("".join("1" if b else "0" for b in row) for row in A.bits)
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> FiringMatrix:
    """Line 1 is `L N`, then L lines of exactly N characters from {0,1}."""
    lines = [line.rstrip("\r") for line in text.splitlines()]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise FormatError("empty matrix file")

    header = lines[0].split()
    if len(header) != 2 or not all(h.isdigit() for h in header):
        raise FormatError(f"bad matrix header: {lines[0]!r} (expected 'L N')")
    L, N = int(header[0]), int(header[1])
    rows = lines[1:]
    if len(rows) != L:
        raise FormatError(f"header says L={L} rows, file has {len(rows)}")

    bits = np.zeros((L, N), dtype=np.uint8)
    for i, row in enumerate(rows):
        if len(row) != N:
            raise FormatError(f"row {i + 1} has {len(row)} characters, expected {N}")
        if set(row) - {"0", "1"}:
            raise FormatError(f"row {i + 1} contains characters other than 0/1")
        bits[i] = np.frombuffer(row.encode("ascii"), dtype=np.uint8) - ord("0")
    return FiringMatrix(bits)


def read_matrix(path: PathLike) -> FiringMatrix:
    try:
        text = Path(path).read_text(encoding="ascii")
    except UnicodeDecodeError as exc:
        raise FormatError(f"matrix file {path} is not ASCII: {exc}")
    return parse_matrix(text)


def write_matrix(A: FiringMatrix, path: PathLike):
    Path(path).write_text(format_matrix(A), encoding="ascii")


# ── Network files ─────────────────────────────────────────────────────────

def network_to_dict(network: AnyNetwork) -> Dict[str, Any]:
    params = network.params
    doc: Dict[str, Any] = {
        "format_version": config.NETWORK_FORMAT_VERSION,
        "L": params.L,
        "p": float(params.p).hex(),
        "theta": float(params.theta).hex(),
        "eta_tilde": float(params.eta_tilde).hex(),
    }
    if isinstance(network, SinglePassNetwork):
        doc["mode"] = "single-pass"
        doc["weights"] = {
            "counts": network.counts.tolist(),
            "j_card": network.j_card.tolist(),
        }
    elif isinstance(network, DenseNetwork):
        doc["mode"] = "multi-pass"
        doc["weights"] = [[float(x).hex() for x in row] for row in network.weight_matrix]
    else:
        raise FormatError(f"cannot serialize {type(network).__name__}")
    return doc


def _hex(doc: Dict[str, Any], key: str) -> float:
    try:
        return float.fromhex(doc[key])
    except KeyError:
        raise FormatError(f"network file is missing '{key}'")
    except (TypeError, ValueError):
        raise FormatError(f"field '{key}' is not a hexadecimal float: {doc[key]!r}")


def network_from_dict(doc: Dict[str, Any]) -> AnyNetwork:
    if not isinstance(doc, dict):
        raise FormatError("network file must hold a JSON object")
    version = doc.get("format_version")
    if version != config.NETWORK_FORMAT_VERSION:
        raise FormatError(
            f"network format_version {version!r} not supported "
            f"(expected {config.NETWORK_FORMAT_VERSION})"
        )
    mode = doc.get("mode")
    if mode not in config.NETWORK_MODES:
        raise FormatError(f"unknown network mode: {mode!r}")
    if not isinstance(doc.get("L"), int) or "weights" not in doc:
        raise FormatError("network file needs integer 'L' and 'weights'")

    params = NetworkParams(
        L=doc["L"],
        theta=_hex(doc, "theta"),
        eta_tilde=_hex(doc, "eta_tilde"),
        p=_hex(doc, "p"),
    )
    weights = doc["weights"]
    if mode == "single-pass":
        if not isinstance(weights, dict) or {"counts", "j_card"} - set(weights):
            raise FormatError("single-pass weights need 'counts' and 'j_card'")
        try:
            counts = np.asarray(weights["counts"], dtype=np.int64)
            j_card = np.asarray(weights["j_card"], dtype=np.int64)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"bad single-pass weights: {exc}")
        return SinglePassNetwork(counts, j_card, params)

    try:
        dense = np.array([[float.fromhex(x) for x in row] for row in weights], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad dense weights: {exc}")
    return DenseNetwork(dense, params)


def dumps_network(network: AnyNetwork) -> str:
    return json.dumps(network_to_dict(network), sort_keys=True, indent=2) + "\n"


def loads_network(text: str) -> AnyNetwork:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"network file is not valid JSON: {exc}")
    return network_from_dict(doc)


def read_network(path: PathLike) -> AnyNetwork:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"network file {path} is not UTF-8: {exc}")
    network = loads_network(text)
    logger.debug("Loaded %s network (L=%d) from %s",
                 "single-pass" if isinstance(network, SinglePassNetwork) else "multi-pass",
                 network.params.L, path)
    return network


def write_network(network: AnyNetwork, path: PathLike):
    Path(path).write_text(dumps_network(network), encoding="utf-8")
