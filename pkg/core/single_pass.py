"""
SEQMEM - SINGLE-PASS (QUASI-HEBBIAN) LEARNING
Exact integer weights | streaming updates | Gram-matrix fast path

Weights are kept as counts: w_ℓ = c_ℓ − |J_ℓ|·p·1 with c_ℓ = Σ_{j∈J_ℓ} a_{j−1}.
Neuron and column indices in the public API are 1-based.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.errors import DimensionError, ParameterError
from core.network import (
    FiringMatrix, NetworkParams, as_firing_vector, default_threshold,
    failure_mask, signed_margins,
)

logger = logging.getLogger(__name__)


def _check_p(p: float):
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must lie in (0, 1), got {p}")


def _check_eta_tilde(eta_tilde: float):
    if not 0.0 <= eta_tilde < 1.0:
        raise ParameterError(f"eta_tilde must lie in [0, 1), got {eta_tilde}")


@dataclass(frozen=True)
class SinglePassNetwork:
    counts: np.ndarray      # (L, L) int64, row ℓ is c_ℓ
    j_card: np.ndarray      # (L,) int64, |J_ℓ|
    params: NetworkParams

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        j_card = np.asarray(self.j_card, dtype=np.int64)
        L = self.params.L
        if counts.shape != (L, L) or j_card.shape != (L,):
            raise DimensionError(
                f"counts {counts.shape} / j_card {j_card.shape} do not match L={L}"
            )
        if np.any(j_card < 0) or np.any(counts < 0) or np.any(counts > j_card[:, None]):
            raise ParameterError("counts must satisfy 0 <= c_l[i] <= |J_l|")
        counts.setflags(write=False)
        j_card.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "j_card", j_card)

    @property
    def margin_tol(self) -> float:
        return 0.0

    def inner_products(self, state: np.ndarray) -> np.ndarray:
        y = state.astype(np.int64)
        dots = self.counts @ y
        pop = int(y.sum())
        return dots.astype(np.float64) - self.params.p * (self.j_card * pop).astype(np.float64)

    def inner_product_matrix(self, A: FiringMatrix) -> np.ndarray:
        """Entry (ℓ, n) is ⟨a_{n−1}, w_ℓ⟩, evaluated exactly from counts."""
        prev = A.predecessors().astype(np.int64)
        dots = self.counts @ prev
        pop = prev.sum(axis=0)
        return dots.astype(np.float64) - self.params.p * (
            self.j_card[:, None] * pop[None, :]
        ).astype(np.float64)

    def weights(self) -> np.ndarray:
        """Materialized real weights (w_ℓ = c_ℓ − |J_ℓ|·p·1), row per neuron."""
        return self.counts.astype(np.float64) - self.params.p * self.j_card[:, None].astype(np.float64)

    def with_eta_tilde(self, eta_tilde: float) -> "SinglePassNetwork":
        return SinglePassNetwork(self.counts, self.j_card, self.params.with_eta_tilde(eta_tilde))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SinglePassNetwork)
            and self.params == other.params
            and np.array_equal(self.counts, other.counts)
            and np.array_equal(self.j_card, other.j_card)
        )

    __hash__ = None


def train_single_pass(A: FiringMatrix, p: float, eta_tilde: float) -> SinglePassNetwork:
    """One pass over the columns; a_0 := a_N is resolved here."""
    _check_p(p)
    _check_eta_tilde(eta_tilde)
    bits = A.bits.astype(np.int64)
    prev = A.predecessors().astype(np.int64)

    counts = bits @ prev.T
    j_card = bits.sum(axis=1)
    params = NetworkParams(L=A.L, theta=default_threshold(A.L, p), eta_tilde=eta_tilde, p=p)

    logger.debug("[TRAIN] single-pass | L=%d N=%d p=%.4g | mean |J|=%.2f",
                 A.L, A.N, p, float(j_card.mean()))
    return SinglePassNetwork(counts, j_card, params)


# ── Streaming ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class StreamState:
    counts: np.ndarray
    j_card: np.ndarray
    previous: np.ndarray
    n: int
    p: float

    @classmethod
    def start(cls, a0, p: float) -> "StreamState":
        """Fresh state; an online learner must be told a_0 (= a_N) up front."""
        _check_p(p)
        prev = as_firing_vector(a0)
        L = prev.size
        return cls(
            counts=np.zeros((L, L), dtype=np.int64),
            j_card=np.zeros(L, dtype=np.int64),
            previous=prev,
            n=0,
            p=p,
        )

    @property
    def L(self) -> int:
        return self.previous.size

    def to_network(self, eta_tilde: float) -> SinglePassNetwork:
        _check_eta_tilde(eta_tilde)
        params = NetworkParams(L=self.L, theta=default_threshold(self.L, self.p),
                               eta_tilde=eta_tilde, p=self.p)
        return SinglePassNetwork(self.counts, self.j_card, params)


def stream_update(state: StreamState, column) -> StreamState:
    """Δw_ℓ = a_{ℓ,n}(a_{n−1} − p·1): only rows firing now change, only a_{n−1} is read."""
    col = as_firing_vector(column, state.L)
    fires = col == 1

    counts = state.counts.copy()
    j_card = state.j_card.copy()
    counts[fires] += state.previous.astype(np.int64)
    j_card[fires] += 1
    return StreamState(counts=counts, j_card=j_card, previous=col, n=state.n + 1, p=state.p)


def exact_inner_product(network: SinglePassNetwork, neuron: int, state) -> float:
    """⟨state, w_ℓ⟩ = ⟨state, c_ℓ⟩ − p·|J_ℓ|·popcount(state), one rounding step."""
    L = network.params.L
    if not 1 <= neuron <= L:
        raise ParameterError(f"neuron index {neuron} outside 1..{L}")
    y = as_firing_vector(state, L).astype(np.int64)
    dot = int(network.counts[neuron - 1] @ y)
    pop = int(y.sum())
    return float(dot) - network.params.p * float(int(network.j_card[neuron - 1]) * pop)


# ── Gram-matrix fast path ─────────────────────────────────────────────────

def batch_inner_products(bits: np.ndarray, p: float) -> np.ndarray:
    """
    ⟨a_{n−1}, w_ℓ⟩ for a stack of matrices (T, L, N) without forming L×L weights:
    Σ_{j∈J_ℓ} G[n−1, j−1] − p·|J_ℓ|·popcount(a_{n−1}), G the column Gram matrix.
    """
    b = bits.astype(np.int64)
    prev = np.roll(b, 1, axis=2)
    gram = np.transpose(prev, (0, 2, 1)) @ prev
    dots = b @ gram
    pop = prev.sum(axis=1)
    j_card = b.sum(axis=2)
    return dots.astype(np.float64) - p * (j_card[:, :, None] * pop[:, None, :]).astype(np.float64)


def batch_failure_counts(bits: np.ndarray, p: float, eta_tilde: float) -> np.ndarray:
    """Number of η-robust failures per matrix in a (T, L, N) stack."""
    L = bits.shape[1]
    theta = default_threshold(L, p)
    eta = eta_tilde * theta
    ip = batch_inner_products(bits, p)
    m = signed_margins(ip, bits, theta)
    return failure_mask(m, bits, eta).sum(axis=(1, 2))


def gram_inner_products(A: FiringMatrix, p: float) -> np.ndarray:
    return batch_inner_products(A.bits[None, :, :], p)[0]


def verify_fast(A: FiringMatrix, p: float, eta_tilde: float) -> Tuple[bool, int]:
    """Single-pass train + worst-case verify in O(N²·L); returns (perfect, failures)."""
    _check_p(p)
    _check_eta_tilde(eta_tilde)
    failures = int(batch_failure_counts(A.bits[None, :, :], p, eta_tilde)[0])
    return failures == 0, failures
