"""
SEQMEM - MULTI-PASS LEARNING
Least-squares view: shifted system, exact rank, gradient descent, Kaczmarz SGD

Each neuron ℓ solves min_w ‖Ã w − ã_ℓ‖² independently; the L problems share Ã
and are advanced together as rows of one weight matrix.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

import config
from core.errors import (
    CapExceededError, DimensionError, ParameterError, UnmemorizableError,
)
from core.network import FiringMatrix, NetworkParams
from utils.rng import CounterStream

logger = logging.getLogger(__name__)

SCHEDULES = ("constant", "kaczmarz")
ORDERS = ("cyclic", "random")


@dataclass(frozen=True)
class ShiftedSystem:
    A_tilde: np.ndarray     # (N, L), row k = a_{k−1}ᵀ with a_0 = a_N
    targets: np.ndarray     # (L, N), row ℓ = ã_ℓ

    @property
    def N(self) -> int:
        return self.A_tilde.shape[0]

    @property
    def L(self) -> int:
        return self.A_tilde.shape[1]


@dataclass(frozen=True)
class DenseNetwork:
    weight_matrix: np.ndarray   # (L, L) float64, row ℓ is w_ℓ
    params: NetworkParams

    def __post_init__(self):
        w = np.array(self.weight_matrix, dtype=np.float64)
        L = self.params.L
        if w.shape != (L, L):
            raise DimensionError(f"weights have shape {w.shape}, expected ({L}, {L})")
        if not np.all(np.isfinite(w)):
            raise ParameterError("dense weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weight_matrix", w)

    @property
    def margin_tol(self) -> float:
        return config.DENSE_MARGIN_TOL

    def inner_products(self, state: np.ndarray) -> np.ndarray:
        return self.weight_matrix @ state.astype(np.float64)

    def inner_product_matrix(self, A: FiringMatrix) -> np.ndarray:
        return self.weight_matrix @ A.predecessors().astype(np.float64)

    def weights(self) -> np.ndarray:
        return self.weight_matrix

    def with_eta_tilde(self, eta_tilde: float) -> "DenseNetwork":
        return DenseNetwork(self.weight_matrix, self.params.with_eta_tilde(eta_tilde))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DenseNetwork)
            and self.params == other.params
            and np.array_equal(self.weight_matrix, other.weight_matrix)
        )

    __hash__ = None


@dataclass(frozen=True)
class TrainConfig:
    schedule: str = "kaczmarz"
    max_updates: int = 1000
    tolerance: float = 0.25
    seed: int = 0
    order: str = "random"
    beta: Optional[float] = None
    eta_tilde: float = 0.0

    def __post_init__(self):
        if self.schedule not in SCHEDULES:
            raise ParameterError(f"Unknown schedule: {self.schedule}")
        if self.order not in ORDERS:
            raise ParameterError(f"Unknown order: {self.order}")
        if self.max_updates < 1:
            raise ParameterError(f"max_updates must be >= 1, got {self.max_updates}")
        if not self.tolerance > 0:
            raise ParameterError(f"tolerance must be > 0, got {self.tolerance}")
        if self.beta is not None and not self.beta > 0:
            raise ParameterError(f"beta must be > 0, got {self.beta}")
        if not 0.0 <= self.eta_tilde < 1.0:
            raise ParameterError(f"eta_tilde must lie in [0, 1), got {self.eta_tilde}")

    @classmethod
    def from_epochs(cls, N: int, max_epochs: int, **kwargs) -> "TrainConfig":
        return cls(max_updates=max(1, max_epochs) * N, **kwargs)


@dataclass
class ResidualHistory:
    update_index: List[int] = field(default_factory=list)
    residual_max: List[float] = field(default_factory=list)
    residual_l2: List[float] = field(default_factory=list)

    def record(self, updates: int, residual: np.ndarray):
        self.update_index.append(int(updates))
        self.residual_max.append(float(np.max(np.abs(residual))) if residual.size else 0.0)
        self.residual_l2.append(float(np.linalg.norm(residual)))

    def __len__(self) -> int:
        return len(self.update_index)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "update_index": self.update_index,
            "residual_max": self.residual_max,
            "residual_l2": self.residual_l2,
        })


@dataclass
class TrainingRun:
    network: DenseNetwork
    history: ResidualHistory
    converged: bool
    updates: int
    unmemorizable: List[Tuple[int, int]]


# ── Shifted system and spectrum ───────────────────────────────────────────

def build_shifted_system(A: FiringMatrix) -> ShiftedSystem:
    A_tilde = np.ascontiguousarray(A.predecessors().T)
    targets = A.bits.copy()
    A_tilde.setflags(write=False)
    targets.setflags(write=False)
    return ShiftedSystem(A_tilde=A_tilde, targets=targets)


def exact_rank(matrix) -> int:
    """
    Rank over the rationals by fraction-free (Bareiss) elimination on Python
    integers. Every intermediate entry is a minor of the input, so the
    divisions are exact.
    """
    M = np.asarray(matrix).astype(np.int64).astype(object)
    if M.ndim != 2:
        raise DimensionError(f"rank needs a 2-D matrix, got shape {M.shape}")
    rows, cols = M.shape
    rank = 0
    prev_pivot = 1
    for c in range(cols):
        if rank == rows:
            break
        nonzero = np.nonzero((M[rank:, c] != 0).astype(bool))[0]
        if nonzero.size == 0:
            continue
        pivot_row = rank + int(nonzero[0])
        if pivot_row != rank:
            M[[rank, pivot_row]] = M[[pivot_row, rank]]
        pivot = M[rank, c]
        if rank + 1 < rows:
            below = M[rank + 1:, c + 1:]
            M[rank + 1:, c + 1:] = (pivot * below - np.outer(M[rank + 1:, c], M[rank, c + 1:])) // prev_pivot
            M[rank + 1:, c] = 0
        prev_pivot = pivot
        rank += 1
    return rank


def rank_is_full(system: ShiftedSystem,
                 cap: int = config.EXACT_RANK_CAP,
                 estimate: bool = False) -> Tuple[bool, int]:
    """rank(Ã) = N ⟹ zero least-squares error for every neuron."""
    if estimate:
        rank = int(np.linalg.matrix_rank(system.A_tilde.astype(np.float64)))
    else:
        if system.N > cap:
            raise CapExceededError(
                f"exact rank limited to N <= {cap} (got N={system.N}); "
                f"use the floating-point estimate (--estimate-rank)"
            )
        rank = exact_rank(system.A_tilde)
    logger.debug("[RANK] N=%d L=%d rank=%d estimate=%s", system.N, system.L, rank, estimate)
    return rank == system.N, rank


def max_eigenvalue(system: ShiftedSystem,
                   tol: float = config.POWER_ITER_TOL,
                   max_iter: int = config.POWER_ITER_MAX) -> float:
    """λ_max(ÃᵀÃ) by power iteration on the smaller of ÃÃᵀ and ÃᵀÃ."""
    X = system.A_tilde.astype(np.float64)
    gram = X @ X.T if system.N <= system.L else X.T @ X
    if not np.any(gram):
        logger.warning("[RANK] max_eigenvalue on a zero matrix - returning 0")
        return 0.0

    x = np.ones(gram.shape[0]) / np.sqrt(gram.shape[0])
    lam = float(x @ gram @ x)
    for _ in range(max_iter):
        y = gram @ x
        x = y / np.linalg.norm(y)
        lam_new = float(x @ gram @ x)
        if abs(lam_new - lam) <= tol * abs(lam_new):
            return lam_new
        lam = lam_new
    logger.warning("[RANK] power iteration hit %d iterations (λ≈%.6g)", max_iter, lam)
    return lam


# ── Gradient descent (full batch, one neuron) ─────────────────────────────

def gradient_descent(system: ShiftedSystem,
                     neuron: int,
                     train: TrainConfig,
                     warm_start=None) -> Tuple[np.ndarray, ResidualHistory]:
    """w ← w + β·Ãᵀ(ã_ℓ − Ãw) with constant 0 < β < 2/λ_max."""
    if train.schedule != "constant" or train.beta is None:
        raise ParameterError("gradient descent needs the constant schedule with an explicit beta")
    if not 1 <= neuron <= system.L:
        raise ParameterError(f"neuron index {neuron} outside 1..{system.L}")

    lam = max_eigenvalue(system)
    if lam > 0 and not 0 < train.beta < 2.0 / lam:
        raise ParameterError(
            f"step size beta={train.beta} violates 0 < beta < 2/lambda_max = {2.0 / lam:.6g}"
        )

    X = system.A_tilde.astype(np.float64)
    b = system.targets[neuron - 1].astype(np.float64)
    w = np.zeros(system.L) if warm_start is None else np.array(warm_start, dtype=np.float64)
    history = ResidualHistory()

    for k in range(train.max_updates + 1):
        r = b - X @ w
        history.record(k, r)
        if np.max(np.abs(r)) <= train.tolerance or k == train.max_updates:
            break
        w = w + train.beta * (X.T @ r)
    return w, history


# ── Stochastic gradient descent / Kaczmarz (all neurons) ──────────────────

def unmemorizable_pairs(A: FiringMatrix) -> List[Tuple[int, int]]:
    """(n−1, n) with a_{n−1} = 0 but a_n ≠ 0; no weights can produce that step."""
    prev = A.predecessors()
    pairs = []
    for j in range(A.N):
        if not prev[:, j].any() and A.bits[:, j].any():
            pairs.append(((j - 1) % A.N + 1, j + 1))
    return pairs


def train_dense(A: FiringMatrix,
                train: TrainConfig,
                p: float = config.DEFAULT_P,
                warm_start=None) -> TrainingRun:
    """
    w_ℓ ← w_ℓ + β(a_{ℓ,n} − ⟨a_{n−1}, w_ℓ⟩)·a_{n−1} for every ℓ at each visit.
    Residuals are checked after every epoch of N updates. A constant schedule
    without beta steps with 1/λ_max, which never exceeds 1/‖a_{n−1}‖².
    """
    L, N = A.L, A.N
    prev = A.predecessors().astype(np.float64)
    target = A.bits.astype(np.float64)
    pop = prev.sum(axis=0)
    support = [np.flatnonzero(prev[:, j]) for j in range(N)]

    W = np.zeros((L, L)) if warm_start is None else np.array(warm_start, dtype=np.float64)
    if W.shape != (L, L):
        raise DimensionError(f"warm start has shape {W.shape}, expected ({L}, {L})")

    bad = unmemorizable_pairs(A)
    if bad:
        logger.warning("[TRAIN] %d structurally unmemorizable step(s): %s", len(bad), bad)

    step = train.beta
    if train.schedule == "constant" and step is None:
        lam = max_eigenvalue(build_shifted_system(A))
        step = 1.0 / lam if lam > 0 else 1.0

    stream = CounterStream.from_seed(train.seed) if train.order == "random" else None
    history = ResidualHistory()
    history.record(0, W @ prev - target)
    converged = history.residual_max[-1] <= train.tolerance
    updates = 0

    while not converged and updates < train.max_updates:
        batch = min(N, train.max_updates - updates)
        if stream is None:
            order = (np.arange(batch) + updates) % N
        else:
            order = stream.integers(N, batch)

        for j in order:
            idx = support[j]
            if idx.size == 0:
                continue
            beta = 1.0 / pop[j] if train.schedule == "kaczmarz" else step
            r = target[:, j] - W[:, idx].sum(axis=1)
            W[:, idx] += beta * r[:, None]
        updates += batch

        residual = W @ prev - target
        if not np.all(np.isfinite(residual)):
            raise ParameterError(f"training diverged after {updates} updates (beta={step})")
        history.record(updates, residual)
        converged = history.residual_max[-1] <= train.tolerance

    if not converged:
        logger.info("[TRAIN] multi-pass stopped at %d updates | max residual %.4g > %.4g",
                    updates, history.residual_max[-1], train.tolerance)

    params = NetworkParams(L=L, theta=config.MULTI_PASS_THETA, eta_tilde=train.eta_tilde, p=p)
    return TrainingRun(
        network=DenseNetwork(W, params),
        history=history,
        converged=converged,
        updates=updates,
        unmemorizable=bad,
    )


def sgd_train(A: FiringMatrix, train: TrainConfig, p: float = config.DEFAULT_P) -> DenseNetwork:
    """Multi-pass training; raises UnmemorizableError instead of training a hopeless A."""
    bad = unmemorizable_pairs(A)
    if bad:
        raise UnmemorizableError(bad)
    return train_dense(A, train, p).network
