"""
SEQMEM - NETWORK MODEL
Threshold neurons, one-step recurrence, replay and worst-case verification
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from core.errors import DimensionError, ParameterError
from utils.rng import CounterStream

logger = logging.getLogger(__name__)


def as_firing_vector(values, length: Optional[int] = None) -> np.ndarray:
    """Validate a binary vector and return it as uint8."""
    vec = np.asarray(values)
    if vec.ndim != 1 or vec.size < 1:
        raise DimensionError(f"Firing vector must be 1-D and non-empty, got shape {vec.shape}")
    if not np.all((vec == 0) | (vec == 1)):
        raise ParameterError("Firing vector entries must be 0 or 1")
    if length is not None and vec.size != length:
        raise DimensionError(f"Firing vector has length {vec.size}, expected {length}")
    return vec.astype(np.uint8)


@dataclass(frozen=True)
class FiringMatrix:
    """
    Binary L×N pattern matrix A. Column n (1-based) is the firing vector a_n;
    index 0 aliases column N (a_0 := a_N).
    """
    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.ndim != 2:
            raise DimensionError(f"Firing matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise DimensionError("Firing matrix needs at least one row")
        if arr.shape[1] < 2:
            raise DimensionError(f"Firing matrix needs N >= 2 columns, got {arr.shape[1]}")
        if not np.all((arr == 0) | (arr == 1)):
            raise ParameterError("Firing matrix entries must be 0 or 1")
        arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]]) -> "FiringMatrix":
        return cls(np.asarray(columns).T)

    @property
    def L(self) -> int:
        return self.bits.shape[0]

    @property
    def N(self) -> int:
        return self.bits.shape[1]

    def column(self, n: int) -> np.ndarray:
        """a_n with indices taken mod N (a_0 = a_N)."""
        return self.bits[:, (n - 1) % self.N]

    def predecessors(self) -> np.ndarray:
        """L×N array whose column n is a_{n-1}."""
        return np.roll(self.bits, 1, axis=1)

    def __eq__(self, other) -> bool:
        return isinstance(other, FiringMatrix) and np.array_equal(self.bits, other.bits)

    __hash__ = None


def default_threshold(L: int, p: float) -> float:
    """θ = ¼·L·p·(1−p)."""
    return 0.25 * L * p * (1.0 - p)


@dataclass(frozen=True)
class NetworkParams:
    L: int
    theta: float
    eta_tilde: float
    p: float

    def __post_init__(self):
        if self.L < 1:
            raise ParameterError(f"L must be >= 1, got {self.L}")
        if not self.theta > 0:
            raise ParameterError(f"theta must be > 0, got {self.theta}")
        if not 0.0 <= self.eta_tilde < 1.0:
            raise ParameterError(f"eta_tilde must lie in [0, 1), got {self.eta_tilde}")
        if not 0.0 < self.p < 1.0:
            raise ParameterError(f"p must lie in (0, 1), got {self.p}")

    @property
    def eta(self) -> float:
        return self.eta_tilde * self.theta

    def with_eta_tilde(self, eta_tilde: float) -> "NetworkParams":
        return NetworkParams(self.L, self.theta, eta_tilde, self.p)


class Network(Protocol):
    """What the recurrence needs from a trained network."""
    params: NetworkParams

    @property
    def margin_tol(self) -> float: ...

    def inner_products(self, state: np.ndarray) -> np.ndarray: ...

    def inner_product_matrix(self, A: FiringMatrix) -> np.ndarray: ...

    def weights(self) -> np.ndarray: ...


class DisturbancePolicy(Enum):
    NONE = "none"
    ADVERSARIAL = "adversarial"
    SAMPLED = "sampled"


@dataclass
class VerificationReport:
    perfect: bool
    failures: List[Tuple[int, int, str]] = field(default_factory=list)
    min_fire_margin: float = float("inf")
    min_silence_margin: float = float("inf")
    inconsistencies: List[Tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> Dict:
        def finite(x: float) -> Optional[float]:
            return None if not np.isfinite(x) else float(x)

        return {
            "perfect": self.perfect,
            "failure_count": len(self.failures),
            "failures": [
                {"neuron": l, "time": n, "kind": kind} for l, n, kind in self.failures
            ],
            "min_fire_margin": finite(self.min_fire_margin),
            "min_silence_margin": finite(self.min_silence_margin),
            "inconsistencies": [list(pair) for pair in self.inconsistencies],
        }


# ── Single neuron and one step ────────────────────────────────────────────

def neuron_activation(weights, theta: float, state, disturbance: float = 0.0) -> int:
    """ξ(y) = 1 iff ⟨y, w⟩ + disturbance ≥ θ (ties fire)."""
    w = np.asarray(weights, dtype=np.float64)
    y = np.asarray(state)
    if w.ndim != 1 or y.ndim != 1 or w.size != y.size:
        raise DimensionError(f"weights length {w.size} does not match input length {y.size}")
    return int(float(np.dot(y.astype(np.float64), w)) + disturbance >= theta)


def _check_state(network: Network, state) -> np.ndarray:
    return as_firing_vector(state, network.params.L)


def adversarial_disturbances(network: Network, state, target=None) -> np.ndarray:
    """
    Worst-case disturbance vector with entries ±η.
    With a target: push every neuron away from its desired output.
    Without: push every neuron away from its undisturbed output.
    """
    y = _check_state(network, state)
    eta = network.params.eta
    if target is not None:
        wanted = as_firing_vector(target, network.params.L).astype(bool)
    else:
        wanted = network.inner_products(y) >= network.params.theta
    return np.where(wanted, -eta, eta)


def network_step(network: Network, state, disturbances=None) -> np.ndarray:
    y = _check_state(network, state)
    L = network.params.L
    if disturbances is None:
        d = np.zeros(L)
    else:
        d = np.asarray(disturbances, dtype=np.float64)
        if d.shape != (L,):
            raise DimensionError(f"disturbances must have shape ({L},), got {d.shape}")
    return (network.inner_products(y) + d >= network.params.theta).astype(np.uint8)


def run_sequence(network: Network,
                 init,
                 steps: int,
                 policy: str = "none",
                 seed: Optional[int] = None) -> List[np.ndarray]:
    """Iterate the recurrence; returns y[1..steps]."""
    if steps < 1:
        raise ParameterError(f"steps must be >= 1, got {steps}")
    policy = DisturbancePolicy(policy)
    y = _check_state(network, init)
    L = network.params.L
    eta = network.params.eta

    stream = None
    if policy is DisturbancePolicy.SAMPLED:
        if seed is None:
            raise ParameterError("sampled disturbance policy needs a seed")
        stream = CounterStream.from_seed(seed)

    trajectory = []
    for _ in range(steps):
        if policy is DisturbancePolicy.NONE:
            d = None
        elif policy is DisturbancePolicy.ADVERSARIAL:
            d = adversarial_disturbances(network, y)
        else:
            d = (2.0 * stream.uniform(L) - 1.0) * eta
        y = network_step(network, y, d)
        trajectory.append(y)
    return trajectory


def recall(network: Network,
           A: FiringMatrix,
           start: int,
           cycles: int = 1,
           policy: str = "none",
           seed: Optional[int] = None) -> bool:
    """True iff starting at a_start the network emits a_{start+1}, a_{start+2}, ... for cycles·N steps."""
    steps = cycles * A.N
    trajectory = run_sequence(network, A.column(start), steps, policy, seed)
    return all(np.array_equal(y, A.column(start + k)) for k, y in enumerate(trajectory, start=1))


# ── Margins and verification ─────────────────────────────────────────────

def signed_margins(ip: np.ndarray, bits: np.ndarray, theta: float) -> np.ndarray:
    """ip − θ where firing is required, θ − ip where silence is required."""
    return np.where(bits == 1, ip - theta, theta - ip)


def failure_mask(margin: np.ndarray, bits: np.ndarray, eta: float, tol: float = 0.0) -> np.ndarray:
    """
    Events that some disturbance in [−η, η] can flip. Fire events tolerate a
    zero slack (ties fire), silence events do not. A positive tol also rejects
    slacks inside (0, tol].
    """
    slack = margin - eta
    fail = np.where(bits == 1, slack < 0, slack <= 0)
    if tol > 0:
        fail |= slack <= tol
    return fail


def centered_self_product(a, p: float) -> float:
    """⟨a, a − p·1⟩, equal to (1−p)·popcount(a) for binary a."""
    y = as_firing_vector(a).astype(np.float64)
    return float(np.dot(y, y - p))


def find_inconsistencies(A: FiringMatrix) -> List[Tuple[int, int]]:
    """Column pairs (i, j), 1-based, with a_i = a_j but a_{i+1} ≠ a_{j+1}."""
    groups: Dict[bytes, List[int]] = defaultdict(list)
    for n in range(1, A.N + 1):
        groups[A.column(n).tobytes()].append(n)

    pairs = []
    for members in groups.values():
        for x, i in enumerate(members):
            for j in members[x + 1:]:
                if not np.array_equal(A.column(i + 1), A.column(j + 1)):
                    pairs.append((i, j))
    return sorted(pairs)


def _check_dims(network: Network, A: FiringMatrix):
    if network.params.L != A.L:
        raise DimensionError(f"network has L={network.params.L}, matrix has L={A.L}")


def margins(network: Network, A: FiringMatrix) -> np.ndarray:
    _check_dims(network, A)
    ip = network.inner_product_matrix(A)
    return signed_margins(ip, A.bits, network.params.theta)


def verify_memorization(network: Network, A: FiringMatrix) -> VerificationReport:
    """Perfect iff every (ℓ, n) holds for every disturbance in [−η, η]."""
    m = margins(network, A)
    eta = network.params.eta
    fire = A.bits == 1
    fail = failure_mask(m, A.bits, eta, network.margin_tol)

    failures = [
        (int(l) + 1, int(n) + 1, "should-fire" if fire[l, n] else "should-not-fire")
        for l, n in zip(*np.nonzero(fail))
    ]
    slack = m - eta
    min_fire = float(slack[fire].min()) if fire.any() else float("inf")
    min_silence = float(slack[~fire].min()) if (~fire).any() else float("inf")
    inconsistencies = find_inconsistencies(A)

    report = VerificationReport(
        perfect=not failures and not inconsistencies,
        failures=failures,
        min_fire_margin=min_fire,
        min_silence_margin=min_silence,
        inconsistencies=inconsistencies,
    )
    if report.perfect:
        logger.info("[VERIFY] perfect | L=%d N=%d | fire margin %.6g | silence margin %.6g",
                    A.L, A.N, min_fire, min_silence)
    else:
        logger.info("[VERIFY] imperfect | %d failing events | %d inconsistent pairs",
                    len(failures), len(inconsistencies))
    return report
