"""
SEQMEM - EXPERIMENTS
Seeded random instances | Monte Carlo Pr[E_A] | exhaustive oracle | MGF check

Trial i draws its matrix from the counter stream keyed by (seed, i), so every
outcome is a pure function of (config, i) and worker count is only a speed knob.
"""

import concurrent.futures
import logging
import math
import time
from dataclasses import dataclass, field, asdict, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

import config
from core.bounds import BoundParams, full_rank_floor, mgf_bound, s_tail_bound, failure_bound
from core.errors import CapExceededError, ParameterError, UnmemorizableError
from core.multi_pass import TrainConfig, build_shifted_system, rank_is_full, sgd_train
from core.network import FiringMatrix, default_threshold, verify_memorization
from core.single_pass import batch_failure_counts
from utils.rng import GENERATOR_NAME, GENERATOR_VERSION, trial_keys, uniform_block
from utils.stats import clopper_pearson

logger = logging.getLogger(__name__)

MODES = ("single-pass", "multi-pass")


@dataclass(frozen=True)
class ExperimentConfig:
    L: int
    N: int
    p: float
    eta_tilde: float
    mode: str = "single-pass"
    train: Optional[TrainConfig] = None
    trials: int = config.DEFAULT_TRIALS
    seed: int = config.DEFAULT_SEED
    workers: int = 1
    confidence: float = config.DEFAULT_CONFIDENCE

    def __post_init__(self):
        if self.L < 1 or self.N < 2:
            raise ParameterError(f"need L >= 1 and N >= 2, got L={self.L} N={self.N}")
        if not 0.0 < self.p < 1.0:
            raise ParameterError(f"p must lie in (0, 1), got {self.p}")
        if not 0.0 <= self.eta_tilde < 1.0:
            raise ParameterError(f"eta_tilde must lie in [0, 1), got {self.eta_tilde}")
        if self.mode not in MODES:
            raise ParameterError(f"Unknown mode: {self.mode}")
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")
        if not 0.0 < self.confidence < 1.0:
            raise ParameterError(f"confidence must lie in (0, 1), got {self.confidence}")
        if self.mode == "multi-pass":
            train = self.train or TrainConfig.from_epochs(
                self.N, config.TRAIN_DEFAULTS["max_epochs"],
                tolerance=config.TRAIN_DEFAULTS["tolerance"],
            )
            object.__setattr__(self, "train", replace(train, eta_tilde=self.eta_tilde))

    def echo(self) -> Dict[str, Any]:
        out = {
            "L": self.L, "N": self.N, "p": self.p, "eta_tilde": self.eta_tilde,
            "mode": self.mode, "trials": self.trials, "seed": self.seed,
            "confidence": self.confidence,
        }
        if self.train is not None:
            out["train"] = asdict(self.train)
        return out


@dataclass(frozen=True)
class TrialOutcome:
    perfect: bool
    failures: int


@dataclass
class ExperimentReport:
    config: Dict[str, Any]
    trials: int
    failures: int
    rate: float
    ci_low: float
    ci_high: float
    bound_total: Optional[float]
    elapsed_seconds: float
    generator: Dict[str, str]
    trial_failures: np.ndarray = field(default=None, repr=False)

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        out = {
            "config": self.config,
            "trials": self.trials,
            "failures": self.failures,
            "rate": self.rate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "bound_total": self.bound_total,
            "generator": self.generator,
        }
        if include_timing:
            out["elapsed_seconds"] = self.elapsed_seconds
        return out

    def trial_rows(self) -> List[Tuple[int, bool, int]]:
        return [(i, bool(f == 0), int(f)) for i, f in enumerate(self.trial_failures)]


@dataclass(frozen=True)
class MgfDiagnostic:
    L: int
    N: int
    p: float
    t: float
    samples: int
    seed: int
    estimate: float
    bound: float
    std_error: float
    mean_S: float
    std_error_S: float
    tail_threshold: Optional[float] = None
    tail_frequency: Optional[float] = None
    tail_bound: Optional[float] = None


@dataclass(frozen=True)
class RankSurvey:
    L: int
    N: int
    p: float
    trials: int
    full_rank: int
    fraction: float
    floor: float


# ── Sampling ──────────────────────────────────────────────────────────────

def sample_bits(keys: np.ndarray, L: int, N: int, p: float) -> np.ndarray:
    """(T, L, N) i.i.d. Ber(p) entries, one counter stream per key, row-major counters."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    keys = np.atleast_1d(keys)
    u = uniform_block(keys, L * N)
    return (u < p).astype(np.uint8).reshape(keys.size, L, N)


def sample_bernoulli_matrix(L: int, N: int, p: float, key: int) -> FiringMatrix:
    return FiringMatrix(sample_bits(np.asarray([key], dtype=np.uint64), L, N, p)[0])


def trial_matrix(cfg: ExperimentConfig, trial_index: int) -> FiringMatrix:
    key = trial_keys(cfg.seed, [trial_index])
    return FiringMatrix(sample_bits(key, cfg.L, cfg.N, cfg.p)[0])


def _batch_size(L: int, N: int) -> int:
    return max(1, config.BATCH_ENTRY_BUDGET // max(L * N, N * N))


def _multi_pass_failures(cfg: ExperimentConfig, A: FiringMatrix) -> int:
    try:
        net = sgd_train(A, cfg.train, cfg.p)
    except UnmemorizableError as exc:
        return int(sum(int(A.column(n).sum()) for _, n in exc.pairs))
    return len(verify_memorization(net, A).failures)


def _run_range(cfg: ExperimentConfig, start: int, stop: int) -> np.ndarray:
    """Failure counts for trials start..stop-1."""
    out = np.zeros(stop - start, dtype=np.int64)
    if cfg.mode == "single-pass":
        size = _batch_size(cfg.L, cfg.N)
        for lo in range(start, stop, size):
            hi = min(stop, lo + size)
            bits = sample_bits(trial_keys(cfg.seed, np.arange(lo, hi)), cfg.L, cfg.N, cfg.p)
            out[lo - start:hi - start] = batch_failure_counts(bits, cfg.p, cfg.eta_tilde)
    else:
        for i in range(start, stop):
            out[i - start] = _multi_pass_failures(cfg, trial_matrix(cfg, i))
    return out


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TrialOutcome:
    failures = int(_run_range(cfg, trial_index, trial_index + 1)[0])
    return TrialOutcome(perfect=failures == 0, failures=failures)


def _bound_total(cfg: ExperimentConfig) -> Optional[float]:
    if not 0.0 < cfg.eta_tilde < 1.0:
        return None
    return failure_bound(BoundParams(cfg.L, cfg.N, cfg.p, cfg.eta_tilde)).total


def monte_carlo(cfg: ExperimentConfig) -> ExperimentReport:
    started = time.perf_counter()
    chunks = np.array_split(np.arange(cfg.trials), cfg.workers)
    ranges = [(int(c[0]), int(c[-1]) + 1) for c in chunks if c.size]

    if cfg.workers == 1:
        parts = [_run_range(cfg, lo, hi) for lo, hi in ranges]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_run_range, cfg, lo, hi) for lo, hi in ranges]
            parts = [f.result() for f in futures]

    per_trial = np.concatenate(parts)
    failed = int(np.count_nonzero(per_trial))
    ci_low, ci_high = clopper_pearson(failed, cfg.trials, cfg.confidence)
    report = ExperimentReport(
        config=cfg.echo(),
        trials=cfg.trials,
        failures=failed,
        rate=failed / cfg.trials,
        ci_low=ci_low,
        ci_high=ci_high,
        bound_total=_bound_total(cfg),
        elapsed_seconds=time.perf_counter() - started,
        generator={"name": GENERATOR_NAME, "version": GENERATOR_VERSION},
        trial_failures=per_trial,
    )
    logger.info("[MC] L=%d N=%d p=%.3g eta~=%.3g %s | %d/%d failed | CI [%.4g, %.4g] | %.2fs",
                cfg.L, cfg.N, cfg.p, cfg.eta_tilde, cfg.mode, failed, cfg.trials,
                ci_low, ci_high, report.elapsed_seconds)
    return report


# ── Exact oracle ──────────────────────────────────────────────────────────

def exhaustive_exact(L: int, N: int, p: float, eta_tilde: float,
                     cap: int = config.EXHAUSTIVE_CAP) -> float:
    """Exact Pr[E_A] for single-pass training, enumerating all 2^{LN} matrices."""
    cells = L * N
    if cells > cap:
        raise CapExceededError(f"exhaustive enumeration limited to L*N <= {cap}, got {cells}")
    if L < 1 or N < 2:
        raise ParameterError(f"need L >= 1 and N >= 2, got L={L} N={N}")
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must lie in (0, 1), got {p}")

    shifts = np.arange(cells, dtype=np.int64)
    failing_by_ones = np.zeros(cells + 1, dtype=np.int64)
    total = 1 << cells
    block = 1 << 16
    for lo in range(0, total, block):
        codes = np.arange(lo, min(total, lo + block), dtype=np.int64)
        bits = ((codes[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1, L, N)
        failed = batch_failure_counts(bits, p, eta_tilde) > 0
        ones = bits.reshape(-1, cells).sum(axis=1)
        failing_by_ones += np.bincount(ones[failed], minlength=cells + 1)

    prob = math.fsum(
        int(count) * p ** k * (1.0 - p) ** (cells - k)
        for k, count in enumerate(failing_by_ones) if count
    )
    logger.info("[MC] exhaustive L=%d N=%d p=%.3g eta~=%.3g -> %.12g", L, N, p, eta_tilde, prob)
    return prob


# ── Interference term S ───────────────────────────────────────────────────

def interference_samples(L: int, N: int, p: float, samples: int, seed: int) -> np.ndarray:
    """S_{1,1} = Σ_{j≠1} a_{1,j}⟨a_0, a_{j−1} − p·1⟩ for `samples` independent A."""
    out = np.empty(samples, dtype=np.float64)
    size = _batch_size(L, N)
    for lo in range(0, samples, size):
        hi = min(samples, lo + size)
        bits = sample_bits(trial_keys(seed, np.arange(lo, hi)), L, N, p)
        prev = np.roll(bits, 1, axis=2).astype(np.float64)
        a0 = prev[:, :, 0]
        ips = np.einsum("tl,tlj->tj", a0, prev - p)
        out[lo:hi] = np.einsum("tj,tj->t", bits[:, 0, 1:].astype(np.float64), ips[:, 1:])
    return out


def estimate_mgf(L: int, N: int, p: float, t: float, samples: int, seed: int,
                 eta_tilde: Optional[float] = None) -> MgfDiagnostic:
    if samples < config.MGF_MIN_SAMPLES:
        raise ParameterError(f"samples must be >= {config.MGF_MIN_SAMPLES}, got {samples}")
    S = interference_samples(L, N, p, samples, seed)
    e = np.exp(t * S)
    root_n = math.sqrt(samples)

    tail_threshold = tail_frequency = tail_bound = None
    if eta_tilde is not None:
        tail_threshold = default_threshold(L, p) * (1.0 - eta_tilde)
        tail_frequency = float(np.mean(np.abs(S) >= tail_threshold))
        tail_bound = s_tail_bound(L, N, p, eta_tilde)

    return MgfDiagnostic(
        L=L, N=N, p=p, t=t, samples=samples, seed=seed,
        estimate=float(np.mean(e)),
        bound=mgf_bound(t, L, N),
        std_error=float(np.std(e, ddof=1)) / root_n,
        mean_S=float(np.mean(S)),
        std_error_S=float(np.std(S, ddof=1)) / root_n,
        tail_threshold=tail_threshold,
        tail_frequency=tail_frequency,
        tail_bound=tail_bound,
    )


def rank_survey(L: int, N: int, p: float, trials: int, seed: int) -> RankSurvey:
    """Fraction of seeded Ber(p) matrices whose shifted system has full rank N."""
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    full = 0
    for i in range(trials):
        bits = sample_bits(trial_keys(seed, [i]), L, N, p)[0]
        ok, _ = rank_is_full(build_shifted_system(FiringMatrix(bits)))
        full += int(ok)
    survey = RankSurvey(L=L, N=N, p=p, trials=trials, full_rank=full,
                        fraction=full / trials, floor=full_rank_floor(N, p))
    logger.info("[RANK] survey L=%d N=%d p=%.3g | %d/%d full rank", L, N, p, full, trials)
    return survey
