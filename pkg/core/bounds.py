"""
SEQMEM - BOUNDS & CAPACITY
Memorization-failure bound, its inversion, Chernoff tails, capacity formulas

Exponentials are formed in the log domain; underflow to 0 only ever shrinks a bound.
KL divergence is in nats, entropy and capacities in bits.
"""

import logging
import math
from dataclasses import dataclass, asdict
from typing import Dict, List

import numpy as np
import pandas as pd
from scipy import special, stats

from core.errors import BoundSearchError, ParameterError

logger = logging.getLogger(__name__)


def _open_unit(name: str, value: float):
    if not 0.0 < value < 1.0:
        raise ParameterError(f"{name} must lie in (0, 1), got {value}")


@dataclass(frozen=True)
class BoundParams:
    L: int
    N: int
    p: float
    eta_tilde: float

    def __post_init__(self):
        if self.L < 1:
            raise ParameterError(f"L must be >= 1, got {self.L}")
        if self.N < 2:
            raise ParameterError(f"N must be >= 2, got {self.N}")
        _open_unit("p", self.p)
        _open_unit("eta_tilde", self.eta_tilde)


@dataclass(frozen=True)
class BoundResult:
    term_hebb: float
    term_binom: float
    total: float
    clamped: float


def kl_bernoulli(p1: float, p2: float) -> float:
    """D(p1 ∥ p2) between Bernoulli laws, nats."""
    _open_unit("p1", p1)
    _open_unit("p2", p2)
    return float(special.rel_entr(p1, p2) + special.rel_entr(1.0 - p1, 1.0 - p2))


def hebb_exponent(p: float, eta_tilde: float) -> float:
    """⅛(1−η̃)²p²(1−p)², the rate of the interference tail per unit L/N."""
    return 0.125 * (1.0 - eta_tilde) ** 2 * p ** 2 * (1.0 - p) ** 2


def _log_terms(params: BoundParams):
    L, N, p, et = params.L, params.N, params.p, params.eta_tilde
    log_hebb = math.log(2.0 * L * N) - hebb_exponent(p, et) * L / N
    log_binom = math.log(float(L) * N) - kl_bernoulli(0.5 * (1.0 + et) * p, p) * L
    return log_hebb, log_binom


def failure_bound(params: BoundParams) -> BoundResult:
    """
    Pr[memorization not perfect] < 2LN·exp(−⅛(1−η̃)²p²(1−p)²·L/N)
                                   + LN·exp(−D((1+η̃)p/2 ∥ p)·L)
    """
    log_hebb, log_binom = _log_terms(params)
    term_hebb = math.exp(log_hebb) if log_hebb < 709.0 else math.inf
    term_binom = math.exp(log_binom) if log_binom < 709.0 else math.inf
    total = term_hebb + term_binom
    return BoundResult(term_hebb=term_hebb, term_binom=term_binom,
                       total=total, clamped=min(1.0, total))


def entry_error_bound(params: BoundParams) -> float:
    """Bound on Pr[one entry a_{ℓ,n} is reproduced wrongly]; failure_bound is LN times this."""
    L, N, p, et = params.L, params.N, params.p, params.eta_tilde
    return (2.0 * math.exp(-hebb_exponent(p, et) * L / N)
            + math.exp(-kl_bernoulli(0.5 * (1.0 + et) * p, p) * L))


def chernoff_t_opt(L: int, N: int, p: float, eta_tilde: float) -> float:
    """Minimizer 4θ(1−η̃)/(LN) of the Chernoff exponent for S."""
    theta = 0.25 * L * p * (1.0 - p)
    return 4.0 * theta * (1.0 - eta_tilde) / (L * N)


def s_tail_bound(L: int, N: int, p: float, eta_tilde: float) -> float:
    """Pr[|S| ≥ θ(1−η̃)] < 2·exp(−2θ²(1−η̃)²/(LN))."""
    theta = 0.25 * L * p * (1.0 - p)
    return 2.0 * math.exp(-2.0 * theta ** 2 * (1.0 - eta_tilde) ** 2 / (L * N))


def _total(L: int, N: int, p: float, eta_tilde: float) -> float:
    return failure_bound(BoundParams(L, N, p, eta_tilde)).total


def min_L_for_target(N: int, p: float, eta_tilde: float, target: float) -> int:
    """Smallest L with failure_bound.total ≤ target (doubling, then bisection)."""
    _open_unit("target", target)
    BoundParams(1, N, p, eta_tilde)

    hi = 1
    while _total(hi, N, p, eta_tilde) > target:
        hi *= 2
        if hi > 1 << 62:
            raise BoundSearchError(f"no L reaches target {target} for N={N}")
    lo = hi // 2

    # invariant: total(lo) > target >= total(hi), lo = 0 meaning "below 1"
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _total(mid, N, p, eta_tilde) > target:
            lo = mid
        else:
            hi = mid

    L = hi
    ok = _total(L, N, p, eta_tilde) <= target and (L == 1 or _total(L - 1, N, p, eta_tilde) > target)
    if not ok:
        raise BoundSearchError(f"crossing check failed at L={L} (N={N}, target={target})")
    logger.debug("[BOUND] N=%d target=%g -> L=%d", N, target, L)
    return L


def sufficient_N(L: int, p: float, eta_tilde: float) -> int:
    """floor(⅛(1−η̃)²p²(1−p)²·L/(2 ln L)); 0 means no guaranteed N."""
    if L < 2:
        raise ParameterError(f"L must be >= 2, got {L}")
    _open_unit("p", p)
    _open_unit("eta_tilde", eta_tilde)
    return int(math.floor(hebb_exponent(p, eta_tilde) * L / (2.0 * math.log(L))))


def binomial_tail_bound(L: int, p: float, delta: float) -> float:
    """Pr[Bin(L, p) ≤ (1−δ)Lp] ≤ exp(−D((1−δ)p ∥ p)·L)."""
    _open_unit("delta", delta)
    _open_unit("p", p)
    return math.exp(-kl_bernoulli((1.0 - delta) * p, p) * L)


def exact_binomial_cdf(L: int, p: float, k: int) -> float:
    """Σ_{i≤k} C(L,i)p^i(1−p)^{L−i} summed from log-pmfs with compensated accumulation."""
    if k < 0:
        return 0.0
    if k >= L:
        return 1.0
    log_pmf = stats.binom.logpmf(np.arange(k + 1), L, p)
    peak = float(np.max(log_pmf))
    return math.exp(peak) * math.fsum(np.exp(log_pmf - peak).tolist())


def mgf_bound(t: float, L: int, N: int) -> float:
    """E[e^{tS}] ≤ exp(t²·L·N/8)."""
    return math.exp(t * t * L * N / 8.0)


def binary_entropy(p: float) -> float:
    """H_b(p) in bits."""
    _open_unit("p", p)
    return float(-p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p))


def full_rank_floor(N: int, p: float) -> float:
    """1 − (1−p)^N: rank guarantee for L ≥ N, p ≤ ½ with the vanishing term dropped."""
    _open_unit("p", p)
    return 1.0 - (1.0 - p) ** N


def capacity_constant(p: float, eta_tilde: float) -> float:
    """C_{p,η̃} = (1/16)(1−η̃)²p²(1−p)²H_b(p)."""
    return 0.5 * hebb_exponent(p, eta_tilde) * binary_entropy(p)


@dataclass(frozen=True)
class CapacitySummary:
    typical_set_bits: float
    single_pass_per_neuron_lb: float
    multi_pass_per_neuron_lb: float
    single_pass_per_connection_lb: float
    multi_pass_per_connection_lb: float
    hopfield_hebbian_reference: float
    hopfield_storkey_reference: float
    capacity_constant: float
    units: str = "bits"

    def to_dict(self) -> Dict:
        return asdict(self)


def capacity_summary(L: int, N: int, p: float, eta_tilde: float) -> CapacitySummary:
    params = BoundParams(L, N, p, eta_tilde)
    if params.L < 2:
        raise ParameterError("capacity formulas need L >= 2 (ln L > 0)")
    h = binary_entropy(p)
    c = capacity_constant(p, eta_tilde)
    ln_l = math.log(L)
    return CapacitySummary(
        typical_set_bits=h * N * L,
        single_pass_per_neuron_lb=c * L / ln_l,
        multi_pass_per_neuron_lb=h * L,
        single_pass_per_connection_lb=c / ln_l,
        multi_pass_per_connection_lb=h,
        hopfield_hebbian_reference=L / (2.0 * ln_l),
        hopfield_storkey_reference=L / math.sqrt(2.0 * ln_l),
        capacity_constant=c,
    )


def l_min_sweep(n_list: List[int], targets: List[float], p: float, eta_tilde: float) -> pd.DataFrame:
    """One row per (N, target): N ascending, then target descending."""
    rows = []
    for N in sorted(n_list):
        for target in sorted(targets, reverse=True):
            L = min_L_for_target(N, p, eta_tilde, target)
            res = failure_bound(BoundParams(L, N, p, eta_tilde))
            rows.append({
                "N": int(N),
                "target": float(target),
                "L_min": int(L),
                "bound_at_L_min": res.total,
                "term_hebb": res.term_hebb,
                "term_binom": res.term_binom,
            })
    logger.info("[BOUND] sweep complete | %d rows", len(rows))
    return pd.DataFrame(rows, columns=["N", "target", "L_min", "bound_at_L_min",
                                       "term_hebb", "term_binom"])
