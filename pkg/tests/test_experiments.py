import numpy as np
import pytest

from core.bounds import BoundParams, failure_bound
from core.errors import CapExceededError, ParameterError
from core.experiments import (
    ExperimentConfig, estimate_mgf, exhaustive_exact, monte_carlo, rank_survey,
    run_trial, sample_bernoulli_matrix, sample_bits, trial_matrix,
)
from core.multi_pass import TrainConfig
from utils.rng import CounterStream, mix64, trial_keys, uniform_block
from utils.stats import clopper_pearson


# ── Counter-based generator ───────────────────────────────────────────────

def test_uniform_block_in_unit_interval():
    u = uniform_block(trial_keys(3, np.arange(5)), 1000)
    assert u.shape == (5, 1000)
    assert u.min() >= 0.0 and u.max() < 1.0


def test_uniform_block_offsets_compose():
    key = trial_keys(9, [4])
    whole = uniform_block(key, 30)[0]
    assert np.array_equal(whole[10:], uniform_block(key, 20, offset=10)[0])


def test_counter_stream_matches_block():
    stream = CounterStream.from_seed(5)
    first, second = stream.uniform(7), stream.uniform(5)
    block = uniform_block(np.uint64(int(mix64(5))), 12)
    assert np.array_equal(np.concatenate([first, second]), block)


def test_counter_stream_integers_in_range():
    draws = CounterStream.from_seed(1).integers(6, 5000)
    assert draws.min() == 0 and draws.max() == 5
    assert np.bincount(draws).min() > 700


def test_trial_keys_distinct():
    keys = trial_keys(0, np.arange(10_000))
    assert np.unique(keys).size == 10_000


# ── Sampling ──────────────────────────────────────────────────────────────

def test_sampling_extremes():
    assert not sample_bernoulli_matrix(4, 5, 0.0, 17).bits.any()
    assert sample_bernoulli_matrix(4, 5, 1.0, 17).bits.all()


def test_sampling_density():
    bits = sample_bernoulli_matrix(1000, 1000, 0.5, 123).bits
    sigma = np.sqrt(0.25 / bits.size)
    assert abs(bits.mean() - 0.5) <= 4 * sigma


def test_sampling_rejects_bad_p():
    with pytest.raises(ParameterError):
        sample_bernoulli_matrix(2, 2, 1.5, 0)


def test_batch_and_single_sampling_agree():
    keys = trial_keys(42, np.arange(6))
    stack = sample_bits(keys, 5, 4, 0.3)
    for i in range(6):
        assert np.array_equal(stack[i], sample_bernoulli_matrix(5, 4, 0.3, keys[i]).bits)


# ── Trials ────────────────────────────────────────────────────────────────

def _find_trial(cfg, bits):
    for i in range(500):
        if np.array_equal(trial_matrix(cfg, i).bits, bits):
            return i
    raise AssertionError("no trial drew the requested matrix")


def test_tiny_trial_outcomes():
    cfg = ExperimentConfig(L=1, N=2, p=0.5, eta_tilde=0.125, trials=1)
    assert run_trial(cfg, _find_trial(cfg, [[0, 0]])).perfect
    assert not run_trial(cfg, _find_trial(cfg, [[1, 0]])).perfect


def test_trial_is_deterministic():
    cfg = ExperimentConfig(L=30, N=4, p=0.5, eta_tilde=0.125, seed=77)
    assert run_trial(cfg, 13) == run_trial(cfg, 13)


def test_config_validation():
    with pytest.raises(ParameterError):
        ExperimentConfig(L=3, N=2, p=0.5, eta_tilde=0.125, trials=0)
    with pytest.raises(ParameterError):
        ExperimentConfig(L=3, N=2, p=0.5, eta_tilde=0.125, workers=0)
    with pytest.raises(ParameterError):
        ExperimentConfig(L=3, N=2, p=0.5, eta_tilde=0.125, mode="two-pass")


def test_multi_pass_config_carries_eta_tilde():
    cfg = ExperimentConfig(L=3, N=2, p=0.5, eta_tilde=0.3, mode="multi-pass")
    assert cfg.train.eta_tilde == 0.3
    assert cfg.echo()["train"]["schedule"] == "kaczmarz"


def test_multi_pass_unmemorizable_counts_as_failure():
    cfg = ExperimentConfig(L=1, N=2, p=0.5, eta_tilde=0.125, mode="multi-pass",
                           train=TrainConfig(max_updates=50))
    outcome = run_trial(cfg, _find_trial(cfg, [[1, 0]]))
    assert not outcome.perfect
    assert outcome.failures >= 1


# ── Monte Carlo ───────────────────────────────────────────────────────────

def test_tiny_monte_carlo_matches_exact_value():
    cfg = ExperimentConfig(L=1, N=2, p=0.5, eta_tilde=0.125, trials=4096, seed=7)
    report = monte_carlo(cfg)
    assert report.ci_low <= 0.5 <= report.ci_high
    assert report.ci_low <= report.rate <= report.ci_high
    assert report.generator == {"name": "splitmix64-counter", "version": "1"}


def test_single_trial_rate_is_binary():
    report = monte_carlo(ExperimentConfig(L=5, N=3, p=0.5, eta_tilde=0.125, trials=1))
    assert report.rate in (0.0, 1.0)


def test_large_L_rate_below_bound():
    cfg = ExperimentConfig(L=10_000, N=4, p=0.5, eta_tilde=0.125, trials=200, seed=1)
    report = monte_carlo(cfg)
    assert report.bound_total == pytest.approx(
        failure_bound(BoundParams(10_000, 4, 0.5, 0.125)).total)
    assert report.bound_total == pytest.approx(0.026, abs=0.002)
    assert report.rate <= report.bound_total


@pytest.mark.parametrize("L,N,p,eta_tilde", [
    (10_000, 4, 0.5, 0.125),
    (5000, 2, 0.5, 0.125),
    (6000, 2, 0.5, 0.25),
    (8000, 2, 0.3, 0.125),
    (20_000, 8, 0.5, 0.125),
])
def test_observed_rate_within_bound(L, N, p, eta_tilde):
    report = monte_carlo(ExperimentConfig(L=L, N=N, p=p, eta_tilde=eta_tilde,
                                          trials=200, seed=21, confidence=0.999))
    assert report.bound_total < 1.0
    assert report.ci_low <= report.bound_total


def test_zero_eta_tilde_has_no_bound():
    report = monte_carlo(ExperimentConfig(L=20, N=3, p=0.5, eta_tilde=0.0, trials=10))
    assert report.bound_total is None
    assert report.to_dict()["bound_total"] is None


@pytest.mark.parametrize("workers", [2, 8])
def test_report_independent_of_worker_count(workers):
    base = ExperimentConfig(L=12, N=3, p=0.5, eta_tilde=0.125, trials=300, seed=99)
    serial = monte_carlo(base)
    parallel = monte_carlo(ExperimentConfig(L=12, N=3, p=0.5, eta_tilde=0.125, trials=300,
                                            seed=99, workers=workers))
    assert serial.to_dict(include_timing=False) == parallel.to_dict(include_timing=False)
    assert np.array_equal(serial.trial_failures, parallel.trial_failures)


def test_trial_rows_shape():
    report = monte_carlo(ExperimentConfig(L=6, N=3, p=0.5, eta_tilde=0.125, trials=25, seed=3))
    rows = report.trial_rows()
    assert [r[0] for r in rows] == list(range(25))
    assert sum(not perfect for _, perfect, _ in rows) == report.failures


def test_multi_pass_monte_carlo_runs():
    cfg = ExperimentConfig(L=40, N=8, p=0.5, eta_tilde=0.4, mode="multi-pass",
                           trials=6, seed=2, train=TrainConfig.from_epochs(8, 200))
    report = monte_carlo(cfg)
    assert 0 <= report.failures <= 6
    assert report.config["mode"] == "multi-pass"


# ── Exhaustive oracle ─────────────────────────────────────────────────────

def test_exhaustive_tiny_case():
    assert exhaustive_exact(1, 2, 0.5, 0.125) == pytest.approx(0.5, abs=1e-15)


def test_exhaustive_small_p_concentrates_on_success():
    values = [exhaustive_exact(2, 2, p, 0.125) for p in (0.1, 0.01, 0.001)]
    assert values[0] > values[1] > values[2]
    assert values[2] < 0.01


def test_exhaustive_cap():
    with pytest.raises(CapExceededError):
        exhaustive_exact(5, 5, 0.5, 0.125)


SMALL_SHAPES = [(L, N) for N in range(2, 13) for L in range(1, 12 // N + 1)]


@pytest.mark.parametrize("p", [0.25, 0.5])
@pytest.mark.parametrize("eta_tilde", [0.0, 0.125])
@pytest.mark.parametrize("L,N", SMALL_SHAPES)
def test_monte_carlo_agrees_with_exhaustive(L, N, p, eta_tilde):
    q = exhaustive_exact(L, N, p, eta_tilde)
    report = monte_carlo(ExperimentConfig(L=L, N=N, p=p, eta_tilde=eta_tilde,
                                          trials=100_000, seed=11, confidence=0.999))
    assert report.ci_low <= q <= report.ci_high


# ── MGF of the interference term ──────────────────────────────────────────

def test_mgf_at_zero():
    diag = estimate_mgf(10, 5, 0.5, 0.0, 1000, 0)
    assert diag.estimate == 1.0
    assert diag.bound == 1.0


def test_mgf_sample_minimum():
    with pytest.raises(ParameterError):
        estimate_mgf(10, 5, 0.5, 0.1, 999, 0)


@pytest.mark.parametrize("t", [-0.2, -0.05, 0.05, 0.2])
def test_mgf_estimate_below_bound(t):
    diag = estimate_mgf(10, 5, 0.5, t, 100_000, 4)
    assert diag.bound == pytest.approx(np.exp(t * t * 50 / 8))
    assert diag.estimate <= diag.bound * (1 + 5 * diag.std_error / diag.estimate)
    assert diag.estimate > 0


def test_interference_has_zero_mean():
    diag = estimate_mgf(10, 5, 0.5, 0.05, 100_000, 8)
    assert abs(diag.mean_S) <= 4 * diag.std_error_S


def test_tail_frequency_under_chernoff_bound():
    diag = estimate_mgf(200, 4, 0.5, 0.01, 20_000, 5, eta_tilde=0.125)
    assert diag.tail_frequency is not None
    assert diag.tail_frequency <= diag.tail_bound


# ── Rank survey and statistics ────────────────────────────────────────────

def test_rank_survey_above_floor():
    survey = rank_survey(40, 10, 0.5, 200, 0)
    assert survey.trials == 200
    assert survey.fraction == survey.full_rank / 200
    assert survey.fraction >= survey.floor - 0.05


def test_clopper_pearson_edges():
    assert clopper_pearson(0, 10)[0] == 0.0
    assert clopper_pearson(10, 10)[1] == 1.0
    low, high = clopper_pearson(50, 100, 0.95)
    assert low == pytest.approx(0.3983, abs=1e-3)
    assert high == pytest.approx(0.6017, abs=1e-3)
    with pytest.raises(ParameterError):
        clopper_pearson(11, 10)
