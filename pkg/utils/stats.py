"""
SEQMEM - BINOMIAL STATISTICS
"""

from typing import Tuple

from scipy import stats

from core.errors import ParameterError


def clopper_pearson(successes: int, trials: int, confidence: float = 0.99) -> Tuple[float, float]:
    """
    Exact two-sided binomial confidence interval for successes/trials.
    Uses the beta-quantile form; the ends are pinned to 0 and 1 when
    successes is 0 or trials.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if not 0 <= successes <= trials:
        raise ParameterError(f"successes {successes} outside [0, {trials}]")
    if not 0.0 < confidence < 1.0:
        raise ParameterError(f"confidence must lie in (0, 1), got {confidence}")

    alpha = 1.0 - confidence
    if successes == 0:
        low = 0.0
    else:
        low = float(stats.beta.ppf(alpha / 2, successes, trials - successes + 1))
    if successes == trials:
        high = 1.0
    else:
        high = float(stats.beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return low, high
