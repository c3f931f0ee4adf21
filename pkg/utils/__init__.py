"""
Utility modules
"""

from .rng import GENERATOR_NAME, GENERATOR_VERSION, CounterStream, mix64, trial_keys, uniform_block
from .stats import clopper_pearson

__all__ = [
    "GENERATOR_NAME", "GENERATOR_VERSION", "CounterStream", "mix64", "trial_keys",
    "uniform_block", "clopper_pearson",
]
