"""
SEQMEM v1.0 - CONFIG
Recurrent sequence memory | single-pass & multi-pass | bounds & Monte Carlo
"""

import os
from typing import Dict, Any

# ======================================================
# PROCESS SETTINGS
# ======================================================
DEFAULT_WORKERS = os.getenv("SEQMEM_WORKERS", "1")    # converted and checked by the CLI (--workers)
LOG_LEVEL = os.getenv("SEQMEM_LOG_LEVEL", "WARNING").upper()

# ======================================================
# FILE FORMATS
# ======================================================
NETWORK_FORMAT_VERSION = 1
NETWORK_MODES = ("single-pass", "multi-pass")

# ======================================================
# NETWORK MODEL
# ======================================================
DEFAULT_P = 0.5
DEFAULT_ETA_TILDE = 0.125
MULTI_PASS_THETA = 0.5      # least-squares targets are 0/1
DENSE_MARGIN_TOL = 1e-12    # dense margins inside this band count as failures

# ======================================================
# LINEAR ALGEBRA
# ======================================================
EXACT_RANK_CAP = 512
POWER_ITER_TOL = 1e-10
POWER_ITER_MAX = 20000

# ======================================================
# MULTI-PASS TRAINING DEFAULTS
# ======================================================
TRAIN_DEFAULTS: Dict[str, Any] = {
    "schedule": "kaczmarz",
    "order": "random",
    "max_epochs": 500,
    "tolerance": 0.25,
    "beta": None,           # constant schedule only; None → 1/λ_max
    "seed": 0,
}

# ======================================================
# EXPERIMENTS
# ======================================================
EXHAUSTIVE_CAP = 20         # L·N ≤ 20 → at most ~10⁶ matrices
DEFAULT_CONFIDENCE = 0.99
DEFAULT_TRIALS = 1000
DEFAULT_SEED = 0
MGF_MIN_SAMPLES = 1000
BATCH_ENTRY_BUDGET = 4_000_000   # matrix entries per vectorized trial batch

# ======================================================
# L_MIN SWEEP GRID (p = 1/2, η̃ = 1/8)
# ======================================================
SWEEP_GRID: Dict[str, Any] = {
    "n_list": [10, 30, 60, 100, 300, 600, 1000, 1300, 2000, 2300,
               3000, 4000, 5000, 6000, 7000, 8000, 10000],
    "targets": [1e-3, 1e-6, 1e-9, 1e-12],
    "p": 0.5,
    "eta_tilde": 0.125,
}
