"""
SEQMEM v1.0 - MAIN ENTRY POINT
Train, replay and verify sequence-memorizing threshold networks;
evaluate and invert the failure bound; run Monte Carlo checks.

Exit codes: 0 success | 1 verify found the memorization imperfect | 2 usage or input error
"""

import argparse
import logging
import sys
from dataclasses import asdict
from typing import List, Optional

import numpy as np
import pandas as pd

import config
from core.bounds import (
    BoundParams, capacity_summary, entry_error_bound, l_min_sweep,
    min_L_for_target, failure_bound,
)
from core.errors import ParameterError, SeqMemError
from core.experiments import (
    ExperimentConfig, estimate_mgf, exhaustive_exact, monte_carlo, rank_survey,
)
from core.multi_pass import TrainConfig, build_shifted_system, rank_is_full, train_dense
from core.network import as_firing_vector, recall, run_sequence, verify_memorization
from core.single_pass import train_single_pass
from reports import ReportWriter, write_csv
from utils.file_formats import dumps_network, read_matrix, read_network

logger = logging.getLogger("main")

MODE_ALIASES = {
    "single": "single-pass",
    "single-pass": "single-pass",
    "multi": "multi-pass",
    "multi-pass": "multi-pass",
}


def _float_list(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _int_list(text: str) -> List[int]:
    return [int(x) for x in text.split(",") if x.strip()]


# ── Parser ────────────────────────────────────────────────────────────────

def _add_model(parser: argparse.ArgumentParser, need_L: bool = True, need_N: bool = True):
    if need_L:
        parser.add_argument("--L", type=int, required=True, help="number of neurons")
    if need_N:
        parser.add_argument("--N", type=int, required=True, help="sequence length")
    parser.add_argument("--p", type=float, default=config.DEFAULT_P, help="firing probability")
    parser.add_argument("--eta-tilde", type=float, default=config.DEFAULT_ETA_TILDE,
                        help="relative disturbance bound η/θ")


def _add_training(parser: argparse.ArgumentParser):
    defaults = config.TRAIN_DEFAULTS
    parser.add_argument("--mode", choices=sorted(MODE_ALIASES), default="single")
    parser.add_argument("--schedule", choices=["kaczmarz", "constant"], default=defaults["schedule"])
    parser.add_argument("--order", choices=["random", "cyclic"], default=defaults["order"])
    parser.add_argument("--beta", type=float, default=defaults["beta"])
    parser.add_argument("--max-epochs", type=int, default=defaults["max_epochs"])
    parser.add_argument("--tol", type=float, default=defaults["tolerance"])
    parser.add_argument("--train-seed", type=int, default=defaults["seed"],
                        help="row-order seed for randomized multi-pass training")


def _add_output(parser: argparse.ArgumentParser, formats: bool = False):
    parser.add_argument("--out", default=None, help="output path (default: stdout)")
    if formats:
        parser.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqmem",
        description="Sequence memorization in recurrent threshold networks",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="more log output on stderr (-v info, -vv debug)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound-eval", help="evaluate the memorization-failure bound")
    _add_model(p)
    _add_output(p)

    p = sub.add_parser("bound-invert", help="smallest L meeting a target failure probability")
    _add_model(p, need_L=False)
    p.add_argument("--target", type=float, required=True)
    _add_output(p)

    p = sub.add_parser("bound-sweep", help="L_min over an (N, target) grid")
    p.add_argument("--n-list", type=_int_list, default=config.SWEEP_GRID["n_list"])
    p.add_argument("--targets", type=_float_list, default=config.SWEEP_GRID["targets"])
    p.add_argument("--p", type=float, default=config.SWEEP_GRID["p"])
    p.add_argument("--eta-tilde", type=float, default=config.SWEEP_GRID["eta_tilde"])
    _add_output(p, formats=True)

    p = sub.add_parser("train", help="train a network on a matrix file")
    p.add_argument("--matrix", required=True)
    p.add_argument("--p", type=float, default=config.DEFAULT_P)
    p.add_argument("--eta-tilde", type=float, default=config.DEFAULT_ETA_TILDE)
    _add_training(p)
    p.add_argument("--history", default=None, help="residual-history CSV (multi-pass)")
    _add_output(p)

    p = sub.add_parser("verify", help="worst-case verification of a network on a matrix")
    p.add_argument("--net", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--eta-tilde", type=float, default=None, help="override the stored η̃")
    _add_output(p)

    p = sub.add_parser("run", help="replay a network from an initial state")
    p.add_argument("--net", required=True)
    p.add_argument("--matrix", default=None)
    p.add_argument("--init-col", type=int, default=None, help="1-based column of --matrix")
    p.add_argument("--init", default=None, help="initial state as a 0/1 string")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--policy", choices=["none", "adversarial", "sampled"], default="none")
    p.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    _add_output(p, formats=True)

    p = sub.add_parser("mc", help="Monte Carlo estimate of the failure probability")
    _add_model(p)
    _add_training(p)
    p.add_argument("--trials", type=int, default=config.DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=config.DEFAULT_WORKERS)
    p.add_argument("--confidence", type=float, default=config.DEFAULT_CONFIDENCE)
    p.add_argument("--no-timing", action="store_true", help="omit elapsed_seconds")
    p.add_argument("--dump-trials", default=None, help="per-trial CSV path")
    _add_output(p)

    p = sub.add_parser("exhaustive", help="exact failure probability by enumeration")
    _add_model(p)
    _add_output(p)

    p = sub.add_parser("mgf", help="sample E[exp(tS)] of the interference term")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--p", type=float, default=config.DEFAULT_P)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--samples", type=int, default=config.MGF_MIN_SAMPLES * 10)
    p.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    p.add_argument("--eta-tilde", type=float, default=None, help="also report the tail frequency")
    _add_output(p)

    p = sub.add_parser("capacity", help="capacity lower bounds and references")
    _add_model(p)
    _add_output(p)

    p = sub.add_parser("rank", help="rank of the shifted system (file or random survey)")
    p.add_argument("--matrix", default=None)
    p.add_argument("--estimate-rank", action="store_true", help="floating-point rank")
    p.add_argument("--L", type=int, default=None)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--p", type=float, default=config.DEFAULT_P)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    _add_output(p)

    return parser


def _train_config(args, N: int, eta_tilde: float) -> TrainConfig:
    return TrainConfig.from_epochs(
        N, args.max_epochs,
        schedule=args.schedule,
        order=args.order,
        tolerance=args.tol,
        seed=args.train_seed,
        beta=args.beta,
        eta_tilde=eta_tilde,
    )


# ── Commands ──────────────────────────────────────────────────────────────

class SeqMemApp:
    """One method per subcommand; each returns the process exit code."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.writer = ReportWriter(getattr(args, "out", None))

    def dispatch(self) -> int:
        handler = getattr(self, "cmd_" + self.args.command.replace("-", "_"))
        return handler()

    def cmd_bound_eval(self) -> int:
        a = self.args
        params = BoundParams(a.L, a.N, a.p, a.eta_tilde)
        doc = {"params": asdict(params), **asdict(failure_bound(params)),
               "entry_bound": entry_error_bound(params)}
        self.writer.write_json(doc)
        return 0

    def cmd_bound_invert(self) -> int:
        a = self.args
        self.writer.write_text(str(min_L_for_target(a.N, a.p, a.eta_tilde, a.target)))
        return 0

    def cmd_bound_sweep(self) -> int:
        a = self.args
        frame = l_min_sweep(a.n_list, a.targets, a.p, a.eta_tilde)
        self.writer.write_frame(frame, a.format)
        return 0

    def cmd_train(self) -> int:
        a = self.args
        A = read_matrix(a.matrix)
        mode = MODE_ALIASES[a.mode]
        if mode == "single-pass":
            network = train_single_pass(A, a.p, a.eta_tilde)
            if a.history:
                logger.warning("--history only applies to multi-pass training; ignored")
        else:
            run = train_dense(A, _train_config(a, A.N, a.eta_tilde), a.p)
            network = run.network
            logger.info("[TRAIN] multi-pass | converged=%s after %d updates",
                        run.converged, run.updates)
            if a.history:
                write_csv(run.history.to_frame(), a.history)
        self.writer.write_text(dumps_network(network))
        return 0

    def cmd_verify(self) -> int:
        a = self.args
        network = read_network(a.net)
        if a.eta_tilde is not None:
            network = network.with_eta_tilde(a.eta_tilde)
        report = verify_memorization(network, read_matrix(a.matrix))
        self.writer.write_json(report.to_dict())
        return 0 if report.perfect else 1

    def cmd_run(self) -> int:
        a = self.args
        network = read_network(a.net)
        A = read_matrix(a.matrix) if a.matrix else None
        if a.init is not None:
            if set(a.init.strip()) - {"0", "1"}:
                raise ParameterError(f"--init must be a 0/1 string, got {a.init!r}")
            init = as_firing_vector([int(c) for c in a.init.strip()], network.params.L)
        elif A is not None and a.init_col is not None:
            if not 1 <= a.init_col <= A.N:
                raise ParameterError(f"--init-col must lie in 1..{A.N}, got {a.init_col}")
            init = A.column(a.init_col)
        else:
            raise SeqMemError("run needs --init, or --matrix with --init-col")
        steps = a.steps if a.steps is not None else (A.N if A is not None else 1)
        seed = a.seed if a.policy == "sampled" else None

        trajectory = run_sequence(network, init, steps, a.policy, seed)
        if A is not None and a.init_col is not None and a.init is None and steps % A.N == 0:
            ok = recall(network, A, a.init_col, steps // A.N, a.policy, seed)
            logger.info("[VERIFY] recall from column %d over %d step(s): %s",
                        a.init_col, steps, "exact" if ok else "mismatch")

        rows = ["".join(str(int(b)) for b in y) for y in trajectory]
        frame = pd.DataFrame({"step": np.arange(1, steps + 1), "state": rows})
        if a.format == "json":
            self.writer.write_frame(frame, "json")
        else:
            self.writer.write_text("\n".join(rows))
        return 0

    def cmd_mc(self) -> int:
        a = self.args
        mode = MODE_ALIASES[a.mode]
        train = _train_config(a, a.N, a.eta_tilde) if mode == "multi-pass" else None
        cfg = ExperimentConfig(
            L=a.L, N=a.N, p=a.p, eta_tilde=a.eta_tilde, mode=mode, train=train,
            trials=a.trials, seed=a.seed, workers=a.workers, confidence=a.confidence,
        )
        report = monte_carlo(cfg)
        if a.dump_trials:
            frame = pd.DataFrame(report.trial_rows(),
                                 columns=["trial_index", "perfect", "failure_count"])
            write_csv(frame, a.dump_trials)
        self.writer.write_json(report.to_dict(include_timing=not a.no_timing))
        return 0

    def cmd_exhaustive(self) -> int:
        a = self.args
        prob = exhaustive_exact(a.L, a.N, a.p, a.eta_tilde)
        self.writer.write_json({"L": a.L, "N": a.N, "p": a.p, "eta_tilde": a.eta_tilde,
                                "probability": prob})
        return 0

    def cmd_mgf(self) -> int:
        a = self.args
        diag = estimate_mgf(a.L, a.N, a.p, a.t, a.samples, a.seed, a.eta_tilde)
        self.writer.write_json(asdict(diag))
        return 0

    def cmd_capacity(self) -> int:
        a = self.args
        self.writer.write_json(capacity_summary(a.L, a.N, a.p, a.eta_tilde).to_dict())
        return 0

    def cmd_rank(self) -> int:
        a = self.args
        if a.matrix:
            A = read_matrix(a.matrix)
            full, rank = rank_is_full(build_shifted_system(A), estimate=a.estimate_rank)
            self.writer.write_json({"L": A.L, "N": A.N, "rank": rank, "full_rank": full,
                                    "estimate": a.estimate_rank})
            return 0
        if a.L is None or a.N is None:
            raise SeqMemError("rank needs --matrix, or --L and --N for a survey")
        self.writer.write_json(asdict(rank_survey(a.L, a.N, a.p, a.trials, a.seed)))
        return 0


def setup_logging(verbosity: int = 0):
    level = config.LOG_LEVEL
    if verbosity == 1:
        level = "INFO"
    elif verbosity > 1:
        level = "DEBUG"
    known = level in logging.getLevelNamesMapping()
    logging.basicConfig(
        level=level if known else "WARNING",
        format='%(asctime)s | %(name)s | %(levelname)s | %(message)s',
        stream=sys.stderr,
    )
    if not known:
        raise ParameterError(f"unknown log level {level!r} (SEQMEM_LOG_LEVEL)")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        setup_logging(args.verbose)
        return SeqMemApp(args).dispatch()
    except (SeqMemError, OSError) as e:
        logger.error("%s: %s", args.command, e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
