"""Command-line driver: ``avm run ...`` for the online and batch protocols."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .data import DataError, Dataset, load_libsvm, normalize_minmax, shuffle
from .kernel import KernelSpec
from .learner import Learner, LearnerConfig, run_batch, run_stream
from .loss import CLI_NAMES, LabelError, LossSpec
from .model import write_snapshot
from .multiclass import MulticlassLearner, write_mc_snapshot

log = logging.getLogger("avm")

TASK_LOSSES = {
    "binary": set(CLI_NAMES),
    "multiclass": {"hinge", "logit"},
    "regression": {"l1", "l2", "eps-insensitive"},
}


def _output_mode(text: str) -> tuple[str, float]:
    if text in ("final", "avg"):
        return ("final" if text == "final" else "average"), 0.5
    if text.startswith("suffix="):
        try:
            frac = float(text.split("=", 1)[1])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad suffix fraction in {text!r}") from None
        if not 0 < frac < 1:
            raise argparse.ArgumentTypeError("suffix fraction must lie in (0, 1)")
        return "suffix", frac
    raise argparse.ArgumentTypeError(f"--output must be final, avg or suffix=A, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avm", description="Approximation Vector Machine experiments")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="train on a LIBSVM file and emit a JSON-lines trace")
    run.add_argument("--task", required=True, choices=["binary", "multiclass", "regression"])
    run.add_argument("--mode", required=True, choices=["online", "batch"])
    run.add_argument("--loss", required=True, choices=list(CLI_NAMES))
    run.add_argument("--gamma", required=True, type=float)
    run.add_argument("--lambda", dest="lam", required=True, type=float)
    run.add_argument("--delta", required=True, type=float)
    run.add_argument("--beta", type=float, default=0.0)
    run.add_argument("--rho", type=float, default=1.0)
    run.add_argument("--coverage", required=True, choices=["sphere", "rect"])
    run.add_argument("--output", type=_output_mode, default=("final", 0.5))
    run.add_argument("--iters", type=int, help="batch iterations (default 5 x #train)")
    run.add_argument("--tau", type=float, default=0.5)
    run.add_argument("--epsilon", type=float, default=0.1)
    run.add_argument("--normalize", action="store_true", help="min-max scale features")
    run.add_argument("--dim", type=int, help="override the feature dimensionality")
    run.add_argument("--train", required=True)
    run.add_argument("--test")
    run.add_argument("--seed", required=True, type=int)
    run.add_argument("--metrics-out")
    run.add_argument("--model-out")
    run.add_argument("--checkpoint-every", type=int)
    run.add_argument("--algorithm", choices=["avm", "sgd"], default="avm",
                     help="sgd runs the unapproximated kernel SGD baseline")
    run.add_argument("--no-shuffle", action="store_true",
                     help="online mode: stream in file order instead of a seeded permutation")
    return parser


def _validate(parser: argparse.ArgumentParser, args) -> None:
    if args.loss not in TASK_LOSSES[args.task]:
        parser.error(f"--loss {args.loss} is not valid for --task {args.task}")
    if args.mode == "batch" and not args.test:
        parser.error("--mode batch needs --test")
    for name in ("gamma", "lam", "delta", "rho"):
        if not getattr(args, name) > 0:
            parser.error(f"--{'lambda' if name == 'lam' else name} must be positive")
    if args.beta < 0:
        parser.error("--beta must be nonnegative")
    if args.iters is not None and args.iters < 1:
        parser.error("--iters must be >= 1")
    if args.checkpoint_every is not None and args.checkpoint_every < 1:
        parser.error("--checkpoint-every must be >= 1")
    if args.dim is not None and args.dim < 1:
        parser.error("--dim must be >= 1")


def _load(args) -> tuple[Dataset, Dataset | None]:
    train = load_libsvm(args.train, args.task)
    test = load_libsvm(args.test, args.task, train.label_map) if args.test else None
    if args.normalize:
        train, table = normalize_minmax(train)
        if test is not None:
            test, _ = normalize_minmax(test, table)
    if not len(train):
        raise DataError(f"{args.train}: no instances")
    if test is not None and not len(test):
        raise DataError(f"{args.test}: no instances")
    return train, test


def run(args) -> dict:
    train, test = _load(args)
    dim = args.dim or max(train.dim, test.dim if test is not None else 0)
    mode, frac = args.output
    loss_kw = {"tau": args.tau, "epsilon": args.epsilon, "lam": args.lam}
    if args.task == "multiclass":
        loss = LossSpec("hinge" if args.loss == "hinge" else "logistic")
    else:
        loss = LossSpec.from_cli(args.loss, **loss_kw)
    cfg = LearnerConfig(lam=args.lam, loss=loss, kernel=KernelSpec("gaussian", args.gamma),
                        algorithm=args.algorithm, coverage=args.coverage, delta=args.delta,
                        beta=args.beta, rho=args.rho, output=mode, suffix_fraction=frac,
                        seed=args.seed, dim=dim)
    horizon = len(train) if args.mode == "online" else (args.iters or 5 * len(train))
    if args.task == "multiclass":
        learner = MulticlassLearner(cfg, max(train.n_classes, 2), horizon=horizon)
    else:
        learner = Learner(cfg, horizon=horizon)

    if args.mode == "online":
        data = train if args.no_shuffle else shuffle(train, args.seed)
        model, trace = run_stream(cfg, data.samples, args.task, args.checkpoint_every,
                                  total=horizon, learner=learner)
    else:
        _, model, trace = run_batch(cfg, train.samples, test.samples, horizon, args.task,
                                    args.checkpoint_every, learner=learner)

    header = {"task": args.task, "mode": args.mode, "loss": args.loss, "gamma": args.gamma,
              "lambda": args.lam, "delta": args.delta, "beta": args.beta, "rho": args.rho,
              "coverage": args.coverage, "algorithm": args.algorithm, "seed": args.seed,
              "instances": len(train), "dim": dim}
    if args.task == "multiclass":
        header["label_map"] = train.label_map
    text = trace.to_jsonl(header)
    if args.metrics_out:
        with open(args.metrics_out, "w") as fh:
            fh.write(text)
    if args.model_out:
        with open(args.model_out, "w") as fh:
            if args.task == "multiclass":
                write_mc_snapshot(fh, model, args.coverage, args.delta, dim)
            else:
                write_snapshot(fh, model, args.coverage, args.delta, dim)
    return trace.summary


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    _validate(parser, args)
    try:
        summary = run(args)
    except (OSError, DataError, LabelError) as exc:
        print(f"avm: error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(summary, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
