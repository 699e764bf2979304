"""Command-line entry points.

    gadl compare          --config exp.cfg [--seed N] [--out DIR] [--desk-scale]
    gadl train-baseline   --config exp.cfg [...]
    gadl train-ga         --config exp.cfg [...]
    gadl extract-features --config exp.cfg --stack out/stack_ga.gadl
                          [--split train|test] [--features-out FILE] [...]
    gadl classify         --config exp.cfg --stack out/stack_ga.gadl [...]

Exit status is 0 on success and 2 with a diagnostic on stderr for any
rejected input (bad config, malformed data files, shape mismatches).
"""

import argparse
import os
import sys
import time

import numpy as np

from .classifier import error_rate, train_classifier
from .harness import N_CLASSES, compare, load_config, load_experiment_data, \
    run_baseline, run_ga
from .numerics import RandomStream
from .serialize import load_stack, save_stack
from .stack import extract_features


def _add_common(sp):
    sp.add_argument("--config", required=True, help="experiment config file")
    sp.add_argument("--seed", type=int, default=None, help="override master seed")
    sp.add_argument("--out", default=None, help="override output directory")
    sp.add_argument("--desk-scale", action="store_true",
                    help="apply the desk-scale preset")


def _load(args):
    return load_config(args.config, seed=args.seed, out_dir=args.out,
                       desk_scale=args.desk_scale)


def _cmd_compare(args):
    cfg = _load(args)
    b_rep, g_rep = compare(cfg)
    print(f"wrote metrics.csv, summary.txt and stacks to {cfg.out_dir}")
    for rep in (b_rep, g_rep):
        print(f"{rep.arm}: final-layer rmse {rep.layer_rmse[-1]:.6f}, "
              f"classification error {rep.classification_error:.4f}, "
              f"updates {rep.updates_consumed}")


def _run_single_arm(args, arm):
    cfg = _load(args)
    master = RandomStream(cfg.seed)
    train, _, data_desc = load_experiment_data(cfg)
    eval_count = min(cfg.fitness_eval_sample_count, train.n)
    eval_idx = master.fork("fitness-eval").permutation(train.n)[:eval_count]
    t0 = time.perf_counter()
    if arm == "baseline":
        stack, rep = run_baseline(cfg, train.x, eval_idx, master.fork("baseline"))
    else:
        stack, rep, _ = run_ga(cfg, train.x, eval_idx, master.fork("ga"))
    elapsed = time.perf_counter() - t0
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, f"stack_{arm}.gadl")
    save_stack(stack, path)
    print(f"data: {data_desc}")
    for k, (r, s) in enumerate(zip(rep.layer_rmse, rep.layer_sparsity), start=1):
        print(f"layer {k}: rmse {r:.6f}, exact-zero fraction {s:.6f}")
    print(f"updates consumed: {rep.updates_consumed} of {rep.updates_budget}")
    print(f"wall clock: {elapsed:.2f} s")
    print(f"wrote {path}")


def _cmd_extract_features(args):
    cfg = _load(args)
    stack = load_stack(args.stack)
    train, test, _ = load_experiment_data(cfg)
    ds = train if args.split == "train" else test
    feats = extract_features(stack, ds.x)
    out_path = args.features_out or os.path.join(
        cfg.out_dir, f"features_{args.split}.csv")
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    np.savetxt(out_path, feats, fmt="%.17g", delimiter=",")
    print(f"wrote {feats.shape[0]} x {feats.shape[1]} features to {out_path}")


def _cmd_classify(args):
    cfg = _load(args)
    stack = load_stack(args.stack)
    train, test, _ = load_experiment_data(cfg)
    clf = train_classifier(
        extract_features(stack, train.x), train.labels, cfg.classifier_epochs,
        cfg.classifier_learning_rate, RandomStream(cfg.seed).fork("classifier"),
        n_classes=N_CLASSES, batch_size=cfg.classifier_batch_size,
    )
    err = error_rate(clf, extract_features(stack, test.x), test.labels)
    print(f"test classification error: {err:.4f}")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="gadl",
        description="Train tied-autoencoder stacks by backprop or a "
                    "GA/backprop hybrid and compare the two.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("compare", help="run both arms and report"))
    _add_common(sub.add_parser("train-baseline", help="baseline arm only"))
    _add_common(sub.add_parser("train-ga", help="evolutionary arm only"))

    sp = sub.add_parser("extract-features", help="map data through a saved stack")
    _add_common(sp)
    sp.add_argument("--stack", required=True, help="path to a .gadl stack file")
    sp.add_argument("--split", choices=("train", "test"), default="test")
    sp.add_argument("--features-out", default=None, help="output CSV path")

    sp = sub.add_parser("classify", help="train and score the classifier "
                                         "on a saved stack's features")
    _add_common(sp)
    sp.add_argument("--stack", required=True, help="path to a .gadl stack file")

    args = parser.parse_args(argv)
    handlers = {
        "compare": _cmd_compare,
        "train-baseline": lambda a: _run_single_arm(a, "baseline"),
        "train-ga": lambda a: _run_single_arm(a, "ga"),
        "extract-features": _cmd_extract_features,
        "classify": _cmd_classify,
    }
    try:
        handlers[args.command](args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
