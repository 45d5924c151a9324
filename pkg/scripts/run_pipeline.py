#!/usr/bin/env python3
"""End-to-end correction experiment on a synthetic corpus.

Eight steps: generate corpus, produce reader predictions on the training set,
build corrector data, train the corrector, produce reader predictions on dev,
correct them, evaluate both systems, and write the analysis reports plus a
significance test. By default the "reader" is the flawed-reader simulator at
a 40% partial-match rate; pass --trained-reader to use k-fold trained toy
readers instead.
"""

import argparse
import json
import sys
from pathlib import Path

from spancorrect.cli import main as cli

MODEL = ["--layers", "2", "--heads", "2", "--dim", "64", "--ff-dim", "128", "--max-seq-len", "96"]


def run(*argv):
    argv = [str(a) for a in argv]
    print(f"$ spancorrect {' '.join(argv)}", flush=True)
    code = cli(argv)
    if code != 0:
        sys.exit(code)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workdir", default="runs/pipeline", help="output directory")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n-train", type=int, default=2000)
    ap.add_argument("--n-dev", type=int, default=500)
    ap.add_argument("--partial-rate", type=float, default=0.4)
    ap.add_argument("--multi-span-fraction", type=float, default=0.0)
    ap.add_argument("--epochs", type=int, default=3)
    ap.add_argument("--learning-rate", type=float, default=0.2)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--folds", type=int, default=5)
    ap.add_argument("--trained-reader", action="store_true",
                    help="use k-fold trained readers instead of the flawed-reader simulator")
    args = ap.parse_args()

    w = Path(args.workdir)
    w.mkdir(parents=True, exist_ok=True)
    train_cfg = ["--epochs", args.epochs, "--learning-rate", args.learning_rate, "--batch-size", 32]

    # 1. corpus
    run("gen-corpus", "--out-train", w / "train.json", "--out-dev", w / "dev.json",
        "--out-train-labels", w / "train.labels.json", "--out-dev-labels", w / "dev.labels.json",
        "--n-train", args.n_train, "--n-dev", args.n_dev, "--seed", args.seed,
        "--multi-span-fraction", args.multi_span_fraction)

    # 2. reader predictions over the training set
    if args.trained_reader:
        run("train-reader", "--dataset", w / "train.json", "--kfold", "--folds", args.folds,
            "--out-nbest", w / "train.nbest.json", "--out-predictions", w / "train.preds.json",
            "--seed", args.seed, *MODEL, *train_cfg)
    else:
        run("flawed-predict", "--dataset", w / "train.json",
            "--out-predictions", w / "train.preds.json", "--out-nbest", w / "train.nbest.json",
            "--out-labels", w / "train.inj.json",
            "--partial-rate", args.partial_rate, "--seed", args.seed + 1)

    # 3. corrector training data
    run("gen-corrector-data", "--dataset", w / "train.json", "--nbest", w / "train.nbest.json",
        "--out", w / "corrector.jsonl", "--k", args.k, "--out-summary", w / "corrector.summary.json")

    # 4. corrector training
    run("train-corrector", "--data", w / "corrector.jsonl",
        "--out-checkpoint", w / "corrector.ckpt.json",
        "--seed", args.seed, "--model-seed", args.seed, *MODEL, *train_cfg)

    # 5. reader predictions over dev
    if args.trained_reader:
        run("train-reader", "--dataset", w / "train.json", "--out-checkpoint", w / "reader.ckpt.json",
            "--seed", args.seed, *MODEL, *train_cfg)
        run("predict", "--dataset", w / "dev.json", "--checkpoint", w / "reader.ckpt.json",
            "--out-predictions", w / "dev.preds.json")
    else:
        run("flawed-predict", "--dataset", w / "dev.json",
            "--out-predictions", w / "dev.preds.json",
            "--partial-rate", args.partial_rate, "--seed", args.seed + 2)

    # 6. correction
    run("correct", "--dataset", w / "dev.json", "--predictions", w / "dev.preds.json",
        "--checkpoint", w / "corrector.ckpt.json", "--out-predictions", w / "dev.corrected.json")

    # 7. evaluation + significance
    run("evaluate", "--dataset", w / "dev.json", "--predictions", w / "dev.preds.json",
        "--out", w / "eval.reader.json")
    run("evaluate", "--dataset", w / "dev.json", "--predictions", w / "dev.corrected.json",
        "--out", w / "eval.corrector.json")
    run("sigtest", "--dataset", w / "dev.json",
        "--predictions-a", w / "dev.corrected.json", "--predictions-b", w / "dev.preds.json",
        "--seed", args.seed, "--out", w / "sigtest.json")

    # 8. analysis reports
    run("analyze", "--dataset", w / "dev.json", "--reader-predictions", w / "dev.preds.json",
        "--corrector-predictions", w / "dev.corrected.json", "--out-dir", w / "reports")

    reader = json.loads((w / "eval.reader.json").read_text())
    corrector = json.loads((w / "eval.corrector.json").read_text())
    sig = json.loads((w / "sigtest.json").read_text())
    print(
        f"\nreader EM {reader['exact_match']:.2f} -> corrector EM {corrector['exact_match']:.2f} "
        f"(delta {corrector['exact_match'] - reader['exact_match']:+.2f}); "
        f"p = {sig['p']:.4g} ({sig['method']})"
    )
    print(f"artifacts in {w}/")


if __name__ == "__main__":
    main()
