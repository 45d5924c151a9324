#!/usr/bin/env python3
"""Equal-parameter comparison: single reader vs. reader ensemble vs.
reader + corrector, all on one synthetic corpus.

The ensemble averages the output logits of two independently seeded readers;
the corrector has the same architecture as one reader but is trained on
delimiter-marked reader predictions.
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


def em_of(path: Path) -> float:
    return json.loads(path.read_text())["exact_match"]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workdir", default="runs/ensemble")
    ap.add_argument("--seed", type=int, default=0)
    # moderate scale keeps the single reader imperfect, so the ensemble and
    # corrector margins are visible
    ap.add_argument("--n-train", type=int, default=500)
    ap.add_argument("--n-dev", type=int, default=200)
    ap.add_argument("--epochs", type=int, default=2)
    ap.add_argument("--learning-rate", type=float, default=0.2)
    args = ap.parse_args()

    w = Path(args.workdir)
    w.mkdir(parents=True, exist_ok=True)
    train_cfg = ["--epochs", args.epochs, "--learning-rate", args.learning_rate, "--batch-size", 32]

    run("gen-corpus", "--out-train", w / "train.json", "--out-dev", w / "dev.json",
        "--n-train", args.n_train, "--n-dev", args.n_dev, "--seed", args.seed,
        "--multi-span-fraction", 0)

    for tag, seed in (("a", args.seed + 11), ("b", args.seed + 22)):
        run("train-reader", "--dataset", w / "train.json",
            "--out-checkpoint", w / f"reader.{tag}.ckpt.json",
            "--seed", seed, "--model-seed", seed, *MODEL, *train_cfg)

    run("predict", "--dataset", w / "dev.json", "--checkpoint", w / "reader.a.ckpt.json",
        "--out-predictions", w / "dev.reader.json")
    run("predict", "--dataset", w / "dev.json",
        "--checkpoint", w / "reader.a.ckpt.json", "--checkpoint", w / "reader.b.ckpt.json",
        "--out-predictions", w / "dev.ensemble.json")

    # corrector on top of reader a, trained from k-fold reader predictions
    run("train-reader", "--dataset", w / "train.json", "--kfold", "--folds", 5,
        "--out-nbest", w / "train.nbest.json", "--seed", args.seed + 11, *MODEL, *train_cfg)
    run("gen-corrector-data", "--dataset", w / "train.json", "--nbest", w / "train.nbest.json",
        "--out", w / "corrector.jsonl", "--k", 2)
    run("train-corrector", "--data", w / "corrector.jsonl",
        "--out-checkpoint", w / "corrector.ckpt.json",
        "--seed", args.seed, "--model-seed", args.seed, *MODEL, *train_cfg)
    run("correct", "--dataset", w / "dev.json", "--predictions", w / "dev.reader.json",
        "--checkpoint", w / "corrector.ckpt.json", "--out-predictions", w / "dev.corrected.json")

    for name in ("reader", "ensemble", "corrected"):
        run("evaluate", "--dataset", w / "dev.json", "--predictions", w / f"dev.{name}.json",
            "--out", w / f"eval.{name}.json")

    print("\nModel                 EM")
    print(f"Reader              {em_of(w / 'eval.reader.json'):6.2f}")
    print(f"Ensemble of readers {em_of(w / 'eval.ensemble.json'):6.2f}")
    print(f"Reader + corrector  {em_of(w / 'eval.corrected.json'):6.2f}")


if __name__ == "__main__":
    main()
