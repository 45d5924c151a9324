"""Command-line pipeline: corpus generation, reader/corrector training,
prediction, correction, evaluation, analysis, and significance testing.

Options may come from a JSON config file (``--config``), optionally nested
under "model", "train", or "synth" sections; explicit flags always win.
Exit codes: 0 success, 1 usage or config error, 2 data error. All randomness
flows from explicit seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import checkpoint as ckpt
from . import dataio
from .datagen import (
    GenSummary,
    build_corrector_examples,
    make_fold_plan,
    read_corrector_file,
    write_corrector_file,
)
from .decoding import correct_dataset, predict_nbest
from .reporting import (
    category_correction_stats,
    change_stats,
    delta_matrix,
    evaluate_predictions,
)
from .significance import PairedScores, fisher_randomization
from .spans import SpanNotFound, em_max, f1_max
from .synth import ErrorInjectionConfig, SynthConfig, flawed_reader, gen_corpus
from .taxonomy import classify, distribution, is_partial_match, select_reference_annotation
from .training import (
    TrainConfig,
    build_corrector_instances,
    build_reader_instances,
    train,
)
from .transformer import ModelConfig, build_model
from .vocab import build_vocab, build_vocab_from_texts


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            obj = json.load(f)
    except FileNotFoundError as e:
        raise UsageError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise UsageError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    return obj


def _resolver(args: argparse.Namespace, config: dict, section: str | None = None):
    """Flag value if given, else config value (flat key first, then the
    section), else the builtin default."""

    def get(name: str, default):
        value = getattr(args, name, None)
        if value is not None:
            return value
        if name in config:
            return config[name]
        if section and isinstance(config.get(section), dict) and name in config[section]:
            return config[section][name]
        return default

    return get


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--layers", type=int, help="encoder layers (default 2)")
    p.add_argument("--heads", type=int, help="attention heads (default 2)")
    p.add_argument("--dim", type=int, help="embedding dim (default 64)")
    p.add_argument("--ff-dim", type=int, help="feed-forward dim (default 128)")
    p.add_argument("--max-seq-len", type=int, help="maximum input length (default 256)")
    p.add_argument("--max-query-len", type=int, help="maximum question tokens (default 30)")
    p.add_argument("--max-answer-len", type=int, help="maximum answer tokens (default 30)")
    p.add_argument("--dropout", type=float, help="dropout rate (default 0.1)")
    p.add_argument("--model-seed", type=int, help="parameter init seed (default 0)")


def _model_config(get) -> ModelConfig:
    return ModelConfig(
        layers=get("layers", 2),
        heads=get("heads", 2),
        dim=get("dim", 64),
        ff_dim=get("ff_dim", 128),
        max_seq_len=get("max_seq_len", 256),
        max_query_len=get("max_query_len", 30),
        max_answer_len=get("max_answer_len", 30),
        dropout=get("dropout", 0.1),
        seed=get("model_seed", 0),
    )


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, help="training epochs (default 1)")
    p.add_argument("--batch-size", type=int, help="batch size (default 32)")
    p.add_argument("--learning-rate", type=float, help="peak learning rate (default 0.2)")
    p.add_argument("--warmup", type=float, help="warmup fraction of steps (default 0.1)")
    p.add_argument("--optimizer", choices=["sgd", "adam"], help="optimizer (default sgd)")
    p.add_argument("--seed", type=int, help="training seed (default 0)")
    p.add_argument("--min-count", type=int, help="vocabulary min token count (default 1)")


def _train_config(get) -> TrainConfig:
    return TrainConfig(
        epochs=get("epochs", 1),
        batch_size=get("batch_size", 32),
        learning_rate=get("learning_rate", 0.2),
        warmup_fraction=get("warmup", 0.1),
        seed=get("seed", 0),
        optimizer=get("optimizer", "sgd"),
    )


def _read_dataset(path: str):
    try:
        return dataio.read_dataset(path)
    except FileNotFoundError as e:
        raise DataError(f"dataset not found: {path}") from e
    except dataio.DataFormatError as e:
        raise DataError(str(e)) from e


def _read_predictions(path: str):
    try:
        return dataio.read_predictions(path)
    except FileNotFoundError as e:
        raise DataError(f"prediction file not found: {path}") from e
    except dataio.DataFormatError as e:
        raise DataError(str(e)) from e


# ---------------------------------------------------------------------------
# Subcommands


def cmd_gen_corpus(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    get = _resolver(args, config, "synth")
    seed = get("seed", 0)
    common = dict(
        weight_list=get("weight_list", 1.0),
        weight_qualified=get("weight_qualified", 1.0),
        weight_entity=get("weight_entity", 1.0),
        multi_span_list_fraction=get("multi_span_fraction", 0.5),
        filler_tokens_range=(get("filler_min", 10), get("filler_max", 30)),
    )
    try:
        train_cfg = SynthConfig(
            n_examples=get("n_train", 2000), seed=seed, id_prefix="train", **common
        )
        dev_cfg = SynthConfig(
            n_examples=get("n_dev", 500), seed=seed + 1, id_prefix="dev", **common
        )
    except ValueError as e:
        raise UsageError(str(e)) from e
    for cfg, out_path, labels_path in (
        (train_cfg, args.out_train, args.out_train_labels),
        (dev_cfg, args.out_dev, args.out_dev_labels),
    ):
        examples, labels = gen_corpus(cfg)
        dataio.write_dataset(out_path, examples)
        if labels_path:
            dataio.write_labels(labels_path, labels)
        print(f"wrote {len(examples)} examples to {out_path}")


def cmd_flawed_predict(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    get = _resolver(args, config, "synth")
    examples = _read_dataset(args.dataset)
    try:
        inj = ErrorInjectionConfig(
            partial_match_rate=get("partial_rate", 0.4),
            rate_pred_subset_gt=get("rate_pred_subset_gt", 0.33),
            rate_gt_subset_pred=get("rate_gt_subset_pred", 0.28),
            rate_partial_overlap=get("rate_partial_overlap", 0.06),
            rate_multi_span_gt=get("rate_multi_span_gt", 0.33),
            seed=get("seed", 0),
            nbest_extras=get("nbest_extras", 3),
        )
    except ValueError as e:
        raise UsageError(str(e)) from e
    out = flawed_reader(examples, inj)
    dataio.write_predictions(args.out_predictions, out.predictions)
    if args.out_nbest:
        dataio.write_nbest(args.out_nbest, out.nbest)
    if args.out_labels:
        dataio.write_labels(args.out_labels, out.labels)
    print(
        f"flawed reader over {out.summary['examples']} examples: "
        f"{out.summary['injected']} injected, {out.summary['exact']} exact"
    )


def _train_one_reader(examples, vocab, model_cfg, train_cfg, model=None):
    instances, stats = build_reader_instances(examples, vocab, model_cfg)
    if not instances:
        raise DataError("no trainable examples (all gold answers multi-span or truncated)")
    model, _ = train(instances, model_cfg, train_cfg, len(vocab), model=model)
    return model, stats


def _kfold_worker(payload):
    """Train one fold and predict its holdout. The model arrives prebuilt
    (parameter init draws from the global RNG and must stay sequential);
    everything here uses per-model or local randomness only, so folds may run
    in parallel threads without affecting results."""
    fold, model, train_examples, holdout_examples, vocab, model_cfg, train_cfg, nbest_size = payload
    model, _ = _train_one_reader(train_examples, vocab, model_cfg, train_cfg, model=model)
    nbest = predict_nbest([model], vocab, holdout_examples, model_cfg, n=nbest_size)
    return fold, model, nbest


def cmd_train_reader(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    get = _resolver(args, config, None)
    try:
        model_cfg = _model_config(_resolver(args, config, "model"))
        train_cfg = _train_config(_resolver(args, config, "train"))
    except ValueError as e:
        raise UsageError(str(e)) from e
    if args.kfold and not args.out_nbest:
        raise UsageError("--kfold requires --out-nbest")
    if not args.kfold and not args.out_checkpoint:
        raise UsageError("plain training requires --out-checkpoint")
    examples = _read_dataset(args.dataset)
    vocab = build_vocab(examples, min_count=get("min_count", 1))
    if not args.kfold:
        model, stats = _train_one_reader(examples, vocab, model_cfg, train_cfg)
        ckpt.save_checkpoint(args.out_checkpoint, model, vocab, kind="reader")
        print(f"trained reader on {len(examples) - stats.rejected} examples -> {args.out_checkpoint}")
        return

    folds = get("folds", 5)
    nbest_size = get("nbest_size", 20)
    try:
        plan = make_fold_plan([ex.id for ex in examples], folds, seed=train_cfg.seed)
    except ValueError as e:
        raise UsageError(str(e)) from e
    by_id = {ex.id: ex for ex in examples}
    jobs = get("jobs", 1)
    payloads = []
    for fold in range(folds):
        fold_model_cfg = ModelConfig(**{**model_cfg.to_dict(), "seed": model_cfg.seed + fold})
        fold_train_cfg = TrainConfig(**{**train_cfg.to_dict(), "seed": train_cfg.seed + fold})
        model = build_model(fold_model_cfg, len(vocab))
        payloads.append(
            (
                fold,
                model,
                [by_id[i] for i in plan.train_ids(fold)],
                [by_id[i] for i in plan.holdout_ids(fold)],
                vocab,
                fold_model_cfg,
                fold_train_cfg,
                nbest_size,
            )
        )
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=min(jobs, folds)) as pool:
            results = list(pool.map(_kfold_worker, payloads))
    else:
        results = [_kfold_worker(p) for p in payloads]
    results.sort(key=lambda r: r[0])

    all_nbest = {}
    for fold, model, nbest in results:
        all_nbest.update(nbest)
        if args.checkpoint_dir:
            path = Path(args.checkpoint_dir) / f"reader-fold{fold}.json"
            path.parent.mkdir(parents=True, exist_ok=True)
            ckpt.save_checkpoint(path, model, vocab, kind="reader")
    if set(all_nbest) != set(by_id):
        raise DataError("fold predictions do not cover the dataset exactly once")
    dataio.write_nbest(args.out_nbest, all_nbest)
    if args.out_predictions:
        dataio.write_predictions(
            args.out_predictions, {i: nb[0] for i, nb in all_nbest.items() if nb}
        )
    print(f"{folds}-fold training done; held-out n-best for {len(all_nbest)} examples -> {args.out_nbest}")


def cmd_predict(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    get = _resolver(args, config, None)
    examples = _read_dataset(args.dataset)
    models = []
    vocab = None
    model_cfg = None
    for path in args.checkpoint:
        try:
            model, v, cfg, _ = ckpt.load_checkpoint(path)
        except FileNotFoundError as e:
            raise DataError(f"checkpoint not found: {path}") from e
        except ValueError as e:
            raise DataError(str(e)) from e
        if vocab is None:
            vocab, model_cfg = v, cfg
        elif v.id_to_token != vocab.id_to_token:
            raise DataError("ensembled checkpoints must share one vocabulary")
        else:
            ours, theirs = model_cfg.to_dict(), cfg.to_dict()
            ours.pop("seed"), theirs.pop("seed")
            if ours != theirs:
                raise DataError("ensembled checkpoints must share one architecture")
        models.append(model)
    nbest_size = get("nbest_size", 20)
    nbest = predict_nbest(models, vocab, examples, model_cfg, n=nbest_size, batch_size=get("batch_size", 32))
    if args.out_nbest:
        dataio.write_nbest(args.out_nbest, nbest)
    dataio.write_predictions(args.out_predictions, {i: nb[0] for i, nb in nbest.items() if nb})
    print(f"predicted {len(nbest)} examples -> {args.out_predictions}")


def cmd_gen_corrector_data(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    get = _resolver(args, config, None)
    k = get("k", 2)
    examples = _read_dataset(args.dataset)
    try:
        nbest = dataio.read_nbest(args.nbest)
    except FileNotFoundError as e:
        raise DataError(f"n-best file not found: {args.nbest}") from e
    except dataio.DataFormatError as e:
        raise DataError(str(e)) from e
    by_id = {ex.id: ex for ex in examples}
    missing = sorted(set(by_id) - set(nbest))
    if missing:
        raise DataError(f"n-best file lacks entries for {len(missing)} example ids (first: {missing[0]!r})")
    summary = GenSummary()
    corrector_examples = []
    try:
        for ex in examples:
            corrector_examples.extend(build_corrector_examples(ex, nbest[ex.id], k, summary))
    except ValueError as e:
        raise UsageError(str(e)) from e
    write_corrector_file(args.out, by_id, corrector_examples)
    if args.out_summary:
        dataio.dump_json(summary.to_dict(), args.out_summary)
    print(
        f"wrote {summary.identity + summary.corrections} corrector records "
        f"({summary.identity} identity, {summary.corrections} corrections) -> {args.out}"
    )


def cmd_train_corrector(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    get = _resolver(args, config, None)
    try:
        model_cfg = _model_config(_resolver(args, config, "model"))
        train_cfg = _train_config(_resolver(args, config, "train"))
    except ValueError as e:
        raise UsageError(str(e)) from e
    try:
        records = read_corrector_file(args.data)
    except FileNotFoundError as e:
        raise DataError(f"corrector data not found: {args.data}") from e
    except (json.JSONDecodeError, KeyError, ValueError) as e:
        raise DataError(f"bad corrector data file {args.data}: {e}") from e
    if not records:
        raise DataError(f"corrector data file {args.data} is empty")
    texts = [r.question for r in records] + [r.context for r in records]
    vocab = build_vocab_from_texts(texts, min_count=get("min_count", 1))
    instances, stats = build_corrector_instances(records, vocab, model_cfg)
    if not instances:
        raise DataError("no usable corrector training records")
    model, _ = train(instances, model_cfg, train_cfg, len(vocab))
    ckpt.save_checkpoint(args.out_checkpoint, model, vocab, kind="corrector")
    rejected = f", {stats.rejected} rejected" if stats.rejected else ""
    print(f"trained corrector on {len(instances)} records{rejected} -> {args.out_checkpoint}")


def cmd_correct(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    get = _resolver(args, config, None)
    examples = _read_dataset(args.dataset)
    preds = _read_predictions(args.predictions)
    try:
        model, vocab, model_cfg, kind = ckpt.load_checkpoint(args.checkpoint)
    except FileNotFoundError as e:
        raise DataError(f"checkpoint not found: {args.checkpoint}") from e
    except ValueError as e:
        raise DataError(str(e)) from e
    try:
        corrected, passthrough = correct_dataset(
            preds, examples, model, vocab, model_cfg, batch_size=get("batch_size", 32)
        )
    except KeyError as e:
        raise DataError(str(e)) from e
    dataio.write_predictions(args.out_predictions, corrected)
    note = f" ({passthrough} passed through unresolved)" if passthrough else ""
    print(f"corrected {len(corrected)} predictions{note} -> {args.out_predictions}")


def cmd_evaluate(args: argparse.Namespace) -> None:
    examples = _read_dataset(args.dataset)
    preds = _read_predictions(args.predictions)
    strip = args.strip_articles if args.strip_articles is not None else True
    try:
        summary = evaluate_predictions(examples, preds, strip_articles=strip)
    except KeyError as e:
        raise DataError(str(e)) from e
    if args.out:
        dataio.dump_json(summary.to_dict(), args.out)
    print(json.dumps(summary.to_dict(), sort_keys=True))


def _harvest_partial_cases(examples, preds, strip_articles=True):
    """Partial-match reader predictions with their taxonomy labels."""
    cases = []
    for ex in examples:
        pred = preds[ex.id]
        em = em_max(pred.text, ex.ground_truths, strip_articles)
        f1 = f1_max(pred.text, ex.ground_truths, strip_articles)
        if not is_partial_match(em, f1):
            continue
        ref = select_reference_annotation(pred, ex.ground_truths)
        try:
            cat = classify(pred, ref, ex.context)
        except SpanNotFound:
            continue
        cases.append((ex, pred, cat))
    return cases


def cmd_analyze(args: argparse.Namespace) -> None:
    examples = _read_dataset(args.dataset)
    reader_preds = _read_predictions(args.reader_predictions)
    corrector_preds = _read_predictions(args.corrector_predictions)
    strip = args.strip_articles if args.strip_articles is not None else True
    gold_ids = set(ex.id for ex in examples)
    for name, preds in (("reader", reader_preds), ("corrector", corrector_preds)):
        if set(preds) != gold_ids:
            raise DataError(f"{name} predictions do not cover the dataset ids exactly")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    reader_eval = evaluate_predictions(examples, reader_preds, strip)
    corrector_eval = evaluate_predictions(examples, corrector_preds, strip)
    cases = _harvest_partial_cases(examples, reader_preds, strip)
    report = distribution([(pred, list(ex.ground_truths), ex.context) for ex, pred, _ in cases])
    changes = change_stats(reader_preds, corrector_preds, examples, strip)
    categories = category_correction_stats(
        [(ex.id, cat) for ex, _, cat in cases], corrector_preds, examples, strip
    )

    (out_dir / "taxonomy.txt").write_text(report.to_text(), encoding="utf-8")
    (out_dir / "taxonomy.csv").write_text(report.to_csv(), encoding="utf-8")
    (out_dir / "change_stats.txt").write_text(changes.to_text(), encoding="utf-8")
    (out_dir / "change_stats.csv").write_text(changes.to_csv(), encoding="utf-8")
    (out_dir / "category_correction.txt").write_text(categories.to_text(), encoding="utf-8")
    (out_dir / "category_correction.csv").write_text(categories.to_csv(), encoding="utf-8")
    dataio.dump_json(
        {
            "reader": reader_eval.to_dict(),
            "corrector": corrector_eval.to_dict(),
            "partial_match_cases": report.total,
            "changed": changes.total_changed,
        },
        out_dir / "summary.json",
    )
    print(
        f"reader EM {reader_eval.em:.2f} -> corrector EM {corrector_eval.em:.2f}; "
        f"{report.total} partial matches, {changes.total_changed} changes; reports in {out_dir}"
    )


def cmd_sigtest(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    get = _resolver(args, config, None)
    examples = _read_dataset(args.dataset)
    preds_a = _read_predictions(args.predictions_a)
    preds_b = _read_predictions(args.predictions_b)
    strip = args.strip_articles if args.strip_articles is not None else True
    metric = get("metric", "em")
    try:
        eval_a = evaluate_predictions(examples, preds_a, strip)
        eval_b = evaluate_predictions(examples, preds_b, strip)
    except KeyError as e:
        raise DataError(str(e)) from e
    if metric == "em":
        a = {i: float(v) for i, v in eval_a.per_example_em.items()}
        b = {i: float(v) for i, v in eval_b.per_example_em.items()}
    elif metric == "f1":
        a, b = eval_a.per_example_f1, eval_b.per_example_f1
    else:
        raise UsageError(f"unknown metric {metric!r}")
    scores = PairedScores.from_dicts(a, b)
    try:
        result = fisher_randomization(
            scores,
            resamples=get("resamples", 10000),
            seed=get("seed", 0),
            exhaustive_limit=get("exhaustive_limit", 20),
        )
    except ValueError as e:
        raise UsageError(str(e)) from e
    if args.out:
        dataio.dump_json(result.to_dict(), args.out)
    print(json.dumps(result.to_dict(), sort_keys=True))


def cmd_delta_matrix(args: argparse.Namespace) -> None:
    def read_grid(path: str) -> dict[tuple[str, str], float]:
        try:
            obj = dataio.load_json(path)
        except FileNotFoundError as e:
            raise DataError(f"results file not found: {path}") from e
        if not isinstance(obj, dict):
            raise DataError(f"{path}: expected {{question_lang: {{context_lang: em}}}}")
        grid = {}
        for q, row in obj.items():
            if not isinstance(row, dict):
                raise DataError(f"{path}: row {q!r} is not an object")
            for c, v in row.items():
                grid[(q, c)] = float(v)
        return grid

    baseline = read_grid(args.baseline)
    system = read_grid(args.system)
    try:
        matrix = delta_matrix(baseline, system)
    except KeyError as e:
        raise DataError(str(e)) from e
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "delta_matrix.txt").write_text(matrix.to_text(), encoding="utf-8")
    (out_dir / "delta_matrix.csv").write_text(matrix.to_csv(), encoding="utf-8")
    print(matrix.to_text(), end="")


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spancorrect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON config file; flags override its values")
        return p

    p = add("gen-corpus", cmd_gen_corpus, "generate a synthetic train/dev corpus")
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-dev", required=True)
    p.add_argument("--out-train-labels")
    p.add_argument("--out-dev-labels")
    p.add_argument("--n-train", type=int, help="training examples (default 2000)")
    p.add_argument("--n-dev", type=int, help="dev examples (default 500)")
    p.add_argument("--seed", type=int, help="corpus seed (default 0; dev uses seed+1)")
    p.add_argument("--weight-list", type=float, help="list-answer template weight (default 1)")
    p.add_argument("--weight-qualified", type=float, help="qualified-answer template weight (default 1)")
    p.add_argument("--weight-entity", type=float, help="plain-entity template weight (default 1)")
    p.add_argument("--multi-span-fraction", type=float,
                   help="fraction of list examples with multi-span gold (default 0.5)")
    p.add_argument("--filler-min", type=int, help="minimum filler tokens (default 10)")
    p.add_argument("--filler-max", type=int, help="maximum filler tokens (default 30)")

    p = add("flawed-predict", cmd_flawed_predict, "simulate reader predictions with injected errors")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-predictions", required=True)
    p.add_argument("--out-nbest")
    p.add_argument("--out-labels", help="sidecar mapping id -> injected category or 'exact'")
    p.add_argument("--partial-rate", type=float, help="partial-match rate (default 0.4)")
    p.add_argument("--rate-pred-subset-gt", type=float, help="category rate (default 0.33)")
    p.add_argument("--rate-gt-subset-pred", type=float, help="category rate (default 0.28)")
    p.add_argument("--rate-partial-overlap", type=float, help="category rate (default 0.06)")
    p.add_argument("--rate-multi-span-gt", type=float, help="category rate (default 0.33)")
    p.add_argument("--nbest-extras", type=int, help="extra incorrect n-best entries (default 3)")
    p.add_argument("--seed", type=int, help="injection seed (default 0)")

    p = add("train-reader", cmd_train_reader, "train a reader (optionally k-fold with held-out predictions)")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-checkpoint", help="checkpoint path (plain mode)")
    p.add_argument("--kfold", action="store_true", default=None)
    p.add_argument("--folds", type=int, help="number of folds (default 5)")
    p.add_argument("--out-nbest", help="held-out n-best output (kfold mode)")
    p.add_argument("--out-predictions", help="held-out top-1 output (kfold mode)")
    p.add_argument("--checkpoint-dir", help="directory for per-fold checkpoints (kfold mode)")
    p.add_argument("--nbest-size", type=int, help="n-best size (default 20)")
    p.add_argument("--jobs", type=int, help="parallel fold training processes (default 1)")
    _add_model_flags(p)
    _add_train_flags(p)

    p = add("predict", cmd_predict, "predict spans with one checkpoint or a logit ensemble")
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoint", action="append", required=True,
                   help="checkpoint path; repeat to ensemble logits")
    p.add_argument("--out-predictions", required=True)
    p.add_argument("--out-nbest")
    p.add_argument("--nbest-size", type=int, help="n-best size (default 20)")
    p.add_argument("--batch-size", type=int, help="inference batch size (default 32)")

    p = add("gen-corrector-data", cmd_gen_corrector_data, "build corrector training records")
    p.add_argument("--dataset", required=True)
    p.add_argument("--nbest", required=True, help="reader n-best file over the dataset")
    p.add_argument("--out", required=True, help="corrector training file (JSONL)")
    p.add_argument("--out-summary", help="generation summary JSON")
    p.add_argument("--k", type=int, help="top incorrect predictions per example (default 2)")

    p = add("train-corrector", cmd_train_corrector, "train the corrector on delimiter-marked records")
    p.add_argument("--data", required=True, help="corrector training file (JSONL)")
    p.add_argument("--out-checkpoint", required=True)
    _add_model_flags(p)
    _add_train_flags(p)

    p = add("correct", cmd_correct, "re-predict spans with reader predictions marked in the input")
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", required=True, help="reader predictions to correct")
    p.add_argument("--checkpoint", required=True, help="corrector checkpoint")
    p.add_argument("--out-predictions", required=True)
    p.add_argument("--batch-size", type=int, help="inference batch size (default 32)")

    p = add("evaluate", cmd_evaluate, "EM/F1 of a prediction file against gold")
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", help="summary JSON path")
    p.add_argument("--strip-articles", action=argparse.BooleanOptionalAction, default=None,
                   help="strip English articles during normalization (default on)")

    p = add("analyze", cmd_analyze, "taxonomy, change, and per-category correction reports")
    p.add_argument("--dataset", required=True)
    p.add_argument("--reader-predictions", required=True)
    p.add_argument("--corrector-predictions", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--strip-articles", action=argparse.BooleanOptionalAction, default=None)

    p = add("sigtest", cmd_sigtest, "paired Fisher randomization test between two prediction files")
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions-a", required=True)
    p.add_argument("--predictions-b", required=True)
    p.add_argument("--metric", choices=["em", "f1"], help="per-example score (default em)")
    p.add_argument("--resamples", type=int, help="Monte Carlo draws (default 10000)")
    p.add_argument("--seed", type=int, help="Monte Carlo seed (default 0)")
    p.add_argument("--exhaustive-limit", type=int,
                   help="enumerate exhaustively when n <= limit (default 20)")
    p.add_argument("--out", help="result JSON path")
    p.add_argument("--strip-articles", action=argparse.BooleanOptionalAction, default=None)

    p = add("delta-matrix", cmd_delta_matrix, "EM delta matrix over language pairs")
    p.add_argument("--baseline", required=True, help="JSON {q_lang: {c_lang: em}}")
    p.add_argument("--system", required=True, help="JSON {q_lang: {c_lang: em}}")
    p.add_argument("--out-dir", required=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
        return 0
    except UsageError as e:
        print(f"error[usage]: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error[usage]: {e}", file=sys.stderr)
        return 1
    except DataError as e:
        print(f"error[data]: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error[data]: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
