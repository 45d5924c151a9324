import json

import pytest

from spancorrect import dataio
from spancorrect.checkpoint import load_checkpoint
from spancorrect.cli import main


TINY_MODEL = ["--layers", "1", "--heads", "2", "--dim", "32", "--ff-dim", "64", "--max-seq-len", "96"]
FAST_TRAIN = ["--epochs", "3", "--learning-rate", "0.2", "--batch-size", "16"]
SINGLE_SPAN_RATES = [
    "--rate-multi-span-gt", "0",
    "--rate-pred-subset-gt", "0.4925373134328358",
    "--rate-gt-subset-pred", "0.417910447761194",
    "--rate-partial-overlap", "0.0895522388059702",
]


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A small corpus with flawed-reader predictions shared by CLI tests."""
    root = tmp_path_factory.mktemp("cliws")
    assert run(
        "gen-corpus", "--out-train", root / "train.json", "--out-dev", root / "dev.json",
        "--out-train-labels", root / "train.labels.json",
        "--n-train", 60, "--n-dev", 24, "--seed", 3,
        "--multi-span-fraction", 0, "--filler-min", 4, "--filler-max", 12,
    ) == 0
    assert run(
        "flawed-predict", "--dataset", root / "train.json",
        "--out-predictions", root / "train.preds.json",
        "--out-nbest", root / "train.nbest.json",
        "--out-labels", root / "train.inj.json",
        "--partial-rate", "0.5", "--seed", 5, *SINGLE_SPAN_RATES,
    ) == 0
    assert run(
        "flawed-predict", "--dataset", root / "dev.json",
        "--out-predictions", root / "dev.preds.json",
        "--partial-rate", "0.5", "--seed", 6, *SINGLE_SPAN_RATES,
    ) == 0
    return root


class TestGenCorpus:
    def test_writes_valid_datasets_and_labels(self, workspace):
        train = dataio.read_dataset(workspace / "train.json")
        dev = dataio.read_dataset(workspace / "dev.json")
        assert len(train) == 60 and len(dev) == 24
        assert not (set(e.id for e in train) & set(e.id for e in dev))
        labels = dataio.read_labels(workspace / "train.labels.json")
        assert set(labels) == set(e.id for e in train)
        assert all("template" in l for l in labels.values())

    def test_seed_repetition_gives_identical_files(self, tmp_path, workspace):
        assert run(
            "gen-corpus", "--out-train", tmp_path / "t.json", "--out-dev", tmp_path / "d.json",
            "--n-train", 60, "--n-dev", 24, "--seed", 3,
            "--multi-span-fraction", 0, "--filler-min", 4, "--filler-max", 12,
        ) == 0
        assert (tmp_path / "t.json").read_bytes() == (workspace / "train.json").read_bytes()

    def test_invalid_weights_exit_code(self, tmp_path, capsys):
        code = run(
            "gen-corpus", "--out-train", tmp_path / "t.json", "--out-dev", tmp_path / "d.json",
            "--weight-list", 0, "--weight-qualified", 0, "--weight-entity", 0,
        )
        assert code == 1
        assert capsys.readouterr().err.startswith("error[usage]:")

    def test_missing_required_flag_exit_code(self, capsys):
        assert run("gen-corpus") == 1
        assert "error[usage]" in capsys.readouterr().err


class TestFlawedPredict:
    def test_outputs_cover_dataset(self, workspace):
        preds = dataio.read_predictions(workspace / "train.preds.json")
        train_ids = {ex.id for ex in dataio.read_dataset(workspace / "train.json")}
        assert set(preds) == train_ids
        nbest = dataio.read_nbest(workspace / "train.nbest.json")
        assert set(nbest) == train_ids

    def test_missing_dataset_exit_code(self, tmp_path, capsys):
        code = run("flawed-predict", "--dataset", tmp_path / "nope.json",
                   "--out-predictions", tmp_path / "p.json")
        assert code == 2
        assert capsys.readouterr().err.startswith("error[data]:")


class TestReaderTraining:
    def test_kfold_covers_every_example_once(self, workspace, tmp_path):
        out_nbest = tmp_path / "kfold.nbest.json"
        assert run(
            "train-reader", "--dataset", workspace / "train.json", "--kfold", "--folds", 5,
            "--out-nbest", out_nbest, "--out-predictions", tmp_path / "kfold.preds.json",
            "--nbest-size", 8, "--seed", 0, *TINY_MODEL, "--epochs", 2, "--learning-rate", "0.2",
        ) == 0
        nbest = dataio.read_nbest(out_nbest)
        train_ids = {ex.id for ex in dataio.read_dataset(workspace / "train.json")}
        assert set(nbest) == train_ids
        for entries in nbest.values():
            assert 1 <= len(entries) <= 8
            scores = [e.score for e in entries]
            assert scores == sorted(scores, reverse=True)

    def test_plain_training_then_predict(self, workspace, tmp_path):
        ckpt_path = tmp_path / "reader.ckpt.json"
        assert run(
            "train-reader", "--dataset", workspace / "train.json",
            "--out-checkpoint", ckpt_path, "--seed", 1, *TINY_MODEL, *FAST_TRAIN,
        ) == 0
        model, vocab, cfg, kind = load_checkpoint(ckpt_path)
        assert kind == "reader"
        assert run(
            "predict", "--dataset", workspace / "dev.json", "--checkpoint", ckpt_path,
            "--out-predictions", tmp_path / "dev.preds.json",
            "--out-nbest", tmp_path / "dev.nbest.json", "--nbest-size", 5,
        ) == 0
        preds = dataio.read_predictions(tmp_path / "dev.preds.json")
        dev_ids = {ex.id for ex in dataio.read_dataset(workspace / "dev.json")}
        assert set(preds) == dev_ids

    def test_rerun_byte_identical(self, workspace, tmp_path):
        args = [
            "train-reader", "--dataset", workspace / "train.json", "--kfold", "--folds", 3,
            "--nbest-size", 4, "--seed", 2, *TINY_MODEL, "--epochs", 1, "--learning-rate", "0.2",
        ]
        assert run(*args, "--out-nbest", tmp_path / "n1.json") == 0
        assert run(*args, "--out-nbest", tmp_path / "n2.json") == 0
        assert (tmp_path / "n1.json").read_bytes() == (tmp_path / "n2.json").read_bytes()

    def test_parallel_folds_match_sequential(self, workspace, tmp_path):
        args = [
            "train-reader", "--dataset", workspace / "train.json", "--kfold", "--folds", 3,
            "--nbest-size", 4, "--seed", 2, *TINY_MODEL, "--epochs", 1, "--learning-rate", "0.2",
        ]
        assert run(*args, "--out-nbest", tmp_path / "seq.json", "--jobs", 1) == 0
        assert run(*args, "--out-nbest", tmp_path / "par.json", "--jobs", 2) == 0
        assert (tmp_path / "seq.json").read_bytes() == (tmp_path / "par.json").read_bytes()

    def test_self_ensemble_equals_single(self, workspace, tmp_path):
        ckpt_path = tmp_path / "reader.ckpt.json"
        assert run(
            "train-reader", "--dataset", workspace / "train.json",
            "--out-checkpoint", ckpt_path, "--seed", 4, *TINY_MODEL, "--epochs", 1, "--learning-rate", "0.2",
        ) == 0
        assert run(
            "predict", "--dataset", workspace / "dev.json", "--checkpoint", ckpt_path,
            "--out-predictions", tmp_path / "single.json",
        ) == 0
        assert run(
            "predict", "--dataset", workspace / "dev.json",
            "--checkpoint", ckpt_path, "--checkpoint", ckpt_path,
            "--out-predictions", tmp_path / "double.json",
        ) == 0
        single = dataio.read_predictions(tmp_path / "single.json")
        double = dataio.read_predictions(tmp_path / "double.json")
        assert {i: (p.text, p.span) for i, p in single.items()} == {
            i: (p.text, p.span) for i, p in double.items()
        }


@pytest.fixture(scope="module")
def corrector_setup(workspace, tmp_path_factory):
    root = tmp_path_factory.mktemp("corr")
    data = root / "corrector.jsonl"
    ckpt_path = root / "corrector.ckpt.json"
    assert run(
        "gen-corrector-data", "--dataset", workspace / "train.json",
        "--nbest", workspace / "train.nbest.json", "--out", data, "--k", 2,
        "--out-summary", root / "summary.json",
    ) == 0
    assert run(
        "train-corrector", "--data", data, "--out-checkpoint", ckpt_path,
        "--seed", 7, *TINY_MODEL, *FAST_TRAIN,
    ) == 0
    return root


class TestCorrectorPipeline:
    def test_datagen_contract(self, workspace, corrector_setup):
        from spancorrect.datagen import read_corrector_file

        records = read_corrector_file(corrector_setup / "corrector.jsonl")
        by_source = {}
        for r in records:
            by_source.setdefault(r.source_id, []).append(r)
        train = {ex.id: ex for ex in dataio.read_dataset(workspace / "train.json")}
        for source_id, recs in by_source.items():
            identity = [r for r in recs if r.is_identity]
            corrections = [r for r in recs if not r.is_identity]
            assert len(identity) == 1
            assert len(corrections) <= 2
            ctx = train[source_id].context
            for r in recs:
                assert r.marked_span.end <= len(ctx)
                assert r.target_span.end <= len(ctx)
        summary = json.loads((corrector_setup / "summary.json").read_text())
        assert summary["identity"] == len(by_source)

    def test_k_zero_identity_only(self, workspace, tmp_path):
        out = tmp_path / "identity.jsonl"
        assert run(
            "gen-corrector-data", "--dataset", workspace / "train.json",
            "--nbest", workspace / "train.nbest.json", "--out", out, "--k", 0,
        ) == 0
        from spancorrect.datagen import read_corrector_file

        assert all(r.is_identity for r in read_corrector_file(out))

    def test_correct_covers_all_ids_and_evaluates(self, workspace, corrector_setup, tmp_path, capsys):
        corrected = tmp_path / "dev.corrected.json"
        assert run(
            "correct", "--dataset", workspace / "dev.json",
            "--predictions", workspace / "dev.preds.json",
            "--checkpoint", corrector_setup / "corrector.ckpt.json",
            "--out-predictions", corrected,
        ) == 0
        preds = dataio.read_predictions(corrected)
        dev_ids = {ex.id for ex in dataio.read_dataset(workspace / "dev.json")}
        assert set(preds) == dev_ids
        out = tmp_path / "eval.json"
        assert run("evaluate", "--dataset", workspace / "dev.json",
                   "--predictions", corrected, "--out", out) == 0
        summary = json.loads(out.read_text())
        assert set(summary) == {"n", "exact_match", "f1"}
        assert 0.0 <= summary["exact_match"] <= 100.0

    def test_correct_with_random_corrector_is_well_formed(self, workspace, tmp_path):
        data = tmp_path / "tiny.jsonl"
        assert run(
            "gen-corrector-data", "--dataset", workspace / "train.json",
            "--nbest", workspace / "train.nbest.json", "--out", data, "--k", 0,
        ) == 0
        ckpt_path = tmp_path / "random.ckpt.json"
        # one epoch at learning rate ~0 leaves the random init untouched
        assert run(
            "train-corrector", "--data", data, "--out-checkpoint", ckpt_path,
            "--seed", 9, *TINY_MODEL, "--epochs", 1, "--learning-rate", "1e-9",
        ) == 0
        corrected = tmp_path / "c.json"
        assert run(
            "correct", "--dataset", workspace / "dev.json",
            "--predictions", workspace / "dev.preds.json",
            "--checkpoint", ckpt_path, "--out-predictions", corrected,
        ) == 0
        preds = dataio.read_predictions(corrected)
        dev = {ex.id: ex for ex in dataio.read_dataset(workspace / "dev.json")}
        assert set(preds) == set(dev)
        for ex_id, p in preds.items():
            assert p.span is not None
            assert p.span.text(dev[ex_id].context) == p.text


class TestEvaluate:
    def test_gold_texts_score_100(self, workspace, tmp_path, capsys):
        dev = dataio.read_dataset(workspace / "dev.json")
        preds = {}
        for ex in dev:
            ann = ex.single_span_annotations()[0]
            preds[ex.id] = dataio.Prediction(
                example_id=ex.id, text=ann.texts[0], span=ann.spans[0]
            )
        path = tmp_path / "gold.preds.json"
        dataio.write_predictions(path, preds)
        assert run("evaluate", "--dataset", workspace / "dev.json", "--predictions", path) == 0
        out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert out["exact_match"] == 100.0 and out["f1"] == 100.0

    def test_article_stripping_flag_changes_scores(self, tmp_path, capsys):
        from fixtures import example_with_answer

        ex = example_with_answer("a0", "q", "the gate was the red gate .", "the red gate")
        dataio.write_dataset(tmp_path / "gold.json", [ex])
        preds = {"a0": dataio.Prediction(example_id="a0", text="red gate")}
        dataio.write_predictions(tmp_path / "p.json", preds)
        assert run("evaluate", "--dataset", tmp_path / "gold.json",
                   "--predictions", tmp_path / "p.json") == 0
        with_articles = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert with_articles["exact_match"] == 100.0
        assert run("evaluate", "--dataset", tmp_path / "gold.json",
                   "--predictions", tmp_path / "p.json", "--no-strip-articles") == 0
        without = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert without["exact_match"] == 0.0

    def test_missing_id_is_data_error(self, workspace, tmp_path, capsys):
        preds = dataio.read_predictions(workspace / "dev.preds.json")
        preds.pop(sorted(preds)[0])
        path = tmp_path / "partial.json"
        dataio.write_predictions(path, preds)
        assert run("evaluate", "--dataset", workspace / "dev.json", "--predictions", path) == 2
        assert capsys.readouterr().err.startswith("error[data]:")


class TestAnalyze:
    def test_reports_written(self, workspace, corrector_setup, tmp_path):
        corrected = tmp_path / "dev.corrected.json"
        assert run(
            "correct", "--dataset", workspace / "dev.json",
            "--predictions", workspace / "dev.preds.json",
            "--checkpoint", corrector_setup / "corrector.ckpt.json",
            "--out-predictions", corrected,
        ) == 0
        out_dir = tmp_path / "reports"
        assert run(
            "analyze", "--dataset", workspace / "dev.json",
            "--reader-predictions", workspace / "dev.preds.json",
            "--corrector-predictions", corrected, "--out-dir", out_dir,
        ) == 0
        for name in (
            "taxonomy.txt", "taxonomy.csv", "change_stats.txt", "change_stats.csv",
            "category_correction.txt", "category_correction.csv", "summary.json",
        ):
            assert (out_dir / name).exists()
        summary = json.loads((out_dir / "summary.json").read_text())
        assert summary["reader"]["n"] == 24

    def test_byte_identical_rerun(self, workspace, corrector_setup, tmp_path):
        corrected = tmp_path / "c.json"
        run(
            "correct", "--dataset", workspace / "dev.json",
            "--predictions", workspace / "dev.preds.json",
            "--checkpoint", corrector_setup / "corrector.ckpt.json",
            "--out-predictions", corrected,
        )
        d1, d2 = tmp_path / "r1", tmp_path / "r2"
        for d in (d1, d2):
            assert run(
                "analyze", "--dataset", workspace / "dev.json",
                "--reader-predictions", workspace / "dev.preds.json",
                "--corrector-predictions", corrected, "--out-dir", d,
            ) == 0
        for name in ("taxonomy.csv", "change_stats.csv", "summary.json"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


class TestSigtest:
    def test_identical_files_p_one(self, workspace, tmp_path, capsys):
        assert run(
            "sigtest", "--dataset", workspace / "dev.json",
            "--predictions-a", workspace / "dev.preds.json",
            "--predictions-b", workspace / "dev.preds.json",
        ) == 0
        out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert out["p"] == 1.0

    def test_exhaustive_four_example_fixture(self, tmp_path, capsys):
        ctx = "the gate was red that day ."
        examples = []
        from fixtures import example_with_answer

        for i in range(4):
            examples.append(example_with_answer(f"e{i}", "q", ctx, "red"))
        dataio.write_dataset(tmp_path / "gold.json", examples)
        right = {e.id: dataio.Prediction(example_id=e.id, text="red") for e in examples}
        wrong = {e.id: dataio.Prediction(example_id=e.id, text="gate") for e in examples}
        dataio.write_predictions(tmp_path / "a.json", right)
        dataio.write_predictions(tmp_path / "b.json", wrong)
        assert run(
            "sigtest", "--dataset", tmp_path / "gold.json",
            "--predictions-a", tmp_path / "a.json", "--predictions-b", tmp_path / "b.json",
            "--out", tmp_path / "sig.json",
        ) == 0
        out = json.loads((tmp_path / "sig.json").read_text())
        assert out["p"] == 0.125 and out["method"] == "exhaustive"

    def test_monte_carlo_seed_reproducible(self, workspace, corrector_setup, tmp_path):
        corrected = tmp_path / "c.json"
        run(
            "correct", "--dataset", workspace / "dev.json",
            "--predictions", workspace / "dev.preds.json",
            "--checkpoint", corrector_setup / "corrector.ckpt.json",
            "--out-predictions", corrected,
        )
        outs = []
        for name in ("s1.json", "s2.json"):
            assert run(
                "sigtest", "--dataset", workspace / "dev.json",
                "--predictions-a", corrected, "--predictions-b", workspace / "dev.preds.json",
                "--exhaustive-limit", 4, "--resamples", 3000, "--seed", 11,
                "--out", tmp_path / name,
            ) == 0
            outs.append((tmp_path / name).read_bytes())
        assert outs[0] == outs[1]
        assert json.loads(outs[0])["method"] == "monte_carlo"


class TestDeltaMatrix:
    def test_reports(self, tmp_path, capsys):
        langs = ["en", "es"]
        base = {q: {c: 40.0 for c in langs} for q in langs}
        sys_res = {q: {c: 40.0 + (1.0 if c == "en" else 3.0) for c in langs} for q in langs}
        (tmp_path / "base.json").write_text(json.dumps(base))
        (tmp_path / "sys.json").write_text(json.dumps(sys_res))
        assert run(
            "delta-matrix", "--baseline", tmp_path / "base.json",
            "--system", tmp_path / "sys.json", "--out-dir", tmp_path / "out",
        ) == 0
        text = (tmp_path / "out" / "delta_matrix.txt").read_text()
        assert text.splitlines()[-1].split() == ["AVG", "1.0", "3.0"]

    def test_grid_mismatch_is_data_error(self, tmp_path, capsys):
        (tmp_path / "base.json").write_text(json.dumps({"en": {"en": 1.0}}))
        (tmp_path / "sys.json").write_text(json.dumps({"en": {"es": 1.0}}))
        assert run(
            "delta-matrix", "--baseline", tmp_path / "base.json",
            "--system", tmp_path / "sys.json", "--out-dir", tmp_path / "out",
        ) == 2


class TestMultiSpanPipeline:
    """Default category rates over a corpus where every list example carries
    a multi-span gold annotation alongside the contiguous one."""

    def test_end_to_end_with_multi_span_gold(self, tmp_path):
        root = tmp_path
        assert run(
            "gen-corpus", "--out-train", root / "train.json", "--out-dev", root / "dev.json",
            "--n-train", 60, "--n-dev", 30, "--seed", 9, "--multi-span-fraction", 1,
            "--filler-min", 4, "--filler-max", 12,
        ) == 0
        assert run(
            "flawed-predict", "--dataset", root / "train.json",
            "--out-predictions", root / "train.preds.json",
            "--out-nbest", root / "train.nbest.json",
            "--out-labels", root / "train.inj.json",
            "--partial-rate", "0.6", "--seed", 10,
        ) == 0
        labels = dataio.read_labels(root / "train.inj.json")
        assert "multi_span_gt" in set(labels.values())
        assert run(
            "gen-corrector-data", "--dataset", root / "train.json",
            "--nbest", root / "train.nbest.json", "--out", root / "corrector.jsonl", "--k", 2,
            "--out-summary", root / "summary.json",
        ) == 0
        # list examples carry a contiguous annotation too, so all are usable
        summary = json.loads((root / "summary.json").read_text())
        assert summary["identity"] == 60 and summary["skipped_multi_span_only"] == 0
        assert run(
            "flawed-predict", "--dataset", root / "dev.json",
            "--out-predictions", root / "dev.preds.json", "--partial-rate", "0.6", "--seed", 11,
        ) == 0
        assert run(
            "analyze", "--dataset", root / "dev.json",
            "--reader-predictions", root / "dev.preds.json",
            "--corrector-predictions", root / "dev.preds.json",
            "--out-dir", root / "reports",
        ) == 0
        taxonomy_csv = (root / "reports" / "taxonomy.csv").read_text()
        assert "multi_span_gt" in taxonomy_csv


class TestConfigFile:
    def test_config_supplies_defaults_flags_override(self, workspace, tmp_path):
        cfg = {
            "model": {"layers": 1, "heads": 2, "dim": 32, "ff_dim": 64, "max_seq_len": 96},
            "train": {"epochs": 1, "learning_rate": 0.2, "seed": 4},
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        c1 = tmp_path / "c1.json"
        assert run(
            "train-reader", "--dataset", workspace / "train.json",
            "--out-checkpoint", c1, "--config", cfg_path,
        ) == 0
        model, _, mcfg, _ = load_checkpoint(c1)
        assert mcfg.layers == 1 and mcfg.dim == 32
        c2 = tmp_path / "c2.json"
        assert run(
            "train-reader", "--dataset", workspace / "train.json",
            "--out-checkpoint", c2, "--config", cfg_path, "--dim", 16, "--ff-dim", 32,
        ) == 0
        _, _, mcfg2, _ = load_checkpoint(c2)
        assert mcfg2.dim == 16  # flag wins over config

    def test_bad_config_usage_error(self, workspace, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("not json")
        assert run(
            "train-reader", "--dataset", workspace / "train.json",
            "--out-checkpoint", tmp_path / "c.json", "--config", bad,
        ) == 1
        assert capsys.readouterr().err.startswith("error[usage]:")
