import json

from synprobe.cli import EXIT_INPUT, EXIT_OK, EXIT_PARTIAL, main
from synprobe.embstore import EmbeddingHeader, save_store
from synprobe.synthetic import SyntheticConfig, build_encoder, generate_split, ideal_probe
from synprobe.probe import save_probe
from synprobe.treebank import write_conllu

CFG = SyntheticConfig(max_tokens=8, code_dim=8, seed=42)


def write_fixture(root, model="toy", layers=(0,), n_train=40, n_dev=12, n_test=12):
    """Lay out a toy corpus + stores following the sweep's path convention."""
    encoder = build_encoder(CFG)
    splits = {
        "train": generate_split(encoder, n_train, seed=1),
        "dev": generate_split(encoder, n_dev, seed=2),
        "test": generate_split(encoder, n_test, seed=3),
    }
    root.mkdir(parents=True, exist_ok=True)
    for split, (trees, vectors) in splits.items():
        (root / f"{split}.conllu").write_text(write_conllu(trees))
        for layer in layers:
            header = EmbeddingHeader(model, layer, CFG.hidden_dim, len(vectors))
            save_store(root / f"{split}.{model}.L{layer}.wemb", header, vectors)
    return encoder, splits


def train_args(root, out, extra=()):
    return [
        "train",
        "--train-conllu", str(root / "train.conllu"),
        "--dev-conllu", str(root / "dev.conllu"),
        "--train-emb", str(root / "train.toy.L0.wemb"),
        "--dev-emb", str(root / "dev.toy.L0.wemb"),
        "--rank", "8",
        "--seed", "7",
        "--max-epochs", "2",
        "--patience", "2",
        "--out", str(out),
        *extra,
    ]


class TestTrainCommand:
    def test_writes_checkpoint_and_log(self, tmp_path, capsys):
        write_fixture(tmp_path / "data")
        out = tmp_path / "run"
        assert main(train_args(tmp_path / "data", out)) == EXIT_OK
        checkpoint = json.loads((out / "probe.json").read_text())
        assert checkpoint["modelId"] == "toy" and checkpoint["rank"] == 8
        log_lines = (out / "train_log.csv").read_text().strip().split("\n")
        assert log_lines[0].startswith("epoch,")
        assert len(log_lines) >= 2
        assert "best epoch" in capsys.readouterr().out

    def test_missing_store_exits_2(self, tmp_path, capsys):
        write_fixture(tmp_path / "data")
        args = train_args(tmp_path / "data", tmp_path / "run")
        args[args.index("--train-emb") + 1] = str(tmp_path / "data" / "absent.wemb")
        assert main(args) == EXIT_INPUT
        assert "store not found" in capsys.readouterr().err

    def test_misaligned_store_exits_2(self, tmp_path, capsys):
        root = tmp_path / "data"
        write_fixture(root)
        # dev store paired with the train treebank cannot align
        args = train_args(root, tmp_path / "run")
        args[args.index("--train-emb") + 1] = str(root / "dev.toy.L0.wemb")
        assert main(args) == EXIT_INPUT
        assert "misaligned" in capsys.readouterr().err

    def test_rank_exceeding_hidden_dim_exits_2(self, tmp_path, capsys):
        write_fixture(tmp_path / "data")
        args = train_args(tmp_path / "data", tmp_path / "run")
        args[args.index("--rank") + 1] = "4096"
        assert main(args) == EXIT_INPUT
        assert "rank" in capsys.readouterr().err

    def test_keep_subtypes_reaches_checkpoint_vocabulary(self, tmp_path):
        # a treebank with one subtyped relation, random but aligned vectors
        import numpy as np

        from synprobe.treebank import load_conllu

        data = tmp_path / "data"
        data.mkdir()
        text = (
            "1\tAlice\t_\t_\t_\t_\t3\tnmod:poss\t_\t_\n"
            "2\t's\t_\t_\t_\t_\t1\tcase\t_\t_\n"
            "3\tbook\t_\t_\t_\t_\t4\tnsubj\t_\t_\n"
            "4\tsells\t_\t_\t_\t_\t0\troot\t_\t_\n\n"
        ) * 6
        for split in ("train", "dev"):
            (data / f"{split}.conllu").write_text(text)
            trees = load_conllu(data / f"{split}.conllu")
            rng = np.random.default_rng(0)
            vectors = [rng.standard_normal((len(t), 8)) for t in trees]
            save_store(
                data / f"{split}.toy.L0.wemb",
                EmbeddingHeader("toy", 0, 8, len(vectors)),
                vectors,
            )
        args = train_args(data, tmp_path / "run", extra=["--keep-subtypes"])
        args[args.index("--rank") + 1] = "4"
        assert main(args) == EXIT_OK
        checkpoint = json.loads((tmp_path / "run" / "probe.json").read_text())
        assert "nmod:poss" in checkpoint["labels"]
        # default run strips the subtype
        assert main(train_args(data, tmp_path / "run2", extra=["--rank", "4"])) == EXIT_OK
        stripped = json.loads((tmp_path / "run2" / "probe.json").read_text())
        assert "nmod" in stripped["labels"] and "nmod:poss" not in stripped["labels"]

    def test_same_seed_gives_identical_checkpoints(self, tmp_path):
        write_fixture(tmp_path / "data")
        assert main(train_args(tmp_path / "data", tmp_path / "a")) == EXIT_OK
        assert main(train_args(tmp_path / "data", tmp_path / "b")) == EXIT_OK
        assert (tmp_path / "a" / "probe.json").read_bytes() == (
            tmp_path / "b" / "probe.json"
        ).read_bytes()


class TestEvalCommand:
    def test_ideal_probe_scores_hundred(self, tmp_path):
        root = tmp_path / "data"
        encoder, _ = write_fixture(root)
        probe_path = tmp_path / "ideal.json"
        probe_path.write_text(save_probe(ideal_probe(encoder), model_id="toy", layer_index=0))
        out = tmp_path / "eval"
        code = main([
            "eval",
            "--probe", str(probe_path),
            "--conllu", str(root / "test.conllu"),
            "--emb", str(root / "test.toy.L0.wemb"),
            "--out", str(out),
            "--emit-predictions",
        ])
        assert code == EXIT_OK
        rows = (out / "metrics.csv").read_text().strip().split("\n")[1:]
        values = {row.split(",")[3]: row.split(",")[4] for row in rows}
        assert values == {
            "las": "100.00", "uas": "100.00", "uuas": "100.00",
            "label": "100.00", "root": "100.00",
        }
        assert (out / "relations.csv").exists()
        assert (out / "report.json").exists()
        # the ideal probe reproduces gold exactly, so the emitted CoNLL-U
        # (forms copied, heads and labels predicted) matches the input file
        predictions = (out / "predictions.conllu").read_text()
        assert predictions == (root / "test.conllu").read_text()
        report = json.loads((out / "report.json").read_text())
        assert report["las"] == 100.0

    def test_dimension_mismatch_names_dims(self, tmp_path, capsys):
        root = tmp_path / "data"
        encoder, _ = write_fixture(root)
        small = SyntheticConfig(max_tokens=6, code_dim=6, distractor_dim=2, seed=1)
        other = build_encoder(small)
        probe_path = tmp_path / "probe.json"
        probe_path.write_text(save_probe(ideal_probe(other)))
        code = main([
            "eval",
            "--probe", str(probe_path),
            "--conllu", str(root / "test.conllu"),
            "--emb", str(root / "test.toy.L0.wemb"),
            "--out", str(tmp_path / "eval"),
        ])
        assert code == EXIT_INPUT
        err = capsys.readouterr().err
        assert str(small.hidden_dim) in err and str(CFG.hidden_dim) in err

    def test_gold_relations_outside_vocabulary_warn(self, tmp_path, capsys):
        root = tmp_path / "data"
        encoder, splits = write_fixture(root)
        # rename one relation in the gold file so it cannot be predicted
        test_file = root / "test.conllu"
        test_file.write_text(test_file.read_text().replace("\tnsubj\t", "\texotic\t"))
        probe_path = tmp_path / "ideal.json"
        probe_path.write_text(save_probe(ideal_probe(encoder), model_id="toy", layer_index=0))
        code = main([
            "eval",
            "--probe", str(probe_path),
            "--conllu", str(test_file),
            "--emb", str(root / "test.toy.L0.wemb"),
            "--out", str(tmp_path / "eval"),
        ])
        assert code == EXIT_OK
        assert "exotic" in capsys.readouterr().err

    def test_missing_probe_exits_2(self, tmp_path, capsys):
        root = tmp_path / "data"
        write_fixture(root)
        code = main([
            "eval",
            "--probe", str(tmp_path / "none.json"),
            "--conllu", str(root / "test.conllu"),
            "--emb", str(root / "test.toy.L0.wemb"),
            "--out", str(tmp_path / "eval"),
        ])
        assert code == EXIT_INPUT
        assert "not found" in capsys.readouterr().err


def sweep_args(root, out, layers="0,1,2", jobs=None):
    args = [
        "sweep",
        "--model", "toy",
        "--layers", layers,
        "--train-conllu", str(root / "train.conllu"),
        "--dev-conllu", str(root / "dev.conllu"),
        "--test-conllu", str(root / "test.conllu"),
        "--emb-template", str(root) + "/{split}.{model}.L{layer}.wemb",
        "--rank", "8",
        "--seed", "5",
        "--max-epochs", "1",
        "--patience", "1",
        "--out", str(out),
    ]
    if jobs is not None:
        args += ["--jobs", str(jobs)]
    return args


class TestSweepCommand:
    def test_three_layer_sweep_row_count(self, tmp_path):
        root = tmp_path / "data"
        write_fixture(root, layers=(0, 1, 2))
        out = tmp_path / "sweep"
        assert main(sweep_args(root, out)) == EXIT_OK
        lines = (out / "sweep.csv").read_text().strip().split("\n")
        header, rows = lines[0], lines[1:]
        assert header == "model,layer,split,metric,value"
        aggregate = [r for r in rows if r.split(",")[3] in
                     ("las", "uas", "uuas", "label", "root")]
        assert len(aggregate) == 3 * 1 * 5  # layers x splits x metrics
        relation_rows = [r for r in rows if ":" in r.split(",")[3]]
        assert len(relation_rows) == len(rows) - len(aggregate)
        assert relation_rows  # per-relation rows are present
        for layer in (0, 1, 2):
            assert (out / f"L{layer}" / "probe.json").exists()
            assert (out / f"L{layer}" / "test" / "report.json").exists()

    def test_missing_store_fails_before_training(self, tmp_path, capsys):
        root = tmp_path / "data"
        write_fixture(root, layers=(0, 1))
        (root / "test.toy.L1.wemb").unlink()
        out = tmp_path / "sweep"
        assert main(sweep_args(root, out, layers="0,1")) == EXIT_INPUT
        assert "store not found" in capsys.readouterr().err
        assert not out.exists()  # preflight failed; nothing was trained

    def test_layer_failure_marks_and_continues(self, tmp_path, capsys, monkeypatch):
        root = tmp_path / "data"
        write_fixture(root, layers=(0, 1))
        out = tmp_path / "sweep"

        import synprobe.cli as cli_module

        real = cli_module._sweep_layer

        def flaky(job):
            if job["layer"] == 1:
                raise RuntimeError("synthetic layer failure")
            return real(job)

        monkeypatch.setattr(cli_module, "_sweep_layer", flaky)
        assert main(sweep_args(root, out, layers="0,1")) == EXIT_PARTIAL
        marker = out / "L1.failed"
        assert marker.exists() and "synthetic layer failure" in marker.read_text()
        rows = (out / "sweep.csv").read_text().strip().split("\n")[1:]
        assert all(row.split(",")[1] == "0" for row in rows)

    def test_parallel_jobs_match_serial(self, tmp_path):
        root = tmp_path / "data"
        write_fixture(root, layers=(0, 1))
        serial = tmp_path / "serial"
        parallel = tmp_path / "parallel"
        assert main(sweep_args(root, serial, layers="0,1", jobs=1)) == EXIT_OK
        assert main(sweep_args(root, parallel, layers="0,1", jobs=2)) == EXIT_OK
        assert (serial / "sweep.csv").read_text() == (parallel / "sweep.csv").read_text()

    def test_jobs_env_fallback(self, tmp_path, monkeypatch):
        root = tmp_path / "data"
        write_fixture(root, layers=(0,))
        monkeypatch.setenv("SYNPROBE_JOBS", "2")
        assert main(sweep_args(root, tmp_path / "sweep", layers="0")) == EXIT_OK

    def test_bad_layers_value(self, tmp_path, capsys):
        root = tmp_path / "data"
        write_fixture(root)
        assert main(sweep_args(root, tmp_path / "out", layers="0,x")) == EXIT_INPUT
        assert "--layers" in capsys.readouterr().err

    def test_alt_test_split_appears_in_csv(self, tmp_path):
        root = tmp_path / "data"
        encoder, _ = write_fixture(root, layers=(0,))
        # an alternate treebank with its own store, e.g. a perturbed test set
        alt_trees, alt_vectors = generate_split(encoder, 6, seed=9)
        (root / "alt.conllu").write_text(write_conllu(alt_trees))
        save_store(
            root / "alt.toy.L0.wemb",
            EmbeddingHeader("toy", 0, CFG.hidden_dim, len(alt_vectors)),
            alt_vectors,
        )
        out = tmp_path / "sweep"
        args = sweep_args(root, out, layers="0")
        args += ["--alt-test", f"alt={root / 'alt.conllu'}"]
        assert main(args) == EXIT_OK
        splits = {row.split(",")[2] for row in
                  (out / "sweep.csv").read_text().strip().split("\n")[1:]}
        assert splits == {"test", "alt"}
