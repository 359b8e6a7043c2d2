"""Command-line orchestration: train one probe, evaluate it, or sweep layers."""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import decoder, embstore, metrics, probe, treebank

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_INPUT = 2


class InputError(Exception):
    """Bad invocation or unusable input files; maps to exit code 2."""


def _load_treebank(path: str, strip_subtypes: bool = True) -> list[treebank.GoldTree]:
    file = Path(path)
    if not file.exists():
        raise InputError(f"treebank not found: {file}")
    try:
        return treebank.load_conllu(file, strip_subtypes=strip_subtypes)
    except (treebank.ConlluParseError, treebank.TreeStructureError) as err:
        raise InputError(f"{file}: {err}") from err


def _load_store(path: str):
    file = Path(path)
    if not file.exists():
        raise InputError(f"store not found: {file}")
    try:
        return embstore.load_store(file)
    except (embstore.StoreFormatError, embstore.StoreDataError) as err:
        raise InputError(f"{file}: {err}") from err


def _load_aligned(conllu_path: str, store_path: str, strip_subtypes: bool = True):
    trees = _load_treebank(conllu_path, strip_subtypes)
    header, sentences = _load_store(store_path)
    report = embstore.align_check(trees, sentences)
    if not report.ok:
        raise InputError(f"{conllu_path} vs {store_path}: {report.describe()}")
    return trees, header, sentences


def _train_config(args: argparse.Namespace) -> probe.TrainConfig:
    return probe.TrainConfig(
        rank=args.rank,
        step_size=args.step_size,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        patience=args.patience,
        seed=args.seed,
        label_weight=args.label_weight,
        struct_weight=args.struct_weight,
    )


def _train_log(record: probe.TrainRecord) -> str:
    lines = ["epoch,label_loss,struct_loss,dev_las,dev_uas,dev_label"]
    for i, epoch in enumerate(record.epochs):
        lines.append(
            f"{i},{epoch.label_loss:.6f},{epoch.struct_loss:.6f},"
            f"{epoch.dev_las:.2f},{epoch.dev_uas:.2f},{epoch.dev_label:.2f}"
        )
    lines.append(f"# best_epoch={record.best_epoch}")
    return "\n".join(lines) + "\n"


def _run_training(
    train_conllu: str,
    dev_conllu: str,
    train_emb: str,
    dev_emb: str,
    config: probe.TrainConfig,
    out_dir: Path,
    strip_subtypes: bool = True,
) -> probe.TrainRecord:
    train_trees, train_header, train_vectors = _load_aligned(
        train_conllu, train_emb, strip_subtypes
    )
    dev_trees, dev_header, dev_vectors = _load_aligned(dev_conllu, dev_emb, strip_subtypes)
    if train_header.hidden_dim != dev_header.hidden_dim:
        raise InputError(
            f"hidden dims differ: train store {train_header.hidden_dim} "
            f"vs dev store {dev_header.hidden_dim}"
        )
    if config.rank > train_header.hidden_dim:
        raise InputError(
            f"rank {config.rank} exceeds store hidden dim {train_header.hidden_dim}"
        )
    record = probe.train(train_trees, train_vectors, dev_trees, dev_vectors, config)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "probe.json").write_text(
        probe.save_probe(
            record.params,
            model_id=train_header.model_id,
            layer_index=train_header.layer_index,
        )
    )
    (out_dir / "train_log.csv").write_text(_train_log(record))
    return record


def cmd_train(args: argparse.Namespace) -> int:
    record = _run_training(
        args.train_conllu,
        args.dev_conllu,
        args.train_emb,
        args.dev_emb,
        _train_config(args),
        Path(args.out),
        strip_subtypes=not args.keep_subtypes,
    )
    best = record.epochs[record.best_epoch] if record.best_epoch >= 0 else None
    dev_las = f"{best.dev_las:.2f}" if best else "n/a"
    print(f"trained {len(record.epochs)} epochs; best epoch {record.best_epoch} "
          f"(dev LAS {dev_las}); wrote {args.out}/probe.json")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    probe_file = Path(args.probe)
    if not probe_file.exists():
        raise InputError(f"probe checkpoint not found: {probe_file}")
    try:
        params, model_id, layer_index = probe.load_probe(probe_file.read_text())
    except probe.CheckpointError as err:
        raise InputError(f"{probe_file}: {err}") from err
    trees, header, sentences = _load_aligned(args.conllu, args.emb, not args.keep_subtypes)
    if header.hidden_dim != params.hidden_dim:
        raise InputError(
            f"checkpoint hidden dim {params.hidden_dim} "
            f"vs store hidden dim {header.hidden_dim}"
        )
    unseen = sorted(
        {t.relation for tree in trees for t in tree.tokens} - set(params.vocabulary.labels)
    )
    if unseen:
        print(
            "warning: gold relations outside the probe vocabulary are always "
            f"scored incorrect: {', '.join(unseen)}",
            file=sys.stderr,
        )
    predictions = decoder.decode_corpus(params, sentences, trees)
    report = metrics.score_corpus(trees, predictions)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "metrics.csv").write_text(
        metrics.aggregate_csv(model_id, layer_index, args.split, report)
    )
    (out_dir / "relations.csv").write_text(metrics.relation_csv(report, args.top_k))
    (out_dir / "report.json").write_text(metrics.report_to_json(report) + "\n")
    if args.emit_predictions:
        (out_dir / "predictions.conllu").write_text(
            decoder.predictions_to_conllu(trees, predictions)
        )
    print(f"split {args.split}: LAS {report.las:.2f} UAS {report.uas:.2f} "
          f"UUAS {report.uuas:.2f} LABEL {report.label:.2f} ROOT {report.root:.2f}")
    return EXIT_OK


def _parse_layers(text: str) -> list[int]:
    try:
        layers = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as err:
        raise InputError(f"bad --layers value {text!r}: {err}") from err
    if not layers or any(layer < 0 for layer in layers):
        raise InputError(f"bad --layers value {text!r}: need non-negative integers")
    return list(dict.fromkeys(layers))


def _sweep_layer(job: dict) -> list[tuple[str, int, str, str, str]]:
    """Train one layer's probe and evaluate it on every test split."""
    layer = job["layer"]
    out_dir = Path(job["out"]) / f"L{layer}"
    record = _run_training(
        job["train_conllu"],
        job["dev_conllu"],
        job["emb_template"].format(split="train", model=job["model"], layer=layer),
        job["emb_template"].format(split="dev", model=job["model"], layer=layer),
        probe.TrainConfig(**job["config"]),
        out_dir,
        strip_subtypes=job["strip_subtypes"],
    )
    rows: list[tuple[str, int, str, str, str]] = []
    for split, conllu_path in job["tests"]:
        trees, header, sentences = _load_aligned(
            conllu_path,
            job["emb_template"].format(split=split, model=job["model"], layer=layer),
            job["strip_subtypes"],
        )
        predictions = decoder.decode_corpus(record.params, sentences, trees)
        report = metrics.score_corpus(trees, predictions)
        split_dir = out_dir / split
        split_dir.mkdir(parents=True, exist_ok=True)
        (split_dir / "relations.csv").write_text(metrics.relation_csv(report))
        (split_dir / "report.json").write_text(metrics.report_to_json(report) + "\n")
        rows.extend(metrics.long_rows(job["model"], layer, split, report))
    return rows


def cmd_sweep(args: argparse.Namespace) -> int:
    layers = _parse_layers(args.layers)
    tests = [("test", args.test_conllu)]
    for item in args.alt_test or []:
        name, _, path = item.partition("=")
        if not name or not path:
            raise InputError(f"bad --alt-test value {item!r}: expected NAME=PATH")
        tests.append((name, path))
    strip = not args.keep_subtypes

    # Every referenced store must exist and align before any training starts.
    split_paths = [("train", args.train_conllu), ("dev", args.dev_conllu)] + tests
    for layer in layers:
        for split, conllu_path in split_paths:
            store_path = args.emb_template.format(split=split, model=args.model, layer=layer)
            _load_aligned(conllu_path, store_path, strip)

    jobs = args.jobs if args.jobs is not None else int(os.environ.get("SYNPROBE_JOBS", "1"))
    if jobs < 1:
        raise InputError(f"--jobs must be >= 1, got {jobs}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = _train_config(args)
    job_specs = [
        {
            "layer": layer,
            "model": args.model,
            "train_conllu": args.train_conllu,
            "dev_conllu": args.dev_conllu,
            "tests": tests,
            "emb_template": args.emb_template,
            "config": dataclasses.asdict(config),
            "out": str(out_dir),
            "strip_subtypes": strip,
        }
        for layer in layers
    ]

    results: dict[int, list | Exception] = {}
    if jobs == 1 or len(layers) == 1:
        for spec in job_specs:
            try:
                results[spec["layer"]] = _sweep_layer(spec)
            except Exception as err:  # noqa: BLE001 - a layer failure must not stop the sweep
                results[spec["layer"]] = err
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(layers))) as pool:
            futures = {spec["layer"]: pool.submit(_sweep_layer, spec) for spec in job_specs}
            for layer, future in futures.items():
                try:
                    results[layer] = future.result()
                except Exception as err:  # noqa: BLE001
                    results[layer] = err

    failed = []
    rows: list[tuple[str, int, str, str, str]] = []
    for layer in layers:
        outcome = results[layer]
        if isinstance(outcome, Exception):
            failed.append(layer)
            (out_dir / f"L{layer}.failed").write_text(f"{outcome}\n")
            print(f"layer {layer} failed: {outcome}", file=sys.stderr)
        else:
            rows.extend(outcome)
    lines = ["model,layer,split,metric,value"]
    lines.extend(",".join(str(field) for field in row) for row in rows)
    (out_dir / "sweep.csv").write_text("\n".join(lines) + "\n")
    print(f"swept {len(layers)} layers ({len(failed)} failed); wrote {out_dir}/sweep.csv")
    return EXIT_PARTIAL if failed else EXIT_OK


def _add_train_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rank", type=int, default=128)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--step-size", type=float, default=1e-3)
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--max-epochs", type=int, default=30)
    parser.add_argument("--patience", type=int, default=5)
    parser.add_argument("--label-weight", type=float, default=1.0)
    parser.add_argument("--struct-weight", type=float, default=1.0)
    parser.add_argument("--keep-subtypes", action="store_true",
                        help="keep relation subtypes such as nmod:poss")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synprobe",
        description="Train and evaluate linear syntax probes over frozen encoder layers.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="train one probe")
    train.add_argument("--train-conllu", required=True)
    train.add_argument("--dev-conllu", required=True)
    train.add_argument("--train-emb", required=True)
    train.add_argument("--dev-emb", required=True)
    train.add_argument("--out", required=True)
    _add_train_options(train)
    train.set_defaults(func=cmd_train)

    evaluate = commands.add_parser("eval", help="evaluate a probe on one split")
    evaluate.add_argument("--probe", required=True)
    evaluate.add_argument("--conllu", required=True)
    evaluate.add_argument("--emb", required=True)
    evaluate.add_argument("--out", required=True)
    evaluate.add_argument("--split", default="test")
    evaluate.add_argument("--top-k", type=int, default=None,
                          help="limit relations.csv to the k most frequent relations")
    evaluate.add_argument("--emit-predictions", action="store_true")
    evaluate.add_argument("--keep-subtypes", action="store_true")
    evaluate.set_defaults(func=cmd_eval)

    sweep = commands.add_parser("sweep", help="train and evaluate one probe per layer")
    sweep.add_argument("--model", required=True)
    sweep.add_argument("--layers", required=True, help="comma-separated layer indices")
    sweep.add_argument("--train-conllu", required=True)
    sweep.add_argument("--dev-conllu", required=True)
    sweep.add_argument("--test-conllu", required=True)
    sweep.add_argument("--alt-test", action="append", metavar="NAME=PATH",
                       help="additional test treebank (repeatable)")
    sweep.add_argument("--emb-template", required=True,
                       help="store path template with {split}, {model}, {layer}")
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--jobs", type=int, default=None,
                       help="parallel layer trainings (default: SYNPROBE_JOBS or 1)")
    _add_train_options(sweep)
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
