"""Command-line entry point: synth, build-graph, train, eval, sweep, report.

Every command reads an optional ``--config`` JSON file whose keys match
TrainConfig; explicit flags override file values, and the effective
config is echoed into every output (as a ``config_echo`` field or a
sibling ``.config.json`` file). No output contains timestamps, so
identical inputs produce byte-identical files.

Exit codes: 0 ok, 2 input/parse error, 3 shape/compatibility error,
4 numerical failure.
"""

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .backbone import FeatureProvider, SyntheticSpec, generate_synthetic_dataset
from .data import (LabelVocabulary, UncertainPolicy, load_features,
                   parse_columnar_labels, parse_pipe_labels, split_dataset,
                   write_features, write_pipe_labels)
from .embeddings import embed_labels, load_word_vectors, synthetic_embeddings
from .errors import InputError, NumericalError, ShapeError, ToolkitError
from .gcn import dims_for_depth
from .graph import build_correlation_graph, count_cooccurrence, export_graph_json
from .jsonio import dump_json, format_float
from .metrics import build_report, top_k_table
from .training import (DataBundle, TrainConfig, load_checkpoint,
                       network_from_checkpoint, save_checkpoint, train)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: bad JSON input: {exc}", file=sys.stderr)
        return 2
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labelbridge",
        description="Multi-label classification with label co-occurrence graphs, "
                    "GCN label embeddings, and GroupSum bilinear fusion.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a planted-structure synthetic dataset")
    _add_config_flags(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--num-labels", type=int, help="number of labels (default: 8)")
    p.add_argument("--feature-dim", type=int, help="feature dimension (default: d1)")
    p.add_argument("--n-samples", type=int, help="samples to generate (default: 1000)")
    p.add_argument("--edges", help="dependency edges i:j:strength, comma separated")
    p.add_argument("--base-rates", help="comma-separated per-label base rates")
    p.add_argument("--noise-sigma", type=float, help="feature noise scale (default: 0)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("build-graph", help="compute co-occurrence statistics and "
                                           "the correlation graph from a label file")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="output graph JSON path")
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("train", help="train a model end to end")
    _add_config_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on the test split")
    _add_eval_flags(sub_parser=p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="eval plus co-occurrence matrix and top-k tables")
    _add_eval_flags(sub_parser=p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sweep", help="train once per hyperparameter value and "
                                     "tabulate test mean AUC")
    _add_config_flags(p)
    p.add_argument("--axis", required=True,
                   choices=["epsilon", "delta", "groupsum", "gcn_depth"])
    p.add_argument("--values", required=True,
                   help="comma-separated values; groupsum uses GxN pairs like 64x6")
    p.add_argument("--out", required=True, help="output sweep CSV path")
    p.set_defaults(func=cmd_sweep)
    return parser


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--epsilon", type=float, help="binarization threshold (default: 0.3)")
    p.add_argument("--delta", type=float, help="neighbor mass in reweighting (default: 0.2)")
    p.add_argument("--num-groups", type=int, dest="G", help="GroupSum groups G (default: 64)")
    p.add_argument("--group-size", type=int, dest="g",
                   help="elements per group g (default: 6)")
    p.add_argument("--d3", type=int, help="shared projection dim (default: 384)")
    p.add_argument("--gcn-dims", help="comma dims chain (default: 300,1024,768)")
    p.add_argument("--d1", type=int, help="image feature dim (default: 768)")
    p.add_argument("--epochs", type=int, help="training epochs (default: 30)")
    p.add_argument("--batch-size", type=int, help="minibatch size (default: 32)")
    p.add_argument("--seed", type=int, help="run seed (default: 0)")
    p.add_argument("--lr-lce", type=float, help="GCN learning rate (default: 0.01)")
    p.add_argument("--lr-main", type=float,
                   help="fusion/backbone learning rate (default: 0.001)")
    p.add_argument("--momentum", type=float, help="SGD momentum (default: 0.9)")
    p.add_argument("--weight-decay", type=float, help="weight decay (default: 5e-5)")
    p.add_argument("--decay-every", type=int, help="epochs between LR decays (default: 10)")
    p.add_argument("--decay-factor", type=float, help="LR decay factor (default: 0.1)")
    p.add_argument("--uncertain-policy", choices=["as_positive", "as_negative"],
                   help="mapping for -1 cells (default: as_positive)")
    p.add_argument("--provider", choices=["precomputed", "synthetic", "toy_mlp"],
                   help="feature provider (default: precomputed)")
    p.add_argument("--dataset-format", choices=["pipe", "columnar"],
                   help="label file format (default: pipe)")
    p.add_argument("--pipe-header", action=argparse.BooleanOptionalAction, default=None,
                   help="pipe label file has a header row (default: no)")
    p.add_argument("--no-finding-token", help="all-zero sentinel (default: 'No Finding')")
    p.add_argument("--ratios", help="train,val,test ratios (default: 0.7,0.1,0.2)")
    p.add_argument("--reweight-axis", choices=["row", "col"],
                   help="reweighting denominator axis (default: row)")
    p.add_argument("--graph-include-val", action=argparse.BooleanOptionalAction,
                   default=None, help="include validation split in graph statistics "
                                      "(default: no)")
    p.add_argument("--gcn-final-linear", action=argparse.BooleanOptionalAction,
                   default=None, help="disable the last GCN activation (default: no)")
    p.add_argument("--fine-tune-embeddings", action=argparse.BooleanOptionalAction,
                   default=None, help="train the word-embedding matrix (default: no)")
    p.add_argument("--leaky-alpha", type=float, help="LeakyReLU slope (default: 0.2)")
    p.add_argument("--toy-hidden", type=int, help="toy MLP hidden width (default: 64)")
    p.add_argument("--labels", help="comma-separated label vocabulary")
    p.add_argument("--vocab-file", help="file with one label name per line")
    p.add_argument("--labels-path", help="label CSV path")
    p.add_argument("--features-path", help="feature file path")
    p.add_argument("--embeddings-path", "--embeddings", dest="embeddings_path",
                   help="word-vector file; omit for synthetic embeddings")
    p.add_argument("--synthetic-embeddings", action="store_true", default=False,
                   help="force synthetic label embeddings even if the config "
                        "names a word-vector file")
    p.add_argument("--oov-fallback", action=argparse.BooleanOptionalAction, default=None,
                   help="synthesize vectors for out-of-vocabulary words (default: no)")


def _add_eval_flags(sub_parser: argparse.ArgumentParser) -> None:
    sub_parser.add_argument("--checkpoint", required=True)
    sub_parser.add_argument("--out-dir", required=True)
    sub_parser.add_argument("--labels-path", help="override the checkpoint's label file")
    sub_parser.add_argument("--features-path", help="override the checkpoint's features")
    sub_parser.add_argument("--labels", help="expected vocabulary; must match checkpoint")
    sub_parser.add_argument("--top-k", type=int, default=None,
                            help="emit a top-k prediction table (default: report only)")


_SIMPLE_KEYS = ["epsilon", "delta", "G", "g", "d3", "d1", "epochs", "batch_size",
                "seed", "lr_lce", "lr_main", "momentum", "weight_decay", "decay_every",
                "decay_factor", "uncertain_policy", "provider", "dataset_format",
                "pipe_has_header", "no_finding_token", "reweight_axis",
                "graph_include_val", "gcn_final_linear", "fine_tune_embeddings",
                "leaky_alpha", "toy_hidden", "labels_path", "features_path",
                "embeddings_path"]

_FLAG_OF = {"G": "G", "g": "g", "pipe_has_header": "pipe_header"}


def build_config(args) -> TrainConfig:
    """Effective config = defaults <- config file <- explicit flags."""
    raw: dict = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise InputError("config file must contain a JSON object")
    for key in _SIMPLE_KEYS:
        flag = _FLAG_OF.get(key, key)
        value = getattr(args, flag, None)
        if value is not None:
            raw[key] = value
    if getattr(args, "gcn_dims", None) is not None:
        raw["gcn_dims"] = _parse_int_list(args.gcn_dims, "gcn-dims")
    if getattr(args, "ratios", None) is not None:
        raw["ratios"] = _parse_float_list(args.ratios, "ratios")
    if getattr(args, "synthetic_embeddings", False):
        raw["embeddings_path"] = None
    labels = _vocab_from_args(args)
    if labels is not None:
        raw["labels"] = labels
    return TrainConfig.from_dict(raw)


def _vocab_from_args(args):
    if getattr(args, "labels", None):
        return [t.strip() for t in args.labels.split(",") if t.strip()]
    if getattr(args, "vocab_file", None):
        with open(args.vocab_file, "r", encoding="utf-8") as fh:
            return [line.strip() for line in fh if line.strip()]
    return None


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"bad --{what} value {text!r}") from None


def _parse_float_list(text: str, what: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"bad --{what} value {text!r}") from None


def _synth_spec(config: TrainConfig) -> SyntheticSpec:
    raw = dict(config.synth or {})
    edges = [tuple(e) for e in raw.get("edges", [])]
    spec = SyntheticSpec(
        num_labels=int(raw.get("num_labels", len(config.labels or []) or 8)),
        feature_dim=int(raw.get("feature_dim", config.d1)),
        n_samples=int(raw.get("n_samples", 1000)),
        dependency_edges=[(int(i), int(j), float(s)) for i, j, s in edges],
        base_rates=raw.get("base_rates"),
        noise_sigma=float(raw.get("noise_sigma", 0.0)),
        seed=int(raw.get("seed", config.seed)))
    spec.validate()
    return spec


def _synth_vocab(config: TrainConfig, num_labels: int) -> LabelVocabulary:
    if config.labels:
        if len(config.labels) != num_labels:
            raise InputError(f"{len(config.labels)} label names given for "
                             f"{num_labels} synthetic labels")
        return LabelVocabulary(config.labels)
    return LabelVocabulary([f"L{j:02d}" for j in range(num_labels)])


def assemble_dataset(config: TrainConfig):
    """Returns (vocab, samples, provider) per the config's provider kind."""
    use_synth = config.provider == "synthetic" or (
        config.provider == "toy_mlp" and config.features_path is None
        and config.synth is not None)
    if use_synth:
        spec = _synth_spec(config)
        vocab = _synth_vocab(config, spec.num_labels)
        samples, records = generate_synthetic_dataset(spec)
        return vocab, samples, FeatureProvider(records, kind="synthetic")
    if config.labels is None:
        raise InputError("a label vocabulary is required (labels / --labels / "
                         "--vocab-file)")
    vocab = LabelVocabulary(config.labels)
    if config.labels_path is None:
        raise InputError("labels_path is required for file-based providers")
    samples = _parse_label_file(config, vocab)
    if config.features_path is None:
        raise InputError("features_path is required for file-based providers")
    with open(config.features_path, "r", encoding="utf-8") as fh:
        records = load_features(fh)
    return vocab, samples, FeatureProvider(records, kind="precomputed")


def _parse_label_file(config: TrainConfig, vocab: LabelVocabulary):
    with open(config.labels_path, "r", encoding="utf-8", newline="") as fh:
        if config.dataset_format == "pipe":
            return parse_pipe_labels(fh, vocab, has_header=config.pipe_has_header,
                                     no_finding_token=config.no_finding_token)
        return parse_columnar_labels(fh, vocab,
                                     UncertainPolicy.from_string(config.uncertain_policy))


def _label_embeddings(config: TrainConfig, vocab: LabelVocabulary, args=None):
    dim = int(config.gcn_dims[0])
    if config.embeddings_path:
        with open(config.embeddings_path, "r", encoding="utf-8") as fh:
            table = load_word_vectors(fh)
        if table.dim != dim:
            raise ShapeError(f"word vectors have dim {table.dim} but gcn_dims "
                             f"start at {dim}")
        fallback = config.seed if getattr(args, "oov_fallback", None) else None
        return embed_labels(vocab, table, oov_fallback_seed=fallback)
    return synthetic_embeddings(vocab, dim, config.seed)


def _prepare_training(config: TrainConfig, args=None):
    vocab, samples, provider = assemble_dataset(config)
    train_s, val_s, test_s = split_dataset(samples, config.ratios, config.seed)
    graph_samples = train_s + val_s if config.graph_include_val else train_s
    stats = count_cooccurrence(graph_samples, vocab.size)
    graph = build_correlation_graph(stats, config.epsilon, config.delta,
                                    reweight_axis=config.reweight_axis)
    embeddings = _label_embeddings(config, vocab, args)
    bundle = DataBundle(vocab=vocab, train_samples=train_s, val_samples=val_s,
                        provider=provider)
    return bundle, test_s, stats, graph, embeddings


def cmd_synth(args) -> int:
    config = build_config(args)
    raw = dict(config.synth or {})
    for flag, key in [("num_labels", "num_labels"), ("feature_dim", "feature_dim"),
                      ("n_samples", "n_samples"), ("noise_sigma", "noise_sigma")]:
        value = getattr(args, flag, None)
        if value is not None:
            raw[key] = value
    if args.edges is not None:
        raw["edges"] = _parse_edges(args.edges)
    if args.base_rates is not None:
        raw["base_rates"] = _parse_float_list(args.base_rates, "base-rates")
    config = replace(config, synth=raw)
    spec = _synth_spec(config)
    vocab = _synth_vocab(config, spec.num_labels)
    samples, records = generate_synthetic_dataset(spec)

    os.makedirs(args.out_dir, exist_ok=True)
    labels_path = os.path.join(args.out_dir, "labels.csv")
    with open(labels_path, "w", encoding="utf-8", newline="") as fh:
        write_pipe_labels(samples, vocab, fh,
                          no_finding_token=config.no_finding_token)
    features_path = os.path.join(args.out_dir, "features.txt")
    with open(features_path, "w", encoding="utf-8") as fh:
        write_features(records, fh)
    echo = {
        "labels": vocab.labels,
        "num_labels": spec.num_labels,
        "feature_dim": spec.feature_dim,
        "n_samples": spec.n_samples,
        "edges": [[i, j, s] for i, j, s in spec.dependency_edges],
        "base_rates": spec.rates(),
        "noise_sigma": spec.noise_sigma,
        "seed": spec.seed,
        "config_echo": config.to_dict(),
    }
    dump_json(echo, os.path.join(args.out_dir, "synth_spec.json"))
    print(f"wrote {labels_path}, {features_path}")
    return 0


def _parse_edges(text: str) -> list[list]:
    edges = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        pieces = part.split(":")
        if len(pieces) != 3:
            raise InputError(f"bad edge {part!r}; expected i:j:strength")
        edges.append([int(pieces[0]), int(pieces[1]), float(pieces[2])])
    return edges


def cmd_build_graph(args) -> int:
    config = build_config(args)
    if config.labels is None:
        raise InputError("build-graph needs a vocabulary (--labels or --vocab-file)")
    vocab = LabelVocabulary(config.labels)
    if config.labels_path is None:
        raise InputError("build-graph needs --labels-path")
    samples = _parse_label_file(config, vocab)
    stats = count_cooccurrence(samples, vocab.size)
    graph = build_correlation_graph(stats, config.epsilon, config.delta,
                                    reweight_axis=config.reweight_axis)
    export_graph_json(args.out, vocab.labels, stats, graph, config.to_dict())
    print(f"wrote {args.out}")
    return 0


def cmd_train(args) -> int:
    config = build_config(args)
    bundle, _, _, graph, embeddings = _prepare_training(config, args)
    result = train(config, bundle, graph, embeddings)
    os.makedirs(args.out_dir, exist_ok=True)
    ckpt_path = os.path.join(args.out_dir, "checkpoint.bin")
    save_checkpoint(ckpt_path, result)
    _write_history_csv(os.path.join(args.out_dir, "metrics.csv"), result.history)
    dump_json(config.to_dict(), os.path.join(args.out_dir, "config.json"))
    best = "" if result.best_val_auc is None else format_float(result.best_val_auc)
    print(f"wrote {ckpt_path} (best epoch {result.best_epoch}, val mean AUC {best})")
    return 0


def _write_history_csv(path, history) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,train_loss,val_mean_auc\n")
        for row in history:
            auc = "" if row["val_mean_auc"] is None else format_float(row["val_mean_auc"])
            fh.write(f"{row['epoch']},{format_float(row['train_loss'])},{auc}\n")


def _load_eval_context(args):
    ckpt = load_checkpoint(args.checkpoint)
    config = ckpt.config
    if args.labels_path:
        config = replace(config, labels_path=args.labels_path)
    if args.features_path:
        config = replace(config, features_path=args.features_path)
    if args.labels:
        wanted = [t.strip() for t in args.labels.split(",") if t.strip()]
        if wanted != ckpt.labels:
            raise ShapeError(f"requested vocabulary {wanted} does not match "
                             f"checkpoint labels {ckpt.labels}")
    config = replace(config, labels=ckpt.labels)
    network = network_from_checkpoint(ckpt)
    vocab, samples, provider = assemble_dataset(config)
    if vocab.labels != ckpt.labels:
        raise ShapeError("dataset vocabulary does not match checkpoint labels")
    if provider.dim != network.feature_dim:
        raise ShapeError(f"feature dim {provider.dim} does not match the "
                         f"checkpoint's input dim {network.feature_dim}")
    _, _, test_s = split_dataset(samples, config.ratios, config.seed)
    x_test = provider.features_for([s.sample_id for s in test_s])
    logits = network.predict_logits(x_test)
    truths = np.stack([s.labels for s in test_s])
    return ckpt, config, vocab, test_s, logits, truths


def _write_eval_files(out_dir, config, vocab, test_s, logits, truths, top_k):
    report = build_report(logits, truths, vocab.labels)
    os.makedirs(out_dir, exist_ok=True)
    doc = {
        "per_label_auc": {label: auc for label, auc in
                          zip(vocab.labels, report.per_label_auc)},
        "mean_auc": report.mean_auc,
        "op": report.op,
        "or": report.or_,
        "of1": report.of1,
        "confusion_totals": report.confusion_totals,
        "undefined_labels": report.undefined_labels,
        "prf_flags": report.prf_flags,
        "n_test_samples": len(test_s),
        "config_echo": config.to_dict(),
    }
    metrics_path = os.path.join(out_dir, "metrics.json")
    dump_json(doc, metrics_path)
    roc_path = os.path.join(out_dir, "roc.csv")
    with open(roc_path, "w", encoding="utf-8") as fh:
        fh.write("label,threshold,fpr,tpr\n")
        for label in vocab.labels:
            for thr, fpr, tpr in report.roc.get(label, []):
                thr_s = "inf" if np.isinf(thr) else format_float(thr)
                fh.write(f"{label},{thr_s},{format_float(fpr)},{format_float(tpr)}\n")
    written = [metrics_path, roc_path]
    if top_k is not None:
        tables = top_k_table(logits, vocab.labels, top_k)
        topk_path = os.path.join(out_dir, "topk.csv")
        with open(topk_path, "w", encoding="utf-8") as fh:
            fh.write("sample_id,rank,label,score\n")
            for sample, table in zip(test_s, tables):
                for rank, (label, score) in enumerate(table, start=1):
                    fh.write(f"{sample.sample_id},{rank},{label},"
                             f"{format_float(score)}\n")
        written.append(topk_path)
    return report, written


def cmd_eval(args) -> int:
    _, config, vocab, test_s, logits, truths = _load_eval_context(args)
    report, written = _write_eval_files(args.out_dir, config, vocab, test_s,
                                        logits, truths, args.top_k)
    mean = "" if report.mean_auc is None else format_float(report.mean_auc)
    print(f"mean AUC {mean}; wrote {', '.join(written)}")
    return 0


def cmd_report(args) -> int:
    ckpt, config, vocab, test_s, logits, truths = _load_eval_context(args)
    top_k = args.top_k if args.top_k is not None else min(8, vocab.size)
    report, written = _write_eval_files(args.out_dir, config, vocab, test_s,
                                        logits, truths, top_k)
    cooc_path = os.path.join(args.out_dir, "cooccurrence.csv")
    p = ckpt.tensors["graph.P"]
    with open(cooc_path, "w", encoding="utf-8") as fh:
        fh.write("label," + ",".join(vocab.labels) + "\n")
        for j, label in enumerate(vocab.labels):
            fh.write(label + "," + ",".join(format_float(v) for v in p[j]) + "\n")
    written.append(cooc_path)
    mean = "" if report.mean_auc is None else format_float(report.mean_auc)
    print(f"mean AUC {mean}; wrote {', '.join(written)}")
    return 0


def cmd_sweep(args) -> int:
    config = build_config(args)
    points = _parse_sweep_values(args.axis, args.values, config)
    rows = []
    for label, point_config in points:
        if args.axis == "epsilon" and float(label) == 0.0:
            # threshold 0 keeps every noisy edge; known non-convergent
            # configuration, flagged rather than trained
            rows.append((label, None, "non_convergent"))
            continue
        try:
            bundle, test_s, _, graph, embeddings = _prepare_training(point_config, args)
            result = train(point_config, bundle, graph, embeddings)
            x_test = bundle.provider.features_for([s.sample_id for s in test_s])
            logits = result.network.predict_logits(x_test)
            truths = np.stack([s.labels for s in test_s])
            report = build_report(logits, truths, bundle.vocab.labels)
            rows.append((label, report.mean_auc, "ok"))
        except NumericalError:
            rows.append((label, None, "diverged"))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("value,mean_auc,status\n")
        for label, auc, status in rows:
            auc_s = "" if auc is None else format_float(auc)
            fh.write(f"{label},{auc_s},{status}\n")
    dump_json(config.to_dict(), args.out + ".config.json")
    print(f"wrote {args.out}")
    return 0


def _parse_sweep_values(axis: str, text: str, config: TrainConfig):
    """Validate sweep values up front; returns (label, per-point config) pairs."""
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    if not tokens:
        raise InputError("sweep needs at least one value")
    seen = set()
    points = []
    for token in tokens:
        if token in seen:
            print(f"warning: duplicate sweep value {token!r} skipped", file=sys.stderr)
            continue
        seen.add(token)
        if axis == "epsilon":
            value = _parse_ranged_float(token, 0.0, 1.0, "epsilon", inclusive_hi=True)
            points.append((token, replace(config, epsilon=value)))
        elif axis == "delta":
            value = _parse_ranged_float(token, 0.0, 1.0, "delta", inclusive_hi=False)
            points.append((token, replace(config, delta=value)))
        elif axis == "groupsum":
            pieces = token.split("x")
            if len(pieces) != 2:
                raise InputError(f"bad groupsum value {token!r}; expected GxN like 64x6")
            try:
                groups, size = int(pieces[0]), int(pieces[1])
            except ValueError:
                raise InputError(f"bad groupsum value {token!r}") from None
            if groups < 1 or size < 1:
                raise InputError(f"groupsum values must be positive, got {token!r}")
            points.append((token, replace(config, groups=groups, group_size=size)))
        else:  # gcn_depth
            try:
                depth = int(token)
            except ValueError:
                raise InputError(f"bad gcn depth {token!r}") from None
            if depth not in (2, 3, 4):
                raise InputError(f"gcn depth must be 2, 3, or 4, got {depth}")
            dims = dims_for_depth([int(d) for d in config.gcn_dims], depth)
            points.append((token, replace(config, gcn_dims=dims)))
    if axis == "groupsum":
        widths = {int(t.split("x")[0]) * int(t.split("x")[1]) for t, _ in points}
        if len(widths) > 1:
            raise InputError(f"groupsum sweep values must share one G*g product, "
                             f"got {sorted(widths)}")
    return points


def _parse_ranged_float(token: str, lo: float, hi: float, what: str,
                        inclusive_hi: bool) -> float:
    try:
        value = float(token)
    except ValueError:
        raise InputError(f"bad {what} value {token!r}") from None
    ok = lo <= value <= hi if inclusive_hi else lo <= value < hi
    if not ok:
        bracket = "]" if inclusive_hi else ")"
        raise InputError(f"{what} value {value} outside [{lo}, {hi}{bracket}")
    return value


if __name__ == "__main__":
    sys.exit(main())
