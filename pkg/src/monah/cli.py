"""Command-line entry point orchestrating the pipeline over its file formats.

Exit codes: 0 on success, 1 on validation failure, 2 on usage errors.
All randomness sits behind ``--seed``; the env var MONAH_THREADS caps
per-session parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import evaluation, ingest, synth, tree as tree_mod, viz
from .features import compute_vector
from .model import binarize_label
from .narrative import (
    ConfigError,
    config_slug,
    fit_fine_stats,
    fit_stats,
    format_config,
    parse_config,
    weave,
)
from .registry import registry
from .sentiment import load_lexicon


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def cmd_synth(args) -> int:
    config = synth.SynthConfig(
        n_sessions=args.n,
        positive_rate=args.positive_rate,
        mean_turns=args.mean_turns,
        sd_turns=args.sd_turns,
        mean_words_per_turn=args.mean_words,
        sd_words_per_turn=args.sd_words,
        signal=synth.SignalStrengths.uniform(args.signal),
        seed=args.seed,
    )
    manifest = synth.synth_corpus(config, args.out)
    print(manifest)
    return 0


def _corpus_path(args) -> Path:
    if args.corpus is not None:
        return Path(args.corpus)
    line = sys.stdin.readline().strip()
    if not line:
        raise ConfigError("no --corpus given and nothing on stdin")
    path = Path(line)
    return path.parent if path.name == "manifest.json" else path


def cmd_ingest_check(args) -> int:
    corpus = _corpus_path(args)
    manifest = ingest.load_manifest(corpus)
    n_bad = 0
    for entry in manifest:
        try:
            ingest.load_session(entry)
        except ingest.ValidationError as exc:
            n_bad += 1
            for violation in exc.violations:
                print(f"{entry.session_id}: {violation}")
        except (ingest.ParseError, ingest.SchemaError) as exc:
            n_bad += 1
            print(f"{entry.session_id}: {exc}")
    print(f"{len(manifest)} sessions checked, {n_bad} with violations")
    return 1 if n_bad else 0


def cmd_features(args) -> int:
    lexicon = load_lexicon(args.lexicon)
    sessions = ingest.load_corpus(args.corpus)
    all_meta = [s.meta for s in sessions]
    reg = registry()
    vectors = [compute_vector(s, lexicon, all_meta, reg) for s in sessions]
    ingest.write_features_csv(vectors, reg.names, args.out)
    labels = {s.meta.session_id: binarize_label(s.meta.rapport_score) for s in sessions}
    if args.labels:
        ingest.write_labels_csv(labels, args.labels)
    print(f"wrote {len(vectors)} feature rows to {args.out}")
    return 0


def cmd_fit_stats(args) -> int:
    vectors = ingest.read_features_csv(args.features)
    if args.sessions:
        keep = set(args.sessions.split(","))
        vectors = [v for v in vectors if v.session_id in keep]
    stats = fit_stats(vectors)
    if args.corpus:
        sessions = ingest.load_corpus(args.corpus)
        if args.sessions:
            keep = set(args.sessions.split(","))
            sessions = [s for s in sessions if s.meta.session_id in keep]
        stats.update(fit_fine_stats(sessions))
    ingest.write_stats(stats, args.out)
    print(f"wrote stats for {len(stats)} features to {args.out}")
    return 0


def cmd_weave(args) -> int:
    try:
        config = parse_config(args.config)
    except ConfigError as exc:
        return _fail(str(exc))
    if args.coarse_only:
        config = replace(
            config, verbatim=False, fine_prosody="off", fine_actions="off"
        )
    lexicon = load_lexicon(args.lexicon)
    stats = ingest.read_stats(args.stats)
    sessions = ingest.load_corpus(args.corpus)
    all_meta = [s.meta for s in sessions]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n_warnings = 0
    for session in sessions:
        vector = compute_vector(session, lexicon, all_meta)
        narrative, warnings = weave(session, vector, stats, config)
        n_warnings += len(warnings)
        for w in warnings:
            print(f"{session.meta.session_id}: warning: {w}", file=sys.stderr)
        sid = session.meta.session_id
        ingest.write_narrative(narrative, out / f"{sid}.json")
        ingest.write_narrative_txt(narrative, out / f"{sid}.txt")
    print(f"wove {len(sessions)} narratives ({format_config(config)}) into {out}")
    return 0


def cmd_train_tree(args) -> int:
    try:
        config = parse_config(args.config)
    except ConfigError as exc:
        return _fail(str(exc))
    vectors = {v.session_id: v for v in ingest.read_features_csv(args.features)}
    labels = ingest.read_labels_csv(args.labels)
    names = registry().select(config.coarse_modes)
    import numpy as np

    if args.folds:
        folds = evaluation.read_folds(args.folds)
    else:
        folds = evaluation.stratified_folds(labels, k=5, seed=args.seed)
    stats_per_fold = []
    for k in range(folds.k):
        train_vecs = [vectors[s] for s in folds.train_ids(k)]
        stats_per_fold.append(fit_stats(train_vecs))
    best_params, log = tree_mod.random_search(
        lambda params: evaluation.tree_cv_aucs(
            vectors, labels, folds, stats_per_fold, names, params
        ),
        trials=args.trials,
        seed=args.seed,
    )
    stats_all = fit_stats(list(vectors.values()))
    sids = sorted(vectors)
    X = np.array(
        [evaluation.z_transform_row(vectors[s], stats_all, names) for s in sids]
    )
    y = [labels[s] for s in sids]
    model = tree_mod.fit(X, y, best_params, feature_names=names)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tree_mod.save_model(model, out)
    if args.trials_log:
        evaluation._write_trials_csv(log, Path(args.trials_log))
    best = max(log, key=lambda t: t.mean_auc)
    print(f"best mean cv auc {best.mean_auc:.4f} with {best_params}; model at {out}")
    return 0


def cmd_evaluate(args) -> int:
    rows = [r.strip() for r in args.configs.split(",") if r.strip()]
    for row in rows:
        try:
            parse_config(row)
        except ConfigError as exc:
            return _fail(f"bad config {row!r}: {exc}")
    lexicon = load_lexicon(args.lexicon)
    report = evaluation.run_experiment(
        corpus_path=args.corpus,
        rows=rows,
        trials=args.trials,
        seed=args.seed,
        k=args.folds,
        fine=args.fine,
        out_dir=args.out,
        lexicon=lexicon,
    )
    for row in report["rows"]:
        print(f"{row['config']}: tree {row['tree']['mean']:.4f} ({row['tree']['sd']:.4f})")
    print(f"report written to {args.out}")
    return 0


def cmd_render(args) -> int:
    narrative = ingest.read_narrative(args.narrative)
    attention = viz.read_attentions(args.attentions) if args.attentions else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        html = viz.render_conversation(narrative, attention)
    except viz.AlignmentError as exc:
        return _fail(str(exc))
    (out / f"{narrative.session_id}.html").write_text(html, encoding="utf-8")
    if attention is not None and attention.turn_weights:
        svg = viz.render_thumbnail(attention)
        (out / f"{narrative.session_id}.svg").write_text(svg, encoding="utf-8")
    print(f"rendered {narrative.session_id} into {out}")
    return 0


def cmd_report(args) -> int:
    eval_dir = Path(args.eval_dir)
    report = json.loads((eval_dir / "report.json").read_text("utf-8"))
    rows = [r["config"] for r in report["rows"]]
    tree_results = {
        r["config"]: {"fold_aucs": r["tree"]["fold_aucs"], "params": r["tree"].get("params")}
        for r in report["rows"]
    }
    model_results = {}
    if args.han_dir:
        han_dir = Path(args.han_dir)
        fine = report.get("fine", "")
        for row in rows:
            for config_str in ([row, f"{row}-{fine}"] if fine else [row]):
                aucs_path = han_dir / config_slug(config_str) / "aucs.csv"
                if aucs_path.exists():
                    model_results[config_str] = {
                        "fold_aucs": _read_aucs_csv(aucs_path)
                    }
    merged = evaluation.build_report(
        rows=rows,
        baseline=report["baseline"],
        tree_results=tree_results,
        model_results=model_results or None,
        fine=report.get("fine", ""),
        meta=report.get("meta"),
    )
    out = Path(args.out) if args.out else eval_dir
    evaluation.write_report(merged, out)
    print((out / "report.md").read_text("utf-8"))
    return 0


def _read_aucs_csv(path: Path) -> list[float]:
    import csv

    out = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        auc_col = header.index("auc")
        fold_col = header.index("fold")
        rows = [(int(r[fold_col]), float(r[auc_col])) for r in reader if r]
    return [a for _, a in sorted(rows)]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monah", description="multimodal narrative pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--positive-rate", type=float, default=0.38)
    p.add_argument("--mean-turns", type=float, default=296.0)
    p.add_argument("--sd-turns", type=float, default=126.0)
    p.add_argument("--mean-words", type=float, default=7.62)
    p.add_argument("--sd-words", type=float, default=12.2)
    p.add_argument("--signal", type=float, default=1.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest-check", help="validate every session in a corpus")
    p.add_argument("--corpus", default=None, help="corpus dir (or manifest path on stdin)")
    p.set_defaults(func=cmd_ingest_check)

    p = sub.add_parser("features", help="compute the coarse feature table")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--labels", default=None)
    p.add_argument("--lexicon", default=None)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("fit-stats", help="fit training statistics from features")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sessions", default=None, help="comma-separated training ids")
    p.add_argument("--corpus", default=None, help="also fit turn-level fine stats")
    p.set_defaults(func=cmd_fit_stats)

    p = sub.add_parser("weave", help="weave narratives for a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--stats", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lexicon", default=None)
    p.add_argument("--coarse-only", action="store_true")
    p.set_defaults(func=cmd_weave)

    p = sub.add_parser("train-tree", help="random-search and fit the tree")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--folds", default=None)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials-log", default=None)
    p.set_defaults(func=cmd_train_tree)

    p = sub.add_parser("evaluate", help="run the full experiment protocol")
    p.add_argument("--corpus", required=True)
    p.add_argument("--configs", default=",".join(evaluation.DEFAULT_ROWS))
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--fine", default="", help="fine families to weave, e.g. vpa")
    p.add_argument("--out", required=True)
    p.add_argument("--lexicon", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("render", help="render attention views for one narrative")
    p.add_argument("--narrative", required=True)
    p.add_argument("--attentions", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("report", help="(re)build the summary report")
    p.add_argument("--eval-dir", required=True)
    p.add_argument("--han-dir", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        ingest.ParseError,
        ingest.SchemaError,
        ingest.ValidationError,
        ConfigError,
        evaluation.DegenerateLabels,
        evaluation.InsufficientClassCount,
        FileNotFoundError,
    ) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
