"""Command-line entry point for the narrative classifier."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import HanConfig
from .data import read_narrative_file, vocabulary_of
from .export import export_attentions
from .search import random_search, write_curve_csv, write_trials_csv
from .train import load_checkpoint, mean_sd, run_cv
from .vocab import build_embedding_file, load_embeddings


def _config_from_args(args) -> HanConfig:
    if args.config_json:
        return HanConfig(**json.loads(Path(args.config_json).read_text("utf-8")))
    return HanConfig(
        batch_size=args.batch_size,
        gru_units=args.gru_units,
        learning_rate=args.learning_rate,
        gru_dropout=args.gru_dropout,
        recurrent_dropout=args.recurrent_dropout,
        l2=args.l2,
        max_epochs=args.epochs,
        seed=args.seed,
    )


def cmd_build_embeddings(args) -> int:
    vocab = vocabulary_of(args.narratives_root)
    path = build_embedding_file(vocab, args.out, seed=args.seed)
    print(f"wrote {len(vocab) + 1} vectors to {path}")
    return 0


def cmd_train(args) -> int:
    vocab = load_embeddings(args.embeddings)
    config = _config_from_args(args)
    results = run_cv(
        narratives_root=args.narratives_root,
        folds_path=args.folds,
        labels_path=args.labels,
        vocab=vocab,
        config=config,
        out_dir=args.out,
        save_models=True,
    )
    mean, sd = mean_sd([r.auc for r in results])
    for r in results:
        print(f"fold {r.fold}: auc {r.auc:.4f} (best epoch {r.best_epoch})")
    print(f"mean cv auc {mean:.4f} ({sd:.4f})")
    return 0


def cmd_search(args) -> int:
    vocab = load_embeddings(args.embeddings)

    def evaluate(config: HanConfig):
        results = run_cv(
            narratives_root=args.narratives_root,
            folds_path=args.folds,
            labels_path=args.labels,
            vocab=vocab,
            config=config,
        )
        return [r.auc for r in results]

    best, log = random_search(
        evaluate, trials=args.trials, seed=args.seed, max_epochs=args.epochs
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trials_csv(log, out / "trials.csv")
    write_curve_csv(log, out / "curves.csv")
    (out / "best_config.json").write_text(
        json.dumps(best.as_dict(), indent=2) + "\n", encoding="utf-8"
    )
    best_trial = max(log, key=lambda t: t.mean_auc)
    print(f"best mean cv auc {best_trial.mean_auc:.4f}; config in {out}")
    return 0


def cmd_export_attentions(args) -> int:
    vocab = load_embeddings(args.embeddings)
    model = load_checkpoint(args.model, vocab)
    narratives = [
        read_narrative_file(p) for p in sorted(Path(args.narratives).glob("*.json"))
    ]
    narratives = [n for n in narratives if n.get("fine_turns")]
    if not narratives:
        print("error: no narratives with fine turns to export", file=sys.stderr)
        return 1
    written = export_attentions(model, narratives, vocab, args.out)
    print(f"wrote {len(written)} attention files to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="han", description="narrative classifier")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-embeddings", help="desk-scale vectors from a corpus")
    p.add_argument("--narratives-root", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_build_embeddings)

    def add_common(p):
        p.add_argument("--narratives-root", required=True)
        p.add_argument("--folds", required=True)
        p.add_argument("--labels", required=True)
        p.add_argument("--embeddings", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--epochs", type=int, default=60)

    p = sub.add_parser("train", help="train one configuration across the folds")
    add_common(p)
    p.add_argument("--config-json", default=None)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--gru-units", type=int, default=44)
    p.add_argument("--learning-rate", type=float, default=0.005)
    p.add_argument("--gru-dropout", type=float, default=0.10)
    p.add_argument("--recurrent-dropout", type=float, default=0.10)
    p.add_argument("--l2", type=float, default=1e-5)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("search", help="random hyperparameter search")
    add_common(p)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("export-attentions", help="emit attentions.json records")
    p.add_argument("--model", required=True)
    p.add_argument("--narratives", required=True, help="directory of narrative.json")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_attentions)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
