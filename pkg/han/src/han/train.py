"""Per-fold training with the shared fold assignment and file exports.

For test fold k, one of the remaining folds serves as the development set
for best-epoch selection (training runs the full epoch budget, no early
stopping) and the rest train the model. Test-fold probabilities come from
the best development checkpoint. Exports: ``aucs.csv`` (fold, auc),
``scores.csv`` (session_id, fold, probability, label) and per-fold model
checkpoints for attention export.
"""

from __future__ import annotations

import copy
import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .config import HanConfig
from .data import Doc, TruncationLog, load_fold_docs, read_folds, read_labels
from .metrics import rank_auc
from .model import HanModel
from .vocab import VocabMap

# classical momentum for the SGD optimizer; plain SGD at the tuned learning
# rates needs far more than the epoch budget to move the recurrent layers
MOMENTUM = 0.9


def collate(docs: Sequence[Doc], vocab: VocabMap):
    b = len(docs)
    t = max(len(d.turns) for d in docs)
    w = max(max(len(turn) for turn in d.turns) for d in docs)
    word_ids = torch.zeros((b, t, w), dtype=torch.long)
    word_mask = torch.zeros((b, t, w), dtype=torch.bool)
    for i, doc in enumerate(docs):
        for j, turn in enumerate(doc.turns):
            idx = vocab.indices(turn)
            word_ids[i, j, : len(idx)] = torch.tensor(idx, dtype=torch.long)
            word_mask[i, j, : len(idx)] = True
    return word_ids, word_mask


def predict_probs(model: HanModel, docs: Sequence[Doc], vocab: VocabMap,
                  batch_size: int = 16) -> list[float]:
    model.eval()
    out: list[float] = []
    with torch.no_grad():
        for i in range(0, len(docs), batch_size):
            chunk = docs[i:i + batch_size]
            word_ids, word_mask = collate(chunk, vocab)
            logits, _, _ = model(word_ids, word_mask)
            out.extend(torch.sigmoid(logits).tolist())
    return out


@dataclass
class FoldResult:
    fold: int
    auc: float
    best_epoch: int
    probs: dict[str, float]


def train_model(
    train_docs: Sequence[Doc],
    dev_docs: Sequence[Doc],
    vocab: VocabMap,
    config: HanConfig,
    fold_seed: int,
) -> tuple[HanModel, int, list[float]]:
    """Train for the full budget; return the best-dev-AUC checkpoint."""
    torch.manual_seed(fold_seed)
    model = HanModel(config, torch.from_numpy(vocab.matrix))
    optimizer = torch.optim.SGD(
        model.parameters(), lr=config.learning_rate, weight_decay=config.l2,
        momentum=MOMENTUM,
    )
    loss_fn = nn.BCEWithLogitsLoss()
    dev_labels = [bool(d.label) for d in dev_docs]
    rng = np.random.default_rng(fold_seed)
    best_state = copy.deepcopy(model.state_dict())
    best_auc = -1.0
    best_epoch = 0
    history: list[float] = []
    indices = np.arange(len(train_docs))
    for epoch in range(1, config.max_epochs + 1):
        model.train()
        rng.shuffle(indices)
        for i in range(0, len(indices), config.batch_size):
            batch = [train_docs[j] for j in indices[i:i + config.batch_size]]
            word_ids, word_mask = collate(batch, vocab)
            labels = torch.tensor([float(d.label) for d in batch])
            optimizer.zero_grad()
            logits, _, _ = model(word_ids, word_mask)
            loss = loss_fn(logits, labels)
            loss.backward()
            optimizer.step()
        if len(set(dev_labels)) > 1:
            dev_auc = rank_auc(predict_probs(model, dev_docs, vocab), dev_labels)
        else:
            dev_auc = 0.5
        history.append(dev_auc)
        if dev_auc > best_auc:
            best_auc = dev_auc
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
    model.load_state_dict(best_state)
    return model, best_epoch, history


def run_cv(
    narratives_root: str | Path,
    folds_path: str | Path,
    labels_path: str | Path,
    vocab: VocabMap,
    config: HanConfig,
    out_dir: str | Path | None = None,
    save_models: bool = False,
) -> list[FoldResult]:
    assignment, k = read_folds(folds_path)
    labels = read_labels(labels_path)
    results: list[FoldResult] = []
    log = TruncationLog()
    for fold in range(k):
        docs = load_fold_docs(narratives_root, fold, labels, log)
        test_ids = sorted(s for s, f in assignment.items() if f == fold)
        dev_fold = (fold + 1) % k
        dev_ids = sorted(s for s, f in assignment.items() if f == dev_fold)
        train_ids = sorted(
            s for s, f in assignment.items() if f not in (fold, dev_fold)
        )
        model, best_epoch, _ = train_model(
            [docs[s] for s in train_ids],
            [docs[s] for s in dev_ids],
            vocab,
            config,
            fold_seed=config.seed * 1000 + fold,
        )
        probs = predict_probs(model, [docs[s] for s in test_ids], vocab)
        fold_auc = rank_auc(probs, [labels[s] for s in test_ids])
        results.append(
            FoldResult(
                fold=fold,
                auc=fold_auc,
                best_epoch=best_epoch,
                probs=dict(zip(test_ids, probs)),
            )
        )
        if out_dir is not None and save_models:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            torch.save(
                {"state_dict": model.state_dict(), "config": config.as_dict(),
                 "vocab_size": len(vocab)},
                out / f"model_fold{fold}.pt",
            )
    if log.turns_clipped or log.tokens_clipped:
        print(
            f"truncation applied: {log.turns_clipped} docs clipped to max turns, "
            f"{log.tokens_clipped} turns clipped to max tokens"
        )
    if out_dir is not None:
        write_outputs(results, labels, Path(out_dir))
    return results


def write_outputs(results: list[FoldResult], labels: dict[str, bool], out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with (out / "aucs.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fold", "auc"])
        for r in results:
            writer.writerow([r.fold, repr(r.auc)])
    with (out / "scores.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["session_id", "fold", "probability", "label"])
        for r in results:
            for sid in sorted(r.probs):
                writer.writerow([sid, r.fold, repr(r.probs[sid]), int(labels[sid])])


def load_checkpoint(path: str | Path, vocab: VocabMap) -> HanModel:
    payload = torch.load(Path(path), weights_only=False)
    if payload["vocab_size"] != len(vocab):
        raise ValueError("checkpoint was trained with a different vocabulary")
    config = HanConfig(**payload["config"])
    model = HanModel(config, torch.from_numpy(vocab.matrix))
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model


def mean_sd(values: Sequence[float]) -> tuple[float, float]:
    mean = sum(values) / len(values)
    sd = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
    return mean, sd
