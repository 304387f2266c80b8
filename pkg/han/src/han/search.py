"""Random search over the tuning distributions with a cumulative-best log."""

from __future__ import annotations

import csv
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import HanConfig, sample_config


@dataclass(frozen=True)
class Trial:
    index: int
    config: HanConfig
    mean_auc: float
    sd_auc: float
    fold_aucs: tuple[float, ...]


def random_search(
    evaluate: Callable[[HanConfig], Sequence[float]],
    trials: int,
    seed: int,
    max_epochs: int,
) -> tuple[HanConfig, list[Trial]]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    log: list[Trial] = []
    best: Trial | None = None
    for t in range(trials):
        config = sample_config(rng, max_epochs=max_epochs, seed=seed)
        fold_aucs = tuple(float(a) for a in evaluate(config))
        mean = sum(fold_aucs) / len(fold_aucs)
        sd = math.sqrt(sum((a - mean) ** 2 for a in fold_aucs) / len(fold_aucs))
        trial = Trial(index=t, config=config, mean_auc=mean, sd_auc=sd,
                      fold_aucs=fold_aucs)
        log.append(trial)
        if best is None or trial.mean_auc > best.mean_auc:
            best = trial
    return best.config, log


def cumulative_best(log: Sequence[Trial]) -> list[float]:
    out: list[float] = []
    cur = -math.inf
    for trial in log:
        cur = max(cur, trial.mean_auc)
        out.append(cur)
    return out


def write_trials_csv(log: Sequence[Trial], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "trial", "batch_size", "gru_units", "learning_rate", "gru_dropout",
            "recurrent_dropout", "l2", "max_epochs", "mean_auc", "sd_auc",
        ])
        for t in log:
            c = t.config
            writer.writerow([
                t.index, c.batch_size, c.gru_units, repr(c.learning_rate),
                repr(c.gru_dropout), repr(c.recurrent_dropout), repr(c.l2),
                c.max_epochs, repr(t.mean_auc), repr(t.sd_auc),
            ])


def write_curve_csv(log: Sequence[Trial], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_trials", "best_mean_auc"])
        for i, best in enumerate(cumulative_best(log), start=1):
            writer.writerow([i, repr(best)])
