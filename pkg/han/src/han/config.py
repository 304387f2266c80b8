"""Hyperparameter configuration and its tuning distributions.

All sampling is uniform within the stated bounds except the learning rate,
which is sampled log-uniformly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BATCH_RANGE = (4, 20)
GRU_RANGE = (40, 49)
LR_RANGE = (0.003, 0.010)
DROPOUT_RANGE = (0.05, 0.50)
L2_RANGE = (1e-6, 1e-3)
MAX_EPOCH_CAP = 350
EMBEDDING_DIM = 300
MAX_TURNS = 400
MAX_TOKENS = 60


@dataclass(frozen=True)
class HanConfig:
    batch_size: int = 8
    gru_units: int = 44
    learning_rate: float = 0.005
    gru_dropout: float = 0.10
    recurrent_dropout: float = 0.10
    l2: float = 1e-5
    max_epochs: int = 60
    seed: int = 0

    def __post_init__(self) -> None:
        checks = [
            (BATCH_RANGE[0] <= self.batch_size <= BATCH_RANGE[1], "batch_size"),
            (GRU_RANGE[0] <= self.gru_units <= GRU_RANGE[1], "gru_units"),
            (LR_RANGE[0] <= self.learning_rate <= LR_RANGE[1], "learning_rate"),
            (DROPOUT_RANGE[0] <= self.gru_dropout <= DROPOUT_RANGE[1], "gru_dropout"),
            (
                DROPOUT_RANGE[0] <= self.recurrent_dropout <= DROPOUT_RANGE[1],
                "recurrent_dropout",
            ),
            (L2_RANGE[0] <= self.l2 <= L2_RANGE[1], "l2"),
            (1 <= self.max_epochs <= MAX_EPOCH_CAP, "max_epochs"),
        ]
        for ok, name in checks:
            if not ok:
                raise ValueError(f"{name} out of range: {getattr(self, name)}")

    def as_dict(self) -> dict:
        return {
            "batch_size": self.batch_size,
            "gru_units": self.gru_units,
            "learning_rate": self.learning_rate,
            "gru_dropout": self.gru_dropout,
            "recurrent_dropout": self.recurrent_dropout,
            "l2": self.l2,
            "max_epochs": self.max_epochs,
            "seed": self.seed,
        }


def sample_config(rng: np.random.Generator, max_epochs: int, seed: int) -> HanConfig:
    log_lo, log_hi = math.log(LR_RANGE[0]), math.log(LR_RANGE[1])
    return HanConfig(
        batch_size=int(rng.integers(BATCH_RANGE[0], BATCH_RANGE[1] + 1)),
        gru_units=int(rng.integers(GRU_RANGE[0], GRU_RANGE[1] + 1)),
        learning_rate=float(math.exp(rng.uniform(log_lo, log_hi))),
        gru_dropout=float(rng.uniform(*DROPOUT_RANGE)),
        recurrent_dropout=float(rng.uniform(*DROPOUT_RANGE)),
        l2=float(rng.uniform(*L2_RANGE)),
        max_epochs=max_epochs,
        seed=seed,
    )
