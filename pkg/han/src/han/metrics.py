"""Rank-based AUC with tie handling, matching the harness definition."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np


def rank_auc(probs: Sequence[float], labels: Sequence[bool]) -> float:
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need both classes for AUC")
    order = np.argsort(probs, kind="stable")
    ranks = np.empty(len(probs), dtype=float)
    sorted_probs = probs[order]
    i = 0
    while i < len(sorted_probs):
        j = i
        while j + 1 < len(sorted_probs) and sorted_probs[j + 1] == sorted_probs[i]:
            j += 1
        # average rank for ties, 1-based
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    pos_rank_sum = float(ranks[labels].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
