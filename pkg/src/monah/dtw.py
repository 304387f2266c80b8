"""Classic dynamic time warping distance between two real-valued series.

Local cost is the absolute difference, the step set is
{(1,0), (0,1), (1,1)} with unit weights, no window, no normalization.
The returned value is the optimal cumulative cost over full alignments.
Lower distance between two speakers' prosodic series reads as stronger
mimicry.
"""

from __future__ import annotations

import math
from collections.abc import Sequence


class EmptySeries(ValueError):
    """DTW requires two non-empty series."""


def dtw_distance(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) == 0 or len(b) == 0:
        raise EmptySeries("dtw_distance requires two non-empty series")
    xs = [float(v) for v in a]
    ys = [float(v) for v in b]
    m = len(ys)
    prev: list[float] = []
    for i, x in enumerate(xs):
        cur = [0.0] * m
        for j, y in enumerate(ys):
            cost = abs(x - y)
            if i == 0 and j == 0:
                cur[j] = cost
                continue
            best = math.inf
            if i > 0:
                best = prev[j]
                if j > 0 and prev[j - 1] < best:
                    best = prev[j - 1]
            if j > 0 and cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = cost + best
        prev = cur
    return prev[-1]
