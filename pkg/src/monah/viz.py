"""Attention-weighted conversation views and heatmap thumbnails.

Weights arrive from a file boundary (``attentions.json``), so the renderer
also works for runs without a text model: passing no attention yields a
plain verbatim rendering with uniform styling.

Both outputs are deterministic byte-for-byte: no timestamps, floats
formatted to four decimals, SVG instead of raster.
"""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from dataclasses import dataclass
from html import escape
from pathlib import Path

from .narrative import Narrative


class AlignmentError(ValueError):
    """Attention indices do not align with the narrative's fine turns."""


@dataclass(frozen=True)
class AttentionRecord:
    session_id: str
    turn_weights: tuple[float, ...]
    word_weights: tuple[tuple[float, ...], ...]


def read_attentions(path: str | Path) -> AttentionRecord:
    obj = json.loads(Path(path).read_text("utf-8"))
    return AttentionRecord(
        session_id=str(obj["session_id"]),
        turn_weights=tuple(float(w) for w in obj["turn_weights"]),
        word_weights=tuple(
            tuple(float(w) for w in turn) for turn in obj["word_weights"]
        ),
    )


def write_attentions(record: AttentionRecord, path: str | Path) -> None:
    payload = {
        "session_id": record.session_id,
        "turn_weights": list(record.turn_weights),
        "word_weights": [list(t) for t in record.word_weights],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def bucket_attention(weights: Sequence[float]) -> list[int]:
    """Four z-buckets per weight: z<0 -> 1, z<1 -> 2, z<2 -> 3, z>=2 -> 4.

    The z-transform uses the given weight list as its own population; with
    zero variance every weight lands in bucket 1.
    """
    if len(weights) == 0:
        raise ValueError("bucket_attention needs at least one weight")
    n = len(weights)
    mean = sum(weights) / n
    sd = math.sqrt(sum((w - mean) ** 2 for w in weights) / n)
    if sd == 0.0:
        return [1] * n
    out = []
    for w in weights:
        z = (w - mean) / sd
        if z < 0:
            out.append(1)
        elif z < 1:
            out.append(2)
        elif z < 2:
            out.append(3)
        else:
            out.append(4)
    return out


def turn_label(bucket: int) -> str:
    """Three-way turn label from the four-way bucket."""
    if bucket <= 1:
        return "L"
    if bucket == 2:
        return "M"
    return "H"


_CSS = """\
body { font-family: Georgia, serif; max-width: 62em; margin: 2em auto; color: #1a1a1a; }
h1 { font-size: 1.2em; font-weight: normal; border-bottom: 1px solid #999; }
p.coarse { color: #444; font-style: italic; }
div.turn { margin: 0.35em 0; }
span.label { display: inline-block; width: 1.4em; color: #777; font-family: monospace; }
span.att-1 { font-size: 0.85em; color: #b0b0b0; }
span.att-2 { font-size: 1.0em; color: #707070; }
span.att-3 { font-size: 1.15em; color: #303030; }
span.att-4 { font-size: 1.35em; color: #000000; font-weight: bold; }
span.att-0 { font-size: 1.0em; color: #404040; }
"""


def render_conversation(
    narrative: Narrative, attention: AttentionRecord | None = None
) -> str:
    """Self-contained HTML: turn rows labelled L/M/H, words sized by bucket.

    Word weights are z-scored over the whole session (one population), so
    rescaling all weights leaves the rendering unchanged.
    """
    turns = narrative.fine_turns
    if attention is not None:
        if len(attention.turn_weights) != len(turns) or len(
            attention.word_weights
        ) != len(turns):
            raise AlignmentError(
                f"attention has {len(attention.turn_weights)} turns, "
                f"narrative has {len(turns)}"
            )
        for i, turn in enumerate(turns):
            if len(attention.word_weights[i]) != len(turn.text.split()):
                raise AlignmentError(
                    f"turn {i}: {len(attention.word_weights[i])} word weights for "
                    f"{len(turn.text.split())} tokens"
                )
        turn_buckets = bucket_attention(attention.turn_weights) if turns else []
        all_word_weights = [w for ws in attention.word_weights for w in ws]
        flat_buckets = bucket_attention(all_word_weights) if all_word_weights else []
        word_buckets: list[list[int]] = []
        pos = 0
        for ws in attention.word_weights:
            word_buckets.append(flat_buckets[pos:pos + len(ws)])
            pos += len(ws)

    lines = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        f"<title>{escape(narrative.session_id)}</title>",
        f"<style>\n{_CSS}</style>",
        "</head>",
        "<body>",
        f"<h1>{escape(narrative.session_id)}</h1>",
    ]
    if narrative.coarse_text:
        lines.append(f'<p class="coarse">{escape(narrative.coarse_text)}</p>')
    for i, turn in enumerate(turns):
        tokens = turn.text.split()
        if attention is None:
            word_html = " ".join(
                f'<span class="att-0">{escape(tok)}</span>' for tok in tokens
            )
            lines.append(f'<div class="turn">{word_html}</div>')
        else:
            label = turn_label(turn_buckets[i])
            word_html = " ".join(
                f'<span class="att-{b}" title="w={w:.4f}">{escape(tok)}</span>'
                for tok, b, w in zip(tokens, word_buckets[i], attention.word_weights[i])
            )
            lines.append(
                f'<div class="turn"><span class="label">{label}</span>{word_html}</div>'
            )
    lines.extend(["</body>", "</html>", ""])
    return "\n".join(lines)


# light-to-dark blue ramp; interpolation stays in float percentages so
# darkness is strictly monotone in weight
_LIGHT = (222.0, 235.0, 247.0)
_DARK = (8.0, 48.0, 107.0)


def _blue(norm: float) -> str:
    channels = [
        (light + (dark - light) * norm) / 255.0 * 100.0
        for light, dark in zip(_LIGHT, _DARK)
    ]
    return "rgb({:.4f}%,{:.4f}%,{:.4f}%)".format(*channels)


def render_thumbnail(attention: AttentionRecord, cell: int = 12, height: int = 24) -> str:
    """One SVG cell per talk-turn in temporal order; darker blue = more weight."""
    weights = attention.turn_weights
    if len(weights) == 0:
        raise ValueError("render_thumbnail needs at least one turn")
    lo, hi = min(weights), max(weights)
    span = hi - lo
    width = cell * len(weights)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    for i, w in enumerate(weights):
        norm = 0.5 if span == 0 else (w - lo) / span
        lines.append(
            f'<rect x="{i * cell}" y="0" width="{cell}" height="{height}" '
            f'fill="{_blue(norm)}"/>'
        )
    lines.append("</svg>")
    lines.append("")
    return "\n".join(lines)
