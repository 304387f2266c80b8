"""Attention export in the renderer's ``attentions.json`` contract.

The classifier's document prepends coarse pseudo-turns; the renderer
aligns with the narrative's fine turns only, so the fine slice of the
turn-attention vector is taken and renormalized. Word weights of tokens
clipped by the 60-token truncation are padded with zeros, keeping every
turn's weights aligned with its text and summing to one.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch

from .data import narrative_to_doc
from .model import HanModel
from .train import collate
from .vocab import VocabMap


def attention_record(model: HanModel, narrative: dict, vocab: VocabMap) -> dict:
    doc = narrative_to_doc(narrative)
    if not narrative.get("fine_turns"):
        raise ValueError(f"{doc.session_id}: no fine turns to export")
    model.eval()
    with torch.no_grad():
        word_ids, word_mask = collate([doc], vocab)
        _, turn_weights, word_weights = model(word_ids, word_mask)
    turn_weights = turn_weights[0].tolist()
    word_weights = word_weights[0].tolist()

    n_fine = len(narrative["fine_turns"])
    fine_turn_weights = []
    fine_word_weights = []
    for i in range(n_fine):
        doc_index = doc.n_coarse + i
        full_count = doc.fine_token_counts[i]
        if doc_index < len(doc.turns):
            fine_turn_weights.append(turn_weights[doc_index])
            kept = len(doc.turns[doc_index])
            weights = word_weights[doc_index][:kept]
            weights += [0.0] * (full_count - kept)  # truncated tail gets zero
        else:
            fine_turn_weights.append(0.0)  # turn clipped by max-turn cap
            weights = [0.0] * full_count
            if full_count:
                weights[0] = 1.0  # keep the per-turn softmax contract
        fine_word_weights.append(weights)
    total = sum(fine_turn_weights)
    if total <= 0.0:
        fine_turn_weights = [1.0 / n_fine] * n_fine
    else:
        fine_turn_weights = [w / total for w in fine_turn_weights]
    return {
        "session_id": doc.session_id,
        "turn_weights": fine_turn_weights,
        "word_weights": fine_word_weights,
    }


def export_attentions(
    model: HanModel,
    narratives: list[dict],
    vocab: VocabMap,
    out_dir: str | Path,
) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for narrative in narratives:
        record = attention_record(model, narrative, vocab)
        path = out / f"{record['session_id']}.json"
        path.write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
        written.append(path)
    return written
