"""Two-level recurrent attention network over (turns, words) documents.

Word level: bidirectional GRU over each turn's embedded tokens, pooled by a
single-head additive attention. Turn level: the same pattern over the turn
vectors, ending in a linear head for the binary rapport logit. Attention
weights at both levels are softmax-normalized and exposed for export.

``recurrent_dropout`` is approximated as dropout on the recurrent layer's
output states (the cuDNN-style GRU has no per-step recurrent mask);
``gru_dropout`` is applied to the layer inputs.
"""

from __future__ import annotations

import torch
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence

from .config import EMBEDDING_DIM, HanConfig


class AttentionPool(nn.Module):
    """Additive attention: tanh projection scored against a context vector."""

    def __init__(self, hidden: int):
        super().__init__()
        self.proj = nn.Linear(hidden, hidden)
        self.context = nn.Parameter(torch.empty(hidden))
        nn.init.normal_(self.context, std=0.05)

    def forward(self, states: torch.Tensor, mask: torch.Tensor):
        # states: (N, L, H), mask: (N, L) with >=1 valid position per row
        scores = torch.tanh(self.proj(states)) @ self.context
        scores = scores.masked_fill(~mask, float("-inf"))
        weights = torch.softmax(scores, dim=-1)
        pooled = torch.einsum("nl,nlh->nh", weights, states)
        return pooled, weights


def _run_gru(gru: nn.GRU, inputs: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
    packed = pack_padded_sequence(
        inputs, lengths.cpu(), batch_first=True, enforce_sorted=False
    )
    out, _ = gru(packed)
    unpacked, _ = pad_packed_sequence(out, batch_first=True, total_length=inputs.shape[1])
    return unpacked


class HanModel(nn.Module):
    def __init__(self, config: HanConfig, embedding_matrix: torch.Tensor):
        super().__init__()
        if embedding_matrix.shape[1] != EMBEDDING_DIM:
            raise ValueError(f"embedding dim must be {EMBEDDING_DIM}")
        self.config = config
        u = config.gru_units
        self.embedding = nn.Embedding.from_pretrained(
            embedding_matrix.clone(), freeze=False
        )
        self.input_dropout = nn.Dropout(config.gru_dropout)
        self.state_dropout = nn.Dropout(config.recurrent_dropout)
        self.word_gru = nn.GRU(EMBEDDING_DIM, u, batch_first=True, bidirectional=True)
        self.word_attention = AttentionPool(2 * u)
        self.turn_gru = nn.GRU(2 * u, u, batch_first=True, bidirectional=True)
        self.turn_attention = AttentionPool(2 * u)
        self.head = nn.Linear(2 * u, 1)

    def forward(self, word_ids: torch.Tensor, word_mask: torch.Tensor):
        """word_ids/word_mask: (B, T, W); rows of all-pad turns are allowed.

        Returns (logits (B,), turn_weights (B, T), word_weights (B, T, W)).
        """
        b, t, w = word_ids.shape
        turn_mask = word_mask.any(dim=-1)  # (B, T)
        flat_ids = word_ids.reshape(b * t, w)
        flat_mask = word_mask.reshape(b * t, w)
        # give empty (pad) turns one fake valid slot so packing and softmax
        # stay finite; their outputs are masked out at the turn level
        safe_mask = flat_mask.clone()
        empty = ~flat_mask.any(dim=-1)
        safe_mask[empty, 0] = True
        lengths = safe_mask.sum(dim=-1)

        embedded = self.input_dropout(self.embedding(flat_ids))
        word_states = _run_gru(self.word_gru, embedded, lengths)
        word_states = self.state_dropout(word_states)
        turn_vecs, word_weights = self.word_attention(word_states, safe_mask)

        turn_vecs = turn_vecs.reshape(b, t, -1)
        turn_lengths = turn_mask.sum(dim=-1).clamp(min=1)
        turn_states = _run_gru(
            self.turn_gru, self.input_dropout(turn_vecs), turn_lengths
        )
        turn_states = self.state_dropout(turn_states)
        safe_turn_mask = turn_mask.clone()
        no_turns = ~turn_mask.any(dim=-1)
        safe_turn_mask[no_turns, 0] = True
        session_vecs, turn_weights = self.turn_attention(turn_states, safe_turn_mask)
        logits = self.head(session_vecs).squeeze(-1)
        word_weights = word_weights.reshape(b, t, w) * word_mask
        return logits, turn_weights * turn_mask, word_weights

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def non_embedding_parameter_count(self) -> int:
        emb = self.embedding.weight.numel()
        return self.parameter_count() - emb


def attention_parameters(model: HanModel):
    """The attention layers' parameters, for gradient checking."""
    out = []
    for module in (model.word_attention, model.turn_attention):
        out.extend(module.parameters())
    return out
