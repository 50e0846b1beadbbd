"""Tiny transformer encoder with a token-classification head."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn


@dataclass
class ModelDims:
    layers: int = 2
    hidden: int = 128
    heads: int = 4
    max_len: int = 64
    dropout: float = 0.1

    def __post_init__(self) -> None:
        if min(self.layers, self.hidden, self.heads, self.max_len) <= 0:
            raise ValueError("model dimensions must be positive")
        if self.hidden % self.heads:
            raise ValueError("hidden size must divide evenly across heads")


class Encoder(nn.Module):
    def __init__(self, vocab_size: int, dims: ModelDims):
        super().__init__()
        self.dims = dims
        self.token_embedding = nn.Embedding(vocab_size, dims.hidden, padding_idx=0)
        self.position_embedding = nn.Embedding(dims.max_len, dims.hidden)
        layer = nn.TransformerEncoderLayer(
            d_model=dims.hidden,
            nhead=dims.heads,
            dim_feedforward=4 * dims.hidden,
            dropout=dims.dropout,
            batch_first=True,
            norm_first=True,
        )
        self.blocks = nn.TransformerEncoder(
            layer, num_layers=dims.layers, enable_nested_tensor=False
        )
        self.norm = nn.LayerNorm(dims.hidden)

    def forward(self, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.shape[1], device=ids.device)
        x = self.token_embedding(ids) + self.position_embedding(positions)[None, :, :]
        x = self.blocks(x, src_key_padding_mask=~mask)
        return self.norm(x)


class Tagger(nn.Module):
    """Encoder plus a linear entity-tagging head sized to a label list."""

    def __init__(self, vocab_size: int, dims: ModelDims, n_labels: int):
        super().__init__()
        self.encoder = Encoder(vocab_size, dims)
        self.head = nn.Linear(dims.hidden, n_labels)

    def forward(self, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        return self.head(self.encoder(ids, mask))

    def swap_head(self, n_labels: int) -> None:
        """Replace the tagging head; encoder weights are untouched."""
        self.head = nn.Linear(self.encoder.dims.hidden, n_labels)


def encoder_fingerprint(model: Tagger) -> bytes:
    """Stable byte digest of encoder weights, for head-swap checks."""
    import hashlib

    digest = hashlib.sha256()
    for name, tensor in sorted(model.encoder.state_dict().items()):
        digest.update(name.encode())
        digest.update(tensor.detach().cpu().numpy().tobytes())
    return digest.digest()
