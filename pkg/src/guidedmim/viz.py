"""Attention-map extraction and heatmap rendering.

Maps come from one encoder block's softmax row for a chosen query patch,
averaged over heads. The class-token column is dropped and the row is
renormalized over patch keys so the map is a probability distribution on
the spatial grid. Rendering uses an embedded colormap table so output PNG
bytes are deterministic.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
import torch

from .corpus import save_image
from .model import Encoder
from .train import load_encoder


@dataclass(frozen=True)
class AttentionMap:
    weights: np.ndarray  # (rows, cols), nonnegative, sums to 1
    query_index: int
    block_index: int

    def __post_init__(self):
        if self.weights.ndim != 2:
            raise ValueError("attention map must be a 2-D grid")
        total = float(self.weights.sum())
        if not math.isclose(total, 1.0, abs_tol=1e-5):
            raise ValueError(f"attention map must sum to 1, got {total}")


def _as_encoder(encoder_or_path) -> Encoder:
    if isinstance(encoder_or_path, Encoder):
        return encoder_or_path
    encoder, _ = load_encoder(encoder_or_path)
    return encoder


def extract_attention(encoder_or_path, image: np.ndarray,
                      query: tuple[int, int], block: int = -1) -> AttentionMap:
    """Head-averaged attention of one query patch over all patch keys.

    ``query`` is (row, col) on the patch grid; ``block`` indexes encoder
    blocks, -1 meaning the last. The forward pass is unmasked.
    """
    encoder = _as_encoder(encoder_or_path)
    cfg = encoder.cfg
    rows, cols = cfg.grid_rows, cfg.grid_cols
    r, c = query
    if not (0 <= r < rows and 0 <= c < cols):
        raise ValueError(f"query {query} outside the {rows}x{cols} patch grid")
    n_blocks = len(encoder.blocks)
    if block < 0:
        block += n_blocks
    if not (0 <= block < n_blocks):
        raise ValueError(f"block index out of range for depth {n_blocks}")

    tensor = torch.from_numpy(np.asarray(image, dtype=np.float32))[None]
    capture: list[torch.Tensor] = []
    with torch.no_grad():
        encoder.eval()
        encoder(tensor, capture=capture)
    weights = capture[block][0]          # (heads, 1+N, 1+N)
    q_idx = 1 + r * cols + c
    row = weights[:, q_idx, :].mean(dim=0)
    patch_row = row[1:].double()         # drop the class-token key
    patch_row = patch_row / patch_row.sum()
    return AttentionMap(
        weights=patch_row.reshape(rows, cols).numpy(),
        query_index=r * cols + c,
        block_index=block,
    )


def attention_entropy(amap: AttentionMap) -> float:
    w = amap.weights.reshape(-1)
    w = w[w > 0]
    return float(-(w * np.log(w)).sum())


# Compact perceptual-ramp colormap (dark blue -> green -> yellow), linearly
# interpolated; embedded so figures need no plotting dependency.
_COLORMAP_ANCHORS = np.array([
    [0.267, 0.005, 0.329],
    [0.283, 0.141, 0.458],
    [0.254, 0.265, 0.530],
    [0.207, 0.372, 0.553],
    [0.164, 0.471, 0.558],
    [0.128, 0.567, 0.551],
    [0.135, 0.659, 0.518],
    [0.267, 0.749, 0.441],
    [0.478, 0.821, 0.318],
    [0.741, 0.873, 0.150],
    [0.993, 0.906, 0.144],
])


def _colorize(values: np.ndarray) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    norm = (values - lo) / (hi - lo) if hi > lo else np.zeros_like(values)
    pos = norm * (len(_COLORMAP_ANCHORS) - 1)
    i0 = np.floor(pos).astype(int)
    i1 = np.minimum(i0 + 1, len(_COLORMAP_ANCHORS) - 1)
    frac = (pos - i0)[..., None]
    return _COLORMAP_ANCHORS[i0] * (1 - frac) + _COLORMAP_ANCHORS[i1] * frac


def heatmap_overlay(amap: AttentionMap, image: np.ndarray, patch_size: int = 4,
                    upscale: int = 4, alpha: float = 0.55) -> np.ndarray:
    """Blend the attention grid over the image; returns an upscaled array."""
    rows, cols = amap.weights.shape
    heat = _colorize(amap.weights)
    heat_full = np.kron(heat, np.ones((patch_size, patch_size, 1)))[:, :, 0:3]
    heat_full = heat_full.reshape(rows * patch_size, cols * patch_size, 3)
    blended = (1 - alpha) * np.asarray(image, dtype=np.float64) + alpha * heat_full
    big = np.kron(blended, np.ones((upscale, upscale, 1)))[:, :, 0:3]
    big = big.reshape(rows * patch_size * upscale, cols * patch_size * upscale, 3)

    # Outline the query patch in red.
    r, c = divmod(amap.query_index, cols)
    y0, x0 = r * patch_size * upscale, c * patch_size * upscale
    y1, x1 = y0 + patch_size * upscale - 1, x0 + patch_size * upscale - 1
    red = np.array([1.0, 0.1, 0.1])
    big[y0, x0:x1 + 1] = red
    big[y1, x0:x1 + 1] = red
    big[y0:y1 + 1, x0] = red
    big[y0:y1 + 1, x1] = red
    return np.clip(big, 0.0, 1.0)


def render_heatmap(amap: AttentionMap, image: np.ndarray, out_path: str,
                   patch_size: int = 4, upscale: int = 4) -> np.ndarray:
    """Write the overlay PNG; identical inputs give identical file bytes."""
    overlay = heatmap_overlay(amap, image, patch_size=patch_size, upscale=upscale)
    save_image(overlay.astype(np.float32), out_path)
    return overlay


def compare_methods(named_encoders, image: np.ndarray, query: tuple[int, int],
                    out_path: str, block: int = -1) -> dict[str, float]:
    """Stack one heatmap row per named encoder and report map entropies.

    ``named_encoders`` is a sequence of (name, Encoder-or-checkpoint-path).
    Entropies print as ``name<TAB>entropy`` and are returned as a dict.
    """
    if not named_encoders:
        raise ValueError("need at least one (name, encoder) pair")
    rows = []
    entropies = {}
    for name, enc in named_encoders:
        amap = extract_attention(enc, image, query, block=block)
        rows.append(heatmap_overlay(amap, image))
        entropies[name] = attention_entropy(amap)
    gap = np.zeros((2, rows[0].shape[1], 3))
    stacked = rows[0]
    for row in rows[1:]:
        stacked = np.concatenate([stacked, gap, row], axis=0)
    if os.path.dirname(out_path):
        os.makedirs(os.path.dirname(out_path), exist_ok=True)
    save_image(stacked.astype(np.float32), out_path)
    for name, h in entropies.items():
        print(f"{name}\t{h:.6f}")
    return entropies
