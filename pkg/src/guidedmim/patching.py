"""Patch grids and mask plans.

Images are split into non-overlapping P x P patches in row-major order;
mask plans pick which patch indices are hidden from the encoder, either
uniformly at random or as a contiguous column block.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

MASK_STRATEGIES = ("random", "block")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class PatchGrid:
    """Flattened patches of one image, row-major, losslessly invertible."""

    patches: np.ndarray  # (N, P*P*C)
    rows: int
    cols: int
    patch_size: int
    channels: int = 3

    @property
    def n_patches(self) -> int:
        return self.rows * self.cols


def patchify(image: np.ndarray, patch_size: int = 4) -> PatchGrid:
    """Split an (H, W, C) image into flattened P x P patches, row-major."""
    if image.ndim != 3:
        raise ValueError(f"expected (H, W, C) image, got shape {image.shape}")
    h, w, c = image.shape
    p = patch_size
    if p <= 0 or h % p != 0 or w % p != 0:
        raise ValueError(
            f"image dimensions {h}x{w} are not divisible by patch size {p}"
        )
    rows, cols = h // p, w // p
    x = image.reshape(rows, p, cols, p, c)
    x = x.transpose(0, 2, 1, 3, 4)  # (rows, cols, p, p, c)
    patches = np.ascontiguousarray(x).reshape(rows * cols, p * p * c)
    return PatchGrid(patches=patches, rows=rows, cols=cols, patch_size=p, channels=c)


def unpatchify(grid: PatchGrid) -> np.ndarray:
    """Exact inverse of :func:`patchify`."""
    p, c = grid.patch_size, grid.channels
    n = grid.rows * grid.cols
    if grid.patches.ndim != 2 or grid.patches.shape != (n, p * p * c):
        raise ValueError(
            f"malformed grid: expected patches of shape {(n, p * p * c)}, "
            f"got {grid.patches.shape}"
        )
    x = grid.patches.reshape(grid.rows, grid.cols, p, p, c)
    x = x.transpose(0, 2, 1, 3, 4)
    return np.ascontiguousarray(x).reshape(grid.rows * p, grid.cols * p, c)


@dataclass(frozen=True)
class MaskPlan:
    """A set of masked patch indices plus the strategy/seed that produced it."""

    masked: tuple[int, ...]
    n_patches: int
    strategy: str
    ratio: float
    seed: int
    visible: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        masked = tuple(sorted(set(int(i) for i in self.masked)))
        if masked and (masked[0] < 0 or masked[-1] >= self.n_patches):
            raise ValueError(
                f"masked indices out of range [0, {self.n_patches}): {masked[0]}..{masked[-1]}"
            )
        object.__setattr__(self, "masked", masked)
        masked_set = set(masked)
        visible = tuple(i for i in range(self.n_patches) if i not in masked_set)
        object.__setattr__(self, "visible", visible)

    @property
    def n_masked(self) -> int:
        return len(self.masked)

    def to_json(self) -> str:
        return json.dumps(
            {
                "strategy": self.strategy,
                "ratio": self.ratio,
                "seed": self.seed,
                "n_patches": self.n_patches,
                "indices": list(self.masked),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "MaskPlan":
        rec = json.loads(text)
        return cls(
            masked=tuple(rec["indices"]),
            n_patches=rec["n_patches"],
            strategy=rec["strategy"],
            ratio=rec["ratio"],
            seed=rec["seed"],
        )


def _check_ratio(ratio: float) -> None:
    if not (0.0 < ratio < 1.0):
        raise ValueError(f"mask ratio must lie in (0, 1), got {ratio}")


def plan_random_mask(n_patches: int, ratio: float, seed: int) -> MaskPlan:
    """Mask round(ratio * N) indices chosen uniformly without replacement."""
    _check_ratio(ratio)
    if n_patches < 1:
        raise ValueError(f"n_patches must be positive, got {n_patches}")
    n_masked = _round_half_up(ratio * n_patches)
    rng = np.random.Generator(np.random.PCG64(seed))
    masked = rng.choice(n_patches, size=n_masked, replace=False)
    return MaskPlan(
        masked=tuple(int(i) for i in masked),
        n_patches=n_patches,
        strategy="random",
        ratio=ratio,
        seed=seed,
    )


def plan_block_mask(rows: int, cols: int, ratio: float, seed: int) -> MaskPlan:
    """Mask a full-height contiguous column span of width round(ratio * cols).

    Columns align with reading order, so the block hides whole character
    regions rather than scattered patches.
    """
    _check_ratio(ratio)
    if rows < 1 or cols < 1:
        raise ValueError(f"grid must be non-empty, got {rows}x{cols}")
    span = _round_half_up(ratio * cols)
    if span == 0:
        raise ValueError(
            f"degenerate ratio {ratio}: block span rounds to zero columns of {cols}"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    start = int(rng.integers(0, cols - span + 1))
    masked = tuple(
        r * cols + c for r in range(rows) for c in range(start, start + span)
    )
    return MaskPlan(
        masked=masked,
        n_patches=rows * cols,
        strategy="block",
        ratio=ratio,
        seed=seed,
    )
