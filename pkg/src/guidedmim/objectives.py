"""Pre-training objectives and reconstruction-target providers.

The reconstruction loss averages per-token squared error over masked patch
positions only; the alignment loss is the squared difference between the
class features of the two branches. Inside each squared term we take the
per-dimension mean (not the raw sum), which keeps magnitudes comparable
across target widths. The combined objective is their unweighted sum.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import torch

from .model import Encoder, EncoderConfig, patchify_tensor
from .patching import MaskPlan

TARGET_KINDS = ("pixel", "random_feature", "teacher_feature")


@dataclass(frozen=True)
class LossReport:
    recon: float
    align: float
    total: float

    def __post_init__(self):
        if self.recon < 0 or self.align < 0:
            raise ValueError(
                f"loss components must be nonnegative, got recon={self.recon}, "
                f"align={self.align}"
            )


def combined_loss(recon: float, align: float) -> LossReport:
    if recon < 0 or align < 0:
        raise ValueError(f"negative loss input: recon={recon}, align={align}")
    return LossReport(recon=recon, align=align, total=recon + align)


def recon_loss(predictions: torch.Tensor, targets: torch.Tensor,
               plan: MaskPlan) -> torch.Tensor:
    """Masked-position reconstruction loss.

    ``predictions`` is the (B, 1+N, D) decoder output (class slot first);
    ``targets`` is (B, |M|, D) aligned with ``plan.masked`` in sorted order.
    Visible positions and the class slot never contribute.
    """
    if predictions.dim() != 3 or predictions.shape[1] != 1 + plan.n_patches:
        raise ValueError(
            f"predictions must be (B, {1 + plan.n_patches}, D), got "
            f"{tuple(predictions.shape)}"
        )
    if targets.shape[:2] != (predictions.shape[0], plan.n_masked):
        raise ValueError(
            f"targets must cover every masked index: expected "
            f"{(predictions.shape[0], plan.n_masked)}, got {tuple(targets.shape[:2])}"
        )
    if targets.shape[2] != predictions.shape[2]:
        raise ValueError(
            f"target dim {targets.shape[2]} does not match prediction dim "
            f"{predictions.shape[2]}"
        )
    if plan.n_masked == 0:
        return predictions.new_zeros(())
    idx = torch.as_tensor(plan.masked, dtype=torch.long, device=predictions.device)
    picked = predictions[:, 1 + idx]
    return ((picked - targets) ** 2).mean()


def align_loss(f_cls: torch.Tensor, f_hat_cls: torch.Tensor) -> torch.Tensor:
    """Per-dimension mean squared difference of the two class features."""
    if f_cls.shape != f_hat_cls.shape:
        raise ValueError(
            f"class feature shapes differ: {tuple(f_cls.shape)} vs "
            f"{tuple(f_hat_cls.shape)}"
        )
    return ((f_cls - f_hat_cls) ** 2).mean()


class TargetProvider:
    """Produces per-patch reconstruction targets for masked indices.

    kinds:
      pixel           flattened original patch values, optionally
                      standardized per patch
      random_feature  a frozen random linear map of patch pixels; fixed for
                      the whole run, never resampled
      teacher_feature patch-token outputs of a frozen encoder run on the
                      unmasked image
    """

    def __init__(self, kind: str, patch_size: int = 4,
                 target_dim: int | None = None,
                 teacher: Encoder | None = None,
                 normalize_per_token: bool | None = None,
                 seed: int = 0):
        if kind not in TARGET_KINDS:
            raise ValueError(f"unknown target kind {kind!r}; expected {TARGET_KINDS}")
        self.kind = kind
        self.patch_size = patch_size
        patch_dim = patch_size * patch_size * 3
        if normalize_per_token is None:
            normalize_per_token = kind == "pixel"
        self.normalize_per_token = normalize_per_token

        if kind == "pixel":
            self.target_dim = patch_dim
            self.teacher = None
            self._proj = None
        elif kind == "random_feature":
            self.target_dim = target_dim if target_dim is not None else 64
            self.teacher = None
            gen = torch.Generator().manual_seed(seed)
            self._proj = torch.randn(patch_dim, self.target_dim, generator=gen)
            self._proj /= patch_dim ** 0.5
        else:
            if teacher is None:
                raise ValueError("teacher encoder required for teacher_feature targets")
            self.teacher = teacher
            self.teacher.eval()
            for p in self.teacher.parameters():
                p.requires_grad_(False)
            self.target_dim = teacher.cfg.d
            self._proj = None

    def full_targets(self, images: torch.Tensor) -> torch.Tensor:
        """Targets for every patch index, (B, N, target_dim)."""
        if self.kind == "teacher_feature":
            with torch.no_grad():
                tokens = self.teacher(images).patch_tokens
            out = tokens
        else:
            patches = patchify_tensor(images, self.patch_size)
            if self.kind == "pixel":
                out = patches
            else:
                out = patches @ self._proj.to(patches.dtype)
        if self.normalize_per_token:
            mean = out.mean(dim=-1, keepdim=True)
            std = out.std(dim=-1, keepdim=True, unbiased=False)
            out = (out - mean) / (std + 1e-6)
        return out

    def make_targets(self, images: torch.Tensor, plan: MaskPlan) -> torch.Tensor:
        """Targets for the plan's masked indices, (B, |M|, target_dim)."""
        full = self.full_targets(images)
        if plan.n_patches != full.shape[1]:
            raise ValueError(
                f"plan covers {plan.n_patches} patches but images produce "
                f"{full.shape[1]}"
            )
        idx = torch.as_tensor(plan.masked, dtype=torch.long, device=full.device)
        return full[:, idx]

    def teacher_fingerprint(self) -> str:
        """SHA-256 of teacher weights; constant across a run by construction."""
        if self.teacher is None:
            raise ValueError("provider has no teacher")
        h = hashlib.sha256()
        for name, p in sorted(self.teacher.state_dict().items()):
            h.update(name.encode())
            h.update(p.detach().cpu().numpy().tobytes())
        return h.hexdigest()


def make_target_provider(kind: str, enc_cfg: EncoderConfig,
                         teacher: Encoder | None = None,
                         target_dim: int | None = None,
                         normalize_per_token: bool | None = None,
                         seed: int = 0) -> TargetProvider:
    return TargetProvider(
        kind=kind,
        patch_size=enc_cfg.patch_size,
        target_dim=target_dim,
        teacher=teacher,
        normalize_per_token=normalize_per_token,
        seed=seed,
    )
