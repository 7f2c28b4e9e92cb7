"""Guidance-branch masked image modeling for text images.

Dual-branch masked-patch pre-training with a shared ViT encoder: one branch
reconstructs masked patches, the other encodes an unmasked, differently
augmented view of the same text and steers the decoder via cross-attention
plus a class-feature alignment loss. Includes a synthetic corpus generator,
a downstream autoregressive recognizer, word-accuracy evaluation, an
ablation harness, and attention-map visualization.
"""

__version__ = "0.1.0"

from .corpus import (
    AugmentationPolicy,
    TextSample,
    ViewPair,
    generate_corpus,
    make_view_pair,
    render_sample,
)
from .evaluation import EvalReport, aggregate, run_benchmark, waics_match, waics_normalize
from .model import (
    DecoderConfig,
    EncoderConfig,
    MaskedPretrainer,
    Recognizer,
    RecognizerConfig,
    attention,
)
from .objectives import LossReport, align_loss, combined_loss, recon_loss
from .patching import MaskPlan, patchify, plan_block_mask, plan_random_mask, unpatchify
from .train import FinetuneConfig, PretrainConfig, finetune, lr_at, pretrain

__all__ = [
    "AugmentationPolicy",
    "DecoderConfig",
    "EncoderConfig",
    "EvalReport",
    "FinetuneConfig",
    "LossReport",
    "MaskPlan",
    "MaskedPretrainer",
    "PretrainConfig",
    "Recognizer",
    "RecognizerConfig",
    "TextSample",
    "ViewPair",
    "aggregate",
    "align_loss",
    "attention",
    "combined_loss",
    "finetune",
    "generate_corpus",
    "lr_at",
    "make_view_pair",
    "patchify",
    "plan_block_mask",
    "plan_random_mask",
    "pretrain",
    "recon_loss",
    "render_sample",
    "run_benchmark",
    "unpatchify",
    "waics_match",
    "waics_normalize",
]
