"""Training loops: masked pre-training and recognizer fine-tuning.

Both loops are deterministic given their config seed: data order, per-step
augmentation draws, and mask plans all derive from it, so reruns produce
line-identical logs and byte-identical checkpoints.
"""

from __future__ import annotations

import json
import math
import os
import struct
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from .corpus import (
    AUGMENTATION_LEVELS,
    AugmentationPolicy,
    apply_policy,
    derive_seed,
    load_corpus,
)
from .model import (
    Charset,
    DecoderConfig,
    Encoder,
    EncoderConfig,
    MaskedPretrainer,
    Recognizer,
    RecognizerConfig,
)
from .objectives import TARGET_KINDS, align_loss, make_target_provider, recon_loss
from .patching import MASK_STRATEGIES, plan_block_mask, plan_random_mask

ADAMW_BETAS = (0.9, 0.999)
ADAMW_EPS = 1e-8
WEIGHT_DECAY = 0.05
GRAD_CLIP = 1.0

PRETRAIN_LOG_HEADER = "step,recon,align,total,lr"


class CheckpointError(RuntimeError):
    """Checkpoint file is missing, corrupt, or from an unknown version."""


class CorpusValidationError(ValueError):
    """Corpus contents violate recognizer constraints."""


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; a diagnostic snapshot was written."""


# ---------------------------------------------------------------------------
# Learning-rate schedule
# ---------------------------------------------------------------------------

def lr_at(step: int, total_steps: int, warmup_steps: int, lr_peak: float) -> float:
    """Linear warmup to the peak, then cosine decay to zero."""
    if not (0 <= step <= total_steps):
        raise ValueError(f"step {step} outside [0, {total_steps}]")
    if warmup_steps >= total_steps:
        raise ValueError("warmup must be shorter than the schedule")
    if step < warmup_steps:
        return lr_peak * step / warmup_steps
    progress = (step - warmup_steps) / (total_steps - warmup_steps)
    return lr_peak * 0.5 * (1.0 + math.cos(math.pi * progress))


# ---------------------------------------------------------------------------
# Checkpoint container
# ---------------------------------------------------------------------------
# Layout: magic, format version, little-endian header length, JSON header
# (metadata + array table), then raw array bytes in table order. The bytes
# are a pure function of the arrays and metadata, so identical runs produce
# identical files.

_CKPT_MAGIC = b"GMCK"
_CKPT_VERSION = 1


def save_checkpoint(path: str, arrays: dict[str, np.ndarray], metadata: dict) -> None:
    table = []
    blobs = []
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        table.append({"name": name, "dtype": str(arr.dtype), "shape": list(arr.shape)})
        blobs.append(arr.tobytes())
    header = json.dumps(
        {"metadata": metadata, "arrays": table}, sort_keys=True
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_CKPT_MAGIC)
        fh.write(struct.pack("<I", _CKPT_VERSION))
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path: str) -> tuple[dict[str, np.ndarray], dict]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    if len(raw) < 16 or raw[:4] != _CKPT_MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint file (bad magic)")
    (version,) = struct.unpack("<I", raw[4:8])
    if version != _CKPT_VERSION:
        raise CheckpointError(
            f"{path} has checkpoint version {version}, expected {_CKPT_VERSION}"
        )
    (header_len,) = struct.unpack("<Q", raw[8:16])
    if len(raw) < 16 + header_len:
        raise CheckpointError(f"{path} is truncated (incomplete header)")
    try:
        header = json.loads(raw[16:16 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path} has a corrupt header: {e}") from e
    arrays = {}
    offset = 16 + header_len
    for entry in header["arrays"]:
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        nbytes = dtype.itemsize * int(np.prod(shape, dtype=np.int64))
        if offset + nbytes > len(raw):
            raise CheckpointError(f"{path} is truncated (missing array data)")
        arrays[entry["name"]] = np.frombuffer(
            raw[offset:offset + nbytes], dtype=dtype
        ).reshape(shape).copy()
        offset += nbytes
    if offset != len(raw):
        raise CheckpointError(f"{path} has {len(raw) - offset} trailing bytes")
    return arrays, header["metadata"]


def model_state_arrays(module: torch.nn.Module) -> dict[str, np.ndarray]:
    return {k: v.detach().cpu().numpy().copy() for k, v in module.state_dict().items()}


def load_state_arrays(module: torch.nn.Module, arrays: dict[str, np.ndarray]) -> None:
    state = {k: torch.from_numpy(np.ascontiguousarray(v)) for k, v in arrays.items()}
    module.load_state_dict(state, strict=True)


def state_fingerprint(arrays: dict[str, np.ndarray]) -> str:
    import hashlib

    h = hashlib.sha256()
    for name in sorted(arrays):
        h.update(name.encode())
        h.update(np.ascontiguousarray(arrays[name]).tobytes())
    return h.hexdigest()


def save_pretrainer(path: str, model: MaskedPretrainer, step: int, seed: int,
                    extra: dict | None = None) -> None:
    metadata = {
        "kind": "pretrain",
        "encoder": model.enc_cfg.to_dict(),
        "decoder": model.dec_cfg.to_dict(),
        "target_dim": model.target_dim,
        "with_guidance": model.with_guidance,
        "step": step,
        "seed": seed,
    }
    if extra:
        metadata.update(extra)
    save_checkpoint(path, model_state_arrays(model), metadata)


def load_pretrainer(path: str) -> tuple[MaskedPretrainer, dict]:
    arrays, meta = load_checkpoint(path)
    if meta.get("kind") != "pretrain":
        raise CheckpointError(f"{path} is a {meta.get('kind')!r} checkpoint, not pretrain")
    model = MaskedPretrainer(
        EncoderConfig.from_dict(meta["encoder"]),
        DecoderConfig.from_dict(meta["decoder"]),
        target_dim=meta["target_dim"],
        with_guidance=meta["with_guidance"],
    )
    load_state_arrays(model, arrays)
    model.eval()
    return model, meta


def save_encoder(path: str, encoder: Encoder, extra: dict | None = None) -> None:
    metadata = {"kind": "encoder", "encoder": encoder.cfg.to_dict()}
    if extra:
        metadata.update(extra)
    save_checkpoint(path, model_state_arrays(encoder), metadata)


def load_encoder(path: str) -> tuple[Encoder, dict]:
    arrays, meta = load_checkpoint(path)
    if meta.get("kind") not in ("encoder", "pretrain", "recognizer"):
        raise CheckpointError(f"{path} holds no encoder weights")
    encoder = Encoder(EncoderConfig.from_dict(meta["encoder"]))
    if meta["kind"] == "encoder":
        load_state_arrays(encoder, arrays)
    else:
        sub = {k[len("encoder."):]: v for k, v in arrays.items()
               if k.startswith("encoder.")}
        load_state_arrays(encoder, sub)
    encoder.eval()
    return encoder, meta


def save_recognizer(path: str, model: Recognizer, step: int, seed: int,
                    extra: dict | None = None) -> None:
    metadata = {
        "kind": "recognizer",
        "encoder": model.enc_cfg.to_dict(),
        "recognizer": model.rec_cfg.to_dict(),
        "step": step,
        "seed": seed,
    }
    if extra:
        metadata.update(extra)
    save_checkpoint(path, model_state_arrays(model), metadata)


def load_recognizer(path: str) -> tuple[Recognizer, dict]:
    arrays, meta = load_checkpoint(path)
    if meta.get("kind") != "recognizer":
        raise CheckpointError(f"{path} is a {meta.get('kind')!r} checkpoint, not recognizer")
    model = Recognizer(
        EncoderConfig.from_dict(meta["encoder"]),
        RecognizerConfig.from_dict(meta["recognizer"]),
    )
    load_state_arrays(model, arrays)
    model.eval()
    return model, meta


# ---------------------------------------------------------------------------
# Configs
# ---------------------------------------------------------------------------

@dataclass
class PretrainConfig:
    lr_peak: float = 3e-4
    batch_size: int = 32
    epochs: int = 10
    warmup_epochs: int = 1
    mask_strategy: str = "random"
    mask_ratio: float = 0.8
    augmentation: str = "medium"
    target_kind: str = "teacher_feature"
    guidance: bool = True
    align: bool = True
    seed: int = 0
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    teacher_ckpt: str | None = None
    teacher_depth: int = 2
    teacher_steps: int = 100
    checkpoint_every: int | None = None  # epochs; None: every epoch

    def __post_init__(self):
        if self.warmup_epochs >= self.epochs:
            raise ValueError(
                f"warmup_epochs ({self.warmup_epochs}) must be < epochs ({self.epochs})"
            )
        if not (0.0 < self.mask_ratio < 1.0):
            raise ValueError(f"mask_ratio must lie in (0, 1), got {self.mask_ratio}")
        if self.mask_strategy not in MASK_STRATEGIES:
            raise ValueError(
                f"mask_strategy must be one of {MASK_STRATEGIES}, got {self.mask_strategy!r}"
            )
        if self.augmentation not in AUGMENTATION_LEVELS:
            raise ValueError(
                f"augmentation must be one of {AUGMENTATION_LEVELS}, "
                f"got {self.augmentation!r}"
            )
        if self.target_kind not in TARGET_KINDS:
            raise ValueError(
                f"target_kind must be one of {TARGET_KINDS}, got {self.target_kind!r}"
            )
        if self.align and not self.guidance:
            raise ValueError("align loss requires the guidance branch")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be positive")


@dataclass
class FinetuneConfig:
    lr: float = 2e-4
    batch_size: int = 32
    epochs: int = 10
    init: str | None = None  # pretrain checkpoint path; None: from scratch
    augmentation: str = "medium"
    seed: int = 0
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    recognizer: RecognizerConfig = field(default_factory=RecognizerConfig)
    eval_subset: int = 128  # images scored per epoch for the accuracy log

    def __post_init__(self):
        if self.init is not None and not os.path.isfile(self.init):
            raise ValueError(f"init checkpoint does not exist: {self.init}")
        if self.augmentation not in AUGMENTATION_LEVELS:
            raise ValueError(
                f"augmentation must be one of {AUGMENTATION_LEVELS}, "
                f"got {self.augmentation!r}"
            )
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be positive")


# ---------------------------------------------------------------------------
# Optimizer helpers
# ---------------------------------------------------------------------------

def _adamw(model: torch.nn.Module, lr: float) -> torch.optim.AdamW:
    decay, no_decay = [], []
    for name, p in model.named_parameters():
        if not p.requires_grad:
            continue
        (no_decay if p.ndim < 2 else decay).append(p)
    return torch.optim.AdamW(
        [{"params": decay, "weight_decay": WEIGHT_DECAY},
         {"params": no_decay, "weight_decay": 0.0}],
        lr=lr, betas=ADAMW_BETAS, eps=ADAMW_EPS,
    )


def _set_lr(opt: torch.optim.Optimizer, lr: float) -> None:
    for group in opt.param_groups:
        group["lr"] = lr


def _fmt(v: float) -> str:
    return f"{v:.10g}"


def _augment_batch(images: np.ndarray, idx: np.ndarray,
                   policy: AugmentationPolicy, seeds: list[int]) -> torch.Tensor:
    views = [apply_policy(images[i], policy, s) for i, s in zip(idx, seeds)]
    return torch.from_numpy(np.stack(views))


def _make_plan(cfg: PretrainConfig, seed: int):
    n = cfg.encoder.n_patches
    if cfg.mask_strategy == "random":
        return plan_random_mask(n, cfg.mask_ratio, seed)
    return plan_block_mask(cfg.encoder.grid_rows, cfg.encoder.grid_cols,
                           cfg.mask_ratio, seed)


# ---------------------------------------------------------------------------
# Teacher bootstrap
# ---------------------------------------------------------------------------

def bootstrap_teacher(images: np.ndarray, cfg: PretrainConfig, out_dir: str) -> Encoder:
    """Train a short single-branch masked autoencoder and freeze its encoder.

    Used as the feature-target provider when no teacher checkpoint is given.
    Pixel targets, no guidance branch, constant peak learning rate.
    """
    seed = derive_seed(cfg.seed, "teacher")
    torch.manual_seed(seed)
    enc_cfg = EncoderConfig(
        depth=cfg.teacher_depth, d=cfg.encoder.d, heads=cfg.encoder.heads,
        mlp_ratio=cfg.encoder.mlp_ratio, patch_size=cfg.encoder.patch_size,
        image_h=cfg.encoder.image_h, image_w=cfg.encoder.image_w,
    )
    dec_cfg = DecoderConfig(depth=1, order="SA_CA_FFN", heads=cfg.encoder.heads,
                            mlp_ratio=cfg.encoder.mlp_ratio)
    provider = make_target_provider("pixel", enc_cfg)
    model = MaskedPretrainer(enc_cfg, dec_cfg, provider.target_dim, with_guidance=False)
    opt = _adamw(model, cfg.lr_peak)
    policy = AugmentationPolicy.from_level(cfg.augmentation,
                                           seed=derive_seed(seed, "policy"))
    n = len(images)
    order_rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "order")))
    idx_stream = []
    while len(idx_stream) < cfg.teacher_steps * cfg.batch_size:
        idx_stream.extend(order_rng.permutation(n).tolist())
    model.train()
    for step in range(cfg.teacher_steps):
        idx = np.array(idx_stream[step * cfg.batch_size:(step + 1) * cfg.batch_size])
        views = _augment_batch(images, idx, policy,
                               [derive_seed(seed, "view", step, j) for j in range(len(idx))])
        plan = _make_plan(cfg, derive_seed(seed, "mask", step))
        out = model(views, plan)
        targets = provider.make_targets(views, plan)
        loss = recon_loss(out["predictions"], targets, plan)
        opt.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(model.parameters(), GRAD_CLIP)
        opt.step()
    model.eval()
    teacher = model.encoder
    for p in teacher.parameters():
        p.requires_grad_(False)
    save_encoder(os.path.join(out_dir, "teacher.ckpt"), teacher,
                 extra={"steps": cfg.teacher_steps, "seed": seed})
    return teacher


# ---------------------------------------------------------------------------
# Pre-training
# ---------------------------------------------------------------------------

def pretrain(corpus_dir: str, cfg: PretrainConfig, out_dir: str) -> dict:
    """Run masked pre-training over a corpus; returns a summary dict.

    Per step: build two augmented views per image, mask and encode view one,
    encode view two unmasked through the shared encoder, decode with
    guidance cross-attention, and take one AdamW step on reconstruction +
    alignment. Writes ``checkpoint.ckpt``, ``pretrain_log.csv`` and (when
    bootstrapped) ``teacher.ckpt`` under ``out_dir``.
    """
    os.makedirs(out_dir, exist_ok=True)
    images, _ = load_corpus(corpus_dir)

    teacher = None
    if cfg.target_kind == "teacher_feature":
        if cfg.teacher_ckpt is not None:
            teacher, _ = load_encoder(cfg.teacher_ckpt)
        else:
            teacher = bootstrap_teacher(images, cfg, out_dir)

    torch.manual_seed(cfg.seed)
    provider = make_target_provider(cfg.target_kind, cfg.encoder, teacher=teacher,
                                    seed=derive_seed(cfg.seed, "targets"))
    model = MaskedPretrainer(cfg.encoder, cfg.decoder, provider.target_dim,
                             with_guidance=cfg.guidance)
    opt = _adamw(model, cfg.lr_peak)
    policy = AugmentationPolicy.from_level(cfg.augmentation,
                                           seed=derive_seed(cfg.seed, "policy"))

    n = len(images)
    steps_per_epoch = math.ceil(n / cfg.batch_size)
    total_steps = cfg.epochs * steps_per_epoch
    warmup_steps = cfg.warmup_epochs * steps_per_epoch

    ckpt_path = os.path.join(out_dir, "checkpoint.ckpt")
    log_rows = [PRETRAIN_LOG_HEADER]
    ckpt_every = cfg.checkpoint_every or 1

    model.train()
    step = 0
    for epoch in range(cfg.epochs):
        order_rng = np.random.Generator(
            np.random.PCG64(derive_seed(cfg.seed, "order", epoch)))
        order = order_rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            masked_views = _augment_batch(
                images, idx, policy,
                [derive_seed(cfg.seed, "view", step, j, 0) for j in range(len(idx))])
            guidance_views = None
            if cfg.guidance:
                guidance_views = _augment_batch(
                    images, idx, policy,
                    [derive_seed(cfg.seed, "view", step, j, 1) for j in range(len(idx))])
            plan = _make_plan(cfg, derive_seed(cfg.seed, "mask", step))

            out = model(masked_views, plan, guidance_views)
            targets = provider.make_targets(masked_views, plan)
            l_recon = recon_loss(out["predictions"], targets, plan)
            if cfg.align:
                l_align = align_loss(out["cls_masked"], out["cls_guidance"])
            else:
                l_align = torch.zeros((), dtype=l_recon.dtype)
            total = l_recon + l_align

            if not torch.isfinite(total):
                snap = os.path.join(out_dir, "diagnostic_snapshot.ckpt")
                save_pretrainer(snap, model, step, cfg.seed,
                                extra={"diverged_at_step": step})
                with open(os.path.join(out_dir, "diagnostic.json"), "w") as fh:
                    json.dump({"step": step, "recon": float(l_recon),
                               "align": float(l_align)}, fh)
                raise TrainingDivergedError(
                    f"non-finite loss at step {step}; snapshot at {snap}")

            lr = lr_at(step, total_steps, warmup_steps, cfg.lr_peak)
            _set_lr(opt, lr)
            opt.zero_grad()
            total.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), GRAD_CLIP)
            opt.step()

            log_rows.append(",".join([
                str(step), _fmt(float(l_recon)), _fmt(float(l_align)),
                _fmt(float(total)), _fmt(lr),
            ]))
            step += 1
        if (epoch + 1) % ckpt_every == 0 or epoch + 1 == cfg.epochs:
            save_pretrainer(ckpt_path, model, step, cfg.seed)

    log_path = os.path.join(out_dir, "pretrain_log.csv")
    with open(log_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(log_rows) + "\n")
    return {
        "checkpoint": ckpt_path,
        "log": log_path,
        "steps": step,
        "final_total": float(total),
    }


# ---------------------------------------------------------------------------
# Fine-tuning
# ---------------------------------------------------------------------------

def _validate_transcripts(transcripts: list[str], charset: Charset, max_len: int) -> None:
    for t in transcripts:
        if len(t) > max_len:
            raise CorpusValidationError(
                f"transcript {t!r} has length {len(t)} > max_len {max_len}")
        try:
            charset.encode(t)
        except ValueError as e:
            raise CorpusValidationError(str(e)) from None


def _batch_tokens(transcripts: list[str], charset: Charset, max_len: int,
                  device=None) -> tuple[torch.Tensor, torch.Tensor]:
    """Teacher-forcing inputs ([BOS] + chars) and targets (chars + [EOS])."""
    width = max_len + 1
    inputs = torch.full((len(transcripts), width), Charset.PAD, dtype=torch.long)
    targets = torch.full((len(transcripts), width), Charset.PAD, dtype=torch.long)
    for i, t in enumerate(transcripts):
        ids = charset.encode(t)
        inputs[i, 0] = Charset.BOS
        inputs[i, 1:1 + len(ids)] = torch.tensor(ids)
        targets[i, :len(ids)] = torch.tensor(ids)
        targets[i, len(ids)] = Charset.EOS
    return inputs, targets


def recognition_loss(model: Recognizer, images: torch.Tensor,
                     transcripts: list[str]) -> torch.Tensor:
    """Teacher-forced cross-entropy per character; [PAD] positions excluded."""
    charset = model.charset
    inputs, targets = _batch_tokens(transcripts, charset, model.rec_cfg.max_len)
    memory = model.encode_image(images)
    logits = model.forward_logits(memory, inputs)
    return F.cross_entropy(logits.reshape(-1, charset.size), targets.reshape(-1),
                           ignore_index=Charset.PAD)


def init_encoder_from_pretrain(model: Recognizer, ckpt_path: str) -> list[str]:
    """Copy encoder weights verbatim from a pre-training checkpoint."""
    arrays, meta = load_checkpoint(ckpt_path)
    if meta.get("kind") not in ("pretrain", "encoder"):
        raise CheckpointError(
            f"{ckpt_path} is a {meta.get('kind')!r} checkpoint; need pretrain/encoder")
    if EncoderConfig.from_dict(meta["encoder"]) != model.enc_cfg:
        raise ValueError(
            f"encoder config in {ckpt_path} does not match the recognizer's")
    if meta["kind"] == "pretrain":
        sub = {k[len("encoder."):]: v for k, v in arrays.items()
               if k.startswith("encoder.")}
    else:
        sub = dict(arrays)
    load_state_arrays(model.encoder, sub)
    return sorted(sub)


def finetune(corpus_dir: str, cfg: FinetuneConfig, out_dir: str) -> dict:
    """Train the recognizer with teacher forcing; returns a summary dict.

    Writes ``recognizer.ckpt`` and ``finetune_log.csv`` (epoch, mean loss,
    greedy exact-match accuracy on a fixed training subset).
    """
    os.makedirs(out_dir, exist_ok=True)
    images, transcripts = load_corpus(corpus_dir)
    charset = Charset(cfg.recognizer.charset)
    _validate_transcripts(transcripts, charset, cfg.recognizer.max_len)

    torch.manual_seed(cfg.seed)
    model = Recognizer(cfg.encoder, cfg.recognizer)
    if cfg.init is not None:
        init_encoder_from_pretrain(model, cfg.init)
    opt = _adamw(model, cfg.lr)
    policy = AugmentationPolicy.from_level(cfg.augmentation,
                                           seed=derive_seed(cfg.seed, "policy"))

    n = len(images)
    eval_count = min(cfg.eval_subset, n)
    eval_images = torch.from_numpy(images[:eval_count])
    eval_gt = transcripts[:eval_count]

    log_rows = ["epoch,loss,train_accuracy"]
    step = 0
    for epoch in range(cfg.epochs):
        model.train()
        order_rng = np.random.Generator(
            np.random.PCG64(derive_seed(cfg.seed, "order", epoch)))
        order = order_rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            views = _augment_batch(
                images, idx, policy,
                [derive_seed(cfg.seed, "view", step, j) for j in range(len(idx))])
            batch_txt = [transcripts[i] for i in idx]
            loss = recognition_loss(model, views, batch_txt)
            if not torch.isfinite(loss):
                raise TrainingDivergedError(f"non-finite loss at step {step}")
            opt.zero_grad()
            loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), GRAD_CLIP)
            opt.step()
            epoch_losses.append(float(loss))
            step += 1
        model.eval()
        preds = model.greedy_decode(eval_images)
        acc = sum(p == g for p, g in zip(preds, eval_gt)) / eval_count
        log_rows.append(
            f"{epoch},{_fmt(sum(epoch_losses) / len(epoch_losses))},{_fmt(acc)}")

    ckpt_path = os.path.join(out_dir, "recognizer.ckpt")
    save_recognizer(ckpt_path, model, step, cfg.seed)
    log_path = os.path.join(out_dir, "finetune_log.csv")
    with open(log_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(log_rows) + "\n")
    return {
        "checkpoint": ckpt_path,
        "log": log_path,
        "steps": step,
        "final_train_accuracy": acc,
    }
