"""Transformer components: shared encoder, guided decoder, text recognizer."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict, field

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .corpus import CHARSET
from .patching import MaskPlan

DECODER_ORDERS = ("SA_CA_FFN", "CA_SA_FFN")


# ---------------------------------------------------------------------------
# Attention
# ---------------------------------------------------------------------------

def attention(q: torch.Tensor, k: torch.Tensor, v: torch.Tensor,
              return_weights: bool = False, causal: bool = False):
    """Scaled dot-product attention: softmax(q k^T / sqrt(d)) v.

    Accepts (..., L, d) tensors with matching batch dims. The fast path
    defers to torch's fused kernel; ``return_weights=True`` computes the
    softmax explicitly and also returns the attention matrix.
    """
    if q.shape[-1] != k.shape[-1]:
        raise ValueError(f"q/k feature dims differ: {q.shape[-1]} vs {k.shape[-1]}")
    if k.shape[-2] != v.shape[-2]:
        raise ValueError(f"k/v row counts differ: {k.shape[-2]} vs {v.shape[-2]}")
    if not return_weights:
        squeeze = q.dim() == 2
        if squeeze:
            q, k, v = q[None], k[None], v[None]
        out = F.scaled_dot_product_attention(q, k, v, is_causal=causal)
        return out[0] if squeeze else out
    scores = q @ k.transpose(-2, -1) / math.sqrt(q.shape[-1])
    if causal:
        lq, lk = scores.shape[-2], scores.shape[-1]
        mask = torch.ones(lq, lk, dtype=torch.bool, device=scores.device).tril()
        scores = scores.masked_fill(~mask, float("-inf"))
    weights = torch.softmax(scores, dim=-1)
    return weights @ v, weights


class SelfAttention(nn.Module):
    def __init__(self, d: int, heads: int, causal: bool = False):
        super().__init__()
        if d % heads != 0:
            raise ValueError(f"dim {d} not divisible by heads {heads}")
        self.heads = heads
        self.head_dim = d // heads
        self.causal = causal
        self.qkv = nn.Linear(d, 3 * d)
        self.proj = nn.Linear(d, d)

    def forward(self, x, capture: list | None = None):
        b, l, d = x.shape
        q, k, v = (self.qkv(x).view(b, l, 3, self.heads, self.head_dim)
                   .permute(2, 0, 3, 1, 4).unbind(0))
        if capture is None:
            out = attention(q, k, v, causal=self.causal)
        else:
            out, w = attention(q, k, v, return_weights=True, causal=self.causal)
            capture.append(w.detach())
        return self.proj(out.transpose(1, 2).reshape(b, l, d))


class CrossAttention(nn.Module):
    def __init__(self, d: int, heads: int, kv_dim: int | None = None):
        super().__init__()
        if d % heads != 0:
            raise ValueError(f"dim {d} not divisible by heads {heads}")
        self.heads = heads
        self.head_dim = d // heads
        self.q = nn.Linear(d, d)
        self.kv = nn.Linear(kv_dim if kv_dim is not None else d, 2 * d)
        self.proj = nn.Linear(d, d)

    def forward(self, x, memory):
        b, l, d = x.shape
        lm = memory.shape[1]
        q = self.q(x).view(b, l, self.heads, self.head_dim).transpose(1, 2)
        k, v = (self.kv(memory).view(b, lm, 2, self.heads, self.head_dim)
                .permute(2, 0, 3, 1, 4).unbind(0))
        out = attention(q, k, v)
        return self.proj(out.transpose(1, 2).reshape(b, l, d))


def _mlp(d: int, ratio: float) -> nn.Sequential:
    hidden = int(d * ratio)
    return nn.Sequential(nn.Linear(d, hidden), nn.GELU(), nn.Linear(hidden, d))


class EncoderBlock(nn.Module):
    """Pre-norm block: x + SA(LN(x)), then x + MLP(LN(x))."""

    def __init__(self, d: int, heads: int, mlp_ratio: float):
        super().__init__()
        self.norm1 = nn.LayerNorm(d)
        self.attn = SelfAttention(d, heads)
        self.norm2 = nn.LayerNorm(d)
        self.mlp = _mlp(d, mlp_ratio)

    def forward(self, x, capture: list | None = None):
        x = x + self.attn(self.norm1(x), capture)
        x = x + self.mlp(self.norm2(x))
        return x


# ---------------------------------------------------------------------------
# Token batches and positional tables
# ---------------------------------------------------------------------------

@dataclass
class TokenBatch:
    """A (batch, length, dim) token sequence with patch-position bookkeeping.

    ``position_ids`` maps each slot back to its patch index; the class slot
    (if present) sits at 0 with position id -1.
    """

    tokens: torch.Tensor
    has_cls: bool
    position_ids: torch.Tensor  # (L,) long

    def __post_init__(self):
        if self.tokens.dim() != 3:
            raise ValueError(f"tokens must be (B, L, d), got {tuple(self.tokens.shape)}")
        if self.position_ids.shape[0] != self.tokens.shape[1]:
            raise ValueError("position_ids length must match token count")
        if self.has_cls and int(self.position_ids[0]) != -1:
            raise ValueError("class slot must sit at index 0 with position id -1")

    @property
    def cls_feature(self) -> torch.Tensor:
        if not self.has_cls:
            raise ValueError("token batch has no class slot")
        return self.tokens[:, 0]

    @property
    def patch_tokens(self) -> torch.Tensor:
        return self.tokens[:, 1:] if self.has_cls else self.tokens


def sincos_position_table(d: int, rows: int, cols: int) -> np.ndarray:
    """Fixed 2-D sine/cosine position table, (rows*cols, d), row-major."""
    if d % 4 != 0:
        raise ValueError(f"position table needs dim divisible by 4, got {d}")

    def axis_table(positions, dim):
        omega = 1.0 / 10000 ** (np.arange(dim // 2, dtype=np.float64) / (dim / 2.0))
        angles = np.outer(positions, omega)
        return np.concatenate([np.sin(angles), np.cos(angles)], axis=1)

    rr, cc = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    row_emb = axis_table(rr.reshape(-1), d // 2)
    col_emb = axis_table(cc.reshape(-1), d // 2)
    return np.concatenate([row_emb, col_emb], axis=1)


def patchify_tensor(images: torch.Tensor, patch_size: int) -> torch.Tensor:
    """(B, H, W, C) images -> (B, N, P*P*C) flattened patches, row-major.

    Matches :func:`guidedmim.patching.patchify` element for element.
    """
    b, h, w, c = images.shape
    p = patch_size
    if h % p != 0 or w % p != 0:
        raise ValueError(f"image dimensions {h}x{w} not divisible by patch {p}")
    x = images.view(b, h // p, p, w // p, p, c)
    x = x.permute(0, 1, 3, 2, 4, 5)
    return x.reshape(b, (h // p) * (w // p), p * p * c)


# ---------------------------------------------------------------------------
# Configs
# ---------------------------------------------------------------------------

@dataclass
class EncoderConfig:
    depth: int = 4
    d: int = 64
    heads: int = 4
    mlp_ratio: float = 4.0
    patch_size: int = 4
    image_h: int = 32
    image_w: int = 128

    def __post_init__(self):
        if self.d % self.heads != 0:
            raise ValueError(f"embed dim {self.d} not divisible by heads {self.heads}")
        if self.image_h % self.patch_size or self.image_w % self.patch_size:
            raise ValueError("image dimensions must be divisible by patch size")

    @property
    def grid_rows(self) -> int:
        return self.image_h // self.patch_size

    @property
    def grid_cols(self) -> int:
        return self.image_w // self.patch_size

    @property
    def n_patches(self) -> int:
        return self.grid_rows * self.grid_cols

    @property
    def patch_dim(self) -> int:
        return self.patch_size * self.patch_size * 3

    @classmethod
    def paper_scale(cls) -> "EncoderConfig":
        return cls(depth=12, d=384, heads=6)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EncoderConfig":
        return cls(**d)


@dataclass
class DecoderConfig:
    depth: int = 2
    order: str = "SA_CA_FFN"
    d_dec: int | None = None  # None: match encoder width
    heads: int = 4
    mlp_ratio: float = 4.0

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("decoder depth must be >= 1")
        if self.order not in DECODER_ORDERS:
            raise ValueError(f"order must be one of {DECODER_ORDERS}, got {self.order!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DecoderConfig":
        return cls(**d)


@dataclass
class RecognizerConfig:
    dec_depth: int = 2
    d_rec: int = 128
    heads: int = 4
    mlp_ratio: float = 4.0
    max_len: int = 25
    charset: str = CHARSET

    def __post_init__(self):
        if self.d_rec % self.heads != 0:
            raise ValueError(f"d_rec {self.d_rec} not divisible by heads {self.heads}")
        if self.max_len < 1:
            raise ValueError("max_len must be positive")

    @classmethod
    def paper_scale(cls) -> "RecognizerConfig":
        return cls(dec_depth=6, d_rec=512, heads=8)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RecognizerConfig":
        return cls(**d)


# ---------------------------------------------------------------------------
# Encoder
# ---------------------------------------------------------------------------

def _init_transformer(module: nn.Module) -> None:
    for m in module.modules():
        if isinstance(m, nn.Linear):
            nn.init.xavier_uniform_(m.weight)
            if m.bias is not None:
                nn.init.zeros_(m.bias)
        elif isinstance(m, nn.LayerNorm):
            nn.init.ones_(m.weight)
            nn.init.zeros_(m.bias)


class Encoder(nn.Module):
    """ViT encoder over patch tokens plus a learned class token.

    With a mask plan, only visible patches (and the class token) enter the
    blocks; the guidance pass runs the same module with no plan.
    """

    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        self.cfg = cfg
        self.patch_embed = nn.Linear(cfg.patch_dim, cfg.d)
        self.cls_token = nn.Parameter(torch.zeros(1, 1, cfg.d))
        pos = sincos_position_table(cfg.d, cfg.grid_rows, cfg.grid_cols)
        self.register_buffer(
            "pos_table", torch.from_numpy(pos).float().unsqueeze(0), persistent=False
        )
        self.blocks = nn.ModuleList(
            [EncoderBlock(cfg.d, cfg.heads, cfg.mlp_ratio) for _ in range(cfg.depth)]
        )
        self.norm = nn.LayerNorm(cfg.d)
        _init_transformer(self)
        nn.init.normal_(self.cls_token, std=0.02)

    def forward(self, images: torch.Tensor, plan: MaskPlan | None = None,
                capture: list | None = None) -> TokenBatch:
        cfg = self.cfg
        if images.dim() != 4 or images.shape[1:] != (cfg.image_h, cfg.image_w, 3):
            raise ValueError(
                f"expected (B, {cfg.image_h}, {cfg.image_w}, 3) images, "
                f"got {tuple(images.shape)}"
            )
        patches = patchify_tensor(images, cfg.patch_size)
        x = self.patch_embed(patches) + self.pos_table.to(patches.dtype)
        if plan is not None:
            if plan.n_patches != cfg.n_patches:
                raise ValueError(
                    f"plan covers {plan.n_patches} patches, encoder has {cfg.n_patches}"
                )
            keep = torch.as_tensor(plan.visible, dtype=torch.long, device=x.device)
            x = x[:, keep]
            position_ids = torch.cat([torch.tensor([-1]), keep.cpu()])
        else:
            position_ids = torch.cat(
                [torch.tensor([-1]), torch.arange(cfg.n_patches)]
            )
        cls = self.cls_token.to(x.dtype).expand(x.shape[0], -1, -1)
        x = torch.cat([cls, x], dim=1)
        for blk in self.blocks:
            x = blk(x, capture)
        x = self.norm(x)
        return TokenBatch(tokens=x, has_cls=True, position_ids=position_ids)


# ---------------------------------------------------------------------------
# Guided decoder
# ---------------------------------------------------------------------------

def assemble_decoder_input(encoded: TokenBatch, plan: MaskPlan,
                           mask_token: torch.Tensor,
                           position_table: torch.Tensor) -> TokenBatch:
    """Re-insert mask tokens at their patch positions around encoder outputs.

    Output length is 1 + N: the class slot, encoder outputs at visible
    positions, and (mask token + position embedding) at masked positions.
    """
    if not encoded.has_cls:
        raise ValueError("encoded batch must carry a class slot")
    visible = tuple(int(i) for i in encoded.position_ids[1:].tolist())
    if visible != plan.visible:
        raise ValueError("mask plan is inconsistent with encoded token positions")
    n = plan.n_patches
    if position_table.shape[-2] != n:
        raise ValueError("position table does not cover the patch grid")

    b, _, d = encoded.tokens.shape
    full = encoded.tokens.new_zeros((b, 1 + n, d))
    full[:, 0] = encoded.tokens[:, 0]
    if visible:
        vis_idx = torch.as_tensor(visible, dtype=torch.long)
        full[:, 1 + vis_idx] = encoded.tokens[:, 1:]
    if plan.masked:
        mask_idx = torch.as_tensor(plan.masked, dtype=torch.long)
        pos = position_table.reshape(n, d)[mask_idx].to(encoded.tokens.dtype)
        full[:, 1 + mask_idx] = mask_token.to(encoded.tokens.dtype) + pos
    position_ids = torch.cat([torch.tensor([-1]), torch.arange(n)])
    return TokenBatch(tokens=full, has_cls=True, position_ids=position_ids)


class GuidedBlock(nn.Module):
    """Decoder block mixing self-attention, optional cross-attention, and MLP.

    ``order`` picks whether self-attention runs before or after the
    cross-attention onto the guidance sequence.
    """

    def __init__(self, d: int, heads: int, mlp_ratio: float, order: str,
                 with_cross: bool, kv_dim: int):
        super().__init__()
        if order not in DECODER_ORDERS:
            raise ValueError(f"unknown block order {order!r}")
        self.order = order
        self.norm_sa = nn.LayerNorm(d)
        self.sa = SelfAttention(d, heads)
        self.with_cross = with_cross
        if with_cross:
            self.norm_ca = nn.LayerNorm(d)
            self.ca = CrossAttention(d, heads, kv_dim=kv_dim)
        self.norm_mlp = nn.LayerNorm(d)
        self.mlp = _mlp(d, mlp_ratio)

    def forward(self, x, memory=None):
        if self.order == "SA_CA_FFN":
            x = x + self.sa(self.norm_sa(x))
            if self.with_cross:
                x = x + self.ca(self.norm_ca(x), memory)
        else:
            if self.with_cross:
                x = x + self.ca(self.norm_ca(x), memory)
            x = x + self.sa(self.norm_sa(x))
        x = x + self.mlp(self.norm_mlp(x))
        return x


class GuidedDecoder(nn.Module):
    """Reconstruction decoder; cross-attends onto the guidance branch tokens."""

    def __init__(self, cfg: DecoderConfig, enc_dim: int, with_cross: bool = True):
        super().__init__()
        self.cfg = cfg
        self.with_cross = with_cross
        self.d_dec = cfg.d_dec if cfg.d_dec is not None else enc_dim
        self.input_proj = (
            nn.Linear(enc_dim, self.d_dec) if self.d_dec != enc_dim else nn.Identity()
        )
        self.blocks = nn.ModuleList([
            GuidedBlock(self.d_dec, cfg.heads, cfg.mlp_ratio, cfg.order,
                        with_cross, kv_dim=enc_dim)
            for _ in range(cfg.depth)
        ])
        self.norm = nn.LayerNorm(self.d_dec)
        _init_transformer(self)

    def forward(self, tokens: torch.Tensor, guidance: torch.Tensor | None = None
                ) -> torch.Tensor:
        if self.with_cross:
            if guidance is None:
                raise ValueError("decoder was built with cross-attention but got no guidance")
            if guidance.shape[0] != tokens.shape[0]:
                raise ValueError("guidance batch size does not match decoder input")
        x = self.input_proj(tokens)
        for blk in self.blocks:
            x = blk(x, guidance)
        return self.norm(x)


# ---------------------------------------------------------------------------
# Pre-training model: shared encoder + guided decoder + prediction head
# ---------------------------------------------------------------------------

class MaskedPretrainer(nn.Module):
    """Dual-branch masked reconstruction model with a shared encoder.

    The masked branch encodes visible patches only; the guidance branch
    encodes a differently-augmented view of the same text unmasked, through
    the very same encoder object, and feeds the decoder's cross-attention.
    """

    def __init__(self, enc_cfg: EncoderConfig, dec_cfg: DecoderConfig,
                 target_dim: int, with_guidance: bool = True):
        super().__init__()
        self.enc_cfg = enc_cfg
        self.dec_cfg = dec_cfg
        self.target_dim = target_dim
        self.with_guidance = with_guidance
        self.encoder = Encoder(enc_cfg)
        self.mask_token = nn.Parameter(torch.zeros(enc_cfg.d))
        nn.init.normal_(self.mask_token, std=0.02)
        self.decoder = GuidedDecoder(dec_cfg, enc_cfg.d, with_cross=with_guidance)
        self.head = nn.Linear(self.decoder.d_dec, target_dim)
        nn.init.xavier_uniform_(self.head.weight)
        nn.init.zeros_(self.head.bias)

    def encode_masked_branch(self, images: torch.Tensor,
                             plan: MaskPlan | None = None) -> TokenBatch:
        return self.encoder(images, plan)

    def encode_guidance(self, images: torch.Tensor) -> TokenBatch:
        return self.encoder(images)

    def forward(self, masked_images: torch.Tensor, plan: MaskPlan,
                guidance_images: torch.Tensor | None = None):
        encoded = self.encode_masked_branch(masked_images, plan)
        guidance = None
        if self.with_guidance:
            if guidance_images is None:
                raise ValueError("guidance images required when guidance is enabled")
            guidance = self.encode_guidance(guidance_images)
        full = assemble_decoder_input(encoded, plan, self.mask_token,
                                      self.encoder.pos_table)
        decoded = self.decoder(full.tokens,
                               guidance.tokens if guidance is not None else None)
        predictions = self.head(decoded)
        return {
            "predictions": predictions,                    # (B, 1+N, target_dim)
            "cls_masked": encoded.cls_feature,             # (B, d)
            "cls_guidance": guidance.cls_feature if guidance is not None else None,
            "decoded": decoded,
        }


# ---------------------------------------------------------------------------
# Downstream recognizer
# ---------------------------------------------------------------------------

class Charset:
    """Character inventory plus the [PAD]/[BOS]/[EOS] specials."""

    PAD, BOS, EOS = 0, 1, 2
    N_SPECIALS = 3

    def __init__(self, chars: str = CHARSET):
        if len(set(chars)) != len(chars):
            raise ValueError("charset contains duplicate characters")
        self.chars = chars
        self._to_id = {c: i + self.N_SPECIALS for i, c in enumerate(chars)}

    @property
    def size(self) -> int:
        return len(self.chars) + self.N_SPECIALS

    def encode(self, text: str) -> list[int]:
        try:
            return [self._to_id[c] for c in text]
        except KeyError as e:
            raise ValueError(f"character {e.args[0]!r} not in charset") from None

    def decode(self, ids) -> str:
        out = []
        for i in ids:
            i = int(i)
            if i == self.EOS:
                break
            if i >= self.N_SPECIALS:
                out.append(self.chars[i - self.N_SPECIALS])
        return "".join(out)


class RecognizerBlock(nn.Module):
    def __init__(self, d: int, heads: int, mlp_ratio: float, kv_dim: int):
        super().__init__()
        self.norm_sa = nn.LayerNorm(d)
        self.sa = SelfAttention(d, heads, causal=True)
        self.norm_ca = nn.LayerNorm(d)
        self.ca = CrossAttention(d, heads, kv_dim=kv_dim)
        self.norm_mlp = nn.LayerNorm(d)
        self.mlp = _mlp(d, mlp_ratio)

    def forward(self, x, memory):
        x = x + self.sa(self.norm_sa(x))
        x = x + self.ca(self.norm_ca(x), memory)
        x = x + self.mlp(self.norm_mlp(x))
        return x


class Recognizer(nn.Module):
    """ViT encoder + autoregressive character decoder."""

    def __init__(self, enc_cfg: EncoderConfig, rec_cfg: RecognizerConfig):
        super().__init__()
        self.enc_cfg = enc_cfg
        self.rec_cfg = rec_cfg
        self.charset = Charset(rec_cfg.charset)
        self.encoder = Encoder(enc_cfg)
        d = rec_cfg.d_rec
        self.char_embed = nn.Embedding(self.charset.size, d)
        self.step_pos = nn.Parameter(torch.zeros(1, rec_cfg.max_len + 1, d))
        self.blocks = nn.ModuleList([
            RecognizerBlock(d, rec_cfg.heads, rec_cfg.mlp_ratio, kv_dim=enc_cfg.d)
            for _ in range(rec_cfg.dec_depth)
        ])
        self.norm = nn.LayerNorm(d)
        self.logits_head = nn.Linear(d, self.charset.size)
        _init_transformer(self.blocks)
        _init_transformer(self.norm)
        nn.init.xavier_uniform_(self.logits_head.weight)
        nn.init.zeros_(self.logits_head.bias)
        nn.init.normal_(self.char_embed.weight, std=0.02)
        nn.init.normal_(self.step_pos, std=0.02)

    def encode_image(self, images: torch.Tensor) -> torch.Tensor:
        return self.encoder(images).tokens

    def forward_logits(self, memory: torch.Tensor, token_ids: torch.Tensor
                       ) -> torch.Tensor:
        t = token_ids.shape[1]
        if t > self.rec_cfg.max_len + 1:
            raise ValueError(f"sequence length {t} exceeds decoder capacity")
        x = self.char_embed(token_ids) + self.step_pos[:, :t].to(memory.dtype)
        for blk in self.blocks:
            x = blk(x, memory)
        return self.logits_head(self.norm(x))

    @torch.no_grad()
    def greedy_decode(self, images: torch.Tensor, max_len: int | None = None
                      ) -> list[str]:
        """Decode from [BOS] until [EOS] or the step limit, batch-greedy."""
        max_len = self.rec_cfg.max_len if max_len is None else max_len
        memory = self.encode_image(images)
        b = images.shape[0]
        ids = torch.full((b, 1), Charset.BOS, dtype=torch.long, device=images.device)
        done = torch.zeros(b, dtype=torch.bool, device=images.device)
        for _ in range(max_len):
            logits = self.forward_logits(memory, ids)
            nxt = logits[:, -1].argmax(dim=-1)
            nxt = torch.where(done, torch.full_like(nxt, Charset.PAD), nxt)
            done = done | (nxt == Charset.EOS)
            ids = torch.cat([ids, nxt[:, None]], dim=1)
            if bool(done.all()):
                break
        return [self.charset.decode(row[1:].tolist()) for row in ids]
