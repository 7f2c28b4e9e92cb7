"""Synthetic text-image corpus: rendering, augmentation, view pairs.

Everything here is a pure function of explicit integer seeds, so corpora,
augmented views, and view pairs are byte-reproducible. Images are 32x128
RGB float arrays in [0, 1]; glyphs come from small bitmap fonts embedded
below so no font assets are required.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, asdict

import numpy as np
from PIL import Image

IMAGE_H = 32
IMAGE_W = 128
IMAGE_C = 3
MAX_TRANSCRIPT_LEN = 25

CHARSET = "abcdefghijklmnopqrstuvwxyz0123456789"


class CharsetError(ValueError):
    """A transcript contains a character the renderer has no glyph for."""


def derive_seed(*parts) -> int:
    """Stable 64-bit child seed from a tuple of ints/strings."""
    entropy = [int.from_bytes(str(p).encode(), "little") % (2**63) for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


# ---------------------------------------------------------------------------
# Embedded bitmap fonts
# ---------------------------------------------------------------------------
# Two base pixel fonts (5x7 and 3x5) covering a-z and 0-9; letter glyphs use
# capital-style shapes, which stay legible at small scales. Derived bold and
# slanted variants bring the family to four fonts.

_FONT_5X7 = {
    "a": (".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"),
    "b": ("####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."),
    "c": (".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."),
    "d": ("####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."),
    "e": ("#####", "#....", "#....", "####.", "#....", "#....", "#####"),
    "f": ("#####", "#....", "#....", "####.", "#....", "#....", "#...."),
    "g": (".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".###."),
    "h": ("#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"),
    "i": (".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "j": ("..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."),
    "k": ("#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"),
    "l": ("#....", "#....", "#....", "#....", "#....", "#....", "#####"),
    "m": ("#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"),
    "n": ("#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", "#...#"),
    "o": (".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."),
    "p": ("####.", "#...#", "#...#", "####.", "#....", "#....", "#...."),
    "q": (".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"),
    "r": ("####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"),
    "s": (".####", "#....", "#....", ".###.", "....#", "....#", "####."),
    "t": ("#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."),
    "u": ("#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."),
    "v": ("#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."),
    "w": ("#...#", "#...#", "#...#", "#.#.#", "#.#.#", "##.##", "#...#"),
    "x": ("#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"),
    "y": ("#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."),
    "z": ("#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"),
    "0": (".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."),
    "1": ("..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "2": (".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"),
    "3": (".###.", "#...#", "....#", "..##.", "....#", "#...#", ".###."),
    "4": ("...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."),
    "5": ("#####", "#....", "####.", "....#", "....#", "#...#", ".###."),
    "6": ("..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."),
    "7": ("#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."),
    "8": (".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."),
    "9": (".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."),
}

_FONT_3X5 = {
    "a": (".#.", "#.#", "###", "#.#", "#.#"),
    "b": ("##.", "#.#", "##.", "#.#", "##."),
    "c": (".##", "#..", "#..", "#..", ".##"),
    "d": ("##.", "#.#", "#.#", "#.#", "##."),
    "e": ("###", "#..", "##.", "#..", "###"),
    "f": ("###", "#..", "##.", "#..", "#.."),
    "g": (".##", "#..", "#.#", "#.#", ".##"),
    "h": ("#.#", "#.#", "###", "#.#", "#.#"),
    "i": ("###", ".#.", ".#.", ".#.", "###"),
    "j": ("..#", "..#", "..#", "#.#", ".#."),
    "k": ("#.#", "#.#", "##.", "#.#", "#.#"),
    "l": ("#..", "#..", "#..", "#..", "###"),
    "m": ("#.#", "###", "###", "#.#", "#.#"),
    "n": ("##.", "#.#", "#.#", "#.#", "#.#"),
    "o": (".#.", "#.#", "#.#", "#.#", ".#."),
    "p": ("##.", "#.#", "##.", "#..", "#.."),
    "q": (".#.", "#.#", "#.#", ".#.", "..#"),
    "r": ("##.", "#.#", "##.", "#.#", "#.#"),
    "s": (".##", "#..", ".#.", "..#", "##."),
    "t": ("###", ".#.", ".#.", ".#.", ".#."),
    "u": ("#.#", "#.#", "#.#", "#.#", "###"),
    "v": ("#.#", "#.#", "#.#", "#.#", ".#."),
    "w": ("#.#", "#.#", "###", "###", "#.#"),
    "x": ("#.#", "#.#", ".#.", "#.#", "#.#"),
    "y": ("#.#", "#.#", ".#.", ".#.", ".#."),
    "z": ("###", "..#", ".#.", "#..", "###"),
    "0": ("###", "#.#", "#.#", "#.#", "###"),
    "1": (".#.", "##.", ".#.", ".#.", "###"),
    "2": ("##.", "..#", ".#.", "#..", "###"),
    "3": ("###", "..#", ".##", "..#", "###"),
    "4": ("#.#", "#.#", "###", "..#", "..#"),
    "5": ("###", "#..", "##.", "..#", "##."),
    "6": (".##", "#..", "###", "#.#", "###"),
    "7": ("###", "..#", ".#.", ".#.", ".#."),
    "8": ("###", "#.#", "###", "#.#", "###"),
    "9": ("###", "#.#", "###", "..#", "##."),
}


def _table_to_arrays(table):
    return {ch: np.array([[c == "#" for c in row] for row in rows], dtype=bool)
            for ch, rows in table.items()}


def _bold(glyphs):
    out = {}
    for ch, g in glyphs.items():
        wide = np.zeros((g.shape[0], g.shape[1] + 1), dtype=bool)
        wide[:, :-1] |= g
        wide[:, 1:] |= g
        out[ch] = wide
    return out


def _slant(glyphs):
    out = {}
    for ch, g in glyphs.items():
        h, w = g.shape
        shift = (h - 1) // 3
        wide = np.zeros((h, w + shift), dtype=bool)
        for r in range(h):
            off = (h - 1 - r) // 3
            wide[r, off:off + w] = g[r]
        out[ch] = wide
    return out


_BASE_5X7 = _table_to_arrays(_FONT_5X7)
_BASE_3X5 = _table_to_arrays(_FONT_3X5)

FONTS = (
    _BASE_5X7,          # 0: regular
    _bold(_BASE_5X7),   # 1: bold
    _BASE_3X5,          # 2: compact
    _slant(_BASE_5X7),  # 3: slanted
)
N_FONTS = len(FONTS)
N_BACKGROUNDS = 4  # solid, horizontal / vertical / diagonal gradient


def validate_transcript(transcript: str) -> None:
    if not transcript:
        raise CharsetError("transcript must be non-empty")
    if len(transcript) > MAX_TRANSCRIPT_LEN:
        raise CharsetError(
            f"transcript length {len(transcript)} exceeds maximum {MAX_TRANSCRIPT_LEN}"
        )
    for ch in transcript:
        if ch not in CHARSET:
            raise CharsetError(
                f"unsupported character {ch!r} (U+{ord(ch):04X}) in transcript"
            )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TextSample:
    """A rendered text image with its transcript and provenance."""

    image: np.ndarray  # (32, 128, 3) float32 in [0, 1]
    transcript: str
    seed: int
    font_id: int
    bg_id: int


def _luminance(color: np.ndarray) -> float:
    return float(0.299 * color[0] + 0.587 * color[1] + 0.114 * color[2])


def _make_background(rng: np.random.Generator, bg_id: int) -> np.ndarray:
    c0 = rng.uniform(0.0, 1.0, 3)
    c1 = rng.uniform(0.0, 1.0, 3)
    if bg_id == 0:
        t = np.zeros((IMAGE_H, IMAGE_W, 1))
    elif bg_id == 1:
        t = np.linspace(0.0, 1.0, IMAGE_W)[None, :, None]
    elif bg_id == 2:
        t = np.linspace(0.0, 1.0, IMAGE_H)[:, None, None]
    else:
        tx = np.linspace(0.0, 1.0, IMAGE_W)[None, :]
        ty = np.linspace(0.0, 1.0, IMAGE_H)[:, None]
        t = ((tx + ty) / 2.0)[:, :, None]
    grad = c0 * (1.0 - t) + c1 * t
    return np.broadcast_to(grad, (IMAGE_H, IMAGE_W, 3)).astype(np.float64).copy()


def render_sample(
    transcript: str,
    seed: int,
    font_id: int | None = None,
    bg_id: int | None = None,
) -> TextSample:
    """Draw a transcript onto a randomized background, deterministically.

    Identical arguments always produce byte-identical images. Font, colors,
    glyph scale, kerning, and placement are drawn from the seed unless the
    style selectors pin them.
    """
    validate_transcript(transcript)
    rng = _rng(seed)
    # Draw style choices in a fixed order so pinning one does not shift others.
    font_draw = int(rng.integers(0, N_FONTS))
    bg_draw = int(rng.integers(0, N_BACKGROUNDS))
    font_id = font_draw if font_id is None else int(font_id)
    bg_id = bg_draw if bg_id is None else int(bg_id)
    if not (0 <= font_id < N_FONTS):
        raise ValueError(f"font_id must be in [0, {N_FONTS}), got {font_id}")
    if not (0 <= bg_id < N_BACKGROUNDS):
        raise ValueError(f"bg_id must be in [0, {N_BACKGROUNDS}), got {bg_id}")

    image = _make_background(rng, bg_id)
    bg_lum = _luminance(image.mean(axis=(0, 1)))
    text_color = None
    for _ in range(8):
        cand = rng.uniform(0.0, 1.0, 3)
        if abs(_luminance(cand) - bg_lum) >= 0.35:
            text_color = cand
            break
    if text_color is None:
        text_color = np.zeros(3) if bg_lum >= 0.5 else np.ones(3)

    font = FONTS[font_id]
    glyphs = [font[ch] for ch in transcript]
    glyph_h = glyphs[0].shape[0]
    kern = int(rng.integers(1, 3))

    def text_width(scale: int) -> int:
        return scale * (sum(g.shape[1] for g in glyphs) + kern * (len(glyphs) - 1))

    max_scale = max(1, (IMAGE_H - 4) // glyph_h)
    scale = 1
    for s in range(max_scale, 0, -1):
        if text_width(s) <= IMAGE_W - 2:
            scale = s
            break
    if scale > 1 and rng.random() < 0.3 and text_width(scale - 1) <= IMAGE_W - 2:
        scale -= 1

    tw, th = text_width(scale), scale * glyph_h
    if tw > IMAGE_W - 2:
        raise CharsetError(
            f"transcript {transcript!r} does not fit the {IMAGE_W}px canvas in font {font_id}"
        )
    x0 = int(rng.integers(1, IMAGE_W - tw)) if IMAGE_W - tw > 1 else 1
    y0 = int(rng.integers(1, IMAGE_H - th)) if IMAGE_H - th > 1 else 1

    x = x0
    for g in glyphs:
        mask = np.kron(g, np.ones((scale, scale), dtype=bool))
        h, w = mask.shape
        region = image[y0:y0 + h, x:x + w]
        region[mask] = text_color
        x += w + kern * scale

    image = image + rng.normal(0.0, 0.01, image.shape)
    image = np.clip(image, 0.0, 1.0).astype(np.float32)
    return TextSample(image=image, transcript=transcript, seed=seed,
                      font_id=font_id, bg_id=bg_id)


# ---------------------------------------------------------------------------
# Augmentation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AugmentationPolicy:
    """Named augmentation level with fully pinned parameter ranges.

    ``weak`` is geometry only; ``medium`` adds color jitter, distortion and
    perspective; ``strong`` keeps the same families with wider ranges.
    """

    level: str
    crop_scale: tuple[float, float]
    rotation_deg: float
    jitter: float          # max fractional brightness/contrast/saturation shift
    distortion: float      # sinusoidal warp strength
    perspective: float     # corner displacement strength
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.crop_scale
        if not (0.0 < lo <= hi <= 1.0):
            raise ValueError(f"crop_scale range invalid: {self.crop_scale}")
        for name in ("rotation_deg", "jitter", "distortion", "perspective"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @classmethod
    def from_level(cls, level: str, seed: int = 0) -> "AugmentationPolicy":
        if level not in _POLICY_TABLE:
            raise ValueError(
                f"unknown augmentation level {level!r}; expected one of "
                f"{sorted(_POLICY_TABLE)}"
            )
        return cls(level=level, seed=seed, **_POLICY_TABLE[level])


_POLICY_TABLE = {
    "weak": dict(crop_scale=(0.9, 1.0), rotation_deg=5.0, jitter=0.0,
                 distortion=0.0, perspective=0.0),
    "medium": dict(crop_scale=(0.9, 1.0), rotation_deg=5.0, jitter=0.4,
                   distortion=0.3, perspective=0.3),
    "strong": dict(crop_scale=(0.7, 1.0), rotation_deg=15.0, jitter=0.7,
                   distortion=0.6, perspective=0.5),
    "none": dict(crop_scale=(1.0, 1.0), rotation_deg=0.0, jitter=0.0,
                 distortion=0.0, perspective=0.0),
}

AUGMENTATION_LEVELS = ("weak", "medium", "strong")


def _perspective_matrix(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    # Homography mapping dst corner -> src corner (for inverse warping).
    a, b = [], []
    for (xs, ys), (xd, yd) in zip(src, dst):
        a.append([xd, yd, 1, 0, 0, 0, -xs * xd, -xs * yd])
        a.append([0, 0, 0, xd, yd, 1, -ys * xd, -ys * yd])
        b.extend([xs, ys])
    coeffs = np.linalg.solve(np.array(a, dtype=np.float64), np.array(b, dtype=np.float64))
    return np.append(coeffs, 1.0).reshape(3, 3)


def _bilinear_sample(image: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    h, w = image.shape[:2]
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[..., None]
    fy = (ys - y0)[..., None]
    top = image[y0, x0] * (1 - fx) + image[y0, x1] * fx
    bot = image[y1, x0] * (1 - fx) + image[y1, x1] * fx
    return top * (1 - fy) + bot * fy


def apply_policy(image: np.ndarray, policy: AugmentationPolicy, seed: int) -> np.ndarray:
    """Apply one random draw of the policy; output is again 32x128x3 in [0, 1].

    A policy whose ranges are all degenerate (scale 1, zero angles/strengths)
    reproduces the input exactly.
    """
    rng = _rng(derive_seed(policy.seed, seed, "augment"))
    h, w = image.shape[:2]
    img = image.astype(np.float64)

    # Geometry: crop window + rotation + perspective, composed as one
    # inverse map from output pixels to source coordinates.
    s = rng.uniform(policy.crop_scale[0], policy.crop_scale[1])
    side = np.sqrt(s)
    ch, cw = h * side, w * side
    oy = rng.uniform(0.0, h - ch)
    ox = rng.uniform(0.0, w - cw)
    corners_out = np.array([[0, 0], [w - 1.0, 0], [w - 1.0, h - 1.0], [0, h - 1.0]])
    corners_src = np.array([
        [ox, oy],
        [ox + cw - 1.0, oy],
        [ox + cw - 1.0, oy + ch - 1.0],
        [ox, oy + ch - 1.0],
    ])

    theta = np.deg2rad(rng.uniform(-policy.rotation_deg, policy.rotation_deg))
    cx, cy = (w - 1.0) / 2.0, (h - 1.0) / 2.0
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    corners_src = (corners_src - [cx, cy]) @ rot.T + [cx, cy]

    if policy.perspective > 0:
        dx = rng.uniform(-1.0, 1.0, 4) * policy.perspective * 0.1 * w
        dy = rng.uniform(-1.0, 1.0, 4) * policy.perspective * 0.1 * h
        corners_src = corners_src + np.stack([dx, dy], axis=1)

    hom = _perspective_matrix(corners_src, corners_out)
    ys_out, xs_out = np.mgrid[0:h, 0:w].astype(np.float64)
    denom = hom[2, 0] * xs_out + hom[2, 1] * ys_out + hom[2, 2]
    xs = (hom[0, 0] * xs_out + hom[0, 1] * ys_out + hom[0, 2]) / denom
    ys = (hom[1, 0] * xs_out + hom[1, 1] * ys_out + hom[1, 2]) / denom

    if policy.distortion > 0:
        amp = policy.distortion * 4.0
        fx = rng.uniform(0.5, 2.0)
        fy = rng.uniform(0.5, 2.0)
        px, py = rng.uniform(0.0, 2 * np.pi, 2)
        xs = xs + amp * np.sin(2 * np.pi * fy * ys_out / h + px)
        ys = ys + amp * 0.5 * np.sin(2 * np.pi * fx * xs_out / w + py)

    img = _bilinear_sample(img, xs, ys)

    if policy.jitter > 0:
        j = policy.jitter
        brightness = rng.uniform(1.0 - j, 1.0 + j)
        contrast = rng.uniform(1.0 - j, 1.0 + j)
        saturation = rng.uniform(1.0 - j, 1.0 + j)
        img = np.clip(img * brightness, 0.0, 1.0)
        mean = img.mean()
        img = np.clip(mean + (img - mean) * contrast, 0.0, 1.0)
        gray = (img @ np.array([0.299, 0.587, 0.114]))[..., None]
        img = np.clip(gray + (img - gray) * saturation, 0.0, 1.0)

    return np.clip(img, 0.0, 1.0).astype(np.float32)


@dataclass(frozen=True)
class ViewPair:
    """Two differently-augmented renderings of one transcript."""

    masked_branch_input: np.ndarray
    guidance_input: np.ndarray
    transcript: str


def make_view_pair(sample: TextSample, policy: AugmentationPolicy, seed: int) -> ViewPair:
    """Independently augment one sample twice; the transcript is shared."""
    view_a = apply_policy(sample.image, policy, derive_seed(seed, 0))
    view_b = apply_policy(sample.image, policy, derive_seed(seed, 1))
    return ViewPair(masked_branch_input=view_a, guidance_input=view_b,
                    transcript=sample.transcript)


# ---------------------------------------------------------------------------
# Corpus generation and loading
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusManifest:
    vocab: tuple[str, ...]
    count: int
    policy_level: str
    seed: int
    files: tuple[tuple[str, str], ...]  # (filename, transcript)

    def to_json(self) -> str:
        return json.dumps(
            {
                "vocab": list(self.vocab),
                "count": self.count,
                "policy_level": self.policy_level,
                "seed": self.seed,
                "files": [list(f) for f in self.files],
            },
            sort_keys=True,
            indent=1,
        )


def save_image(image: np.ndarray, path: str) -> None:
    arr = np.clip(np.rint(image * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(path, format="PNG")


def load_image(path: str) -> np.ndarray:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float32)
    return arr / 255.0


def generate_corpus(
    vocab: list[str],
    count: int,
    policy: AugmentationPolicy,
    seed: int,
    out_dir: str,
) -> CorpusManifest:
    """Write ``count`` rendered+augmented images, labels.tsv and manifest.json.

    Layout: ``out_dir/images/%06d.png`` plus ``out_dir/labels.tsv`` with
    tab-separated ``filename<TAB>transcript`` lines. Fully deterministic in
    (vocab, count, policy, seed).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not vocab:
        raise ValueError("vocab must be non-empty")
    for word in vocab:
        validate_transcript(word)

    images_dir = os.path.join(out_dir, "images")
    try:
        os.makedirs(images_dir, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create corpus directory {images_dir}: {e}") from e

    picks = _rng(derive_seed(seed, "vocab")).integers(0, len(vocab), size=count)
    files = []
    for i in range(count):
        transcript = vocab[int(picks[i])]
        sample = render_sample(transcript, derive_seed(seed, i, "render"))
        image = apply_policy(sample.image, policy, derive_seed(seed, i, "augment"))
        name = f"{i:06d}.png"
        try:
            save_image(image, os.path.join(images_dir, name))
        except OSError as e:
            raise OSError(f"failed writing {os.path.join(images_dir, name)}: {e}") from e
        files.append((name, transcript))

    labels_path = os.path.join(out_dir, "labels.tsv")
    with open(labels_path, "w", encoding="utf-8", newline="") as fh:
        for name, transcript in files:
            fh.write(f"{name}\t{transcript}\n")

    manifest = CorpusManifest(
        vocab=tuple(vocab), count=count, policy_level=policy.level,
        seed=seed, files=tuple(files),
    )
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        fh.write(manifest.to_json())
    return manifest


def read_labels(corpus_dir: str) -> list[tuple[str, str]]:
    labels_path = os.path.join(corpus_dir, "labels.tsv")
    if not os.path.isfile(labels_path):
        raise FileNotFoundError(f"no labels.tsv in corpus directory {corpus_dir}")
    entries = []
    with open(labels_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ValueError(f"{labels_path}:{line_no}: missing tab separator")
            name, transcript = line.split("\t", 1)
            entries.append((name, transcript))
    if not entries:
        raise ValueError(f"corpus at {corpus_dir} is empty")
    return entries


def load_corpus(corpus_dir: str) -> tuple[np.ndarray, list[str]]:
    """Load all corpus images into one (n, 32, 128, 3) float32 array."""
    entries = read_labels(corpus_dir)
    images = np.stack(
        [load_image(os.path.join(corpus_dir, "images", name)) for name, _ in entries]
    )
    return images, [t for _, t in entries]
