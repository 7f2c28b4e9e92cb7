"""Word-accuracy metrics, subset aggregation, benchmark and ablation runners.

Word accuracy ignores case and symbols: predictions and ground truth are
lowercased, every character outside a-z/0-9 is dropped, and the normalized
forms are compared. Sentence mode compares raw strings exactly. Subset
results aggregate into an arithmetic mean over subsets (avg) and an
instance-weighted mean (w_avg).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np
import torch

from . import train as train_mod
from .corpus import AugmentationPolicy, derive_seed, generate_corpus, load_corpus, read_labels
from .train import FinetuneConfig, PretrainConfig, load_recognizer

_KEEP = frozenset("abcdefghijklmnopqrstuvwxyz0123456789")

EVAL_MODES = ("waics", "sentence")


def waics_normalize(s: str) -> str:
    """Lowercase and strip every character outside a-z / 0-9."""
    return "".join(c for c in s.lower() if c in _KEEP)


def waics_match(pred: str, gt: str) -> bool:
    return waics_normalize(pred) == waics_normalize(gt)


def subset_accuracy(preds: list[str], gts: list[str], mode: str = "waics") -> float:
    if mode not in EVAL_MODES:
        raise ValueError(f"mode must be one of {EVAL_MODES}, got {mode!r}")
    if len(preds) != len(gts):
        raise ValueError(f"got {len(preds)} predictions for {len(gts)} labels")
    if not preds:
        raise ValueError("cannot score an empty subset")
    if mode == "waics":
        hits = sum(waics_match(p, g) for p, g in zip(preds, gts))
    else:
        hits = sum(p == g for p, g in zip(preds, gts))
    return hits / len(preds)


@dataclass(frozen=True)
class SubsetResult:
    name: str
    n_instances: int
    accuracy: float


@dataclass(frozen=True)
class EvalReport:
    per_subset: tuple[SubsetResult, ...]
    avg: float
    w_avg: float

    def to_csv(self) -> str:
        lines = ["subset,n_instances,accuracy"]
        for s in self.per_subset:
            lines.append(f"{s.name},{s.n_instances},{s.accuracy:.6f}")
        lines.append(f"# avg={self.avg:.6f} w_avg={self.w_avg:.6f}")
        return "\n".join(lines) + "\n"


def aggregate(per_subset) -> EvalReport:
    """Fold per-subset (name, n, accuracy) results into an EvalReport."""
    results = []
    for entry in per_subset:
        if isinstance(entry, SubsetResult):
            results.append(entry)
        else:
            name, n, acc = entry
            results.append(SubsetResult(name=name, n_instances=int(n), accuracy=float(acc)))
    if not results:
        raise ValueError("aggregate needs at least one subset")
    for s in results:
        if s.n_instances < 1:
            raise ValueError(f"subset {s.name!r} has no instances")
        if not (0.0 <= s.accuracy <= 1.0) or not math.isfinite(s.accuracy):
            raise ValueError(f"subset {s.name!r} accuracy {s.accuracy} outside [0, 1]")
    avg = sum(s.accuracy for s in results) / len(results)
    total = sum(s.n_instances for s in results)
    w_avg = sum(s.accuracy * s.n_instances for s in results) / total
    return EvalReport(per_subset=tuple(results), avg=avg, w_avg=w_avg)


# ---------------------------------------------------------------------------
# Benchmark runner
# ---------------------------------------------------------------------------

def decode_corpus(model, corpus_dir: str, batch_size: int = 64) -> tuple[list[str], list[str]]:
    """Greedy-decode every image of one corpus; returns (preds, ground truth)."""
    entries = read_labels(corpus_dir)
    images, gts = load_corpus(corpus_dir)
    preds = []
    model.eval()
    for start in range(0, len(entries), batch_size):
        batch = torch.from_numpy(images[start:start + batch_size])
        preds.extend(model.greedy_decode(batch))
    return preds, gts


def run_benchmark(checkpoint: str, corpus_dirs: list[str], mode: str = "waics",
                  batch_size: int = 64) -> EvalReport:
    """Evaluate a recognizer checkpoint over one or more labeled corpora."""
    if mode not in EVAL_MODES:
        raise ValueError(f"mode must be one of {EVAL_MODES}, got {mode!r}")
    if not corpus_dirs:
        raise ValueError("need at least one corpus directory")
    model, _ = load_recognizer(checkpoint)
    per_subset = []
    for d in corpus_dirs:
        name = os.path.basename(os.path.normpath(d))
        preds, gts = decode_corpus(model, d, batch_size=batch_size)
        per_subset.append(SubsetResult(
            name=name, n_instances=len(gts),
            accuracy=subset_accuracy(preds, gts, mode=mode),
        ))
    return aggregate(per_subset)


# ---------------------------------------------------------------------------
# Ablation harness
# ---------------------------------------------------------------------------
# Each axis re-runs pretrain -> finetune -> evaluate per row at desk scale.
# Row sets fix the configurations being compared; the emitted CSV carries
# the configuration columns, one accuracy column per evaluated subset, and
# the subset mean.

ABLATION_HEADER_NOTE = (
    "# desk-scale synthetic run: rows show structure and relative trends only"
)


def _components_rows():
    return [
        ({"guide": "no", "align": "no"},
         lambda c: replace(c, guidance=False, align=False)),
        ({"guide": "yes", "align": "no"},
         lambda c: replace(c, guidance=True, align=False)),
        ({"guide": "yes", "align": "yes"},
         lambda c: replace(c, guidance=True, align=True)),
    ]


def _augmentation_rows():
    return [
        ({"augment": level}, lambda c, lv=level: replace(c, augmentation=lv))
        for level in ("strong", "weak", "medium")
    ]


def _decoder_order_rows():
    def set_order(c, order):
        return replace(c, decoder=replace(c.decoder, order=order))
    return [
        ({"decoder": order}, lambda c, o=order: set_order(c, o))
        for order in ("CA_SA_FFN", "SA_CA_FFN")
    ]


def _target_rows():
    return [
        ({"target": kind}, lambda c, k=kind: replace(c, target_kind=k))
        for kind in ("pixel", "random_feature", "teacher_feature")
    ]


def _masking_rows():
    rows = []
    for strategy, ratio in [("random", 0.6), ("random", 0.8), ("random", 0.9),
                            ("block", 0.6), ("block", 0.8)]:
        rows.append((
            {"mask": strategy, "ratio": f"{ratio:g}"},
            lambda c, s=strategy, r=ratio: replace(c, mask_strategy=s, mask_ratio=r),
        ))
    return rows


ABLATION_AXES = {
    "components": _components_rows,
    "augmentation": _augmentation_rows,
    "decoder_order": _decoder_order_rows,
    "target": _target_rows,
    "masking": _masking_rows,
}


@dataclass
class AblationSetup:
    work_dir: str
    train_corpus: str
    eval_corpora: tuple[str, ...]
    pretrain: PretrainConfig
    finetune: FinetuneConfig


def _default_row_runner(pre_cfg: PretrainConfig, setup: AblationSetup,
                        row_dir: str) -> EvalReport:
    pre = train_mod.pretrain(setup.train_corpus, pre_cfg, row_dir)
    ft_cfg = replace(setup.finetune, init=pre["checkpoint"], encoder=pre_cfg.encoder)
    ft = train_mod.finetune(setup.train_corpus, ft_cfg, row_dir)
    return run_benchmark(ft["checkpoint"], list(setup.eval_corpora))


def run_ablation(axis: str, setup: AblationSetup, runner=None) -> tuple[str, list[dict]]:
    """Run one ablation axis; returns (csv path, row dicts).

    ``runner`` maps (pretrain config, setup, row dir) to an EvalReport and
    exists so tests can exercise the table plumbing without training.
    """
    if axis not in ABLATION_AXES:
        raise ValueError(f"unknown ablation axis {axis!r}; expected one of "
                         f"{sorted(ABLATION_AXES)}")
    runner = runner or _default_row_runner
    rows = ABLATION_AXES[axis]()
    os.makedirs(setup.work_dir, exist_ok=True)

    results = []
    config_cols = list(rows[0][0].keys())
    subset_names = None
    for i, (labels, transform) in enumerate(rows):
        row_dir = os.path.join(setup.work_dir, f"{axis}_{i:02d}")
        os.makedirs(row_dir, exist_ok=True)
        report = runner(transform(setup.pretrain), setup, row_dir)
        if subset_names is None:
            subset_names = [s.name for s in report.per_subset]
        row = dict(labels)
        for s in report.per_subset:
            row[s.name] = s.accuracy
        row["avg"] = report.avg
        results.append(row)

    csv_path = os.path.join(setup.work_dir, f"ablation_{axis}.csv")
    header = config_cols + subset_names + ["avg"]
    lines = [ABLATION_HEADER_NOTE, ",".join(header)]
    for row in results:
        cells = [str(row[c]) for c in config_cols]
        cells += [f"{row[s]:.6f}" for s in subset_names]
        cells.append(f"{row['avg']:.6f}")
        lines.append(",".join(cells))
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return csv_path, results


def make_ablation_setup(work_dir: str, seed: int = 0, corpus_size: int = 32,
                        eval_size: int = 32, vocab: list[str] | None = None,
                        pretrain_epochs: int = 40, finetune_epochs: int = 8,
                        train_corpus: str | None = None,
                        eval_corpora: tuple[str, ...] | None = None,
                        ) -> AblationSetup:
    """Build configs for an ablation run, generating tiny corpora as needed."""
    if vocab is None:
        vocab = _DEFAULT_ABLATION_VOCAB
    policy = AugmentationPolicy.from_level("medium", seed=derive_seed(seed, "corpusaug"))
    if train_corpus is None:
        train_corpus = os.path.join(work_dir, "train_corpus")
        if not os.path.isfile(os.path.join(train_corpus, "labels.tsv")):
            generate_corpus(vocab, corpus_size, policy,
                            derive_seed(seed, "train"), train_corpus)
    if eval_corpora is None:
        eval_dir = os.path.join(work_dir, "eval_corpus")
        if not os.path.isfile(os.path.join(eval_dir, "labels.tsv")):
            generate_corpus(vocab, eval_size, policy,
                            derive_seed(seed, "eval"), eval_dir)
        eval_corpora = (eval_dir,)
    pre = PretrainConfig(epochs=pretrain_epochs, warmup_epochs=1, seed=seed,
                         teacher_steps=30)
    ft = FinetuneConfig(epochs=finetune_epochs, seed=seed)
    return AblationSetup(work_dir=work_dir, train_corpus=train_corpus,
                         eval_corpora=tuple(eval_corpora), pretrain=pre, finetune=ft)


_DEFAULT_ABLATION_VOCAB = [
    "cat", "dog", "sun", "map", "tree", "fish", "book", "lamp",
    "road", "star", "milk", "door", "king", "wolf", "rain", "sand",
]
