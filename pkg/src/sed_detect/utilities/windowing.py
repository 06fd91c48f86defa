"""
`utilities/windowing` module.

Supervised examples for the detector. At decision frame t the classifier sees the frames
``t - tau .. t`` and is trained on the user state at frame ``t - eta``; windows never cross
the interaction boundaries and stride by one frame.

Also holds interaction-level fold plans and balanced class weights.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import logging

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from sed_detect.models import WindowConfig
from sed_detect.types import (
    ENGAGED,
    SED,
    ConfigError,
    DataError,
    FloatArray,
    FoldSplit,
    LabelArray,
    ShapeError,
)
from sed_detect.utilities.annotation import FrameLabels
from sed_detect.utilities.streams import FrameSequence
from sed_detect.utilities.utilities import decode_array, encode_array, read_jsonl, write_jsonl


logger = logging.getLogger(__name__)

WINDOWS_SCHEMA = "sed-windows/1"
DEFAULT_FOLDS = 3


@dataclass(frozen=True, slots=True)
class LabeledWindow:
    """One supervised example.

    Attributes:
        interaction_id (str): Source interaction.
        end_frame (int): Decision frame t, the last row of the block.
        block (FloatArray): ``(tau/L + 1) x D`` frames ``t - tau .. t``.
        label (int): State at frame ``t - eta``, 0 engaged or 1 SED.
        agreed (bool): Whether both annotators agree on the label frame.
    """

    interaction_id: str
    end_frame: int
    block: FloatArray
    label: int
    agreed: bool = True


def window_count(n_frames: int, config: WindowConfig) -> int:
    """Windows an interaction of ``n_frames`` frames yields."""
    return max(0, n_frames - config.tau_frames)


def build_windows(
    frames: FrameSequence,
    labels: FrameLabels,
    config: WindowConfig,
    *,
    include_disagreed: bool = False,
) -> list[LabeledWindow]:
    """Builds one window per frame ``t >= tau/L`` of an interaction.

    Labels come from the agreed-label channel at frame ``t - eta/L``. Windows whose label
    frame is disagreement-masked are dropped unless ``include_disagreed`` is set, in which
    case they are kept with ``agreed=False``. An interaction shorter than the window yields
    no window.

    Raises:
        ShapeError: If frames and labels differ in length.
        ConfigError: If the frames were integrated with another frame period.
    """
    if frames.n_frames != len(labels):
        raise ShapeError(f"{frames.interaction_id}: {frames.n_frames} frames but {len(labels)} labels")
    if frames.frame_period_ms != config.frame_period_ms:
        raise ConfigError(
            f"frames use a {frames.frame_period_ms} ms period, window config {config.frame_period_ms} ms"
        )
    tau, eta = config.tau_frames, config.eta_frames
    consensus, agreement = labels.consensus, labels.agreement
    windows: list[LabeledWindow] = []
    for t in range(tau, frames.n_frames):
        agreed = bool(agreement[t - eta])
        if not agreed and not include_disagreed:
            continue
        windows.append(
            LabeledWindow(
                frames.interaction_id,
                t,
                frames.frames[t - tau : t + 1],
                int(consensus[t - eta]),
                agreed,
            )
        )
    return windows


def stack_windows(windows: Sequence[LabeledWindow]) -> tuple[FloatArray, LabelArray, list[str]]:
    """Stacks windows into ``X`` (``n x N x D``), labels ``y`` and interaction ids.

    Raises:
        ShapeError: If the window blocks differ in shape or there are no windows.
    """
    if not windows:
        raise ShapeError("no windows to stack")
    shape = windows[0].block.shape
    if any(w.block.shape != shape for w in windows):
        raise ShapeError("windows of different shapes cannot be stacked")
    x = np.stack([w.block for w in windows]).astype(np.float64, copy=False)
    y = np.array([w.label for w in windows], dtype=np.int8)
    return x, y, [w.interaction_id for w in windows]


def dump_windows(path: Path, windows: Iterable[LabeledWindow], config: WindowConfig) -> int:
    """Writes windows as a versioned JSONL debug dump with bit-exact blocks."""

    def records() -> Iterator[dict[str, Any]]:
        yield {"schema": WINDOWS_SCHEMA, "window_config": config.to_dict()}
        for w in windows:
            yield {
                "interaction": w.interaction_id,
                "end_frame": w.end_frame,
                "label": w.label,
                "agreed": w.agreed,
                "block": encode_array(w.block),
            }

    return write_jsonl(path, records()) - 1


def load_windows(path: Path) -> tuple[WindowConfig, list[LabeledWindow]]:
    """Reads a window dump written by `dump_windows`."""
    records = iter(read_jsonl(path))
    header = next(records, None)
    if header is None or header.get("schema") != WINDOWS_SCHEMA:
        raise ConfigError(f"{path} is not a {WINDOWS_SCHEMA} dump")
    config = WindowConfig.from_dict(header["window_config"])
    windows = [
        LabeledWindow(
            str(r["interaction"]),
            int(r["end_frame"]),
            decode_array(r["block"]).reshape(config.n_rows, -1),
            int(r["label"]),
            bool(r["agreed"]),
        )
        for r in records
    ]
    return config, windows


# --- Folds ---


@dataclass(frozen=True, slots=True)
class FoldPlan:
    """Interaction-level k-fold partition.

    Attributes:
        k (int): Number of folds.
        seed (int): Shuffle seed.
        folds (tuple[tuple[str, ...], ...]): Test interaction ids per fold.
    """

    k: int
    seed: int
    folds: tuple[tuple[str, ...], ...]

    def __len__(self) -> int:
        """Number of folds."""
        return len(self.folds)

    def __iter__(self) -> Iterator[FoldSplit]:
        """Yields the train/test split of every fold."""
        for i in range(self.k):
            yield self.split(i)

    @property
    def ids(self) -> tuple[str, ...]:
        """Every interaction of the plan, fold by fold."""
        return tuple(i for fold in self.folds for i in fold)

    def split(self, fold: int) -> FoldSplit:
        """Train ids are every interaction outside the test fold."""
        if not 0 <= fold < self.k:
            raise ConfigError(f"fold {fold} outside 0..{self.k - 1}")
        train = tuple(i for j, ids in enumerate(self.folds) if j != fold for i in ids)
        return FoldSplit(fold, tuple(sorted(train)), tuple(sorted(self.folds[fold])))

    def to_dict(self) -> dict[str, Any]:
        """JSON form for run records."""
        return {"k": self.k, "seed": self.seed, "folds": [list(f) for f in self.folds]}


def make_folds(interaction_ids: Iterable[str], k: int = DEFAULT_FOLDS, seed: int = 0) -> FoldPlan:
    """Seeded shuffle of the interactions followed by round-robin assignment to k folds.

    Raises:
        ConfigError: If k < 2, ids repeat, or there are fewer interactions than folds.
    """
    ids = sorted(interaction_ids)
    if len(set(ids)) != len(ids):
        raise ConfigError("interaction ids must be unique")
    if k < 2:
        raise ConfigError(f"cross-validation needs at least 2 folds, got {k}")
    if k > len(ids):
        raise ConfigError(f"{k} folds requested for {len(ids)} interactions")
    order = np.random.default_rng(seed).permutation(len(ids))
    folds = tuple(tuple(ids[j] for j in order[i::k]) for i in range(k))
    return FoldPlan(k, seed, folds)


def class_weights(labels: LabelArray | Sequence[int]) -> dict[int, float]:
    """Balanced weights ``w_c = N / (2 N_c)``; weighted class masses come out equal.

    Raises:
        DataError: If either class is absent.
    """
    y = np.asarray(labels)
    n = int(y.shape[0])
    counts = {c: int(np.count_nonzero(y == c)) for c in (ENGAGED, SED)}
    missing = [c for c, count in counts.items() if count == 0]
    if missing:
        raise DataError(f"training labels hold a single class (no windows of class {missing[0]})")
    return {c: n / (2.0 * count) for c, count in counts.items()}


__all__ = [
    "DEFAULT_FOLDS",
    "WINDOWS_SCHEMA",
    "FoldPlan",
    "LabeledWindow",
    "build_windows",
    "class_weights",
    "dump_windows",
    "load_windows",
    "make_folds",
    "stack_windows",
    "window_count",
]
