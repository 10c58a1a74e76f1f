"""Labeled synthetic dataset builder with augmentation.

Each base record is a rendered frame labeled with its class, ground-truth
deformation, and traced contour area. Augmented variants (flips, intensity
changes, crops, rotations) are derived per-record with seeds spawned
deterministically from the master seed, so a build is byte-reproducible.

The 7:2:1 train/val/test split is taken over the base records after a seeded
shuffle; augmented variants inherit their base record's split so no scene
leaks across splits. Geometric augmentations (crop, rotation) distort the
area <-> deformation relationship and are flagged ``area_preserving=False``;
regressor training uses only area-preserving records.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from ..errors import ConfigError
from .deformation_map import class_from_position, ground_truth_deformation
from .edges import DEFAULT_EDGE_THRESHOLD
from .features import measure_silhouette_area
from .render import RenderConfig, render_frame, write_pgm

MANIFEST_COLUMNS = ("frame_path", "knife_mm", "class_id",
                    "ground_truth_pct", "contour_area_px2")

SPLIT_NAMES = ("train", "val", "test")
SPLIT_RATIOS = (0.7, 0.2, 0.1)


@dataclass(frozen=True)
class AugmentationConfig:
    flip_lr_prob: float = 0.5
    color_jitter: float = 0.25      # probability of an intensity-level shift
    random_crop: float = 0.3        # probability of crop-and-rescale
    rotation_prob: float = 0.5
    rotation_range_deg: float = 15.0
    brightness_range: tuple[float, float] = (0.75, 1.25)
    intensity_shift: tuple[int, int] = (-25, 25)
    crop_max_fraction: float = 0.08
    variants_per_frame: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("flip_lr_prob", "color_jitter", "random_crop", "rotation_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be a probability, got {value}")
        if self.variants_per_frame < 0:
            raise ConfigError("variants_per_frame must be >= 0")


# ---------------------------------------------------------------------------
# Augmentation primitives (grayscale uint8)

def flip_lr(pixels: np.ndarray) -> np.ndarray:
    return np.fliplr(pixels).copy()


def adjust_intensity(pixels: np.ndarray, scale: float, offset: float) -> np.ndarray:
    out = pixels.astype(float) * scale + offset
    return np.clip(out, 0, 255).astype(np.uint8)


_CENTERED_GRIDS: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}


def _centered_grid(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    if (h, w) not in _CENTERED_GRIDS:
        rows, cols = np.mgrid[0:h, 0:w]
        _CENTERED_GRIDS[(h, w)] = (
            (rows - (h - 1) / 2.0).astype(np.float32),
            (cols - (w - 1) / 2.0).astype(np.float32),
        )
    return _CENTERED_GRIDS[(h, w)]


def rotate_nearest(pixels: np.ndarray, degrees: float, fill: int = 0) -> np.ndarray:
    """Nearest-neighbor rotation about the frame center. Multiples of 360
    restore the frame exactly."""
    if degrees % 360.0 == 0.0:
        return pixels.copy()
    h, w = pixels.shape
    theta = math.radians(degrees)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    dy, dx = _centered_grid(h, w)
    # Inverse map: output pixel -> source pixel.
    src_r = np.rint((h - 1) / 2.0 + dy * cos_t - dx * sin_t).astype(np.intp)
    src_c = np.rint((w - 1) / 2.0 + dy * sin_t + dx * cos_t).astype(np.intp)
    valid = (src_r >= 0) & (src_r < h) & (src_c >= 0) & (src_c < w)
    out = np.full_like(pixels, fill)
    out[valid] = pixels[src_r[valid], src_c[valid]]
    return out


def crop_rescale_nearest(pixels: np.ndarray, fraction: float) -> np.ndarray:
    """Crop a centered window smaller by ``fraction`` per side, then
    nearest-neighbor rescale back to the original size."""
    h, w = pixels.shape
    dr = int(round(h * fraction))
    dc = int(round(w * fraction))
    if dr == 0 and dc == 0:
        return pixels.copy()
    window = pixels[dr:h - dr, dc:w - dc]
    src_r = np.clip(np.rint(np.linspace(0, window.shape[0] - 1, h)).astype(int),
                    0, window.shape[0] - 1)
    src_c = np.clip(np.rint(np.linspace(0, window.shape[1] - 1, w)).astype(int),
                    0, window.shape[1] - 1)
    return window[np.ix_(src_r, src_c)].copy()


def augment_frame(
    pixels: np.ndarray,
    cfg: AugmentationConfig,
    rng: np.random.Generator,
    fill: int = 0,
) -> tuple[np.ndarray, bool]:
    """Apply the augmentation pipeline once. Returns (image, area_preserving).

    Flips and intensity changes leave the traced silhouette area unchanged;
    crops and rotations do not.
    """
    out = pixels
    area_preserving = True
    if rng.random() < cfg.rotation_prob:
        degrees = float(rng.uniform(-cfg.rotation_range_deg, cfg.rotation_range_deg))
        out = rotate_nearest(out, degrees, fill=fill)
        area_preserving = False
    if rng.random() < cfg.random_crop:
        fraction = float(rng.uniform(0.02, cfg.crop_max_fraction))
        out = crop_rescale_nearest(out, fraction)
        area_preserving = False
    if rng.random() < cfg.flip_lr_prob:
        out = flip_lr(out)
    if rng.random() < cfg.color_jitter:
        shift = float(rng.uniform(*cfg.intensity_shift))
        out = adjust_intensity(out, 1.0, shift)
    else:
        scale = float(rng.uniform(*cfg.brightness_range))
        out = adjust_intensity(out, scale, 0.0)
    if out is pixels:
        out = pixels.copy()
    return out, area_preserving


# ---------------------------------------------------------------------------
# Records and dataset

@dataclass
class DatasetRecord:
    frame_path: str
    knife_mm: float
    class_id: str
    ground_truth_pct: float
    contour_area_px2: float
    split: str
    augmented: bool = False
    area_preserving: bool = True
    pixels: np.ndarray | None = None


@dataclass
class Dataset:
    records: list[DatasetRecord]
    render_config: RenderConfig
    seed: int

    def split_records(self, name: str) -> list[DatasetRecord]:
        return [r for r in self.records if r.split == name]

    def base_split_sizes(self) -> dict[str, int]:
        return {
            name: sum(1 for r in self.records if r.split == name and not r.augmented)
            for name in SPLIT_NAMES
        }

    def manifest_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(MANIFEST_COLUMNS)
        for r in self.records:
            writer.writerow([
                r.frame_path,
                repr(r.knife_mm),
                r.class_id,
                repr(r.ground_truth_pct),
                repr(r.contour_area_px2),
            ])
        return buf.getvalue()

    def write(self, out_dir: str | Path, write_frames: bool = False) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "manifest.csv").write_text(self.manifest_csv(), encoding="ascii")
        for name in SPLIT_NAMES:
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(MANIFEST_COLUMNS)
            for r in self.split_records(name):
                writer.writerow([
                    r.frame_path, repr(r.knife_mm), r.class_id,
                    repr(r.ground_truth_pct), repr(r.contour_area_px2),
                ])
            (out / f"{name}.csv").write_text(buf.getvalue(), encoding="ascii")
        if write_frames:
            frames_dir = out / "frames"
            frames_dir.mkdir(exist_ok=True)
            for r in self.records:
                if r.pixels is not None:
                    write_pgm(r.pixels, out / r.frame_path)


def _assign_splits(n_base: int, rng: np.random.Generator) -> list[str]:
    n_train = int(n_base * SPLIT_RATIOS[0])
    n_val = int(n_base * SPLIT_RATIOS[1])
    labels = (["train"] * n_train + ["val"] * n_val
              + ["test"] * (n_base - n_train - n_val))
    order = rng.permutation(n_base)
    assigned = [""] * n_base
    for slot, idx in enumerate(order):
        assigned[idx] = labels[slot]
    return assigned


def build_dataset(
    n_base: int = 1500,
    render_config: RenderConfig | None = None,
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None,
    aug: AugmentationConfig | None = None,
    seed: int = 0,
    edge_threshold: float = DEFAULT_EDGE_THRESHOLD,
    keep_frames: bool = False,
) -> Dataset:
    """Render, label, and augment ``n_base`` frames at sampled knife positions.

    ``aug=None`` disables augmentation (exactly ``n_base`` records). With a
    config, each base frame gains ``variants_per_frame`` augmented records.
    Deterministic for a given seed: per-record generators are spawned from
    the master seed, and workers could partition records without changing
    the result.
    """
    if n_base <= 0:
        raise ConfigError("n_base must be > 0")
    cfg = render_config or RenderConfig()
    master = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    if sampler is None:
        positions = master.uniform(0.0, 35.0, size=n_base)
    else:
        positions = np.asarray(sampler(master, n_base), dtype=float)
    splits = _assign_splits(n_base, master)

    records: list[DatasetRecord] = []
    for i, pos in enumerate(positions.tolist()):
        frame = render_frame(pos, cfg)
        area = measure_silhouette_area(frame.pixels, edge_threshold)
        cls = class_from_position(pos)
        gt = ground_truth_deformation(pos)
        records.append(DatasetRecord(
            frame_path=f"frames/base_{i:05d}.pgm",
            knife_mm=pos,
            class_id=cls.name,
            ground_truth_pct=gt,
            contour_area_px2=area,
            split=splits[i],
            pixels=frame.pixels if (keep_frames or aug) else None,
        ))

    if aug is not None and aug.variants_per_frame > 0:
        augmented: list[DatasetRecord] = []
        for i, base in enumerate(records[:n_base]):
            for v in range(aug.variants_per_frame):
                rng = np.random.Generator(np.random.PCG64(
                    np.random.SeedSequence((seed, aug.seed, i, v))
                ))
                pixels, preserving = augment_frame(
                    base.pixels, aug, rng, fill=cfg.background_level
                )
                if preserving:
                    area = base.contour_area_px2
                else:
                    area = measure_silhouette_area(pixels, edge_threshold)
                augmented.append(DatasetRecord(
                    frame_path=f"frames/aug_{i:05d}_{v:02d}.pgm",
                    knife_mm=base.knife_mm,
                    class_id=base.class_id,
                    ground_truth_pct=base.ground_truth_pct,
                    contour_area_px2=area,
                    split=base.split,
                    augmented=True,
                    area_preserving=preserving,
                    pixels=pixels if keep_frames else None,
                ))
        records.extend(augmented)
        if not keep_frames:
            for base in records[:n_base]:
                base.pixels = None

    return Dataset(records=records, render_config=cfg, seed=seed)
