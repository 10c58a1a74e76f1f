"""Synthetic top-view frame renderer.

The scene is a grayscale stand-in for the overhead camera: a square tissue
silhouette, a knife shaft entering from the left, and a notch carved out of
the silhouette whose pixel area tracks the ground-truth deformation exactly.
The notch is carved as whole slot-height columns plus a partial column, so
the silhouette pixel count equals round(deformation * max notch area) to
within one pixel by construction.

The knife shaft is drawn only over carved/background pixels and stops a few
pixels short of the notch end wall, so it never alters the silhouette pixel
count and never merges with the tissue boundary in the edge map.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, RangeError
from .deformation_map import STROKE_MM, ground_truth_deformation


@dataclass(frozen=True)
class RenderConfig:
    width: int = 640
    height: int = 640
    px_per_mm: float = 16.0
    knife_entry_px: int = 40        # knife tip x at position 0 mm
    contact_mm: float = 12.0        # tip reaches the tissue face here
    tissue_top_px: int = 160
    tissue_size_px: int = 320
    slot_height_px: int = 120       # carved notch band height
    notch_depth_max_px: int = 300
    knife_half_height_px: int = 4
    knife_tip_gap_px: int = 4       # clearance to the notch end wall
    background_level: int = 30
    tissue_level: int = 200
    knife_level: int = 100

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ConfigError("frame dimensions must be > 0")
        if self.tissue_size_px <= 0 or self.slot_height_px <= 0:
            raise ConfigError("degenerate tissue geometry (zero area)")
        if self.notch_depth_max_px > self.tissue_size_px:
            raise ConfigError("notch depth cannot exceed the tissue width")
        if self.tissue_left_px + self.tissue_size_px > self.width:
            raise ConfigError("tissue extends past the frame")
        if self.tissue_top_px + self.tissue_size_px > self.height:
            raise ConfigError("tissue extends past the frame")
        levels = {self.background_level, self.tissue_level, self.knife_level}
        if len(levels) != 3:
            raise ConfigError("background/tissue/knife levels must be distinct")
        for lv in levels:
            if not 0 <= lv <= 255:
                raise ConfigError("intensity levels must be within [0, 255]")

    @property
    def tissue_left_px(self) -> int:
        return self.knife_entry_px + int(round(self.contact_mm * self.px_per_mm))

    @property
    def undeformed_area_px2(self) -> int:
        return self.tissue_size_px * self.tissue_size_px

    @property
    def max_notch_area_px2(self) -> int:
        return self.notch_depth_max_px * self.slot_height_px

    @property
    def slot_top_px(self) -> int:
        return self.tissue_top_px + (self.tissue_size_px - self.slot_height_px) // 2


@dataclass(frozen=True)
class Frame:
    """One rendered frame plus the scene bookkeeping used by test oracles."""

    pixels: np.ndarray           # uint8, (height, width)
    knife_mm: float
    silhouette_area_px2: int     # exact tissue pixel count
    notch_area_px2: int
    config: RenderConfig

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def tissue_mask(self) -> np.ndarray:
        """Boolean silhouette mask; the knife never overwrites tissue pixels."""
        return self.pixels == self.config.tissue_level


def notch_area_px2(knife_mm: float, cfg: RenderConfig) -> int:
    """Exact carved-out pixel area for a knife position."""
    fraction = ground_truth_deformation(knife_mm) / 100.0
    return int(round(fraction * cfg.max_notch_area_px2))


def render_frame(knife_mm: float, cfg: RenderConfig | None = None) -> Frame:
    """Render the deterministic top-view scene for a knife position."""
    cfg = cfg or RenderConfig()
    if not 0.0 <= knife_mm <= STROKE_MM:
        raise RangeError(f"knife position {knife_mm} mm outside [0, {STROKE_MM}]")

    img = np.full((cfg.height, cfg.width), cfg.background_level, dtype=np.uint8)

    left = cfg.tissue_left_px
    top = cfg.tissue_top_px
    size = cfg.tissue_size_px
    img[top:top + size, left:left + size] = cfg.tissue_level

    area = notch_area_px2(knife_mm, cfg)
    h = cfg.slot_height_px
    full_cols, remainder = divmod(area, h)
    slot_top = cfg.slot_top_px
    if full_cols > 0:
        img[slot_top:slot_top + h, left:left + full_cols] = cfg.background_level
    if remainder > 0:
        img[slot_top:slot_top + remainder, left + full_cols] = cfg.background_level

    # Knife shaft: horizontal band entering from the left edge. Inside the
    # tissue span it is confined to the carved notch and stops short of the
    # end wall so tissue pixels are never overdrawn.
    tip_free = cfg.knife_entry_px + int(round(knife_mm * cfg.px_per_mm))
    notch_end = left + full_cols
    tip = min(tip_free, notch_end - cfg.knife_tip_gap_px)
    if tip > 0:
        mid = slot_top + h // 2
        r0 = mid - cfg.knife_half_height_px
        r1 = mid + cfg.knife_half_height_px
        img[r0:r1, 0:min(tip, cfg.width)] = cfg.knife_level

    return Frame(
        pixels=img,
        knife_mm=knife_mm,
        silhouette_area_px2=cfg.undeformed_area_px2 - area,
        notch_area_px2=area,
        config=cfg,
    )


# ---------------------------------------------------------------------------
# Image export

def write_pgm(pixels: np.ndarray, path) -> None:
    """Binary PGM (P5) with a fixed header; byte-deterministic."""
    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ConfigError("not a binary PGM (P5) file")
    parts = data.split(b"\n", 3)
    if len(parts) < 4:
        raise ConfigError("truncated PGM header")
    width, height = (int(v) for v in parts[1].split())
    pixels = np.frombuffer(parts[3], dtype=np.uint8, count=width * height)
    return pixels.reshape(height, width).copy()


def encode_png(pixels: np.ndarray) -> bytes:
    from PIL import Image

    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(pixels, dtype=np.uint8), mode="L").save(
        buf, format="PNG"
    )
    return buf.getvalue()
