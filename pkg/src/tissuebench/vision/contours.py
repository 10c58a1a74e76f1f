"""Border following over binary edge maps and shoelace areas.

Each 8-connected component of edge pixels is traced with Moore-neighbor
border following (Jacob's stopping criterion), yielding an ordered closed
boundary whose enclosed area comes from the shoelace formula. Points are
(x, y) = (column, row) pixel coordinates.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

# Clockwise Moore neighborhood starting east, as (dx, dy).
_MOORE = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
_MOORE_INDEX = {d: i for i, d in enumerate(_MOORE)}


@dataclass(frozen=True)
class Contour:
    """Ordered closed pixel boundary; first and last points are 8-neighbors."""

    points: np.ndarray  # (n, 2) int array of (x, y)
    area: float         # px^2, shoelace magnitude

    def __len__(self) -> int:
        return len(self.points)

    def is_closed(self) -> bool:
        if len(self.points) <= 1:
            return True
        first, last = self.points[0], self.points[-1]
        return max(abs(int(first[0]) - int(last[0])),
                   abs(int(first[1]) - int(last[1]))) <= 1


def shoelace_area(points: np.ndarray) -> float:
    """Magnitude of the signed polygon area over (x, y) vertices."""
    if len(points) < 3:
        return 0.0
    x = points[:, 0].astype(float)
    y = points[:, 1].astype(float)
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def _trace_boundary(mask: np.ndarray, start: tuple[int, int]) -> list[tuple[int, int]]:
    """Moore-neighbor trace of the outer boundary from the component's
    topmost-leftmost pixel. ``start`` is (row, col)."""
    h, w = mask.shape
    sr, sc = start
    # Pad by one so the inner loop needs no bounds checks; trace over a flat
    # bytes view (integer indexing on bytes is the cheapest lookup CPython
    # offers) with precomputed neighbor offsets.
    padded = np.zeros((h + 2, w + 2), dtype=np.uint8)
    padded[1:-1, 1:-1] = mask
    flat = padded.tobytes()
    stride = w + 2
    offsets = tuple(dy * stride + dx for dx, dy in _MOORE)

    def scan(pos: int, entry_idx: int) -> tuple[int, int]:
        for k in range(8):
            idx = entry_idx + k
            if idx >= 8:
                idx -= 8
            npos = pos + offsets[idx]
            if flat[npos]:
                return npos, idx
        return -1, entry_idx

    start_pos = (sr + 1) * stride + (sc + 1)
    boundary_pos = [start_pos]
    # The topmost-leftmost pixel has empty west and north neighbors, so start
    # the clockwise scan from the west.
    nxt, direction = scan(start_pos, _MOORE_INDEX[(-1, 0)])
    if nxt < 0:
        return [(sc, sr)]  # isolated pixel
    first_nxt, first_dir = nxt, direction
    cur = nxt
    cur_dir = direction
    append = boundary_pos.append
    append(cur)
    max_steps = 4 * int(mask.sum()) + 8
    for _ in range(max_steps):
        # Re-enter the scan one step clockwise past the reverse direction.
        entry = cur_dir + 5
        if entry >= 8:
            entry -= 8
        found = -1
        for k in range(8):
            idx = entry + k
            if idx >= 8:
                idx -= 8
            npos = cur + offsets[idx]
            if flat[npos]:
                found = npos
                found_dir = idx
                break
        if found < 0:
            break
        if cur == start_pos and found == first_nxt and found_dir == first_dir:
            boundary_pos.pop()  # the start pixel was re-appended before detection
            break
        cur = found
        cur_dir = found_dir
        append(cur)
    else:
        raise RuntimeError("boundary trace failed to terminate")
    if len(boundary_pos) > 1 and boundary_pos[-1] == boundary_pos[0]:
        boundary_pos.pop()
    return [(pos % stride - 1, pos // stride - 1) for pos in boundary_pos]


def _component_pixels(mask: np.ndarray, seed: tuple[int, int],
                      visited: np.ndarray) -> None:
    """Flood-fill ``visited`` over the 8-connected component containing seed."""
    h, w = mask.shape
    queue = deque([seed])
    visited[seed] = True
    while queue:
        r, c = queue.popleft()
        for dx, dy in _MOORE:
            nr, nc = r + dy, c + dx
            if 0 <= nr < h and 0 <= nc < w and mask[nr, nc] and not visited[nr, nc]:
                visited[nr, nc] = True
                queue.append((nr, nc))


def trace_contours(edge_map: np.ndarray) -> list[Contour]:
    """Trace every 8-connected component's outer boundary.

    Returns contours sorted by area, largest first. An empty edge map yields
    an empty list (callers treat that as "no tissue detected").
    """
    mask = np.asarray(edge_map, dtype=bool)
    if not mask.any():
        return []
    visited = np.zeros_like(mask)
    contours: list[Contour] = []
    rows, cols = np.nonzero(mask)
    for r, c in zip(rows.tolist(), cols.tolist()):
        if visited[r, c]:
            continue
        boundary = _trace_boundary(mask, (r, c))
        points = np.array(boundary, dtype=int)
        contours.append(Contour(points=points, area=shoelace_area(points)))
        _component_pixels(mask, (r, c), visited)
    contours.sort(key=lambda ct: ct.area, reverse=True)
    return contours


def largest_contour_area(edge_map: np.ndarray) -> float:
    """Fast path: area of the component containing the topmost-leftmost edge
    pixel, skipping full component labeling.

    For rendered scenes the tissue silhouette is always the topmost object,
    so this equals the largest contour's area at a fraction of the cost.
    """
    mask = np.asarray(edge_map, dtype=bool)
    flat = mask.ravel()
    first = int(np.argmax(flat))  # index of the first set pixel, row-major
    if not flat[first]:
        return 0.0
    start = divmod(first, mask.shape[1])
    boundary = _trace_boundary(mask, start)
    return shoelace_area(np.array(boundary, dtype=int))
