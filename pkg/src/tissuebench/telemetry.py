"""Telemetry records and lossless CSV persistence.

Column order is fixed and documented; floats are written with ``repr`` so a
read-back is bit-identical. Vision channels are empty strings when vision is
disabled and round-trip as None.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import StreamError, TelemetrySchemaError


@dataclass(frozen=True)
class TelemetrySample:
    """One simulation step across every channel."""

    time: float                 # s
    commanded_pos: float        # mm
    actual_pos: float           # mm
    velocity: float             # mm/s
    current: float              # A (measured, noise included)
    f_current: float            # N, estimate from current
    fx: float                   # N, raw sensor
    fy: float
    fz: float
    mx: float                   # N*m, raw sensor
    my: float
    mz: float
    f_sensor_filtered: float    # N
    f_fused: float              # N
    deformation_class: str | None = None
    deformation_pct: float | None = None
    contour_area: float | None = None


TELEMETRY_COLUMNS = tuple(f.name for f in fields(TelemetrySample))

_FLOAT_COLUMNS = frozenset(
    c for c in TELEMETRY_COLUMNS if c not in ("deformation_class",)
)
_OPTIONAL_COLUMNS = frozenset(
    ("deformation_class", "deformation_pct", "contour_area")
)


def _format(value: float | str | None) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return repr(value)


def telemetry_csv_text(samples: list[TelemetrySample]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TELEMETRY_COLUMNS)
    for s in samples:
        writer.writerow([_format(getattr(s, c)) for c in TELEMETRY_COLUMNS])
    return buf.getvalue()


def write_telemetry_csv(samples: list[TelemetrySample], path: str | Path) -> None:
    Path(path).write_text(telemetry_csv_text(samples), encoding="ascii")


def read_telemetry_csv(path: str | Path) -> list[TelemetrySample]:
    """Read a telemetry file, validating the schema before any parsing.

    Missing or reordered columns raise TelemetrySchemaError naming the
    offending column; I/O problems surface as the underlying OSError.
    """
    text = Path(path).read_text(encoding="ascii")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise TelemetrySchemaError("empty file: missing header row") from None
    for expected in TELEMETRY_COLUMNS:
        if expected not in header:
            raise TelemetrySchemaError(f"missing column: {expected}")
    for got in header:
        if got not in TELEMETRY_COLUMNS:
            raise TelemetrySchemaError(f"unknown column: {got}")
    index = {name: header.index(name) for name in TELEMETRY_COLUMNS}

    samples: list[TelemetrySample] = []
    last_time = None
    for line_no, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise StreamError(f"line {line_no}: expected {len(header)} fields")
        values: dict[str, float | str | None] = {}
        for name in TELEMETRY_COLUMNS:
            raw = row[index[name]]
            if raw == "" and name in _OPTIONAL_COLUMNS:
                values[name] = None
            elif name in _FLOAT_COLUMNS:
                values[name] = float(raw)
            else:
                values[name] = raw
        sample = TelemetrySample(**values)  # type: ignore[arg-type]
        if last_time is not None and sample.time <= last_time:
            raise StreamError(
                f"line {line_no}: timestamp regression {sample.time} <= {last_time}"
            )
        last_time = sample.time
        samples.append(sample)
    return samples
