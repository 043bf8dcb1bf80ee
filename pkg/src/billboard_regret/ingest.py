"""Billboard / check-in ingestion, slot expansion and distance-threshold rows.

File formats::

    billboards.csv    billboard_id,lat,lon
    trajectories.csv  user_id,lat,lon,timestamp   (ISO-8601 or epoch seconds)
    zones.json        {"mode": "boxes", "boxes": [{"min_lat":..,"max_lat":..,"min_lon":..,"max_lon":..}]}
                      {"mode": "centroids", "points": [[lat, lon], ...]}
"""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Sequence
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .model import Slot

EARTH_RADIUS_M = 6_371_008.8
MAX_REJECT_FRACTION = 0.10


class IngestError(ValueError):
    pass


@dataclass(frozen=True)
class BillboardRecord:
    billboard_id: str
    latitude: float
    longitude: float


@dataclass(frozen=True)
class TrajectoryRecord:
    user_id: str
    latitude: float
    longitude: float
    timestamp: float


class Reject(NamedTuple):
    line: int
    reason: str


class RecordList(list):
    """A list of parsed records that also carries the rejected rows."""

    def __init__(self, records=(), rejects=()):
        super().__init__(records)
        self.rejects: list[Reject] = list(rejects)


@dataclass(frozen=True)
class SlotExpansion:
    horizon_start: float
    horizon_end: float
    slot_duration: float

    def __post_init__(self):
        if not self.horizon_end > self.horizon_start:
            raise ValueError("horizon_end must be after horizon_start")
        if not self.slot_duration > 0:
            raise ValueError("slot_duration must be positive")

    @property
    def window_count(self) -> int:
        """Full windows only; a trailing partial window is dropped."""
        return int((self.horizon_end - self.horizon_start) // self.slot_duration)

    def window(self, index: int) -> tuple[float, float]:
        start = self.horizon_start + index * self.slot_duration
        return start, start + self.slot_duration

    def window_of(self, timestamp: float) -> int | None:
        if timestamp < self.horizon_start:
            return None
        index = int((timestamp - self.horizon_start) // self.slot_duration)
        return index if index < self.window_count else None


class SlotWindow(NamedTuple):
    billboard_id: str
    window: int
    start: float
    end: float


class SlotGrid(Sequence):
    """Every (billboard, window) pair, ordered by billboard then window start.

    Items are computed on access so large grids cost no memory.
    """

    def __init__(self, billboards: Sequence[BillboardRecord], expansion: SlotExpansion):
        self.billboards = list(billboards)
        self.expansion = expansion
        self.windows = expansion.window_count

    def __len__(self):
        return len(self.billboards) * self.windows

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        if index < 0:
            index += len(self)
        if not 0 <= index < len(self):
            raise IndexError(index)
        b, w = divmod(index, self.windows)
        start, end = self.expansion.window(w)
        return SlotWindow(self.billboards[b].billboard_id, w, start, end)

    def index_of(self, billboard_index: int, window: int) -> int:
        return billboard_index * self.windows + window


def _read_rows(path, header: Sequence[str]):
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        first = next(reader, None)
        if first is None:
            return
        if [c.strip() for c in first] != list(header):
            raise IngestError(f"{path}: expected header {','.join(header)}, got {','.join(first)}")
        for row in reader:
            if row:
                yield reader.line_num, row


def _coords(lat: str, lon: str) -> tuple[float, float]:
    lat_f, lon_f = float(lat), float(lon)
    if not -90.0 <= lat_f <= 90.0:
        raise ValueError(f"latitude {lat_f} outside [-90, 90]")
    if not -180.0 <= lon_f <= 180.0:
        raise ValueError(f"longitude {lon_f} outside [-180, 180]")
    return lat_f, lon_f


def _finish(records, rejects, path) -> RecordList:
    total = len(records) + len(rejects)
    if total and len(rejects) / total > MAX_REJECT_FRACTION:
        raise IngestError(f"{path}: {len(rejects)} of {total} rows malformed (first: line {rejects[0].line}: "
                          f"{rejects[0].reason})")
    return RecordList(records, rejects)


def load_billboards(path) -> RecordList:
    records, rejects = [], []
    for line, row in _read_rows(path, ("billboard_id", "lat", "lon")):
        try:
            if len(row) != 3 or not row[0].strip():
                raise ValueError(f"expected 3 fields, got {len(row)}")
            lat, lon = _coords(row[1], row[2])
        except ValueError as exc:
            rejects.append(Reject(line, str(exc)))
            continue
        records.append(BillboardRecord(row[0].strip(), lat, lon))
    return _finish(records, rejects, path)


def _epoch(text: str) -> float:
    return float(int(text))


def _iso(text: str) -> float:
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    stamp = datetime.fromisoformat(text)
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return stamp.timestamp()


def load_trajectories(path) -> RecordList:
    """Check-in rows; the timestamp format is fixed by the first data row."""
    records, rejects = [], []
    parse = None
    for line, row in _read_rows(path, ("user_id", "lat", "lon", "timestamp")):
        try:
            if len(row) != 4 or not row[0].strip():
                raise ValueError(f"expected 4 fields, got {len(row)}")
            lat, lon = _coords(row[1], row[2])
            if parse is None:
                parse = _epoch if row[3].strip().lstrip("-").isdigit() else _iso
            ts = parse(row[3].strip())
        except ValueError as exc:
            rejects.append(Reject(line, str(exc)))
            continue
        records.append(TrajectoryRecord(row[0].strip(), lat, lon, ts))
    return _finish(records, rejects, path)


def expand_slots(billboards: Sequence[BillboardRecord], expansion: SlotExpansion) -> SlotGrid:
    return SlotGrid(billboards, expansion)


def haversine_m(lat1, lon1, lat2, lon2):
    """Great-circle distance in meters; broadcasts over numpy arrays."""
    lat1, lon1, lat2, lon2 = map(np.radians, (lat1, lon1, lat2, lon2))
    a = np.sin((lat2 - lat1) / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def _unit_vectors(lat, lon) -> np.ndarray:
    lat, lon = np.radians(lat), np.radians(lon)
    return np.column_stack((np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)))


def compute_influence_rows(
    grid: SlotGrid,
    trajectories: Sequence[TrajectoryRecord],
    eta: float,
    base_probability: float = 0.1,
    zones: Mapping[str, int] | None = None,
    drop_empty: bool = False,
) -> tuple[list[Slot], list[str]]:
    """Distance-threshold influence rows.

    A slot influences a user's trajectory with ``base_probability`` when one of
    the user's check-ins inside the slot's window lies within ``eta`` meters
    (great-circle) of the billboard.

    Returns the slots and the trajectory (user) ids indexed by row position.
    With ``drop_empty`` slots whose row is all zero are left out and the
    survivors renumbered densely.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    if not 0.0 < base_probability <= 1.0:
        raise ValueError("base_probability must lie in (0, 1]")
    users = sorted({t.user_id for t in trajectories})
    user_index = {u: i for i, u in enumerate(users)}
    expansion = grid.expansion
    rows: dict[int, dict[int, float]] = {}

    billboards = grid.billboards
    if billboards and trajectories:
        tree = cKDTree(_unit_vectors([b.latitude for b in billboards], [b.longitude for b in billboards]))
        points = _unit_vectors([t.latitude for t in trajectories], [t.longitude for t in trajectories])
        chord = 2.0 * math.sin(min(eta / EARTH_RADIUS_M, math.pi) / 2.0)
        # candidate search on chord length, exact test on great-circle distance
        candidates = tree.query_ball_point(points, r=chord * (1 + 1e-9))
        for t, near in zip(trajectories, candidates):
            w = expansion.window_of(t.timestamp)
            if w is None or not near:
                continue
            near = np.asarray(near)
            dist = haversine_m(t.latitude, t.longitude,
                               np.array([billboards[b].latitude for b in near]),
                               np.array([billboards[b].longitude for b in near]))
            for b in near[dist <= eta]:
                rows.setdefault(grid.index_of(int(b), w), {})[user_index[t.user_id]] = base_probability

    zones = zones or {}
    slots = []
    for index in range(len(grid)) if not drop_empty else sorted(rows):
        item = grid[index]
        slots.append(Slot(
            id=len(slots),
            zone=zones.get(item.billboard_id, 0),
            influence_row=rows.get(index, {}),
            label=f"{item.billboard_id}@{item.window}",
        ))
    return slots, users


def nonzero_slot_count(slots: Sequence[Slot]) -> int:
    return sum(1 for s in slots if s.influence_row)


def load_zone_spec(path) -> dict:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def _box_contains(box, lat, lon) -> bool:
    return box["min_lat"] <= lat <= box["max_lat"] and box["min_lon"] <= lon <= box["max_lon"]


def assign_zones(billboards: Sequence[BillboardRecord], zone_spec: Mapping) -> dict[str, int]:
    """Map every billboard to a zone.

    ``boxes`` mode: the first box containing the billboard wins (so a shared
    edge goes to the lower index) and billboards outside every box go to the
    nearest box centre. ``centroids`` mode: nearest point, ties to the lower
    index.
    """
    mode = zone_spec.get("mode")
    if mode == "boxes":
        boxes = zone_spec.get("boxes") or []
        if not boxes:
            raise ValueError("zone spec has no boxes")
        centres = [((b["min_lat"] + b["max_lat"]) / 2, (b["min_lon"] + b["max_lon"]) / 2) for b in boxes]
    elif mode == "centroids":
        boxes = []
        centres = [tuple(p) for p in zone_spec.get("points") or []]
        if not centres:
            raise ValueError("zone spec has no centroid points")
    else:
        raise ValueError(f"unknown zone spec mode {mode!r}")
    c_lat = np.array([c[0] for c in centres])
    c_lon = np.array([c[1] for c in centres])
    out = {}
    for b in billboards:
        zone = next((i for i, box in enumerate(boxes) if _box_contains(box, b.latitude, b.longitude)), None)
        if zone is None:
            zone = int(np.argmin(haversine_m(b.latitude, b.longitude, c_lat, c_lon)))
        out[b.billboard_id] = zone
    return out


def zone_count(zone_spec: Mapping) -> int:
    return len(zone_spec.get("boxes") or zone_spec.get("points") or [])
