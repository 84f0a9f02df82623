"""Shot-chart CSV ingestion and per-player made/missed charts.

Input follows the public shot-chart export convention: one row per shot
attempt with ``LOC_X``/``LOC_Y`` in 0.1-ft units about the basket and a
0/1 ``SHOT_MADE_FLAG``.  Other exports can be remapped column-by-column.
Malformed rows are never silently dropped: loading returns both the
accepted records and a rejection report, and the two always add up to
the input row count.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import HALF_COURT, PointPattern

__all__ = [
    "CANONICAL_COLUMNS",
    "X_RANGE",
    "Y_RANGE",
    "ShotRecord",
    "RejectedRow",
    "PlayerShotChart",
    "load_shot_csv",
    "format_rejection_report",
    "build_charts",
    "filter_players",
    "read_exclusions",
    "demo_shots_path",
]

#: Logical field -> default CSV column name.
CANONICAL_COLUMNS = {
    "player_id": "PLAYER_ID",
    "player_name": "PLAYER_NAME",
    "x": "LOC_X",
    "y": "LOC_Y",
    "made": "SHOT_MADE_FLAG",
    "season": "SEASON",  # optional
}

X_RANGE = (HALF_COURT.xmin, HALF_COURT.xmax)
Y_RANGE = (HALF_COURT.ymin, HALF_COURT.ymax)

_DATA_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True)
class ShotRecord:
    player_id: str
    player_name: str
    x: float
    y: float
    made: bool
    season: str = ""


@dataclass(frozen=True)
class RejectedRow:
    """A rejected input row: 1-based data row number and the reason."""

    row: int
    reason: str


@dataclass(frozen=True)
class PlayerShotChart:
    """Made and missed shot patterns for one player."""

    player_id: str
    player_name: str
    made: PointPattern
    missed: PointPattern

    @property
    def total_attempts(self) -> int:
        return len(self.made) + len(self.missed)


def demo_shots_path() -> Path:
    """Path of the bundled synthetic three-player fixture."""
    return _DATA_DIR / "demo_shots.csv"


def load_shot_csv(path, columns=None) -> tuple[list[ShotRecord], list[RejectedRow]]:
    """Load a shot CSV; return ``(records, rejected_rows)``.

    ``columns`` remaps logical fields (``player_id``, ``player_name``,
    ``x``, ``y``, ``made``, ``season``) to actual column names.  The
    season column is optional; every other mapped column must exist.
    Rows failing to parse, carrying non-0/1 made flags, or falling
    outside the half-court window are rejected with a reason, and
    ``len(records) + len(rejected) == number of data rows``.
    """
    colmap = dict(CANONICAL_COLUMNS)
    if columns:
        unknown = set(columns) - set(colmap)
        if unknown:
            raise ValueError(f"unknown column mapping keys: {sorted(unknown)}")
        colmap.update(columns)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty CSV (no header row)")
        have = set(reader.fieldnames)
        required = {k: v for k, v in colmap.items() if k != "season"}
        missing = [v for v in required.values() if v not in have]
        if missing:
            raise ValueError(f"{path}: missing required column(s): {', '.join(sorted(missing))}")
        has_season = colmap["season"] in have
        records: list[ShotRecord] = []
        rejected: list[RejectedRow] = []
        for rownum, row in enumerate(reader, start=1):
            reason = None
            try:
                x = float(row[colmap["x"]])
                y = float(row[colmap["y"]])
            except (TypeError, ValueError):
                reason = "invalid coordinates"
                x = y = 0.0
            if reason is None and not np.isfinite([x, y]).all():
                reason = "invalid coordinates"
            if reason is None and not X_RANGE[0] <= x <= X_RANGE[1]:
                reason = "x out of range"
            if reason is None and not Y_RANGE[0] <= y <= Y_RANGE[1]:
                reason = "y out of range"
            made_raw = (row.get(colmap["made"]) or "").strip()
            if reason is None and made_raw not in ("0", "1"):
                reason = "invalid made flag"
            if reason is not None:
                rejected.append(RejectedRow(rownum, reason))
                continue
            records.append(
                ShotRecord(
                    player_id=(row.get(colmap["player_id"]) or "").strip(),
                    player_name=(row.get(colmap["player_name"]) or "").strip(),
                    x=x,
                    y=y,
                    made=made_raw == "1",
                    season=(row.get(colmap["season"]) or "").strip() if has_season else "",
                )
            )
    return records, rejected


def format_rejection_report(rejected) -> str:
    """Line-oriented report: ``row N: reason`` per rejected row."""
    return "\n".join(f"row {r.row}: {r.reason}" for r in rejected)


def build_charts(records) -> list[PlayerShotChart]:
    """Group records into per-player made/missed patterns.

    Charts come back sorted by player id for deterministic downstream
    output; players with no makes (or no misses) get empty patterns.
    """
    by_player: dict[str, list[ShotRecord]] = {}
    names: dict[str, str] = {}
    for rec in records:
        by_player.setdefault(rec.player_id, []).append(rec)
        names.setdefault(rec.player_id, rec.player_name)
    charts = []
    for pid in sorted(by_player):
        rows = by_player[pid]
        made = [(r.x, r.y) for r in rows if r.made]
        missed = [(r.x, r.y) for r in rows if not r.made]
        charts.append(
            PlayerShotChart(
                player_id=pid,
                player_name=names[pid],
                made=PointPattern(np.asarray(made, float).reshape(-1, 2), HALF_COURT),
                missed=PointPattern(np.asarray(missed, float).reshape(-1, 2), HALF_COURT),
            )
        )
    return charts


def filter_players(
    charts,
    min_attempts: int = 400,
    exclusions=frozenset(),
    count_basis: str = "attempts",
) -> list[PlayerShotChart]:
    """Keep players strictly above the volume cutoff and not excluded.

    ``count_basis="attempts"`` (default) counts all shots; ``"made"``
    counts makes only, for data sources where the cutoff is quoted in
    field goals made.
    """
    if count_basis not in ("attempts", "made"):
        raise ValueError("count_basis must be 'attempts' or 'made'")
    excluded = {str(e) for e in exclusions}
    out = []
    for chart in charts:
        count = chart.total_attempts if count_basis == "attempts" else len(chart.made)
        if count > min_attempts and chart.player_id not in excluded:
            out.append(chart)
    return out


def read_exclusions(path) -> frozenset[str]:
    """Read an exclusion list: one player id per line, ``#`` comments."""
    out = set()
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            s = raw.split("#", 1)[0].strip()
            if s:
                out.add(s)
    return frozenset(out)
