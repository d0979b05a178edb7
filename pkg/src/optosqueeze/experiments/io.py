"""CSV/JSON emission and the run manifest."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .. import __version__

CELL_STATUSES = ("ok", "missing", "unstable")


def fmt(x) -> str:
    """17 significant digits; failed cells become the literal ``nan``."""
    if isinstance(x, str):
        return x
    if x is None:
        return "nan"
    if isinstance(x, (bool, int)) and not isinstance(x, float):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[float]]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return _jsonable(x.item())
    return x


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def write_table(outdir, stem: str, header: Sequence[str], rows: Sequence[Sequence],
                csv_out: bool = True, json_out: bool = True) -> list[Path]:
    """CSV plus a JSON mirror (list of records)."""
    rows = [list(r) for r in rows]
    files = []
    if csv_out:
        files.append(write_csv(Path(outdir) / f"{stem}.csv", header, rows))
    if json_out:
        records = [dict(zip(header, r)) for r in rows]
        files.append(write_json(Path(outdir) / f"{stem}.json", records))
    return files


def sha256(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Provenance for one run: config echo, version, timing, cell status, file digests."""

    command: str
    config: dict
    version: str = __version__
    started: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    cells: dict = field(default_factory=lambda: {s: 0 for s in CELL_STATUSES})
    files: list = field(default_factory=list)
    wall_clock_s: float = 0.0
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def record(self, status: str, n: int = 1) -> None:
        if status not in CELL_STATUSES:
            raise ValueError(f"unknown cell status {status!r}")
        self.cells[status] += n

    def add_files(self, paths: Iterable) -> None:
        self.files.extend(Path(p) for p in paths)

    def to_dict(self, root=None) -> dict:
        root = Path(root) if root is not None else None

        def rel(p: Path) -> str:
            if root is not None:
                try:
                    return p.relative_to(root).as_posix()
                except ValueError:
                    pass
            return p.as_posix()

        return {
            "command": self.command,
            "version": self.version,
            "started": self.started,
            "wall_clock_s": self.wall_clock_s,
            "cells": dict(self.cells),
            "config": self.config,
            "files": [{"path": rel(p), "sha256": sha256(p)} for p in self.files],
        }

    def write(self, outdir) -> Path:
        self.wall_clock_s = time.perf_counter() - self._t0
        return write_json(Path(outdir) / "manifest.json", self.to_dict(outdir))
