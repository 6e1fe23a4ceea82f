"""CSV/JSON table writers and run manifests."""

from __future__ import annotations

import csv
import datetime
import json
import math
import os

import numpy as np

from . import __version__
from .config import ExperimentConfig


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def write_table(rows: list[dict], path_stem, fmt: str = "csv", columns=None) -> str:
    """Write rows as CSV (header + repr-formatted cells) or as a JSON array of records."""
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    path = f"{path_stem}.{fmt}"
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_cell(r.get(c, "")) for c in columns])
    elif fmt == "json":
        recs = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
        with open(path, "w") as fh:
            json.dump(recs, fh, indent=1)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt}")
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def manifest_text(cfg: ExperimentConfig, command: str, started_at: str | None = None) -> str:
    """Config text plus seed, version, command and started_at keys; started_at comes last."""
    if started_at is None:
        started_at = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    extra = [
        "seed=" + ",".join(str(s) for s in cfg.seeds),
        f"version={__version__}",
        f"command={command}",
        f"started_at={started_at}",
    ]
    return cfg.to_text() + "\n".join(extra) + "\n"


def write_manifest(out_dir, cfg: ExperimentConfig, command: str) -> str:
    path = os.path.join(out_dir, "manifest.txt")
    with open(path, "w") as fh:
        fh.write(manifest_text(cfg, command))
    return path
