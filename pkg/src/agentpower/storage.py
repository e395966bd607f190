"""Artifact files: atomic writes, run-log discovery, manifests."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable

from .metrics import summarize, summary_csv, summary_json
from .runlog import RunLog, ordered

log = logging.getLogger(__name__)


def atomic_write(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def config_hash(obj: Any) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def write_manifest(out_dir: Path, command: str, config: dict[str, Any], files: Iterable[Path]) -> Path:
    doc = {
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "files": sorted(str(Path(f).relative_to(out_dir)) for f in files),
    }
    return atomic_write(out_dir / "manifest.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_run_logs(root: str | Path) -> list[RunLog]:
    """Every run log (``*.jsonl`` starting with a header record) below ``root``."""
    runs = []
    for path in sorted(Path(root).rglob("*.jsonl")):
        with path.open(encoding="utf-8") as fh:
            first = fh.readline()
        try:
            if json.loads(first).get("kind") != "header":
                continue
        except (json.JSONDecodeError, AttributeError):
            continue
        runs.append(RunLog.from_jsonl(path.read_text(encoding="utf-8")))
    return runs


def provenance(runs: Iterable[RunLog]) -> dict[str, Any]:
    return {
        "runs": [
            {
                "n": r.scenario.n_pairs,
                "mode": r.config.mode.value,
                "scenario_index": r.scenario_index,
                "scenario_seed": r.scenario.seed,
                "policy_seed": r.config.seed,
                "rounds": r.config.rounds,
                "nondeterministic": r.nondeterministic,
            }
            for r in ordered(runs)
        ]
    }


def write_report(runs: list[RunLog], out_dir: str | Path) -> tuple[Path, Path]:
    """Write ``summary.csv`` and ``summary.json`` folded from ``runs``."""
    out = Path(out_dir)
    rows = summarize(runs)
    csv_path = atomic_write(out / "summary.csv", summary_csv(rows))
    json_path = atomic_write(out / "summary.json", summary_json(rows, provenance(runs)))
    return csv_path, json_path
