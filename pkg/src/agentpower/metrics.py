"""Rate gap, total power, message counts, and the CSV/JSON reports built from them."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import DimensionError
from .runlog import MODE_ORDER, RunLog, RunMode, ordered

TRAJECTORY_COLUMNS = ("round", "rate_gap_kbps", "total_power_w")
SUMMARY_COLUMNS = ("n", "mode", "rate_gap_kbps", "total_power_w", "msgs_per_tx")
FLOAT_FMT = "{:.6f}"

# Published per-transmitter averages, kept for side-by-side display only.
REPORTED_REFERENCE = {
    2: {"dpc": (1.747, 16.536, None), "genai_alone": (1.625, 8.842, None), "genainet": (1.397, 10.700, 3.72)},
    4: {"dpc": (2.086, 28.254, None), "genai_alone": (1.967, 17.156, None), "genainet": (1.736, 15.974, 5.00)},
    10: {"dpc": (2.433, 76.785, None), "genai_alone": (2.403, 34.696, None), "genainet": (2.249, 30.622, 3.80)},
}


def rate_gap(targets_kbps: Sequence[float], final_rates_kbps: Sequence[float]) -> float:
    """Mean absolute per-transmitter gap between target and achieved rate."""
    t = np.asarray(targets_kbps, dtype=np.float64)
    r = np.asarray(final_rates_kbps, dtype=np.float64)
    if t.shape != r.shape:
        raise DimensionError(f"targets {t.shape} and rates {r.shape} differ in shape")
    if t.size == 0:
        return 0.0
    return float(np.mean(np.abs(t - r)))


def total_power(final_powers: Sequence[float]) -> float:
    return float(np.sum(np.asarray(final_powers, dtype=np.float64)))


def msgs_per_tx(run: RunLog) -> float | None:
    if run.config.mode is not RunMode.GENAINET:
        return None
    return run.emitted / run.scenario.n_pairs


@dataclass(frozen=True)
class SummaryRow:
    n_pairs: int
    mode: str
    rate_gap_kbps: float
    total_power_w: float
    msgs_per_tx: float | None
    runs: int = 1

    def csv_fields(self) -> list[str]:
        return [
            str(self.n_pairs),
            self.mode,
            FLOAT_FMT.format(self.rate_gap_kbps),
            FLOAT_FMT.format(self.total_power_w),
            "" if self.msgs_per_tx is None else FLOAT_FMT.format(self.msgs_per_tx),
        ]


def run_summary(run: RunLog) -> SummaryRow:
    fin = run.final
    return SummaryRow(
        n_pairs=run.scenario.n_pairs,
        mode=run.config.mode.value,
        rate_gap_kbps=rate_gap(run.scenario.targets_kbps, fin.rate_kbps),
        total_power_w=total_power(fin.powers),
        msgs_per_tx=msgs_per_tx(run),
    )


def summarize(runs: Iterable[RunLog]) -> list[SummaryRow]:
    """Fold run logs into one row per (N, mode), averaging over scenarios.

    Runs are put in canonical (N, mode, scenario index) order first, so the
    result does not depend on the order logs were produced or loaded.
    """
    groups: dict[tuple[int, RunMode], list[SummaryRow]] = {}
    for run in ordered(runs):
        groups.setdefault((run.scenario.n_pairs, run.config.mode), []).append(run_summary(run))
    rows = []
    for (n, mode), items in sorted(groups.items(), key=lambda kv: (kv[0][0], MODE_ORDER.index(kv[0][1]))):
        msgs = [s.msgs_per_tx for s in items]
        rows.append(
            SummaryRow(
                n_pairs=n,
                mode=mode.value,
                rate_gap_kbps=float(np.mean([s.rate_gap_kbps for s in items])),
                total_power_w=float(np.mean([s.total_power_w for s in items])),
                msgs_per_tx=None if any(m is None for m in msgs) else float(np.mean(msgs)),
                runs=len(items),
            )
        )
    return rows


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def summary_csv(rows: Sequence[SummaryRow]) -> str:
    return _csv_text(SUMMARY_COLUMNS, (r.csv_fields() for r in rows))


def summary_json(rows: Sequence[SummaryRow], provenance: dict[str, Any] | None = None) -> str:
    doc = {
        "columns": list(SUMMARY_COLUMNS),
        "rows": [asdict(r) for r in rows],
        "provenance": provenance or {},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def emit_trajectories(run: RunLog) -> list[dict[str, float]]:
    targets = run.scenario.targets_kbps
    return [
        {"round": r.round, "rate_gap_kbps": rate_gap(targets, r.rate_kbps), "total_power_w": total_power(r.powers)}
        for r in run.rounds
    ]


def trajectory_csv(run: RunLog) -> str:
    rows = emit_trajectories(run)
    return _csv_text(
        TRAJECTORY_COLUMNS,
        ([str(t["round"]), FLOAT_FMT.format(t["rate_gap_kbps"]), FLOAT_FMT.format(t["total_power_w"])] for t in rows),
    )
