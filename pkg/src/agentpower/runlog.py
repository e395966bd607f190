"""Run configuration and per-round trajectory records, with JSON-lines persistence."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

import numpy as np

from .agents.action import ActionRecord
from .radio_env import Scenario

RUNLOG_SCHEMA = 1


class RunMode(str, Enum):
    DPC = "dpc"
    GENAI_ALONE = "genai_alone"
    GENAINET = "genainet"


MODE_ORDER = (RunMode.DPC, RunMode.GENAI_ALONE, RunMode.GENAINET)


@dataclass(frozen=True)
class RunConfig:
    mode: RunMode = RunMode.DPC
    rounds: int = 10
    backend: str = "scripted"
    seed: int = 0
    scenario_ref: str | None = None
    early_stop: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", RunMode(self.mode))
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.backend not in ("scripted", "remote"):
            raise ValueError(f"unknown backend {self.backend!r}")

    @property
    def cooperative(self) -> bool:
        return self.mode is RunMode.GENAINET

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode.value,
            "rounds": self.rounds,
            "backend": None if self.mode is RunMode.DPC else self.backend,
            "seed": self.seed,
            "scenario_ref": self.scenario_ref,
            "early_stop": self.early_stop,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        return cls(
            mode=RunMode(d["mode"]),
            rounds=int(d["rounds"]),
            backend=d.get("backend") or "scripted",
            seed=int(d["seed"]),
            scenario_ref=d.get("scenario_ref"),
            early_stop=bool(d.get("early_stop", False)),
        )


@dataclass(eq=False)
class RoundRecord:
    """State after the decisions of one round.

    ``powers`` are the powers chosen this round and ``sinr``/``rate_kbps``
    what they induce. ``observed_rate_kbps`` is what agents saw before
    deciding (absent for DPC).
    """

    round: int
    powers: np.ndarray
    sinr: np.ndarray
    rate_kbps: np.ndarray
    observed_rate_kbps: np.ndarray | None = None
    actions: list[ActionRecord] | None = None
    prompt_hashes: list[str] | None = None
    emitted: int = 0
    delivered: int = 0
    dropped: int = 0
    backend_errors: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "round",
            "round": self.round,
            "powers": self.powers.tolist(),
            "sinr": self.sinr.tolist(),
            "rate_kbps": self.rate_kbps.tolist(),
            "observed_rate_kbps": None if self.observed_rate_kbps is None else self.observed_rate_kbps.tolist(),
            "actions": None if self.actions is None else [a.to_dict() for a in self.actions],
            "prompt_hashes": self.prompt_hashes,
            "emitted": self.emitted,
            "delivered": self.delivered,
            "dropped": self.dropped,
            "backend_errors": self.backend_errors,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RoundRecord":
        obs = d.get("observed_rate_kbps")
        acts = d.get("actions")
        return cls(
            round=int(d["round"]),
            powers=np.array(d["powers"], dtype=np.float64),
            sinr=np.array(d["sinr"], dtype=np.float64),
            rate_kbps=np.array(d["rate_kbps"], dtype=np.float64),
            observed_rate_kbps=None if obs is None else np.array(obs, dtype=np.float64),
            actions=None if acts is None else [ActionRecord.from_dict(a) for a in acts],
            prompt_hashes=d.get("prompt_hashes"),
            emitted=int(d["emitted"]),
            delivered=int(d["delivered"]),
            dropped=int(d["dropped"]),
            backend_errors=int(d.get("backend_errors", 0)),
        )


@dataclass(eq=False)
class RunLog:
    config: RunConfig
    scenario: Scenario
    rounds: list[RoundRecord] = field(default_factory=list)
    nondeterministic: bool = False
    scenario_index: int | None = None

    @property
    def final(self) -> RoundRecord:
        return self.rounds[-1]

    @property
    def emitted(self) -> int:
        return sum(r.emitted for r in self.rounds)

    @property
    def delivered(self) -> int:
        return sum(r.delivered for r in self.rounds)

    @property
    def dropped(self) -> int:
        return sum(r.dropped for r in self.rounds)

    def header(self) -> dict[str, Any]:
        return {
            "kind": "header",
            "schema": RUNLOG_SCHEMA,
            "config": self.config.to_dict(),
            "nondeterministic": self.nondeterministic,
            "scenario_index": self.scenario_index,
            "scenario": self.scenario.to_dict(),
        }

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header(), sort_keys=True)]
        lines.extend(json.dumps(r.to_dict(), sort_keys=True) for r in self.rounds)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "RunLog":
        docs = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not docs or docs[0].get("kind") != "header":
            raise ValueError("run log must start with a header record")
        head = docs[0]
        if head.get("schema") != RUNLOG_SCHEMA:
            raise ValueError(f"unsupported run log schema {head.get('schema')!r}")
        return cls(
            config=RunConfig.from_dict(head["config"]),
            scenario=Scenario.from_dict(head["scenario"]),
            rounds=[RoundRecord.from_dict(d) for d in docs[1:] if d.get("kind") == "round"],
            nondeterministic=bool(head["nondeterministic"]),
            scenario_index=head.get("scenario_index"),
        )


def sort_key(run: RunLog) -> tuple[int, int, int]:
    idx = run.scenario_index if run.scenario_index is not None else -1
    return (run.scenario.n_pairs, MODE_ORDER.index(run.config.mode), idx)


def ordered(runs: Iterable[RunLog]) -> list[RunLog]:
    return sorted(runs, key=sort_key)
