"""Round-based game loop, divergent-scenario batches, and multi-mode sweeps."""
from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .agents import (
    ActionRecord,
    AgentState,
    DecisionBackend,
    DecisionRequest,
    Mode,
    ScriptedBackend,
    apply_round,
    parse_response,
    render_prompt,
    route_proposals,
)
from .dpc import analyze_feasibility, run_dpc
from .errors import FilterExhausted, GatewayError
from .metrics import SummaryRow, summarize
from .radio_env import GenerationConfig, Scenario, compute_metrics, generate_scenario
from .runlog import MODE_ORDER, RoundRecord, RunConfig, RunLog, RunMode
from .seeding import derive_seed

log = logging.getLogger(__name__)

DRAWS_PER_SCENARIO = 1000
DEFAULT_BATCH = 25
TARGET_TOL_KBPS = 1e-9


def prompt_hash(system_text: str, user_text: str, memory_text: str) -> str:
    h = hashlib.sha256()
    for part in (system_text, user_text, memory_text):
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()[:16]


def _decide_all(
    backend: DecisionBackend,
    requests: list[DecisionRequest],
    order: Sequence[int],
    jobs: int,
) -> list[str | Exception]:
    def call(req: DecisionRequest) -> str | Exception:
        try:
            return backend.decide(req)
        except GatewayError as exc:
            return exc

    results: list[str | Exception] = [""] * len(requests)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for i, out in zip(order, pool.map(call, [requests[i] for i in order])):
                results[i] = out
    else:
        for i in order:
            results[i] = call(requests[i])
    return results


def run(
    config: RunConfig,
    scenario: Scenario,
    backend: DecisionBackend | None = None,
    *,
    scenario_index: int | None = None,
    agent_order: Sequence[int] | None = None,
    jobs: int = 1,
) -> RunLog:
    """Play ``config.rounds`` rounds on ``scenario``.

    Agents move simultaneously: every decision in a round is made against the
    metrics and inboxes as they stood at the start of that round. Proposals
    sent in round k reach their recipients in round k+1. A backend failure
    or unparseable reply keeps that agent's previous power.
    ``agent_order`` only changes the order backends are called in.
    """
    if config.mode is RunMode.DPC:
        out = run_dpc(scenario, config.rounds, config)
        out.scenario_index = scenario_index
        return out

    backend = backend or ScriptedBackend(seed=config.seed)
    mode = Mode.COOPERATIVE if config.cooperative else Mode.STANDALONE
    n = scenario.n_pairs
    order = list(range(n)) if agent_order is None else list(agent_order)
    if sorted(order) != list(range(n)):
        raise ValueError("agent_order must be a permutation of agent indices")

    agents = [AgentState(user_id=i + 1, last_power_w=float(p)) for i, p in enumerate(scenario.p_init)]
    powers = np.array(scenario.p_init, dtype=np.float64)
    runlog = RunLog(
        config=config,
        scenario=scenario,
        nondeterministic=not getattr(backend, "deterministic", False),
        scenario_index=scenario_index,
    )

    for rnd in range(1, config.rounds + 1):
        start = compute_metrics(scenario, powers)
        requests, hashes = [], []
        for a in agents:
            prompt = render_prompt(scenario, a, mode, start.rate_kbps[a.user_id - 1], rnd)
            hashes.append(prompt_hash(prompt.system_text, prompt.user_text, prompt.memory_text))
            requests.append(
                DecisionRequest(
                    prompt=prompt,
                    user_id=a.user_id,
                    round=rnd,
                    mode=mode,
                    power_w=a.last_power_w,
                    current_rate_kbps=float(start.rate_kbps[a.user_id - 1]),
                    target_kbps=float(scenario.targets_kbps[a.user_id - 1]),
                    bandwidth_khz=scenario.bandwidth_khz,
                    p_max=scenario.p_max,
                    n_agents=n,
                    inbox=tuple(a.inbox) if mode is Mode.COOPERATIVE else (),
                )
            )
        replies = _decide_all(backend, requests, order, jobs)

        records: list[ActionRecord] = []
        errors = 0
        for a, reply in zip(agents, replies):
            if isinstance(reply, Exception):
                errors += 1
                log.warning("round %d user %d: backend failed (%s); holding power", rnd, a.user_id, reply)
                rec = ActionRecord(
                    power_w=a.last_power_w,
                    explanation=f"backend error: {type(reply).__name__}",
                    parse_ok=False,
                )
            else:
                rec = parse_response(reply, scenario.p_max, a.last_power_w, from_user=a.user_id, round_sent=rnd)
                if mode is Mode.STANDALONE and rec.proposals:
                    # no message channel without cooperation
                    rec = ActionRecord(rec.power_w, (), rec.explanation, rec.raw_response, rec.parse_ok)
            records.append(rec)

        routing = None
        if mode is Mode.COOPERATIVE:
            routing = route_proposals(((a.user_id, r) for a, r in zip(agents, records)), rnd, n)
        for a, rec in zip(agents, records):
            apply_round(a, rec, start.rate_kbps[a.user_id - 1], rnd)
            if routing is not None:
                a.inbox = routing.inboxes[a.user_id]

        powers = np.array([rec.power_w for rec in records], dtype=np.float64)
        end = compute_metrics(scenario, powers)
        runlog.rounds.append(
            RoundRecord(
                round=rnd,
                powers=powers,
                sinr=end.sinr,
                rate_kbps=end.rate_kbps,
                observed_rate_kbps=np.array(start.rate_kbps),
                actions=records,
                prompt_hashes=hashes,
                emitted=routing.emitted if routing else 0,
                delivered=routing.delivered if routing else 0,
                dropped=routing.dropped if routing else 0,
                backend_errors=errors,
            )
        )
        if config.early_stop and np.all(end.rate_kbps >= scenario.targets_kbps - TARGET_TOL_KBPS):
            break
    return runlog


@dataclass
class DivergentBatch:
    n_pairs: int
    seed: int
    scenarios: list[Scenario] = field(default_factory=list)
    draw_indices: list[int] = field(default_factory=list)
    draws: int = 0

    @property
    def acceptance_rate(self) -> float:
        return len(self.scenarios) / self.draws if self.draws else 0.0

    def __iter__(self) -> Iterator[Scenario]:
        return iter(self.scenarios)

    def __len__(self) -> int:
        return len(self.scenarios)

    def __getitem__(self, i: int) -> Scenario:
        return self.scenarios[i]


def scenario_seed(root: int, n_pairs: int, draw: int) -> int:
    return derive_seed(root, "scenario", n_pairs, draw)


def generate_divergent_batch(
    n_pairs: int,
    count: int,
    seed: int,
    config: GenerationConfig | None = None,
    divergent_only: bool = True,
) -> DivergentBatch:
    """Draw seeded scenarios until ``count`` have an infeasible DPC target set.

    Draw ``k`` always uses the same derived seed, so a larger batch begins
    with the scenarios of a smaller one.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    batch = DivergentBatch(n_pairs=n_pairs, seed=seed)
    limit = DRAWS_PER_SCENARIO * count
    while len(batch.scenarios) < count:
        if batch.draws >= limit:
            raise FilterExhausted(
                f"only {len(batch.scenarios)} of {count} divergent scenarios for N={n_pairs} after {limit} draws"
            )
        sc = generate_scenario(scenario_seed(seed, n_pairs, batch.draws), n_pairs, config)
        if not divergent_only or not analyze_feasibility(sc).feasible:
            batch.scenarios.append(sc)
            batch.draw_indices.append(batch.draws)
        batch.draws += 1
    return batch


def policy_seed(root: int, n_pairs: int, index: int) -> int:
    return derive_seed(root, "policy", n_pairs, index)


@dataclass
class SweepResult:
    rows: list[SummaryRow]
    runs: list[RunLog]
    batches: dict[int, DivergentBatch]

    @property
    def emitted(self) -> int:
        return sum(r.emitted for r in self.runs)

    @property
    def delivered(self) -> int:
        return sum(r.delivered for r in self.runs)

    @property
    def dropped(self) -> int:
        return sum(r.dropped for r in self.runs)


def sweep(
    user_counts: Sequence[int],
    scenarios_per_count: int = DEFAULT_BATCH,
    modes: Sequence[RunMode | str] = MODE_ORDER,
    backend: str = "scripted",
    seed: int = 0,
    *,
    rounds: int = 10,
    backend_factory: Callable[[int], DecisionBackend] | None = None,
    generation: GenerationConfig | None = None,
    jobs: int = 1,
    on_run: Callable[[RunLog], None] | None = None,
) -> SweepResult:
    """Run every mode on the same divergent batch for each user count.

    ``backend_factory`` builds a backend from a per-scenario policy seed; it
    defaults to the scripted backend.
    """
    if not user_counts or not modes:
        raise ValueError("user_counts and modes must be nonempty")
    modes = sorted({RunMode(m) for m in modes}, key=MODE_ORDER.index)
    make_backend = backend_factory or (lambda s: ScriptedBackend(seed=s))

    batches = {n: generate_divergent_batch(n, scenarios_per_count, seed, generation) for n in sorted(set(user_counts))}
    tasks = []
    for n, batch in batches.items():
        for mode in modes:
            for k, sc in enumerate(batch):
                pseed = policy_seed(seed, n, k)
                cfg = RunConfig(mode=mode, rounds=rounds, backend=backend, seed=pseed, scenario_ref=f"n{n}/s{k:03d}")
                tasks.append((cfg, sc, k))

    def one(task: tuple[RunConfig, Scenario, int]) -> RunLog:
        cfg, sc, k = task
        be = None if cfg.mode is RunMode.DPC else make_backend(cfg.seed)
        return run(cfg, sc, be, scenario_index=k)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(one, tasks))
    else:
        runs = [one(t) for t in tasks]
    if on_run is not None:
        for r in runs:
            on_run(r)
    return SweepResult(rows=summarize(runs), runs=runs, batches=batches)
