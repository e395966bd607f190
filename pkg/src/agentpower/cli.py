"""Command-line entry point.

Exit codes: 0 success, 1 runtime error, 2 configuration or precondition error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from .agents import ScriptedBackend
from .dpc import analyze_feasibility
from .errors import AgentPowerError, FilterExhausted, InvalidScenario
from .gateway import API_KEY_ENV, GatewayConfig, RemoteBackend, TranscriptLog
from .metrics import run_summary, trajectory_csv
from .orchestrator import DEFAULT_BATCH, generate_divergent_batch, run, scenario_seed, sweep
from .radio_env import GenerationConfig, Scenario, generate_scenario
from .runlog import MODE_ORDER, RunConfig, RunMode
from .storage import atomic_write, load_run_logs, write_manifest, write_report

log = logging.getLogger("agentpower")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def _scenario_doc(sc: Scenario) -> str:
    doc = sc.to_dict()
    doc["feasibility"] = analyze_feasibility(sc).to_dict()
    return json.dumps(doc, indent=2) + "\n"


def _load_scenario(path: str) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"scenario file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file is not JSON: {path}: {exc}") from exc
    doc.pop("feasibility", None)
    try:
        return Scenario.from_dict(doc)
    except (KeyError, InvalidScenario) as exc:
        raise ConfigError(f"bad scenario document {path}: {exc}") from exc


def _gateway_config(args: argparse.Namespace) -> GatewayConfig:
    if not os.environ.get(API_KEY_ENV):
        raise ConfigError(f"remote backend needs the {API_KEY_ENV} environment variable")
    if not args.base_url or not args.model:
        raise ConfigError("remote backend needs --base-url and --model")
    return GatewayConfig.from_env(
        base_url=args.base_url,
        model_name=args.model,
        temperature=args.temperature,
        max_tokens=args.max_tokens,
        timeout_s=args.timeout,
        max_retries=args.retries,
    )


def _modes(text: str) -> list[RunMode]:
    if text == "all":
        return list(MODE_ORDER)
    try:
        return [RunMode(m.strip()) for m in text.split(",") if m.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("user counts must be positive")
    return vals


def cmd_scenario_gen(args: argparse.Namespace) -> int:
    out = Path(args.out)
    gen = GenerationConfig(p_max=args.p_max, bandwidth_khz=args.bandwidth)
    if args.divergent_only:
        batch = generate_divergent_batch(args.n, args.count, args.seed, gen)
        items = list(zip(batch.draw_indices, batch.scenarios))
        log.info("kept %d of %d draws (acceptance %.3f)", len(batch), batch.draws, batch.acceptance_rate)
    else:
        items = [(k, generate_scenario(scenario_seed(args.seed, args.n, k), args.n, gen)) for k in range(args.count)]
    files = [
        atomic_write(out / f"scenario_n{args.n}_seed{args.seed}_{k:03d}.json", _scenario_doc(sc)) for k, sc in items
    ]
    write_manifest(out, "scenario gen", {**vars_clean(args), "draw_indices": [k for k, _ in items]}, files)
    for f in files:
        print(f)
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    sc = _load_scenario(args.scenario)
    print(json.dumps(analyze_feasibility(sc).to_dict(), indent=2))
    return EXIT_OK


def _write_transcripts(path: Path, runlog) -> Path:
    lines = []
    for rnd in runlog.rounds:
        for uid, (h, act) in enumerate(zip(rnd.prompt_hashes, rnd.actions), start=1):
            rec = {"round": rnd.round, "user": uid, "prompt_hash": h, "raw_response": act.raw_response,
                   "parsed": {k: v for k, v in act.to_dict().items() if k != "raw_response"}}
            lines.append(json.dumps(rec, sort_keys=True))
    return atomic_write(path, "".join(line + "\n" for line in lines))


def cmd_run(args: argparse.Namespace) -> int:
    mode = RunMode(args.mode)
    if mode is not RunMode.DPC and args.backend == "remote":
        gw = _gateway_config(args)
    sc = _load_scenario(args.scenario)
    out = Path(args.out)
    cfg = RunConfig(
        mode=mode, rounds=args.rounds, backend=args.backend, seed=args.seed,
        scenario_ref=Path(args.scenario).name, early_stop=args.early_stop,
    )
    backend = None
    if mode is not RunMode.DPC:
        if args.backend == "remote":
            out.mkdir(parents=True, exist_ok=True)
            backend = RemoteBackend(gw, TranscriptLog(out / "gateway.jsonl"))
        else:
            backend = ScriptedBackend(seed=args.seed)
    runlog = run(cfg, sc, backend, jobs=args.jobs)
    files = [
        atomic_write(out / "run.jsonl", runlog.to_jsonl()),
        atomic_write(out / "trajectory.csv", trajectory_csv(runlog)),
    ]
    s = run_summary(runlog)
    summary = {
        "n": s.n_pairs, "mode": s.mode, "rate_gap_kbps": s.rate_gap_kbps, "total_power_w": s.total_power_w,
        "msgs_per_tx": s.msgs_per_tx, "emitted": runlog.emitted, "delivered": runlog.delivered,
        "dropped": runlog.dropped, "backend_errors": sum(r.backend_errors for r in runlog.rounds),
        "final_powers": runlog.final.powers.tolist(), "config": cfg.to_dict(),
        "nondeterministic": runlog.nondeterministic,
    }
    files.append(atomic_write(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n"))
    if mode is not RunMode.DPC:
        files.append(_write_transcripts(out / "transcripts.jsonl", runlog))
        if args.backend == "remote":
            files.append(out / "gateway.jsonl")
    manifest_cfg = {**vars_clean(args), "scenario_seed": sc.seed}
    if mode is not RunMode.DPC and args.backend == "remote":
        manifest_cfg["gateway"] = gw.public_dict()
    write_manifest(out, "run", manifest_cfg, files)
    print(json.dumps({k: summary[k] for k in ("n", "mode", "rate_gap_kbps", "total_power_w", "msgs_per_tx")}))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    out = Path(args.out)
    factory = None
    if args.backend == "remote" and any(m is not RunMode.DPC for m in args.modes):
        gw = _gateway_config(args)
        out.mkdir(parents=True, exist_ok=True)
        transcript = TranscriptLog(out / "gateway.jsonl")
        factory = lambda _seed: RemoteBackend(gw, transcript)  # noqa: E731
    files: list[Path] = []

    def save(r) -> None:
        name = f"s{r.scenario_index:03d}.jsonl"
        files.append(atomic_write(out / "runs" / f"n{r.scenario.n_pairs}" / r.config.mode.value / name, r.to_jsonl()))

    result = sweep(
        args.users, args.per, args.modes, args.backend, args.seed,
        rounds=args.rounds, backend_factory=factory, jobs=args.jobs, on_run=save,
    )
    files.extend(write_report(result.runs, out))
    cfg = {**vars_clean(args), "acceptance_rate": {str(n): b.acceptance_rate for n, b in result.batches.items()}}
    write_manifest(out, "sweep", cfg, files)
    print((out / "summary.csv").read_text(encoding="utf-8"), end="")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    logs = Path(args.logs)
    if not logs.is_dir():
        raise ConfigError(f"logs directory not found: {logs}")
    runs = load_run_logs(logs)
    if not runs:
        print(f"warning: no run logs found under {logs}", file=sys.stderr)
    csv_path, _ = write_report(runs, Path(args.out) if args.out else logs)
    print(csv_path.read_text(encoding="utf-8"), end="")
    return EXIT_OK


def vars_clean(args: argparse.Namespace) -> dict:
    d = {k: v for k, v in vars(args).items() if k not in ("func",)}
    if "modes" in d:
        d["modes"] = [m.value for m in d["modes"]]
    return d


def _add_gateway_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("remote backend")
    g.add_argument("--base-url", help="OpenAI-compatible API root, e.g. http://host/v1")
    g.add_argument("--model")
    g.add_argument("--temperature", type=float, default=0.2)
    g.add_argument("--max-tokens", type=int, default=512)
    g.add_argument("--timeout", type=float, default=60.0, help="seconds per request")
    g.add_argument("--retries", type=int, default=3)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agentpower", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    scen = sub.add_parser("scenario", help="scenario files").add_subparsers(dest="action", required=True)
    gen = scen.add_parser("gen", help="generate seeded scenario documents")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--divergent-only", action="store_true")
    gen.add_argument("--p-max", type=float, default=10.0)
    gen.add_argument("--bandwidth", type=float, default=10.0, help="kHz")
    gen.add_argument("--out", default="scenarios")
    gen.set_defaults(func=cmd_scenario_gen)

    an = sub.add_parser("analyze", help="print the DPC feasibility report of a scenario")
    an.add_argument("--scenario", required=True)
    an.set_defaults(func=cmd_analyze)

    rp = sub.add_parser("run", help="run one experiment")
    rp.add_argument("--scenario", required=True)
    rp.add_argument("--mode", choices=[m.value for m in RunMode], default="dpc")
    rp.add_argument("--backend", choices=["scripted", "remote"], default="scripted")
    rp.add_argument("--rounds", type=int, default=10)
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--early-stop", action="store_true")
    rp.add_argument("--jobs", type=int, default=1, help="concurrent backend calls per round")
    rp.add_argument("--out", default="run")
    _add_gateway_flags(rp)
    rp.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="run all modes over divergent batches")
    sw.add_argument("--users", type=_int_list, default=[2, 4, 10])
    sw.add_argument("--per", type=int, default=DEFAULT_BATCH)
    sw.add_argument("--modes", type=_modes, default=list(MODE_ORDER))
    sw.add_argument("--backend", choices=["scripted", "remote"], default="scripted")
    sw.add_argument("--rounds", type=int, default=10)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--jobs", type=int, default=1)
    sw.add_argument("--out", default="sweep")
    _add_gateway_flags(sw)
    sw.set_defaults(func=cmd_sweep)

    rep = sub.add_parser("report", help="regenerate summary tables from run logs")
    rep.add_argument("--logs", required=True)
    rep.add_argument("--out", help="defaults to the logs directory")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FilterExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (AgentPowerError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
