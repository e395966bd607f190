"""Foschini-Miljanic distributed power control and its feasibility analysis."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DegenerateLink
from .radio_env import LinkMetrics, Scenario, compute_metrics
from .runlog import RoundRecord, RunConfig, RunLog, RunMode

RHO_TOL = 1e-10
RHO_MAX_ITER = 10_000


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    target_sinr: np.ndarray
    spectral_radius: float
    fixed_point: np.ndarray | None
    feasible: bool
    iterations: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "target_sinr": self.target_sinr.tolist(),
            "spectral_radius": self.spectral_radius,
            "fixed_point": None if self.fixed_point is None else self.fixed_point.tolist(),
            "feasible": self.feasible,
        }


def target_sinr(scenario: Scenario) -> np.ndarray:
    return np.exp2(scenario.targets_kbps / scenario.bandwidth_khz) - 1.0


def dpc_step(scenario: Scenario, powers, gamma: np.ndarray | None = None) -> np.ndarray:
    """One synchronous Foschini-Miljanic update, clamped to ``[0, p_max]``.

    Each link scales its power by target SINR over measured SINR. A link with
    zero measured SINR and a positive target jumps to ``p_max``; a link with
    zero target switches off.
    """
    p = np.asarray(powers, dtype=np.float64)
    gam = target_sinr(scenario) if gamma is None else gamma
    sinr = compute_metrics(scenario, p).sinr
    out = np.empty_like(p)
    for i in range(p.size):
        if gam[i] == 0.0:
            out[i] = 0.0
        elif sinr[i] == 0.0:
            out[i] = scenario.p_max
        else:
            out[i] = min(scenario.p_max, gam[i] / sinr[i] * p[i])
    return out


def interference_system(scenario: Scenario, gamma: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(F, u)`` such that the target-SINR fixed point solves ``p = F p + u``."""
    gam = target_sinr(scenario) if gamma is None else gamma
    g = scenario.gains
    direct = np.diagonal(g)
    if np.any(direct == 0.0):
        bad = [int(i) + 1 for i in np.flatnonzero(direct == 0.0)]
        raise DegenerateLink(f"zero direct-link gain for user(s) {bad}")
    # F[i, j] = gamma_i * g[j, i] / g[i, i]
    F = (gam / direct)[:, None] * g.T
    np.fill_diagonal(F, 0.0)
    u = gam / direct
    return F, u


def spectral_radius(F: np.ndarray, tol: float = RHO_TOL, max_iter: int = RHO_MAX_ITER) -> tuple[float, int]:
    """Perron root of a nonnegative matrix by shifted power iteration.

    Iterates ``x <- (F + c I) x`` where ``c`` tracks the current estimate of
    the root. The shift keeps the iteration from cycling on periodic matrices
    (every 2x2 interference matrix is one) and the Collatz-Wielandt bounds
    ``min (Fx)_i / x_i <= rho <= max (Fx)_i / x_i`` give the stopping rule.
    Returns the estimate and the iteration count.
    """
    F = np.asarray(F, dtype=np.float64)
    n = F.shape[0]
    if n == 0 or not np.any(F):
        return 0.0, 0
    x = np.ones(n)
    lo = hi = 0.0
    for it in range(1, max_iter + 1):
        y = F @ x
        ratios = y / x
        lo, hi = float(ratios.min()), float(ratios.max())
        if hi - lo <= tol * max(1.0, hi):
            return 0.5 * (lo + hi), it
        shift = 0.5 * (lo + hi)
        x = y + shift * x
        x /= x.max()
        # floor keeps the ratios defined on reducible matrices
        np.maximum(x, 1e-300, out=x)
    return 0.5 * (lo + hi), max_iter


def analyze_feasibility(scenario: Scenario) -> FeasibilityReport:
    gam = target_sinr(scenario)
    F, u = interference_system(scenario, gam)
    rho, iters = spectral_radius(F)
    fixed = None
    feasible = False
    if rho < 1.0:
        fixed = np.linalg.solve(np.eye(scenario.n_pairs) - F, u)
        feasible = bool(np.all(fixed >= 0.0) and np.all(fixed <= scenario.p_max))
    return FeasibilityReport(
        target_sinr=gam, spectral_radius=rho, fixed_point=fixed, feasible=feasible, iterations=iters
    )


def is_divergent(scenario: Scenario) -> bool:
    return not analyze_feasibility(scenario).feasible


def dpc_trajectory(scenario: Scenario, rounds: int) -> list[tuple[np.ndarray, LinkMetrics]]:
    """Powers after each of ``rounds`` updates from ``p_init`` with the metrics they induce."""
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    # raises DegenerateLink before any iteration
    interference_system(scenario)
    gam = target_sinr(scenario)
    p = np.array(scenario.p_init, dtype=np.float64)
    out = []
    for _ in range(rounds):
        p = dpc_step(scenario, p, gam)
        out.append((p.copy(), compute_metrics(scenario, p)))
    return out


def run_dpc(scenario: Scenario, rounds: int = 10, config: RunConfig | None = None) -> RunLog:
    cfg = config or RunConfig(mode=RunMode.DPC, rounds=rounds)
    log = RunLog(config=cfg, scenario=scenario)
    for r, (p, metrics) in enumerate(dpc_trajectory(scenario, rounds), start=1):
        log.rounds.append(RoundRecord(round=r, powers=p, sinr=metrics.sinr, rate_kbps=metrics.rate_kbps))
    return log
