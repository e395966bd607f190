"""Interference-limited physical layer: scenario generation, SINR and rates.

Gains are stored noise-normalized with ``gains[j, i]`` the power gain from
transmitter ``j`` to receiver ``i``; the diagonal holds the direct links.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .errors import DimensionError, InvalidScenario

SCHEMA_VERSION = 1
NOISE_POWER = 1.0


@dataclass(frozen=True)
class GenerationConfig:
    p_max: float = 10.0
    bandwidth_khz: float = 10.0
    area_side_m: float = 10.0
    p_init_low: float = 1.0
    p_init_high: float = 5.0
    mu_low: float = 0.5
    mu_high: float = 1.5
    amplitude_mean: float = 1.0

    @property
    def rayleigh_scale(self) -> float:
        # E|h| = sigma * sqrt(pi / 2)
        return self.amplitude_mean * math.sqrt(2.0 / math.pi)


def _frozen(values: Any, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise DimensionError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Scenario:
    """One network instance. Arrays are read-only."""

    n_pairs: int
    gains: np.ndarray
    positions: np.ndarray  # (n_pairs, 2, 2): [tx_xy, rx_xy] per pair
    area_side_m: float
    p_init: np.ndarray
    p_max: float
    bandwidth_khz: float
    mu: np.ndarray
    targets_kbps: np.ndarray
    seed: int | None = None

    def __post_init__(self) -> None:
        for name, ndim in (("gains", 2), ("positions", 3), ("p_init", 1), ("mu", 1), ("targets_kbps", 1)):
            object.__setattr__(self, name, _frozen(getattr(self, name), ndim))
        n = self.n_pairs
        if n < 1:
            raise InvalidScenario("n_pairs must be at least 1")
        if self.gains.shape != (n, n):
            raise DimensionError(f"gains must be {n}x{n}, got {self.gains.shape}")
        for name in ("p_init", "mu", "targets_kbps"):
            if getattr(self, name).shape != (n,):
                raise DimensionError(f"{name} must have length {n}")
        if self.positions.shape != (n, 2, 2):
            raise DimensionError(f"positions must have shape ({n}, 2, 2)")
        if not self.p_max > 0 or not self.bandwidth_khz > 0:
            raise InvalidScenario("p_max and bandwidth_khz must be positive")
        if np.any(self.gains < 0):
            raise InvalidScenario("gains must be nonnegative")
        if np.any(self.p_init < 0) or np.any(self.p_init > self.p_max):
            raise InvalidScenario("p_init must lie in [0, p_max]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "n_pairs": self.n_pairs,
            "gains": self.gains.tolist(),
            "positions": self.positions.tolist(),
            "area_side_m": self.area_side_m,
            "p_init": self.p_init.tolist(),
            "p_max": self.p_max,
            "bandwidth_khz": self.bandwidth_khz,
            "mu": self.mu.tolist(),
            "targets_kbps": self.targets_kbps.tolist(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "Scenario":
        version = doc.get("schema_version")
        if version != SCHEMA_VERSION:
            raise InvalidScenario(f"unsupported scenario schema_version {version!r}")
        return cls(
            n_pairs=int(doc["n_pairs"]),
            gains=doc["gains"],
            positions=doc["positions"],
            area_side_m=float(doc["area_side_m"]),
            p_init=doc["p_init"],
            p_max=float(doc["p_max"]),
            bandwidth_khz=float(doc["bandwidth_khz"]),
            mu=doc["mu"],
            targets_kbps=doc["targets_kbps"],
            seed=doc.get("seed"),
        )

    def to_json(self) -> str:
        # json emits floats via repr, the shortest string that round-trips exactly
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class LinkMetrics:
    sinr: np.ndarray
    rate_kbps: np.ndarray


def _check_powers(scenario: Scenario, powers: Sequence[float] | np.ndarray) -> np.ndarray:
    p = np.asarray(powers, dtype=np.float64)
    if p.shape != (scenario.n_pairs,):
        raise DimensionError(f"expected {scenario.n_pairs} powers, got shape {p.shape}")
    return p


def sinr_from(gains: np.ndarray, powers: np.ndarray) -> np.ndarray:
    received = gains * powers[:, None]  # received[j, i] = g[j, i] * p[j]
    signal = np.diagonal(received).copy()
    np.fill_diagonal(received, 0.0)
    interference = received.sum(axis=0)
    return signal / (NOISE_POWER + interference)


def rate_from_sinr(sinr: np.ndarray, bandwidth_khz: float) -> np.ndarray:
    return bandwidth_khz * np.log2(1.0 + sinr)


def compute_metrics(scenario: Scenario, powers: Sequence[float] | np.ndarray) -> LinkMetrics:
    p = _check_powers(scenario, powers)
    sinr = sinr_from(scenario.gains, p)
    return LinkMetrics(sinr=sinr, rate_kbps=rate_from_sinr(sinr, scenario.bandwidth_khz))


def compute_targets(
    gains: np.ndarray, p_init: np.ndarray, mu: np.ndarray, bandwidth_khz: float
) -> np.ndarray:
    """Target rates as ``mu`` times the rate each link achieves at ``p_init``."""
    rates = rate_from_sinr(sinr_from(np.asarray(gains, float), np.asarray(p_init, float)), bandwidth_khz)
    return np.asarray(mu, dtype=np.float64) * rates


def generate_scenario(seed: int, n_pairs: int, config: GenerationConfig | None = None) -> Scenario:
    if n_pairs < 1:
        raise InvalidScenario("n_pairs must be at least 1")
    cfg = config or GenerationConfig()
    rng = np.random.default_rng(seed)
    amplitudes = rng.rayleigh(scale=cfg.rayleigh_scale, size=(n_pairs, n_pairs))
    gains = amplitudes**2
    positions = rng.uniform(0.0, cfg.area_side_m, size=(n_pairs, 2, 2))
    p_init = rng.uniform(cfg.p_init_low, cfg.p_init_high, size=n_pairs)
    mu = rng.uniform(cfg.mu_low, cfg.mu_high, size=n_pairs)
    targets = compute_targets(gains, p_init, mu, cfg.bandwidth_khz)
    return Scenario(
        n_pairs=n_pairs,
        gains=gains,
        positions=positions,
        area_side_m=cfg.area_side_m,
        p_init=p_init,
        p_max=cfg.p_max,
        bandwidth_khz=cfg.bandwidth_khz,
        mu=mu,
        targets_kbps=targets,
        seed=seed,
    )
