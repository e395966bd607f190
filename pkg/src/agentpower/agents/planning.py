"""Decision backends: the part of an agent that turns a prompt into a reply."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .action import Proposal
from .perception import Mode, Prompt

DAMPING = 0.5
PROPOSE_DEFICIT = 0.25
ACCEPT_DEFICIT = 0.10
HOLD_REQUEST = "hold or reduce your power next round"


@dataclass(frozen=True)
class DecisionRequest:
    """Everything a backend may look at for one agent-round.

    Remote backends only read ``prompt``; the scripted backend reads the
    structured fields, which carry the same values the prompt shows.
    """

    prompt: Prompt
    user_id: int
    round: int
    mode: Mode
    power_w: float
    current_rate_kbps: float
    target_kbps: float
    bandwidth_khz: float
    p_max: float
    n_agents: int
    inbox: tuple[Proposal, ...] = ()


class DecisionBackend(Protocol):
    deterministic: bool

    def decide(self, request: DecisionRequest) -> str: ...


@dataclass(frozen=True)
class ScriptedDecision:
    power_w: float
    recipients: tuple[int, ...]
    explanation: str
    accepted: bool = False


def _pick_recipient(seed: int, user_id: int, round_: int, n_agents: int) -> int:
    # keyed on (seed, user, round) only so evaluation order cannot matter
    rng = np.random.default_rng([seed, user_id, round_])
    others = [k for k in range(1, n_agents + 1) if k != user_id]
    return others[int(rng.integers(len(others)))]


def scripted_policy(
    *,
    user_id: int,
    power_w: float,
    current_rate_kbps: float,
    target_kbps: float,
    bandwidth_khz: float,
    p_max: float,
    n_agents: int,
    mode: Mode | str,
    inbox: Sequence[Proposal] = (),
    round_: int,
    seed: int,
) -> ScriptedDecision:
    mode = Mode(mode)
    p = float(power_w)
    wanted = math.expm1(target_kbps / bandwidth_khz * math.log(2.0))
    seen = math.expm1(current_rate_kbps / bandwidth_khz * math.log(2.0))
    if seen <= 0.0:
        new_p = min(p_max, 2.0 * p)
        why = "my rate is zero, doubling power"
    else:
        new_p = 0.0 if p == 0.0 else min(max(p * (wanted / seen) ** DAMPING, 0.0), p_max)
        why = f"moving halfway toward the SINR my target needs ({wanted:.3f} vs {seen:.3f} now)"

    deficit = (target_kbps - current_rate_kbps) / target_kbps if target_kbps > 0 else 0.0
    recipients: tuple[int, ...] = ()
    accepted = False
    if mode is Mode.COOPERATIVE:
        if inbox:
            senders = " and ".join(f"User {q.from_user}" for q in inbox)
            if deficit < ACCEPT_DEFICIT:
                new_p = p
                accepted = True
                why = f"accepting the proposal from {senders} and holding my power since I am near my target"
            else:
                why += f"; rejecting the proposal from {senders} since my rate is {deficit:.0%} below target"
        if deficit > PROPOSE_DEFICIT and n_agents > 1:
            k = _pick_recipient(seed, user_id, round_, n_agents)
            recipients = (k,)
            why += f"; asking User {k} to ease interference"
    return ScriptedDecision(power_w=new_p, recipients=recipients, explanation=why, accepted=accepted)


def render_response(decision: ScriptedDecision, mode: Mode | str) -> str:
    """Write a decision in the reply format the prompt templates ask for."""
    action = f"{decision.power_w:.10f}"
    if Mode(mode) is Mode.COOPERATIVE:
        msg = " ".join(f"To User {k}: {HOLD_REQUEST}" for k in decision.recipients) or "none"
        return f'{{action: {action}, message: "{msg}", explanation: "{decision.explanation}"}}'
    return f'{{action: {action}, explanation: "{decision.explanation}"}}'


def scripted_decide(request: DecisionRequest, seed: int) -> str:
    decision = scripted_policy(
        user_id=request.user_id,
        power_w=request.power_w,
        current_rate_kbps=request.current_rate_kbps,
        target_kbps=request.target_kbps,
        bandwidth_khz=request.bandwidth_khz,
        p_max=request.p_max,
        n_agents=request.n_agents,
        mode=request.mode,
        inbox=request.inbox,
        round_=request.round,
        seed=seed,
    )
    return render_response(decision, request.mode)


@dataclass
class ScriptedBackend:
    """Deterministic damped-multiplicative stand-in for a language model."""

    seed: int = 0
    deterministic: bool = field(default=True, init=False)

    def decide(self, request: DecisionRequest) -> str:
        return scripted_decide(request, self.seed)
