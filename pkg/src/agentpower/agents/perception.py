"""Prompt rendering: what an agent sees at the start of a round."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..errors import ProtocolViolation
from ..radio_env import Scenario
from .memory import AgentState


class Mode(str, Enum):
    STANDALONE = "standalone"
    COOPERATIVE = "cooperative"


STANDALONE_SYSTEM = (
    "Consider a wireless network with {user_num} transmitter-receiver pair sharing the same spectrum. "
    "Each user has allocated bandwidth of {bandwidth} kHz. Maximum power allowed is {Pmax}. "
    "The target rate of all Tx-Rx pairs: {rate} kbps."
)
STANDALONE_USER = (
    "You are {user_id}. Your current transmission power: {power} W. "
    "Your current transmission rate: {rate} kbps. "
    "You should adjust your transmit power to reach the targeted rate: {target} kbps "
    "while help to minimize the total power of the network. "
    "Think step by step, consider interference with others and your past history. "
    "Once you made a final decision, output in the following format: {{action:power, explanation:thought}}."
)
COOPERATIVE_SYSTEM = (
    "Consider a wireless network with {user_num} paired Tx and Rx users sharing the same spectrum. "
    "Each user has allocated bandwidth of {bandwidth} kHz. Maximum power allowed is {Pmax}. "
    "The target rate of all users: {rate} kbps."
)
COOPERATIVE_USER = (
    "You are {user_id}. Your current transmission power: {power} W. "
    "Your current transmission rate: {rate} kbps. "
    "You should adjust your transmit power to reach the targeted rate: {target} kbps "
    "while help to minimize the total power of the network. "
    "Think step by step, consider interference and cooperation proposals with others. "
    "Be careful of not increasing drastically your power since it is damaging to increase "
    "the interference level for all Tx-Rx pairs. "
    "If you received proposals, your explanation should include the corresponding reasoning "
    "for accepting or rejecting them. You can propose cooperation plan to other users. "
    'If cooperation is needed, send a concise proposal to another user using this format: '
    '"To User [id]: [content of proposal]". '
    "Once you made a final decision, output in the following format: "
    "{{action:power, message:proposal explanation:thought}}."
)


@dataclass(frozen=True)
class Prompt:
    system_text: str
    user_text: str
    memory_text: str


def _f3(x: float) -> str:
    return f"{x:.3f}"


def render_prompt(
    scenario: Scenario,
    agent: AgentState,
    mode: Mode | str,
    current_rate_kbps: float,
    round_: int,
) -> Prompt:
    if round_ < 1:
        raise ValueError("round must be at least 1")
    mode = Mode(mode)
    uid = agent.user_id
    system_tpl, user_tpl = (
        (COOPERATIVE_SYSTEM, COOPERATIVE_USER) if mode is Mode.COOPERATIVE else (STANDALONE_SYSTEM, STANDALONE_USER)
    )
    system = system_tpl.format(
        user_num=scenario.n_pairs,
        bandwidth=_f3(scenario.bandwidth_khz),
        Pmax=_f3(scenario.p_max),
        rate=", ".join(_f3(t) for t in scenario.targets_kbps),
    )
    user = user_tpl.format(
        user_id=uid,
        power=_f3(agent.last_power_w),
        rate=_f3(current_rate_kbps),
        target=_f3(scenario.targets_kbps[uid - 1]),
    )
    if mode is Mode.COOPERATIVE:
        stale = [p for p in agent.inbox if p.round_sent != round_ - 1]
        if stale:
            raise ProtocolViolation(f"user {uid}: inbox holds proposals not sent in round {round_ - 1}")
        if agent.inbox:
            lines = "\n".join(f'From User {p.from_user}: "{p.text}"' for p in agent.inbox)
            user += f"\nProposals received:\n{lines}"
        else:
            user += "\nProposals received: none"
    return Prompt(system_text=system, user_text=user, memory_text=agent.memory_text(mode is Mode.COOPERATIVE))
