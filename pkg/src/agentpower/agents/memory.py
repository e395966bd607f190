from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ProtocolViolation
from .action import ActionRecord, Proposal


@dataclass(frozen=True)
class MemoryEntry:
    user_id: int
    round: int
    observation_rate_kbps: float
    action_power_w: float
    message: str | None = None
    explanation: str = ""

    def __post_init__(self) -> None:
        if self.round < 1:
            raise ProtocolViolation("memory rounds start at 1")

    def serialize(self, cooperative: bool) -> str:
        parts = [
            f"user:{self.user_id}",
            f"round:{self.round}",
            f"observation:{self.observation_rate_kbps:.3f}",
            f"action:{self.action_power_w:.3f}",
        ]
        if cooperative:
            parts.append(f"message:{self.message or 'none'}")
        parts.append(f"explanation:{self.explanation}")
        return "{" + ", ".join(parts) + "}"


@dataclass
class AgentState:
    user_id: int
    last_power_w: float
    memory: list[MemoryEntry] = field(default_factory=list)
    inbox: list[Proposal] = field(default_factory=list)

    def memory_text(self, cooperative: bool) -> str:
        return "\n".join(e.serialize(cooperative) for e in self.memory)


def apply_round(agent: AgentState, record: ActionRecord, observed_rate: float, round_: int) -> AgentState:
    """Record one decided round in the agent's memory, in place.

    Sets the new power and empties the inbox. Returns the same agent.
    """
    if agent.memory and round_ <= agent.memory[-1].round:
        raise ProtocolViolation(
            f"user {agent.user_id}: round {round_} already recorded (last is {agent.memory[-1].round})"
        )
    agent.memory.append(
        MemoryEntry(
            user_id=agent.user_id,
            round=round_,
            observation_rate_kbps=float(observed_rate),
            action_power_w=record.power_w,
            message=record.message,
            explanation=record.explanation,
        )
    )
    agent.last_power_w = record.power_w
    agent.inbox = []
    return agent
