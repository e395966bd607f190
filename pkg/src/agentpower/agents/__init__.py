"""Agent runtime split along perception, memory, planning and action."""
from .action import ActionRecord, Proposal, Routing, parse_response, route_proposals
from .memory import AgentState, MemoryEntry, apply_round
from .perception import Mode, Prompt, render_prompt
from .planning import (
    DecisionBackend,
    DecisionRequest,
    ScriptedBackend,
    ScriptedDecision,
    render_response,
    scripted_decide,
    scripted_policy,
)

__all__ = [
    "ActionRecord",
    "AgentState",
    "DecisionBackend",
    "DecisionRequest",
    "MemoryEntry",
    "Mode",
    "Prompt",
    "Proposal",
    "Routing",
    "ScriptedBackend",
    "ScriptedDecision",
    "apply_round",
    "parse_response",
    "render_prompt",
    "render_response",
    "route_proposals",
    "scripted_decide",
    "scripted_policy",
]
