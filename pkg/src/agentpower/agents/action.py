"""Turning raw model output into actions, and delivering proposals."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Iterable

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
# "action" key, optional quoting, a separator, then at most a short run of
# non-numeric filler ("power", "W =", quotes) before the value.
_ACTION_RE = re.compile(
    r"""\baction\b["']?\s*[:=]\s*[^\d\-+.,}\n]{0,24}?(""" + _NUMBER + ")",
    re.IGNORECASE,
)
_PROPOSAL_RE = re.compile(r"To\s+User\s*\[?\s*(\d+)\s*\]?\s*:\s*", re.IGNORECASE)
# body ends at a quote, brace, newline, sentence end, or the next proposal
_BODY_END_RE = re.compile(r"""["'}\n]|(?<=[.!?])\s|To\s+User\s*\[?\s*\d+""", re.IGNORECASE)
_EXPLANATION_RE = re.compile(r"""\bexplanation\b["']?\s*[:=]\s*(.*)""", re.IGNORECASE | re.DOTALL)


@dataclass(frozen=True)
class Proposal:
    from_user: int
    to_user: int
    body: str
    round_sent: int = 0

    @property
    def text(self) -> str:
        return f"To User {self.to_user}: {self.body}"

    def to_dict(self) -> dict[str, Any]:
        return {"from_user": self.from_user, "to_user": self.to_user, "body": self.body, "round_sent": self.round_sent}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Proposal":
        return cls(int(d["from_user"]), int(d["to_user"]), str(d["body"]), int(d["round_sent"]))


@dataclass(frozen=True)
class ActionRecord:
    power_w: float
    proposals: tuple[Proposal, ...] = ()
    explanation: str = ""
    raw_response: str = ""
    parse_ok: bool = True

    @property
    def message(self) -> str | None:
        if not self.proposals:
            return None
        return " ".join(p.text for p in self.proposals)

    def to_dict(self) -> dict[str, Any]:
        return {
            "power_w": self.power_w,
            "proposals": [p.to_dict() for p in self.proposals],
            "explanation": self.explanation,
            "raw_response": self.raw_response,
            "parse_ok": self.parse_ok,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ActionRecord":
        return cls(
            power_w=float(d["power_w"]),
            proposals=tuple(Proposal.from_dict(p) for p in d["proposals"]),
            explanation=d["explanation"],
            raw_response=d["raw_response"],
            parse_ok=bool(d["parse_ok"]),
        )


def _clamp(x: float, hi: float) -> float:
    return min(max(x, 0.0), hi)


def _extract_proposals(raw: str, from_user: int, round_sent: int) -> list[Proposal]:
    found = []
    for m in _PROPOSAL_RE.finditer(raw):
        rest = raw[m.end():]
        end = _BODY_END_RE.search(rest)
        body = (rest[: end.start()] if end else rest).strip().rstrip(",;")
        if not body:
            continue
        found.append(Proposal(from_user=from_user, to_user=int(m.group(1)), body=body, round_sent=round_sent))
    return found


def _extract_explanation(raw: str) -> str:
    m = _EXPLANATION_RE.search(raw)
    if not m:
        return ""
    text = m.group(1).strip()
    if text.endswith("}"):
        text = text[:-1].rstrip()
    return text.strip().strip("\"'").strip()


def parse_response(
    raw: str,
    p_max: float,
    previous_power: float,
    from_user: int = 0,
    round_sent: int = 0,
) -> ActionRecord:
    """Parse a free-form agent reply into an :class:`ActionRecord`.

    Never raises. Without a readable ``action`` value the record keeps
    ``previous_power`` and sets ``parse_ok`` to False. Proposals are kept
    even when addressed to unknown users; routing drops those.
    """
    text = raw if isinstance(raw, str) else ""
    m = _ACTION_RE.search(text)
    power = None
    if m:
        try:
            value = float(m.group(1))
        except ValueError:
            value = None
        if value is not None and value == value and abs(value) != float("inf"):
            power = _clamp(value, p_max)
    proposals = tuple(_extract_proposals(text, from_user, round_sent))
    explanation = _extract_explanation(text)
    if power is None:
        return ActionRecord(
            power_w=float(previous_power),
            proposals=proposals,
            explanation=explanation,
            raw_response=text,
            parse_ok=False,
        )
    return ActionRecord(power_w=power, proposals=proposals, explanation=explanation, raw_response=text)


@dataclass
class Routing:
    inboxes: dict[int, list[Proposal]]
    emitted: int = 0
    delivered: int = 0
    dropped: int = 0
    dropped_proposals: list[Proposal] = field(default_factory=list)


def route_proposals(records: Iterable[tuple[int, ActionRecord]], round_: int, n_agents: int) -> Routing:
    """Unicast every proposal emitted in ``round_`` to its recipient's next inbox.

    ``records`` pairs each sender id with its action. Proposals to ids outside
    ``1..n_agents`` or back to the sender are dropped and counted.
    """
    routing = Routing(inboxes={uid: [] for uid in range(1, n_agents + 1)})
    for sender, record in records:
        for prop in record.proposals:
            routing.emitted += 1
            stamped = Proposal(from_user=sender, to_user=prop.to_user, body=prop.body, round_sent=round_)
            if prop.to_user == sender or prop.to_user not in routing.inboxes:
                routing.dropped += 1
                routing.dropped_proposals.append(stamped)
                continue
            routing.inboxes[prop.to_user].append(stamped)
            routing.delivered += 1
    return routing
