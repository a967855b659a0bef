"""Tri-state verdicts with citations."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Tuple


class Status(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    HOLDS_UNDER = "holds_under"
    OPEN = "open"


@dataclass(frozen=True)
class Verdict:
    status: Status
    citation: str = ""
    note: str = ""
    conditions: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        st = Status(self.status)
        object.__setattr__(self, "status", st)
        object.__setattr__(self, "conditions", tuple(self.conditions))
        if st is not Status.OPEN and not self.citation:
            raise ValueError("settled verdicts need a citation")
        if st is Status.HOLDS_UNDER and not self.conditions:
            raise ValueError("holds_under needs at least one condition")

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS

    @property
    def open(self) -> bool:
        return self.status is Status.OPEN

    def with_note(self, extra: str) -> "Verdict":
        if not extra:
            return self
        note = f"{self.note}; {extra}" if self.note else extra
        return Verdict(self.status, self.citation, note, self.conditions)

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "conditions": list(self.conditions),
            "citation": self.citation,
            "note": self.note,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, obj: dict) -> "Verdict":
        return cls(obj["status"], obj.get("citation", ""), obj.get("note", ""),
                   tuple(obj.get("conditions", ())))


def holds(citation: str, note: str = "") -> Verdict:
    return Verdict(Status.HOLDS, citation, note)


def fails(citation: str, note: str = "") -> Verdict:
    return Verdict(Status.FAILS, citation, note)


def holds_under(conditions, citation: str, note: str = "") -> Verdict:
    return Verdict(Status.HOLDS_UNDER, citation, note, tuple(conditions))


def open_(citation: str = "", note: str = "") -> Verdict:
    return Verdict(Status.OPEN, citation, note)
