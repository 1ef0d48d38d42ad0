"""Certification reports: entries, verdicts, JSON and text rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


def verdict_of(flag: Optional[bool]) -> str:
    if flag is None:
        return INCONCLUSIVE
    return PASS if flag else FAIL


def plain(value: Any) -> Any:
    """Convert numpy scalars, arrays and tuples into JSON-ready values."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


@dataclass
class Entry:
    anchor: str
    statement: str
    verdict: str
    witnesses: dict = field(default_factory=dict)
    ms: int = 0

    def to_dict(self) -> dict:
        return {
            "anchor": self.anchor,
            "statement": self.statement,
            "verdict": self.verdict,
            "witnesses": plain(self.witnesses),
            "ms": int(self.ms),
        }


@dataclass
class CertReport:
    config: dict
    entries: list[Entry] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if any(e.verdict == FAIL for e in self.entries):
            return FAIL
        return PASS

    @property
    def exit_code(self) -> int:
        return 1 if self.verdict == FAIL else 0

    def entry(self, anchor: str) -> Optional[Entry]:
        for e in self.entries:
            if e.anchor == anchor:
                return e
        return None

    def to_dict(self, timing: bool = True) -> dict:
        entries = [e.to_dict() for e in self.entries]
        if not timing:
            for e in entries:
                e["ms"] = 0
        return {"config": plain(self.config), "entries": entries, "verdict": self.verdict}

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2) + "\n"

    def to_text(self) -> str:
        rows = [("anchor", "verdict", "ms", "witnesses")]
        for e in self.entries:
            wit = json.dumps(plain(e.witnesses), separators=(",", ":"))
            if len(wit) > 96:
                wit = wit[:93] + "..."
            rows.append((e.anchor, e.verdict, str(e.ms), wit))
        widths = [max(len(r[c]) for r in rows) for c in range(3)]
        lines = []
        cfg = ", ".join(f"{k}={v}" for k, v in plain(self.config).items())
        lines.append(f"config: {cfg}")
        for i, r in enumerate(rows):
            lines.append("  ".join(r[c].ljust(widths[c]) for c in range(3)) + "  " + r[3])
            if i == 0:
                lines.append("  ".join("-" * w for w in widths) + "  " + "-" * 9)
        counts = {v: sum(e.verdict == v for e in self.entries) for v in (PASS, FAIL, INCONCLUSIVE)}
        lines.append(
            f"verdict: {self.verdict} ({counts[PASS]} pass, {counts[FAIL]} fail, {counts[INCONCLUSIVE]} inconclusive)"
        )
        return "\n".join(lines) + "\n"

    def render(self, fmt: str = "json") -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "text":
            return self.to_text()
        raise ValueError(f"unknown report format {fmt!r}")

    @classmethod
    def from_dict(cls, data: dict) -> CertReport:
        entries = [Entry(e["anchor"], e["statement"], e["verdict"], e.get("witnesses", {}), e.get("ms", 0))
                   for e in data.get("entries", [])]
        return cls(dict(data.get("config", {})), entries)

    @classmethod
    def load(cls, path: str) -> CertReport:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
