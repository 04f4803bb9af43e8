"""Check records and reports shared by every module and the command line."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any


@dataclass
class Record:
    name: str
    passed: bool
    witness: Any = None
    detail: Any = None
    seconds: float | None = None

    def __post_init__(self):
        if not self.passed and self.witness is None:
            raise ValueError(f"failing check {self.name!r} needs a witness")


@dataclass
class Report:
    """An ordered list of check records.  ``ok`` iff every record passed."""

    records: list[Record] = field(default_factory=list)
    command: str = ""
    seed: Any = None
    anchor: str = ""

    def add(self, name: str, passed: bool, witness=None, detail=None, seconds=None) -> Record:
        rec = Record(name, bool(passed), witness, detail, seconds)
        self.records.append(rec)
        return rec

    def extend(self, other: "Report", prefix: str = "") -> None:
        for r in other.records:
            self.records.append(Record(prefix + r.name, r.passed, r.witness, r.detail, r.seconds))

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.records)

    def __bool__(self) -> bool:
        return self.ok

    def __getitem__(self, name: str) -> Record:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def failures(self) -> list[Record]:
        return [r for r in self.records if not r.passed]

    @property
    def summary(self) -> dict[str, int]:
        n_pass = sum(r.passed for r in self.records)
        return {"checks": len(self.records), "passed": n_pass, "failed": len(self.records) - n_pass}

    def to_dict(self, timing: bool = True) -> dict:
        recs = []
        for r in self.records:
            d = {"name": r.name, "verdict": "pass" if r.passed else "fail"}
            if not r.passed and r.witness is not None:
                d["witness"] = _plain(r.witness)
            if r.detail is not None:
                d["detail"] = _plain(r.detail)
            if timing and r.seconds is not None:
                d["seconds"] = round(r.seconds, 6)
            recs.append(d)
        return {
            "command": self.command,
            "seed": _plain(self.seed),
            "anchor": self.anchor,
            "records": recs,
            "summary": self.summary,
        }

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2)

    def to_text(self, timing: bool = True) -> str:
        d = self.to_dict(timing)
        lines = [f"command: {d['command']}", f"seed: {d['seed']}"]
        if d["anchor"]:
            lines.append(f"anchor: {d['anchor']}")
        for r in d["records"]:
            parts = [f"check: {r['name']}", f"verdict: {r['verdict']}"]
            if "witness" in r:
                parts.append(f"witness: {_compact(r['witness'])}")
            if "detail" in r:
                parts.append(f"detail: {_compact(r['detail'])}")
            if "seconds" in r:
                parts.append(f"seconds: {r['seconds']}")
            lines.append(" | ".join(parts))
        s = d["summary"]
        lines.append(f"summary: checks={s['checks']} passed={s['passed']} failed={s['failed']}")
        return "\n".join(lines) + "\n"


def _compact(x) -> str:
    return json.dumps(x, separators=(",", ":"))


def _plain(x):
    """Convert to JSON-friendly values; rationals print as ``p/q``."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted((_plain(v) for v in x), key=str)
    if hasattr(x, "item") and callable(x.item):
        return x.item()
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)
