"""Structured pass/fail reports shared by the diagnostic checkers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Check:
    """A single named check with its evidence.

    ``evidence`` holds the sampled values the verdict was based on; every
    numeric entry is finite.  ``tolerance`` is the threshold the check was
    run at, or None for structural (yes/no) checks.
    """

    name: str
    passed: bool
    evidence: dict = field(default_factory=dict)
    tolerance: float | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "tolerance": self.tolerance,
            "evidence": self.evidence,
        }


@dataclass(frozen=True)
class DiagnosticsReport:
    """Outcome of a group of checks; ``overall`` is their conjunction."""

    title: str
    checks: tuple[Check, ...]
    notes: tuple[str, ...] = ()

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "overall": self.overall,
            "checks": [c.to_dict() for c in self.checks],
            "notes": list(self.notes),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def to_text(self) -> str:
        lines = [f"# {self.title}"]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            tol = "" if c.tolerance is None else f" tol={c.tolerance:g}"
            ev = " ".join(f"{k}={_fmt(v)}" for k, v in c.evidence.items())
            lines.append(f"{status:4s} {c.name}{tol} {ev}".rstrip())
        for n in self.notes:
            lines.append(f"note {n}")
        lines.append(f"overall: {'PASS' if self.overall else 'FAIL'}")
        return "\n".join(lines)


def merge_reports(title: str, reports: list[DiagnosticsReport]) -> DiagnosticsReport:
    checks: list[Check] = []
    notes: list[str] = []
    for r in reports:
        checks.extend(r.checks)
        notes.extend(r.notes)
    return DiagnosticsReport(title=title, checks=tuple(checks), notes=tuple(notes))


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_fmt(x) for x in v) + "]"
    return str(v)
