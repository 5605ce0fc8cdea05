from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Check:
    """One verification outcome."""

    name: str
    ok: bool
    value: float = math.nan
    expected: float = math.nan
    tol: float = math.nan
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        parts = [f"[{status}] {self.name}"]
        if not math.isnan(self.value):
            parts.append(f"value={self.value:.12g}")
        if not math.isnan(self.expected):
            parts.append(f"expected={self.expected:.12g}")
        if not math.isnan(self.tol):
            parts.append(f"tol={self.tol:.1e}")
        if self.note:
            parts.append(self.note)
        return " ".join(parts)


def close(name: str, value: float, expected: float, tol: float, *, rel: bool = False,
          note: str = "") -> Check:
    err = abs(value - expected)
    if rel:
        err /= max(abs(expected), 1e-300)
    return Check(name, bool(err <= tol), value, expected, tol, note)


def all_ok(checks) -> bool:
    return all(c.ok for c in checks)
