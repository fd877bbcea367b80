"""Check rows and their CSV / plain-text serialization.

Every verification emits rows with a fixed column set (check id, inequality
reference, computed value, bound, margin, verdict) so runs with identical
configuration and seed produce byte-identical files.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Optional

COLUMNS = ("check", "ref", "value", "bound", "margin", "verdict")


def fmt(x) -> str:
    """Shortest round-trip decimal for floats; str() for the rest."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


@dataclass(frozen=True)
class CheckRow:
    check: str
    ref: str
    value: object
    bound: object
    margin: object
    verdict: str

    @property
    def passed(self) -> bool:
        return self.verdict != "FAIL"


def bound_row(check: str, ref: str, value: float, bound: float, side: str, slack: float = 0.0) -> CheckRow:
    """Row for value <= bound (side='upper') or value >= bound (side='lower'),
    with `slack` added to the tolerated margin (e.g. statistical sigma)."""
    margin = (bound - value) if side == "upper" else (value - bound)
    verdict = "PASS" if margin >= -slack else "FAIL"
    return CheckRow(check=check, ref=ref, value=value, bound=bound, margin=margin, verdict=verdict)


def info_row(check: str, ref: str, value, bound="", margin="") -> CheckRow:
    return CheckRow(check=check, ref=ref, value=value, bound=bound, margin=margin, verdict="INFO")


def to_csv(rows: Iterable[CheckRow]) -> str:
    rows = list(rows)
    out = io.StringIO()
    out.write(",".join(COLUMNS) + "\n")
    for row in rows:
        out.write(
            ",".join(
                (row.check, row.ref, fmt(row.value), fmt(row.bound), fmt(row.margin), row.verdict)
            )
            + "\n"
        )
    return out.getvalue()


def to_text(rows: Iterable[CheckRow], title: Optional[str] = None) -> str:
    rows = list(rows)
    out = io.StringIO()
    if title:
        out.write(f"# {title}\n")
    for row in rows:
        out.write(
            f"{row.verdict:4s}  {row.check}\n"
            f"      ref: {row.ref}\n"
            f"      value: {fmt(row.value)}  bound: {fmt(row.bound)}  margin: {fmt(row.margin)}\n"
        )
    n_fail = sum(1 for row in rows if row.verdict == "FAIL")
    out.write(f"# {'FAIL' if n_fail else 'OK'}: {n_fail} failing check(s)\n")
    return out.getvalue()
