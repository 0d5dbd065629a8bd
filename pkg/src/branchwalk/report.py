"""Structured results for identity checks, with deterministic payloads."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional


@dataclass
class CheckReport:
    """Outcome of one identity check over a family of test functions.

    ``rows`` carry one entry per (test function, depth) pair; ``runtime``
    is measured wall time and is deliberately excluded from the canonical
    payload so that reruns with identical configuration produce
    byte-identical serialized reports.
    """

    scenario: str
    check: str
    tolerance: float
    rows: List[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def max_discrepancy(self) -> float:
        return max((r["discrepancy"] for r in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return all(r["discrepancy"] <= self.tolerance for r in self.rows)

    def payload(self) -> dict:
        return {
            "scenario": self.scenario,
            "check": self.check,
            "tolerance": self.tolerance,
            "rows": self.rows,
            "max_discrepancy": self.max_discrepancy,
            "passed": self.passed,
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.payload(), sort_keys=True,
                          separators=(",", ":"), allow_nan=False)

    def summary(self) -> str:
        state = "pass" if self.passed else "FAIL"
        return (f"{self.scenario} {self.check}: {state} "
                f"(max discrepancy {self.max_discrepancy:.3e}, "
                f"tolerance {self.tolerance:.3e}, {len(self.rows)} rows)")


def make_row(test: str, n: Optional[int], lhs: float, rhs: float,
             discrepancy: float, exact: bool) -> dict:
    row = {
        "test": test,
        "lhs": float(lhs),
        "rhs": float(rhs),
        "discrepancy": float(discrepancy),
        "exact": bool(exact),
    }
    if n is not None:
        row["n"] = int(n)
    return row
