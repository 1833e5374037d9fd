"""Certificate reports shared by the checker modules.

A certificate is a conjunction of named rows, each row one verified
inequality or fitted asymptotic condition with a three-valued verdict.
The overall verdict is the conjunction: any failing row fails the
certificate, otherwise any inconclusive row leaves it inconclusive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .fits import FAILS, HOLDS, INCONCLUSIVE


@dataclass
class CertificateRow:
    name: str
    verdict: str
    lhs: float | None = None
    rhs: float | None = None
    note: str = ""

    def format(self) -> str:
        parts = [f"{self.name}: {self.verdict}"]
        if self.lhs is not None:
            parts.append(f"lhs={self.lhs:.17g}")
        if self.rhs is not None:
            parts.append(f"rhs={self.rhs:.17g}")
        if self.note:
            parts.append(self.note)
        return "  ".join(parts)


@dataclass
class CertificateReport:
    title: str
    rows: list[CertificateRow] = field(default_factory=list)
    conclusion: str = ""
    data: dict = field(default_factory=dict)

    def add(self, name: str, verdict: str, lhs: float | None = None,
            rhs: float | None = None, note: str = "") -> CertificateRow:
        row = CertificateRow(name, verdict, lhs, rhs, note)
        self.rows.append(row)
        return row

    def add_inequality(self, name: str, lhs: float, rhs: float,
                       note: str = "", strict: bool = False) -> CertificateRow:
        """Row for lhs <= rhs (or lhs < rhs when strict)."""
        ok = lhs < rhs if strict else lhs <= rhs
        return self.add(name, HOLDS if ok else FAILS, lhs, rhs, note)

    @property
    def verdict(self) -> str:
        verdicts = [row.verdict for row in self.rows]
        if any(v == FAILS for v in verdicts):
            return FAILS
        if any(v == INCONCLUSIVE for v in verdicts):
            return INCONCLUSIVE
        return HOLDS

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def format(self) -> str:
        lines = [self.title, "-" * len(self.title)]
        lines += ["  " + row.format() for row in self.rows]
        lines.append(f"overall: {self.verdict}")
        if self.conclusion:
            lines.append(self.conclusion)
        return "\n".join(lines)
