"""Check verdicts and deterministic CSV output."""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from . import __version__


class Verdict(enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class CheckResult:
    check: str
    verdict: Verdict
    witness: str = ""
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS


@dataclass
class Report:
    results: List[CheckResult] = field(default_factory=list)

    def add(self, check: str, verdict: Verdict, witness: str = "", detail: str = "") -> CheckResult:
        r = CheckResult(check, verdict, witness, detail)
        self.results.append(r)
        return r

    def extend(self, other: "Report") -> "Report":
        self.results.extend(other.results)
        return self

    def __getitem__(self, check: str) -> CheckResult:
        for r in self.results:
            if r.check == check:
                return r
        raise KeyError(check)

    def __contains__(self, check: str) -> bool:
        return any(r.check == check for r in self.results)

    @property
    def passed(self) -> bool:
        return all(r.verdict is Verdict.PASS for r in self.results)

    @property
    def failed(self) -> bool:
        return any(r.verdict is Verdict.FAIL for r in self.results)

    @property
    def inconclusive(self) -> bool:
        return any(r.verdict is Verdict.INCONCLUSIVE for r in self.results)

    def rows(self):
        return [(r.check, r.verdict.value, r.witness) for r in self.results]


class Tally:
    """Accumulates one verdict from many instances: first failure wins."""

    def __init__(self, name: str):
        self.name = name
        self.checked = 0
        self.unknown = 0
        self.fail_witness: Optional[str] = None

    def ok(self) -> None:
        self.checked += 1

    def unknown_case(self) -> None:
        self.unknown += 1

    def fail(self, witness: str) -> None:
        self.checked += 1
        if self.fail_witness is None:
            self.fail_witness = witness

    def into(self, report: Report, detail: str = "") -> CheckResult:
        if self.fail_witness is not None:
            return report.add(self.name, Verdict.FAIL, self.fail_witness, detail)
        if self.unknown:
            return report.add(self.name, Verdict.INCONCLUSIVE, "",
                              detail or f"{self.unknown} undecided instance(s)")
        return report.add(self.name, Verdict.PASS, "", detail or f"{self.checked} instance(s)")


def fmt(x) -> str:
    """Numbers with 17 significant digits; everything else via str."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, Fraction):
        x = float(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.17g}"
    return str(x)


def config_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence], *, tool: str,
              config_sha: str = "none", seed: Optional[int] = None) -> Path:
    buf = io.StringIO()
    buf.write(f"# adiabatic {tool} version={__version__} config_sha256={config_sha} seed={seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())
    return path


def read_csv(path: Path) -> List[dict]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))
