"""Versioned JSON reports and their text rendering."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

from .. import __version__

SCHEMA = "flatd2-report/1"


class ReportError(ValueError):
    pass


@dataclass
class Report:
    model: str
    seed: int
    samples: int
    tau: float
    verdict: str
    d: Optional[int] = None
    path: list = field(default_factory=list)
    pinned: dict = field(default_factory=dict)
    diagnosis: str = ""
    traces: list = field(default_factory=list)
    flat_outputs: list = field(default_factory=list)
    oracle: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = asdict(self)
        out["schema"] = SCHEMA
        out["version"] = __version__
        return out

    def dumps(self) -> str:
        # no timestamps or hostnames: identical inputs give identical bytes
        return json.dumps(self.to_json(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, data: dict) -> "Report":
        if data.get("schema") != SCHEMA:
            raise ReportError(f"unsupported report schema {data.get('schema')!r}")
        fields = {k: v for k, v in data.items() if k not in ("schema", "version")}
        try:
            return cls(**fields)
        except TypeError as err:
            raise ReportError(str(err)) from None

    @classmethod
    def loads(cls, text: str) -> "Report":
        return cls.from_json(json.loads(text))


def build_report(sys, classification, candidates=(), oracle=()) -> Report:
    """``candidates`` holds (FlatOutputCandidate, FlatOutputCheck) pairs."""
    from ..modelio.document import _frac_text

    pinned = {c.symbol.name: _frac_text(c.value) for c in sys.constants if c.value is not None}
    trace = classification.trace
    return Report(
        model=sys.name,
        seed=sys.seed,
        samples=sys.samples,
        tau=sys.tau,
        verdict=classification.verdict,
        d=classification.d,
        path=list(trace.path) if trace.accepted else [],
        pinned=pinned,
        diagnosis=classification.diagnosis,
        traces=[t.to_json() for t in classification.traces],
        flat_outputs=[dict(cand.to_json(), check=check.to_json()) for cand, check in candidates],
        oracle=[r.to_json() for r in oracle],
    )


def render_text(report: Report) -> str:
    out = [f"model {report.model}: {report.verdict}"]
    if report.path:
        out.append("path " + ",".join(report.path))
    if report.diagnosis:
        out.append(f"note: {report.diagnosis}")
    for t in report.traces:
        head = f"[{t['theorem']}] " + ("accepted" if t["accepted"] else f"rejected at {t['failed_item']}")
        if not t["accepted"] and t["reason"]:
            head += f": {t['reason']}"
        out.append(head)
        for dist in t["distributions"]:
            gens = ", ".join(dist["generators"])
            out.append(f"  {dist['name']} (rank {dist['rank']}) = span{{{gens}}}")
        for b in t["branches"]:
            line = f"  branch {b['branch']}: " + ("accepted" if b["accepted"] else f"rejected at {b['failed_item']}")
            if b["alpha"]:
                line += " alpha=(" + ", ".join(b["alpha"]) + ")"
            if not b["accepted"] and b["reason"]:
                line += f" ({b['reason']})"
            out.append(line)
    for fo in report.flat_outputs:
        comps = ", ".join(c if c is not None else "?" for c in fo["components"])
        status = "verified" if fo["check"]["accepted"] else "not verified"
        out.append(f"flat output [{fo['branch']}, {fo['recipe']}]: ({comps}) {status}")
        for name, comp in fo["completions"].items():
            extra = f" with psi = {comp['psi']}" if "psi" in comp else ""
            out.append(f"  {name} completed by {comp['method']}{extra}")
        for r in fo["check"]["reasons"]:
            out.append(f"  - {r}")
    for o in report.oracle:
        verdict = "SFL" if o["static_feedback_linearizable"] else "not SFL"
        out.append(f"oracle: prolong {o['ubar1']} (keep {o['ubar2']}; {o['solved']}) -> {verdict}")
    if report.pinned:
        out.append("pinned " + ", ".join(f"{k}={v}" for k, v in sorted(report.pinned.items())))
    out.append(f"sampling seed={report.seed} samples={report.samples} tau={report.tau:g}")
    return "\n".join(out) + "\n"
