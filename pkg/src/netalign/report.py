"""Machine-readable and text renderings of command results."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from netalign.feasibility import FeasibilityReport, ToneVerdict
from netalign.schema import REPORT_SCHEMA_VERSION

TOOL = "netalign"


def _pair(p) -> str:
    return f"M{p[0]}{p[1]}"


def tone_to_dict(t: ToneVerdict) -> dict:
    out = {
        "p": t.p,
        "feasible": t.feasible,
        "eta_constant": t.eta.constant,
        "eta_witness": list(t.eta.witness) if t.eta.witness else None,
        "discarded_draws": t.discarded,
    }
    if t.membership is not None:
        out["membership"] = {
            f"b{i}": {
                cand: {"holds": r.holds, "trials": r.trials, "error_bound": r.error_bound,
                       "certificate": r.certificate}
                for cand, r in res.items()
            }
            for i, res in t.membership.items()
        }
    if t.constancy is not None:
        out["constancy"] = {
            f"b{i}": {"constant": c.constant, "trials": c.trials, "error_bound": c.error_bound,
                      "witness": list(c.witness) if c.witness else None}
            for i, c in t.constancy.items()
        }
    return out


def feasibility_to_dict(rep: FeasibilityReport) -> dict:
    return {
        "field_degree": rep.m,
        "block_length": rep.k,
        "trials": rep.trials,
        "seed": rep.seed,
        "supported": rep.supported,
        "missing_pairs": [list(p) for p in rep.missing],
        "feasible": rep.feasible,
        "eta_constant": rep.eta_constant,
        "anomalies": list(rep.anomalies),
        "error_bound": rep.error_bound,
        "tones": [tone_to_dict(t) for t in rep.tones],
    }


@dataclass
class Report:
    command: str
    config: dict
    version: str = ""
    schema: str = REPORT_SCHEMA_VERSION
    feasibility: dict | None = None
    simulation: dict | None = None
    oracle: dict | None = None
    network: dict | None = None
    error: str | None = None
    exit_status: int = 0
    timing_s: float = 0.0
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.version:
            from netalign import __version__

            self.version = __version__

    def to_json(self) -> str:
        doc = {"tool": TOOL, **asdict(self)}
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        doc = json.loads(text)
        if doc.pop("tool", None) != TOOL:
            raise ValueError("not a netalign report")
        return cls(**doc)

    def to_text(self) -> str:
        lines = [f"{TOOL} {self.version} :: {self.command}"]
        cfg = ", ".join(f"{k}={v}" for k, v in sorted(self.config.items()))
        lines.append(f"config: {cfg}")
        if self.error:
            lines.append(f"error: {self.error}")
        if self.feasibility:
            lines += _feasibility_text(self.feasibility)
        if self.simulation:
            lines += _simulation_text(self.simulation)
        if self.oracle:
            lines += _oracle_text(self.oracle)
        lines += [f"note: {n}" for n in self.notes]
        lines.append(f"exit status {self.exit_status}  ({self.timing_s:.2f} s)")
        return "\n".join(lines) + "\n"


def _feasibility_text(f: dict) -> list[str]:
    if not f["supported"]:
        pairs = ", ".join(f"S{i}->T{j}" for i, j in f["missing_pairs"])
        return [f"UNSUPPORTED: zero min-cut for {pairs}"]
    verdict = "FEASIBLE" if f["feasible"] else "INFEASIBLE"
    lines = [
        f"verdict: {verdict}  (eta {'constant' if f['eta_constant'] else 'not constant'}; "
        f"m={f['field_degree']}, T={f['trials']}, error bound {f['error_bound']:.3g})"
    ]
    lines.append("  p   feasible  " + "  ".join(f"{b:<28}" for b in ("b1", "b2", "b3")))
    for t in f["tones"]:
        cells = []
        for b in ("b1", "b2", "b3"):
            if "membership" in t:
                res = t["membership"][b]
                held = [c for c, r in res.items() if r["holds"]]
                cells.append(("= " + ", ".join(held)) if held else f"violates all {len(res)}")
            else:
                cells.append("constant" if t["constancy"][b]["constant"] else "not constant")
        lines.append(f"  {t['p']:<3} {str(t['feasible']):<9} " + "  ".join(f"{c:<28}" for c in cells))
    lines += [f"anomaly: {a}" for a in f["anomalies"]]
    return lines


def _simulation_text(s: dict) -> list[str]:
    lines = [
        f"delta_min={s['delta_min']} d_max={s['d_max']}  per-tone channel check: "
        f"{'exact' if s['model_ok'] else 'MISMATCH ' + str(s['model_mismatches'])}"
    ]
    lines.append("  p   aligned  T1            T2            T3")
    for t in s["tones"]:
        cells = [f"{'ok' if d['success'] else 'FAIL'} (rank {d['rank']})" for d in t["destinations"]]
        lines.append(f"  {t['p']:<3} {str(t['aligned']):<8} " + "  ".join(f"{c:<12}" for c in cells))
    for i in ("1", "2", "3"):
        tp = s["throughput"][i]
        lines.append(
            f"S{i}->T{i}: {s['decoded_symbols'][i]} symbols, throughput {tp['payload']} "
            f"(payload-normalised), {tp['wall_clock']} (wall-clock)"
        )
    if s["miscorrections"]:
        lines.append(f"MISCORRECTIONS: {s['miscorrections']}")
    return lines


def _oracle_text(o: dict) -> list[str]:
    lines = []
    for check in o["checks"]:
        status = "agree" if check["agree"] else f"DISAGREE at {check.get('first_mismatch')}"
        lines.append(f"{check['name']}: {status}")
    return lines
