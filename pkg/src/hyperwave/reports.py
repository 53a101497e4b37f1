"""Artifact envelopes, run manifests and the cross-linked summary report."""
from __future__ import annotations

import io
import json
import platform
import time
from dataclasses import dataclass
from pathlib import Path

import mpmath
import numpy as np
import scipy

from . import __version__

__all__ = ["ReportError", "Report", "envelope", "dumps", "write_artifact", "write_manifest",
           "read_artifact", "emit_report", "SECTIONS"]

# report section -> artifact kind
SECTIONS = [
    ("certificate", "genericity"),
    ("components", "charset"),
    ("gap", "gap"),
    ("solution", "solve"),
    ("lifetime", "evolve"),
]


class ReportError(ValueError):
    """Artifacts that cannot be combined (mixed config hash or version)."""


def envelope(kind: str, config_hash: str, parameters: dict, data: dict) -> dict:
    return {"kind": kind, "version": __version__, "config_hash": config_hash,
            "parameters": parameters, "data": data}


def _plain(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, fixed separators, trailing newline)."""
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=True, default=_plain) + "\n"


def write_artifact(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(obj if isinstance(obj, str) else dumps(obj))
    return path


def write_manifest(path, config_hash: str, rng_seed: int, wall_time: float, extra=None) -> Path:
    """``<artifact>.manifest.json``: provenance that is allowed to vary between runs."""
    path = Path(path)
    man = {"artifact": path.name, "config_hash": config_hash, "rng_seed": rng_seed,
           "wall_time_s": round(wall_time, 6),
           "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
           "versions": {"hyperwave": __version__, "python": platform.python_version(),
                        "numpy": np.__version__, "scipy": scipy.__version__,
                        "mpmath": mpmath.__version__}}
    if extra:
        man.update(extra)
    out = path.with_name(path.name + ".manifest.json")
    out.write_text(dumps(man))
    return out


def read_artifact(path) -> dict:
    data = json.loads(Path(path).read_text())
    for key in ("kind", "version", "config_hash", "data"):
        if key not in data:
            raise ReportError(f"{path}: not an artifact (missing {key!r})")
    return data


@dataclass
class Report:
    text: str
    csvs: dict  # file name -> text
    config_hash: str


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(repr(x) if isinstance(x, float) else str(x) for x in row) + "\n")
    return buf.getvalue()


def _summarize(kind: str, art: dict) -> list[str]:
    d = art["data"]
    prm = art.get("parameters", {})
    if kind == "genericity":
        lines = [f"generic: {d['generic']}"]
        for name, v in d["verdicts"].items():
            lines.append(f"condition ({name}): {v['status']} (tested {v['tested']}, "
                         f"coverage {v['coverage']:.3g})")
        return lines
    if kind == "charset":
        comp = d["components"]
        return [f"C_+ points: {len(d['charset']['plus'])}, C_- points: {len(d['charset']['minus'])}",
                f"max component size {comp['max_size']} <= B = {comp['bound_B']}: "
                f"{d['bound_ok']}",
                f"Diophantine fit: q = {d['profile']['q']:.4g}, c' = {d['profile']['cprime']:.4g}"]
    if kind == "gap":
        return [f"N = {d['N']}, delta = {d['delta']}, epsilon = {d['epsilon']}",
                f"|F'_N^-1| = {d['inverse_norm']} vs bound {d['bound']:.4g}: pass = {d['pass']}",
                f"P^c inverse norm {d['pc_inverse_norm']}, coupling {d['coupling_norm']:.3e}, "
                f"PA0P gap pass = {d['pa0p']['pass']}"]
    if kind == "solve":
        lines = [f"converged: {d['converged']} after {d['metadata']['iterations']} iterations",
                 f"residual {d['residual']:.3e}, remainder {d['remainder_norm']:.3e}",
                 "omega = " + ", ".join(repr(w) for w in d["omega"])]
        if d.get("reason"):
            lines.append(f"reason: {d['reason']}")
        if "certificate_hash" in prm:
            lines.append(f"certificate hash: {prm['certificate_hash']}")
        return lines
    if kind == "evolve":
        return [f"delta = {d['delta']}, A = {d['A']}, T = {d['T']:.6g}",
                f"max excess {d['max_excess']:.4e} (K delta = {d['K'] * d['delta']:.4g}), "
                f"pass = {d['pass']}",
                f"max energy drift {d['max_energy_drift']:.3e}, blow-up: {d['blowup_time']}"]
    return [json.dumps(d, sort_keys=True)[:200]]


def emit_report(artifacts) -> Report:
    """One summary over the given artifacts plus plot-ready CSVs.

    Missing sections are marked absent.  Mixed config hashes or package
    versions are refused.
    """
    arts = [a if isinstance(a, dict) else read_artifact(a) for a in artifacts]
    if not arts:
        raise ReportError("no artifacts given")
    hashes = {a["config_hash"] for a in arts}
    if len(hashes) > 1:
        raise ReportError(f"artifacts come from different configs: {sorted(hashes)}")
    versions = {a["version"] for a in arts}
    if len(versions) > 1:
        raise ReportError(f"artifacts come from different versions: {sorted(versions)}")
    by_kind = {}
    for a in arts:
        by_kind[a["kind"]] = a
    h = hashes.pop()
    lines = [f"hyperwave report (config {h}, version {versions.pop()})", ""]
    for title, kind in SECTIONS:
        lines.append(f"== {title} ==")
        if kind in by_kind:
            lines += ["  " + s for s in _summarize(kind, by_kind[kind])]
        else:
            lines.append("  absent")
        lines.append("")
    known = {k for _, k in SECTIONS}
    for kind in sorted(k for k in by_kind if k not in known):
        lines.append(f"== {kind} ==")
        lines += ["  " + s for s in _summarize(kind, by_kind[kind])]
        lines.append("")
    csvs = {}
    if "solve" in by_kind:
        hist = by_kind["solve"]["data"]["history"]
        csvs["residual_history.csv"] = _csv(["iteration", "residual"],
                                            [(i, float(r)) for i, r in enumerate(hist)])
    if "charset" in by_kind:
        csvs["diophantine_profile.csv"] = by_kind["charset"]["data"]["profile"]["csv"]
    if "measure" in by_kind and "scaling" in by_kind["measure"]["data"]:
        sc = by_kind["measure"]["data"]["scaling"]
        csvs["delta_scaling.csv"] = _csv(
            ["delta", "shift", "remainder"],
            [(r["delta"], float(max(r["shift"])), r["remainder"]) for r in sc["rows"]])
    if "evolve" in by_kind:
        csvs["lifetime_excess.csv"] = _csv(["t", "excess"],
                                           [(float(r[0]), float(r[3]))
                                            for r in by_kind["evolve"]["data"]["rows"]])
    return Report("\n".join(lines), csvs, h)
