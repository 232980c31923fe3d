"""Report plumbing: configs, bundles, deterministic JSON, versioned CSV.

Determinism contract: identical SuiteConfig => byte-identical JSON report
except for the single `provenance.timestamp` field.  Everything else is
emitted with sorted keys and Python's shortest round-trip float repr, and
no other wall-clock, hostname, or path-dependent data enters the payload.

CSV contract: the flat residual table has a fixed, versioned column
schema.  Changing columns without bumping CSV_SCHEMA_VERSION is a test
failure (tests pin the pair).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = ("schema_version", "suite", "group", "name", "value")


def code_version() -> str:
    from llab import __version__

    return __version__


@dataclass(frozen=True)
class SuiteConfig:
    """Everything that determines a suite run's numbers.

    `params` holds the suite-specific knobs (n values, cutoffs, mesh
    sizes, ...).  The hash covers suite, params, seed and tolerance --
    the semantic content -- and ignores output routing.
    """

    suite: str
    seed: int = 7
    tolerance: float = 1e-10
    params: dict = field(default_factory=dict)
    out_dir: str | None = None
    formats: tuple[str, ...] = ("json",)

    def __post_init__(self):
        bad = [f for f in self.formats if f not in ("json", "csv")]
        if bad:
            raise ValueError(f"unknown format(s) {bad}; expected json|csv")

    def semantic_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "params": self.params,
        }

    def config_hash(self) -> str:
        payload = json.dumps(self.semantic_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class ReportBundle:
    """A finished suite run: payload, verdict, provenance."""

    suite: str
    config: SuiteConfig
    payload: dict
    passed: bool

    def to_json_dict(self, timestamp: str | None = None) -> dict:
        if timestamp is None:
            timestamp = datetime.now(timezone.utc).isoformat()
        return {
            "suite": self.suite,
            "config": self.config.semantic_dict(),
            "report": self.payload,
            "passed": self.passed,
            "provenance": {
                "config_hash": self.config.config_hash(),
                "code_version": code_version(),
                "timestamp": timestamp,
            },
        }

    def json_bytes(self, timestamp: str | None = None) -> bytes:
        return dump_json_deterministic(self.to_json_dict(timestamp))

    def csv_bytes(self) -> bytes:
        rows = flatten_residuals(self.suite, self.payload)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for group, name, value in rows:
            w.writerow([CSV_SCHEMA_VERSION, self.suite, group, name, _csv_value(value)])
        return buf.getvalue().encode()

    def write(self, out_dir: str | os.PathLike) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        if "json" in self.config.formats:
            p = out / f"{self.suite}.json"
            p.write_bytes(self.json_bytes())
            written.append(p)
        if "csv" in self.config.formats:
            p = out / f"{self.suite}.csv"
            p.write_bytes(self.csv_bytes())
            written.append(p)
        return written


def _json_default(o):
    import numpy as np

    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(f"not JSON-serializable: {type(o)}")


def dump_json_deterministic(obj: dict) -> bytes:
    """Sorted keys, round-trip floats, trailing newline; no other state."""
    return (json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n").encode()


def _csv_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def flatten_residuals(suite: str, payload: dict) -> list[tuple[str, str, object]]:
    """Depth-first flattening of numeric/boolean leaves into (group, name, value).

    The group is the dotted path up to the leaf's parent.  Lists index
    numerically.  Strings are kept (normalization labels are data too).
    """
    rows: list[tuple[str, str, object]] = []

    def walk(node, path: str):
        if isinstance(node, dict):
            for key in sorted(node, key=str):
                walk(node[key], f"{path}.{key}" if path else str(key))
        elif isinstance(node, (list, tuple)):
            for i, item in enumerate(node):
                walk(item, f"{path}[{i}]")
        elif isinstance(node, (int, float, bool, str)) or node is None:
            group, _, name = path.rpartition(".")
            rows.append((group, name, node))
        else:
            import numpy as np

            if isinstance(node, (np.integer, np.floating, np.bool_)):
                group, _, name = path.rpartition(".")
                rows.append((group, name, node.item()))

    walk(payload, "")
    return rows


def load_report(path: str | os.PathLike) -> dict:
    return json.loads(Path(path).read_bytes())


def strip_timestamp(report: dict) -> dict:
    """The report minus its single timestamp field (for byte comparisons)."""
    out = json.loads(json.dumps(report))
    out.get("provenance", {}).pop("timestamp", None)
    return out


def evaluate_verdict(verdict: dict) -> bool:
    """The one verdict rule, shared by suite authors and report consumers.

    verdict = {"max_residual": float|None, "tolerance": float|None,
               "checks": {name: bool, ...}}
    passes iff the residual clears the tolerance (when both are present)
    and every named check is True.
    """
    ok = all(bool(v) for v in verdict.get("checks", {}).values())
    mr = verdict.get("max_residual")
    tol = verdict.get("tolerance")
    if mr is not None and tol is not None:
        ok = ok and (mr < tol)
    return ok


def verdict_from_report(report: dict) -> bool:
    """Recompute the verdict from a parsed report (parser/emitter closure).

    Reports carry their verdict inputs in report["report"]["verdict"];
    re-evaluating them must reproduce the recorded `passed` flag exactly.
    """
    body = report.get("report", {})
    verdict = body.get("verdict")
    if verdict is None:
        raise ValueError("report has no verdict block")
    return evaluate_verdict(verdict)
