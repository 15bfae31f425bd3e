# trace_store.py
import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

from utils import ensure_dir, sha256_of_obj
from tree import Path, parse_path


class TraceError(ValueError):
    pass


def dumps_records(records: Iterable[Dict[str, Any]]) -> str:
    # insertion order is the field order; no sort_keys
    return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records)


def loads_records(text: str, source: str = "<trace>") -> List[Dict[str, Any]]:
    out: List[Dict[str, Any]] = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise TraceError(f"{source}:{n}: not JSON ({e.msg})") from None
        if not isinstance(rec, dict) or rec.get("kind") not in ("header", "stage", "event", "final"):
            raise TraceError(f"{source}:{n}: record without a known kind")
        out.append(rec)
    if not out or out[0]["kind"] != "header":
        raise TraceError(f"{source}: first record must be the header")
    return out


def save_trace(path: str, records: Iterable[Dict[str, Any]]) -> None:
    ensure_dir(os.path.dirname(path))
    with open(path, "w") as f:
        f.write(dumps_records(records))


def load_trace(path: str) -> "TraceDoc":
    try:
        with open(path, "r") as f:
            text = f.read()
    except OSError as e:
        raise TraceError(f"cannot read trace {path}: {e.strerror}") from None
    return TraceDoc.from_records(loads_records(text, path))


def body_lines(records: Iterable[Dict[str, Any]]) -> List[str]:
    """Serialized stage and event lines, the part two horizons must agree on."""
    return [json.dumps(r, separators=(",", ":")) for r in records if r["kind"] in ("stage", "event")]


def prefix_consistent(short: List[Dict[str, Any]], long: List[Dict[str, Any]]) -> bool:
    a, b = body_lines(short), body_lines(long)
    return len(a) <= len(b) and b[: len(a)] == a


def trace_digest(records: Iterable[Dict[str, Any]]) -> str:
    return sha256_of_obj(list(records))


# ---------- parsed view ----------
@dataclass
class TraceDoc:
    header: Dict[str, Any]
    deltas: Dict[int, Path] = field(default_factory=dict)
    events: List[Dict[str, Any]] = field(default_factory=list)
    final: Optional[Dict[str, Any]] = None
    records: List[Dict[str, Any]] = field(default_factory=list)

    @classmethod
    def from_records(cls, records: List[Dict[str, Any]]) -> "TraceDoc":
        if not records or records[0].get("kind") != "header":
            raise TraceError("trace has no header")
        doc = cls(header=records[0], records=list(records))
        for r in records[1:]:
            kind = r.get("kind")
            try:
                if kind == "stage":
                    doc.deltas[int(r["s"])] = parse_path(r["delta"])
                elif kind == "event":
                    if "type" not in r or "s" not in r:
                        raise TraceError(f"event record without type/stage: {r}")
                    doc.events.append(r)
                elif kind == "final":
                    doc.final = r
            except (KeyError, ValueError) as e:
                if isinstance(e, TraceError):
                    raise
                raise TraceError(f"bad {kind} record {r}: {e}") from None
        return doc

    @property
    def regime(self) -> str:
        return self.header["config"]["regime"]

    @property
    def horizon(self) -> int:
        return int(self.header["config"]["horizon"])

    def of_type(self, *types: str) -> List[Dict[str, Any]]:
        return [e for e in self.events if e["type"] in types]

    def node(self, path: str) -> Optional[Dict[str, Any]]:
        for n in (self.final or {}).get("nodes", []):
            if n["path"] == path:
                return n
        return None

    def nodes(self) -> List[Dict[str, Any]]:
        return list((self.final or {}).get("nodes", []))
