# utils.py
import os, csv, time, json, hashlib
from typing import Any, Dict, Optional, Sequence

STAGE_FIELDS = [
    "config_key", "stage", "delta", "delta_len", "b_size", "events", "resets",
    "pulls", "switches", "witness_picks", "runtime_sec", "wall_start",
]


class CSVLogger:
    """Appends stage rows under a fixed schema; a header goes in once per file."""

    def __init__(self, path: str = "stage_log.csv", fieldnames: Optional[Sequence[str]] = None):
        self.path = path
        self.fieldnames = list(fieldnames or STAGE_FIELDS)
        ensure_dir(os.path.dirname(path))
        if not os.path.exists(path) or os.path.getsize(path) == 0:
            with open(path, "w", newline="") as f:
                csv.DictWriter(f, fieldnames=self.fieldnames).writeheader()

    def log(self, row: Dict[str, Any]) -> None:
        extra = set(row) - set(self.fieldnames)
        if extra:
            raise KeyError(f"columns not in the stage log schema: {sorted(extra)}")
        payload = {k: row.get(k, "") for k in self.fieldnames}
        with open(self.path, "a", newline="") as f:
            csv.DictWriter(f, fieldnames=self.fieldnames).writerow(payload)


def sha256_of_obj(obj: Any) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]

def ensure_dir(p: str) -> None:
    if p:
        os.makedirs(p, exist_ok=True)

def fmt_count(n: int) -> str:
    for unit in ["", "K", "M", "G"]:
        if abs(n) < 1000:
            return f"{n:.0f}{unit}" if unit == "" else f"{n:.1f}{unit}"
        n /= 1000
    return f"{n:.1f}T"

def now_iso() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S")
