# adversary.py
"""
Scripted stand-ins for the objects the construction diagonalizes against.

Every r.e. set is an EnumeratedSet (a stage-indexed schedule) and every
partial computable function is a PartialFn with explicit convergence stages.
A roster bundles them per requirement family and round-trips through JSON.
"""
import json
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Set, Tuple

KINDS = ("enumerated-set", "partial-fn", "split-pair", "tracking-split-pair")
TRACKING_RULES = ("round-robin", "all-to-x", "all-to-y", "threshold")


class RosterError(ValueError):
    pass


# ---------- sets ----------
class EnumeratedSet:
    """Cumulative enumeration; each element has exactly one entry stage."""

    def __init__(self, name: str, schedule: Optional[Dict[int, Iterable[int]]] = None,
                 horizon: Optional[int] = None, tracks: Optional[str] = None):
        self.name = name
        self.tracks = tracks  # None | "M"
        self._entry: Dict[int, int] = {}
        self._by_stage: Dict[int, Set[int]] = {}
        for s, xs in sorted((schedule or {}).items()):
            for x in sorted(xs):
                if x in self._entry:
                    raise RosterError(
                        f"{name}: element {x} scheduled at stages {self._entry[x]} and {s}")
                self._put(int(x), int(s))
        top = max(self._by_stage) if self._by_stage else 0
        self.horizon = top if horizon is None else int(horizon)
        if self.horizon < top:
            raise RosterError(f"{name}: schedule runs to stage {top} past horizon {self.horizon}")

    def _put(self, x: int, s: int) -> None:
        self._entry[x] = s
        self._by_stage.setdefault(s, set()).add(x)

    def add(self, x: int, s: int) -> bool:
        """Enumerate x at stage s; False if x is already in."""
        if x in self._entry:
            return False
        self._put(x, s)
        self.horizon = max(self.horizon, s)
        return True

    def entry(self, x: int) -> Optional[int]:
        s = self._entry.get(x)
        if s is None or s > self.horizon:
            return None
        return s

    def member(self, x: int, s: int) -> bool:
        t = self.entry(x)
        return t is not None and t <= s

    def members(self, s: Optional[int] = None) -> Set[int]:
        if s is None:
            return set(self._entry)
        return {x for x, t in self._entry.items() if t <= s}

    def entering(self, s: int) -> Set[int]:
        return set(self._by_stage.get(s, ()))

    def __contains__(self, x: int) -> bool:
        return x in self._entry

    def __len__(self) -> int:
        return len(self._entry)

    @property
    def schedule(self) -> Dict[int, List[int]]:
        return {s: sorted(xs) for s, xs in sorted(self._by_stage.items())}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "schedule": {str(s): xs for s, xs in self.schedule.items()},
            "horizon": self.horizon,
            "tracks": self.tracks,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "EnumeratedSet":
        try:
            sched = {int(s): [int(x) for x in xs] for s, xs in d.get("schedule", {}).items()}
            return cls(d["name"], sched, d.get("horizon"), d.get("tracks"))
        except KeyError as e:
            raise RosterError(f"enumerated-set missing field {e}") from None


def entry_stage(es: EnumeratedSet, x: int) -> Optional[int]:
    return es.entry(x)


# ---------- partial functions ----------
@dataclass
class PartialFn:
    name: str
    entries: Dict[Tuple[int, ...], Tuple[int, int]] = field(default_factory=dict)
    # {"kind": "affine", "c", "max_x", "max_s"} or {"kind": "constant", "value", "conv", "max_x"}
    generator: Optional[Dict[str, Any]] = None

    def lookup(self, args: Tuple[int, ...]) -> Optional[Tuple[int, int]]:
        hit = self.entries.get(tuple(args))
        if hit is not None:
            return hit
        g = self.generator
        if g is None:
            return None
        if g["kind"] == "affine":
            if len(args) != 2:
                return None
            x, s = args
            if 0 <= x <= g["max_x"] and 0 <= s <= g["max_s"]:
                return (s + g["c"], s)
            return None
        if g["kind"] == "constant":
            x = args[0]
            if 0 <= x <= g["max_x"]:
                return (g["value"], g["conv"])
            return None
        raise RosterError(f"{self.name}: unknown generator kind {g['kind']!r}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "entries": [[list(k), v, c] for k, (v, c) in sorted(self.entries.items())],
            "generator": self.generator,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "PartialFn":
        entries: Dict[Tuple[int, ...], Tuple[int, int]] = {}
        for args, value, conv in d.get("entries", []):
            key = tuple(int(a) for a in args)
            if key in entries:
                raise RosterError(f"{d.get('name')}: two entries for argument {key}")
            entries[key] = (int(value), int(conv))
        if "name" not in d:
            raise RosterError("partial-fn missing field 'name'")
        return cls(d["name"], entries, d.get("generator"))


def eval_partial(pf: PartialFn, args: Tuple[int, ...], s: int) -> Optional[int]:
    """Value of pf(args) if it has converged by stage s, else None."""
    hit = pf.lookup(tuple(args))
    if hit is None:
        return None
    value, conv = hit
    return value if conv <= s else None


def make_affine_adversary(c: int, max_x: int, max_s: int, name: str = "h") -> PartialFn:
    return PartialFn(name, generator={"kind": "affine", "c": c, "max_x": max_x, "max_s": max_s})


def make_constant_description(value: int, conv: int, max_x: int, name: str = "delta") -> PartialFn:
    return PartialFn(name, generator={"kind": "constant", "value": value, "conv": conv, "max_x": max_x})


# ---------- splits ----------
class SplitPair:
    """Disjoint halves X_i, Y_i; a tracking pair follows B one stage behind."""

    def __init__(self, index: int, x_side: EnumeratedSet, y_side: EnumeratedSet,
                 rule: Optional[str] = None, threshold: int = 0):
        if rule is not None and rule not in TRACKING_RULES:
            raise RosterError(f"pair {index}: unknown tracking rule {rule!r}")
        self.index = index
        self.x_side = x_side
        self.y_side = y_side
        self.rule = rule
        self.threshold = threshold
        self._assigned = 0
        self.check_disjoint()

    @property
    def tracking(self) -> bool:
        return self.rule is not None

    def side(self, name: str) -> EnumeratedSet:
        return self.x_side if name == "X" else self.y_side

    def check_disjoint(self) -> None:
        both = self.x_side.members() & self.y_side.members()
        if both:
            raise RosterError(f"pair {self.index}: sides overlap on {sorted(both)}")

    def assign(self, x: int, s: int) -> str:
        """Put a fresh B element on one side at stage s, per the rule."""
        assert self.tracking
        if self.rule == "all-to-x":
            name = "X"
        elif self.rule == "all-to-y":
            name = "Y"
        elif self.rule == "threshold":
            name = "X" if x < self.threshold else "Y"
        else:
            name = "X" if self._assigned % 2 == 0 else "Y"
        self._assigned += 1
        self.side(name).add(x, s)
        return name

    def union_entry(self, x: int) -> Optional[int]:
        stages = [t for t in (self.x_side.entry(x), self.y_side.entry(x)) if t is not None]
        return min(stages) if stages else None

    def to_dict(self) -> Dict[str, Any]:
        d = {
            "kind": "tracking-split-pair" if self.tracking else "split-pair",
            "index": self.index,
            "x_side": self.x_side.to_dict(),
            "y_side": self.y_side.to_dict(),
        }
        if self.tracking:
            d["rule"] = self.rule
            d["threshold"] = self.threshold
        return d


# ---------- roster ----------
@dataclass
class Roster:
    delays: List[PartialFn] = field(default_factory=list)        # one per Q requirement
    descriptions: List[PartialFn] = field(default_factory=list)  # one per D requirement
    pairs: List[SplitPair] = field(default_factory=list)
    vsets: List[Tuple[int, EnumeratedSet]] = field(default_factory=list)  # (pair index, V)

    def pair(self, i: int) -> SplitPair:
        for p in self.pairs:
            if p.index == i:
                return p
        raise RosterError(f"no split pair with index {i}")

    def tracking_vsets(self, source: str) -> List[Tuple[int, EnumeratedSet]]:
        return [(i, v) for i, v in self.vsets if v.tracks == source]


def roster_from_dict(d: Dict[str, Any]) -> Roster:
    roster = Roster()
    for item in d.get("adversaries", []):
        kind = item.get("kind")
        if kind not in KINDS:
            raise RosterError(f"{item.get('name', '?')}: unknown kind {kind!r}")
        if kind == "partial-fn":
            pf = PartialFn.from_dict(item)
            role = item.get("role")
            if role == "delay":
                roster.delays.append(pf)
            elif role == "description":
                roster.descriptions.append(pf)
            else:
                raise RosterError(f"{pf.name}: partial-fn role must be delay or description")
        elif kind == "enumerated-set":
            v = EnumeratedSet.from_dict(item)
            if "pair" not in item:
                raise RosterError(f"{v.name}: enumerated-set needs the pair it attacks")
            if v.tracks not in (None, "M"):
                raise RosterError(f"{v.name}: cannot track {v.tracks!r}")
            roster.vsets.append((int(item["pair"]), v))
        else:
            try:
                xs = EnumeratedSet.from_dict(item["x_side"])
                ys = EnumeratedSet.from_dict(item["y_side"])
                rule = item.get("rule") if kind == "tracking-split-pair" else None
                if kind == "tracking-split-pair" and rule is None:
                    raise RosterError(f"pair {item['index']}: tracking pair without a rule")
                roster.pairs.append(SplitPair(int(item["index"]), xs, ys, rule,
                                              int(item.get("threshold", 0))))
            except KeyError as e:
                raise RosterError(f"{kind} missing field {e}") from None
    indices = [p.index for p in roster.pairs]
    if len(set(indices)) != len(indices):
        raise RosterError(f"duplicate split indices {indices}")
    for i, v in roster.vsets:
        if i not in indices:
            raise RosterError(f"{v.name}: attacks missing pair {i}")
    roster.pairs.sort(key=lambda p: p.index)
    return roster


def roster_to_dict(roster: Roster) -> Dict[str, Any]:
    items: List[Dict[str, Any]] = []
    for pf in roster.delays:
        items.append({"kind": "partial-fn", "role": "delay", **pf.to_dict()})
    for pf in roster.descriptions:
        items.append({"kind": "partial-fn", "role": "description", **pf.to_dict()})
    for p in roster.pairs:
        items.append(p.to_dict())
    for i, v in roster.vsets:
        items.append({"kind": "enumerated-set", "pair": i, **v.to_dict()})
    return {"adversaries": items}


def load_roster(path: str) -> Dict[str, Any]:
    """Read and validate a roster file; returns the plain dict (runs rebuild from it)."""
    try:
        with open(path, "r") as f:
            d = json.load(f)
    except FileNotFoundError:
        raise RosterError(f"roster file {path} not found") from None
    except json.JSONDecodeError as e:
        raise RosterError(f"roster file {path} is not valid JSON ({e})") from None
    roster_from_dict(d)
    return d


def save_roster(path: str, d: Dict[str, Any]) -> None:
    with open(path, "w") as f:
        json.dump(d, f, indent=2)
        f.write("\n")
