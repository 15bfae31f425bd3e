# verifier.py
"""
Finite-horizon checks over a construction trace.

Each checker is a pure function of a `TraceDoc` and returns a `CheckReport`.
Nothing here imports the strategy or tree code: pools, epochs, restraints and
witness holdings are all rebuilt by replaying the event log, and the two
oracles (`single_q_oracle`, `oracle_switch`) recompute their answers from
scratch.
"""
import copy
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Set, Tuple

from adversary import PartialFn, eval_partial
from trace_store import TraceDoc

ORDER = {"inf": 0, "c": 1, "h": 2, "split": 3, "fin": 4, "k": 5, "s": 6, "a": 7, "d": 8}
Q_OUTCOMES = ("inf", "c", "h")
FRESH_PICKS = ("pick", "4", "q1", "q3b")     # steps that must draw an unused element from a pool
Q_PICKS = ("q1", "q3b")
S_STEPS = ("1", "2", "3a", "3b", "4", "keep")
LADDER = ["X0,X1", "X0,Y1", "Y0,X1", "Y0,Y1"]


@dataclass
class CheckReport:
    name: str
    status: str = "pass"             # pass | fail | inapplicable | warn
    counterexample: Optional[Dict[str, Any]] = None
    counts: Dict[str, Any] = field(default_factory=dict)
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def fail(self, note: str, **where: Any) -> "CheckReport":
        self.status = "fail"
        self.note = note
        self.counterexample = where
        return self

    def line(self) -> str:
        parts = [f"{self.name:<28}", self.status.upper()]
        parts += [f"{k}={v}" for k, v in self.counts.items()]
        if self.note:
            parts.append(f"-- {self.note}")
        if self.counterexample:
            parts.append("at " + " ".join(f"{k}={v}" for k, v in self.counterexample.items()))
        return " ".join(parts)


# ---------- small helpers ----------
def _split(path: str) -> Tuple[str, ...]:
    return tuple(path.split(".")) if path else ()


def _join(path: Tuple[str, ...]) -> str:
    return ".".join(path)


def _left_of(a: Tuple[str, ...], b: Tuple[str, ...]) -> bool:
    for x, y in zip(a, b):
        if x != y:
            return ORDER.get(x, 99) < ORDER.get(y, 99)
    return False


def _higher(a: Tuple[str, ...], b: Tuple[str, ...]) -> bool:
    return (len(a) < len(b) and b[: len(a)] == a) or _left_of(a, b)


def _active_s_above(doc: TraceDoc, q_path: str) -> List[str]:
    """S nodes that committed or took a witness, are still active, and sit above q's c outcome."""
    seen = {ev["path"] for ev in doc.of_type("commit")}
    seen |= {ev["path"] for ev in doc.of_type("witness-pick") if ev["step"] in S_STEPS}
    active = {n["path"] for n in doc.nodes() if n.get("active")}
    target = _split(q_path) + ("c",)
    return sorted(p for p in seen & active if _higher(_split(p), target))


def _owner(path: str) -> Optional[Tuple[str, str]]:
    """Nearest Q ancestor (by its outcome token) that feeds this node its pool."""
    p = _split(path)
    for j in range(len(p) - 1, -1, -1):
        if p[j] in Q_OUTCOMES:
            return _join(p[:j]), p[j]
    return None


def _parse_pool(desc: str) -> Tuple[str, Optional[str], Optional[int]]:
    if desc == "omega":
        return "omega", None, None
    kind, rest = desc.split(":", 1)
    owner, n = rest.rsplit("@", 1)
    return kind, owner, int(n)


def _final_b(doc: TraceDoc) -> Dict[int, int]:
    return {int(x): t for x, t in (doc.final or {}).get("B", {}).items()}


def _delay_for(doc: TraceDoc, req: str) -> Optional[PartialFn]:
    if not req.startswith("Q"):
        return None
    delays = [a for a in doc.header["roster"].get("adversaries", [])
              if a.get("kind") == "partial-fn" and a.get("role") == "delay"]
    i = int(req[1:])
    return PartialFn.from_dict(delays[i]) if i < len(delays) else None


def _q_node(doc: TraceDoc, q_path: str, name: str) -> Tuple[Optional[Dict[str, Any]], CheckReport]:
    rep = CheckReport(name)
    node = doc.node(q_path)
    if node is None or not node["req"].startswith("Q"):
        rep.status = "inapplicable"
        rep.note = f"no Q node at {q_path!r}"
        return None, rep
    return node, rep


def parse_G(text: str) -> List[Tuple[int, str]]:
    return [(int(tok[1:]), tok[0]) for tok in text.split(",") if tok]


def render_G(G: List[Tuple[int, str]]) -> str:
    return ",".join(f"{side}{i}" for i, side in G)


# ---------- oracles ----------
def single_q_oracle(c: int, horizon: int) -> List[int]:
    """Stages at which a lone Q node with h(x,s)=s+c forwards a survivor.

    First M-entry at stage 4; an entrant at t is forwarded at t+c+2 and the
    next witness climbs into M two stages after that.
    """
    out: List[int] = []
    t = 4
    while True:
        f = t + c + 2
        if f > horizon:
            return out
        out.append(f)
        t = f + 2


def oracle_switch(G: List[Tuple[int, str]]) -> List[Tuple[int, str]]:
    """Flip the largest-index X to Y and put every higher index back to X."""
    xs = [i for i, side in G if side == "X"]
    if not xs:
        return list(G)
    top = max(xs)
    return [(i, "Y") if i == top else ((i, "X") if i > top else (i, side)) for i, side in G]


# ---------- checkers ----------
def check_restraint_integrity(doc: TraceDoc) -> CheckReport:
    rep = CheckReport("check_restraint_integrity")
    held: Dict[int, Dict[str, bool]] = {}
    entered = 0
    for ev in doc.events:
        t = ev["type"]
        if t == "restrain":
            held.setdefault(ev["x"], {})[ev["path"]] = bool(ev["unused"])
        elif t == "unrestrain":
            held.get(ev["x"], {}).pop(ev["path"], None)
        elif t == "reset":
            for holders in held.values():
                holders.pop(ev["path"], None)
        elif t == "enumerate" and ev["set"] == "B":
            entered += 1
            guards = [p for p, unused in held.get(ev["x"], {}).items() if unused]
            if guards:
                return rep.fail("restrained element entered B", stage=ev["s"], x=ev["x"],
                                paths=",".join(sorted(guards)) or "<root>")
    rep.counts = {"restraints": len(doc.of_type("restrain")), "b_entries": entered}
    return rep


def check_equation_in_R(doc: TraceDoc, q_path: str = "", tolerance: Optional[int] = None) -> CheckReport:
    node, rep = _q_node(doc, q_path, "check_equation_in_R")
    if node is None:
        return rep
    if node["last_outcome"] != "c":
        rep.status = "inapplicable"
        rep.note = f"last outcome {node['last_outcome']}"
        return rep
    R = set(node["R"])
    M = {int(x) for x in node["M"]}
    B = set(_final_b(doc))
    V: Set[int] = set()
    for members in doc.final.get("vsets", {}).values():
        V |= {int(x) for x in members}
    Z: Set[int] = set()
    for i, side in parse_G(node["G"]):
        pair = doc.final["pairs"].get(str(i))
        if pair is not None:
            Z |= {int(x) for x in pair[side]}
    if tolerance is None:
        tolerance = len(_active_s_above(doc, q_path))
    lhs = B & R
    diffs = {"M": len(lhs ^ (M & R)), "V": len(lhs ^ (V & R)) if V else 0, "Z": len(lhs ^ (Z & R))}
    rep.counts = {"F": tolerance, **{f"diff_{k}": v for k, v in diffs.items()}, "R": len(R)}
    for side, n in diffs.items():
        if n > tolerance:
            bad = sorted(lhs ^ ({"M": M, "V": V, "Z": Z}[side] & R))
            return rep.fail(f"B and {side} disagree on R by {n} > F={tolerance}",
                            stage=doc.horizon, x=bad[0], paths=q_path or "<root>")
    return rep


def check_switch_sequence(doc: TraceDoc) -> CheckReport:
    rep = CheckReport("check_switch_sequence")
    switches = doc.of_type("switch")
    if doc.regime == "one-split":
        rep.status = "inapplicable"
        rep.note = "one-split trees never switch"
        return rep
    by_path = {ev["path"]: ev for ev in switches}
    wrong = []
    for ev in switches:
        if _split(ev["path"])[-1:] != ("c",):
            return rep.fail("switch below a non-c edge", stage=ev["s"], paths=ev["path"])
        if render_G(oracle_switch(parse_G(ev["before"]))) != ev["after"]:
            wrong.append(ev)
    mismatches = len(wrong)
    rep.counts = {"switches": len(switches), "oracle_mismatches": mismatches}
    if wrong:
        first = wrong[0]
        return rep.fail("recorded G transition differs from the switch rule",
                        stage=first["s"], paths=first["path"])
    longest = 0
    for ev in switches:
        p = _split(ev["path"])
        chain = [by_path[_join(p[:j])] for j in range(1, len(p) + 1) if _join(p[:j]) in by_path]
        longest = max(longest, len(chain))
        if doc.regime != "two-split":
            continue
        seq = ["X0,X1"] + [e["after"] for e in chain]
        if len(chain) > 3 or seq != LADDER[: len(seq)]:
            return rep.fail(f"switch sequence {' -> '.join(seq)} leaves the ladder",
                            stage=ev["s"], paths=ev["path"])
        for a, b in zip(chain, chain[1:]):
            if a["after"] != b["before"]:
                return rep.fail("switch does not start from its parent's G", stage=b["s"], paths=b["path"])
    rep.counts["longest_chain"] = longest
    return rep


def count_speedup_witnesses(doc: TraceDoc, q_path: str = "", expected: Optional[int] = None) -> CheckReport:
    node, rep = _q_node(doc, q_path, "count_speedup_witnesses")
    if node is None:
        return rep
    B = _final_b(doc)
    logged = {ev["x"]: ev["s"] for ev in doc.of_type("enumerate") if ev["set"] == "B"}
    for x, t in B.items():
        if logged.get(x) != t:
            return rep.fail("final B disagrees with the enumeration log", stage=t, x=x)
    h = _delay_for(doc, node["req"])
    H = doc.horizon
    witnesses = 0
    for xs, t in node["M"].items():
        x = int(xs)
        v = eval_partial(h, (x, t), H) if h is not None else None
        if x in B and v is not None and B[x] > v:
            witnesses += 1
    missing = sum(1 for xs in node["M"] if int(xs) not in B)
    rep.counts = {"witnesses": witnesses, "m_not_in_b": missing}
    if expected is not None and witnesses != expected:
        return rep.fail(f"counted {witnesses} witnesses, oracle says {expected}",
                        stage=H, paths=q_path or "<root>")
    return rep


def check_m_subset(doc: TraceDoc, q_path: str = "") -> CheckReport:
    node, rep = _q_node(doc, q_path, "check_m_subset")
    if node is None:
        return rep
    B = _final_b(doc)
    H = doc.horizon
    h = _delay_for(doc, node["req"])
    M = {int(x): t for x, t in node["M"].items()}
    holders = {ev["path"] for ev in doc.of_type("restrain") if ev["x"] in M}
    delayed: Dict[int, str] = {}
    for ev in doc.events:
        if ev["type"] == "sharp-delay":
            delayed[ev["x"]] = ev["path"]
        elif ev["type"] == "reset":
            delayed = {x: p for x, p in delayed.items() if p != ev["path"]}
    deficit = []
    for x, t in sorted(M.items()):
        if x in B or x in delayed:
            continue                # delayed: promised to B at a stage past the horizon
        v = eval_partial(h, (x, t), H) if h is not None else None
        if v is None or H <= v + 1:
            continue                # still waiting on h at the horizon
        deficit.append(x)
    rep.counts = {"m": len(M), "deficit": len(deficit), "restrainers": len(holders),
                  "delayed": sum(1 for x in M if x in delayed and x not in B)}
    if len(deficit) > len(holders):
        return rep.fail(f"{len(deficit)} elements of M missing from B, {len(holders)} restrainer(s)",
                        stage=H, x=deficit[0], paths=q_path or "<root>")
    return rep


def check_pool_discipline(doc: TraceDoc) -> CheckReport:
    rep = CheckReport("check_pool_discipline")
    used: Set[int] = set()
    R: Dict[Tuple[str, int], Set[int]] = {}
    P: Dict[Tuple[str, int], Set[int]] = {}
    epoch: Dict[str, int] = {}
    run: Dict[str, int] = {}
    picks = 0
    for ev in doc.events:
        t = ev["type"]
        if t == "use":
            used.add(ev["x"])
        elif t == "r-add":
            R.setdefault((ev["path"], ev["epoch"]), set()).add(ev["x"])
        elif t == "r-reset":
            epoch[ev["path"]] = ev["epoch"]
        elif t == "pinf-add":
            P.setdefault((ev["path"], ev["run"]), set()).add(ev["y"])
        elif t == "reset":
            epoch[ev["path"]] = epoch.get(ev["path"], 0) + 1
            run[ev["path"]] = run.get(ev["path"], 0) + 1
        elif t == "witness-pick" and ev["step"] in FRESH_PICKS:
            picks += 1
            x, where = ev["x"], {"stage": ev["s"], "x": ev["x"], "paths": ev["path"] or "<root>"}
            if x in used:
                return rep.fail("picked an element that was already used", **where)
            kind, owner, n = _parse_pool(ev["pool"])
            want = _owner(ev["path"])
            if want is None:
                if kind != "omega":
                    return rep.fail(f"root-level pick from {ev['pool']}", **where)
                continue
            want_kind = "Pinf" if want[1] == "inf" else "R"
            if kind != want_kind or owner != want[0]:
                return rep.fail(f"pick from {ev['pool']}, parent pool is {want_kind}:{want[0]}", **where)
            if kind == "R":
                if n != epoch.get(owner, 0) or x not in R.get((owner, n), set()):
                    return rep.fail(f"{x} not in the current R of {owner or '<root>'}", **where)
            elif n != run.get(owner, 0) or x not in P.get((owner, n), set()):
                return rep.fail(f"{x} not in P_inf of {owner or '<root>'}", **where)
            if ev["step"] in Q_PICKS:
                own = R.get((ev["path"], epoch.get(ev["path"], 0)), set())
                if x in own:
                    return rep.fail("Q pick already in its own current R", **where)
    rep.counts = {"picks": picks}
    return rep


def check_used_forever(doc: TraceDoc) -> CheckReport:
    rep = CheckReport("check_used_forever")
    used: Dict[int, int] = {}
    for ev in doc.events:
        if ev["type"] == "use":
            if ev["x"] in used:
                return rep.fail("element marked used twice", stage=ev["s"], x=ev["x"])
            used[ev["x"]] = ev["s"]
        elif ev["type"] == "witness-pick" and ev["step"] in FRESH_PICKS and ev["x"] in used:
            return rep.fail(f"used since stage {used[ev['x']]}, picked again as fresh",
                            stage=ev["s"], x=ev["x"], paths=ev["path"] or "<root>")
    rep.counts = {"used": len(used)}
    return rep


def check_upward_origin(doc: TraceDoc) -> CheckReport:
    rep = CheckReport("check_upward_origin")
    emitted: Set[int] = set()
    climbs = 0
    for ev in doc.events:
        if ev["type"] == "d-emit":
            emitted.add(ev["x"])
        elif ev["type"] == "enumerate" and ev["set"].startswith("Bc:"):
            climbs += 1
            if ev["x"] not in emitted:
                return rep.fail("B^c entry that no D node ever emitted",
                                stage=ev["s"], x=ev["x"], paths=ev["set"][3:] or "<root>")
    rep.counts = {"climbs": climbs, "d_emits": len(emitted)}
    return rep


def check_pinf_prefix(doc: TraceDoc) -> CheckReport:
    rep = CheckReport("check_pinf_prefix")
    decided: Dict[Tuple[str, int], int] = {}
    for ev in doc.of_type("pinf-add"):
        key = (ev["path"], ev["run"])
        prev = decided.get(key, -1)
        if ev["y"] <= prev:
            return rep.fail(f"{ev['y']} added below the decided prefix {prev}",
                            stage=ev["s"], x=ev["y"], paths=ev["path"] or "<root>")
        if ev["decided_upto"] != ev["y"]:
            return rep.fail("decided prefix does not end at the new element",
                            stage=ev["s"], x=ev["y"], paths=ev["path"] or "<root>")
        decided[key] = ev["y"]
    rep.counts = {"runs": len(decided), "additions": len(doc.of_type("pinf-add"))}
    return rep


def _pool_members(desc: str, R: Dict[str, Set[int]], P: Dict[str, Set[int]]) -> Optional[Set[int]]:
    kind, owner, _ = _parse_pool(desc)
    if kind == "omega":
        return None
    return (R if kind == "R" else P).get(owner, set())


def check_step4_flood(doc: TraceDoc) -> CheckReport:
    """After each Q action, every unused y below its latest witness is in B unless R or P_inf keeps it.

    Only elements of the Q node's own input pool are flooded; the pool is rebuilt
    from the `pool` descriptor of the node's latest q1 pick.
    """
    rep = CheckReport("check_step4_flood")
    q_paths = {n["path"] for n in doc.nodes() if n["req"].startswith("Q")}
    used: Set[int] = set()
    B: Set[int] = set()
    R: Dict[str, Set[int]] = {}
    P: Dict[str, Set[int]] = {}
    pick: Dict[str, Tuple[int, str]] = {}
    held: Dict[int, Set[str]] = {}
    by_stage: Dict[int, List[Dict[str, Any]]] = {}
    for ev in doc.events:
        by_stage.setdefault(ev["s"], []).append(ev)
    checked = 0
    for s in sorted(doc.deltas):
        for ev in by_stage.get(s, []):
            t, path = ev["type"], ev.get("path")
            if t == "use":
                used.add(ev["x"])
            elif t == "enumerate" and ev["set"] == "B":
                B.add(ev["x"])
            elif t == "r-add":
                R.setdefault(path, set()).add(ev["x"])
            elif t == "r-reset":
                R[path] = set()
            elif t == "pinf-add":
                P.setdefault(path, set()).add(ev["y"])
            elif t == "witness-pick" and ev["step"] == "q1":
                pick[path] = (ev["x"], ev["pool"])
            elif t == "restrain":
                held.setdefault(ev["x"], set()).add(path)
            elif t == "unrestrain":
                held.get(ev["x"], set()).discard(path)
            elif t == "reset":
                R.pop(path, None)
                P.pop(path, None)
                pick.pop(path, None)
                for holders in held.values():
                    holders.discard(path)
        delta = doc.deltas[s]
        for j in range(len(delta)):
            q = _join(delta[:j])
            if q not in q_paths or q not in pick:
                continue
            x, pool = pick[q]
            members = _pool_members(pool, R, P)
            keep = R.get(q, set()) | P.get(q, set())
            for y in range(x):
                if y in used or y in B or y in keep or held.get(y):
                    continue
                if members is not None and y not in members:
                    continue
                return rep.fail(f"unused {y} below witness {x} left out of B", stage=s, x=y,
                                paths=q or "<root>")
            checked += 1
    rep.counts = {"q_actions": checked}
    return rep


def check_reset_correctness(doc: TraceDoc) -> CheckReport:
    rep = CheckReport("check_reset_correctness")
    holding: Dict[str, int] = {}
    by_stage: Dict[int, List[Dict[str, Any]]] = {}
    for ev in doc.events:
        by_stage.setdefault(ev["s"], []).append(ev)
    for s in sorted(doc.deltas):
        for ev in by_stage.get(s, []):
            if ev["type"] == "witness-pick" and ev["step"] not in Q_PICKS:
                holding[ev["path"]] = ev["x"]
            elif ev["type"] == "reset":
                holding.pop(ev["path"], None)
        delta = doc.deltas[s]
        for p, x in sorted(holding.items()):
            if _left_of(delta, _split(p)):
                return rep.fail("witness held right of delta_s after the stage", stage=s, x=x, paths=p)
    rep.counts = {"holders": len(holding)}
    return rep


def check_delta_length(doc: TraceDoc) -> CheckReport:
    rep = CheckReport("check_delta_length")
    stages = sorted(doc.deltas)
    if stages != list(range(1, len(stages) + 1)):
        return rep.fail("stages are not numbered 1..H", stage=stages[0] if stages else 0)
    for s in stages:
        if len(doc.deltas[s]) > s:
            return rep.fail(f"|delta_s| = {len(doc.deltas[s])} > s", stage=s, paths=_join(doc.deltas[s]))
    rep.counts = {"stages": len(stages), "max_len": max((len(d) for d in doc.deltas.values()), default=0)}
    return rep


def flag_all_y_equations(doc: TraceDoc) -> CheckReport:
    """Warn when a node at c is working on an equation whose halves are all Y."""
    rep = CheckReport("flag_all_y_equations")
    flagged = [n["path"] for n in doc.nodes()
               if n["req"].startswith("Q") and n["last_outcome"] == "c"
               and doc.regime != "one-split" and all(side == "Y" for _, side in parse_G(n["G"]))]
    rep.counts = {"flagged": len(flagged)}
    if flagged:
        rep.status = "warn"
        rep.note = "transient all-Y equation at " + ",".join(p or "<root>" for p in flagged)
    return rep


CHECKS: Dict[str, Callable[[TraceDoc], CheckReport]] = {
    "check_restraint_integrity": check_restraint_integrity,
    "check_equation_in_R": check_equation_in_R,
    "check_switch_sequence": check_switch_sequence,
    "count_speedup_witnesses": count_speedup_witnesses,
    "check_m_subset": check_m_subset,
    "check_pool_discipline": check_pool_discipline,
    "check_used_forever": check_used_forever,
    "check_upward_origin": check_upward_origin,
    "check_pinf_prefix": check_pinf_prefix,
    "check_step4_flood": check_step4_flood,
    "check_reset_correctness": check_reset_correctness,
    "check_delta_length": check_delta_length,
    "flag_all_y_equations": flag_all_y_equations,
}


def verify(doc: TraceDoc, names: Optional[List[str]] = None) -> List[CheckReport]:
    names = list(CHECKS) if names is None else names
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s) {', '.join(unknown)}; known: {', '.join(CHECKS)}")
    return [CHECKS[n](doc) for n in names]


# ---------- negative controls ----------
def _insert(records: List[Dict[str, Any]], ev: Dict[str, Any]) -> List[Dict[str, Any]]:
    """Append an event to the last stage, just before the final record."""
    out = copy.deepcopy(records)
    last = max(r["s"] for r in out if r["kind"] == "stage")
    seq = sum(1 for r in out if r["kind"] == "event" and r["s"] == last)
    at = next((i for i, r in enumerate(out) if r["kind"] == "final"), len(out))
    out.insert(at, {"kind": "event", "s": last, "seq": seq, **ev})
    return out


def _first(records: List[Dict[str, Any]], pred: Callable[[Dict[str, Any]], bool]) -> Optional[int]:
    return next((i for i, r in enumerate(records) if pred(r)), None)


def corrupt_restraint(records):
    out = _insert(records, {"type": "restrain", "path": "d", "x": 10 ** 6, "unused": True})
    return _insert(out, {"type": "enumerate", "set": "B", "x": 10 ** 6, "cause": "flood"})


def corrupt_equation(records):
    out = copy.deepcopy(records)
    final = out[-1]
    hit = [n for n in final["nodes"] if n["req"].startswith("Q") and n["last_outcome"] == "c"]
    if not hit:
        raise ValueError("no node at c to corrupt")
    extra = list(range(10 ** 6, 10 ** 6 + 10))
    for n in hit:
        n["R"] = sorted(n["R"] + extra)
        n["M"].update({str(x): final.get("horizon", 1) for x in extra})
    return out


def corrupt_switch(records):
    out = copy.deepcopy(records)
    i = _first(out, lambda r: r["kind"] == "event" and r["type"] == "switch")
    if i is None:
        raise ValueError("trace has no switch event")
    out[i]["after"] = out[i]["before"]
    return out


def corrupt_speedup(records):
    out = copy.deepcopy(records)
    B = out[-1]["B"]
    x = next(iter(B))
    B[x] = B[x] + 1
    return out


def corrupt_m_subset(records):
    out = copy.deepcopy(records)
    final = out[-1]
    root = next(n for n in final["nodes"] if n["path"] == "")
    gone = [x for x in root["M"] if x in final["B"]][:2]
    if len(gone) < 2:
        raise ValueError("root M too small to corrupt")
    for x in gone:
        del final["B"][x]
    return out


def corrupt_pool(records):
    out = copy.deepcopy(records)
    i = _first(out, lambda r: r["kind"] == "event" and r["type"] == "witness-pick"
               and r["step"] == "pick" and r["pool"].startswith("R:") and r["pool"][2:].split("@")[0] != "")
    if i is None:
        raise ValueError("no pick below a non-root Q")
    epoch = out[i]["pool"].rsplit("@", 1)[1]
    out[i]["pool"] = f"R:@{epoch}"     # the grandparent's pool
    return out


def corrupt_used(records):
    i = _first(records, lambda r: r["kind"] == "event" and r["type"] == "witness-pick" and r["step"] == "pick")
    if i is None:
        raise ValueError("no D pick to replay")
    ev = {k: v for k, v in records[i].items() if k not in ("kind", "s", "seq")}
    ev["path"] = "d"
    return _insert(records, ev)


def corrupt_origin(records):
    return _insert(records, {"type": "enumerate", "set": "Bc:", "x": 10 ** 6, "cause": "forward"})


def corrupt_pinf(records):
    return _insert(records, {"type": "pinf-add", "path": "", "y": 0, "run": 0, "decided_upto": 0})


def corrupt_step4(records):
    return _insert(records, {"type": "witness-pick", "path": "", "x": 10 ** 6, "step": "q1", "pool": "omega"})


def corrupt_reset(records):
    return _insert(records, {"type": "witness-pick", "path": "d", "x": 10 ** 6, "step": "pick", "pool": "omega"})


def corrupt_delta(records):
    out = copy.deepcopy(records)
    i = _first(out, lambda r: r["kind"] == "stage")
    out[i]["delta"] = "c.c"
    return out


CORRUPTIONS: Dict[str, Callable[[List[Dict[str, Any]]], List[Dict[str, Any]]]] = {
    "check_restraint_integrity": corrupt_restraint,
    "check_equation_in_R": corrupt_equation,
    "check_switch_sequence": corrupt_switch,
    "count_speedup_witnesses": corrupt_speedup,
    "check_m_subset": corrupt_m_subset,
    "check_pool_discipline": corrupt_pool,
    "check_used_forever": corrupt_used,
    "check_upward_origin": corrupt_origin,
    "check_pinf_prefix": corrupt_pinf,
    "check_step4_flood": corrupt_step4,
    "check_reset_correctness": corrupt_reset,
    "check_delta_length": corrupt_delta,
}
