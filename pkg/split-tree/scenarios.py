# scenarios.py
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from adversary import load_roster
from construction import ConstructionConfig
from trace_store import TraceDoc
from verifier import CHECKS, CheckReport, single_q_oracle

HERE = os.path.dirname(os.path.abspath(__file__))
ROSTER_DIR = os.path.join(HERE, "rosters")


# ---------- expectations ----------
@dataclass(frozen=True)
class Expectation:
    check: str
    status: Optional[str] = "pass"      # None: any status
    count: Optional[str] = None         # key in CheckReport.counts
    lo: Optional[int] = None
    hi: Optional[int] = None
    q_path: str = ""                    # node the check is aimed at, for the per-Q checks

    def diff(self, rep: CheckReport) -> Optional[str]:
        where = f"{self.check}@{self.q_path}" if self.q_path else self.check
        if self.status is not None and rep.status != self.status:
            return f"{where}: status {rep.status}, expected {self.status}"
        if self.count is None:
            return None
        got = rep.counts.get(self.count)
        if got is None:
            return f"{where}: no count {self.count!r}"
        if (self.lo is not None and got < self.lo) or (self.hi is not None and got > self.hi):
            return f"{where}: {self.count}={got}, expected [{self.lo}, {self.hi}]"
        return None


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    config: ConstructionConfig
    roster: Dict[str, Any] = field(default_factory=dict)
    expected: Tuple[Expectation, ...] = ()
    about: str = ""

    def __post_init__(self):
        for e in self.expected:
            if e.check not in CHECKS:
                raise ValueError(f"scenario {self.name}: unknown check {e.check!r}")

    def reports(self, doc: TraceDoc) -> Dict[Tuple[str, str], CheckReport]:
        """Run each expected check once per target node."""
        out: Dict[Tuple[str, str], CheckReport] = {}
        for e in self.expected:
            key = (e.check, e.q_path)
            if key not in out:
                fn = CHECKS[e.check]
                out[key] = fn(doc, q_path=e.q_path) if e.q_path else fn(doc)
        return out

    def compare(self, reports: Dict[Tuple[str, str], CheckReport]) -> List[str]:
        out = []
        for e in self.expected:
            rep = reports.get((e.check, e.q_path))
            if rep is None:
                out.append(f"{e.check}: not run")
                continue
            d = e.diff(rep)
            if d:
                out.append(d)
        return out


# ---------- roster pieces ----------
def affine_delay(name: str, c: int, bound: int = 10_000) -> Dict[str, Any]:
    return {"kind": "partial-fn", "role": "delay", "name": name, "entries": [],
            "generator": {"kind": "affine", "c": c, "max_x": bound, "max_s": bound}}


def constant_description(name: str, value: int, conv: int, bound: int = 10_000) -> Dict[str, Any]:
    return {"kind": "partial-fn", "role": "description", "name": name, "entries": [],
            "generator": {"kind": "constant", "value": value, "conv": conv, "max_x": bound}}


def divergent(name: str, role: str) -> Dict[str, Any]:
    return {"kind": "partial-fn", "role": role, "name": name, "entries": [], "generator": None}


def tracking_pair(i: int, rule: str, threshold: int = 0) -> Dict[str, Any]:
    return {"kind": "tracking-split-pair", "index": i,
            "x_side": {"name": f"X{i}", "schedule": {}}, "y_side": {"name": f"Y{i}", "schedule": {}},
            "rule": rule, "threshold": threshold}


def vset(name: str, pair: int, schedule: Optional[Dict[int, List[int]]] = None,
         tracks: Optional[str] = None) -> Dict[str, Any]:
    sched = {str(s): xs for s, xs in (schedule or {}).items()}
    return {"kind": "enumerated-set", "pair": pair, "name": name, "schedule": sched, "tracks": tracks}


# ---------- canned scenarios ----------
def _a1() -> ScenarioSpec:
    H = 50
    want = len(single_q_oracle(0, H))
    return ScenarioSpec(
        "a1",
        ConstructionConfig("one-split", H, roster_path=os.path.join(ROSTER_DIR, "a1.json"), verbosity=0),
        expected=(
            Expectation("count_speedup_witnesses", count="witnesses", lo=want, hi=want),
            Expectation("check_m_subset", count="deficit", lo=0, hi=0),
            Expectation("check_pool_discipline"),
            Expectation("check_restraint_integrity"),
            Expectation("check_upward_origin"),
            Expectation("check_pinf_prefix"),
            Expectation("check_used_forever"),
        ),
        about="single Q, h(x,s)=s, no S adversary: every witness outlives h by one stage",
    )


def _a2() -> ScenarioSpec:
    # the root c-chain is c, c.c, c.c.c; D0 below c.c.c.c.h feeds M of c.c.c.
    # The first entrant climbs and sends the root to inf once, which builds the
    # committed puller at inf.d.blank; every later entrant of c.c.c is pulled
    # into B at the stage it enters M.
    q = "c.c.c"
    return ScenarioSpec(
        "a2",
        ConstructionConfig("two-split", 100, roster_path=os.path.join(ROSTER_DIR, "a2.json"), verbosity=0),
        expected=(
            Expectation("count_speedup_witnesses", count="witnesses", lo=0, hi=0, q_path=q),
            Expectation("count_speedup_witnesses", count="m_not_in_b", lo=0, hi=0, q_path=q),
            Expectation("check_equation_in_R", count="diff_M", lo=0, hi=0, q_path=q),
            Expectation("check_equation_in_R", count="diff_V", lo=0, hi=0, q_path=q),
            Expectation("check_equation_in_R", count="diff_Z", lo=0, hi=0, q_path=q),
            Expectation("check_equation_in_R", count="F", lo=1, hi=1, q_path=q),
            Expectation("check_equation_in_R"),
            Expectation("check_m_subset", count="deficit", lo=0, hi=0, q_path=q),
            Expectation("check_restraint_integrity"),
            Expectation("check_pool_discipline"),
            Expectation("check_step4_flood"),
        ),
        about="a committed S node left of a Q at c pulls every entrant; that Q stays at c",
    )


def _switch2() -> ScenarioSpec:
    roster = {"adversaries": [
        affine_delay("h0", 0),
        constant_description("delta0", 0, 0),
        tracking_pair(0, "round-robin"),
        tracking_pair(1, "round-robin"),
    ]}
    return ScenarioSpec(
        "switch2",
        ConstructionConfig("two-split", 12, verbosity=0),
        roster,
        expected=(
            Expectation("check_switch_sequence", count="switches", lo=3, hi=3),
            Expectation("check_switch_sequence", count="longest_chain", lo=3, hi=3),
            Expectation("check_delta_length"),
        ),
        about="two splits, successive c outcomes: Z runs X0X1, X0Y1, Y0X1, Y0Y1",
    )


def _gen3() -> ScenarioSpec:
    roster = {"adversaries": [
        affine_delay("h0", 1),
        affine_delay("h1", 2),
        constant_description("delta0", 0, 0),
        tracking_pair(0, "round-robin"),
        tracking_pair(1, "all-to-x"),
        tracking_pair(2, "threshold", threshold=10),
        vset("V0", 0, tracks="M"),
    ]}
    return ScenarioSpec(
        "gen3",
        ConstructionConfig("general", 40, verbosity=0),
        roster,
        expected=(
            Expectation("check_switch_sequence", count="oracle_mismatches", lo=0, hi=0),
            Expectation("check_switch_sequence", count="switches", lo=1),
            Expectation("check_pool_discipline"),
            Expectation("check_restraint_integrity"),
            Expectation("flag_all_y_equations", status=None),
        ),
        about="general regime over three tracking pairs; G transitions against the switch rule",
    )


SCENARIOS = {"a1": _a1, "a2": _a2, "switch2": _switch2, "gen3": _gen3}


def get_scenario(name: str) -> ScenarioSpec:
    try:
        return SCENARIOS[name]()
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}") from None


def scenario_roster(spec: ScenarioSpec) -> Dict[str, Any]:
    if spec.config.roster_path is not None:
        return load_roster(spec.config.roster_path)
    return spec.roster


# ---------- random rosters ----------
RULES = ("round-robin", "all-to-x", "all-to-y", "threshold")


def _random_delay(rng: np.random.Generator, name: str, horizon: int) -> Dict[str, Any]:
    if rng.random() < 0.7:
        return affine_delay(name, int(rng.integers(0, 4)), bound=horizon + 5)
    # partial table over small arguments; missing pairs never converge
    entries = []
    for x in range(int(rng.integers(4, 12))):
        for t in range(0, horizon + 1):
            if rng.random() < 0.9:
                entries.append([[x, t], t + int(rng.integers(0, 4)), t + int(rng.integers(0, 3))])
    return {"kind": "partial-fn", "role": "delay", "name": name, "entries": entries, "generator": None}


def _random_description(rng: np.random.Generator, name: str, horizon: int) -> Dict[str, Any]:
    roll = rng.random()
    if roll < 0.15:
        return divergent(name, "description")
    value = 0 if roll < 0.8 else 1
    return constant_description(name, value, int(rng.integers(0, max(2, horizon // 4))), bound=10 * horizon)


def random_roster(rng: np.random.Generator, regime: str, horizon: int = 60) -> Dict[str, Any]:
    """A seeded roster for the invariant suite; sizes stay small so a run takes milliseconds."""
    n_pairs = {"one-split": 1, "two-split": 2}.get(regime) or int(rng.integers(1, 4))
    items: List[Dict[str, Any]] = []
    for i in range(int(rng.integers(1, 3))):
        items.append(_random_delay(rng, f"h{i}", horizon))
    for i in range(int(rng.integers(1, 3))):
        items.append(_random_description(rng, f"delta{i}", horizon))
    for i in range(n_pairs):
        rule = RULES[int(rng.integers(0, len(RULES)))]
        items.append(tracking_pair(i, rule, threshold=int(rng.integers(0, 20))))
    for v in range(int(rng.integers(0, 3))):
        pair = int(rng.integers(0, n_pairs))
        if rng.random() < 0.5:
            items.append(vset(f"V{v}", pair, tracks="M"))
            continue
        xs = rng.choice(40, size=int(rng.integers(1, 8)), replace=False)
        sched: Dict[int, List[int]] = {}
        for x in sorted(int(x) for x in xs):
            sched.setdefault(int(rng.integers(1, horizon + 1)), []).append(x)
        items.append(vset(f"V{v}", pair, schedule=sched))
    return {"adversaries": items}
