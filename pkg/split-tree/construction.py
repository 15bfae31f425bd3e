# construction.py
import time
from dataclasses import dataclass, asdict
from typing import Any, Dict, List, Optional

from adversary import Roster, load_roster, roster_from_dict, RosterError
from strategies import ConstructionError, NodeState, StrategyEngine
from tree import (INF, REGIMES, Path, PriorityTree, RequirementBook, is_prefix, left_of,
                  path_key, render_G, render_path)
from utils import CSVLogger, sha256_of_obj, now_iso

# ---------- config ----------
PAIR_ARITY = {"one-split": (1, 1), "two-split": (2, 2), "general": (1, None)}


@dataclass(frozen=True)
class ConstructionConfig:
    regime: str
    horizon: int
    roster_path: Optional[str] = None
    rng_seed: int = 0
    true_path_threshold: int = 3
    verbosity: int = 1
    log_file: Optional[str] = None

    def validate(self, roster: Optional[Roster] = None) -> None:
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r} (expected one of {', '.join(REGIMES)})")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.true_path_threshold < 1:
            raise ValueError(f"true-path threshold must be >= 1, got {self.true_path_threshold}")
        if roster is not None:
            lo, hi = PAIR_ARITY[self.regime]
            n = len(roster.pairs)
            if n < lo or (hi is not None and n > hi):
                want = f"exactly {lo}" if lo == hi else f"at least {lo}"
                raise ValueError(f"{self.regime} needs {want} split pair(s), roster has {n}")


def config_key(config: ConstructionConfig, roster_dict: Dict[str, Any]) -> str:
    # the roster path is only where the roster came from; the content is what counts
    cfg = {k: v for k, v in asdict(config).items() if k not in ("roster_path", "log_file", "verbosity")}
    return sha256_of_obj({"config": cfg, "roster": roster_dict})


# ---------- trace ----------
@dataclass
class StageRecord:
    s: int
    delta: Path
    events: List[Dict[str, Any]]


@dataclass
class ConstructionTrace:
    header: Dict[str, Any]
    stages: List[StageRecord]
    final: Dict[str, Any]

    def records(self) -> List[Dict[str, Any]]:
        """Header, then per stage its `stage` line and `event` lines, then `final`."""
        out: List[Dict[str, Any]] = [{"kind": "header", **self.header}]
        for st in self.stages:
            out.append({"kind": "stage", "s": st.s, "delta": render_path(st.delta)})
            for seq, ev in enumerate(st.events):
                out.append({"kind": "event", "s": st.s, "seq": seq, **ev})
        out.append({"kind": "final", **self.final})
        return out

    def visits(self) -> Dict[Path, int]:
        counts: Dict[Path, int] = {}
        for st in self.stages:
            for j in range(len(st.delta) + 1):
                p = st.delta[:j]
                counts[p] = counts.get(p, 0) + 1
        return counts

    def true_path(self, threshold: int) -> Path:
        """Finite-horizon approximation: keep taking the leftmost child visited >= threshold times."""
        counts = self.visits()
        path: Path = ()
        while True:
            kids = [p for p, n in counts.items()
                    if len(p) == len(path) + 1 and is_prefix(path, p) and n >= threshold]
            if not kids:
                return path
            path = min(kids, key=path_key)


# ---------- runner ----------
class ConstructionRunner:
    """
    Stage loop of the tree construction.
    - delta_s is grown one outcome at a time, each node evaluated on the way down
    - nodes right of delta_s are reset, then active S nodes to the left or below an inf act
    - nodes on delta_s act top-down; tracking pairs then follow B one stage behind
    - one CSV row per stage when a log file is configured
    """
    def __init__(self, config: ConstructionConfig, roster_dict: Dict[str, Any]):
        self.config = config
        self.roster_dict = roster_dict
        self.roster = roster_from_dict(roster_dict)
        config.validate(self.roster)
        self.book = RequirementBook.from_roster(self.roster, config.regime)
        self.tree = PriorityTree(self.book)
        self.engine = StrategyEngine(self.roster, self.tree)
        self.engine.verbosity = config.verbosity
        self.key = config_key(config, roster_dict)
        self.logger = CSVLogger(config.log_file) if config.log_file else None
        self.stages: List[StageRecord] = []

    @classmethod
    def from_config(cls, config: ConstructionConfig) -> "ConstructionRunner":
        if config.roster_path is None:
            raise RosterError("no roster given (pass --roster or use a scenario)")
        d = load_roster(config.roster_path)
        if config.verbosity >= 1:
            print(f"[load] roster {config.roster_path} ({len(d.get('adversaries', []))} adversaries)")
        return cls(config, d)

    def _say(self, msg: str, level: int = 1) -> None:
        if self.config.verbosity >= level:
            print(msg)

    # ---- delta_s
    def build_delta(self, s: int) -> Path:
        assert s >= 1, "stages start at 1"
        eng = self.engine
        path: Path = ()
        for _ in range(s):
            info = self.tree.assign(path)
            if info.requirement is None:
                break
            fresh = path not in eng.nodes
            node = eng.node_for(info)
            if fresh and path:
                parent_G = self.tree.assign(path[:-1]).G
                if info.G != parent_G and self.tree.assign(path[:-1]).requirement.kind == "Q":
                    eng.emit("switch", path=render_path(path), before=render_G(parent_G), after=render_G(info.G))
                    self._say(f"[switch] {render_path(path)}: {render_G(parent_G)} -> {render_G(info.G)}")
            outcome = eng.evaluate(node, s)
            eng.emit("outcome-eval", path=render_path(path), outcome=outcome)
            path = path + (outcome,)
        return path

    # ---- one stage
    def _left_or_below_inf(self, p: Path, delta: Path) -> bool:
        if is_prefix(p, delta):
            return False
        if left_of(p, delta):
            return True
        return any(delta[e] == INF and is_prefix(delta[:e + 1], p) for e in range(len(delta)))

    def run_stage(self, s: int) -> List[Dict[str, Any]]:
        eng = self.engine
        eng.begin_stage(s)
        delta = self.build_delta(s)

        for node in list(eng.nodes.values()):
            if node.dirty and left_of(delta, node.path):
                eng.reset(node, "right-of-delta")

        movers = [n for n in eng.nodes.values()
                  if n.kind == "SC" and n.active and self._left_or_below_inf(n.path, delta)]
        for node in sorted(movers, key=lambda n: path_key(n.path)):
            eng.sharp_sweep(node, s)

        for t in range(len(delta)):
            node = eng.state(delta[:t])
            eng.act(node, delta[t], s)

        for x in sorted(eng.B.entering(s)):
            for pair in self.roster.pairs:
                if pair.tracking:
                    side = pair.assign(x, s + 1)
                    eng.emit("enumerate", set=f"{side}{pair.index}", x=x, cause="track", at=s + 1)
        for pair in self.roster.pairs:
            if pair.tracking:
                pair.check_disjoint()

        self.stages.append(StageRecord(s, delta, eng.events))
        return eng.events

    def _log_stage(self, rec: StageRecord, runtime: float, wall_start: str) -> None:
        types = [ev["type"] for ev in rec.events]
        resets = types.count("reset")
        pulls = types.count("pull")
        if resets:
            self._say(f"[reset] stage {rec.s}: {resets} node(s) right of {render_path(rec.delta) or '<root>'}")
        self._say(f"[stage] {rec.s} delta={render_path(rec.delta) or '<root>'} |B|={len(self.engine.B)}", 2)
        if self.logger is None:
            return
        self.logger.log({
            "config_key": self.key,
            "stage": rec.s,
            "delta": render_path(rec.delta),
            "delta_len": len(rec.delta),
            "b_size": len(self.engine.B),
            "events": len(rec.events),
            "resets": resets,
            "pulls": pulls,
            "switches": types.count("switch"),
            "witness_picks": types.count("witness-pick"),
            "runtime_sec": round(runtime, 6),
            "wall_start": wall_start,
        })

    # ---- whole run
    def header(self) -> Dict[str, Any]:
        cfg = {k: v for k, v in asdict(self.config).items() if k not in ("roster_path", "log_file", "verbosity")}
        return {"config_key": self.key, "config": cfg, "roster": self.roster_dict}

    def final(self) -> Dict[str, Any]:
        eng = self.engine
        H = self.config.horizon
        return {
            "B": {str(x): eng.B.entry(x) for x in sorted(eng.B.members())},
            "pairs": {
                str(p.index): {
                    "X": {str(x): p.x_side.entry(x) for x in sorted(p.x_side.members(H + 1))},
                    "Y": {str(x): p.y_side.entry(x) for x in sorted(p.y_side.members(H + 1))},
                }
                for p in self.roster.pairs
            },
            "vsets": {v.name: {str(x): v.entry(x) for x in sorted(v.members())} for _, v in self.roster.vsets},
            "nodes": [self._node_summary(n) for n in sorted(eng.nodes.values(), key=lambda n: path_key(n.path))],
        }

    def _node_summary(self, node: NodeState) -> Dict[str, Any]:
        out = node.summary()
        out["G"] = render_G(node.info.G)
        return out

    def run(self) -> ConstructionTrace:
        start_all = time.time()
        for s in range(1, self.config.horizon + 1):
            wall = now_iso()
            t0 = time.time()
            try:
                self.run_stage(s)
            except ConstructionError as e:
                raise ConstructionError(f"stage {s}: {e}") from e
            self._log_stage(self.stages[-1], time.time() - t0, wall)
        trace = ConstructionTrace(self.header(), self.stages, self.final())
        tp = trace.true_path(self.config.true_path_threshold)
        self._say(f"[done] {self.config.regime} H={self.config.horizon} |B|={len(self.engine.B)} "
                  f"true path ~ {render_path(tp) or '<root>'} ({time.time() - start_all:.2f}s)")
        return trace


def run(config: ConstructionConfig, roster_dict: Optional[Dict[str, Any]] = None) -> ConstructionTrace:
    if roster_dict is None:
        return ConstructionRunner.from_config(config).run()
    return ConstructionRunner(config, roster_dict).run()
