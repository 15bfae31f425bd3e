# strategies.py
"""
Per-node automata for the Q, D and S requirements.

A `StrategyEngine` owns the shared state of one run: the constructed set B,
the used registry, the restraint registry and every `NodeState` keyed by
path. The scheduler drives it in two phases per node visit: an evaluation
that decides the node's outcome on delta_s, then an action at the node's
substage. Every state change is appended to `events` in a fixed field order.
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Set, Tuple

from adversary import EnumeratedSet, Roster, eval_partial
from tree import (A, BLANK, C, D, FINITE, H, INF, K, S, SPLIT, Path, PriorityTree,
                  TreeAssignment, is_prefix, left_of, path_key, render_path)


class ConstructionError(RuntimeError):
    pass


# ---------- state ----------
@dataclass
class NodeState:
    path: Path
    info: TreeAssignment
    created: int
    witness: Optional[int] = None
    witness_step: Optional[str] = None
    emitted: bool = False                  # D: witness sent on its upward climb
    donor: Optional[Path] = None           # S step (3)(a): reset together with this D node
    q_pick: Optional[int] = None           # Q: latest element picked into R
    r_epoch: int = 0
    R: Set[int] = field(default_factory=set)
    R_seen: Set[int] = field(default_factory=set)
    M: Dict[int, int] = field(default_factory=dict)
    forwarded: Set[int] = field(default_factory=set)
    P_inf: List[int] = field(default_factory=list)
    decided_upto: int = -1
    B_c: Dict[int, int] = field(default_factory=dict)
    restraints: Set[int] = field(default_factory=set)
    sharp: bool = False
    sharp_since: Optional[int] = None
    handled: Set[int] = field(default_factory=set)   # elements (sharp) already dealt with
    pending: Dict[int, int] = field(default_factory=dict)  # general (sharp): x -> release stage
    active: bool = False
    acted_at: Optional[int] = None
    reset_count: int = 0
    dirty: bool = False                    # visited since the last reset
    last_outcome: Optional[str] = None

    @property
    def kind(self) -> str:
        return self.info.requirement.kind

    def summary(self) -> Dict[str, Any]:
        return {
            "path": render_path(self.path),
            "req": self.info.requirement.label(),
            "witness": self.witness,
            "sharp": self.sharp,
            "active": self.active,
            "reset_count": self.reset_count,
            "r_epoch": self.r_epoch,
            "R": sorted(self.R),
            "M": {str(x): t for x, t in sorted(self.M.items())},
            "P_inf": list(self.P_inf),
            "B_c": {str(x): t for x, t in sorted(self.B_c.items())},
            "restraints": sorted(self.restraints),
            "last_outcome": self.last_outcome,
        }


# ---------- engine ----------
class StrategyEngine:
    def __init__(self, roster: Roster, tree: PriorityTree):
        self.roster = roster
        self.tree = tree
        self.regime = tree.regime
        self.B = EnumeratedSet("B")
        self.used: Dict[int, int] = {}
        self.restrainers: Dict[int, Set[Path]] = {}
        self.origin: Dict[int, Path] = {}      # element -> D node that first emitted it
        self.nodes: Dict[Path, NodeState] = {}
        self.stage = 0
        self.events: List[Dict[str, Any]] = []
        self.on_event: Optional[Callable[[Dict[str, Any]], None]] = None
        self.verbosity = 1

    # ---- bookkeeping
    def emit(self, type_: str, **payload: Any) -> None:
        ev = {"type": type_}
        ev.update(payload)
        self.events.append(ev)
        if self.on_event is not None:
            self.on_event(ev)

    def begin_stage(self, s: int) -> None:
        self.stage = s
        self.events = []

    def node_for(self, info: TreeAssignment) -> NodeState:
        node = self.nodes.get(info.path)
        if node is None:
            node = NodeState(info.path, info, created=len(self.nodes))
            self.nodes[info.path] = node
        return node

    def state(self, path: Path) -> NodeState:
        node = self.nodes.get(tuple(path))
        if node is None:
            raise ConstructionError(f"no node state at {render_path(path)!r}")
        return node

    def mark_used(self, x: int, s: int) -> None:
        if x not in self.used:
            self.used[x] = s
            self.emit("use", x=x)

    def is_used(self, x: int) -> bool:
        return x in self.used

    def restrain(self, node: NodeState, x: int, s: int) -> None:
        unused = not self.is_used(x)
        node.restraints.add(x)
        self.restrainers.setdefault(x, set()).add(node.path)
        self.emit("restrain", path=render_path(node.path), x=x, unused=unused)

    def restrained_against(self, x: int, actor: Optional[Path]) -> Optional[Path]:
        for p in sorted(self.restrainers.get(x, ()), key=path_key):
            if p != actor:
                return p
        return None

    # ---- sets and pools
    def input_set(self, path: Path) -> Optional[Path]:
        """B_beta of the node at path: global B (None) or the B^c of a Q ancestor taken at c."""
        for j in range(len(path) - 1, -1, -1):
            if path[j] == C and self.tree.assign(path[:j]).requirement.kind == "Q":
                return path[:j]
        return None

    def in_set(self, target: Optional[Path], x: int) -> bool:
        if target is None:
            return x in self.B
        return x in self.state(target).B_c

    def pool_owner(self, path: Path) -> Optional[Tuple[Path, str]]:
        for j in range(len(path) - 1, -1, -1):
            if path[j] in (INF, C, H):
                return path[:j], path[j]
        return None

    def pool_of(self, path: Path) -> Tuple[str, Optional[List[int]]]:
        """(descriptor, members) of P_beta for the node at path; members None means omega."""
        owner = self.pool_owner(path)
        if owner is None:
            return "omega", None
        q = self.state(owner[0])
        if owner[1] == INF:
            return f"Pinf:{render_path(q.path)}@{q.reset_count}", sorted(q.P_inf)
        return f"R:{render_path(q.path)}@{q.r_epoch}", sorted(q.R)

    def in_pool(self, path: Path, x: int) -> bool:
        _, members = self.pool_of(path)
        return members is None or x in members

    def least_unused(self, path: Path, exclude: Iterable[int] = (), above: int = -1
                     ) -> Tuple[str, Optional[int]]:
        desc, members = self.pool_of(path)
        skip = set(exclude)
        if members is None:
            z = above + 1
            while z in self.used or z in skip:
                z += 1
            return desc, z
        for z in members:
            if z > above and z not in self.used and z not in skip:
                return desc, z
        return desc, None

    def enter_set(self, target: Optional[Path], x: int, s: int, cause: str,
                  actor: Optional[Path]) -> bool:
        by = self.restrained_against(x, actor)
        if by is not None:
            self.emit("blocked", path=render_path(actor) if actor is not None else None,
                      x=x, by=render_path(by))
            return False
        if target is None:
            if not self.B.add(x, s):
                return False
            self.mark_used(x, s)
            self.emit("enumerate", set="B", x=x, cause=cause)
            return True
        q = self.state(target)
        if x in q.B_c:
            return False
        q.B_c[x] = s
        self.mark_used(x, s)
        self.emit("enumerate", set=f"Bc:{render_path(target)}", x=x, cause=cause)
        q.M[x] = s
        self.emit("enumerate", set=f"M:{render_path(target)}", x=x, cause="climb")
        for i, v in self.roster.tracking_vsets("M"):
            if v.add(x, s):
                self.emit("enumerate", set=f"V:{v.name}", x=x, cause="tracks-M")
                for node in self._committed_on(v):
                    self.sharp_sweep(node, s)
        return True

    # ---- reset
    def reset(self, node: NodeState, reason: str = "right-of-delta") -> bool:
        if node.acted_at is None and node.last_outcome is None:
            return False
        for x in sorted(node.restraints):
            holders = self.restrainers.get(x, set())
            holders.discard(node.path)
            if not holders:
                self.restrainers.pop(x, None)
            self.emit("unrestrain", path=render_path(node.path), x=x)
        node.restraints.clear()
        node.witness = None
        node.witness_step = None
        node.emitted = False
        node.donor = None
        node.q_pick = None
        node.r_epoch += 1
        node.R.clear()
        node.R_seen.clear()
        node.M.clear()
        node.forwarded.clear()
        node.P_inf.clear()
        node.decided_upto = -1
        node.B_c.clear()
        node.sharp = False
        node.sharp_since = None
        node.handled.clear()
        node.pending.clear()
        node.active = False
        node.reset_count += 1
        node.dirty = False
        self.emit("reset", path=render_path(node.path), reason=reason)
        for other in self.nodes.values():
            if other.donor == node.path:
                self.reset(other, "donor-reset")
        return True

    # ---- evaluation (outcome on delta_s)
    def evaluate(self, node: NodeState, s: int) -> str:
        kind = node.kind
        if kind == "Q":
            return self.q_outcome(node, s)
        if kind == "D":
            return self.d_outcome(node, s)
        if kind == "SC":
            return self.s_step(node, s)
        if self.regime == "two-split":
            return BLANK
        return SPLIT if self.looks_like_split(node.info.requirement.index, s) else FINITE

    def act(self, node: NodeState, outcome: str, s: int) -> None:
        node.last_outcome = outcome
        node.dirty = True
        kind = node.kind
        if kind == "Q":
            self.q_step(node, s)
        elif kind == "D":
            self.d_step(node, s)
        elif kind == "SC":
            self.sharp_sweep(node, s)
        if node.acted_at is None:
            node.acted_at = s

    def looks_like_split(self, i: int, s: int) -> bool:
        pair = self.roster.pair(i)
        xs, ys = pair.x_side.members(s), pair.y_side.members(s)
        union = xs | ys
        return not (xs & ys) and union <= self.B.members(s) and self.B.members(s - 1) <= union

    # ---- D
    def d_outcome(self, node: NodeState, s: int) -> str:
        if node.witness is None:
            return D
        delta = self.roster.descriptions[node.info.requirement.index]
        return A if eval_partial(delta, (node.witness,), s) == 0 else D

    def d_step(self, node: NodeState, s: int) -> str:
        outcome = self.d_outcome(node, s)
        if node.witness is None:
            desc, x = self.least_unused(node.path)
            if x is None:
                self.emit("halt", path=render_path(node.path), reason="pool exhausted")
                return outcome
            if self.is_used(x):
                raise ConstructionError(f"{render_path(node.path)!r} picked {x}, used since stage {self.used[x]}")
            node.witness, node.witness_step = x, "pick"
            self.emit("witness-pick", path=render_path(node.path), x=x, step="pick", pool=desc)
            self.mark_used(x, s)
            return outcome
        if outcome == A and not node.emitted:
            path = node.path
            target = self.input_set(path[:-1]) if path and path[-1] == H else self.input_set(path)
            node.emitted = True
            self.origin.setdefault(node.witness, path)
            self.emit("d-emit", path=render_path(path), x=node.witness)
            self.enter_set(target, node.witness, s, "d-emit", path)
        return outcome

    # ---- S
    def _vset(self, node: NodeState) -> EnumeratedSet:
        return self.roster.vsets[node.info.requirement.v][1]

    def _halves(self, node: NodeState) -> Tuple[EnumeratedSet, EnumeratedSet]:
        i = node.info.requirement.index
        pair = self.roster.pair(i)
        side = dict(node.info.G).get(i, "X")
        other = "Y" if side == "X" else "X"
        return pair.side(side), pair.side(other)

    def _higher(self, a: Path, b: Path) -> bool:
        """a has higher priority than b."""
        return (is_prefix(a, b) and a != b) or left_of(a, b)

    def _adopt(self, node: NodeState, x: int, step: str, s: int, restrain: bool) -> None:
        was_unused = not self.is_used(x)
        node.witness, node.witness_step = x, step
        node.sharp = False
        node.pending.clear()
        self.emit("witness-pick", path=render_path(node.path), x=x, step=step,
                  pool="adopt" if step != "4" else self.pool_of(node.path)[0])
        if restrain:
            self.restrain(node, x, s)
        if was_unused:
            self.mark_used(x, s)

    def s_step(self, node: NodeState, s: int) -> str:
        if node.witness is None:
            self._s_search(node, s)
        if node.witness is not None:
            node.sharp = False
        elif not node.sharp:
            node.sharp, node.sharp_since = True, s
            self.emit("commit", path=render_path(node.path))
        node.active = True
        if node.acted_at is None:
            node.acted_at = s
        return K if node.witness is not None else S

    def _s_search(self, node: NodeState, s: int) -> None:
        V = self._vset(node)
        _, other = self._halves(node)
        in_v = V.members(s)

        # (1) V meets the other half
        hits = sorted(x for x in in_v if other.member(x, s))
        if hits:
            self._adopt(node, hits[0], "1", s, restrain=False)
            return
        # (2) another S node's witness
        for g in sorted(self.nodes.values(), key=lambda n: n.created):
            if g is not node and g.kind == "SC" and g.witness is not None and g.witness in in_v:
                self._adopt(node, g.witness, "2", s, restrain=True)
                return
        ds = sorted((n for n in self.nodes.values() if n.kind == "D" and n.witness is not None),
                    key=lambda n: n.created)
        # (3)(a) a higher priority D node still keeping its witness out
        for g in ds:
            x = g.witness
            if self._higher(g.path, node.path) and not g.emitted and x in in_v and x not in self.B:
                self._adopt(node, x, "3a", s, restrain=False)
                node.donor = g.path
                return
        # (3)(b) a weaker D node's witness that has not climbed past us
        for g in ds:
            x = g.witness
            if not self._higher(node.path, g.path) or x not in in_v or x in self.B:
                continue
            if any(x in q.B_c for q in self.nodes.values()
                   if q.kind == "Q" and self._higher(q.path, node.path)):
                continue
            self._adopt(node, x, "3b", s, restrain=True)
            self.reset(g, "adopted")
            return
        # (4) fresh element of V from our pool
        for x in sorted(in_v):
            if not self.is_used(x) and self.in_pool(node.path, x):
                self._adopt(node, x, "4", s, restrain=True)
                return

    def _committed_on(self, v: EnumeratedSet) -> List[NodeState]:
        return [n for n in sorted(self.nodes.values(), key=lambda n: n.created)
                if n.kind == "SC" and n.sharp and n.active and self._vset(n) is v]

    def _waiting_on(self, x: int) -> Optional[NodeState]:
        for q in self.nodes.values():
            if q.kind == "Q" and x in q.M and x not in q.forwarded and x not in self.B \
                    and not self.in_set(self.input_set(q.path), x):
                return q
        return None

    def may_pull(self, eta: Path, q: Path) -> bool:
        return left_of(eta, q) or is_prefix(q + (INF,), eta)

    def sharp_sweep(self, node: NodeState, s: int) -> None:
        """(sharp): every element entering V after the commitment goes into B."""
        if not node.sharp:
            return
        for x, due in sorted(node.pending.items()):
            if due <= s:
                del node.pending[x]
                self._sharp_put(node, x, s)
        V = self._vset(node)
        for x in sorted(V.members(s)):
            if x in node.handled or x in node.pending or x in self.B:
                continue
            if V.entry(x) < node.sharp_since:
                continue
            q = self._waiting_on(x)
            if q is not None and not self.may_pull(node.path, q.path):
                continue
            if self.regime == "general":
                due = self.compute_f(node.info.requirement.index, x, s, node.path)
                if due > s:
                    node.pending[x] = due
                    node.handled.add(x)
                    self.emit("sharp-delay", path=render_path(node.path), x=x, due=due)
                    continue
            node.handled.add(x)
            self._sharp_put(node, x, s)

    def _sharp_put(self, node: NodeState, x: int, s: int) -> None:
        q = self._waiting_on(x)
        if q is not None:
            if not self.may_pull(node.path, q.path):
                node.handled.discard(x)     # retried on a later sweep
                return
            self.pull(node, q, x, s)
        elif self.enter_set(None, x, s, "sharp", node.path):
            self.emit("sharp", path=render_path(node.path), x=x)

    # ---- pulls
    def pull(self, s_node: NodeState, q_node: NodeState, x: int, s: int) -> Optional[str]:
        if x not in q_node.M or self.in_set(self.input_set(q_node.path), x):
            raise ConstructionError(f"pull of {x} from {render_path(q_node.path)!r}: not waiting there")
        if not s_node.active or not self.may_pull(s_node.path, q_node.path):
            raise ConstructionError(
                f"{render_path(s_node.path)!r} may not pull from {render_path(q_node.path)!r}")
        V = self._vset(s_node)
        if s_node.sharp and V.member(x, s):
            if self.enter_set(None, x, s, "pull", s_node.path):
                self.emit("pull", puller=render_path(s_node.path), pullee=render_path(q_node.path), x=x)
                if self.verbosity >= 1:
                    print(f"[pull] {render_path(s_node.path) or '<root>'} takes {x} from {render_path(q_node.path) or '<root>'}")
                return "pulled"
            return None
        if left_of(s_node.path, q_node.path) and s_node.witness is None and V.member(x, s) \
                and x not in self.B:
            self._adopt(s_node, x, "keep", s, restrain=True)
            return "kept"
        return None

    # ---- Q
    def _waiters(self, q: NodeState) -> List[int]:
        target = self.input_set(q.path)
        return [x for x in sorted(q.M)
                if x not in q.forwarded and x not in self.B and not self.in_set(target, x)
                and self.restrained_against(x, q.path) is None
                and not any(x in n.pending for n in self.nodes.values())]

    def _h_value(self, q: NodeState, x: int, s: int) -> Optional[int]:
        h = self.roster.delays[q.info.requirement.index]
        return eval_partial(h, (x, q.M[x]), s)

    def _ready(self, q: NodeState, x: int, s: int) -> bool:
        v = self._h_value(q, x, s)
        return v is not None and s > v + 1

    def q_outcome(self, q: NodeState, s: int) -> str:
        waiters = self._waiters(q)
        pulled = False
        if waiters:
            actors = [n for n in self.nodes.values()
                      if n.kind == "SC" and n.active and n.acted_at is not None and n.acted_at < s
                      and self.may_pull(n.path, q.path)]
            for eta in sorted(actors, key=lambda n: path_key(n.path)):
                for x in list(waiters):
                    if self.pull(eta, q, x, s):
                        pulled = True
                        waiters.remove(x)
        if not waiters:
            # a repeat whose switch left G unchanged does not take c again
            outcome = H if self.tree.switch_spent(q.path) else C
        elif any(self._ready(q, z, s) for z in waiters):
            outcome = INF
        elif pulled:
            outcome = C
        else:
            outcome = H
        if outcome not in q.info.successors:
            outcome = H
        return outcome

    def q_step(self, q: NodeState, s: int) -> None:
        target = self.input_set(q.path)
        path = render_path(q.path)
        # (3) survivors continue their climb; each one is a speed-up instance
        for x in self._waiters(q):
            if x in self.B or self.in_set(target, x) or not self._ready(q, x, s):
                continue
            q.forwarded.add(x)
            self.emit("survivor", path=path, x=x, m_stage=q.M[x], h=self._h_value(q, x, s))
            self.enter_set(target, x, s, "forward", q.path)
            desc, y = self.least_unused(q.path, exclude=q.R_seen | set(q.P_inf), above=q.decided_upto)
            if y is not None:
                q.P_inf.append(y)
                q.decided_upto = max(q.decided_upto, y)
                self.emit("witness-pick", path=path, x=y, step="q3b", pool=desc)
                self.emit("pinf-add", path=path, y=y, run=q.reset_count, decided_upto=q.decided_upto)
            q.r_epoch += 1
            q.R.clear()
            self.emit("r-reset", path=path, epoch=q.r_epoch)
            for m in sorted(q.M):
                if m not in q.forwarded and m not in self.B:
                    if self.enter_set(None, m, s, "flush", q.path):
                        self.emit("flush", path=path, x=m)
        # (1) keep one unused element in R for the nodes below
        if not any(z not in self.used for z in q.R):
            desc, z = self.least_unused(q.path, exclude=q.R_seen | set(q.P_inf))
            if z is None:
                self.emit("halt", path=path, reason="pool exhausted")
            else:
                q.R.add(z)
                q.R_seen.add(z)
                q.q_pick = z
                self.emit("witness-pick", path=path, x=z, step="q1", pool=desc)
                self.emit("r-add", path=path, x=z, epoch=q.r_epoch)
        # (4) everything unused below the witness and outside R, P_inf goes in
        if q.q_pick is not None:
            for y in range(q.q_pick):
                if y in self.used or y in q.R or y in q.P_inf or not self.in_pool(q.path, y):
                    continue
                if self.enter_set(None, y, s, "flood", q.path):
                    self.emit("flood", path=path, x=y)

    # ---- delay functions
    def compute_g(self, i: int, x: int, s: int, path: Path = (), _memo=None) -> int:
        pair = self.roster.pair(i)
        if self.regime != "general":
            if self.B.member(x, s):
                e = pair.union_entry(x)
                return e if e is not None else 0
            return 0
        memo = {} if _memo is None else _memo
        f = self.compute_f(i, x, s, path, memo)
        bound = f
        if self.B.member(x, f):
            e = pair.union_entry(x)
            if e is not None:
                bound = max(bound, e)
        return bound + 1

    def compute_f(self, i: int, x: int, s: int, path: Path = (), _memo=None) -> int:
        memo = {} if _memo is None else _memo
        key = (i, x, s)
        if key in memo:
            return memo[key]
        vals: List[int] = []
        for j in range(len(path)):
            req = self.tree.assign(path[:j]).requirement
            if req.kind == "Q" and path[j] != H:
                h = self.roster.delays[req.index]
                for t in range(s + 1):
                    v = eval_partial(h, (x, t), s)
                    if v is not None:
                        vals.append(v)
        for p in self.roster.pairs:
            if p.index < i:
                for t in range(s + 1):
                    vals.append(self.compute_g(p.index, x, t, path, memo))
        memo[key] = max(vals) + 1 if vals else 0
        return memo[key]
