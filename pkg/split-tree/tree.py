# tree.py
"""
Priority tree over outcome strings.

Nodes are tuples of outcome tokens. `PriorityTree.assign` decides, lazily and
memoized by path, which requirement a node works on, its successor outcomes,
its list G of tracked split halves and the bookkeeping lists L1/L2. The three
regimes build different trees and are kept apart.
"""
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

# ---------- outcomes ----------
INF, C, H, SPLIT, FINITE, K, S, A, D, BLANK = "inf", "c", "h", "split", "fin", "k", "s", "a", "d", "blank"
ORDER = {INF: 0, C: 1, H: 2, SPLIT: 3, FINITE: 4, K: 5, S: 6, A: 7, D: 8}
OUTCOMES = tuple(ORDER) + (BLANK,)
REGIMES = ("one-split", "two-split", "general")

Path = Tuple[str, ...]
Side = Tuple[int, str]  # (split index, "X" | "Y")


def render_path(path: Sequence[str]) -> str:
    return ".".join(path)


def parse_path(text: str) -> Path:
    if text == "":
        return ()
    path = tuple(text.split("."))
    for o in path:
        if o not in OUTCOMES:
            raise ValueError(f"unknown outcome token {o!r} in path {text!r}")
    return path


def is_prefix(a: Sequence[str], b: Sequence[str]) -> bool:
    return len(a) <= len(b) and tuple(b[: len(a)]) == tuple(a)


def left_of(a: Sequence[str], b: Sequence[str]) -> bool:
    """a <_L b: they split at a common node and a takes the smaller outcome."""
    for x, y in zip(a, b):
        if x != y:
            if x not in ORDER or y not in ORDER:
                raise ValueError(f"outcomes {x!r} and {y!r} are not comparable")
            return ORDER[x] < ORDER[y]
    return False


def path_key(path: Sequence[str]) -> Tuple[int, ...]:
    """Sort key that lists left-of before right-of (prefixes first)."""
    return tuple(ORDER.get(o, len(ORDER)) for o in path)


# ---------- requirements ----------
@dataclass(frozen=True)
class Requirement:
    kind: str      # "Q" | "D" | "SP" (S_parent) | "SC" (S_child)
    index: int     # delay index for Q, description index for D, split index for S
    v: int = -1    # roster V position for S_child
    priority: int = 0

    @property
    def is_s(self) -> bool:
        return self.kind in ("SP", "SC")

    def label(self) -> str:
        if self.kind == "SC":
            return f"S{self.index}.V{self.v}"
        if self.kind == "SP":
            return f"S{self.index}"
        return f"{self.kind}{self.index}"


class RequirementBook:
    """The fixed recursive ordering of requirements, per family."""

    def __init__(self, n_q: int, n_d: int, pair_indices: Sequence[int],
                 v_pairs: Sequence[int], regime: str):
        if regime not in REGIMES:
            raise ValueError(f"unknown regime {regime!r}")
        self.regime = regime
        self.qs = [Requirement("Q", i, priority=i) for i in range(n_q)]
        self.ds = [Requirement("D", i, priority=i) for i in range(n_d)]
        s_list: List[Requirement] = []
        for i in sorted(pair_indices):
            if regime != "one-split":
                s_list.append(Requirement("SP", i))
            for pos, pi in enumerate(v_pairs):
                if pi == i:
                    s_list.append(Requirement("SC", i, v=pos))
        self.ss = [Requirement(r.kind, r.index, r.v, priority=p) for p, r in enumerate(s_list)]

    @classmethod
    def from_roster(cls, roster, regime: str) -> "RequirementBook":
        return cls(len(roster.delays), len(roster.descriptions),
                   [p.index for p in roster.pairs], [i for i, _ in roster.vsets], regime)

    def family(self, kind: str) -> List[Requirement]:
        return {"Q": self.qs, "D": self.ds, "S": self.ss}[kind]


# ---------- G and lists ----------
def initial_G() -> Tuple[Side, ...]:
    return ((0, "X"), (1, "X"))


def switch_G(G_prev: Sequence[Side]) -> Tuple[Side, ...]:
    xs = [i for i, side in G_prev if side == "X"]
    if not xs:
        return tuple(G_prev)
    k = max(xs)
    out = []
    for i, side in G_prev:
        if i == k:
            out.append((i, "Y"))
        elif i > k:
            out.append((i, "X"))
        else:
            out.append((i, side))
    return tuple(out)


def render_G(G: Sequence[Side]) -> str:
    return ",".join(f"{side}{i}" for i, side in G)


def update_lists(L1_prev: Sequence[Requirement], L2_prev: Sequence[Requirement],
                 pred_req: Optional[Requirement], pred_outcome: str
                 ) -> Tuple[Tuple[Requirement, ...], Tuple[Requirement, ...]]:
    if pred_req is not None and pred_req.kind == "Q" and pred_outcome == C:
        return (), tuple(L1_prev)
    if pred_req is not None and pred_req.is_s:
        L2 = list(L2_prev)
        if pred_req in L2:
            L2.remove(pred_req)
        return tuple(L1_prev) + (pred_req,), tuple(L2)
    return tuple(L1_prev), tuple(L2_prev)


# ---------- tree ----------
@dataclass(frozen=True)
class TreeAssignment:
    path: Path
    requirement: Optional[Requirement]  # None: leaf, the roster has nothing left here
    successors: Tuple[str, ...]
    G: Tuple[Side, ...]
    L1: Tuple[Requirement, ...]
    L2: Tuple[Requirement, ...]


ROTATION = {"Q": ("D", "S", "Q"), "D": ("S", "Q", "D"), "SP": ("Q", "D", "S"), "SC": ("Q", "D", "S")}


class PriorityTree:
    def __init__(self, book: RequirementBook):
        self.book = book
        self.regime = book.regime
        self._memo: Dict[Path, TreeAssignment] = {}

    def successors_of(self, req: Requirement, repeat_after_c: bool = False,
                      below_c: bool = False) -> Tuple[str, ...]:
        if req.kind == "Q":
            if self.regime == "one-split" and (repeat_after_c or below_c):
                return (INF, H)
            return (INF, C, H)
        if req.kind == "D":
            return (A, D)
        if req.kind == "SC":
            return (K, S)
        return (BLANK,) if self.regime == "two-split" else (SPLIT, FINITE)

    def assign(self, path: Sequence[str]) -> TreeAssignment:
        path = tuple(path)
        hit = self._memo.get(path)
        if hit is None:
            hit = self._assign(path)
            self._memo[path] = hit
        return hit

    def _assign(self, path: Path) -> TreeAssignment:
        if not path:
            req = self.book.qs[0] if self.book.qs else None
            succ = self.successors_of(req) if req else ()
            return TreeAssignment((), req, succ, initial_G(), (), ())

        beta_path, o = path[:-1], path[-1]
        beta = self.assign(beta_path)
        if beta.requirement is None or o not in beta.successors:
            raise ValueError(f"path {render_path(path)!r} is not a node of the {self.regime} tree")
        breq = beta.requirement

        # G
        if breq.kind == "Q" and o == C and self.regime != "one-split":
            G = switch_G(beta.G)
        elif breq.kind == "SP" and self.regime == "general" and breq.index not in [i for i, _ in beta.G]:
            G = beta.G + ((breq.index, "X"),)
        else:
            G = beta.G

        # L1 / L2
        if self.regime == "one-split":
            L1, L2 = (), ()
        else:
            L1, L2 = update_lists(beta.L1, beta.L2, breq, o)

        on_path = self._requirements_on(path)
        if self.regime == "one-split":
            req, succ = self._assign_one_split(path, breq, o, on_path)
        else:
            req, succ = self._assign_multi(path, breq, o, on_path, G, L2)
        return TreeAssignment(path, req, succ, G, L1, L2)

    def _requirements_on(self, path: Path) -> List[Requirement]:
        return [self.assign(path[:j]).requirement for j in range(len(path))]

    def _first_free(self, kind: str, on_path: List[Requirement], path: Path,
                    G: Sequence[Side]) -> Optional[Requirement]:
        for r in self.book.family(kind):
            if r in on_path:
                continue
            if kind == "S" and not self._s_eligible(r, path, G):
                continue
            return r
        return None

    def _s_eligible(self, r: Requirement, path: Path, G: Sequence[Side]) -> bool:
        if self.regime == "one-split":
            return C not in path
        parent_outcomes = [path[j] for j in range(len(path))
                           if self._is_parent_of(self.assign(path[:j]).requirement, r)]
        if r.kind == "SC":
            if not parent_outcomes:
                return False
            if self.regime == "general" and parent_outcomes[-1] == FINITE:
                return False
            return True
        if self.regime == "general" and r.index not in [i for i, _ in G]:
            return self._pending_q_met(path)
        return True

    @staticmethod
    def _is_parent_of(q: Optional[Requirement], r: Requirement) -> bool:
        return q is not None and q.kind == "SP" and q.index == r.index

    def _pending_q_met(self, path: Path) -> bool:
        """New splits wait until the latest Q requirement on the path has had an inf outcome."""
        qs = [(j, self.assign(path[:j]).requirement) for j in range(len(path))]
        qs = [(j, r) for j, r in qs if r is not None and r.kind == "Q"]
        if not qs:
            return True
        pending = qs[-1][1]
        return any(r == pending and path[j] == INF for j, r in qs)

    def _rotate(self, start_kind: str, on_path, path, G, allow_s: bool = True):
        for kind in ROTATION[start_kind]:
            if kind == "S" and not allow_s:
                continue
            r = self._first_free(kind, on_path, path, G)
            if r is not None:
                return r
        return None

    def _assign_one_split(self, path: Path, breq: Requirement, o: str, on_path):
        if o == C:
            return breq, (INF, H)
        if C in path:
            kinds = ("D", "Q") if breq.kind == "Q" else ("Q", "D")
            for kind in kinds:
                r = self._first_free(kind, on_path, path, ())
                if r is not None:
                    return r, self.successors_of(r, below_c=True)
            return None, ()
        r = self._rotate(breq.kind, on_path, path, ())
        return (r, self.successors_of(r)) if r else (None, ())

    def _assign_multi(self, path: Path, breq: Requirement, o: str, on_path, G, L2):
        if breq.kind == "Q" and o == C:
            return breq, (INF, C, H)
        for r in sorted(L2, key=lambda q: q.priority):
            if self._s_eligible(r, path, G):
                return r, self.successors_of(r)
        r = self._rotate(breq.kind, on_path, path, G)
        return (r, self.successors_of(r)) if r else (None, ())

    def switch_spent(self, path: Sequence[str]) -> bool:
        """True at a repeated Q node (predecessor is the same Q at c) whose G did not change."""
        path = tuple(path)
        if not path or path[-1] != C:
            return False
        node, pred = self.assign(path), self.assign(path[:-1])
        return node.requirement == pred.requirement and node.G == pred.G

    def iter_nodes(self, max_depth: int) -> Iterator[TreeAssignment]:
        """Breadth-first walk of the tree down to max_depth."""
        frontier: List[Path] = [()]
        while frontier:
            nxt: List[Path] = []
            for p in frontier:
                node = self.assign(p)
                yield node
                if len(p) < max_depth and node.requirement is not None:
                    nxt.extend(p + (o,) for o in node.successors)
            frontier = nxt


def assign(path: Sequence[str], regime: str, book: RequirementBook) -> TreeAssignment:
    if book.regime != regime:
        raise ValueError(f"book built for {book.regime}, asked for {regime}")
    return PriorityTree(book).assign(path)
