import json

import pytest
from hypothesis import given, settings, strategies as st

from adversary import (EnumeratedSet, PartialFn, RosterError, SplitPair, entry_stage, eval_partial,
                       load_roster, make_affine_adversary, make_constant_description,
                       roster_from_dict, roster_to_dict, save_roster)
from scenarios import ROSTER_DIR, affine_delay, tracking_pair, vset

entry_maps = st.dictionaries(st.integers(0, 60), st.integers(0, 40), max_size=25)


def schedule_of(entries):
    sched = {}
    for x, s in entries.items():
        sched.setdefault(s, []).append(x)
    return sched


class TestEnumeratedSet:
    """Stage-indexed enumerations and their entry stages."""

    def test_entry_stage_of_scheduled_element(self):
        assert entry_stage(EnumeratedSet("W", {4: [7]}), 7) == 4

    def test_missing_element_has_no_entry(self):
        assert entry_stage(EnumeratedSet("W"), 0) is None

    def test_duplicate_schedule_is_malformed(self):
        with pytest.raises(RosterError, match="W"):
            EnumeratedSet("W", {1: [3], 5: [3]})

    def test_add_is_cumulative(self):
        es = EnumeratedSet("B")
        assert es.add(2, 5)
        assert not es.add(2, 9)
        assert es.entry(2) == 5
        assert es.members(4) == set()
        assert es.members(5) == {2}
        assert es.entering(5) == {2}

    @settings(max_examples=100, deadline=None)
    @given(entries=entry_maps, x=st.integers(0, 60), s=st.integers(0, 45))
    def test_entry_matches_membership(self, entries, x, s):
        es = EnumeratedSet("W", schedule_of(entries))
        t = entry_stage(es, x)
        assert (t is not None and t <= s) == es.member(x, s)

    @settings(max_examples=60, deadline=None)
    @given(entries=entry_maps, x=st.integers(0, 60), s=st.integers(0, 40), k=st.integers(0, 10))
    def test_membership_is_monotone(self, entries, x, s, k):
        es = EnumeratedSet("W", schedule_of(entries))
        if es.member(x, s):
            assert es.member(x, s + k)


class TestPartialFn:
    """Step-bounded evaluation of scripted partial functions."""

    def test_not_converged_before_its_stage(self):
        pf = PartialFn("delta", {(3,): (0, 10)})
        assert eval_partial(pf, (3,), 9) is None
        assert eval_partial(pf, (3,), 10) == 0

    def test_affine_values(self):
        assert eval_partial(make_affine_adversary(0, 10, 10), (1, 4), 4) == 4
        assert eval_partial(make_affine_adversary(5, 10, 10), (2, 8), 8) == 13

    def test_affine_outside_bounds_diverges(self):
        h = make_affine_adversary(5, 3, 3)
        assert all(eval_partial(h, (9, 2), s) is None for s in range(50))

    def test_constant_description(self):
        d = make_constant_description(0, 12, 100)
        assert eval_partial(d, (7,), 11) is None
        assert eval_partial(d, (7,), 12) == 0

    @settings(max_examples=60, deadline=None)
    @given(value=st.integers(0, 5), conv=st.integers(0, 30), s=st.integers(0, 40), k=st.integers(0, 20))
    def test_evaluation_is_monotone(self, value, conv, s, k):
        pf = PartialFn("f", {(1,): (value, conv)})
        now = eval_partial(pf, (1,), s)
        if now is not None:
            assert eval_partial(pf, (1,), s + k) == now

    def test_two_entries_for_one_argument(self):
        with pytest.raises(RosterError):
            PartialFn.from_dict({"name": "f", "entries": [[[1], 0, 0], [[1], 1, 2]]})


class TestSplitPair:
    """Disjoint halves, scripted or following B."""

    def test_overlapping_sides_rejected(self):
        with pytest.raises(RosterError, match="overlap"):
            SplitPair(0, EnumeratedSet("X0", {1: [3]}), EnumeratedSet("Y0", {2: [3]}))

    def test_round_robin(self):
        p = SplitPair(0, EnumeratedSet("X0"), EnumeratedSet("Y0"), rule="round-robin")
        assert [p.assign(x, 2) for x in (5, 6, 7)] == ["X", "Y", "X"]
        assert p.union_entry(6) == 2

    def test_threshold(self):
        p = SplitPair(1, EnumeratedSet("X1"), EnumeratedSet("Y1"), rule="threshold", threshold=10)
        assert p.assign(3, 1) == "X"
        assert p.assign(12, 1) == "Y"

    def test_unknown_rule(self):
        with pytest.raises(RosterError):
            SplitPair(0, EnumeratedSet("X0"), EnumeratedSet("Y0"), rule="coin-flip")


class TestRosterFile:
    """Loading and validating roster documents."""

    def test_shipped_rosters_load(self):
        for name, pairs in (("a1.json", 1), ("a2.json", 2)):
            roster = roster_from_dict(load_roster(f"{ROSTER_DIR}/{name}"))
            assert len(roster.delays) == 1 and len(roster.pairs) == pairs

    def test_round_trip(self):
        d = load_roster(f"{ROSTER_DIR}/a2.json")
        once = roster_to_dict(roster_from_dict(d))
        assert roster_to_dict(roster_from_dict(once)) == once
        assert [v.tracks for _, v in roster_from_dict(once).vsets] == ["M"]

    def test_save_then_load(self, tmp_path):
        d = load_roster(f"{ROSTER_DIR}/a2.json")
        p = tmp_path / "copy.json"
        save_roster(str(p), d)
        assert load_roster(str(p)) == d
        assert p.read_text().endswith("}\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(RosterError, match="not found"):
            load_roster(str(tmp_path / "nope.json"))

    def test_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(RosterError, match="not valid JSON"):
            load_roster(str(p))

    @pytest.mark.parametrize("item, match", [
        ({"kind": "turing-machine", "name": "u"}, "unknown kind"),
        ({"kind": "partial-fn", "name": "h", "entries": []}, "role"),
        ({"kind": "enumerated-set", "name": "V", "schedule": {}}, "pair"),
        ({"kind": "tracking-split-pair", "index": 0, "x_side": {"name": "X"}, "y_side": {"name": "Y"}}, "rule"),
        ({"kind": "split-pair", "index": 0, "x_side": {"name": "X"}}, "missing field"),
    ])
    def test_malformed_items(self, item, match):
        with pytest.raises(RosterError, match=match):
            roster_from_dict({"adversaries": [item]})

    def test_vset_must_attack_a_known_pair(self):
        d = {"adversaries": [affine_delay("h", 0), tracking_pair(0, "all-to-x"), vset("V", 3)]}
        with pytest.raises(RosterError, match="missing pair 3"):
            roster_from_dict(d)

    def test_duplicate_pair_index(self):
        d = {"adversaries": [tracking_pair(0, "all-to-x"), tracking_pair(0, "all-to-y")]}
        with pytest.raises(RosterError, match="duplicate"):
            roster_from_dict(d)

    def test_roster_json_is_plain(self, tmp_path):
        d = load_roster(f"{ROSTER_DIR}/a1.json")
        assert json.loads(json.dumps(d)) == d
