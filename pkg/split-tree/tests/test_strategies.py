import pytest

from adversary import roster_from_dict
from scenarios import affine_delay, constant_description, divergent, tracking_pair, vset
from strategies import ConstructionError, StrategyEngine
from tree import A, C, D, FINITE, H, INF, K, S, SPLIT, PriorityTree, RequirementBook


def engine(items, regime="one-split"):
    roster = roster_from_dict({"adversaries": items})
    eng = StrategyEngine(roster, PriorityTree(RequirementBook.from_roster(roster, regime)))
    eng.verbosity = 0
    return eng


def grow(eng, path):
    """Node states for every prefix of path; returns the last one."""
    for j in range(len(path) + 1):
        node = eng.node_for(eng.tree.assign(path[:j]))
    return node


def base_items(description=None):
    return [affine_delay("h0", 0),
            description or constant_description("delta0", 0, 0),
            tracking_pair(0, "all-to-x")]


def scripted_pair(x_sched=None, y_sched=None):
    return {"kind": "split-pair", "index": 0,
            "x_side": {"name": "X0", "schedule": x_sched or {}},
            "y_side": {"name": "Y0", "schedule": y_sched or {}}}


def types(eng):
    return [ev["type"] for ev in eng.events]


class TestDescriptionNode:
    """D nodes pick, wait for their description, then climb."""

    def test_witness_climbs_into_bc_once_description_converges(self):
        eng = engine(base_items(constant_description("delta0", 0, 12)))
        root = grow(eng, ())
        eng.q_step(root, 1)
        eng.q_step(grow(eng, (C,)), 2)
        dn = grow(eng, (C, H))
        eng.d_step(dn, 3)
        assert dn.witness == 0 and eng.is_used(0)
        assert eng.d_outcome(dn, 11) == D
        assert eng.d_outcome(dn, 12) == A
        eng.d_step(dn, 12)
        assert root.B_c == {0: 12}
        assert root.M == {0: 12}
        assert 0 not in eng.B
        assert eng.origin[0] == (C, H)
        assert "d-emit" in types(eng)

    def test_divergent_description_never_emits(self):
        eng = engine(base_items(divergent("delta0", "description")))
        eng.q_step(grow(eng, ()), 1)
        dn = grow(eng, (H,))
        for s in range(2, 30):
            assert eng.d_step(dn, s) == D
        assert "d-emit" not in types(eng)
        assert len(eng.B) == 0

    def test_pick_comes_from_the_parent_r(self):
        eng = engine(base_items())
        root = grow(eng, ())
        eng.q_step(root, 1)
        dn = grow(eng, (H,))
        eng.d_step(dn, 2)
        pick = next(ev for ev in eng.events if ev["type"] == "witness-pick" and ev["step"] == "pick")
        assert pick["pool"] == "R:@0"
        assert dn.witness in root.R


class TestReset:
    def test_never_visited_node_is_untouched(self):
        eng = engine(base_items())
        node = grow(eng, (H,))
        assert not eng.reset(node)
        assert node.reset_count == 0
        assert "reset" not in types(eng)

    def test_reset_clears_the_witness_and_counts(self):
        eng = engine(base_items())
        eng.q_step(grow(eng, ()), 1)
        dn = grow(eng, (H,))
        eng.act(dn, D, 2)
        assert dn.witness is not None and dn.dirty
        assert eng.reset(dn)
        assert dn.witness is None and not dn.dirty
        assert eng.reset(dn)
        assert dn.reset_count == 2

    def test_donor_reset_cascades(self):
        eng = engine(base_items() + [vset("V0", 0)])
        eng.q_step(grow(eng, ()), 1)
        dn = grow(eng, (H,))
        eng.act(dn, D, 2)
        sc = grow(eng, (H, D))
        sc.donor, sc.last_outcome = dn.path, K
        eng.reset(dn)
        assert sc.reset_count == 1
        assert {"type": "reset", "path": "h.d", "reason": "donor-reset"} in eng.events


class TestQNode:
    """Outcomes and actions of the Q strategy."""

    def test_waiting_element_goes_h_then_inf(self):
        eng = engine(base_items())
        root = grow(eng, ())
        root.M[3] = 4
        assert eng.q_outcome(root, 5) == H
        assert eng.q_outcome(root, 6) == INF

    def test_nothing_waiting_is_c(self):
        eng = engine(base_items())
        assert eng.q_outcome(grow(eng, ()), 1) == C

    def test_c_collapses_where_c_is_not_a_successor(self):
        eng = engine(base_items())
        assert eng.q_outcome(grow(eng, (C,)), 2) == H

    def test_survivor_is_forwarded_and_r_restarts(self):
        eng = engine(base_items())
        root = grow(eng, ())
        root.M[3] = 4
        eng.q_step(root, 6)
        assert eng.B.entry(3) == 6
        assert root.forwarded == {3}
        assert root.P_inf == [0]
        assert root.R == {1}
        assert root.r_epoch == 1
        survivor = next(ev for ev in eng.events if ev["type"] == "survivor")
        assert survivor == {"type": "survivor", "path": "", "x": 3, "m_stage": 4, "h": 4}
        assert types(eng).index("pinf-add") < types(eng).index("r-reset")

    def test_q_pick_does_not_mark_used(self):
        eng = engine(base_items())
        root = grow(eng, ())
        eng.q_step(root, 1)
        assert root.R == {0}
        assert not eng.is_used(0)


class TestSNode:
    """S child strategies: witness search, commitment and pulls."""

    def test_empty_v_commits(self):
        eng = engine(base_items() + [vset("V0", 0)])
        sc = grow(eng, (H, D))
        assert eng.s_step(sc, 5) == S
        assert sc.sharp and sc.sharp_since == 5 and sc.active
        assert "commit" in types(eng)

    def test_committed_node_sends_new_v_elements_to_b(self):
        eng = engine(base_items() + [vset("V0", 0, schedule={9: [100]})])
        sc = grow(eng, (H, D))
        eng.s_step(sc, 5)
        eng.sharp_sweep(sc, 8)
        assert 100 not in eng.B
        eng.sharp_sweep(sc, 9)
        assert eng.B.entry(100) == 9
        assert eng.is_used(100)
        assert "sharp" in types(eng)

    def test_v_meeting_the_other_half_is_adopted(self):
        items = [affine_delay("h0", 0), constant_description("delta0", 0, 0),
                 scripted_pair(y_sched={"1": [7]}), vset("V0", 0, schedule={2: [7]})]
        eng = engine(items)
        sc = grow(eng, (H, D))
        assert eng.s_step(sc, 3) == K
        assert sc.witness == 7 and sc.witness_step == "1"
        assert not sc.restraints

    def test_pull_needs_a_waiting_element(self):
        eng = engine(base_items() + [vset("V0", 0)])
        root = grow(eng, ())
        sc = grow(eng, (H, D))
        eng.s_step(sc, 2)
        with pytest.raises(ConstructionError, match="not waiting"):
            eng.pull(sc, root, 7, 3)

    def test_pull_needs_a_node_left_or_below_inf(self):
        eng = engine(base_items() + [vset("V0", 0)])
        root = grow(eng, ())
        root.M[7] = 2
        sc = grow(eng, (H, D))
        eng.s_step(sc, 2)
        with pytest.raises(ConstructionError, match="may not pull"):
            eng.pull(sc, root, 7, 3)

    def test_may_pull(self):
        eng = engine(base_items())
        assert eng.may_pull((INF, D), ())
        assert eng.may_pull((INF,), (C,))
        assert not eng.may_pull((H, D), ())
        assert not eng.may_pull((C, H), (C,))


class TestDelayFunctions:
    def test_g_outside_b_is_zero(self):
        eng = engine([affine_delay("h0", 0), scripted_pair(x_sched={"7": [5]})])
        assert eng.compute_g(0, 5, 10) == 0

    def test_g_is_the_split_entry_stage(self):
        eng = engine([affine_delay("h0", 0), scripted_pair(x_sched={"7": [5]})])
        eng.B.add(5, 3)
        assert eng.compute_g(0, 5, 10) == 7
        assert eng.compute_g(0, 5, 2) == 0

    def test_general_regime_base_case(self):
        eng = engine([affine_delay("h0", 0), tracking_pair(0, "round-robin")], regime="general")
        assert eng.compute_f(0, 4, 5) == 0
        assert eng.compute_g(0, 4, 5) == 1

    def test_f_covers_q_delays_above(self):
        eng = engine([affine_delay("h0", 2), tracking_pair(0, "round-robin")], regime="general")
        # h(x, t) = t + 2 converges at t, so at s=5 the largest value is 7
        assert eng.compute_f(0, 4, 5, path=(INF,)) == 8
        assert eng.compute_f(0, 4, 5, path=(H,)) == 0


class TestRepeatedQ:
    def items(self):
        return [affine_delay("h0", 0), constant_description("delta0", 0, 0),
                tracking_pair(0, "round-robin"), tracking_pair(1, "round-robin")]

    @pytest.mark.parametrize("regime", ["two-split", "general"])
    def test_repeat_takes_c_while_the_switch_moves_g(self, regime):
        eng = engine(self.items(), regime)
        for k in range(4):
            assert eng.q_outcome(grow(eng, (C,) * k), k + 1) == C

    @pytest.mark.parametrize("regime", ["two-split", "general"])
    def test_spent_switch_takes_h(self, regime):
        eng = engine(self.items(), regime)
        node = grow(eng, (C,) * 4)
        assert eng.tree.switch_spent(node.path)
        assert eng.q_outcome(node, 5) == H

    def test_spent_repeat_still_goes_inf_for_a_ready_element(self):
        eng = engine(self.items(), "two-split")
        node = grow(eng, (C,) * 4)
        node.M[9] = 2
        assert eng.q_outcome(node, 4) == INF


class TestSSearch:
    """The witness search of an S child, one step at a time."""

    def test_step_2_restrains_a_d_witness_out_of_b(self):
        eng = engine(base_items() + [vset("V0", 0, schedule={1: [0]})])
        eng.q_step(grow(eng, ()), 1)
        dn = grow(eng, (H,))
        eng.act(dn, D, 2)
        assert dn.witness == 0
        other = grow(eng, (INF, D))
        other.witness = 0
        sc = grow(eng, (H, D))
        assert eng.s_step(sc, 3) == K
        assert sc.witness_step == "2"
        assert 0 in sc.restraints
        eng.act(dn, A, 3)
        assert "blocked" in types(eng)
        assert 0 not in eng.B
        restrain = next(ev for ev in eng.events if ev["type"] == "restrain")
        assert restrain == {"type": "restrain", "path": "h.d", "x": 0, "unused": False}

    def test_step_3a_borrows_from_a_higher_d_node(self):
        eng = engine(base_items() + [vset("V0", 0, schedule={1: [0]})])
        eng.q_step(grow(eng, ()), 1)
        eng.q_step(grow(eng, (C,)), 2)
        dn = grow(eng, (C, H))
        eng.act(dn, D, 3)
        sc = grow(eng, (H, D))
        eng.s_step(sc, 4)
        assert (sc.witness, sc.witness_step, sc.donor) == (0, "3a", (C, H))
        assert not sc.restraints
        eng.reset(dn)
        assert sc.witness is None
        assert {"type": "reset", "path": "h.d", "reason": "donor-reset"} in eng.events

    def test_step_3b_takes_a_weaker_witness_and_resets_its_owner(self):
        eng = engine(base_items() + [vset("V0", 0, schedule={1: [0]})])
        eng.q_step(grow(eng, ()), 1)
        dn = grow(eng, (H,))
        eng.act(dn, D, 2)
        sc = grow(eng, (INF, D))
        eng.s_step(sc, 3)
        assert (sc.witness, sc.witness_step) == (0, "3b")
        assert 0 in sc.restraints
        assert dn.witness is None
        assert {"type": "reset", "path": "h", "reason": "adopted"} in eng.events

    def test_step_3b_skips_a_witness_that_already_climbed(self):
        eng = engine(base_items() + [vset("V0", 0, schedule={1: [0]})])
        root = grow(eng, ())
        eng.q_step(root, 1)
        dn = grow(eng, (H,))
        eng.act(dn, D, 2)
        root.B_c[0] = 2
        sc = grow(eng, (INF, D))
        assert eng.s_step(sc, 3) == S
        assert sc.witness is None and sc.sharp
        assert dn.witness == 0

    def test_step_4_takes_a_fresh_element_of_the_pool(self):
        eng = engine(base_items() + [vset("V0", 0, schedule={1: [5]})])
        root = grow(eng, ())
        root.R.add(5)
        sc = grow(eng, (H, D))
        assert eng.s_step(sc, 2) == K
        assert (sc.witness, sc.witness_step) == (5, "4")
        assert eng.is_used(5) and 5 in sc.restraints
        pick = next(ev for ev in eng.events if ev["type"] == "witness-pick")
        assert pick["pool"] == "R:@0"

    def test_step_4_ignores_elements_outside_the_pool(self):
        eng = engine(base_items() + [vset("V0", 0, schedule={1: [5]})])
        sc = grow(eng, (H, D))
        assert eng.s_step(sc, 2) == S
        assert not eng.is_used(5)

    def test_left_node_keeps_a_waiting_element_out_of_b(self):
        eng = engine(base_items() + [vset("V0", 0, schedule={1: [7]})])
        q = grow(eng, (C,))
        q.M[7] = 3
        sc = grow(eng, (INF, D))
        sc.active = True
        assert eng.pull(sc, q, 7, 4) == "kept"
        assert (sc.witness, sc.witness_step) == (7, "keep")
        assert 7 in sc.restraints
        assert not eng.enter_set(eng.input_set(q.path), 7, 5, "forward", q.path)
        eng.q_step(q, 10)
        assert 7 not in eng.B and 7 not in q.forwarded


class TestGeneralSharp:
    def test_delay_released_at_f(self):
        items = [affine_delay("h0", 2), constant_description("delta0", 0, 0),
                 tracking_pair(0, "round-robin"), vset("V0", 0, schedule={6: [4]})]
        eng = engine(items, regime="general")
        sc = grow(eng, (INF, D, SPLIT))
        assert sc.kind == "SC"
        assert eng.s_step(sc, 5) == S
        eng.sharp_sweep(sc, 6)
        # f = max over the root's delay up to s=6, plus one
        assert sc.pending == {4: 9}
        assert {"type": "sharp-delay", "path": "inf.d.split", "x": 4, "due": 9} in eng.events
        eng.sharp_sweep(sc, 8)
        assert 4 not in eng.B
        eng.sharp_sweep(sc, 9)
        assert eng.B.entry(4) == 9
        assert not sc.pending

    def test_reset_drops_pending_releases(self):
        items = [affine_delay("h0", 2), constant_description("delta0", 0, 0),
                 tracking_pair(0, "round-robin"), vset("V0", 0, schedule={6: [4]})]
        eng = engine(items, regime="general")
        sc = grow(eng, (INF, D, SPLIT))
        eng.s_step(sc, 5)
        eng.sharp_sweep(sc, 6)
        eng.reset(sc)
        assert not sc.pending and not sc.sharp


class TestSplitLook:
    def items(self, y_sched):
        return [affine_delay("h0", 0), constant_description("delta0", 0, 0),
                scripted_pair(x_sched={"2": [1]}, y_sched=y_sched)]

    def test_disjoint_halves_covering_b_look_like_a_split(self):
        eng = engine(self.items({"2": [3]}), regime="general")
        eng.B.add(1, 1)
        eng.B.add(3, 1)
        assert eng.looks_like_split(0, 2)
        assert eng.evaluate(grow(eng, (INF, D)), 2) == SPLIT

    def test_overlapping_halves_are_finite(self):
        eng = engine(self.items({"2": [1, 3]}), regime="general")
        eng.B.add(1, 1)
        eng.B.add(3, 1)
        assert not eng.looks_like_split(0, 2)
        assert eng.evaluate(grow(eng, (INF, D)), 2) == FINITE

    def test_b_outside_the_halves_is_finite(self):
        eng = engine(self.items({"2": [3]}), regime="general")
        for x in (1, 3, 8):
            eng.B.add(x, 1)
        assert not eng.looks_like_split(0, 2)
