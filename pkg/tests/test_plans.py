from itertools import combinations_with_replacement
from math import comb

import pytest

from pirasym.plans import (Query, concatenate, decode_from_json_dict,
                           decode_to_json_dict, plan_from_json_dict,
                           plan_to_json_dict, render_query, render_table,
                           required_length, required_length_mixture,
                           stage_histogram, synthesize)
from pirasym.stages import SchemeSpec, solve_stages


def q(text):
    """Parse a query like "a4+b2+c2" into sorted (message, symbol) terms."""
    terms = []
    for part in text.split("+"):
        terms.append((ord(part[0]) - ord("a") + 1, int(part[1:])))
    return tuple(sorted(terms))


def db_queries(plan, db):
    return [query.terms for query in plan.database_queries(db)]


def expect(plan, db, texts):
    assert db_queries(plan, db) == [q(t) for t in texts]


def all_specs(max_m, max_n):
    for m in range(1, max_m + 1):
        for n in range(1, max_n + 1):
            for profile in combinations_with_replacement(range(1, n + 1), m):
                yield SchemeSpec(m, n, profile)


# ---------------------------------------------------------------------------
# golden query tables


def test_table_trivial_scheme():
    plan, dmap = synthesize(SchemeSpec(3, 2, (1, 1, 1)), desired=1)
    expect(plan, 1, ["a1", "b1", "c1"])
    expect(plan, 2, [])
    assert plan.message_length == 1
    assert dmap.entries[0].side_info == ()


def test_table_symmetric_two_databases():
    plan, _ = synthesize(SchemeSpec(3, 2, (2, 2, 2)), desired=1)
    expect(plan, 1, ["a1", "b1", "c1", "a3+b2", "a4+c2", "b3+c3",
                     "a7+b4+c4"])
    expect(plan, 2, ["a2", "b2", "c2", "a5+b1", "a6+c1", "b4+c4",
                     "a8+b3+c3"])
    assert plan.downloads == (7, 7)
    assert plan.message_length == 8


def test_table_one_sided_side_information():
    plan, dmap = synthesize(SchemeSpec(3, 2, (1, 2, 2)), desired=1)
    expect(plan, 1, ["a1", "b1", "c1", "a4+b2+c2"])
    expect(plan, 2, ["a2+b1", "a3+c1", "b2+c2"])
    # Decoding: a2 and a3 cancel one singleton each; a4 cancels the pair sum.
    by_symbol = {e.symbol: e for e in dmap.entries}
    assert [r.position for r in by_symbol[4].side_info] == [2]
    assert by_symbol[4].side_info[0].database == 2
    assert by_symbol[2].side_info[0].database == 1


def test_table_two_packed_side_information():
    plan, _ = synthesize(SchemeSpec(3, 2, (1, 1, 2)), desired=1)
    expect(plan, 1, ["a1", "b1", "c1"])
    expect(plan, 2, ["a2+b1+c1"])
    assert plan.downloads == (3, 1)


def test_table_mixture_concatenation():
    part_a = synthesize(SchemeSpec(3, 2, (1, 2, 2)), desired=1)
    part_b = synthesize(SchemeSpec(3, 2, (1, 1, 2)), desired=1)
    plan, dmap = concatenate([(part_a[0], part_a[1], 1),
                              (part_b[0], part_b[1], 2)])
    expect(plan, 1, ["a1", "b1", "c1", "a4+b2+c2",
                     "a5", "b3", "c3", "a7", "b4", "c4"])
    expect(plan, 2, ["a2+b1", "a3+c1", "b2+c2", "a6+b3+c3", "a8+b4+c4"])
    assert plan.downloads == (10, 5)
    assert plan.message_length == 8
    assert [e.symbol for e in dmap.entries] == [1, 2, 3, 4, 5, 6, 7, 8]


def test_table_four_messages_one_sided():
    plan, _ = synthesize(SchemeSpec(4, 2, (1, 2, 2, 2)), desired=1)
    expect(plan, 1, ["a1", "b1", "c1", "d1",
                     "a5+b2+c2", "a6+b3+d2", "a7+c3+d3", "b4+c4+d4"])
    expect(plan, 2, ["a2+b1", "a3+c1", "a4+d1", "b2+c2", "b3+d2", "c3+d3",
                     "a8+b4+c4+d4"])
    assert plan.downloads == (8, 7)


def test_table_four_messages_two_packed():
    plan, _ = synthesize(SchemeSpec(4, 2, (1, 1, 2, 2)), desired=1)
    expect(plan, 1, ["a1", "b1", "c1", "d1", "a2", "b2", "c2", "d2",
                     "a6+b3+c3+d3"])
    expect(plan, 2, ["a3+b1+c1", "a4+b2+d1", "a5+c2+d2", "b3+c3+d3"])
    assert plan.downloads == (9, 4)
    assert plan.message_length == 6


def test_table_four_messages_three_packed():
    plan, _ = synthesize(SchemeSpec(4, 2, (1, 1, 1, 2)), desired=1)
    expect(plan, 1, ["a1", "b1", "c1", "d1"])
    expect(plan, 2, ["a2+b1+c1+d1"])


def test_table_three_databases_mixed_groups():
    plan, _ = synthesize(SchemeSpec(3, 3, (2, 3, 3)), desired=1)
    expect(plan, 1, ["a1", "b1", "c1", "a3+b2", "a4+c2", "b3+c3",
                     "a11+b4+c4", "a12+b5+c5", "a13+b6+c6"])
    expect(plan, 2, ["a2", "b2", "c2", "a5+b1", "a6+c1", "b4+c4",
                     "a14+b3+c3", "a15+b5+c5", "a16+b6+c6"])
    expect(plan, 3, ["a7+b1", "a8+c1", "b5+c5", "a9+b2", "a10+c2", "b6+c6",
                     "a17+b3+c3", "a18+b4+c4"])
    assert plan.downloads == (9, 9, 8)


def test_table_three_databases_entry_round():
    plan, _ = synthesize(SchemeSpec(3, 3, (2, 2, 3)), desired=1)
    expect(plan, 1, ["a1", "b1", "c1", "a3+b2", "a4+c2", "b3+c3",
                     "a7+b4+c4"])
    expect(plan, 2, ["a2", "b2", "c2", "a5+b1", "a6+c1", "b4+c4",
                     "a8+b3+c3"])
    expect(plan, 3, ["a9+b1+c1", "a10+b2+c2", "a11+b3+c3", "a12+b4+c4"])
    assert plan.downloads == (7, 7, 4)


def test_table_three_databases_shared_side_information():
    plan, _ = synthesize(SchemeSpec(3, 3, (1, 3, 3)), desired=1)
    expect(plan, 1, ["a1", "b1", "c1", "a6+b2+c2", "a7+b3+c3"])
    expect(plan, 2, ["a2+b1", "a3+c1", "b2+c2", "a8+b3+c3"])
    expect(plan, 3, ["a4+b1", "a5+c1", "b3+c3", "a9+b2+c2"])


def test_table_three_databases_two_entry_groups():
    plan, _ = synthesize(SchemeSpec(3, 3, (1, 2, 3)), desired=1)
    expect(plan, 1, ["a1", "b1", "c1", "a4+b2+c2"])
    expect(plan, 2, ["a2+b1", "a3+c1", "b2+c2"])
    expect(plan, 3, ["a5+b1+c1", "a6+b2+c2"])


def test_table_three_databases_both_packed():
    plan, _ = synthesize(SchemeSpec(3, 3, (1, 1, 3)), desired=1)
    expect(plan, 1, ["a1", "b1", "c1"])
    expect(plan, 2, ["a2+b1+c1"])
    expect(plan, 3, ["a3+b1+c1"])


# ---------------------------------------------------------------------------
# structural invariants


def test_stage_counts_match_solver_everywhere():
    for spec in all_specs(4, 3):
        counts = solve_stages(spec)
        for desired in range(1, spec.num_messages + 1):
            plan, _ = synthesize(spec, desired)
            histogram = stage_histogram(plan)
            for group in spec.groups():
                for db in range(group.first, group.last + 1):
                    for k in range(1, spec.num_messages + 1):
                        expected = counts.stages(group.depth, k)
                        assert histogram.get((db, k), 0) == expected


def test_message_symmetry_per_stage():
    # Within every database and round, each message subset appears exactly
    # once per stage.
    for spec in all_specs(4, 3):
        plan, _ = synthesize(spec, 1)
        for db in range(1, spec.num_databases + 1):
            per_round = {}
            for query in plan.database_queries(db):
                per_round.setdefault(query.round, []).append(
                    query.messages())
            for k, subsets in per_round.items():
                stages = len(subsets) // comb(spec.num_messages, k)
                for subset in set(subsets):
                    assert subsets.count(subset) == stages


def test_group_databases_have_identical_shape():
    for spec in all_specs(4, 3):
        plan, _ = synthesize(spec, 1)
        for group in spec.groups():
            shapes = set()
            for db in range(group.first, group.last + 1):
                shapes.add(tuple(sorted(
                    (query.round, query.messages())
                    for query in plan.database_queries(db))))
            assert len(shapes) == 1


def test_no_symbol_reuse_within_database():
    for spec in all_specs(4, 3):
        for desired in range(1, spec.num_messages + 1):
            plan, _ = synthesize(spec, desired)
            for db in range(1, spec.num_databases + 1):
                seen = set()
                for query in plan.database_queries(db):
                    for term in query.terms:
                        assert term not in seen, (spec.profile, db, term)
                        seen.add(term)


def test_fresh_allocation_is_dense_and_single():
    # Every symbol index of every message is introduced exactly once: the
    # per-message index sets are exactly 1..budget.
    for spec in all_specs(4, 3):
        plan, dmap = synthesize(spec, 1)
        budget = required_length(spec)
        used = {}
        for db in range(1, spec.num_databases + 1):
            for query in plan.database_queries(db):
                for m, i in query.terms:
                    used.setdefault(m, set()).add(i)
        assert used[1] == set(range(1, budget.desired_symbols + 1))
        for m in range(2, spec.num_messages + 1):
            assert used.get(m, set()) == set(
                range(1, budget.undesired_symbols + 1))


def test_decode_map_covers_each_symbol_once():
    for spec in all_specs(4, 3):
        plan, dmap = synthesize(spec, 2 if spec.num_messages > 1 else 1)
        symbols = [e.symbol for e in dmap.entries]
        assert symbols == list(range(1, plan.message_length + 1))
        for entry in dmap.entries:
            query = plan.query_at(entry.query)
            assert dmap.desired in query.messages()
            combined = []
            for ref in entry.side_info:
                combined.extend(plan.query_at(ref).terms)
            rest = [t for t in query.terms if t[0] != dmap.desired]
            assert sorted(rest) == sorted(combined)


# ---------------------------------------------------------------------------
# lengths


def test_required_length_examples():
    assert required_length(SchemeSpec(3, 2, (1, 2, 2))).message_length == 4
    assert required_length(SchemeSpec(3, 2, (1, 1, 2))).message_length == 2
    for n0 in (1, 2):
        for n1 in range(n0, 3):
            budget = required_length(SchemeSpec(2, 2, (n0, n1)))
            assert budget.message_length == n0 * n1


def test_required_length_mixture_sums():
    combined = required_length_mixture([
        (SchemeSpec(3, 2, (1, 2, 2)), 1),
        (SchemeSpec(3, 2, (1, 1, 2)), 2),
    ])
    assert combined.message_length == 8
    assert combined.undesired_symbols == 4


def test_undesired_budget_never_exceeds_length():
    for spec in all_specs(5, 4):
        budget = required_length(spec)
        assert budget.undesired_symbols <= budget.message_length


# ---------------------------------------------------------------------------
# concatenation behavior


def test_plan_for_target_half_ratio():
    from fractions import Fraction
    from pirasym.plans import plan_for_target
    from pirasym.stages import TrafficVector
    target = TrafficVector((Fraction(2, 3), Fraction(1, 3)))
    plan, dmap, mix, components = plan_for_target(3, target, desired=1)
    assert plan.downloads == (10, 5)
    assert plan.message_length == 8
    assert mix.rate == Fraction(8, 15)
    assert [(c.spec.profile, reps) for c, reps in components] == \
        [((1, 1, 2), 2), ((1, 2, 2), 1)]
    assert dmap.desired == 1


def test_concatenate_identity():
    plan, dmap = synthesize(SchemeSpec(3, 2, (1, 2, 2)), desired=1)
    combined, cmap = concatenate([(plan, dmap, 1)])
    assert combined.queries == plan.queries
    assert [e.symbol for e in cmap.entries] == [e.symbol for e in dmap.entries]


def test_concatenate_scaling_preserves_ratios():
    plan, dmap = synthesize(SchemeSpec(3, 2, (1, 2, 2)), desired=1)
    doubled, _ = concatenate([(plan, dmap, 2)])
    assert doubled.downloads == (8, 6)
    assert doubled.message_length == 8


def test_concatenate_rejects_mismatches():
    a = synthesize(SchemeSpec(3, 2, (1, 2, 2)), desired=1)
    b = synthesize(SchemeSpec(2, 2, (1, 2)), desired=1)
    with pytest.raises(ValueError):
        concatenate([(a[0], a[1], 1), (b[0], b[1], 1)])
    c = synthesize(SchemeSpec(3, 2, (1, 1, 2)), desired=2)
    with pytest.raises(ValueError):
        concatenate([(a[0], a[1], 1), (c[0], c[1], 1)])
    with pytest.raises(ValueError):
        concatenate([(a[0], a[1], 0)])


def test_concatenated_symbols_stay_disjoint():
    a = synthesize(SchemeSpec(3, 2, (1, 2, 2)), desired=1)
    b = synthesize(SchemeSpec(3, 2, (2, 2, 2)), desired=1)
    plan, _ = concatenate([(a[0], a[1], 2), (b[0], b[1], 1)])
    introduced = set()
    for db in range(1, 3):
        local = set()
        for query in plan.database_queries(db):
            for term in query.terms:
                assert term not in local
                local.add(term)
        introduced |= local
    # Index ranges per message are dense from 1.
    for m in range(1, 4):
        indices = sorted(i for mm, i in introduced if mm == m)
        assert indices == list(range(1, len(indices) + 1))


# ---------------------------------------------------------------------------
# serialization and rendering


def test_plan_json_roundtrip():
    plan, dmap = synthesize(SchemeSpec(3, 3, (1, 2, 3)), desired=2, seed=9)
    data = plan_to_json_dict(plan)
    assert data["spec"] == [1, 2, 3]
    assert data["seed"] == 9
    assert data["databases"][0][0][0] == {"m": 0, "i": 0}
    assert plan_from_json_dict(data) == plan
    decode_data = decode_to_json_dict(dmap)
    assert decode_from_json_dict(decode_data) == dmap


def test_render_query_and_table():
    assert render_query(Query(((1, 4), (2, 2), (3, 2)))) == "a4+b2+c2"
    plan, _ = synthesize(SchemeSpec(3, 2, (1, 2, 2)), desired=1)
    table = render_table(plan)
    assert "Database 1" in table and "a4+b2+c2" in table
    assert table.count("\n") >= 6


def test_query_validation():
    with pytest.raises(ValueError):
        Query(((1, 1), (1, 2)))
    with pytest.raises(ValueError):
        Query(())


def test_synthesize_rejects_bad_desired():
    with pytest.raises(ValueError):
        synthesize(SchemeSpec(3, 2, (1, 2, 2)), desired=4)
    with pytest.raises(ValueError):
        synthesize(SchemeSpec(3, 2, (1, 2, 2)), desired=0)
