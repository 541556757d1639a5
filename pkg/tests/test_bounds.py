from fractions import Fraction

import pytest

from pirasym.bounds import (asymmetry_threshold, branch_value,
                            capacity_small_m, sweep, sweep_csv, sweep_grid,
                            symmetric_capacity, upper_bound)
from pirasym.stages import TrafficVector, enumerate_corners


def lam(ratio):
    """Traffic vector for two databases from the second-database ratio."""
    return TrafficVector.parse_ratios(f"1,{ratio}")


# ---------------------------------------------------------------------------
# upper bound


def test_bound_symmetric_traffic_matches_baseline():
    for m in range(1, 6):
        for n in range(1, 6):
            res = upper_bound(TrafficVector.uniform(n), m)
            assert res.value == symmetric_capacity(m, n)


def test_bound_single_database_traffic_is_one_over_m():
    for m in range(1, 6):
        traffic = TrafficVector((Fraction(1), Fraction(0), Fraction(0)))
        assert upper_bound(traffic, m).value == Fraction(1, m)


def test_bound_two_database_middle_branch():
    # 2*(1+2*L)/(5*(1+L)) at ratio 1/2 equals 8/15.
    assert upper_bound(lam("1/2"), 3).value == Fraction(8, 15)


def test_bound_four_messages_kink():
    traffic = TrafficVector((Fraction(5, 8), Fraction(3, 8)))
    res = upper_bound(traffic, 4)
    assert res.value == Fraction(1, 2)


def test_bound_three_message_piecewise_in_ratio_form():
    # Branch formulas in the second-database ratio with kinks at 1/3 and 3/4.
    for num, den in [(0, 1), (1, 6), (1, 3), (1, 2), (3, 5), (3, 4),
                     (4, 5), (9, 10), (1, 1)]:
        ratio = Fraction(num, den)
        value = upper_bound(lam(ratio), 3).value
        if ratio <= Fraction(1, 3):
            expected = (1 + 3 * ratio) / (3 * (1 + ratio))
        elif ratio <= Fraction(3, 4):
            expected = 2 * (1 + 2 * ratio) / (5 * (1 + ratio))
        else:
            expected = Fraction(4, 7)
        assert value == expected, ratio


def test_bound_argmin_lexicographic_tie_break():
    res = upper_bound(lam("3/4"), 3)
    # The (1,2) and (2,2) branches tie at the kink; the smaller sequence wins.
    assert res.value == Fraction(4, 7)
    assert res.argmin == (1, 2)


def test_bound_branch_count_and_values():
    res = upper_bound(lam("1/2"), 3, keep_branches=True)
    assert len(res.branches) == 3
    assert res.branches[(1, 1)] == branch_value(lam("1/2"), (1, 1))


def test_monotone_equals_exhaustive():
    targets = [TrafficVector.uniform(2), lam("1/5"), lam("2/3"),
               TrafficVector((Fraction(3, 5), Fraction(1, 5), Fraction(1, 5))),
               TrafficVector((Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)))]
    for m in range(1, 5):
        for traffic in targets:
            if traffic.num_databases > 3:
                continue
            fast = upper_bound(traffic, m)
            full = upper_bound(traffic, m, exhaustive=True)
            assert fast.value == full.value, (m, traffic.shares)


def test_bound_single_message_is_one():
    assert upper_bound(lam("1/3"), 1).value == 1
    assert upper_bound(lam("1/3"), 1).argmin == ()


# ---------------------------------------------------------------------------
# threshold


def test_threshold_values():
    assert asymmetry_threshold(2, 2) == Fraction(1, 3)
    assert asymmetry_threshold(3, 2) == Fraction(3, 7)
    with pytest.raises(ValueError):
        asymmetry_threshold(3, 1)


def test_threshold_approaches_uniform_share():
    value = asymmetry_threshold(20, 2)
    assert abs(float(value) - 0.5) < 1e-5
    previous = Fraction(0)
    for m in range(2, 21):
        current = asymmetry_threshold(m, 2)
        assert current > previous
        previous = current


def test_threshold_behavior_on_families():
    # Below the threshold the bound drops strictly under the symmetric
    # capacity; at and above it (along the equal-leading-share family) the
    # symmetric branch is the minimum.
    for m in range(2, 5):
        for n in range(2, 5):
            star = asymmetry_threshold(m, n)
            base = symmetric_capacity(m, n)

            def family(last):
                head = (1 - last) / (n - 1)
                return TrafficVector((head,) * (n - 1) + (last,))

            assert upper_bound(family(star), m).value == base
            assert upper_bound(family(Fraction(1, n)), m).value == base
            below = star - Fraction(1, 1000)
            if below >= 0:
                assert upper_bound(family(below), m).value < base


# ---------------------------------------------------------------------------
# closed form for small message counts


def test_capacity_small_m_examples():
    assert capacity_small_m(TrafficVector.parse("4/7,3/7"), 3) == Fraction(4, 7)
    assert capacity_small_m(TrafficVector.uniform(3), 3) == Fraction(9, 13)
    assert capacity_small_m(TrafficVector.parse("1,0"), 2) == Fraction(1, 2)
    with pytest.raises(ValueError):
        capacity_small_m(TrafficVector.uniform(2), 4)


def test_capacity_small_m_equals_bound_everywhere():
    import random
    rng = random.Random(2)
    for m in (2, 3):
        for n in range(1, 6):
            for _ in range(15):
                raw = sorted((rng.randrange(0, 30) for _ in range(n)),
                             reverse=True)
                if sum(raw) == 0:
                    continue
                traffic = TrafficVector(
                    tuple(Fraction(v, sum(raw)) for v in raw))
                assert capacity_small_m(traffic, m) == \
                    upper_bound(traffic, m).value


def test_corner_rates_never_exceed_bound():
    for m in range(1, 6):
        for n in range(1, 5):
            for corner in enumerate_corners(m, n):
                bound = upper_bound(corner.traffic, m).value
                assert corner.rate <= bound, (m, n, corner.spec.profile)


def test_corner_rates_meet_bound_for_small_m():
    for m in (2, 3):
        for n in range(1, 6):
            for corner in enumerate_corners(m, n):
                assert corner.rate == upper_bound(corner.traffic, m).value


def test_four_messages_two_databases_corners_meet_bound():
    # The bound and the scheme agree at every achievable corner even though
    # a gap opens between them.
    for corner in enumerate_corners(4, 2):
        assert corner.rate == upper_bound(corner.traffic, 4).value


# ---------------------------------------------------------------------------
# sweep


def test_sweep_grid_two_databases_point_count():
    grid = sweep_grid(2, 11)
    assert len(grid) == 11
    assert grid[0].shares == (Fraction(1, 2), Fraction(1, 2))
    assert grid[-1].shares == (Fraction(1), Fraction(0))


def test_sweep_two_messages_gap_zero():
    rows = sweep(2, 2, 11)
    assert len(rows) == 11
    assert all(row.gap == 0 for row in rows)


def test_sweep_three_messages_fine_grid_gap_zero():
    rows = sweep(3, 2, 101)
    assert len(rows) == 101
    assert all(row.gap == 0 for row in rows)


def test_sweep_four_messages_positive_gap_region():
    rows = sweep(4, 2, 17)
    by_tau2 = {row.traffic.shares[1]: row for row in rows}
    assert by_tau2[Fraction(3, 8)].gap > 0
    assert any(row.gap > 0 for row in rows)
    assert by_tau2[Fraction(1, 2)].gap == 0
    assert by_tau2[Fraction(0)].gap == 0


def test_sweep_single_message_bound_is_one():
    rows = sweep(1, 2, 5)
    assert all(row.bound == 1 and row.achievable == 1 for row in rows)


def test_sweep_csv_deterministic_and_well_formed():
    rows = sweep(3, 2, 5)
    text = sweep_csv(rows)
    assert text == sweep_csv(sweep(3, 2, 5))
    lines = text.strip().splitlines()
    assert lines[0] == "tau_1,tau_2,upper_bound,achievable,gap,argmin_sequence"
    assert len(lines) == 6
    for line in lines[1:]:
        assert len(line.split(",")) == 6


def test_sweep_grid_three_databases():
    grid = sweep_grid(3, 7)
    assert all(len(t.shares) == 3 for t in grid)
    assert TrafficVector.uniform(3) in grid
    assert len(grid) == len(set(grid))
    with pytest.raises(ValueError):
        sweep_grid(2, 1)
