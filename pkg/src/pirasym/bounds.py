"""Converse side: the piecewise-affine capacity upper bound and thresholds.

For a non-increasing traffic vector the capacity is bounded by a minimum of
affine functions of the shares, one per monotone non-decreasing branch
sequence ``(n_1, ..., n_{M-1})`` with entries in ``1..N``:

    (1 + tail(n_1)/n_1 + tail(n_2)/(n_1 n_2) + ... ) /
    (1 + 1/n_1     + 1/(n_1 n_2)         + ... )

where ``tail(v)`` is the total share of databases ``v+1..N``.  Restricting
to monotone sequences loses nothing (an exhaustive mode over all sequences
is kept for validation); the leading branch coefficient in the final product
is 1 throughout, consistent with the bound's derivation.

The same module carries the exact capacity formulas for two and three
messages, the symmetric-traffic baseline, the weakest-link threshold below
which asymmetry strictly reduces capacity, and the sweep that tabulates
bound versus best time-shared rate over a grid of traffic vectors.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, product
from typing import Optional, Sequence

from .mixing import mixture
from .stages import TrafficVector, enumerate_corners


def branch_value(traffic: TrafficVector, sequence: Sequence) -> Fraction:
    """Value of one affine branch of the upper bound."""
    shares = traffic.shares
    numerator = Fraction(1)
    denominator = Fraction(1)
    prefix = 1
    for v in sequence:
        prefix *= v
        tail = sum(shares[v:], Fraction(0))
        numerator += Fraction(tail, prefix)
        denominator += Fraction(1, prefix)
    return numerator / denominator


@dataclass(frozen=True)
class BoundResult:
    """Upper bound value with its minimizing branch sequence."""

    value: Fraction
    argmin: tuple
    branches: Optional[dict] = None


def upper_bound(traffic: TrafficVector, num_messages: int,
                exhaustive: bool = False,
                keep_branches: bool = False) -> BoundResult:
    """Tightest affine branch at ``traffic`` for ``num_messages`` messages.

    Branch sequences are monotone non-decreasing by default; ``exhaustive``
    minimizes over all sequences instead (validation mode).  Ties go to the
    lexicographically smallest sequence.
    """
    if num_messages < 1:
        raise ValueError("need at least one message")
    n = traffic.num_databases
    if exhaustive:
        candidates = product(range(1, n + 1), repeat=num_messages - 1)
    else:
        candidates = combinations_with_replacement(range(1, n + 1),
                                                   num_messages - 1)
    best = None
    best_seq = None
    branches = {} if keep_branches else None
    for seq in candidates:
        value = branch_value(traffic, seq)
        if branches is not None:
            branches[seq] = value
        if best is None or value < best:
            best = value
            best_seq = seq
    return BoundResult(value=best, argmin=best_seq, branches=branches)


def symmetric_capacity(num_messages: int, num_databases: int) -> Fraction:
    """Capacity with unconstrained (uniform) traffic."""
    total = sum(Fraction(1, num_databases ** i) for i in range(num_messages))
    return 1 / total


def asymmetry_threshold(num_messages: int, num_databases: int) -> Fraction:
    """Weakest-link share below which capacity strictly drops.

    Equals ``(N^(M-1) - 1) / (N^M - 1)``; requires more than one database.
    """
    if num_databases <= 1:
        raise ValueError("threshold needs more than one database")
    n, m = num_databases, num_messages
    return Fraction(n ** (m - 1) - 1, n ** m - 1)


def capacity_small_m(traffic: TrafficVector, num_messages: int) -> Fraction:
    """Exact capacity for two or three messages, any database count.

    Independent closed form: a minimization over one index for two messages
    and over an ordered index pair for three; must agree with
    :func:`upper_bound` for these message counts.
    """
    shares = traffic.shares
    n = traffic.num_databases

    def tail(v: int) -> Fraction:
        return sum(shares[v:], Fraction(0))

    if num_messages == 2:
        return min(
            (1 + tail(v) / v) / (1 + Fraction(1, v))
            for v in range(1, n + 1))
    if num_messages == 3:
        best = None
        for v0 in range(1, n + 1):
            for v1 in range(v0, n + 1):
                value = ((1 + tail(v0) / v0 + tail(v1) / (v0 * v1))
                         / (1 + Fraction(1, v0) + Fraction(1, v0 * v1)))
                if best is None or value < best:
                    best = value
        return best
    raise ValueError("closed form covers two or three messages only")


@dataclass(frozen=True)
class SweepRow:
    traffic: TrafficVector
    bound: Fraction
    achievable: Fraction
    argmin: tuple

    @property
    def gap(self) -> Fraction:
        return self.bound - self.achievable


def sweep_grid(num_databases: int, grid: int) -> list:
    """Deterministic traffic grid on the ordered simplex.

    For two databases: ``grid`` uniform samples of the second share over
    ``[0, 1/2]``.  For more databases: all normalized non-increasing integer
    compositions of ``grid - 1``.  One database: the single point ``(1,)``.
    """
    if grid < 2:
        raise ValueError("grid needs at least 2 points per dimension")
    if num_databases == 1:
        return [TrafficVector((Fraction(1),))]
    points = []
    if num_databases == 2:
        for i in range(grid):
            second = Fraction(i, 2 * (grid - 1))
            points.append(TrafficVector((1 - second, second)))
    else:
        total = grid - 1
        seen = set()
        for split in combinations_with_replacement(range(total + 1),
                                                   num_databases):
            parts = tuple(sorted(split, reverse=True))
            if sum(parts) != total or parts in seen:
                continue
            seen.add(parts)
            points.append(TrafficVector(
                tuple(Fraction(v, total) for v in parts)))
    points.sort(key=lambda t: t.shares)
    return points


def sweep(num_messages: int, num_databases: int, grid: int) -> list:
    """Bound, best time-shared rate, and gap over the traffic grid."""
    corners = enumerate_corners(num_messages, num_databases)
    rows = []
    for traffic in sweep_grid(num_databases, grid):
        bound = upper_bound(traffic, num_messages)
        mix = mixture(traffic, corners)
        rows.append(SweepRow(traffic=traffic, bound=bound.value,
                             achievable=mix.rate, argmin=bound.argmin))
    return rows


def _fmt(value: Fraction) -> str:
    return f"{float(value):.12g}"


def sweep_csv(rows: list) -> str:
    """Render sweep rows as CSV, byte-stable across runs and platforms."""
    if not rows:
        return ""
    n = rows[0].traffic.num_databases
    buf = io.StringIO()
    headers = [f"tau_{i}" for i in range(1, n + 1)]
    headers += ["upper_bound", "achievable", "gap", "argmin_sequence"]
    buf.write(",".join(headers) + "\n")
    for row in rows:
        cells = [_fmt(s) for s in row.traffic.shares]
        cells += [_fmt(row.bound), _fmt(row.achievable), _fmt(row.gap)]
        cells.append(";".join(str(v) for v in row.argmin))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()
