"""Corner-point calculus: stage counts, traffic shares, rates, and lengths.

A pure (non-time-shared) retrieval scheme is indexed by a monotone
non-decreasing profile ``(n_0, ..., n_{M-1})`` with entries in ``1..N``:
databases ``1..n_0`` start downloading in round 1, databases
``n_0+1..n_1`` stay silent until round 2 where each initial query spends one
round-1 side-information symbol, and in general the databases of group
``l`` enter at round ``l+1`` spending ``l``-sums of round-1 side information.

The number of stages each group runs per round obeys a linear recurrence:
every stage completed in round ``k-1`` at one database seeds exactly one
round-``k`` stage at every other active database, and groups with depth
``l >= 2`` additionally receive a one-time batch of entry stages packed from
the round-1 downloads of group 0.  Solving that recurrence gives exact
traffic shares, per-database downloads, the retrieved-message length, and the
retrieval rate.  Everything here is exact rational arithmetic; floats belong
to presentation code only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb
from typing import Sequence


@dataclass(frozen=True)
class TrafficVector:
    """Per-database shares of the total download: non-increasing, summing to 1.

    ``shares[i]`` is the fraction served by database ``i+1``.  The equivalent
    first-database-normalized form (``ratios``, with ``ratios[0] == 1``) is
    derived on demand; both forms are exact rationals.
    """

    shares: tuple

    def __post_init__(self):
        shares = tuple(Fraction(s) for s in self.shares)
        object.__setattr__(self, "shares", shares)
        if len(shares) < 1:
            raise ValueError("need at least one database share")
        if any(s < 0 for s in shares):
            raise ValueError("traffic shares must be non-negative")
        if any(a < b for a, b in zip(shares, shares[1:])):
            raise ValueError(f"traffic shares must be non-increasing: {shares}")
        if sum(shares) != 1:
            raise ValueError(f"traffic shares must sum to 1, got {sum(shares)}")

    @property
    def num_databases(self) -> int:
        return len(self.shares)

    @property
    def ratios(self) -> tuple:
        """Traffic normalized to database 1 (first entry always 1)."""
        first = self.shares[0]
        return tuple(s / first for s in self.shares)

    @classmethod
    def from_ratios(cls, ratios: Sequence) -> "TrafficVector":
        values = [Fraction(r) for r in ratios]
        if not values or values[0] != 1:
            raise ValueError("ratio form must start with 1")
        if any(not 0 <= v <= 1 for v in values):
            raise ValueError("ratios must lie in [0, 1]")
        total = sum(values)
        return cls(tuple(v / total for v in values))

    @classmethod
    def parse(cls, text: str) -> "TrafficVector":
        """Parse exact shares like ``"4/7,3/7"`` (fractions, never floats)."""
        return cls(tuple(Fraction(part.strip()) for part in text.split(",")))

    @classmethod
    def parse_ratios(cls, text: str) -> "TrafficVector":
        """Parse the database-1-normalized form like ``"1,3/4"``."""
        return cls.from_ratios([Fraction(part.strip()) for part in text.split(",")])

    @classmethod
    def uniform(cls, num_databases: int) -> "TrafficVector":
        share = Fraction(1, num_databases)
        return cls((share,) * num_databases)

    def as_strings(self) -> list:
        return [str(s) for s in self.shares]


@dataclass(frozen=True)
class Group:
    """A maximal run of databases entering the scheme at the same round.

    ``depth`` is the number of round-1 side-information symbols each entry
    query combines; the group's databases are ``first..last`` (1-based) and
    they stay silent through rounds ``1..depth``.
    """

    depth: int
    first: int
    last: int

    @property
    def size(self) -> int:
        return self.last - self.first + 1


@dataclass(frozen=True)
class SchemeSpec:
    """Identifier of a corner point: message count, database count, profile."""

    num_messages: int
    num_databases: int
    profile: tuple

    def __post_init__(self):
        object.__setattr__(self, "profile", tuple(int(v) for v in self.profile))
        m, n = self.num_messages, self.num_databases
        if m < 1 or n < 1:
            raise ValueError("need at least one message and one database")
        if len(self.profile) != m:
            raise ValueError(f"profile must have {m} entries, got {len(self.profile)}")
        if any(not 1 <= v <= n for v in self.profile):
            raise ValueError(f"profile entries must lie in 1..{n}: {self.profile}")
        if any(a > b for a, b in zip(self.profile, self.profile[1:])):
            raise ValueError(f"profile must be non-decreasing: {self.profile}")

    def groups(self) -> tuple:
        """Non-empty groups, ordered by depth (depth 0 always present)."""
        out = []
        prev = 0
        for depth, cutoff in enumerate(self.profile):
            if cutoff > prev:
                out.append(Group(depth=depth, first=prev + 1, last=cutoff))
                prev = cutoff
        return tuple(out)

    def label(self) -> str:
        return ",".join(str(v) for v in self.profile)


def _stage_factor(num_messages: int, depth: int) -> int:
    """Entry-stage combinatorial factor for one group.

    Group 0 contributes a unit factor; a depth-``l`` group contributes the
    number of round-1 stages needed to pack one entry stage, C(M-2, l-1).
    """
    if depth == 0:
        return 1
    return comb(num_messages - 2, depth - 1)


@dataclass(frozen=True)
class StageCounts:
    """Per-group, per-round stage counts plus the one-time entry factors.

    ``rounds[depth][k-1]`` is the number of round-``k`` stages each database
    of the depth-``depth`` group runs.  ``entry_factor[depth]`` is the
    per-group-0-database count of entry stages a depth >= 2 group packs from
    round-1 side information.
    """

    spec: SchemeSpec
    rounds: dict
    entry_factor: dict

    def stages(self, depth: int, round_index: int) -> int:
        return self.rounds[depth][round_index - 1]


def solve_stages(spec: SchemeSpec) -> StageCounts:
    """Solve the stage-count recurrence for one corner point.

    Group ``l`` is silent through rounds ``1..l``.  Group 0 opens round 1
    with ``prod_l C(M-2, l-1)`` stages (unit factor for l = 0); afterwards a
    database's round-``k`` stage count equals the total round-``(k-1)`` stage
    count over all other databases, plus, for groups of depth l >= 2 at round
    ``l+1`` only, ``n_0`` times the entry factor packed from round-1
    downloads.
    """
    m = spec.num_messages
    groups = spec.groups()
    depths = [g.depth for g in groups]
    sizes = {g.depth: g.size for g in groups}
    first_size = spec.profile[0]

    factors = {d: _stage_factor(m, d) for d in depths}
    opening = 1
    for d in depths:
        opening *= factors[d]
    entry_factor = {}
    for d in depths:
        xi = 1
        for other in depths:
            if other != d:
                xi *= factors[other]
        entry_factor[d] = xi

    rounds = {d: [0] * m for d in depths}
    rounds[0][0] = opening
    for k in range(2, m + 1):
        for d in depths:
            if k <= d:
                continue
            total = 0
            for j in depths:
                active = sizes[j] - (1 if j == d else 0)
                total += active * rounds[j][k - 2]
            if d >= 2 and k == d + 1:
                total += first_size * entry_factor[d]
            rounds[d][k - 1] = total

    return StageCounts(
        spec=spec,
        rounds={d: tuple(v) for d, v in rounds.items()},
        entry_factor=entry_factor,
    )


@dataclass(frozen=True)
class CornerPoint:
    """A corner point: exact traffic shares, rate, downloads, and length."""

    spec: SchemeSpec
    traffic: TrafficVector
    rate: Fraction
    downloads: tuple
    message_length: int

    @property
    def total_download(self) -> int:
        return sum(self.downloads)

    def to_json_dict(self) -> dict:
        return {
            "M": self.spec.num_messages,
            "N": self.spec.num_databases,
            "n": list(self.spec.profile),
            "tau": self.traffic.as_strings(),
            "rate": str(self.rate),
            "t": list(self.downloads),
            "L": self.message_length,
        }


def per_database_counts(counts: StageCounts) -> tuple:
    """(total, desired) downloads per database, zeros for silent databases."""
    spec = counts.spec
    m = spec.num_messages
    totals = [0] * spec.num_databases
    desired = [0] * spec.num_databases
    for group in spec.groups():
        t = sum(comb(m, k) * counts.stages(group.depth, k) for k in range(1, m + 1))
        d = sum(comb(m - 1, k - 1) * counts.stages(group.depth, k)
                for k in range(1, m + 1))
        for db in range(group.first, group.last + 1):
            totals[db - 1] = t
            desired[db - 1] = d
    return tuple(totals), tuple(desired)


def corner_point(spec: SchemeSpec) -> CornerPoint:
    """Traffic shares, rate, per-database downloads, and length of a corner."""
    counts = solve_stages(spec)
    totals, desired = per_database_counts(counts)
    grand_total = sum(totals)
    length = sum(desired)
    traffic = TrafficVector(tuple(Fraction(t, grand_total) for t in totals))
    return CornerPoint(
        spec=spec,
        traffic=traffic,
        rate=Fraction(length, grand_total),
        downloads=totals,
        message_length=length,
    )


def enumerate_corners(num_messages: int, num_databases: int) -> list:
    """All corner points, one per monotone non-decreasing profile.

    The count is C(M+N-1, M); profiles are produced in lexicographic order.
    """
    if num_messages < 1 or num_databases < 1:
        raise ValueError("need at least one message and one database")
    corners = []
    for profile in combinations_with_replacement(
            range(1, num_databases + 1), num_messages):
        corners.append(corner_point(
            SchemeSpec(num_messages, num_databases, profile)))
    return corners


def n2_profile(num_messages: int, side_info: int) -> SchemeSpec:
    """The two-database profile whose second database enters with
    ``side_info`` round-1 symbols: ``(1, ..., 1, 2, ..., 2)``."""
    if not 1 <= side_info <= num_messages - 1:
        raise ValueError(f"side_info must lie in 1..{num_messages - 1}")
    profile = (1,) * side_info + (2,) * (num_messages - side_info)
    return SchemeSpec(num_messages, 2, profile)


def n2_tradeoff(num_messages: int, side_info: int) -> tuple:
    """Closed-form (second-database share, rate) for two databases.

    ``side_info`` is the number of round-1 symbols the second database
    combines in its first query.  Returns exact rationals; must coincide with
    :func:`corner_point` on :func:`n2_profile`.
    """
    m, s = num_messages, side_info
    if not 1 <= s <= m - 1:
        raise ValueError(f"side_info must lie in 1..{m - 1}")
    denom = m * comb(m - 2, s - 1) + sum(comb(m, s + 1 + i) for i in range(m - s))
    tau2_num = sum(comb(m, s + 2 * i + 1) for i in range((m - s - 1) // 2 + 1))
    rate_num = comb(m - 2, s - 1) + sum(comb(m - 1, s + i) for i in range(m - s))
    return Fraction(tau2_num, denom), Fraction(rate_num, denom)
