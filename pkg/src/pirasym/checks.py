"""Independent verification: privacy structure, bound consistency, oracles.

Three families of checks tie the constructive side back to theory:

* privacy at the structural level: the canonical shape of a plan (symbol
  indices erased, queries sorted) must not depend on the desired index, and
  a sampled total-variation estimate guards the shuffling layer;
* capacity consistency: for two and three messages the corner rates and the
  time-shared rates must equal the closed-form capacity exactly;
* an elimination oracle: decodability re-derived by Gaussian elimination
  over GF(p) on the raw answer/query linear system, independent of the
  decode map the synthesizer produced.

The privacy checks run at two levels.  The exact level compares, across
desired indices, the canonical view each database would receive with symbol
indices relabeled by first use: a deterministic equality that covers the
whole index-sharing pattern.  The sampled level then watches the one part
the exact level cannot, the uniformly shuffled query order, by estimating
the total variation of the realized message-subset marginal at every wire
position.  The marginal is a lower bound on the full-sequence total
variation that remains estimable at ten thousand samples (the full sequence
has factorial support); it is a reported estimate, not a proof.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .bounds import capacity_small_m, upper_bound
from .fields import DEFAULT_PRIME, MessageStore, Permutation
from .mixing import mixture
from .plans import DecodeMap, QueryPlan, synthesize
from .simulate import make_nodes, retrieve
from .stages import SchemeSpec, TrafficVector, enumerate_corners


# ---------------------------------------------------------------------------
# structural privacy


def canonical_shape(plan: QueryPlan) -> tuple:
    """Per-database sorted multiset of (round, message subset) descriptors.

    Invariant under symbol relabeling and query shuffling; by construction
    equal across desired indices for a private plan.
    """
    shape = []
    for db in range(1, plan.num_databases + 1):
        descriptors = sorted(
            (q.round, q.messages()) for q in plan.database_queries(db))
        shape.append(tuple(descriptors))
    return tuple(shape)


@dataclass(frozen=True)
class ShapeWitness:
    database: int
    round: int
    messages: tuple


@dataclass(frozen=True)
class ShapeReport:
    spec: Optional[SchemeSpec]
    passed: bool
    witness: Optional[ShapeWitness] = None

    def to_json_dict(self) -> dict:
        out = {"check": "privacy-shape", "ok": self.passed}
        if self.spec is not None:
            out["spec"] = list(self.spec.profile)
        if self.witness is not None:
            out["witness"] = {
                "database": self.witness.database,
                "round": self.witness.round,
                "messages": list(self.witness.messages),
            }
        return out


def compare_shapes(reference: tuple, other: tuple) -> Optional[ShapeWitness]:
    """First differing (database, round, subset) between two shapes."""
    for db, (ref_db, other_db) in enumerate(zip(reference, other), start=1):
        if ref_db == other_db:
            continue
        ref_count = Counter(ref_db)
        other_count = Counter(other_db)
        for key in sorted(set(ref_count) | set(other_count)):
            if ref_count[key] != other_count[key]:
                return ShapeWitness(database=db, round=key[0],
                                    messages=key[1])
        return ShapeWitness(database=db, round=0, messages=())
    return None


def check_privacy_shape(spec: SchemeSpec,
                        prime: int = DEFAULT_PRIME) -> ShapeReport:
    """Canonical shapes for every desired index must coincide."""
    shapes = []
    for desired in range(1, spec.num_messages + 1):
        plan, _ = synthesize(spec, desired, prime=prime)
        shapes.append(canonical_shape(plan))
    for other in shapes[1:]:
        witness = compare_shapes(shapes[0], other)
        if witness is not None:
            return ShapeReport(spec=spec, passed=False, witness=witness)
    return ShapeReport(spec=spec, passed=True)


# ---------------------------------------------------------------------------
# sampled query-distribution closeness


def relabeled_view(queries: Sequence, order: Sequence[int]) -> tuple:
    """One database's realized query sequence, symbol indices relabeled.

    ``order`` lists canonical indices in wire order.  Each symbol index is
    replaced by its per-message first-use rank inside the view, which
    preserves the ordering and equality pattern a database observes while
    collapsing the permutation randomness.
    """
    ranks = {}
    next_rank = {}
    view = []
    for canon_idx in order:
        terms = []
        for m, i in queries[canon_idx].terms:
            if (m, i) not in ranks:
                next_rank[m] = next_rank.get(m, 0) + 1
                ranks[(m, i)] = next_rank[m]
            terms.append((m, ranks[(m, i)]))
        view.append(tuple(terms))
    return tuple(view)


def relabeled_canonical_view(plan: QueryPlan) -> tuple:
    """Relabeled views in canonical order, one per database.

    For a private plan this is literally identical for every desired index:
    it captures not just the subset structure but the whole index-sharing
    pattern each database could observe before shuffling.
    """
    return tuple(
        relabeled_view(plan.database_queries(db),
                       range(len(plan.database_queries(db))))
        for db in range(1, plan.num_databases + 1))


def check_view_invariance(spec: SchemeSpec,
                          prime: int = DEFAULT_PRIME) -> ShapeReport:
    """Exact equality of relabeled canonical views across desired indices."""
    views = []
    for desired in range(1, spec.num_messages + 1):
        plan, _ = synthesize(spec, desired, prime=prime)
        views.append(relabeled_canonical_view(plan))
    for other in views[1:]:
        if other != views[0]:
            for db, (a, b) in enumerate(zip(views[0], other), start=1):
                if a != b:
                    pos = next(i for i, (x, y) in enumerate(zip(a, b))
                               if x != y)
                    return ShapeReport(
                        spec=spec, passed=False,
                        witness=ShapeWitness(
                            database=db, round=len(a[pos]),
                            messages=tuple(m for m, _ in a[pos])))
            return ShapeReport(spec=spec, passed=False,
                               witness=ShapeWitness(database=0, round=0,
                                                    messages=()))
    return ShapeReport(spec=spec, passed=True)


def sample_position_counts(plan: QueryPlan, decode_map: DecodeMap,
                           samples: int, rng: random.Random,
                           desired_first: bool = False) -> list:
    """Per-(database, wire position) counters of realized query subsets.

    The rank-relabeled content of the view is desired-invariant by the exact
    check above, so the sampled layer watches what remains random: where the
    shuffle puts each message subset.  ``desired_first`` disables the
    uniform shuffle and pins queries whose subset contains the desired
    message to the front: the planted ordering violation the distribution
    check must catch.
    """
    desired = decode_map.desired
    counters = [[Counter() for _ in plan.database_queries(db)]
                for db in range(1, plan.num_databases + 1)]
    for _ in range(samples):
        for db in range(1, plan.num_databases + 1):
            canonical = plan.database_queries(db)
            order = list(range(len(canonical)))
            if desired_first:
                order.sort(key=lambda idx: (desired not in
                                            canonical[idx].messages(), idx))
            else:
                rng.shuffle(order)
            for position, canon_idx in enumerate(order):
                counters[db - 1][position][canonical[canon_idx].messages()] += 1
    return counters


def total_variation(a: Counter, b: Counter) -> float:
    total_a = sum(a.values()) or 1
    total_b = sum(b.values()) or 1
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a[k] / total_a - b[k] / total_b) for k in keys)


@dataclass(frozen=True)
class DistributionReport:
    spec: Optional[SchemeSpec]
    samples: int
    threshold: float
    tv_by_database: tuple
    verdict: str  # "pass", "fail", or "inconclusive"

    @property
    def tv_max(self) -> float:
        return max(self.tv_by_database) if self.tv_by_database else 0.0

    def to_json_dict(self) -> dict:
        out = {
            "check": "query-distribution",
            "samples": self.samples,
            "threshold": self.threshold,
            "tv_by_database": list(self.tv_by_database),
            "tv_max": self.tv_max,
            "verdict": self.verdict,
            "ok": self.verdict != "fail",
        }
        if self.spec is not None:
            out["spec"] = list(self.spec.profile)
        return out


MIN_DISTRIBUTION_SAMPLES = 1000


def distribution_distance(plan_a: QueryPlan, map_a: DecodeMap,
                          plan_b: QueryPlan, map_b: DecodeMap,
                          samples: int, seed: int = 0,
                          desired_first_a: bool = False) -> tuple:
    """Per-database TV estimates between two plans' realized views.

    The statistic is the maximum, over wire positions, of the total
    variation between the realized relabeled queries at that position: a
    lower bound on the full-sequence total variation that stays estimable
    at the default sample size (the full sequence support grows factorially
    with the per-database query count).
    """
    rng_a = random.Random(f"{seed}:a")
    rng_b = random.Random(f"{seed}:b")
    counts_a = sample_position_counts(plan_a, map_a, samples, rng_a,
                                      desired_first=desired_first_a)
    counts_b = sample_position_counts(plan_b, map_b, samples, rng_b)
    distances = []
    for db_a, db_b in zip(counts_a, counts_b):
        per_position = [total_variation(ca, cb)
                        for ca, cb in zip(db_a, db_b)]
        distances.append(max(per_position, default=0.0))
    return tuple(distances)


def check_query_distribution(spec: SchemeSpec, samples: int = 10000,
                             seed: int = 0, threshold: float = 0.05,
                             prime: int = DEFAULT_PRIME) -> DistributionReport:
    """Sampled closeness of realized views across desired indices.

    Compares desired index 1 against every other; fewer than
    ``MIN_DISTRIBUTION_SAMPLES`` samples yields no verdict.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    plans = {d: synthesize(spec, d, prime=prime)
             for d in range(1, spec.num_messages + 1)}
    worst = [0.0] * spec.num_databases
    for other in range(2, spec.num_messages + 1):
        tv = distribution_distance(*plans[1], *plans[other], samples, seed)
        worst = [max(w, t) for w, t in zip(worst, tv)]
    if samples < MIN_DISTRIBUTION_SAMPLES:
        verdict = "inconclusive"
    elif max(worst, default=0.0) < threshold:
        verdict = "pass"
    else:
        verdict = "fail"
    return DistributionReport(spec=spec, samples=samples,
                              threshold=threshold,
                              tv_by_database=tuple(worst), verdict=verdict)


# ---------------------------------------------------------------------------
# capacity consistency


def _grid_targets(num_databases: int, points: int, seed: int) -> list:
    """Deterministic rational targets on the ordered simplex."""
    rng = random.Random(seed)
    targets = [TrafficVector.uniform(num_databases)]
    extreme = [Fraction(1)] + [Fraction(0)] * (num_databases - 1)
    targets.append(TrafficVector(tuple(extreme)))
    while len(targets) < points:
        raw = sorted((rng.randrange(0, 64) for _ in range(num_databases)),
                     reverse=True)
        total = sum(raw)
        if total == 0:
            continue
        targets.append(TrafficVector(
            tuple(Fraction(v, total) for v in raw)))
    return targets[:points]


@dataclass(frozen=True)
class CapacityMatchReport:
    num_messages: int
    num_databases: int
    records: tuple
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "check": "capacity-match",
            "m": self.num_messages,
            "n": self.num_databases,
            "records": list(self.records),
            "ok": self.passed,
        }


def check_capacity_match(num_messages: int, num_databases: int,
                         grid_points: int = 50,
                         seed: int = 0) -> CapacityMatchReport:
    """Corner rates and time-shared rates must equal capacity exactly.

    Applies to two and three messages, where the closed form is available.
    """
    if num_messages not in (2, 3):
        raise ValueError("capacity closed form covers two or three messages")
    corners = enumerate_corners(num_messages, num_databases)
    records = []
    ok = True
    for corner in corners:
        capacity = capacity_small_m(corner.traffic, num_messages)
        bound = upper_bound(corner.traffic, num_messages).value
        good = corner.rate == capacity == bound
        ok = ok and good
        records.append({
            "kind": "corner",
            "spec": list(corner.spec.profile),
            "rate": str(corner.rate),
            "capacity": str(capacity),
            "ok": good,
        })
    for target in _grid_targets(num_databases, grid_points, seed):
        mix = mixture(target, corners)
        bound = upper_bound(target, num_messages).value
        capacity = capacity_small_m(target, num_messages)
        good = mix.rate == bound == capacity
        ok = ok and good
        records.append({
            "kind": "grid",
            "tau": target.as_strings(),
            "achievable": str(mix.rate),
            "bound": str(bound),
            "ok": good,
        })
    return CapacityMatchReport(num_messages=num_messages,
                               num_databases=num_databases,
                               records=tuple(records), passed=ok)


# ---------------------------------------------------------------------------
# elimination oracle


@dataclass(frozen=True)
class OracleResult:
    decodable: bool
    decoded: Optional[tuple]
    missing: tuple

    def to_json_dict(self) -> dict:
        return {
            "check": "elimination-oracle",
            "decodable": self.decodable,
            "missing_symbols": list(self.missing),
        }


class _Eliminator:
    """Row reduction over GF(p) with answer values carried along."""

    def __init__(self, num_cols: int, p: int):
        self.num_cols = num_cols
        self.p = p
        self.rows = []  # reduced rows: (coefficients list, value)
        self.pivots = {}  # column -> row index

    def _reduce(self, coeffs, value):
        p = self.p
        for col, row_idx in self.pivots.items():
            factor = coeffs[col]
            if factor:
                row_coeffs, row_value = self.rows[row_idx]
                for j in range(self.num_cols):
                    if row_coeffs[j]:
                        coeffs[j] = (coeffs[j] - factor * row_coeffs[j]) % p
                value = (value - factor * row_value) % p
        return coeffs, value

    def add_row(self, coeffs, value):
        coeffs, value = self._reduce(list(coeffs), value % self.p)
        lead = next((j for j in range(self.num_cols) if coeffs[j]), None)
        if lead is None:
            return
        inv = pow(coeffs[lead], self.p - 2, self.p)
        coeffs = [(c * inv) % self.p for c in coeffs]
        value = (value * inv) % self.p
        self.pivots[lead] = len(self.rows)
        self.rows.append((coeffs, value))

    def solve_unit(self, column: int):
        """Value of one unknown if pinned by the row space, else None."""
        coeffs = [0] * self.num_cols
        coeffs[column] = 1
        coeffs, value = self._reduce(coeffs, 0)
        if any(coeffs):
            return None
        return (-value) % self.p


def oracle_decode(plan: QueryPlan, desired: int, store: MessageStore,
                  perms: Sequence[Permutation]) -> OracleResult:
    """Re-derive decodability by elimination on the answer/query system.

    Unknowns are the permuted-domain symbols the plan touches; rows are the
    canonical queries with their answered values.  The desired symbols are
    recovered if and only if each unit vector lies in the row space.  Built
    without the decode map, so agreement with the map-driven client is an
    independent check.
    """
    columns = {}
    for db_list in plan.queries:
        for query in db_list:
            for term in query.terms:
                columns.setdefault(term, len(columns))
    for i in range(1, plan.message_length + 1):
        columns.setdefault((desired, i), len(columns))

    elim = _Eliminator(len(columns), plan.prime)
    for db in range(1, plan.num_databases + 1):
        for query in plan.database_queries(db):
            value = 0
            coeffs = [0] * len(columns)
            for m, i in query.terms:
                coeffs[columns[(m, i)]] = 1
                value += store.symbol(m, perms[m - 1].apply(i))
            elim.add_row(coeffs, value)

    permuted = []
    missing = []
    for i in range(1, plan.message_length + 1):
        value = elim.solve_unit(columns[(desired, i)])
        if value is None:
            missing.append(i)
        else:
            permuted.append(value)
    if missing:
        return OracleResult(decodable=False, decoded=None,
                            missing=tuple(missing))
    perm = perms[desired - 1]
    decoded = [0] * plan.message_length
    for idx, value in enumerate(permuted, start=1):
        decoded[perm.apply(idx) - 1] = value
    return OracleResult(decodable=True, decoded=tuple(decoded), missing=())


def oracle_agrees_with_client(plan: QueryPlan, decode_map: DecodeMap,
                              store: MessageStore,
                              perms: Sequence[Permutation],
                              seed: int = 0) -> bool:
    """Oracle and decode-map retrieval must return identical symbols."""
    oracle = oracle_decode(plan, decode_map.desired, store, perms)
    if not oracle.decodable:
        return False
    nodes = make_nodes(store, plan.num_databases)
    result = retrieve(plan, decode_map, nodes, perms,
                      rng=random.Random(seed))
    return result.decoded == oracle.decoded
