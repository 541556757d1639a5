"""Execute query plans against replicated database nodes and decode.

Databases are independent actors: each node owns a reference to the shared
store and answers the wire queries it is handed, nothing else.  Nodes never
see the canonical plan, the permutations, the shuffle, or each other's
queries; the privacy boundary is the node interface.  Answers are a
deterministic function of (query, store), and traffic is counted in field
symbols.

The client side builds the wire view (applying the private per-message
permutations and the per-database uniform shuffle), collects the answer
strings, undoes the shuffle, cancels side information per the decode map,
and finally undoes the desired message's permutation.  A thread-pooled mode
services each node on its own worker and merges answers by database id,
producing output identical to the single-threaded loop.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .fields import (DEFAULT_PRIME, MessageStore, Permutation, make_store,
                     random_permutations)
from .mixing import best_rate
from .plans import DecodeMap, QueryPlan, concatenate, synthesize
from .stages import SchemeSpec, TrafficVector, corner_point


@dataclass(frozen=True)
class WireQuery:
    """A query as a database sees it: (message, storage position) pairs."""

    terms: tuple


@dataclass(frozen=True)
class AnswerString:
    """Ordered answer symbols from one database, one per wire query."""

    database: int
    symbols: tuple


@dataclass
class DatabaseNode:
    """One replicated database: answers wire queries, counts its traffic."""

    node_id: int
    store: MessageStore
    answered: int = 0

    def answer(self, queries: Sequence[WireQuery]) -> AnswerString:
        p = self.store.p
        symbols = []
        for query in queries:
            total = 0
            for message, position in query.terms:
                total += self.store.symbol(message, position)
            symbols.append(total % p)
        self.answered += len(symbols)
        return AnswerString(database=self.node_id, symbols=tuple(symbols))


def make_nodes(store: MessageStore, num_databases: int) -> list:
    """Replicated nodes sharing one read-only store."""
    return [DatabaseNode(node_id=db, store=store)
            for db in range(1, num_databases + 1)]


@dataclass(frozen=True)
class WireView:
    """Shuffled, permutation-applied queries plus the canonical order map."""

    queries_by_db: tuple
    wire_position: tuple  # per db: canonical index -> wire index


def make_wire_view(plan: QueryPlan, perms: Sequence[Permutation],
                   rng: Optional[random.Random] = None) -> WireView:
    """Apply private permutations and the per-database uniform shuffle."""
    if rng is None:
        rng = random.Random(plan.seed)
    queries_by_db = []
    positions = []
    for db in range(1, plan.num_databases + 1):
        canonical = plan.database_queries(db)
        order = list(range(len(canonical)))
        rng.shuffle(order)
        wire = [None] * len(canonical)
        pos = [0] * len(canonical)
        for wire_idx, canon_idx in enumerate(order):
            query = canonical[canon_idx]
            wire[wire_idx] = WireQuery(terms=tuple(
                (m, perms[m - 1].apply(i)) for m, i in query.terms))
            pos[canon_idx] = wire_idx
        queries_by_db.append(tuple(wire))
        positions.append(tuple(pos))
    return WireView(queries_by_db=tuple(queries_by_db),
                    wire_position=tuple(positions))


@dataclass(frozen=True)
class RetrievalResult:
    """Decoded message plus exact traffic accounting."""

    decoded: tuple
    per_db_traffic: tuple
    total_download: int
    achieved_rate: Fraction


def _collect_answers(nodes: Sequence[DatabaseNode], view: WireView,
                     parallel: bool) -> list:
    if parallel:
        with ThreadPoolExecutor(max_workers=len(nodes)) as pool:
            futures = [pool.submit(node.answer, view.queries_by_db[i])
                       for i, node in enumerate(nodes)]
            answers = [f.result() for f in futures]
    else:
        answers = [node.answer(view.queries_by_db[i])
                   for i, node in enumerate(nodes)]
    answers.sort(key=lambda a: a.database)
    return answers


def retrieve(plan: QueryPlan, decode_map: DecodeMap,
             nodes: Sequence[DatabaseNode], perms: Sequence[Permutation],
             rng: Optional[random.Random] = None,
             parallel: bool = False) -> RetrievalResult:
    """Run the plan end to end and decode the desired message exactly.

    The decode map must come from the same synthesis as the plan; a
    reference to an unqueried answer is a synthesis bug and raises.
    """
    store = nodes[0].store
    if store.length != plan.message_length:
        raise ValueError(
            f"store length {store.length} does not match the plan's "
            f"message length {plan.message_length}")
    if len(nodes) != plan.num_databases:
        raise ValueError("node count does not match the plan")
    if store.p != plan.prime:
        raise ValueError("store field does not match the plan")

    view = make_wire_view(plan, perms, rng)
    answers = _collect_answers(nodes, view, parallel)

    p = plan.prime

    def answered(ref):
        wire_idx = view.wire_position[ref.database - 1][ref.position]
        return answers[ref.database - 1].symbols[wire_idx]

    desired = decode_map.desired
    permuted = [None] * plan.message_length
    for entry in decode_map.entries:
        value = answered(entry.query)
        for ref in entry.side_info:
            value -= answered(ref)
        permuted[entry.symbol - 1] = value % p
    if any(v is None for v in permuted):
        raise RuntimeError("decode map does not cover every desired symbol")

    perm = perms[desired - 1]
    decoded = [0] * plan.message_length
    for idx, value in enumerate(permuted, start=1):
        decoded[perm.apply(idx) - 1] = value

    traffic = tuple(len(q) for q in view.queries_by_db)
    total = sum(traffic)
    return RetrievalResult(
        decoded=tuple(decoded),
        per_db_traffic=traffic,
        total_download=total,
        achieved_rate=Fraction(plan.message_length, total),
    )


@dataclass(frozen=True)
class TrialFailure:
    trial: int
    seed: int
    reason: str


@dataclass(frozen=True)
class HarnessReport:
    """Aggregate of repeated randomized retrievals against one plan family."""

    source: str
    trials: int
    failures: tuple
    tau_expected: tuple
    tau_measured: tuple
    rate_expected: Fraction
    rate_measured: Optional[Fraction]
    per_db_traffic: tuple

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json_dict(self) -> dict:
        return {
            "source": self.source,
            "trials": self.trials,
            "failures": [
                {"trial": f.trial, "seed": f.seed, "reason": f.reason}
                for f in self.failures
            ],
            "tau_expected": [str(t) for t in self.tau_expected],
            "tau_measured": [str(t) for t in self.tau_measured],
            "rate_expected": str(self.rate_expected),
            "rate_measured": (str(self.rate_measured)
                              if self.rate_measured is not None else None),
            "per_db_traffic": list(self.per_db_traffic),
            "ok": self.ok,
        }


@dataclass(frozen=True)
class PlanRequest:
    """Resolved harness target: plans per desired index plus exact expectations."""

    plans: dict
    expected_traffic: tuple
    expected_rate: Fraction
    expected_downloads: tuple
    source: str


def resolve_corner_request(spec: SchemeSpec, prime: int = DEFAULT_PRIME,
                           seed: int = 0) -> PlanRequest:
    point = corner_point(spec)
    plans = {d: synthesize(spec, d, seed=seed, prime=prime)
             for d in range(1, spec.num_messages + 1)}
    return PlanRequest(plans=plans, expected_traffic=point.traffic.shares,
                       expected_rate=point.rate,
                       expected_downloads=point.downloads,
                       source=f"corner {spec.label()}")


def resolve_target_request(num_messages: int, target: TrafficVector,
                           prime: int = DEFAULT_PRIME,
                           seed: int = 0) -> PlanRequest:
    mix = best_rate(num_messages, target.num_databases, target)
    reps = mix.repetitions()
    components = [(mix.corners[i].spec, reps[i]) for i in mix.support]
    plans = {}
    for d in range(1, num_messages + 1):
        parts = [(*synthesize(spec, d, seed=seed, prime=prime), count)
                 for spec, count in components]
        plans[d] = concatenate(parts)
    downloads = tuple(plans[1][0].downloads)
    total = sum(downloads)
    return PlanRequest(
        plans=plans,
        expected_traffic=tuple(Fraction(t, total) for t in downloads),
        expected_rate=Fraction(plans[1][0].message_length, total),
        expected_downloads=downloads,
        source=plans[1][0].source,
    )


def run_harness(request: PlanRequest, trials: int, seed: int = 0,
                parallel: bool = False) -> HarnessReport:
    """Randomized end-to-end trials: decode, traffic, and rate must be exact.

    Each trial draws a fresh store, fresh private permutations, a fresh
    shuffle, and a uniform desired index.  The first failure aborts the run
    and is reported with its trial seed.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    sample = next(iter(request.plans.values()))[0]
    m = sample.num_messages
    length = sample.message_length
    n = sample.num_databases
    prime = sample.prime

    master = random.Random(seed)
    failures = []
    measured_traffic = None
    measured_rate = None
    done = 0
    for trial in range(trials):
        trial_seed = master.randrange(2 ** 63)
        rng = random.Random(trial_seed)
        desired = rng.randrange(1, m + 1)
        store = make_store(m, length, p=prime, seed=rng.randrange(2 ** 63))
        perms = random_permutations(m, length, rng)
        plan, dmap = request.plans[desired]
        nodes = make_nodes(store, n)
        result = retrieve(plan, dmap, nodes, perms, rng=rng,
                          parallel=parallel)
        done += 1
        measured_traffic = result.per_db_traffic
        measured_rate = result.achieved_rate
        reason = None
        if result.decoded != store.messages[desired - 1]:
            reason = "decoded message differs from the store"
        elif result.per_db_traffic != request.expected_downloads:
            reason = (f"per-database traffic {result.per_db_traffic} != "
                      f"expected {request.expected_downloads}")
        elif result.achieved_rate != request.expected_rate:
            reason = (f"achieved rate {result.achieved_rate} != "
                      f"expected {request.expected_rate}")
        if reason is not None:
            failures.append(TrialFailure(trial=trial, seed=trial_seed,
                                         reason=reason))
            break

    total = sum(measured_traffic)
    tau_measured = tuple(Fraction(t, total) for t in measured_traffic)
    return HarnessReport(
        source=request.source,
        trials=done,
        failures=tuple(failures),
        tau_expected=request.expected_traffic,
        tau_measured=tau_measured,
        rate_expected=request.expected_rate,
        rate_measured=measured_rate,
        per_db_traffic=measured_traffic,
    )
