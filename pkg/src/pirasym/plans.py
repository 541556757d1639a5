"""Query-plan synthesis: turn a corner profile into executable query tables.

A plan is built round by round.  Round ``k`` queries are sums of ``k``
distinct-message symbols; a *stage* of round ``k`` is a block containing all
C(M, k) message subsets exactly once, which is what makes the structure
independent of the desired index.  Stages are created from three sources:

* round 1: each group-0 database opens with the solved number of stages of
  fresh singletons;
* regular: every stage completed in round ``k-1`` at some other database
  seeds one round-``k`` stage here, consuming that stage's undesired sums as
  side information (one fresh desired symbol added to each);
* entry: a group of depth ``l >= 2`` enters at round ``l+1`` with a one-time
  batch of stages whose side information is packed from the round-1
  undesired singletons of group 0, ``l`` singletons per query.

Side-information pairing is deterministic: regular sources are consumed in
(source database, stage ordinal) order before which entry stages are emitted
first; message subsets run in lexicographic order inside every stage; packed
singletons are taken per message in (source database, stage ordinal) order.
Symbol indices count up per message in allocation order, so the rendered
tables match the hand-built ones symbol for symbol.  The uniform shuffle of
the query order is applied at wire serialization with the recorded seed;
everything here is the canonical (unshuffled) plan.

The decode map stays on the client side: the plan handed to databases never
identifies the desired message.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Optional, Sequence

from .fields import DEFAULT_PRIME
from .mixing import best_rate
from .stages import SchemeSpec, TrafficVector, solve_stages


@dataclass(frozen=True)
class Query:
    """One download: a sum of symbols from distinct messages.

    ``terms`` are (message, symbol) pairs, 1-based, sorted by message; the
    round index is the term count.
    """

    terms: tuple

    def __post_init__(self):
        terms = tuple(sorted((int(m), int(i)) for m, i in self.terms))
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise ValueError("query needs at least one term")
        messages = [m for m, _ in terms]
        if len(set(messages)) != len(messages):
            raise ValueError(f"query mixes one message twice: {terms}")

    @property
    def round(self) -> int:
        return len(self.terms)

    def messages(self) -> tuple:
        return tuple(m for m, _ in self.terms)


@dataclass(frozen=True)
class QueryRef:
    """Canonical-order position of a query: database 1-based, position 0-based."""

    database: int
    position: int


@dataclass(frozen=True)
class DecodeEntry:
    """How one desired symbol is recovered.

    The answered value of ``query`` minus the answered values of the
    ``side_info`` queries equals desired symbol ``symbol`` (allocation
    order).  Side-information references are always plain answer positions:
    either the single undesired query whose sum is embedded here, or the
    round-1 singletons an entry query packed together.
    """

    symbol: int
    query: QueryRef
    side_info: tuple


@dataclass(frozen=True)
class DecodeMap:
    desired: int
    entries: tuple


@dataclass(frozen=True)
class QueryPlan:
    """Per-database canonical query lists plus provenance.

    ``message_length`` is the number of desired symbols the plan decodes,
    which is also the store length the plan requires.  The shuffle seed is
    recorded for wire serialization; the desired index is deliberately not
    part of the plan.
    """

    num_messages: int
    num_databases: int
    prime: int
    profile: Optional[tuple]
    source: str
    seed: int
    message_length: int
    queries: tuple

    @property
    def downloads(self) -> tuple:
        return tuple(len(qs) for qs in self.queries)

    @property
    def total_download(self) -> int:
        return sum(self.downloads)

    def database_queries(self, database: int) -> tuple:
        return self.queries[database - 1]

    def query_at(self, ref: QueryRef) -> Query:
        return self.queries[ref.database - 1][ref.position]


@dataclass(frozen=True)
class LengthBudget:
    """Symbol budgets required of a store before synthesis.

    Every message must be ``message_length`` symbols long; the desired
    message consumes all of them, each other message consumes
    ``undesired_symbols`` of its own.
    """

    message_length: int
    desired_symbols: int
    undesired_symbols: int


def required_length(spec: SchemeSpec) -> LengthBudget:
    """Exact symbol budgets for one corner profile."""
    counts = solve_stages(spec)
    m = spec.num_messages
    desired = 0
    undesired = 0
    for group in spec.groups():
        for k in range(1, m + 1):
            stages = counts.stages(group.depth, k) * group.size
            desired += comb(m - 1, k - 1) * stages
            if m >= 2:
                undesired += comb(m - 2, k - 1) * stages
    return LengthBudget(message_length=desired, desired_symbols=desired,
                        undesired_symbols=undesired)


def required_length_mixture(components: Sequence) -> LengthBudget:
    """Summed budgets for repeated corner profiles ``(spec, repetitions)``."""
    desired = 0
    undesired = 0
    for spec, reps in components:
        budget = required_length(spec)
        desired += reps * budget.desired_symbols
        undesired += reps * budget.undesired_symbols
    return LengthBudget(message_length=desired, desired_symbols=desired,
                        undesired_symbols=undesired)


def synthesize(spec: SchemeSpec, desired: int, seed: int = 0,
               prime: int = DEFAULT_PRIME):
    """Build the canonical plan and decode map for one corner profile.

    The realized stage counts are checked against the solved recurrence; a
    mismatch is a synthesis bug and raises ``RuntimeError``.
    """
    m, n = spec.num_messages, spec.num_databases
    if not 1 <= desired <= m:
        raise ValueError(f"desired message must lie in 1..{m}")
    counts = solve_stages(spec)
    group_by_db = {}
    for group in spec.groups():
        for db in range(group.first, group.last + 1):
            group_by_db[db] = group

    fresh = [0] * (m + 1)
    queries = {db: [] for db in range(1, n + 1)}
    entries = []
    pool = {msg: [] for msg in range(1, m + 1) if msg != desired}

    def add_query(db, terms):
        ref = QueryRef(database=db, position=len(queries[db]))
        queries[db].append(Query(terms))
        return ref

    def emit_stage(db, k, side_lookup):
        record = {}
        for subset in combinations(range(1, m + 1), k):
            if desired in subset:
                fresh[desired] += 1
                symbol = fresh[desired]
                others = tuple(v for v in subset if v != desired)
                si_terms, si_refs = side_lookup(others)
                ref = add_query(db, ((desired, symbol),) + si_terms)
                entries.append(DecodeEntry(symbol=symbol, query=ref,
                                           side_info=si_refs))
            else:
                terms = []
                for msg in subset:
                    fresh[msg] += 1
                    terms.append((msg, fresh[msg]))
                record[frozenset(subset)] = add_query(db, tuple(terms))
        return record

    def fresh_lookup(others):
        if others:
            raise RuntimeError("round 1 has no side information")
        return (), ()

    prev_stages = []
    for k in range(1, m + 1):
        current = []
        for db in range(1, n + 1):
            group = group_by_db.get(db)
            if group is None or k <= group.depth:
                continue
            made = 0
            if k == 1:
                for _ in range(counts.stages(0, 1)):
                    current.append((db, emit_stage(db, 1, fresh_lookup)))
                    made += 1
            else:
                if group.depth >= 2 and k == group.depth + 1:
                    taps = {msg: iter(items) for msg, items in pool.items()}

                    def packed_lookup(others, taps=taps):
                        refs = []
                        terms = []
                        for msg in others:
                            ref, term = next(taps[msg])
                            refs.append(ref)
                            terms.append(term)
                        return tuple(terms), tuple(refs)

                    batch = spec.profile[0] * counts.entry_factor[group.depth]
                    for _ in range(batch):
                        current.append((db, emit_stage(db, k, packed_lookup)))
                        made += 1
                for src_db, src_record in prev_stages:
                    if src_db == db:
                        continue

                    def stage_lookup(others, src_db=src_db,
                                     src_record=src_record):
                        ref = src_record[frozenset(others)]
                        return queries[src_db][ref.position].terms, (ref,)

                    current.append((db, emit_stage(db, k, stage_lookup)))
                    made += 1
            if made != counts.stages(group.depth, k):
                raise RuntimeError(
                    f"stage count mismatch at database {db} round {k}: "
                    f"made {made}, solved {counts.stages(group.depth, k)}")
        if k == 1:
            for db, record in current:
                for msg in pool:
                    ref = record[frozenset((msg,))]
                    pool[msg].append((ref, queries[db][ref.position].terms[0]))
        prev_stages = current

    budget = required_length(spec)
    if fresh[desired] != budget.message_length:
        raise RuntimeError("desired symbol allocation disagrees with budget")
    plan = QueryPlan(
        num_messages=m,
        num_databases=n,
        prime=prime,
        profile=spec.profile,
        source=f"corner {spec.label()}",
        seed=seed,
        message_length=fresh[desired],
        queries=tuple(tuple(queries[db]) for db in range(1, n + 1)),
    )
    return plan, DecodeMap(desired=desired, entries=tuple(entries))


def concatenate(components: Sequence):
    """Concatenate repeated plans over disjoint symbol ranges.

    ``components`` holds ``(plan, decode_map, repetitions)`` triples sharing
    message count, database count, field, and desired index.  Per-database
    traffic adds up, so the combined traffic vector is the download-weighted
    mixture of the parts.
    """
    parts = [(plan, dmap, int(reps)) for plan, dmap, reps in components]
    if not parts or all(reps == 0 for _, _, reps in parts):
        raise ValueError("nothing to concatenate")
    head = parts[0][0]
    desired = parts[0][1].desired
    for plan, dmap, reps in parts:
        if reps < 0:
            raise ValueError("repetitions must be non-negative")
        if (plan.num_messages, plan.num_databases, plan.prime) != \
                (head.num_messages, head.num_databases, head.prime):
            raise ValueError("plans disagree on messages, databases, or field")
        if dmap.desired != desired:
            raise ValueError("plans disagree on the desired message")

    m, n = head.num_messages, head.num_databases
    msg_offset = [0] * (m + 1)
    out_queries = [[] for _ in range(n)]
    out_entries = []
    labels = []
    for plan, dmap, reps in parts:
        if reps == 0:
            continue
        labels.append(f"{reps}x[{plan.source}]")
        used = [0] * (m + 1)
        for db_list in plan.queries:
            for query in db_list:
                for msg, idx in query.terms:
                    used[msg] = max(used[msg], idx)
        for _ in range(reps):
            base = list(msg_offset)
            starts = [len(out_queries[db]) for db in range(n)]

            def remap_ref(ref):
                return QueryRef(database=ref.database,
                                position=ref.position + starts[ref.database - 1])

            for db in range(n):
                for query in plan.queries[db]:
                    out_queries[db].append(Query(tuple(
                        (msg, idx + base[msg]) for msg, idx in query.terms)))
            for entry in dmap.entries:
                out_entries.append(DecodeEntry(
                    symbol=entry.symbol + base[desired],
                    query=remap_ref(entry.query),
                    side_info=tuple(remap_ref(r) for r in entry.side_info),
                ))
            for msg in range(1, m + 1):
                msg_offset[msg] += used[msg]

    length = msg_offset[desired]
    if any(msg_offset[msg] > length for msg in range(1, m + 1)):
        raise RuntimeError("symbol budget exceeds combined message length")
    plan = QueryPlan(
        num_messages=m,
        num_databases=n,
        prime=head.prime,
        profile=None,
        source="mixture " + " + ".join(labels),
        seed=head.seed,
        message_length=length,
        queries=tuple(tuple(qs) for qs in out_queries),
    )
    return plan, DecodeMap(desired=desired, entries=tuple(out_entries))


def plan_for_target(num_messages: int, target: TrafficVector, desired: int,
                    seed: int = 0, prime: int = DEFAULT_PRIME):
    """Plan hitting an arbitrary traffic target by time-sharing corners.

    Returns ``(plan, decode_map, mixture, components)`` where ``components``
    lists ``(corner, repetitions)`` with positive repetitions in solver
    order.
    """
    mix = best_rate(num_messages, target.num_databases, target)
    reps = mix.repetitions()
    components = [(mix.corners[i], reps[i]) for i in mix.support]
    parts = []
    for corner, count in components:
        plan, dmap = synthesize(corner.spec, desired, seed=seed, prime=prime)
        parts.append((plan, dmap, count))
    plan, dmap = concatenate(parts)
    return plan, dmap, mix, components


def stage_histogram(plan: QueryPlan) -> dict:
    """Stage counts per (database, round) recounted from the raw queries.

    Raises ``ValueError`` when some round's query count does not split into
    whole stages, which no well-formed plan does.
    """
    histogram = {}
    for db in range(1, plan.num_databases + 1):
        per_round = {}
        for query in plan.database_queries(db):
            per_round[query.round] = per_round.get(query.round, 0) + 1
        for k, count in per_round.items():
            block = comb(plan.num_messages, k)
            if count % block:
                raise ValueError(
                    f"database {db} round {k}: {count} queries is not a "
                    f"whole number of {block}-query stages")
            histogram[(db, k)] = count // block
    return histogram


def _symbol_name(message: int, index: int) -> str:
    if message <= 26:
        return f"{chr(ord('a') + message - 1)}{index}"
    return f"m{message}_{index}"


def render_query(query: Query) -> str:
    return "+".join(_symbol_name(m, i) for m, i in query.terms)


def render_table(plan: QueryPlan) -> str:
    """Text table: one column per database, row blocks per round."""
    per_db = []
    rounds = set()
    for db in range(1, plan.num_databases + 1):
        by_round = {}
        for query in plan.database_queries(db):
            by_round.setdefault(query.round, []).append(render_query(query))
        per_db.append(by_round)
        rounds.update(by_round)
    headers = [f"Database {db}" for db in range(1, plan.num_databases + 1)]
    blocks = []
    for k in sorted(rounds):
        height = max(len(by_round.get(k, [])) for by_round in per_db)
        rows = []
        for r in range(height):
            rows.append([
                by_round.get(k, [])[r] if r < len(by_round.get(k, [])) else ""
                for by_round in per_db
            ])
        blocks.append(rows)
    widths = [len(h) for h in headers]
    for rows in blocks:
        for row in rows:
            for i, cell in enumerate(row):
                widths[i] = max(widths[i], len(cell))
    rule = "-+-".join("-" * w for w in widths)
    lines = [" | ".join(h.ljust(w) for h, w in zip(headers, widths)), rule]
    for idx, rows in enumerate(blocks):
        if idx:
            lines.append(rule)
        for row in rows:
            lines.append(" | ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)


def plan_to_json_dict(plan: QueryPlan) -> dict:
    """Serialized plan: header plus per-database term arrays, 0-based."""
    return {
        "M": plan.num_messages,
        "N": plan.num_databases,
        "p": plan.prime,
        "spec": list(plan.profile) if plan.profile is not None else None,
        "source": plan.source,
        "seed": plan.seed,
        "L": plan.message_length,
        "databases": [
            [[{"m": m - 1, "i": i - 1} for m, i in q.terms] for q in db_list]
            for db_list in plan.queries
        ],
    }


def plan_from_json_dict(data: dict) -> QueryPlan:
    queries = tuple(
        tuple(Query(tuple((t["m"] + 1, t["i"] + 1) for t in q))
              for q in db_list)
        for db_list in data["databases"]
    )
    profile = data.get("spec")
    return QueryPlan(
        num_messages=data["M"],
        num_databases=data["N"],
        prime=data["p"],
        profile=tuple(profile) if profile is not None else None,
        source=data.get("source", ""),
        seed=data.get("seed", 0),
        message_length=data["L"],
        queries=queries,
    )


def decode_to_json_dict(dmap: DecodeMap) -> dict:
    return {
        "desired": dmap.desired - 1,
        "entries": [
            {
                "symbol": e.symbol - 1,
                "query": {"db": e.query.database - 1,
                          "position": e.query.position},
                "side_info": [
                    {"db": r.database - 1, "position": r.position}
                    for r in e.side_info
                ],
            }
            for e in dmap.entries
        ],
    }


def decode_from_json_dict(data: dict) -> DecodeMap:
    def ref(obj):
        return QueryRef(database=obj["db"] + 1, position=obj["position"])
    return DecodeMap(
        desired=data["desired"] + 1,
        entries=tuple(
            DecodeEntry(symbol=e["symbol"] + 1, query=ref(e["query"]),
                        side_info=tuple(ref(r) for r in e["side_info"]))
            for e in data["entries"]
        ),
    )
