"""Service operations: the one implementation behind endpoints and CLI."""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Union

from ..bounds import sweep, sweep_csv, upper_bound
from ..checks import (check_capacity_match, check_privacy_shape,
                      check_query_distribution, check_view_invariance,
                      oracle_agrees_with_client)
from ..fields import make_store, random_permutations
from ..plans import (decode_to_json_dict, plan_to_json_dict, render_table,
                     synthesize)
from ..simulate import (resolve_corner_request, resolve_target_request,
                        run_harness)
from ..stages import SchemeSpec, TrafficVector, enumerate_corners
from . import models

import random


def _parse_traffic(tau: Optional[Union[str, List[str]]],
                   ratios: Optional[Union[str, List[str]]]) -> TrafficVector:
    if (tau is None) == (ratios is None):
        raise ValueError("give exactly one of tau or lambda")
    if tau is not None:
        if isinstance(tau, str):
            return TrafficVector.parse(tau)
        return TrafficVector(tuple(Fraction(v) for v in tau))
    if isinstance(ratios, str):
        return TrafficVector.parse_ratios(ratios)
    return TrafficVector.from_ratios([Fraction(v) for v in ratios])


def _spec_from(profile: List[int], n: Optional[int]) -> SchemeSpec:
    databases = n if n is not None else max(profile)
    return SchemeSpec(len(profile), databases, tuple(profile))


def corners_op(req: models.CornersRequest) -> models.CornersResponse:
    out = []
    for corner in enumerate_corners(req.m, req.n):
        data = corner.to_json_dict()
        out.append(models.CornerModel(rate_float=float(corner.rate), **data))
    return models.CornersResponse(corners=out)


def bound_op(req: models.BoundRequest) -> models.BoundResponse:
    traffic = _parse_traffic(req.tau, req.ratios)
    result = upper_bound(traffic, req.m, exhaustive=req.exhaustive,
                         keep_branches=req.branches)
    branches = None
    if result.branches is not None:
        branches = {",".join(str(v) for v in seq): str(val)
                    for seq, val in sorted(result.branches.items())}
    return models.BoundResponse(
        value=str(result.value),
        value_float=float(result.value),
        argmin=list(result.argmin),
        branches=branches,
    )


def synth_op(req: models.SynthRequest) -> models.SynthResponse:
    spec = _spec_from(req.spec, req.n)
    plan, dmap = synthesize(spec, req.desired, seed=req.seed, prime=req.p)
    rate = Fraction(plan.message_length, plan.total_download)
    return models.SynthResponse(
        plan=models.PlanModel(**plan_to_json_dict(plan)),
        decode=models.DecodeModel(**decode_to_json_dict(dmap)),
        table=render_table(plan),
        downloads=list(plan.downloads),
        rate=str(rate),
        rate_float=float(rate),
    )


def run_op(req: models.RunRequest) -> models.RunResponse:
    if req.spec is not None:
        request = resolve_corner_request(_spec_from(req.spec, req.n),
                                         prime=req.p, seed=req.seed)
    else:
        if req.tau is None and req.ratios is None:
            raise ValueError(
                "give a corner profile (spec) or a traffic target (tau or "
                "lambda)")
        traffic = _parse_traffic(req.tau, req.ratios)
        request = resolve_target_request(req.m, traffic, prime=req.p,
                                         seed=req.seed)
    report = run_harness(request, trials=req.trials, seed=req.seed,
                         parallel=req.parallel)
    return models.RunResponse(**report.to_json_dict())


def _verify_specs(req: models.VerifyRequest) -> list:
    if req.spec is not None:
        return [_spec_from(req.spec, req.n)]
    return [c.spec for c in enumerate_corners(req.m, req.n)]


def verify_op(req: models.VerifyRequest) -> models.VerifyResponse:
    known = {"shape", "view", "oracle", "capacity", "distribution"}
    unknown = set(req.checks) - known
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    records = []
    specs = _verify_specs(req)
    if "shape" in req.checks:
        for spec in specs:
            records.append(check_privacy_shape(spec, prime=req.p)
                           .to_json_dict() | {"spec": list(spec.profile)})
    if "view" in req.checks:
        for spec in specs:
            record = check_view_invariance(spec, prime=req.p).to_json_dict()
            record["check"] = "view-invariance"
            records.append(record | {"spec": list(spec.profile)})
    if "oracle" in req.checks:
        rng = random.Random(req.seed)
        for spec in specs:
            agree = True
            for desired in range(1, spec.num_messages + 1):
                plan, dmap = synthesize(spec, desired, seed=req.seed,
                                        prime=req.p)
                store = make_store(spec.num_messages, plan.message_length,
                                   p=req.p, seed=rng.randrange(2 ** 32))
                perms = random_permutations(spec.num_messages, store.length,
                                            rng)
                agree = agree and oracle_agrees_with_client(
                    plan, dmap, store, perms, seed=req.seed)
            records.append({"check": "elimination-oracle",
                            "spec": list(spec.profile), "ok": agree})
    if "capacity" in req.checks and req.m in (2, 3):
        records.append(check_capacity_match(req.m, req.n, grid_points=25,
                                            seed=req.seed).to_json_dict())
    if "distribution" in req.checks:
        if req.samples < 1:
            raise ValueError("distribution check needs samples >= 1")
        for spec in specs:
            records.append(check_query_distribution(
                spec, samples=req.samples, seed=req.seed,
                threshold=req.threshold, prime=req.p).to_json_dict())
    ok = all(r.get("ok", True) for r in records)
    return models.VerifyResponse(records=records, ok=ok)


def sweep_op(req: models.SweepRequest) -> models.SweepResponse:
    rows = sweep(req.m, req.n, req.grid)
    return models.SweepResponse(csv=sweep_csv(rows), points=len(rows))
