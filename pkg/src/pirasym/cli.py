"""Command-line client for the retrieval toolkit.

Every subcommand builds the same request model the HTTP service accepts.
By default the request is served in process; ``--server URL`` sends it to a
running service instead, so the CLI stays a thin client either way.

Rates and shares are printed both as exact fractions and 6-decimal floats.
``PIR_ASYM_SEED`` provides the seed when ``--seed`` is omitted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Optional

from .service import models, ops


def _env_seed() -> int:
    value = os.environ.get("PIR_ASYM_SEED")
    if value is None:
        return 0
    try:
        return int(value)
    except ValueError:
        raise SystemExit(f"PIR_ASYM_SEED must be an integer, got {value!r}")


def _seed(args) -> int:
    return args.seed if args.seed is not None else _env_seed()


class Client:
    """Dispatches requests locally or to a remote service."""

    def __init__(self, server: Optional[str]):
        self.server = server.rstrip("/") if server else None

    def call(self, path: str, op, request):
        if self.server is None:
            return op(request).model_dump(by_alias=False)
        import httpx
        response = httpx.post(f"{self.server}/{path}",
                              json=request.model_dump(mode="json"),
                              timeout=300.0)
        if response.status_code >= 400:
            raise SystemExit(f"service error {response.status_code}: "
                             f"{response.text}")
        return response.json()


def _rate_cell(text: str) -> str:
    return f"{text} ({float(Fraction(text)):.6f})"


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _corners_table(data: dict) -> str:
    headers = ["spec", "tau", "rate", "t", "L"]
    rows = []
    for corner in data["corners"]:
        rows.append([
            ",".join(str(v) for v in corner["n"]),
            " ".join(_rate_cell(t) for t in corner["tau"]),
            _rate_cell(corner["rate"]),
            ",".join(str(v) for v in corner["t"]),
            str(corner["L"]),
        ])
    widths = [max(len(headers[i]), *(len(r[i]) for r in rows))
              for i in range(len(headers))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)


def _corners_csv(data: dict) -> str:
    lines = ["spec,tau,rate,t,L"]
    for corner in data["corners"]:
        lines.append(",".join([
            ";".join(str(v) for v in corner["n"]),
            ";".join(corner["tau"]),
            corner["rate"],
            ";".join(str(v) for v in corner["t"]),
            str(corner["L"]),
        ]))
    return "\n".join(lines) + "\n"


def cmd_corners(args) -> int:
    client = Client(args.server)
    data = client.call("corners", ops.corners_op,
                       models.CornersRequest(m=args.m, n=args.n))
    if args.format == "json":
        _emit(args, json.dumps(data, indent=2))
    elif args.format == "csv":
        _emit(args, _corners_csv(data))
    else:
        _emit(args, _corners_table(data))
    return 0


def cmd_bound(args) -> int:
    client = Client(args.server)
    request = models.BoundRequest(m=args.m, tau=args.tau, ratios=args.ratios,
                                  exhaustive=args.exhaustive,
                                  branches=args.branches)
    data = client.call("bound", ops.bound_op, request)
    if args.format == "json":
        _emit(args, json.dumps(data, indent=2))
    else:
        lines = [f"bound = {_rate_cell(data['value'])}",
                 "argmin = " + ",".join(str(v) for v in data["argmin"])]
        if data.get("branches"):
            lines.append("branches:")
            for seq, val in data["branches"].items():
                lines.append(f"  ({seq}) -> {_rate_cell(val)}")
        _emit(args, "\n".join(lines))
    return 0


def cmd_synth(args) -> int:
    client = Client(args.server)
    request = models.SynthRequest(spec=_parse_spec(args.spec), n=args.n,
                                  desired=args.desired, p=args.p,
                                  seed=_seed(args))
    data = client.call("synth", ops.synth_op, request)
    if args.format == "table":
        lines = [data["table"], "",
                 f"downloads = {data['downloads']}  "
                 f"L = {data['plan']['L']}  rate = {_rate_cell(data['rate'])}"]
        _emit(args, "\n".join(lines))
    else:
        _emit(args, json.dumps(data, indent=2))
    return 0


def cmd_run(args) -> int:
    client = Client(args.server)
    request = models.RunRequest(
        m=args.m, n=args.n,
        spec=_parse_spec(args.spec) if args.spec else None,
        tau=args.tau, ratios=args.ratios, p=args.p, trials=args.trials,
        seed=_seed(args), parallel=args.parallel)
    data = client.call("run", ops.run_op, request)
    if args.format == "table":
        lines = [
            f"source         {data['source']}",
            f"trials         {data['trials']}",
            f"tau measured   {' '.join(_rate_cell(t) for t in data['tau_measured'])}",
            f"rate measured  {_rate_cell(data['rate_measured'])}",
            f"per-db traffic {data['per_db_traffic']}",
            f"ok             {data['ok']}",
        ]
        if data["failures"]:
            lines.append(f"failures       {data['failures']}")
        _emit(args, "\n".join(lines))
    else:
        _emit(args, json.dumps(data, indent=2))
    return 0 if data["ok"] else 1


def cmd_verify(args) -> int:
    client = Client(args.server)
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    if args.samples and "distribution" not in checks:
        checks.append("distribution")
    request = models.VerifyRequest(
        m=args.m, n=args.n,
        spec=_parse_spec(args.spec) if args.spec else None,
        checks=checks, samples=args.samples, threshold=args.threshold,
        p=args.p, seed=_seed(args))
    data = client.call("verify", ops.verify_op, request)
    lines = [json.dumps(record, sort_keys=True)
             for record in data["records"]]
    lines.append(json.dumps({"summary": True, "ok": data["ok"]}))
    _emit(args, "\n".join(lines))
    return 0 if data["ok"] else 1


def cmd_sweep(args) -> int:
    client = Client(args.server)
    request = models.SweepRequest(m=args.m, n=args.n, grid=args.grid)
    data = client.call("sweep", ops.sweep_op, request)
    if args.format == "json":
        _emit(args, json.dumps(data, indent=2))
    else:
        _emit(args, data["csv"])
    return 0


def cmd_serve(args) -> int:
    import uvicorn
    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _parse_spec(text: str) -> list:
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise SystemExit(f"bad profile {text!r}: expected e.g. 1,2,2")


def _add_common(parser, seed=False, fmt=None, out=False):
    parser.add_argument("--server", default=None,
                        help="URL of a running service; default runs in process")
    if seed:
        parser.add_argument("--seed", type=int, default=None,
                            help="RNG seed (falls back to PIR_ASYM_SEED, then 0)")
    if fmt:
        parser.add_argument("--format", choices=fmt, default=fmt[0])
    if out:
        parser.add_argument("--out", default=None, help="write output to a file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pir-asym",
        description="Retrieval schemes and capacity bounds for replicated "
                    "databases under asymmetric traffic constraints.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("corners", help="list all corner points for (M, N)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    _add_common(p, fmt=("table", "json", "csv"), out=True)
    p.set_defaults(fn=cmd_corners)

    p = sub.add_parser("bound", help="capacity upper bound at one traffic vector")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--tau", default=None, help='exact shares, e.g. "4/7,3/7"')
    p.add_argument("--lambda", dest="ratios", default=None,
                   help='first-database-normalized form, e.g. "1,3/4"')
    p.add_argument("--exhaustive", action="store_true",
                   help="minimize over all branch sequences, not just monotone")
    p.add_argument("--branches", action="store_true",
                   help="include every branch value in the output")
    _add_common(p, fmt=("table", "json"), out=True)
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser("synth", help="synthesize the query plan of a corner")
    p.add_argument("--spec", required=True, help='profile, e.g. "1,2,2"')
    p.add_argument("--n", type=int, default=None,
                   help="database count (default: max profile entry)")
    p.add_argument("--desired", type=int, default=1)
    p.add_argument("--p", type=int, default=2, help="field modulus (prime)")
    _add_common(p, seed=True, fmt=("table", "json"), out=True)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("run", help="simulate retrievals and check exactness")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--spec", default=None, help="corner profile to run")
    p.add_argument("--tau", default=None, help="traffic target to time-share")
    p.add_argument("--lambda", dest="ratios", default=None)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--parallel", action="store_true",
                   help="serve databases from worker threads")
    _add_common(p, seed=True, fmt=("json", "table"), out=True)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("verify", help="run verification checks (JSON lines)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--spec", default=None,
                   help="single profile (default: all corners)")
    p.add_argument("--checks", default="shape,view,oracle,capacity")
    p.add_argument("--samples", type=int, default=0,
                   help="enable the sampled distribution check")
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--p", type=int, default=2)
    _add_common(p, seed=True, out=True)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("sweep", help="bound vs achievable over a traffic grid")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=int, default=51)
    _add_common(p, fmt=("csv", "json"), out=True)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
