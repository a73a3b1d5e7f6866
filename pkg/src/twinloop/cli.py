"""Command-line client for the benchmark service.

Subcommands build the same request models the HTTP API accepts and execute
them in-process by default; pass --server to send them to a running service
instead. Exit code 0 on success, nonzero with a diagnostic on any error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import TwinloopError
from .service import schemas


def _parse_overrides(items: list[str]) -> dict[str, str]:
    overrides = {}
    for item in items or []:
        if "=" not in item:
            raise TwinloopError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        overrides[key] = value
    return overrides


def _parse_scenarios(text: str) -> list[int]:
    if text == "all":
        return list(range(1, 11))
    return [int(tok) for tok in text.split(",")]


def _parse_controllers(text: str) -> list[str]:
    if text == "all":
        return ["zsl-dt", "static", "supervised"]
    return text.split(",")


class _RemoteClient:
    def __init__(self, base_url: str) -> None:
        import httpx

        self._client = httpx.Client(base_url=base_url, timeout=3600.0)

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code != 200:
            raise TwinloopError(f"server error {resp.status_code}: {resp.text}")
        return resp.json()


def _cmd_run(args: argparse.Namespace) -> int:
    req = schemas.RunRequest(
        scenarios=_parse_scenarios(args.scenario),
        controllers=_parse_controllers(args.controller),
        seed=args.seed,
        horizon=args.horizon,
        out_dir=args.out,
        report_format=args.format,
        export_telemetry=args.export_telemetry,
        overrides=_parse_overrides(args.override),
    )
    if args.server:
        doc = _RemoteClient(args.server).post("/runs", req.model_dump())
        files, wall = doc["report_files"], doc["wall_clock_s"]
        reports = doc["reports"]
    else:
        from .service.app import execute_run

        payload, files, wall = execute_run(req)
        reports = payload["reports"]
    for rep in reports:
        rt = rep["response_time"]
        mean = "-" if rt["mean_s"] is None else f"{rt['mean_s']:.2f}s"
        print(
            f"scenario {rep['scenario']:>2} {rep['controller']:<10} "
            f"response={mean} missed={rt['missed']} "
            f"sla_violation={rep['sla']['violation_rate']:.3f} "
            f"overhead/decision={rep['overhead']['per_decision_units']:.0f}"
        )
    for path in files:
        print(f"report: {path}")
    print(f"wall-clock: {wall:.1f}s")
    return 0


def _cmd_train(kind: str, args: argparse.Namespace) -> int:
    req = schemas.TrainRequest(kind=kind, out_path=args.out,
                               overrides=_parse_overrides(args.override))
    if args.server:
        doc = _RemoteClient(args.server).post("/train", req.model_dump())
    else:
        from .service.app import execute_train

        payload, wall = execute_train(req)
        doc = {**payload, "wall_clock_s": wall}
    print(json.dumps(doc["summary"], indent=2, sort_keys=True))
    print(f"model written to {doc['out_path']} ({doc['wall_clock_s']:.1f}s)")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    if args.server:
        doc = _RemoteClient(args.server).post("/validate", {})
        checks = doc["checks"]
    else:
        from .harness.validate import run_validation

        checks = run_validation()
    failed = 0
    for check in checks:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"[{status}] {check['name']}: {check['detail']}")
        failed += 0 if check["passed"] else 1
    return 1 if failed else 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twinloop",
        description="Deterministic benchmark for twin-assisted network management",
    )
    parser.add_argument("--server", default="", help="run against a remote service URL")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute scenario x controller runs")
    run.add_argument("--scenario", default="all", help="1..10, comma list, or 'all'")
    run.add_argument("--controller", default="all",
                     help="zsl-dt|static|supervised, comma list, or 'all'")
    run.add_argument("--seed", type=int, default=7)
    run.add_argument("--horizon", type=int, default=3000)
    run.add_argument("--out", default="out")
    run.add_argument("--format", choices=("csv", "json"), default="json")
    run.add_argument("--export-telemetry", action="store_true")
    run.add_argument("--override", action="append", default=[], metavar="K=V")
    run.set_defaults(func=_cmd_run)

    for kind in ("twin", "encoder", "baseline"):
        p = sub.add_parser(f"train-{kind}", help=f"train the {kind} model file")
        p.add_argument("--out", required=True)
        p.add_argument("--override", action="append", default=[], metavar="K=V")
        p.set_defaults(func=lambda a, k=kind: _cmd_train(k, a))

    val = sub.add_parser("validate", help="run the invariant suite")
    val.set_defaults(func=_cmd_validate)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8700)
    serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TwinloopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
