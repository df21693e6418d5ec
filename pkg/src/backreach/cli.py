"""Command-line front end: a thin client of the analysis service.

Requests go over HTTP to a running service when --server is given; otherwise
the service app is mounted in-process through an ASGI transport, so the CLI
works standalone with identical request/response semantics.

Exit status: 0 = feasible/success, 2 = analysis completed but infeasible (or
a simulated constraint violation), 1 = usage, parse or internal error.
Diagnostics go to stderr; data goes to files or stdout.
"""

from __future__ import annotations

import argparse
import asyncio
import base64
import json
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


def _post(server: str | None, endpoint: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=300.0) as client:
            return client.post(endpoint, json=payload)

    from .service.app import app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://backreach.local",
                                     timeout=300.0) as client:
            return await client.post(endpoint, json=payload)

    return asyncio.run(go())


def _read_model(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _err(f"cannot read model {path!r}: {exc.strerror or exc}")
        raise SystemExit(EXIT_ERROR)


def _err(message: str) -> None:
    print(f"backreach: {message}", file=sys.stderr)


def _report_http_error(resp: httpx.Response) -> int:
    try:
        detail = resp.json().get("detail")
    except Exception:
        detail = resp.text
    if isinstance(detail, dict):
        for d in detail.get("diagnostics", []):
            print(f"{d['line']}:{d['column']}: {d['severity']}: {d['message']}",
                  file=sys.stderr)
        _err(detail.get("message", "request failed"))
    else:
        _err(str(detail))
    return EXIT_ERROR


def _parse_init(text: str) -> tuple[float, float]:
    try:
        x1, x2 = (float(v) for v in text.split(","))
        return (x1, x2)
    except ValueError:
        _err(f"bad --init {text!r}: expected x1,x2")
        raise SystemExit(EXIT_ERROR)


def _parse_path(text: str) -> list[str]:
    path = [p.strip() for p in text.split(",") if p.strip()]
    if len(path) < 2:
        _err(f"bad --path {text!r}: expected at least two phase ids")
        raise SystemExit(EXIT_ERROR)
    return path


def _write(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        _err(f"cannot write {path!r}: {exc.strerror or exc}")
        raise SystemExit(EXIT_ERROR)


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args: argparse.Namespace) -> int:
    source = _read_model(args.model)
    payload = {
        "source": source,
        "path": _parse_path(args.path),
        "init": _parse_init(args.init) if args.init else None,
        "strategy": args.strategy,
        "dt": args.dt,
        "include_report": True,
        "include_svg": args.plot is not None,
    }
    resp = _post(args.server, "/check", payload)
    if resp.status_code != 200:
        return _report_http_error(resp)
    body = resp.json()
    if args.report:
        _write(args.report, body["report"].encode("utf-8"))
    if args.plot:
        _write(args.plot, body["svg"].encode("utf-8"))
    if body["feasible"]:
        print("feasible")
        if body.get("schedule") is not None:
            print(f"schedule time {body['total_time']:.6g}, "
                  f"final state ({body['final_state'][0]:.6g}, {body['final_state'][1]:.6g}), "
                  f"min margin {body['min_margin']:.3g}")
        return EXIT_OK
    idx = body.get("failing_index")
    where = f" at transition index {idx}" if idx is not None else ""
    print(f"infeasible{where}")
    return EXIT_INFEASIBLE


def cmd_search(args: argparse.Namespace) -> int:
    source = _read_model(args.model)
    payload = {
        "source": source,
        "src": args.src,
        "dst": args.dst,
        "max_len": args.max_len,
        "init": _parse_init(args.init) if args.init else None,
    }
    resp = _post(args.server, "/search", payload)
    if resp.status_code != 200:
        return _report_http_error(resp)
    body = resp.json()
    for path in body["paths"]:
        print(",".join(path))
    if not body["paths"]:
        print(f"no feasible path {body['src']} -> {body['dst']} "
              f"within {args.max_len} phases", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    source = _read_model(args.model)
    payload = {
        "source": source,
        "path": _parse_path(args.path),
        "init": _parse_init(args.init),
        "strategy": args.strategy,
    }
    resp = _post(args.server, "/synth", payload)
    if resp.status_code != 200:
        return _report_http_error(resp)
    body = resp.json()
    if not body["feasible"]:
        print("infeasible: no schedule synthesized", file=sys.stderr)
        return EXIT_INFEASIBLE
    _write(args.out, body["schedule"].encode("utf-8"))
    print(f"schedule written to {args.out} "
          f"(total time {body['total_time']:.6g})")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    source = _read_model(args.model)
    try:
        schedule = json.loads(Path(args.schedule).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        _err(f"cannot read schedule {args.schedule!r}: {exc}")
        return EXIT_ERROR
    payload = {"source": source, "schedule": schedule, "dt": args.dt}
    resp = _post(args.server, "/simulate", payload)
    if resp.status_code != 200:
        return _report_http_error(resp)
    body = resp.json()
    print(f"min margin {body['min_margin']:.6g}")
    print(f"final state ({body['final_state'][0]:.6g}, {body['final_state'][1]:.6g}) "
          f"in phase {body['final_phase']}")
    ok = body["constraint_respected"] and body["final_in_constraint"]
    if not ok:
        print("constraint violated during replay", file=sys.stderr)
    return EXIT_OK if ok else EXIT_INFEASIBLE


def cmd_plot(args: argparse.Namespace) -> int:
    source = _read_model(args.model)
    payload = {
        "source": source,
        "path": _parse_path(args.path),
        "init": _parse_init(args.init) if args.init else None,
    }
    resp = _post(args.server, "/plot", payload)
    if resp.status_code != 200:
        return _report_http_error(resp)
    _write(args.out, resp.json()["svg"].encode("utf-8"))
    print(f"figure written to {args.out}")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    source = _read_model(args.model)
    try:
        rect = tuple(float(v) for v in args.target.split(","))
        if len(rect) != 4:
            raise ValueError
    except ValueError:
        _err(f"bad --target {args.target!r}: expected x1_lo,x1_hi,x2_lo,x2_hi")
        return EXIT_ERROR
    payload = {
        "source": source,
        "phase": args.phase,
        "target_rect": rect,
        "resolution": args.res,
        "include_pgm": args.pgm is not None,
    }
    resp = _post(args.server, "/oracle", payload)
    if resp.status_code != 200:
        return _report_http_error(resp)
    body = resp.json()
    if args.pgm:
        _write(args.pgm, base64.b64decode(body["pgm_base64"]))
    if args.report:
        out = {
            "agreement": body["agreement"],
            "considered": body["considered"],
            "excluded": body["excluded"],
            "disagreements": body["disagreements"],
            "metadata": body["metadata"],
        }
        _write(args.report, json.dumps(out, indent=2).encode("utf-8"))
    print(f"agreement {body['agreement']:.4f} over {body['considered']} cells "
          f"({body['excluded']} near-boundary cells excluded)")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="backreach",
        description="Backward reachability and schedule synthesis for planar "
                    "hybrid automata.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--model", required=True, help="model file (.hyb)")
        p.add_argument("--server", default=None,
                       help="base URL of a running service (default: in-process)")

    p = sub.add_parser("check", help="analyze a discrete path")
    common(p)
    p.add_argument("--path", required=True, help="comma-separated phase ids")
    p.add_argument("--init", default=None, help="start state x1,x2")
    p.add_argument("--report", default=None, help="write the JSON report here")
    p.add_argument("--plot", default=None, help="write an SVG figure here")
    p.add_argument("--strategy", default="asap", help="switching strategy")
    p.add_argument("--dt", type=float, default=1e-3, help="simulation sample step")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("search", help="enumerate feasible paths")
    common(p)
    p.add_argument("--from", dest="src", default=None, help="start phase id")
    p.add_argument("--to", dest="dst", default=None, help="goal phase id")
    p.add_argument("--max-len", type=int, default=8, help="maximum path length")
    p.add_argument("--init", default=None, help="start state x1,x2")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("synth", help="synthesize a switching schedule")
    common(p)
    p.add_argument("--path", required=True, help="comma-separated phase ids")
    p.add_argument("--init", required=True, help="start state x1,x2")
    p.add_argument("--out", required=True, help="schedule file to write")
    p.add_argument("--strategy", default="asap", help="switching strategy")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simulate", help="replay a schedule and report margins")
    common(p)
    p.add_argument("--schedule", required=True, help="schedule file (JSON)")
    p.add_argument("--dt", type=float, default=1e-3, help="sample step")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("plot", help="render regions and trajectories")
    common(p)
    p.add_argument("--path", required=True, help="comma-separated phase ids")
    p.add_argument("--init", default=None, help="start state x1,x2")
    p.add_argument("--out", required=True, help="SVG file to write")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("oracle", help="grid reachability dump and agreement")
    common(p)
    p.add_argument("--phase", required=True, help="phase id")
    p.add_argument("--target", required=True,
                   help="target rectangle x1_lo,x1_hi,x2_lo,x2_hi")
    p.add_argument("--res", type=float, default=0.01, help="grid resolution")
    p.add_argument("--pgm", default=None, help="write the PGM indicator here")
    p.add_argument("--report", default=None, help="write the agreement JSON here")
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    except httpx.HTTPError as exc:
        _err(f"request failed: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
