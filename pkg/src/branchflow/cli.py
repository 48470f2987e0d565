"""Command-line interface.

``run`` executes a document in-process by default; with ``--server URL`` it
delegates to a running service instead and maps the response onto the same
exit codes. Exit status: 0 success, 1 validation or I/O error, 2 when an
analyzer check failed. The default tolerance may be set with the
BRANCHFLOW_TOLERANCE environment variable; ``--tolerance`` overrides it.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from .documents import parse, render
from .errors import BranchflowError
from .runner import emit, orchestrate

TOLERANCE_ENV = "BRANCHFLOW_TOLERANCE"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="branchflow",
        description="Run and analyze reversible-network circuit documents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a circuit document")
    run_p.add_argument("file", help="path to the circuit document")
    run_p.add_argument(
        "--emit", choices=("csv", "dot", "json"), default="json",
        help="output format (default json)",
    )
    run_p.add_argument("--tolerance", type=float, default=None)
    run_p.add_argument("--max-qubits", type=int, default=None)
    run_p.add_argument("--out", default=None, help="write output to a file")
    run_p.add_argument(
        "--server", default=None, metavar="URL",
        help="delegate to a running service instead of running in-process",
    )

    print_p = sub.add_parser("print", help="parse and pretty-print a document")
    print_p.add_argument("file")
    print_p.add_argument("--out", default=None)

    serve_p = sub.add_parser("serve", help="start the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    return parser


def _resolve_tolerance(explicit: Optional[float]) -> Optional[float]:
    if explicit is not None:
        return explicit
    raw = os.environ.get(TOLERANCE_ENV)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        raise BranchflowError(
            f"{TOLERANCE_ENV}={raw!r} is not a number"
        ) from None


def _write_output(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _run_remote(args, tolerance: Optional[float]) -> int:
    import httpx

    with open(args.file, "r", encoding="utf-8") as fh:
        text = fh.read()
    payload = {
        "document": text,
        "emit": args.emit,
        "tolerance": tolerance,
        "max_qubits": args.max_qubits,
    }
    resp = httpx.post(args.server.rstrip("/") + "/run", json=payload, timeout=300.0)
    resp.raise_for_status()
    body = resp.json()
    if not body.get("ok"):
        error = body.get("error") or {}
        sys.stderr.write(f"error: {error.get('message', 'unknown error')}\n")
        return 1
    _write_output(body.get("output") or "", args.out)
    return 0 if body.get("passed", True) else 2


def _cmd_run(args) -> int:
    tolerance = _resolve_tolerance(args.tolerance)
    if args.server:
        return _run_remote(args, tolerance)
    with open(args.file, "r", encoding="utf-8") as fh:
        text = fh.read()
    doc = parse(text)
    result = orchestrate(doc, tolerance=tolerance, max_qubits=args.max_qubits)
    _write_output(emit(result, args.emit), args.out)
    return 0 if result.passed else 2


def _cmd_print(args) -> int:
    with open(args.file, "r", encoding="utf-8") as fh:
        text = fh.read()
    _write_output(render(parse(text)), args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "print":
            return _cmd_print(args)
        return _cmd_serve(args)
    except BranchflowError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
