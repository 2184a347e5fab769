"""Command-line client for the solver service.

Each subcommand builds a request from a config file or preset, executes it
(in process by default, or against a running server with --server), and
writes the returned artifacts plus the result record into --out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starkecs",
        description="Stark resonances by exterior complex scaling on a finite-element basis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_command(name: str, description: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=description)
        p.add_argument("--config", type=Path, help="YAML/JSON run configuration")
        p.add_argument("--preset", help="named preset (see `starkecs presets`)")
        p.add_argument("--out", type=Path, default=Path("runs") / name, help="output directory")
        p.add_argument("--server", help="base URL of a running service (default: run in process)")
        p.add_argument("--threads", type=int, help="BLAS thread count")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized validation checks")
        return p

    add_run_command("solve", "eigensolve one configuration and select the resonance")
    add_run_command("scan", "track the resonance across a parameter axis")
    add_run_command("propagate", "time-propagate with a ramped DC field")
    add_run_command("fcrit", "field scan plus barrier-crossing extraction")
    add_run_command("validate", "run the built-in verification battery")

    p = sub.add_parser("presets", help="list available presets")
    p.add_argument("--json", action="store_true", help="print configs as JSON")

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--threads", type=int, help="BLAS thread count")
    return parser


def _set_threads(n: int | None) -> None:
    if n is None:
        return
    for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)


def _run_remote(server: str, command: str, payload: dict) -> dict:
    import httpx

    url = server.rstrip("/") + f"/{command}"
    resp = httpx.post(url, json=payload, timeout=None)
    if resp.status_code != 200:
        raise SystemExit(f"server returned {resp.status_code}: {resp.text}")
    return resp.json()


def _execute(args: argparse.Namespace) -> int:
    # imports deferred so --threads can pin BLAS before numpy loads
    from .config import ResultRecord
    from .output import load_config_file, write_run_outputs
    from .presets import get_preset

    command = args.command
    if command == "validate":
        if args.server:
            data = _run_remote(args.server, "validate", {"seed": args.seed})
            record = ResultRecord.model_validate(data["record"])
            artifacts = data["artifacts"]
        else:
            from .workflows import run_validate

            record, artifacts = run_validate(seed=args.seed)
        written = write_run_outputs(args.out, record, artifacts)
        ok = record.summary.get("all_passed", False)
        for check in record.summary.get("checks", []):
            status = "pass" if check["passed"] else "FAIL"
            print(f"{status}  {check['name']}  measured {check['measured']:.3g} vs tol {check['tolerance']:.3g}")
        print(f"wrote {len(written)} files to {args.out}")
        return 0 if ok else 1

    if args.config is not None:
        cfg = load_config_file(args.config)
    elif args.preset is not None:
        kind, cfg = get_preset(args.preset)
        if kind != command:
            raise SystemExit(f"preset {args.preset!r} belongs to `{kind}`, not `{command}`")
    else:
        raise SystemExit("provide --config or --preset")

    if args.server:
        data = _run_remote(args.server, command, {"config": json.loads(cfg.model_dump_json())})
        record = ResultRecord.model_validate(data["record"])
        artifacts = data["artifacts"]
    else:
        from .workflows import run_fcrit, run_propagate, run_scan, run_solve

        workflow = {
            "solve": run_solve,
            "scan": run_scan,
            "propagate": run_propagate,
            "fcrit": run_fcrit,
        }[command]
        record, artifacts = workflow(cfg)

    written = write_run_outputs(args.out, record, artifacts)
    _print_summary(record)
    print(f"wrote {len(written)} files to {args.out}")
    return 0


def _print_summary(record) -> None:
    s = record.summary
    if "selected" in s:
        sel = s["selected"]
        print(
            f"selected resonance: E = {sel['re_e']:.15g} {sel['im_e']:+.15g}i au, "
            f"Gamma = {sel['gamma_au']:.15g} au ({sel['gamma_per_sec']:.6g} 1/s)"
        )
    if "rows" in s:
        print(f"scan over {s.get('axis')}: {s.get('n_converged')}/{s.get('n_rows')} rows converged")
    if "f_crit" in s:
        print(f"F_crit = {s['f_crit']:.15g} au (barrier height {s['barrier_height']:.6g} au)")
    if "decay_fit" in s:
        fit = s["decay_fit"]
        lo, hi = fit["gamma_interval"]
        print(f"decay fit: Gamma = {fit['gamma_au']:.6g} au  (0.95 CI [{lo:.6g}, {hi:.6g}])")


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    _set_threads(getattr(args, "threads", None))

    if args.command == "presets":
        from .presets import PRESETS, preset_names

        for name in preset_names():
            kind, cfg = PRESETS[name]
            if args.json:
                print(json.dumps({"name": name, "kind": kind, "config": json.loads(cfg.model_dump_json())}))
            else:
                print(f"{name:24s} {kind:10s} {cfg.problem}")
        return 0

    if args.command == "serve":
        import uvicorn

        uvicorn.run("starkecs.service.app:app", host=args.host, port=args.port)
        return 0

    return _execute(args)


if __name__ == "__main__":
    sys.exit(main())
