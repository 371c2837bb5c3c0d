"""Command-line entry point.

Every command writes a machine-readable payload (to ``--out`` or stdout) and,
when writing to a file, a ``<out>.manifest.json`` next to it. Payloads carry no
timestamps or timings, so equal manifests reproduce identical bytes. Exit
codes: 0 success, 1 failed check, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, builders, protocols
from .circuit import CircuitError, parse, serialize
from .codes import CssCode, code_h6, code_iceberg, verify_switch_mapping
from .dense import dense_verify_all
from .engines import inject_faults
from .noise import annotate, h1_ratio
from .stats import fit_power_law, fit_ramsey

SEED_ENV = "H6MAGIC_SEED"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _log(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _sha256(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=protocols._json_default) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, payload: str, manifest: dict, summary: str | None = None) -> None:
    manifest["end"] = _now()
    if args.out:
        Path(args.out).write_text(payload)
        Path(args.out + ".manifest.json").write_text(_dumps(manifest))
        if summary:
            print(summary)
    else:
        sys.stdout.write(payload)
        if summary:
            _log(summary)


def _manifest(args, config: dict, seed=None, inputs=()) -> dict:
    return {
        "command": args.command,
        "argv": sys.argv[1:],
        "config": config,
        "seed": seed,
        "seed_env": SEED_ENV,
        "version": __version__,
        "inputs": {p: _sha256(p) for p in inputs},
        "start": args._start,
    }


# ------------------------------------------------------------------- commands


def cmd_codes_verify(args) -> int:
    if args.codes:
        raw = json.loads(Path(args.codes).read_text())
        codes = [CssCode.from_text(c["name"], c["d"], c["stabilizers"], c["logical_x"], c["logical_z"]) for c in raw]
        inputs = [args.codes]
    else:
        codes, inputs = [code_h6(), code_iceberg()], []
    report = {"codes": [], "switch_mapping": []}
    ok = True
    for code in codes:
        checks = code.verify()
        ok &= all(c.ok for c in checks)
        report["codes"].append({**code.to_dict(), "checks": [vars(c) for c in checks]})
        for c in checks:
            if not c.ok:
                _log(f"FAIL {code.name}: {c.name} {c.detail}".rstrip())
    if not args.codes:
        checks = verify_switch_mapping()
        ok &= all(c.ok for c in checks)
        report["switch_mapping"] = [vars(c) for c in checks]
        for c in checks:
            if not c.ok:
                _log(f"FAIL switch mapping: {c.name}")
    report["passed"] = ok
    if args.format == "csv":
        rows = [(c["name"], ch["name"], ch["ok"]) for c in report["codes"] for ch in c["checks"]]
        rows += [("switch", ch["name"], ch["ok"]) for ch in report["switch_mapping"]]
        payload = _csv(["scope", "check", "ok"], rows)
    else:
        payload = _dumps(report)
    _emit(args, payload, _manifest(args, {"codes": args.codes}, inputs=inputs), f"codes-verify: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check_ft(args) -> int:
    inputs = []
    if Path(args.circuit).is_file():
        try:
            c = parse(Path(args.circuit).read_text())
        except CircuitError as e:
            raise UsageError(str(e)) from e
        inputs = [args.circuit]
    else:
        try:
            kind = builders.CircuitKind(args.circuit)
        except ValueError:
            kinds = ", ".join(k.value for k in builders.CircuitKind)
            raise UsageError(f"unknown circuit {args.circuit!r}; kinds: {kinds}") from None
        c = builders.build(kind, **_options(args.option))
    _log(f"check-ft: {c.name or args.circuit}, {c.num_qubits} qubits")
    rep = inject_faults(annotate(c, h1_ratio(args.p)))
    counts = rep.counts
    payload = rep.to_csv() if args.format == "csv" else rep.to_json() + "\n"
    summary = (
        f"check-ft {args.circuit}: LOGICAL {counts['LOGICAL']} DETECTED {counts['DETECTED']} "
        f"BENIGN {counts['BENIGN']}; max logicals flipped by one fault {rep.max_observables_flipped()}"
    )
    cfg = {"circuit": args.circuit, "p": args.p, "options": args.option}
    _emit(args, payload, _manifest(args, cfg, inputs=inputs), summary)
    return EXIT_OK if counts["LOGICAL"] == 0 else EXIT_FAIL


def _options(pairs) -> dict:
    out = {}
    for pair in pairs or []:
        k, v = _split(pair)
        out[k] = _value(v)
    return out


def _split(pair: str) -> tuple[str, str]:
    if "=" not in pair:
        raise UsageError(f"expected key=value, got {pair!r}")
    k, v = pair.split("=", 1)
    return k.strip().replace("-", "_"), v.strip()


def _value(v: str):
    low = v.lower()
    if low in ("true", "false"):
        return low == "true"
    if low == "none":
        return None
    if "," in v:
        return tuple(x.strip() for x in v.split(","))
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        k, v = _split(line)
        out[k] = _value(v)
    return out


_RUN_KEYS = {
    "p": float,
    "shots": int,
    "seed": int,
    "engine": str,
    "policy": str,
    "workers": int,
    "rus": bool,
    "mode": str,
    "variant": str,
    "twirl": bool,
    "L": str,
    "p_grid": str,
    "shots_per_point": str,
}


def _settings(args) -> dict:
    """Config file values overridden by explicit flags, then defaults."""
    s = {
        "p": 1e-3,
        "shots": 10_000,
        "seed": int(os.environ.get(SEED_ENV, "0")),
        "engine": "frame",
        "policy": "full",
        "workers": os.cpu_count() or 1,
        "rus": False,
        "mode": "ft",
        "variant": "ft",
        "twirl": True,
        "L": "0,2,4,6,8",
    }
    if getattr(args, "config", None):
        for k, v in read_config(args.config).items():
            if k not in _RUN_KEYS:
                raise UsageError(f"unknown config key {k!r}")
            s[k] = v
    for k in _RUN_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            s[k] = v
    for k, cast in _RUN_KEYS.items():
        if k in s and not isinstance(s[k], cast):
            s[k] = ",".join(map(str, s[k])) if isinstance(s[k], tuple) else cast(s[k])
    return s


def _protocol_config(level: int, s: dict) -> protocols.ProtocolConfig:
    try:
        return protocols.ProtocolConfig(
            level=level,
            p=s["p"],
            shots=s["shots"],
            seed=s["seed"],
            postselect_policy=s["policy"],
            engine=s["engine"],
            workers=s["workers"],
            repeat_until_success=s["rus"],
            mode=s["mode"],
            twirl=s["twirl"],
            variant=s["variant"],
        )
    except ValueError as e:
        raise UsageError(str(e)) from e


def _floats(text, name: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{name} must be a comma-separated list of numbers") from None


def _result_payload(r: protocols.ExperimentResult) -> dict:
    d = r.to_dict()
    d.pop("wall_time")
    d["config"].pop("workers")  # results do not depend on it
    return d


def cmd_run(args) -> int:
    s = _settings(args)
    inputs = [args.config] if args.config else []
    level = 2 if args.protocol == "level2" else 1
    cfg = _protocol_config(level, s)
    manifest = _manifest(args, {"protocol": args.protocol, **s}, s["seed"], inputs)
    _log(f"run {args.protocol}: p={cfg.p} shots={cfg.shots} seed={cfg.seed}")
    t0 = time.perf_counter()
    if args.protocol == "ramsey":
        L = [int(x) for x in _floats(s["L"], "--L")]
        try:
            results = protocols.run_ramsey_proxy(cfg, L)
        except ValueError as e:
            raise UsageError(str(e)) from e
        rows = protocols.ramsey_table(results)
        manifest["wall_time"] = time.perf_counter() - t0
        if args.format == "json":
            payload = _dumps([_result_payload(r) for r in results])
        else:
            payload = _csv(
                ["L", "survival", "accept", "gate_accept", "survived", "accepted", "shots"],
                [(r.L, r.survival, r.accept, r.gate_accept, r.survived, r.accepted, r.shots) for r in rows],
            )
        summary = " ".join(f"L={r.L}:{r.survival:.5f}/{r.accept:.3f}" for r in rows)
        _emit(args, payload, manifest, f"ramsey survival/accept {summary}")
        return EXIT_OK
    runner = {
        "level1": protocols.run_level1,
        "level2": protocols.run_level2,
        "code-switch": protocols.run_code_switch,
    }[args.protocol]
    r = runner(cfg)
    manifest["wall_time"] = r.wall_time
    d = _result_payload(r)
    if args.format == "csv":
        payload = _csv(
            ["shots", "accepted", "accept_rate", "error_rate", "ci_lo", "ci_hi"],
            [(r.shots, r.accepted, r.accept_rate, r.logical_error_rate, r.error_ci.lo, r.error_ci.hi)],
        )
    else:
        payload = _dumps(d)
    _emit(args, payload, manifest, r.summary())
    return EXIT_OK


SWEEP_HEADER = ["p", "rate", "ci_lo", "ci_hi", "accept"]


DEFAULT_GRID = "1e-2,3e-3,1e-3,3e-4,1e-4"


def cmd_sweep(args) -> int:
    s = _settings(args)
    grid = _floats(s.get("p_grid") or DEFAULT_GRID, "--p-grid")
    if len(grid) < 2 or any(p <= 0 for p in grid):
        raise UsageError("--p-grid needs at least two positive values")
    per_point = s.get("shots_per_point")
    shots = None
    if per_point is not None:
        shots = [int(x) for x in _floats(per_point, "--shots-per-point")]
        if len(shots) not in (1, len(grid)):
            raise UsageError("--shots-per-point takes one value or one per grid point")
        shots = shots * len(grid) if len(shots) == 1 else shots
    level = 2 if args.protocol == "level2" else 1
    base = _protocol_config(level, s)
    manifest = _manifest(args, {"protocol": args.protocol, **s}, s["seed"], [args.config] if args.config else [])
    t0 = time.perf_counter()

    def progress(k, p):
        _log(f"sweep {args.protocol}: point {k + 1}/{len(grid)} p={p}")

    points = protocols.sweep(args.protocol, base, grid, shots_per_point=shots, progress=progress)
    manifest["wall_time"] = time.perf_counter() - t0
    if args.format == "json":
        payload = _dumps([pt.to_dict() for pt in points])
    else:
        payload = _csv(SWEEP_HEADER, [(pt.p, pt.logical_error_rate, pt.ci_lo, pt.ci_hi, pt.accept_rate) for pt in points])
    _emit(args, payload, manifest, f"sweep {args.protocol}: {len(points)} points")
    return EXIT_OK


def cmd_fit(args) -> int:
    path = args.file
    text = Path(path).read_text()
    if path.endswith(".json"):
        rows = json.loads(text)
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise UsageError(f"{path} has no rows")
    manifest = _manifest(args, {"file": path, "seed": args.seed}, args.seed, [path])
    if "L" in rows[0]:
        data = [(int(float(r["L"])), int(float(r["survived"])), int(float(r["accepted"]))) for r in rows]
        try:
            fit = fit_ramsey(data, mcmc=not args.no_mcmc, seed=args.seed or 0)
        except ValueError as e:
            raise UsageError(str(e)) from e
        d = fit.to_dict()
        summary = f"ramsey fit: s={fit.s:.3e} eps={fit.eps:.3e} infidelity={fit.average_infidelity:.3e}"
        header = ["s", "eps", "average_infidelity"]
        line = [fit.s, fit.eps, fit.average_infidelity]
    else:
        pts = [(float(r["p"]), float(r["rate"])) for r in rows if float(r["rate"]) > 0]
        try:
            fit = fit_power_law(pts)
        except ValueError as e:
            raise UsageError(str(e)) from e
        d = fit.to_dict()
        d["points_used"] = len(pts)
        summary = f"power law: A={fit.A:.4g} +- {fit.stderr_A:.2g}, b={fit.b:.4f} +- {fit.stderr_b:.2g}"
        header = ["A", "b", "stderr_A", "stderr_b"]
        line = [fit.A, fit.b, fit.stderr_A, fit.stderr_b]
    payload = _csv(header, [line]) if args.format == "csv" else _dumps(d)
    _emit(args, payload, manifest, summary)
    return EXIT_OK


def cmd_dense_verify(args) -> int:
    checks = dense_verify_all()
    ok = all(c.passed for c in checks)
    if args.format == "csv":
        payload = _csv(["identity", "deviation", "passed"], [(c.identity, c.deviation, c.passed) for c in checks])
    else:
        payload = _dumps([c.to_dict() for c in checks])
    _emit(args, payload, _manifest(args, {}), f"dense-verify: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_build(args) -> int:
    try:
        c = builders.build(args.kind, **_options(args.option))
    except (ValueError, TypeError) as e:
        raise UsageError(str(e)) from e
    _emit(args, serialize(c), _manifest(args, {"kind": args.kind, "options": args.option}), None)
    return EXIT_OK


# --------------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the payload here (plus <out>.manifest.json)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p", type=float, help="two-qubit gate error rate")
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int, help=f"default from ${SEED_ENV}, else 0")
    p.add_argument("--engine", choices=("frame", "tableau"))
    p.add_argument("--policy", help="full, none, or comma-separated categories: " + ",".join(protocols.CATEGORIES))
    p.add_argument("--workers", type=int, help="worker processes (default: all CPUs)")
    p.add_argument("--rus", action="store_true", default=None, help="repeat each sub-block until it passes")
    p.add_argument("--mode", choices=("ft", "nonft"), help="level-1 variant")
    p.add_argument("--variant", choices=("ft", "nonft"), help="code-switch variant")
    p.add_argument("--no-twirl", dest="twirl", action="store_false", default=None)
    p.add_argument("--config", help="flat key=value file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="h6magic", description="H6 magic-state protocol toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codes-verify", help="verify code invariants and the switch table")
    p.add_argument("--codes", help="JSON list of codes to verify instead of the built-in pair")
    _common(p)
    p.set_defaults(func=cmd_codes_verify)

    p = sub.add_parser("check-ft", help="exhaustive single-fault classification")
    p.add_argument("circuit", help="circuit kind or circuit text file")
    p.add_argument("--p", type=float, default=1e-3)
    p.add_argument("--option", action="append", help="builder option key=value (repeatable)")
    _common(p)
    p.set_defaults(func=cmd_check_ft)

    p = sub.add_parser("run", help="run one protocol")
    p.add_argument("protocol", choices=("level1", "level2", "ramsey", "code-switch"))
    p.add_argument("--L", help="comma-separated even sequence lengths (ramsey)")
    _run_flags(p)
    _common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="logical error rate over a grid of p")
    p.add_argument("protocol", choices=("level1", "level2"))
    p.add_argument("--p-grid", dest="p_grid", help=f"comma-separated p values (default {DEFAULT_GRID})")
    p.add_argument("--shots-per-point", dest="shots_per_point", help="one value or one per grid point")
    _run_flags(p)
    _common(p)
    p.set_defaults(func=cmd_sweep, format="csv")

    p = sub.add_parser("fit", help="fit a sweep (power law) or a ramsey table")
    p.add_argument("file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-mcmc", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("dense-verify", help="dense checks of the non-Clifford identities")
    _common(p)
    p.set_defaults(func=cmd_dense_verify)

    p = sub.add_parser("build", help="emit a builder circuit in text form")
    p.add_argument("kind", choices=[k.value for k in builders.CircuitKind])
    p.add_argument("--option", action="append")
    _common(p)
    p.set_defaults(func=cmd_build)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    args._start = _now()
    if args.command == "fit" and args.seed is None:
        args.seed = int(os.environ.get(SEED_ENV, "0"))
    try:
        return args.func(args)
    except UsageError as e:
        _log(f"error: {e}")
        return EXIT_USAGE
    except (FileNotFoundError, json.JSONDecodeError, KeyError) as e:
        _log(f"error: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
