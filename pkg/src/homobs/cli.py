"""Command-line front end.

Every failure prints one line ``<CODE>: <message>`` on stderr and exits
with 2 (config), 3 (infeasible), 4 (divergence) or 5 (verification).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence


from .errors import (
    ConfigError,
    DivergenceError,
    HomobsError,
    InfeasibleError,
    ObservabilityError,
    StructureEquationError,
    VerificationError,
)
from .experiments import (
    compare_metrics,
    load_config,
    load_gainset,
    read_metrics,
    resolve_gains,
    run_experiment,
    save_gainset,
)
from .graph import decompose, laplacian, left_null_vector
from .synthesis import MODES, closed_loop_matrix, max_real_eigenvalue, verify_gain_set

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_DIVERGENCE = 4
EXIT_VERIFICATION = 5

DEFAULT_OUT = "homobs_out"


def exit_code(exc: HomobsError) -> int:
    if isinstance(exc, DivergenceError):
        return EXIT_DIVERGENCE
    if isinstance(exc, VerificationError):
        return EXIT_VERIFICATION
    if isinstance(exc, (InfeasibleError, ObservabilityError, StructureEquationError)):
        return EXIT_INFEASIBLE
    return EXIT_CONFIG


def output_root(arg: str | None) -> Path:
    """--out wins, then $HOMOBS_OUT, then ./homobs_out."""
    if arg:
        return Path(arg)
    return Path(os.environ.get("HOMOBS_OUT") or DEFAULT_OUT)


def _target(args) -> str:
    target = args.config or args.target
    if not target:
        raise ConfigError("give a registry name (fig2..fig5) or --config PATH")
    return target


def _overrides(args) -> dict:
    return {
        "mode": getattr(args, "mode", None),
        "h": args.h,
        "t_end": args.t_end,
        "perturbed": True if getattr(args, "perturbed", False) else None,
        "seed": args.seed,
    }


def cmd_synthesize(args) -> int:
    cfg = load_config(_target(args))
    if args.mode:
        cfg.raw["gains"]["mode"] = args.mode
    cfg.raw["gains"].pop("injected", None)
    gains = resolve_gains(cfg)
    gs = gains.homogeneous
    out = output_root(args.out) / cfg.name
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"gainset_{gs.mode}.json"
    save_gainset(gs, path)
    for name, margin in gs.certificates.items():
        print(f"{name:<22} margin={margin:+.6e}  PASS")
    print(f"nu={gs.nu:g}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(_target(args))
    gs = load_gainset(args.gains)
    if gs.mode != cfg.gains["mode"]:
        raise ConfigError(f"gain set mode {gs.mode!r} does not match config mode {cfg.gains['mode']!r}")
    lap = laplacian(cfg.topology)
    cs = list(cfg.sensors.C)
    if gs.P_a is None or gs.Y is None:
        lam = max_real_eigenvalue(closed_loop_matrix(cfg.plant.A, cs, gs.H, lap, gs.nu))
        ok = lam < 0.0
        print("stability-only check (no P_a/Y certificate available)")
        print(f"max_real_eigenvalue={lam:+.6e}  {'PASS' if ok else 'FAIL'}")
        if not ok:
            raise VerificationError(f"closed loop is not Hurwitz (max real part {lam:.3e})", block="stability")
        return EXIT_OK
    dec = decompose(lap, left_null_vector(lap))
    report = verify_gain_set(gs, dec.Delta, cfg.plant.A, cs, L=lap, strict=False)
    for line in report.lines():
        print(line)
    if not report.passed:
        raise VerificationError(f"failing blocks: {', '.join(report.failures)}", block=report.failures[0])
    return EXIT_OK


def _report(result, files) -> None:
    for k, v in result.metrics.items():
        print(f"{k}={v}")
    for f in files:
        print(f"wrote {f}")


def cmd_simulate(args) -> int:
    target = _target(args)
    cfg = load_config(target)
    out = output_root(args.out) / cfg.name
    result = run_experiment(cfg, _overrides(args), out_dir=out, jobs=args.jobs)
    _report(result, result.files)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(_target(args))
    over = _overrides(args)
    if args.scales:
        over["scale_exponents"] = [int(m) for m in args.scales]
    out = output_root(args.out) / f"{cfg.name}_sweep"
    result = run_experiment(cfg, over, out_dir=out, jobs=args.jobs)
    _report(result, result.files)
    return EXIT_OK


def cmd_compare(args) -> int:
    metrics = [read_metrics(p) for p in args.metrics]
    report = compare_metrics(metrics, names=[str(p) for p in args.metrics])
    for line in report.lines:
        print(line)
    print("overall: " + ("PASS" if report.passed else "FAIL"))
    if not report.passed:
        raise VerificationError("declared orderings do not hold", block="compare")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homobs", description="Homogeneous distributed observers.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_mode=True):
        p.add_argument("target", nargs="?", help="registry name (fig2..fig5) or config path")
        p.add_argument("--config", help="config file path")
        p.add_argument("--out", help="output root (default $HOMOBS_OUT or ./homobs_out)")
        p.add_argument("--seed", type=int, default=None)
        if with_mode:
            p.add_argument("--mode", choices=MODES)

    p = sub.add_parser("synthesize", help="synthesize and certify gains")
    common(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("verify", help="check a gain set against a config")
    common(p, with_mode=False)
    p.add_argument("--gains", required=True, help="gain set file")
    p.set_defaults(func=cmd_verify)

    for name, func, hlp in (
        ("simulate", cmd_simulate, "run an experiment"),
        ("sweep", cmd_sweep, "run an experiment over initial-condition scales"),
    ):
        p = sub.add_parser(name, help=hlp)
        common(p)
        p.add_argument("--perturbed", action="store_true")
        p.add_argument("--h", type=float, default=None)
        p.add_argument("--t-end", dest="t_end", type=float, default=None)
        p.add_argument("--jobs", type=int, default=1)
        if name == "sweep":
            p.add_argument("--scales", nargs="+", help="exponents m; x0 is scaled by 10^m")
        p.set_defaults(func=func)

    p = sub.add_parser("compare", help="compare metrics files")
    p.add_argument("metrics", nargs="+")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            print("CONFIG: invalid command line", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK
    try:
        return args.func(args)
    except HomobsError as exc:
        msg = " ".join(str(exc).split())
        sys.stdout.flush()
        print(f"{exc.code}: {msg}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
