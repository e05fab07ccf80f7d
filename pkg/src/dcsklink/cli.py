"""Command-line entry point for simulation and theory runs."""

import argparse
import sys

from .harness import (
    PRESET_NAMES,
    ExperimentConfig,
    emit,
    emit_theory,
    load_config,
    preset,
    run_grid,
    theory_rows,
)


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    sub.add_argument("--out", default="results", help="output directory")
    sub.add_argument("--format", default="csv", choices=["csv"], help="output format")


def _add_sim_flags(sub):
    sub.add_argument("--workers", type=int, default=1, help="parallel grid workers")
    sub.add_argument(
        "--shortage-mode", choices=["paper", "half"], default=None,
        help="bit accounting for energy-shorted frames (overrides config)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcsklink",
        description="Monte Carlo simulation and analytical evaluation of a "
        "code-index modulated multi-carrier DCSK link with wireless power splitting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the Monte Carlo grid from a config file")
    sim.add_argument("--config", required=True, help="JSON config (or a previous manifest)")
    _add_common(sim)
    _add_sim_flags(sim)

    sweep = sub.add_parser("sweep", help="alias of simulate for multi-axis grids")
    sweep.add_argument("--config", required=True)
    _add_common(sweep)
    _add_sim_flags(sweep)

    theory = sub.add_parser("theory", help="evaluate the analytical curves only")
    theory.add_argument("--config", required=True)
    theory.add_argument(
        "--jitter-degenerate", action="store_true",
        help="separate coinciding path powers by a 1e-6 relative stagger",
    )
    _add_common(theory)

    pre = sub.add_parser("preset", help="run a built-in experiment preset")
    pre.add_argument("name", choices=sorted(PRESET_NAMES))
    _add_common(pre)
    _add_sim_flags(pre)
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    data = cfg.to_dict()
    if args.seed is not None:
        data["seed"] = args.seed
    if getattr(args, "shortage_mode", None):
        data["shortage_mode"] = args.shortage_mode
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in ("simulate", "sweep"):
        cfg = _apply_overrides(load_config(args.config), args)
        results = run_grid(cfg, workers=args.workers)
        paths = emit(results, cfg, args.out, fmt=args.format)
        for name, path in paths.items():
            print(f"{name}: {path}")
        failed = [r for r in results if r.failure]
        for r in failed:
            print(f"point failed: {r.spec.params} -> {r.failure}", file=sys.stderr)
        return 1 if failed else 0
    if args.command == "theory":
        cfg = _apply_overrides(load_config(args.config), args)
        rows = theory_rows(cfg, jitter_degenerate=args.jitter_degenerate)
        paths = emit_theory(rows, args.out, fmt=args.format)
        for name, path in paths.items():
            print(f"{name}: {path}")
        return 0
    if args.command == "preset":
        exit_code = 0
        for index, cfg in enumerate(preset(args.name)):
            cfg = _apply_overrides(cfg, args)
            results = run_grid(cfg, workers=args.workers)
            out_dir = args.out if len(preset(args.name)) == 1 else f"{args.out}/{cfg.label}"
            paths = emit(results, cfg, out_dir, fmt=args.format)
            for name, path in paths.items():
                print(f"[{cfg.label or args.name}] {name}: {path}")
            if any(r.failure for r in results):
                exit_code = 1
        return exit_code
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
