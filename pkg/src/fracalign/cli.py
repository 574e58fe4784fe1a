"""
Command line entry point.

    fracalign run-hydro --config PATH --out DIR
    fracalign run-particles --config PATH --out DIR
    fracalign verify-operators [--alpha LIST] [--n INT] [--tol REAL]
    fracalign analyze --in CSV --window T0:T1

Exit status: 0 success, 1 failed verification or aborted run, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io, verification
from .diagnostics import fit_decay_rate
from .hydro import SolverAbort, SolverConfig, run
from .particles import ParticleConfig, run_particles

logger = logging.getLogger("fracalign")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc


def _window(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        t0 = float(lo) if lo.strip() else float("-inf")
        t1 = float(hi) if hi.strip() else float("inf")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"window must look like T0:T1, got {text!r}") from exc
    if t0 >= t1:
        raise argparse.ArgumentTypeError(f"empty window {text!r}")
    return t0, t1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracalign", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("run-hydro", "run-particles"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", required=True, type=Path)
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    p = sub.add_parser("verify-operators")
    p.add_argument("--alpha", type=_float_list, default=list(verification.DEFAULT_ALPHAS))
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("analyze")
    p.add_argument("--in", dest="csv", required=True, type=Path)
    p.add_argument("--window", type=_window, default=(float("-inf"), float("inf")))
    p.add_argument("--out", type=Path, default=None,
                   help="directory for fits.json and the fit figure")
    return parser


def _run_simulation(args, expected) -> int:
    try:
        config = io.load_config(args.config)
    except (OSError, io.ConfigError) as exc:
        raise UsageError(str(exc)) from exc
    if not isinstance(config, expected):
        raise UsageError(f"{args.config}: mode does not match {args.command}")

    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    manifest = io.RunManifest(out / "manifest.json", io.config_snapshot(config))
    manifest.save()
    try:
        if isinstance(config, SolverConfig):
            count = [0]

            def snapshot(state):
                name = f"snapshot_{count[0]:05d}.json"
                count[0] += 1
                manifest.add(io.write_snapshot(state, config.alpha, out / name))

            _, records = run(config, on_snapshot=snapshot)
            csv_path = out / "timeseries.csv"
            io.write_timeseries(records, csv_path)
            manifest.add(csv_path)
            if not args.no_figures:
                from .plotting import plot_hydro

                manifest.add(plot_hydro(io.read_table(csv_path), out / "timeseries.png",
                                        f"alpha={config.alpha}, n={config.n}, {config.preset}"))
        else:
            _, records = run_particles(config)
            csv_path = out / "particles.csv"
            io.write_particle_timeseries(records, csv_path)
            manifest.add(csv_path)
            if not args.no_figures:
                from .plotting import plot_particles

                manifest.add(plot_particles(io.read_table(csv_path), out / "particles.png",
                                            f"N={config.n_agents}, alpha={config.alpha}"))
    except (SolverAbort, FloatingPointError) as exc:
        manifest.finish(f"aborted: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except BaseException as exc:
        manifest.finish(f"failed: {type(exc).__name__}: {exc}")
        raise
    manifest.finish("ok")
    print(f"wrote {len(manifest.outputs)} file(s) to {out}")
    return EXIT_OK


def _verify(args) -> int:
    rows = verification.operator_checks(args.alpha, args.n, args.tol)
    print(verification.format_table(rows))
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


def analyze_table(table: dict, window) -> dict:
    results = {}
    for name in ("V", "sup_ux", "sup_uxx", "flock_residual"):
        if name not in table:
            continue
        try:
            results[name] = fit_decay_rate(list(zip(table["t"], table[name])), window)
        except ValueError as exc:
            logger.warning("%s: %s", name, exc)
            results[name] = None
    return results


def _analyze(args) -> int:
    try:
        table = io.read_table(args.csv)
    except (OSError, ValueError, StopIteration) as exc:
        raise UsageError(f"cannot read {args.csv}: {exc}") from exc
    if "t" not in table:
        raise UsageError(f"{args.csv}: no 't' column")
    fits = analyze_table(table, args.window)
    doc = {name: (fit.as_dict() if fit else None) for name, fit in fits.items()}
    text = json.dumps(doc, indent=2, allow_nan=False, default=float)
    print(text)
    if args.out is not None:
        from .plotting import plot_fits

        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "fits.json").write_text(text + "\n")
        plot_fits(table, fits, args.out / "fits.png")
    return EXIT_OK


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run-hydro":
            return _run_simulation(args, SolverConfig)
        if args.command == "run-particles":
            return _run_simulation(args, ParticleConfig)
        if args.command == "verify-operators":
            return _verify(args)
        return _analyze(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
