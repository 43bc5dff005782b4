"""Command-line interface: derive, stability, sweep, simulate, fit.

All file outputs are deterministic: floats are printed with 17 significant
digits and newline line endings, so identical configurations and flags
yield byte-identical CSVs. Every emitted data file is accompanied by a JSON
manifest recording the resolved inputs, the resonance values, and the
output list; re-running the stored command reproduces the data exactly.

Exit codes: 0 success, 1 domain errors (bad physics input, failed
integration), 2 usage errors.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .model import ConfigError, ModelConfig, load_config
from .expansion import generate_eom, pretty_print, system_to_json
from .stability import (
    EigensolverError,
    build_rwa_system,
    default_jobs,
    max_real_eigenvalue,
    rwa_filter,
    sweep_stability,
)
from .dynamics import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED_AMPLITUDE,
    InitialState,
    IntegrationError,
    integrate_full,
    integrate_rwa,
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def parse_grid(text: str) -> list[float]:
    """Inclusive 'start:end:step' grids, step counted to avoid float drift."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be 'start:end:step', got {text!r}")
    try:
        start, end, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"grid {text!r}: {exc}") from None
    if step <= 0 or end < start:
        raise ConfigError(f"grid {text!r} needs step > 0 and end >= start")
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key-value configuration file")
    parser.add_argument("--k", type=int, help="number of retained modes")
    parser.add_argument("--n", type=int, help="expansion order")
    parser.add_argument("--eps", type=float, help="modulation depth")
    parser.add_argument("--omega1", type=float, default=1.0,
                        help="fundamental frequency (default 1.0)")
    parser.add_argument("--ratio", type=float,
                        help="omega1/kappa1; sets uniform damping")
    parser.add_argument("--kappa", type=str,
                        help="damping rate, scalar or comma list (overrides --ratio)")
    parser.add_argument("--drive-omega", type=float, default=None,
                        help="explicit drive frequency (default: order-n resonance)")


def _config_from_args(args) -> ModelConfig:
    if args.config:
        return load_config(args.config)
    missing = [flag for flag, value in
               (("--k", args.k), ("--n", args.n), ("--eps", args.eps))
               if value is None]
    if missing:
        raise ConfigError(f"missing {', '.join(missing)} (or use --config FILE)")
    if args.kappa is not None:
        kappa = tuple(float(p) for p in args.kappa.split(",") if p.strip())
        if len(kappa) == 1:
            kappa = kappa * args.k
    elif args.ratio is not None:
        kappa = (args.omega1 / args.ratio,) * args.k
    else:
        kappa = (0.0,) * args.k
    return ModelConfig(k_modes=args.k, n_order=args.n, epsilon=args.eps,
                       omega1=args.omega1, kappa=kappa,
                       drive_omega=args.drive_omega)


def _manifest_path(output_path: str) -> str:
    base, _ = os.path.splitext(output_path)
    return base + ".manifest.json"


def write_manifest(command: str, args_dict: dict, outputs: list[str],
                   config: ModelConfig | None) -> str:
    payload = {
        "tool": "dce-lab",
        "version": __version__,
        "command": command,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "args": args_dict,
        "config": config.as_dict() if config is not None else None,
        "resonance": None if config is None else {
            "drive_omega": config.drive,
            "omega1_shifted": config.omega1_shifted,
        },
        "outputs": [os.path.basename(p) for p in outputs],
    }
    path = _manifest_path(outputs[0])
    with open(path, "w", newline="") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return path


def cmd_derive(args) -> int:
    config = _config_from_args(args)
    system = generate_eom(config)
    if args.rwa:
        system = rwa_filter(system)
    if args.emit_terms:
        with open(args.emit_terms, "w", newline="") as fh:
            fh.write(system_to_json(system))
            fh.write("\n")
        write_manifest("derive", _args_dict(args), [args.emit_terms], config)
    print(f"# drive_omega = {_fmt(config.drive)}")
    print(f"# omega1_shifted = {_fmt(config.omega1_shifted)}")
    print(pretty_print(system))
    return 0


def cmd_stability(args) -> int:
    config = _config_from_args(args)
    result = max_real_eigenvalue(build_rwa_system(config))
    print(f"lambda_max = {_fmt(result.lambda_max)}")
    print(f"unstable = {'true' if result.unstable else 'false'}")
    print(f"boundary_ratio = {_fmt(result.boundary_ratio)}")
    print("eigenvalues =", " ".join(
        f"{_fmt(z.real)}{z.imag:+.17g}j" for z in result.eigenvalues))
    return 0


def cmd_sweep(args) -> int:
    eps_grid = parse_grid(args.eps)
    if args.ratio_log:
        ratio_grid = [10.0 ** v for v in parse_grid(args.ratio_log)]
    elif args.ratio:
        ratio_grid = parse_grid(args.ratio)
    else:
        raise ConfigError("sweep needs --ratio or --ratio-log")
    cells = sweep_stability(args.n, eps_grid, ratio_grid, omega1=args.omega1,
                            jobs=args.jobs)
    failures = [c for c in cells if c.error is not None]
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epsilon", "ratio", "lambda_max", "unstable"])
        for cell in cells:
            writer.writerow([_fmt(cell.epsilon), _fmt(cell.ratio),
                             _fmt(cell.lambda_max),
                             "true" if cell.unstable else "false"])
    write_manifest("sweep", _args_dict(args), [args.out], None)
    for cell in failures:
        print(f"cell (eps={cell.epsilon}, ratio={cell.ratio}) failed: "
              f"{cell.error}", file=sys.stderr)
    print(f"wrote {len(cells)} cells to {args.out}"
          + (f" ({len(failures)} failed)" if failures else ""))
    return 0


def _auto_t_end(config: ModelConfig) -> float:
    lam = max_real_eigenvalue(build_rwa_system(config)).lambda_max
    if lam > 0:
        return 10.0 / lam
    kappa1 = config.kappa[0]
    return 10.0 / kappa1 if kappa1 > 0 else 1e3 / config.omega1


def cmd_simulate(args) -> int:
    config = _config_from_args(args)
    if (args.mode == "full" and config.n_order >= 6
            and not args.allow_fast_oscillations):
        raise ConfigError(
            "full integration at expansion order 6 is disabled by default: "
            "the phase factors oscillate too fast for reliable numerics; "
            "pass --allow-fast-oscillations to override")
    init = InitialState.seed(config.k_modes, scale=args.seed_amplitude,
                             mode=args.seed_mode)
    t_end = args.t_end if args.t_end else _auto_t_end(config)
    if args.mode == "full":
        traj = integrate_full(generate_eom(config), init, t_end=t_end,
                              tol=args.tol, samples=args.samples)
    else:
        traj = integrate_rwa(build_rwa_system(config), init, t_end=t_end,
                             samples=args.samples)
    k = config.k_modes
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["t"]
        for i in range(1, k + 1):
            header += [f"re_a{i}", f"im_a{i}"]
        header += [f"n{i}" for i in range(1, k + 1)]
        writer.writerow(header)
        for j in range(traj.times.size):
            row = [_fmt(traj.times[j])]
            for i in range(k):
                row += [_fmt(traj.amplitudes[j, i].real),
                        _fmt(traj.amplitudes[j, i].imag)]
            row += [_fmt(traj.photon_proxy[j, i]) for i in range(k)]
            writer.writerow(row)
    resolved = _args_dict(args)
    resolved["t_end"] = t_end
    write_manifest("simulate", resolved, [args.out], config)
    print(f"wrote {traj.times.size} samples to {args.out} "
          f"(steps={traj.stats.steps}, rejected={traj.stats.rejected})")
    return 0


def cmd_fit(args) -> int:
    t0, t1 = (float(p) for p in args.window.split(":"))
    with open(args.csv, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        col = f"n{args.mode}"
        if "t" not in header or col not in header:
            raise ConfigError(f"{args.csv}: need columns 't' and {col!r}, "
                              f"got {header}")
        t_idx, n_idx = header.index("t"), header.index(col)
        times, values = [], []
        for row in reader:
            times.append(float(row[t_idx]))
            values.append(float(row[n_idx]))
    times = np.asarray(times)
    values = np.asarray(values)
    mask = (times >= t0) & (times <= t1)
    if int(mask.sum()) < 2:
        raise ConfigError(f"window {args.window!r} selects fewer than two rows")
    if np.any(values[mask] <= 0):
        raise ConfigError(f"nonpositive photon proxy inside window {args.window!r}")
    rate = float(np.polyfit(times[mask], np.log(values[mask]), 1)[0])
    print(json.dumps({"mode": args.mode, "window": [t0, t1], "rate": rate}))
    return 0


def _args_dict(args) -> dict:
    return {key: value for key, value in sorted(vars(args).items())
            if key != "func"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dce-lab",
        description="Oscillating-mirror cavity: equations of motion, "
                    "stability analysis, photon-amplitude dynamics")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="generate and print the equations of motion")
    _add_config_flags(p)
    p.add_argument("--rwa", action="store_true",
                   help="apply the resonance filter before printing")
    p.add_argument("--emit-terms", metavar="PATH",
                   help="write the term system as JSON")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("stability", help="maximal eigenvalue and verdict")
    _add_config_flags(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("sweep", help="stability map over (eps, omega1/kappa1)")
    p.add_argument("--n", type=int, required=True, help="expansion order")
    p.add_argument("--omega1", type=float, default=1.0)
    p.add_argument("--eps", required=True, metavar="START:END:STEP")
    p.add_argument("--ratio", metavar="START:END:STEP",
                   help="linear grid of omega1/kappa1")
    p.add_argument("--ratio-log", metavar="A:B:STEP",
                   help="log10 grid of omega1/kappa1 (decades)")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker count (default: DCE_LAB_JOBS or cpu-bound)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="integrate the photon-amplitude dynamics")
    _add_config_flags(p)
    p.add_argument("--mode", choices=("full", "rwa"), required=True,
                   help="full term system or stationary (filtered) system")
    p.add_argument("--t-end", type=float, default=None,
                   help="final time (default: ten growth times)")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="relative local error target (full mode)")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed-amplitude", type=float,
                   default=DEFAULT_SEED_AMPLITUDE)
    p.add_argument("--seed-mode", type=int, default=1)
    p.add_argument("--allow-fast-oscillations", action="store_true",
                   help="permit full integration at expansion order 6")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a growth rate from a simulate CSV")
    p.add_argument("csv", help="CSV written by simulate")
    p.add_argument("--mode", type=int, required=True, help="mode index (1-based)")
    p.add_argument("--window", required=True, metavar="T0:T1")
    p.set_defaults(func=cmd_fit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, IntegrationError, EigensolverError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
