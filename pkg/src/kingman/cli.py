"""Command-line front end.

    kingman kernel   --s 0.5 --x 1.0
    kingman sample   --law rayleigh --s 0 --n 1000 --seed 7 --out batch
    kingman convolve --a batch_a --b batch_b --seed 1 --out conv
    kingman radchf   --input conv --t 0.5 1 2
    kingman simulate --process kl --pair pair.json --times 0 0.5 1 --dt 0.01 --n-paths 100 --out paths
    kingman whf      --sigma 1 --p 1 --n-paths 10000 --theta 1
    kingman verify   --quick
    kingman --config run.json

Exit codes: 0 success, 1 a verification check failed, 2 usage error.
Relative output paths are resolved against ``$KINGMAN_OUTPUT_DIR`` when set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from kingman import io
from kingman.convolution import SampleBatch, convolve_batches
from kingman.distributions import RayleighianLaw, rayleigh_radchf, sample_rayleigh, sample_rayleighian
from kingman.fluctuations import harvest_wh_pairs, wh_factor, wh_identity_residual, wh_target
from kingman.kernel import KingmanOrder, bessel_j, lambda_kernel, sample_theta
from kingman.processes import (PathGrid, SymmetricLevySpec, bessel_path, simulate_brownian,
                               simulate_kl_path, simulate_symmetric_levy_1d)
from kingman.radchf import default_grid, levy_khinchine_radchf, radchf_empirical
from kingman.rng import DEFAULT_BLOCK, blocks, substream
from kingman.verify import format_report, run_checks

OUTPUT_DIR_ENV = "KINGMAN_OUTPUT_DIR"
EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _order(text) -> float:
    try:
        return KingmanOrder(float(text)).s
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _positive_float(text) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _atom(text) -> tuple[float, float]:
    try:
        v, rate = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"jump atom must look like SIZE:RATE, got {text!r}") from None
    return v, rate


def _vector(text) -> list[float]:
    try:
        return [float(p) for p in str(text).split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _out_path(path) -> Path:
    path = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _emit_table(args, header: list[str], rows, out=None) -> None:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    target = out if out is not None else getattr(args, "out", None)
    if args.format == "json":
        text = json.dumps({"columns": header, "rows": rows.tolist()}, indent=2) + "\n"
    else:
        text = ",".join(header) + "\n" + "".join(
            ",".join(io.FLOAT_FMT % v for v in row) + "\n" for row in rows)
    if target:
        _out_path(target).write_text(text)
    else:
        sys.stdout.write(text)


def _map_blocks(fn, n: int, block: int, workers: int):
    """Apply ``fn(index, start, stop)`` to fixed row blocks; results in block order."""
    jobs = list(blocks(n, block))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda job: fn(*job), jobs))
    return [fn(*job) for job in jobs]


# --- commands ------------------------------------------------------------

def cmd_kernel(args) -> int:
    x = np.asarray(args.x, dtype=float)
    lam = np.atleast_1d(lambda_kernel(args.s, x))
    if args.bessel:
        _emit_table(args, ["x", "lambda", "bessel_j"], np.column_stack([x, lam, np.atleast_1d(bessel_j(args.s, x))]))
    elif args.format == "json" or x.size > 1:
        _emit_table(args, ["x", "lambda"], np.column_stack([x, lam]))
    else:
        print(f"{lam[0]:.16g}")
    if args.emit_plot_data:
        xs = np.linspace(0.0, args.xmax, args.points)
        _emit_table(args, ["x", "lambda", "bessel_j"],
                    np.column_stack([xs, lambda_kernel(args.s, xs), bessel_j(args.s, xs)]),
                    out=args.emit_plot_data)
    return EXIT_OK


def _sampler(args):
    s, k = args.s, args.k
    if args.law == "rayleigh":
        return lambda rng, m: sample_rayleigh(s, rng, size=(m, k))
    if args.law == "rayleighian":
        scales = args.scales or [1.0] * k
        if len(scales) != k:
            raise UsageError(f"--scales has {len(scales)} entries but --k is {k}")
        law = RayleighianLaw(s, scales)
        return lambda rng, m: sample_rayleighian(law, rng, m)
    if args.law == "theta":
        return lambda rng, m: sample_theta(s, rng, size=(m, k))
    point = args.point or [1.0] * k
    if len(point) != k:
        raise UsageError(f"--point has {len(point)} entries but --k is {k}")
    return lambda rng, m: np.tile(np.asarray(point, dtype=float), (m, 1))


def cmd_sample(args) -> int:
    draw = _sampler(args)
    parts = _map_blocks(lambda i, a, b: draw(substream(args.seed, 1, i), b - a),
                        args.n, args.block_size, args.workers)
    data = np.vstack(parts)
    if args.law == "theta":
        # signed values: not an orthant batch
        _emit_table(args, [f"x{j + 1}" for j in range(args.k)], data,
                    out=None if args.out is None else Path(str(args.out) + ".csv"))
        return EXIT_OK
    batch = SampleBatch(args.s, data, args.seed, {"law": args.law, "block_size": args.block_size})
    if args.out is None:
        _emit_table(args, [f"x{j + 1}" for j in range(batch.dim)], batch.data)
    else:
        io.save_batch(batch, _out_path(args.out))
    return EXIT_OK


def cmd_convolve(args) -> int:
    a, b = io.load_batch(args.a), io.load_batch(args.b)
    if a.order != b.order or a.dim != b.dim:
        raise UsageError("batches differ in order or dimension")
    out = convolve_batches(a, b, substream(args.seed, 3))
    out.seed = args.seed
    if args.out is None:
        _emit_table(args, [f"x{j + 1}" for j in range(out.dim)], out.data)
    else:
        io.save_batch(out, _out_path(args.out))
    return EXIT_OK


def _t_grid(args, k: int) -> np.ndarray:
    if not args.t:
        return default_grid(k)
    grid = np.array(args.t, dtype=float)
    if grid.shape[1] != k:
        raise UsageError(f"--t vectors have {grid.shape[1]} coordinates, expected {k}")
    return grid


def cmd_radchf(args) -> int:
    if args.input is None and args.pair is None:
        raise UsageError("radchf needs --input BATCH and/or --pair PAIR.json")
    batch = io.load_batch(args.input) if args.input else None
    pair = io.load_levy_pair(args.pair) if args.pair else None
    k = batch.dim if batch is not None else pair.dim
    grid = _t_grid(args, k)
    header = [f"t{j + 1}" for j in range(k)]
    cols = [grid]
    if batch is not None:
        value, se = radchf_empirical(batch, grid, return_se=True)
        header += ["empirical", "std_error"]
        cols += [value[:, None], se[:, None]]
        if pair is None and k == 1:
            header.append("rayleigh")
            cols.append(np.asarray(rayleigh_radchf(batch.order, grid[:, 0]))[:, None])
    if pair is not None:
        header.append("levy_khinchine")
        cols.append(np.asarray(levy_khinchine_radchf(pair, grid))[:, None])
    table = np.hstack(cols)
    _emit_table(args, header, table, out=args.emit_plot_data or args.out)
    return EXIT_OK


def _times(args) -> np.ndarray:
    times = np.asarray(args.times, dtype=float)
    if times[0] != 0.0:
        times = np.concatenate([[0.0], times])
    return times


def cmd_simulate(args) -> int:
    times = _times(args)
    spec = SymmetricLevySpec(args.sigma, args.atom or [])

    def run(i, a, b):
        rng = substream(args.seed, 2, i)
        m = b - a
        if args.process == "kl":
            if args.pair is None:
                raise UsageError("--process kl needs --pair PAIR.json")
            return simulate_kl_path(io.load_levy_pair(args.pair), times, rng, m, args.dt)
        if args.process == "bessel":
            return bessel_path(args.s, times, rng, m, standard=args.standard)
        if args.process == "brownian":
            return simulate_brownian(args.d, times, args.variance, rng, m)
        return simulate_symmetric_levy_1d(spec, times, rng, m, args.dt)

    parts = _map_blocks(run, args.n_paths, args.block_size, args.workers)
    paths = PathGrid(times, np.concatenate([p.states for p in parts]), args.seed, parts[0].meta)
    if args.out is None:
        if paths.n_paths != 1:
            raise UsageError("several paths need --out PREFIX")
        _emit_table(args, ["t", *[f"x{j + 1}" for j in range(paths.dim)]],
                    np.column_stack([paths.times, paths.states[0]]))
    else:
        io.save_path(paths, _out_path(args.out))
    return EXIT_OK


def cmd_whf(args) -> int:
    spec = SymmetricLevySpec(args.sigma, args.atom or [])
    pairs = harvest_wh_pairs(spec, args.p, args.n_paths, args.dt, substream(args.seed, 4))
    if args.out:
        io.save_pairs(pairs, _out_path(args.out), seed=args.seed)
    plus = wh_factor(pairs, "ascending", args.nu, args.theta)
    minus = wh_factor(pairs, "descending", args.nu, args.theta)
    target = wh_target(spec, args.p, args.nu, args.theta)
    rows = [[args.nu, args.theta, plus.real, plus.imag, minus.real, minus.imag, target.real, target.imag,
             wh_identity_residual(spec, args.p, args.nu, args.theta, pairs)]]
    header = ["nu", "theta", "psi_plus_re", "psi_plus_im", "psi_minus_re", "psi_minus_im",
              "target_re", "target_im", "residual"]
    # --out names the pair files; the factor table goes to --report or stdout
    _emit_table(args, header, rows, out=args.report or "")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_checks(args.seed, quick=args.quick, only=set(args.only) if args.only else None)
    if args.format == "json":
        text = json.dumps({
            "seed": args.seed, "mode": "quick" if args.quick else "full",
            "checks": [{"number": r.number, "name": r.name, "passed": r.passed,
                        "measures": [{"label": m.label, "value": m.value, "lo": m.lo, "hi": m.hi}
                                     for m in r.measures]} for r in results],
        }, indent=2) + "\n"
    else:
        text = format_report(results, args.seed, args.quick)
    sys.stdout.write(text)
    if args.out:
        _out_path(args.out).write_text(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


# --- parser --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kingman", description="Kingman convolution toolkit")
    parser.add_argument("--config", help="JSON file mirroring the command-line options")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def common(p, seed=True, out=True):
        if seed:
            p.add_argument("--seed", type=int, default=0)
        if out:
            p.add_argument("--out", help="output file or prefix (stdout if omitted)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("kernel", help="evaluate Lambda_s (and J_s)")
    p.add_argument("--s", type=_order, required=True)
    p.add_argument("--x", type=float, nargs="+", required=True)
    p.add_argument("--bessel", action="store_true", help="also print J_s(x)")
    p.add_argument("--emit-plot-data", metavar="FILE")
    p.add_argument("--xmax", type=_positive_float, default=20.0)
    p.add_argument("--points", type=_positive_int, default=401)
    common(p, seed=False)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("sample", help="sample a law into a batch")
    p.add_argument("--law", choices=["rayleigh", "rayleighian", "theta", "point"], default="rayleigh")
    p.add_argument("--s", type=_order, required=True)
    p.add_argument("--k", type=_positive_int, default=1)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--scales", type=_vector, help="Rayleighian lambda vector, comma-separated")
    p.add_argument("--point", type=_vector, help="point-mass location, comma-separated")
    p.add_argument("--block-size", type=_positive_int, default=DEFAULT_BLOCK)
    p.add_argument("--workers", type=_positive_int, default=1)
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("convolve", help="Kingman-convolve two batches")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    common(p)
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("radchf", help="empirical and/or Levy-Khinchine radial ch.f.")
    p.add_argument("--input", help="batch prefix")
    p.add_argument("--pair", help="Levy pair JSON")
    p.add_argument("--t", type=_vector, nargs="+", help="grid vectors, each comma-separated")
    p.add_argument("--emit-plot-data", metavar="FILE")
    common(p, seed=False)
    p.set_defaults(func=cmd_radchf)

    p = sub.add_parser("simulate", help="simulate paths")
    p.add_argument("--process", choices=["kl", "bessel", "brownian", "levy1d"], required=True)
    p.add_argument("--pair", help="Levy pair JSON (kl)")
    p.add_argument("--s", type=_order, default=0.0, help="order (bessel)")
    p.add_argument("--standard", action="store_true", help="unit-variance components (bessel)")
    p.add_argument("--d", type=_positive_int, default=1, help="dimension (brownian)")
    p.add_argument("--variance", type=_positive_float, default=1.0, help="component variance (brownian)")
    p.add_argument("--sigma", type=float, default=0.0, help="Gaussian coefficient (levy1d)")
    p.add_argument("--atom", type=_atom, action="append", help="jump atom SIZE:RATE (levy1d), repeatable")
    p.add_argument("--times", type=float, nargs="+", required=True)
    p.add_argument("--dt", type=_positive_float)
    p.add_argument("--n-paths", type=_positive_int, default=1)
    p.add_argument("--block-size", type=_positive_int, default=4096)
    p.add_argument("--workers", type=_positive_int, default=1)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("whf", help="Wiener-Hopf factors at an exponential time")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--atom", type=_atom, action="append")
    p.add_argument("--p", type=_positive_float, default=1.0)
    p.add_argument("--n-paths", type=_positive_int, default=10**4)
    p.add_argument("--dt", type=_positive_float, default=1e-3)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--report", help="write the factor table here instead of stdout")
    common(p)
    p.set_defaults(func=cmd_whf)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--quick", action="store_true", help="smaller sample sizes")
    p.add_argument("--only", type=int, nargs="+", help="check numbers to run")
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def config_to_argv(config: dict, parser: argparse.ArgumentParser) -> list[str]:
    """Translate a JSON config (``{"command": ..., option: value}``) to argv."""
    if not isinstance(config, dict) or "command" not in config:
        raise UsageError("config must be a JSON object with a 'command' field")
    command = config["command"]
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    if command not in subparsers.choices:
        raise UsageError(f"config field 'command': unknown command {command!r}")
    actions = {opt[2:].replace("-", "_"): (opt, action)
               for action in subparsers.choices[command]._actions
               for opt in action.option_strings if opt.startswith("--")}

    def text(item):
        return ",".join(map(str, item)) if isinstance(item, list) else str(item)

    argv = [command]
    for key, value in config.items():
        if key == "command":
            continue
        if key.replace("-", "_") not in actions:
            raise UsageError(f"config field {key!r} is not an option of {command!r}")
        opt, action = actions[key.replace("-", "_")]
        if value is True:
            argv.append(opt)
        elif value is False or value is None:
            continue
        elif isinstance(value, list) and isinstance(action, argparse._AppendAction):
            for item in value:
                argv += [opt, text(item)]
        elif isinstance(value, list) and action.nargs == "+":
            argv += [opt, *(text(item) for item in value)]
        else:
            argv += [opt, text(value)]
    return argv


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        if args.config:
            try:
                text = Path(args.config).read_text()
                config = json.loads(text)
            except json.JSONDecodeError as exc:
                raise UsageError(f"{args.config}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
            except OSError as exc:
                raise UsageError(f"cannot read config: {exc}") from None
            args = parser.parse_args(config_to_argv(config, parser))
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    except (UsageError, ValueError, OSError) as exc:
        print(f"kingman: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
