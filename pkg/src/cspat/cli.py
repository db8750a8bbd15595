"""Command-line experiment driver.

Subcommands: simulate, measure, reconstruct, series, verify-appendix, and
pipeline (all stages in one run).  Every command takes --config (JSON),
--profile {paper, ci}, --seed (overrides the matrix seed) and --out.

Exit codes: 0 success, 2 configuration error, 3 file/IO error,
4 numeric failure.
"""

import argparse
import os
import sys

import numpy as np

from . import fileio
from .errors import ConfigError, FileFormatError, NumericError
from .pipeline import (
    ExperimentConfig,
    MODE_CS_IDENTITY,
    MODE_CS_T,
    run_measure,
    run_pipeline,
    run_reconstruct,
    run_simulate,
    run_series,
    verify_appendix,
)

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def _load_config(args):
    if args.config:
        return ExperimentConfig.from_file(args.config, profile=args.profile,
                                          seed=args.seed)
    return ExperimentConfig.with_overrides(profile=args.profile, seed=args.seed)


def _out_dir(args, config):
    out = args.out or config.output_dir
    os.makedirs(out, exist_ok=True)
    return out


def cmd_simulate(args):
    config = _load_config(args)
    out = _out_dir(args, config)
    pressure = run_simulate(config)
    path = os.path.join(out, "pressure.patp")
    fileio.write_pressure(path, pressure)
    print(f"wrote {path}  ({pressure.grid.n} detectors x {pressure.times.n_t} samples)")
    if args.csv:
        csv_path = os.path.join(out, "pressure.csv")
        fileio.write_pressure_csv(csv_path, pressure)
        print(f"wrote {csv_path}")
    return 0


def cmd_measure(args):
    config = _load_config(args)
    out = _out_dir(args, config)
    pressure = fileio.read_pressure(args.pressure, config.detector_grid)
    matrix, cs = run_measure(config, pressure)
    mat_path = os.path.join(out, "matrix.patm")
    cs_path = os.path.join(out, "csdata.paty")
    fileio.write_matrix(mat_path, matrix)
    fileio.write_csdata(cs_path, cs)
    print(f"wrote {mat_path}  ({matrix.kind} {matrix.m} x {matrix.n})")
    print(f"wrote {cs_path}  ({cs.m} measurements x {cs.times.n_t} samples)")
    return 0


def _write_recon_outputs(out, config, image, reports, extras, label=None):
    label = label or config.mode
    img_path = os.path.join(out, f"recon_{label}.pati")
    fileio.write_image(img_path, image)
    fileio.write_image_csv(os.path.join(out, f"recon_{label}.csv"), image)
    fileio.write_image_pgm(os.path.join(out, f"recon_{label}.pgm"), image)
    if image.grid.n_y > 1:
        fileio.write_mips_pgm(os.path.join(out, f"recon_{label}"), image)
    fileio.write_error_report_csv(os.path.join(out, f"errors_{label}.csv"), reports)
    if "truth" in extras:
        fileio.write_image(os.path.join(out, "truth.pati"), extras["truth"])
    if "recovered" in extras:
        rec = extras["recovered"]
        fileio.write_filtered(os.path.join(out, f"recovered_{label}.patf"),
                              rec.times, rec.values, "recovered")
        fileio.write_objectives_csv(os.path.join(out, f"objectives_{label}.csv"),
                                    rec.objectives)
    for r in reports:
        print(f"{label}: normalized l{r.alpha} error = {r.value:.6g}")
    print(f"wrote {img_path}")
    return img_path


def cmd_reconstruct(args):
    config = _load_config(args)
    out = _out_dir(args, config)
    pressure = cs = matrix = None
    if config.mode in (MODE_CS_IDENTITY, MODE_CS_T):
        if not args.csdata or not args.matrix:
            raise ConfigError("CS modes need --csdata and --matrix files")
        cs = fileio.read_csdata(args.csdata)
        matrix = fileio.read_matrix(args.matrix)
    else:
        if not args.pressure:
            raise ConfigError("standard modes need a --pressure file")
        pressure = fileio.read_pressure(args.pressure, config.detector_grid)
    image, reports, extras = run_reconstruct(config, pressure=pressure, cs=cs,
                                             matrix=matrix)
    _write_recon_outputs(out, config, image, reports, extras)
    return 0


def cmd_pipeline(args):
    config = _load_config(args)
    out = _out_dir(args, config)
    pressure = run_simulate(config)
    fileio.write_pressure(os.path.join(out, "pressure.patp"), pressure)
    if config.mode in (MODE_CS_IDENTITY, MODE_CS_T):
        matrix, cs = run_measure(config, pressure)
        fileio.write_matrix(os.path.join(out, "matrix.patm"), matrix)
        fileio.write_csdata(os.path.join(out, "csdata.paty"), cs)
        image, reports, extras = run_reconstruct(config, cs=cs, matrix=matrix)
    else:
        image, reports, extras = run_reconstruct(config, pressure=pressure)
    _write_recon_outputs(out, config, image, reports, extras)
    return 0


def cmd_series(args):
    config = _load_config(args)
    out = _out_dir(args, config)
    try:
        factors = [int(tok) for tok in args.factors.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad factor list {args.factors!r}") from exc
    if not factors:
        raise ConfigError("need at least one compression factor")
    rows, images = run_series(config, factors)
    series_path = os.path.join(out, "series.csv")
    fileio.write_series_csv(series_path, rows)
    for factor, image in images.items():
        fileio.write_image(os.path.join(out, f"recon_factor{factor}.pati"), image)
        fileio.write_image_pgm(os.path.join(out, f"recon_factor{factor}.pgm"), image)
    for factor, alpha, err in rows:
        print(f"n/m = {factor:g}: normalized l{alpha} error = {err:.6g}")
    print(f"wrote {series_path}")
    return 0


def cmd_verify_appendix(args):
    sizes = {}
    if args.sizes:
        for tok in args.sizes.split(","):
            key, _, val = tok.partition("=")
            if not val:
                raise ConfigError(f"bad sizes token {tok!r} (expected key=value)")
            sizes[key.strip()] = int(val)
    results = verify_appendix(sizes or None, seed=args.seed)
    lines = [f"{name}: value = {value:.6g}  [{'ok' if ok else 'REPORTED'}]"
             for name, value, ok in results]
    for line in lines:
        print(line)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "appendix_report.txt")
        with open(path, "w") as f:
            f.write("\n".join(lines) + "\n")
        print(f"wrote {path}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cspat",
        description="Compressed-sensing photoacoustic tomography experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--profile", choices=["paper", "ci"],
                       help="scale preset (default: paper)")
        p.add_argument("--seed", type=int, help="override the matrix seed")
        p.add_argument("--out", help="output directory (default from config)")

    p = sub.add_parser("simulate", help="analytic forward simulation -> PATP")
    common(p)
    p.add_argument("--csv", action="store_true", help="also write pressure.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("measure", help="compressed measurements -> PATY + PATM")
    common(p)
    p.add_argument("--pressure", required=True, help="input PATP file")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("reconstruct", help="reconstruction for the configured mode")
    common(p)
    p.add_argument("--pressure", help="input PATP file (standard modes)")
    p.add_argument("--csdata", help="input PATY file (CS modes)")
    p.add_argument("--matrix", help="input PATM file (CS modes)")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("pipeline", help="simulate + measure + reconstruct")
    common(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("series", help="error vs compression factor sweep")
    common(p)
    p.add_argument("--factors", required=True,
                   help="comma-separated compression factors, e.g. 16,8,4,2,1")
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("verify-appendix", help="empirical matrix verifiers")
    p.add_argument("--sizes", help="comma-separated key=value sizes "
                                   "(hadamard, expander_m, expander_n, expander_d)")
    p.add_argument("--seed", type=int, help="seed for the random checks")
    p.add_argument("--out", help="directory for appendix_report.txt")
    p.set_defaults(func=cmd_verify_appendix)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileFormatError, OSError) as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
