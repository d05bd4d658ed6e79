"""Command-line front end.

Exit status: 0 success, 1 invalid input or configuration, 2 when the spectral
solver and the RK4 oracle disagree.
"""

from __future__ import annotations

import argparse
import io
import sys
from contextlib import contextmanager

import numpy as np

from .config import RunConfig, load_config
from .design import (
    InfeasibleGeometryError,
    UnderdeterminedFitError,
    coupling_from_separation,
    design_separations,
    fit_coupling_law,
    nn_validity,
    read_measurements,
)
from .disorder import monte_carlo_transfer, write_report, write_samples
from .lattice import ValidationError, build_hamiltonian
from .propagation import (
    apply_uniform_loss,
    default_z_grid,
    propagate_integrator,
    propagate_spectral,
    write_record,
)
from .scenarios import FIGURE_NAMES, run_figure

ORACLE_TOLERANCE = 1e-6

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INCONSISTENT = 2


class OracleMismatch(RuntimeError):
    pass


@contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _seed(args, cfg: RunConfig) -> int:
    return cfg.run.seed if args.seed is None else args.seed


def cmd_design(args, cfg: RunConfig) -> int:
    spec, law = cfg.channel, cfg.law
    if spec.n_sites < 2:
        raise ValidationError("channel.n_sites", "a geometry needs at least 2 sites")
    couplings = spec.couplings()
    geom = design_separations(couplings, law)
    nn = nn_validity(geom, law, spec.length_cm)
    realized = coupling_from_separation(law, geom.separations)
    buf = io.StringIO()
    buf.write("gap,separation_um,coupling_per_cm\n")
    for k, (d, c) in enumerate(zip(geom.separations, np.atleast_1d(realized)), start=1):
        buf.write(f"{k},{d:.12g},{c:.12g}\n")
    buf.write(f"# d_min_um={nn.d_min:.12g} epsilon={nn.epsilon:.12g} max_sites_bound={nn.max_sites_bound}\n")
    with _output(args.out) as fh:
        fh.write(buf.getvalue())
    return EXIT_OK


def cmd_propagate(args, cfg: RunConfig) -> int:
    site = args.input_site or cfg.run.input_site
    h = build_hamiltonian(cfg.channel)
    z = default_z_grid(cfg.channel.length_cm, cfg.run.z_samples)
    rec = propagate_spectral(h, site, z)
    if args.oracle:
        ref = propagate_integrator(h, site, z)
        dev = float(np.max(np.abs(rec.intensities() - ref.intensities())))
        print(f"oracle max intensity deviation: {dev:.3e}", file=sys.stderr)
        if dev > ORACLE_TOLERANCE:
            raise OracleMismatch(f"spectral and RK4 disagree by {dev:.3e} > {ORACLE_TOLERANCE:g}")
    rec = apply_uniform_loss(rec, cfg.disorder.loss_db_per_cm)
    out = args.out or cfg.run.record_path
    text = io.StringIO()
    write_record(rec, text, renormalize=args.renormalize)
    with _output(out) as fh:
        fh.write(text.getvalue())
    return EXIT_OK


def cmd_montecarlo(args, cfg: RunConfig) -> int:
    trials = args.trials or cfg.run.trials
    sites = None if args.all_sites else (args.input_site or cfg.run.input_site)
    samples_path = args.samples or cfg.run.samples_path
    report = monte_carlo_transfer(
        cfg.channel, cfg.law, cfg.disorder, sites, trials, _seed(args, cfg),
        renormalize=cfg.run.renormalize, keep_samples=samples_path is not None,
        workers=args.workers,
    )
    text = io.StringIO()
    write_report(report, text)
    with _output(args.out or cfg.run.report_path) as fh:
        fh.write(text.getvalue())
    if samples_path is not None:
        write_samples(report, samples_path)
    if report.resampled:
        print(f"resampled {report.resampled} non-positive draws", file=sys.stderr)
    return EXIT_OK


def cmd_fit(args, cfg: RunConfig) -> int:
    fit = fit_coupling_law(read_measurements(args.measurements))
    text = (
        "alpha_per_cm,beta_per_um,rms_log_residual,n_points\n"
        f"{fit.law.alpha:.12g},{fit.law.beta:.12g},{fit.rms_log_residual:.12g},{fit.n_points}\n"
    )
    with _output(args.out) as fh:
        fh.write(text)
    return EXIT_OK


def cmd_figure(args, cfg: RunConfig) -> int:
    if args.name not in FIGURE_NAMES:
        print(f"unknown figure {args.name!r}; valid names: {', '.join(FIGURE_NAMES)}", file=sys.stderr)
        return EXIT_INVALID
    text = run_figure(args.name, with_disorder=args.disorder)
    with _output(args.out) as fh:
        fh.write(text)
    return EXIT_OK


def _u64(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="YAML run configuration")
    common.add_argument("--seed", type=_u64, default=argparse.SUPPRESS, help="master seed (u64)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file (default: stdout)")

    p = argparse.ArgumentParser(prog="pstlattice", parents=[common],
                                description="Engineered-coupling waveguide lattices.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("design", parents=[common], help="separations realizing the configured couplings")
    s.set_defaults(func=cmd_design)

    s = sub.add_parser("propagate", parents=[common], help="intensity map along the device")
    s.add_argument("--input-site", type=int)
    s.add_argument("--oracle", action="store_true", help="cross-check against the RK4 integrator")
    s.add_argument("--renormalize", action="store_true", help="rescale each row to unit power")
    s.set_defaults(func=cmd_propagate)

    s = sub.add_parser("montecarlo", parents=[common], help="disorder ensemble transfer statistics")
    s.add_argument("--input-site", type=int)
    s.add_argument("--all-sites", action="store_true")
    s.add_argument("--trials", type=int)
    s.add_argument("--samples", help="write the per-trial fidelities here")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_montecarlo)

    s = sub.add_parser("fit", parents=[common], help="fit the exponential coupling law")
    s.add_argument("measurements", help="CSV of separation_um, coupling_per_cm")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("figure", parents=[common], help="reference-device scenario data")
    s.add_argument("name", help=", ".join(FIGURE_NAMES))
    s.add_argument("--disorder", action="store_true", help="fig2i: add disordered-ensemble columns")
    s.set_defaults(func=cmd_figure)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for name in ("config", "seed", "out"):
        if not hasattr(args, name):
            setattr(args, name, None)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except OracleMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (ValidationError, InfeasibleGeometryError, UnderdeterminedFitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
