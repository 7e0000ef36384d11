"""Command line front end: ``hypererg {decompose,density,sample,converge,maximal,check}``.

Exit codes: 0 success, 1 a convergence flag or failed check, 2 bad input.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from hypererg import __version__, config as cfg, estimators, geometry, radial, reports, streams
from hypererg.arcs import ArcSet
from hypererg.errors import ConfigError, DomainError, NotUnimodularError
from hypererg.measures import KINDS, MeasureFamily

EXIT_OK = 0
EXIT_FLAGGED = 1
EXIT_INPUT = 2


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(columns, rows, fmt: str) -> str:
    rows = list(rows)
    if fmt == "json":
        return reports.dumps_json({"schema_version": reports.SCHEMA_VERSION,
                                   "rows": [dict(zip(columns, r)) for r in rows]})
    return reports._csv(columns, ([repr(v) if isinstance(v, float) else v for v in r] for r in rows))


def _grid(spec: str) -> np.ndarray:
    """``lo:hi:count`` or a comma separated list."""
    try:
        if ":" in spec:
            lo, hi, count = spec.split(":")
            return np.linspace(float(lo), float(hi), int(count))
        return np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise ConfigError(f"bad grid {spec!r}") from None


def _arc_arg(spec: str | None):
    if spec is None:
        return None
    try:
        pairs = [tuple(float(v) for v in part.split(",")) for part in spec.split(";")]
    except ValueError:
        raise ConfigError(f"bad arc list {spec!r}") from None
    return ArcSet.from_pi_units(pairs)


# -- subcommands ---------------------------------------------------------------------

def cmd_decompose(args) -> int:
    g = geometry.GroupElement(*args.entries)
    cart = geometry.cartan_decompose(g)
    iwa = geometry.iwasawa_decompose(g)
    res_c = g.rep_distance(geometry.cartan_reconstruct(cart))
    res_i = g.rep_distance(geometry.iwasawa_reconstruct(iwa))
    rows = [
        ("cartan", "theta1", cart.theta1), ("cartan", "r", cart.r), ("cartan", "theta2", cart.theta2),
        ("cartan", "residual", res_c),
        ("iwasawa", "theta", iwa.theta), ("iwasawa", "s", iwa.s), ("iwasawa", "u", iwa.u),
        ("iwasawa", "residual", res_i),
    ]
    _emit(_table(("decomposition", "coordinate", "value"), rows, args.format), args.out)
    return EXIT_OK


def cmd_density(args) -> int:
    profile = cfg.parse_profile(args.profile)
    t = _grid(args.t)
    if np.any(t < 0):
        raise ConfigError("density grid must be nonnegative")
    dens = radial.KakDensity(profile) if args.which == "kak" else radial.HorocycleDensity(profile)
    with np.errstate(divide="ignore"):
        values = dens(t)
    _emit(_table(("t", "density"), zip(map(float, t), map(float, values)), args.format), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    profile = cfg.parse_profile(args.profile)
    fam = MeasureFamily(args.kind, profile, args.eps, args.b, _arc_arg(args.left), _arc_arg(args.right))
    rng = streams.substream(args.seed, streams.TAG_SAMPLE)
    if profile.is_plane and profile.c == 1.0:
        m = fam.sample_batch(args.r, rng, args.n)
        r = geometry.cartan_radius_array(m)
        rows = zip(*(map(float, col) for col in (m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1], r)))
        columns = ("a", "b", "c", "d", "r")
    else:
        rows = ((float(v),) for v in fam.radial(args.r).sample(rng, args.n))
        columns = ("t",)
    _emit(_table(columns, rows, args.format), args.out)
    return EXIT_OK


def _load(args) -> cfg.ExperimentConfig:
    conf = cfg.load_config(args.config)
    if args.seed is not None:
        conf.seed = streams.check_seed(args.seed)
    return conf


def _workers(args, conf) -> int:
    if args.workers is not None:
        return streams.resolve_workers(args.workers)
    if streams.WORKERS_ENV in os.environ:
        return streams.resolve_workers(None)
    return conf.workers


def _write_reports(args, conf, csv_text: str, json_data: dict) -> None:
    stem = args.out or conf.output.get("path")
    if stem:
        reports.write_pair(stem, csv_text, json_data)
    fmt = args.format or conf.output.get("format", "csv")
    sys.stdout.write(csv_text if fmt == "csv" else reports.dumps_json(json_data))


def cmd_converge(args) -> int:
    conf = _load(args)
    action, f, fam = conf.build_action(), conf.build_observable(), conf.build_family()
    starts = conf.build_starts(action)
    report = estimators.convergence_sweep(fam, action, f, starts, conf.r_grid(), conf.n_per_r,
                                          conf.seed, _workers(args, conf), conf.bias_budget)
    _write_reports(args, conf, reports.converge_csv(report), reports.converge_json(report, conf.to_dict()))
    return EXIT_OK if report.passed else EXIT_FLAGGED


def cmd_maximal(args) -> int:
    conf = _load(args)
    p = conf.p if args.p is None else args.p
    if not p > 1:
        raise ConfigError("maximal ratio needs p > 1")
    action, f, fam = conf.build_action(), conf.build_observable(), conf.build_family()
    starts = conf.build_starts(action)
    est = estimators.maximal_ratio(fam, action, f, starts, conf.r_grid(), p, conf.n_per_r,
                                   conf.seed, _workers(args, conf))
    _write_reports(args, conf, reports.maximal_csv(est), reports.maximal_json(est, conf.to_dict()))
    return EXIT_OK


def cmd_check(args) -> int:
    from hypererg import checks

    ok = True
    for name, passed, detail, elapsed in checks.run_all(seed=args.seed if args.seed is not None else 1):
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name:<28} {detail}  ({elapsed:.2f}s)")
    return EXIT_OK if ok else EXIT_FLAGGED


# -- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypererg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt_default="csv"):
        p.add_argument("--out", help="output path (converge/maximal: file stem for .csv and .json)")
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        return p

    p = common(sub.add_parser("decompose", help="Cartan and Iwasawa coordinates of a matrix"))
    # a tuple metavar breaks argparse's missing-argument message on Python 3.10
    p.add_argument("entries", nargs=4, type=float, metavar="ENTRY", help="matrix entries a b c d, row by row")
    p.set_defaults(func=cmd_decompose)

    p = common(sub.add_parser("density", help="tabulate a radial Haar density"))
    p.add_argument("--profile", default="plane", help="name or m1,m2,c")
    p.add_argument("--which", choices=("kak", "psi"), default="kak")
    p.add_argument("--t", default="0:5:11", help="lo:hi:count or comma list")
    p.set_defaults(func=cmd_density)

    p = common(sub.add_parser("sample", help="draw samples from an averaging family"))
    p.add_argument("--kind", choices=KINDS, default="shell")
    p.add_argument("--profile", default="plane")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--left", help="arcs in units of pi, e.g. '0,0.25;0.5,0.6'")
    p.add_argument("--right")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_sample)

    for name, func, help_ in (("converge", cmd_converge, "run a convergence sweep from a config"),
                              ("maximal", cmd_maximal, "empirical maximal-function ratio from a config")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        if name == "maximal":
            p.add_argument("--p", type=float, default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("check", help="run the built-in invariant checks")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError, NotUnimodularError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
