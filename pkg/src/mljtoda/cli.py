"""Command-line front end: coefficient and potential tables, Poincare sections, Lyapunov runs.

Every command writes its outputs plus a ``manifest.json`` into ``--out``
(default ``$MLJTODA_OUTPUT_DIR/<command>`` or ``runs/<command>``).
``mljtoda replay manifest.json`` re-runs a command and checks the outputs
byte for byte.

Exit codes: 0 success, 1 replay mismatch, 2 usage error, 3 infeasible
parameters, 4 partial results.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io, normal_form
from ._backend import NAME as BACKEND
from .analysis.lyapunov import lyapunov_series
from .analysis.section import default_section_config, poincare_section
from .chain import Boundary
from .dynamics import SCHEMES, IntegratorConfig
from .potentials import Fpu, Mlj, NormalizedMlj, RatioLimit, TaylorToda, Toda

log = logging.getLogger("mljtoda")

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_PARTIAL = 0, 1, 2, 3, 4

FAMILIES = {
    "toda": ("lam",),
    "mlj": ("n", "m", "epsilon0", "a"),
    "mlj-normalized": ("n", "m", "lam"),
    "taylor": ("order", "lam"),
    "fpu": ("alpha", "beta", "gamma"),
    "ratio-limit": ("delta", "lam"),
}
DEFAULTS = {"lam": -2.0, "n": 12, "m": 6, "epsilon0": 1.0, "a": 1.0, "order": 3,
            "alpha": -1.0, "beta": 0.0, "gamma": 0.0, "delta": 0.5}
FLAG = {"lam": "--lambda"}


class Infeasible(Exception):
    """Parameters are well formed but describe an impossible run."""


def _add_potential_flags(sp):
    g = sp.add_argument_group("potential")
    g.add_argument("--potential", choices=sorted(FAMILIES), default="toda")
    g.add_argument("--lambda", dest="lam", type=float)
    for name in ("n", "m", "order"):
        g.add_argument(f"--{name}", type=int)
    for name in ("alpha", "beta", "gamma", "delta", "epsilon0", "a"):
        g.add_argument(f"--{name}", type=float)


def _check_potential_flags(parser, args, normalized_only=False):
    allowed = FAMILIES[args.potential]
    extra = [FLAG.get(k, f"--{k}") for k in DEFAULTS
             if getattr(args, k) is not None and k not in allowed]
    if extra:
        parser.error(f"{', '.join(extra)} not valid with --potential {args.potential}")
    if normalized_only and args.potential == "mlj":
        parser.error("dynamics commands need a normalized potential; "
                     "use --potential mlj-normalized")


def build_potential(args):
    kw = {k: DEFAULTS[k] if getattr(args, k) is None else getattr(args, k)
          for k in FAMILIES[args.potential]}
    fam = args.potential
    if fam == "toda":
        return Toda(kw["lam"])
    if fam == "mlj":
        return Mlj(kw["n"], kw["m"], kw["epsilon0"], kw["a"])
    if fam == "mlj-normalized":
        return NormalizedMlj(kw["n"], kw["m"], kw["lam"])
    if fam == "taylor":
        return TaylorToda(kw["order"], kw["lam"])
    if fam == "fpu":
        return Fpu(kw["alpha"], kw["beta"], kw["gamma"])
    return RatioLimit(kw["delta"], kw["lam"])


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _j_list(text):
    try:
        js = [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text}")
    if any(j < 4 for j in js):
        raise argparse.ArgumentTypeError("orders j must be >= 4")
    return js


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mljtoda", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--out", type=Path, help="output directory")
        return sp

    sp = add("coeffs", "table of Delta_j = k_nm,j - 1 against n/m")
    sp.add_argument("--m", type=_positive_int, default=6)
    sp.add_argument("--j", type=_j_list, default=[4, 5, 6, 7], help="e.g. 4 or 4,5,6,7")
    sp.add_argument("--nmax-ratio", type=_positive_int, default=32)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = add("potential-table", "potential values on a grid, optionally against Toda")
    _add_potential_flags(sp)
    sp.add_argument("--xmin", type=float, default=-1.0)
    sp.add_argument("--xmax", type=float, default=2.0)
    sp.add_argument("--points", type=_positive_int, default=201)
    sp.add_argument("--compare", choices=("toda",))

    def dyn(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--dt", type=_positive_float)
        sp.add_argument("--scheme", choices=sorted(SCHEMES), default="yoshida4")
        sp.add_argument("--threads", type=_positive_int, default=1)

    sp = add("poincare", "Poincare section X=0, PX>0 of the three-particle ring")
    _add_potential_flags(sp)
    sp.add_argument("--energy", type=_positive_float, default=1.0)
    sp.add_argument("--orbits", type=_positive_int, default=40)
    sp.add_argument("--crossings", type=_positive_int, default=400)
    dyn(sp)

    sp = add("lyapunov", "ensemble-averaged finite-time Lyapunov indicator")
    _add_potential_flags(sp)
    sp.add_argument("--N", type=int, default=32)
    sp.add_argument("--eps", type=_positive_float, default=0.1)
    sp.add_argument("--tmax", type=_positive_float, default=1e5)
    sp.add_argument("--samples", type=_positive_int, default=24)
    sp.add_argument("--renorm", type=_positive_int, default=10)
    sp.add_argument("--boundary", choices=[b.value for b in Boundary], default="fixed")
    sp.add_argument("--per-member", action="store_true", help="one CSV column per member")
    dyn(sp)

    sp = sub.add_parser("replay", help="re-run a manifest and compare outputs")
    sp.add_argument("manifest", type=Path)
    sp.add_argument("--out", type=Path, help="where to write the replayed outputs")
    return parser


def _strip_out(argv):
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--out":
            skip = True
        elif not a.startswith("--out="):
            out.append(a)
    return out


def _finish(args, argv, outputs, status="ok"):
    params = {k: v for k, v in vars(args).items()
              if k not in ("out", "verbose") and v is not None}
    if "potential" in params:
        params["potential"] = build_potential(args).describe()
    manifest = io.RunManifest.build(args.command, params, params.get("seed"), outputs,
                                    _strip_out(argv), BACKEND, status)
    path = manifest.write(args.out / "manifest.json")
    for p in outputs:
        print(p)
    print(path)


def cmd_coeffs(args, argv):
    rows = normal_form.delta_table(args.m, args.j, args.nmax_ratio)
    by_n = {}
    for r in rows:
        by_n.setdefault((r.n_over_m, r.n), {})[r.j] = r.delta
    header = ["n_over_m", "n"] + [f"delta_{j}" for j in args.j]
    table = [[q, n] + [d[j] for j in args.j] for (q, n), d in by_n.items()]
    if args.format == "csv":
        path = io.write_rows(args.out / "coeffs.csv", header, table)
    else:
        path = io.write_json(args.out / "coeffs.json", {
            "m": args.m, "j": args.j,
            "rows": [dict(zip(header, [r[0], r[1]] + [io.fmt(v) for v in r[2:]]))
                     for r in table]})
    _finish(args, argv, [path])
    return EXIT_OK


def cmd_potential_table(args, argv):
    p = build_potential(args)
    x = np.linspace(args.xmin, args.xmax, args.points)
    ok = np.asarray(p.in_domain(x), dtype=bool) & np.ones_like(x, dtype=bool)
    v = np.full_like(x, np.nan)
    v[ok] = p.value(x[ok])
    header = ["x", "V"]
    cols = [x, v]
    if args.compare == "toda":
        t = Toda(float(getattr(p, "lam", DEFAULTS["lam"]))).value(x)
        header += ["toda", "diff"]
        cols += [t, v - t]
    header.append("status")
    rows = [list(r) + ["ok" if good else "domain"] for r, good in zip(zip(*cols), ok)]
    path = io.write_rows(args.out / "potential.csv", header, rows)
    bad = int((~ok).sum())
    if bad:
        log.warning("%d of %d grid points outside the domain of %s", bad, len(x),
                    p.describe())
    status = "ok" if bad == 0 else ("infeasible" if bad == len(x) else "partial-domain")
    _finish(args, argv, [path], status)
    return EXIT_INFEASIBLE if bad == len(x) else EXIT_OK


def cmd_poincare(args, argv):
    p = build_potential(args)
    cfg = default_section_config(args.energy)
    if args.dt is not None or args.scheme != cfg.scheme:
        cfg = IntegratorConfig(dt=args.dt or cfg.dt, scheme=args.scheme)
    try:
        result = poincare_section(p, args.energy, args.orbits, args.crossings, args.seed, cfg,
                                  threads=args.threads)
    except ValueError as exc:
        raise Infeasible(str(exc)) from exc
    if result.n_resampled:
        log.info("resampled %d initial points outside the accessible region",
                 result.n_resampled)
    bad = [k for k, o in enumerate(result.orbits) if o.status != "ok"]
    outputs = io.write_section(result, args.out / "section.csv", args.out / "section.json")
    _finish(args, argv, outputs, "partial" if bad else "ok")
    if bad:
        log.error("%d orbits did not complete: %s", len(bad),
                  ", ".join(f"{k} ({result.orbits[k].status})" for k in bad))
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_lyapunov(args, argv):
    if args.N < 2:
        raise Infeasible(f"need N >= 2, got {args.N}")
    p = build_potential(args)
    cfg = IntegratorConfig(dt=args.dt or 0.02, scheme=args.scheme,
                           renorm_interval=args.renorm)
    if args.tmax < 10 * cfg.dt:
        raise Infeasible(f"--tmax {args.tmax} shorter than the first grid time {10 * cfg.dt}")
    series = lyapunov_series(p, args.N, args.eps, args.tmax, args.samples, args.seed, cfg,
                             Boundary(args.boundary), args.threads)
    outputs = io.write_lyapunov(series, args.out / "lyapunov.csv", args.out / "lyapunov.json",
                                per_member=args.per_member)
    _finish(args, argv, outputs, "ok" if series.complete else "partial")
    if not series.complete:
        for msg in series.failures:
            log.error("aborted %s", msg)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_replay(args, argv):
    manifest = io.RunManifest.read(args.manifest)
    out = args.out or args.manifest.parent / "replay"
    code = main(manifest.argv + ["--out", str(out)])
    if code not in (EXIT_OK, EXIT_PARTIAL):
        return code
    checks = manifest.verify(out)
    for name, same in checks.items():
        print(f"{'match' if same else 'MISMATCH'} {name}")
    return EXIT_OK if all(checks.values()) else EXIT_MISMATCH


COMMANDS = {"coeffs": cmd_coeffs, "potential-table": cmd_potential_table,
            "poincare": cmd_poincare, "lyapunov": cmd_lyapunov, "replay": cmd_replay}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.command in ("potential-table", "poincare", "lyapunov"):
        sub = parser._subparsers._group_actions[0].choices[args.command]
        try:
            _check_potential_flags(sub, args, normalized_only=args.command != "potential-table")
        except SystemExit as exc:
            return int(exc.code)
    if args.command != "replay" and args.out is None:
        args.out = io.default_output_dir() / args.command
    try:
        return COMMANDS[args.command](args, argv)
    except Infeasible as exc:
        print(f"mljtoda: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        # parameter combinations rejected by the constructors
        print(f"mljtoda: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
