"""Command line front end: ``matpressure <command> FAMILY.json [options]``.

Results go to stdout (or ``--out``) as CSV or JSON; summaries and warnings go
to stderr.  Exit codes: 0 success, 2 input error, 3 numerical failure,
4 budget exceeded.
"""

import argparse
import csv
import io as _io
import json
import sys
from pathlib import Path

import numpy as np

from . import decomp as _decomp
from . import ergodic, gibbs, pressure, svf
from .errors import InputError, MatPressureError
from .io import fmt_num, jsonable, load_family, save_family
from .matfam import NORMS
from .words import DEFAULT_BUDGET


def _q_list(text):
    out = []
    for part in text.split(","):
        try:
            out.append(float(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad q value {part!r}") from None
    return out


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("family", help="family file (JSON)")
    p.add_argument("--norm", choices=NORMS, default="operator")
    p.add_argument("--depth", type=_positive_int, default=10, help="enumeration depth n")
    p.add_argument("--q", type=_q_list, default=[1.0], help="comma-separated q values")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=_positive_int, default=DEFAULT_BUDGET,
                   help="maximum number of words per level")
    p.add_argument("--out", help="write results here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="matpressure",
                                     description="Pressure of matrix products and related tools.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    p = sub.add_parser("decompose", parents=[common], help="block triangularization")
    p.add_argument("--emit-blocks", metavar="DIR", help="write each diagonal block family to DIR")

    p = sub.add_parser("pressure", parents=[common], help="bounds for P(q)")
    p.add_argument("--blocks", action="store_true", help="use the block route")
    p.add_argument("--spectral-check", action="store_true",
                   help="add the exact lift value at even integer q")

    p = sub.add_parser("gibbs", parents=[common], help="finite-level equilibrium state")
    p.add_argument("--level", type=_positive_int, default=None, help="marginal level m")
    p.add_argument("--ratios", action="store_true", help="emit Gibbs ratios instead of masses")

    p = sub.add_parser("lyapunov", parents=[common], help="Lyapunov exponents of a measure")
    p.add_argument("--measure", required=True,
                   help="bernoulli:p1,..  dirac:WORD  mix:w*MEASURE+...")

    p = sub.add_parser("affinity", parents=[common], help="affinity dimension bracket")
    p.add_argument("--tol", type=float, default=1e-6)

    sub.add_parser("svf-pressure", parents=[common], help="bounds for P^phi(q)")
    return parser


class _Output:
    def __init__(self, fmt):
        self.fmt = fmt
        self.header = None
        self.rows = []
        self.doc = {}

    def table(self, header, rows):
        self.header = list(header)
        self.rows = [list(r) for r in rows]

    def render(self):
        if self.fmt == "json":
            return json.dumps(jsonable(self.doc), indent=2, sort_keys=True) + "\n"
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for r in self.rows:
            w.writerow([fmt_num(x) if isinstance(x, (float, np.floating)) else x for x in r])
        return buf.getvalue()


def _note(msg):
    print(msg, file=sys.stderr)


def _achievers(ach):
    return ";".join(str(j) for j in ach)


def cmd_decompose(fam, args, out):
    d = _decomp.block_triangularize(fam, seed=args.seed)
    _note(d.summary())
    _note(f"cond(T) = {fmt_num(d.condition_number_T)}")
    for w in d.warnings:
        _note(f"warning: {w}")
    o = d.offsets
    rows = []
    for j, (size, cert) in enumerate(zip(d.block_sizes, d.certificates), 1):
        rows.append([j, int(o[j - 1]) + 1, size, cert.verdict, j in d.lambda_, cert.definitive])
    out.table(["block", "start", "size", "verdict", "in_lambda", "definitive"], rows)
    out.doc = {"summary": d.summary(), "t": d.t, "block_sizes": d.block_sizes,
               "lambda": d.lambda_, "trivial": d.trivial,
               "vanishing_length": d.vanishing_length,
               "condition_number_T": d.condition_number_T,
               "blocks": [dict(zip(out.header, r)) for r in rows],
               "notes": [c.note for c in d.certificates if c.note], "warnings": d.warnings}
    if args.emit_blocks:
        target = Path(args.emit_blocks)
        target.mkdir(parents=True, exist_ok=True)
        for j, block in enumerate(d.diagonal_blocks, 1):
            save_family(block, target / f"block_{j}.json")
        _note(f"wrote {d.t} block families to {target}")


def cmd_pressure(fam, args, out):
    qs = args.q
    if args.blocks:
        dec = _decomp.block_triangularize(fam, seed=args.seed)
        res = [pressure.pressure_via_blocks(fam, dec, q, args.depth, args.norm, args.budget)
               for q in qs]
        ests = [r.estimate for r in res]
        achs = [r.achievers for r in res]
    else:
        ests = [pressure.pressure_bounds(fam, q, args.depth, args.norm, args.budget) for q in qs]
        achs = [()] * len(qs)
    header = ["q", "lower", "upper", "width", "achiever_blocks"]
    spectral = []
    if args.spectral_check:
        header.append("spectral")
        for q in qs:
            if q == int(q) and int(q) % 2 == 0:
                spectral.append(pressure.pressure_even_spectral(fam, int(q) // 2))
            else:
                spectral.append(None)
    rows = []
    for i, (q, e, a) in enumerate(zip(qs, ests, achs)):
        row = [float(q), float(e.lower), float(e.upper), float(e.width), _achievers(a)]
        if args.spectral_check:
            row.append(spectral[i] if spectral[i] is None else float(spectral[i]))
        rows.append(row)
        if e.trivial:
            _note(f"warning: trivial family, P({fmt_num(q)}) = -inf")
        elif e.conditional:
            _note(f"warning: P({fmt_num(q)}) lower bound is conditional on an empirical constant")
    out.table(header, rows)
    out.doc = {"norm": args.norm, "depth": args.depth, "blocks": args.blocks,
               "rows": [dict(zip(header, r)) for r in rows],
               "lower_routes": [e.lower_routes for e in ests]}


def cmd_gibbs(fam, args, out):
    if len(args.q) != 1:
        raise InputError("gibbs takes a single q")
    q = args.q[0]
    n = args.depth
    m = args.level if args.level is not None else min(n, max(1, n // 2))
    if m > n:
        raise InputError(f"--level {m} exceeds --depth {n}")
    mu = gibbs.cesaro_shift_average(fam, q, n, m, args.norm, args.budget)
    est = pressure.pressure_bounds(fam, q, n, args.norm, args.budget)
    g = gibbs.gibbs_ratio_stats(fam, q, mu, est, args.norm, args.budget)
    _note(f"level {m} of depth {n}: ratio range [{fmt_num(g.ratio_min)}, {fmt_num(g.ratio_max)}], "
          f"spread {fmt_num(g.spread)}, P_hat {fmt_num(g.p_hat)} +/- {fmt_num(g.half_width)}, "
          f"zero mismatches {g.zero_mismatch_count}")
    if args.ratios:
        out.table(["word", "ratio"], [[w, r] for w, r in g.rows(fam.ell)])
    else:
        out.table(["word", "mass", "log_mass"], [list(t) for t in mu.items()])
    out.doc = {"q": q, "depth": n, "level": m,
               "masses": {w: mass for w, mass, _ in mu.items()},
               "diagnostics": {"ratio_min": g.ratio_min, "ratio_max": g.ratio_max,
                               "zero_mismatch_count": g.zero_mismatch_count,
                               "p_hat": g.p_hat, "half_width": g.half_width}}


def cmd_lyapunov(fam, args, out):
    measure = ergodic.parse_measure(args.measure)
    dec = _decomp.block_triangularize(fam, seed=args.seed)
    rep = ergodic.block_lyapunov(fam, dec, measure, args.depth, args.norm, budget=args.budget)
    rows = [["M_*", rep.value]]
    rows += [[f"A_{j}", v] for j, v in rep.block_values.items()]
    rows += [["W", rep.W], ["defect", rep.defect]]
    tag = "ergodic" if rep.ergodic else "NON-ERGODIC"
    _note(f"{ergodic.format_measure(measure)}: M_* = {fmt_num(rep.value)}, W = {fmt_num(rep.W)}, "
          f"defect = {fmt_num(rep.defect)} [{tag}] ({rep.method})")
    if not rep.ergodic and rep.defect > 0:
        _note("note: M_* may exceed W for a non-ergodic measure")
    out.table(["quantity", "value"], [[k, float(v)] for k, v in rows] + [["ergodic", rep.ergodic]])
    out.doc = {"measure": ergodic.format_measure(measure), "method": rep.method,
               "value": rep.value, "block_values": rep.block_values, "W": rep.W,
               "defect": rep.defect, "ergodic": rep.ergodic,
               "per_depth_values": rep.per_depth_values}


def cmd_affinity(fam, args, out):
    r = svf.affinity_dimension(fam, tol=args.tol, n_max=args.depth, budget=args.budget)
    _note(f"affinity dimension in [{fmt_num(r.s_low)}, {fmt_num(r.s_high)}] "
          f"(width {fmt_num(r.width)}, depth {r.depth})")
    if r.width > args.tol:
        _note(f"warning: bracket wider than tol {fmt_num(args.tol)}")
    out.table(["s", "lower", "upper"], [[float(s), float(lo), float(up)] for s, lo, up in r.trace])
    out.doc = {"s_low": r.s_low, "s_high": r.s_high, "width": r.width,
               "iterations": r.iterations, "depth": r.depth,
               "low_interval": r.low_interval, "high_interval": r.high_interval,
               "trace": r.trace}


def cmd_svf_pressure(fam, args, out):
    if any(q < 0 for q in args.q):
        raise InputError("q must be >= 0 for the singular value pressure")
    tables = svf.SvfTables(fam, args.depth, args.budget)
    ests = [tables.bounds(q) for q in args.q]
    header = ["q", "lower", "upper", "width"]
    rows = [[float(e.q), float(e.lower), float(e.upper), float(e.width)] for e in ests]
    out.table(header, rows)
    out.doc = {"depth": args.depth, "rows": [dict(zip(header, r)) for r in rows],
               "lower_routes": [e.lower_routes for e in ests]}


COMMANDS = {
    "decompose": cmd_decompose,
    "pressure": cmd_pressure,
    "gibbs": cmd_gibbs,
    "lyapunov": cmd_lyapunov,
    "affinity": cmd_affinity,
    "svf-pressure": cmd_svf_pressure,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        fam = load_family(args.family)
        out = _Output(args.format)
        COMMANDS[args.command](fam, args, out)
        text = out.render()
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    except MatPressureError as exc:
        _note(f"error: {exc}")
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
