"""Command-line front end.

Commands: invariants, polys, even, solve, monodromy, scan, probe-degenerate.
Output is canonical JSON (or CSV for scans) and is byte-identical for
identical configuration and seed.

Exit codes: 0 success, 2 critical parameters, 3 even-sector nonexistence,
4 numerically inconclusive.
"""

import argparse
import json
import math
import sys

from . import __version__
from .apparency import (
    ParamVec,
    PunctureSpec,
    build_even_poly,
    build_m0_system,
    derive_problem,
    even_count_Ne,
    problem_m0,
)
from .elliptic import compute_invariants
from .errors import (
    CriticalParametersError,
    EvenNonexistenceError,
    InconclusiveError,
    StructuralError,
)
from .jsonio import dumps_canonical, rows_to_csv
from .monodromy import verify_root
from .solver import SolverConfig, scan_tau, solve_even, solve_m0, solve_m0_degenerate

__all__ = ["main", "build_parser"]

_SPECIAL_TAU = {
    "i": complex(0.0, 1.0),
    "rho": complex(0.5, math.sqrt(3.0) / 2.0),
}

_SCAN_COLUMNS = [
    "tau_re",
    "tau_im",
    "bound",
    "total",
    "even_total",
    "max_residual",
    "degenerate",
    "error",
]


def parse_tau(text):
    """'re,im' pair or one of the named points 'i', 'rho'."""
    if text in _SPECIAL_TAU:
        return _SPECIAL_TAU[text]
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(
            "expected 're,im' or one of: " + ", ".join(sorted(_SPECIAL_TAU))
        )
    try:
        re, im = float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError("tau components must be numbers")
    if im <= 0:
        raise argparse.ArgumentTypeError("tau must satisfy Im > 0")
    return complex(re, im)


def _load_punctures(path):
    """Puncture list (and optional parameter vector) from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    items = data["punctures"] if isinstance(data, dict) else data
    punctures = []
    for it in items:
        p = it["p"]
        punctures.append(
            PunctureSpec(p=complex(p[0], p[1]), n1=int(it["n1"]), n2=int(it["n2"]))
        )
    params = None
    if isinstance(data, dict) and "params" in data:
        pr = data["params"]

        def _cplx_list(key):
            return tuple(complex(v[0], v[1]) for v in pr[key])

        params = ParamVec(
            A=_cplx_list("A"),
            Bk=_cplx_list("Bk"),
            B=complex(pr["B"][0], pr["B"][1]),
            Dk=_cplx_list("Dk"),
            D=complex(pr["D"][0], pr["D"][1]),
        )
    return punctures, params


def _problem_from_args(args):
    tau = args.tau
    if tau is None:
        raise StructuralError("--tau is required for this command")
    if args.punctures:
        punctures, params = _load_punctures(args.punctures)
        problem = derive_problem(tau, punctures)
        problem.require_noncritical()
        return problem, params
    if args.n1 is None or args.n2 is None:
        raise StructuralError("either --punctures or --n1/--n2 is required")
    return problem_m0(tau, args.n1, args.n2), None


def _solver_config(args):
    kw = {"seed": args.seed}
    if args.tol is not None:
        kw["accept_tol"] = args.tol
    return SolverConfig(**kw)


def cmd_invariants(args):
    tau = args.tau
    if tau is None:
        raise StructuralError("--tau is required")
    ctx = compute_invariants(tau)
    return ctx.to_json_dict()


def cmd_polys(args):
    if args.n1 is None or args.n2 is None:
        raise StructuralError("--n1 and --n2 are required")
    system = build_m0_system(args.n1, args.n2)
    out = system.to_json_dict()
    out["text"] = system.text()
    return out


def cmd_even(args):
    if args.n1 is None or args.n2 is None:
        raise StructuralError("--n1 and --n2 are required")
    # run the sector-existence check first so odd/odd pairs get the
    # dedicated signal even when they are also critical
    even_count_Ne(args.n1, args.n2)
    if args.tau is None:
        ep = build_even_poly(args.n1, args.n2)
        return {
            "n1": ep.n1,
            "n2": ep.n2,
            "Ne": ep.Ne,
            "poly": ep.poly.text(),
        }
    problem, _ = _problem_from_args(args)
    report = solve_even(problem, config=_solver_config(args))
    return report.to_json_dict()


def cmd_solve(args):
    problem, _ = _problem_from_args(args)
    report = solve_m0(problem, config=_solver_config(args))
    return report.to_json_dict()


def cmd_monodromy(args):
    problem, params = _problem_from_args(args)
    ctx = compute_invariants(problem.lattice)
    rtol = args.tol if args.tol is not None else 1e-11
    if params is not None:
        reports = [verify_root(problem, ctx, params, rtol=rtol)]
        census = None
    else:
        census = solve_m0(problem, ctx, config=_solver_config(args))
        reports = []
        for cl in census.clusters:
            pv = ParamVec.m0(cl.B, cl.D0, cl.D)
            reports.append(verify_root(problem, ctx, pv, rtol=rtol))
    out = {
        "census": None if census is None else census.to_json_dict(),
        "roots": [r.to_json_dict() for r in reports],
    }
    return out


def cmd_scan(args):
    if args.n1 is None or args.n2 is None:
        raise StructuralError("--n1 and --n2 are required")
    grid = {
        "re0": args.re0,
        "re1": args.re1,
        "nre": args.nre,
        "im0": args.im0,
        "im1": args.im1,
        "nim": args.nim,
    }
    rows = scan_tau(args.n1, args.n2, grid, config=_solver_config(args))
    return rows


def cmd_probe_degenerate(args):
    if args.n1 is None or args.n2 is None:
        raise StructuralError("--n1 and --n2 are required")
    report = solve_m0_degenerate(args.n1, args.n2, config=_solver_config(args))
    return report.to_json_dict()


_DISPATCH = {
    "invariants": cmd_invariants,
    "polys": cmd_polys,
    "even": cmd_even,
    "solve": cmd_solve,
    "monodromy": cmd_monodromy,
    "scan": cmd_scan,
    "probe-degenerate": cmd_probe_degenerate,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="toda-census",
        description="Census of apparent-singularity parameters on flat tori",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "command",
        choices=sorted(_DISPATCH),
        help="what to compute",
    )
    parser.add_argument("--tau", type=parse_tau, default=None,
                        help="torus modulus: 're,im', 'i', or 'rho'")
    parser.add_argument("--n1", type=int, default=None, help="first multiplicity")
    parser.add_argument("--n2", type=int, default=None, help="second multiplicity")
    parser.add_argument("--punctures", default=None, metavar="FILE",
                        help="JSON file with a puncture list (and optional params)")
    parser.add_argument("--seed", type=int, default=0, help="multi-start seed")
    parser.add_argument("--tol", type=float, default=None,
                        help="acceptance tolerance (solver) / rtol (monodromy)")
    parser.add_argument("--out", default=None, metavar="FILE",
                        help="write the artifact here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default=None,
                        help="output format (csv only for scan)")
    for key in ("re0", "re1", "im0", "im1"):
        parser.add_argument("--" + key, type=float, default=None,
                            help="scan grid bound")
    for key in ("nre", "nim"):
        parser.add_argument("--" + key, type=int, default=None,
                            help="scan grid count")
    return parser


def _emit(args, payload):
    fmt = args.format
    if args.command == "scan":
        if fmt is None:
            fmt = "csv"
    elif fmt == "csv":
        raise StructuralError("csv output is only available for scan")
    if fmt == "csv":
        text = rows_to_csv(payload, columns=_SCAN_COLUMNS)
    else:
        if isinstance(payload, list):
            payload = {"rows": payload}
        text = dumps_canonical(payload)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "scan":
        missing = [k for k in ("re0", "re1", "nre", "im0", "im1", "nim")
                   if getattr(args, k) is None]
        if missing:
            parser.error("scan requires --" + " --".join(missing))
    try:
        payload = _DISPATCH[args.command](args)
        _emit(args, payload)
    except CriticalParametersError as e:
        print("critical parameters: %s" % e, file=sys.stderr)
        return 2
    except EvenNonexistenceError as e:
        print("even sector: %s" % e, file=sys.stderr)
        return 3
    except InconclusiveError as e:
        print("inconclusive: %s" % e, file=sys.stderr)
        return 4
    except StructuralError as e:
        parser.error(str(e))
    return 0


if __name__ == "__main__":
    sys.exit(main())
