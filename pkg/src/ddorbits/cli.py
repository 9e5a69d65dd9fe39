"""``ddorbits`` command line.

Exit codes: 0 success, 1 usage or I/O error, 2 numerical failure (a failed
certification, a non-converged minimization, a non-positive family gap).
"""

import argparse
import json
import math
import re
import sys

import numpy as np

from .errors import CollisionError, ConstraintError, DomainError

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

_PI_FORM = re.compile(r"^\s*([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_theta(text):
    """Radians, ``"0.05pi"``, ``"pi/7"`` or ``"2pi/9"``."""
    match = _PI_FORM.match(text)
    if match:
        coef = float(match.group(1)) if match.group(1) else 1.0
        div = float(match.group(2)) if match.group(2) else 1.0
        if div == 0:
            raise argparse.ArgumentTypeError(f"invalid angle {text!r}")
        return coef * math.pi / div
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}")
    return value


def _positive_int(minimum):
    def check(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {value}")
        return value

    return check


def _open_angle(theta):
    if not 0 < theta < math.pi / 2:
        raise UsageError(f"theta must lie in (0, pi/2), got {theta}")


def _write(text, output):
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    with open(output, "w", encoding="utf-8") as fh:
        fh.write(text)


def cmd_certify(args):
    from .testpaths import certify

    report = certify(args.grid)
    if args.format == "json":
        doc = {
            "min_margin": report.min_margin,
            "argmin_theta": report.argmin_theta,
            "passed": report.passed,
            "lipschitz": [{"a_test": a, "g1": g} for a, g in report.lipschitz],
            "theta": report.theta_grid.tolist(),
            "a_test": report.a_test.tolist(),
            "g1": report.g1.tolist(),
        }
        _write(json.dumps(doc), args.output)
    elif args.output:
        report.to_csv(args.output)
    print(
        f"samples {len(report.theta_grid)}  min margin {report.min_margin:.6e} "
        f"at theta = {report.argmin_theta / math.pi:.6f} pi  "
        f"{'PASS' if report.passed else 'FAIL'}",
        file=sys.stderr,
    )
    return EXIT_OK if report.passed else EXIT_NUMERIC


def _init_arg(text):
    from .minimizer import Init, Solution

    if text.startswith("file="):
        return Solution.from_json(text[5:]).path
    return Init(text)


def cmd_minimize(args):
    from .minimizer import TEST_PATH_LIMIT, Init, Problem, minimize

    _open_angle(args.theta)
    try:
        init = _init_arg(args.init) if args.init else None
    except ValueError as exc:
        raise UsageError(f"bad --init: {exc}") from exc
    if init is Init.TEST_PATH and args.theta > TEST_PATH_LIMIT:
        raise UsageError(f"test-path initialization needs theta <= 0.143 pi, got {args.theta / math.pi:.4f} pi")
    sol = minimize(Problem(args.theta, args.n, args.family, init=init))
    _write(sol.to_json() + "\n", args.output)
    note = "" if args.theta <= math.pi / 7 else "  (outside the certified range: no collision certificate)"
    print(
        f"{sol.family.value} theta = {args.theta / math.pi:.6f} pi  action {sol.action.total:.12f}  "
        f"grad {sol.grad_norm:.2e}  iterations {sol.iterations}  "
        f"{'converged' if sol.converged else 'NOT converged: ' + sol.message}{note}",
        file=sys.stderr,
    )
    return EXIT_OK if sol.converged else EXIT_NUMERIC


def cmd_extend(args):
    from .extension import extend_full, junction_c1_check, max_speed
    from .minimizer import Solution

    try:
        sol = Solution.from_json(args.solution)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read solution {args.solution!r}: {exc}") from exc
    orbit = extend_full(sol.path, sol.theta, args.k)
    if args.output:
        orbit.to_csv(args.output)
    jumps = junction_c1_check(orbit)
    speed = max_speed(orbit.nodes, orbit.dt)
    print(orbit.closure.describe())
    print(f"max junction velocity mismatch {max(jumps):.3e} (relative {max(jumps) / speed:.3e})")
    return EXIT_OK


def cmd_compare(args):
    from .zgeometry import compare_families, quadrant_confinement

    _open_angle(args.theta)
    a_pro, a_retro, gap, (pro, retro) = compare_families(args.theta, args.n)
    confined = quadrant_confinement(retro.path, 1e-6)
    doc = {
        "theta": args.theta,
        "n_segments": args.n,
        "a_prograde": a_pro,
        "a_retrograde": a_retro,
        "gap": gap,
        "prograde_converged": pro.converged,
        "retrograde_converged": retro.converged,
        "retrograde_confined": confined,
    }
    if args.output:
        _write(json.dumps(doc, indent=1) + "\n", args.output)
    print(f"prograde {a_pro:.12f}  retrograde {a_retro:.12f}  gap {gap:.6e}")
    print(f"retrograde quadrant confinement: {confined}")
    ok = gap > 0 and pro.converged and retro.converged
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_tables(args):
    from .testpaths import builtin_tables

    tables = builtin_tables()
    if args.format == "json":
        doc = [
            {
                "theta0": t.theta0,
                "interval": list(t.interval),
                "lower_open": t.lower_open,
                "nodes": t.nodes.tolist(),
            }
            for t in tables
        ]
        _write(json.dumps(doc, indent=1) + "\n", args.output)
        return EXIT_OK
    lines = ["table,theta0_over_pi,lo_over_pi,hi_over_pi,t,q1x,q1y,q2x,q2y"]
    for idx, t in enumerate(tables, 1):
        for j, row in enumerate(t.nodes.reshape(11, 4)):
            head = f"{idx},{t.theta0 / math.pi:.17g},{t.interval[0] / math.pi:.17g},{t.interval[1] / math.pi:.17g},{j / 10:g}"
            lines.append(head + "," + ",".join(f"{x:.17g}" for x in row))
    _write("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_kepler(args):
    from .kepler import kepler_inf, minimize_kepler_action

    closed = kepler_inf(args.mu, args.alpha, args.T, args.theta)
    numeric, _, res = minimize_kepler_action(args.mu, args.alpha, args.T, args.theta, n_nodes=args.n, seed=args.seed)
    rel = (numeric - closed) / closed
    print(f"closed form {closed:.12f}  numerical {numeric:.12f}  relative gap {rel:.3e}")
    return EXIT_OK if res.converged else EXIT_NUMERIC


def build_parser():
    parser = _Parser(prog="ddorbits", description="Variational double-double orbits of the parallelogram four-body problem.")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized starting points")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def out(p):
        p.add_argument("-o", "--output", help="output file (default: stdout for text data)")

    p = sub.add_parser("certify", help="compare the test-path action with g1 on a dense grid")
    p.add_argument("--grid", type=_positive_int(2), default=4096, help="samples per interval")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    out(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("minimize", help="minimize the action for one family")
    p.add_argument("--theta", type=parse_theta, required=True)
    p.add_argument("--family", choices=["prograde", "retrograde"], default="prograde")
    p.add_argument("--n", type=_positive_int(10), default=160)
    p.add_argument("--init", help="testpath, straight or file=SOLUTION.json")
    out(p)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("extend", help="extend a solution to [0, 4k] and export it")
    p.add_argument("solution", help="solution JSON written by 'minimize'")
    p.add_argument("--k", type=_positive_int(1), default=1)
    out(p)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("compare", help="prograde versus retrograde minimal action")
    p.add_argument("--theta", type=parse_theta, required=True)
    p.add_argument("--n", type=_positive_int(10), default=160)
    out(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("tables", help="print the built-in test-path tables")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    out(p)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("kepler", help="closed-form versus numerical Keplerian minimum")
    p.add_argument("--theta", type=parse_theta, default=math.pi / 2)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--n", type=_positive_int(3), default=200, help="number of nodes")
    p.set_defaults(func=cmd_kepler)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    np.seterr(all="ignore")
    try:
        return args.func(args)
    except (UsageError, DomainError, ConstraintError) as exc:
        print(f"ddorbits: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ddorbits: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CollisionError, FloatingPointError) as exc:
        print(f"ddorbits: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
