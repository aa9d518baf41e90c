"""``torsionlab`` command-line entry point.

Every subcommand writes one CSV or JSON document to ``--out`` (stdout by
default).  Module errors end with exit status 1 and a one-line diagnostic.
"""

import argparse
import contextlib
import sys
from functools import partial

import numpy as np

from . import channels, dissipative, manybody, sat, torsion
from ._io import dump_json, write_csv
from .core import make_rng
from .parallel import pmap


class _Parser(argparse.ArgumentParser):
    # usage errors share the exit status of every other failure
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _vec3(text):
    v = _floats(text)
    if len(v) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers")
    return np.array(v)


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def cmd_viviani(args):
    vi = torsion.viviani_inputs(args.theta)
    r = vi.r_a if args.input == "a" else vi.r_b
    if args.perturbation > 0:
        d = make_rng(args.seed).normal(size=3)
        r = r + args.perturbation * d / np.linalg.norm(d)
        r = r / np.linalg.norm(r)
    res = torsion.discriminate_viviani(r, args.theta, args.g, tol=args.tol)
    out = {"verdict_bit": res.bit, "t_V": res.t_v, "final_r": res.final_r,
           "pole_distance": res.pole_distance, "input": args.input, "theta_ab": args.theta}
    with _output(args.out) as fh:
        dump_json(out, fh)
    return 0


def cmd_flow(args):
    if args.model == "torsion":
        p = torsion.TorsionParams(args.g, args.bx)
        traj = torsion.integrate(args.r0, p, args.t_end, tol=args.tol, n_samples=args.samples)
    else:
        p = dissipative.DissipativeParams(args.gamma, args.m, args.g)
        traj = dissipative.integrate(args.r0, p, args.t_end, tol=args.tol, n_samples=args.samples)
    with _output(args.out) as fh:
        traj.to_csv(fh)
    return 0


def cmd_fixed_points(args):
    p = dissipative.DissipativeParams(args.gamma, args.m, args.g)
    fps = dissipative.fixed_points(p)
    if fps.plus is None:
        out = {"delta": fps.delta, "g_min": fps.g_min, "r_plus": None, "r_minus": None,
               "stable": fps.origin.stable}
    else:
        out = {"delta": fps.delta, "g_min": fps.g_min, "r_plus": fps.plus.r, "r_minus": fps.minus.r,
               "stable": fps.plus.stable and fps.minus.stable, "inside_ball": fps.inside_ball}
    with _output(args.out) as fh:
        dump_json(out, fh)
    return 0


def cmd_squeeze(args):
    phi = np.linspace(0.0, np.pi, args.phis, endpoint=False)
    vf = manybody.var_jphi(args.n, args.chi, args.t, phi)
    ve = manybody.var_jphi_exact(args.n, args.chi, args.t, phi)
    with _output(args.out) as fh:
        write_csv(fh, ["phi", "var_formula", "var_exact"], zip(phi, vf, ve))
    return 0


def cmd_converge(args):
    grid = [(n, t) for t in args.t for n in args.n]
    err = pmap(lambda nt: manybody.mean_field_error(nt[0], args.g, nt[1], args.theta, args.phi), grid)
    with _output(args.out) as fh:
        write_csv(fh, ["N", "t", "epsilon"], ((n, t, e) for (n, t), e in zip(grid, err)))
    return 0


def cmd_sat(args):
    with open(args.dimacs) as fh:
        f = sat.parse_dimacs(fh.read())
    rep = sat.solve_sat_via_qsd(f, args.g, mode=args.mode)
    with _output(args.out) as fh:
        dump_json(rep.to_dict(), fh)
    return 10 if rep.verdict == "SAT" else 20


def cmd_monogamy(args):
    rng = make_rng(args.seed)
    res = manybody.monogamy_arrays(manybody.random_symmetric_three(rng, args.samples))
    out = {"samples": args.samples, "max_violation": float(np.max(res.violation)),
           "identity_max_residual": float(np.max(res.identity_residual))}
    with _output(args.out) as fh:
        dump_json(out, fh)
    return 0


def cmd_monotonicity(args):
    sweep = channels.monotonicity_sweep(args.trials, seed=args.seed)
    with _output(args.out) as fh:
        dump_json(sweep.to_dict(), fh)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--seed", type=int, default=42, help="random seed (default 42)")

    ap = _Parser(prog="torsionlab", description="Nonlinear qubit dynamics toolkit.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("viviani", parents=[common],
                       help="Viviani-curve gate on one of a symmetric input pair",
                       description="Torsion with B_x = g/2 for the gate time t_V; the sign of z "
                                   "gives the bit. Emits JSON.")
    p.add_argument("--theta", type=float, required=True, help="pair angle theta_ab in (0, pi/4]")
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--input", choices=["a", "b"], default="a")
    p.add_argument("--perturbation", type=float, default=0.0,
                   help="size of a random kick applied to the input (seeded)")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_viviani)

    p = sub.add_parser("flow", parents=[common], help="sampled trajectory as CSV",
                       description="Integrate the torsion or dissipative-torsion Bloch equations "
                                   "and write t,x,y,z,E,r2.")
    p.add_argument("--model", choices=["torsion", "dissipative"], default="torsion")
    p.add_argument("--r0", type=_vec3, default=np.array([1.0, 0.0, 0.0]), help="x,y,z")
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--bx", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--t-end", type=float, default=20.0)
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("fixed-points", parents=[common], help="fixed points of the dissipative model",
                       description="delta, g_min and the stable pair r_plus, r_minus of the "
                                   "seven-jump dissipative torsion model. Emits JSON.")
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--g", type=float, default=0.8)
    p.set_defaults(func=cmd_fixed_points)

    p = sub.add_parser("squeeze", parents=[common], help="one-axis twisting variance sweep",
                       description="Var(J_phi) from the large-N formula and from exact Dicke moments. "
                                   "Emits CSV phi,var_formula,var_exact.")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--chi", type=float, default=1.0)
    p.add_argument("--t", type=float, default=0.02)
    p.add_argument("--phis", type=int, default=32)
    p.set_defaults(func=cmd_squeeze)

    p = sub.add_parser("converge", parents=[common], help="mean-field error versus atom number",
                       description="Distance between exact twisted-spin Bloch vectors (chi = 2g/N) "
                                   "and the torsion rotation. Emits CSV N,t,epsilon.")
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--t", type=_floats, default=[1.0], help="comma-separated times")
    p.add_argument("--n", type=_ints, default=[128, 256, 512, 1024, 2048], help="comma-separated N")
    p.add_argument("--theta", type=float, default=np.pi / 3)
    p.add_argument("--phi", type=float, default=np.pi / 5)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("sat", parents=[common], help="3SAT via nonlinear state discrimination",
                       description="Oracle circuit, postselected ancilla, Viviani gate. Exit 10 for "
                                   "SAT, 20 for UNSAT. Emits JSON.")
    p.add_argument("--dimacs", required=True)
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--mode", choices=["circuit", "analytic"], default="circuit")
    p.set_defaults(func=cmd_sat)

    p = sub.add_parser("monogamy", parents=[common], help="three-qubit monogamy sweep",
                       description="Random symmetric three-qubit states: tangle sum versus 4 det rho_1 "
                                   "and the pair-overlap identity. Emits JSON.")
    p.add_argument("--samples", type=int, default=100000)
    p.set_defaults(func=cmd_monogamy)

    p = sub.add_parser("monotonicity", parents=[common], help="trace-distance contraction sweep",
                       description="Random CPTP channels on random state pairs. Emits JSON.")
    p.add_argument("--trials", type=int, default=10000)
    p.set_defaults(func=cmd_monotonicity)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"torsionlab {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
