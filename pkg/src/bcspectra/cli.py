"""Command-line front end.

Exit codes: 0 ok, 1 domain error, 2 config or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import io, models, plotting
from .boundary import haar_unitary, standard_bc, u1_bc_from_angle
from .current import current_diagonalization, sign_structure_invariance
from .errors import ConfigError, DomainError
from .hamiltonian import bulk_bands
from .spectra import solve_half_line, solve_segment, wavefunction
from .verify import INJECTIONS, run_all


DEMOS = ("quadratic", "linear", "well", "reduction", "n4")


# --- output helpers -----------------------------------------------------------

def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return io.fmt_float(v) if math.isfinite(v) else ""
    return str(v)


def csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output:
        try:
            Path(output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot write: {exc.strerror}", output) from exc
    else:
        sys.stdout.write(text)


def _figure_path(args, stem: str) -> Path:
    if not args.output:
        raise ConfigError("--plot needs -o so the figure has somewhere to go")
    out = Path(args.output)
    return out.with_name(f"{out.stem}_{stem}.png")


def _window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"window must be 'lo,hi', got {text!r}", field="window") from None
    if not lo < hi:
        raise ConfigError("window needs lo < hi", field="window")
    return lo, hi


def _table(header, rows, args):
    if args.format == "json":
        return io.dumps([dict(zip(header, r)) for r in rows]) + "\n"
    return csv_text(header, rows)


# --- subcommands ----------------------------------------------------------------

def cmd_analyze(args) -> int:
    h = io.load_model(args.model)
    d = current_diagonalization(h, args.l)
    ls = [args.l * f for f in (1 / math.sqrt(10), 1.0, math.sqrt(10))]
    try:
        counts = sign_structure_invariance(h, ls)
        stable = True
    except DomainError:
        counts, stable = (d.n_plus, d.n_minus), False
    admissible = d.n_plus == d.n_minus
    report = {
        "l": args.l,
        "layout": [list(s) for s in d.layout.slots],
        "j_matrix": d.j_matrix,
        "eigenvalues": d.eigvals,
        "n_plus": d.n_plus,
        "n_minus": d.n_minus,
        "verdict": "admissible BCs exist" if admissible else "no admissible BCs",
        "l_invariance": {"l_values": ls, "n_plus_minus": list(counts), "stable": stable},
    }
    if not admissible:
        report["warning"] = "N+ != N-: a boundary cannot be introduced"
        print(f"warning: N+ = {d.n_plus} != N- = {d.n_minus}: a boundary cannot be introduced",
              file=sys.stderr)
    if args.format == "json":
        _emit(io.dumps(report) + "\n", args.output)
    else:
        rows = [(k, float(e), "+" if e > 0 else "-") for k, e in enumerate(d.eigvals)]
        _emit(csv_text(["index", "eigenvalue", "sign"], rows), args.output)
    if args.plot:
        p = np.linspace(-3, 3, 401)
        plotting.bands(p, bulk_bands(h, p), _figure_path(args, "bands"))
    return 0


def _state_record(s) -> dict:
    return {
        "energy": s.energy,
        "momenta": s.momenta,
        "chi": [sol.chi for sol in s.solutions],
        "coefficients": s.coeffs,
        "norm_constant": s.norm_constant,
        "residuals": {
            "bc": s.bc_residual,
            "current": abs(s.current),
            "schrodinger": s.schrodinger_residual,
            "sigma_min": s.sigma_min,
        },
    }


def _psi_csv(states, x) -> str:
    header = ["x"]
    cols = []
    for k, s in enumerate(states):
        psi = wavefunction(s, x)
        for m, row in enumerate(psi):
            header += [f"re_psi{k}_{m}", f"im_psi{k}_{m}"]
            cols += [row.real, row.imag]
    rows = [[xi] + [float(c[i]) for c in cols] for i, xi in enumerate(x)]
    return csv_text(header, rows)


def cmd_solve(args) -> int:
    h = io.load_model(args.model)
    d = current_diagonalization(h, args.l)
    bc = io.load_bc(args.bc, d)
    states = solve_half_line(bc, _window(args.window), args.grid, spacing=args.spacing)
    report = {"window": _window(args.window), "l": args.l, "u": bc.u,
              "states": [_state_record(s) for s in states]}
    _emit(io.dumps(report) + "\n", args.output)
    x = np.linspace(0.0, args.x_max, args.x_points)
    if args.psi_csv:
        _emit(_psi_csv(states, x), args.psi_csv)
    if args.plot:
        plotting.wavefunctions(x, [(s.energy, wavefunction(s, x)) for s in states],
                               _figure_path(args, "psi"))
    return 0


def cmd_segment(args) -> int:
    h = io.load_model(args.model)
    d = current_diagonalization(h, args.l)
    left = io.load_bc(args.bc, d)
    right = io.load_bc(args.bc_right, d) if args.bc_right else left
    states = solve_segment(h, left, right, args.length, _window(args.window), args.grid,
                           spacing=args.spacing)
    records = []
    for s in states:
        rec = _state_record(s)
        rec["residuals"]["bc_left"] = s.residual_left
        rec["residuals"]["bc_right"] = s.residual_right
        records.append(rec)
    report = {"window": _window(args.window), "length": args.length, "l": args.l, "states": records}
    _emit(io.dumps(report) + "\n", args.output)
    x = np.linspace(0.0, args.length, args.x_points)
    if args.psi_csv:
        _emit(_psi_csv(states, x), args.psi_csv)
    if args.plot:
        plotting.wavefunctions(x, [(s.energy, wavefunction(s, x)) for s in states],
                               _figure_path(args, "psi"))
    return 0


def cmd_scan(args) -> int:
    h = io.load_model(args.model)
    d = current_diagonalization(h, args.l)
    window = _window(args.window)
    params: list[float] = []
    bcs = []
    if args.nu_grid:
        if d.nc != 2:
            raise ConfigError("--nu-grid needs an Nc = 2 model; use --haar", field="nu-grid")
        params = [-math.pi + 2 * math.pi * (k + 1) / args.nu_grid for k in range(args.nu_grid)]
        bcs = [u1_bc_from_angle(d, nu) for nu in params]
        label = "nu"
    else:
        if d.n_plus != d.n_minus:
            raise ConfigError("model admits no standard BCs (N+ != N-)", args.model, "top_orders")
        seeds = np.random.SeedSequence(args.seed).spawn(args.haar)
        params = list(range(args.haar))
        bcs = [standard_bc(d, haar_unitary(d.n_plus, s)) for s in seeds]
        label = "sample"

    results = [solve_half_line(bc, window, args.grid, spacing=args.spacing) for bc in bcs]
    width = max([len(r) for r in results] + [1])
    header = [label, "n_states"] + [f"energy_{k}" for k in range(width)] + ["max_residual"]
    rows = []
    for x, states in sorted(zip(params, results), key=lambda t: t[0]):
        energies = [s.energy for s in states]
        resid = max([max(s.bc_residual, abs(s.current), s.schrodinger_residual) for s in states],
                    default=None)
        rows.append([x, len(states)] + energies + [None] * (width - len(energies)) + [resid])
    _emit(_table(header, rows, args), args.output)
    if args.plot:
        plotting.energy_curve(params, [[s.energy for s in r] for r in results],
                              _figure_path(args, "energies"), xlabel=label)
    return 0


def cmd_verify(args) -> int:
    summary = run_all(seed=args.seed, inject=args.inject or ())
    _emit(io.dumps(summary) + "\n", args.output)
    return 0 if summary["passed"] else 1


def _demo_quadratic():
    model = models.QuadraticModel(1.0)
    d = current_diagonalization(model.hamiltonian())
    rows = []
    for nu in np.linspace(-3.0, 3.0, 25):
        try:
            big_l = models.angle_length_map(1.0, nu)
        except DomainError:
            big_l = math.inf
        exact = models.quadratic_bound_energy(model, big_l)
        found = solve_half_line(u1_bc_from_angle(d, nu), (-1e4, -1e-6), 128, spacing="log")
        num = found[0].energy if found else None
        err = abs(num - exact) / abs(exact) if found and exact is not None else None
        rows.append([float(nu), big_l if math.isfinite(big_l) else None, exact, num, err])
    return ["nu", "L", "analytic", "numeric", "rel_error"], rows


def _demo_linear():
    model = models.LinearTwoBandModel(1.0, 1.0)
    d = current_diagonalization(model.hamiltonian())
    rows = []
    for nu in np.linspace(-3.0, 3.0, 25):
        exact = models.linear_bound_state(model, nu)
        found = solve_half_line(u1_bc_from_angle(d, nu), (-1 + 1e-6, 1 - 1e-6), 128)
        num = found[0].energy if found else None
        err = abs(num - exact[0]) if found and exact else None
        rows.append([float(nu), exact[0] if exact else None, num, err])
    return ["nu", "analytic", "numeric", "abs_error"], rows


def _demo_well():
    rows = []
    for delta in (0.1, 0.05, 0.02, 0.01):
        x0 = (math.pi / 2 + delta)
        model = models.PotentialWellModel(1.0, 1.0, x0)
        exact = models.well_exact_spectrum(model)[-1]
        effective = models.quadratic_bound_energy(models.QuadraticModel(1.0), models.well_effective_bc(model))
        rows.append([delta, model.alpha0, exact, effective, abs(effective - exact) / abs(exact)])
    return ["delta", "alpha0", "exact", "effective", "rel_error"], rows


def _demo_reduction():
    model = models.LinearTwoBandModel(1.0, 1.0)
    rows = []
    for nu in np.linspace(-0.2, -0.02, 10):
        e1 = models.linear_bound_state(model, nu)[0]
        h2, l2 = models.low_energy_reduction(model)
        e2 = models.quadratic_bound_energy(models.QuadraticModel(h2, l2), models.angle_length_map(l2, nu))
        diff = abs(e1 - model.dx - e2)
        rows.append([float(nu), e1, model.dx + e2, diff, diff / (model.dx * nu**4)])
    return ["nu", "linear", "reduced", "abs_diff", "diff_over_nu4"], rows


def _demo_n4():
    from .hamiltonian import new_hamiltonian

    rows = []
    for h2, h4, l in ((1, 1, 1), (0, 1, 1), (1, 1, 10), (2, -0.5, 0.3), (-1, 3, 2)):
        exact = models.n4_current_eigenvalues(h2, h4, l)
        num = current_diagonalization(new_hamiltonian(1, [4], {2: h2, 4: h4}), l).eigvals
        rows.append([h2, h4, l, *exact.tolist(), *num.tolist(), float(np.max(np.abs(num - exact)))])
    header = ["h2", "h4", "l"] + [f"analytic_{k}" for k in range(4)] + [f"numeric_{k}" for k in range(4)]
    return header + ["max_abs_diff"], rows


def cmd_demo(args) -> int:
    header, rows = {
        "quadratic": _demo_quadratic,
        "linear": _demo_linear,
        "well": _demo_well,
        "reduction": _demo_reduction,
        "n4": _demo_n4,
    }[args.name]()
    _emit(_table(header, rows, args), args.output)
    # (analytic, numeric) columns of the curve demos
    curve = {"quadratic": (2, 3), "linear": (1, 2)}.get(args.name)
    if args.plot and curve:
        ia, inum = curve
        xs = [r[0] for r in rows]
        ref = [(r[0], r[ia]) for r in rows if r[ia] is not None]
        plotting.energy_curve(
            xs, [[r[inum]] if r[inum] is not None else [] for r in rows],
            _figure_path(args, "energies"), reference=tuple(zip(*ref)) if ref else None,
        )
    return 0


# --- parser ---------------------------------------------------------------------

def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _grid(text):
    v = int(text)
    if v < 64:
        raise argparse.ArgumentTypeError("grid must be >= 64")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcspectra", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("-o", "--output", help="output file (default: stdout)")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--plot", action="store_true", help="also write a PNG figure next to -o")

    def solver(p):
        p.add_argument("-m", "--model", required=True)
        p.add_argument("-b", "--bc", required=True, help="BC file or inline JSON")
        p.add_argument("-l", type=_positive_float, default=1.0, help="length scale")
        p.add_argument("-w", "--window", required=True, help="energy window lo,hi")
        p.add_argument("-n", "--grid", type=_grid, default=256)
        p.add_argument("--spacing", choices=("linear", "log"), default="linear")
        p.add_argument("--psi-csv", help="write psi(x) of every state to this CSV")
        p.add_argument("--x-points", type=int, default=201)

    p = sub.add_parser("analyze", help="current matrix, mover counts, admissibility")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("-l", type=_positive_float, default=1.0)
    common(p)
    p.set_defaults(func=cmd_analyze, format="json")

    p = sub.add_parser("solve", help="half-line bound states")
    solver(p)
    p.add_argument("--x-max", type=_positive_float, default=10.0)
    common(p, fmt=False)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("segment", help="levels of a finite segment [0, X]")
    solver(p)
    p.add_argument("-X", "--length", type=_positive_float, required=True)
    p.add_argument("--bc-right", help="right-end BC (default: same as -b)")
    common(p, fmt=False)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("scan", help="bound energies over a family of BCs")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("-l", type=_positive_float, default=1.0)
    p.add_argument("-w", "--window", required=True)
    p.add_argument("-n", "--grid", type=_grid, default=256)
    p.add_argument("--spacing", choices=("linear", "log"), default="linear")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--nu-grid", type=int, help="N angles over (-pi, pi]")
    group.add_argument("--haar", type=int, help="number of Haar-random U")
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", help="run the self-check suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject", action="append", choices=INJECTIONS)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("demo", help="closed-form models against the solver")
    p.add_argument("name", choices=DEMOS)
    common(p)
    p.set_defaults(func=cmd_demo)
    return parser


def _join_window(argv):
    # "-w -1,1" would otherwise parse "-1,1" as an option
    out = []
    it = iter(argv)
    for a in it:
        if a in ("-w", "--window"):
            out.append(f"--window={next(it, '')}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    argv = _join_window(sys.argv[1:] if argv is None else list(argv))
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
