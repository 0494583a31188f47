"""Command-line front end.

Exit codes: 0 success, 1 input or validation error, 2 numerical failure.
Information quantities are printed with 9 significant digits, in nats
unless ``--unit bits`` is given; ``inf`` is the literal infinity token.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import io as cio
from .capacity import (
    Ensemble,
    capacity_cost,
    capacity_per_unit_cost,
    chi_reference_decomposition,
    holevo_chi_entropy_form,
    holevo_chi_relent_form,
)
from .channels import (
    CostFunction,
    ParamStateFamily,
    bloch_family,
    mixture_family,
    random_channel,
    random_qubit_family,
    random_state,
    rotation_family,
)
from .core import (
    DomainError,
    NumericalError,
    PreconditionError,
    ValidationError,
)
from .fisher import estimation_bounds_report, first_order_consistent, second_order_errors
from .gaussian import (
    FiducialChannel,
    GaussianParams,
    classify,
    cpuc_gaussian,
    cpuc_gaussian_numeric,
    from_params,
    gaussian_relative_entropy,
    pie_curve,
    vacuum_output_params,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2
LN2 = math.log(2.0)


class InputError(Exception):
    """Bad command-line usage; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def fmt(v: float) -> str:
    """9 significant digits, '.' decimal, ``inf`` for infinity."""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return f"{v:.9g}"


@dataclass
class RunConfig:
    command: str
    unit: str = "nats"
    seed: int = 0
    out: Optional[str] = None
    inputs: dict = field(default_factory=dict)

    @property
    def scale(self) -> float:
        return 1.0 / LN2 if self.unit == "bits" else 1.0

    def info(self, v: float) -> str:
        return fmt(v * self.scale)


# -- argument helpers -------------------------------------------------------------

def _add_gaussian_flags(p: argparse.ArgumentParser, required: bool = True):
    g = p.add_argument_group("Gaussian channel")
    g.add_argument("--eta", type=float, help="transmission or gain")
    g.add_argument("--n-tilde", type=float, default=0.0, help="environment thermal photons (default 0)")
    g.add_argument("--omega-tilde", type=float, default=1.0, help="environment squeezing (default 1)")
    g.add_argument("--gaussian-channel", metavar="JSON", help='file with {"eta", "n_tilde", "omega_tilde"}')
    p.set_defaults(_gaussian_required=required)


def _gaussian_channel(args) -> FiducialChannel:
    if args.gaussian_channel:
        return cio.load_gaussian_channel(args.gaussian_channel)
    if args.eta is None:
        raise InputError("give --eta (and optionally --n-tilde, --omega-tilde) or --gaussian-channel")
    return FiducialChannel(args.eta, args.n_tilde, args.omega_tilde)


def _add_unit(p):
    p.add_argument("--unit", choices=("nats", "bits"), default="nats")


def _add_family_flags(p, choices):
    p.add_argument("--family", choices=choices, required=True)
    p.add_argument("--state0", metavar="JSON", help="free state for --family mixture")
    p.add_argument("--state1", metavar="JSON", help="signal state for --family mixture")
    p.add_argument("--seed", type=int, default=0, help="seed for --family random-qubit (default 0)")


def _family(args, dim_in: int) -> ParamStateFamily:
    name = args.family
    if name == "bloch":
        fam = bloch_family()
    elif name == "bloch-mixed":
        fam = bloch_family(mixed=True)
    elif name == "rotation":
        fam = rotation_family()
    elif name == "random-qubit":
        fam = random_qubit_family(np.random.default_rng(args.seed))
    elif name == "mixture":
        if not (args.state0 and args.state1):
            raise InputError("--family mixture needs --state0 and --state1")
        fam = mixture_family(cio.load_state(args.state0), cio.load_state(args.state1))
    else:  # pragma: no cover - argparse restricts choices
        raise InputError(f"unknown family {name}")
    if fam.dim != dim_in:
        raise InputError(f"family '{name}' has dimension {fam.dim} but the channel input has {dim_in}")
    return fam


def _cost(args, dim: int) -> CostFunction:
    if args.cost == "photon":
        return CostFunction.photon_number(dim)
    if args.cost == "quadratic":
        return CostFunction.quadratic()
    if not args.cost_matrix:
        raise InputError("--cost observable needs --cost-matrix")
    return CostFunction.observable(cio.load_state_matrix(args.cost_matrix))


def _grid(lo: float, hi: float, points: int, log_grid: bool) -> np.ndarray:
    if not (lo > 0 and hi > lo and math.isfinite(hi)):
        raise InputError(f"need 0 < min < max, got min={lo}, max={hi}")
    if points < 2:
        raise InputError("need at least 2 grid points")
    return np.geomspace(lo, hi, points) if log_grid else np.linspace(lo, hi, points)


def _emit_csv(header, rows, out: Optional[str]):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if out:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _vec(x) -> str:
    return "[" + ", ".join(fmt(v) for v in np.atleast_1d(x)) + "]"


# -- commands ---------------------------------------------------------------------

def cmd_gaussian_cpuc(args, cfg: RunConfig) -> int:
    ch = _gaussian_channel(args)
    value = cpuc_gaussian(ch)
    vac = vacuum_output_params(ch)
    print(f"{cfg.info(value)} {cfg.unit}/photon")
    print(f"classification: {classify(ch)}")
    print(f"N0_out: {fmt(vac.N_out)}")
    print(f"omega0_out: {fmt(vac.omega_out)}")
    return EXIT_OK


def cmd_pie_curve(args, cfg: RunConfig) -> int:
    ch = _gaussian_channel(args)
    grid = _grid(args.nbar_min, args.nbar_max, args.points, args.log_grid)
    rows = [(n, pie * cfg.scale, n * pie * cfg.scale) for n, pie in pie_curve(ch, grid)]
    _emit_csv(("nbar", "pie", "capacity"), rows, cfg.out)
    return EXIT_OK


def cmd_finite_cpuc(args, cfg: RunConfig) -> int:
    ch = cio.load_channel(args.channel)
    fam = _family(args, ch.dim_in)
    cost = _cost(args, ch.dim_in)
    res = capacity_per_unit_cost(ch, fam, cost, grid_points=args.grid_points, n_starts=args.starts)
    if res.is_infinite:
        where = res.witness.replace("-", " ")
        print(f"inf ({where} at x={_vec(res.params)})")
    elif res.witness == "maximizer":
        print(f"{cfg.info(res.value)} {cfg.unit}/cost (maximizer at x={_vec(res.params)})")
    else:
        print(f"{cfg.info(res.value)} {cfg.unit}/cost ({res.witness})")
    return EXIT_OK


def cmd_chi(args, cfg: RunConfig) -> int:
    ens = cio.load_ensemble(args.ensemble)
    ch = cio.load_channel(args.channel) if args.channel else None
    if ch is not None and ch.dim_in != ens.dim:
        raise InputError(f"ensemble dimension {ens.dim} does not match channel input {ch.dim_in}")
    print(f"chi (entropy form): {cfg.info(holevo_chi_entropy_form(ens, ch))} {cfg.unit}")
    print(f"chi (relative-entropy form): {cfg.info(holevo_chi_relent_form(ens, ch))} {cfg.unit}")
    if args.reference:
        dec = chi_reference_decomposition(ens, ch, cio.load_state(args.reference))
        print(f"sum p D(rho_x || ref): {cfg.info(dec.term1)} {cfg.unit}")
        print(f"D(rho_avg || ref): {cfg.info(dec.term2)} {cfg.unit}")
    return EXIT_OK


def cmd_capacity_cost(args, cfg: RunConfig) -> int:
    ens = cio.load_ensemble(args.ensemble)
    ch = cio.load_channel(args.channel) if args.channel else None
    if args.beta:
        betas = np.asarray(args.beta, dtype=float)
        if np.any(betas <= 0):
            raise InputError("beta values must be positive")
    else:
        if args.beta_min is None or args.beta_max is None:
            raise InputError("give --beta values or --beta-min and --beta-max")
        betas = _grid(args.beta_min, args.beta_max, args.points, args.log_grid)
    pts = [capacity_cost(ens.states, ens.costs, ch, float(b)) for b in np.sort(betas)]
    bad = [p.beta for p in pts if not p.converged]
    _emit_csv(("beta", "capacity"), [(p.beta, p.capacity * cfg.scale) for p in pts], cfg.out)
    if bad:
        print(f"capacity-cost: no convergence at beta={', '.join(fmt(b) for b in bad)}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_bounds(args, cfg: RunConfig) -> int:
    gaussian_ch = None
    if args.family == "gaussian-displacement":
        from .fock import TruncationConfig, displacement_family

        gaussian_ch = _gaussian_channel(args)
        fam = displacement_family(gaussian_ch, TruncationConfig(args.cutoff))
        report = estimation_bounds_report(None, fam, compute_cpuc=False)
        cpuc = cpuc_gaussian(gaussian_ch) if not args.no_cpuc else None
    else:
        if not args.channel:
            raise InputError("--channel is required for finite-dimensional families")
        ch = cio.load_channel(args.channel)
        fam = _family(args, ch.dim_in)
        report = estimation_bounds_report(ch, fam, compute_cpuc=not args.no_cpuc)
        cpuc = report.cpuc
    j2, f2 = report.J_half, report.F_half
    print(f"J/2: {cfg.info(j2)} {cfg.unit}/cost")
    print(f"F/2: {cfg.info(f2)} {cfg.unit}/cost")
    print(f"E_min >= 1/J = {fmt(report.emin_bound_J)} >= 1/F = {fmt(report.emin_bound_F)}")
    slack = report.slack
    f_le_j = f2 <= j2 + slack * max(1.0, f2)
    print(f"F <= J: {'yes' if f_le_j else 'NO'}")
    ok = f_le_j
    if cpuc is not None:
        print(f"C: {cfg.info(cpuc)} {cfg.unit}/cost")
        holds = cpuc >= j2 - slack * max(1.0, j2) and f_le_j
        ok = ok and holds
        if gaussian_ch is not None:
            print(f"|J/2 - C|: {fmt(abs(j2 - cpuc) * cfg.scale)}")
        print(f"C >= J/2 >= F/2: {'yes' if holds else 'NO'}")
    if report.vacuous:
        print("chain: vacuous (J = F = 0)")
    return EXIT_OK if ok else EXIT_NUMERICAL


# -- validate ---------------------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _check_oracle(n_cases: int, perturb: float, rng) -> Check:
    from .fock import TruncationConfig, oracle_relative_entropy

    cfg = TruncationConfig(60)
    worst, done, tries = 0.0, 0, 0
    while done < n_cases and tries < 20 * n_cases:
        tries += 1
        p1 = GaussianParams(rng.uniform(0, 1), rng.uniform(0.6, 1.6), complex(*rng.uniform(-0.7, 0.7, 2)))
        p2 = GaussianParams(rng.uniform(0.05, 1), rng.uniform(0.6, 1.6), complex(*rng.uniform(-0.7, 0.7, 2)))
        try:
            ref = oracle_relative_entropy(p1, p2, cfg)
        except NumericalError:
            continue
        got = gaussian_relative_entropy(from_params(p1), from_params(p2)) * (1.0 + perturb)
        worst = max(worst, abs(got - ref))
        done += 1
    ok = done == n_cases and worst <= 1e-5
    return Check("gaussian-vs-fock-oracle", ok, f"{done} cases, max |diff| {worst:.3g} (tol 1e-5)")


def _check_holevo(n_cases: int, rng) -> Check:
    worst = 0.0
    for _ in range(n_cases):
        d_in, d_out = rng.integers(2, 5, size=2)
        k = int(rng.integers(-(-d_in // d_out), 5))
        n = int(rng.integers(2, 7))
        ch = random_channel(int(d_in), int(d_out), k, rng)
        states = [random_state(int(d_in), rng, rank=int(rng.integers(1, d_in + 1))) for _ in range(n)]
        ens = Ensemble(rng.dirichlet(np.ones(n)), tuple(states), np.zeros(n))
        worst = max(worst, abs(holevo_chi_entropy_form(ens, ch) - holevo_chi_relent_form(ens, ch)))
    return Check("holevo-two-forms", worst <= 1e-9, f"{n_cases} ensembles, max |diff| {worst:.3g} (tol 1e-9)")


def _check_reqfi(n_cases: int, rng) -> Check:
    deltas = (1e-2, 1e-3)
    worst, bad = 0.0, 0
    for _ in range(n_cases):
        j, errs = second_order_errors(random_qubit_family(rng), 0.0, deltas)
        worst = max(worst, abs(errs[1]) / max(1.0, j))
        bad += not first_order_consistent(j, deltas, errs)
    ok = bad == 0 and worst <= 1e-2
    return Check(
        "reqfi-finite-difference", ok,
        f"{n_cases} families, {bad} not O(delta), max error at delta=1e-3 {worst:.3g}",
    )


def _check_squeezing_sup() -> Check:
    ch = FiducialChannel(0.9, 1.0, 2.0)
    a, b = cpuc_gaussian(ch), cpuc_gaussian_numeric(ch)
    return Check("squeezing-closed-form-vs-sup", abs(a - b) <= 1e-4, f"closed {a:.9g}, numeric {b:.9g}")


def cmd_validate(args, cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    quick = args.quick
    checks: list[tuple[str, Callable[[], Check]]] = [
        ("gaussian-vs-fock-oracle", lambda: _check_oracle(4 if quick else 20, args.perturb, rng)),
        ("holevo-two-forms", lambda: _check_holevo(20 if quick else 200, rng)),
        ("reqfi-finite-difference", lambda: _check_reqfi(3 if quick else 20, rng)),
    ]
    if not quick:
        checks.append(("squeezing-closed-form-vs-sup", _check_squeezing_sup))
    failed = 0
    for name, run in checks:
        t0 = time.perf_counter()
        try:
            c = run()
        except Exception as e:  # a crashing check is a failed check
            c = Check(name, False, f"raised {type(e).__name__}: {e}")
        failed += not c.passed
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail} [{time.perf_counter() - t0:.2f}s]")
    print("all checks passed" if not failed else f"{failed} check(s) failed")
    return EXIT_OK if not failed else EXIT_NUMERICAL


# -- entry point ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cpuc", description="Capacity per unit cost of quantum channels.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gaussian-cpuc", help="closed-form capacity per unit cost of a fiducial Gaussian channel")
    _add_gaussian_flags(p)
    _add_unit(p)
    p.set_defaults(func=cmd_gaussian_cpuc)

    p = sub.add_parser("pie-curve", help="photon information efficiency of coherent encoding (CSV)")
    _add_gaussian_flags(p)
    p.add_argument("--nbar-min", type=float, default=1e-6)
    p.add_argument("--nbar-max", type=float, default=1.0)
    p.add_argument("--points", type=int, default=61)
    p.add_argument("--log-grid", action="store_true", help="geometric spacing in nbar")
    p.add_argument("--out", help="CSV path (default stdout)")
    _add_unit(p)
    p.set_defaults(func=cmd_pie_curve)

    p = sub.add_parser("finite-cpuc", help="capacity per unit cost of a Kraus channel over a state family")
    p.add_argument("--channel", required=True, metavar="JSON")
    _add_family_flags(p, ("bloch", "bloch-mixed", "rotation", "random-qubit", "mixture"))
    p.add_argument("--cost", choices=("photon", "quadratic", "observable"), default="photon")
    p.add_argument("--cost-matrix", metavar="JSON", help="Hermitian cost observable for --cost observable")
    p.add_argument("--grid-points", type=int, default=33)
    p.add_argument("--starts", type=int, default=5)
    _add_unit(p)
    p.set_defaults(func=cmd_finite_cpuc)

    p = sub.add_parser("chi", help="Holevo information of an ensemble, optionally through a channel")
    p.add_argument("--ensemble", required=True, metavar="JSON")
    p.add_argument("--channel", metavar="JSON")
    p.add_argument("--reference", metavar="JSON", help="reference state for the chi decomposition")
    _add_unit(p)
    p.set_defaults(func=cmd_chi)

    p = sub.add_parser("capacity-cost", help="capacity-cost function C(beta) of a fixed ensemble (CSV)")
    p.add_argument("--ensemble", required=True, metavar="JSON")
    p.add_argument("--channel", metavar="JSON")
    p.add_argument("--beta", type=float, nargs="+")
    p.add_argument("--beta-min", type=float)
    p.add_argument("--beta-max", type=float)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--log-grid", action="store_true")
    p.add_argument("--out", help="CSV path (default stdout)")
    _add_unit(p)
    p.set_defaults(func=cmd_capacity_cost)

    p = sub.add_parser("bounds", help="Fisher-information bounds J/2, F/2 and the minimal-energy chain")
    p.add_argument("--channel", metavar="JSON")
    _add_family_flags(p, ("rotation", "random-qubit", "mixture", "gaussian-displacement"))
    _add_gaussian_flags(p, required=False)
    p.add_argument("--cutoff", type=int, default=60, help="Fock cutoff for gaussian-displacement")
    p.add_argument("--no-cpuc", action="store_true", help="skip the capacity per unit cost")
    _add_unit(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("validate", help="run the oracle cross-check suite")
    p.add_argument("--quick", action="store_true", help="reduced subset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(
        command=args.command,
        unit=getattr(args, "unit", "nats"),
        seed=getattr(args, "seed", 0),
        out=getattr(args, "out", None),
    )
    try:
        return args.func(args, cfg)
    except (InputError, ValidationError, DomainError, PreconditionError, OSError, json.JSONDecodeError) as e:
        print(f"cpuc {args.command}: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, ArithmeticError) as e:
        print(f"cpuc {args.command}: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
