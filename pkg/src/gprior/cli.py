"""Command-line front end: plot-data emitter for the library.

Subcommands: sample, gram, eig, rkhs-norm, smallball, concentration,
rate, entropy, verify.  Exit codes: 0 success, 1 validation error
(message names the offending flag), 2 a statistical check failed in
`verify`.  Identical configurations (including seed) produce byte-
identical outputs; every output starts with a '#' comment line holding
the full configuration and version.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .concentration import (
    combined_rate,
    concentration_fn,
    ellipsoid_packing,
    solve_rate,
)
from .grid import GridFunction, grid_function, make_grid
from .kernels import (
    BrownianMotion,
    ReleasedBrownianMotion,
    gram,
    parse_kernel,
)
from .rkhs import (
    NotInRkhsError,
    RkhsElement,
    element_from_function,
    rkhs_norm_bm,
    rkhs_norm_released,
    rkhs_norm_series,
)
from .sampler import kl_path_batch
from .smallball import (
    check_borell,
    check_sandwich,
    check_shift_inequality,
    check_tail,
    smallball_mc,
)
from .spectral import eig_basis
from .verify_structure import (
    check_direct_sum,
    check_isometry_integration,
    check_shared_basis_counterexample,
    default_structural_elements,
)


class CliError(Exception):
    """Validation failure; the message names the offending flag."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract here is 1
    def error(self, message):
        raise CliError(message)


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isinf(x) or math.isnan(x):
            return str(x)
        return f"{x:.17g}"
    return str(x)


def _config_line(args) -> str:
    items = sorted(
        (k, v) for k, v in vars(args).items() if k not in ("func", "out") and v is not None
    )
    body = " ".join(f"{k}={v}" for k, v in items)
    return f"# gprior {__version__} | {body}"


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header_line, rows, columns) -> str:
    lines = [header_line, ",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json(header_line, payload) -> str:
    return header_line + "\n" + json.dumps(payload, indent=2, allow_nan=False) + "\n"


def _builtin_fn(name, grid):
    table = {
        "id": lambda t: t,
        "sq": lambda t: t**2,
        "sin": lambda t: np.sin(np.pi * t / 2),
    }
    if name not in table:
        raise CliError(
            f"--fn/--w0: unknown builtin {name!r} (have {sorted(table)})"
        )
    return grid_function(grid, table[name])


def _load_fn(arg, grid) -> GridFunction:
    if arg.startswith("builtin:"):
        return _builtin_fn(arg.split(":", 1)[1], grid)
    try:
        values = np.loadtxt(arg, ndmin=1)
    except OSError as exc:
        raise CliError(f"--fn/--w0: cannot read {arg!r}: {exc}") from exc
    if values.ndim != 1 or values.size != grid.n:
        raise CliError(
            f"--fn/--w0: file {arg!r} has {values.size} values, expected --n {grid.n}"
        )
    return GridFunction(grid, values)


def _parse_eps_list(text) -> list:
    try:
        eps = [float(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise CliError(f"--eps: {exc}") from exc
    if not eps or any(e <= 0 for e in eps):
        raise CliError("--eps: needs a comma list of positive radii")
    return eps


def _basis_for(args):
    try:
        spec = parse_kernel(args.kernel)
    except ValueError as exc:
        raise CliError(f"--kernel: {exc}") from exc
    if args.n < 2:
        raise CliError(f"--n: grid size must be >= 2, got {args.n}")
    grid = make_grid(args.n)
    tol = getattr(args, "tol", 1e-10)
    if tol < 0:
        raise CliError(f"--tol: must be >= 0, got {tol}")
    return spec, grid, eig_basis(spec, grid, tol)


def _check_common(args):
    if getattr(args, "trials", 100) < 100:
        raise CliError(f"--trials: need at least 100, got {args.trials}")
    if getattr(args, "seed", 0) < 0:
        raise CliError(f"--seed: must be >= 0, got {args.seed}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sample(args):
    _check_common(args)
    if args.count < 1:
        raise CliError(f"--count: need at least 1 draw, got {args.count}")
    _, grid, basis = _basis_for(args)
    _, paths = kl_path_batch(basis, args.count, args.seed)
    cols = [f"t{i}" for i in range(grid.n)]
    return _csv(_config_line(args), paths.tolist(), cols), 0


def _cmd_gram(args):
    try:
        spec = parse_kernel(args.kernel)
    except ValueError as exc:
        raise CliError(f"--kernel: {exc}") from exc
    if args.n < 2:
        raise CliError(f"--n: grid size must be >= 2, got {args.n}")
    grid = make_grid(args.n)
    g_mat = gram(spec, grid)
    cols = [f"t{i}" for i in range(grid.n)]
    return _csv(_config_line(args), g_mat.tolist(), cols), 0


def _cmd_eig(args):
    _, grid, basis = _basis_for(args)
    rows = [
        [j, basis.lam[j], *basis.phi[j].tolist()]
        for j in range(basis.m)
    ]
    cols = ["index", "lambda"] + [f"phi_t{i}" for i in range(grid.n)]
    return _csv(_config_line(args), rows, cols), 0


def _cmd_rkhs_norm(args):
    spec, grid, basis = _basis_for(args)
    f = _load_fn(args.fn, grid)
    payload = {"norm_spectral": None, "norm_analytic": None, "in_rkhs": True}
    payload["norm_spectral"] = rkhs_norm_series(element_from_function(f, basis))
    try:
        if isinstance(spec, BrownianMotion):
            payload["norm_analytic"] = rkhs_norm_bm(f)
        elif isinstance(spec, ReleasedBrownianMotion):
            payload["norm_analytic"] = rkhs_norm_released(f)
    except NotInRkhsError:
        payload["in_rkhs"] = False
        payload["norm_analytic"] = None
    return _json(_config_line(args), payload), 0


def _cmd_smallball(args):
    _check_common(args)
    _, _, basis = _basis_for(args)
    results = []
    for eps in _parse_eps_list(args.eps):
        est = smallball_mc(basis, eps, args.norm, None, args.trials, args.seed)
        results.append(
            {
                "eps": est.eps,
                "norm": est.norm_kind,
                "p_hat": est.p_hat,
                "ci_low": est.ci_low,
                "ci_high": est.ci_high,
                "neg_log_p": None if est.hits == 0 else est.neg_log_p,
                "trials": est.trials,
                "seed": est.seed,
            }
        )
    return _json(_config_line(args), results), 0


def _cmd_concentration(args):
    _check_common(args)
    _, grid, basis = _basis_for(args)
    w = _load_fn(args.w0, grid)
    eps = sorted(_parse_eps_list(args.eps), reverse=True)
    points = concentration_fn(w, basis, eps, args.norm, args.trials, args.seed)
    rows = [
        [p.eps, p.approx_term, p.neg_log_smallball, p.phi, p.optimizer_gap]
        for p in points
    ]
    cols = ["eps", "approx_term", "neg_log_smallball", "phi", "gap"]
    return _csv(_config_line(args), rows, cols), 0


def _cmd_rate(args):
    if args.n_obs <= 0:
        raise CliError(f"--n: sample size must be positive, got {args.n_obs}")
    if args.phi_alpha is not None:
        if args.phi_alpha <= 0:
            raise CliError(f"--phi-alpha: must be positive, got {args.phi_alpha}")
        sol = solve_rate(lambda e: e**-args.phi_alpha, args.n_obs, which="prior-mass")
    else:
        if args.kernel is None or args.w0 is None:
            raise CliError("--kernel and --w0 are required without --phi-alpha")
        _check_common(args)
        _, grid, basis = _basis_for(args)
        w = _load_fn(args.w0, grid)
        eps = sorted(_parse_eps_list(args.eps), reverse=True)
        points = concentration_fn(w, basis, eps, args.norm, args.trials, args.seed)
        if len(points) < 3:
            raise CliError("--eps: too few usable curve points for rate solving")
        sol = combined_rate(points, args.n_obs)
    payload = {
        "n": sol.n,
        "eps_n": sol.eps_n,
        "which": sol.which,
        "residual": sol.residual,
    }
    return _json(_config_line(args), payload), 0


def _cmd_entropy(args):
    try:
        semiaxes = [float(x) for x in args.semiaxes.split(",") if x]
    except ValueError as exc:
        raise CliError(f"--semiaxes: {exc}") from exc
    if not semiaxes or any(a <= 0 for a in semiaxes):
        raise CliError("--semiaxes: needs a comma list of positive lengths")
    if args.eps_one <= 0:
        raise CliError(f"--eps: must be positive, got {args.eps_one}")
    try:
        count = ellipsoid_packing(semiaxes, args.eps_one)
    except ValueError as exc:
        raise CliError(f"--semiaxes/--eps: {exc}") from exc
    payload = {
        "dim": len(semiaxes),
        "eps": args.eps_one,
        "packing_count": count,
        "log_packing": math.log(count),
    }
    return _json(_config_line(args), payload), 0


def _cmd_verify(args):
    _check_common(args)
    spec, grid, basis = _basis_for(args)
    scale = math.sqrt(basis.trace())
    ident = grid_function(grid, lambda t: t)
    h = element_from_function(ident, basis)
    h_unit = RkhsElement(basis, h.w / max(rkhs_norm_series(h), 1e-12))

    reports = [
        check_shift_inequality(basis, h_unit, 0.8 * scale, args.norm,
                               args.trials, args.seed),
        check_sandwich(basis, ident, 0.8 * scale, args.norm,
                       args.trials, args.seed),
        check_borell(np.array([[1.0]]), 0.1, 1.0, args.trials, args.seed),
        check_borell(np.eye(2), 0.5, 2.0, args.trials, args.seed),
        check_tail(basis, math.sqrt(float(np.max(basis.diag_variance()))),
                   args.trials, args.seed, args.norm),
        check_isometry_integration(
            eig_basis(BrownianMotion(), grid, 1e-10), 1,
            default_structural_elements(eig_basis(BrownianMotion(), grid, 1e-10)),
        ),
        check_direct_sum(grid_function(grid, lambda t: 0.3 + np.sin(t))),
        check_shared_basis_counterexample(
            2.0 ** -np.arange(1, 7), 1.0 / np.arange(1, 7), grid
        ),
    ]
    rows = [
        [r.name, "pass" if r.passed else "FAIL", r.lhs, r.rhs, r.slack, r.detail]
        for r in reports
    ]
    cols = ["check", "status", "lhs", "rhs", "slack", "detail"]
    code = 0 if all(r.passed for r in reports) else 2
    return _csv(_config_line(args), rows, cols), code


# ---------------------------------------------------------------------------
# wiring


def _add_kernel_opts(p, tol=True):
    p.add_argument("--kernel", required=True,
                   help="bm | released-bm | ibm:k=<int> | rl:alpha=<float>")
    p.add_argument("--n", type=int, default=201, help="grid size (default 201)")
    if tol:
        p.add_argument("--tol", type=float, default=1e-10,
                       help="relative eigenvalue clip (default 1e-10)")


def _add_mc_opts(p):
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--norm", choices=("sup", "l2"), default="l2")


def build_parser() -> _Parser:
    parser = _Parser(prog="gprior", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="KL path draws as CSV")
    _add_kernel_opts(p)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("gram", help="Gram matrix as CSV")
    _add_kernel_opts(p, tol=False)
    p.set_defaults(func=_cmd_gram)

    p = sub.add_parser("eig", help="eigenvalues and eigenfunctions as CSV")
    _add_kernel_opts(p)
    p.set_defaults(func=_cmd_eig)

    p = sub.add_parser("rkhs-norm", help="spectral (and analytic) RKHS norm")
    _add_kernel_opts(p)
    p.add_argument("--fn", required=True,
                   help="builtin:id|sq|sin or one-column CSV of --n values")
    p.set_defaults(func=_cmd_rkhs_norm)

    p = sub.add_parser("smallball", help="Monte Carlo small-ball estimates")
    _add_kernel_opts(p)
    _add_mc_opts(p)
    p.add_argument("--eps", required=True, help="comma list of radii")
    p.set_defaults(func=_cmd_smallball)

    p = sub.add_parser("concentration", help="concentration-function curve")
    _add_kernel_opts(p)
    _add_mc_opts(p)
    p.add_argument("--eps", required=True, help="comma list of radii")
    p.add_argument("--w0", required=True, help="decentering target")
    p.set_defaults(func=_cmd_concentration)

    p = sub.add_parser("rate", help="contraction-rate solution")
    p.add_argument("--n", dest="n_obs", type=float, required=True,
                   help="sample size")
    p.add_argument("--phi-alpha", type=float, default=None,
                   help="closed-form exponent: phi(eps) = eps^-alpha")
    p.add_argument("--kernel", default=None)
    p.add_argument("--grid-n", dest="n", type=int, default=201)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--w0", default=None)
    p.add_argument("--eps", default="0.8,0.4,0.2,0.1,0.05")
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--norm", choices=("sup", "l2"), default="l2")
    p.set_defaults(func=_cmd_rate)

    p = sub.add_parser("entropy", help="ellipsoid packing/entropy estimate")
    p.add_argument("--semiaxes", required=True, help="comma list")
    p.add_argument("--eps", dest="eps_one", type=float, required=True)
    p.set_defaults(func=_cmd_entropy)

    p = sub.add_parser("verify", help="run the inequality and structure checks")
    _add_kernel_opts(p)
    _add_mc_opts(p)
    p.set_defaults(func=_cmd_verify)

    for name, sp in sub.choices.items():
        sp.add_argument("--out", default=None, help="output path (default stdout)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text, code = args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(text, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
