"""Command-line entry point: ``quasiphase <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 numerical-tolerance failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import time

import numpy as np

from . import __version__
from .analytic import (
    DeltaTerm,
    HermiticityError,
    KernelSpec,
    SmoothComponent,
    StateP,
    regularized_delta,
    smooth_regularized,
    spats_P,
    state_P_regularized,
)
from .clicks import ClassicalState, DetectionConfig, g_state, monte_carlo_g
from .convolution import Axis, Grid2D
from .entanglement import ent_quasiprob, negativity_report, product_state, singlet, werner
from .fock import CoherentSuperposition
from .hybrid import ghz_w_limits, min_eig_scan, tripartite_P
from .io import (
    RunManifest,
    checksum,
    grid_to_csv,
    grid_to_json,
    parse_axis,
    parse_complex,
    parse_grid_spec,
    points_to_csv,
    table_to_csv,
    table_to_json,
)
from .validation import payload, run_suite

EXIT_OK, EXIT_USAGE, EXIT_TOLERANCE = 0, 1, 2


class UsageError(Exception):
    pass


class ToleranceFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _grid_arg(text):
    try:
        return parse_grid_spec(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _axis_arg(text):
    try:
        return parse_axis(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _complex_arg(text):
    try:
        return parse_complex(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _add_output(p):
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_kernel(p, default="sinc2", allow_none=False):
    choices = ("sinc2", "gaussian") + (("none",) if allow_none else ())
    p.add_argument("--kernel", choices=choices, default=default)
    p.add_argument("--w", type=float, default=3.0, help="sinc2 width parameter")
    p.add_argument("--s", type=float, default=-1.0, help="Gaussian order parameter (s < 1)")


def _kernel(args):
    if args.kernel == "none":
        return None
    try:
        return KernelSpec.sinc2(args.w) if args.kernel == "sinc2" else KernelSpec.gaussian(args.s)
    except ValueError as e:
        raise UsageError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quasiphase", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"quasiphase {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("spats", help="P function of a single-photon-added thermal state")
    p.add_argument("--nbar", type=float, required=True, help="thermal mean photon number")
    p.add_argument("--eta", type=float, default=1.0, help="detection efficiency applied as loss")
    p.add_argument("--grid", type=_grid_arg, default="-3:3:201,-3:3:201")
    _add_kernel(p, default="none", allow_none=True)
    _add_output(p)

    p = sub.add_parser("cat-p", help="regularized cat-state / interference distributions")
    p.add_argument("--beta", type=_complex_arg, default=1.0)
    p.add_argument("--what", choices=("even", "odd", "interference"), default="even",
                   help="interference = the dyad |-beta><beta| alone")
    p.add_argument("--grid", type=_grid_arg, default="-3:3:121,-3:3:121")
    _add_kernel(p)
    _add_output(p)

    p = sub.add_parser("clicks", help="detector-agnostic generating function G_z")
    p.add_argument("--state", choices=("even", "odd", "coherent", "thermal"), default="even")
    p.add_argument("--beta", type=_complex_arg, default=1.0)
    p.add_argument("--nbar", type=float, default=0.5, help="thermal state mean photon number")
    p.add_argument("--z", type=float, default=-1.0)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--t", type=float, default=1 / math.sqrt(2))
    where = p.add_mutually_exclusive_group()
    where.add_argument("--cut", help="1-D cut, 're=<x>' or 'im=<y>'")
    where.add_argument("--grid", type=_grid_arg)
    p.add_argument("--range", type=_axis_arg, default="-3:3:301", help="cut axis min:max:count")
    p.add_argument("--mc", action="store_true", help="cross-check against Monte Carlo")
    p.add_argument("--shots", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--mc-points", type=int, default=5)
    _add_output(p)

    p = sub.add_parser("hybrid", help="minimum eigenvalue of the hybrid 2x2 quasiprobability matrix")
    p.add_argument("--beta", type=_complex_arg, default=1.0)
    p.add_argument("--grid", type=_grid_arg, default="-4:4:101,-4:4:101")
    p.add_argument("--no-coherences", action="store_true", help="zero the off-diagonal entries")
    _add_kernel(p)
    _add_output(p)

    p = sub.add_parser("tripartite", help="slice of the tripartite cat-state P function and GHZ/W limits")
    p.add_argument("--beta", type=_complex_arg, default=1.0)
    p.add_argument("--alpha2", type=_complex_arg, default=0.0)
    p.add_argument("--alpha3", type=_complex_arg, default=0.0)
    p.add_argument("--grid", type=_grid_arg, default="-3:3:121,-3:3:121")
    p.add_argument("--beta-small", type=float, default=0.1)
    p.add_argument("--beta-large", type=float, default=1.5)
    _add_kernel(p)
    _add_output(p)

    p = sub.add_parser("ent-bell", help="entanglement quasiprobability table over Pauli projectors")
    p.add_argument("--state", choices=("singlet", "werner", "product"), default="singlet")
    p.add_argument("--p", type=float, default=0.2, help="Werner singlet fraction")
    p.add_argument("--mode", choices=("nnls_first", "min_norm"), default="nnls_first")
    _add_output(p)

    p = sub.add_parser("validate", help="run the oracle-equivalence suite twice")
    p.add_argument("--seed", type=int, default=2019)
    p.add_argument("--shots", type=int, default=200_000)
    return parser


def _stamp(args):
    args.manifest.duration_s = time.perf_counter() - args.started


def _write(args, text: str):
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)


def _grid_info(re_axis: Axis, im_axis: Axis) -> dict:
    return {"re_axis": list(re_axis.as_tuple()), "im_axis": list(im_axis.as_tuple())}


def _params(args) -> dict:
    skip = {"out", "format", "command", "grid", "range"}
    out = {}
    for k, v in vars(args).items():
        if k in skip:
            continue
        if isinstance(v, complex):
            v = [v.real, v.imag]
        out[k] = v
    return out


def _emit_grid(args, grid: Grid2D, manifest: RunManifest):
    manifest.checksum = checksum(grid.values)
    manifest.grid = _grid_info(grid.re_axis, grid.im_axis)
    _stamp(args)
    if args.format == "json":
        _write(args, grid_to_json(grid, manifest))
    else:
        _write(args, grid_to_csv(grid))
        _write_sidecar(args, manifest)


def _write_sidecar(args, manifest: RunManifest):
    if args.out != "-":
        with open(args.out + ".manifest.json", "w") as fh:
            json.dump(manifest.to_dict(), fh, indent=1)
            fh.write("\n")


def _cmd_spats(args, manifest):
    if not args.nbar > 0:
        raise UsageError("--nbar must be > 0")
    if not 0 < args.eta <= 1:
        raise UsageError("--eta must lie in (0, 1]")
    re_axis, im_axis = args.grid
    kern = _kernel(args)
    if kern is None:
        func = lambda a: spats_P(args.nbar, a, eta=args.eta)  # noqa: E731
    else:
        if args.eta != 1.0:
            raise UsageError("--eta < 1 is only supported without a kernel")
        comp = SmoothComponent("spats", args.nbar)
        func = lambda a: smooth_regularized(comp, kern, a)  # noqa: E731
    grid = Grid2D.sample(re_axis, im_axis, func)
    lo = float(np.min(grid.values))
    manifest.results = {"min_value": lo, "negative": lo < 0}
    _emit_grid(args, grid, manifest)


def _cmd_cat_p(args, manifest):
    re_axis, im_axis = args.grid
    kern = _kernel(args)
    beta = args.beta
    if args.what == "interference":
        term = DeltaTerm(ket=-beta, bra=beta)
        grid = Grid2D.sample(re_axis, im_axis, lambda a: np.asarray(regularized_delta(term, kern, a)))
    else:
        parity = +1 if args.what == "even" else -1
        try:
            state = StateP.from_superposition(CoherentSuperposition.cat(beta, parity))
        except ValueError as e:
            raise UsageError(str(e)) from None
        grid = Grid2D.sample(re_axis, im_axis, lambda a: state_P_regularized(state, kern, a))
        manifest.results = {"min_value": float(np.min(grid.values))}
    _emit_grid(args, grid, manifest)


def _click_state(args):
    if args.state == "thermal":
        return ClassicalState.thermal(args.nbar)
    if args.state == "coherent":
        return CoherentSuperposition.coherent(args.beta)
    return CoherentSuperposition.cat(args.beta, +1 if args.state == "even" else -1)


def _click_values(state, alpha, cfg):
    if isinstance(state, ClassicalState):
        return np.asarray(state.g(alpha, cfg), dtype=float)
    return np.asarray(g_state(state, alpha, cfg), dtype=float)


def _cmd_clicks(args, manifest):
    try:
        cfg = DetectionConfig(N=args.N, eta=args.eta, t=args.t, z=args.z)
        state = _click_state(args)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.grid is not None:
        re_axis, im_axis = args.grid
        alpha = Grid2D.alpha_mesh(re_axis, im_axis)
    else:
        cut = args.cut or "re=0"
        try:
            key, val = cut.split("=")
            val = float(val)
        except ValueError:
            raise UsageError(f"malformed --cut {cut!r}; use re=<x> or im=<y>") from None
        if key not in ("re", "im"):
            raise UsageError(f"malformed --cut {cut!r}; use re=<x> or im=<y>")
        pts = args.range.points
        alpha = val + 1j * pts if key == "re" else pts + 1j * val
    values = _click_values(state, alpha, cfg)
    manifest.results = {"min_value": float(np.min(values)), "negative": bool(np.min(values) < 0)}

    if args.mc:
        if args.state in ("even", "odd"):
            raise UsageError("--mc needs a classical state (coherent or thermal)")
        mc_state = ClassicalState.coerce(state)
        flat_a, flat_v = alpha.ravel(), values.ravel()
        idx = np.unique(np.linspace(0, flat_a.size - 1, max(1, args.mc_points)).round().astype(int))
        checks = []
        for i in idx:
            est, se = monte_carlo_g(mc_state, flat_a[i], cfg, args.shots, args.seed)
            dev = abs(est - flat_v[i]) / se if se > 0 else abs(est - flat_v[i])
            checks.append({"alpha": [flat_a[i].real, flat_a[i].imag], "closed_form": float(flat_v[i]),
                           "estimate": float(est), "stderr": float(se), "ok": bool(dev <= 3.0 if se > 0 else dev < 1e-12)})
        manifest.seed = args.seed
        manifest.results["monte_carlo"] = checks
        if not all(c["ok"] for c in checks):
            _emit_clicks(args, alpha, values, manifest)
            raise ToleranceFailure("Monte Carlo estimate outside 3 standard errors of the closed form")
    _emit_clicks(args, alpha, values, manifest)


def _emit_clicks(args, alpha, values, manifest):
    if args.grid is not None:
        _emit_grid(args, Grid2D(args.grid[0], args.grid[1], values), manifest)
        return
    manifest.checksum = checksum(values)
    manifest.grid = {"cut": args.cut or "re=0", "axis": list(args.range.as_tuple())}
    _stamp(args)
    if args.format == "json":
        doc = {"manifest": manifest.to_dict(), "re_alpha": [float(a.real) for a in alpha],
               "im_alpha": [float(a.imag) for a in alpha], "values": [float(v) for v in values]}
        _write(args, json.dumps(doc, indent=1) + "\n")
    else:
        _write(args, points_to_csv(alpha, values))
        _write_sidecar(args, manifest)


def _cmd_hybrid(args, manifest):
    re_axis, im_axis = args.grid
    kern = _kernel(args)
    a_star, lam, grid = min_eig_scan(args.beta, kern, re_axis, im_axis, coherences=not args.no_coherences)
    manifest.results = {
        "alpha_star": [a_star.real, a_star.imag],
        "lambda_min": lam,
        "nonclassical": lam < -1e-12,
    }
    _emit_grid(args, grid, manifest)


def _cmd_tripartite(args, manifest):
    re_axis, im_axis = args.grid
    kern = _kernel(args)
    try:
        f_w, cross = ghz_w_limits(args.beta_small, args.beta_large)
        grid = Grid2D.sample(
            re_axis, im_axis, lambda a: tripartite_P(args.beta, kern, a, args.alpha2, args.alpha3)
        )
    except HermiticityError:
        # a ValueError subclass, but a tolerance failure rather than bad input
        raise
    except ValueError as e:
        raise UsageError(str(e)) from None
    manifest.results = {"w_fidelity": f_w, "ghz_cross_overlap": cross, "min_value": float(np.min(grid.values))}
    _emit_grid(args, grid, manifest)


def _cmd_ent_bell(args, manifest):
    if args.state == "singlet":
        rho = singlet()
    elif args.state == "werner":
        try:
            rho = werner(args.p)
        except ValueError as e:
            raise UsageError(str(e)) from None
    else:
        rho = product_state("z+", "z+")
    table = ent_quasiprob(rho, args.mode)
    manifest.checksum = checksum(table.values)
    results = {"residual": table.residual, "method": table.method}
    try:
        neg, cells = negativity_report(table)
        results.update(total_negativity=neg, negative_cells=[[a, b, v] for a, b, v in cells])
    except ValueError as e:
        manifest.results = results
        raise ToleranceFailure(str(e)) from None
    manifest.results = results
    _stamp(args)
    if args.format == "json":
        _write(args, table_to_json(table, manifest))
    else:
        _write(args, table_to_csv(table))
        _write_sidecar(args, manifest)


def _cmd_validate(args, manifest):
    first = run_suite(seed=args.seed, mc_shots=args.shots)
    second = run_suite(seed=args.seed, mc_shots=args.shots)
    for c in first:
        print(c.line())
    same = payload(first) == payload(second)
    print(f"[{'PASS' if same else 'FAIL'}] determinism: two runs produce byte-identical payloads")
    failed = [c.name for c in first if not c.passed]
    if not same:
        failed.append("determinism")
    if failed:
        raise ToleranceFailure("violated: " + "; ".join(failed))


_COMMANDS = {
    "spats": _cmd_spats,
    "cat-p": _cmd_cat_p,
    "clicks": _cmd_clicks,
    "hybrid": _cmd_hybrid,
    "tripartite": _cmd_tripartite,
    "ent-bell": _cmd_ent_bell,
    "validate": _cmd_validate,
}


_NEG_VALUE = re.compile(r"^-(\d|\.\d)")


def _join_negative_values(argv: list) -> list:
    """Turn ``--grid -3:3:11,...`` into ``--grid=-3:3:11,...`` so argparse
    does not mistake a negative value for an option."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (
            tok.startswith("--")
            and "=" not in tok
            and i + 1 < len(argv)
            and _NEG_VALUE.match(argv[i + 1])
        ):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    manifest = RunManifest(subcommand=args.command, params=_params(args))
    args.manifest = manifest
    args.started = time.perf_counter()
    try:
        _COMMANDS[args.command](args, manifest)
    except UsageError as e:
        print(f"quasiphase {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ToleranceFailure, HermiticityError) as e:
        print(f"quasiphase {args.command}: tolerance failure: {e}", file=sys.stderr)
        return EXIT_TOLERANCE
    except BrokenPipeError:
        # downstream reader closed early (e.g. ``| head``)
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
