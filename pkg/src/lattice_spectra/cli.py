"""Command-line front end.

Every subcommand renders its whole output in memory and writes it only on
success, so failures leave standard output (and ``--out``) untouched.
Exit codes: 0 ok, 1 usage error, 2 invalid model, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .analysis import (
    DEFAULT_COALESCENCE,
    DEFAULT_CURVE_TOL,
    clustering_trend,
    count_distinct_curves,
    density_curves,
    f12_closed_form,
    fidelity_matrix,
    hermitian_demo,
    pairing_check,
)
from .model import Boundary, InvalidModelError, LatticeModel, ModelFileError, load_model, model_to_dict, validate
from .spectral import SolverError, eigs
from .symmetrize import gauge_sequence

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID_MODEL = 2
EXIT_SOLVER = 3

THREADS_ENV = "LATTICE_SPECTRA_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(message)


def fmt(x: Any) -> str:
    """Round-trip decimal text for CSV cells."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]], trailer: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    for line in trailer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def _json(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _cplx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


@dataclass
class RunConfig:
    subcommand: str
    model: LatticeModel | None
    fmt: str
    out: str | None
    curve_tol: float = DEFAULT_CURVE_TOL
    coalescence: float = DEFAULT_COALESCENCE
    pair_tol: float = 1e-8
    xi: tuple[float, ...] = ()
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] = ()


# -- argument handling --------------------------------------------------------


def _float_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _complex_arg(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lattice-spectra", description="Spectra of non-Hermitian 1D tight-binding chains.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    model_opts = _Parser(add_help=False)
    g = model_opts.add_argument_group("model source (either --model or inline uniform flags)")
    g.add_argument("--model", metavar="PATH", help="model file (JSON document)")
    g.add_argument("--n", type=int, help="number of sites N")
    g.add_argument("--t", type=_complex_arg, help="uniform forward hop t")
    g.add_argument("--tp", type=_complex_arg, help="uniform backward hop t' (default: t)")
    g.add_argument("--gamma", type=float, help="uniform gain/loss gamma (default: 0)")
    g.add_argument("--bc", choices=["open", "closed"], help="boundary condition (default: open)")

    out_opts = _Parser(add_help=False)
    out_opts.add_argument("--format", choices=["csv", "json"], default="csv")
    out_opts.add_argument("--out", metavar="PATH", help="write here instead of standard output")

    both = [model_opts, out_opts]
    sub.add_parser("spectrum", parents=both, help="eigenvalues, residuals and solver path")
    p = sub.add_parser("densities", parents=both, help="|psi_nk|^2 per site and distinct-curve count")
    p.add_argument("--curve-tol", type=float, default=DEFAULT_CURVE_TOL)
    sub.add_parser("fidelity", parents=both, help="pairwise eigenvector fidelities")
    p = sub.add_parser("pairing", parents=both, help="E <-> -E pairing with (-1)^n eigenvector map")
    p.add_argument("--tol", type=float, default=1e-8)
    sub.add_parser("symmetrize", parents=both, help="gauge sequence Q_n and symmetrized matrix")
    p = sub.add_parser("demo", parents=[out_opts], help="fidelity of the 3x3 Hermitian counterexample")
    p.add_argument("--xi", type=_float_list, required=True, help="comma-separated xi values (use --xi=-2,1 for a leading minus)")
    p = sub.add_parser("sweep", parents=both, help="fidelity extremes over a one-parameter grid")
    p.add_argument("--param", choices=["t", "tp", "gamma"], required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--log", action="store_true", help="geometric instead of linear spacing")
    p.add_argument("--coalescence", type=float, default=DEFAULT_COALESCENCE)
    return parser


def _model_from_args(args: argparse.Namespace, *, sweep: bool = False) -> LatticeModel:
    inline = {k: getattr(args, k) for k in ("n", "t", "tp", "gamma", "bc")}
    if args.model is not None:
        given = [f"--{k}" for k, v in inline.items() if v is not None]
        if given:
            raise UsageError(f"--model cannot be combined with {', '.join(given)}")
        return load_model(args.model)
    if args.n is None:
        raise UsageError("give a model source: --model PATH or --n with uniform hops")
    t = args.t
    if t is None:
        if not (sweep and args.param == "t"):
            raise UsageError("--t is required with --n")
        t = 1.0
    tp = args.tp if args.tp is not None else t
    gamma = args.gamma if args.gamma is not None else 0.0
    boundary = Boundary(args.bc or "open")
    n_hops = args.n if boundary is Boundary.CLOSED else args.n - 1
    model = LatticeModel(args.n, (t,) * max(n_hops, 0), (tp,) * max(n_hops, 0), (gamma,) * max(args.n, 0), boundary)
    validate(model).raise_if_invalid()
    return model


def _sweep_values(args: argparse.Namespace) -> tuple[float, ...]:
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    if args.log:
        if args.start <= 0 or args.stop <= 0:
            raise UsageError("--log needs positive --from and --to")
        return tuple(np.geomspace(args.start, args.stop, args.count))
    return tuple(np.linspace(args.start, args.stop, args.count))


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cmd = args.subcommand
    cfg = RunConfig(subcommand=cmd, model=None, fmt=args.format, out=args.out)
    if cmd == "demo":
        cfg.xi = args.xi
        return cfg
    if cmd == "sweep":
        cfg.sweep_param = args.param
        cfg.sweep_values = _sweep_values(args)
        cfg.coalescence = args.coalescence
    elif cmd == "densities":
        cfg.curve_tol = args.curve_tol
    elif cmd == "pairing":
        cfg.pair_tol = args.tol
    cfg.model = _model_from_args(args, sweep=cmd == "sweep")
    return cfg


# -- subcommands ----------------------------------------------------------------


def cmd_spectrum(cfg: RunConfig) -> str:
    spec = eigs(cfg.model)
    if cfg.fmt == "json":
        return _json({"model": model_to_dict(cfg.model), "spectrum": spec.to_dict()})
    rows = [(k, z.real, z.imag, r, spec.path.value) for k, (z, r) in enumerate(zip(spec.eigenvalues, spec.residuals), 1)]
    return _csv(["k", "re", "im", "residual", "path"], rows)


def cmd_densities(cfg: RunConfig) -> str:
    spec = eigs(cfg.model)
    dens = density_curves(spec)
    count = count_distinct_curves(dens, cfg.curve_tol)
    if cfg.fmt == "json":
        return _json(
            {
                "model": model_to_dict(cfg.model),
                "eigenvalues": [_cplx(z) for z in spec.eigenvalues],
                "densities": [[float(x) for x in row] for row in dens],
                "curves": count.to_dict(),
            }
        )
    header = ["site"] + [f"rho_{k}" for k in range(1, len(spec) + 1)]
    rows = [[n + 1, *dens[:, n]] for n in range(dens.shape[1])]
    return _csv(header, rows, [f"distinct_curves={count.n_distinct}"])


def cmd_fidelity(cfg: RunConfig) -> str:
    fm = fidelity_matrix(eigs(cfg.model))
    if cfg.fmt == "json":
        return _json({"model": model_to_dict(cfg.model), "fidelity": fm.to_dict()})
    m = len(fm.labels)
    header = ["k", "re", "im"] + [f"F_{j}" for j in range(1, m + 1)]
    rows = [[fm.indices[i] + 1, fm.labels[i].real, fm.labels[i].imag, *fm.values[i]] for i in range(m)]
    return _csv(header, rows)


def cmd_pairing(cfg: RunConfig) -> str:
    spec = eigs(cfg.model)
    rep = pairing_check(spec, cfg.pair_tol)
    if cfg.fmt == "json":
        return _json(
            {
                "model": model_to_dict(cfg.model),
                "eigenvalues": [_cplx(z) for z in spec.eigenvalues],
                "pairing": rep.to_dict(),
            }
        )
    e = spec.eigenvalues
    rows: list[list[Any]] = []
    for (a, b), gap, defect in zip(rep.pairs, rep.energy_mismatch, rep.alternation_defect):
        rows.append(["pair", a + 1, b + 1, e[a].real, e[a].imag, e[b].real, e[b].imag, gap, defect])
    if rep.zero_mode_index is not None:
        z = rep.zero_mode_index
        rows.append(["zero_mode", z + 1, z + 1, e[z].real, e[z].imag, e[z].real, e[z].imag, abs(e[z]), rep.zero_mode_defect])
    for u in rep.unpaired:
        rows.append(["unpaired", u + 1, "", e[u].real, e[u].imag, "", "", "", ""])
    header = ["kind", "k", "partner", "re_k", "im_k", "re_partner", "im_partner", "energy_mismatch", "alternation_defect"]
    return _csv(header, rows, [f"verdict={fmt(rep.verdict)}"])


def cmd_symmetrize(cfg: RunConfig) -> str:
    cert = gauge_sequence(cfg.model)
    if cfg.fmt == "json":
        return _json({"model": model_to_dict(cfg.model), "certificate": cert.to_dict()})
    n = cfg.model.n_sites
    header = ["n", "q", "log_q"] + [f"s_{j}" for j in range(1, n + 1)]
    if not cert.applicable:
        return _csv(header, [], ["applicable=false", f"reason={cert.reason}"])
    s = cert.symmetrized.entries.real
    rows = [[i + 1, cert.q[i], cert.log_q[i], *s[i]] for i in range(n)]
    return _csv(header, rows, ["applicable=true", f"max_asymmetry={fmt(cert.max_asymmetry)}"])


def cmd_demo(cfg: RunConfig) -> str:
    rows = []
    for xi in cfg.xi:
        case, f = hermitian_demo(xi)
        rows.append((xi, f, f12_closed_form(xi), case.linearly_independent))
    if cfg.fmt == "json":
        keys = ("xi", "fidelity", "closed_form", "linearly_independent")
        return _json({"demo": [dict(zip(keys, r)) for r in rows]})
    return _csv(["xi", "fidelity", "closed_form", "linearly_independent"], rows)


def _with_param(model: LatticeModel, param: str, value: float) -> LatticeModel:
    if param == "t":
        return model.replace(forward_hops=(value,) * len(model.forward_hops))
    if param == "tp":
        return model.replace(backward_hops=(value,) * len(model.backward_hops))
    return model.replace(gains=(value,) * model.n_sites)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def cmd_sweep(cfg: RunConfig) -> str:
    models = [_with_param(cfg.model, cfg.sweep_param, v) for v in cfg.sweep_values]
    points = clustering_trend(models, max_workers=_threads())
    if cfg.fmt == "json":
        return _json(
            {
                "model": model_to_dict(cfg.model),
                "param": cfg.sweep_param,
                "sweep": [
                    {
                        "value": float(v),
                        "min_fidelity": None if math.isnan(p.min_fidelity) else p.min_fidelity,
                        "max_fidelity": None if math.isnan(p.max_fidelity) else p.max_fidelity,
                        "ep_suspected": p.ep_suspected,
                        "error": p.error,
                    }
                    for v, p in zip(cfg.sweep_values, points)
                ],
            }
        )
    rows = [
        (cfg.sweep_param, v, p.min_fidelity, p.max_fidelity, "" if p.ep_suspected is None else p.ep_suspected, p.error or "")
        for v, p in zip(cfg.sweep_values, points)
    ]
    return _csv(["param", "value", "min_fidelity", "max_fidelity", "ep_suspected", "error"], rows)


COMMANDS: dict[str, Callable[[RunConfig], str]] = {
    "spectrum": cmd_spectrum,
    "densities": cmd_densities,
    "fidelity": cmd_fidelity,
    "pairing": cmd_pairing,
    "symmetrize": cmd_symmetrize,
    "demo": cmd_demo,
    "sweep": cmd_sweep,
}


def _fail(kind: str, message: str, code: int, **extra: Any) -> int:
    extra = {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in extra.items()}
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = config_from_args(args)
        text = COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except InvalidModelError as exc:
        return _fail("invalid_model", str(exc), EXIT_INVALID_MODEL, violations=exc.violations)
    except ModelFileError as exc:
        return _fail("invalid_model", str(exc), EXIT_INVALID_MODEL, field=exc.field, line=exc.line)
    except OSError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except SolverError as exc:
        estimates = [_cplx(complex(z)) for z in exc.estimates]
        return _fail("solver", str(exc), EXIT_SOLVER, worst_residual=exc.worst_residual, estimates=estimates)
    except ValueError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)

    if cfg.out:
        try:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            return _fail("usage", str(exc), EXIT_USAGE)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
