"""Command-line interface.

Exit codes: 0 ok, 2 validation failure, 3 certificate failure,
4 no convergence (or tolerance budget missed), 5 I/O or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .errors import ConfigError, LegApproxError, ValidationError

log = logging.getLogger("legapprox")


def _tol_pair(text):
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {name!r} needs a number, got {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline config (JSON)")
    common.add_argument("--set", dest="set_source", help="admissible set JSON or fixture:NAME")
    common.add_argument("--form", dest="form_source", help="contact form JSON")
    common.add_argument("--out", help="output directory")
    common.add_argument("--tol", action="append", type=_tol_pair, default=[], metavar="NAME=VALUE",
                        help="override a tolerance (repeatable)")
    common.add_argument("--seed", type=int, default=None, help="sampling seed")
    common.add_argument("--emit-csv", action="store_true", help="also dump output curves as CSV")
    common.add_argument("--no-figures", action="store_true", help="skip PNG figures")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="legapprox", description="Holomorphic Legendrian curve approximation.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the admissible set and the contact form")
    sub.add_parser("basis", parents=[common], help="emit the homology basis")
    sub.add_parser("spray", parents=[common], help="emit the period-dominating spray and its period matrix")
    sub.add_parser("run", parents=[common], help="run the full pipeline")
    demo = sub.add_parser("demo", help="built-in scenarios")
    dsub = demo.add_subparsers(dest="scenario", required=True)
    ann = dsub.add_parser("annulus", parents=[common], help="thicken a Legendrian loop to an annulus")
    ann.add_argument("--eps", type=float, default=0.1, help="amplitude of y = eps cos 2θ on the unit circle")
    ann.add_argument("--rho", type=float, default=1.3, help="initial annulus parameter")
    ann.add_argument("--defect", type=float, default=0.0, help="injected dz defect (forces nonzero periods)")
    f1 = dsub.add_parser("fig1", parents=[common], help="two islands joined by three bridges")
    f1.add_argument("--perturbation", type=float, default=0.05)
    f1.add_argument("--defect", type=float, default=1e-4)
    return p


def _config(args):
    from .pipeline import PipelineConfig

    if args.config:
        cfg = PipelineConfig.from_json(args.config)
        if args.set_source:
            cfg.set_source = args.set_source
        if args.form_source:
            cfg.form_source = args.form_source
    elif args.set_source and args.form_source:
        cfg = PipelineConfig(args.set_source, args.form_source)
    elif args.set_source and args.command in ("basis", "spray"):
        cfg = PipelineConfig(args.set_source, {"n": 1, "coeffs": {"dw": "1", "dz": "-y"}})
    else:
        raise ConfigError("give --config, or --set and --form")
    tol = dict(cfg.tolerances)
    tol.update(dict(args.tol))
    cfg = PipelineConfig(cfg.set_source, cfg.form_source, cfg.A, tol, cfg.delta_start, cfg.delta_floor,
                         args.out or cfg.out_dir, cfg.defect, cfg.defect_function,
                         cfg.seed if args.seed is None else args.seed, cfg.cells, cfg.taylor_order, cfg.degree,
                         cfg.fiber_radius, cfg.name)
    return cfg


def _emit(data: dict, out_dir, name: str):
    text = json.dumps(data, sort_keys=True, indent=1)
    if out_dir:
        try:
            os.makedirs(out_dir, exist_ok=True)
            path = os.path.join(out_dir, name)
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write {name} to {out_dir}: {exc.strerror}", path=out_dir) from None
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text + "\n")


def _basis_or_family(cfg, S):
    from .homology import build_homology_basis, curve_family_with_interpolation

    if cfg.A:
        fam = curve_family_with_interpolation(S, list(cfg.A), cells=cfg.cells)
        return list(fam.members), fam
    basis = build_homology_basis(S, cells=cfg.cells)
    return list(basis.cycles), basis


def cmd_validate(args):
    from .contact import contact_check, normal_form

    cfg = _config(args)
    S = cfg.load_set()
    beta = cfg.load_form()
    members, basis = _basis_or_family(cfg, S)
    cmin = contact_check(beta, S=S, threshold=cfg.tolerances["contact"])
    nf = normal_form(beta, S)
    data = {
        "l": len(members),
        "euler_characteristic": S.euler_characteristic(),
        "islands": len(S.islands),
        "arcs": len(S.arcs),
        "feature_size": S.feature_size,
        "contact_min": cmin,
        "normal_form_axis_residual": float(nf.axis_residual),
        "runge_certified": bool(basis.runge_certified),
    }
    print(f"valid: l = {data['l']}, contact min {cmin:.3g}", file=sys.stderr)
    _emit(data, cfg.out_dir, "validate.json")
    return 0


def cmd_basis(args):
    cfg = _config(args)
    S = cfg.load_set()
    members, basis = _basis_or_family(cfg, S)
    if hasattr(basis, "to_json"):
        data = basis.to_json()
    else:
        data = {"members": [m.to_json() for m in members], "interp_points": [[a.real, a.imag] for a in cfg.A]}
    data["l"] = len(members)
    print(f"basis: l = {len(members)}", file=sys.stderr)
    _emit(data, cfg.out_dir, "basis.json")
    return 0


def cmd_spray(args):
    from .runge import build_spray

    cfg = _config(args)
    S = cfg.load_set()
    members, _ = _basis_or_family(cfg, S)
    spray = build_spray(members, S=S, vanish_at=cfg.A)
    P = np.asarray(spray.period_matrix, complex)
    defect = float(np.max(np.abs(P - np.eye(len(members))))) if len(members) else 0.0
    data = {
        "l": len(members),
        "functions": [x.to_json() for x in spray.xi],
        "period_matrix": [[[float(v.real), float(v.imag)] for v in row] for row in P],
        "period_matrix_defect": defect,
        "condition": float(spray.condition),
    }
    print(f"spray: l = {len(members)}, ‖P - I‖ = {defect:.3g}", file=sys.stderr)
    _emit(data, cfg.out_dir, "spray.json")
    return 0


def _finish(report, out_dir, args):
    from .pipeline import write_outputs

    for name, chk in report.checks().items():
        mark = "ok" if chk["ok"] else "FAIL"
        print(f"  {name:18s} {chk['value']:.3e}  (tol {chk['tolerance']:.1e})  {mark}", file=sys.stderr)
    if out_dir:
        paths = write_outputs(report, out_dir, emit_csv=args.emit_csv, figures=not args.no_figures)
        log.info("wrote %s", ", ".join(sorted(paths.values())))
    else:
        sys.stdout.write(report.dumps() + "\n")
    return 0


def cmd_run(args):
    from .pipeline import mergelyan_pipeline, write_outputs
    from .errors import ToleranceBudgetExceeded

    cfg = _config(args)
    try:
        report = mergelyan_pipeline(cfg)
    except ToleranceBudgetExceeded as exc:
        if cfg.out_dir and getattr(exc, "report", None) is not None:
            write_outputs(exc.report, cfg.out_dir, emit_csv=args.emit_csv, figures=not args.no_figures)
        raise
    print(f"run: l = {report.l}, closeness {report.closeness:.3g}", file=sys.stderr)
    return _finish(report, cfg.out_dir, args)


def cmd_demo(args):
    from .demo import annulus_demo, cos2_loop, fig1_demo

    tol = dict(args.tol)
    seed = args.seed or 0
    if args.scenario == "annulus":
        report = annulus_demo(cos2_loop(args.eps), rho=args.rho, defect=args.defect, tolerances=tol, seed=seed)
        a = report.extra["annulus"]
        print(f"annulus: rho {a['rho']:.4g}, isotropy on rings {max(a['isotropy_inner'], a['isotropy_outer']):.3g}, "
              f"C0 {a['closeness_c0']:.3g}, C1 {a['closeness_c1']:.3g}", file=sys.stderr)
    else:
        report = fig1_demo(args.perturbation, args.defect, tolerances=tol, seed=seed)
        print(f"fig1: l = {report.l}, closeness {report.closeness:.3g}", file=sys.stderr)
    return _finish(report, args.out, args)


COMMANDS = {"validate": cmd_validate, "basis": cmd_basis, "spray": cmd_spray, "run": cmd_run, "demo": cmd_demo}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except LegApproxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, TypeError) as exc:
        print(f"error: {ValidationError.__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: I/O: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
