"""pinchlab command line: zeta, eisenstein, scattering, sweep, fit.

Exit codes: 0 success, 2 fit failure, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings

from .eisenstein import hyperbolic_eisenstein, starred_eisenstein, weighted_eisenstein
from .errors import ConfigError, ConstructionError, DomainError, FitError, PoleError
from .fitting import fit_power_law
from .lab import QUANTITIES, SweepConfig, report_emit, run_sweep
from .scattering import mode_table, write_mode_table
from .wordlang import build_pants, cyclic_model, length_spectrum, write_length_spectrum_csv
from .zeta import SpectralPoint, selberg_zeta_log

EXIT_FIT = 2
EXIT_CONFIG = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def _complex(text: str) -> complex:
    v = _floats(text)
    if len(v) not in (1, 2):
        raise ConfigError(f"expected re[,im], got {text!r}")
    return complex(*v)


def _point(text: str) -> tuple[float, float]:
    v = _floats(text)
    if len(v) != 2 or not v[1] > 0:
        raise ConfigError(f"expected x,y with y > 0, got {text!r}")
    return (v[0], v[1])


def _surface(text: str):
    v = _floats(text)
    if len(v) == 1:
        return cyclic_model(v[0])
    if len(v) == 3:
        return build_pants(*v)
    raise ConfigError("--surface takes l (cylinder) or l1,l2,l3 (pants)")


def _f(x) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


def _emit_json(obj: dict, path) -> None:
    fh = _open_out(path)
    try:
        fh.write(json.dumps(obj) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_zeta(args) -> int:
    spec = _surface(args.surface)
    p = SpectralPoint(args.s, args.trunc_k, args.tail_tol)
    if args.spectrum:
        fh = _open_out(args.out)
        try:
            write_length_spectrum_csv(length_spectrum(spec, args.max_length, args.max_word_len), fh)
        finally:
            if fh is not sys.stdout:
                fh.close()
        return 0
    v = selberg_zeta_log(spec, p, args.max_word_len, args.max_length)
    _emit_json(
        {
            "surface": spec.label(),
            "s_re": p.s.real,
            "s_im": p.s.imag,
            "log_zeta_re": v.log_value.real,
            "log_zeta_im": v.log_value.imag,
            "tail_bound": _f(v.tail_bound),
            "classes_used": v.classes_used,
            "delta": None if v.delta is None else _f(v.delta),
            "warnings": v.warnings,
        },
        args.out,
    )
    return 0


def cmd_eisenstein(args) -> int:
    spec = _surface(args.surface)
    p = SpectralPoint(args.s, args.trunc_k, args.tail_tol)
    budget = args.max_word_len or 8
    out = {"surface": spec.label(), "z": list(args.z), "s": [p.s.real, p.s.imag], "kind": args.kind}
    if args.kind == "starred":
        v = starred_eisenstein(spec, args.z, p, budget, args.max_length)
        we = v.weighted
        out.update(value_re=v.value.real, value_im=v.value.imag, terms_used=we.terms_used,
                   tail_indicator=_f(v.tail_estimate), warnings=v.warnings)
    else:
        fn = weighted_eisenstein if args.kind == "weighted" else hyperbolic_eisenstein
        v = fn(spec, args.z, p, budget)
        out.update(value_re=v.value.real, value_im=v.value.imag, terms_used=v.terms_used,
                   tail_indicator=_f(v.tail_indicator), warnings=v.warnings)
    _emit_json(out, args.out)
    return 0


def cmd_scattering(args) -> int:
    ks = [int(k) for k in _floats(args.k)]
    ls = _floats(args.l)
    rows = mode_table(ks, ls, [args.s])
    fh = _open_out(args.out)
    try:
        write_mode_table(rows, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_sweep(args) -> int:
    overrides = {
        "quantity": args.quantity,
        "l_grid": _floats(args.l_grid) if args.l_grid else None,
        "s_grid": [[s.real, s.imag] for s in args.s] if args.s else None,
        "z_points": [list(z) for z in args.z] if args.z else None,
        "max_word_len": args.max_word_len,
        "max_length": args.max_length,
        "tail_tol": args.tail_tol,
        "max_residual": args.max_residual,
        "output": args.out,
        "format": args.format,
        "threads": args.threads,
    }
    if args.surface:
        v = _floats(args.surface)
        if len(v) != 2:
            raise ConfigError("sweep --surface takes the fixed lengths l2,l3")
        overrides["l2"], overrides["l3"] = v
    if args.config:
        cfg = SweepConfig.from_json(args.config, **overrides)
    else:
        cfg = SweepConfig.from_dict({k: v for k, v in overrides.items() if v is not None})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        reports = run_sweep(cfg)
    fh = _open_out(cfg.output)
    try:
        report_emit(reports, cfg.format, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_fit(args) -> int:
    """Fit C l^alpha to a CSV with columns l,re[,im] (or l,log_re,log_im with --logs)."""
    try:
        with open(args.input, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    ls, vals = [], []
    for r in rows:
        ls.append(float(r[0]))
        vals.append(complex(float(r[1]), float(r[2]) if len(r) > 2 else 0.0))
    target = args.target
    if args.logs:
        rep = fit_power_law(ls, log_values=vals, target_alpha=target, max_residual=args.max_residual)
    else:
        rep = fit_power_law(ls, vals, target_alpha=target, max_residual=args.max_residual)
    rep.quantity = args.quantity
    rep.s = args.s
    fh = _open_out(args.out)
    try:
        report_emit([rep], args.format, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def _is_number(x: str) -> bool:
    try:
        float(x)
    except ValueError:
        return False
    return True


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pinchlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, s_default="2"):
        p.add_argument("--s", type=_complex, default=_complex(s_default), help="re[,im]")
        p.add_argument("--max-word-len", type=int, default=None)
        p.add_argument("--max-length", type=float, default=10.0, help="geodesic length cutoff")
        p.add_argument("--tail-tol", type=float, default=1e-12)
        p.add_argument("--trunc-k", type=int, default=1)
        p.add_argument("--out", default=None)

    p = sub.add_parser("zeta", help="log Selberg zeta of a surface")
    p.add_argument("--surface", default="1,1,1", help="l (cylinder) or l1,l2,l3 (pants)")
    common(p)
    p.add_argument("--spectrum", action="store_true", help="write the length spectrum CSV instead")
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("eisenstein", help="hyperbolic Eisenstein series at one point")
    p.add_argument("--surface", default="1,1,1")
    common(p)
    p.add_argument("--z", type=_point, default=(0.0, 1.0), help="x,y")
    p.add_argument("--kind", choices=("plain", "weighted", "starred"), default="plain")
    p.set_defaults(func=cmd_eisenstein)

    p = sub.add_parser("scattering", help="funnel mode eigenvalues as a CSV table")
    p.add_argument("--k", default="1", help="comma-separated mode indices")
    p.add_argument("--l", default="0.8,0.4,0.2,0.1,0.05", help="comma-separated funnel lengths")
    p.add_argument("--s", type=_complex, default=_complex("0.75"))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_scattering)

    p = sub.add_parser("sweep", help="degeneration sweep with exponent fits")
    p.add_argument("--config", default=None, help="JSON config file; flags override it")
    p.add_argument("--quantity", default=None)
    p.add_argument("--surface", default=None, help="fixed lengths l2,l3 of pants(l, l2, l3)")
    p.add_argument("--l-grid", default=None)
    p.add_argument("--s", type=_complex, action="append", help="re[,im]; repeat for several")
    p.add_argument("--z", type=_point, action="append", help="x,y; repeat for several")
    p.add_argument("--max-word-len", type=int, default=None)
    p.add_argument("--max-length", type=float, default=None)
    p.add_argument("--tail-tol", type=float, default=None)
    p.add_argument("--max-residual", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "jsonl"), default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit C l^alpha to tabulated samples")
    p.add_argument("input", help="CSV: l,re[,im]")
    p.add_argument("--logs", action="store_true", help="columns hold log f")
    p.add_argument("--target", type=_complex, default=None)
    p.add_argument("--s", type=_complex, default=None)
    p.add_argument("--quantity", default="custom", choices=QUANTITIES + ("custom",))
    p.add_argument("--max-residual", type=float, default=None)
    p.add_argument("--format", choices=("csv", "jsonl"), default="jsonl")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except FitError as exc:
        print(f"pinchlab: fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (ConfigError, ConstructionError, DomainError, PoleError) as exc:
        print(f"pinchlab: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
