"""Degeneration sweeps along a pinching l-grid, exponent fits and report output.

A sweep evaluates one quantity on pants(l, l2, l3) for every l in the grid
and every (s, z) pair, then fits log f(l) = log C + alpha log l per (s, z).
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

from .eisenstein import starred_eisenstein, weighted_eisenstein
from .errors import ConfigError, DomainError, FitError, InsufficientData, PinchlabError, PoleError
from .fitting import FitReport, fit_power_law
from .scattering import ScatteringMode, gamma_k
from .wordlang import build_pants, estimate_delta
from .zeta import DELTA_MARGIN, SpectralPoint, weighted_quotient_log, z_ratio_log

SCHEMA_VERSION = 1
QUANTITIES = ("weighted_eisenstein", "starred_eisenstein", "weighted_quotient", "z_ratio", "gamma_mode")
# quantities whose values come from sums over the group
GROUP_QUANTITIES = ("weighted_eisenstein", "starred_eisenstein", "weighted_quotient")
LOG_QUANTITIES = ("weighted_quotient", "z_ratio")

DEFAULT_L_GRID = (0.8, 0.4, 0.2, 0.1, 0.05)
DEFAULT_S_GRID = (2.0, 1.5, 1.0, 0.75)
EXPLORATORY_S_GRID = (0.25, 0.4)
# on the axis of the pinching element, where every sin theta term of the identity coset is 1
DEFAULT_Z = ((0.0, 1.0),)


def target_exponent(quantity: str, s: complex) -> complex | None:
    """Exponent alpha predicted for f(l) ~ C l^alpha as l -> 0."""
    s = complex(s)
    small = 0 < s.real < 0.5
    if quantity == "weighted_eisenstein":
        return 1 - 2 * s if small else 0j
    if quantity == "starred_eisenstein":
        return 0j
    if quantity == "weighted_quotient":
        return 2 * s - 1 if small else 0j
    if quantity == "z_ratio":
        return 4 * s - 2
    if quantity == "gamma_mode":
        return 1 - 2 * s
    raise ConfigError(f"unknown quantity {quantity!r}")


def _parse_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(float(v))
    if isinstance(v, complex):
        return v
    if isinstance(v, str):
        parts = v.split(",")
        if len(parts) not in (1, 2):
            raise ConfigError(f"bad complex value {v!r}")
        return complex(*(float(p) for p in parts))
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ConfigError(f"bad complex value {v!r}")


def _parse_point(v) -> tuple[float, float]:
    if isinstance(v, str):
        v = v.split(",")
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ConfigError(f"bad point {v!r}")
    x, y = float(v[0]), float(v[1])
    if not y > 0:
        raise ConfigError(f"point {v!r} is not in the upper half plane")
    return (x, y)


@dataclass
class SweepConfig:
    quantity: str = "weighted_eisenstein"
    l_grid: tuple[float, ...] = DEFAULT_L_GRID
    s_grid: tuple[complex, ...] = DEFAULT_S_GRID
    z_points: tuple[tuple[float, float], ...] = DEFAULT_Z
    l2: float = 1.0
    l3: float = 1.0
    max_word_len: int = 8
    max_length: float = 10.0
    trunc_k: int = 1
    tail_tol: float = 1e-12
    mode_k: int = 1
    max_residual: float | None = None
    output: str | None = None
    format: str = "jsonl"
    threads: int = 1

    def __post_init__(self):
        try:
            self.l_grid = tuple(float(x) for x in self.l_grid)
            self.s_grid = tuple(_parse_complex(x) for x in self.s_grid)
            self.z_points = tuple(_parse_point(p) for p in self.z_points)
            self.max_word_len = int(self.max_word_len)
            self.trunc_k = int(self.trunc_k)
            self.mode_k = int(self.mode_k)
            self.threads = int(self.threads)
            self.l2, self.l3 = float(self.l2), float(self.l3)
            self.max_length, self.tail_tol = float(self.max_length), float(self.tail_tol)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        self.validate()

    def validate(self) -> None:
        if self.quantity not in QUANTITIES:
            raise ConfigError(f"quantity must be one of {QUANTITIES}, got {self.quantity!r}")
        g = self.l_grid
        if not g or any(not 0 < x <= 2 for x in g):
            raise ConfigError("l grid values must lie in (0, 2]")
        if any(b >= a for a, b in zip(g, g[1:])):
            raise ConfigError("l grid must be strictly decreasing")
        if not self.s_grid or not self.z_points:
            raise ConfigError("s grid and z points must be non-empty")
        if any(not s.real > 0 for s in self.s_grid):
            raise ConfigError("every s needs Re s > 0")
        if min(self.max_word_len, self.trunc_k, self.threads) < 1:
            raise ConfigError("max_word_len, trunc_k and threads must be >= 1")
        if not (self.max_length > 0 and self.tail_tol > 0 and self.l2 > 0 and self.l3 > 0):
            raise ConfigError("budgets and lengths must be positive")
        if self.mode_k == 0:
            raise ConfigError("mode_k must be non-zero")
        if self.format not in ("csv", "jsonl"):
            raise ConfigError("format must be csv or jsonl")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path: str, **overrides) -> "SweepConfig":
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        d.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(d)


@dataclass
class Sample:
    s_index: int
    z_index: int
    l: float
    value: complex | None
    warnings: list[str] = field(default_factory=list)
    delta: float | None = None
    error: str | None = None


def _evaluate(cfg: SweepConfig, l: float, s: complex, z: tuple[float, float]) -> tuple[complex, list[str]]:
    q = cfg.quantity
    if q == "z_ratio":
        return z_ratio_log(l, s, cfg.tail_tol), []
    if q == "gamma_mode":
        return gamma_k(ScatteringMode(cfg.mode_k, l), s), []
    spec = build_pants(l, cfg.l2, cfg.l3)
    p = SpectralPoint(s, cfg.trunc_k, cfg.tail_tol)
    if q == "weighted_eisenstein":
        v = weighted_eisenstein(spec, z, p, cfg.max_word_len)
        return v.value, v.warnings
    if q == "weighted_quotient":
        v = weighted_quotient_log(spec, p, None, cfg.max_length)
        return v.log_value, v.warnings
    v = starred_eisenstein(spec, z, p, cfg.max_word_len, cfg.max_length)
    return v.value, v.warnings


def _l_job(args) -> list[Sample]:
    """All (s, z) evaluations at one l; one process per l shares the enumeration caches."""
    cfg, l = args
    out = []
    delta = None
    if cfg.quantity in GROUP_QUANTITIES:
        try:
            delta = estimate_delta(build_pants(l, cfg.l2, cfg.l3)).delta
        except InsufficientData:
            delta = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for i, s in enumerate(cfg.s_grid):
            zs = cfg.z_points if cfg.quantity in ("weighted_eisenstein", "starred_eisenstein") else cfg.z_points[:1]
            for j, z in enumerate(zs):
                try:
                    val, warn = _evaluate(cfg, l, s, z)
                    out.append(Sample(i, j, l, val, list(warn), delta))
                except (PinchlabError, DomainError, PoleError) as exc:
                    out.append(Sample(i, j, l, None, [f"evaluation failed: {exc}"], delta, str(exc)))
    return out


def _validity(cfg: SweepConfig, s: complex, samples: list[Sample]) -> tuple[bool, list[str]]:
    notes = []
    if cfg.quantity in GROUP_QUANTITIES:
        if 0 < s.real < 0.5:
            notes.append("exploratory: 0 < Re s < 1/2 on a non-elementary surface")
        for smp in samples:
            if smp.delta is None:
                notes.append(f"convergence: delta unavailable at l={smp.l:.17g}")
            elif s.real <= smp.delta + DELTA_MARGIN:
                notes.append(
                    f"convergence: Re s = {s.real:.6g} <= delta_l + {DELTA_MARGIN} at l={smp.l:.17g} "
                    f"(delta_l ~ {smp.delta:.4f})"
                )
    for smp in samples:
        if any(w.startswith(("convergence:", "truncation:")) for w in smp.warnings):
            notes.append(f"budget: value at l={smp.l:.17g} not converged within the evaluation budget")
    if any(smp.value is None for smp in samples):
        notes.append("evaluation failed at some grid points")
    return not notes, notes


def cauchy_diagnostic(values_by_l: Sequence[tuple[float, complex]]) -> float:
    """Largest |f(l_{i+1}) - f(l_i)| over consecutive grid points (ordered by decreasing l)."""
    if len(values_by_l) < 3:
        raise ValueError("need at least 3 samples")
    vals = [complex(v) for _, v in sorted(values_by_l, key=lambda t: -t[0])]
    return max(abs(b - a) for a, b in zip(vals, vals[1:]))


def _fit_group(cfg: SweepConfig, s: complex, z, samples: list[Sample]) -> FitReport:
    samples = sorted(samples, key=lambda smp: -smp.l)
    valid, notes = _validity(cfg, s, samples)
    warn = list(dict.fromkeys(notes + [w for smp in samples for w in smp.warnings]))
    good = [smp for smp in samples if smp.value is not None]
    ls = [smp.l for smp in good]
    vals = [smp.value for smp in good]
    target = target_exponent(cfg.quantity, s)
    is_log = cfg.quantity in LOG_QUANTITIES
    try:
        if is_log:
            rep = fit_power_law(ls, log_values=vals, target_alpha=target)
        else:
            rep = fit_power_law(ls, vals, target_alpha=target)
    except FitError as exc:
        rep = FitReport([(a, b) for a, b in zip(ls, vals)], complex("nan"), complex("nan"), math.nan, target)
        warn.append(f"fit failed: {exc}")
        valid = False
        if is_log:
            rep.extra["samples_are_logs"] = True
    else:
        if cfg.max_residual is not None and rep.residual > cfg.max_residual:
            raise FitError(
                f"{cfg.quantity} at s={s}: residual {rep.residual:.3g} exceeds {cfg.max_residual:.3g}"
            )
    rep.quantity = cfg.quantity
    rep.s = s
    rep.z = z if cfg.quantity in ("weighted_eisenstein", "starred_eisenstein") else None
    rep.valid = valid
    rep.warnings = warn
    if len(good) >= 3:
        rep.extra["cauchy"] = cauchy_diagnostic(list(zip(ls, vals)))
    deltas = [smp.delta for smp in samples if smp.delta is not None]
    if deltas:
        rep.extra["delta_max"] = max(deltas)
    return rep


def run_sweep(cfg: SweepConfig) -> list[FitReport]:
    jobs = [(cfg, l) for l in cfg.l_grid]
    if cfg.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.threads, len(jobs))) as pool:
            chunks = list(pool.map(_l_job, jobs))
    else:
        chunks = [_l_job(j) for j in jobs]
    groups: dict[tuple[int, int], list[Sample]] = {}
    for smp in (x for c in chunks for x in c):
        groups.setdefault((smp.s_index, smp.z_index), []).append(smp)
    reports = [
        _fit_group(cfg, cfg.s_grid[i], cfg.z_points[j], groups[(i, j)])
        for i, j in groups
    ]
    reports.sort(key=lambda r: (r.s.real, r.s.imag, r.z or (0.0, 0.0)))
    return reports


# ---------------------------------------------------------------- output

CSV_COLUMNS = (
    "schema", "quantity", "s_re", "s_im", "z_x", "z_y", "alpha_re", "alpha_im",
    "log_c_re", "log_c_im", "residual", "target_re", "target_im", "deviation",
    "valid", "n_samples", "cauchy", "warnings",
)


def _num(x) -> str | None:
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    return format(x, ".17g")


def _cplx(c):
    return (None, None) if c is None else (_num(c.real), _num(c.imag))


def report_record(rep: FitReport) -> dict:
    """Flat record; numbers are pre-formatted strings (17 significant digits) or None."""
    s_re, s_im = _cplx(rep.s)
    a_re, a_im = _cplx(rep.alpha)
    c_re, c_im = _cplx(rep.log_c)
    t_re, t_im = _cplx(rep.target_alpha)
    return {
        "schema": SCHEMA_VERSION,
        "quantity": rep.quantity,
        "s_re": s_re, "s_im": s_im,
        "z_x": _num(rep.z[0]) if rep.z else None,
        "z_y": _num(rep.z[1]) if rep.z else None,
        "alpha_re": a_re, "alpha_im": a_im,
        "log_c_re": c_re, "log_c_im": c_im,
        "residual": _num(rep.residual),
        "target_re": t_re, "target_im": t_im,
        "deviation": _num(rep.deviation),
        "valid": bool(rep.valid),
        "samples_are_logs": bool(rep.extra.get("samples_are_logs", False)),
        "samples": [[_num(l), _num(v.real), _num(v.imag)] for l, v in rep.samples],
        "cauchy": _num(rep.extra.get("cauchy")),
        "warnings": list(rep.warnings),
    }


def _json_value(v) -> str:
    # numbers arrive as formatted strings and are written as bare JSON numbers
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, list):
        return "[" + ",".join(_json_value(x) for x in v) + "]"
    raise TypeError(v)


_STRING_FIELDS = ("quantity",)


def _jsonl_line(rec: dict) -> str:
    parts = []
    for k, v in rec.items():
        if k in _STRING_FIELDS:
            val = json.dumps(v)
        elif k == "warnings":
            val = "[" + ",".join(json.dumps(w) for w in v) + "]"
        elif isinstance(v, str):
            val = v
        elif k == "samples":
            val = "[" + ",".join("[" + ",".join(x or "null" for x in row) + "]" for row in v) + "]"
        else:
            val = _json_value(v)
        parts.append(f"{json.dumps(k)}:{val}")
    return "{" + ",".join(parts) + "}"


def report_emit(reports: Sequence[FitReport], fmt: str = "jsonl", fh=None) -> str:
    """Serialize reports; byte-identical for identical inputs.

    jsonl: one object per line, no header (an empty list gives an empty file).
    csv: a header line then one row per report.
    Returns the text and also writes it to fh when given.
    """
    if fmt not in ("csv", "jsonl"):
        raise ConfigError(f"unknown format {fmt!r}")
    recs = [report_record(r) for r in reports]
    if fmt == "jsonl":
        text = "".join(_jsonl_line(r) + "\n" for r in recs)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in recs:
            row = []
            for col in CSV_COLUMNS:
                if col == "n_samples":
                    row.append(len(r["samples"]))
                elif col == "warnings":
                    row.append(" | ".join(r["warnings"]))
                elif col == "valid":
                    row.append("true" if r["valid"] else "false")
                else:
                    v = r[col]
                    row.append("" if v is None else v)
            w.writerow(row)
        text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def load_schema() -> dict:
    """JSON schema of one jsonl report record."""
    ref = resources.files("pinchlab").joinpath("schemas/report.schema.json")
    return json.loads(ref.read_text())
