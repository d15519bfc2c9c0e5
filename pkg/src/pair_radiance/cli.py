"""Command-line entry point: ``pair-radiance <command> --config run.json``.

Every artifact starts with ``#`` comment lines carrying the tool version,
config hash, seed, pinned constants and the alpha prefactor variant, so a
table can be traced back to the run that produced it. Floats are written
in shortest round-trip form, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import RunConfig, parse_config
from .errors import ConfigError, NumericalFailure, PairRadianceError
from .phase_space import angular_distribution, spectrum
from .quadrature import IE, IM, THREADS_ENV, integrate_reduced, mc_estimate, resolve_threads
from .rates import (
    closed_form_rate,
    crosscheck_report,
    graviton_power,
    power_binary_dielectric_closed,
    power_binary_metric_closed,
    power_ratio,
    power_sphere_closed,
    total_rate_numeric,
)
from .sampler import CSV_HEADER, sample_pairs
from .sources import AlphaVariant, BinaryConfig, BinaryDielectricSource, BinaryMetricSource, SphereSource
from .units import CONSTANTS, HBAR

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("rate", "power", "spectrum", "angular", "integrals", "sample", "scan", "compare")


@dataclass
class Table:
    columns: list
    rows: list
    notes: dict = field(default_factory=dict)


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def header(cmd: str, cfg: RunConfig) -> dict:
    return {
        "tool": f"pair-radiance {__version__}",
        "command": cmd,
        "scenario": cfg.scenario,
        "config_hash": cfg.config_hash,
        "seed": cfg.numerics.seed,
        "alpha_variant": cfg.numerics.alpha_variant,
        "constants": CONSTANTS.as_dict(),
    }


def render(table: Table, meta: dict, fmt: str) -> str:
    if fmt == "json":
        doc = {"meta": meta, "notes": table.notes, "columns": table.columns, "rows": table.rows}
        return json.dumps(_jsonable(doc), indent=2) + "\n"
    buf = io.StringIO()
    for key, val in meta.items():
        if key == "constants":
            val = " ".join(f"{k}={_cell(v)}" for k, v in val.items())
        buf.write(f"# {key}: {val}\n")
    for key, val in table.notes.items():
        buf.write(f"# {key}: {_cell(val)}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_cell(c) for c in row) + "\n")
    return buf.getvalue()


def _sources(cfg: RunConfig):
    variant = AlphaVariant(cfg.numerics.alpha_variant)
    if cfg.scenario == "sphere":
        return [("sphere", SphereSource(cfg.physics))]
    if cfg.scenario == "binary_dielectric":
        return [("binary_dielectric", BinaryDielectricSource(cfg.physics))]
    if cfg.scenario == "binary_metric":
        return [("binary_metric", BinaryMetricSource(cfg.physics, variant))]
    return [("binary_dielectric", BinaryDielectricSource(cfg.physics)),
            ("binary_metric", BinaryMetricSource(cfg.physics, variant))]


def _harmonic(cfg, src):
    return cfg.numerics.harmonic or src.leading_harmonic


def cmd_rate(cfg: RunConfig, threads: int) -> Table:
    rows = []
    num = cfg.numerics
    for name, src in _sources(cfg):
        br = total_rate_numeric(src, orders=num.orders, threads=threads, tol=num.tolerance)
        for m, r in br.per_harmonic.items():
            rows.append([name, m, r])
        rows.append([name, "total", br.total])
        try:
            rows.append([name, "closed_form", closed_form_rate(src)])
        except PairRadianceError:
            pass
    return Table(["source", "harmonic", "rate_per_s"], rows)


def _flatten(prefix, obj, out):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(obj, list):
        for v in obj:
            out.append([prefix, v])
    else:
        out.append([prefix, obj])


def cmd_power(cfg: RunConfig, threads: int) -> Table:
    rep = crosscheck_report(cfg.physics, orders=cfg.numerics.orders, threads=threads,
                            numeric=cfg.numerics.numeric_report)
    rows = []
    _flatten("", rep.as_dict(), rows)
    return Table(["quantity", "value"], rows)


def cmd_spectrum(cfg: RunConfig, threads: int) -> Table:
    n = cfg.numerics.grid_points
    rows = []
    for name, src in _sources(cfg):
        m = _harmonic(cfg, src)
        grid = [m * (i + 0.5) / n for i in range(n)]
        for x, d in spectrum(src, m, grid, orders=cfg.numerics.orders):
            rows.append([name, m, x, d])
    return Table(["source", "m", "omega1_over_Omega", "dRate_domega1"], rows)


def cmd_angular(cfg: RunConfig, threads: int) -> Table:
    chi = np.linspace(-math.pi / 2.0, math.pi / 2.0, cfg.numerics.grid_points)
    rows, notes = [], {}
    for name, src in _sources(cfg):
        m = _harmonic(cfg, src)
        tab = angular_distribution(src, m, chi, orders=max(cfg.numerics.orders, 48))
        notes[f"{name}_peak_rate_per_sr"] = tab.peak
        rows.extend([name, m, c, v] for c, v in zip(tab.chi, tab.intensity))
    return Table(["source", "m", "chi_rad", "relative_intensity"], rows, notes)


def cmd_integrals(cfg: RunConfig, threads: int) -> Table:
    num = cfg.numerics
    rows = []
    for name, w in (("IE", IE), ("IM", IM)):
        for est in (integrate_reduced(w, num.orders, threads),
                    mc_estimate(w, num.mc_samples, num.seed, threads)):
            rows.append([name, est.method.value, est.value, est.std_error, est.n_evals])
    return Table(["integral", "method", "value", "std_error", "n_evals"], rows)


def cmd_sample(cfg: RunConfig, threads: int) -> Table:
    srcs = _sources(cfg)
    if len(srcs) != 1:
        raise ConfigError("sample needs a single-source scenario (sphere, binary_dielectric or binary_metric)")
    _, src = srcs[0]
    m = _harmonic(cfg, src)
    s = sample_pairs(src, m, cfg.numerics.n_events, cfg.numerics.seed, threads=threads)
    rows = [[i, m, *s.l1_vec[i], *s.l2_vec[i], s.hel1[i].value, s.hel2[i].value] for i in range(len(s))]
    notes = {"n_proposed": s.n_proposed, "acceptance": s.acceptance,
             "rate_estimate_per_s": s.rate_estimate, "rate_std_error_per_s": s.rate_std_error}
    return Table(list(CSV_HEADER), rows, notes)


def _closed_powers(cfg: RunConfig):
    """(R, v_R, P_E, P_M, P_G, pair rate E, pair rate M); None where not applicable."""
    p = cfg.physics
    if cfg.scenario == "sphere":
        pe = power_sphere_closed(p)
        return p.R, p.v_R, pe, None, None, pe / (HBAR * p.omega), None
    d = p.derived
    pm = power_binary_metric_closed(p) if cfg.scenario in ("binary_metric", "compare") else None
    pe = power_binary_dielectric_closed(p) if cfg.scenario in ("binary_dielectric", "compare") else None
    quantum_e = (2.0 if p.fine_tuned else 1.0) * HBAR * d.omega
    return (d.R, d.v_R, pe, pm, graviton_power(p).paper,
            pe / quantum_e if pe is not None else None,
            pm / (2.0 * HBAR * d.omega) if pm is not None else None)


def cmd_scan(cfg: RunConfig, threads: int) -> Table:
    if cfg.scan is None:
        raise ConfigError("scan: missing 'scan' section (parameter and values)")
    param = cfg.scan.parameter
    if param not in type(cfg.system).model_fields:
        raise ConfigError(f"scan.parameter: '{param}' is not a parameter of the {cfg.scenario} system")
    rows = []
    for val in cfg.scan.grid():
        upd = {param: val}
        if param == "period_s":
            upd["omega_rad_s"] = None
        elif param == "omega_rad_s":
            upd["period_s"] = None
        point = cfg.with_updates(system=upd)
        rows.append([val, *_closed_powers(point)])
    cols = [param, "R_m", "v_R", "P_E_W", "P_M_W", "P_G_W", "rate_E_per_s", "rate_M_per_s"]
    return Table(cols, rows)


def cmd_compare(cfg: RunConfig, threads: int) -> Table:
    if not isinstance(cfg.physics, BinaryConfig):
        raise ConfigError("compare needs a binary system")
    p = cfg.physics
    gp = graviton_power(p)
    pm = power_binary_metric_closed(p)
    rows = [["P_M_W", pm], ["P_G_paper_W", gp.paper], ["P_G_quadrupole_W", gp.quadrupole],
            ["P_G_paper_over_P_M", gp.paper / pm],
            ["log10_P_G_paper_over_P_M", math.log10(gp.paper / pm)]]
    if p.kappa1 != 0.0 or p.kappa2 != 0.0:
        pe = power_binary_dielectric_closed(p)
        rows.insert(0, ["P_E_W", pe])
        rows.append(["P_M_over_P_E", pm / pe])
        if p.kappa_over_rho_eff != 0.0:
            pr = power_ratio(p)
            rows.append(["ratio_formula", pr.formula])
            rows.append(["ratio_recomputed", pr.recomputed])
        rows.append(["fine_tuned", p.fine_tuned])
    return Table(["quantity", "value"], rows)


HANDLERS = {
    "rate": cmd_rate, "power": cmd_power, "spectrum": cmd_spectrum, "angular": cmd_angular,
    "integrals": cmd_integrals, "sample": cmd_sample, "scan": cmd_scan, "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pair-radiance", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"pair-radiance {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="output path (default: config output.path, else stdout)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--seed", type=int)
    ap.add_argument("--threads", type=int, help=f"worker threads (fallback: ${THREADS_ENV})")
    ap.add_argument("--alpha-variant", choices=[v.value for v in AlphaVariant])
    return ap


def run(cmd: str, cfg: RunConfig, threads: int | None = None) -> str:
    """Execute one subcommand and return the rendered artifact."""
    table = HANDLERS[cmd](cfg, resolve_threads(threads))
    return render(table, header(cmd, cfg), cfg.output.format)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        numerics = {k: v for k, v in (("seed", args.seed), ("alpha_variant", args.alpha_variant)) if v is not None}
        output = {k: v for k, v in (("format", args.format), ("path", args.out)) if v is not None}
        if numerics or output:
            cfg = cfg.with_updates(numerics=numerics, output=output)
        text = run(args.command, cfg, args.threads)
        if cfg.output.path:
            with open(cfg.output.path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (PairRadianceError, ZeroDivisionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
