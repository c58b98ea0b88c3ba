"""Command-line front end: batch verification runs with file reports.

Every subcommand validates its configuration up front, fans independent
(s, alpha, function) work items over a bounded thread pool, canonicalizes the
row order, and writes CSV tables, JSON verdict records, and two-column .dat
curves.  The exit status encodes the outcome: 0 all checks passed, 1 at
least one verification failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import battery
from .dirichlet import q_form_dirichlet
from .errors import ConfigError
from .extension import c_sigma, hardy_check, st_extension, weighted_energy
from .grids import FractionalOrder, GridFunction, IntervalDomain
from .harness import (random_compact_field, verify_comparison,
                      verify_dilation_limit, verify_extension_identities,
                      verify_pointwise)
from .navier import q_form_navier
from .report import (ReportRecord, RunConfig, StopWatch, load_config,
                     write_csv, write_dat, write_json)

__all__ = ["main"]


def _domain(cfg: RunConfig) -> IntervalDomain:
    return IntervalDomain(cfg.a, cfg.b)


def _function(cfg: RunConfig, name: str) -> GridFunction:
    return battery.battery_function(name, _domain(cfg), cfg.n_pts)


def admissible(name: str, s: float) -> bool:
    """Domain rules for (function, order) pairs.

    Orders at or below -1/2 need zero total mass; orders above 1 need the
    smooth members of the battery.
    """
    if s <= -0.5 and not battery.is_mean_zero(name):
        return False
    if s > 1.0 and not battery.is_smooth(name):
        return False
    return True


def _run_pool(items: Sequence, worker: Callable, jobs: int) -> List:
    if jobs <= 1 or len(items) <= 1:
        return [worker(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(worker, it) for it in items]
        return [f.result() for f in futures]


def _emit(cfg: RunConfig, name: str, header: Sequence[str],
          rows: Sequence[Sequence], records: List[ReportRecord]) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fmts = set(cfg.formats)
    if "both" in fmts:
        fmts |= {"csv", "json"}
    if "csv" in fmts:
        write_csv(out / f"{name}.csv", header, rows)
    if "json" in fmts:
        write_json(out / f"{name}.json",
                   {"run_id": cfg.run_id(), "records": [r.to_json() for r in records]})
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_forms(cfg: RunConfig) -> int:
    dom = _domain(cfg)
    funcs = {nm: _function(cfg, nm) for nm in cfg.selected_functions}
    items = [(nm, s) for nm in sorted(funcs) for s in cfg.s_values
             if admissible(nm, s)]

    def worker(item):
        nm, s = item
        u = funcs[nm]
        order = FractionalOrder(s)
        with StopWatch() as sw:
            nav = q_form_navier(u, order, dom=dom, n_modes=cfg.n_modes)
            dir_ = q_form_dirichlet(u, order, cells0=cfg.xi_cells,
                                    max_stages=cfg.max_stages)
        rec = ReportRecord(cfg.run_id(), "forms",
                           {"function": nm, "s": s},
                           {"q_navier": nav.q_value, "q_dirichlet": dir_.q_value,
                            "navier_tail": nav.tail_estimate,
                            "dirichlet_estimate": dir_.quadrature_error_estimate,
                            "xi_max": dir_.xi_max_used},
                           None, nav.tail_estimate + dir_.quadrature_error_estimate,
                           sw.elapsed)
        return (nm, s, nav, dir_, rec)

    results = _run_pool(items, worker, cfg.jobs)
    results.sort(key=lambda r: (r[0], r[1]))
    header = ["function", "s", "q_navier", "q_dirichlet",
              "navier_tail", "dirichlet_estimate"]
    rows = [(nm, s, nav.q_value, dir_.q_value, nav.tail_estimate,
             dir_.quadrature_error_estimate)
            for nm, s, nav, dir_, _ in results]
    out = _emit(cfg, "forms", header, rows, [r[4] for r in results])
    for nm in sorted(funcs):
        sel = [(s, nav.q_value, dir_.q_value)
               for n2, s, nav, dir_, _ in results if n2 == nm]
        if sel:
            write_dat(out / f"forms_{nm}_navier.dat",
                      ([s for s, qn, _ in sel], [qn for _, qn, _ in sel]),
                      f"{nm}: s vs spectral form")
            write_dat(out / f"forms_{nm}_dirichlet.dat",
                      ([s for s, _, qd in sel], [qd for _, _, qd in sel]),
                      f"{nm}: s vs restricted form")
    print(f"forms: {len(rows)} rows -> {out}")
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    dom = _domain(cfg)
    funcs = {nm: _function(cfg, nm) for nm in cfg.selected_functions}
    items = [(nm, s) for nm in sorted(funcs) for s in cfg.s_values
             if admissible(nm, s)]

    def worker(item):
        nm, s = item
        with StopWatch() as sw:
            v = verify_comparison(funcs[nm], FractionalOrder(s), dom=dom,
                                  n_modes=cfg.n_modes)
        rec = ReportRecord(cfg.run_id(), "compare", {"function": nm, "s": s},
                           v.row(), {"passed": v.passed}, v.error_budget,
                           sw.elapsed)
        return (nm, s, v, rec)

    results = _run_pool(items, worker, cfg.jobs)
    results.sort(key=lambda r: (r[0], r[1]))
    header = ["function", "s", "q_navier", "q_dirichlet", "predicted",
              "observed", "margin", "error_budget", "passed"]
    rows = [(nm, s, v.q_navier, v.q_dirichlet, v.predicted.value,
             v.observed.value, v.margin, v.error_budget, v.passed)
            for nm, s, v, _ in results]
    out = _emit(cfg, "compare", header, rows, [r[3] for r in results])
    n_pass = sum(1 for *_, v, _r in results if v.passed)
    print(f"compare: {n_pass}/{len(results)} PASS -> {out}")
    return 0 if n_pass == len(results) else 1


def cmd_dilate(cfg: RunConfig) -> int:
    dom = _domain(cfg)
    funcs = {nm: _function(cfg, nm) for nm in cfg.selected_functions}
    items = [(nm, s) for nm in sorted(funcs) for s in cfg.dilate_s_values
             if admissible(nm, s) and not float(s).is_integer()]

    def worker(item):
        nm, s = item
        with StopWatch() as sw:
            rep = verify_dilation_limit(funcs[nm], FractionalOrder(s), dom=dom,
                                        alphas=cfg.alphas, n_modes=cfg.n_modes,
                                        limit_rtol=cfg.limit_rtol)
        rec = ReportRecord(cfg.run_id(), "dilate", {"function": nm, "s": s},
                           {"values": list(rep.q_navier_dilated),
                            "q_dirichlet": rep.q_dirichlet,
                            "extrapolated": rep.extrapolated_limit,
                            "fitted_rate": rep.fitted_rate,
                            "relative_gap": rep.relative_gap},
                           {"monotone": rep.monotone,
                            "bounded": rep.bounded_correct_side,
                            "passed": rep.passed},
                           rep.error_budget, sw.elapsed)
        return (nm, s, rep, rec)

    results = _run_pool(items, worker, cfg.jobs)
    results.sort(key=lambda r: (r[0], r[1]))
    header = ["function", "s", "direction", "monotone", "bounded",
              "extrapolated", "q_dirichlet", "relative_gap", "passed"]
    rows = [(nm, s, rep.direction, rep.monotone, rep.bounded_correct_side,
             rep.extrapolated_limit, rep.q_dirichlet, rep.relative_gap,
             rep.passed) for nm, s, rep, _ in results]
    out = _emit(cfg, "dilate", header, rows, [r[3] for r in results])
    for nm, s, rep, _ in results:
        tag = f"{nm}_s{s:+.2f}".replace("+", "p").replace("-", "m").replace(".", "")
        write_dat(out / f"dilate_{tag}.dat",
                  (list(rep.alphas), list(rep.q_navier_dilated)),
                  f"{nm} s={s}: alpha vs dilated spectral form")
    n_pass = sum(1 for *_, rep, _r in results if rep.passed)
    print(f"dilate: {n_pass}/{len(results)} PASS -> {out}")
    return 0 if n_pass == len(results) else 1


def cmd_pointwise(cfg: RunConfig) -> int:
    dom = _domain(cfg)

    def worker(item):
        nm, sigma = item
        f = _function(cfg, nm)
        signed = bool(np.min(f.values) < 0.0)
        with StopWatch() as sw:
            rep = verify_pointwise(f, sigma, dom=dom, allow_signed=signed,
                                   n_modes=cfg.n_modes)
        rec = ReportRecord(cfg.run_id(), "pointwise",
                           {"function": nm, "sigma": sigma, "signed": signed},
                           {"min_margin": rep.min_margin,
                            "route_disagreement": rep.route_disagreement},
                           {"passed": rep.passed}, rep.error_budget, sw.elapsed)
        return (nm, sigma, rep, rec)

    items = list(cfg.pointwise_cases)
    results = _run_pool(items, worker, cfg.jobs)
    results.sort(key=lambda r: (r[0], r[1]))
    header = ["function", "sigma", "min_margin", "error_budget",
              "route_disagreement", "passed"]
    rows = [(nm, sg, rep.min_margin, rep.error_budget,
             rep.route_disagreement, rep.passed)
            for nm, sg, rep, _ in results]
    out = _emit(cfg, "pointwise", header, rows, [r[3] for r in results])
    for nm, sg, rep, _ in results:
        tag = f"{nm}_sig{sg:.2f}".replace(".", "")
        write_dat(out / f"pointwise_{tag}.dat",
                  (rep.x, rep.navier_values, rep.dirichlet_values),
                  f"{nm} sigma={sg}: x, spectral, restricted")
    n_pass = sum(1 for *_, rep, _r in results if rep.passed)
    print(f"pointwise: {n_pass}/{len(results)} PASS -> {out}")
    return 0 if n_pass == len(results) else 1


def cmd_extension(cfg: RunConfig) -> int:
    dom = _domain(cfg)
    items = [(nm, sg) for nm in cfg.extension_functions for sg in cfg.sigmas]

    def worker(item):
        nm, sigma = item
        u = _function(cfg, nm)
        with StopWatch() as sw:
            checks = verify_extension_identities(
                u, sigma, dom=dom, rtol=cfg.identity_rtol,
                n_modes=cfg.n_modes, n_t=cfg.field_nt)
        rec = ReportRecord(cfg.run_id(), "extension",
                           {"function": nm, "sigma": sigma},
                           {"checks": [c.row() for c in checks]},
                           {"passed": all(c.passed for c in checks)},
                           max(c.rel_err for c in checks), sw.elapsed)
        return (nm, sigma, checks, rec)

    results = _run_pool(items, worker, cfg.jobs)
    results.sort(key=lambda r: (r[0], r[1]))
    header = ["function", "sigma", "identity", "lhs", "rhs", "rel_err",
              "tolerance", "passed"]
    rows = []
    for nm, sg, checks, _ in results:
        for c in checks:
            rows.append((nm, sg, c.identity, c.lhs, c.rhs, c.rel_err,
                         c.tolerance, c.passed))
    out = _emit(cfg, "extension", header, rows, [r[3] for r in results])
    n_pass = sum(1 for row in rows if row[-1])
    print(f"extension: {n_pass}/{len(rows)} identity checks PASS -> {out}")
    return 0 if n_pass == len(rows) else 1


def cmd_hardy(cfg: RunConfig) -> int:
    sigma = cfg.hardy_sigma

    def worker(k):
        with StopWatch() as sw:
            fld = random_compact_field(cfg.seed + k, sigma)
            chk = hardy_check(fld)
        ok = chk.applicable and chk.margin > 0.0
        rec = ReportRecord(cfg.run_id(), "hardy",
                           {"seed": cfg.seed + k, "sigma": sigma},
                           {"lhs": chk.lhs, "rhs": chk.rhs,
                            "constant": chk.constant},
                           {"passed": ok}, None, sw.elapsed)
        return (k, chk, ok, rec)

    results = _run_pool(list(range(cfg.hardy_fields)), worker, cfg.jobs)
    results.sort(key=lambda r: r[0])
    header = ["seed", "sigma", "lhs", "rhs", "constant", "margin", "passed"]
    rows = [(cfg.seed + k, sigma, chk.lhs, chk.rhs, chk.constant,
             chk.margin, ok) for k, chk, ok, _ in results]
    out = _emit(cfg, "hardy", header, rows, [r[3] for r in results])
    n_pass = sum(1 for *_, ok, _r in results if ok)
    print(f"hardy: {n_pass}/{len(results)} PASS -> {out}")
    return 0 if n_pass == len(results) else 1


def cmd_converge(cfg: RunConfig) -> int:
    dom = _domain(cfg)
    rows: List[Tuple] = []
    records: List[ReportRecord] = []
    failed = False

    # vertical-mesh doubling on the cylinder energy of the first eigenmode
    sigma = 0.5
    u = _function(cfg, "mode1")
    lam1 = dom.eigenvalues(np.array([1.0]))[0]
    exact = (2.0 * sigma / c_sigma(sigma)) * lam1**sigma
    levels = [80 * 2**k for k in range(cfg.converge_levels)]
    errs = []
    with StopWatch() as sw:
        for n_t in levels:
            fld = st_extension(u, sigma, dom=dom, n_t=n_t)
            err = abs(weighted_energy(fld) - exact) / exact
            errs.append(max(err, 1e-16))
            rows.append(("energy-mesh", n_t, err))
    rate = -float(np.polyfit(np.log(levels), np.log(errs), 1)[0])
    rows.append(("energy-mesh-rate", 0, rate))
    records.append(ReportRecord(cfg.run_id(), "converge",
                                {"study": "energy-mesh", "sigma": sigma},
                                {"levels": levels, "errors": errs,
                                 "fitted_rate": rate},
                                {"passed": rate >= 1.0}, None, sw.elapsed))
    if rate < 1.0:
        failed = True

    # frequency-grid doubling on the restricted form
    u2 = _function(cfg, "sin2x")
    order = FractionalOrder(0.5)
    ref = q_form_dirichlet(u2, order, cells0=8192, max_stages=3).q_value
    cell_levels = [512 * 2**k for k in range(cfg.converge_levels)]
    qerrs = []
    with StopWatch() as sw:
        for cells in cell_levels:
            val = q_form_dirichlet(u2, order, cells0=cells, max_stages=1).q_value
            err = abs(val - ref) / abs(ref)
            qerrs.append(max(err, 1e-16))
            rows.append(("fourier-grid", cells, err))
    monotone = bool(np.all(np.diff(qerrs) < 0.0))
    rows.append(("fourier-grid-monotone", 0, float(monotone)))
    records.append(ReportRecord(cfg.run_id(), "converge",
                                {"study": "fourier-grid", "s": 0.5},
                                {"levels": cell_levels, "errors": qerrs},
                                {"passed": monotone}, None, sw.elapsed))
    if not monotone:
        failed = True

    out = _emit(cfg, "converge", ["study", "resolution", "value"], rows,
                records)
    write_dat(out / "converge_energy.dat", (levels, errs),
              "vertical cells vs relative energy error")
    write_dat(out / "converge_fourier.dat", (cell_levels, qerrs),
              "frequency cells vs relative form error")
    print(f"converge: energy rate {rate:.2f}, fourier monotone {monotone} -> {out}")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "forms": cmd_forms,
    "compare": cmd_compare,
    "dilate": cmd_dilate,
    "pointwise": cmd_pointwise,
    "extension": cmd_extension,
    "hardy": cmd_hardy,
    "converge": cmd_converge,
}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fraclap",
        description="Spectral vs restricted fractional Laplacians on an "
                    "interval: forms, extension energies, and inequality "
                    "verdicts.")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--out", help="output directory (default: reports)")
    p.add_argument("--format", choices=["csv", "json", "both"],
                   help="report formats to write")
    p.add_argument("--jobs", type=int, help="worker pool size")
    p.add_argument("--seed-battery", dest="seed_battery",
                   help="named test-function battery to sweep")
    sub = p.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sub.add_parser(name, help=f"run the {name} checks")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    overrides: Dict[str, Any] = {}
    if args.out:
        overrides["out_dir"] = args.out
    if args.format:
        overrides["formats"] = ("csv", "json") if args.format == "both" \
            else (args.format,)
    if args.jobs:
        overrides["jobs"] = args.jobs
    if args.seed_battery:
        overrides["battery"] = args.seed_battery
    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":                      # pragma: no cover
    sys.exit(main())
