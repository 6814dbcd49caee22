"""Experiment runner: builds models, drives the checks, emits artifacts.

Every experiment writes a uniform ``bounds.csv`` (one row per evaluated
inequality or fitted sample), any experiment-specific tables, optional SVG
plots, and a manifest with content digests.  Exit status 0 means all
verdicts passed, 2 flags bound violations, 1 is reserved for tool errors.
All randomness is derived from the config seed; sample-level work items are
independent, so the runner may fan them out over processes and collect in
deterministic order.
"""

from __future__ import annotations

import functools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__
from ..bounds import (
    FitResult,
    aad_check,
    keller_check,
    lieb_thirring_check,
    manifold_enclosure_check,
    random_bound_lhs,
    resolvent_exponent_fit,
    select_near_real,
)
from ..manifolds import PotentialField, build_line, build_sphere2, build_torus1, build_torus2
from ..operators import line_eigenvalues, schrodinger_spectrum
from ..potentials import band_limited, constant, multiwell_random, nonvanishing_random, square_well
from ..randomization import AndersonConfig, anderson_sample
from ..regions import EnclosureRegion, Exponents, XiRegion, lebesgue_pair
from .config import ConfigError, ExperimentConfig
from .manifest import write_manifest
from .svg import plot_loglog, plot_region, plot_spectrum_region

__all__ = [
    "BOUNDS_HEADER",
    "convergence_study",
    "enclosure_study",
    "fit_from_manifests",
    "plot_from_manifest",
    "run",
]

BOUNDS_HEADER = "name,lhs,rhs_factor,ratio,params,verdict"


def _params_str(params: dict) -> str:
    parts = []
    for key in sorted(params):
        val = params[key]
        if isinstance(val, float):
            val = repr(val)
        parts.append(f"{key}={val}")
    return ";".join(parts)


def _bounds_row(name, lhs, rhs_factor, params, verdict) -> str:
    ratio = lhs / rhs_factor if rhs_factor > 0 else (math.inf if lhs > 0 else 0.0)
    verdict = "" if verdict is None else verdict
    return f"{name},{lhs!r},{rhs_factor!r},{ratio!r},{_params_str(params)},{verdict}"


def _write_lines(path: Path, header: str, rows) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


@functools.lru_cache(maxsize=8)
def _cached_model(kind: str, size: int, halfwidth: float):
    if kind == "torus1":
        return build_torus1(size)
    if kind == "torus2":
        return build_torus2(size)
    if kind == "sphere2":
        return build_sphere2(size)
    if kind == "line":
        return build_line(halfwidth, size)
    raise ConfigError(f"unknown model kind {kind!r}")


def _make_potential(model, pot: dict, q: float, seed: int, scale: float):
    family = pot["family"]
    if family == "zero":
        return constant(model, 0.0)
    if family == "constant":
        value = complex(pot["value_re"], pot["value_im"])
        V = constant(model, value)
    elif family == "band_limited":
        V = band_limited(model, pot["bandwidth"], seed)
    elif family == "nonvanishing":
        V = nonvanishing_random(model, seed)
    elif family == "square_well":
        return square_well(model, pot["widths"][0], pot["kappa"])
    elif family == "multiwell":
        return multiwell_random(model, seed, max_wells=pot["wells"])
    else:
        raise ConfigError(f"unknown potential family {family!r}")
    if scale > 0:
        cur = V.lq_norm(q)
        if cur == 0:
            raise ConfigError("cannot rescale a zero potential")
        V = PotentialField(model, V.values * (scale / cur))
    return V


def _enclosure_sample(task):
    """Worker: one (size, scale, sample) cell of an enclosure study."""
    (kind, size, halfwidth, pot, q, alpha, relaxed, seed, scale) = task
    model = _cached_model(kind, size, halfwidth)
    V = _make_potential(model, pot, q, seed, scale)
    spectrum = schrodinger_spectrum(model, V, alpha)
    _, fit = manifold_enclosure_check(spectrum, model, V, q, alpha, relaxed=relaxed)
    return fit.c_emp, len(spectrum), V.lq_norm(q), spectrum


def _map_tasks(tasks, threads: int):
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_enclosure_sample, tasks))
    return [_enclosure_sample(t) for t in tasks]


def enclosure_study(cfg: ExperimentConfig, *, threads: int = 1):
    """Fit enclosure constants over the size/scale grid of the config.

    Returns (fit, cells, rows) where ``fit`` aggregates the whole study:
    per-sample minima at the base (size, scale) cell, the refinement trace of
    fitted constants along sizes, and the scale trace along potential norms.
    """
    exp, model_cfg, pot = cfg.experiment, cfg.model, cfg.potential
    q, alpha, relaxed = cfg.exponents["q"], cfg.exponents["alpha"], cfg.exponents["relaxed"]
    seed0 = exp["seed"]
    cells = {}
    per_cell_results = {}
    for size in model_cfg["size"]:
        for scale in pot["scale"]:
            tasks = [
                (
                    model_cfg["kind"], size, model_cfg["halfwidth"], dict(pot),
                    q, alpha, relaxed, seed0 + i, scale,
                )
                for i in range(pot["samples"])
            ]
            results = _map_tasks(tasks, threads)
            minima = np.array([r[0] for r in results])
            cells[(size, scale)] = float(minima.max()) if len(minima) else 0.0
            per_cell_results[(size, scale)] = results
    base_size, base_scale = model_cfg["size"][0], pot["scale"][0]
    fit = FitResult(
        c_emp=max(cells.values()),
        per_sample=np.array([r[0] for r in per_cell_results[(base_size, base_scale)]]),
        refinement_trace=[(size, cells[(size, base_scale)]) for size in model_cfg["size"]],
        scale_trace=[(scale, cells[(base_size, scale)]) for scale in pot["scale"]],
    )
    return fit, cells, per_cell_results


def _run_enclosure(cfg: ExperimentConfig, outdir: Path, threads: int):
    model_cfg, pot = cfg.model, cfg.potential
    q, alpha = cfg.exponents["q"], cfg.exponents["alpha"]
    c_target = cfg.constants["c"]
    rows, rung_rows, spec_rows = [], [], []
    any_fail = False
    fit, cells, per_cell = enclosure_study(cfg, threads=threads)
    for size in model_cfg["size"]:
        for scale in pot["scale"]:
            results = per_cell[(size, scale)]
            for i, (c_min, n_eigs, vnorm, spectrum) in enumerate(results):
                verdict = None
                if c_target != "fit":
                    verdict = "pass" if c_min <= c_target else "fail"
                    any_fail |= verdict == "fail"
                rows.append(
                    _bounds_row(
                        "enclosure_min_c",
                        c_min,
                        1.0,
                        {
                            "sample": i, "size": size, "scale": scale,
                            "alpha": alpha, "q": q, "n_eigs": n_eigs, "vnorm": vnorm,
                        },
                        verdict,
                    )
                )
                if i == 0 and size == model_cfg["size"][0] and scale == pot["scale"][0]:
                    for z in spectrum:
                        spec_rows.append(
                            f"{i},{size},{scale!r},{float(vnorm)!r},"
                            f"{float(z.real)!r},{float(z.imag)!r}"
                        )
            rung_rows.append(
                f"{size},{scale!r},{cells[(size, scale)]!r},{len(results)},"
                f"{results[0][1] if results else 0}"
            )
    rows.append(
        _bounds_row("enclosure_c_emp", fit.c_emp, 1.0, {"alpha": alpha, "q": q}, None)
    )
    files = ["bounds.csv", "rungs.csv", "spectra.csv"]
    _write_lines(outdir / "bounds.csv", BOUNDS_HEADER, rows)
    _write_lines(outdir / "rungs.csv", "size,scale,c_emp,n_samples,n_modes", rung_rows)
    _write_lines(outdir / "spectra.csv", "sample,size,scale,vnorm,re,im", spec_rows)
    return files, (2 if any_fail else 0)


@dataclass
class Rung:
    """One resolution step of a ladder study."""

    size: int
    scale: float
    c_emp: float
    n_samples: int
    vnorm: float
    lead_eigs: np.ndarray  # lowest eigenvalues of the first sample, by real part


def convergence_study(cfg: ExperimentConfig, *, threads: int = 1, n_lead: int = 5):
    """Fitted-constant ladder over the configured sizes with drift flags.

    Needs at least three rungs.  Returns (rungs, flagged) where ``flagged``
    lists the sizes whose fitted constant drifted more than the configured
    tolerance relative to the previous rung; every rung also records the
    first sample's leading eigenvalues and potential norm so eigenvalue
    drift along the ladder can be reported.
    """
    sizes = cfg.model["size"]
    if len(sizes) < 3:
        raise ConfigError("convergence study needs at least 3 ladder sizes")
    exp, model_cfg, pot = cfg.experiment, cfg.model, cfg.potential
    q, alpha, relaxed = cfg.exponents["q"], cfg.exponents["alpha"], cfg.exponents["relaxed"]
    drift_tol = cfg.tolerances["drift"]
    rungs, flagged = [], []
    scale = pot["scale"][0]
    prev = None
    for size in sizes:
        tasks = [
            (
                model_cfg["kind"], size, model_cfg["halfwidth"], dict(pot),
                q, alpha, relaxed, exp["seed"] + i, scale,
            )
            for i in range(pot["samples"])
        ]
        results = _map_tasks(tasks, threads)
        c_emp = float(max(r[0] for r in results))
        spectrum = results[0][3]
        lead = spectrum[np.argsort(spectrum.real)][:n_lead]
        rungs.append(
            Rung(
                size=size,
                scale=scale,
                c_emp=c_emp,
                n_samples=len(results),
                vnorm=results[0][2],
                lead_eigs=lead,
            )
        )
        if prev is not None and prev > 0 and abs(c_emp - prev) / prev > drift_tol:
            flagged.append(size)
        prev = c_emp
    return rungs, flagged


def _run_line_bounds(cfg: ExperimentConfig, outdir: Path):
    model_cfg, pot, tol = cfg.model, cfg.potential, cfg.tolerances
    model = _cached_model("line", model_cfg["size"][0], model_cfg["halfwidth"])
    slack = tol["slack"]
    rows = []
    any_fail = False

    def push(rep, extra):
        nonlocal any_fail
        params = dict(rep.params)
        params.update(extra)
        rows.append(_bounds_row(rep.name, rep.lhs, rep.rhs_factor, params, rep.verdict))
        any_fail |= rep.verdict == "fail"

    for width in pot["widths"]:
        V = square_well(model, width, pot["kappa"])
        spec = line_eigenvalues(model, V)
        real_spec = np.sort(spec.real)
        push(aad_check(spec, V, slack=slack), {"width": width})
        push(keller_check(float(real_spec[0]), V, 1.0), {"width": width})
        push(
            lieb_thirring_check(
                real_spec[real_spec < 0], V, 0.5, 1, constant=0.5
            ),
            {"width": width},
        )
    for i in range(pot["samples"]):
        V = multiwell_random(model, cfg.experiment["seed"] + i, max_wells=pot["wells"])
        spec = line_eigenvalues(model, V)
        real_spec = np.sort(spec.real)
        rep = lieb_thirring_check(real_spec[real_spec < 0], V, 0.5, 1, constant=0.5)
        # empirical sharp level 0.5 with discretization slack
        verdict = "pass" if rep.lhs <= 0.5 * rep.rhs_factor * (1 + slack) else "fail"
        any_fail |= verdict == "fail"
        params = dict(rep.params)
        params["sample"] = i
        rows.append(_bounds_row(rep.name, rep.lhs, rep.rhs_factor, params, verdict))
    _write_lines(outdir / "bounds.csv", BOUNDS_HEADER, rows)
    return ["bounds.csv"], (2 if any_fail else 0)


def _run_resolvent_scaling(cfg: ExperimentConfig, outdir: Path):
    model_cfg, ray_cfg = cfg.model, cfg.ray
    q, alpha = cfg.exponents["q"], cfg.exponents["alpha"]
    model = _cached_model(
        model_cfg["kind"], model_cfg["size"][0], model_cfg["halfwidth"]
    )
    if ray_cfg["use_dual_pair"]:
        p, pprime = lebesgue_pair(q)
    else:
        p, pprime = 2.0, 2.0
    display = ray_cfg["display"]
    if display == "7.1a":
        ts = np.geomspace(ray_cfg["t_min"], ray_cfg["t_max"], ray_cfg["points"])
        ray = [complex(-t, 0.0) for t in ts]
    else:
        distinct = np.unique(model.freqs)
        k = ray_cfg["pole_index"]
        if k >= len(distinct):
            raise ConfigError(f"pole_index={k} exceeds distinct frequencies")
        center = distinct[k] ** alpha
        deltas = np.geomspace(ray_cfg["delta_min"], ray_cfg["delta_max"], ray_cfg["points"])
        ray = [complex(center + d, 0.0) for d in deltas]
    xi_tol = cfg.tolerances["boundary"] or None
    fit = resolvent_exponent_fit(
        model, alpha, p, pprime, ray, display=display,
        seed=cfg.experiment["seed"], xi_tol=xi_tol,
    )
    ray_rows = [
        f"{z.real!r},{z.imag!r},{abs(z)!r},{dist!r},{norm!r}"
        for z, norm, dist in fit.points
    ]
    _write_lines(outdir / "ray.csv", "re,im,abs_z,dist,norm", ray_rows)
    rows = [
        _bounds_row(
            "resolvent_slope",
            fit.slope,
            1.0,
            {
                "display": display, "p": p, "pprime": pprime, "alpha": alpha,
                "q": q, "intercept": fit.intercept, "residual": fit.residual,
            },
            None,
        )
    ]
    _write_lines(outdir / "bounds.csv", BOUNDS_HEADER, rows)
    return ["ray.csv", "bounds.csv"], 0


def _run_random_mc(cfg: ExperimentConfig, outdir: Path):
    exp, model_cfg, pot, rnd = cfg.experiment, cfg.model, cfg.potential, cfg.randomization
    q, alpha = cfg.exponents["q"], cfg.exponents["alpha"]
    size = model_cfg["size"][0]
    model = _cached_model("torus1", size, model_cfg["halfwidth"])
    period = model.meta["period"]
    support = rnd["support"]
    base = _make_potential(model, pot, q, exp["seed"], pot["scale"][0])
    arc = np.abs(model.nodes - period / 2) <= support
    V = PotentialField(model, np.where(arc, base.values, 0.0))
    vnorm = V.lq_norm(q)
    band = (rnd["band_min"], rnd["band_max"])
    rows, tail_rows, summary = [], [], []
    ensemble_rows, mc_spec_rows = [], []
    for cells in rnd["cells"]:
        h = period / cells
        stats = []
        for i in range(pot["samples"]):
            acfg = AndersonConfig(h=h, dist=rnd["dist"], seed=exp["seed"] + i)
            Vw = anderson_sample(V, acfg)
            spectrum = schrodinger_spectrum(model, Vw, alpha)
            lams = select_near_real(spectrum, eps_ratio=rnd["eps_ratio"], band=band)
            stat = (
                max(random_bound_lhs(l, h, support, q, 1) / vnorm for l in lams)
                if len(lams)
                else math.nan
            )
            ref = ""
            if i == 0:  # store one full spectrum per rung as the reference
                ref = "mc_spectra.csv"
                for z in spectrum:
                    mc_spec_rows.append(
                        f"{cells},{i},{float(z.real)!r},{float(z.imag)!r}"
                    )
            ensemble_rows.append(
                f"{cells},{i},{acfg.seed},{Vw.lq_norm(q)!r},{len(lams)},{stat!r},{ref}"
            )
            if len(lams):
                stats.append(stat)
        stats = np.array(stats)
        p95 = float(np.percentile(stats, 95)) if len(stats) else math.nan
        summary.append((cells, h, p95, stats))
        peak = float(stats.max()) if len(stats) else math.nan
        rows.append(f"{cells},{h!r},{len(stats)},{p95!r},{peak!r}")
    pooled = np.concatenate([s for _, _, _, s in summary]) if summary else np.array([])
    if len(pooled):
        m_grid = np.quantile(pooled, [0.5, 0.75, 0.9, 0.95, 0.99])
        for cells, h, _, stats in summary:
            for m_val in m_grid:
                frac = float((stats > m_val).mean()) if len(stats) else math.nan
                tail_rows.append(f"{cells},{float(m_val)!r},{frac!r}")
    _write_lines(outdir / "random_mc.csv", "cells,h,n_samples,p95,max_stat", rows)
    _write_lines(outdir / "mtail.csv", "cells,m,violation_fraction", tail_rows)
    _write_lines(
        outdir / "ensemble.csv",
        "cells,sample,seed,vnorm_q,n_selected,stat,spectra_ref",
        ensemble_rows,
    )
    _write_lines(outdir / "mc_spectra.csv", "cells,sample,re,im", mc_spec_rows)
    bounds_rows = [
        _bounds_row(
            "random_bound_p95", p95, 1.0,
            {"cells": cells, "h": h, "q": q, "support": support, "dist": rnd["dist"]},
            None,
        )
        for cells, h, p95, _ in summary
    ]
    _write_lines(outdir / "bounds.csv", BOUNDS_HEADER, bounds_rows)
    return ["random_mc.csv", "mtail.csv", "ensemble.csv", "mc_spectra.csv", "bounds.csv"], 0


def _viewport(cfg: ExperimentConfig):
    plot = cfg.plot
    vals = (plot["xmin"], plot["xmax"], plot["ymin"], plot["ymax"])
    if all(v is not None for v in vals):
        return vals
    return None


def _run_region_plot(cfg: ExperimentConfig, outdir: Path):
    alpha = cfg.exponents["alpha"]
    plot_region(
        alpha,
        outdir / "region.svg",
        viewport=_viewport(cfg),
        width=cfg.plot["width"],
        height=cfg.plot["height"],
    )
    return ["region.svg"], 0


_RUNNERS = {
    "enclosure": lambda cfg, outdir, threads: _run_enclosure(cfg, outdir, threads),
    "line_bounds": lambda cfg, outdir, threads: _run_line_bounds(cfg, outdir),
    "resolvent_scaling": lambda cfg, outdir, threads: _run_resolvent_scaling(cfg, outdir),
    "random_mc": lambda cfg, outdir, threads: _run_random_mc(cfg, outdir),
    "region_plot": lambda cfg, outdir, threads: _run_region_plot(cfg, outdir),
}


def run(
    cfg: ExperimentConfig,
    *,
    out=None,
    seed=None,
    threads=None,
    strict: bool = False,
):
    """Execute the configured experiment; returns (exit_status, manifest path).

    ``out``, ``seed`` and ``threads`` override the config; ``strict``
    escalates drift warnings in ladder studies to a failing status.
    """
    if seed is not None:
        cfg.experiment["seed"] = int(seed)
    if threads is not None:
        cfg.experiment["threads"] = int(threads)
    if out is not None:
        cfg.experiment["out"] = str(out)
    kind = cfg.experiment["kind"]
    outdir = Path(cfg.experiment["out"]) / (cfg.experiment["label"] or kind)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    files, status = _RUNNERS[kind](cfg, outdir, cfg.experiment["threads"])
    solve_time = time.perf_counter() - t0
    if strict and status != 0:
        status = max(status, 2)
    manifest = write_manifest(
        outdir,
        cfg,
        version=__version__,
        timings={"total": solve_time},
        files=files,
        exit_status=status,
    )
    return status, manifest


def _read_csv(path: Path):
    lines = path.read_text(encoding="ascii").strip().split("\n")
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def plot_from_manifest(manifest: dict, out=None) -> Path:
    """Re-render the plot artifact for a finished run."""
    rundir = Path(manifest["_dir"])
    kind = manifest["config.experiment"]["kind"]
    target = Path(out) if out else rundir
    target.mkdir(parents=True, exist_ok=True)
    if kind == "region_plot":
        alpha = float(manifest["config.exponents"]["alpha"])
        path = target / "region.svg"
        plot_region(alpha, path)
        return path
    if kind == "enclosure":
        spec_rows = _read_csv(rundir / "spectra.csv")
        rung_rows = _read_csv(rundir / "rungs.csv")
        if not spec_rows or not rung_rows:
            raise ValueError("run has no stored spectrum to plot")
        spectrum = np.array(
            [complex(float(r["re"]), float(r["im"])) for r in spec_rows]
        )
        vnorm = float(spec_rows[0]["vnorm"])
        c_emp = float(rung_rows[0]["c_emp"])
        size = int(rung_rows[0]["size"])
        mcfg = manifest["config.model"]
        model = _cached_model(mcfg["kind"], size, float(mcfg["halfwidth"]))
        ecfg = manifest["config.exponents"]
        exp = Exponents(
            d=model.dim,
            q=float(ecfg["q"]),
            alpha=float(ecfg["alpha"]),
            relaxed=ecfg["relaxed"] in ("True", "true"),
        )
        region = EnclosureRegion.build(model.freqs, exp, c_emp, vnorm)
        xi = XiRegion(alpha=exp.alpha) if exp.alpha > 1 else None
        path = target / "spectrum_region.svg"
        plot_spectrum_region(spectrum, region, xi, path=path)
        return path
    if kind == "resolvent_scaling":
        rows = _read_csv(rundir / "ray.csv")
        pts = [(float(r["abs_z"]), float(r["norm"])) for r in rows]
        path = target / "ray_loglog.svg"
        plot_loglog(pts, path)
        return path
    if kind == "random_mc":
        rows = _read_csv(rundir / "random_mc.csv")
        pts = [(1.0 / float(r["h"]), float(r["p95"])) for r in rows]
        path = target / "p95_vs_invh.svg"
        plot_loglog(pts, path)
        return path
    raise ValueError(f"no plot defined for experiment kind {kind!r}")


def fit_from_manifests(manifests: list, out=None):
    """Aggregate fitted constants across runs: global max of sample minima."""
    rows = []
    overall = 0.0
    for manifest in manifests:
        rundir = Path(manifest["_dir"])
        for row in _read_csv(rundir / "bounds.csv"):
            if row["name"] != "enclosure_min_c":
                continue
            c_min = float(row["lhs"])
            overall = max(overall, c_min)
            rows.append((str(rundir), row["params"], c_min))
    lines = [f"{src},{params},{c!r}" for src, params, c in rows]
    lines.append(f"ALL,c_emp,{overall!r}")
    if out:
        target = Path(out)
        target.parent.mkdir(parents=True, exist_ok=True)
        _write_lines(target, "source,params,min_c", lines)
    return overall, rows
