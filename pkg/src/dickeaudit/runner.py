"""Batch experiments: wire the library into the three reference figures.

Each run_* function executes one experiment from an ExperimentConfig,
writes plot-ready data tables plus a rendered figure into a per-command
subdirectory of the output directory, and returns the manifest path.

Trust gating: no statistics file is produced from energies above the
certified e_trust unless allow_unconverged is set, in which case the
affected files carry an UNCONVERGED watermark in their header line.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from dickeaudit import semiclassical, spectral
from dickeaudit.config import ExperimentConfig
from dickeaudit.convergence import (
    SpectrumRecord,
    convergence_ladder,
    monotonicity_check,
    sector_spectrum,
    trusted_window,
)
from dickeaudit.model import ParitySector
from dickeaudit.reporting import (
    UNCONVERGED_MARK,
    RunManifest,
    render_chaos,
    render_convergence,
    render_dos,
    render_rstat,
    write_table,
)

PLATEAU_BAND = 0.01  # |<r> - GOE| band defining the converged plateau


class AuditError(RuntimeError):
    """An invariant violation that must fail the run (nonzero exit)."""


def _sector_tag(sector: ParitySector) -> str:
    return "even" if sector.sign == +1 else "odd"


def _start(cfg: ExperimentConfig, command: str) -> RunManifest:
    out = Path(cfg.out_dir) / command
    manifest = RunManifest(out, command, cfg.echo())
    return manifest


def _certify(cfg, params, sector, n_max, cache) -> "spectral.np.ndarray":
    return trusted_window(
        params,
        sector,
        n_max,
        tol=cfg.tol * params.omega,
        spectra=cache,
        dim_cap=cfg.dim_cap,
    )


def run_convergence_figure(cfg: ExperimentConfig) -> Path:
    """Per-level energies across the cutoff ladder, with verdicts."""
    params = cfg.model_params()
    manifest = _start(cfg, "converge")
    gs = semiclassical.ground_state_energy(params)
    manifest.record("semiclassical_gs_per_atom", f"{gs:.12g}")
    for sector in cfg.sectors():
        tag = _sector_tag(sector)
        cache: dict[int, SpectrumRecord] = {}
        reports = convergence_ladder(
            params, sector, list(cfg.ladder), list(cfg.levels), cfg.tol * params.omega, cache
        )
        ok, violations = monotonicity_check(reports)
        if not ok:
            raise AuditError(f"interlacing monotonicity violated at {violations}")
        manifest.record(f"{tag}.monotonic", "true")
        columns = {"n_max": np.array(cfg.ladder, dtype=float)}
        per_level = {}
        for rep in reports:
            values = np.array([e for _, e in rep.ladder]) / params.n_atoms
            columns[f"E{rep.level_index}_over_N"] = values
            per_level[rep.level_index] = values
            manifest.record(f"{tag}.converged.level_{rep.level_index}", rep.converged)
            if rep.converged:
                manifest.record(
                    f"{tag}.value.level_{rep.level_index}", f"{rep.converged_value:.12g}"
                )
        columns["E_gs_semiclassical_over_N"] = np.full(len(cfg.ladder), gs)
        manifest.add_file(write_table(manifest.out_dir / f"convergence_{tag}.dat", columns))
        manifest.add_file(
            render_convergence(
                manifest.out_dir / f"convergence_{tag}.png",
                cfg.ladder,
                per_level,
                gs,
                f"g={params.g}, N={params.n_atoms}, parity {sector.sign:+d}",
            )
        )
        manifest.stage_done(f"sector_{tag}")
    return manifest.write()


def run_dos_figure(cfg: ExperimentConfig) -> Path:
    """DOS histograms per cutoff against the semiclassical curve."""
    params = cfg.model_params()
    n = params.n_atoms
    lo, hi = cfg.window
    manifest = _start(cfg, "dos")
    manifest.record("flat_onset_per_atom", semiclassical.flat_onset_energy(params))
    manifest.record("esqpt_per_atom", semiclassical.esqpt_energy(params))
    sector_fraction = len(cfg.sectors()) / 2.0
    edges = np.linspace(lo, hi, cfg.dos_bins + 1)
    centers = (edges[:-1] + edges[1:]) / 2.0
    caches = {s: {} for s in cfg.sectors()}
    hists = {}
    for n_max in cfg.ladder:
        pooled = []
        e_trust = math.inf
        for sector in cfg.sectors():
            w = _certify(cfg, params, sector, n_max, caches[sector])
            e_trust = min(e_trust, w.e_trust)
            manifest.record(f"e_trust_per_atom.{_sector_tag(sector)}.nmax_{n_max}",
                            f"{w.e_trust / n:.12g}")
            pooled.append(caches[sector][n_max].levels)
        levels = np.sort(np.concatenate(pooled)) / n
        untrusted = e_trust / n < hi
        if untrusted and not cfg.allow_unconverged:
            keep = edges[1:] <= e_trust / n  # bins fully inside the trusted window
            if not np.any(keep):
                raise AuditError(
                    f"no trusted energies in window [{lo}, {hi}] at n_max={n_max} "
                    f"(e_trust/N = {e_trust / n:.4g}); rerun with --allow-unconverged "
                    "to reproduce the truncation artifact"
                )
        else:
            keep = np.ones(cfg.dos_bins, dtype=bool)
        counts, _ = np.histogram(levels, bins=edges)
        density = counts / (np.diff(edges) * n)  # states per unit total energy
        watermark = UNCONVERGED_MARK if untrusted and cfg.allow_unconverged else None
        manifest.add_file(
            write_table(
                manifest.out_dir / f"dos_hist_nmax{n_max}.dat",
                {
                    "E_over_N": centers[keep],
                    "density": density[keep],
                    "count": counts[keep].astype(float),
                },
                watermark=watermark,
            )
        )
        hists[n_max] = (centers[keep], density[keep])
        manifest.stage_done(f"nmax_{n_max}")
    grid = np.linspace(lo, hi, 400)
    curve = semiclassical.dos(params, grid) * sector_fraction
    manifest.add_file(
        write_table(
            manifest.out_dir / "dos_semiclassical.dat",
            {"E_over_N": grid, "density": curve},
        )
    )
    manifest.add_file(
        render_dos(
            manifest.out_dir / "dos.png",
            hists,
            (grid, curve),
            semiclassical.flat_onset_energy(params),
            semiclassical.esqpt_energy(params),
            f"g={params.g}, N={n}",
        )
    )
    return manifest.write()


def run_rstat_figure(cfg: ExperimentConfig) -> Path:
    """<r> vs cutoff over the analysis window, with the GOE constant."""
    params = cfg.model_params()
    n = params.n_atoms
    lo, hi = cfg.window
    manifest = _start(cfg, "rstat")
    caches = {s: {} for s in cfg.sectors()}
    rows = []
    for n_max in cfg.ladder:
        ratios = []
        excluded = 0
        e_trust = math.inf
        for sector in cfg.sectors():
            w = _certify(cfg, params, sector, n_max, caches[sector])
            e_trust = min(e_trust, w.e_trust)
            levels = caches[sector][n_max].levels
            sel = levels[(levels >= lo * n) & (levels <= hi * n)]
            if sel.size < 3:
                raise AuditError(
                    f"window [{lo}, {hi}] holds {sel.size} levels at n_max={n_max}"
                )
            r = spectral.r_statistic(sel)
            ratios.append(r.ratios)
            excluded += r.n_excluded
        ratios = np.concatenate(ratios)
        rows.append((n_max, float(np.mean(ratios)), ratios.size, excluded,
                     1.0 if e_trust / n >= hi else 0.0))
        manifest.stage_done(f"nmax_{n_max}")
    final_trusted = rows[-1][4] == 1.0
    if not final_trusted and not cfg.allow_unconverged:
        raise AuditError(
            f"window [{lo}, {hi}] not certified at the top rung n_max={cfg.ladder[-1]}; "
            "extend the ladder or rerun with --allow-unconverged"
        )
    arr = np.array(rows)
    r_means = arr[:, 1]
    plateau_start = None
    near = np.abs(r_means - spectral.GOE_R_MEAN) < PLATEAU_BAND
    for i in range(len(near) - 1):
        if near[i] and near[i + 1]:
            plateau_start = int(cfg.ladder[i])
            break
    manifest.record("goe_r_mean", spectral.GOE_R_MEAN)
    manifest.record("plateau_band", PLATEAU_BAND)
    manifest.record("plateau_begins_at_n_max", plateau_start)
    watermark = None if final_trusted else UNCONVERGED_MARK
    manifest.add_file(
        write_table(
            manifest.out_dir / "rstat.dat",
            {
                "n_max": arr[:, 0],
                "r_mean": r_means,
                "goe": np.full(len(rows), spectral.GOE_R_MEAN),
                "n_gaps": arr[:, 2],
                "n_degenerate_excluded": arr[:, 3],
                "window_trusted": arr[:, 4],
            },
            watermark=watermark,
        )
    )
    manifest.add_file(
        render_rstat(
            manifest.out_dir / "rstat.png",
            arr[:, 0],
            r_means,
            spectral.GOE_R_MEAN,
            f"g={params.g}, N={n}, window E/N in [{lo}, {hi}]",
        )
    )
    return manifest.write()


def _chaos_levels(cfg: ExperimentConfig, manifest: RunManifest):
    """Per-sector level sets for the chaos battery, trust-gated."""
    params = cfg.model_params()
    n = params.n_atoms
    lo, hi = cfg.window
    out = []
    watermark = None
    for sector in cfg.sectors():
        cache: dict[int, SpectrumRecord] = {}
        w = _certify(cfg, params, sector, cfg.ladder[-1], cache)
        tag = _sector_tag(sector)
        manifest.record(f"e_trust_per_atom.{tag}", f"{w.e_trust / n:.12g}")
        if w.e_trust / n < hi:
            if not cfg.allow_unconverged:
                raise AuditError(
                    f"window [{lo}, {hi}] not certified for sector {sector.sign:+d} "
                    f"(e_trust/N = {w.e_trust / n:.4g}); extend the ladder or rerun "
                    "with --allow-unconverged"
                )
            watermark = UNCONVERGED_MARK
            levels = cache[cfg.ladder[-1]].levels
        else:
            levels = w.levels
        sel = levels[(levels >= lo * n) & (levels <= hi * n)]
        out.append(sel)
        manifest.stage_done(f"certify_{tag}")
    return out, watermark


def run_chaos_figure(cfg: ExperimentConfig) -> Path:
    """P(s) with Wigner/Poisson overlays and the delta_q power spectrum."""
    params = cfg.model_params()
    manifest = _start(cfg, "chaos")
    watermark = None
    if cfg.surrogate == "poisson":
        # test mode: synthetic uncorrelated levels through the same pipeline
        rng = np.random.default_rng(cfg.seed)
        level_sets = [np.cumsum(rng.exponential(1.0, size=5000))]
        manifest.record("surrogate", "poisson")
    else:
        level_sets, watermark = _chaos_levels(cfg, manifest)
    all_spacings = []
    powers = []
    for levels in level_sets:
        u = spectral.unfold(
            levels, method=cfg.unfolding, degree=cfg.degree, params=params, per_sector=True
        )
        all_spacings.append(spectral.spacings(u).spacings)
        powers.append(spectral.delta_power_spectrum(u, n_segments=cfg.segments))
    pooled = np.concatenate(all_spacings)
    counts, edges = np.histogram(pooled, bins=cfg.spacing_bins, range=(0.0, float(pooled.max())))
    centers = (edges[:-1] + edges[1:]) / 2.0
    density = counts / (pooled.size * (edges[1] - edges[0]))
    manifest.record("ks_to_wigner", f"{spectral.ks_distance(pooled, spectral.wigner_cdf):.6g}")
    manifest.record("ks_to_poisson", f"{spectral.ks_distance(pooled, spectral.poisson_cdf):.6g}")
    manifest.add_file(
        write_table(
            manifest.out_dir / "spacing_hist.dat",
            {
                "s": centers,
                "density": density,
                "wigner": spectral.wigner_surmise(centers),
                "poisson": spectral.poisson_pdf(centers),
            },
            watermark=watermark,
        )
    )
    m = min(p.segment_length for p in powers)
    k = np.arange(1, m // 2 + 1, dtype=float)
    pk = np.mean([p.values[: m // 2] for p in powers], axis=0)
    n_segments_total = sum(p.n_segments for p in powers)
    ref = spectral.goe_power_reference(
        segment_length=m, n_segments=n_segments_total, seed=cfg.seed
    )
    manifest.record("power_segments", n_segments_total)
    manifest.record("power_segment_length", m)
    slope = spectral.power_spectrum_slope(
        spectral.PowerSpectrumResult(k, pk, n_segments_total, m), k_lo=1, k_hi=10
    )
    ref_slope = spectral.power_spectrum_slope(ref, k_lo=1, k_hi=10)
    manifest.record("power_slope_low_k", f"{slope:.4f}")
    manifest.record("goe_power_slope_low_k", f"{ref_slope:.4f}")
    manifest.add_file(
        write_table(
            manifest.out_dir / "power_spectrum.dat",
            {"k": k, "P_delta": pk, "P_goe_sampled": ref.values[: k.size]},
            watermark=watermark,
        )
    )
    manifest.add_file(
        render_chaos(
            manifest.out_dir / "chaos.png",
            (centers, density, spectral.wigner_surmise(centers), spectral.poisson_pdf(centers)),
            (k, pk),
            (ref.frequencies, ref.values),
            f"g={params.g}, N={params.n_atoms}, window E/N in {list(cfg.window)}",
        )
    )
    manifest.stage_done("statistics")
    return manifest.write()


def run_goe_reference(cfg: ExperimentConfig) -> Path:
    """Sampling references: GOE and Poisson surrogate statistics."""
    manifest = _start(cfg, "goe-ref")
    goe = spectral.goe_reference(
        cfg.goe_dim, cfg.goe_samples, cfg.goe_window_fraction, seed=cfg.seed
    )
    manifest.record("goe.r_mean", f"{goe.r_mean:.6f}")
    manifest.record("goe.r_stderr", f"{goe.r_stderr:.6f}")
    manifest.record("goe.power_slope", f"{goe.slope:.4f}")
    manifest.record(
        "goe.ks_to_wigner",
        f"{spectral.ks_distance(goe.spacing_sample, spectral.wigner_cdf):.6g}",
    )
    manifest.stage_done("goe")
    n_levels = max(int(cfg.goe_dim * cfg.goe_window_fraction), 100)
    poisson = spectral.poisson_reference(n_levels, cfg.goe_samples, seed=cfg.seed + 1)
    manifest.record("poisson.r_mean", f"{poisson.r_mean:.6f}")
    manifest.record("poisson.power_slope", f"{poisson.slope:.4f}")
    manifest.stage_done("poisson")
    for name, ref in (("goe", goe), ("poisson", poisson)):
        counts, edges = np.histogram(
            ref.spacing_sample, bins=cfg.spacing_bins, range=(0.0, float(ref.spacing_sample.max()))
        )
        centers = (edges[:-1] + edges[1:]) / 2.0
        density = counts / (ref.spacing_sample.size * (edges[1] - edges[0]))
        manifest.add_file(
            write_table(
                manifest.out_dir / f"{name}_spacing_hist.dat",
                {
                    "s": centers,
                    "density": density,
                    "wigner": spectral.wigner_surmise(centers),
                    "poisson": spectral.poisson_pdf(centers),
                },
            )
        )
        manifest.add_file(
            write_table(
                manifest.out_dir / f"{name}_power.dat",
                {"k": ref.power.frequencies, "P_delta": ref.power.values},
            )
        )
    return manifest.write()
