"""Spectral-fluctuation statistics: unfolding, P(s), <r>, delta_q power spectrum.

All statistics operate on the levels of a single symmetry sector; mixing
sectors superposes independent sequences and corrupts every fluctuation
measure.  Unfolding maps the levels through a smooth cumulative density so
the mean spacing is one; the gap-ratio statistic <r> needs no unfolding.

Reference values are produced by direct ensemble sampling (goe_reference,
poisson_reference) rather than transcribed analytic curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from dickeaudit.model import ModelParams
from dickeaudit.semiclassical import cumulative_dos

GOE_R_MEAN = 0.5307
POISSON_R_MEAN = 2.0 * math.log(2.0) - 1.0  # ~0.3863
DEGENERACY_FACTOR = 1e-12  # gaps below this * <S> count as degenerate
MEAN_SPACING_RTOL = 1e-6


class UnfoldingError(RuntimeError):
    """Degenerate fit or non-monotone unfolding map over the window."""


class SegmentTooShortError(RuntimeError):
    """A power-spectrum segment retained fewer levels than the minimum."""


def wigner_surmise(s):
    """GOE nearest-neighbor spacing density P(s) = (pi/2) s exp(-pi s^2/4)."""
    s = np.asarray(s, dtype=float)
    return (math.pi / 2.0) * s * np.exp(-math.pi * s**2 / 4.0)


def wigner_cdf(s):
    s = np.asarray(s, dtype=float)
    return 1.0 - np.exp(-math.pi * s**2 / 4.0)


def poisson_pdf(s):
    """Spacing density of an uncorrelated (integrable) spectrum."""
    return np.exp(-np.asarray(s, dtype=float))


def poisson_cdf(s):
    return 1.0 - np.exp(-np.asarray(s, dtype=float))


def ks_distance(spacings, cdf) -> float:
    """Kolmogorov-Smirnov statistic between sample spacings and a model CDF."""
    return float(stats.kstest(np.asarray(spacings, dtype=float), cdf).statistic)


@dataclass(frozen=True)
class UnfoldedSpectrum:
    """Dimensionless level sequence with unit mean spacing.

    energies keeps the source levels (same order) so statistics that need
    the original energy axis, like equal-energy segmentation, can use it.
    """

    values: np.ndarray = field(repr=False)
    energies: np.ndarray = field(repr=False)
    method: str
    window: tuple[float, float]

    def __post_init__(self):
        for name in ("values", "energies"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.values.size < 2:
            raise UnfoldingError("need at least two levels after unfolding")
        mean = float(np.mean(np.diff(self.values)))
        if abs(mean - 1.0) > MEAN_SPACING_RTOL:
            raise UnfoldingError(f"mean spacing {mean} deviates from 1")

    @property
    def count(self) -> int:
        return self.values.size


def _deduplicate(levels: np.ndarray) -> np.ndarray:
    levels = np.sort(np.asarray(levels, dtype=float))
    return np.unique(levels)


def unfold(
    levels,
    method: str = "polynomial",
    degree: int = 6,
    params: ModelParams | None = None,
    per_sector: bool = True,
) -> UnfoldedSpectrum:
    """Map sorted levels to a dimensionless sequence with unit mean spacing.

    polynomial: least-squares fit of the empirical staircase with the given
    degree, evaluated at the levels.  semiclassical: map through the smooth
    cumulative level density (requires params; halved when the input is a
    single parity sector).
    """
    levels = _deduplicate(levels)
    if method == "polynomial":
        if levels.size < 20:
            raise UnfoldingError("polynomial unfolding needs at least 20 levels")
        staircase = np.arange(levels.size) + 0.5
        # center/scale the abscissa to keep the Vandermonde well conditioned
        scale = levels[-1] - levels[0]
        x = (levels - levels[0]) / scale
        coeffs, diag = np.polynomial.polynomial.polyfit(x, staircase, degree, full=True)
        rank = diag[1]
        if rank < degree + 1:
            raise UnfoldingError(f"rank-deficient staircase fit (rank {rank} < {degree + 1})")
        eps = np.polynomial.polynomial.polyval(x, coeffs)
    elif method == "semiclassical":
        if params is None:
            raise ValueError("semiclassical unfolding requires model params")
        eps = np.asarray(cumulative_dos(params, levels / params.n_atoms))
        if per_sector:
            eps = eps / 2.0
    else:
        raise ValueError(f"unknown unfolding method {method!r}")
    steps = np.diff(eps)
    if np.any(steps <= 0):
        bad = int(np.argmax(steps <= 0))
        raise UnfoldingError(
            f"non-monotone unfolding map near level {bad} "
            f"(E = {levels[bad]:.6g}); widen the window or lower the degree"
        )
    # rescale so the mean nearest-neighbor spacing is exactly one
    eps = eps * (eps.size - 1) / (eps[-1] - eps[0])
    return UnfoldedSpectrum(
        values=eps,
        energies=levels,
        method=f"{method}({degree})" if method == "polynomial" else method,
        window=(float(levels[0]), float(levels[-1])),
    )


@dataclass(frozen=True)
class SpacingSample:
    """Unfolded consecutive spacings s_n >= 0 with sample mean one."""

    spacings: np.ndarray = field(repr=False)
    n_excluded: int = 0

    def __post_init__(self):
        arr = np.asarray(self.spacings, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "spacings", arr)


def spacings(u: UnfoldedSpectrum) -> SpacingSample:
    """Consecutive unfolded gaps, with numerically degenerate ones excluded."""
    s = np.diff(u.values)
    degenerate = s < DEGENERACY_FACTOR * np.mean(s)
    return SpacingSample(s[~degenerate], n_excluded=int(np.count_nonzero(degenerate)))


@dataclass(frozen=True)
class SpacingHistogram:
    centers: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    wigner: np.ndarray = field(repr=False)
    poisson: np.ndarray = field(repr=False)
    n_spacings: int = 0
    n_excluded: int = 0


def spacing_distribution(u: UnfoldedSpectrum, n_bins: int = 40) -> SpacingHistogram:
    """Density-normalized P(s) histogram with Wigner and Poisson overlays."""
    sample = spacings(u)
    s = sample.spacings
    if s.size < 100:
        raise ValueError(f"need at least 100 spacings for a histogram, got {s.size}")
    counts, edges = np.histogram(s, bins=n_bins, range=(0.0, float(np.max(s))))
    width = edges[1] - edges[0]
    centers = (edges[:-1] + edges[1:]) / 2.0
    density = counts / (s.size * width)
    return SpacingHistogram(
        centers=centers,
        density=density,
        counts=counts.astype(float),
        wigner=wigner_surmise(centers),
        poisson=poisson_pdf(centers),
        n_spacings=int(s.size),
        n_excluded=sample.n_excluded,
    )


@dataclass(frozen=True)
class RStatistic:
    mean: float
    ratios: np.ndarray = field(repr=False)
    n_excluded: int = 0


def r_statistic(levels) -> RStatistic:
    """Mean consecutive-gap ratio <r> on RAW (not unfolded) levels.

    r_n = min(S_n, S_{n+1}) / max(S_n, S_{n+1}); degenerate gaps are
    dropped (and counted) before forming ratios.
    """
    levels = np.sort(np.asarray(levels, dtype=float))
    if levels.size < 3:
        raise ValueError("need at least three levels for gap ratios")
    gaps = np.diff(levels)
    degenerate = gaps < DEGENERACY_FACTOR * np.mean(gaps)
    gaps = gaps[~degenerate]
    if gaps.size < 2:
        raise ValueError("fewer than two non-degenerate gaps")
    ratios = np.minimum(gaps[:-1], gaps[1:]) / np.maximum(gaps[:-1], gaps[1:])
    return RStatistic(
        mean=float(np.mean(ratios)),
        ratios=ratios,
        n_excluded=int(np.count_nonzero(degenerate)),
    )


@dataclass(frozen=True)
class DeltaSeries:
    """Cumulative deviation of unfolded spacings from their unit mean."""

    delta: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.delta, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "delta", arr)


def delta_series(spacing_values) -> DeltaSeries:
    """delta_q = sum_{i<=q} (s_i - 1), q = 1..M."""
    return DeltaSeries(np.cumsum(np.asarray(spacing_values, dtype=float) - 1.0))


@dataclass(frozen=True)
class PowerSpectrumResult:
    """Segment-averaged power spectrum <P_k> of the delta_q level motion."""

    frequencies: np.ndarray = field(repr=False)  # k = 1..M//2
    values: np.ndarray = field(repr=False)
    n_segments: int = 0
    segment_length: int = 0


def _delta_power(delta: np.ndarray) -> np.ndarray:
    m = delta.size
    amp = np.fft.rfft(delta) / math.sqrt(m)
    power = np.abs(amp) ** 2
    return power[1 : m // 2 + 1]


def _average_power(deltas: list[np.ndarray]) -> PowerSpectrumResult:
    m = min(d.size for d in deltas)
    powers = [_delta_power(d[:m]) for d in deltas]
    return PowerSpectrumResult(
        frequencies=np.arange(1, m // 2 + 1, dtype=float),
        values=np.mean(powers, axis=0),
        n_segments=len(deltas),
        segment_length=m,
    )


def delta_power_spectrum(
    u: UnfoldedSpectrum,
    n_segments: int = 50,
    min_levels: int = 32,
) -> PowerSpectrumResult:
    """Average P_k over equal-ENERGY segments of the analysis window.

    Each segment's spacings are renormalized to unit mean before forming
    delta_q, so the statistic measures fluctuations, not local density.
    """
    edges = np.linspace(u.energies[0], u.energies[-1], n_segments + 1)
    edges[-1] = np.nextafter(edges[-1], np.inf)  # keep the top level
    deltas = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mask = (u.energies >= lo) & (u.energies < hi)
        seg = u.values[mask]
        if seg.size < min_levels:
            raise SegmentTooShortError(
                f"segment [{lo:.6g}, {hi:.6g}) holds {seg.size} levels "
                f"(< {min_levels}); use fewer segments or a wider window"
            )
        s = np.diff(seg)
        s = s / np.mean(s)
        deltas.append(np.cumsum(s - 1.0))
    return _average_power(deltas)


def power_spectrum_slope(
    result: PowerSpectrumResult,
    k_lo: int = 4,
    k_hi: int = 40,
) -> float:
    """Log-log slope of <P_k> over the lowest usable frequency decade.

    The default band starts at k=4: whole-window polynomial unfolding
    partially absorbs the few lowest Fourier modes, so they cannot be read
    as fluctuation power.  Heavily segmented spectra (where the absorbed
    scale sits below k=1) may fit from k_lo=1.
    """
    k_hi = min(k_hi, result.frequencies.size)
    if k_hi - k_lo + 1 < 3:
        raise ValueError("too few frequencies for a slope fit")
    band = slice(k_lo - 1, k_hi)
    slope, _ = np.polyfit(np.log(result.frequencies[band]), np.log(result.values[band]), 1)
    return float(slope)


@dataclass(frozen=True)
class EnsembleReference:
    """Aggregated sampling reference: <r>, pooled spacings, <P_k>, slope."""

    r_mean: float
    r_stderr: float
    spacing_sample: np.ndarray = field(repr=False)
    power: PowerSpectrumResult = None
    slope: float = 0.0
    n_samples: int = 0


def _aggregate_reference(level_sets: list[np.ndarray], degree: int) -> EnsembleReference:
    r_means, all_spacings, deltas = [], [], []
    for levels in level_sets:
        r_means.append(r_statistic(levels).mean)
        u = unfold(levels, method="polynomial", degree=degree)
        s = spacings(u).spacings
        all_spacings.append(s)
        deltas.append(np.cumsum(s - 1.0))
    power = _average_power(deltas)
    return EnsembleReference(
        r_mean=float(np.mean(r_means)),
        r_stderr=float(np.std(r_means, ddof=1) / math.sqrt(len(r_means))),
        spacing_sample=np.concatenate(all_spacings),
        power=power,
        slope=power_spectrum_slope(power),
        n_samples=len(level_sets),
    )


def goe_reference(
    dim: int,
    n_samples: int,
    window_fraction: float = 0.5,
    seed: int = 0,
    degree: int = 6,
) -> EnsembleReference:
    """Sampled GOE reference for all three statistics.

    Draws real symmetric matrices with independent Gaussian entries
    (off-diagonal variance half the diagonal's), keeps the central
    window_fraction of each spectrum, and aggregates <r>, the unfolded
    spacing sample, and the segment-averaged power spectrum.
    """
    if dim < 200:
        raise ValueError("GOE reference needs dim >= 200")
    if n_samples < 20:
        raise ValueError("GOE reference needs n_samples >= 20")
    if not 0.0 < window_fraction <= 1.0:
        raise ValueError("window_fraction must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    lo = int(dim * (1.0 - window_fraction) / 2.0)
    hi = dim - lo
    level_sets = []
    for child in rng.spawn(n_samples):
        a = child.standard_normal((dim, dim))
        vals = np.linalg.eigvalsh((a + a.T) / 2.0)
        level_sets.append(vals[lo:hi])
    return _aggregate_reference(level_sets, degree)


def goe_power_reference(
    segment_length: int,
    n_segments: int,
    dim: int | None = None,
    window_fraction: float = 0.5,
    seed: int = 0,
    degree: int = 6,
) -> PowerSpectrumResult:
    """GOE delta_q power spectrum at a matched segment length.

    Finite-segment effects bias <P_k>, so comparing a spectrum against GOE
    is only fair at equal delta_q length.  Draws GOE matrices, unfolds the
    central window, chops the spacings into consecutive blocks of
    segment_length, and averages the block power spectra.
    """
    if segment_length < 8:
        raise ValueError("segment_length must be at least 8")
    if dim is None:
        dim = max(400, 4 * segment_length)
    rng = np.random.default_rng(seed)
    lo = int(dim * (1.0 - window_fraction) / 2.0)
    hi = dim - lo
    deltas: list[np.ndarray] = []
    while len(deltas) < n_segments:
        a = rng.standard_normal((dim, dim))
        vals = np.linalg.eigvalsh((a + a.T) / 2.0)
        u = unfold(vals[lo:hi], method="polynomial", degree=degree)
        s = np.diff(u.values)
        for start in range(0, s.size - segment_length + 1, segment_length):
            block = s[start : start + segment_length]
            block = block / np.mean(block)
            deltas.append(np.cumsum(block - 1.0))
            if len(deltas) == n_segments:
                break
    return _average_power(deltas)


def poisson_reference(
    n_levels: int,
    n_samples: int,
    seed: int = 0,
    degree: int = 1,
) -> EnsembleReference:
    """Independent-spacing (integrable) surrogate, same aggregation as GOE."""
    if n_levels < 100:
        raise ValueError("Poisson reference needs n_levels >= 100")
    if n_samples < 20:
        raise ValueError("Poisson reference needs n_samples >= 20")
    rng = np.random.default_rng(seed)
    level_sets = [
        np.cumsum(child.exponential(1.0, size=n_levels)) for child in rng.spawn(n_samples)
    ]
    return _aggregate_reference(level_sets, degree)
