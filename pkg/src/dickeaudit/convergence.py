"""Full-spectrum diagonalization and the cutoff-ladder convergence audit.

The photon basis is infinite; every number computed at a finite n_max must
be checked against a larger cutoff before it is believed.  This module
provides the machinery for that audit:

* per-level convergence ladders across a strictly increasing cutoff list,
* Cauchy-interlacing monotonicity checks (a smaller-cutoff sector matrix
  is a leading principal submatrix of the larger one, so every sorted
  eigenvalue is non-increasing in n_max),
* trusted-window certification: the highest energy below which every level
  agrees between two cutoffs at a stated tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dickeaudit.model import (
    HamiltonianMatrix,
    ModelParams,
    ParitySector,
    Truncation,
    build_hamiltonian,
    truncation_artifact_energy,
)

MONOTONICITY_SLACK = 1e-10
DEFAULT_TOL_FACTOR = 1e-6  # default tol = 1e-6 * omega


class SolverError(RuntimeError):
    """Dense eigensolver failure, annotated with matrix metadata."""


@dataclass(frozen=True)
class SpectrumRecord:
    """Sorted eigenvalues of one parity sector at one (params, truncation)."""

    params: ModelParams
    truncation: Truncation
    sector: ParitySector | None
    levels: np.ndarray = field(repr=False)

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        if not np.all(np.isfinite(levels)):
            raise SolverError("non-finite eigenvalues in spectrum")
        levels.flags.writeable = False
        object.__setattr__(self, "levels", levels)

    @property
    def count(self) -> int:
        return self.levels.size


def eigenvalues(matrix: HamiltonianMatrix, verify: bool = False) -> SpectrumRecord:
    """All eigenvalues of a sector Hamiltonian, ascending.

    With verify=True a full eigendecomposition is used and residuals
    ||H v - E v|| <= 1e-8 ||H|| are checked on a sample of pairs.
    """
    h = matrix.entries
    try:
        if verify:
            vals, vecs = np.linalg.eigh(h)
        else:
            vals = np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            f"eigensolver failed: dim={matrix.dim}, params={matrix.params}, "
            f"n_max={matrix.truncation.n_max}, sector={matrix.sector}"
        ) from exc
    if verify:
        norm = max(abs(vals[0]), abs(vals[-1]), 1e-300)
        sample = np.unique(np.linspace(0, vals.size - 1, min(8, vals.size)).astype(int))
        for i in sample:
            residual = np.linalg.norm(h @ vecs[:, i] - vals[i] * vecs[:, i])
            if residual > 1e-8 * norm:
                raise SolverError(
                    f"residual {residual:.3e} exceeds 1e-8*||H||={1e-8 * norm:.3e} "
                    f"for level {i} (dim={matrix.dim})"
                )
    return SpectrumRecord(matrix.params, matrix.truncation, matrix.sector, np.sort(vals))


def sector_spectrum(
    params: ModelParams,
    n_max: int,
    sector: ParitySector,
    verify: bool = False,
    dim_cap: int | None = None,
) -> SpectrumRecord:
    """Convenience: build and diagonalize one sector at one cutoff."""
    kwargs = {} if dim_cap is None else {"dim_cap": dim_cap}
    matrix = build_hamiltonian(params, Truncation(n_max), sector, **kwargs)
    return eigenvalues(matrix, verify=verify)


@dataclass(frozen=True)
class ConvergenceReport:
    """History of one eigenlevel across a cutoff ladder, with a verdict.

    The verdict compares only the top two rungs: the level is declared
    converged when the last cutoff increase moved it by less than tol.
    """

    level_index: int  # 1-based; 1 is the ground state
    ladder: tuple[tuple[int, float], ...]
    tol: float
    converged: bool
    converged_value: float | None

    def __post_init__(self):
        cutoffs = [c for c, _ in self.ladder]
        if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
            raise ValueError("ladder cutoffs must be strictly increasing")


def convergence_ladder(
    params: ModelParams,
    sector: ParitySector,
    cutoffs: list[int],
    level_indices: list[int],
    tol: float,
    spectra: dict[int, SpectrumRecord] | None = None,
) -> list[ConvergenceReport]:
    """Track requested levels across fresh diagonalizations at each cutoff.

    spectra, if given, is used as a cache keyed by n_max and is filled in
    place; rungs already present are not recomputed.
    """
    if len(cutoffs) < 2:
        raise ValueError("need at least two cutoffs to assess convergence")
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError("cutoffs must be strictly increasing")
    if spectra is None:
        spectra = {}
    for n_max in cutoffs:
        if n_max not in spectra:
            spectra[n_max] = sector_spectrum(params, n_max, sector)
    smallest_dim = spectra[cutoffs[0]].count
    reports = []
    for idx in level_indices:
        if not 1 <= idx <= smallest_dim:
            raise ValueError(
                f"level index {idx} exceeds dimension {smallest_dim} at the "
                f"smallest cutoff n_max={cutoffs[0]}"
            )
        ladder = tuple((n_max, float(spectra[n_max].levels[idx - 1])) for n_max in cutoffs)
        converged = abs(ladder[-1][1] - ladder[-2][1]) < tol
        reports.append(
            ConvergenceReport(
                level_index=idx,
                ladder=ladder,
                tol=tol,
                converged=converged,
                converged_value=ladder[-1][1] if converged else None,
            )
        )
    return reports


def monotonicity_check(
    reports: list[ConvergenceReport],
) -> tuple[bool, list[tuple[int, int]]]:
    """Verify Cauchy-interlacing monotonicity across every ladder.

    Returns (ok, violations); each violation is (level_index, n_max) of a
    rung where the eigenvalue rose by more than the numerical slack when
    the cutoff increased.
    """
    violations = []
    for report in reports:
        for (_, e_small), (n_big, e_big) in zip(report.ladder, report.ladder[1:]):
            if e_big > e_small + MONOTONICITY_SLACK:
                violations.append((report.level_index, n_big))
    return (not violations, violations)


@dataclass(frozen=True)
class TrustedWindow:
    """Certified energy window of one sector at one cutoff.

    Every level strictly below e_trust agreed within tol with a run at the
    larger probe cutoff; nothing above e_trust may be used for physics.
    """

    params: ModelParams
    sector: ParitySector
    n_max: int
    n_max_probe: int
    tol: float
    e_trust: float
    count_trusted: int
    levels: np.ndarray = field(repr=False)  # trusted levels, probe-run values

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        levels.flags.writeable = False
        object.__setattr__(self, "levels", levels)


def default_probe(n_max: int) -> int:
    """Probe cutoff used for window certification: ceil(1.25 * n_max)."""
    return int(math.ceil(1.25 * n_max))


def trusted_window(
    params: ModelParams,
    sector: ParitySector,
    n_max: int,
    n_max_probe: int | None = None,
    tol: float | None = None,
    spectra: dict[int, SpectrumRecord] | None = None,
    dim_cap: int | None = None,
) -> TrustedWindow:
    """Certify the trusted energy window by one extra diagonalization.

    Levels are matched across the two cutoffs by sorted index within the
    sector (valid by interlacing: enlarging the basis only pushes levels
    down).  e_trust is the energy of the first level that moved by >= tol,
    clamped by the truncation bound E*.
    """
    if n_max_probe is None:
        n_max_probe = default_probe(n_max)
    if n_max_probe <= n_max:
        raise ValueError("probe cutoff must exceed the base cutoff")
    if tol is None:
        tol = DEFAULT_TOL_FACTOR * params.omega
    if spectra is None:
        spectra = {}
    for k in (n_max, n_max_probe):
        if k not in spectra:
            spectra[k] = sector_spectrum(params, k, sector, dim_cap=dim_cap)
    base = spectra[n_max].levels
    probe = spectra[n_max_probe].levels[: base.size]
    diffs = np.abs(probe - base)
    bad = np.nonzero(diffs >= tol)[0]
    e_star = params.n_atoms * truncation_artifact_energy(params, Truncation(n_max))
    if bad.size == 0:
        count = base.size
        e_trust = min(float(base[-1]), e_star)
    else:
        count = int(bad[0])
        e_trust = float(base[count]) if count > 0 else -math.inf
    e_trust = min(e_trust, e_star)
    return TrustedWindow(
        params=params,
        sector=sector,
        n_max=n_max,
        n_max_probe=n_max_probe,
        tol=tol,
        e_trust=e_trust,
        count_trusted=count,
        levels=probe[:count].copy(),
    )


def certify_window(
    params: ModelParams,
    sector: ParitySector,
    target_energy: float,
    tol: float | None = None,
    start_n_max: int | None = None,
    growth: float = 1.5,
    max_n_max: int = 4000,
    spectra: dict[int, SpectrumRecord] | None = None,
    dim_cap: int | None = None,
) -> TrustedWindow:
    """Escalate the cutoff until the trusted window covers target_energy.

    target_energy is a total energy (not per atom).  Raises RuntimeError if
    max_n_max is reached without certification.
    """
    if start_n_max is None:
        # E* must clear the target; start with ~2x headroom over the bound.
        bound = (target_energy - params.omega0 * params.n_atoms / 2.0) / params.omega
        start_n_max = max(int(math.ceil(2.0 * max(bound, 1.0))), 50)
    n_max = start_n_max
    while True:
        window = trusted_window(
            params, sector, n_max, tol=tol, spectra=spectra, dim_cap=dim_cap
        )
        if window.e_trust >= target_energy:
            return window
        n_max = int(math.ceil(growth * n_max))
        if n_max > max_n_max:
            raise RuntimeError(
                f"could not certify energies up to {target_energy} with "
                f"n_max <= {max_n_max} (best e_trust={window.e_trust:.6g})"
            )
