"""Classical-limit oracles: energy surface, ground state, density of states.

The classical phase space is the Bloch sphere (atoms) times the unbounded
field plane.  With hbar_eff ~ 1/N, the leading Weyl density of states is

    nu(E) = ((N+1)/omega) * (1/4pi) Int_S2 dOmega Theta(E/j - e_min(c, phi)),

where e_min(c, phi) = omega0*c - (2 g^2/omega)(1 - c^2) cos^2(phi) is the
energy after minimizing over the field quadratures (a shifted harmonic
oscillator contributes a constant 1/omega density above its minimum).

At fixed c the phi measure of {e_min <= e} is available in closed form,
so the sphere integral reduces to a 1-D Gauss-Legendre quadrature in c
with Richardson doubling.  Above E/N = omega0/2 the whole sphere is
accessible and nu is exactly (N+1)/omega (the flat region).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from dickeaudit.model import ModelParams, critical_coupling

QUAD_REL_TOL = 1e-5
QUAD_MAX_NODES = 16_000
_CUMULATIVE_GRID = 4001


class QuadratureError(RuntimeError):
    """Sphere quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class ClassicalPoint:
    """Phase-space point: field quadratures (q, p) and Bloch angles (c, phi)."""

    q: float
    p: float
    c: float
    phi: float

    def __post_init__(self):
        if not -1.0 <= self.c <= 1.0:
            raise ValueError(f"c = cos(theta) must lie in [-1, 1], got {self.c}")


def classical_energy(params: ModelParams, pt: ClassicalPoint) -> float:
    """Classical energy per pseudospin length j (i.e. H/j)."""
    field_part = params.omega * (pt.q**2 + pt.p**2) / 2.0
    atom_part = params.omega0 * pt.c
    coupling = 2.0 * params.g * pt.q * math.sqrt(1.0 - pt.c**2) * math.cos(pt.phi)
    return field_part + atom_part + coupling


def field_minimized_energy(params: ModelParams, c, phi):
    """min over (q, p) of the classical energy at fixed atomic configuration."""
    amp = 2.0 * params.g**2 / params.omega
    return params.omega0 * np.asarray(c) - amp * (1.0 - np.asarray(c) ** 2) * np.cos(phi) ** 2


def ground_state_energy(params: ModelParams) -> float:
    """Mean-field ground-state energy per atom, continuous across g_c."""
    if params.g <= critical_coupling(params):
        return -params.omega0 / 2.0
    return -params.g**2 / params.omega - params.omega * params.omega0**2 / (16.0 * params.g**2)


def flat_onset_energy(params: ModelParams) -> float:
    """E/N above which the semiclassical DOS is constant."""
    return params.omega0 / 2.0


def esqpt_energy(params: ModelParams) -> float:
    """E/N of the excited-state critical point (g > g_c only)."""
    return -params.omega0 / 2.0


def _phi_fraction(params: ModelParams, c: np.ndarray, e: float) -> np.ndarray:
    """Fraction of phi in [0, 2pi) with e_min(c, phi) <= e, for each c."""
    amp = 2.0 * params.g**2 / params.omega
    gap = params.omega0 * c - e  # e_min <= e iff amp*(1-c^2)*cos^2(phi) >= gap
    frac = np.zeros_like(c)
    frac[gap <= 0] = 1.0
    if amp > 0:
        denom = amp * (1.0 - c**2)
        open_mask = (gap > 0) & (gap < denom)
        if np.any(open_mask):
            t = gap[open_mask] / denom[open_mask]
            frac[open_mask] = (2.0 / math.pi) * np.arccos(np.sqrt(t))
    return frac


class _SphereQuadrature:
    """Gauss-Legendre nodes in c, refined by doubling until the accessible
    sphere fraction is stable to QUAD_REL_TOL on a probe energy grid."""

    def __init__(self, params: ModelParams):
        self.params = params
        e_lo = 2.0 * ground_state_energy(params)  # per-j units
        e_hi = params.omega0
        probe = np.linspace(e_lo, e_hi, 65)
        n = 500
        nodes, weights = np.polynomial.legendre.leggauss(n)
        prev = self._fractions_with(nodes, weights, probe)
        while True:
            n *= 2
            nodes, weights = np.polynomial.legendre.leggauss(n)
            cur = self._fractions_with(nodes, weights, probe)
            err = float(np.max(np.abs(cur - prev)))
            if err < QUAD_REL_TOL:
                break
            if n >= QUAD_MAX_NODES:
                raise QuadratureError(
                    f"sphere quadrature not converged at {n} nodes; "
                    f"achieved error estimate {err:.3e} (target {QUAD_REL_TOL})"
                )
            prev = cur
        self.nodes = nodes
        self.weights = weights
        self.error_estimate = err

    def _fractions_with(self, nodes, weights, energies) -> np.ndarray:
        out = np.empty(np.shape(energies))
        for i, e in np.ndenumerate(energies):
            out[i] = 0.5 * np.dot(weights, _phi_fraction(self.params, nodes, float(e)))
        return out

    def sphere_fraction(self, e_per_j) -> np.ndarray:
        """Accessible fraction of the Bloch sphere at per-j energy e."""
        return self._fractions_with(self.nodes, self.weights, np.asarray(e_per_j, dtype=float))


@lru_cache(maxsize=32)
def _quadrature(params: ModelParams) -> _SphereQuadrature:
    return _SphereQuadrature(params)


def dos(params: ModelParams, e_per_atom) -> np.ndarray | float:
    """Semiclassical density of states (both parity sectors combined).

    Input energy is E/N; the returned density counts states per unit total
    energy, saturating at exactly (N+1)/omega above E/N = omega0/2.
    """
    e = 2.0 * np.asarray(e_per_atom, dtype=float)  # per-j energy
    scalar = e.ndim == 0
    e = np.atleast_1d(e)
    pref = (params.n_atoms + 1) / params.omega
    out = np.full(e.shape, pref)
    below = e < params.omega0
    if np.any(below):
        out[below] = pref * _quadrature(params).sphere_fraction(e[below])
    return float(out[0]) if scalar else out


@lru_cache(maxsize=32)
def _cumulative_interpolant(params: ModelParams) -> PchipInterpolator:
    """Per-j cumulative sphere integral C(e) = Int_{e_gs}^{e} fraction de',
    anchored to the exact value at the flat onset."""
    quad = _quadrature(params)
    e_gs = 2.0 * ground_state_energy(params)
    e_grid = np.linspace(e_gs, params.omega0, _CUMULATIVE_GRID)
    frac = quad.sphere_fraction(e_grid)
    # integrate downward from the onset, where the value is known exactly:
    # C(omega0) = omega0 - <e_min> = omega0 + 2 g^2 / (3 omega).
    c_onset = params.omega0 + 2.0 * params.g**2 / (3.0 * params.omega)
    h = e_grid[1] - e_grid[0]
    partial = np.concatenate([[0.0], np.cumsum((frac[:-1] + frac[1:]) * h / 2.0)])
    values = np.maximum(c_onset - partial[-1] + partial, 0.0)
    return PchipInterpolator(e_grid, values)


def cumulative_dos(params: ModelParams, e_per_atom) -> np.ndarray | float:
    """Expected level count (both sectors) below total energy N * e_per_atom."""
    e = 2.0 * np.asarray(e_per_atom, dtype=float)
    scalar = e.ndim == 0
    e = np.atleast_1d(e)
    j = params.j
    pref = (params.n_atoms + 1) / params.omega * j
    e_gs = 2.0 * ground_state_energy(params)
    c_onset = params.omega0 + 2.0 * params.g**2 / (3.0 * params.omega)
    out = np.empty(e.shape)
    lo = e <= e_gs
    mid = (e > e_gs) & (e < params.omega0)
    hi = e >= params.omega0
    out[lo] = 0.0
    if np.any(mid):
        out[mid] = _cumulative_interpolant(params)(e[mid])
    out[hi] = c_onset + (e[hi] - params.omega0)  # exact affine flat tail
    out *= pref
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class DosCurve:
    """Semiclassical DOS sampled on an E/N grid (both sectors combined)."""

    params: ModelParams
    energies: np.ndarray = field(repr=False)  # E/N grid
    density: np.ndarray = field(repr=False)  # states per unit total energy

    def __post_init__(self):
        for name in ("energies", "density"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def dos_curve(params: ModelParams, e_per_atom_grid) -> DosCurve:
    grid = np.asarray(e_per_atom_grid, dtype=float)
    return DosCurve(params, grid, np.asarray(dos(params, grid)))
