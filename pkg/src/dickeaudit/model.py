"""Truncated Dicke Hamiltonian in the parity-resolved Fock (x) pseudospin basis.

Conventions
-----------
H = omega * a^dag a + omega0 * Jz + (g / sqrt(N)) * (a + a^dag)(J+ + J-),
with hbar = 1 and the pseudospin fixed to the maximal symmetric sector
j = N/2.  The photon space is truncated at n_max, so the basis is
{|n, m> : 0 <= n <= n_max, -j <= m <= j} with dimension (N+1)(n_max+1).

The parity operator has eigenvalue (-1)^(n + m + j); m + j is always an
integer, so the exponent is well defined for half-integer j.  Basis order
is lexicographic with n outer and m inner; this order is normative for
golden files and makes a fixed-n_max sector Hamiltonian a leading
principal submatrix of any larger-n_max one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_DIM_CAP = 40_000


class SectorDimensionError(RuntimeError):
    """Requested sector matrix exceeds the configured allocation cap."""


@dataclass(frozen=True)
class ModelParams:
    """Physical couplings and atom count; the only physical knobs."""

    omega: float
    omega0: float
    g: float
    n_atoms: int

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if self.g < 0:
            raise ValueError(f"g must be non-negative, got {self.g}")
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ValueError(f"n_atoms must be a positive integer, got {self.n_atoms}")
        object.__setattr__(self, "n_atoms", int(self.n_atoms))

    @property
    def j(self) -> float:
        """Pseudospin length of the maximal symmetric sector."""
        return self.n_atoms / 2.0


@dataclass(frozen=True)
class Truncation:
    """Photon-number cutoff.  A numerical device, never a physical parameter."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ValueError(f"n_max must be a non-negative integer, got {self.n_max}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def photon_dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class ParitySector:
    """One of the two parity blocks, labeled by the eigenvalue of Pi."""

    sign: int

    def __post_init__(self):
        if self.sign not in (+1, -1):
            raise ValueError(f"parity sign must be +1 or -1, got {self.sign}")


EVEN = ParitySector(+1)
ODD = ParitySector(-1)


@dataclass(frozen=True, order=True)
class BasisState:
    """Product state |n, m>: n photons, Jz eigenvalue m (half-integer)."""

    n: int
    m: float


def critical_coupling(params: ModelParams) -> float:
    """Classical critical coupling g_c = sqrt(omega * omega0) / 2."""
    return math.sqrt(params.omega * params.omega0) / 2.0


def truncation_artifact_energy(params: ModelParams, trunc: Truncation) -> float:
    """Truncation bound E*/N = omega * n_max / N + omega0 / 2.

    This is a diagnostic: no eigenvalue above N * E*/N can possibly be
    trusted at this cutoff.  It is an artifact of the finite photon basis,
    not a physical energy scale.
    """
    return params.omega * trunc.n_max / params.n_atoms + params.omega0 / 2.0


def parity_sign(params: ModelParams, state: BasisState) -> int:
    """Parity eigenvalue (-1)^(n + m + j) of a basis state."""
    k = int(round(state.m + params.j))
    return 1 if (state.n + k) % 2 == 0 else -1


def enumerate_basis(
    params: ModelParams,
    trunc: Truncation,
    sector: ParitySector | None = None,
) -> list[BasisState]:
    """Ordered basis of one parity sector (or the full space if sector is None).

    Order is lexicographic, n outer and m inner (m ascending from -j).
    """
    j = params.j
    states = []
    for n in range(trunc.n_max + 1):
        for k in range(params.n_atoms + 1):
            state = BasisState(n=n, m=k - j)
            if sector is None or parity_sign(params, state) == sector.sign:
                states.append(state)
    return states


def _ladder_plus(j: float, m: float) -> float:
    # <m+1| J+ |m> = sqrt(j(j+1) - m(m+1))
    return math.sqrt(max(j * (j + 1) - m * (m + 1), 0.0))


def hamiltonian_element(params: ModelParams, a: BasisState, b: BasisState) -> float:
    """Matrix element <a|H|b>; nonzero only on the diagonal or for |dn|=|dm|=1."""
    if a == b:
        return params.omega * a.n + params.omega0 * a.m
    dn = b.n - a.n
    dm = b.m - a.m
    if abs(dn) != 1 or abs(round(dm)) != 1:
        return 0.0
    f = math.sqrt(a.n + 1) if dn == 1 else math.sqrt(a.n)
    lower_m = min(a.m, b.m)
    c = _ladder_plus(params.j, lower_m)
    return params.g / math.sqrt(params.n_atoms) * f * c


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Dense symmetric Hamiltonian over an ordered basis of one sector."""

    params: ModelParams
    truncation: Truncation
    sector: ParitySector | None
    basis: tuple[BasisState, ...]
    entries: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)


def _assemble(
    params: ModelParams,
    trunc: Truncation,
    basis: list[BasisState],
    dim_cap: int,
) -> np.ndarray:
    dim = len(basis)
    if dim > dim_cap:
        raise SectorDimensionError(
            f"sector dimension {dim} exceeds cap {dim_cap}; "
            "raise dim_cap explicitly if this allocation is intended"
        )
    n_arr = np.array([s.n for s in basis])
    m_arr = np.array([s.m for s in basis])
    h = np.zeros((dim, dim))
    h[np.diag_indices(dim)] = params.omega * n_arr + params.omega0 * m_arr

    index = {(s.n, s.m): i for i, s in enumerate(basis)}
    coupling = params.g / math.sqrt(params.n_atoms)
    if coupling != 0.0:
        j = params.j
        for i, s in enumerate(basis):
            f = math.sqrt(s.n + 1)
            for dm in (+1.0, -1.0):
                partner = index.get((s.n + 1, s.m + dm))
                if partner is None:
                    continue
                c = _ladder_plus(j, min(s.m, s.m + dm))
                val = coupling * f * c
                h[i, partner] = val
                h[partner, i] = val
    h.flags.writeable = False
    return h


def build_hamiltonian(
    params: ModelParams,
    trunc: Truncation,
    sector: ParitySector,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> HamiltonianMatrix:
    """Assemble the dense symmetric Hamiltonian of one parity sector."""
    basis = enumerate_basis(params, trunc, sector)
    if not basis:
        raise ValueError("empty parity sector; increase n_max or n_atoms")
    entries = _assemble(params, trunc, basis, dim_cap)
    return HamiltonianMatrix(params, trunc, sector, tuple(basis), entries)


def build_full_hamiltonian(
    params: ModelParams,
    trunc: Truncation,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> HamiltonianMatrix:
    """Unsectored Hamiltonian over the full (N+1)(n_max+1) basis.

    Brute-force reference for parity-completeness checks; sector builds are
    preferred for production runs.
    """
    basis = enumerate_basis(params, trunc, sector=None)
    entries = _assemble(params, trunc, basis, dim_cap)
    return HamiltonianMatrix(params, trunc, None, tuple(basis), entries)
