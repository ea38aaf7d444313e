"""Hamiltonian assembly: basis order, parity split, matrix elements."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dickeaudit.model import (
    EVEN,
    ODD,
    BasisState,
    ModelParams,
    SectorDimensionError,
    Truncation,
    build_full_hamiltonian,
    build_hamiltonian,
    critical_coupling,
    enumerate_basis,
    hamiltonian_element,
    parity_sign,
    truncation_artifact_energy,
)


def test_critical_coupling_values():
    assert critical_coupling(ModelParams(1.0, 1.0, 0.0, 4)) == pytest.approx(0.5)
    assert critical_coupling(ModelParams(2.0, 2.0, 0.0, 4)) == pytest.approx(1.0)
    assert critical_coupling(ModelParams(0.5, 2.0, 0.0, 4)) == pytest.approx(0.5)


def test_truncation_artifact_energy_values():
    p = ModelParams(1.0, 1.0, 1.0, 60)
    assert truncation_artifact_energy(p, Truncation(200)) == pytest.approx(
        200.0 / 60.0 + 0.5, rel=1e-12
    )
    assert truncation_artifact_energy(ModelParams(1.0, 1.0, 0.0, 20), Truncation(0)) == 0.5
    assert truncation_artifact_energy(ModelParams(1.0, 1.0, 0.0, 20), Truncation(100)) == 5.5


def test_parameter_validation():
    with pytest.raises(ValueError):
        ModelParams(0.0, 1.0, 1.0, 4)
    with pytest.raises(ValueError):
        ModelParams(1.0, -1.0, 1.0, 4)
    with pytest.raises(ValueError):
        ModelParams(1.0, 1.0, -0.1, 4)
    with pytest.raises(ValueError):
        ModelParams(1.0, 1.0, 1.0, 0)
    with pytest.raises(ValueError):
        Truncation(-1)


def test_basis_enumeration_single_atom():
    # N=1, n_max=1: four product states, two per parity sector.
    p = ModelParams(1.0, 1.0, 1.0, 1)
    t = Truncation(1)
    assert enumerate_basis(p, t, EVEN) == [BasisState(0, -0.5), BasisState(1, 0.5)]
    assert enumerate_basis(p, t, ODD) == [BasisState(0, 0.5), BasisState(1, -0.5)]
    full = enumerate_basis(p, t)
    assert len(full) == 4
    # lexicographic order, n outer, m ascending inner
    assert full == sorted(full)


def test_parity_sign_half_integer_j():
    p = ModelParams(1.0, 1.0, 1.0, 3)  # j = 3/2
    assert parity_sign(p, BasisState(0, 1.5)) == -1
    assert parity_sign(p, BasisState(1, 1.5)) == +1
    assert parity_sign(p, BasisState(0, -1.5)) == +1


@settings(max_examples=40, deadline=None)
@given(n_atoms=st.integers(1, 6), n_max=st.integers(0, 7))
def test_parity_partition(n_atoms, n_max):
    """The two sectors partition the full basis: disjoint, exhaustive."""
    p = ModelParams(1.0, 1.0, 1.0, n_atoms)
    t = Truncation(n_max)
    even = enumerate_basis(p, t, EVEN)
    odd = enumerate_basis(p, t, ODD)
    full = enumerate_basis(p, t)
    assert len(even) + len(odd) == len(full) == (n_atoms + 1) * (n_max + 1)
    assert set(even).isdisjoint(odd)
    assert set(even) | set(odd) == set(full)
    assert all(parity_sign(p, s) == +1 for s in even)
    assert all(parity_sign(p, s) == -1 for s in odd)


def test_hamiltonian_element_examples():
    p = ModelParams(1.0, 1.0, 1.0, 1)
    a = BasisState(0, -0.5)
    assert hamiltonian_element(p, a, a) == pytest.approx(-0.5)
    b = BasisState(1, 0.5)
    # g/sqrt(N) * sqrt(n+1) * sqrt(j(j+1) - m(m+1)) = 1 * 1 * 1
    assert hamiltonian_element(p, a, b) == pytest.approx(1.0)
    assert hamiltonian_element(p, b, a) == pytest.approx(1.0)
    # selection rule: |dn| must be 1
    assert hamiltonian_element(p, BasisState(0, 0.5), BasisState(2, -0.5)) == 0.0


def test_two_by_two_even_sector():
    """N=1, n_max=1 even block is [[-0.5, 1], [1, 1.5]]."""
    p = ModelParams(1.0, 1.0, 1.0, 1)
    h = build_hamiltonian(p, Truncation(1), EVEN)
    assert h.dim == 2
    np.testing.assert_allclose(h.entries, [[-0.5, 1.0], [1.0, 1.5]], atol=1e-15)


def test_assembled_matrix_matches_elementwise():
    p = ModelParams(1.2, 0.7, 0.9, 3)
    h = build_hamiltonian(p, Truncation(4), EVEN)
    ref = np.array(
        [[hamiltonian_element(p, a, b) for b in h.basis] for a in h.basis]
    )
    np.testing.assert_allclose(h.entries, ref, atol=1e-14)


def test_exact_symmetry():
    p = ModelParams(1.0, 1.5, 2.0, 5)
    h = build_hamiltonian(p, Truncation(10), EVEN).entries
    assert np.max(np.abs(h - h.T)) == 0.0


def test_zero_coupling_is_diagonal():
    p = ModelParams(1.0, 1.0, 0.0, 4)
    h = build_hamiltonian(p, Truncation(6), ODD).entries
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0


@settings(max_examples=20, deadline=None)
@given(
    omega=st.floats(0.3, 3.0),
    omega0=st.floats(0.3, 3.0),
    g=st.floats(0.0, 2.0),
    n_atoms=st.integers(1, 4),
)
def test_selection_rules(omega, omega0, g, n_atoms):
    """Off-diagonal entries exist only where |dn| = 1 and |dm| = 1."""
    p = ModelParams(omega, omega0, g, n_atoms)
    h = build_full_hamiltonian(p, Truncation(3))
    for i, a in enumerate(h.basis):
        for k, b in enumerate(h.basis):
            if i == k:
                continue
            if abs(a.n - b.n) != 1 or abs(round(a.m - b.m)) != 1:
                assert h.entries[i, k] == 0.0


def test_leading_principal_submatrix():
    """Interlacing prerequisite: the small-cutoff sector matrix is the
    leading block of the large-cutoff one."""
    p = ModelParams(1.0, 1.0, 1.0, 4)
    small = build_hamiltonian(p, Truncation(5), EVEN)
    large = build_hamiltonian(p, Truncation(9), EVEN)
    d = small.dim
    np.testing.assert_array_equal(large.entries[:d, :d], small.entries)
    assert large.basis[:d] == small.basis


def test_dim_cap_enforced():
    p = ModelParams(1.0, 1.0, 1.0, 10)
    with pytest.raises(SectorDimensionError):
        build_hamiltonian(p, Truncation(100), EVEN, dim_cap=50)
