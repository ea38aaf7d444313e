"""Eigensolving, cutoff ladders, interlacing, trusted-window certification."""

import math

import numpy as np
import pytest

from dickeaudit.convergence import (
    ConvergenceReport,
    certify_window,
    convergence_ladder,
    default_probe,
    eigenvalues,
    monotonicity_check,
    sector_spectrum,
    trusted_window,
)
from dickeaudit.model import (
    EVEN,
    ODD,
    ModelParams,
    Truncation,
    build_hamiltonian,
    truncation_artifact_energy,
)

P1 = ModelParams(1.0, 1.0, 1.0, 1)


def test_two_by_two_eigenvalues_closed_form():
    h = build_hamiltonian(P1, Truncation(1), EVEN)
    rec = eigenvalues(h, verify=True)
    np.testing.assert_allclose(
        rec.levels, [0.5 - math.sqrt(2.0), 0.5 + math.sqrt(2.0)], atol=1e-14
    )


def test_zero_coupling_spectrum_is_exact():
    p = ModelParams(1.0, 0.7, 0.0, 3)
    rec = sector_spectrum(p, 5, EVEN, verify=True)
    h = build_hamiltonian(p, Truncation(5), EVEN)
    expected = np.sort(np.diag(h.entries))
    np.testing.assert_allclose(rec.levels, expected, atol=1e-13)


def test_spectrum_count_matches_dimension():
    p = ModelParams(1.0, 1.0, 1.0, 4)
    rec = sector_spectrum(p, 6, ODD)
    h = build_hamiltonian(p, Truncation(6), ODD)
    assert rec.count == h.dim


def test_ladder_exact_at_zero_coupling():
    """g=0 levels are cutoff-independent once present, so the ladder is flat
    to machine precision and every tracked level converges."""
    p = ModelParams(1.0, 1.0, 0.0, 2)
    reports = convergence_ladder(p, EVEN, [4, 6, 8], [1, 2, 3], tol=1e-12)
    for rep in reports:
        values = [e for _, e in rep.ladder]
        assert max(values) - min(values) < 1e-13
        assert rep.converged
        assert rep.converged_value == pytest.approx(values[-1])
    ok, violations = monotonicity_check(reports)
    assert ok and violations == []


def test_ladder_monotone_nonincreasing():
    p = ModelParams(1.0, 1.0, 1.0, 6)
    cache = {}
    reports = convergence_ladder(p, EVEN, [10, 15, 20], [1, 5, 10], 1e-6, cache)
    ok, _ = monotonicity_check(reports)
    assert ok
    # direct numeric check on the full spectra, not just tracked levels
    for small, large in ((10, 15), (15, 20)):
        a = cache[small].levels
        b = cache[large].levels[: a.size]
        assert np.all(b <= a + 1e-10)


def test_monotonicity_check_flags_violation():
    rep = ConvergenceReport(
        level_index=2,
        ladder=((10, 1.0), (20, 1.0 + 1e-6)),
        tol=1e-8,
        converged=False,
        converged_value=None,
    )
    ok, violations = monotonicity_check([rep])
    assert not ok
    assert violations == [(2, 20)]


def test_ladder_input_validation():
    with pytest.raises(ValueError):
        convergence_ladder(P1, EVEN, [10], [1], 1e-6)
    with pytest.raises(ValueError):
        convergence_ladder(P1, EVEN, [10, 10], [1], 1e-6)
    with pytest.raises(ValueError):
        # level index beyond the smallest-cutoff dimension
        convergence_ladder(P1, EVEN, [2, 4], [99], 1e-6)
    with pytest.raises(ValueError):
        ConvergenceReport(1, ((20, 0.0), (10, 0.0)), 1e-6, False, None)


def test_default_probe():
    assert default_probe(100) == 125
    assert default_probe(3) == 4


def test_trusted_window_zero_coupling():
    """At g=0 every level is exact, so the whole spectrum is trusted and
    e_trust hits the truncation bound E* = omega*n_max + omega0*j."""
    p = ModelParams(1.0, 1.0, 0.0, 1)
    w = trusted_window(p, EVEN, 5, 7, tol=1e-12)
    assert w.count_trusted == 6
    assert w.e_trust == pytest.approx(5.5)
    assert w.levels.size == 6


def test_trusted_window_is_prefix_and_bounded():
    p = ModelParams(1.0, 1.0, 1.0, 6)
    cache = {}
    w = trusted_window(p, EVEN, 30, 38, tol=1e-6, spectra=cache)
    assert 0 < w.count_trusted < cache[30].count
    e_star = p.n_atoms * truncation_artifact_energy(p, Truncation(30))
    assert w.e_trust <= e_star + 1e-12
    # trusted levels are exactly the first count_trusted probe-run values
    np.testing.assert_array_equal(w.levels, cache[38].levels[: w.count_trusted])
    assert np.all(w.levels[:-1] < w.e_trust + 1e-12)


def test_trusted_levels_stay_converged_at_larger_cutoffs():
    """Enlarging the basis must not un-converge a previously trusted level."""
    p = ModelParams(1.0, 1.0, 1.0, 6)
    tol = 1e-6
    w1 = trusted_window(p, EVEN, 30, 38, tol=tol)
    later = sector_spectrum(p, 60, EVEN).levels[: w1.count_trusted]
    assert np.max(np.abs(later - w1.levels)) < tol


def test_trusted_window_validation():
    with pytest.raises(ValueError):
        trusted_window(P1, EVEN, 10, 10)


def test_certify_window_escalates_and_covers_target():
    p = ModelParams(1.0, 1.0, 1.0, 8)
    target = 8.0  # total energy, E/N = 1
    w = certify_window(p, EVEN, target, tol=1e-6)
    assert w.e_trust >= target
    assert w.n_max_probe == default_probe(w.n_max)


def test_certify_window_gives_up_at_cap():
    p = ModelParams(1.0, 1.0, 4.0, 10)
    with pytest.raises(RuntimeError, match="could not certify"):
        certify_window(p, EVEN, 200.0, start_n_max=50, max_n_max=60)
