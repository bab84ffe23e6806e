from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from lamsa import (
    Classification,
    Mode,
    SystemState,
    characteristic_invariants,
    classify,
    closed_form_ABGD,
    eigenvalues_biquadratic,
    extract_ABGD,
    fixed_points,
    jacobian_fd,
    jacobian_fd_at,
    real_pair_exists,
    stability_report,
)
from lamsa.equilibria import FixedPoint
from lamsa.errors import StructureViolationError

from conftest import REF_SADDLE_FL


def _interior(params, fl):
    return [f for f in fixed_points(params, fl) if not f.origin_flag][0]


# --- jacobian_fd ------------------------------------------------------------


def test_jacobian_rows_and_velocity_columns(params):
    fp = _interior(params, REF_SADDLE_FL)
    J = jacobian_fd(params, fp)
    assert np.array_equal(J[0], [0.0, 1.0, 0.0, 0.0])
    assert np.array_equal(J[2], [0.0, 0.0, 0.0, 1.0])
    # the contact force is quadratic in the velocities, so the velocity
    # partials of both acceleration rows vanish at a rest state
    scale = max(1.0, np.max(np.abs(J)))
    for i, j in ((1, 1), (1, 3), (3, 1), (3, 3)):
        assert abs(J[i, j]) <= 1e-8 * scale


def test_jacobian_finite_at_origin(params):
    J = jacobian_fd_at(params, SystemState(0, 0, 0, 0), 0.0)
    assert np.all(np.isfinite(J))
    A, B, G, D = extract_ABGD(J)
    assert A == pytest.approx(0.0, abs=1e-8)
    assert B == pytest.approx(0.0, abs=1e-8)
    assert G == pytest.approx(0.0, abs=1e-8)
    assert D == pytest.approx(0.4, rel=1e-8)  # tau/M = 2/5 at the origin


def test_jacobian_fd_step_second_order(params):
    fp = _interior(params, -7.0)
    J1 = jacobian_fd(params, fp, fd_step=1e-4)
    J2 = jacobian_fd(params, fp, fd_step=5e-5)
    scale = max(1.0, np.max(np.abs(J1)))
    # central differences: halving the step shrinks the O(h^2) truncation
    assert np.max(np.abs(J1 - J2)) <= 10.0 * (1e-4) ** 2 * scale


def test_jacobian_fd_step_validation(params):
    fp = _interior(params, -7.0)
    with pytest.raises(ValueError):
        jacobian_fd(params, fp, fd_step=0.0)


# --- extract_ABGD -----------------------------------------------------------


def _template(a, b, g, d):
    return np.array(
        [[0.0, 1.0, 0.0, 0.0], [a, 0.0, b, 0.0], [0.0, 0.0, 0.0, 1.0], [g, 0.0, d, 0.0]]
    )


def test_extract_reads_entries():
    assert extract_ABGD(_template(1.0, 2.0, 3.0, 4.0)) == (1.0, 2.0, 3.0, 4.0)


def test_extract_rejects_velocity_coupling():
    J = _template(1.0, 2.0, 3.0, 4.0)
    J[1, 1] = 0.5
    with pytest.raises(StructureViolationError):
        extract_ABGD(J)


def test_extract_rejects_broken_template_rows():
    J = _template(1.0, 2.0, 3.0, 4.0)
    J[0, 1] = 0.9
    with pytest.raises(StructureViolationError):
        extract_ABGD(J)


def test_extract_at_reference_saddle(params):
    # the invariant h1 = A*Delta - B*Gamma vanishes identically on the
    # equilibrium branch (the position block is singular there), so the
    # point sits on the boundary case of the saddle set with h2 > 0
    J = jacobian_fd(params, _interior(params, REF_SADDLE_FL))
    A, B, G, D = extract_ABGD(J)
    assert all(map(math.isfinite, (A, B, G, D)))
    h1, h2 = characteristic_invariants(A, B, G, D)
    assert abs(h1) <= 1e-7 * max(1.0, abs(A * D))
    assert h2 > 0
    assert classify(h1, h2) is Classification.SADDLE


# --- invariants, eigenvalues, classification --------------------------------


def test_characteristic_invariants_examples():
    assert characteristic_invariants(1, 0, 0, 4) == (4, 5)
    assert characteristic_invariants(1, 2, 2, 1) == (-3, 2)
    assert characteristic_invariants(0, 0, 0, 0) == (0, 0)


def _spectrum_set(eigs):
    return sorted((round(e.real, 9), round(e.imag, 9)) for e in eigs)


def test_eigenvalues_factorable_case():
    eigs = eigenvalues_biquadratic(4.0, 5.0)
    assert _spectrum_set(eigs) == _spectrum_set([1, -1, 2, -2])


def test_eigenvalues_mixed_case():
    eigs = eigenvalues_biquadratic(-4.0, 0.0)
    r = math.sqrt(2.0)
    assert _spectrum_set(eigs) == _spectrum_set([r, -r, r * 1j, -r * 1j])


def test_eigenvalues_double_zero_case():
    eigs = eigenvalues_biquadratic(0.0, 1.0)
    assert _spectrum_set(eigs) == _spectrum_set([0.0, 0.0, 1.0, -1.0])


def test_eigenvalue_negation_symmetry():
    rng = np.random.default_rng(5)
    for _ in range(300):
        h1, h2 = rng.uniform(-10, 10, size=2)
        eigs = eigenvalues_biquadratic(float(h1), float(h2))
        vals = _spectrum_set(eigs)
        negs = _spectrum_set([-e for e in eigs])
        assert vals == negs


def test_classify_examples():
    assert classify(-0.5, 123.0, 1e-9) is Classification.SADDLE
    assert classify(-0.5, -123.0, 1e-9) is Classification.SADDLE
    assert classify(1.0, 1.0, 1e-9) is Classification.SADDLE
    assert classify(1.0, -1.0, 1e-9) is Classification.NON_SADDLE
    assert classify(0.0, 0.0, 1e-9) is Classification.MARGINAL
    with pytest.raises(ValueError):
        classify(1.0, 1.0, -1e-3)


def test_classify_agrees_with_eigenvalue_test():
    # where the lemma's set is exact (outside h2^2 < 4 h1 with h2 > 0,
    # where two sign changes do not force real roots; see ledger), the
    # (h1, h2) rule must coincide with "a real +/- pair exists"
    rng = np.random.default_rng(99)
    checked = 0
    for _ in range(100_000):
        h1, h2 = (float(v) for v in rng.uniform(-10, 10, size=2))
        if h2 > 0.0 and 4.0 * h1 > h2 * h2:
            continue
        verdict = classify(h1, h2, 0.0) is Classification.SADDLE
        by_eigs = real_pair_exists(eigenvalues_biquadratic(h1, h2))
        assert verdict == by_eigs, (h1, h2)
        checked += 1
    assert checked > 50_000


def test_published_saddle_set_overstates_complex_quartets():
    # inside h2 > 0, h2^2 < 4 h1 the characteristic roots form a complex
    # quartet with no real pair, yet the published rule still says saddle;
    # documented here rather than silently patched
    for h1, h2 in ((4.0, 1.0), (9.0, 2.0), (1.0, 0.5)):
        assert h2 * h2 < 4.0 * h1
        assert classify(h1, h2, 0.0) is Classification.SADDLE
        assert not real_pair_exists(eigenvalues_biquadratic(h1, h2))


def test_no_stable_node_over_sweep(params):
    for fl in -np.logspace(np.log10(15.0), np.log10(0.01), 25):
        rep = stability_report(params, _interior(params, float(fl)))
        assert not all(e.real < 0 for e in rep.eigenvalues)


def test_all_interior_points_are_saddles(params):
    for fl in np.linspace(-15.0, -0.1, 25):
        rep = stability_report(params, _interior(params, float(fl)))
        assert rep.classification is Classification.SADDLE
        assert real_pair_exists(rep.eigenvalues)


# --- closed-form entries (comparison only) ----------------------------------


def test_closed_form_B_vanishes_at_zero_force(params):
    fp = fixed_points(params, 0.0)[0]
    _, B, _, _ = closed_form_ABGD(params, fp, F_L=0.0)
    assert B == 0.0


def test_closed_form_B_vanishes_at_symmetric_point(params):
    # the printed numerator carries the factor (l^2 m - M (p-R)^2)
    p, l = 3.0, math.sqrt(params.M / params.m) * 2.0
    fp = FixedPoint(p_star=p, l_star=l, F_L_star=-2.0, mode=Mode.LATCHED)
    _, B, _, _ = closed_form_ABGD(params, fp)
    assert B == pytest.approx(0.0, abs=1e-12)


def test_closed_form_comparison_report(params, capsys):
    # the printed closed forms are transcribed verbatim and compared, not
    # trusted: deviations from finite differences are reported
    fp = _interior(params, REF_SADDLE_FL)
    printed = closed_form_ABGD(params, fp)
    fd = extract_ABGD(jacobian_fd(params, fp))
    assert all(map(math.isfinite, printed))
    for name, a, b in zip("A B Gamma Delta".split(), printed, fd):
        rel = abs(a - b) / max(1.0, abs(b))
        print(f"closed-form {name}: printed={a:.6g} fd={b:.6g} rel-dev={rel:.3g}")
    out = capsys.readouterr().out
    assert "closed-form A" in out


def test_stability_report_composition(params):
    rep = stability_report(params, _interior(params, -6.0))
    assert rep.h1 == pytest.approx(rep.A * rep.Delta - rep.B * rep.Gamma)
    assert rep.h2 == pytest.approx(rep.A + rep.Delta)
    poly_eigs = sorted(np.roots([1.0, 0.0, -rep.h2, 0.0, rep.h1]).tolist(), key=lambda z: (z.real, z.imag))
    mine = sorted(rep.eigenvalues, key=lambda z: (z.real, z.imag))
    for a, b in zip(mine, poly_eigs):
        assert cmath.isclose(a, b, abs_tol=1e-8)
