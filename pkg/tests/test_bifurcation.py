from __future__ import annotations

import numpy as np
import pytest

from lamsa import (
    NominalFormula,
    PathTerminal,
    SystemParams,
    design_feasibility,
    fixed_points,
    in_region_U,
    nominal_rhs,
    quartic_coefficients,
    roots_in_interval,
    saddle_region_map,
    trace_path,
)
from lamsa.errors import InvalidStartError, SingularBoundError

from conftest import REF_SADDLE_FL, REF_SADDLE_P


def _interior_p(params, fl):
    return [f for f in fixed_points(params, fl) if not f.origin_flag][0].p_star


# --- nominal_rhs -------------------------------------------------------------


def test_nominal_rhs_zero_at_bifurcation_point(params):
    assert nominal_rhs(params, 0.0, 0.0) == 0.0
    # denominator there is Theta at zero force = 2 R k^2 p0^2 / M^2 = 40
    u = in_region_U(params, 0.0, 0.0)
    assert u.quartic_dp == pytest.approx(40.0)


def test_nominal_rhs_negative_at_saddle(params):
    slope = nominal_rhs(params, _interior_p(params, REF_SADDLE_FL), REF_SADDLE_FL)
    assert slope < 0.0
    assert slope == pytest.approx(-0.0253, abs=2e-3)


def test_nominal_rhs_zero_at_zero_force_any_p(params):
    for p in (0.5, 2.0, 4.0):
        assert nominal_rhs(params, p, 0.0) == 0.0
        assert nominal_rhs(params, p, 0.0, formula=NominalFormula.PUBLISHED) == 0.0


def test_nominal_rhs_matches_root_finite_difference(params):
    # oracle: differentiate the tracked quartic root with respect to the
    # latch force directly
    for fl in np.linspace(-15.0, -0.5, 20):
        fl = float(fl)
        p = _interior_p(params, fl)
        d = 1e-5 * max(1.0, abs(fl))
        q_hi = quartic_coefficients(params, fl + d)
        q_lo = quartic_coefficients(params, fl - d)
        hi = roots_in_interval(q_hi, 0.0, params.R, tol=1e-13)[0]
        lo = roots_in_interval(q_lo, 0.0, params.R, tol=1e-13)[0]
        fd = (hi - lo) / (2.0 * d)
        assert nominal_rhs(params, p, fl) == pytest.approx(fd, rel=1e-4)


# --- trace_path ---------------------------------------------------------------


def test_trace_path_reaches_bifurcation(params):
    start_p = _interior_p(params, REF_SADDLE_FL)
    path = trace_path(params, (start_p, REF_SADDLE_FL), F_L_end=0.0)
    assert path.terminal is PathTerminal.REACHED_ZERO_FORCE
    assert path.final.F_L == 0.0
    assert abs(path.final.p_star) < 1e-3
    fls = [s.F_L for s in path.samples]
    assert all(a < b for a, b in zip(fls, fls[1:]))  # strictly increasing


def test_trace_path_samples_are_equilibria(params):
    start_p = _interior_p(params, REF_SADDLE_FL)
    path = trace_path(params, (start_p, REF_SADDLE_FL), F_L_end=0.0)
    for s in path.samples:
        if s.F_L == 0.0:
            assert abs(s.p_star) < 1e-3
            continue
        assert s.p_star == pytest.approx(_interior_p(params, s.F_L), abs=1e-6)


def test_trace_path_stays_in_saddle_region(params):
    start_p = _interior_p(params, REF_SADDLE_FL)
    path = trace_path(params, (start_p, REF_SADDLE_FL), F_L_end=0.0)
    assert all(s.in_S for s in path.samples)


def test_trace_path_sensitivity_minimal_near_zero_force(params):
    # the slope dp*/dF_L shrinks to zero with F_L: the least sensitive
    # samples cluster at the end of the path
    start_p = _interior_p(params, REF_SADDLE_FL)
    path = trace_path(params, (start_p, REF_SADDLE_FL), F_L_end=0.0)
    slopes = [abs(nominal_rhs(params, s.p_star, s.F_L)) for s in path.samples]
    i_min = int(np.argmin(slopes))
    assert path.samples[i_min].F_L > -0.5


def test_trace_path_single_sample_at_bifurcation(params):
    path = trace_path(params, (0.0, 0.0), F_L_end=0.0)
    assert path.terminal is PathTerminal.REACHED_ZERO_FORCE
    assert len(path.samples) == 1


def test_trace_path_rejects_bad_start(params):
    with pytest.raises(InvalidStartError):
        trace_path(params, (3.0, -15.0))  # not on the equilibrium balance
    with pytest.raises(InvalidStartError):
        trace_path(params, (REF_SADDLE_P, -15.0), F_L_end=1.0)  # past zero
    with pytest.raises(InvalidStartError):
        trace_path(params, (REF_SADDLE_P, -15.0), F_L_end=-16.0)  # backwards


def test_no_interior_point_for_positive_force(params):
    for fl in np.linspace(1.5, 15.0, 10):
        assert [f for f in fixed_points(params, float(fl)) if not f.origin_flag] == []


# --- region U and the saddle-region raster -----------------------------------


def test_region_u_printed_sign_conflicts_with_claim(params):
    # the printed denominator evaluates to +500 at the bifurcation point,
    # so printed-formula membership is false there even though the text
    # asserts the set contains it; the implicit-diff diagnostic is healthy
    u = in_region_U(params, 0.0, 0.0)
    assert u.sigma_plus_pi == pytest.approx(500.0)
    assert not u.in_u
    assert u.quartic_dp == pytest.approx(40.0)


def test_region_u_sigma_vanishes_at_radius(params):
    # Sigma carries the factor (p - R); at p = R only Pi survives
    for fl in (-15.0, -2.0):
        u = in_region_U(params, params.R, fl)
        u0 = in_region_U(params, params.R, 0.0)
        assert u.sigma_plus_pi == pytest.approx(u0.sigma_plus_pi)


def test_saddle_region_map_shape_and_members(params):
    p_grid = np.array([0.0, 1.0, REF_SADDLE_P, 4.9])
    fl_grid = np.array([-15.0, -5.0, 0.0])
    rmap = saddle_region_map(params, p_grid, fl_grid)
    assert rmap.h1.shape == (4, 3) and rmap.h2.shape == (4, 3) and rmap.in_S.shape == (4, 3)
    # the published saddle pair lies in S
    assert rmap.in_S[2, 0]
    # the bifurcation point lies in S (h1 = 0 there, h2 = tau/M > 0)
    assert rmap.in_S[0, 2]
    assert rmap.h2[0, 2] == pytest.approx(0.4, abs=1e-6)
    assert abs(rmap.h1[0, 2]) <= 1e-8


def test_saddle_region_map_validates_grids(params):
    with pytest.raises(ValueError):
        saddle_region_map(params, np.array([5.0]), np.array([-1.0]))
    with pytest.raises(ValueError):
        saddle_region_map(params, np.array([1.0]), np.array([0.5]))
    with pytest.raises(ValueError):
        saddle_region_map(params, np.array([]), np.array([-1.0]))


# --- design feasibility -------------------------------------------------------


def test_design_feasibility_reference_values(params):
    rep = design_feasibility(params)
    assert rep.p0_window_ok
    assert rep.p0_bound == pytest.approx(0.72177, abs=1e-5)
    assert rep.p0_bound_ok
    assert rep.h1_at_origin == pytest.approx(-0.50876, abs=1e-4)
    assert rep.feasible
    # the finite-difference cross-check value is exposed alongside; it is
    # identically zero at the origin and does NOT reproduce the printed
    # closed form (see the decisions ledger)
    assert abs(rep.h1_fd_origin) <= 1e-8


def test_design_feasibility_window_violation():
    rep = design_feasibility(SystemParams(p0=25.0))  # outside (R, 4R)
    assert not rep.p0_window_ok
    assert not rep.feasible


def test_design_feasibility_singular_bound():
    with pytest.raises(SingularBoundError):
        design_feasibility(SystemParams(m=1.0, M=1.0, R=1.0, k=1.0, p0=2.0))
