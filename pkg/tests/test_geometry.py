"""Tests for Fourier boundary representations and the admissible set."""

import numpy as np
import pytest

from freebound.errors import (InfeasibleSet, NonpositiveRadius, NotConvex,
                              OrderingViolated)
from freebound.geometry import (AdmissibleSet, RadialCurve, SupportFunction,
                                basis_matrix, check_grid, coeff_modes,
                                discretize_radial, envelope, eval_series,
                                fit_series, load_coeffs,
                                phi_jacobian_diagnostics, project_admissible,
                                save_coeffs, series_order,
                                support_perturbation_field, unit_vectors)

RNG = np.random.default_rng(20260815)


def random_coeffs(order, scale=0.1, base=1.0):
    c = scale * RNG.standard_normal(2 * order + 1) / (1 + coeff_modes(2 * order + 1))
    c[0] = base
    return c


# ---------------------------------------------------------------- series


def test_series_order_rejects_even_and_empty():
    with pytest.raises(ValueError):
        series_order(0)
    with pytest.raises(ValueError):
        series_order(4)
    assert series_order(7) == 3


def test_coeff_modes_layout():
    assert coeff_modes(7).tolist() == [0, 1, 1, 2, 2, 3, 3]


def test_eval_series_known_values():
    # f = 2 + 3 sin(theta) - cos(2 theta) at theta = pi/2:
    # 2 + 3*1 - cos(pi) = 6
    c = np.array([2.0, 3.0, 0.0, 0.0, -1.0])
    assert eval_series(c, np.pi / 2)[0] == pytest.approx(6.0, abs=1e-14)
    # derivative: 3 cos(theta) + 2 sin(2 theta), at 0: 3
    assert eval_series(c, 0.0, deriv=1)[0] == pytest.approx(3.0, abs=1e-14)
    # second derivative: -3 sin(theta) + 4 cos(2 theta), at 0: 4
    assert eval_series(c, 0.0, deriv=2)[0] == pytest.approx(4.0, abs=1e-14)


def test_eval_series_derivatives_match_finite_differences():
    c = random_coeffs(6)
    t = np.linspace(0, 2 * np.pi, 11)
    eps = 1e-6
    fd1 = (eval_series(c, t + eps) - eval_series(c, t - eps)) / (2 * eps)
    fd2 = (eval_series(c, t + eps) - 2 * eval_series(c, t)
           + eval_series(c, t - eps)) / eps ** 2
    assert np.allclose(eval_series(c, t, deriv=1), fd1, atol=1e-7)
    assert np.allclose(eval_series(c, t, deriv=2), fd2, atol=1e-3)


@pytest.mark.parametrize("order,nodes", [(0, 4), (3, 8), (8, 18), (8, 64), (15, 32)])
def test_fit_eval_round_trip_exact(order, nodes):
    # round trip through equispaced samples recovers the coefficients
    for trial in range(5):
        c = random_coeffs(order, scale=1.0, base=float(trial))
        t = 2 * np.pi * np.arange(nodes) / nodes
        back = fit_series(eval_series(c, t), order)
        assert np.max(np.abs(back - c)) <= 1e-12


def test_fit_series_node_count_guard():
    with pytest.raises(ValueError):
        fit_series(np.ones(8), 4)


def test_basis_matrix_consistent_with_eval():
    c = random_coeffs(5)
    t = np.linspace(0, 2 * np.pi, 7)
    assert np.allclose(basis_matrix(t, 5) @ c, eval_series(c, t), atol=1e-13)


# ---------------------------------------------------------------- curves


def test_radial_curve_rejects_nonpositive_radius():
    with pytest.raises(NonpositiveRadius):
        RadialCurve(np.array([0.5, 0.0, 0.6]))


def test_support_function_rejects_nonconvex():
    # h = 1 + 0.9 cos(2 theta): h + h'' = 1 - 2.7 cos(2 theta) < 0 near 0
    with pytest.raises(NotConvex):
        SupportFunction(np.array([1.0, 0.0, 0.0, 0.0, 0.9]))


def test_discretize_circle_geometry():
    b = discretize_radial(RadialCurve(np.array([0.75])), 64)
    assert np.allclose(b.speed, 0.75, atol=1e-14)
    assert np.allclose(b.curvature, 1 / 0.75, atol=1e-12)
    e_r, _ = unit_vectors(b.thetas)
    assert np.allclose(b.normals, e_r, atol=1e-14)
    assert b.arc_weights().sum() == pytest.approx(2 * np.pi * 0.75, abs=1e-12)


def test_envelope_of_shifted_disk_support_function():
    # support function of the disk centered (a, b) with radius R
    a, b, R = 0.2, -0.1, 0.8
    h = SupportFunction(np.array([R, b, a]))
    bd = envelope(h, 64)
    center = np.array([a, b])
    radii = np.linalg.norm(bd.nodes - center, axis=1)
    assert np.allclose(radii, R, atol=1e-13)
    assert np.allclose(bd.curvature, 1 / R, atol=1e-13)
    assert bd.arc_weights().sum() == pytest.approx(2 * np.pi * R, abs=1e-12)


def test_discretize_node_count_guard():
    with pytest.raises(ValueError):
        discretize_radial(RadialCurve(np.array([1.0, 0.0, 0.1])), 10)
    with pytest.raises(ValueError):
        discretize_radial(RadialCurve(np.array([1.0])), 7)


def test_starlike_curvature_matches_osculating_circle():
    c = random_coeffs(4, scale=0.05)
    bd = discretize_radial(RadialCurve(c), 256)
    # curvature from three consecutive nodes (circumscribed circle)
    i = np.arange(bd.size)
    p0, p1, p2 = bd.nodes[i - 1], bd.nodes, bd.nodes[(i + 1) % bd.size]
    a = np.linalg.norm(p1 - p0, axis=1)
    b = np.linalg.norm(p2 - p1, axis=1)
    cc = np.linalg.norm(p2 - p0, axis=1)
    cross = ((p1 - p0)[:, 0] * (p2 - p0)[:, 1]
             - (p1 - p0)[:, 1] * (p2 - p0)[:, 0])
    kappa = 2 * cross / (a * b * cc)
    assert np.allclose(kappa, bd.curvature, atol=5e-3)


def test_support_perturbation_field_values():
    h = SupportFunction(np.array([1.0, 0.0, 0.1]))
    q = np.array([0.0, 0.3, 0.0])
    vn, transport = support_perturbation_field(h, q, 64)
    t = 2 * np.pi * np.arange(64) / 64
    assert np.allclose(vn, 0.3 * np.sin(t), atol=1e-14)
    assert transport.min() >= 0.0
    hv, h1 = h.value(t), h.value(t, deriv=1)
    assert np.allclose(transport, (0.3 * np.cos(t)) ** 2 / np.hypot(hv, h1),
                       atol=1e-14)


# ------------------------------------------------------------ projection


def admissible(c, adm):
    grid = check_grid(series_order(c.size))
    vals = eval_series(c, grid)
    modes = coeff_modes(c.size)[1:]
    w = (1.0 + modes.astype(float) ** 2) ** 4
    nrm = np.sqrt(np.sum(w * c[1:] ** 2))
    ok = (adm.r_lower - 1e-9 <= vals.min() and vals.max() <= adm.r_upper + 1e-9
          and nrm <= adm.coeff_norm_bound * (1 + 1e-9))
    if ok and adm.enforce_convexity:
        cvx = vals + eval_series(c, grid, deriv=2)
        ok = cvx.min() >= -1e-9
    return ok


def test_projection_leaves_admissible_points_fixed():
    adm = AdmissibleSet(0.6, 2.5, 10.0)
    c = np.array([1.0, 0.05, -0.02, 0.01, 0.0])
    out = project_admissible(c, adm)
    assert np.array_equal(out, c)


def test_projection_idempotent_and_feasible():
    adm = AdmissibleSet(0.6, 2.5, 10.0)
    adm_cvx = AdmissibleSet(0.6, 2.5, 10.0, enforce_convexity=True)
    for trial in range(50):
        c = RNG.standard_normal(9) * RNG.uniform(0.1, 4.0)
        for a in (adm, adm_cvx):
            once = project_admissible(c, a)
            twice = project_admissible(once, a)
            assert np.array_equal(once, twice)
            assert admissible(once, a)


def test_projection_restores_band_and_norm():
    adm = AdmissibleSet(0.6, 2.5, 1.0)
    c = np.array([5.0, 3.0, 0.0, 0.0, 2.0])
    out = project_admissible(c, adm)
    assert admissible(out, adm)
    # a0 ends inside the band
    assert 0.6 <= out[0] <= 2.5


def test_empty_admissible_set_raises():
    with pytest.raises(InfeasibleSet):
        AdmissibleSet(2.0, 1.0, 5.0)
    with pytest.raises(InfeasibleSet):
        AdmissibleSet(0.5, 1.0, 0.0)


def test_convexity_restoration_sign():
    # cross-product orientation test on the restored envelope: consecutive
    # edge vectors of a convex counterclockwise polygon have nonnegative cross
    # products.  The convexity constraint is discrete (sign checks on the
    # 16*(2N+1)-point grid), so sample the envelope at M=72, which divides
    # the 144-point check grid for order 4.
    adm = AdmissibleSet(0.6, 2.5, 10.0, enforce_convexity=True)
    for trial in range(100):
        c = RNG.standard_normal(9) * 0.8
        c[0] = RNG.uniform(0.8, 2.0)
        out = project_admissible(c, adm)
        h = SupportFunction(out)
        bd = envelope(h, 72)
        e = np.roll(bd.nodes, -1, axis=0) - bd.nodes
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        assert cross.min() >= -1e-9


# ------------------------------------------------------------ phi map


def test_phi_jacobian_concentric_values():
    sigma = RadialCurve(np.array([0.5]))
    gamma = RadialCurve(np.array([1.0]))
    d = phi_jacobian_diagnostics(sigma, gamma, (0.55, 0.95))
    assert d.a_min == pytest.approx(1.25, abs=1e-12)
    assert d.a_max == pytest.approx(1.25, abs=1e-12)
    assert d.c_absmax == pytest.approx(0.0, abs=1e-12)
    assert d.sv_min > 0.0
    assert d.b_min > 0.0


def test_phi_jacobian_ordering_violations():
    sigma = RadialCurve(np.array([0.5]))
    gamma = RadialCurve(np.array([1.0]))
    with pytest.raises(OrderingViolated):
        phi_jacobian_diagnostics(sigma, gamma, (0.95, 0.55))
    with pytest.raises(OrderingViolated):
        phi_jacobian_diagnostics(sigma, gamma, (0.4, 0.95))


# ------------------------------------------------------------ file io


def test_save_load_round_trip(tmp_path):
    path = tmp_path / "coeffs.csv"
    c = random_coeffs(5, scale=0.3)
    save_coeffs(path, c, "radial", extra_comments=("seed=3", "lam=1.0"))
    back, kind = load_coeffs(path)
    assert kind == "radial"
    assert np.array_equal(back, c)


def test_save_coeffs_rejects_unknown_kind(tmp_path):
    with pytest.raises(ValueError):
        save_coeffs(tmp_path / "x.csv", np.ones(3), "polar")


def test_load_coeffs_checks_order(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# freebound-coeffs-v1 kind=radial N=3\n1.0,0.0,0.0\n")
    with pytest.raises(ValueError):
        load_coeffs(path)
