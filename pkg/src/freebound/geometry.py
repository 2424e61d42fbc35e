"""Boundary representations by truncated Fourier series.

Coefficient vectors use the fixed layout

    (a0, a_-1, a_1, a_-2, a_2, ..., a_-N, a_N)

and represent the 2pi-periodic function

    f(theta) = a0 + sum_{l=1}^{N} a_{-l} sin(l theta) + a_l cos(l theta).

Two parameterizations of a closed curve are supported: starlike curves given by
a radial function r(theta) about the origin, and convex curves given by a
support function h(theta) through the envelope x = h e_r + h' e_theta.  All
discrete boundaries are sampled at M equispaced parameter values and oriented
counterclockwise, with normals pointing out of the enclosed region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleSet, NonpositiveRadius, NotConvex, OrderingViolated

TOL_CONVEX = 1e-10
CHECK_GRID_FACTOR = 16


def series_order(num_coeffs: int) -> int:
    """Truncation order N for a coefficient vector of length 2N+1."""
    if num_coeffs < 1 or num_coeffs % 2 == 0:
        raise ValueError(f"coefficient vector length must be odd, got {num_coeffs}")
    return (num_coeffs - 1) // 2


def coeff_modes(num_coeffs: int) -> np.ndarray:
    """Mode number |l| of each coefficient slot: 0, 1, 1, 2, 2, ..., N, N."""
    order = series_order(num_coeffs)
    modes = np.zeros(num_coeffs, dtype=int)
    ell = np.arange(1, order + 1)
    modes[1::2] = ell
    modes[2::2] = ell
    return modes


def eval_series(coeffs, thetas, deriv: int = 0) -> np.ndarray:
    """Evaluate the series (or its first/second derivative) at given angles."""
    coeffs = np.asarray(coeffs, dtype=float)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    order = series_order(coeffs.size)
    ell = np.arange(1, order + 1, dtype=float)
    ang = np.outer(thetas, ell)
    sin, cos = np.sin(ang), np.cos(ang)
    a_sin = coeffs[1::2]
    a_cos = coeffs[2::2]
    if deriv == 0:
        return coeffs[0] + sin @ a_sin + cos @ a_cos
    if deriv == 1:
        return cos @ (ell * a_sin) - sin @ (ell * a_cos)
    if deriv == 2:
        return -(sin @ (ell ** 2 * a_sin)) - cos @ (ell ** 2 * a_cos)
    raise ValueError("deriv must be 0, 1 or 2")


def fit_series(values, order: int) -> np.ndarray:
    """Trigonometric interpolation coefficients from equispaced nodal values.

    Exact for trigonometric polynomials of degree <= order when the node count
    satisfies M >= 2*order + 2 (no aliasing onto the retained modes).
    """
    values = np.asarray(values, dtype=float)
    M = values.size
    if M < 2 * order + 2:
        raise ValueError(f"need at least {2 * order + 2} nodes to fit order {order}")
    F = np.fft.rfft(values)
    coeffs = np.zeros(2 * order + 1)
    coeffs[0] = F[0].real / M
    ell = np.arange(1, order + 1)
    coeffs[1::2] = -2.0 * F[ell].imag / M
    coeffs[2::2] = 2.0 * F[ell].real / M
    return coeffs


def basis_matrix(thetas, order: int) -> np.ndarray:
    """Matrix B with B[i, k] = (k-th basis function)(thetas[i])."""
    thetas = np.asarray(thetas, dtype=float)
    B = np.empty((thetas.size, 2 * order + 1))
    B[:, 0] = 1.0
    for ell in range(1, order + 1):
        B[:, 2 * ell - 1] = np.sin(ell * thetas)
        B[:, 2 * ell] = np.cos(ell * thetas)
    return B


def check_grid(order: int) -> np.ndarray:
    """Dense sign-check grid: 16*(2N+1) equispaced angles."""
    G = CHECK_GRID_FACTOR * (2 * order + 1)
    return 2 * np.pi * np.arange(G) / G


@dataclass(frozen=True)
class RadialCurve:
    """Starlike boundary r(theta) about the origin, truncated Fourier series."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, "coeffs", c)
        r = eval_series(c, check_grid(self.order))
        if r.min() <= 0.0:
            raise NonpositiveRadius(
                f"radial function reaches {r.min():.3e} on the check grid")

    @property
    def order(self) -> int:
        return series_order(self.coeffs.size)

    def radius(self, thetas, deriv: int = 0) -> np.ndarray:
        return eval_series(self.coeffs, thetas, deriv)


@dataclass(frozen=True)
class SupportFunction:
    """Support function h(theta) of a convex body containing the origin."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, "coeffs", c)
        grid = check_grid(self.order)
        h = eval_series(c, grid)
        if h.min() <= 0.0:
            raise NonpositiveRadius(
                f"support function reaches {h.min():.3e} on the check grid")
        cvx = h + eval_series(c, grid, deriv=2)
        if cvx.min() < -TOL_CONVEX:
            raise NotConvex(
                f"(h + h'') reaches {cvx.min():.3e} on the check grid")

    @property
    def order(self) -> int:
        return series_order(self.coeffs.size)

    def value(self, thetas, deriv: int = 0) -> np.ndarray:
        return eval_series(self.coeffs, thetas, deriv)


@dataclass(frozen=True)
class DiscreteBoundary:
    """Closed curve sampled at equispaced parameter values.

    nodes[i] = x(theta_i); tangents/normals are unit vectors, normals point out
    of the enclosed region; speed = |dx/dtheta|; curvature is signed w.r.t. the
    outward normal (positive for a convex curve).
    """

    thetas: np.ndarray
    nodes: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray
    speed: np.ndarray
    curvature: np.ndarray

    @property
    def size(self) -> int:
        return self.thetas.size

    def arc_weights(self) -> np.ndarray:
        """Trapezoid quadrature weights for arclength integrals."""
        return self.speed * (2 * np.pi / self.size)


def _node_grid(M: int, order: int) -> np.ndarray:
    if M % 2 != 0 or M < 4 * (2 * order + 1):
        raise ValueError(
            f"node count must be even and >= {4 * (2 * order + 1)}, got {M}")
    return 2 * np.pi * np.arange(M) / M


def unit_vectors(thetas) -> tuple[np.ndarray, np.ndarray]:
    """Polar frame (e_r, e_theta) at each angle."""
    c, s = np.cos(thetas), np.sin(thetas)
    e_r = np.stack([c, s], axis=1)
    e_t = np.stack([-s, c], axis=1)
    return e_r, e_t


def discretize_radial(curve: RadialCurve, M: int) -> DiscreteBoundary:
    """Sample a starlike curve x(theta) = r(theta) e_r(theta)."""
    t = _node_grid(M, curve.order)
    r = curve.radius(t)
    if r.min() <= 0.0:
        raise NonpositiveRadius(f"radius reaches {r.min():.3e} at a node")
    r1 = curve.radius(t, deriv=1)
    r2 = curve.radius(t, deriv=2)
    e_r, e_t = unit_vectors(t)
    nodes = r[:, None] * e_r
    speed = np.sqrt(r ** 2 + r1 ** 2)
    tangents = (r1[:, None] * e_r + r[:, None] * e_t) / speed[:, None]
    normals = (r[:, None] * e_r - r1[:, None] * e_t) / speed[:, None]
    curvature = (r ** 2 + 2 * r1 ** 2 - r * r2) / speed ** 3
    return DiscreteBoundary(t, nodes, tangents, normals, speed, curvature)


def envelope(h: SupportFunction, M: int) -> DiscreteBoundary:
    """Reconstruct the convex boundary x = h e_r + h' e_theta from h."""
    t = _node_grid(M, h.order)
    hv = h.value(t)
    h1 = h.value(t, deriv=1)
    h2 = h.value(t, deriv=2)
    speed = hv + h2
    if speed.min() < -TOL_CONVEX:
        raise NotConvex(f"(h + h'') reaches {speed.min():.3e} at a node")
    e_r, e_t = unit_vectors(t)
    nodes = hv[:, None] * e_r + h1[:, None] * e_t
    with np.errstate(divide="ignore"):
        curvature = 1.0 / speed
    return DiscreteBoundary(t, nodes, e_t.copy(), e_r.copy(), speed, curvature)


def support_perturbation_field(h: SupportFunction, q_coeffs, M: int):
    """Deformation field data for a support perturbation q.

    The field V = q e_r + q' e_theta moves the envelope of h to the envelope of
    h + q (to first order); its normal component is V_n = q(theta) and the
    tangential-transport term V . grad_tau V_n equals (q')^2 / sqrt(h^2 + h'^2),
    which is nonnegative.  Both are returned at the M envelope nodes.
    """
    q_coeffs = np.asarray(q_coeffs, dtype=float)
    if q_coeffs.size != h.coeffs.size:
        raise ValueError("perturbation must match the support function order")
    t = _node_grid(M, h.order)
    q = eval_series(q_coeffs, t)
    q1 = eval_series(q_coeffs, t, deriv=1)
    hv = h.value(t)
    h1 = h.value(t, deriv=1)
    return q, q1 ** 2 / np.sqrt(hv ** 2 + h1 ** 2)


@dataclass(frozen=True)
class AdmissibleSet:
    """Box constraints for the outer-boundary coefficients.

    r_lower/r_upper bound the evaluated radius (or support value) on the check
    grid; coeff_norm_bound caps the weighted norm sqrt(sum (1+l^2)^4 c_l^2) of
    the oscillatory modes; enforce_convexity additionally requires
    (h + h'') >= 0 for support-function iterates.
    """

    r_lower: float
    r_upper: float
    coeff_norm_bound: float
    enforce_convexity: bool = False

    def __post_init__(self):
        if self.r_lower > self.r_upper:
            raise InfeasibleSet(
                f"empty admissible set: r_lower={self.r_lower} > r_upper={self.r_upper}")
        if self.coeff_norm_bound <= 0:
            raise InfeasibleSet("coeff_norm_bound must be positive")


def _weighted_mode_norm(coeffs: np.ndarray) -> float:
    modes = coeff_modes(coeffs.size)[1:]
    w = (1.0 + modes.astype(float) ** 2) ** 4
    return float(np.sqrt(np.sum(w * coeffs[1:] ** 2)))


def project_admissible(coeffs, adm: AdmissibleSet) -> np.ndarray:
    """Feasibility restoration onto the admissible set.

    Admissible input is returned unchanged.  Otherwise applies, in order:
    (1) rescale modes l >= 1 so the weighted coefficient norm meets the bound,
    (2) shift a0 (shrinking modes first if the oscillation exceeds the band
    width) to restore r_lower <= f <= r_upper on the check grid,
    (3) if enforce_convexity and (h + h'') dips below -TOL_CONVEX, shrink the
    modes l >= 2 toward zero by bisection until (h + h'') >= 0.
    The three steps are iterated to a fixed point, which makes the map
    exactly idempotent.  This is a cheap restoration, not the metric projection.
    """
    if adm.r_lower > adm.r_upper:
        raise InfeasibleSet("empty admissible set")
    c = np.array(coeffs, dtype=float)
    grid = check_grid(series_order(c.size))
    B = basis_matrix(grid, series_order(c.size))
    modes = coeff_modes(c.size)

    for _ in range(100):
        prev = c.copy()
        # (1) weighted norm of the oscillatory modes
        nrm = _weighted_mode_norm(c)
        if nrm > adm.coeff_norm_bound * (1 + 1e-12):
            c[1:] *= adm.coeff_norm_bound / nrm
        # (2) radial band via a0 shift
        osc = B[:, 1:] @ c[1:]
        span = osc.max() - osc.min()
        band = adm.r_upper - adm.r_lower
        if span > band:
            c[1:] *= band / span
            osc = B[:, 1:] @ c[1:]
        a0_lo = adm.r_lower - osc.min()
        a0_hi = adm.r_upper - osc.max()
        c[0] = min(max(c[0], a0_lo), a0_hi)
        # (3) convexity of support iterates
        if adm.enforce_convexity:
            curv_weight = (1.0 - modes.astype(float) ** 2)
            base = np.full(grid.size, c[0])
            osc2 = B[:, 1:] @ (curv_weight[1:] * c[1:])
            if (base + osc2).min() < -TOL_CONVEX:
                lo, hi = 0.0, 1.0
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    if (base + mid * osc2).min() >= 0.0:
                        lo = mid
                    else:
                        hi = mid
                shrink = np.where(modes >= 2, lo, 1.0)
                c *= shrink
        if np.array_equal(c, prev):
            return c
    raise InfeasibleSet("feasibility restoration did not reach a fixed point")


@dataclass(frozen=True)
class PhiMapDiagnostics:
    """Extrema of the triangular Jacobian of the reference-annulus map."""

    a_min: float
    a_max: float
    b_min: float
    b_max: float
    c_absmax: float
    sv_min: float
    sv_max: float


def phi_jacobian_diagnostics(sigma: RadialCurve, gamma: RadialCurve,
                             bounds: tuple[float, float],
                             grid: int = 64) -> PhiMapDiagnostics:
    """Jacobian diagnostics of the radial interpolation map.

    The map sends the reference annulus {rbar_sigma <= r <= rlow_gamma} onto
    the annular domain between sigma and gamma by linear interpolation of the
    radius at fixed angle,

        rho(r, theta) = [(r - rbar_s) gamma(theta) + (rlow_g - r) sigma(theta)]
                        / (rlow_g - rbar_s).

    In the orthonormal polar frames its Jacobian is triangular,
    [[a, c], [0, b]] with a = d(rho)/dr, b = rho/r and c = (1/r) d(rho)/dtheta;
    the returned extrema certify invertibility (sv_min > 0) whenever the
    orderings sigma <= rbar_s < rlow_g <= gamma hold.
    """
    rbar_s, rlow_g = bounds
    if not rbar_s < rlow_g:
        raise OrderingViolated(f"need rbar_sigma < rlow_gamma, got {bounds}")
    t = 2 * np.pi * np.arange(grid) / grid
    sig = sigma.radius(t)
    gam = gamma.radius(t)
    if sig.max() > rbar_s or gam.min() < rlow_g:
        raise OrderingViolated(
            "radial ordering sigma <= rbar_sigma <= rlow_gamma <= gamma fails")
    sig1 = sigma.radius(t, deriv=1)
    gam1 = gamma.radius(t, deriv=1)
    r = np.linspace(rbar_s, rlow_g, grid)[:, None]
    width = rlow_g - rbar_s
    a = np.broadcast_to((gam - sig) / width, (grid, grid))
    rho = ((r - rbar_s) * gam + (rlow_g - r) * sig) / width
    b = rho / r
    cc = ((r - rbar_s) * gam1 + (rlow_g - r) * sig1) / width / r
    tr = a ** 2 + b ** 2 + cc ** 2
    det = (a * b) ** 2
    disc = np.sqrt(np.maximum(tr ** 2 - 4 * det, 0.0))
    sv_max = np.sqrt((tr + disc) / 2)
    sv_min = np.sqrt((tr - disc) / 2)
    return PhiMapDiagnostics(
        a_min=float(a.min()), a_max=float(a.max()),
        b_min=float(b.min()), b_max=float(b.max()),
        c_absmax=float(np.abs(cc).max()),
        sv_min=float(sv_min.min()), sv_max=float(sv_max.max()))


def save_coeffs(path, coeffs, kind: str, extra_comments=()) -> None:
    """Write a coefficient vector as a one-line CSV with a kind/N header.

    extra_comments are emitted as additional '#' lines below the header
    (provenance such as the resolved run configuration).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if kind not in ("radial", "support"):
        raise ValueError(f"kind must be 'radial' or 'support', got {kind!r}")
    order = series_order(coeffs.size)
    with open(path, "w") as f:
        f.write(f"# freebound-coeffs-v1 kind={kind} N={order}\n")
        for line in extra_comments:
            f.write(f"# {line}\n")
        f.write(",".join(format(v, ".17g") for v in coeffs) + "\n")


def load_coeffs(path) -> tuple[np.ndarray, str]:
    """Read a coefficient vector written by save_coeffs; returns (coeffs, kind)."""
    with open(path) as f:
        header = f.readline().strip()
        data = f.readline().strip()
        while data.startswith("#"):
            data = f.readline().strip()
    fields = dict(part.split("=", 1) for part in header.lstrip("# ").split()[1:])
    coeffs = np.array([float(v) for v in data.split(",")])
    if series_order(coeffs.size) != int(fields["N"]):
        raise ValueError(f"coefficient count does not match header N in {path}")
    return coeffs, fields["kind"]
