"""First and second shape derivatives of the energy, and their discretization.

The energy J(Gamma) = int_D |grad u|^2 + lam^2 |D| has the boundary-supported
first derivative

    DJ(Gamma)[V] = int_Gamma V_n (lam^2 - (du/dn)^2) ds,

so the whole gradient is carried by the density g = lam^2 - w^2 with w the
normal trace of the state on the outer boundary (squared, hence independent
of the normal sign convention).  Pairing g against the Fourier perturbation
basis gives the coefficient gradient in either outer-boundary
parameterization:

    radial  (gamma -> gamma + eps phi_k):  entry_k = int phi_k gamma g dtheta
    support (h -> h + eps q_k):            entry_k = int q_k g (h + h'') dtheta

The preconditioned direction divides coefficient ell by (1 + ell^2)^(1/2),
the diagonal symbol of the H^(1/2) inner product in the Fourier basis.

The quadratic form of the second derivative in the support parameterization
is assembled from the local shape derivative u' (harmonic, u' = 0 on the
interior boundary, u' = -w q on the outer one):

    Q(q) = 2 int_Gamma (du'/dn) u' ds
           + int_0^2pi [lam^2 (q^2 - q'^2) + w^2 (q^2 + q'^2)] dtheta.

The diagnostic split I1 = int (du'/dn) u' ds + lam^2 int H q^2 ds (H the
curvature) and I2 = int w^2 q'^2 / sqrt(h^2 + h'^2) ds is reported alongside;
I1 > 0 and I2 >= 0 termwise, but their sum omits transport contributions and
differs from the true second difference quotient, which Q matches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .geometry import (RadialCurve, SupportFunction, coeff_modes,
                       discretize_radial, envelope, eval_series,
                       support_perturbation_field)
from .laplace import (AnnularDomain, BoundarySolution, default_node_count,
                      solve_dirichlet, solve_state)


@dataclass(frozen=True)
class ShapeGradientDensity:
    """Nodewise gradient density g = lam^2 - w^2 on the outer boundary."""

    thetas: np.ndarray
    values: np.ndarray
    arc_weights: np.ndarray

    def __post_init__(self):
        if not self.thetas.size == self.values.size == self.arc_weights.size:
            raise DimensionMismatch("density arrays must share one node grid")


@dataclass(frozen=True)
class CoefficientGradient:
    """Gradient in coefficient space, raw and H^(1/2)-preconditioned."""

    coeffs: np.ndarray
    preconditioned: np.ndarray


def density_from_solution(domain: AnnularDomain, solution: BoundarySolution,
                          lam: float) -> ShapeGradientDensity:
    """Gradient density from an existing state solve (no extra solver call)."""
    g = lam ** 2 - solution.neumann_outer ** 2
    return ShapeGradientDensity(thetas=domain.outer.thetas, values=g,
                                arc_weights=domain.outer.arc_weights())


def shape_gradient_density(domain: AnnularDomain, lam: float) -> ShapeGradientDensity:
    """Solve the state and return the gradient density on the outer boundary."""
    return density_from_solution(domain, solve_state(domain), lam)


def precondition(coeffs: np.ndarray) -> np.ndarray:
    """Divide coefficient ell by (1 + ell^2)^(1/2)."""
    modes = coeff_modes(coeffs.size)
    return coeffs / np.sqrt(1.0 + modes.astype(float) ** 2)


def h12_coefficient_product(a: np.ndarray, b: np.ndarray) -> float:
    """Slotwise product sum_ell (1 + ell^2)^(1/2) a_ell b_ell.

    This is the pairing in which the preconditioned direction is the exact
    Riesz representative of the raw coefficient gradient.
    """
    if a.size != b.size:
        raise DimensionMismatch("coefficient vectors differ in length")
    modes = coeff_modes(a.size)
    return float(np.sum(np.sqrt(1.0 + modes.astype(float) ** 2) * a * b))


def h12_norm_sq(coeffs: np.ndarray) -> float:
    """Squared H^(1/2) norm of the trigonometric polynomial itself.

    Uses the L^2(0, 2pi) mode masses (2 pi for the constant, pi for each
    sin/cos), so e.g. ||cos theta||^2 = pi sqrt(2).
    """
    modes = coeff_modes(coeffs.size)
    sym = np.sqrt(1.0 + modes.astype(float) ** 2)
    mass = np.where(modes == 0, 2 * np.pi, np.pi)
    return float(np.sum(sym * mass * coeffs ** 2))


def _pair_with_basis(samples: np.ndarray, thetas: np.ndarray, order: int,
                     weights: np.ndarray) -> np.ndarray:
    """Quadrature pairing of a nodewise function against each basis mode."""
    out = np.empty(2 * order + 1)
    out[0] = np.sum(samples * weights)
    for ell in range(1, order + 1):
        out[2 * ell - 1] = np.sum(np.sin(ell * thetas) * samples * weights)
        out[2 * ell] = np.sum(np.cos(ell * thetas) * samples * weights)
    return out


def gradient_radial(density: ShapeGradientDensity,
                    gamma: RadialCurve) -> CoefficientGradient:
    """Coefficient gradient for a radially parameterized outer boundary."""
    M = density.thetas.size
    if M < 2 * gamma.order + 2:
        raise DimensionMismatch(
            f"{M} nodes cannot resolve order {gamma.order} gradients")
    r = gamma.radius(density.thetas)
    raw = _pair_with_basis(r * density.values, density.thetas, gamma.order,
                           np.full(M, 2 * np.pi / M))
    return CoefficientGradient(coeffs=raw, preconditioned=precondition(raw))


def gradient_support(density: ShapeGradientDensity,
                     h: SupportFunction) -> CoefficientGradient:
    """Coefficient gradient for a support-function outer boundary."""
    M = density.thetas.size
    if M < 2 * h.order + 2:
        raise DimensionMismatch(
            f"{M} nodes cannot resolve order {h.order} gradients")
    raw = _pair_with_basis(density.values, density.thetas, h.order,
                           density.arc_weights)
    return CoefficientGradient(coeffs=raw, preconditioned=precondition(raw))


@dataclass(frozen=True)
class HessianParts:
    """Quadratic form of the second derivative plus the diagnostic split."""

    value: float
    I1: float
    I2: float


def hessian_quadratic_form(domain: AnnularDomain, h: SupportFunction,
                           q: np.ndarray, lam: float) -> HessianParts:
    """Second-derivative quadratic form at a support-function outer boundary.

    The outer component of the domain must be envelope(h); q holds the
    perturbation coefficients in the same layout as h.
    """
    q = np.asarray(q, dtype=float)
    if q.size != h.coeffs.size:
        raise DimensionMismatch("perturbation and support function orders differ")
    outer = domain.outer
    thetas = outer.thetas
    qv = eval_series(q, thetas)
    qd = eval_series(q, thetas, deriv=1)
    dth = 2 * np.pi / outer.size
    arcw = outer.arc_weights()

    state = solve_state(domain)
    w = state.neumann_outer
    prime = solve_dirichlet(domain, np.zeros(domain.inner.size), -w * qv)
    # int_Gamma (du'/dn) u' ds with u' = -w q on the outer boundary
    flux_term = float(np.sum(prime.neumann_outer * (-w * qv) * arcw))

    value = (2 * flux_term
             + float(np.sum((lam ** 2 * (qv ** 2 - qd ** 2)
                             + w ** 2 * (qv ** 2 + qd ** 2)) * dth)))
    i1 = flux_term + lam ** 2 * float(np.sum(qv ** 2 * dth))
    dist = np.sqrt(np.einsum("ij,ij->i", outer.nodes, outer.nodes))
    i2 = float(np.sum(w ** 2 * qd ** 2 / dist * arcw))
    return HessianParts(value=value, I1=i1, I2=i2)


def support_domain(h: SupportFunction, sigma: RadialCurve,
                   node_count: int | None = None) -> AnnularDomain:
    """Annular domain with envelope(h) outside and a radial interior curve."""
    M = node_count or default_node_count(max(h.order, sigma.order))
    return AnnularDomain(discretize_radial(sigma, M), envelope(h, M))


def radial_domain(gamma: RadialCurve, sigma: RadialCurve,
                  node_count: int | None = None) -> AnnularDomain:
    """Annular domain with both boundaries radially parameterized."""
    M = node_count or default_node_count(max(gamma.order, sigma.order))
    return AnnularDomain(discretize_radial(sigma, M), discretize_radial(gamma, M))


def objective_support(h: SupportFunction, sigma: RadialCurve, lam: float,
                      node_count: int | None = None) -> float:
    """J for a support-function outer boundary and radial interior boundary."""
    from .laplace import dirichlet_energy
    return dirichlet_energy(support_domain(h, sigma, node_count), lam)


def objective_radial(gamma: RadialCurve, sigma: RadialCurve, lam: float,
                     node_count: int | None = None) -> float:
    """J for radially parameterized outer and interior boundaries."""
    from .laplace import dirichlet_energy
    return dirichlet_energy(radial_domain(gamma, sigma, node_count), lam)


FD_STEP = float(np.finfo(float).eps) ** (1.0 / 3.0)


def gradient_fd_errors(h: SupportFunction, sigma: RadialCurve, lam: float,
                       node_count: int | None = None,
                       step: float = FD_STEP) -> np.ndarray:
    """Per-mode relative error of the support gradient vs centered differences."""
    M = node_count or default_node_count(max(h.order, sigma.order))
    dom = support_domain(h, sigma, M)
    grad = gradient_support(shape_gradient_density(dom, lam), h).coeffs
    errs = np.empty_like(grad)
    for k in range(grad.size):
        e = np.zeros_like(h.coeffs)
        e[k] = step
        jp = objective_support(SupportFunction(h.coeffs + e), sigma, lam, M)
        jm = objective_support(SupportFunction(h.coeffs - e), sigma, lam, M)
        fd = (jp - jm) / (2 * step)
        errs[k] = abs(fd - grad[k]) / max(abs(fd), abs(grad[k]), 1e-12)
    return errs


def gradient_fd_errors_radial(gamma: RadialCurve, sigma: RadialCurve, lam: float,
                              node_count: int | None = None,
                              step: float = FD_STEP) -> np.ndarray:
    """Per-mode relative error of the radial gradient vs centered differences."""
    M = node_count or default_node_count(max(gamma.order, sigma.order))
    dom = radial_domain(gamma, sigma, M)
    grad = gradient_radial(shape_gradient_density(dom, lam), gamma).coeffs
    errs = np.empty_like(grad)
    for k in range(grad.size):
        e = np.zeros_like(gamma.coeffs)
        e[k] = step
        jp = objective_radial(RadialCurve(gamma.coeffs + e), sigma, lam, M)
        jm = objective_radial(RadialCurve(gamma.coeffs - e), sigma, lam, M)
        fd = (jp - jm) / (2 * step)
        errs[k] = abs(fd - grad[k]) / max(abs(fd), abs(grad[k]), 1e-12)
    return errs


def hessian_fd_check(h: SupportFunction, sigma: RadialCurve, q: np.ndarray,
                     lam: float, eps: float = 1e-3,
                     node_count: int | None = None):
    """Compare the quadratic form against a centered second difference of J.

    Returns (analytic, finite_difference, relative_error).
    """
    q = np.asarray(q, dtype=float)
    M = node_count or default_node_count(max(h.order, sigma.order))
    dom = support_domain(h, sigma, M)
    exact = hessian_quadratic_form(dom, h, q, lam).value
    j0 = objective_support(h, sigma, lam, M)
    jp = objective_support(SupportFunction(h.coeffs + eps * q), sigma, lam, M)
    jm = objective_support(SupportFunction(h.coeffs - eps * q), sigma, lam, M)
    fd = (jp - 2 * j0 + jm) / eps ** 2
    rel = abs(fd - exact) / max(abs(fd), abs(exact), 1e-12)
    return exact, fd, rel


@dataclass(frozen=True)
class CoercivityFamily:
    """Sampling class of admissible pairs near the optimal outer boundary.

    The outer base radius is placed at margin * F(mean interior radius) with
    margin < 1, which keeps w^2 >= lam^2 on the outer boundary; there the
    quadratic form is positive mode by mode, so the empirical coercivity
    constant stays bounded away from zero.
    """

    lam: float = 1.0
    order: int = 4
    sigma_mean: float = 0.5
    sigma_amp: float = 0.02
    margin_lo: float = 0.80
    margin_hi: float = 0.95
    outer_amp: float = 0.015
    node_count: int | None = None


def sample_admissible_pair(family: CoercivityFamily, rng: np.random.Generator):
    """Draw one (h, sigma) pair from the family."""
    n = family.order
    decay = 1.0 / (1.0 + np.arange(1, n + 1)) ** 2
    amp_s = family.sigma_amp * np.repeat(decay, 2)
    amp_h = family.outer_amp * np.repeat(decay, 2)

    cs = np.empty(2 * n + 1)
    cs[0] = family.sigma_mean * rng.uniform(0.9, 1.1)
    cs[1:] = rng.uniform(-amp_s, amp_s)
    sigma = RadialCurve(cs)

    from .oracle import free_radius
    ch = np.empty(2 * n + 1)
    ch[0] = rng.uniform(family.margin_lo, family.margin_hi) \
        * free_radius(cs[0], family.lam)
    ch[1:] = rng.uniform(-amp_h, amp_h)
    return SupportFunction(ch), sigma


def coercivity_ratios(family: CoercivityFamily, num_samples: int,
                      seed: int) -> np.ndarray:
    """Rayleigh quotients Q(q) / ||q||_{H^(1/2)}^2 over random (h, sigma, q)."""
    rng = np.random.default_rng(seed)
    ratios = np.empty(num_samples)
    for i in range(num_samples):
        h, sigma = sample_admissible_pair(family, rng)
        dom = support_domain(h, sigma, family.node_count)
        q = rng.standard_normal(h.coeffs.size)
        q /= 1.0 + coeff_modes(q.size).astype(float)
        parts = hessian_quadratic_form(dom, h, q, family.lam)
        ratios[i] = parts.value / h12_norm_sq(q)
    return ratios


def coercivity_probe(family: CoercivityFamily, num_samples: int,
                     seed: int) -> float:
    """Empirical coercivity constant over random (h, sigma, q) triples.

    Returns min Q(q) / ||q||_{H^(1/2)}^2; a positive value certifies strong
    convexity over the sampled class.
    """
    return float(coercivity_ratios(family, num_samples, seed).min())
