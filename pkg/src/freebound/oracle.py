"""Closed forms for concentric circles and the two-point random radius.

For an annulus with inner radius r_sigma and outer radius r_gamma the state is
u(r) = log(r / r_gamma) / log(r_sigma / r_gamma), which gives the energy

    J(r_gamma, r_sigma) = 2 pi / log(r_gamma / r_sigma)
                          + pi lam^2 (r_gamma^2 - r_sigma^2).

J is strictly convex in r_gamma with unique minimizer r_gamma = F(r_sigma)
where F(r) = 1 / (lam W(1 / (lam r))) and W is the principal Lambert branch;
equivalently 1 / (F log(F / r)) = lam.  When the inner radius switches between
two values r1 < r2 with P(r1) = p, the expected energy is the p-mixture of the
two J's; it is only defined for r_gamma > r2, and whenever F(r1) < r2 the
p = 1 optimum lies inside the larger interior circle (the crossing regime), so
the minimization is constrained to r_gamma >= r2 + delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateAnnulus

DELTA_DEFAULT = 0.05
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def lambert_w(x: float) -> float:
    """Principal-branch Lambert W for x > 0 (w e^w = x), Halley iteration."""
    if x <= 0:
        raise ValueError("principal branch evaluated for x > 0 only")
    w = math.log1p(x)
    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            break
        # Halley step: f' = e^w (1 + w), f'' = e^w (2 + w)
        step = f / (ew * (w + 1) - (w + 2) * f / (2 * w + 2))
        w -= step
        if abs(step) <= 1e-16 * max(1.0, abs(w)):
            break
    return w


def free_radius(r_sigma: float, lam: float) -> float:
    """Optimal outer radius F(r_sigma) = 1 / (lam W(1 / (lam r_sigma)))."""
    if r_sigma <= 0 or lam <= 0:
        raise ValueError("r_sigma and lam must be positive")
    return 1.0 / (lam * lambert_w(1.0 / (lam * r_sigma)))


def energy_circles(r_gamma: float, r_sigma: float, lam: float) -> float:
    """Energy of the concentric annulus r_sigma < r < r_gamma."""
    if r_sigma <= 0:
        raise ValueError("r_sigma must be positive")
    if r_gamma <= r_sigma:
        raise DegenerateAnnulus(
            f"outer radius {r_gamma} does not exceed inner radius {r_sigma}")
    return (2 * math.pi / math.log(r_gamma / r_sigma)
            + math.pi * lam ** 2 * (r_gamma ** 2 - r_sigma ** 2))


@dataclass(frozen=True)
class TwoPointRadiusLaw:
    """Interior radius switching between r1 and r2 with P(r1) = p."""

    r1: float
    r2: float
    p: float

    def __post_init__(self):
        if not 0 < self.r1 < self.r2:
            raise ValueError("radii must satisfy 0 < r1 < r2")
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")


def expected_energy_two_point(r_gamma: float, law: TwoPointRadiusLaw,
                              lam: float) -> float:
    """Expected energy under a two-point radius law; needs r_gamma > r2."""
    if r_gamma <= law.r2:
        raise DegenerateAnnulus(
            f"outer radius {r_gamma} must exceed the larger inner radius {law.r2}")
    mean_sq = law.p * law.r1 ** 2 + (1 - law.p) * law.r2 ** 2
    return (2 * math.pi * law.p / math.log(r_gamma / law.r1)
            + 2 * math.pi * (1 - law.p) / math.log(r_gamma / law.r2)
            + math.pi * lam ** 2 * (r_gamma ** 2 - mean_sq))


def golden_section(f, lo: float, hi: float, tol: float = 1e-10):
    """Minimize a unimodal function on [lo, hi]; returns (x, f(x))."""
    if not hi > lo:
        raise ValueError("need lo < hi")
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _two_point_minimizer(law: TwoPointRadiusLaw, lam: float, p: float,
                         r_floor: float) -> float:
    """argmin of the expected energy at mixing weight p over (r_floor, hi].

    For p = 1 the mixture degenerates to the single radius r1 and the
    unconstrained optimum F(r1) is returned directly.
    """
    if p >= 1.0:
        return free_radius(law.r1, lam)
    lawp = TwoPointRadiusLaw(law.r1, law.r2, p)
    hi = free_radius(law.r2, lam) + 1.0
    lo = max(r_floor, law.r2 * (1 + 1e-12) + 1e-12)
    x, _ = golden_section(lambda r: expected_energy_two_point(r, lawp, lam),
                          lo, hi)
    return x


def minimize_expected_energy(law: TwoPointRadiusLaw, lam: float,
                             delta: float = DELTA_DEFAULT):
    """Constrained minimizer of the expected energy over r_gamma >= r2 + delta.

    Returns (r_star, value).  Convexity in r_gamma makes golden section exact
    here; when the unconstrained optimum sits below the floor the search
    collapses onto r2 + delta.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    lo = law.r2 + delta
    hi = max(free_radius(law.r2, lam), lo) + 1.0
    return golden_section(lambda r: expected_energy_two_point(r, law, lam),
                          lo, hi)


@dataclass(frozen=True)
class CrossingReport:
    """Well-posedness report for a two-point radius law.

    crossing is True when F(r1) < r2, i.e. the optimum for the smaller radius
    alone would land inside the larger interior circle.  binds_from_p is the
    smallest mixing weight at which the unconstrained minimizer drops below
    r2 + delta (the constraint binds on (binds_from_p, 1]); None if it never
    binds, 0.0 if it binds for every p.
    """

    crossing: bool
    f_r1: float
    f_r2: float
    delta: float
    binds_from_p: float | None


def crossing_check(law: TwoPointRadiusLaw, lam: float,
                   delta: float = DELTA_DEFAULT) -> CrossingReport:
    """Detect the crossing regime and locate where the floor constraint binds.

    The unconstrained minimizer decreases monotonically in p from F(r2) at
    p = 0 to F(r1) at p = 1, so a bisection on p finds the binding threshold.
    """
    f1 = free_radius(law.r1, lam)
    f2 = free_radius(law.r2, lam)
    floor = law.r2 + delta

    def slack(p: float) -> float:
        return _two_point_minimizer(law, lam, p, law.r2) - floor

    if slack(1.0) >= 0:
        binds = None
    elif slack(0.0) <= 0:
        binds = 0.0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if slack(mid) > 0:
                lo = mid
            else:
                hi = mid
        binds = 0.5 * (lo + hi)
    return CrossingReport(crossing=f1 < law.r2, f_r1=f1, f_r2=f2,
                          delta=delta, binds_from_p=binds)
