"""Projected stochastic gradient descent over random interior boundaries.

The interior boundary is a radial Fourier series around a fixed mean curve,
with independent uniform coefficients xi_ell in [-a_ell, a_ell].  Sampling is
counter-based: sample index n under seed s is generated by the dedicated
stream (s, n, attempt), so the draw at step n depends only on (seed, n) and
never on the iterate, and trajectories can be replayed sample by sample.

The recursion is h_{n+1} = project(h_n - t_n G(h_n, xi_n)) with the
Robbins-Monro schedule t_n = theta / (n + offset) and G the preconditioned
coefficient gradient of the per-sample energy.  If the updated outer boundary
collides with the current sample (gap below the domain minimum), the step is
rejected and retried with a halved step size, at most five times, reusing the
same sample and gradient.

Expected objective and expected gradient are estimated by Monte Carlo or by a
deterministic Halton quasi-Monte Carlo rule over the coefficient cube.  The
gradient estimator averages coefficient vectors before taking the norm (norm
of the mean); the mean of norms is reported alongside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GapTooSmall, ResampleLimitExceeded
from .geometry import (AdmissibleSet, RadialCurve, SupportFunction,
                       check_grid, coeff_modes, eval_series, fit_series,
                       project_admissible)
from .laplace import AnnularDomain, default_node_count, energy_of, solve_state
from .shape_calculus import (CoefficientGradient, density_from_solution,
                             gradient_radial, gradient_support, h12_norm_sq)

RESAMPLE_LIMIT = 100
REJECT_LIMIT = 5

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37,
           41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)
# stride separating Halton retry substreams from the primary index range
_QMC_RETRY_STRIDE = 1_000_003


def ellipse_radial_coeffs(a: float, b: float, order: int) -> np.ndarray:
    """Radial Fourier coefficients of an origin-centered axis-aligned ellipse.

    The polar radius ab / sqrt((b cos)^2 + (a sin)^2) is smooth but not a
    trigonometric polynomial; the returned series is its order-N truncation.
    """
    M = max(4096, 4 * (2 * order + 1))
    t = 2 * np.pi * np.arange(M) / M
    r = a * b / np.sqrt((b * np.cos(t)) ** 2 + (a * np.sin(t)) ** 2)
    return fit_series(r, order)


@dataclass(frozen=True)
class RandomBoundaryModel:
    """Uniform Fourier-coefficient law for the random interior boundary."""

    mean_coeffs: np.ndarray
    amplitudes: np.ndarray
    radial_bounds: tuple[float, float] = (0.05, 0.55)
    seed: int = 0

    def __post_init__(self):
        if self.mean_coeffs.size != self.amplitudes.size:
            raise ValueError("mean and amplitude vectors differ in length")
        if np.any(self.amplitudes < 0):
            raise ValueError("amplitudes must be nonnegative")
        lo, hi = self.radial_bounds
        if not 0 < lo < hi:
            raise ValueError("radial bounds must satisfy 0 < lo < hi")

    @property
    def order(self) -> int:
        return (self.mean_coeffs.size - 1) // 2


def default_model(order: int = 8, amplitude: float = 0.1, seed: int = 0,
                  axes: tuple[float, float] = (0.4, 0.2)) -> RandomBoundaryModel:
    """Ellipse mean curve with amplitudes decaying as A / (1 + ell)^2."""
    modes = coeff_modes(2 * order + 1).astype(float)
    amps = amplitude / (1.0 + modes) ** 2
    return RandomBoundaryModel(mean_coeffs=ellipse_radial_coeffs(*axes, order),
                               amplitudes=amps, seed=seed)


def flat_amplitude_model(order: int = 8, amplitude: float = 0.5,
                         seed: int = 0,
                         axes: tuple[float, float] = (0.4, 0.2)) -> RandomBoundaryModel:
    """Equal half-width amplitude on every mode (0.5 reproduces the literal
    uniform-on-[-0.5, 0.5] law, which rarely yields an admissible curve)."""
    amps = np.full(2 * order + 1, amplitude)
    return RandomBoundaryModel(mean_coeffs=ellipse_radial_coeffs(*axes, order),
                               amplitudes=amps, seed=seed)


def _radical_inverse(index: int, base: int) -> float:
    inv = 0.0
    scale = 1.0 / base
    while index > 0:
        index, digit = divmod(index, base)
        inv += digit * scale
        scale /= base
    return inv


def halton_point(index: int, dim: int) -> np.ndarray:
    """Point index >= 1 of the unscrambled Halton sequence in (0, 1)^dim."""
    if dim > len(_PRIMES):
        raise ValueError(f"Halton sampler limited to {len(_PRIMES)} dimensions")
    return np.array([_radical_inverse(index, _PRIMES[d]) for d in range(dim)])


def _draw_interior(model: RandomBoundaryModel, index: int, kind: str):
    """One sample of the interior curve; returns (curve, attempts used)."""
    grid = check_grid(model.order)
    lo, hi = model.radial_bounds
    for attempt in range(RESAMPLE_LIMIT):
        if kind == "mc":
            rng = np.random.default_rng((model.seed, index, attempt))
            xi = rng.uniform(-1.0, 1.0, model.amplitudes.size)
        elif kind == "qmc":
            u = halton_point(index + 1 + attempt * _QMC_RETRY_STRIDE,
                             model.amplitudes.size)
            xi = 2.0 * u - 1.0
        else:
            raise ValueError(f"unknown sampler kind {kind!r}")
        coeffs = model.mean_coeffs + xi * model.amplitudes
        r = eval_series(coeffs, grid)
        if r.min() >= lo and r.max() <= hi:
            return RadialCurve(coeffs), attempt + 1
    raise ResampleLimitExceeded(
        f"no admissible interior sample in {RESAMPLE_LIMIT} attempts "
        f"(index {index}, kind {kind}); amplitudes too large for the bounds")


def sample_interior(model: RandomBoundaryModel, index: int,
                    kind: str = "mc") -> RadialCurve:
    """Reproducible interior-boundary sample number `index`."""
    curve, _ = _draw_interior(model, index, kind)
    return curve


def _outer_curve(coeffs: np.ndarray, param_kind: str):
    if param_kind == "radial":
        return RadialCurve(coeffs)
    if param_kind == "support":
        return SupportFunction(coeffs)
    raise ValueError(f"unknown parameterization {param_kind!r}")


def _build_domain(coeffs: np.ndarray, sigma: RadialCurve, param_kind: str,
                  node_count: int) -> AnnularDomain:
    from .geometry import discretize_radial, envelope
    outer = _outer_curve(coeffs, param_kind)
    if param_kind == "radial":
        disc = discretize_radial(outer, node_count)
    else:
        disc = envelope(outer, node_count)
    return AnnularDomain(discretize_radial(sigma, node_count), disc)


def _gradient_and_value(coeffs: np.ndarray, sigma: RadialCurve, lam: float,
                        param_kind: str, node_count: int):
    dom = _build_domain(coeffs, sigma, param_kind, node_count)
    sol = solve_state(dom)
    dens = density_from_solution(dom, sol, lam)
    if param_kind == "radial":
        grad = gradient_radial(dens, _outer_curve(coeffs, param_kind))
    else:
        grad = gradient_support(dens, _outer_curve(coeffs, param_kind))
    return grad, energy_of(sol, lam)


def stochastic_gradient(h: np.ndarray, sigma: RadialCurve, lam: float,
                        param_kind: str = "radial",
                        node_count: int | None = None) -> CoefficientGradient:
    """Per-sample preconditioned gradient G(h, xi) at one interior sample."""
    h = np.asarray(h, dtype=float)
    M = node_count or default_node_count(max((h.size - 1) // 2, sigma.order))
    grad, _ = _gradient_and_value(h, sigma, lam, param_kind, M)
    return grad


@dataclass(frozen=True)
class StepRecord:
    """Per-iteration diagnostics of the recursion."""

    n: int
    step: float
    j_sample: float
    grad_norm: float
    resample_attempts: int
    rejects: int
    projection_active: bool


@dataclass
class SgdState:
    """Mutable cursor of the projected stochastic gradient recursion."""

    h: np.ndarray
    n: int
    schedule: tuple[float, float]
    rng_cursor: int
    history: list[StepRecord] = field(default_factory=list)
    param_kind: str = "radial"
    node_count: int | None = None

    def step_size(self) -> float:
        theta, offset = self.schedule
        return theta / (self.n + offset)


def initial_state(coeffs: np.ndarray, theta_step: float = 1.0 / 400,
                  offset: float = 0.0, param_kind: str = "radial",
                  node_count: int | None = None) -> SgdState:
    return SgdState(h=np.asarray(coeffs, dtype=float).copy(), n=1,
                    schedule=(theta_step, offset), rng_cursor=0,
                    param_kind=param_kind, node_count=node_count)


def default_admissible(param_kind: str = "radial") -> AdmissibleSet:
    return AdmissibleSet(r_lower=0.6, r_upper=2.5, coeff_norm_bound=10.0,
                         enforce_convexity=(param_kind == "support"))


def sgd_step(state: SgdState, model: RandomBoundaryModel, lam: float,
             adm: AdmissibleSet) -> SgdState:
    """One projected step; returns a new state sharing the history list."""
    M = state.node_count or default_node_count(
        max((state.h.size - 1) // 2, model.order))
    sigma, attempts = _draw_interior(model, state.rng_cursor, "mc")
    grad, j_sample = _gradient_and_value(state.h, sigma, lam,
                                         state.param_kind, M)
    direction = grad.preconditioned

    t = state.step_size()
    rejects = 0
    while True:
        raw = state.h - t * direction
        trial = project_admissible(raw, adm)
        try:
            _build_domain(trial, sigma, state.param_kind, M)
            break
        except GapTooSmall:
            rejects += 1
            if rejects > REJECT_LIMIT:
                raise GapTooSmall(
                    f"iteration {state.n}: step rejected {REJECT_LIMIT} times "
                    f"against sample {state.rng_cursor}") from None
            t *= 0.5

    state.history.append(StepRecord(
        n=state.n, step=t, j_sample=j_sample,
        grad_norm=float(np.sqrt(h12_norm_sq(direction))),
        resample_attempts=attempts, rejects=rejects,
        projection_active=not np.array_equal(trial, raw)))
    return SgdState(h=trial, n=state.n + 1, schedule=state.schedule,
                    rng_cursor=state.rng_cursor + 1, history=state.history,
                    param_kind=state.param_kind, node_count=state.node_count)


@dataclass(frozen=True)
class SgdConfig:
    """Everything needed to reproduce a run bitwise."""

    model: RandomBoundaryModel
    lam: float = 1.0
    num_iterations: int = 1000
    theta_step: float = 1.0 / 400
    offset: float = 0.0
    param_kind: str = "radial"
    initial_radius: float = 0.75
    initial_coeffs: np.ndarray | None = None
    node_count: int | None = None
    snapshot_iters: tuple[int, ...] = ()
    admissible: AdmissibleSet | None = None


@dataclass(frozen=True)
class SgdTrajectory:
    initial: np.ndarray
    final: np.ndarray
    records: tuple[StepRecord, ...]
    snapshots: dict[int, np.ndarray]


def run_sgd(config: SgdConfig) -> SgdTrajectory:
    """Run the recursion for num_iterations steps, collecting snapshots."""
    if config.initial_coeffs is not None:
        h0 = np.asarray(config.initial_coeffs, dtype=float).copy()
    else:
        h0 = np.zeros(2 * config.model.order + 1)
        h0[0] = config.initial_radius
    adm = config.admissible or default_admissible(config.param_kind)
    state = initial_state(h0, config.theta_step, config.offset,
                          config.param_kind, config.node_count)
    wanted = set(config.snapshot_iters)
    snapshots: dict[int, np.ndarray] = {}
    if 0 in wanted:
        snapshots[0] = h0.copy()
    for _ in range(config.num_iterations):
        state = sgd_step(state, config.model, config.lam, adm)
        done = state.n - 1
        if done in wanted:
            snapshots[done] = state.h.copy()
    return SgdTrajectory(initial=h0, final=state.h,
                         records=tuple(state.history), snapshots=snapshots)


@dataclass(frozen=True)
class EstimatorResult:
    """Sample-average estimate with enough detail to audit it."""

    mean_value: float
    num_samples: int
    sampler_kind: str
    per_sample_values: tuple[float, ...] | None = None
    mean_of_norms: float | None = None


def estimate_expected_objective(h: np.ndarray, model: RandomBoundaryModel,
                                lam: float, num_samples: int,
                                kind: str = "qmc",
                                param_kind: str = "radial",
                                node_count: int | None = None) -> EstimatorResult:
    """Sample mean of the per-sample energy at a fixed outer boundary."""
    h = np.asarray(h, dtype=float)
    M = node_count or default_node_count(max((h.size - 1) // 2, model.order))
    vals = np.empty(num_samples)
    for i in range(num_samples):
        sigma = sample_interior(model, i, kind)
        dom = _build_domain(h, sigma, param_kind, M)
        vals[i] = energy_of(solve_state(dom), lam)
    return EstimatorResult(mean_value=float(vals.mean()),
                           num_samples=num_samples, sampler_kind=kind,
                           per_sample_values=tuple(vals))


def estimate_expected_gradient_norm(h: np.ndarray, model: RandomBoundaryModel,
                                    lam: float, num_samples: int,
                                    kind: str = "qmc",
                                    param_kind: str = "radial",
                                    node_count: int | None = None) -> EstimatorResult:
    """Norm of the mean preconditioned gradient (headline), mean of norms too."""
    h = np.asarray(h, dtype=float)
    M = node_count or default_node_count(max((h.size - 1) // 2, model.order))
    acc = np.zeros_like(h)
    norms = np.empty(num_samples)
    for i in range(num_samples):
        sigma = sample_interior(model, i, kind)
        grad, _ = _gradient_and_value(h, sigma, lam, param_kind, M)
        acc += grad.preconditioned
        norms[i] = np.sqrt(h12_norm_sq(grad.preconditioned))
    mean_grad = acc / num_samples
    return EstimatorResult(mean_value=float(np.sqrt(h12_norm_sq(mean_grad))),
                           num_samples=num_samples, sampler_kind=kind,
                           mean_of_norms=float(norms.mean()))


def estimate_value_and_gradient(h: np.ndarray, model: RandomBoundaryModel,
                                lam: float, num_samples: int,
                                kind: str = "qmc",
                                param_kind: str = "radial",
                                node_count: int | None = None) -> tuple[float, np.ndarray]:
    """One-pass sample means of the objective and preconditioned gradient.

    Shares a single solve per sample between the two estimates; the sample
    set matches estimate_expected_objective for the same arguments.
    """
    h = np.asarray(h, dtype=float)
    M = node_count or default_node_count(max((h.size - 1) // 2, model.order))
    acc = np.zeros_like(h)
    val = 0.0
    for i in range(num_samples):
        sigma = sample_interior(model, i, kind)
        grad, j = _gradient_and_value(h, sigma, lam, param_kind, M)
        acc += grad.preconditioned
        val += j
    return val / num_samples, acc / num_samples


def minimize_sample_average(h0: np.ndarray, model: RandomBoundaryModel,
                            lam: float, num_samples: int,
                            kind: str = "qmc",
                            param_kind: str = "radial",
                            node_count: int | None = None,
                            step: float = 0.05, max_iters: int = 80,
                            grad_tol: float = 1e-9) -> np.ndarray:
    """Minimizer of the fixed-sample-set average objective.

    Runs plain preconditioned descent on the same sample set that
    estimate_expected_objective draws for (model, kind, num_samples), so
    gaps measured against the returned point are nonnegative by
    construction.  Start h0 close to the optimum (e.g. the final iterate
    of a long run); no projection is applied.
    """
    h = np.asarray(h0, dtype=float).copy()
    M = node_count or default_node_count(max((h.size - 1) // 2, model.order))
    sigmas = [sample_interior(model, i, kind) for i in range(num_samples)]
    for _ in range(max_iters):
        acc = np.zeros_like(h)
        for sigma in sigmas:
            grad, _ = _gradient_and_value(h, sigma, lam, param_kind, M)
            acc += grad.preconditioned
        acc /= num_samples
        if np.sqrt(h12_norm_sq(acc)) < grad_tol:
            break
        h -= step * acc
    return h


def expected_objective_two_point(h: np.ndarray, r1: float, r2: float, p: float,
                                 lam: float, param_kind: str = "radial",
                                 node_count: int | None = None) -> float:
    """Exact two-point quadrature of E[J]: one solve per interior atom."""
    h = np.asarray(h, dtype=float)
    M = node_count or default_node_count((h.size - 1) // 2)
    js = []
    for r in (r1, r2):
        dom = _build_domain(h, RadialCurve(np.array([r])), param_kind, M)
        js.append(energy_of(solve_state(dom), lam))
    return p * js[0] + (1 - p) * js[1]
