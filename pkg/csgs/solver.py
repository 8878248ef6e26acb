#!/usr/bin/env python3

# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_banded
from tqdm.contrib.concurrent import thread_map

from csgs import CsgsError, SolverError, DegenerateNonlinearityError, ZeroFieldError, log, utils
from csgs.functional import ProblemSpec, EnergyBreakdown, REGIME_CRITICAL_Q, energy_and_gradient, nehari_value_of
from csgs.grid import FieldPair, Grid, solve_shifted_laplacian
from csgs.nehari import nehari_project
from csgs.potentials import PotentialSet

INIT_GAUSSIAN_BUMP = 'gaussian-bump'
INIT_RANDOM = 'random'
INIT_FILE = 'file'
INITS = (INIT_GAUSSIAN_BUMP, INIT_RANDOM, INIT_FILE)

ZERO_COMPONENTS = (None, 'u', 'v')

# Below this predicted decrease (relative to |I|) the Armijo test is at the rounding level of the energy
ROUNDOFF_DECREASE = 64.0 * np.finfo(float).eps

BUBBLE_AMPLITUDE = 3.0 ** 0.25

# Bump starts: amplitude of the lighter component and size of the seeded nodewise ripple
LIGHT_COMPONENT = 0.25
BUMP_RIPPLE = 0.1

# Radial Sobolev search: Dirichlet line [-T, T] in t = ln r, with this many nodes per grid point
RADIAL_HALF_LENGTH = 24.0
RADIAL_NODES_PER_POINT = 8
RADIAL_SPHERE_FACTOR = (4.0 * math.pi) ** (2.0 / 3.0)


@dataclass
class SolveOptions:
    max_iters: int = 5000
    grad_tol: float = 1e-6
    step0: float = 1.0
    armijo_factor: float = 0.5
    sufficient_decrease: float = 1e-4
    recenter_every: int = 50
    seed: int = 0
    init: str = INIT_GAUSSIAN_BUMP
    init_file: Optional[str] = None
    starts: int = 2
    min_step: float = 1e-14
    polish_iters: int = 200
    preconditioner_shift: float = 1.0
    zero_component: Optional[str] = None
    log_every: int = 100

    def __post_init__(self) -> None:
        if self.max_iters < 0:
            raise SolverError(f"max_iters must be nonnegative (got {self.max_iters})")
        for name in ('grad_tol', 'step0', 'min_step', 'preconditioner_shift'):
            if not getattr(self, name) > 0:
                raise SolverError(f"{name} must be positive (got {getattr(self, name)})")
        for name in ('armijo_factor', 'sufficient_decrease'):
            if not 0.0 < getattr(self, name) < 1.0:
                raise SolverError(f"{name} must lie in (0, 1) (got {getattr(self, name)})")
        if self.starts < 1:
            raise SolverError(f"starts must be at least 1 (got {self.starts})")
        if self.recenter_every < 0 or self.polish_iters < 0 or self.log_every < 0:
            raise SolverError("recenter_every, polish_iters and log_every must be nonnegative")
        if self.init not in INITS:
            raise SolverError(f"init must be one of {', '.join(INITS)} (got '{self.init}')")
        if self.init == INIT_FILE and not self.init_file:
            raise SolverError("init 'file' requires init_file")
        if self.zero_component not in ZERO_COMPONENTS:
            raise SolverError(f"zero_component must be 'u', 'v' or empty (got '{self.zero_component}')")


@dataclass
class SolveReport:
    field: FieldPair
    energy: float
    grad_norm: float
    iterations: int
    energy_trace: List[float]
    grad_trace: List[float]
    recenters_applied: int
    converged: bool
    nehari_residual: float
    e_norm_sq: float
    grid_hash: str
    potential_hash: str
    spec_hash: str
    failure: Optional[str] = None

    def summary(self) -> Dict:
        return {
            'energy': self.energy,
            'grad_norm': self.grad_norm,
            'iterations': self.iterations,
            'recenters_applied': self.recenters_applied,
            'converged': self.converged,
            'nehari_residual': self.nehari_residual,
            'e_norm_sq': self.e_norm_sq,
            'grid_hash': self.grid_hash,
            'potential_hash': self.potential_hash,
            'spec_hash': self.spec_hash,
            'failure': self.failure,
        }


@dataclass
class MuSweep:
    mu_values: List[float]
    energies: List[Optional[float]]
    converged: List[bool]
    reports: List[Optional[SolveReport]]
    failures: Dict[float, str] = field(default_factory=dict)
    threshold: Optional[float] = None
    sobolev_constant: Optional[float] = None
    mu0_estimate: Optional[float] = None
    warm_start: bool = True
    workers: int = 1

    def below_threshold(self, index: int) -> Optional[bool]:
        if self.threshold is None or self.energies[index] is None:
            return None

        return self.energies[index] < self.threshold

    @property
    def crossed(self) -> Optional[bool]:
        """
        Whether some converged level fell below the threshold; None when there is no threshold
        """
        if self.threshold is None:
            return None

        return self.mu0_estimate is not None


@dataclass
class ComparisonReport:
    energy_periodic: float
    energy_asymptotic: float
    gap: float
    margin: float
    slack: float
    passed: bool


@dataclass
class SobolevEstimate:
    constant: float
    bubble_quotient: float
    nodes: int
    iterations: int
    converged: bool
    trace: List[float]


def initial_field(grid: Grid, opts: SolveOptions, index: int = 0) -> FieldPair:
    """
    Start number `index` of a solve, built on a Gaussian of width L/4 at the origin.

    Bump starts alternate the heavy component: even starts put the full Gaussian in u and a quarter of it in v,
    odd starts the other way round. Both components carry a seeded ripple, so u and v never coincide and a
    problem that is symmetric under u <-> v cannot keep the descent on its symmetric saddle. 'random'
    modulates the Gaussian with seeded noise instead.
    """
    if opts.init == INIT_FILE:
        from csgs.field_io import read_field
        return read_field(opts.init_file, grid)

    width = grid.spec.half_width / 4.0
    bump = np.exp(-grid.radius_squared / width ** 2)
    rng = np.random.default_rng((opts.seed, index))

    if opts.init == INIT_RANDOM:
        return FieldPair(bump * (0.5 + rng.random(grid.shape)), bump * (0.5 + rng.random(grid.shape)), grid)

    heavy = bump * (1.0 + BUMP_RIPPLE * (rng.random(grid.shape) - 0.5))
    light = LIGHT_COMPONENT * bump * (1.0 + BUMP_RIPPLE * (rng.random(grid.shape) - 0.5))
    if index % 2 == 0:
        return FieldPair(heavy, light, grid)

    return FieldPair(light, heavy, grid)


def initial_fields(grid: Grid, opts: SolveOptions) -> List[FieldPair]:
    if opts.init == INIT_GAUSSIAN_BUMP:
        return [initial_field(grid, opts, index) for index in range(opts.starts)]

    return [initial_field(grid, opts)]


def _with_zero_component(fp: FieldPair, component: Optional[str]) -> FieldPair:
    if component == 'u':
        return FieldPair(np.zeros(fp.grid.shape), fp.v, fp.grid)
    elif component == 'v':
        return FieldPair(fp.u, np.zeros(fp.grid.shape), fp.grid)

    return fp


def _free_norm(gradient: FieldPair, component: Optional[str]) -> float:
    """
    Gradient norm over the components the descent may move
    """
    return _with_zero_component(gradient, component).norm()


def _preference(report: SolveReport) -> Tuple[bool, float]:
    return not report.converged, report.energy


def _precondition(gradient: FieldPair, grid: Grid, shift: float) -> FieldPair:
    return FieldPair(
        solve_shifted_laplacian(gradient.u, grid, shift),
        solve_shifted_laplacian(gradient.v, grid, shift),
        grid,
    )


def _can_recenter(ps: PotentialSet, grid: Grid, opts: SolveOptions) -> bool:
    return opts.recenter_every > 0 and ps.periodic_flag and grid.spec.is_periodic and grid.nodes_per_unit is not None


def recentering_shift(fp: FieldPair) -> Tuple[int, ...]:
    """
    Integer lattice vector that brings the node of largest u² + v² closest to the origin
    """
    density = fp.u ** 2 + fp.v ** 2
    index = np.unravel_index(int(np.argmax(density)), density.shape)
    return tuple(int(round(x)) for x in fp.grid.node_coordinate(index))


def _report(
        current: FieldPair,
        breakdown: EnergyBreakdown,
        grad_norm: float,
        spec: ProblemSpec,
        ps: PotentialSet,
        grid: Grid,
        iterations: int,
        energy_trace: List[float],
        grad_trace: List[float],
        recenters: int,
        converged: bool,
        failure: Optional[str],
) -> SolveReport:
    return SolveReport(
        field=current,
        energy=breakdown.total,
        grad_norm=grad_norm,
        iterations=iterations,
        energy_trace=energy_trace,
        grad_trace=grad_trace,
        recenters_applied=recenters,
        converged=converged,
        nehari_residual=abs(nehari_value_of(breakdown, spec)),
        e_norm_sq=breakdown.e_norm_sq,
        grid_hash=utils.content_hash(grid.spec),
        potential_hash=ps.content_hash(),
        spec_hash=spec.content_hash(),
        failure=failure,
    )


def minimize_ground_state(
        ps: PotentialSet,
        spec: ProblemSpec,
        grid: Grid,
        opts: Optional[SolveOptions] = None,
        initial: Optional[FieldPair] = None,
) -> SolveReport:
    """
    Minimise I over the Nehari manifold: project, step along the H¹-preconditioned negative gradient with
    Armijo backtracking, re-project. Periodic problems are recentred on the lattice every
    `recenter_every` accepted steps.

    Without `initial`, every start of `initial_fields` is descended and the converged run with the lowest
    energy is returned.
    """
    opts = opts or SolveOptions()
    ps.check_grid(grid)
    spec.check_grid(grid)

    if initial is not None:
        return _descend(initial, ps, spec, grid, opts)

    reports = []
    for index, start in enumerate(initial_fields(grid, opts)):
        report = _descend(start, ps, spec, grid, opts)
        log.debug(f"Start {index}: I = {report.energy:.15g}, converged = {report.converged}")
        reports.append(report)

    return min(reports, key=_preference)


def _descend(start: FieldPair, ps: PotentialSet, spec: ProblemSpec, grid: Grid, opts: SolveOptions) -> SolveReport:
    start = _with_zero_component(start, opts.zero_component)

    current, _ = nehari_project(start, ps, spec, grid)
    breakdown, gradient = energy_and_gradient(current, ps, spec, grid)
    grad_norm = _free_norm(gradient, opts.zero_component)

    energy_trace = [breakdown.total]
    grad_trace = [grad_norm]

    recenter = _can_recenter(ps, grid, opts)
    recenters = 0
    step = opts.step0
    iterations = 0
    converged = False
    failure = None

    while iterations < opts.max_iters:
        if grad_norm <= opts.grad_tol:
            converged = True
            break

        direction = _with_zero_component(_precondition(gradient, grid, opts.preconditioner_shift), opts.zero_component)
        slope = gradient.inner(direction)
        if not slope > 0.0:
            failure = f"preconditioned gradient is not a descent direction (slope {slope:g})"
            break

        reference_energy = min(breakdown.total, energy_trace[-1])
        accepted = None
        while step >= opts.min_step:
            try:
                candidate, _ = nehari_project(current.plus(direction, -step), ps, spec, grid)
            except DegenerateNonlinearityError as e:
                failure = f"projection failed at iteration {iterations + 1}: {e}"
                break
            except ZeroFieldError:
                step *= opts.armijo_factor
                continue

            candidate_breakdown, candidate_gradient = energy_and_gradient(candidate, ps, spec, grid)
            decrease = step * slope
            new_energy = candidate_breakdown.total

            sufficient = new_energy <= breakdown.total - opts.sufficient_decrease * decrease
            at_roundoff = decrease <= ROUNDOFF_DECREASE * max(1.0, abs(breakdown.total)) and new_energy <= breakdown.total
            if (sufficient or at_roundoff) and new_energy <= reference_energy:
                accepted = (candidate, candidate_breakdown, candidate_gradient)
                break

            step *= opts.armijo_factor

        if failure is not None:
            break
        if accepted is None:
            failure = f"line search stalled at iteration {iterations + 1} (gradient norm {grad_norm:g})"
            break

        current, breakdown, gradient = accepted
        grad_norm = _free_norm(gradient, opts.zero_component)
        iterations += 1

        energy_trace.append(breakdown.total)
        grad_trace.append(grad_norm)
        step = min(step / opts.armijo_factor, opts.step0)

        if recenter and iterations % opts.recenter_every == 0:
            shift = recentering_shift(current)
            if any(shift):
                current = current.translated(shift)
                breakdown, gradient = energy_and_gradient(current, ps, spec, grid)
                grad_norm = _free_norm(gradient, opts.zero_component)
                recenters += 1
                log.debug(f"Recentred by {shift} at iteration {iterations}")

        if log.is_debug() and opts.log_every and iterations % opts.log_every == 0:
            log.debug(f"Iteration {iterations:,}: I = {breakdown.total:.15g}, |∇I| = {grad_norm:.3e}, step = {step:.3e}")

    if not converged and iterations > 0 and failure is None and grad_norm <= opts.grad_tol:
        converged = True

    if failure is not None:
        log.warn(f"Ground state search stopped: {failure}")

    log.debug(f"Ground state search finished after {iterations:,} iterations: I = {breakdown.total:.15g}, |∇I| = {grad_norm:.3e}, converged = {converged}")

    return _report(current, breakdown, grad_norm, spec, ps, grid, iterations, energy_trace, grad_trace, recenters, converged, failure)


def nonneg_refine(
        report: SolveReport,
        ps: PotentialSet,
        spec: ProblemSpec,
        grid: Grid,
        opts: Optional[SolveOptions] = None,
        polish: bool = True,
) -> SolveReport:
    """
    Replace (u, v) by (|u|, |v|) projected back onto the manifold, then polish with a short descent run
    """
    if not report.converged:
        raise SolverError("nonnegative refinement needs a converged report")

    opts = opts or SolveOptions()
    projected, _ = nehari_project(report.field.absolute(), ps, spec, grid)

    if polish and opts.polish_iters > 0:
        polished = minimize_ground_state(ps, spec, grid, replace(opts, max_iters=opts.polish_iters, recenter_every=0), initial=projected)
        if not polished.field.is_nonnegative():
            projected, _ = nehari_project(polished.field.absolute(), ps, spec, grid)
        else:
            projected = polished.field

        iterations = polished.iterations
        energy_trace = polished.energy_trace
        grad_trace = polished.grad_trace
    else:
        iterations = 0
        energy_trace = []
        grad_trace = []

    breakdown, gradient = energy_and_gradient(projected, ps, spec, grid)
    grad_norm = _free_norm(gradient, opts.zero_component)
    if not energy_trace or energy_trace[-1] != breakdown.total:
        energy_trace = energy_trace + [breakdown.total]
        grad_trace = grad_trace + [grad_norm]

    return _report(
        projected, breakdown, grad_norm, spec, ps, grid, iterations, energy_trace, grad_trace, 0,
        converged=grad_norm <= opts.grad_tol,
        failure=None,
    )


def aubin_talenti_bubble(grid: Grid) -> np.ndarray:
    """
    U(x) = 3^{1/4}(1 + |x|²)^{-1/2}, which solves -ΔU = U⁵ in three dimensions
    """
    return BUBBLE_AMPLITUDE / np.sqrt(1.0 + grid.radius_squared)


def radial_line(nodes: int, half_length: float = RADIAL_HALF_LENGTH) -> Tuple[np.ndarray, float]:
    """
    Interior nodes of a uniform grid on [-T, T] and its spacing
    """
    if nodes < 3:
        raise SolverError(f"the radial line needs at least 3 nodes (got {nodes})")

    step = 2.0 * half_length / (nodes + 1)
    return -half_length + step * np.arange(1, nodes + 1), step


def radial_bubble(t: np.ndarray) -> np.ndarray:
    """
    The bubble in the variable t = ln r, φ(t) = r^{1/2}U(r) = 3^{1/4}(2 cosh t)^{-1/2}
    """
    return BUBBLE_AMPLITUDE / np.sqrt(2.0 * np.cosh(t))


def _radial_operator(phi: np.ndarray, step: float) -> np.ndarray:
    # (-d²/dt² + 1/4)φ, second order, φ = 0 past both ends
    padded = np.pad(phi, 1)
    return (2.0 * phi - padded[:-2] - padded[2:]) / step ** 2 + 0.25 * phi


def _radial_preconditioner(nodes: int, step: float) -> np.ndarray:
    banded = np.empty((3, nodes))
    banded[0] = -1.0 / step ** 2
    banded[1] = 2.0 / step ** 2 + 0.25
    banded[2] = -1.0 / step ** 2
    return banded


def _radial_ratio(phi: np.ndarray, step: float) -> Tuple[float, float, float]:
    gradient_part = step * float(np.dot(phi, _radial_operator(phi, step)))
    sixth = step * float(np.sum(phi ** 6))
    if not sixth > 0.0:
        raise SolverError("the Sobolev quotient is undefined for the zero function")

    return gradient_part / sixth ** (1.0 / 3.0), gradient_part, sixth


def radial_sobolev_quotient(phi: np.ndarray, step: float) -> float:
    """
    ||∇u||₂²/||u||₆² of the radial u(r) = r^{-1/2}φ(ln r) in three dimensions, which equals
    (4π)^{2/3} ∫(φ'² + φ²/4) dt / (∫φ⁶ dt)^{1/3}
    """
    ratio, _, _ = _radial_ratio(phi, step)
    return RADIAL_SPHERE_FACTOR * ratio


def sobolev_threshold(constant: float, dim: int) -> float:
    """
    S^{N/2}/N, the energy level below which compactness is recovered
    """
    return constant ** (dim / 2.0) / dim


def estimate_sobolev_constant(
        grid: Grid,
        max_iters: int = 500,
        grad_tol: float = 1e-6,
        armijo_factor: float = 0.5,
        sufficient_decrease: float = 1e-4,
) -> SobolevEstimate:
    """
    Minimise ||∇u||₂²/||u||₆² over radial functions by preconditioned descent from the bubble.

    Minimisers are radial, and u(r) = r^{-1/2}φ(ln r) turns the quotient into a one-dimensional problem with
    no loss of compactness at small scales: dilations become translations in t. The line [-T, T] carries
    RADIAL_NODES_PER_POINT nodes per grid point, so refining the grid refines the search. The box of the
    grid plays no part.
    """
    if grid.dim != 3:
        raise SolverError(f"the Sobolev constant is estimated in dimension 3 only (got {grid.dim})")

    nodes = RADIAL_NODES_PER_POINT * grid.spec.points_per_dim
    t, step = radial_line(nodes)
    banded = _radial_preconditioner(nodes, step)

    phi = radial_bubble(t)
    ratio, _, sixth = _radial_ratio(phi, step)
    phi = phi / sixth ** (1.0 / 6.0)

    trace = [RADIAL_SPHERE_FACTOR * ratio]
    move = 1.0
    converged = False
    iterations = 0

    while iterations < max_iters:
        # With ∫φ⁶ = 1 the quotient is ∫φKφ and its gradient 2(Kφ - (∫φKφ)φ⁵)
        operator_phi = _radial_operator(phi, step)
        gradient = 2.0 * (operator_phi - ratio * phi ** 5)

        if math.sqrt(step * float(np.dot(gradient, gradient))) <= grad_tol * max(1.0, ratio):
            converged = True
            break

        direction = solve_banded((1, 1), banded, gradient)
        slope = step * float(np.dot(gradient, direction))
        if not slope > 0.0:
            break

        accepted = None
        while move >= 1e-14:
            candidate = phi - move * direction
            try:
                candidate_ratio, _, candidate_sixth = _radial_ratio(candidate, step)
            except SolverError:
                move *= armijo_factor
                continue

            sufficient = candidate_ratio <= ratio - sufficient_decrease * move * slope
            at_roundoff = move * slope <= ROUNDOFF_DECREASE * ratio and candidate_ratio <= ratio
            if sufficient or at_roundoff:
                accepted = (candidate / candidate_sixth ** (1.0 / 6.0), candidate_ratio)
                break

            move *= armijo_factor

        if accepted is None:
            log.debug(f"Sobolev search stalled at iteration {iterations + 1}")
            break

        phi, ratio = accepted
        trace.append(RADIAL_SPHERE_FACTOR * ratio)
        iterations += 1
        move = min(move / armijo_factor, 1.0)

    log.debug(f"Sobolev quotient {trace[-1]:.10g} after {iterations} iterations on {nodes} radial nodes (bubble: {trace[0]:.10g})")

    return SobolevEstimate(
        constant=trace[-1],
        bubble_quotient=trace[0],
        nodes=nodes,
        iterations=iterations,
        converged=converged,
        trace=trace,
    )


def _check_mu_values(mu_values: Sequence[float]) -> List[float]:
    mu_values = [float(mu) for mu in mu_values]
    if not mu_values:
        raise SolverError("mu_values must be non-empty")
    if any(mu < 0.0 or not math.isfinite(mu) for mu in mu_values):
        raise SolverError("mu_values must be finite and nonnegative")
    if any(b <= a for a, b in zip(mu_values, mu_values[1:])):
        raise SolverError("mu_values must be strictly increasing")

    return mu_values


def sweep_mu(
        ps: PotentialSet,
        spec: ProblemSpec,
        grid: Grid,
        mu_values: Sequence[float],
        opts: Optional[SolveOptions] = None,
        warm_start: bool = True,
        workers: int = 1,
        sobolev_constant: Optional[float] = None,
) -> MuSweep:
    """
    One ground state per μ. Every μ gets the fresh starts of `minimize_ground_state`; warm sweeps run in μ order
    and also descend from the previous minimiser, keeping the lower level. Cold sweeps are independent and may
    run on `workers` threads. Failures are recorded per μ and the sweep continues.
    """
    mu_values = _check_mu_values(mu_values)
    opts = opts or SolveOptions()

    threshold = None
    if spec.regime == REGIME_CRITICAL_Q:
        if sobolev_constant is None:
            sobolev_constant = estimate_sobolev_constant(grid).constant
        threshold = sobolev_threshold(sobolev_constant, spec.dim)

    failures: Dict[float, str] = {}

    def solve(mu: float, initial: Optional[FieldPair] = None) -> Optional[SolveReport]:
        candidates = []
        for start in ([initial] if initial is not None else []) + [None]:
            try:
                candidates.append(minimize_ground_state(ps, spec.with_mu(mu), grid, opts, initial=start))
            except CsgsError as e:
                failures[mu] = str(e)

        if not candidates:
            return None

        failures.pop(mu, None)
        report = min(candidates, key=_preference)
        if not report.converged:
            failures[mu] = report.failure or f"not converged after {report.iterations:,} iterations (gradient norm {report.grad_norm:g})"

        return report

    if warm_start:
        reports = []
        previous = None
        for mu in mu_values:
            report = solve(mu, previous.field if previous is not None else None)
            reports.append(report)
            if report is not None:
                previous = report
            log.info(f"mu = {mu:g}: " + (f"c = {report.energy:.12g}" if report else f"failed ({failures[mu]})"))
    else:
        reports = list(thread_map(solve, mu_values, max_workers=max(1, workers), unit='mu', chunksize=1))

    energies = [r.energy if r is not None else None for r in reports]

    mu0_estimate = None
    if threshold is not None:
        for mu, report in zip(mu_values, reports):
            if report is not None and report.converged and report.energy < threshold:
                mu0_estimate = mu
                break

    return MuSweep(
        mu_values=mu_values,
        energies=energies,
        converged=[r is not None and r.converged for r in reports],
        reports=reports,
        failures=failures,
        threshold=threshold,
        sobolev_constant=sobolev_constant,
        mu0_estimate=mu0_estimate,
        warm_start=warm_start,
        workers=workers,
    )


def locate_threshold_crossing(
        ps: PotentialSet,
        spec: ProblemSpec,
        grid: Grid,
        mu_lo: float,
        mu_hi: float,
        threshold: float,
        opts: Optional[SolveOptions] = None,
        tolerance: float = 1e-2,
        max_bisections: int = 30,
) -> Tuple[float, List[Tuple[float, float]]]:
    """
    Bisect on μ for the smallest μ (to `tolerance`) whose ground-state level lies below `threshold`, given
    c(mu_lo) >= threshold > c(mu_hi). Returns the upper end of the final bracket and every (μ, c) evaluated.
    """
    if not 0.0 <= mu_lo < mu_hi:
        raise SolverError(f"invalid bracket [{mu_lo}, {mu_hi}]")

    opts = opts or SolveOptions()
    evaluated = []

    def level(mu: float, initial: Optional[FieldPair]) -> SolveReport:
        report = minimize_ground_state(ps, spec.with_mu(mu), grid, opts)
        if initial is not None:
            report = min(report, minimize_ground_state(ps, spec.with_mu(mu), grid, opts, initial=initial), key=_preference)
        if not report.converged:
            raise SolverError(f"ground state at mu = {mu:g} did not converge: {report.failure or 'iteration budget exhausted'}")
        evaluated.append((mu, report.energy))
        return report

    low = level(mu_lo, None)
    high = level(mu_hi, None)
    if not (low.energy >= threshold > high.energy):
        raise SolverError(
            f"bracket does not straddle the threshold {threshold:g}: c({mu_lo:g}) = {low.energy:g}, c({mu_hi:g}) = {high.energy:g}"
        )

    for _ in range(max_bisections):
        if mu_hi - mu_lo <= tolerance:
            break

        middle = 0.5 * (mu_lo + mu_hi)
        report = level(middle, high.field)
        if report.energy < threshold:
            mu_hi, high = middle, report
        else:
            mu_lo = middle

    return mu_hi, evaluated


def compare_energies(
        report_periodic: SolveReport,
        report_asym: SolveReport,
        margin: float = 0.0,
        slack: float = 1e-9,
) -> ComparisonReport:
    """
    Check c_asymptotic < c_periodic - margin up to `slack`
    """
    if report_periodic.grid_hash != report_asym.grid_hash:
        raise SolverError("cannot compare energies computed on different grids")
    if report_periodic.spec_hash != report_asym.spec_hash:
        raise SolverError("cannot compare energies computed for different problem parameters")

    gap = report_periodic.energy - report_asym.energy

    return ComparisonReport(
        energy_periodic=report_periodic.energy,
        energy_asymptotic=report_asym.energy,
        gap=gap,
        margin=margin,
        slack=slack,
        passed=gap > margin + slack,
    )
