#!/usr/bin/env python3

# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

import math
from dataclasses import dataclass
from typing import Tuple

from csgs import ZeroFieldError, DegenerateNonlinearityError, NonpositiveQuadraticFormError, FiberingError, log
from csgs.functional import ProblemSpec, EnergyBreakdown, energy
from csgs.grid import FieldPair, Grid
from csgs.potentials import PotentialSet

DEFAULT_TOLERANCE = 1e-12
BRACKET_FACTOR = 4.0
MAX_BRACKET_STEPS = 600
MAX_ROOT_ITERATIONS = 200


@dataclass
class FiberingDiagnostics:
    t_mu: float
    g_at_t: float
    bracket: Tuple[float, float]
    iterations: int
    residual: float


def solve_fibering(
        quad: float,
        a: float,
        b: float,
        p: float,
        q: float,
        tolerance: float = DEFAULT_TOLERANCE,
) -> FiberingDiagnostics:
    """
    Unique positive root of φ(t) = a t^(p-2) + b t^(q-2) - B, where a = μ||u||_p^p and b = ||v||_q^q.
    φ is strictly increasing on (0, ∞) for p, q > 2, a + b > 0 and B > 0.
    """
    if a + b <= 0.0:
        raise DegenerateNonlinearityError(f"no fibering scale exists: μ||u||_p^p + ||v||_q^q = {a + b:g}")
    if quad <= 0.0:
        raise NonpositiveQuadraticFormError(f"quadratic form is not positive (B = {quad:g}); are the potentials validated?")

    def phi(t: float) -> float:
        try:
            return a * t ** (p - 2.0) + b * t ** (q - 2.0) - quad
        except OverflowError:
            return math.inf

    def phi_prime(t: float) -> float:
        try:
            return a * (p - 2.0) * t ** (p - 3.0) + b * (q - 2.0) * t ** (q - 3.0)
        except OverflowError:
            return math.inf

    threshold = tolerance * max(1.0, quad)

    lo = hi = 1.0
    value = phi(1.0)
    steps = 0
    if value < 0.0:
        hi = BRACKET_FACTOR
        while phi(hi) < 0.0:
            lo, hi = hi, hi * BRACKET_FACTOR
            steps += 1
            if steps > MAX_BRACKET_STEPS:
                raise FiberingError(f"unable to bracket the fibering scale above {lo:g}")
    elif value > 0.0:
        lo = 1.0 / BRACKET_FACTOR
        while phi(lo) > 0.0:
            lo, hi = lo / BRACKET_FACTOR, lo
            steps += 1
            if steps > MAX_BRACKET_STEPS:
                raise FiberingError(f"unable to bracket the fibering scale below {hi:g}")
    else:
        lo, hi = 1.0 / BRACKET_FACTOR, BRACKET_FACTOR

    bracket = (lo, hi)
    t = 1.0 if value == 0.0 else (lo * hi) ** 0.5
    iterations = 0

    while iterations < MAX_ROOT_ITERATIONS:
        value = phi(t)
        if abs(value) <= threshold:
            break

        if value < 0.0:
            lo = t
        else:
            hi = t

        # Newton, kept inside the bracket; bisection otherwise
        slope = phi_prime(t)
        candidate = t - value / slope if slope > 0.0 else lo
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)

        iterations += 1
        if candidate == t:
            break
        t = candidate

    residual = abs(phi(t))
    if residual > threshold:
        log.debug(f"Fibering root stalled at t={t:.17g} with residual {residual:g} (tolerance {threshold:g})")

    return FiberingDiagnostics(
        t_mu=t,
        g_at_t=t ** 2 / 2.0 * quad - t ** p / p * a - t ** q / q * b,
        bracket=bracket,
        iterations=iterations,
        residual=residual,
    )


def fibering_scale(
        fp: FieldPair,
        ps: PotentialSet,
        spec: ProblemSpec,
        grid: Grid,
        tolerance: float = DEFAULT_TOLERANCE,
) -> FiberingDiagnostics:
    if fp.is_zero():
        raise ZeroFieldError("the zero pair has no fibering scale")

    breakdown = energy(fp, ps, spec, grid)
    return fibering_scale_of(breakdown, spec, tolerance)


def fibering_scale_of(breakdown: EnergyBreakdown, spec: ProblemSpec, tolerance: float = DEFAULT_TOLERANCE) -> FiberingDiagnostics:
    return solve_fibering(breakdown.quad, spec.mu * breakdown.lp_u, breakdown.lq_v, spec.p, spec.q, tolerance)


def nehari_project(
        fp: FieldPair,
        ps: PotentialSet,
        spec: ProblemSpec,
        grid: Grid,
        tolerance: float = DEFAULT_TOLERANCE,
) -> Tuple[FieldPair, FiberingDiagnostics]:
    """
    (t_μ u, t_μ v): the point of the ray through (u, v) on the Nehari manifold, where t -> I(tu, tv) peaks
    """
    diagnostics = fibering_scale(fp, ps, spec, grid, tolerance)
    return fp.scaled(diagnostics.t_mu), diagnostics
