#!/usr/bin/env python3

# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from csgs import FunctionalError, ValidationError, log
from csgs.functional import ProblemSpec, REGIME_CRITICAL_BOTH, energy_gradient
from csgs.grid import FieldPair, Grid, integrate
from csgs.potentials import PotentialSet, ValidationReport, MODE_NONEXISTENCE

CRITICAL_POINT_TOLERANCE = 1e-3
SIGN_SLACK = 1e-12

TERM_MU_U = 'mu_u_critical'
TERM_V = 'v_critical'
TERM_COUPLING = 'coupling'
TERM_RADIAL_LAMBDA = 'radial_lambda'
TERM_POTENTIALS = 'potentials'
TERM_RADIAL_POTENTIALS = 'radial_potentials'
TERM_CUTOFF = 'cutoff'

# The Pohozaev cutoff falls from 1 to 0 between these fractions of L
CUTOFF_INNER = 0.4
CUTOFF_OUTER = 0.8


@dataclass
class PohozaevReport:
    lhs: float
    rhs: float
    residual: float
    relative: float
    terms: Dict[str, float] = field(default_factory=dict)
    shell_magnitude: float = 0.0
    grad_norm: float = 0.0
    critical_point: bool = False

    def summary(self) -> Dict:
        return {
            'lhs': self.lhs,
            'rhs': self.rhs,
            'residual': self.residual,
            'relative': self.relative,
            'terms': dict(self.terms),
            'shell_magnitude': self.shell_magnitude,
            'grad_norm': self.grad_norm,
            'critical_point': self.critical_point,
        }


@dataclass
class NonexistenceCertificate:
    """
    The two opposing sign constraints evaluated on a positive candidate.

    `q_value` is Q = ∫(V1u² + V2v² - 2λuv), nonnegative under the coupling bound. `pohozaev_side` is
    P = ∫<∇λ,x>uv - ½∫(<∇V1,x>u² + <∇V2,x>v²), which a solution would have to match (Q = P) and which the
    radial monotonicity assumptions make nonpositive. `margin` = Q - P.
    """
    q_value: float
    pohozaev_side: float
    margin: float
    ordered_lower: float
    ordered_delta: Optional[float]
    strict_gap: Optional[float]
    lambda_sign: Optional[int]
    q_nonnegative: bool
    pohozaev_side_nonpositive: bool
    contradiction: bool
    scale: float

    def summary(self) -> Dict:
        return {
            'q_value': self.q_value,
            'pohozaev_side': self.pohozaev_side,
            'margin': self.margin,
            'ordered_lower': self.ordered_lower,
            'ordered_delta': self.ordered_delta,
            'strict_gap': self.strict_gap,
            'lambda_sign': self.lambda_sign,
            'q_nonnegative': self.q_nonnegative,
            'pohozaev_side_nonpositive': self.pohozaev_side_nonpositive,
            'contradiction': self.contradiction,
        }


def _check_critical(spec: ProblemSpec, grid: Grid) -> None:
    spec.check_grid(grid)
    if spec.regime != REGIME_CRITICAL_BOTH:
        raise FunctionalError(f"the identity needs d = 3 and p = q = 6 (got d={spec.dim}, p={spec.p:g}, q={spec.q:g})")


def pohozaev_cutoff(grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    """
    Smooth radial cutoff ψ, equal to 1 for |x| <= CUTOFF_INNER·L and to 0 for |x| >= CUTOFF_OUTER·L,
    together with <x, ∇ψ>
    """
    inner = CUTOFF_INNER * grid.spec.half_width
    outer = CUTOFF_OUTER * grid.spec.half_width
    r = np.sqrt(grid.radius_squared)
    s = (r - inner) / (outer - inner)

    psi = np.where(s <= 0.0, 1.0, 0.0)
    slope = np.zeros(grid.shape)

    ramp = (s > 0.0) & (s < 1.0)
    s = s[ramp]
    rising = np.exp(-1.0 / s)
    falling = np.exp(-1.0 / (1.0 - s))
    psi[ramp] = falling / (falling + rising)
    slope[ramp] = -r[ramp] / (outer - inner) * falling * rising * (1.0 / s ** 2 + 1.0 / (1.0 - s) ** 2) / (falling + rising) ** 2

    return psi, slope


def pohozaev_residual(
        fp: FieldPair,
        ps: PotentialSet,
        spec: ProblemSpec,
        grid: Grid,
        grad_tol: float = CRITICAL_POINT_TOLERANCE,
) -> PohozaevReport:
    """
    Both sides of the Pohozaev identity in d = 3 with p = q = 2* = 6, localised by the cutoff ψ of
    `pohozaev_cutoff`. Every integral carries the weight ψ, and the terms with <x, ∇ψ> are collected in
    TERM_CUTOFF, so that a solution satisfies lhs = rhs inside the box whatever it does near the boundary.
    First derivatives are central differences and radial derivatives of the potentials come from their
    analytic definitions.
    """
    _check_critical(spec, grid)
    ps.check_grid(grid)
    if fp.grid != grid:
        raise FunctionalError(f"field lives on {fp.grid}, not on {grid}")

    u, v = fp.u, fp.v
    critical = spec.critical_exponent
    n = float(spec.dim)
    radial_v1, radial_v2, radial_lam, _ = ps.radial_derivatives()

    psi, slope = pohozaev_cutoff(grid)
    x = grid.coordinates
    radius_squared = grid.radius_squared
    rate = np.divide(slope, radius_squared, out=np.zeros(grid.shape), where=radius_squared > 0.0)

    gradient_energy = np.zeros(grid.shape)
    cutoff_gradient = 0.0
    for w in (u, v):
        partials = np.gradient(w, grid.spacing)
        squared = sum(d ** 2 for d in partials)
        dilation = sum(x[axis] * partials[axis] for axis in range(grid.dim))
        gradient_energy += squared
        cutoff_gradient += integrate(-0.5 * slope * squared + rate * dilation ** 2, grid)

    lhs = integrate(psi * gradient_energy, grid)

    cutoff_nonlinear = integrate(
        slope * (
            -spec.mu / critical * np.abs(u) ** critical
            - np.abs(v) ** critical / critical
            - ps.lam * u * v
            + 0.5 * (ps.V1 * u ** 2 + ps.V2 * v ** 2)
        ),
        grid,
    )

    terms = {
        TERM_MU_U: spec.mu * integrate(psi * np.abs(u) ** critical, grid),
        TERM_V: integrate(psi * np.abs(v) ** critical, grid),
        TERM_COUPLING: critical * integrate(psi * ps.lam * u * v, grid),
        TERM_RADIAL_LAMBDA: 2.0 / (n - 2.0) * integrate(psi * radial_lam * u * v, grid),
        TERM_POTENTIALS: -critical / 2.0 * integrate(psi * (ps.V1 * u ** 2 + ps.V2 * v ** 2), grid),
        TERM_RADIAL_POTENTIALS: -1.0 / (n - 2.0) * integrate(psi * (radial_v1 * u ** 2 + radial_v2 * v ** 2), grid),
        TERM_CUTOFF: 2.0 / (n - 2.0) * (cutoff_gradient - cutoff_nonlinear),
    }
    rhs = sum(terms.values())
    residual = abs(lhs - rhs)

    shell = grid.shell_mask()
    shell_magnitude = float(max(np.max(np.abs(u[shell]), initial=0.0), np.max(np.abs(v[shell]), initial=0.0)))

    grad_norm = energy_gradient(fp, ps, spec, grid).norm()
    critical_point = grad_norm <= grad_tol
    if not critical_point:
        log.debug(f"Pohozaev residual evaluated away from a critical point (|∇I| = {grad_norm:.3e}): not a critical point")

    return PohozaevReport(
        lhs=lhs,
        rhs=rhs,
        residual=residual,
        relative=residual / max(1.0, abs(lhs)),
        terms=terms,
        shell_magnitude=shell_magnitude,
        grad_norm=grad_norm,
        critical_point=critical_point,
    )


def nonexistence_certificate(
        fp: FieldPair,
        ps: PotentialSet,
        spec: ProblemSpec,
        grid: Grid,
        validation: Optional[ValidationReport] = None,
) -> NonexistenceCertificate:
    """
    Quantify, for one positive candidate, how far the Nehari and Pohozaev identities are from holding together
    """
    _check_critical(spec, grid)
    ps.check_grid(grid)
    if fp.grid != grid:
        raise FunctionalError(f"field lives on {fp.grid}, not on {grid}")

    if validation is not None:
        if validation.mode != MODE_NONEXISTENCE:
            raise ValidationError(f"certificate needs a '{MODE_NONEXISTENCE}' validation (got '{validation.mode}')")
        if not validation.overall:
            failed = ', '.join(sorted({c.assumption for c in validation.failed()}))
            raise ValidationError(f"certificate needs validated potentials; failed: {failed}")

    for name, component in (('u', fp.u), ('v', fp.v)):
        if not np.all(component > 0.0):
            index = tuple(int(i) for i in np.argwhere(~(component > 0.0))[0])
            raise ValidationError(
                f"candidate is not positive: {name} = {component[index]:g} at node {grid.node_coordinate(index)}"
            )

    u, v = fp.u, fp.v
    radial_v1, radial_v2, radial_lam, _ = ps.radial_derivatives()

    potential_part = integrate(ps.V1 * u ** 2 + ps.V2 * v ** 2, grid)
    coupling_part = integrate(ps.lam * u * v, grid)
    q_value = potential_part - 2.0 * coupling_part

    pohozaev_side = integrate(radial_lam * u * v, grid) - 0.5 * integrate(radial_v1 * u ** 2 + radial_v2 * v ** 2, grid)

    ordered_lower = potential_part - 2.0 * integrate(np.sqrt(np.maximum(ps.V1, 0.0) * np.maximum(ps.V2, 0.0)) * u * v, grid)

    if np.all(ps.lam >= 0.0) and np.any(ps.lam > 0.0):
        lambda_sign = 1
    elif np.all(ps.lam <= 0.0) and np.any(ps.lam < 0.0):
        lambda_sign = -1
    elif not np.any(ps.lam):
        lambda_sign = 0
    else:
        lambda_sign = None

    # The 2/δ comparison only holds when λ keeps one sign
    ordered_delta = None
    strict_gap = None
    if lambda_sign is not None:
        ordered_delta = potential_part - 2.0 / ps.delta * coupling_part
        strict_gap = q_value - ordered_delta

    scale = max(1.0, abs(potential_part), 2.0 * integrate(np.abs(ps.lam * u * v), grid))
    slack = SIGN_SLACK * scale
    margin = q_value - pohozaev_side

    certificate = NonexistenceCertificate(
        q_value=q_value,
        pohozaev_side=pohozaev_side,
        margin=margin,
        ordered_lower=ordered_lower,
        ordered_delta=ordered_delta,
        strict_gap=strict_gap,
        lambda_sign=lambda_sign,
        q_nonnegative=q_value >= -slack,
        pohozaev_side_nonpositive=pohozaev_side <= slack,
        contradiction=margin > slack,
        scale=scale,
    )

    log.debug(f"Nonexistence certificate: Q = {q_value:.12g}, P = {pohozaev_side:.12g}, margin = {margin:.12g}")

    return certificate
