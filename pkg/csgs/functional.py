#!/usr/bin/env python3

# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Tuple

import numpy as np

from csgs import FunctionalError, NonFiniteEnergyError, utils
from csgs.grid import FieldPair, Grid, apply_laplacian, integrate
from csgs.potentials import PotentialSet

REGIME_SUBCRITICAL = 'subcritical'
REGIME_CRITICAL_Q = 'critical-q'
REGIME_CRITICAL_BOTH = 'critical-both'

_EXPONENT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ProblemSpec:
    dim: int
    p: float
    q: float
    mu: float

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise FunctionalError(f"dim must be 1, 2 or 3 (got {self.dim})")
        for name in ('p', 'q', 'mu'):
            if not math.isfinite(getattr(self, name)):
                raise FunctionalError(f"{name} must be finite (got {getattr(self, name)})")
        if not 2.0 < self.p <= self.q:
            raise FunctionalError(f"exponents must satisfy 2 < p <= q (got p={self.p}, q={self.q})")
        if self.mu < 0.0:
            raise FunctionalError(f"mu must be nonnegative (got {self.mu})")

        critical = self.critical_exponent
        if critical is not None and self.q > critical + _EXPONENT_TOLERANCE:
            raise FunctionalError(f"q must not exceed the critical exponent {critical:g} in dimension {self.dim} (got {self.q})")

    @property
    def critical_exponent(self) -> Optional[float]:
        """
        2* = 2d/(d-2), defined for d = 3 only
        """
        if self.dim < 3:
            return None

        return 2.0 * self.dim / (self.dim - 2.0)

    @property
    def regime(self) -> str:
        critical = self.critical_exponent
        if critical is None or abs(self.q - critical) > _EXPONENT_TOLERANCE:
            return REGIME_SUBCRITICAL
        if abs(self.p - critical) <= _EXPONENT_TOLERANCE:
            return REGIME_CRITICAL_BOTH

        return REGIME_CRITICAL_Q

    def with_mu(self, mu: float) -> ProblemSpec:
        return replace(self, mu=float(mu))

    def check_grid(self, grid: Grid) -> None:
        if grid.dim != self.dim:
            raise FunctionalError(f"problem is posed in dimension {self.dim} but the grid has dimension {grid.dim}")

    def content_hash(self) -> str:
        return utils.content_hash(self.dim, self.p, self.q, self.mu)


@dataclass
class EnergyBreakdown:
    quad: float
    coupling: float
    pterm: float
    qterm: float
    total: float
    e_norm_sq: float
    lp_u: float
    lq_v: float


def abs_power(u: np.ndarray, p: float) -> np.ndarray:
    return np.power(np.abs(u), p)


def signed_power(u: np.ndarray, r: float) -> np.ndarray:
    """
    sign(u)|u|^r, continuous at 0 for r > 0
    """
    return np.sign(u) * np.power(np.abs(u), r)


def _check_inputs(fp: FieldPair, ps: PotentialSet, grid: Grid, spec: Optional[ProblemSpec] = None) -> None:
    if fp.grid != grid:
        raise FunctionalError(f"field lives on {fp.grid}, not on {grid}")
    if ps.grid != grid:
        raise FunctionalError(f"potentials were sampled on {ps.grid}, not on {grid}")
    if spec is not None:
        spec.check_grid(grid)


def _quadratic_parts(fp: FieldPair, ps: PotentialSet, grid: Grid) -> Tuple[float, float, float, np.ndarray, np.ndarray]:
    minus_laplacian_u = -apply_laplacian(fp.u, grid)
    minus_laplacian_v = -apply_laplacian(fp.v, grid)

    norm_u = integrate(fp.u * minus_laplacian_u + ps.V1 * fp.u ** 2, grid)
    norm_v = integrate(fp.v * minus_laplacian_v + ps.V2 * fp.v ** 2, grid)
    coupling = 2.0 * integrate(ps.lam * fp.u * fp.v, grid)

    return norm_u, norm_v, coupling, minus_laplacian_u, minus_laplacian_v


def e_norms_squared(fp: FieldPair, ps: PotentialSet, grid: Grid) -> Tuple[float, float]:
    """
    (||u||_{E1}^2, ||v||_{E2}^2) with the gradient terms taken as ∫u(-Δu)
    """
    _check_inputs(fp, ps, grid)
    norm_u, norm_v, _, _, _ = _quadratic_parts(fp, ps, grid)

    return norm_u, norm_v


def quadratic_form(fp: FieldPair, ps: PotentialSet, grid: Grid) -> float:
    _check_inputs(fp, ps, grid)
    norm_u, norm_v, coupling, _, _ = _quadratic_parts(fp, ps, grid)

    return norm_u + norm_v - coupling


def energy(fp: FieldPair, ps: PotentialSet, spec: ProblemSpec, grid: Grid) -> EnergyBreakdown:
    breakdown, _ = energy_and_gradient(fp, ps, spec, grid, with_gradient=False)
    return breakdown


def energy_gradient(fp: FieldPair, ps: PotentialSet, spec: ProblemSpec, grid: Grid) -> FieldPair:
    """
    L²-representative of I'(u, v): pairing it with (φ, ψ) under the grid quadrature gives the directional
    derivative
    """
    _, gradient = energy_and_gradient(fp, ps, spec, grid)
    return gradient


def energy_and_gradient(
        fp: FieldPair,
        ps: PotentialSet,
        spec: ProblemSpec,
        grid: Grid,
        with_gradient: bool = True,
) -> Tuple[EnergyBreakdown, Optional[FieldPair]]:
    _check_inputs(fp, ps, grid, spec)

    with np.errstate(over='ignore', invalid='ignore'):
        norm_u, norm_v, coupling, minus_laplacian_u, minus_laplacian_v = _quadratic_parts(fp, ps, grid)

        lp_u = integrate(abs_power(fp.u, spec.p), grid)
        lq_v = integrate(abs_power(fp.v, spec.q), grid)

        quad = norm_u + norm_v - coupling
        pterm = spec.mu / spec.p * lp_u
        qterm = lq_v / spec.q
        total = quad / 2.0 - pterm - qterm

    if not all(math.isfinite(x) for x in (quad, pterm, qterm, total)):
        raise NonFiniteEnergyError(f"energy is not finite (quadratic part {quad}, p-term {pterm}, q-term {qterm})")

    breakdown = EnergyBreakdown(
        quad=quad,
        coupling=coupling,
        pterm=pterm,
        qterm=qterm,
        total=total,
        e_norm_sq=norm_u + norm_v,
        lp_u=lp_u,
        lq_v=lq_v,
    )

    if not with_gradient:
        return breakdown, None

    with np.errstate(over='ignore', invalid='ignore'):
        gradient_u = minus_laplacian_u + ps.V1 * fp.u - spec.mu * signed_power(fp.u, spec.p - 1.0) - ps.lam * fp.v
        gradient_v = minus_laplacian_v + ps.V2 * fp.v - signed_power(fp.v, spec.q - 1.0) - ps.lam * fp.u

    if not (np.all(np.isfinite(gradient_u)) and np.all(np.isfinite(gradient_v))):
        raise NonFiniteEnergyError("energy gradient is not finite")

    return breakdown, FieldPair(gradient_u, gradient_v, grid)


def nehari_value(fp: FieldPair, ps: PotentialSet, spec: ProblemSpec, grid: Grid) -> float:
    """
    J(u, v) = <I'(u, v), (u, v)> = B - μ||u||_p^p - ||v||_q^q
    """
    breakdown = energy(fp, ps, spec, grid)
    return nehari_value_of(breakdown, spec)


def nehari_value_of(breakdown: EnergyBreakdown, spec: ProblemSpec) -> float:
    return breakdown.quad - spec.mu * breakdown.lp_u - breakdown.lq_v


def fibering_energy(t: float, breakdown: EnergyBreakdown, spec: ProblemSpec) -> float:
    """
    I(tu, tv) from the parts of (u, v)
    """
    return t ** 2 / 2.0 * breakdown.quad - t ** spec.p / spec.p * spec.mu * breakdown.lp_u - t ** spec.q / spec.q * breakdown.lq_v


def energy_lower_bound(breakdown: EnergyBreakdown, spec: ProblemSpec, delta: float) -> float:
    """
    (1/2 - 1/p)(1 - δ)||(u, v)||_E^2, which bounds I from below on the Nehari set
    """
    return (0.5 - 1.0 / spec.p) * (1.0 - delta) * breakdown.e_norm_sq


def nehari_alpha_statistic(breakdowns: Iterable[EnergyBreakdown]) -> Optional[float]:
    """
    Smallest E-norm over a collection of Nehari points. Empirical only: the true constant depends on the
    embedding constant of the continuous space
    """
    norms = [math.sqrt(max(b.e_norm_sq, 0.0)) for b in breakdowns]
    return min(norms) if norms else None
