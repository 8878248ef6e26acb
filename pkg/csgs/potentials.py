#!/usr/bin/env python3

# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from csgs import PotentialError, ValidationError, ConvergenceError, log, utils
from csgs.grid import Grid, apply_laplacian, solve_shifted_laplacian

KIND_CONSTANT = 'constant'
KIND_COSINE_LATTICE = 'cosine_lattice'
KIND_GAUSSIAN_PERTURBED = 'gaussian_perturbed'
KIND_RADIAL_QUADRATIC = 'radial_quadratic'
KIND_CALLBACK = 'callback'
KINDS = (KIND_CONSTANT, KIND_COSINE_LATTICE, KIND_GAUSSIAN_PERTURBED, KIND_RADIAL_QUADRATIC, KIND_CALLBACK)

_KIND_PARAMETERS = {
    KIND_CONSTANT: ('c',),
    KIND_COSINE_LATTICE: ('a', 'b'),
    KIND_GAUSSIAN_PERTURBED: ('base', 'amp', 'sigma'),
    KIND_RADIAL_QUADRATIC: ('c',),
    KIND_CALLBACK: (),
}

RADIAL_ANALYTIC = 'analytic'
RADIAL_FINITE_DIFFERENCE = 'finite-difference'

MODE_PERIODIC = 'periodic'
MODE_PERIODIC_STRICT = 'periodic-strict'
MODE_ASYMPTOTIC = 'asymptotic'
MODE_ASYMPTOTIC_STRICT = 'asymptotic-strict'
MODE_NONEXISTENCE = 'nonexistence'
MODES = (MODE_PERIODIC, MODE_PERIODIC_STRICT, MODE_ASYMPTOTIC, MODE_ASYMPTOTIC_STRICT, MODE_NONEXISTENCE)

DEFAULT_TAIL_TOLERANCE = 1e-2
PERIODICITY_TOLERANCE = 1e-10
RELATIVE_SLACK = 1e-12
NU_FLOOR = 1e-12


@dataclass
class PotentialDef:
    """
    Analytic definition of one of V1, V2 or lambda.

    Callback definitions take the stacked node coordinates (shape (d, ...)) and return the sampled values;
    `radial` (optional) returns <grad f(x), x> the same way. Both may be given as 'module:attribute'
    references in `params` under 'function' and 'radial'.
    """
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)
    function: Optional[Callable[[np.ndarray], np.ndarray]] = None
    radial: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise PotentialError(f"kind must be one of {', '.join(KINDS)} (got '{self.kind}')")

        params = dict(self.params)
        for name in _KIND_PARAMETERS[self.kind]:
            if name not in params or params[name] is None:
                raise PotentialError(f"{self.kind} potential requires parameter '{name}'")

        if self.kind == KIND_GAUSSIAN_PERTURBED:
            if isinstance(params['base'], dict):
                params['base'] = PotentialDef.from_dict(params['base'])
            if float(params['sigma']) <= 0:
                raise PotentialError(f"sigma must be positive (got {params['sigma']})")

        for name, value in params.items():
            if name in ('function', 'radial') or isinstance(value, PotentialDef):
                continue
            try:
                params[name] = float(value)
            except (TypeError, ValueError):
                raise PotentialError(f"parameter '{name}' must be a number (got {value!r})")
            if not np.isfinite(params[name]):
                raise PotentialError(f"parameter '{name}' must be finite (got {value!r})")

        if self.kind == KIND_CALLBACK:
            if self.function is None and params.get('function'):
                self.function = _resolve_callable(params['function'])
            if self.radial is None and params.get('radial'):
                self.radial = _resolve_callable(params['radial'])
            if self.function is None:
                raise PotentialError("callback potential requires 'function'")

        self.params = params

    @classmethod
    def constant(cls, c: float) -> PotentialDef:
        return PotentialDef(KIND_CONSTANT, {'c': c})

    @classmethod
    def cosine_lattice(cls, a: float, b: float) -> PotentialDef:
        return PotentialDef(KIND_COSINE_LATTICE, {'a': a, 'b': b})

    @classmethod
    def gaussian_perturbed(cls, base: Union[float, PotentialDef], amp: float, sigma: float) -> PotentialDef:
        return PotentialDef(KIND_GAUSSIAN_PERTURBED, {'base': base, 'amp': amp, 'sigma': sigma})

    @classmethod
    def radial_quadratic(cls, c: float) -> PotentialDef:
        return PotentialDef(KIND_RADIAL_QUADRATIC, {'c': c})

    @classmethod
    def from_callback(cls, function: Callable, radial: Optional[Callable] = None) -> PotentialDef:
        return PotentialDef(KIND_CALLBACK, {}, function=function, radial=radial)

    @classmethod
    def from_dict(cls, input_dict: Dict) -> PotentialDef:
        if not isinstance(input_dict, dict) or 'kind' not in input_dict:
            raise PotentialError(f"potential definition must be a mapping with a 'kind' (got {input_dict!r})")

        params = {k: v for k, v in input_dict.items() if k != 'kind'}
        return PotentialDef(kind=input_dict['kind'], params=params)

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {'kind': self.kind}
        for name, value in self.params.items():
            result[name] = value.to_dict() if isinstance(value, PotentialDef) else value

        return result

    @property
    def is_periodic(self) -> bool:
        """
        True when the definition is 1-periodic in every coordinate by construction
        """
        if self.kind in (KIND_CONSTANT, KIND_COSINE_LATTICE):
            return True
        if self.kind == KIND_GAUSSIAN_PERTURBED:
            return self.params['amp'] == 0.0 and _base_is_periodic(self.params['base'])

        return False

    @property
    def has_analytic_radial(self) -> bool:
        if self.kind == KIND_CALLBACK:
            return self.radial is not None
        if self.kind == KIND_GAUSSIAN_PERTURBED and isinstance(self.params['base'], PotentialDef):
            return self.params['base'].has_analytic_radial

        return True

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        shape = x.shape[1:]
        radius_squared = np.sum(x ** 2, axis=0)

        if self.kind == KIND_CONSTANT:
            return np.full(shape, self.params['c'])
        elif self.kind == KIND_COSINE_LATTICE:
            return self.params['a'] + self.params['b'] * np.sum(np.cos(2.0 * np.pi * x), axis=0)
        elif self.kind == KIND_GAUSSIAN_PERTURBED:
            sigma = self.params['sigma']
            return _evaluate_base(self.params['base'], x) + self.params['amp'] * np.exp(-radius_squared / sigma ** 2)
        elif self.kind == KIND_RADIAL_QUADRATIC:
            return self.params['c'] * radius_squared
        else:
            return np.broadcast_to(np.asarray(self.function(x), dtype=float), shape).copy()

    def radial_derivative(self, x: np.ndarray, step: float) -> np.ndarray:
        """
        <grad f(x), x> at the given points. Closed form where the kind has one, 4th-order central
        differences with the given step otherwise
        """
        radius_squared = np.sum(x ** 2, axis=0)

        if self.kind == KIND_CONSTANT:
            return np.zeros(x.shape[1:])
        elif self.kind == KIND_COSINE_LATTICE:
            return -2.0 * np.pi * self.params['b'] * np.sum(x * np.sin(2.0 * np.pi * x), axis=0)
        elif self.kind == KIND_GAUSSIAN_PERTURBED:
            sigma = self.params['sigma']
            bump = self.params['amp'] * np.exp(-radius_squared / sigma ** 2)
            return _radial_base(self.params['base'], x, step) - 2.0 * radius_squared / sigma ** 2 * bump
        elif self.kind == KIND_RADIAL_QUADRATIC:
            return 2.0 * self.params['c'] * radius_squared
        elif self.radial is not None:
            return np.broadcast_to(np.asarray(self.radial(x), dtype=float), x.shape[1:]).copy()

        return _finite_difference_radial(self.evaluate, x, step)


def _resolve_callable(reference: Union[str, Callable]) -> Callable:
    if callable(reference):
        return reference

    try:
        return utils.load_callable(str(reference))
    except (ImportError, ValueError) as e:
        raise PotentialError(f"unable to load callback '{reference}': {e}")


def _base_is_periodic(base: Union[float, PotentialDef]) -> bool:
    return base.is_periodic if isinstance(base, PotentialDef) else True


def _evaluate_base(base: Union[float, PotentialDef], x: np.ndarray) -> np.ndarray:
    if isinstance(base, PotentialDef):
        return base.evaluate(x)

    return np.full(x.shape[1:], float(base))


def _radial_base(base: Union[float, PotentialDef], x: np.ndarray, step: float) -> np.ndarray:
    if isinstance(base, PotentialDef):
        return base.radial_derivative(x, step)

    return np.zeros(x.shape[1:])


def _finite_difference_radial(function: Callable[[np.ndarray], np.ndarray], x: np.ndarray, step: float) -> np.ndarray:
    result = np.zeros(x.shape[1:])

    for axis in range(x.shape[0]):
        def shifted(offset: float) -> np.ndarray:
            moved = np.array(x, dtype=float)
            moved[axis] += offset
            return function(moved)

        partial = (-shifted(2 * step) + 8 * shifted(step) - 8 * shifted(-step) + shifted(-2 * step)) / (12 * step)
        result += x[axis] * partial

    return result


@dataclass
class PotentialSet:
    V1: np.ndarray
    V2: np.ndarray
    lam: np.ndarray
    defs: Tuple[PotentialDef, PotentialDef, PotentialDef]
    delta: float
    periodic_flag: bool
    grid: Grid

    _radial: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray, str]] = field(default=None, init=False, repr=False)
    _hash: Optional[str] = field(default=None, init=False, repr=False)

    def radial_derivatives(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, str]:
        """
        (<grad V1, x>, <grad V2, x>, <grad lambda, x>, path) on the nodes, from the analytic definitions
        """
        if self._radial is None:
            x = self.grid.coordinates
            step = self.grid.spacing / 2.0
            derivatives = tuple(d.radial_derivative(x, step) for d in self.defs)

            path = RADIAL_ANALYTIC if all(d.has_analytic_radial for d in self.defs) else RADIAL_FINITE_DIFFERENCE
            self._radial = (derivatives[0], derivatives[1], derivatives[2], path)

        return self._radial

    def content_hash(self) -> str:
        if self._hash is None:
            self._hash = utils.content_hash(self.V1, self.V2, self.lam, self.delta)

        return self._hash

    def check_grid(self, grid: Grid) -> None:
        if self.grid != grid:
            raise ValidationError(f"potentials were sampled on {self.grid}, not on {grid}")


def sample_potentials(
        defs: Tuple[PotentialDef, PotentialDef, PotentialDef],
        delta: float,
        grid: Grid,
        periodic_flag: Optional[bool] = None,
) -> PotentialSet:
    if not 0.0 < delta < 1.0:
        raise PotentialError(f"delta must lie in (0, 1) (got {delta})")
    if len(defs) != 3:
        raise PotentialError(f"expected three potential definitions (V1, V2, lambda), got {len(defs)}")

    x = grid.coordinates
    samples = []
    for name, definition in zip(('V1', 'V2', 'lambda'), defs):
        values = definition.evaluate(x)
        if values.shape != grid.shape:
            raise PotentialError(f"{name} sampled to shape {values.shape}, expected {grid.shape}")
        if not np.all(np.isfinite(values)):
            index = tuple(int(i) for i in np.argwhere(~np.isfinite(values))[0])
            raise PotentialError(f"{name} is not finite at node {grid.node_coordinate(index)}")
        samples.append(values)

    if periodic_flag is None:
        periodic_flag = all(d.is_periodic for d in defs)

    return PotentialSet(
        V1=samples[0],
        V2=samples[1],
        lam=samples[2],
        defs=tuple(defs),
        delta=float(delta),
        periodic_flag=bool(periodic_flag),
        grid=grid,
    )


@dataclass
class AssumptionCheck:
    assumption: str
    subject: str
    passed: bool
    worst_value: float
    bound: float
    coordinate: Optional[Tuple[float, ...]] = None


@dataclass
class ValidationReport:
    mode: str
    checks: List[AssumptionCheck] = field(default_factory=list)
    nu1: Optional[float] = None
    nu2: Optional[float] = None
    radial_constant: Optional[float] = None
    radial_path: Optional[str] = None

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> List[AssumptionCheck]:
        return [c for c in self.checks if not c.passed]

    def assumptions(self) -> List[str]:
        result = []
        for check in self.checks:
            if check.assumption not in result:
                result.append(check.assumption)

        return result

    def passed(self, assumption: str) -> bool:
        relevant = [c for c in self.checks if c.assumption == assumption]
        if not relevant:
            raise KeyError(f"{assumption} was not checked in mode '{self.mode}'")

        return all(c.passed for c in relevant)


def validate_assumptions(
        ps: PotentialSet,
        mode: str,
        grid: Grid,
        reference: Optional[PotentialSet] = None,
        tail_tolerance: float = DEFAULT_TAIL_TOLERANCE,
        estimate_spectrum: bool = True,
        nu_tolerance: float = 1e-8,
        nu_max_iters: int = 1000,
) -> ValidationReport:
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {', '.join(MODES)} (got '{mode}')")

    ps.check_grid(grid)
    report = ValidationReport(mode=mode)

    if mode in (MODE_PERIODIC, MODE_PERIODIC_STRICT):
        coupling = "(V3')" if mode == MODE_PERIODIC_STRICT else '(V3)'
        report.checks.extend(_periodic_checks(ps, grid, '', coupling, strict=mode == MODE_PERIODIC_STRICT))

        if estimate_spectrum:
            report.nu1, report.nu2 = estimate_nu(ps, grid, nu_tolerance, nu_max_iters)
            report.checks.extend(_nu_checks('(V2)', report.nu1, report.nu2))

    elif mode in (MODE_ASYMPTOTIC, MODE_ASYMPTOTIC_STRICT):
        if reference is None:
            raise ValidationError("asymptotic mode requires a reference periodic potential set")
        reference.check_grid(grid)

        report.checks.extend(_periodic_checks(reference, grid, 'reference ', '(V3)', strict=False))
        report.checks.extend(_asymptotic_checks(ps, reference, grid, tail_tolerance))
        report.checks.extend(_nonnegative_checks('(V5)', ps, grid))

        strict = mode == MODE_ASYMPTOTIC_STRICT
        report.checks.extend(_coupling_checks("(V6')" if strict else '(V6)', ps, grid, '', strict))

        if estimate_spectrum:
            report.nu1, report.nu2 = estimate_nu(ps, grid, nu_tolerance, nu_max_iters)
            report.checks.extend(_nu_checks('(V5)', report.nu1, report.nu2))

    else:
        report.checks.extend(_coupling_checks('(V6)', ps, grid, '', strict=False))

        radial_checks, constant, path = _radial_checks(ps, grid)
        report.checks.extend(radial_checks)
        report.radial_constant = constant
        report.radial_path = path

    for failed in report.failed():
        log.debug(f"{failed.assumption} failed for {failed.subject}: worst value {failed.worst_value:g} against {failed.bound:g} at {failed.coordinate}")

    return report


def _pointwise(
        assumption: str,
        subject: str,
        value: np.ndarray,
        bound: np.ndarray,
        grid: Grid,
        strict: bool = False,
        mask: Optional[np.ndarray] = None,
        slack: Union[float, np.ndarray] = 0.0,
) -> AssumptionCheck:
    value = np.broadcast_to(value, grid.shape)
    bound = np.broadcast_to(bound, grid.shape)
    if mask is None:
        mask = np.ones(grid.shape, dtype=bool)

    if not np.any(mask):
        return AssumptionCheck(assumption, subject, True, 0.0, 0.0, None)

    excess = np.where(mask, value - bound, -np.inf)
    index = np.unravel_index(int(np.argmax(excess)), grid.shape)

    if strict:
        passed = bool(np.all(value[mask] < bound[mask]))
    else:
        slack = np.broadcast_to(slack, grid.shape)
        passed = bool(np.all(value[mask] <= bound[mask] + slack[mask]))

    return AssumptionCheck(
        assumption=assumption,
        subject=subject,
        passed=passed,
        worst_value=float(value[index]),
        bound=float(bound[index]),
        coordinate=grid.node_coordinate(index),
    )


def _periodic_checks(ps: PotentialSet, grid: Grid, prefix: str, coupling: str, strict: bool) -> List[AssumptionCheck]:
    nodes_per_unit = grid.nodes_per_unit
    if nodes_per_unit is None or nodes_per_unit >= grid.spec.points_per_dim:
        raise ValidationError(
            f"grid does not resolve period 1: {grid.spec.points_per_dim} nodes on [-{grid.spec.half_width}, "
            f"{grid.spec.half_width}) must give a whole number of nodes per unit length and span more than one period"
        )

    checks = []
    for name, values in (('V1', ps.V1), ('V2', ps.V2), ('lambda', ps.lam)):
        checks.append(_periodicity_check(f"{prefix}{name}", values, grid, nodes_per_unit))

    checks.extend(_nonnegative_checks('(V2)', ps, grid, prefix))
    checks.extend(_coupling_checks(coupling, ps, grid, prefix, strict))

    return checks


def _periodicity_check(subject: str, values: np.ndarray, grid: Grid, nodes_per_unit: int) -> AssumptionCheck:
    tolerance = PERIODICITY_TOLERANCE * max(1.0, float(np.max(np.abs(values))))
    worst_difference = 0.0
    worst_index = None

    n = grid.spec.points_per_dim
    for axis in range(grid.dim):
        here = np.take(values, np.arange(n - nodes_per_unit), axis=axis)
        there = np.take(values, np.arange(nodes_per_unit, n), axis=axis)
        difference = np.abs(there - here)

        flat = int(np.argmax(difference))
        if worst_index is None or difference.flat[flat] > worst_difference:
            worst_difference = float(difference.flat[flat])
            worst_index = np.unravel_index(flat, difference.shape)

    return AssumptionCheck(
        assumption='(V1)',
        subject=subject,
        passed=worst_difference <= tolerance,
        worst_value=worst_difference,
        bound=tolerance,
        coordinate=grid.node_coordinate(worst_index),
    )


def _nonnegative_checks(assumption: str, ps: PotentialSet, grid: Grid, prefix: str = '') -> List[AssumptionCheck]:
    return [
        _pointwise(assumption, f"{prefix}{name} >= 0", -values, 0.0, grid)
        for name, values in (('V1', ps.V1), ('V2', ps.V2))
    ]


def _coupling_checks(assumption: str, ps: PotentialSet, grid: Grid, prefix: str, strict: bool) -> List[AssumptionCheck]:
    bound = ps.delta * np.sqrt(np.maximum(ps.V1, 0.0) * np.maximum(ps.V2, 0.0))
    magnitude = np.abs(ps.lam)
    checks = [
        _pointwise(assumption, f"{prefix}|lambda| <= delta*sqrt(V1*V2)", magnitude, bound, grid,
                   slack=RELATIVE_SLACK * np.maximum(1.0, bound)),
    ]

    if strict:
        checks.append(_pointwise(assumption, f"{prefix}lambda > 0", -ps.lam, 0.0, grid, strict=True))

    return checks


def _asymptotic_checks(ps: PotentialSet, reference: PotentialSet, grid: Grid, tail_tolerance: float) -> List[AssumptionCheck]:
    shell = grid.shell_mask()
    inner = ~shell

    # Sampled differences underflow to ties far out, so the strict order is only asked of the inner nodes
    return [
        _pointwise('(V4)', 'V1 < reference V1', ps.V1, reference.V1, grid, strict=True, mask=inner),
        _pointwise('(V4)', 'V2 < reference V2', ps.V2, reference.V2, grid, strict=True, mask=inner),
        _pointwise('(V4)', 'reference lambda < lambda', reference.lam, ps.lam, grid, strict=True, mask=inner),
        _pointwise('(V4)', '|reference V1 - V1| decays', np.abs(reference.V1 - ps.V1), tail_tolerance, grid, mask=shell),
        _pointwise('(V4)', '|reference V2 - V2| decays', np.abs(reference.V2 - ps.V2), tail_tolerance, grid, mask=shell),
        _pointwise('(V4)', '|lambda - reference lambda| decays', np.abs(ps.lam - reference.lam), tail_tolerance, grid, mask=shell),
    ]


def _nu_checks(assumption: str, nu1: float, nu2: float) -> List[AssumptionCheck]:
    return [
        AssumptionCheck(assumption, f"nu of {name} > 0", nu > NU_FLOOR, nu, NU_FLOOR)
        for name, nu in (('V1', nu1), ('V2', nu2))
    ]


def _radial_checks(ps: PotentialSet, grid: Grid) -> Tuple[List[AssumptionCheck], float, str]:
    radial_v1, radial_v2, radial_lam, path = ps.radial_derivatives()

    checks = []
    constants = []
    for name, values, radial in (('V1', ps.V1, radial_v1), ('V2', ps.V2, radial_v2)):
        slack = RELATIVE_SLACK * max(1.0, float(np.max(np.abs(radial))))
        checks.append(_pointwise('(V7)', f"{name} >= 0", -values, 0.0, grid))
        checks.append(_pointwise('(V7)', f"<grad {name}, x> >= 0", -radial, 0.0, grid, slack=slack))

        constant = _smallest_constant(radial, values, slack)
        constants.append(constant)
        checks.append(AssumptionCheck('(V7)', f"<grad {name}, x> <= C*{name}", bool(np.isfinite(constant)), constant, np.inf))

    slack = RELATIVE_SLACK * max(1.0, float(np.max(np.abs(radial_lam))))
    checks.append(_pointwise('(V8)', '<grad lambda, x> <= 0', radial_lam, 0.0, grid, slack=slack))

    constant = _smallest_constant(np.abs(radial_lam), np.abs(ps.lam), slack)
    constants.append(constant)
    checks.append(AssumptionCheck('(V8)', '|<grad lambda, x>| <= C*|lambda|', bool(np.isfinite(constant)), constant, np.inf))

    return checks, max(constants), path


def _smallest_constant(radial: np.ndarray, values: np.ndarray, slack: float) -> float:
    """
    Smallest C with radial <= C*values on every node (values >= 0)
    """
    positive = values > 0.0
    if np.any(~positive & (radial > slack)):
        return float('inf')
    if not np.any(positive):
        return 0.0

    return max(0.0, float(np.max(radial[positive] / values[positive])))


def estimate_nu(ps: PotentialSet, grid: Grid, tolerance: float = 1e-8, max_iters: int = 1000) -> Tuple[float, float]:
    ps.check_grid(grid)

    return (
        smallest_eigenvalue(ps.V1, grid, tolerance, max_iters),
        smallest_eigenvalue(ps.V2, grid, tolerance, max_iters),
    )


def smallest_eigenvalue(potential: np.ndarray, grid: Grid, tolerance: float = 1e-8, max_iters: int = 1000) -> float:
    """
    Smallest eigenvalue of -Δ + V on the grid by shifted inverse power iteration. The shifted operator is
    inverted with preconditioned conjugate gradients.
    """
    grid.check(potential, 'potential')

    shape = grid.shape
    size = potential.size
    shift = float(np.min(potential)) - 1.0
    preconditioner_shift = float(np.mean(potential)) - shift

    def hamiltonian(x: np.ndarray) -> np.ndarray:
        return -apply_laplacian(x, grid) + potential * x

    operator = LinearOperator(
        shape=(size, size),
        matvec=lambda x: (hamiltonian(x.reshape(shape)) - shift * x.reshape(shape)).ravel(),
        dtype=np.float64,
    )
    preconditioner = LinearOperator(
        shape=(size, size),
        matvec=lambda x: solve_shifted_laplacian(x.reshape(shape), grid, preconditioner_shift).ravel(),
        dtype=np.float64,
    )

    vector = np.ones(shape) / np.sqrt(size)
    eigenvalue = float(np.vdot(vector, hamiltonian(vector)))

    for iteration in range(max_iters):
        solution, info = cg(operator, vector.ravel(), x0=vector.ravel(), rtol=1e-13, atol=0.0, maxiter=10 * size, M=preconditioner)
        if info < 0:
            raise ConvergenceError(f"conjugate gradients broke down while estimating the spectral infimum (info={info})")

        vector = solution.reshape(shape)
        vector /= np.linalg.norm(vector)

        updated = float(np.vdot(vector, hamiltonian(vector)))
        if abs(updated - eigenvalue) <= 1e-2 * tolerance * max(1.0, abs(updated)):
            log.debug(f"Spectral infimum {updated:.12g} after {iteration + 1} inverse iterations")
            return updated

        eigenvalue = updated

    raise ConvergenceError(f"inverse power iteration did not converge in {max_iters} iterations (last estimate {eigenvalue:g})")
