#!/usr/bin/env python3

# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

from csgs import ConfigError, CsgsError
from csgs.functional import ProblemSpec
from csgs.grid import GridSpec, Grid, BOUNDARY_PERIODIC, LAPLACIAN_SPECTRAL
from csgs.potentials import (
    PotentialDef, PotentialSet, MODES, MODE_PERIODIC, MODE_ASYMPTOTIC, MODE_ASYMPTOTIC_STRICT, DEFAULT_TAIL_TOLERANCE,
    sample_potentials,
)
from csgs.solver import SolveOptions

POTENTIAL_NAMES = ('V1', 'V2', 'lambda')

POHOZAEV_CANDIDATE_BUBBLE = 'bubble'
POHOZAEV_CANDIDATE_FILE = 'file'
POHOZAEV_CANDIDATES = (POHOZAEV_CANDIDATE_BUBBLE, POHOZAEV_CANDIDATE_FILE)

SECTIONS = (
    'grid', 'problem', 'potentials', 'reference_potentials', 'solver', 'sweep', 'compare', 'sobolev', 'pohozaev',
    'output',
)


@dataclass
class PotentialsConfig:
    defs: Tuple[PotentialDef, PotentialDef, PotentialDef]
    delta: float
    mode: str = MODE_PERIODIC
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE
    estimate_nu: bool = True

    def sample(self, grid: Grid) -> PotentialSet:
        return sample_potentials(self.defs, self.delta, grid)


@dataclass
class SweepConfig:
    mu_values: Optional[List[float]] = None
    warm_start: bool = True
    workers: int = 1
    sobolev_constant: Optional[float] = None


@dataclass
class CompareConfig:
    margin: float = 0.0
    slack: float = 1e-9


@dataclass
class SobolevConfig:
    refinements: List[int] = field(default_factory=list)
    max_iters: int = 500
    grad_tol: float = 1e-6


@dataclass
class PohozaevConfig:
    refinements: List[int] = field(default_factory=list)
    candidate: str = POHOZAEV_CANDIDATE_BUBBLE
    candidate_file: Optional[str] = None
    certificate: bool = False


@dataclass
class OutputConfig:
    write_field: bool = True
    refine: bool = False


@dataclass
class RunConfig:
    """
    Parsed run configuration. Every range constraint is checked by `from_dict`; `to_dict` gives the canonical
    form, which parses back to an equal configuration.
    """
    grid: GridSpec
    problem: ProblemSpec
    potentials: PotentialsConfig
    reference: Optional[Tuple[PotentialDef, PotentialDef, PotentialDef]] = None
    solver: SolveOptions = field(default_factory=SolveOptions)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    compare: CompareConfig = field(default_factory=CompareConfig)
    sobolev: SobolevConfig = field(default_factory=SobolevConfig)
    pohozaev: PohozaevConfig = field(default_factory=PohozaevConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @classmethod
    def from_dict(cls, config: Mapping[str, Any]) -> RunConfig:
        if not isinstance(config, Mapping):
            raise ConfigError("config", "must be a mapping")
        _reject_unknown('', config, SECTIONS)

        grid_spec = _parse_grid(_section(config, 'grid', required=True))
        problem = _parse_problem(_section(config, 'problem', required=True), grid_spec.dim)
        potentials = _parse_potentials(_section(config, 'potentials', required=True))

        reference = None
        reference_section = _section(config, 'reference_potentials')
        if reference_section:
            _reject_unknown('reference_potentials', reference_section, POTENTIAL_NAMES)
            reference = _parse_defs('reference_potentials', reference_section)
        elif potentials.mode in (MODE_ASYMPTOTIC, MODE_ASYMPTOTIC_STRICT):
            raise ConfigError('reference_potentials', f"is required in '{potentials.mode}' mode")

        return RunConfig(
            grid=grid_spec,
            problem=problem,
            potentials=potentials,
            reference=reference,
            solver=_parse_solver(_section(config, 'solver')),
            sweep=_parse_sweep(_section(config, 'sweep')),
            compare=_parse_compare(_section(config, 'compare')),
            sobolev=_parse_sobolev(_section(config, 'sobolev')),
            pohozaev=_parse_pohozaev(_section(config, 'pohozaev')),
            output=_parse_output(_section(config, 'output')),
        )

    def to_dict(self) -> Dict[str, Any]:
        result = {
            'grid': {
                'dim': self.grid.dim,
                'L': self.grid.half_width,
                'n': self.grid.points_per_dim,
                'boundary': self.grid.boundary,
                'laplacian': self.grid.laplacian_mode,
            },
            'problem': {'p': self.problem.p, 'q': self.problem.q, 'mu': self.problem.mu},
            'potentials': {
                **{name: d.to_dict() for name, d in zip(POTENTIAL_NAMES, self.potentials.defs)},
                'delta': self.potentials.delta,
                'mode': self.potentials.mode,
                'tail_tolerance': self.potentials.tail_tolerance,
                'estimate_nu': self.potentials.estimate_nu,
            },
            'solver': dataclasses.asdict(self.solver),
            'sweep': dataclasses.asdict(self.sweep),
            'compare': dataclasses.asdict(self.compare),
            'sobolev': dataclasses.asdict(self.sobolev),
            'pohozaev': dataclasses.asdict(self.pohozaev),
            'output': dataclasses.asdict(self.output),
        }

        if self.reference is not None:
            result['reference_potentials'] = {name: d.to_dict() for name, d in zip(POTENTIAL_NAMES, self.reference)}

        return result

    def build_grid(self, points_per_dim: Optional[int] = None) -> Grid:
        spec = self.grid if points_per_dim is None else self.grid.with_points(points_per_dim)
        return Grid(spec)

    def with_seed(self, seed: int) -> RunConfig:
        return dataclasses.replace(self, solver=dataclasses.replace(self.solver, seed=int(seed)))


def _section(config: Mapping[str, Any], name: str, required: bool = False) -> Mapping[str, Any]:
    section = config.get(name)
    if section is None:
        if required:
            raise ConfigError(name, "section is required")
        return {}
    if not isinstance(section, Mapping):
        raise ConfigError(name, f"must be a mapping (got {type(section).__name__})")

    return section


def _reject_unknown(section: str, values: Mapping[str, Any], known) -> None:
    for key in values:
        if key not in known:
            raise ConfigError(f"{section}.{key}" if section else str(key), f"unknown key (expected one of {', '.join(known)})")


def _get(section: str, values: Mapping[str, Any], key: str, kind, default: Any = None, required: bool = False) -> Any:
    value = values.get(key)
    if value is None:
        if required:
            raise ConfigError(f"{section}.{key}", "is required")
        return default

    try:
        if kind is bool:
            if not isinstance(value, bool):
                raise ValueError(f"expected true or false, got {value!r}")
            return value
        if kind is int:
            if isinstance(value, bool) or float(value) != int(value):
                raise ValueError(f"expected an integer, got {value!r}")
            return int(value)
        if kind is float and isinstance(value, bool):
            raise ValueError(f"expected a number, got {value!r}")

        return kind(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{section}.{key}", str(e))


def _wrap(key: str, build):
    try:
        return build()
    except ConfigError:
        raise
    except CsgsError as e:
        raise ConfigError(key, str(e))


def _parse_grid(values: Mapping[str, Any]) -> GridSpec:
    _reject_unknown('grid', values, ('dim', 'L', 'n', 'boundary', 'laplacian'))

    return _wrap('grid', lambda: GridSpec(
        dim=_get('grid', values, 'dim', int, required=True),
        half_width=_get('grid', values, 'L', float, required=True),
        points_per_dim=_get('grid', values, 'n', int, required=True),
        boundary=_get('grid', values, 'boundary', str, BOUNDARY_PERIODIC),
        laplacian_mode=_get('grid', values, 'laplacian', str, LAPLACIAN_SPECTRAL),
    ))


def _parse_problem(values: Mapping[str, Any], dim: int) -> ProblemSpec:
    _reject_unknown('problem', values, ('p', 'q', 'mu'))

    return _wrap('problem', lambda: ProblemSpec(
        dim=dim,
        p=_get('problem', values, 'p', float, required=True),
        q=_get('problem', values, 'q', float, required=True),
        mu=_get('problem', values, 'mu', float, 0.0),
    ))


def _parse_defs(section: str, values: Mapping[str, Any]) -> Tuple[PotentialDef, PotentialDef, PotentialDef]:
    defs = []
    for name in POTENTIAL_NAMES:
        value = values.get(name)
        key = f"{section}.{name}"
        if value is None:
            raise ConfigError(key, "is required")
        if isinstance(value, bool):
            raise ConfigError(key, f"expected a number or a potential definition, got {value!r}")
        if isinstance(value, (int, float)):
            defs.append(_wrap(key, lambda: PotentialDef.constant(float(value))))
        elif isinstance(value, Mapping):
            plain = {k: (dict(v) if isinstance(v, Mapping) else v) for k, v in value.items()}
            defs.append(_wrap(key, lambda: PotentialDef.from_dict(plain)))
        else:
            raise ConfigError(key, f"expected a number or a potential definition, got {value!r}")

    return defs[0], defs[1], defs[2]


def _parse_potentials(values: Mapping[str, Any]) -> PotentialsConfig:
    _reject_unknown('potentials', values, POTENTIAL_NAMES + ('delta', 'mode', 'tail_tolerance', 'estimate_nu'))

    delta = _get('potentials', values, 'delta', float, required=True)
    if not 0.0 < delta < 1.0:
        raise ConfigError('potentials.delta', f"must lie in (0, 1) (got {delta})")

    mode = _get('potentials', values, 'mode', str, MODE_PERIODIC)
    if mode not in MODES:
        raise ConfigError('potentials.mode', f"must be one of {', '.join(MODES)} (got '{mode}')")

    tail_tolerance = _get('potentials', values, 'tail_tolerance', float, DEFAULT_TAIL_TOLERANCE)
    if not tail_tolerance > 0.0:
        raise ConfigError('potentials.tail_tolerance', f"must be positive (got {tail_tolerance})")

    return PotentialsConfig(
        defs=_parse_defs('potentials', values),
        delta=delta,
        mode=mode,
        tail_tolerance=tail_tolerance,
        estimate_nu=_get('potentials', values, 'estimate_nu', bool, True),
    )


_SOLVER_TYPES = {
    'max_iters': int,
    'grad_tol': float,
    'step0': float,
    'armijo_factor': float,
    'sufficient_decrease': float,
    'recenter_every': int,
    'seed': int,
    'init': str,
    'init_file': str,
    'starts': int,
    'min_step': float,
    'polish_iters': int,
    'preconditioner_shift': float,
    'zero_component': str,
    'log_every': int,
}


def _parse_solver(values: Mapping[str, Any]) -> SolveOptions:
    _reject_unknown('solver', values, tuple(_SOLVER_TYPES))

    kwargs = {}
    for key, kind in _SOLVER_TYPES.items():
        value = _get('solver', values, key, kind)
        if value is not None:
            kwargs[key] = value

    return _wrap('solver', lambda: SolveOptions(**kwargs))


def _parse_sweep(values: Mapping[str, Any]) -> SweepConfig:
    _reject_unknown('sweep', values, ('mu_values', 'warm_start', 'workers', 'sobolev_constant'))

    mu_values = values.get('mu_values')
    if mu_values is not None:
        if not isinstance(mu_values, list):
            raise ConfigError('sweep.mu_values', f"must be a list (got {mu_values!r})")
        if not mu_values:
            raise ConfigError('sweep.mu_values', "mu_values must be non-empty")
        try:
            mu_values = [float(mu) for mu in mu_values]
        except (TypeError, ValueError):
            raise ConfigError('sweep.mu_values', f"must hold numbers (got {mu_values!r})")
        if any(mu < 0.0 for mu in mu_values):
            raise ConfigError('sweep.mu_values', "must be nonnegative")
        if any(b <= a for a, b in zip(mu_values, mu_values[1:])):
            raise ConfigError('sweep.mu_values', "must be strictly increasing")

    workers = _get('sweep', values, 'workers', int, 1)
    if workers < 1:
        raise ConfigError('sweep.workers', f"must be at least 1 (got {workers})")

    sobolev_constant = _get('sweep', values, 'sobolev_constant', float)
    if sobolev_constant is not None and not sobolev_constant > 0.0:
        raise ConfigError('sweep.sobolev_constant', f"must be positive (got {sobolev_constant})")

    return SweepConfig(
        mu_values=mu_values,
        warm_start=_get('sweep', values, 'warm_start', bool, True),
        workers=workers,
        sobolev_constant=sobolev_constant,
    )


def _parse_compare(values: Mapping[str, Any]) -> CompareConfig:
    _reject_unknown('compare', values, ('margin', 'slack'))

    slack = _get('compare', values, 'slack', float, 1e-9)
    if slack < 0.0:
        raise ConfigError('compare.slack', f"must be nonnegative (got {slack})")

    return CompareConfig(margin=_get('compare', values, 'margin', float, 0.0), slack=slack)


def _parse_refinements(section: str, values: Mapping[str, Any]) -> List[int]:
    refinements = values.get('refinements') or []
    if not isinstance(refinements, list):
        raise ConfigError(f"{section}.refinements", f"must be a list (got {refinements!r})")

    result = []
    for n in refinements:
        if isinstance(n, bool) or not isinstance(n, int) or n < 4 or n % 2:
            raise ConfigError(f"{section}.refinements", f"must hold even integers of at least 4 (got {n!r})")
        result.append(n)

    if any(b <= a for a, b in zip(result, result[1:])):
        raise ConfigError(f"{section}.refinements", "must be strictly increasing")

    return result


def _parse_sobolev(values: Mapping[str, Any]) -> SobolevConfig:
    _reject_unknown('sobolev', values, ('refinements', 'max_iters', 'grad_tol'))

    max_iters = _get('sobolev', values, 'max_iters', int, 500)
    if max_iters < 0:
        raise ConfigError('sobolev.max_iters', f"must be nonnegative (got {max_iters})")

    grad_tol = _get('sobolev', values, 'grad_tol', float, 1e-6)
    if not grad_tol > 0.0:
        raise ConfigError('sobolev.grad_tol', f"must be positive (got {grad_tol})")

    return SobolevConfig(refinements=_parse_refinements('sobolev', values), max_iters=max_iters, grad_tol=grad_tol)


def _parse_pohozaev(values: Mapping[str, Any]) -> PohozaevConfig:
    _reject_unknown('pohozaev', values, ('refinements', 'candidate', 'candidate_file', 'certificate'))

    candidate = _get('pohozaev', values, 'candidate', str, POHOZAEV_CANDIDATE_BUBBLE)
    if candidate not in POHOZAEV_CANDIDATES:
        raise ConfigError('pohozaev.candidate', f"must be one of {', '.join(POHOZAEV_CANDIDATES)} (got '{candidate}')")

    candidate_file = _get('pohozaev', values, 'candidate_file', str)
    if candidate == POHOZAEV_CANDIDATE_FILE and not candidate_file:
        raise ConfigError('pohozaev.candidate_file', "is required when candidate is 'file'")

    return PohozaevConfig(
        refinements=_parse_refinements('pohozaev', values),
        candidate=candidate,
        candidate_file=candidate_file,
        certificate=_get('pohozaev', values, 'certificate', bool, False),
    )


def _parse_output(values: Mapping[str, Any]) -> OutputConfig:
    _reject_unknown('output', values, ('write_field', 'refine'))

    return OutputConfig(
        write_field=_get('output', values, 'write_field', bool, True),
        refine=_get('output', values, 'refine', bool, False),
    )
