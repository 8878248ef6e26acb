#!/usr/bin/env python3

# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

import os
from abc import ABC
from typing import Dict, List, Optional, Tuple

import numpy as np
from tqdm.contrib.concurrent import thread_map

from csgs import (
    Command, ConfigError, EXIT_OK, EXIT_ASSUMPTIONS_VIOLATED, EXIT_NOT_CONVERGED, EXIT_CHECK_FAILED, log, utils,
)
from csgs.diagnostics import PohozaevReport, pohozaev_residual, nonexistence_certificate
from csgs.field_io import write_field, read_field, write_report_csv
from csgs.grid import FieldPair, Grid
from csgs.potentials import (
    PotentialSet, ValidationReport, MODE_ASYMPTOTIC, MODE_ASYMPTOTIC_STRICT, MODE_NONEXISTENCE,
    sample_potentials, validate_assumptions,
)
from csgs.run_config import POHOZAEV_CANDIDATE_BUBBLE
from csgs.solver import (
    SobolevEstimate, aubin_talenti_bubble, compare_energies, estimate_sobolev_constant, minimize_ground_state,
    nonneg_refine, sweep_mu,
)

# Largest relative gap between the optimised Sobolev quotient and the quotient at the bubble
SOBOLEV_BUBBLE_TOLERANCE = 0.05

# Smallest factor by which the Pohozaev residual must fall across the refinements
POHOZAEV_REDUCTION = 2.0


class RunCommand(Command, ABC):
    """
    Shared plumbing: grid and potential sampling, assumption checks, artifact paths and the summary file
    """
    _summary: Dict

    def __init__(self, config, output_dir: str) -> None:
        super().__init__(config, output_dir)
        self._summary = {}

    def summary(self) -> Dict:
        return self._summary

    def path(self, file_name: str) -> str:
        return os.path.join(self.output_dir, file_name)

    def sample(self, grid: Grid) -> PotentialSet:
        return self.config.potentials.sample(grid)

    def sample_reference(self, grid: Grid) -> PotentialSet:
        if self.config.reference is None:
            raise ConfigError('reference_potentials', f"is required by the '{self.name()}' command")

        return sample_potentials(self.config.reference, self.config.potentials.delta, grid)

    def validate(self, ps: PotentialSet, grid: Grid, mode: Optional[str] = None, reference: Optional[PotentialSet] = None) -> ValidationReport:
        potentials = self.config.potentials
        mode = mode or potentials.mode
        if mode in (MODE_ASYMPTOTIC, MODE_ASYMPTOTIC_STRICT) and reference is None:
            reference = self.sample_reference(grid)

        report = validate_assumptions(
            ps, mode, grid,
            reference=reference,
            tail_tolerance=potentials.tail_tolerance,
            estimate_spectrum=potentials.estimate_nu,
        )

        for check in report.failed():
            log.error(
                f"{check.assumption} violated: {check.subject} (worst value {check.worst_value:g}, bound {check.bound:g}"
                + (f", at node {check.coordinate})" if check.coordinate is not None else ")")
            )

        return report

    def write_summary(self) -> None:
        content = dict(self._summary)
        content['config'] = self.config.to_dict()
        utils.atomic_write(self.path('summary.yaml'), utils.dump_config(content))

    @classmethod
    def name(cls) -> str:
        return cls.__name__.replace('Command', '').lower()


class ValidateCommand(RunCommand):
    def execute(self) -> int:
        grid = self.config.build_grid()
        ps = self.sample(grid)

        report = self.validate(ps, grid)
        write_report_csv(report, self.path('validation.csv'))

        for assumption in report.assumptions():
            log.info(f"{assumption}: {'pass' if report.passed(assumption) else 'FAIL'}")
        if report.nu1 is not None:
            log.info(f"Spectral infima: nu1 = {report.nu1:.10g}, nu2 = {report.nu2:.10g}")
        if report.radial_constant is not None:
            log.info(f"Radial constant C = {report.radial_constant:.10g} ({report.radial_path})")

        self._summary = {
            'mode': report.mode,
            'overall': report.overall,
            'failed': sorted({c.assumption for c in report.failed()}),
            'nu1': report.nu1,
            'nu2': report.nu2,
            'radial_constant': report.radial_constant,
            'radial_path': report.radial_path,
        }
        self.write_summary()

        return EXIT_OK if report.overall else EXIT_ASSUMPTIONS_VIOLATED


class SolveCommand(RunCommand):
    def execute(self) -> int:
        grid = self.config.build_grid()
        ps = self.sample(grid)

        validation = self.validate(ps, grid)
        if not validation.overall:
            return EXIT_ASSUMPTIONS_VIOLATED

        report = minimize_ground_state(ps, self.config.problem, grid, self.config.solver)

        if self.config.output.write_field:
            write_field(report.field, self.path('field.csgs'))
        write_report_csv(report, self.path('solve.csv'))

        self._summary = {'solve': report.summary()}

        if self.config.output.refine and report.converged:
            refined = nonneg_refine(report, ps, self.config.problem, grid, self.config.solver)
            write_field(refined.field, self.path('refined.csgs'))
            self._summary['refined'] = refined.summary()
            log.info(f"Nonnegative refinement: c = {refined.energy:.15g} (shift {refined.energy - report.energy:.3e})")

        self.write_summary()

        log.info(
            f"Ground state level c = {report.energy:.15g} after {report.iterations:,} iterations, |∇I| = {report.grad_norm:.3e}"
            + ("" if report.converged else " (not converged)")
        )

        return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


class SweepCommand(RunCommand):
    def execute(self) -> int:
        sweep_config = self.config.sweep
        if not sweep_config.mu_values:
            raise ConfigError('sweep.mu_values', "mu_values must be non-empty")

        grid = self.config.build_grid()
        ps = self.sample(grid)

        validation = self.validate(ps, grid)
        if not validation.overall:
            return EXIT_ASSUMPTIONS_VIOLATED

        sweep = sweep_mu(
            ps, self.config.problem, grid, sweep_config.mu_values, self.config.solver,
            warm_start=sweep_config.warm_start,
            workers=sweep_config.workers,
            sobolev_constant=sweep_config.sobolev_constant,
        )
        write_report_csv(sweep, self.path('sweep.csv'))

        self._summary = {
            'mu_values': sweep.mu_values,
            'energies': sweep.energies,
            'converged': sweep.converged,
            'threshold': sweep.threshold,
            'sobolev_constant': sweep.sobolev_constant,
            'mu0_estimate': sweep.mu0_estimate,
            'crossed': sweep.crossed,
            'warm_start': sweep.warm_start,
            'failures': {float(mu): message for mu, message in sweep.failures.items()},
        }
        self.write_summary()

        if sweep.threshold is not None:
            log.info(f"Threshold S^(N/2)/N = {sweep.threshold:.10g}; first mu below it: {sweep.mu0_estimate}")

        if not all(sweep.converged):
            return EXIT_NOT_CONVERGED
        if sweep.crossed is False:
            log.error(f"No level fell below the threshold {sweep.threshold:.10g}; extend mu_values")
            return EXIT_CHECK_FAILED

        return EXIT_OK


class CompareCommand(RunCommand):
    def execute(self) -> int:
        grid = self.config.build_grid()
        ps_asymptotic = self.sample(grid)
        ps_periodic = self.sample_reference(grid)

        mode = self.config.potentials.mode
        if mode not in (MODE_ASYMPTOTIC, MODE_ASYMPTOTIC_STRICT):
            mode = MODE_ASYMPTOTIC

        validation = self.validate(ps_asymptotic, grid, mode=mode, reference=ps_periodic)
        if not validation.overall:
            return EXIT_ASSUMPTIONS_VIOLATED

        problem = self.config.problem
        report_periodic = minimize_ground_state(ps_periodic, problem, grid, self.config.solver)
        report_asymptotic = minimize_ground_state(ps_asymptotic, problem, grid, self.config.solver)

        self._summary = {'periodic': report_periodic.summary(), 'asymptotic': report_asymptotic.summary()}

        if not (report_periodic.converged and report_asymptotic.converged):
            self.write_summary()
            log.error("Comparison needs both ground states; at least one solve did not converge")
            return EXIT_NOT_CONVERGED

        comparison = compare_energies(report_periodic, report_asymptotic, self.config.compare.margin, self.config.compare.slack)
        write_report_csv(comparison, self.path('compare.csv'))

        self._summary['comparison'] = {
            'energy_periodic': comparison.energy_periodic,
            'energy_asymptotic': comparison.energy_asymptotic,
            'gap': comparison.gap,
            'passed': comparison.passed,
        }
        self.write_summary()

        log.info(
            f"c_periodic = {comparison.energy_periodic:.15g}, c_asymptotic = {comparison.energy_asymptotic:.15g}, "
            f"gap = {comparison.gap:.3e}: {'pass' if comparison.passed else 'FAIL'}"
        )

        return EXIT_OK if comparison.passed else EXIT_CHECK_FAILED


class PohozaevCommand(RunCommand):
    def execute(self) -> int:
        refinements = self.config.pohozaev.refinements or [self.config.grid.points_per_dim]

        reports = dict(zip(refinements, _map_refinements(self._residual, refinements, self.config.sweep.workers)))
        write_report_csv(reports, self.path('pohozaev.csv'))

        for n, report in reports.items():
            log.info(
                f"n = {n}: relative residual {report.relative:.3e}, boundary shell magnitude {report.shell_magnitude:.3e}"
                + ("" if report.critical_point else " (not a critical point)")
            )

        relatives = [reports[n].relative for n in refinements]
        decreasing = all(b < a for a, b in zip(relatives, relatives[1:])) if len(relatives) > 1 else None
        reduction = None
        if len(relatives) > 1:
            reduction = relatives[0] / relatives[-1] if relatives[-1] > 0.0 else float('inf')
        self._summary = {
            'pohozaev': {int(n): r.summary() for n, r in reports.items()},
            'residual_decreasing': decreasing,
            'reduction': reduction,
        }

        exit_code = EXIT_OK
        if decreasing is False or (reduction is not None and reduction < POHOZAEV_REDUCTION):
            log.error(f"Relative residual does not fall {POHOZAEV_REDUCTION:g}x under refinement: {', '.join(f'{r:.3e}' for r in relatives)}")
            exit_code = EXIT_CHECK_FAILED
        if self.config.pohozaev.certificate:
            exit_code = self._certificate(refinements[-1]) or exit_code

        self.write_summary()
        return exit_code

    def _candidate(self, grid: Grid, positive: bool) -> FieldPair:
        if self.config.pohozaev.candidate == POHOZAEV_CANDIDATE_BUBBLE:
            bubble = aubin_talenti_bubble(grid)
            return FieldPair(bubble.copy() if positive else np.zeros(grid.shape), bubble, grid)

        return read_field(self.config.pohozaev.candidate_file, grid)

    def _residual(self, points_per_dim: int) -> PohozaevReport:
        grid = self.config.build_grid(points_per_dim)
        return pohozaev_residual(self._candidate(grid, positive=False), self.sample(grid), self.config.problem, grid)

    def _certificate(self, points_per_dim: int) -> int:
        grid = self.config.build_grid(points_per_dim)
        ps = self.sample(grid)

        validation = self.validate(ps, grid, mode=MODE_NONEXISTENCE)
        if not validation.overall:
            return EXIT_ASSUMPTIONS_VIOLATED

        certificate = nonexistence_certificate(self._candidate(grid, positive=True), ps, self.config.problem, grid, validation)
        write_report_csv(certificate, self.path('certificate.csv'))
        self._summary['certificate'] = certificate.summary()

        log.info(f"Q = {certificate.q_value:.12g}, Pohozaev side P = {certificate.pohozaev_side:.12g}, margin Q - P = {certificate.margin:.12g}")

        return EXIT_OK


class SobolevCommand(RunCommand):
    def execute(self) -> int:
        sobolev = self.config.sobolev
        refinements = sobolev.refinements or [self.config.grid.points_per_dim]

        def estimate(points_per_dim: int) -> SobolevEstimate:
            grid = self.config.build_grid(points_per_dim)
            return estimate_sobolev_constant(
                grid,
                max_iters=sobolev.max_iters,
                grad_tol=sobolev.grad_tol,
            )

        results = dict(zip(refinements, _map_refinements(estimate, refinements, self.config.sweep.workers)))
        write_report_csv(results, self.path('sobolev.csv'))

        drifts = _drifts([(n, results[n].constant) for n in refinements])
        drift_decreasing = all(b < a for a, b in zip(drifts, drifts[1:])) if len(drifts) > 1 else None
        bubble_gap = max(abs(e.bubble_quotient - e.constant) / e.constant for e in results.values())
        self._summary = {
            'estimates': {
                int(n): {
                    'constant': e.constant, 'bubble_quotient': e.bubble_quotient, 'nodes': e.nodes,
                    'iterations': e.iterations, 'converged': e.converged,
                }
                for n, e in results.items()
            },
            'drifts': drifts,
            'drift_decreasing': drift_decreasing,
            'bubble_gap': bubble_gap,
        }
        self.write_summary()

        for n, e in results.items():
            log.info(f"n = {n}: S ≈ {e.constant:.10g} (bubble quotient {e.bubble_quotient:.10g}, {e.iterations} iterations)")

        if not all(e.converged for e in results.values()):
            return EXIT_NOT_CONVERGED
        if drift_decreasing is False or bubble_gap > SOBOLEV_BUBBLE_TOLERANCE:
            log.error(f"Refinement check failed: drifts {drifts}, largest gap to the bubble quotient {bubble_gap:.3e}")
            return EXIT_CHECK_FAILED

        return EXIT_OK


def _drifts(values: List[Tuple[int, float]]) -> List[float]:
    return [abs(b - a) for (_, a), (_, b) in zip(values, values[1:])]


def _map_refinements(fn, refinements: List[int], workers: int) -> List:
    if len(refinements) == 1:
        return [fn(refinements[0])]

    return list(thread_map(fn, refinements, max_workers=workers, unit='n', chunksize=1))
