#!/usr/bin/env python3
# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

import math
import unittest
from dataclasses import replace

import numpy as np

from csgs import SolverError
from csgs.functional import ProblemSpec, energy, energy_lower_bound
from csgs.grid import FieldPair, GridSpec, build_grid
from csgs.potentials import PotentialDef, sample_potentials
from csgs.solver import (
    BUBBLE_AMPLITUDE, INIT_RANDOM, MuSweep, SolveOptions, SolveReport, aubin_talenti_bubble, compare_energies,
    estimate_sobolev_constant, initial_field, initial_fields, locate_threshold_crossing, minimize_ground_state,
    nonneg_refine, radial_bubble, radial_line, radial_sobolev_quotient, recentering_shift, sobolev_threshold, sweep_mu,
)

# 3(π/2)^{4/3}
SHARP_SOBOLEV = 3.0 * (math.pi / 2.0) ** (4.0 / 3.0)


class TestSolveOptions(unittest.TestCase):

    def test_rejects_invalid_options(self):
        with self.assertRaises(SolverError):
            SolveOptions(max_iters=-1)
        with self.assertRaises(SolverError):
            SolveOptions(grad_tol=0.0)
        with self.assertRaises(SolverError):
            SolveOptions(armijo_factor=1.0)
        with self.assertRaisesRegex(SolverError, "requires init_file"):
            SolveOptions(init='file')
        with self.assertRaisesRegex(SolverError, "init must be one of"):
            SolveOptions(init='sech')
        with self.assertRaises(SolverError):
            SolveOptions(zero_component='w')
        with self.assertRaisesRegex(SolverError, "starts must be at least 1"):
            SolveOptions(starts=0)


class TestInitialFields(unittest.TestCase):

    def setUp(self):
        self.grid = build_grid(GridSpec(1, 4.0, 64))

    def test_bump_starts_alternate_the_heavy_component(self):
        starts = initial_fields(self.grid, SolveOptions(starts=3))

        self.assertEqual(3, len(starts))
        self.assertGreater(np.max(starts[0].u), 3.0 * np.max(starts[0].v))
        self.assertGreater(np.max(starts[1].v), 3.0 * np.max(starts[1].u))
        self.assertGreater(np.max(starts[2].u), 3.0 * np.max(starts[2].v))
        for start in starts:
            self.assertTrue(np.all(start.u > 0.0) and np.all(start.v > 0.0))

    def test_starts_follow_the_seed(self):
        first = initial_field(self.grid, SolveOptions(seed=4), 1)
        again = initial_field(self.grid, SolveOptions(seed=4), 1)
        other = initial_field(self.grid, SolveOptions(seed=5), 1)

        np.testing.assert_array_equal(first.u, again.u)
        self.assertFalse(np.array_equal(first.u, other.u))
        self.assertFalse(np.array_equal(first.u, initial_field(self.grid, SolveOptions(seed=4), 3).u))

    def test_random_init_has_one_start(self):
        self.assertEqual(1, len(initial_fields(self.grid, SolveOptions(init=INIT_RANDOM, starts=4))))


class TestMinimizeGroundState(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.grid = build_grid(GridSpec(1, 4.0, 128))
        cls.ps = sample_potentials(_constant_defs(1.0, 1.0, 0.3), 0.5, cls.grid)
        cls.spec = ProblemSpec(1, 4.0, 4.0, 1.0)
        cls.report = minimize_ground_state(cls.ps, cls.spec, cls.grid)

    def test_converges(self):
        report = self.report

        self.assertTrue(report.converged, report.failure)
        self.assertIsNone(report.failure)
        self.assertLessEqual(report.grad_norm, 1e-6)
        self.assertLess(report.nehari_residual, 1e-8)
        self.assertGreater(report.energy, 0.0)
        self.assertEqual(report.iterations + 1, len(report.energy_trace))

    def test_energy_trace_never_increases(self):
        trace = self.report.energy_trace

        self.assertTrue(all(b <= a for a, b in zip(trace, trace[1:])))

    def test_energy_above_lower_bound(self):
        breakdown = energy(self.report.field, self.ps, self.spec, self.grid)

        self.assertGreaterEqual(self.report.energy, energy_lower_bound(breakdown, self.spec, self.ps.delta))

    def test_random_starts_agree(self):
        for seed in (1, 2):
            report = minimize_ground_state(self.ps, self.spec, self.grid, SolveOptions(init=INIT_RANDOM, seed=seed))

            self.assertTrue(report.converged, report.failure)
            self.assertLess(abs(report.energy - self.report.energy), 1e-6 * abs(self.report.energy))

    def test_leaves_the_symmetric_saddle(self):
        field = self.report.field

        # the symmetric critical point sits near 1.5378
        self.assertAlmostEqual(1.17163, self.report.energy, places=4)
        self.assertGreater(np.max(np.abs(field.u - field.v)), 0.5)

    def test_translated_and_negated_starts_agree(self):
        start = initial_field(self.grid, SolveOptions())

        direct = minimize_ground_state(self.ps, self.spec, self.grid, initial=start)
        moved = minimize_ground_state(self.ps, self.spec, self.grid, initial=start.translated((1,)).negated())
        self.assertTrue(direct.converged and moved.converged)
        self.assertLess(abs(direct.energy - moved.energy), 1e-8 * abs(direct.energy))

    def test_same_seed_is_deterministic(self):
        opts = SolveOptions(init=INIT_RANDOM, seed=3, max_iters=20)

        first = minimize_ground_state(self.ps, self.spec, self.grid, opts)
        second = minimize_ground_state(self.ps, self.spec, self.grid, opts)
        self.assertEqual(first.energy_trace, second.energy_trace)
        np.testing.assert_array_equal(first.field.u, second.field.u)

    def test_energy_ignores_sign_and_lattice_shifts(self):
        field = self.report.field

        self.assertAlmostEqual(self.report.energy, energy(field.negated(), self.ps, self.spec, self.grid).total, places=12)
        self.assertAlmostEqual(self.report.energy, energy(field.translated((1,)), self.ps, self.spec, self.grid).total, places=10)

    def test_nonnegative_refinement(self):
        refined = nonneg_refine(self.report, self.ps, self.spec, self.grid)

        self.assertTrue(np.all(refined.field.u > 0.0))
        self.assertTrue(np.all(refined.field.v > 0.0))
        self.assertLess(abs(refined.energy - self.report.energy), 1e-10 * max(1.0, abs(self.report.energy)))

        negated = replace(self.report, field=self.report.field.negated())
        self.assertTrue(nonneg_refine(negated, self.ps, self.spec, self.grid, polish=False).field.is_nonnegative())

    def test_refinement_needs_converged_report(self):
        report = minimize_ground_state(self.ps, self.spec, self.grid, SolveOptions(max_iters=0))

        with self.assertRaises(SolverError):
            nonneg_refine(report, self.ps, self.spec, self.grid)

    def test_zero_iterations(self):
        report = minimize_ground_state(self.ps, self.spec, self.grid, SolveOptions(max_iters=0))

        self.assertFalse(report.converged)
        self.assertEqual(0, report.iterations)
        self.assertEqual(1, len(report.energy_trace))
        self.assertLess(report.nehari_residual, 1e-8)

    def test_semitrivial_level_lies_above(self):
        report = minimize_ground_state(self.ps, self.spec, self.grid, SolveOptions(zero_component='u'))

        self.assertTrue(report.converged, report.failure)
        self.assertFalse(np.any(report.field.u))
        self.assertGreater(report.energy, self.report.energy)

    def test_scalar_level_without_coupling(self):
        ps = sample_potentials(_constant_defs(1.0, 1.0, 0.0), 0.5, self.grid)
        semitrivial = minimize_ground_state(ps, self.spec, self.grid, SolveOptions(zero_component='u'))

        # -v'' + v = v³ has the level 4/3 on the line
        self.assertTrue(semitrivial.converged, semitrivial.failure)
        self.assertLess(abs(semitrivial.energy - 4.0 / 3.0), 1e-2)

        full = minimize_ground_state(ps, self.spec.with_mu(0.0), self.grid)
        self.assertTrue(full.converged, full.failure)
        self.assertLess(abs(full.energy - semitrivial.energy), 1e-8 * semitrivial.energy)

    def test_summary(self):
        summary = self.report.summary()

        self.assertEqual(self.report.energy, summary['energy'])
        self.assertTrue(summary['converged'])
        self.assertEqual(self.ps.content_hash(), summary['potential_hash'])


class TestRecentering(unittest.TestCase):

    def test_shift_points_at_the_peak(self):
        grid = build_grid(GridSpec(1, 4.0, 32))
        x = grid.axes[0]
        fp = FieldPair(np.exp(-(x - 2.0) ** 2), np.zeros(grid.shape), grid)

        shift = recentering_shift(fp)
        self.assertEqual((2,), shift)
        self.assertEqual(0.0, grid.axes[0][int(np.argmax(fp.translated(shift).u))])

    def test_lattice_potentials_are_recentred(self):
        grid = build_grid(GridSpec(1, 4.0, 64))
        defs = (PotentialDef.cosine_lattice(2.0, 0.5), PotentialDef.constant(1.5), PotentialDef.constant(0.3))
        ps = sample_potentials(defs, 0.5, grid)
        x = grid.axes[0]
        initial = FieldPair(np.exp(-(x - 2.5) ** 2), np.exp(-(x - 2.5) ** 2), grid)

        report = minimize_ground_state(ps, ProblemSpec(1, 4.0, 4.0, 1.0), grid, SolveOptions(recenter_every=1, max_iters=30), initial=initial)
        self.assertGreaterEqual(report.recenters_applied, 1)
        self.assertTrue(all(b <= a for a, b in zip(report.energy_trace, report.energy_trace[1:])))


class TestCompareEnergies(unittest.TestCase):

    def test_asymptotic_level_lies_below(self):
        grid = build_grid(GridSpec(1, 4.0, 64))
        spec = ProblemSpec(1, 4.0, 4.0, 1.0)
        periodic = sample_potentials(_constant_defs(2.0, 2.0, 0.4), 0.5, grid)
        asymptotic = sample_potentials((
            PotentialDef.gaussian_perturbed(2.0, -0.5, 1.0),
            PotentialDef.gaussian_perturbed(2.0, -0.5, 1.0),
            PotentialDef.gaussian_perturbed(0.4, 0.1, 1.0),
        ), 0.5, grid)

        report_periodic = minimize_ground_state(periodic, spec, grid)
        report_asymptotic = minimize_ground_state(asymptotic, spec, grid)
        self.assertTrue(report_periodic.converged and report_asymptotic.converged)

        comparison = compare_energies(report_periodic, report_asymptotic)
        self.assertTrue(comparison.passed)
        self.assertGreater(comparison.gap, 1e-9)

        swapped = compare_energies(report_asymptotic, report_periodic)
        self.assertFalse(swapped.passed)
        self.assertLess(swapped.gap, 0.0)

    def test_equal_levels_fail(self):
        report = _synthetic_report(1.0)
        comparison = compare_energies(report, report)

        self.assertEqual(0.0, comparison.gap)
        self.assertFalse(comparison.passed)

    def test_margin_and_slack(self):
        self.assertTrue(compare_energies(_synthetic_report(1.0), _synthetic_report(0.5), margin=0.4).passed)
        self.assertFalse(compare_energies(_synthetic_report(1.0), _synthetic_report(0.5), margin=0.5).passed)
        self.assertFalse(compare_energies(_synthetic_report(1.0), _synthetic_report(1.0 - 1e-10)).passed)

    def test_mismatched_reports(self):
        with self.assertRaisesRegex(SolverError, "different grids"):
            compare_energies(_synthetic_report(1.0), _synthetic_report(0.5, grid_hash='other'))
        with self.assertRaisesRegex(SolverError, "different problem parameters"):
            compare_energies(_synthetic_report(1.0), _synthetic_report(0.5, spec_hash='other'))


class TestSweepMu(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.grid = build_grid(GridSpec(1, 4.0, 128))
        cls.ps = sample_potentials(_constant_defs(1.0, 1.0, 0.3), 0.5, cls.grid)
        cls.spec = ProblemSpec(1, 4.0, 4.0, 1.0)
        cls.mu_values = [0.0, 1.0, 2.0, 4.0]

    def test_warm_and_cold_sweeps_agree(self):
        warm = sweep_mu(self.ps, self.spec, self.grid, self.mu_values)
        cold = sweep_mu(self.ps, self.spec, self.grid, self.mu_values, warm_start=False, workers=2)

        self.assertEqual([True] * 4, warm.converged)
        self.assertEqual([True] * 4, cold.converged)
        self.assertEqual({}, warm.failures)
        for a, b in zip(warm.energies, cold.energies):
            self.assertLess(abs(a - b), 1e-6 * abs(a))

        self.assertTrue(all(b < a for a, b in zip(warm.energies, warm.energies[1:])))
        self.assertIsNone(warm.threshold)
        self.assertIsNone(warm.below_threshold(0))

    def test_rejects_bad_mu_values(self):
        with self.assertRaisesRegex(SolverError, "non-empty"):
            sweep_mu(self.ps, self.spec, self.grid, [])
        with self.assertRaisesRegex(SolverError, "strictly increasing"):
            sweep_mu(self.ps, self.spec, self.grid, [1.0, 1.0])
        with self.assertRaises(SolverError):
            sweep_mu(self.ps, self.spec, self.grid, [-1.0, 1.0])

    def test_failures_are_recorded(self):
        sweep = sweep_mu(self.ps, self.spec, self.grid, [1.0, 2.0], SolveOptions(max_iters=0))

        self.assertEqual([False, False], sweep.converged)
        self.assertEqual([1.0, 2.0], sorted(sweep.failures))
        self.assertIsNotNone(sweep.energies[0])

    def test_crossing_flag(self):
        sweep = MuSweep(mu_values=[1.0, 2.0], energies=[1.3, 1.2], converged=[True, True], reports=[None, None])

        self.assertIsNone(sweep.crossed)
        self.assertFalse(replace(sweep, threshold=1.0).crossed)
        self.assertTrue(replace(sweep, threshold=1.25, mu0_estimate=2.0).crossed)

    def test_threshold_bracket_is_checked(self):
        with self.assertRaisesRegex(SolverError, "invalid bracket"):
            locate_threshold_crossing(self.ps, self.spec, self.grid, 2.0, 1.0, 0.5)

    def test_threshold_crossing(self):
        low = minimize_ground_state(self.ps, self.spec.with_mu(1.0), self.grid).energy
        high = minimize_ground_state(self.ps, self.spec.with_mu(2.0), self.grid).energy
        threshold = 0.5 * (low + high)

        mu, evaluated = locate_threshold_crossing(self.ps, self.spec, self.grid, 1.0, 2.0, threshold, tolerance=0.25)

        self.assertGreater(mu, 1.0)
        self.assertLessEqual(mu, 2.0)
        self.assertLess(dict(evaluated)[mu], threshold)
        self.assertTrue(all(c >= threshold for m, c in evaluated if m < mu - 0.25))

        with self.assertRaisesRegex(SolverError, "does not straddle"):
            locate_threshold_crossing(self.ps, self.spec, self.grid, 1.0, 2.0, high - 1.0)


class TestSobolev(unittest.TestCase):

    def test_bubble(self):
        grid = build_grid(GridSpec(3, 4.0, 16))
        bubble = aubin_talenti_bubble(grid)

        self.assertAlmostEqual(BUBBLE_AMPLITUDE, bubble[(8, 8, 8)], places=14)
        self.assertAlmostEqual(BUBBLE_AMPLITUDE / math.sqrt(2.0), bubble[(10, 8, 8)], places=14)

    def test_radial_bubble(self):
        t, step = radial_line(1023)

        self.assertEqual(1023, len(t))
        self.assertAlmostEqual(0.0, t[511], places=12)
        self.assertAlmostEqual(48.0 / 1024.0, step, places=14)
        np.testing.assert_allclose(radial_bubble(t), np.exp(t / 2.0) * BUBBLE_AMPLITUDE / np.sqrt(1.0 + np.exp(2.0 * t)))
        self.assertLess(abs(radial_sobolev_quotient(radial_bubble(t), step) - SHARP_SOBOLEV), 1e-2 * SHARP_SOBOLEV)

        with self.assertRaises(SolverError):
            radial_line(2)

    def test_radial_quotient_ignores_scale(self):
        t, step = radial_line(255)
        phi = radial_bubble(t) * (1.0 + 0.1 * np.cos(t))

        self.assertAlmostEqual(1.0, radial_sobolev_quotient(2.0 * phi, step) / radial_sobolev_quotient(phi, step), places=12)
        with self.assertRaises(SolverError):
            radial_sobolev_quotient(np.zeros(255), step)

    def test_estimate_lands_on_the_sharp_constant(self):
        estimate = estimate_sobolev_constant(build_grid(GridSpec(3, 8.0, 48)))

        self.assertTrue(estimate.converged)
        self.assertEqual(384, estimate.nodes)
        self.assertEqual(estimate.iterations + 1, len(estimate.trace))
        self.assertTrue(all(b <= a for a, b in zip(estimate.trace, estimate.trace[1:])))
        self.assertLessEqual(estimate.constant, estimate.bubble_quotient)
        self.assertLess(abs(estimate.constant - estimate.bubble_quotient), 0.05 * estimate.bubble_quotient)
        self.assertLess(abs(estimate.constant - SHARP_SOBOLEV), 1e-2 * SHARP_SOBOLEV)

    def test_estimate_settles_under_refinement(self):
        constants = [estimate_sobolev_constant(build_grid(GridSpec(3, 8.0, n))).constant for n in (48, 64, 96)]
        drifts = [abs(b - a) for a, b in zip(constants, constants[1:])]

        self.assertLess(drifts[1], drifts[0])
        self.assertLess(abs(constants[-1] - SHARP_SOBOLEV), abs(constants[0] - SHARP_SOBOLEV))

    def test_estimate_needs_three_dimensions(self):
        with self.assertRaises(SolverError):
            estimate_sobolev_constant(build_grid(GridSpec(2, 4.0, 16)))

    def test_threshold(self):
        self.assertAlmostEqual(8.0 / 3.0, sobolev_threshold(4.0, 3), places=14)


def _constant_defs(v1: float, v2: float, lam: float):
    return PotentialDef.constant(v1), PotentialDef.constant(v2), PotentialDef.constant(lam)


def _synthetic_report(level: float, grid_hash: str = 'grid', spec_hash: str = 'spec') -> SolveReport:
    grid = build_grid(GridSpec(1, 4.0, 16))
    return SolveReport(
        field=FieldPair.zeros(grid),
        energy=level,
        grad_norm=0.0,
        iterations=0,
        energy_trace=[level],
        grad_trace=[0.0],
        recenters_applied=0,
        converged=True,
        nehari_residual=0.0,
        e_norm_sq=0.0,
        grid_hash=grid_hash,
        potential_hash='potentials',
        spec_hash=spec_hash,
    )


if __name__ == '__main__':
    unittest.main()
