#!/usr/bin/env python3
# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

import unittest

import numpy as np
from scipy.linalg import eigh

from csgs import PotentialError, ValidationError
from csgs.grid import GridSpec, Grid, LAPLACIAN_FD2, apply_laplacian, build_grid
from csgs.potentials import (
    PotentialDef, KIND_GAUSSIAN_PERTURBED, MODE_ASYMPTOTIC, MODE_NONEXISTENCE, MODE_PERIODIC, MODE_PERIODIC_STRICT,
    RADIAL_ANALYTIC, RADIAL_FINITE_DIFFERENCE, estimate_nu, sample_potentials, smallest_eigenvalue, validate_assumptions,
)


class TestPotentialDef(unittest.TestCase):

    def test_rejects_invalid_definitions(self):
        with self.assertRaisesRegex(PotentialError, "kind must be one of"):
            PotentialDef('quartic', {'c': 1.0})
        with self.assertRaisesRegex(PotentialError, "requires parameter 'b'"):
            PotentialDef.from_dict({'kind': 'cosine_lattice', 'a': 1.0})
        with self.assertRaisesRegex(PotentialError, "sigma must be positive"):
            PotentialDef.gaussian_perturbed(1.0, 0.5, 0.0)
        with self.assertRaisesRegex(PotentialError, "must be a number"):
            PotentialDef.from_dict({'kind': 'constant', 'c': 'one'})
        with self.assertRaisesRegex(PotentialError, "requires 'function'"):
            PotentialDef('callback')

    def test_nested_definition_to_dict(self):
        definition = PotentialDef.from_dict({
            'kind': 'gaussian_perturbed',
            'base': {'kind': 'cosine_lattice', 'a': 2.0, 'b': 0.25},
            'amp': -0.5,
            'sigma': 1.0,
        })

        self.assertEqual(KIND_GAUSSIAN_PERTURBED, definition.kind)
        self.assertIsInstance(definition.params['base'], PotentialDef)
        self.assertEqual(definition.to_dict(), PotentialDef.from_dict(definition.to_dict()).to_dict())
        self.assertFalse(definition.is_periodic)
        self.assertTrue(definition.params['base'].is_periodic)

    def test_evaluate(self):
        x = np.array([[0.0, 0.5, 1.0]])

        np.testing.assert_allclose([3.0, 1.0, 3.0], PotentialDef.cosine_lattice(2.0, 1.0).evaluate(x), atol=1e-15)
        np.testing.assert_allclose([0.0, 0.125, 0.5], PotentialDef.radial_quadratic(0.5).evaluate(x))
        np.testing.assert_allclose([1.5, 2.0 - 0.5 * np.exp(-0.25), 2.0 - 0.5 * np.exp(-1.0)],
                                   PotentialDef.gaussian_perturbed(2.0, -0.5, 1.0).evaluate(x))

    def test_radial_derivatives_match_finite_differences(self):
        grid = build_grid(GridSpec(2, 2.0, 16))
        x = grid.coordinates
        step = 1e-3

        definitions = [
            PotentialDef.cosine_lattice(2.0, 0.3),
            PotentialDef.gaussian_perturbed(PotentialDef.cosine_lattice(1.0, 0.2), 0.7, 1.3),
            PotentialDef.radial_quadratic(-0.25),
        ]
        for definition in definitions:
            callback = PotentialDef.from_callback(definition.evaluate)
            self.assertFalse(callback.has_analytic_radial)
            np.testing.assert_allclose(
                definition.radial_derivative(x, step), callback.radial_derivative(x, step), atol=1e-8,
                err_msg=definition.kind,
            )


class TestSamplePotentials(unittest.TestCase):

    def test_sampling(self):
        grid = build_grid(GridSpec(1, 4.0, 32))
        ps = sample_potentials(_constant_defs(1.0, 2.0, 0.5), 0.5, grid)

        np.testing.assert_array_equal(np.full(grid.shape, 2.0), ps.V2)
        self.assertTrue(ps.periodic_flag)
        self.assertEqual(16, len(ps.content_hash()))

    def test_sampling_errors(self):
        grid = build_grid(GridSpec(1, 4.0, 32))

        with self.assertRaisesRegex(PotentialError, "delta must lie in"):
            sample_potentials(_constant_defs(1.0, 1.0, 0.0), 1.0, grid)

        exploding = PotentialDef.from_callback(lambda x: 1.0 / x[0])
        with self.assertRaisesRegex(PotentialError, r"V1 is not finite at node \(0.0,\)"):
            with np.errstate(divide='ignore'):
                sample_potentials((exploding, PotentialDef.constant(1.0), PotentialDef.constant(0.0)), 0.5, grid)


class TestValidateAssumptions(unittest.TestCase):

    def test_periodic_pair_passes(self):
        grid = build_grid(GridSpec(1, 4.0, 64))
        defs = (PotentialDef.cosine_lattice(2.0, 0.5), PotentialDef.constant(1.5), PotentialDef.cosine_lattice(0.6, 0.2))
        ps = sample_potentials(defs, 0.9, grid)

        report = validate_assumptions(ps, MODE_PERIODIC_STRICT, grid)
        self.assertTrue(report.overall, report.failed())
        self.assertEqual(['(V1)', '(V2)', "(V3')"], report.assumptions())
        self.assertGreater(report.nu1, 0.0)
        self.assertAlmostEqual(1.5, report.nu2, places=8)

    def test_coupling_violation_names_node(self):
        grid = build_grid(GridSpec(1, 4.0, 64))
        ps = sample_potentials(_constant_defs(1.0, 1.0, 0.6), 0.5, grid)

        report = validate_assumptions(ps, MODE_PERIODIC, grid, estimate_spectrum=False)
        self.assertFalse(report.overall)
        self.assertFalse(report.passed('(V3)'))
        self.assertTrue(report.passed('(V1)'))

        failed = report.failed()[0]
        self.assertAlmostEqual(0.6, failed.worst_value)
        self.assertAlmostEqual(0.5, failed.bound)
        self.assertEqual(1, len(failed.coordinate))

    def test_non_periodic_potential_fails_periodicity(self):
        grid = build_grid(GridSpec(1, 4.0, 64))
        defs = (PotentialDef.gaussian_perturbed(2.0, -0.5, 1.0), PotentialDef.constant(2.0), PotentialDef.constant(0.4))
        ps = sample_potentials(defs, 0.5, grid)

        report = validate_assumptions(ps, MODE_PERIODIC, grid, estimate_spectrum=False)
        self.assertFalse(report.passed('(V1)'))
        self.assertTrue(report.passed('(V3)'))

    def test_strict_coupling_needs_positive_lambda(self):
        grid = build_grid(GridSpec(1, 4.0, 64))
        ps = sample_potentials(_constant_defs(1.0, 1.0, 0.0), 0.5, grid)

        self.assertTrue(validate_assumptions(ps, MODE_PERIODIC, grid, estimate_spectrum=False).overall)
        self.assertFalse(validate_assumptions(ps, MODE_PERIODIC_STRICT, grid, estimate_spectrum=False).overall)

    def test_periodic_mode_needs_resolved_lattice(self):
        grid = build_grid(GridSpec(1, 3.0, 16))
        ps = sample_potentials(_constant_defs(1.0, 1.0, 0.0), 0.5, grid)

        with self.assertRaisesRegex(ValidationError, "does not resolve period 1"):
            validate_assumptions(ps, MODE_PERIODIC, grid)

    def test_asymptotic_pair(self):
        grid = build_grid(GridSpec(1, 4.0, 64))
        asymptotic, periodic = _asymptotic_pair(grid)

        report = validate_assumptions(asymptotic, MODE_ASYMPTOTIC, grid, reference=periodic)
        self.assertTrue(report.overall, report.failed())
        self.assertEqual(['(V1)', '(V2)', '(V3)', '(V4)', '(V5)', '(V6)'], report.assumptions())

        swapped = validate_assumptions(periodic, MODE_ASYMPTOTIC, grid, reference=asymptotic, estimate_spectrum=False)
        self.assertFalse(swapped.passed('(V4)'))

        with self.assertRaisesRegex(ValidationError, "reference"):
            validate_assumptions(asymptotic, MODE_ASYMPTOTIC, grid)

    def test_model_pair_radial_assumptions(self):
        grid = build_grid(GridSpec(3, 4.0, 16))
        ps = sample_potentials(_model_pair_defs(), 0.6, grid)

        report = validate_assumptions(ps, MODE_NONEXISTENCE, grid)
        self.assertTrue(report.overall, report.failed())
        self.assertEqual(['(V6)', '(V7)', '(V8)'], report.assumptions())
        self.assertAlmostEqual(2.0, report.radial_constant, places=10)
        self.assertEqual(RADIAL_ANALYTIC, report.radial_path)

    def test_model_pair_with_callbacks(self):
        grid = build_grid(GridSpec(3, 4.0, 16))
        defs = tuple(PotentialDef.from_callback(d.evaluate) for d in _model_pair_defs())
        ps = sample_potentials(defs, 0.6, grid)

        report = validate_assumptions(ps, MODE_NONEXISTENCE, grid)
        self.assertTrue(report.overall, report.failed())
        self.assertAlmostEqual(2.0, report.radial_constant, places=6)
        self.assertEqual(RADIAL_FINITE_DIFFERENCE, report.radial_path)

    def test_increasing_lambda_violates_radial_sign(self):
        grid = build_grid(GridSpec(3, 4.0, 16))
        defs = (PotentialDef.radial_quadratic(0.5), PotentialDef.radial_quadratic(0.5), PotentialDef.radial_quadratic(0.25))
        ps = sample_potentials(defs, 0.6, grid)

        report = validate_assumptions(ps, MODE_NONEXISTENCE, grid)
        self.assertTrue(report.passed('(V7)'))
        self.assertFalse(report.passed('(V8)'))

    def test_unknown_mode(self):
        grid = build_grid(GridSpec(1, 4.0, 16))
        ps = sample_potentials(_constant_defs(1.0, 1.0, 0.0), 0.5, grid)

        with self.assertRaisesRegex(ValidationError, "mode must be one of"):
            validate_assumptions(ps, 'bounded', grid)


class TestSpectralInfimum(unittest.TestCase):

    def test_constant_potential(self):
        grid = build_grid(GridSpec(2, 2.0, 16))
        ps = sample_potentials(_constant_defs(0.75, 2.0, 0.1), 0.5, grid)

        nu1, nu2 = estimate_nu(ps, grid)
        self.assertAlmostEqual(0.75, nu1, places=8)
        self.assertAlmostEqual(2.0, nu2, places=8)

    def test_matches_dense_eigensolver(self):
        for spec in (GridSpec(1, 2.0, 32), GridSpec(1, 2.0, 32, laplacian_mode=LAPLACIAN_FD2)):
            grid = build_grid(spec)
            potential = PotentialDef.cosine_lattice(1.0, 0.8).evaluate(grid.coordinates)

            expected = eigh(_dense_hamiltonian(potential, grid), eigvals_only=True)[0]
            self.assertAlmostEqual(expected, smallest_eigenvalue(potential, grid, tolerance=1e-10), places=7)


def _constant_defs(v1: float, v2: float, lam: float):
    return PotentialDef.constant(v1), PotentialDef.constant(v2), PotentialDef.constant(lam)


def _model_pair_defs():
    return PotentialDef.radial_quadratic(0.5), PotentialDef.radial_quadratic(0.5), PotentialDef.radial_quadratic(-0.25)


def _asymptotic_pair(grid: Grid):
    asymptotic = sample_potentials((
        PotentialDef.gaussian_perturbed(2.0, -0.5, 1.0),
        PotentialDef.gaussian_perturbed(2.0, -0.5, 1.0),
        PotentialDef.gaussian_perturbed(0.4, 0.1, 1.0),
    ), 0.5, grid)
    periodic = sample_potentials(_constant_defs(2.0, 2.0, 0.4), 0.5, grid)

    return asymptotic, periodic


def _dense_hamiltonian(potential: np.ndarray, grid: Grid) -> np.ndarray:
    size = potential.size
    columns = []
    for i in range(size):
        e = np.zeros(size)
        e[i] = 1.0
        column = -apply_laplacian(e.reshape(grid.shape), grid) + potential * e.reshape(grid.shape)
        columns.append(column.ravel())

    matrix = np.array(columns).T
    return 0.5 * (matrix + matrix.T)


if __name__ == '__main__':
    unittest.main()
