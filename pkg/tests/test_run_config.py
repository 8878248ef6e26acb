#!/usr/bin/env python3
# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

import copy
import os
import unittest

import yaml

import csgs
from csgs import ConfigError
from csgs.potentials import KIND_CONSTANT, KIND_RADIAL_QUADRATIC, MODE_NONEXISTENCE
from csgs.run_config import RunConfig
from csgs.utils import dump_config, load_config, to_default_dict

BASE_CONFIG = {
    'grid': {'dim': 1, 'L': 4.0, 'n': 64},
    'problem': {'p': 4, 'q': 4, 'mu': 1.0},
    'potentials': {'V1': 1.0, 'V2': 1.0, 'lambda': 0.3, 'delta': 0.5},
}


class TestRunConfig(unittest.TestCase):

    def test_shipped_configs_parse(self):
        configs_folder = os.path.join(csgs.project_root, 'configs')
        names = sorted(f[:-len('.yaml')] for f in os.listdir(configs_folder) if f.endswith('.yaml'))
        self.assertIn('model_pair', names)

        for name in names:
            config = RunConfig.from_dict(load_config(name))
            self.assertEqual(config.to_dict(), RunConfig.from_dict(config.to_dict()).to_dict(), name)

    def test_model_pair(self):
        config = RunConfig.from_dict(load_config('model_pair'))

        self.assertEqual(MODE_NONEXISTENCE, config.potentials.mode)
        self.assertEqual(KIND_RADIAL_QUADRATIC, config.potentials.defs[2].kind)
        self.assertEqual(-0.25, config.potentials.defs[2].params['c'])
        self.assertTrue(config.pohozaev.certificate)
        self.assertEqual('critical-both', config.problem.regime)

    def test_defaults(self):
        config = RunConfig.from_dict(to_default_dict(BASE_CONFIG))

        self.assertEqual('periodic', config.grid.boundary)
        self.assertEqual('spectral', config.grid.laplacian_mode)
        self.assertEqual(KIND_CONSTANT, config.potentials.defs[0].kind)
        self.assertIsNone(config.reference)
        self.assertIsNone(config.sweep.mu_values)
        self.assertEqual(5000, config.solver.max_iters)
        self.assertTrue(config.output.write_field)

    def test_canonical_form_survives_yaml(self):
        raw = copy.deepcopy(BASE_CONFIG)
        raw['potentials']['V1'] = {'kind': 'gaussian_perturbed', 'base': {'kind': 'cosine_lattice', 'a': 2.0, 'b': 0.25}, 'amp': -0.5, 'sigma': 1.0}
        raw['sweep'] = {'mu_values': [0.5, 1.0], 'workers': 2}
        raw['solver'] = {'max_iters': 100, 'init': 'random', 'seed': 3, 'starts': 3}
        config = RunConfig.from_dict(to_default_dict(raw))

        reloaded = RunConfig.from_dict(to_default_dict(yaml.safe_load(dump_config(config.to_dict()))))
        self.assertEqual(config.to_dict(), reloaded.to_dict())
        self.assertEqual(config.grid, reloaded.grid)
        self.assertEqual(config.solver, reloaded.solver)
        self.assertEqual(3, reloaded.solver.starts)

    def test_with_seed(self):
        config = RunConfig.from_dict(to_default_dict(BASE_CONFIG))
        seeded = config.with_seed(7)

        self.assertEqual(7, seeded.solver.seed)
        self.assertEqual(0, config.solver.seed)

    def test_build_grid(self):
        config = RunConfig.from_dict(to_default_dict(BASE_CONFIG))

        self.assertEqual((64,), config.build_grid().shape)
        self.assertEqual((128,), config.build_grid(128).shape)

    def test_errors_name_the_key(self):
        cases = [
            ({'grid': None}, 'grid'),
            ({'grid': {'dim': 1, 'L': 4.0, 'n': 63}}, 'grid'),
            ({'grid': {'dim': 1, 'L': 4.0, 'n': 64, 'spacing': 0.1}}, 'grid.spacing'),
            ({'problem': {'p': 'four', 'q': 4}}, 'problem.p'),
            ({'problem': {'p': 4, 'q': 3}}, 'problem'),
            ({'potentials': {'V1': 1.0, 'V2': 1.0, 'lambda': 0.3, 'delta': 1.5}}, 'potentials.delta'),
            ({'potentials': {'V1': 1.0, 'V2': 1.0, 'delta': 0.5}}, 'potentials.lambda'),
            ({'potentials': {'V1': {'kind': 'quartic'}, 'V2': 1.0, 'lambda': 0.3, 'delta': 0.5}}, 'potentials.V1'),
            ({'solver': {'max_iters': -1}}, 'solver'),
            ({'solver': {'tolerance': 1e-6}}, 'solver.tolerance'),
            ({'sweep': {'mu_values': []}}, 'sweep.mu_values'),
            ({'sweep': {'mu_values': [2.0, 1.0]}}, 'sweep.mu_values'),
            ({'sweep': {'workers': 0}}, 'sweep.workers'),
            ({'sobolev': {'refinements': [48, 33]}}, 'sobolev.refinements'),
            ({'pohozaev': {'candidate': 'file'}}, 'pohozaev.candidate_file'),
            ({'output': {'refine': 'yes'}}, 'output.refine'),
            ({'plots': {}}, 'plots'),
        ]

        for override, key in cases:
            raw = copy.deepcopy(BASE_CONFIG)
            raw.update(override)

            with self.assertRaises(ConfigError, msg=key) as context:
                RunConfig.from_dict(to_default_dict(raw))
            self.assertEqual(key, context.exception.key)

    def test_asymptotic_mode_needs_reference(self):
        raw = copy.deepcopy(BASE_CONFIG)
        raw['potentials']['mode'] = 'asymptotic'

        with self.assertRaises(ConfigError) as context:
            RunConfig.from_dict(to_default_dict(raw))
        self.assertEqual('reference_potentials', context.exception.key)

        raw['reference_potentials'] = {'V1': 2.0, 'V2': 2.0, 'lambda': 0.2}
        config = RunConfig.from_dict(to_default_dict(raw))
        self.assertEqual(2.0, config.reference[0].params['c'])

    def test_missing_config(self):
        with self.assertRaises(ConfigError):
            load_config('no_such_config')


if __name__ == '__main__':
    unittest.main()
