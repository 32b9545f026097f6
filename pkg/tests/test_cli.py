# -*- coding: utf-8 -*-

# Copyright 2016 The semistatic Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"). You
# may not use this file except in compliance with the License. A copy of
# the License is located at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# or in the "license" file accompanying this file. This file is
# distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF
# ANY KIND, either express or implied. See the License for the specific
# language governing permissions and limitations under the License.

import json
import os
import unittest

from click.testing import CliRunner
import numpy as np

import semistatic
from semistatic.exceptions import SolverError
from semistatic.market_data import (CallQuoteSet, bs_call_vector,
                                    write_quotes)
from semistatic.semistaticcli import SemistaticCli
from semistatic.workbench import Workbench
from tests.compat import mock


STRIKES = [0.8, 0.9, 1.0, 1.1, 1.2]
FIGURE_QUOTES = os.path.join(os.path.dirname(semistatic.__file__), 'data',
                             'synthetic_figure_region.csv')
SMALL_GRID = {'grid_points': 50, 'basis_degree': 2}


def write_bs_quotes(path, sigma=0.2):
    maturities = [1.0, 1.5]
    prices = np.concatenate([bs_call_vector(STRIKES, t, sigma)
                             for t in maturities])
    quote_set = CallQuoteSet.from_prices(maturities, [STRIKES] * 2, prices)
    with open(path, 'w') as quotes_file:
        write_quotes(quote_set, quotes_file)


def write_json(path, document):
    with open(path, 'w') as json_file:
        json.dump(document, json_file)


class CliTest(unittest.TestCase):

    def setUp(self):
        self.runner = CliRunner()
        self.cli = SemistaticCli.cli

    def invoke(self, args):
        return self.runner.invoke(self.cli, args)

    def json_output(self, result):
        # Log lines on stderr may share the captured output.
        text = result.output
        return json.loads(text[text.index('{'):text.rindex('}') + 1])


class ValidateCommandTest(CliTest):

    def test_arbitrage_free_quotes(self):
        with self.runner.isolated_filesystem():
            write_bs_quotes('quotes.csv')
            result = self.invoke(['--quotes', 'quotes.csv', 'validate'])
            self.assertEqual(result.exit_code, 0, result.output)
            document = self.json_output(result)
            self.assertTrue(document['passed'])
            self.assertTrue(document['convex_order']['passed'])

    def test_violations_exit_one(self):
        with self.runner.isolated_filesystem():
            with open('quotes.csv', 'w') as quotes_file:
                quotes_file.write('maturity,moneyness,price\n'
                                  '1.0,0.9,0.05\n1.0,1.0,0.08\n')
            result = self.invoke(['--quotes', 'quotes.csv', 'validate'])
            self.assertEqual(result.exit_code, 1)
            self.assertFalse(self.json_output(result)['passed'])

    def test_csv_report(self):
        with self.runner.isolated_filesystem():
            write_bs_quotes('quotes.csv')
            result = self.invoke(['--quotes', 'quotes.csv', '--format', 'csv',
                                  'validate'])
            self.assertEqual(result.exit_code, 0)
            self.assertEqual(result.output.splitlines()[0], 'key,value')

    def test_missing_quotes_option(self):
        result = self.invoke(['validate'])
        self.assertEqual(result.exit_code, 2)
        self.assertIn('this command needs --quotes', result.output)

    def test_unreadable_quotes(self):
        with self.runner.isolated_filesystem():
            result = self.invoke(['--quotes', 'missing.csv', 'validate'])
        self.assertEqual(result.exit_code, 2)

    def test_malformed_quotes(self):
        with self.runner.isolated_filesystem():
            with open('quotes.csv', 'w') as quotes_file:
                quotes_file.write('maturity,moneyness,price\n1.0,abc,0.1\n')
            result = self.invoke(['--quotes', 'quotes.csv', 'validate'])
        self.assertEqual(result.exit_code, 2)

    def test_numerical_failure_exit_three(self):
        with mock.patch.object(Workbench, 'validate',
                               side_effect=SolverError('singular basis')):
            result = self.invoke(['--quotes', 'quotes.csv', 'validate'])
        self.assertEqual(result.exit_code, 3)
        self.assertIn('singular basis', result.output)


class FigureRegionCommandTest(CliTest):

    def test_envelope_rows(self):
        result = self.invoke(['--quotes', FIGURE_QUOTES, 'figure-region'])
        self.assertEqual(result.exit_code, 0, result.output)
        lines = result.output.splitlines()
        self.assertEqual(lines[0], 'element,kind,k_start,c_start,k_end,c_end')
        self.assertTrue(any(line.startswith('marker,square,')
                            for line in lines))
        self.assertTrue(any(line.startswith('marker,circle,')
                            for line in lines))
        self.assertTrue(any(line.startswith('segment,chord,')
                            for line in lines))

    def test_writes_out_file(self):
        with self.runner.isolated_filesystem():
            result = self.invoke(['--quotes', FIGURE_QUOTES, '--out',
                                  'region.csv', 'figure-region',
                                  '--maturity', '0.5'])
            self.assertEqual(result.exit_code, 0, result.output)
            with open('region.csv') as region_file:
                self.assertTrue(region_file.readline().startswith('element,'))

    def test_unquoted_maturity(self):
        result = self.invoke(['--quotes', FIGURE_QUOTES, 'figure-region',
                              '--maturity', '1.0'])
        self.assertEqual(result.exit_code, 1)
        self.assertIn('maturity not quoted', result.output)


class ReproduceCommandTest(CliTest):

    def test_moment_table(self):
        result = self.invoke(['reproduce', '3'])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn('psi_q_t1', result.output)
        self.assertIn('psi_p_t2', result.output)

    def test_moment_table_json(self):
        result = self.invoke(['--format', 'json', 'reproduce', '3'])
        self.assertEqual(result.exit_code, 0, result.output)
        document = self.json_output(result)
        self.assertEqual(len(document['rows']), 28)
        self.assertEqual(document['metadata']['table'], 3)
        self.assertEqual(document['metadata']['overrides'], {})

    def test_grid_format(self):
        result = self.invoke(['--format', 'grid', 'reproduce', '3'])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn('+-', result.output)
        self.assertIn('psi_q_t1', result.output)

    def test_out_file_is_csv(self):
        with self.runner.isolated_filesystem():
            result = self.invoke(['--out', 'table3.csv', 'reproduce', '3'])
            self.assertEqual(result.exit_code, 0, result.output)
            with open('table3.csv') as table_file:
                self.assertEqual(table_file.readline().strip(),
                                 'set,quantity,computed,reference,deviation')

    def test_moment_table_needs_heston(self):
        with self.runner.isolated_filesystem():
            write_json('bs.json', {'model': 'bs'})
            result = self.invoke(['--config', 'bs.json', 'reproduce', '3'])
        self.assertEqual(result.exit_code, 2)
        self.assertIn('table 3 needs the heston model', result.output)

    def test_unknown_table(self):
        result = self.invoke(['reproduce', '6'])
        self.assertEqual(result.exit_code, 2)


class ExtrapolateCommandTest(CliTest):

    def test_flat_smile_from_config(self):
        result = self.invoke(['extrapolate'])
        self.assertEqual(result.exit_code, 0, result.output)
        lines = result.output.splitlines()
        self.assertEqual(lines[0], 'maturity,moneyness,price,total_variance')
        self.assertEqual(len(lines), 1 + 2 * 18)
        self.assertTrue(lines[1].startswith('1,0.3,'))
        self.assertTrue(lines[-1].startswith('1.5,2,'))

    def test_linear_wings_from_quotes(self):
        with self.runner.isolated_filesystem():
            write_bs_quotes('quotes.csv')
            result = self.invoke(['--quotes', 'quotes.csv', 'extrapolate'])
            self.assertEqual(result.exit_code, 0, result.output)
            lines = result.output.splitlines()
            self.assertEqual(len(lines), 1 + 2 * 18)
            # Flat wings reproduce the flat smile everywhere.
            variance = float(lines[1].split(',')[3])
            self.assertAlmostEqual(variance, 0.04, places=8)

    def test_missing_slope(self):
        with self.runner.isolated_filesystem():
            write_bs_quotes('quotes.csv')
            write_json('config.json', {'maturities': [1.0, 2.0]})
            result = self.invoke(['--quotes', 'quotes.csv', '--config',
                                  'config.json', 'extrapolate'])
        self.assertEqual(result.exit_code, 2)
        self.assertIn('no slope for a quoted maturity', result.output)


class GenHestonCommandTest(CliTest):

    def test_generated_quotes_validate(self):
        with self.runner.isolated_filesystem():
            result = self.invoke(['--out', 'heston.csv', 'gen-heston'])
            self.assertEqual(result.exit_code, 0, result.output)
            with open('heston.csv') as quotes_file:
                lines = quotes_file.read().splitlines()
            self.assertEqual(lines[0], 'maturity,moneyness,price')
            self.assertEqual(len(lines), 11)
            result = self.invoke(['--quotes', 'heston.csv', 'validate'])
            self.assertEqual(result.exit_code, 0, result.output)

    def test_needs_heston_model(self):
        with self.runner.isolated_filesystem():
            write_json('bs.json', {'model': 'bs'})
            result = self.invoke(['--config', 'bs.json', 'gen-heston'])
        self.assertEqual(result.exit_code, 2)


class BoundCommandTest(CliTest):

    def test_super_and_sub_bounds(self):
        with self.runner.isolated_filesystem():
            write_json('small.json', SMALL_GRID)
            result = self.invoke(['--config', 'small.json', 'bound'])
            self.assertEqual(result.exit_code, 0, result.output)
            upper = self.json_output(result)
            result = self.invoke(['--config', 'small.json', 'bound',
                                  '--side', 'sub', '--measure', 'm.csv'])
            self.assertEqual(result.exit_code, 0, result.output)
            lower = self.json_output(result)
            with open('m.csv') as measure_file:
                self.assertEqual(measure_file.readline().strip(),
                                 's1,s2,weight')
        self.assertEqual(upper['side'], 'super')
        self.assertEqual(lower['side'], 'sub')
        self.assertLessEqual(lower['bound'], upper['bound'] + 1e-9)
        self.assertEqual(upper['overrides'], SMALL_GRID)
        self.assertLess(abs(upper['gap']), 1e-6)
        self.assertEqual(len(upper['option_weights']), 2 * 18)

    def test_forward_is_free(self):
        with self.runner.isolated_filesystem():
            write_json('small.json', SMALL_GRID)
            result = self.invoke(['--config', 'small.json', 'bound',
                                  '--payoff', 'forward'])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertAlmostEqual(self.json_output(result)['bound'], 0.0,
                               places=6)

    def test_zero_flags_are_rejected(self):
        for flag, message in (('--fs-strike', 'fs_strike must be positive'),
                              ('--grid-points',
                               'grid_points must be at least 2'),
                              ('--grid-max', 'grid_max must be positive')):
            result = self.invoke(['bound', flag, '0'])
            self.assertEqual(result.exit_code, 2, result.output)
            self.assertIn(message, result.output)

    def test_flags_reach_workbench(self):
        with mock.patch.object(Workbench, 'bound') as bound:
            result = self.invoke(['bound', '--side', 'sub', '--grid-points',
                                  '20', '--basis-degree', '0'])
        self.assertEqual(result.exit_code, 0, result.output)
        bound.assert_called_once_with('forward-start-straddle', None, 'sub',
                                      20, None, 0, None)


class SensitivityCommandTest(CliTest):

    def test_inline_perturbations(self):
        with self.runner.isolated_filesystem():
            write_json('small.json', SMALL_GRID)
            result = self.invoke(['--config', 'small.json', '--out',
                                  'study.csv', 'sensitivity',
                                  '--perturbations', '[0, 1e-4]'])
            self.assertEqual(result.exit_code, 0, result.output)
            with open('study.csv') as study_file:
                lines = study_file.read().splitlines()
        self.assertEqual(lines[0], 'perturbation,derivative,optimal_value,'
                                   'estimated_value,abs_diff')
        self.assertEqual(len(lines), 3)

    def test_perturbation_file(self):
        with mock.patch.object(Workbench, 'sensitivity') as sensitivity:
            result = self.invoke(['sensitivity', '--perturbations',
                                  'points.json'])
        self.assertEqual(result.exit_code, 0, result.output)
        sensitivity.assert_called_once_with('points.json')

    def test_invalid_perturbations(self):
        with self.runner.isolated_filesystem():
            write_json('small.json', SMALL_GRID)
            result = self.invoke(['--config', 'small.json', 'sensitivity',
                                  '--perturbations', '[0, 1e-4'])
        self.assertEqual(result.exit_code, 2)
        self.assertIn('perturbations are not valid JSON', result.output)


if __name__ == '__main__':
    unittest.main()
