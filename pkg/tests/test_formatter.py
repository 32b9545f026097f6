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
import unittest

import numpy as np

from semistatic.exceptions import ConfigError
from semistatic.formatter import Formatter
from semistatic.utils import to_builtin


ROWS = [
    {'perturbation': 0.0, 'bound': np.float64(0.149), 'valid': True},
    {'perturbation': np.float64(5e-5), 'bound': None, 'valid': False},
]
COLUMNS = ['perturbation', 'bound', 'valid']


class FormatterTest(unittest.TestCase):

    def test_unsupported_format(self):
        with self.assertRaises(ConfigError) as context:
            Formatter('xlsx')
        self.assertEqual(context.exception.details['output_format'], 'xlsx')

    def test_csv(self):
        text = Formatter('csv').format_rows(ROWS, COLUMNS)
        lines = text.splitlines()
        self.assertEqual(lines[0], 'perturbation,bound,valid')
        self.assertEqual(lines[1], '0,0.149,True')
        self.assertEqual(lines[2], '5e-05,,False')
        self.assertTrue(text.endswith('\n'))

    def test_csv_column_order(self):
        text = Formatter('csv').format_rows(ROWS, ['valid', 'perturbation'])
        self.assertEqual(text.splitlines()[0], 'valid,perturbation')

    def test_csv_no_rows(self):
        text = Formatter('csv').format_rows([], ['a', 'b'])
        self.assertEqual(text, 'a,b\n')

    def test_json(self):
        text = Formatter('json').format_rows(ROWS, COLUMNS,
                                             metadata={'table': 1})
        document = json.loads(text)
        self.assertEqual(document['metadata'], {'table': 1})
        self.assertEqual(document['rows'][0]['bound'], 0.149)
        self.assertIsNone(document['rows'][1]['bound'])
        self.assertEqual(document['rows'][1]['perturbation'], 5e-5)

    def test_json_without_metadata(self):
        document = json.loads(Formatter('json').format_rows(ROWS))
        self.assertEqual(list(document), ['rows'])

    def test_markdown(self):
        lines = Formatter('md').format_rows(ROWS, COLUMNS).splitlines()
        self.assertEqual(len(lines), 4)
        self.assertTrue(all(line.startswith('|') for line in lines))
        self.assertIn('perturbation', lines[0])
        self.assertIn('-', lines[1])
        self.assertIn('0.149', lines[2])

    def test_grid_missing_value(self):
        text = Formatter().format_rows(ROWS, COLUMNS)
        self.assertTrue(text.startswith('+'))
        row = [line for line in text.splitlines() if '5e-05' in line][0]
        cells = [cell.strip() for cell in row.strip('|').split('|')]
        self.assertEqual(cells[1], '-')

    def test_columns_default_to_first_row(self):
        text = Formatter('csv').format_rows([{'b': 1, 'a': 2}])
        self.assertEqual(text.splitlines()[0], 'b,a')


class FormatDocumentTest(unittest.TestCase):

    DOCUMENT = {'passed': True, 'violations': [],
                'counts': {'calls': 36}, 'bound': np.float64(0.1)}

    def test_json(self):
        text = Formatter('json').format_document(self.DOCUMENT)
        self.assertEqual(json.loads(text), {'passed': True, 'violations': [],
                                            'counts': {'calls': 36},
                                            'bound': 0.1})
        self.assertLess(text.index('"bound"'), text.index('"passed"'))

    def test_key_value_rows(self):
        text = Formatter('csv').format_document(self.DOCUMENT)
        lines = text.splitlines()
        self.assertEqual(lines[0], 'key,value')
        self.assertEqual(lines[1], 'bound,0.1')
        self.assertEqual(lines[2], 'counts,"{""calls"": 36}"')
        self.assertEqual(lines[4], 'violations,[]')


class ToBuiltinTest(unittest.TestCase):

    def test_numpy_values(self):
        value = to_builtin({'a': np.float64(1.5), 'b': np.arange(3),
                            1: (np.int64(2), [np.bool_(True)])})
        self.assertEqual(value, {'a': 1.5, 'b': [0, 1, 2],
                                 '1': [2, [True]]})
        self.assertIs(type(value['a']), float)
        self.assertIs(type(value['b'][0]), int)
        self.assertIs(type(value['1'][1][0]), bool)

    def test_plain_values_unchanged(self):
        self.assertEqual(to_builtin('x'), 'x')
        self.assertIsNone(to_builtin(None))


if __name__ == '__main__':
    unittest.main()
