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

import pandas as pd
from tabulate import tabulate

from .exceptions import ConfigError
from .utils import to_builtin


class Formatter(object):
    """Renders result rows and documents.

    Attributes:
        * FORMATS: The supported output formats: csv, json, md (pipe table)
            and grid (terminal table).
        * output_format: The selected format.
    """

    FORMATS = ('csv', 'json', 'md', 'grid')

    def __init__(self, output_format='grid'):
        """Inits Formatter.

        Args:
            * output_format: One of FORMATS.

        Raises:
            ConfigError: on an unsupported format.
        """
        if output_format not in self.FORMATS:
            raise ConfigError('unsupported output format',
                              output_format=output_format)
        self.output_format = output_format

    def format_rows(self, rows, columns=None, metadata=None):
        """Renders a list of row dicts.

        Args:
            * rows: A list of dicts.
            * columns: Column order; the keys of the first row when omitted.
            * metadata: A dict kept alongside the rows in json output.

        Returns:
            A string.
        """
        rows = to_builtin(list(rows))
        if columns is None:
            columns = list(rows[0]) if rows else []
        if self.output_format == 'json':
            document = {'rows': rows}
            if metadata:
                document['metadata'] = to_builtin(metadata)
            return json.dumps(document, indent=2, sort_keys=True)
        if self.output_format == 'csv':
            frame = pd.DataFrame(rows, columns=columns)
            return frame.to_csv(index=False, float_format='%.10g',
                                lineterminator='\n')
        table = [[row.get(column) for column in columns] for row in rows]
        tablefmt = 'pipe' if self.output_format == 'md' else 'grid'
        return tabulate(table, headers=columns, tablefmt=tablefmt,
                        floatfmt='.6g', missingval='-')

    def format_document(self, document):
        """Renders a dict: json as is, other formats as key/value rows."""
        document = to_builtin(document)
        if self.output_format == 'json':
            return json.dumps(document, indent=2, sort_keys=True)
        rows = [{'key': key, 'value': (json.dumps(value)
                                       if isinstance(value, (list, dict))
                                       else value)}
                for key, value in sorted(document.items())]
        return self.format_rows(rows, ['key', 'value'])
