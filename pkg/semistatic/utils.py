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

import logging

import click
import numpy as np


def print_error(message):
    """Prints the given message in red on stderr using click.secho.

    Args:
        * message: A string to be printed.

    Returns:
        None.
    """
    click.secho(message, fg='red', err=True)


def configure_logging(verbosity):
    """Sends package logs to stderr.

    Args:
        * verbosity: An int count of -v flags: 0 warnings, 1 info,
            2 or more debug.

    Returns:
        None.
    """
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity,
                                                      logging.DEBUG)
    logging.basicConfig(level=level,
                        format='%(asctime)s %(name)s %(levelname)s '
                               '%(message)s')


def to_builtin(value):
    """Converts numpy scalars and arrays (also nested in lists, tuples and
    dicts) to plain Python values for json."""
    if isinstance(value, dict):
        return dict((str(key), to_builtin(item))
                    for key, item in value.items())
    if isinstance(value, (list, tuple)):
        return [to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value
