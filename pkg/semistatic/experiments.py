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
"""
semistatic.experiments
======================

Builds bound setups from an ExperimentConfig and reproduces the reference
perturbation tables.

"""
from collections import namedtuple
from logging import getLogger
import json
import os

from . import hedging_lp
from .config import ExperimentConfig
from .exceptions import ConfigError
from .sensitivity import (BlackScholesWingFamily, BoundSetup,
                          HestonWingFamily, PerturbationSpec,
                          perturbation_study)
from .wing_extrapolation import heston_critical_moments, lee_psi

__logs__ = getLogger(__package__)

REFERENCE_TABLES = os.path.join(os.path.dirname(__file__), 'data',
                            'reference_tables.json')
STUDY_COLUMNS = ['perturbation', 'derivative', 'optimal_value',
                 'estimated_value', 'abs_diff', 'reference_derivative',
                 'reference_optimal_value', 'reference_estimated_value',
                 'reference_abs_diff', 'deviation', 'valid', 'reason']
MOMENT_COLUMNS = ['set', 'quantity', 'computed', 'reference', 'deviation']

TableResult = namedtuple('TableResult', ['rows', 'columns', 'metadata'])


def load_reference_tables(path=REFERENCE_TABLES):
    with open(path) as tables_file:
        return json.load(tables_file)


def build_family(config):
    """The surface family described by a config."""
    maturities = config.maturities
    targets = [config[config.CONFIG_TARGET_STRIKES]] * len(maturities)
    if config.model == 'bs':
        return BlackScholesWingFamily(config.sigma, maturities, targets,
                                      base=config[config.CONFIG_SLOPES])
    params = config.heston_params()
    base = config.moment_orders()
    if base is None:
        base = []
        for t in maturities:
            moments = heston_critical_moments(params, t)
            base.extend([moments.q_star, moments.p_star])
    return HestonWingFamily(params, maturities,
                            config[config.CONFIG_STRIKES], targets, base,
                            config.quadrature())


def build_setup(config, side=None, validate=True):
    """A BoundSetup for the forward-start straddle of a config."""
    grid = hedging_lp.build_grid(int(config[config.CONFIG_GRID_POINTS]),
                                 float(config[config.CONFIG_GRID_MAX]),
                                 config.maturities)
    basis = hedging_lp.StrategyBasis(int(config[config.CONFIG_BASIS_DEGREE]))
    payoff = hedging_lp.forward_start_straddle(
        float(config[config.CONFIG_FS_STRIKE]))
    return BoundSetup(payoff, build_family(config), grid, basis,
                      side or config.side, validate)


def _moment_table(config, reference):
    params = config.heston_params()
    rows = []
    published_rows = reference['rows']
    base = published_rows[0]
    labels = reference['columns']
    for i, t in enumerate(config.maturities[:2]):
        moments = heston_critical_moments(params, t)
        for name, value in (('q', moments.q_star), ('p', moments.p_star)):
            quantity = '{0}_t{1}'.format(name, i + 1)
            published = base[labels.index(quantity)]
            rows.append({'set': 'computed', 'quantity': quantity,
                         'computed': value, 'reference': published,
                         'deviation': value - published})
    for published_row in published_rows:
        for i in (1, 2):
            for name in ('q', 'p'):
                order = published_row[labels.index('{0}_t{1}'.format(name, i))]
                quantity = 'psi_{0}_t{1}'.format(name, i)
                published = published_row[labels.index(quantity)]
                value = lee_psi(order)
                rows.append({'set': published_row[0], 'quantity': quantity,
                             'computed': value, 'reference': published,
                             'deviation': value - published})
    return rows


def _study_table(config, reference):
    setup = build_setup(config)
    perturbations = config[config.CONFIG_PERTURBATIONS]
    compare = reference is not None and not any(
        key in config.overrides for key in (config.CONFIG_PERTURBATIONS,
                                            config.CONFIG_SIDE,
                                            config.CONFIG_MODEL))
    specs = []
    for i, value in enumerate(perturbations):
        if config.model == 'heston':
            label = str(i + 1) if compare else None
        else:
            label = '{0:g}'.format(value) if not isinstance(value, list) \
                else None
        specs.append(PerturbationSpec.parametric(
            setup.family.point(value), label))
    report = perturbation_study(setup, specs,
                                workers=int(config[config.CONFIG_WORKERS]))
    rows = []
    for i, row in enumerate(report.rows):
        record = row._asdict()
        published = reference['rows'][i] if compare else [None] * 5
        for name, value in zip(reference['columns'][1:] if compare
                               else STUDY_COLUMNS[1:5], published[1:]):
            record['reference_' + name] = value
        record['deviation'] = (row.optimal_value - published[2]
                               if compare and row.optimal_value is not None
                               else None)
        rows.append(record)
    return rows, report, setup


def reproduce_table(table_id, config=None):
    """Recomputes a reference table.

    Args:
        * table_id: 1 to 5. Table 3 lists critical moments and wing slopes,
            the others run a perturbation study of the forward-start
            straddle bound.
        * config: An optional ExperimentConfig built for table_id; the
            table's defaults otherwise.

    Returns:
        A TableResult whose metadata echoes every config override.
    """
    if table_id not in ExperimentConfig.TABLES:
        raise ConfigError('unknown table', table=table_id)
    config = config or ExperimentConfig(table_id=table_id)
    tables = load_reference_tables()
    reference = tables['tables'].get(str(table_id))
    metadata = {'table': table_id, 'caption': reference['caption'],
                'model': config.model, 'overrides': config.overrides,
                'provenance': tables['provenance']}
    if table_id == 3:
        if config.model != 'heston':
            raise ConfigError('table 3 needs the heston model')
        rows = _moment_table(config, reference)
        __logs__.info('Reproduced table 3 with %s rows', len(rows))
        return TableResult(rows, MOMENT_COLUMNS, metadata)
    rows, report, setup = _study_table(config, reference)
    metadata.update({'side': setup.side, 'base_value': report.base_value,
                     'grid': setup.grid.metadata,
                     'basis_degree': config[config.CONFIG_BASIS_DEGREE]})
    __logs__.info('Reproduced table %s: base value %s', table_id,
                  report.base_value)
    return TableResult(rows, STUDY_COLUMNS, metadata)
