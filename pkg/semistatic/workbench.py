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

from logging import getLogger
import json
import os

import click
import numpy as np

from . import hedging_lp
from .config import ExperimentConfig
from .exceptions import ConfigError, DomainError
from .experiments import build_family, build_setup, reproduce_table
from .formatter import Formatter
from .heston_pricer import heston_call_vector, heston_monte_carlo_calls
from .market_data import (CallQuoteSet, load_quotes, total_variance,
                          write_quotes)
from .sensitivity import perturbation_study
from .static_arbitrage import (convex_order_check, feasible_envelope,
                               validate_quotes)
from .wing_extrapolation import (bs_flat_wing_surface,
                                 extrapolated_call_prices,
                                 heston_critical_moments,
                                 heston_wing_surface, linear_wing_surface)

__logs__ = getLogger(__package__)


class Workbench(object):
    """Runs the semistatic commands.

    Attributes:
        * quotes_path: The quote CSV given with --quotes, or None.
        * config_path: The JSON config given with --config, or None.
        * out: The output path given with --out, or None for stdout.
        * output_format: The --format choice, or None for the command's
            default.
    """

    FIGURE_COLUMNS = ['element', 'kind', 'k_start', 'c_start', 'k_end',
                      'c_end']
    EXTRAPOLATE_COLUMNS = ['maturity', 'moneyness', 'price',
                           'total_variance']
    SENSITIVITY_COLUMNS = ['perturbation', 'derivative', 'optimal_value',
                           'estimated_value', 'abs_diff']
    PAYOFFS = ('forward-start-straddle', 'forward')

    def __init__(self, quotes=None, config=None, out=None,
                 output_format=None):
        """Inits Workbench.

        Args:
            * quotes: A quote CSV path (optional).
            * config: A JSON config path (optional).
            * out: An output path (optional).
            * output_format: csv, json, md or grid (optional).

        Returns:
            None.
        """
        self.quotes_path = quotes
        self.config_path = config
        self.out = out
        self.output_format = output_format

    def load_config(self, table_id=None, flags=None):
        """The --config document, or the table defaults, with command flags
        that are not None applied and validated on top."""
        if self.config_path is None:
            config = ExperimentConfig(table_id=table_id)
        else:
            config = ExperimentConfig.from_file(self.config_path, table_id)
        flags = dict((key, value) for key, value in (flags or {}).items()
                     if value is not None)
        if not flags:
            return config
        values = config.overrides.copy()
        values.update(flags)
        return ExperimentConfig(values, table_id)

    def load_quote_set(self):
        if self.quotes_path is None:
            raise ConfigError('this command needs --quotes')
        return load_quotes(self.quotes_path)

    def formatter(self, default):
        return Formatter(self.output_format or default)

    def emit(self, text):
        """Writes text to --out, or echoes it to stdout."""
        if not text.endswith('\n'):
            text += '\n'
        if self.out is None:
            click.echo(text, nl=False)
        else:
            with open(self.out, 'w') as out_file:
                out_file.write(text)

    def validate(self):
        """Checks the quotes for static arbitrage.

        Returns:
            True if every check passed.
        """
        quote_set = self.load_quote_set()
        report = validate_quotes(quote_set)
        document = report.to_dict()
        if len(quote_set.maturities) > 1:
            order = convex_order_check(quote_set)
            document['convex_order'] = {
                'passed': order.passed,
                'checked': order.checked,
                'violations': [v._asdict() for v in order.violations],
            }
            document['passed'] = document['passed'] and order.passed
        self.emit(self.formatter('json').format_document(document))
        return document['passed']

    def _quoted_slices(self, quote_set):
        quoted = {}
        for t in quote_set.maturities:
            k = quote_set.log_moneyness(t)
            w = np.array([total_variance(ki, t, c)
                          for ki, c in zip(k, quote_set.prices(t))])
            quoted[t] = (k, w)
        return quoted

    def _heston_quotes(self, config):
        params = config.heston_params()
        strikes = config[config.CONFIG_STRIKES]
        maturities = config.maturities
        prices = [heston_call_vector(strikes, t, params, config.quadrature())
                  for t in maturities]
        return CallQuoteSet.from_prices(maturities,
                                        [strikes] * len(maturities),
                                        np.concatenate(prices))

    def _surface(self, config):
        if config.model == 'bs' and self.quotes_path is None:
            return bs_flat_wing_surface(config.sigma,
                                        config[config.CONFIG_SLOPES],
                                        config.maturities)
        if self.quotes_path is not None:
            quoted = self._quoted_slices(self.load_quote_set())
        else:
            quoted = self._quoted_slices(self._heston_quotes(config))
        if config.model == 'bs':
            slopes = dict((t, (a, a)) for t, a in
                          zip(config.maturities, config[config.CONFIG_SLOPES]))
            missing = sorted(set(quoted) - set(slopes))
            if missing:
                raise ConfigError('no slope for a quoted maturity',
                                  maturities=missing)
            return linear_wing_surface(quoted, slopes)
        flat = config.moment_orders()
        if flat is None:
            orders = dict((t, heston_critical_moments(config.heston_params(),
                                                      t))
                          for t in quoted)
        else:
            orders = dict((t, (flat[2 * i], flat[2 * i + 1]))
                          for i, t in enumerate(config.maturities))
        return heston_wing_surface(quoted, orders)

    def extrapolate(self):
        """Prices the target strikes off the extrapolated surface."""
        config = self.load_config()
        surface = self._surface(config).check_wings()
        targets = np.asarray(config[config.CONFIG_TARGET_STRIKES])
        prices = extrapolated_call_prices(
            surface, [targets] * len(surface.maturities))
        prices = prices.reshape(len(surface.maturities), len(targets))
        rows = []
        for t, row in zip(surface.maturities, prices):
            w = surface.w(t, np.log(targets))
            for strike, price, wi in zip(targets, row, w):
                rows.append({'maturity': t, 'moneyness': strike,
                             'price': price, 'total_variance': wi})
        self.emit(self.formatter('csv').format_rows(
            rows, self.EXTRAPOLATE_COLUMNS))

    def gen_heston(self, mc_paths=0, seed=None):
        """Writes Heston-model quotes for the config's strikes.

        A positive mc_paths reports the largest gap to a Monte Carlo
        estimate in units of its standard error.
        """
        config = self.load_config(table_id=4)
        if config.model != 'heston':
            raise ConfigError('gen-heston needs the heston model')
        quote_set = self._heston_quotes(config)
        if mc_paths:
            params = config.heston_params()
            for t in quote_set.maturities:
                strikes = quote_set.strikes(t)
                estimate, errors = heston_monte_carlo_calls(
                    strikes, t, params, n_paths=mc_paths, seed=seed)
                gap = np.max(np.abs(estimate - quote_set.prices(t)) /
                             np.maximum(errors, 1e-16))
                click.echo('t={0:g}: largest gap to Monte Carlo is {1:.2f} '
                           'standard errors'.format(t, gap), err=True)
        if self.out is None:
            stream = click.get_text_stream('stdout')
            write_quotes(quote_set, stream)
        else:
            with open(self.out, 'w') as out_file:
                write_quotes(quote_set, out_file)

    def _instruments(self, config):
        if self.quotes_path is not None:
            return hedging_lp.InstrumentSet.from_quotes(self.load_quote_set())
        family = build_family(config)
        return hedging_lp.InstrumentSet(family.maturities, family.strikes,
                                        family.prices(family.base))

    def bound(self, payoff='forward-start-straddle', fs_strike=None,
              side=None, grid_points=None, grid_max=None,
              basis_degree=None, measure_path=None):
        """Solves one side of the hedging problem.

        Flags left as None fall back to the config.
        """
        config = self.load_config(flags={
            ExperimentConfig.CONFIG_FS_STRIKE: fs_strike,
            ExperimentConfig.CONFIG_SIDE: side,
            ExperimentConfig.CONFIG_GRID_POINTS: grid_points,
            ExperimentConfig.CONFIG_GRID_MAX: grid_max,
            ExperimentConfig.CONFIG_BASIS_DEGREE: basis_degree,
        })
        fs_strike = config[config.CONFIG_FS_STRIKE]
        side = config.side
        grid_points = config[config.CONFIG_GRID_POINTS]
        grid_max = config[config.CONFIG_GRID_MAX]
        basis_degree = config[config.CONFIG_BASIS_DEGREE]
        instruments = self._instruments(config)
        grid = hedging_lp.build_grid(int(grid_points), float(grid_max),
                                     instruments.maturities)
        if payoff == 'forward-start-straddle':
            spec = hedging_lp.forward_start_straddle(float(fs_strike))
        elif payoff == 'forward':
            spec = hedging_lp.forward()
        else:
            raise DomainError('unknown payoff', payoff=payoff)
        hedge, measure = hedging_lp.solve_bound(
            spec, instruments, hedging_lp.StrategyBasis(int(basis_degree)),
            grid, side, workers=int(config[config.CONFIG_WORKERS]))
        report = hedging_lp.duality_report(hedge, measure)
        document = hedge.to_dict()
        document.update({'gap': report.gap,
                         'complementarity': report.complementarity,
                         'grid': grid.metadata,
                         'overrides': config.overrides})
        self.emit(self.formatter('json').format_document(document))
        if measure_path is not None:
            measure.to_frame().to_csv(measure_path, index=False,
                                      float_format='%.15g',
                                      lineterminator='\n')
        return hedge

    def sensitivity(self, perturbations=None):
        """Runs a perturbation study of the config's setup.

        Args:
            * perturbations: A JSON list, inline or as a file path,
                replacing the config's perturbations.
        """
        config = self.load_config()
        if perturbations is not None:
            if os.path.isfile(perturbations):
                with open(perturbations) as perturbation_file:
                    perturbations = perturbation_file.read()
            try:
                values = json.loads(perturbations)
            except ValueError as error:
                raise ConfigError('perturbations are not valid JSON',
                                  reason=str(error))
            if not isinstance(values, list):
                raise ConfigError('perturbations must be a JSON list')
        else:
            values = config[config.CONFIG_PERTURBATIONS]
        setup = build_setup(config)
        report = perturbation_study(setup, [setup.family.point(v)
                                            for v in values],
                                    workers=int(config[config.CONFIG_WORKERS]))
        for row in report.invalid():
            __logs__.warning('Row %s not solved: %s', row.perturbation,
                             row.reason)
        self.emit(self.formatter('csv').format_rows(
            report.to_rows(), self.SENSITIVITY_COLUMNS,
            {'base_value': report.base_value, 'side': report.side,
             'overrides': config.overrides}))
        return report

    def reproduce(self, table_id):
        """Recomputes a reference table.

        The rendered table goes to stdout; --out receives the rows as CSV.
        Metadata, including every config override, is part of json output
        and echoed to stderr otherwise.
        """
        config = self.load_config(table_id)
        result = reproduce_table(table_id, config)
        formatter = Formatter(self.output_format or 'md')
        click.echo(formatter.format_rows(result.rows, result.columns,
                                         result.metadata))
        if formatter.output_format != 'json':
            for key in sorted(result.metadata):
                click.echo('# {0}: {1}'.format(
                    key, json.dumps(result.metadata[key], default=str)),
                    err=True)
        if self.out is not None:
            with open(self.out, 'w') as out_file:
                out_file.write(Formatter('csv').format_rows(result.rows,
                                                            result.columns))
        return result

    def figure_region(self, maturity=None):
        """Envelope segments and markers of one maturity, as CSV rows."""
        quote_set = self.load_quote_set()
        if maturity is None:
            if len(quote_set.maturities) != 1:
                raise DomainError('several maturities quoted; pick one',
                                  maturities=list(quote_set.maturities))
            maturity = quote_set.maturities[0]
        elif maturity not in quote_set.maturities:
            raise DomainError('maturity not quoted', maturity=maturity)
        segments, markers = feasible_envelope(quote_set.strikes(maturity),
                                              quote_set.prices(maturity),
                                              maturity)
        rows = [dict(segment._asdict(), element='segment')
                for segment in segments]
        rows.extend({'element': 'marker', 'kind': marker.kind,
                     'k_start': marker.strike, 'c_start': marker.price,
                     'k_end': marker.strike, 'c_end': marker.price}
                    for marker in markers)
        self.emit(self.formatter('csv').format_rows(rows,
                                                    self.FIGURE_COLUMNS))
        return rows
