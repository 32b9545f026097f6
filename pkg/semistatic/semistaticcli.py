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

import click

from .exceptions import SemistaticError, exit_code_for
from .formatter import Formatter
from .utils import configure_logging, print_error
from .workbench import Workbench


pass_workbench = click.make_pass_decorator(Workbench)


class ReportingGroup(click.Group):
    """Click group that turns library errors into exit codes."""

    def invoke(self, ctx):
        try:
            return super(ReportingGroup, self).invoke(ctx)
        except (SemistaticError, IOError, OSError) as error:
            print_error('Error: {0}'.format(error))
            ctx.exit(exit_code_for(error))


class SemistaticCli(object):
    """Encapsulates the SemistaticCli.

    Attributes:
        * None.
    """

    @click.group(cls=ReportingGroup)
    @click.option('--quotes', default=None,
                  help='Call quote CSV (maturity,moneyness,price).')
    @click.option('--config', default=None, help='JSON experiment config.')
    @click.option('--out', default=None, help='Output file.')
    @click.option('--format', 'output_format', default=None,
                  type=click.Choice(list(Formatter.FORMATS)))
    @click.option('-v', '--verbose', count=True)
    @click.pass_context
    def cli(ctx, quotes, config, out, output_format, verbose):
        """Main entry point for SemistaticCli.

        Args:
            * ctx: An instance of click.core.Context that stores an instance
                 of Workbench used to run the commands.
            * quotes: A quote CSV path.
            * config: A JSON config path.
            * out: An output path.
            * output_format: csv, json, md or grid.
            * verbose: An int count of -v flags.

        Returns:
            None.
        """
        configure_logging(verbose)
        ctx.obj = Workbench(quotes, config, out, output_format)

    @cli.command()
    @pass_workbench
    @click.pass_context
    def validate(ctx, workbench):
        """Checks the quotes for static arbitrage.

        Exits with 0 if every check passes and 1 otherwise.

        Example(s):
            semistatic --quotes quotes.csv validate
        """
        if not workbench.validate():
            ctx.exit(1)

    @cli.command()
    @pass_workbench
    def extrapolate(workbench):
        """Prices target strikes off an extrapolated variance surface.

        Example(s):
            semistatic --quotes quotes.csv --config heston.json extrapolate
        """
        workbench.extrapolate()

    @cli.command('gen-heston')
    @click.option('--mc-paths', default=0, type=int,
                  help='Monte Carlo paths for a cross-check (0 skips it).')
    @click.option('--seed', default=None, type=int)
    @pass_workbench
    def gen_heston(workbench, mc_paths, seed):
        """Writes Heston-model call quotes.

        Example(s):
            semistatic --out quotes.csv gen-heston
            semistatic gen-heston --mc-paths 100000 --seed 7
        """
        workbench.gen_heston(mc_paths, seed)

    @cli.command()
    @click.option('--payoff', default='forward-start-straddle',
                  type=click.Choice(list(Workbench.PAYOFFS)))
    @click.option('--fs-strike', default=None, type=float)
    @click.option('--side', default=None, type=click.Choice(['super', 'sub']))
    @click.option('--grid-points', default=None, type=int)
    @click.option('--grid-max', default=None, type=float)
    @click.option('--basis-degree', default=None, type=int)
    @click.option('--measure', 'measure_path', default=None,
                  help='Writes the optimal measure as s1,s2,weight CSV.')
    @pass_workbench
    def bound(workbench, payoff, fs_strike, side, grid_points, grid_max,
              basis_degree, measure_path):
        """Computes a super- or sub-hedging bound.

        Example(s):
            semistatic --quotes quotes.csv bound --side sub --grid-points 100
        """
        workbench.bound(payoff, fs_strike, side, grid_points, grid_max,
                        basis_degree, measure_path)

    @cli.command()
    @click.option('--perturbations', default=None,
                  help='JSON list of parameter points, inline or a file.')
    @pass_workbench
    def sensitivity(workbench, perturbations):
        """Runs a first-order perturbation study.

        Example(s):
            semistatic --config bs.json sensitivity --perturbations "[0, 1e-4]"
        """
        workbench.sensitivity(perturbations)

    @cli.command()
    @click.argument('table_id', type=click.IntRange(1, 5))
    @pass_workbench
    def reproduce(workbench, table_id):
        """Recomputes a reference table and compares it.

        Example(s):
            semistatic reproduce 3
            semistatic --config small-grid.json --out table1.csv reproduce 1
        """
        workbench.reproduce(table_id)

    @cli.command('figure-region')
    @click.option('--maturity', default=None, type=float)
    @pass_workbench
    def figure_region(workbench, maturity):
        """Writes the feasible extrapolation envelope as CSV.

        Example(s):
            semistatic --quotes one_maturity.csv figure-region
        """
        workbench.figure_region(maturity)
