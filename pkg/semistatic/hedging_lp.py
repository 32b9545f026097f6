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
semistatic.hedging_lp
=====================

Super- and sub-hedging of path payoffs on a finite state grid.

The LP is built over discrete measures: one column per grid state, one row
for the total mass, one per traded call and one per trading-strategy basis
function. Its row duals are the semi-static hedge: cash, call positions and
strategy coefficients.

"""
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from logging import getLogger

import numpy as np
import pandas as pd

from . import lp_solver
from .exceptions import (ArbitrageInInputsError, AssemblyError, DomainError,
                         PayoffNotDominatedError)
from .market_data import CallQuoteSet
from .static_arbitrage import validate_quotes

__logs__ = getLogger(__package__)

SUPER = 'super'
SUB = 'sub'
MEASURE_TOLERANCE = 1e-8
DOMINANCE_BLOCK = 65536

DualityReport = namedtuple('DualityReport',
                           ['primal', 'dual', 'gap', 'complementarity',
                            'call_residual', 'martingale_residual',
                            'mass_error'])
BasisStudyRow = namedtuple('BasisStudyRow',
                           ['degree', 'superhedge', 'subhedge', 'gap'])
BasisStudy = namedtuple('BasisStudy', ['rows', 'monotone'])


class StateGrid(object):
    """Product grid of underlying values at each maturity.

    States are ordered maturity-major: the first maturity's node index
    varies slowest.

    Attributes:
        * maturities: A tuple of increasing maturities.
        * nodes: A tuple of increasing, strictly positive node arrays.
    """

    def __init__(self, maturities, nodes):
        self.maturities = tuple(float(t) for t in maturities)
        self.nodes = tuple(np.asarray(n, dtype=float) for n in nodes)
        if not self.maturities or len(self.nodes) != len(self.maturities):
            raise DomainError('one node array per maturity expected')
        if np.any(np.diff(self.maturities) <= 0) or self.maturities[0] <= 0:
            raise DomainError('maturities must be positive and increasing')
        for row in self.nodes:
            if len(row) < 2 or np.any(np.diff(row) <= 0) or row[0] <= 0:
                raise DomainError('nodes must be positive and increasing')
        self.shape = tuple(len(row) for row in self.nodes)
        self.n_states = int(np.prod(self.shape))
        self.metadata = {'excludes_zero': True,
                         's_max': [float(row[-1]) for row in self.nodes],
                         'points': list(self.shape)}

    def __repr__(self):
        return '<StateGrid [{0} states over {1} maturities]>'.format(
            self.n_states, len(self.maturities))

    def maturity_index(self, maturity):
        for i, t in enumerate(self.maturities):
            if np.isclose(t, maturity, rtol=0, atol=1e-12):
                return i
        raise AssemblyError('maturity not on the grid', maturity=maturity)

    def paths(self, indices):
        """Underlying values of the given states, shape (len, maturities)."""
        coords = np.unravel_index(np.asarray(indices, dtype=int), self.shape)
        return np.column_stack([row[c] for row, c in zip(self.nodes,
                                                         coords)])

    def blocks(self, size=DOMINANCE_BLOCK):
        for start in range(0, self.n_states, size):
            yield np.arange(start, min(start + size, self.n_states))


def build_grid(n_points, s_max, maturities):
    """Uniform grid s_i = i * s_max / n_points, i = 1..n_points, per maturity.

    Zero is excluded.
    """
    if int(n_points) != n_points or n_points < 2:
        raise DomainError('at least two grid points are needed',
                          n_points=n_points)
    if not s_max > 0:
        raise DomainError('grid extent must be positive', s_max=s_max)
    maturities = sorted(float(t) for t in maturities)
    nodes = np.arange(1, int(n_points) + 1) * (float(s_max) / n_points)
    return StateGrid(maturities, [nodes] * len(maturities))


class PayoffSpec(object):
    """A payoff Phi evaluated on grid paths.

    Attributes:
        * kind: 'forward_start_straddle', 'forward', 'traded_call' or
            'custom'.
        * params: A dict of the construction parameters.
        * min_maturities: Number of maturities the rule reads.
    """

    def __init__(self, rule, kind, min_maturities=1, **params):
        self.rule = rule
        self.kind = kind
        self.params = params
        self.min_maturities = min_maturities

    def __call__(self, paths):
        return np.asarray(self.rule(np.asarray(paths, dtype=float)),
                          dtype=float)

    def __repr__(self):
        return '<PayoffSpec [{0} {1}]>'.format(self.kind, self.params)

    def negated(self):
        rule = self.rule
        return PayoffSpec(lambda paths: -rule(paths), self.kind,
                          self.min_maturities, negated=True, **self.params)

    def shifted(self, beta):
        rule = self.rule
        return PayoffSpec(lambda paths: rule(paths) + beta, self.kind,
                          self.min_maturities, shift=beta, **self.params)


def forward_start_straddle(strike, first=0, second=1):
    """Phi = |S_second - strike * S_first|."""
    if not strike > 0:
        raise DomainError('forward-start strike must be positive',
                          strike=strike)
    return PayoffSpec(
        lambda s: np.abs(s[:, second] - strike * s[:, first]),
        'forward_start_straddle', max(first, second) + 1, strike=strike)


def forward(t_index=-1):
    """Phi = S_t - 1 at the given maturity index."""
    return PayoffSpec(lambda s: s[:, t_index] - 1.0, 'forward',
                      t_index + 1 if t_index >= 0 else 1, t_index=t_index)


def traded_call(t_index, strike):
    """Phi = (S_t - strike)+ at the given maturity index."""
    return PayoffSpec(lambda s: np.maximum(s[:, t_index] - strike, 0.0),
                      'traded_call', t_index + 1 if t_index >= 0 else 1,
                      t_index=t_index, strike=strike)


def custom(rule, name='custom', min_maturities=1):
    return PayoffSpec(rule, 'custom', min_maturities, name=name)


class InstrumentSet(object):
    """Traded calls and their prices, maturity-major and strike-minor.

    Attributes:
        * maturities: A tuple of maturities with at least one strike.
        * strikes: A tuple of strike arrays, one per maturity.
        * prices: A flat price vector aligned with layout().
    """

    def __init__(self, maturities, strikes, prices):
        self.maturities = tuple(float(t) for t in maturities)
        self.strikes = tuple(np.asarray(row, dtype=float) for row in strikes)
        self.prices = np.asarray(prices, dtype=float).ravel()
        if len(self.strikes) != len(self.maturities):
            raise AssemblyError('one strike list per maturity expected')
        if len(self.prices) != self.size:
            raise AssemblyError('price vector does not match the strikes',
                                expected=self.size, found=len(self.prices))

    @classmethod
    def from_quotes(cls, quote_set):
        return cls(quote_set.maturities,
                   [quote_set.strikes(t) for t in quote_set.maturities],
                   quote_set.price_vector())

    @property
    def size(self):
        return sum(len(row) for row in self.strikes)

    def layout(self):
        return [(t, float(k)) for t, row in zip(self.maturities, self.strikes)
                for k in row]

    def with_prices(self, prices):
        return InstrumentSet(self.maturities, self.strikes, prices)

    def to_quote_set(self):
        return CallQuoteSet.from_prices(self.maturities, self.strikes,
                                        self.prices)

    def payoffs(self, paths, grid):
        """Call payoffs on paths, shape (size, len(paths))."""
        columns = []
        for t, row in zip(self.maturities, self.strikes):
            s = paths[:, grid.maturity_index(t)]
            columns.append(np.maximum(s[None, :] - row[:, None], 0.0))
        if not columns:
            return np.zeros((0, len(paths)))
        return np.vstack(columns)


class StrategyBasis(object):
    """Finite basis of self-financing strategies.

    A constant position a0 is held from time zero to the first maturity;
    between maturities j and j+1 the position is a monomial in the path
    observed so far, of total degree at most the period's cap.

    Attributes:
        * degrees: An int cap shared by every period, or a sequence with
            one cap per period.
        * include_forward: Whether the a0 slot is present.
    """

    def __init__(self, degrees=4, include_forward=True):
        self.degrees = degrees
        self.include_forward = include_forward

    def period_degrees(self, n_maturities):
        if np.ndim(self.degrees) == 0:
            caps = [int(self.degrees)] * (n_maturities - 1)
        else:
            caps = [int(d) for d in self.degrees]
        if len(caps) != n_maturities - 1:
            raise AssemblyError('one degree cap per trading period expected',
                                periods=n_maturities - 1, found=len(caps))
        if any(d < 0 for d in caps):
            raise DomainError('degree caps must be non-negative')
        return caps

    def terms(self, n_maturities):
        """(period, exponents) pairs; exponents cover S_1..S_period+1."""
        found = []
        for period, cap in enumerate(self.period_degrees(n_maturities)):
            exponents = [e for e in product(range(cap + 1),
                                            repeat=period + 1)
                         if sum(e) <= cap]
            exponents.sort(key=lambda e: (sum(e), tuple(-x for x in e)))
            found.extend((period, e) for e in exponents)
        return found

    def size(self, n_maturities):
        return int(self.include_forward) + len(self.terms(n_maturities))

    def labels(self, n_maturities):
        labels = ['forward'] if self.include_forward else []
        for period, exponents in self.terms(n_maturities):
            monomial = '*'.join('s{0}^{1}'.format(i + 1, e)
                                for i, e in enumerate(exponents) if e) or '1'
            labels.append('theta{0}[{1}]'.format(period + 1, monomial))
        return labels

    def gains(self, paths):
        """Strategy payoffs on paths, shape (size, len(paths))."""
        n_maturities = paths.shape[1]
        rows = []
        if self.include_forward:
            rows.append(paths[:, 0] - 1.0)
        for period, exponents in self.terms(n_maturities):
            position = np.ones(len(paths))
            for i, e in enumerate(exponents):
                if e:
                    position = position * paths[:, i] ** e
            rows.append(position * (paths[:, period + 1] - paths[:, period]))
        if not rows:
            return np.zeros((0, len(paths)))
        return np.vstack(rows)


class HedgeColumns(object):
    """Lazy column source: one column per grid state.

    A column holds [1, call payoffs, strategy gains] at the state and its
    cost is the payoff.
    """

    def __init__(self, payoff, instruments, basis, grid):
        self.payoff = payoff
        self.instruments = instruments
        self.basis = basis
        self.grid = grid
        self.n_rows = (1 + instruments.size +
                       basis.size(len(grid.maturities)))
        self.n_columns = grid.n_states

    def take(self, indices):
        paths = self.grid.paths(indices)
        matrix = np.vstack([np.ones((1, len(paths))),
                            self.instruments.payoffs(paths, self.grid),
                            self.basis.gains(paths)])
        return matrix, self.payoff(paths)

    def block(self, start, stop):
        return self.take(np.arange(start, stop))


def _row_labels(instruments, basis, grid):
    calls = ['call[t={0:g},K={1:g}]'.format(t, k)
             for t, k in instruments.layout()]
    return ['mass'] + calls + basis.labels(len(grid.maturities))


def assemble(payoff, instruments, basis, grid, side=SUPER):
    """Builds the measure LP for one side.

    Args:
        * payoff: A PayoffSpec.
        * instruments: An InstrumentSet whose maturities lie on the grid.
        * basis: A StrategyBasis.
        * grid: A StateGrid.
        * side: 'super' (maximize) or 'sub' (minimize).

    Returns:
        A lp_solver.StandardLP.
    """
    if side not in (SUPER, SUB):
        raise DomainError('side must be super or sub', side=side)
    if payoff.min_maturities > len(grid.maturities):
        raise AssemblyError('payoff reads more maturities than the grid has',
                            needed=payoff.min_maturities,
                            grid=len(grid.maturities))
    for t in instruments.maturities:
        grid.maturity_index(t)
    columns = HedgeColumns(payoff, instruments, basis, grid)
    n_gains = basis.size(len(grid.maturities))
    rhs = np.concatenate([[1.0], instruments.prices, np.zeros(n_gains)])
    lp = lp_solver.StandardLP(columns, rhs,
                              sense='max' if side == SUPER else 'min',
                              row_labels=_row_labels(instruments, basis,
                                                     grid))
    __logs__.info('Assembled %s-hedging LP: %s rows, %s columns', side,
                  lp.n_rows, lp.n_columns)
    return lp


class HedgeSolution(object):
    """Optimal semi-static portfolio.

    Attributes:
        * side: 'super' or 'sub'.
        * lambda_: Cash position.
        * option_weights: Call positions aligned with the instrument layout.
        * forward_position: The a0 position (0 when the slot is absent).
        * strategy_coeffs: Coefficients of the basis strategies.
        * bound: lambda_ + <prices, option_weights>.
        * slack_min, slack_mean: Dominance margin over the grid.
        * alternative_optima: True when the hedge may not be unique.
        * lp, solution: The solved problem, kept for enumeration.
        * sign: +1 when lp solves this side directly, -1 when it solves
            the negated payoff.
    """

    def __init__(self, side, duals, instruments, basis, n_maturities, lp,
                 solution, sign=1.0):
        self.side = side
        self.duals = np.asarray(duals, dtype=float)
        self.instruments = instruments
        self.strategy_basis = basis
        size = instruments.size
        self.lambda_ = float(self.duals[0])
        self.option_weights = self.duals[1:1 + size].copy()
        gains = self.duals[1 + size:]
        if basis.include_forward:
            self.forward_position = float(gains[0])
            self.strategy_coeffs = gains[1:].copy()
        else:
            self.forward_position = 0.0
            self.strategy_coeffs = gains.copy()
        self.bound = float(self.lambda_ +
                           instruments.prices.dot(self.option_weights))
        self.alternative_optima = bool(solution.primal_degenerate)
        self.certified = (solution.certificates is None or
                          solution.certificates.passed)
        self.lp = lp
        self.solution = solution
        self.sign = sign
        self.slack_min = None
        self.slack_mean = None

    def __repr__(self):
        return '<HedgeSolution [{0} {1}]>'.format(self.side, self.bound)

    def value(self, paths, grid):
        """Portfolio payoff A on the given paths."""
        matrix = np.vstack([np.ones((1, len(paths))),
                            self.instruments.payoffs(paths, grid),
                            self.strategy_basis.gains(paths)])
        return self.duals.dot(matrix)

    def to_dict(self):
        return {
            'side': self.side,
            'bound': self.bound,
            'lambda': self.lambda_,
            'option_weights': self.option_weights.tolist(),
            'forward_position': self.forward_position,
            'strategy_coeffs': self.strategy_coeffs.tolist(),
            'slack_min': self.slack_min,
            'slack_mean': self.slack_mean,
            'alternative_optima': self.alternative_optima,
        }


class DiscreteMeasure(object):
    """Weights on grid states certifying a bound.

    Attributes:
        * weights: A float array with one weight per grid state.
        * grid: The StateGrid.
        * mass: The total weight.
        * value: The payoff expectation under the weights.
        * call_prices: Call prices implied by the weights.
        * call_residuals: call_prices minus the input prices.
        * martingale_residuals: Expected gain of each basis strategy.
    """

    def __init__(self, weights, grid, payoff, instruments, basis):
        self.weights = np.asarray(weights, dtype=float)
        self.grid = grid
        self.payoff = payoff
        support = np.flatnonzero(self.weights)
        paths = grid.paths(support)
        mu = self.weights[support]
        self.mass = float(mu.sum())
        self.value = float(payoff(paths).dot(mu))
        self.call_prices = instruments.payoffs(paths, grid).dot(mu)
        self.call_residuals = self.call_prices - instruments.prices
        self.martingale_residuals = basis.gains(paths).dot(mu)

    def support(self):
        """Indices and paths of states carrying weight."""
        indices = np.flatnonzero(self.weights)
        return indices, self.grid.paths(indices)

    def to_frame(self):
        indices, paths = self.support()
        frame = pd.DataFrame(paths, columns=['s{0}'.format(i + 1)
                                             for i in range(paths.shape[1])])
        frame['weight'] = self.weights[indices]
        return frame


def dominance_check(hedge, payoff, grid, workers=1):
    """Minimum and mean of the dominance slack over every grid state.

    The slack is A - Phi for super-hedges and Phi - A for sub-hedges.
    """
    sign = 1.0 if hedge.side == SUPER else -1.0

    def block_slack(indices):
        paths = grid.paths(indices)
        slack = sign * (hedge.value(paths, grid) - payoff(paths))
        return float(slack.min()), float(slack.sum())

    blocks = list(grid.blocks())
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(block_slack, blocks))
    else:
        results = [block_slack(indices) for indices in blocks]
    slack_min = min(r[0] for r in results)
    slack_mean = sum(r[1] for r in results) / grid.n_states
    return slack_min, slack_mean


def _validate_inputs(instruments):
    report = validate_quotes(instruments.to_quote_set())
    if not report.passed:
        raise ArbitrageInInputsError('call prices fail the static-arbitrage '
                                     'checks',
                                     conditions=report.conditions())


def _solve_side(payoff, instruments, basis, grid, side, sign, tol):
    lp = assemble(payoff, instruments, basis, grid, SUPER)
    solution = lp_solver.solve(lp, tol=tol)
    if solution.status == lp_solver.INFEASIBLE:
        raise ArbitrageInInputsError('no measure on the grid reprices the '
                                     'calls; the inputs admit arbitrage',
                                     grid=grid.shape)
    if solution.status == lp_solver.UNBOUNDED:
        raise PayoffNotDominatedError('no finite portfolio dominates the '
                                      'payoff on the grid')
    hedge = HedgeSolution(side, sign * solution.y, instruments, basis,
                          len(grid.maturities), lp, solution, sign)
    measure = DiscreteMeasure(solution.x, grid, payoff, instruments, basis)
    return hedge, measure


def superhedge(payoff, instruments, basis, grid, validate=True,
               tol=lp_solver.FEASIBILITY_TOLERANCE, workers=1):
    """Cheapest semi-static portfolio dominating the payoff on the grid.

    Args:
        * payoff: A PayoffSpec.
        * instruments: An InstrumentSet.
        * basis: A StrategyBasis.
        * grid: A StateGrid.
        * validate: Whether to run the static-arbitrage checks first.
        * tol: Solver feasibility tolerance.
        * workers: Threads for the dominance recheck.

    Returns:
        A tuple (HedgeSolution, DiscreteMeasure).

    Raises:
        ArbitrageInInputsError: if the measure LP is infeasible.
        PayoffNotDominatedError: if it is unbounded.
    """
    if validate:
        _validate_inputs(instruments)
    hedge, measure = _solve_side(payoff, instruments, basis, grid, SUPER,
                                 1.0, tol)
    hedge.slack_min, hedge.slack_mean = dominance_check(hedge, payoff, grid,
                                                        workers)
    __logs__.info('Super-hedge bound %s, min slack %s', hedge.bound,
                  hedge.slack_min)
    return hedge, measure


def subhedge(payoff, instruments, basis, grid, validate=True,
             tol=lp_solver.FEASIBILITY_TOLERANCE, workers=1):
    """Dearest semi-static portfolio dominated by the payoff.

    Solved as minus the super-hedge of the negated payoff; the returned
    measure attains the lower bound for the original payoff.
    """
    if validate:
        _validate_inputs(instruments)
    hedge, _ = _solve_side(payoff.negated(), instruments, basis, grid, SUB,
                           -1.0, tol)
    measure = DiscreteMeasure(hedge.solution.x, grid, payoff, instruments,
                              basis)
    hedge.slack_min, hedge.slack_mean = dominance_check(hedge, payoff, grid,
                                                        workers)
    __logs__.info('Sub-hedge bound %s, min slack %s', hedge.bound,
                  hedge.slack_min)
    return hedge, measure


def solve_bound(payoff, instruments, basis, grid, side=SUPER, **kwargs):
    """Dispatches to superhedge or subhedge."""
    if side == SUPER:
        return superhedge(payoff, instruments, basis, grid, **kwargs)
    if side == SUB:
        return subhedge(payoff, instruments, basis, grid, **kwargs)
    raise DomainError('side must be super or sub', side=side)


def duality_report(hedge, measure):
    """Gap and residuals between a hedge and its measure.

    Returns:
        A DualityReport: relative gap between the hedge cost and the
            measure expectation, max of mu * |A - Phi| on the support,
            max call and martingale residuals and |mass - 1|.
    """
    indices, paths = measure.support()
    mu = measure.weights[indices]
    slack = np.abs(hedge.value(paths, measure.grid) - measure.payoff(paths))
    complementarity = float((mu * slack).max()) if len(mu) else 0.0
    gap = abs(hedge.bound - measure.value) / max(1.0, abs(hedge.bound))
    call_residual = float(np.abs(measure.call_residuals).max()) if \
        measure.call_residuals.size else 0.0
    martingale_residual = float(np.abs(measure.martingale_residuals).max()) \
        if measure.martingale_residuals.size else 0.0
    return DualityReport(hedge.bound, measure.value, gap, complementarity,
                         call_residual, martingale_residual,
                         abs(measure.mass - 1.0))


def refine_basis_study(payoff, instruments, grid, degrees, validate=True,
                       workers=1):
    """Bounds for a sequence of increasing strategy degree caps.

    Returns:
        A BasisStudy whose monotone flag is False if a super-hedge bound
            rises or a sub-hedge bound falls by more than 1e-8.
    """
    degrees = list(degrees)
    if any(b <= a for a, b in zip(degrees, degrees[1:])):
        raise DomainError('degrees must increase', degrees=degrees)
    rows = []
    for degree in degrees:
        basis = StrategyBasis(degree)
        upper, _ = superhedge(payoff, instruments, basis, grid, validate,
                              workers=workers)
        lower, _ = subhedge(payoff, instruments, basis, grid, False,
                            workers=workers)
        rows.append(BasisStudyRow(degree, upper.bound, lower.bound,
                                  upper.bound - lower.bound))
        validate = False
    monotone = all(b.superhedge <= a.superhedge + MEASURE_TOLERANCE and
                   b.subhedge >= a.subhedge - MEASURE_TOLERANCE
                   for a, b in zip(rows, rows[1:]))
    if not monotone:
        __logs__.warning('Basis study is not monotone: %s', rows)
    return BasisStudy(rows, monotone)
