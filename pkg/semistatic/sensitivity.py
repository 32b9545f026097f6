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
semistatic.sensitivity
======================

First-order sensitivity of hedging bounds to call-price perturbations,
raw or driven by the wing parameters of an extrapolated surface.

"""
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from logging import getLogger

import numpy as np
from scipy.stats import norm

from . import hedging_lp, lp_solver
from .exceptions import (DomainError, SemistaticError,
                         UncertifiedHedgeError)
from .heston_pricer import heston_call_vector
from .market_data import total_variance
from .static_arbitrage import validate_quotes
from .wing_extrapolation import (bs_flat_wing_surface,
                                 extrapolated_call_prices,
                                 heston_wing_surface, lee_psi_derivative)

__logs__ = getLogger(__package__)

REPORT_COLUMNS = ['perturbation', 'derivative', 'optimal_value',
                  'estimated_value', 'abs_diff']

InteriorCheck = namedtuple('InteriorCheck', ['inside', 'margin',
                                             'conditions'])
Derivative = namedtuple('Derivative', ['value', 'alternative_optima',
                                       'extreme', 'optima'])
SensitivityRow = namedtuple('SensitivityRow',
                            ['perturbation', 'derivative', 'optimal_value',
                             'estimated_value', 'abs_diff', 'valid',
                             'reason'])


class PerturbationSpec(namedtuple('PerturbationSpec', ['mode', 'vector',
                                                       'label'])):
    """A price perturbation: a raw u-vector or a parameter vector.

    Attributes:
        * mode: 'raw' or 'parametric'.
        * vector: u for raw mode, the parameter point p for parametric.
        * label: The text shown in reports.
    """

    __slots__ = ()

    @classmethod
    def raw(cls, u, label=None):
        u = np.asarray(u, dtype=float)
        return cls('raw', u, label or 'u')

    @classmethod
    def parametric(cls, params, label=None):
        params = np.atleast_1d(np.asarray(params, dtype=float))
        if label is None:
            label = ' '.join('{0:g}'.format(p) for p in params)
        return cls('parametric', params, label)


def moment_cone_interior_check(instruments, prices=None):
    """Whether perturbed call prices stay strictly inside the moment cone.

    Args:
        * instruments: An InstrumentSet.
        * prices: Optional replacement prices (the perturbed vector c + u).

    Returns:
        An InteriorCheck. margin is the smallest slack to the price bounds
            (1 - K)+ < c < 1; inside also requires validate_quotes to pass.
    """
    if prices is not None:
        prices = np.asarray(prices, dtype=float).ravel()
        if len(prices) != instruments.size:
            raise DomainError('price vector does not match the instruments',
                              expected=instruments.size, found=len(prices))
        instruments = instruments.with_prices(prices)
    strikes = np.array([k for _, k in instruments.layout()])
    lower = np.maximum(1.0 - strikes, 0.0)
    margin = float(min(np.min(instruments.prices - lower),
                       np.min(1.0 - instruments.prices)))
    if margin <= 0:
        return InteriorCheck(False, margin, ['price-bound'])
    report = validate_quotes(instruments.to_quote_set())
    return InteriorCheck(report.passed, margin, report.conditions())


def _per_strike_dc_dw(maturities, strikes, surface):
    """dc/dw = n(d) / (2 I) for every instrument, maturity-major."""
    values = []
    for t, row in zip(maturities, strikes):
        k = np.log(np.asarray(row, dtype=float))
        vol = np.sqrt(surface.w(t, k))
        d = -k / vol + vol / 2.0
        values.append(norm.pdf(d) / (2.0 * vol))
    return np.concatenate(values)


class BlackScholesWingFamily(object):
    """Flat smile with symmetric linear wings, one slope per maturity.

    Every strike except the money-neutral one moves with the slope.

    Attributes:
        * sigma: A float annualized volatility.
        * maturities: A tuple of maturities.
        * strikes: Per-maturity strike arrays priced by the surface.
        * base: The unperturbed slopes (zeros by default).
    """

    def __init__(self, sigma, maturities, strikes, base=None):
        self.sigma = float(sigma)
        self.maturities = tuple(float(t) for t in maturities)
        self.strikes = tuple(np.asarray(row, dtype=float) for row in strikes)
        if len(self.strikes) != len(self.maturities):
            raise DomainError('one strike list per maturity expected')
        self.base = (np.zeros(len(self.maturities)) if base is None
                     else self.point(base))
        self.labels = ['p_t{0}'.format(i + 1)
                       for i in range(len(self.maturities))]

    def point(self, value):
        """Parameter vector from a scalar (shared slope) or a sequence."""
        value = np.atleast_1d(np.asarray(value, dtype=float))
        if value.size == 1:
            return np.full(len(self.maturities), float(value[0]))
        if value.size != len(self.maturities):
            raise DomainError('one slope per maturity expected',
                              expected=len(self.maturities),
                              found=value.size)
        return value

    def surface(self, params):
        return bs_flat_wing_surface(self.sigma, list(self.point(params)),
                                    self.maturities)

    def prices(self, params):
        return extrapolated_call_prices(self.surface(params),
                                        list(self.strikes))

    def dwdp(self, params):
        """dw/dp: |k| in the column of the strike's maturity."""
        self.point(params)
        rows = []
        for j, row in enumerate(self.strikes):
            block = np.zeros((len(row), len(self.maturities)))
            block[:, j] = np.abs(np.log(row))
            rows.append(block)
        return np.vstack(rows)


class HestonWingFamily(object):
    """Heston-priced traded strikes with wings psi(q) and psi(p).

    Parameters are ordered (q_t1, p_t1, q_t2, p_t2, ...).

    Attributes:
        * params: HestonParams generating the traded prices.
        * maturities: A tuple of maturities.
        * traded: The traded strike array shared by all maturities.
        * strikes: Per-maturity strike arrays priced by the surface.
        * base: The unperturbed moment orders.
    """

    def __init__(self, params, maturities, traded, strikes, base,
                 quadrature=None):
        self.params = params
        self.maturities = tuple(float(t) for t in maturities)
        self.traded = np.asarray(traded, dtype=float)
        self.strikes = tuple(np.asarray(row, dtype=float) for row in strikes)
        if len(self.strikes) != len(self.maturities):
            raise DomainError('one strike list per maturity expected')
        self.quoted = {}
        for t in self.maturities:
            prices = heston_call_vector(self.traded, t, params, quadrature)
            k = np.log(self.traded)
            w = np.array([total_variance(ki, t, c)
                          for ki, c in zip(k, prices)])
            self.quoted[t] = (k, w)
        self.base = self.point(base)
        self.labels = []
        for i in range(len(self.maturities)):
            self.labels.extend(['q_t{0}'.format(i + 1),
                                'p_t{0}'.format(i + 1)])

    def point(self, value):
        value = np.asarray(value, dtype=float).ravel()
        if value.size != 2 * len(self.maturities):
            raise DomainError('a (q, p) pair per maturity expected',
                              expected=2 * len(self.maturities),
                              found=value.size)
        return value

    def surface(self, params):
        params = self.point(params)
        orders = {t: (params[2 * i], params[2 * i + 1])
                  for i, t in enumerate(self.maturities)}
        return heston_wing_surface(self.quoted, orders)

    def prices(self, params):
        return extrapolated_call_prices(self.surface(params),
                                        list(self.strikes))

    def dwdp(self, params):
        """dw/dp: psi'(z) times the distance to the wing anchor; zero on
        the traded range."""
        params = self.point(params)
        if np.any(params <= 0):
            raise DomainError('wing parameters must be positive to '
                              'differentiate', params=params.tolist())
        rows = []
        for i, (t, row) in enumerate(zip(self.maturities, self.strikes)):
            k = np.log(row)
            k_left, k_right = self.quoted[t][0][0], self.quoted[t][0][-1]
            block = np.zeros((len(row), len(params)))
            left, right = k < k_left, k > k_right
            block[left, 2 * i] = (lee_psi_derivative(params[2 * i]) *
                                  (k_left - k[left]))
            block[right, 2 * i + 1] = (lee_psi_derivative(params[2 * i + 1]) *
                                       (k[right] - k_right))
            rows.append(block)
        return np.vstack(rows)


def call_price_jacobian(family, params=None):
    """d c / d p for every instrument of a surface family.

    Combines dc/dw = Vega / (2 I sqrt(t)) = n(d) / (2 I) with the
    family's dw/dp.

    Returns:
        A (instruments x parameters) array.
    """
    params = family.base if params is None else family.point(params)
    surface = family.surface(params)
    dc_dw = _per_strike_dc_dw(family.maturities, family.strikes, surface)
    return dc_dw[:, None] * family.dwdp(params)


def directional_derivative(side, hedge, h, enumerate=False,
                           max_bases=100):
    """Directional derivative of a bound along a price perturbation h.

    Returns the inner product of the hedge's option weights with h. When
    enumerate is set and the optimum may not be unique, extreme is the
    minimum (super) or maximum (sub) over the enumerated optimal bases.

    Returns:
        A Derivative.

    Raises:
        UncertifiedHedgeError: if the hedge did not pass the certificates.
    """
    if not hedge.certified:
        raise UncertifiedHedgeError('directional derivatives need a '
                                    'certified optimal hedge',
                                    certificates=hedge.solution.certificates)
    if side != hedge.side:
        raise DomainError('hedge side does not match', side=side,
                          hedge=hedge.side)
    h = np.asarray(h, dtype=float).ravel()
    if len(h) != len(hedge.option_weights):
        raise DomainError('direction does not match the instruments',
                          expected=len(hedge.option_weights), found=len(h))
    value = float(hedge.option_weights.dot(h))
    if not (enumerate and hedge.alternative_optima):
        return Derivative(value, hedge.alternative_optima, None, 1)
    size = len(hedge.option_weights)
    duals = lp_solver.enumerate_alternative_optima(hedge.lp, hedge.solution,
                                                   max_bases)
    values = [float(hedge.sign * dual[1:1 + size].dot(h)) for dual in duals]
    extreme = min(values) if side == hedging_lp.SUPER else max(values)
    if abs(extreme - value) > 1e-12:
        __logs__.warning('Alternative optima change the derivative: %s '
                         'at the vertex, %s over %s bases', value, extreme,
                         len(values))
    return Derivative(value, True, extreme, len(values))


def chain_rule_derivative(weights, jacobian, h_param):
    """<w, J h> for a parameter direction h."""
    weights = np.asarray(weights, dtype=float).ravel()
    jacobian = np.atleast_2d(np.asarray(jacobian, dtype=float))
    h_param = np.asarray(h_param, dtype=float).ravel()
    if jacobian.shape != (len(weights), len(h_param)):
        raise DomainError('jacobian shape does not match',
                          jacobian=jacobian.shape,
                          weights=len(weights), direction=len(h_param))
    return float(weights.dot(jacobian.dot(h_param)))


def first_order_estimate(base_bound, weights, jacobian, delta):
    """base + <w, J (p - p0)>."""
    return base_bound + chain_rule_derivative(weights, jacobian, delta)


class BoundSetup(object):
    """A payoff bounded against the prices of a surface family.

    Attributes:
        * payoff: A hedging_lp.PayoffSpec.
        * family: BlackScholesWingFamily or HestonWingFamily.
        * grid: A hedging_lp.StateGrid.
        * basis: A hedging_lp.StrategyBasis.
        * side: 'super' or 'sub'.
    """

    def __init__(self, payoff, family, grid, basis, side=hedging_lp.SUPER,
                 validate=True):
        self.payoff = payoff
        self.family = family
        self.grid = grid
        self.basis = basis
        self.side = side
        self.validate = validate

    def instruments(self, params=None, prices=None):
        if prices is None:
            params = self.family.base if params is None else params
            prices = self.family.prices(params)
        return hedging_lp.InstrumentSet(self.family.maturities,
                                        self.family.strikes, prices)

    def solve(self, params=None, prices=None):
        return hedging_lp.solve_bound(self.payoff,
                                      self.instruments(params, prices),
                                      self.basis, self.grid, self.side,
                                      validate=self.validate)


class SensitivityReport(object):
    """Rows of a perturbation study in input order.

    Attributes:
        * rows: A list of SensitivityRow.
        * base_value: The unperturbed bound.
        * side: 'super' or 'sub'.
        * jacobian: The price Jacobian at the base point (parametric
            studies only).
    """

    def __init__(self, rows, base_value, side, jacobian=None):
        self.rows = rows
        self.base_value = base_value
        self.side = side
        self.jacobian = jacobian

    def to_rows(self):
        return [dict((name, getattr(row, name)) for name in REPORT_COLUMNS)
                for row in self.rows]

    def invalid(self):
        return [row for row in self.rows if not row.valid]


def perturbation_study(setup, perturbations, workers=1, enumerate=False):
    """Derivative, re-solved value and first-order estimate per
    perturbation.

    Derivatives and estimates use the hedge and Jacobian at the base
    point. Perturbed prices that leave the moment-cone interior are marked
    invalid and not solved.

    Args:
        * setup: A BoundSetup.
        * perturbations: PerturbationSpec instances, or raw parameter
            values accepted by the family's point method.
        * workers: Threads used for the re-solves.
        * enumerate: Forwarded to directional_derivative.

    Returns:
        A SensitivityReport.
    """
    family = setup.family
    base_params = family.base
    base_prices = family.prices(base_params)
    base_hedge, _ = setup.solve(prices=base_prices)
    if not base_hedge.certified:
        raise UncertifiedHedgeError('the base solve is not certified')
    jacobian = None
    specs = [p if isinstance(p, PerturbationSpec)
             else PerturbationSpec.parametric(family.point(p))
             for p in perturbations]
    if any(spec.mode == 'parametric' for spec in specs):
        jacobian = call_price_jacobian(family, base_params)
    base_instruments = setup.instruments(prices=base_prices)

    def prepare(spec):
        if spec.mode == 'raw':
            return base_prices + spec.vector, spec.vector
        delta = family.point(spec.vector) - base_params
        return family.prices(spec.vector), jacobian.dot(delta)

    def evaluate(spec):
        try:
            prices, direction = prepare(spec)
        except SemistaticError as error:
            return SensitivityRow(spec.label, None, None, None, None, False,
                                  error.msg)
        check = moment_cone_interior_check(base_instruments, prices)
        if not check.inside:
            __logs__.warning('Perturbation %s leaves the moment cone: %s',
                             spec.label, check.conditions)
            return SensitivityRow(spec.label, None, None, None, None, False,
                                  'outside the moment cone interior')
        derivative = directional_derivative(setup.side, base_hedge,
                                            direction, enumerate)
        slope = (derivative.value if derivative.extreme is None
                 else derivative.extreme)
        estimate = base_hedge.bound + slope
        if not np.any(direction) and not np.any(prices - base_prices):
            solved = base_hedge.bound
        else:
            try:
                solved = setup.solve(prices=prices)[0].bound
            except SemistaticError as error:
                __logs__.warning('Perturbation %s failed: %s', spec.label,
                                 error)
                return SensitivityRow(spec.label, slope, None, estimate,
                                      None, False, error.msg)
        __logs__.info('Perturbation %s: solved %s, estimated %s',
                      spec.label, solved, estimate)
        return SensitivityRow(spec.label, slope, solved, estimate,
                              abs(solved - estimate), True, None)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(evaluate, specs))
    else:
        rows = [evaluate(spec) for spec in specs]
    return SensitivityReport(rows, base_hedge.bound, setup.side, jacobian)
