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
semistatic.static_arbitrage
===========================

Static-arbitrage checks on call quotes and on linear variance wings.

"""
from collections import namedtuple
from logging import getLogger
import math

import numpy as np

from .exceptions import DegenerateRegionError, DomainError, ExtrapolationError

__logs__ = getLogger(__package__)

TOLERANCE = 1e-12

ADMISSIBLE_EVERYWHERE = 'AdmissibleEverywhere'
ADMISSIBLE_BEYOND = 'AdmissibleBeyond'
INADMISSIBLE = 'Inadmissible'

SIDES = ('left', 'right')

Violation = namedtuple('Violation',
                       ['condition', 'maturity', 'strikes', 'magnitude'])
WingAdmissibility = namedtuple('WingAdmissibility', ['slope', 'intercept',
                                                     'side', 'verdict',
                                                     'k_star'])
Line = namedtuple('Line', ['slope', 'intercept'])
FeasibleRegion = namedtuple('FeasibleRegion', ['maturity', 'k_square',
                                               'k_circle', 'left_line',
                                               'right_line'])
CDFValue = namedtuple('CDFValue', ['value', 'clamped'])
ConvexOrderReport = namedtuple('ConvexOrderReport',
                               ['passed', 'violations', 'checked'])
ConvexOrderViolation = namedtuple('ConvexOrderViolation',
                                  ['earlier', 'later', 'strike', 'magnitude'])
Segment = namedtuple('Segment', ['kind', 'k_start', 'c_start', 'k_end',
                                 'c_end'])
Marker = namedtuple('Marker', ['kind', 'strike', 'price'])


class ValidationReport(object):
    """Outcome of validate_quotes.

    Attributes:
        * violations: A list of Violation, in maturity order.
        * g_min: A dict mapping maturity to the minimum of the butterfly
            function g over the checked range, filled only when a surface
            was supplied.
    """

    def __init__(self, violations, g_min=None):
        self.violations = list(violations)
        self.g_min = dict(g_min or {})

    @property
    def passed(self):
        return not self.violations

    def conditions(self):
        return sorted(set(v.condition for v in self.violations))

    def to_dict(self):
        return {
            'passed': self.passed,
            'violations': [{'condition': v.condition,
                            'maturity': v.maturity,
                            'strikes': list(v.strikes),
                            'magnitude': v.magnitude}
                           for v in self.violations],
            'g_min': {str(t): g for t, g in sorted(self.g_min.items())},
        }


def _butterfly(strikes, prices):
    """Second differences of c scaled so uniform strikes give c1-2c2+c3."""
    h1 = strikes[1:-1] - strikes[:-2]
    h2 = strikes[2:] - strikes[1:-1]
    return 2.0 * (h2 * prices[:-2] - (h1 + h2) * prices[1:-1]
                  + h1 * prices[2:]) / (h1 + h2)


def _check_maturity(maturity, strikes, prices, tol):
    violations = []
    for strike, price in zip(strikes, prices):
        lower = max(1.0 - strike, 0.0)
        if price - lower <= tol:
            violations.append(Violation('price-bound', maturity, (strike,),
                                        max(lower - price, tol)))
        if 1.0 - price <= tol:
            violations.append(Violation('price-bound', maturity, (strike,),
                                        max(price - 1.0, tol)))
    steps = np.diff(prices)
    for i, step in enumerate(steps):
        if step >= -tol:
            violations.append(Violation('v', maturity,
                                        (strikes[i], strikes[i + 1]),
                                        max(step, tol)))
    if len(strikes) >= 2:
        slope = (prices[1] - prices[0]) / (strikes[1] - strikes[0])
        if slope < -1.0 - tol:
            violations.append(Violation('ii', maturity,
                                        (strikes[0], strikes[1]),
                                        -1.0 - slope))
    if len(strikes) >= 3:
        for i, weight in enumerate(_butterfly(strikes, prices)):
            triple = tuple(strikes[i:i + 3])
            if weight < -tol:
                violations.append(Violation('convexity', maturity, triple,
                                            -weight))
            elif weight <= tol:
                violations.append(Violation('zero-butterfly', maturity,
                                            triple, max(abs(weight), tol)))
    return violations


def validate_quotes(quote_set, surface=None, tol=TOLERANCE):
    """Checks call quotes for static arbitrage.

    Per maturity: strict price bounds (1 - K)+ < c < 1, strictly decreasing
    prices, positive butterflies (zero ones are flagged too) and a first
    chord slope of at least -1. Across consecutive maturities calls at
    common strikes must not decrease. Failures are reported, not raised.

    Args:
        * quote_set: A CallQuoteSet.
        * surface: An optional TotalVarianceSurface; when given the report
            carries the minimum of g over each maturity's quoted k-range.
        * tol: A float reporting tolerance.

    Returns:
        A ValidationReport.
    """
    violations = []
    for maturity in quote_set.maturities:
        violations.extend(_check_maturity(maturity,
                                          quote_set.strikes(maturity),
                                          quote_set.prices(maturity), tol))
    for earlier, later in zip(quote_set.maturities,
                              quote_set.maturities[1:]):
        later_prices = dict(zip(np.round(quote_set.strikes(later), 12),
                                quote_set.prices(later)))
        for strike, price in zip(quote_set.strikes(earlier),
                                 quote_set.prices(earlier)):
            other = later_prices.get(round(strike, 12))
            if other is not None and price - other > tol:
                violations.append(Violation('vi', earlier, (strike,),
                                            price - other))
    g_min = {}
    if surface is not None:
        for maturity in quote_set.maturities:
            k = quote_set.log_moneyness(maturity)
            grid = np.linspace(k[0], k[-1], 201)
            g_min[maturity] = surface_g_min(surface, maturity, grid)
    report = ValidationReport(violations, g_min)
    __logs__.info('Validated %s quotes: %s violations', len(quote_set),
                  len(report.violations))
    return report


def _interpolate_calls(strikes, prices, grid):
    inside = (grid >= strikes[0]) & (grid <= strikes[-1])
    values = np.full(len(grid), np.nan)
    values[inside] = np.interp(grid[inside], strikes, prices)
    return values


def convex_order_check(quote_set, strikes=None, tol=TOLERANCE):
    """Compares consecutive maturities at common strikes.

    Each maturity's call curve is the piecewise-linear interpolant of its
    quotes; strikes outside either quoted range are skipped.

    Args:
        * quote_set: A CallQuoteSet with at least two maturities.
        * strikes: The strikes to compare at; defaults to the union of the
            quoted strikes.
        * tol: A float tolerance on c(K, t1) - c(K, t2).

    Returns:
        A ConvexOrderReport.
    """
    if len(quote_set.maturities) < 2:
        raise DomainError('convex order needs two maturities')
    if strikes is None:
        strikes = np.unique(np.concatenate(
            [quote_set.strikes(t) for t in quote_set.maturities]))
    strikes = np.asarray(strikes, dtype=float)
    violations = []
    checked = 0
    for earlier, later in zip(quote_set.maturities,
                              quote_set.maturities[1:]):
        first = _interpolate_calls(quote_set.strikes(earlier),
                                   quote_set.prices(earlier), strikes)
        second = _interpolate_calls(quote_set.strikes(later),
                                    quote_set.prices(later), strikes)
        usable = ~(np.isnan(first) | np.isnan(second))
        checked += int(usable.sum())
        excess = first - second
        for i in np.flatnonzero(usable & (excess > tol)):
            violations.append(ConvexOrderViolation(earlier, later,
                                                   float(strikes[i]),
                                                   float(excess[i])))
    return ConvexOrderReport(not violations, violations, checked)


def g_function(w, wk, wkk, k):
    """Butterfly function of a total-variance slice.

    g = (1 - k w' / (2 w))^2 - w'^2 / 4 (1 / w + 1 / 4) + w'' / 2

    Args:
        * w, wk, wkk: Total variance and its first two k-derivatives.
        * k: Log-moneyness.

    Returns:
        A float or array of g values.
    """
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise DomainError('total variance must be positive')
    wk = np.asarray(wk, dtype=float)
    value = ((1.0 - np.asarray(k) * wk / (2.0 * w)) ** 2
             - wk ** 2 / 4.0 * (1.0 / w + 0.25)
             + np.asarray(wkk, dtype=float) / 2.0)
    if value.ndim == 0:
        return float(value)
    return value


def surface_g_min(surface, maturity, k_grid):
    """Minimum of g over a k-grid using the slice's analytic derivatives."""
    return float(np.min(surface.g_values(maturity, k_grid)))


def wing_admissibility(a0, a1, side='right'):
    """Classifies a linear wing w = a1 |k| + a0 for butterfly arbitrage.

    Args:
        * a0: Intercept, the total variance at k = 0.
        * a1: Slope of the wing.
        * side: 'left' or 'right'.

    Returns:
        A WingAdmissibility; for the left side k_star is mirrored.
    """
    if a0 < 0 or a1 < 0:
        raise DomainError('wing intercept and slope must be non-negative',
                          a0=a0, a1=a1)
    if side not in SIDES:
        raise DomainError('side must be left or right', side=side)
    k_star = None
    if a1 > 2.0:
        verdict = INADMISSIBLE
    elif a1 == 0.0:
        verdict = ADMISSIBLE_EVERYWHERE
    elif a1 == 2.0:
        if a0 >= 2.0:
            verdict = ADMISSIBLE_EVERYWHERE
        else:
            # The numerator of g is affine here; k_star is its zero.
            verdict = ADMISSIBLE_BEYOND
            k_star = a0 * (8.0 - 6.0 * a0) / (8.0 * (a0 - 2.0))
    elif a0 >= 2.0 - math.sqrt(4.0 - a1 * a1):
        verdict = ADMISSIBLE_EVERYWHERE
    else:
        verdict = ADMISSIBLE_BEYOND
        root = math.sqrt(max(a0 * a0 - 4.0 * a0 + a1 * a1, 0.0))
        k_star = ((a1 * (a0 + 2.0) - 8.0 * a0 / a1 + 2.0 * root)
                  / (4.0 - a1 * a1))
    if k_star is not None and side == 'left':
        k_star = -k_star
    return WingAdmissibility(a1, a0, side, verdict, k_star)


def breeden_litzenberger_cdf(strikes, prices, strike):
    """Distribution function mu([0, K]) = 1 + right derivative of c at K.

    The right derivative is the chord slope of the bracketing interval. A
    value outside [0, 1] is clamped and flagged.

    Raises:
        ExtrapolationError: if K is not inside [K_first, K_last).
    """
    strikes = np.asarray(strikes, dtype=float)
    prices = np.asarray(prices, dtype=float)
    if not strikes[0] <= strike < strikes[-1]:
        raise ExtrapolationError('strike outside the quoted grid',
                                 strike=strike)
    i = int(np.searchsorted(strikes, strike, side='right')) - 1
    slope = (prices[i + 1] - prices[i]) / (strikes[i + 1] - strikes[i])
    value = 1.0 + slope
    clamped = float(min(max(value, 0.0), 1.0))
    if clamped != value:
        __logs__.warning('Clamped distribution value %s at K=%s', value,
                         strike)
    return CDFValue(clamped, clamped != value)


def _line(k1, c1, k2, c2):
    slope = (c2 - c1) / (k2 - k1)
    return Line(slope, c1 - slope * k1)


def feasible_extrapolation_region(strikes, prices, maturity=None):
    """Where linear extrapolations of the outer quotes hit the price bounds.

    Args:
        * strikes, prices: The quotes of one maturity, strikes increasing.
        * maturity: Carried into the result.

    Returns:
        A FeasibleRegion: k_square is where the line through the first two
            quotes meets (1 - K)+, k_circle where the line through the last
            two meets zero.
    """
    strikes = np.asarray(strikes, dtype=float)
    prices = np.asarray(prices, dtype=float)
    if len(strikes) < 2:
        raise DegenerateRegionError('two quotes are needed',
                                    found=len(strikes))
    lower = np.maximum(1.0 - strikes, 0.0)
    if np.any(prices <= lower) or np.any(prices >= 1.0):
        raise DomainError('prices must lie strictly inside their bounds')
    left = _line(strikes[0], prices[0], strikes[1], prices[1])
    right = _line(strikes[-2], prices[-2], strikes[-1], prices[-1])
    if left.slope <= -1.0:
        raise DegenerateRegionError('left line never meets 1 - K',
                                    slope=left.slope)
    k_square = (1.0 - left.intercept) / (1.0 + left.slope)
    if not 0.0 < k_square < strikes[0]:
        raise DegenerateRegionError('left line meets 1 - K outside (0, K1)',
                                    k_square=k_square)
    if right.slope >= 0.0:
        raise DegenerateRegionError('right line never meets zero',
                                    slope=right.slope)
    k_circle = strikes[-1] - prices[-1] / right.slope
    return FeasibleRegion(maturity, float(k_square), float(k_circle), left,
                          right)


def _value(line, strike):
    return line.slope * strike + line.intercept


def feasible_envelope(strikes, prices, maturity=None):
    """Piecewise envelope of arbitrage-free call values for one maturity.

    Outer extensions run from the square to the first quote and from the
    last quote to the circle. Each interval between quotes adds its chord
    (upper) and the larger of the neighbouring chord extensions (lower),
    split where those extensions cross.

    Returns:
        A tuple (segments, markers) of Segment and Marker lists.
    """
    strikes = np.asarray(strikes, dtype=float)
    prices = np.asarray(prices, dtype=float)
    region = feasible_extrapolation_region(strikes, prices, maturity)
    segments = [
        Segment('left_extension', region.k_square, 1.0 - region.k_square,
                strikes[0], prices[0]),
        Segment('right_extension', strikes[-1], prices[-1],
                region.k_circle, 0.0),
    ]
    n = len(strikes)
    if n >= 3:
        chords = [_line(strikes[i], prices[i], strikes[i + 1], prices[i + 1])
                  for i in range(n - 1)]
        for i in range(n - 1):
            lo, hi = strikes[i], strikes[i + 1]
            segments.append(Segment('chord', lo, prices[i], hi,
                                    prices[i + 1]))
            neighbours = [chords[j] for j in (i - 1, i + 1)
                          if 0 <= j < n - 1]
            segments.extend(_lower_segments(neighbours, lo, hi))
    markers = [Marker('square', region.k_square, 1.0 - region.k_square),
               Marker('circle', region.k_circle, 0.0)]
    return segments, markers


def _lower_segments(lines, lo, hi):
    if len(lines) == 1:
        line = lines[0]
        return [Segment('lower', lo, _value(line, lo), hi, _value(line, hi))]
    first, second = lines
    if first.slope != second.slope:
        cross = (second.intercept - first.intercept) / (first.slope -
                                                        second.slope)
        if lo < cross < hi:
            head = first if _value(first, lo) >= _value(second, lo) else second
            tail = second if head is first else first
            return [Segment('lower', lo, _value(head, lo), cross,
                            _value(head, cross)),
                    Segment('lower', cross, _value(tail, cross), hi,
                            _value(tail, hi))]
    mid = 0.5 * (lo + hi)
    top = first if _value(first, mid) >= _value(second, mid) else second
    return [Segment('lower', lo, _value(top, lo), hi, _value(top, hi))]
