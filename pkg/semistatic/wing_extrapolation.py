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
semistatic.wing_extrapolation
=============================

Total implied variance surfaces: piecewise-linear between quoted strikes,
linear wings outside. Wing slopes come from raw values, from the flat
Black-Scholes smile, or from critical moment orders through Lee's moment
formula.

"""
from collections import namedtuple
from logging import getLogger
import math

import numpy as np
from scipy.optimize import brentq

from .exceptions import (DomainError, ExtrapolationError,
                         InadmissibleExtrapolationError, RootNotFoundError,
                         TransformInvalidError)
from .market_data import bs_call_price
from .static_arbitrage import g_function

__logs__ = getLogger(__package__)

WING_G_TOLERANCE = 1e-10
MOMENT_SCAN = (1.0, 200.0)
MOMENT_SCAN_POINTS = 4000
ROOT_TOLERANCE = 1e-12

CriticalMoments = namedtuple('CriticalMoments',
                             ['maturity', 'p_star', 'q_star'])


class WingSpec(namedtuple('WingSpec', ['side', 'anchor_k', 'anchor_w',
                                       'slope'])):
    """A linear wing anchored at the outermost quoted log-moneyness."""

    __slots__ = ()

    def __new__(cls, side, anchor_k, anchor_w, slope):
        if side not in ('left', 'right'):
            raise DomainError('side must be left or right', side=side)
        if not 0.0 <= slope <= 2.0:
            raise InadmissibleExtrapolationError('wing slope outside [0, 2]',
                                                 side=side, slope=slope)
        if not anchor_w > 0:
            raise DomainError('anchor variance must be positive',
                              anchor_w=anchor_w)
        return super(WingSpec, cls).__new__(cls, side, float(anchor_k),
                                            float(anchor_w), float(slope))


class HestonParams(namedtuple('HestonParams', ['kappa', 'theta', 'xi', 'v0',
                                               'rho'])):
    """Heston parameters: mean reversion, long-run variance, vol of vol,
    initial variance and correlation."""

    __slots__ = ()

    def __new__(cls, kappa, theta, xi, v0, rho):
        values = [float(x) for x in (kappa, theta, xi, v0, rho)]
        if min(values[:4]) <= 0:
            raise DomainError('kappa, theta, xi and v0 must be positive',
                              params=values)
        if not -1.0 <= values[4] <= 1.0:
            raise DomainError('rho must lie in [-1, 1]', rho=values[4])
        return super(HestonParams, cls).__new__(cls, *values)

    def share_transform(self):
        """Parameters of the dynamics under the share measure.

        kappa' = kappa - rho xi, theta' = kappa theta / kappa', rho' = -rho.
        """
        kappa = self.kappa - self.rho * self.xi
        if not kappa > 0:
            raise TransformInvalidError('kappa - rho * xi must be positive',
                                        value=kappa)
        return HestonParams(kappa, self.kappa * self.theta / kappa, self.xi,
                            self.v0, -self.rho)


class VarianceSlice(object):
    """Total variance of one maturity as a function of log-moneyness.

    Attributes:
        * maturity: A float year fraction.
        * k_nodes, w_nodes: Arrays of quoted log-moneyness and variance.
        * left, right: WingSpec instances anchored at the outer nodes.
    """

    def __init__(self, maturity, k_nodes, w_nodes, left, right):
        self.maturity = float(maturity)
        self.k_nodes = np.asarray(k_nodes, dtype=float)
        self.w_nodes = np.asarray(w_nodes, dtype=float)
        if not len(self.k_nodes):
            raise DomainError('a slice needs at least one quoted point',
                              maturity=maturity)
        if np.any(np.diff(self.k_nodes) <= 0):
            raise DomainError('log-moneyness nodes must increase',
                              maturity=maturity)
        if np.any(self.w_nodes <= 0):
            raise DomainError('total variance must be positive',
                              maturity=maturity)
        self.left = left
        self.right = right

    def value(self, k):
        k = np.asarray(k, dtype=float)
        k_left, k_right = self.k_nodes[0], self.k_nodes[-1]
        inner = np.interp(k, self.k_nodes, self.w_nodes)
        w = np.where(k < k_left,
                     self.left.anchor_w + self.left.slope * (k_left - k),
                     inner)
        return np.where(k > k_right,
                        self.right.anchor_w + self.right.slope * (k - k_right),
                        w)

    def first_derivative(self, k):
        """Right derivative of w in k."""
        k = np.asarray(k, dtype=float)
        slopes = np.append(np.diff(self.w_nodes) / np.diff(self.k_nodes),
                           self.right.slope)
        index = np.clip(np.searchsorted(self.k_nodes, k, side='right') - 1,
                        0, len(slopes) - 1)
        dw = slopes[index]
        dw = np.where(k < self.k_nodes[0], -self.left.slope, dw)
        return np.where(k >= self.k_nodes[-1], self.right.slope, dw)

    def second_derivative(self, k):
        return np.zeros_like(np.asarray(k, dtype=float))

    def g(self, k):
        return g_function(self.value(k), self.first_derivative(k),
                          self.second_derivative(k), k)


class TotalVarianceSurface(object):
    """Variance slices keyed by maturity.

    Attributes:
        * maturities: A tuple of increasing maturities.
    """

    def __init__(self, slices):
        slices = sorted(slices, key=lambda s: s.maturity)
        self._slices = {s.maturity: s for s in slices}
        self.maturities = tuple(s.maturity for s in slices)

    def slice(self, maturity):
        try:
            return self._slices[maturity]
        except KeyError:
            raise ExtrapolationError('no slice for maturity',
                                     maturity=maturity)

    def w(self, maturity, k):
        return self.slice(maturity).value(k)

    def g_values(self, maturity, k):
        return self.slice(maturity).g(k)

    def calendar_violations(self, k_grid, tol=1e-12):
        """Points where w decreases between consecutive maturities."""
        k_grid = np.asarray(k_grid, dtype=float)
        found = []
        for earlier, later in zip(self.maturities, self.maturities[1:]):
            excess = self.w(earlier, k_grid) - self.w(later, k_grid)
            for i in np.flatnonzero(excess > tol):
                found.append((earlier, later, float(k_grid[i]),
                              float(excess[i])))
        return found

    def check_wings(self, span=10.0, points=1000):
        """Samples g on both wings of every slice.

        Raises:
            InadmissibleExtrapolationError: if g drops below -1e-10.
        """
        for maturity in self.maturities:
            piece = self.slice(maturity)
            k = np.concatenate([
                np.linspace(piece.k_nodes[0] - span, piece.k_nodes[0],
                            points),
                np.linspace(piece.k_nodes[-1], piece.k_nodes[-1] + span,
                            points)])
            g_min = float(np.min(piece.g(k)))
            if g_min < -WING_G_TOLERANCE:
                raise InadmissibleExtrapolationError(
                    'wing admits butterfly arbitrage', maturity=maturity,
                    g_min=g_min)
        return self


def lee_psi(z):
    """Lee's slope bound psi(z) = 2 - 4 (sqrt(z (z + 1)) - z)."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError('moment order must be non-negative')
    psi = 2.0 - 4.0 * z / (np.sqrt(z * (z + 1.0)) + z + (z == 0))
    return float(psi) if psi.ndim == 0 else psi


def lee_psi_derivative(z):
    """d psi / dz = -psi(z) / sqrt(z (z + 1))."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise DomainError('moment order must be positive')
    value = -lee_psi(z) / np.sqrt(z * (z + 1.0))
    return float(value) if np.ndim(value) == 0 else value


def bs_max_slope(sigma, t):
    """Largest symmetric wing slope keeping w = a |k| + sigma^2 t free of
    butterfly arbitrage."""
    base = sigma * sigma * t
    if base >= 4.0:
        raise DomainError('sigma^2 t must be below 4', value=base)
    return math.sqrt(4.0 - (2.0 - base) ** 2)


def _per_maturity(values, maturities, name):
    if isinstance(values, dict):
        try:
            return [values[t] for t in maturities]
        except KeyError as error:
            raise DomainError('missing {0} for a maturity'.format(name),
                              maturity=error.args[0])
    values = list(values)
    if len(values) != len(maturities):
        raise DomainError('one {0} per maturity expected'.format(name),
                          expected=len(maturities), found=len(values))
    return values


def bs_flat_wing_surface(sigma, slopes, maturities=None):
    """Flat smile sigma with symmetric wings w = a_t |k| + sigma^2 t.

    Args:
        * sigma: A float annualized volatility.
        * slopes: A dict maturity -> slope, or a sequence aligned with
            maturities.
        * maturities: Needed when slopes is a sequence.

    Returns:
        A TotalVarianceSurface.

    Raises:
        InadmissibleExtrapolationError: if a slope is negative or above
            bs_max_slope(sigma, t).
    """
    if maturities is None:
        maturities = sorted(slopes)
    slices = []
    for t, slope in zip(maturities, _per_maturity(slopes, maturities,
                                                  'slope')):
        bound = bs_max_slope(sigma, t)
        if not 0.0 <= slope <= bound * (1.0 + 1e-12):
            raise InadmissibleExtrapolationError(
                'slope outside [0, bs_max_slope]', maturity=t, slope=slope,
                bound=bound)
        base = sigma * sigma * t
        slices.append(VarianceSlice(t, [0.0], [base],
                                    WingSpec('left', 0.0, base, slope),
                                    WingSpec('right', 0.0, base, slope)))
    return TotalVarianceSurface(slices)


def linear_wing_surface(quoted, slopes):
    """Quoted slices extended by linear wings with the given raw slopes.

    Args:
        * quoted: A dict maturity -> (k array, w array).
        * slopes: A dict maturity -> (left slope, right slope).

    Returns:
        A TotalVarianceSurface.
    """
    if not quoted:
        raise DomainError('no quoted slices')
    slices = []
    for t in sorted(quoted):
        k, w = (np.asarray(x, dtype=float) for x in quoted[t])
        left, right = _per_maturity(slopes, [t], 'slope pair')[0]
        slices.append(VarianceSlice(t, k, w,
                                    WingSpec('left', k[0], w[0], left),
                                    WingSpec('right', k[-1], w[-1], right)))
    return TotalVarianceSurface(slices)


def heston_wing_surface(quoted, moment_orders):
    """Quoted slices with wings psi(q) on the left and psi(p) on the right.

    Args:
        * quoted: A dict maturity -> (k array, w array).
        * moment_orders: A dict maturity -> (q, p) or CriticalMoments.

    Returns:
        A TotalVarianceSurface.
    """
    slopes = {}
    for t in quoted:
        orders = _per_maturity(moment_orders, [t], 'moment orders')[0]
        if isinstance(orders, CriticalMoments):
            q, p = orders.q_star, orders.p_star
        else:
            q, p = orders
        if not (q > 0 and p > 0):
            raise DomainError('moment orders must be positive', q=q, p=p)
        slopes[t] = (lee_psi(q), lee_psi(p))
    return linear_wing_surface(quoted, slopes)


def _moment_equation(params, t, p):
    """(kappa - rho xi p) + beta cot(beta t / 2), with
    beta^2 = xi^2 p (p - 1) - (kappa - rho xi p)^2; nan off the real domain."""
    drift = params.kappa - params.rho * params.xi * p
    beta_sq = params.xi ** 2 * p * (p - 1.0) - drift ** 2
    with np.errstate(invalid='ignore', divide='ignore'):
        beta = np.sqrt(np.where(beta_sq > 0, beta_sq, np.nan))
        half = beta * t / 2.0
        return drift + beta * np.cos(half) / np.sin(half), half


def heston_critical_moment_right(params, t):
    """Critical moment p*: E[S^(1+p)] is finite exactly for p < p*.

    The root equation is scanned on a log-spaced grid over (1, 200] for the
    first sign change that is not a pole of cot, then refined by Brent's
    method.

    Raises:
        RootNotFoundError: if the scan finds no sign change.
    """
    if not t > 0:
        raise DomainError('maturity must be positive', t=t)
    if not abs(params.rho) < 1:
        raise DomainError('|rho| must be below one', rho=params.rho)
    low, high = MOMENT_SCAN
    grid = low + np.logspace(-6, math.log10(high - low), MOMENT_SCAN_POINTS)
    values, half = _moment_equation(params, t, grid)
    branch = np.floor(half / math.pi)
    for i in range(len(grid) - 1):
        a, b = values[i], values[i + 1]
        if np.isnan(a) or np.isnan(b) or branch[i] != branch[i + 1]:
            continue
        if a == 0:
            return float(grid[i])
        if a * b < 0:
            __logs__.debug('Critical moment bracket [%s, %s] at t=%s',
                           grid[i], grid[i + 1], t)
            root = brentq(lambda p: float(_moment_equation(params, t, p)[0]),
                          grid[i], grid[i + 1], xtol=ROOT_TOLERANCE,
                          maxiter=200)
            return float(root)
    raise RootNotFoundError('no sign change of the moment equation',
                            t=t, scan=MOMENT_SCAN)


def heston_critical_moment_left(params, t):
    """Critical moment q*: E[S^-q] is finite exactly for q < q*.

    Solves the right-hand equation under the share-measure parameters.
    """
    return heston_critical_moment_right(params.share_transform(), t)


def heston_critical_moments(params, t):
    return CriticalMoments(t, heston_critical_moment_right(params, t),
                           heston_critical_moment_left(params, t))


def moment_equation_residual(params, t, p):
    """Value of the critical moment equation at p."""
    return float(_moment_equation(params, t, p)[0])


def extrapolated_call_prices(surface, strikes):
    """Black-Scholes prices of the surface at the requested strikes.

    Args:
        * surface: A TotalVarianceSurface.
        * strikes: A dict maturity -> strikes, or per-maturity sequences
            aligned with surface.maturities.

    Returns:
        A maturity-major numpy array of prices.

    Raises:
        ExtrapolationError: if a price is not strictly inside its bounds.
    """
    rows = _per_maturity(strikes, surface.maturities, 'strike list')
    prices = []
    for t, row in zip(surface.maturities, rows):
        k = np.log(np.asarray(row, dtype=float))
        price = np.atleast_1d(bs_call_price(k, np.sqrt(surface.w(t, k))))
        intrinsic = np.maximum(1.0 - np.exp(k), 0.0)
        if np.any(price <= intrinsic) or np.any(price >= 1.0):
            raise ExtrapolationError('extrapolated price on its bound',
                                     maturity=t)
        prices.append(price)
    return np.concatenate(prices)
