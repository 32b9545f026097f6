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
semistatic.heston_pricer
========================

Normalized Heston call prices from the characteristic function of log S_t
(single-integral Lewis representation), plus a Monte Carlo cross-check.

"""
from collections import namedtuple
from logging import getLogger
import math

import numpy as np
from scipy.integrate import quad

from .exceptions import DomainError, QuadratureError

__logs__ = getLogger(__package__)

TRUNCATION_START = 50.0
TRUNCATION_MAX = 1e4


class HestonQuadratureConfig(namedtuple('HestonQuadratureConfig',
                                        ['upper_limit', 'epsabs', 'epsrel',
                                         'limit'])):
    """Quadrature settings.

    Attributes:
        * upper_limit: A float truncation bound, or None to pick it from
            the decay of the integrand.
        * epsabs, epsrel: Positive float tolerances handed to quad.
        * limit: An int subinterval budget.
    """

    __slots__ = ()

    def __new__(cls, upper_limit=None, epsabs=1e-12, epsrel=1e-10,
                limit=500):
        if not (epsabs > 0 and epsrel > 0):
            raise DomainError('quadrature tolerances must be positive',
                              epsabs=epsabs, epsrel=epsrel)
        if upper_limit is not None and not upper_limit > 0:
            raise DomainError('upper limit must be positive',
                              upper_limit=upper_limit)
        return super(HestonQuadratureConfig, cls).__new__(
            cls, upper_limit, float(epsabs), float(epsrel), int(limit))


def _log1p(z):
    """Complex log(1 + z), accurate for small |z|."""
    x, y = z.real, z.imag
    return (0.5 * np.log1p(2.0 * x + x * x + y * y)
            + 1j * np.arctan2(y, 1.0 + x))


def heston_char_fn(u, t, params):
    """E[exp(i u log S_t)] under Heston dynamics with S_0 = 1.

    Uses the rotation-free form with g = (b - d) / (b + d) and exp(-d t),
    which keeps the complex logarithm on its principal branch. The
    differences b - d and the logarithm are formed without cancellation
    so small vol-of-vol stays accurate.

    Args:
        * u: A complex scalar or array.
        * t: A float maturity.
        * params: HestonParams.

    Returns:
        A complex scalar or array.
    """
    if not t > 0:
        raise DomainError('maturity must be positive', t=t)
    u = np.asarray(u, dtype=complex)
    kappa, theta, xi, v0, rho = params
    iu = 1j * u
    a = iu + u * u
    b = kappa - rho * xi * iu
    d = np.sqrt(b * b + xi * xi * a)
    b_plus_d = b + d
    # b - d == -xi^2 a / (b + d)
    b_minus_d_scaled = -a / b_plus_d
    g = xi * xi * b_minus_d_scaled / b_plus_d
    decay = np.exp(-d * t)
    log_term = (_log1p(-g * decay) - _log1p(-g)) / (xi * xi)
    big_c = kappa * theta * (b_minus_d_scaled * t - 2.0 * log_term)
    big_d = b_minus_d_scaled * (-np.expm1(-d * t)) / (1.0 - g * decay)
    value = np.exp(big_c + big_d * v0)
    return complex(value) if value.ndim == 0 else value


def bs_char_fn(u, t, sigma):
    """Characteristic function of log S_t under Black-Scholes."""
    u = np.asarray(u, dtype=complex)
    value = np.exp(-0.5 * sigma * sigma * t * (1j * u + u * u))
    return complex(value) if value.ndim == 0 else value


def _truncation(t, params, config, k):
    if config.upper_limit is not None:
        return config.upper_limit
    upper = TRUNCATION_START
    scale = math.exp(0.5 * k) / math.pi
    while upper < TRUNCATION_MAX:
        tail = abs(heston_char_fn(upper - 0.5j, t, params)) * scale / (
            upper * upper + 0.25)
        if tail * upper < config.epsabs:
            break
        upper *= 2.0
    __logs__.debug('Heston truncation %s for k=%s t=%s', upper, k, t)
    return upper


def heston_call(k, t, params, config=None):
    """Normalized Heston call price.

    c = 1 - sqrt(K) / pi * int_0^U Re[e^(-i u k) phi(u - i/2)] /
    (u^2 + 1/4) du

    Args:
        * k: A float log-moneyness.
        * t: A float maturity.
        * params: HestonParams.
        * config: An optional HestonQuadratureConfig.

    Returns:
        A float price in ((1 - e^k)+, 1).

    Raises:
        QuadratureError: if quad does not converge or the price leaves its
            bounds.
    """
    config = config or HestonQuadratureConfig()
    k = float(k)

    def integrand(u):
        value = np.exp(-1j * u * k) * heston_char_fn(u - 0.5j, t, params)
        return value.real / (u * u + 0.25)

    upper = _truncation(t, params, config, k)
    result = quad(integrand, 0.0, upper, epsabs=config.epsabs,
                  epsrel=config.epsrel, limit=config.limit, full_output=1)
    if len(result) > 3:
        raise QuadratureError('Heston integral did not converge', k=k, t=t,
                              abserr=result[1], message=result[3])
    integral, abserr = result[0], result[1]
    price = 1.0 - math.exp(0.5 * k) / math.pi * integral
    intrinsic = max(1.0 - math.exp(k), 0.0)
    if not intrinsic < price < 1.0:
        raise QuadratureError('Heston price outside its bounds', k=k, t=t,
                              price=price, abserr=abserr)
    return price


def heston_call_vector(strikes, t, params, config=None):
    """Heston prices at the given strikes for one maturity."""
    return np.array([heston_call(math.log(strike), t, params, config)
                     for strike in strikes])


def heston_monte_carlo_calls(strikes, t, params, n_paths=200000,
                             n_steps=200, seed=None):
    """Full-truncation Euler Monte Carlo prices with standard errors.

    Args:
        * strikes: A sequence of moneyness values.
        * t: A float maturity.
        * params: HestonParams.
        * n_paths, n_steps: Simulation sizes.
        * seed: Seed for numpy.random.default_rng.

    Returns:
        A tuple (prices, standard_errors) of numpy arrays.
    """
    kappa, theta, xi, v0, rho = params
    rng = np.random.default_rng(seed)
    dt = t / n_steps
    log_s = np.zeros(n_paths)
    v = np.full(n_paths, v0)
    orthogonal = math.sqrt(1.0 - rho * rho)
    for _ in range(n_steps):
        z1 = rng.standard_normal(n_paths)
        z2 = rho * z1 + orthogonal * rng.standard_normal(n_paths)
        v_plus = np.maximum(v, 0.0)
        root = np.sqrt(v_plus * dt)
        log_s += -0.5 * v_plus * dt + root * z1
        v += kappa * (theta - v_plus) * dt + xi * root * z2
    spot = np.exp(log_s)
    payoffs = np.maximum(spot[:, None] - np.asarray(strikes)[None, :], 0.0)
    prices = payoffs.mean(axis=0)
    errors = payoffs.std(axis=0, ddof=1) / math.sqrt(n_paths)
    return prices, errors
