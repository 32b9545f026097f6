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

import math
import unittest

import numpy as np

from semistatic.exceptions import DomainError, QuadratureError
from semistatic.heston_pricer import (HestonQuadratureConfig, bs_char_fn,
                                      heston_call, heston_call_vector,
                                      heston_char_fn,
                                      heston_monte_carlo_calls)
from semistatic.market_data import CallQuoteSet, bs_call_price
from semistatic.static_arbitrage import convex_order_check, validate_quotes
from semistatic.wing_extrapolation import HestonParams
from tests.compat import mock

PARAMS = HestonParams(1.0, 0.07, 0.4, 0.07, -0.8)
QUOTED = [0.8, 0.9, 1.0, 1.1, 1.2]


class CharacteristicFunctionTest(unittest.TestCase):

    def test_at_zero(self):
        self.assertAlmostEqual(heston_char_fn(0.0, 1.0, PARAMS), 1.0)

    def test_martingale(self):
        value = heston_char_fn(-1j, 1.0, PARAMS)
        self.assertAlmostEqual(value.real, 1.0, places=12)
        self.assertAlmostEqual(value.imag, 0.0, places=12)

    def test_small_vol_of_vol(self):
        params = HestonParams(1.0, 0.04, 1e-5, 0.04, -0.5)
        u = np.linspace(-20.0, 20.0, 41) - 0.5j
        np.testing.assert_allclose(heston_char_fn(u, 1.5, params),
                                   bs_char_fn(u, 1.5, 0.2), rtol=1e-4,
                                   atol=1e-12)

    def test_modulus_bounded(self):
        u = np.linspace(0.0, 100.0, 101)
        self.assertTrue(np.all(np.abs(heston_char_fn(u, 1.0, PARAMS))
                               <= 1.0 + 1e-12))

    def test_maturity_domain(self):
        self.assertRaises(DomainError, heston_char_fn, 1.0, 0.0, PARAMS)


class HestonCallTest(unittest.TestCase):

    def test_black_scholes_limit(self):
        params = HestonParams(1.0, 0.04, 1e-5, 0.04, 0.0)
        for strike in QUOTED:
            k = math.log(strike)
            self.assertAlmostEqual(heston_call(k, 1.0, params),
                                   bs_call_price(k, 0.2), places=6)

    def test_prices_inside_bounds(self):
        for t in (1.0, 1.5):
            prices = heston_call_vector(QUOTED, t, PARAMS)
            intrinsic = np.maximum(1.0 - np.array(QUOTED), 0.0)
            self.assertTrue(np.all(prices > intrinsic))
            self.assertTrue(np.all(prices < 1.0))
            self.assertTrue(np.all(np.diff(prices) < 0.0))

    def test_quotes_are_arbitrage_free(self):
        prices = [heston_call_vector(QUOTED, t, PARAMS) for t in (1.0, 1.5)]
        quote_set = CallQuoteSet.from_prices([1.0, 1.5], QUOTED, prices)
        self.assertTrue(validate_quotes(quote_set).passed)
        self.assertTrue(convex_order_check(quote_set).passed)

    def test_fixed_truncation(self):
        config = HestonQuadratureConfig(upper_limit=400.0)
        self.assertAlmostEqual(heston_call(0.0, 1.0, PARAMS, config),
                               heston_call(0.0, 1.0, PARAMS), places=8)

    def test_price_outside_bounds(self):
        with mock.patch('semistatic.heston_pricer.quad',
                        return_value=(10.0, 1e-12)):
            self.assertRaises(QuadratureError, heston_call, 0.0, 1.0, PARAMS)

    def test_no_convergence(self):
        with mock.patch('semistatic.heston_pricer.quad',
                        return_value=(0.5, 1e-3, {}, 'roundoff')):
            with self.assertRaises(QuadratureError) as context:
                heston_call(0.0, 1.0, PARAMS)
            self.assertEqual(context.exception.details['message'],
                             'roundoff')

    def test_config_validation(self):
        self.assertRaises(DomainError, HestonQuadratureConfig, epsabs=0.0)
        self.assertRaises(DomainError, HestonQuadratureConfig,
                          upper_limit=-1.0)
        self.assertEqual(HestonQuadratureConfig().limit, 500)

    def test_monte_carlo_agrees(self):
        strikes = [0.9, 1.0, 1.1]
        prices, errors = heston_monte_carlo_calls(strikes, 1.0, PARAMS,
                                                  n_paths=20000, n_steps=50,
                                                  seed=7)
        reference = heston_call_vector(strikes, 1.0, PARAMS)
        for price, error, expected in zip(prices, errors, reference):
            self.assertLess(abs(price - expected), 4.0 * error + 2e-3)

    def test_monte_carlo_is_seeded(self):
        first = heston_monte_carlo_calls([1.0], 0.5, PARAMS, n_paths=500,
                                         n_steps=10, seed=3)
        second = heston_monte_carlo_calls([1.0], 0.5, PARAMS, n_paths=500,
                                          n_steps=10, seed=3)
        np.testing.assert_array_equal(first[0], second[0])


if __name__ == '__main__':
    unittest.main()
