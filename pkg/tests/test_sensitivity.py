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

import os
import unittest

import numpy as np

from semistatic.exceptions import DomainError, UncertifiedHedgeError
from semistatic.hedging_lp import (SUB, SUPER, StrategyBasis, build_grid,
                                   forward_start_straddle, superhedge)
from semistatic.sensitivity import (REPORT_COLUMNS, BlackScholesWingFamily,
                                    BoundSetup, HestonWingFamily,
                                    PerturbationSpec, call_price_jacobian,
                                    chain_rule_derivative,
                                    directional_derivative,
                                    first_order_estimate,
                                    moment_cone_interior_check,
                                    perturbation_study)
from semistatic.wing_extrapolation import HestonParams
from tests.compat import mock

MATURITIES = [1.0, 1.5]
STRIKES = [round(0.3 + 0.1 * i, 10) for i in range(18)]
TRADED = [0.8, 0.9, 1.0, 1.1, 1.2]
HESTON = HestonParams(1.0, 0.07, 0.4, 0.07, -0.8)
MOMENTS = [5.058, 24.21, 6.83, 30.714]
FULL_TESTS = os.environ.get('SEMISTATIC_FULL_TESTS') == '1'


def bs_family():
    return BlackScholesWingFamily(0.2, MATURITIES, [STRIKES, STRIKES])


def bs_setup(side=SUPER, degree=2, n_points=50):
    return BoundSetup(forward_start_straddle(1.0), bs_family(),
                      build_grid(n_points, 5.0, MATURITIES),
                      StrategyBasis(degree), side)


class BlackScholesFamilyTest(unittest.TestCase):

    def test_point(self):
        family = bs_family()
        np.testing.assert_array_equal(family.point(0.1), [0.1, 0.1])
        np.testing.assert_array_equal(family.base, [0.0, 0.0])
        self.assertRaises(DomainError, family.point, [0.1, 0.1, 0.1])
        self.assertEqual(family.labels, ['p_t1', 'p_t2'])

    def test_jacobian_matches_finite_differences(self):
        family = bs_family()
        jacobian = call_price_jacobian(family)
        self.assertEqual(jacobian.shape, (36, 2))
        h = 1e-6
        base = family.prices([0.0, 0.0])
        for j in range(2):
            step = np.zeros(2)
            step[j] = h
            numeric = (family.prices(step) - base) / h
            np.testing.assert_allclose(jacobian[:, j], numeric, atol=1e-5)

    def test_money_neutral_row_is_zero(self):
        jacobian = call_price_jacobian(bs_family())
        atm = STRIKES.index(1.0)
        np.testing.assert_array_equal(jacobian[atm], [0.0, 0.0])
        np.testing.assert_array_equal(jacobian[18 + atm], [0.0, 0.0])

    def test_maturity_blocks(self):
        jacobian = call_price_jacobian(bs_family())
        self.assertTrue(np.all(jacobian[:18, 1] == 0.0))
        self.assertTrue(np.all(jacobian[18:, 0] == 0.0))
        self.assertTrue(np.all(jacobian >= 0.0))


class HestonFamilyTest(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.family = HestonWingFamily(HESTON, MATURITIES, TRADED,
                                      [STRIKES, STRIKES], MOMENTS)

    def test_labels(self):
        self.assertEqual(self.family.labels, ['q_t1', 'p_t1', 'q_t2', 'p_t2'])

    def test_traded_rows_are_zero(self):
        jacobian = call_price_jacobian(self.family)
        for offset in (0, 18):
            for strike in TRADED:
                row = jacobian[offset + STRIKES.index(strike)]
                np.testing.assert_array_equal(row, np.zeros(4))

    def test_wing_signs(self):
        jacobian = call_price_jacobian(self.family)
        # raising a moment order flattens its wing
        self.assertLess(jacobian[0, 0], 0.0)
        self.assertLess(jacobian[17, 1], 0.0)
        self.assertEqual(jacobian[0, 1], 0.0)
        self.assertEqual(jacobian[0, 2], 0.0)

    def test_jacobian_matches_finite_differences(self):
        jacobian = call_price_jacobian(self.family)
        base = self.family.prices(MOMENTS)
        for j in range(4):
            h = 1e-5 * MOMENTS[j]
            point = list(MOMENTS)
            point[j] += h
            numeric = (self.family.prices(point) - base) / h
            np.testing.assert_allclose(jacobian[:, j], numeric, atol=1e-6)

    def test_point_size(self):
        self.assertRaises(DomainError, self.family.point, [5.0, 24.0])

    def test_non_positive_parameter(self):
        self.assertRaises(DomainError, self.family.dwdp,
                          [0.0, 24.21, 6.83, 30.714])


class DirectionalDerivativeTest(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        setup = bs_setup()
        cls.hedge, _ = setup.solve()

    def test_zero_direction(self):
        derivative = directional_derivative(SUPER, self.hedge, np.zeros(36))
        self.assertEqual(derivative.value, 0.0)

    def test_linearity(self):
        rng = np.random.default_rng(2)
        h1, h2 = rng.normal(size=36), rng.normal(size=36)
        combined = directional_derivative(SUPER, self.hedge, 2.0 * h1 - h2)
        first = directional_derivative(SUPER, self.hedge, h1)
        second = directional_derivative(SUPER, self.hedge, h2)
        self.assertAlmostEqual(combined.value,
                               2.0 * first.value - second.value, places=10)

    def test_option_weights(self):
        h = np.zeros(36)
        h[5] = 1.0
        derivative = directional_derivative(SUPER, self.hedge, h)
        self.assertEqual(derivative.value, self.hedge.option_weights[5])

    def test_enumeration(self):
        h = np.ones(36)
        derivative = directional_derivative(SUPER, self.hedge, h,
                                            enumerate=True)
        if self.hedge.alternative_optima:
            self.assertLessEqual(derivative.extreme,
                                 derivative.value + 1e-12)
            self.assertGreaterEqual(derivative.optima, 1)
        else:
            self.assertIsNone(derivative.extreme)

    def test_uncertified(self):
        with mock.patch.object(self.hedge, 'certified', False):
            self.assertRaises(UncertifiedHedgeError, directional_derivative,
                              SUPER, self.hedge, np.zeros(36))

    def test_mismatches(self):
        self.assertRaises(DomainError, directional_derivative, SUB,
                          self.hedge, np.zeros(36))
        self.assertRaises(DomainError, directional_derivative, SUPER,
                          self.hedge, np.zeros(3))


class ChainRuleTest(unittest.TestCase):

    def test_inner_product(self):
        weights = [1.0, -2.0]
        jacobian = [[0.5, 0.0], [0.0, 0.25]]
        self.assertAlmostEqual(
            chain_rule_derivative(weights, jacobian, [2.0, 4.0]), -1.0)
        self.assertAlmostEqual(
            first_order_estimate(0.1, weights, jacobian, [2.0, 4.0]), -0.9)

    def test_shape_mismatch(self):
        self.assertRaises(DomainError, chain_rule_derivative, [1.0, 2.0],
                          [[1.0, 2.0]], [1.0, 1.0])


class InteriorCheckTest(unittest.TestCase):

    def setUp(self):
        self.instruments = bs_setup().instruments()

    def test_base_prices_inside(self):
        check = moment_cone_interior_check(self.instruments)
        self.assertTrue(check.inside)
        self.assertGreater(check.margin, 0.0)

    def test_price_on_bound(self):
        prices = self.instruments.prices.copy()
        prices[7] = 0.0
        check = moment_cone_interior_check(self.instruments, prices)
        self.assertFalse(check.inside)
        self.assertEqual(check.conditions, ['price-bound'])

    def test_convexity_broken(self):
        prices = self.instruments.prices.copy()
        prices[7] += 0.02
        check = moment_cone_interior_check(self.instruments, prices)
        self.assertFalse(check.inside)
        self.assertIn('convexity', check.conditions)

    def test_size_mismatch(self):
        self.assertRaises(DomainError, moment_cone_interior_check,
                          self.instruments, [0.1])


class PerturbationSpecTest(unittest.TestCase):

    def test_labels(self):
        self.assertEqual(PerturbationSpec.parametric(5e-5).label, '5e-05')
        self.assertEqual(PerturbationSpec.parametric([1, 2.5]).label, '1 2.5')
        self.assertEqual(PerturbationSpec.raw(np.zeros(3)).label, 'u')
        self.assertEqual(PerturbationSpec.raw(np.zeros(3), 'shift').mode,
                         'raw')


class PerturbationStudyTest(unittest.TestCase):

    def test_black_scholes_study(self):
        report = perturbation_study(bs_setup(), [0.0, 1e-4, 5e-3],
                                    workers=2)
        self.assertEqual(len(report.rows), 3)
        first = report.rows[0]
        self.assertEqual(first.derivative, 0.0)
        self.assertEqual(first.optimal_value, report.base_value)
        self.assertEqual(first.estimated_value, report.base_value)
        self.assertEqual(first.abs_diff, 0.0)
        for row in report.rows:
            self.assertTrue(row.valid, row.reason)
            self.assertAlmostEqual(row.abs_diff,
                                   abs(row.optimal_value -
                                       row.estimated_value))
        self.assertLess(report.rows[1].abs_diff, 1e-3)
        self.assertEqual(report.jacobian.shape, (36, 2))
        self.assertEqual(list(report.to_rows()[0]), REPORT_COLUMNS)
        self.assertEqual(report.invalid(), [])

    def test_sub_side(self):
        report = perturbation_study(bs_setup(SUB), [0.0, 1e-4])
        self.assertEqual(report.side, SUB)
        self.assertTrue(all(row.valid for row in report.rows))

    def test_raw_perturbations(self):
        setup = bs_setup()
        base = setup.family.prices(setup.family.base)
        report = perturbation_study(setup, [
            PerturbationSpec.raw(np.zeros(36), 'zero'),
            PerturbationSpec.raw(-base, 'wipe')])
        self.assertIsNone(report.jacobian)
        self.assertTrue(report.rows[0].valid)
        self.assertEqual(report.rows[0].optimal_value, report.base_value)
        wiped = report.rows[1]
        self.assertFalse(wiped.valid)
        self.assertEqual(wiped.reason, 'outside the moment cone interior')
        self.assertEqual(report.invalid(), [wiped])

    def test_inadmissible_slope(self):
        report = perturbation_study(bs_setup(), [0.5])
        row = report.rows[0]
        self.assertFalse(row.valid)
        self.assertEqual(row.reason, 'slope outside [0, bs_max_slope]')

    def test_uncertified_base(self):
        setup = bs_setup()
        fake = mock.Mock(certified=False)
        with mock.patch.object(setup, 'solve', return_value=(fake, None)):
            self.assertRaises(UncertifiedHedgeError, perturbation_study,
                              setup, [0.0])

    def test_matches_direct_solve(self):
        setup = bs_setup()
        report = perturbation_study(setup, [1e-4])
        hedge, _ = superhedge(setup.payoff,
                              setup.instruments([1e-4, 1e-4]), setup.basis,
                              setup.grid)
        self.assertAlmostEqual(report.rows[0].optimal_value, hedge.bound,
                               places=12)


@unittest.skipUnless(FULL_TESTS, 'set SEMISTATIC_FULL_TESTS=1')
class FullGridPerturbationTest(unittest.TestCase):
    """Slope perturbations of the 500-point Black-Scholes setup."""

    # Reference abs. diff. for slopes 5e-5, 1e-4 and 5e-3.
    REFERENCE = {SUPER: [2.98e-10, 1.19e-8, 1.57e-6],
                 SUB: [2.88e-7, 3.42e-7, 1.16e-5]}

    def test_error_grows_with_perturbation(self):
        for side in (SUPER, SUB):
            report = perturbation_study(bs_setup(side, 4, 500),
                                        [5e-5, 1e-4, 5e-3], workers=4)
            errors = [row.abs_diff for row in report.rows]
            self.assertTrue(all(row.valid for row in report.rows))
            self.assertLess(errors[0], errors[1], side)
            self.assertLess(errors[1], errors[2], side)
            for error, reference in zip(errors, self.REFERENCE[side]):
                self.assertLessEqual(error, 10 * reference, side)

    def test_error_is_second_order(self):
        epsilons = [1e-3, 1e-4, 1e-5]
        report = perturbation_study(bs_setup(SUPER, 4, 500), epsilons,
                                    workers=3)
        self.assertTrue(all(row.valid for row in report.rows))
        ratios = [row.abs_diff / eps
                  for row, eps in zip(report.rows, epsilons)]
        # Noise floor for abs. diff. near 1e-12.
        for coarse, fine in zip(ratios, ratios[1:]):
            self.assertLessEqual(fine, 0.5 * coarse + 1e-7)
        self.assertLess(ratios[-1], 1e-5)


if __name__ == '__main__':
    unittest.main()
