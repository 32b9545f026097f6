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

import copy
import json

from .exceptions import ConfigError, DomainError
from .heston_pricer import HestonQuadratureConfig
from .wing_extrapolation import HestonParams


def strike_range(first, last, step=0.1):
    """Strikes first, first + step, ..., last rounded to 10 digits."""
    count = int(round((last - first) / step)) + 1
    return [round(first + i * step, 10) for i in range(count)]


class ExperimentConfig(object):
    """Experiment config.

    A single JSON document with maturities in years and prices normalized
    by the spot.

    Attributes:
        * CONFIG_MODEL: 'bs' or 'heston'.
        * CONFIG_PARAMS: {'sigma'} or {'kappa', 'theta', 'xi', 'v0', 'rho'}.
        * CONFIG_MATURITIES: A list of increasing maturities.
        * CONFIG_STRIKES: Quoted (traded) strikes, shared by all maturities.
        * CONFIG_TARGET_STRIKES: Strikes priced by the extrapolated surface
            and used as hedging instruments.
        * CONFIG_SLOPES: Black-Scholes wing slopes, one per maturity.
        * CONFIG_MOMENT_ORDERS: Heston wing moment orders, one {q, p} per
            maturity; computed from the parameters when missing.
        * CONFIG_GRID_POINTS: Nodes per maturity.
        * CONFIG_GRID_MAX: Largest node.
        * CONFIG_BASIS_DEGREE: Monomial degree cap of the strategies.
        * CONFIG_FS_STRIKE: Forward-start straddle strike.
        * CONFIG_SIDE: 'super' or 'sub'.
        * CONFIG_PERTURBATIONS: Parameter points for perturbation studies.
        * CONFIG_QUADRATURE: Keyword arguments of HestonQuadratureConfig.
        * CONFIG_WORKERS: Threads for re-solves and dominance checks.
        * values: The effective settings.
        * overrides: The settings that differ from the defaults.
    """

    CONFIG_MODEL = 'model'
    CONFIG_PARAMS = 'params'
    CONFIG_MATURITIES = 'maturities'
    CONFIG_STRIKES = 'strikes'
    CONFIG_TARGET_STRIKES = 'target_strikes'
    CONFIG_SLOPES = 'slopes'
    CONFIG_MOMENT_ORDERS = 'moment_orders'
    CONFIG_GRID_POINTS = 'grid_points'
    CONFIG_GRID_MAX = 'grid_max'
    CONFIG_BASIS_DEGREE = 'basis_degree'
    CONFIG_FS_STRIKE = 'fs_strike'
    CONFIG_SIDE = 'side'
    CONFIG_PERTURBATIONS = 'perturbations'
    CONFIG_QUADRATURE = 'quadrature'
    CONFIG_WORKERS = 'workers'

    KEYS = (CONFIG_MODEL, CONFIG_PARAMS, CONFIG_MATURITIES, CONFIG_STRIKES,
            CONFIG_TARGET_STRIKES, CONFIG_SLOPES, CONFIG_MOMENT_ORDERS,
            CONFIG_GRID_POINTS, CONFIG_GRID_MAX, CONFIG_BASIS_DEGREE,
            CONFIG_FS_STRIKE, CONFIG_SIDE, CONFIG_PERTURBATIONS,
            CONFIG_QUADRATURE, CONFIG_WORKERS)
    MODELS = ('bs', 'heston')
    SIDES = ('super', 'sub')
    BS_PARAMS = ('sigma',)
    HESTON_PARAMS = ('kappa', 'theta', 'xi', 'v0', 'rho')
    TABLES = (1, 2, 3, 4, 5)

    def __init__(self, values=None, table_id=None):
        """Inits ExperimentConfig.

        Args:
            * values: A dict of settings applied over the defaults.
            * table_id: The reproduction table whose setup is the default
                (1 when omitted).

        Raises:
            ConfigError: on unknown keys or invalid settings.
        """
        self.table_id = table_id
        self.values = self.defaults(table_id or 1)
        self.overrides = {}
        values = values or {}
        unknown = sorted(set(values) - set(self.KEYS))
        if unknown:
            raise ConfigError('unknown config keys', keys=unknown)
        if (self.CONFIG_MODEL in values and
                values[self.CONFIG_MODEL] != self.values[self.CONFIG_MODEL]):
            # Switching model swaps the whole model-specific block.
            other = 1 if values[self.CONFIG_MODEL] == 'bs' else 4
            self.values = self.defaults(other)
            self.overrides[self.CONFIG_MODEL] = values[self.CONFIG_MODEL]
        for key, value in values.items():
            if value != self.values.get(key):
                self.overrides[key] = value
            self.values[key] = value
        self.validate()

    @classmethod
    def defaults(cls, table_id):
        """Settings of a reproduction table.

        Tables 1 and 2 use a flat Black-Scholes smile with linear wings,
        tables 3 to 5 use Heston-priced quotes with moment-formula wings.
        """
        if table_id not in cls.TABLES:
            raise ConfigError('unknown table', table=table_id)
        common = {
            cls.CONFIG_MATURITIES: [1.0, 1.5],
            cls.CONFIG_TARGET_STRIKES: strike_range(0.3, 2.0),
            cls.CONFIG_GRID_POINTS: 500,
            cls.CONFIG_GRID_MAX: 5.0,
            cls.CONFIG_BASIS_DEGREE: 4,
            cls.CONFIG_FS_STRIKE: 1.0,
            cls.CONFIG_SIDE: 'sub' if table_id in (2, 5) else 'super',
            cls.CONFIG_QUADRATURE: {},
            cls.CONFIG_WORKERS: 1,
            cls.CONFIG_SLOPES: None,
            cls.CONFIG_MOMENT_ORDERS: None,
        }
        if table_id in (1, 2):
            common.update({
                cls.CONFIG_MODEL: 'bs',
                cls.CONFIG_PARAMS: {'sigma': 0.2},
                cls.CONFIG_STRIKES: strike_range(0.3, 2.0),
                cls.CONFIG_SLOPES: [0.0, 0.0],
                cls.CONFIG_PERTURBATIONS: [0.0, 5e-5, 1e-4, 5e-3, 0.0476,
                                           0.202],
            })
        else:
            common.update({
                cls.CONFIG_MODEL: 'heston',
                cls.CONFIG_PARAMS: {'kappa': 1.0, 'theta': 0.07, 'xi': 0.4,
                                    'v0': 0.07, 'rho': -0.8},
                cls.CONFIG_STRIKES: strike_range(0.8, 1.2),
                cls.CONFIG_MOMENT_ORDERS: [{'q': 5.058, 'p': 24.21},
                                           {'q': 6.83, 'p': 30.714}],
                cls.CONFIG_PERTURBATIONS: [
                    [5.058, 24.21, 6.83, 30.714],
                    [5.06, 24.22, 6.84, 30.72],
                    [5.2, 24.35, 6.9, 30.73],
                    [6.0, 25.1, 7.1, 31.1],
                    [10.0, 35.0, 10.0, 35.0],
                    [12.0, 37.0, 12.0, 37.0],
                ],
            })
        return copy.deepcopy(common)

    @classmethod
    def from_dict(cls, values, table_id=None):
        if not isinstance(values, dict):
            raise ConfigError('config must be a JSON object')
        return cls(values, table_id)

    @classmethod
    def from_file(cls, path, table_id=None):
        """Reads a JSON config.

        Raises:
            IOError: if the file cannot be read.
            ConfigError: if it is not a valid config document.
        """
        with open(path) as config_file:
            try:
                values = json.load(config_file)
            except ValueError as error:
                raise ConfigError('config is not valid JSON', path=path,
                                  reason=str(error))
        return cls.from_dict(values, table_id)

    def __getitem__(self, key):
        return self.values[key]

    def to_dict(self):
        return copy.deepcopy(self.values)

    def _require(self, condition, message, **details):
        if not condition:
            raise ConfigError(message, **details)

    def validate(self):
        values = self.values
        self._require(values[self.CONFIG_MODEL] in self.MODELS,
                      'model must be bs or heston',
                      model=values[self.CONFIG_MODEL])
        self._require(values[self.CONFIG_SIDE] in self.SIDES,
                      'side must be super or sub',
                      side=values[self.CONFIG_SIDE])
        maturities = values[self.CONFIG_MATURITIES]
        self._require(bool(maturities) and all(t > 0 for t in maturities) and
                      list(maturities) == sorted(set(maturities)),
                      'maturities must be positive and increasing',
                      maturities=maturities)
        for key in (self.CONFIG_STRIKES, self.CONFIG_TARGET_STRIKES):
            strikes = values[key]
            self._require(bool(strikes) and all(k > 0 for k in strikes) and
                          list(strikes) == sorted(set(strikes)),
                          'strikes must be positive and increasing', key=key)
        self._require(int(values[self.CONFIG_GRID_POINTS]) >= 2,
                      'grid_points must be at least 2')
        self._require(values[self.CONFIG_GRID_MAX] > 0,
                      'grid_max must be positive')
        self._require(int(values[self.CONFIG_BASIS_DEGREE]) >= 0,
                      'basis_degree must be non-negative')
        self._require(values[self.CONFIG_FS_STRIKE] > 0,
                      'fs_strike must be positive')
        self._require(int(values[self.CONFIG_WORKERS]) >= 1,
                      'workers must be at least 1')
        expected = (self.BS_PARAMS if values[self.CONFIG_MODEL] == 'bs'
                    else self.HESTON_PARAMS)
        params = values[self.CONFIG_PARAMS]
        self._require(isinstance(params, dict) and
                      sorted(params) == sorted(expected),
                      'params must hold exactly these keys',
                      keys=list(expected))
        try:
            if values[self.CONFIG_MODEL] == 'bs':
                self._require(float(params['sigma']) > 0,
                              'sigma must be positive')
            else:
                self.heston_params()
        except (TypeError, ValueError) as error:
            raise ConfigError('invalid model parameters', reason=str(error))
        slopes = values[self.CONFIG_SLOPES]
        if slopes is not None:
            self._require(len(slopes) == len(maturities),
                          'one slope per maturity expected')
        orders = values[self.CONFIG_MOMENT_ORDERS]
        if orders is not None:
            self._require(len(orders) == len(maturities) and
                          all(sorted(o) == ['p', 'q'] for o in orders),
                          'one {q, p} pair per maturity expected')
        try:
            HestonQuadratureConfig(**values[self.CONFIG_QUADRATURE])
        except (TypeError, DomainError) as error:
            raise ConfigError('invalid quadrature settings',
                              reason=str(error))

    @property
    def model(self):
        return self.values[self.CONFIG_MODEL]

    @property
    def maturities(self):
        return [float(t) for t in self.values[self.CONFIG_MATURITIES]]

    @property
    def side(self):
        return self.values[self.CONFIG_SIDE]

    @property
    def sigma(self):
        return float(self.values[self.CONFIG_PARAMS]['sigma'])

    def heston_params(self):
        params = self.values[self.CONFIG_PARAMS]
        return HestonParams(*[float(params[key])
                              for key in self.HESTON_PARAMS])

    def quadrature(self):
        return HestonQuadratureConfig(**self.values[self.CONFIG_QUADRATURE])

    def moment_orders(self):
        """Wing parameters (q_t1, p_t1, q_t2, p_t2, ...), or None."""
        orders = self.values[self.CONFIG_MOMENT_ORDERS]
        if orders is None:
            return None
        flat = []
        for pair in orders:
            flat.extend([float(pair['q']), float(pair['p'])])
        return flat
