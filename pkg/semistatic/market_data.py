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
semistatic.market_data
======================

Call quote ingestion and Black-Scholes analytics in normalized units
(spot and forward equal to one, zero rates).

"""
from collections import namedtuple, OrderedDict
from logging import getLogger
import io
import math

import numpy as np
import pandas as pd
from scipy.optimize import brentq
from scipy.special import ndtr
from scipy.stats import norm

from .exceptions import (DomainError, NoSolutionError, QuoteParseError,
                         ValidationError)

__logs__ = getLogger(__package__)

QUOTE_COLUMNS = ['maturity', 'moneyness', 'price']
IMPLIED_VOL_BRACKET = (1e-8, 10.0)
PRICE_TOLERANCE = 1e-10


def _scalar(value):
    """Unwraps zero-dimensional arrays into floats."""
    value = np.asarray(value)
    if value.ndim == 0:
        return float(value)
    return value


class CallQuote(namedtuple('CallQuote', QUOTE_COLUMNS)):
    """A normalized European call quote.

    Attributes:
        * maturity: A float year fraction, strictly positive.
        * moneyness: A float forward moneyness K, strictly positive.
        * price: A float normalized call price c.
    """

    __slots__ = ()

    def __new__(cls, maturity, moneyness, price):
        maturity, moneyness, price = (float(maturity), float(moneyness),
                                      float(price))
        if not maturity > 0:
            raise ValidationError('maturity must be positive',
                                  maturity=maturity)
        if not moneyness > 0:
            raise ValidationError('moneyness must be positive',
                                  moneyness=moneyness)
        if not math.isfinite(price):
            raise ValidationError('price must be finite', price=price)
        return super(CallQuote, cls).__new__(cls, maturity, moneyness, price)

    @property
    def log_moneyness(self):
        return math.log(self.moneyness)


class BSParams(namedtuple('BSParams', ['sigma'])):
    """Black-Scholes parameters: the annualized volatility sigma > 0."""

    __slots__ = ()

    def __new__(cls, sigma):
        sigma = float(sigma)
        if not sigma > 0:
            raise DomainError('sigma must be positive', sigma=sigma)
        return super(BSParams, cls).__new__(cls, sigma)


class CallQuoteSet(object):
    """Call quotes grouped by maturity, strikes increasing within each.

    Attributes:
        * maturities: A tuple of the distinct maturities, increasing.
    """

    def __init__(self, quotes):
        """Inits CallQuoteSet.

        Args:
            * quotes: An iterable of CallQuote.

        Raises:
            ValidationError: on an empty input or a duplicate (t, K) pair.
        """
        grouped = {}
        for quote in quotes:
            grouped.setdefault(quote.maturity, []).append(quote)
        if not grouped:
            raise ValidationError('no quotes')
        self._groups = OrderedDict()
        for maturity in sorted(grouped):
            group = sorted(grouped[maturity], key=lambda q: q.moneyness)
            for left, right in zip(group, group[1:]):
                if left.moneyness == right.moneyness:
                    raise ValidationError('duplicate strike',
                                          maturity=maturity,
                                          moneyness=left.moneyness)
            self._groups[maturity] = tuple(group)
        self.maturities = tuple(self._groups)

    @classmethod
    def from_prices(cls, maturities, strikes, prices):
        """Builds a set from maturity-major arrays.

        Args:
            * maturities: A sequence of maturities.
            * strikes: Either one strike sequence shared by every maturity
                or a sequence of per-maturity strike sequences.
            * prices: A sequence of per-maturity price sequences, or a flat
                maturity-major vector.

        Returns:
            A CallQuoteSet.
        """
        maturities = list(maturities)
        if len(strikes) and np.ndim(strikes[0]) == 0:
            strikes = [list(strikes)] * len(maturities)
        flat = np.ravel(np.concatenate([np.ravel(p) for p in prices])
                        if np.ndim(prices[0]) else prices)
        quotes = []
        offset = 0
        for maturity, row in zip(maturities, strikes):
            for strike in row:
                quotes.append(CallQuote(maturity, strike, flat[offset]))
                offset += 1
        if offset != len(flat):
            raise ValidationError('price vector does not match strikes',
                                  expected=offset, received=len(flat))
        return cls(quotes)

    def __iter__(self):
        for maturity in self.maturities:
            for quote in self._groups[maturity]:
                yield quote

    def __len__(self):
        return sum(len(group) for group in self._groups.values())

    def __repr__(self):
        return '<CallQuoteSet [{0} maturities, {1} quotes]>'.format(
            len(self.maturities), len(self))

    def quotes(self, maturity):
        return self._groups[maturity]

    def strikes(self, maturity):
        return np.array([q.moneyness for q in self._groups[maturity]])

    def prices(self, maturity):
        return np.array([q.price for q in self._groups[maturity]])

    def log_moneyness(self, maturity):
        return np.log(self.strikes(maturity))

    def price_vector(self):
        """The maturity-major, strike-minor price vector."""
        return np.array([q.price for q in self])

    def layout(self):
        """The (maturity, moneyness) pairs aligned with price_vector."""
        return [(q.maturity, q.moneyness) for q in self]

    def require(self, min_maturities=1, min_strikes=1):
        """Checks the set is large enough for an experiment.

        Raises:
            ValidationError: if there are too few maturities or strikes.
        """
        if len(self.maturities) < min_maturities:
            raise ValidationError('too few maturities',
                                  required=min_maturities,
                                  found=len(self.maturities))
        for maturity, group in self._groups.items():
            if len(group) < min_strikes:
                raise ValidationError('too few strikes', maturity=maturity,
                                      required=min_strikes, found=len(group))
        return self

    def to_frame(self):
        return pd.DataFrame([q._asdict() for q in self],
                            columns=QUOTE_COLUMNS)


def load_quotes(source):
    """Parses a quote CSV with the header maturity,moneyness,price.

    Args:
        * source: A path, a byte stream or a text stream.

    Returns:
        A CallQuoteSet.

    Raises:
        QuoteParseError: on a missing header, an empty file or a malformed
            row; the offending line number is attached.
        ValidationError: on non-positive maturities or strikes and on
            duplicate strikes.
    """
    if hasattr(source, 'read'):
        raw = source.read()
        if isinstance(raw, bytes):
            raw = raw.decode('utf-8-sig')
        source = io.StringIO(raw)
    try:
        frame = pd.read_csv(source, dtype=str, skip_blank_lines=True,
                            keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise QuoteParseError('no quotes', line=1)
    except pd.errors.ParserError as error:
        raise QuoteParseError('malformed quote file: {0}'.format(error))
    header = [str(column).strip() for column in frame.columns]
    if header != QUOTE_COLUMNS:
        raise QuoteParseError('expected header ' + ','.join(QUOTE_COLUMNS),
                              line=1, found=','.join(header))
    if frame.empty:
        raise QuoteParseError('no quotes', line=2)
    quotes = []
    # Header is line 1.
    for offset, row in enumerate(frame.itertuples(index=False), start=2):
        try:
            values = [float(field) for field in row]
        except (TypeError, ValueError):
            values = []
        if len(values) != 3 or not all(math.isfinite(v) for v in values):
            raise QuoteParseError('non-numeric field', line=offset,
                                  row=','.join(str(f) for f in row))
        try:
            quotes.append(CallQuote(*values))
        except ValidationError as error:
            error.details['line'] = offset
            raise
    quote_set = CallQuoteSet(quotes)
    __logs__.info('Loaded %s quotes over %s maturities', len(quote_set),
                  len(quote_set.maturities))
    return quote_set


def write_quotes(quote_set, stream):
    """Writes a CallQuoteSet in the load_quotes format."""
    quote_set.to_frame().to_csv(stream, index=False, float_format='%.15g',
                                lineterminator='\n')


def bs_call_price(k, total_vol):
    """Normalized Black-Scholes call price.

    c = N(d) - e^k N(d - I) with d = -k / I + I / 2 and I = sigma * sqrt(t).
    At I = 0 the intrinsic value (1 - e^k)+ is returned.

    Args:
        * k: Log-moneyness, scalar or array.
        * total_vol: Total volatility I >= 0, scalar or array.

    Returns:
        A float (or array) in [(1 - e^k)+, 1).
    """
    k = np.asarray(k, dtype=float)
    vol = np.asarray(total_vol, dtype=float)
    if np.any(vol < 0):
        raise DomainError('total volatility must be non-negative')
    strike = np.exp(k)
    intrinsic = np.maximum(1.0 - strike, 0.0)
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        d = -k / vol + vol / 2.0
        price = ndtr(d) - strike * ndtr(d - vol)
    price = np.where(vol > 0, np.maximum(price, intrinsic), intrinsic)
    return _scalar(price)


def bs_call_vector(strikes, t, sigma):
    """Black-Scholes prices at the given strikes for one maturity."""
    return bs_call_price(np.log(np.asarray(strikes, dtype=float)),
                         sigma * math.sqrt(t))


def bs_vega(k, sigma, t):
    """Black-Scholes Vega per unit of annualized volatility: n(d) sqrt(t)."""
    if not sigma > 0 or not t > 0:
        raise DomainError('vega needs sigma > 0 and t > 0', sigma=sigma, t=t)
    total_vol = sigma * math.sqrt(t)
    d = -np.asarray(k, dtype=float) / total_vol + total_vol / 2.0
    return _scalar(norm.pdf(d) * math.sqrt(t))


def implied_total_vol(k, price):
    """Inverts bs_call_price in the total volatility.

    Brent's method on a bracket starting at [1e-8, 10], then Newton steps
    polish the root to machine precision.

    Args:
        * k: A float log-moneyness.
        * price: A float strictly between (1 - e^k)+ and 1.

    Returns:
        A float total volatility I >= 0.

    Raises:
        NoSolutionError: if the price is outside the open bounds.
    """
    k = float(k)
    price = float(price)
    intrinsic = max(1.0 - math.exp(k), 0.0)
    if not intrinsic < price < 1.0:
        raise NoSolutionError('price outside the no-arbitrage bounds',
                              k=k, price=price, lower=intrinsic)

    def excess(vol):
        return bs_call_price(k, vol) - price

    low, high = IMPLIED_VOL_BRACKET
    if excess(low) > 0:
        low = 0.0
    while excess(high) < 0:
        high *= 2.0
        if high > 1e3:
            raise NoSolutionError('price too close to the upper bound',
                                  k=k, price=price)
    vol = brentq(excess, low, high, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                 maxiter=500)
    for _ in range(3):
        slope = norm.pdf(-k / vol + vol / 2.0) if vol > 0 else 0.0
        residual = excess(vol)
        if slope <= 0 or residual == 0:
            break
        candidate = vol - residual / slope
        if candidate <= 0 or abs(excess(candidate)) >= abs(residual):
            break
        vol = candidate
    if abs(excess(vol)) > PRICE_TOLERANCE:
        __logs__.warning('Implied vol residual %s at k=%s',
                         excess(vol), k)
    return vol


def total_variance(k, t, price):
    """Total implied variance w = I^2 of a quote."""
    if not t > 0:
        raise DomainError('maturity must be positive', t=t)
    return implied_total_vol(k, price) ** 2


def bs_implied_vol(k, t, price):
    """Annualized implied volatility of a quote."""
    if not t > 0:
        raise DomainError('maturity must be positive', t=t)
    return implied_total_vol(k, price) / math.sqrt(t)
