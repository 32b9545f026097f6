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
"""All exceptions for the semistatic package."""


class SemistaticError(Exception):
    """The base exception class."""

    def __init__(self, msg, **details):
        super(SemistaticError, self).__init__(msg)
        #: Message associated with the error
        self.msg = msg
        #: Extra diagnostics (iteration counts, offending values, ...)
        self.details = details

    def __repr__(self):
        return '<{0} [{1}]>'.format(self.__class__.__name__, self.msg)

    def __str__(self):
        if not self.details:
            return self.msg
        extra = ', '.join('{0}={1}'.format(key, self.details[key])
                          for key in sorted(self.details))
        return '{0} ({1})'.format(self.msg, extra)

    @property
    def message(self):
        """The human readable message."""
        return self.msg


class QuoteParseError(SemistaticError):
    """Exception class for malformed quote files."""

    def __init__(self, msg, line=None, **details):
        super(QuoteParseError, self).__init__(msg, line=line, **details)
        self.line = line


class ConfigError(SemistaticError):
    """Exception class for bad or unreadable configuration documents."""
    pass


class DomainError(SemistaticError, ValueError):
    """Exception class for arguments outside an operation's domain."""
    pass


class ValidationError(DomainError):
    """Exception class for inconsistent market inputs (duplicates, sizes)."""
    pass


class NoSolutionError(DomainError):
    """Exception class for prices with no implied volatility."""
    pass


class ExtrapolationError(DomainError):
    """Exception class for evaluations outside a strike grid or surface."""
    pass


class DegenerateRegionError(DomainError):
    """Exception class for parallel or degenerate extrapolation lines."""
    pass


class InadmissibleExtrapolationError(DomainError):
    """Exception class for wing slopes that admit butterfly arbitrage."""
    pass


class TransformInvalidError(DomainError):
    """Exception class for Heston parameters with kappa - rho * xi <= 0."""
    pass


class AssemblyError(DomainError):
    """Exception class for dimension mismatches while building an LP."""
    pass


class ArbitrageInInputsError(DomainError):
    """Exception class for an infeasible measure LP.

    Possible reasons:

    - The call prices admit a weak arbitrage
    - The grid is too coarse to carry a measure matching the prices
    """
    pass


class PayoffNotDominatedError(DomainError):
    """Exception class for an unbounded measure LP."""
    pass


class UncertifiedHedgeError(DomainError):
    """Exception class for hedges without an optimality certificate."""
    pass


class NumericalError(SemistaticError):
    """Catch-all for numerical breakdowns."""
    pass


class RootNotFoundError(NumericalError):
    """Exception class for root searches without a sign change."""
    pass


class QuadratureError(NumericalError):
    """Exception class for non-convergent integrals."""
    pass


class SolverError(NumericalError):
    """Exception class for simplex breakdowns (singular basis, stalling)."""
    pass


exit_codes = {
    SemistaticError: 1,
    DomainError: 1,
    QuoteParseError: 2,
    ConfigError: 2,
    NumericalError: 3,
}


def exit_code_for(error):
    """Return the CLI exit code for an exception instance."""
    if isinstance(error, (IOError, OSError)):
        return 2
    for klass in type(error).__mro__:
        if klass in exit_codes:
            return exit_codes[klass]
    return 1
