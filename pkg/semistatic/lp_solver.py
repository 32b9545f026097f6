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
semistatic.lp_solver
====================

Revised simplex for equality-form LPs with few rows and many columns.

Columns come from a column source and are priced block by block, so a
43 x 250,000 problem never has to be materialized. The basis is small and
is refactorized with a dense LU at every iteration.

"""
from collections import deque, namedtuple
from logging import getLogger

import numpy as np
from scipy.linalg import LinAlgError, lu_factor, lu_solve

from .exceptions import DomainError, SolverError

__logs__ = getLogger(__package__)

OPTIMAL = 'Optimal'
INFEASIBLE = 'Infeasible'
UNBOUNDED = 'Unbounded'

FEASIBILITY_TOLERANCE = 1e-9
OPTIMALITY_TOLERANCE = 1e-10
PIVOT_TOLERANCE = 1e-9
DEGENERATE_LIMIT = 50
BLOCK_SIZE = 4096
CERTIFICATE_TOLERANCE = 1e-8

CertificateReport = namedtuple('CertificateReport',
                               ['primal', 'dual', 'complementarity', 'gap',
                                'passed'])


class DenseColumns(object):
    """Column source over an explicit matrix.

    Attributes:
        * matrix: A (rows x columns) float array.
        * cost: A float array with one entry per column.
    """

    def __init__(self, matrix, cost):
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.cost = np.asarray(cost, dtype=float).ravel()
        self.n_rows, self.n_columns = self.matrix.shape
        if len(self.cost) != self.n_columns:
            raise DomainError('one cost per column expected',
                              columns=self.n_columns, costs=len(self.cost))

    def block(self, start, stop):
        return self.matrix[:, start:stop], self.cost[start:stop]

    def take(self, indices):
        indices = np.asarray(indices, dtype=int)
        return self.matrix[:, indices], self.cost[indices]


class _SplitColumns(object):
    """Appends a negated copy of each free column so all are non-negative."""

    def __init__(self, source, free):
        self.source = source
        self.free = np.asarray(sorted(free), dtype=int)
        self.n_rows = source.n_rows
        self.n_columns = source.n_columns + len(self.free)

    def block(self, start, stop):
        return self.take(np.arange(start, stop))

    def take(self, indices):
        indices = np.asarray(indices, dtype=int)
        base = self.source.n_columns
        mapped = np.where(indices < base, indices,
                          self.free[np.maximum(indices - base, 0)
                                    % max(len(self.free), 1)])
        matrix, cost = self.source.take(mapped)
        sign = np.where(indices < base, 1.0, -1.0)
        return matrix * sign, cost * sign


class StandardLP(object):
    """min or max c'x subject to A x = b, x >= 0 except for free columns.

    Attributes:
        * columns: A column source with n_rows, n_columns, block and take.
        * rhs: A float array b.
        * sense: 'min' or 'max'.
        * free: A tuple of column indices without sign constraint.
        * row_labels: Optional names used by dump.
    """

    def __init__(self, columns, rhs, sense='min', free=(), row_labels=None):
        self.columns = columns
        self.rhs = np.asarray(rhs, dtype=float).ravel()
        if sense not in ('min', 'max'):
            raise DomainError('sense must be min or max', sense=sense)
        self.sense = sense
        self.free = tuple(int(j) for j in free)
        if columns.n_rows != len(self.rhs):
            raise DomainError('row count does not match the right-hand side',
                              rows=columns.n_rows, rhs=len(self.rhs))
        if not np.all(np.isfinite(self.rhs)):
            raise DomainError('right-hand side must be finite')
        if any(not 0 <= j < columns.n_columns for j in self.free):
            raise DomainError('free column index out of range')
        self.row_labels = list(row_labels or
                               ['r{0}'.format(i)
                                for i in range(len(self.rhs))])

    @classmethod
    def dense(cls, matrix, rhs, cost, sense='min', free=()):
        return cls(DenseColumns(matrix, cost), rhs, sense, free)

    @property
    def n_rows(self):
        return self.columns.n_rows

    @property
    def n_columns(self):
        return self.columns.n_columns

    def blocks(self, block_size=BLOCK_SIZE):
        for start in range(0, self.n_columns, block_size):
            stop = min(start + block_size, self.n_columns)
            matrix, cost = self.columns.block(start, stop)
            yield start, stop, matrix, cost

    def dump(self, stream, max_columns=50):
        """Writes a plain-text row/column listing."""
        stream.write('{0} {1} rows x {2} columns\n'.format(
            self.sense, self.n_rows, self.n_columns))
        for label, value in zip(self.row_labels, self.rhs):
            stream.write('ROW {0} = {1!r}\n'.format(label, value))
        shown = min(self.n_columns, max_columns)
        matrix, cost = self.columns.take(np.arange(shown))
        for j in range(shown):
            entries = ' '.join('{0}:{1:.6g}'.format(self.row_labels[i], a)
                               for i, a in enumerate(matrix[:, j]) if a)
            stream.write('COL {0} cost={1:.6g} {2}{3}\n'.format(
                j, cost[j], entries, ' free' if j in self.free else ''))
        if shown < self.n_columns:
            stream.write('... {0} more columns\n'.format(
                self.n_columns - shown))


class LPSolution(object):
    """Result of a simplex solve.

    Attributes:
        * status: OPTIMAL, INFEASIBLE or UNBOUNDED.
        * x: Primal values per column (None unless optimal).
        * y: Row duals with c - A'y >= 0 (min) or <= 0 (max).
        * objective: c'x.
        * certificates: A CertificateReport, filled for optimal solves.
        * farkas: For infeasible LPs, y with A'y <= 0 and b'y > 0.
        * ray: For unbounded LPs, a direction d >= 0 with A d = 0
            improving the objective.
        * basis: Internal basic variable indices, used for warm restarts.
        * primal_degenerate: True if some basic value is zero, so the
            duals may not be unique.
        * dual_degenerate: True if some nonbasic column has a zero
            reduced cost, so the primal solution may not be unique.
        * iterations: An int pivot count.
    """

    def __init__(self, status, x=None, y=None, objective=None, farkas=None,
                 ray=None, basis=None, primal_degenerate=False,
                 dual_degenerate=False, iterations=0):
        self.status = status
        self.x = x
        self.y = y
        self.objective = objective
        self.farkas = farkas
        self.ray = ray
        self.basis = basis
        self.primal_degenerate = primal_degenerate
        self.dual_degenerate = dual_degenerate
        self.iterations = iterations
        self.certificates = None

    def __repr__(self):
        return '<LPSolution [{0} {1}]>'.format(self.status, self.objective)


class RevisedSimplex(object):
    """Two-phase revised simplex over a column source.

    Rows are equilibrated and sign-normalized so b >= 0; each column is
    scaled by its largest entry when generated. Pricing is partial: blocks
    of columns are scanned from a rotating pointer and the most negative
    reduced cost of the first improving block enters. After 50 consecutive
    degenerate pivots Bland's rule takes over until progress resumes.

    An instance holds the solve state and must not be shared between
    concurrent solves.
    """

    def __init__(self, lp, tol=FEASIBILITY_TOLERANCE, max_iter=None,
                 block_size=BLOCK_SIZE):
        self.lp = lp
        self.tol = tol
        self.block_size = block_size
        source = lp.columns
        if lp.free:
            source = _SplitColumns(source, lp.free)
        self.source = source
        self.m = source.n_rows
        self.n = source.n_columns
        self.max_iter = max_iter or 20000 + 50 * self.m
        self.iterations = 0
        self._scale()

    def _scale(self):
        row_max = np.zeros(self.m)
        for start in range(0, self.n, self.block_size):
            matrix, _ = self.source.block(start,
                                          min(start + self.block_size,
                                              self.n))
            if matrix.size:
                row_max = np.maximum(row_max, np.abs(matrix).max(axis=1))
        row_scale = np.where(row_max > 0, 1.0 / np.where(row_max > 0,
                                                         row_max, 1.0), 1.0)
        sign = np.where(self.lp.rhs < 0, -1.0, 1.0)
        self.row_scale = row_scale * sign
        self.rhs = self.row_scale * self.lp.rhs
        self.direction = -1.0 if self.lp.sense == 'max' else 1.0
        cost_max = 0.0
        for start in range(0, self.n, self.block_size):
            _, cost = self._scaled_block(start, min(start + self.block_size,
                                                    self.n), normalize=False)
            if cost.size:
                cost_max = max(cost_max, float(np.abs(cost).max()))
        self.cost_scale = 1.0 / cost_max if cost_max > 0 else 1.0
        __logs__.debug('Scaled LP: %s rows, %s columns, cost scale %s',
                       self.m, self.n, self.cost_scale)

    def _scale_columns(self, matrix, cost, normalize=True):
        matrix = matrix * self.row_scale[:, None]
        col_max = np.abs(matrix).max(axis=0) if matrix.size else \
            np.zeros(matrix.shape[1])
        col_scale = np.where(col_max > 0, 1.0 / np.where(col_max > 0,
                                                         col_max, 1.0), 1.0)
        cost = self.direction * cost * col_scale
        if normalize:
            cost = cost * self.cost_scale
        return matrix * col_scale, cost, col_scale

    def _scaled_block(self, start, stop, normalize=True):
        matrix, cost = self.source.block(start, stop)
        matrix, cost, _ = self._scale_columns(matrix, cost, normalize)
        return matrix, cost

    def _scaled_take(self, indices):
        matrix, cost = self.source.take(indices)
        return self._scale_columns(matrix, cost)

    def _basis_matrix(self, basis):
        """Scaled basis matrix, phase-II costs and column scales."""
        matrix = np.zeros((self.m, self.m))
        cost = np.zeros(self.m)
        scale = np.ones(self.m)
        structural = [i for i, j in enumerate(basis) if j < self.n]
        if structural:
            columns, costs, scales = self._scaled_take(
                [basis[i] for i in structural])
            matrix[:, structural] = columns
            cost[structural] = costs
            scale[structural] = scales
        for i, j in enumerate(basis):
            if j >= self.n:
                matrix[j - self.n, i] = 1.0
        return matrix, cost, scale

    def _factor(self, matrix):
        try:
            lu = lu_factor(matrix, check_finite=False)
        except (LinAlgError, ValueError) as error:
            raise SolverError('basis factorization failed',
                              iterations=self.iterations, reason=str(error))
        pivots = np.abs(np.diag(lu[0]))
        if pivots.min() < 1e-13 * max(pivots.max(), 1.0):
            raise SolverError('singular basis', iterations=self.iterations,
                              min_pivot=float(pivots.min()))
        return lu

    def _price(self, y, phase, is_basic, pointer, bland):
        """Returns (entering column or None, new pointer, zero-cost count)."""
        n_blocks = max(1, -(-self.n // self.block_size))
        order = range(n_blocks) if bland else \
            [(pointer + i) % n_blocks for i in range(n_blocks)]
        zero_costs = 0
        for b in order:
            start = b * self.block_size
            stop = min(start + self.block_size, self.n)
            if start >= stop:
                continue
            matrix, cost = self._scaled_block(start, stop)
            if phase == 1:
                cost = np.zeros_like(cost)
            reduced = cost - y.dot(matrix)
            reduced[is_basic[start:stop]] = np.inf
            improving = reduced < -OPTIMALITY_TOLERANCE
            if improving.any():
                if bland:
                    j = int(np.flatnonzero(improving)[0])
                else:
                    j = int(np.argmin(reduced))
                return start + j, (b + 1) % n_blocks, 0
            zero_costs += int(np.sum(reduced <= OPTIMALITY_TOLERANCE))
        return None, pointer, zero_costs

    def _ratio(self, x, alpha, basis, phase, bland):
        """Harris two-pass ratio test. Returns (row or None, step)."""
        locked = [i for i, j in enumerate(basis)
                  if j >= self.n and phase == 2 and
                  abs(alpha[i]) > PIVOT_TOLERANCE]
        if locked:
            return max(locked, key=lambda i: abs(alpha[i])), 0.0
        rows = np.flatnonzero(alpha > PIVOT_TOLERANCE)
        if not len(rows):
            return None, None
        relaxed = np.min((np.maximum(x[rows], 0.0) + self.tol) / alpha[rows])
        ratios = np.maximum(x[rows], 0.0) / alpha[rows]
        eligible = rows[ratios <= relaxed]
        if bland:
            row = min(eligible, key=lambda i: basis[i])
        else:
            row = eligible[np.argmax(alpha[eligible])]
        return int(row), max(float(x[row]) / alpha[row], 0.0)

    def _iterate(self, basis, phase):
        """Runs one phase; returns (status, lu, x, y, zero_costs, ray)."""
        is_basic = np.zeros(self.n, dtype=bool)
        is_basic[[j for j in basis if j < self.n]] = True
        pointer = 0
        degenerate = 0
        bland = False
        while True:
            if self.iterations >= self.max_iter:
                raise SolverError('iteration limit reached',
                                  iterations=self.iterations, phase=phase)
            matrix, cost, _ = self._basis_matrix(basis)
            if phase == 1:
                cost = np.array([1.0 if j >= self.n else 0.0
                                 for j in basis])
            lu = self._factor(matrix)
            x = lu_solve(lu, self.rhs, check_finite=False)
            y = lu_solve(lu, cost, trans=1, check_finite=False)
            entering, pointer, zero_costs = self._price(y, phase, is_basic,
                                                        pointer, bland)
            if entering is None:
                return OPTIMAL, lu, x, y, zero_costs, None
            column, _, _ = self._scaled_take([entering])
            alpha = lu_solve(lu, column[:, 0], check_finite=False)
            row, step = self._ratio(x, alpha, basis, phase, bland)
            if row is None:
                return UNBOUNDED, lu, x, y, 0, (entering, alpha)
            __logs__.debug('Pivot %s: column %s enters, row %s leaves, '
                           'step %s', self.iterations, entering, row, step)
            leaving = basis[row]
            if leaving < self.n:
                is_basic[leaving] = False
            basis[row] = entering
            is_basic[entering] = True
            self.iterations += 1
            if step <= self.tol:
                degenerate += 1
                if degenerate >= DEGENERATE_LIMIT and not bland:
                    __logs__.warning('Switching to Bland rule after %s '
                                     'degenerate pivots', degenerate)
                    bland = True
            else:
                degenerate = 0
                bland = False

    def _drive_out_artificials(self, basis):
        """Pivots zero-level artificials out where a structural column can
        replace them; rows where none can stay locked at zero."""
        for row in range(self.m):
            if basis[row] < self.n:
                continue
            matrix, _, _ = self._basis_matrix(basis)
            lu = self._factor(matrix)
            unit = np.zeros(self.m)
            unit[row] = 1.0
            rho = lu_solve(lu, unit, trans=1, check_finite=False)
            is_basic = set(basis)
            replacement = None
            for start in range(0, self.n, self.block_size):
                stop = min(start + self.block_size, self.n)
                block, _ = self._scaled_block(start, stop)
                weights = np.abs(rho.dot(block))
                for j in np.flatnonzero(weights > 1e-7):
                    if start + j not in is_basic:
                        replacement = start + int(j)
                        break
                if replacement is not None:
                    break
            if replacement is None:
                __logs__.info('Row %s is redundant; artificial kept at zero',
                              row)
            else:
                basis[row] = replacement
                self.iterations += 1

    def start(self, basis=None):
        """Returns a feasible starting basis (phase I), or an infeasibility
        certificate as (None, farkas)."""
        if basis is not None:
            return list(basis), None
        basis = [self.n + i for i in range(self.m)]
        status, lu, x, y, _, _ = self._iterate(basis, phase=1)
        if status != OPTIMAL:
            raise SolverError('phase I did not terminate',
                              iterations=self.iterations)
        infeasibility = sum(x[i] for i, j in enumerate(basis) if j >= self.n)
        if infeasibility > self.tol * max(1.0, np.abs(self.rhs).max()):
            __logs__.info('Phase I ended with infeasibility %s',
                          infeasibility)
            return None, self.row_scale * y
        self._drive_out_artificials(basis)
        return basis, None

    def solve(self, basis=None):
        """Solves the LP.

        Args:
            * basis: An optional feasible basis from an earlier solve.

        Returns:
            An LPSolution.

        Raises:
            SolverError: on a singular basis or the iteration limit.
        """
        basis, farkas = self.start(basis)
        if basis is None:
            return LPSolution(INFEASIBLE, farkas=farkas,
                              iterations=self.iterations)
        status, lu, x, y, zero_costs, ray = self._iterate(basis, phase=2)
        if status == UNBOUNDED:
            return LPSolution(UNBOUNDED, ray=self._ray(basis, *ray),
                              basis=tuple(basis),
                              iterations=self.iterations)
        solution = self._solution(basis, x, y, zero_costs)
        __logs__.info('LP solved: %s after %s pivots, objective %s',
                      solution.status, solution.iterations,
                      solution.objective)
        return solution

    def _solution(self, basis, x, y, zero_costs):
        _, _, scale = self._basis_matrix(basis)
        x_split = np.zeros(self.n)
        structural = [i for i, j in enumerate(basis) if j < self.n]
        values = np.maximum(x, 0.0) * scale
        x_split[[basis[i] for i in structural]] = values[structural]
        primal_degenerate = bool(np.any(x[structural] <= self.tol)) if \
            structural else False
        x_out = self._merge_free(x_split)
        duals = self.direction * self.row_scale * y / self.cost_scale
        matrix, cost = self.lp.columns.take(np.flatnonzero(x_out))
        objective = float(cost.dot(x_out[x_out != 0]))
        return LPSolution(OPTIMAL, x=x_out, y=duals, objective=objective,
                          basis=tuple(basis),
                          primal_degenerate=primal_degenerate,
                          dual_degenerate=zero_costs > 0,
                          iterations=self.iterations)

    def _merge_free(self, x_split):
        base = self.lp.columns.n_columns
        x_out = x_split[:base].copy()
        for offset, j in enumerate(sorted(self.lp.free)):
            x_out[j] -= x_split[base + offset]
        return x_out

    def _ray(self, basis, entering, alpha):
        _, _, scale = self._basis_matrix(basis)
        ray = np.zeros(self.n)
        _, _, entering_scale = self._scaled_take([entering])
        ray[entering] = entering_scale[0]
        for i, j in enumerate(basis):
            if j < self.n:
                ray[j] = -alpha[i] * scale[i]
        return self._merge_free(ray)

    def alternative_duals(self, basis, max_bases=100):
        """Dual vectors of optimal bases reachable by degenerate pivots.

        From an optimal basis, each basic row at zero level can leave in
        exchange for the column that keeps every reduced cost signed
        (dual ratio test, lowest index on ties). The search is
        breadth-first and stops after max_bases bases.

        Returns:
            A list of distinct dual vectors in original units, the
                starting one first.
        """
        seen = set()
        duals = []
        queue = deque([tuple(basis)])
        while queue and len(seen) < max_bases:
            current = queue.popleft()
            key = tuple(sorted(current))
            if key in seen:
                continue
            seen.add(key)
            matrix, cost, _ = self._basis_matrix(list(current))
            lu = self._factor(matrix)
            x = lu_solve(lu, self.rhs, check_finite=False)
            y = lu_solve(lu, cost, trans=1, check_finite=False)
            dual = self.direction * self.row_scale * y / self.cost_scale
            if not any(np.allclose(dual, d, rtol=1e-9, atol=1e-12)
                       for d in duals):
                duals.append(dual)
            for row in np.flatnonzero(np.abs(x) <= self.tol):
                if current[row] >= self.n:
                    continue
                entering = self._dual_ratio(lu, y, row, current)
                if entering is not None:
                    following = list(current)
                    following[row] = entering
                    queue.append(tuple(following))
        __logs__.info('Enumerated %s bases, %s distinct dual vectors',
                      len(seen), len(duals))
        return duals

    def _dual_ratio(self, lu, y, row, basis):
        unit = np.zeros(self.m)
        unit[row] = 1.0
        rho = lu_solve(lu, unit, trans=1, check_finite=False)
        is_basic = np.zeros(self.n, dtype=bool)
        is_basic[[j for j in basis if j < self.n]] = True
        best, best_ratio = None, np.inf
        for start in range(0, self.n, self.block_size):
            stop = min(start + self.block_size, self.n)
            matrix, cost = self._scaled_block(start, stop)
            alpha = rho.dot(matrix)
            eligible = (alpha < -PIVOT_TOLERANCE) & ~is_basic[start:stop]
            if not eligible.any():
                continue
            reduced = np.maximum(cost - y.dot(matrix), 0.0)
            ratios = np.where(eligible, reduced / np.where(eligible, -alpha,
                                                            1.0), np.inf)
            j = int(np.argmin(ratios))
            if ratios[j] < best_ratio:
                best, best_ratio = start + j, ratios[j]
        return best


def solve(lp, tol=FEASIBILITY_TOLERANCE, max_iter=None, block_size=BLOCK_SIZE,
          certify=True):
    """Solves a StandardLP and attaches certificate residuals.

    Args:
        * lp: A StandardLP.
        * tol: A float feasibility tolerance on the scaled problem.
        * max_iter: An optional pivot limit.
        * block_size: Columns priced per block.
        * certify: Whether to run verify_certificates on optimal results.

    Returns:
        An LPSolution.
    """
    solution = RevisedSimplex(lp, tol, max_iter, block_size).solve()
    if certify and solution.status == OPTIMAL:
        solution.certificates = verify_certificates(lp, solution,
                                                    CERTIFICATE_TOLERANCE,
                                                    block_size)
        if not solution.certificates.passed:
            __logs__.warning('Certificate residuals above tolerance: %s',
                             solution.certificates)
    return solution


def enumerate_alternative_optima(lp, solution, max_bases=100,
                                 tol=FEASIBILITY_TOLERANCE,
                                 block_size=BLOCK_SIZE):
    """Dual vectors of alternative optimal bases of a solved LP."""
    if solution.status != OPTIMAL:
        raise DomainError('alternative optima need an optimal solution',
                          status=solution.status)
    solver = RevisedSimplex(lp, tol, block_size=block_size)
    return solver.alternative_duals(solution.basis, max_bases)


def verify_certificates(lp, solution, tol=CERTIFICATE_TOLERANCE,
                        block_size=BLOCK_SIZE):
    """Recomputes optimality residuals from the original data.

    Args:
        * lp: The StandardLP that was solved.
        * solution: An LPSolution with x and y.
        * tol: A float tolerance for the passed flag.

    Returns:
        A CertificateReport with the max primal residual |Ax - b| (and
            negativity of x), the max dual sign violation of the reduced
            costs, sum_j x_j |d_j| and the duality gap |c'x - b'y|.
    """
    x = np.asarray(solution.x, dtype=float)
    y = np.asarray(solution.y, dtype=float)
    free = set(lp.free)
    free_columns = np.array(sorted(free), dtype=int)
    product = np.zeros(lp.n_rows)
    dual = 0.0
    complementarity = 0.0
    objective = 0.0
    for start, stop, matrix, cost in lp.blocks(block_size):
        part = x[start:stop]
        product += matrix.dot(part)
        objective += float(cost.dot(part))
        reduced = cost - y.dot(matrix)
        signed = reduced if lp.sense == 'min' else -reduced
        bounded = ~np.isin(np.arange(start, stop), free_columns)
        violation = np.where(bounded, np.maximum(-signed, 0.0),
                             np.abs(reduced))
        if violation.size:
            dual = max(dual, float(violation.max()))
        complementarity += float(np.sum(np.abs(part) * np.abs(reduced)))
    primal = float(np.abs(product - lp.rhs).max()) if lp.n_rows else 0.0
    bounded_x = np.delete(x, list(free)) if free else x
    if bounded_x.size:
        primal = max(primal, float(np.maximum(-bounded_x, 0.0).max()))
    gap = abs(objective - float(lp.rhs.dot(y)))
    passed = (primal <= tol and dual <= tol and complementarity <= tol and
              gap <= tol * (1.0 + abs(objective)))
    return CertificateReport(primal, dual, complementarity, gap, passed)
