"""Dual nets, minimum metrics and order-alpha net verification.

The dual of a digital net with generating matrices C_1..C_s of shape n x m is
the set of multi-indices k in {0,...,b^n-1}^s whose digit vectors are
annihilated by the stacked transposed matrices.  It is enumerated by spanning
the kernel of the m x (s*n) map whose columns are the rows of the C_j.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import GuardError, InputError
from .ff import FieldMatrix, PrimeBase, rows_independent, kernel_basis
from .nets import DigitalNet, ConstructionParams
from .digits import HAMMING, dick, mu_alpha_int

DEFAULT_DUAL_LIMIT = 1 << 24


def dual_limit_from_env(default: int = DEFAULT_DUAL_LIMIT) -> int:
    return int(os.environ.get("HOQMC_MAX_DUAL", default))


def _stacked_matrix(net: DigitalNet) -> FieldMatrix:
    """The m x (s*n) map sending concatenated digit vectors to F_b^m."""
    rows = []
    for r in range(net.m):
        row = []
        for mat in net.matrices:
            row.extend(mat.entries[i][r] for i in range(net.n))
        rows.append(row)
    return FieldMatrix.from_rows(rows, net.base)


@dataclass(frozen=True)
class DualNet:
    """Kernel-basis description of a net's dual."""

    net: DigitalNet
    basis: tuple  # kernel basis vectors in F_b^(s*n)

    @property
    def size(self) -> int:
        return self.net.base.b ** len(self.basis)

    def elements_digit_array(self, limit=None) -> np.ndarray:
        """All dual elements as an integer digit array of shape (size, s*n).

        Column j*n + i holds digit i (coefficient of b^i) of component j.
        Deterministic order: mixed-radix coefficients over the kernel basis.
        """
        if limit is None:
            limit = dual_limit_from_env()
        if self.size > limit:
            raise GuardError(
                f"dual has {self.size} elements, over the limit {limit}; "
                f"raise HOQMC_MAX_DUAL to at least {self.size} to enumerate",
                required=self.size,
            )
        b = self.net.base.b
        d = len(self.basis)
        width = self.net.s * self.net.n
        if d == 0:
            return np.zeros((1, width), dtype=np.int64)
        basis = np.array(self.basis, dtype=np.int64)  # (d, width)
        idx = np.arange(self.size, dtype=np.int64)
        coeffs = np.stack([(idx // b**t) % b for t in range(d)], axis=1)
        return coeffs.dot(basis) % b

    def elements(self, limit=None):
        """Dual elements as tuples of s integers (k_1, ..., k_s)."""
        digits = self.elements_digit_array(limit)
        n = self.net.n
        powers = np.array([self.net.base.b**i for i in range(n)], dtype=object)
        out = []
        for row in digits:
            out.append(
                tuple(
                    int(sum(int(row[j * n + i]) * int(powers[i]) for i in range(n)))
                    for j in range(self.net.s)
                )
            )
        return out


def dual_space(net: DigitalNet) -> DualNet:
    stacked = _stacked_matrix(net)
    return DualNet(net, tuple(kernel_basis(stacked)))


def dual_enumerate(net: DigitalNet, limit=None):
    """Yield every element of the dual exactly once (includes the zero index)."""
    dual = dual_space(net)
    for k in dual.elements(limit):
        yield k


def min_metric(net: DigitalNet, metric, limit=None):
    """Minimum metric over nonzero dual elements.

    Returns math.inf when the dual is trivial ({0}); by the subgroup property
    this minimum equals the minimum of the metric over all nonzero pairwise
    differences.
    """
    dual = dual_space(net)
    digits = dual.elements_digit_array(limit)
    if digits.shape[0] == 1:
        return math.inf
    n, s = net.n, net.s
    nonzero = digits[np.any(digits != 0, axis=1)]
    if metric == HAMMING:
        per_component = (nonzero != 0).reshape(-1, s, n).sum(axis=2)
        return int(per_component.sum(axis=1).min())
    if isinstance(metric, tuple) and metric[0] == "dick":
        alpha = metric[1]
        positions = np.arange(1, n + 1, dtype=np.int64)
        pos = np.where(nonzero.reshape(-1, s, n) != 0, positions, 0)
        top = np.sort(pos, axis=2)[:, :, -alpha:] if alpha < n else pos
        return int(top.sum(axis=(1, 2)).min())
    raise InputError(f"unknown metric {metric!r}")


def predicted_t_interlaced(t_prime: int, alpha: int, s: int, m: int) -> int:
    """Quality parameter of an interlaced net from its order-1 base net."""
    if not 0 <= t_prime <= m:
        raise InputError("t' must lie in [0, m]")
    return alpha * min(m, t_prime + (s * (alpha - 1)) // 2)


def propagate_t(t: int, alpha: int, alpha_prime: int) -> int:
    """Order-alpha' quality parameter of an order-alpha (t, m, s)-net."""
    if not 1 <= alpha_prime < alpha:
        raise InputError("require 1 <= alpha' < alpha")
    if t < 0:
        raise InputError("t must be nonnegative")
    return math.ceil(t * alpha_prime / alpha)


def metric_lower_bounds(p: ConstructionParams) -> dict:
    """Guaranteed lower bounds for the composite construction.

    Returns the Hamming bound g+1, the order-beta bound
    max(0, beta*(gw - floor(s*(beta-1)/2))) + 1 and the NRT bound
    gw - floor(s*(beta-1)/2) + 1.
    """
    gw = p.g * p.w
    half = (p.s * (p.beta - 1)) // 2
    return {
        "hamming": p.g + 1,
        "mu_beta": max(0, p.beta * (gw - half)) + 1,
        "mu_1": gw - half + 1,
    }


def _row_selections(n: int, alpha: int, budget: int):
    """Maximal row-index selections for one coordinate.

    Yields (indices, weight) where indices is a tuple of distinct 1-based row
    indices and weight is the sum of the min(alpha, len) largest of them.
    Selections with alpha constrained indices are filled with every smaller
    index, which is the worst case for linear independence at equal weight.
    """
    yield (), 0

    def rec(prefix, depth, weight):
        # prefix is decreasing; next index below prefix[-1]
        start = prefix[-1] - 1 if prefix else n
        for i in range(start, 0, -1):
            if weight + i > budget:
                continue
            sel = prefix + (i,)
            if depth + 1 == alpha:
                filled = sel + tuple(range(i - 1, 0, -1))
                yield filled, weight + i
            else:
                yield sel, weight + i
                yield from rec(sel, depth + 1, weight + i)

    yield from rec((), 0, 0)


def verify_order_t(
    net: DigitalNet, alpha: int, t: int, max_combinations: int = 2_000_000
) -> bool:
    """Exhaustively check the order-alpha (t, m, s)-net row condition.

    True iff every row selection whose weight (sum of the alpha largest
    selected indices per coordinate) is at most alpha*m - t is linearly
    independent over F_b.
    """
    if alpha < 1:
        raise InputError("alpha must be >= 1")
    if not 0 <= t <= alpha * net.m:
        raise InputError("t must lie in [0, alpha*m]")
    budget = alpha * net.m - t
    per_j = [list(_row_selections(net.n, alpha, budget)) for _ in range(net.s)]
    # all coordinates share the same selection pool; reuse the first
    pool = per_j[0]
    total = 1
    for _ in range(net.s):
        total *= len(pool)
    if total > max_combinations:
        raise GuardError(
            f"{total} row-selection combinations exceed the guard "
            f"{max_combinations}",
            required=total,
        )

    base = net.base

    def rec(j, weight, rows):
        if j == net.s:
            if rows and not rows_independent(rows, base):
                return False
            return True
        for sel, w in pool:
            if weight + w > budget:
                continue
            new_rows = rows + [net.matrices[j].row(i - 1) for i in sel]
            if not rec(j + 1, weight + w, new_rows):
                return False
        return True

    return rec(0, 0, [])


def counting_bound_holds(net: DigitalNet, limit=None) -> bool:
    """Check the dual fiber-count bound b^(z - mu_1(P) + 1) exhaustively.

    Groups nonzero dual elements by the vector of per-component NRT weights
    and checks each fiber count against the bound.
    """
    b = net.base.b
    dual = dual_space(net)
    elements = dual.elements(limit)
    nonzero = [k for k in elements if any(k)]
    if not nonzero:
        return True
    mu1_net = min(sum(mu_alpha_int(kj, b, 1) for kj in k) for k in nonzero)
    fibers = {}
    for k in nonzero:
        l = tuple(mu_alpha_int(kj, b, 1) for kj in k)
        fibers[l] = fibers.get(l, 0) + 1
    for l, count in fibers.items():
        z = sum(l)
        if count > b ** (z - mu1_net + 1):
            return False
    return True


def metrics_report(net: DigitalNet, params: ConstructionParams = None, limit=None) -> dict:
    """JSON-ready metric summary for the CLI `metrics` subcommand."""
    dual = dual_space(net)
    hamming = min_metric(net, HAMMING, limit)
    nrt = min_metric(net, dick(1), limit)
    report = {
        "hamming_min": None if hamming == math.inf else hamming,
        "nrt_min": None if nrt == math.inf else nrt,
        "mu_alpha_min": {},
        "dual_size": dual.size,
    }
    alphas = [2]
    if params is not None:
        alphas = sorted({params.alpha, params.beta})
    for a in alphas:
        v = min_metric(net, dick(a), limit)
        report["mu_alpha_min"][str(a)] = None if v == math.inf else v
    if params is not None:
        bounds = metric_lower_bounds(params)
        report["bounds"] = bounds
        mu_beta = min_metric(net, dick(params.beta), limit)
        report["bounds_satisfied"] = (
            (hamming == math.inf or hamming >= bounds["hamming"])
            and (nrt == math.inf or nrt >= bounds["mu_1"])
            and (mu_beta == math.inf or mu_beta >= bounds["mu_beta"])
        )
    return report
