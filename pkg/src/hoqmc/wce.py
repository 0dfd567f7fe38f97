"""Sobolev kernel, worst-case quadrature errors and explicit bound chains.

The worst-case error of equal-weight quadrature in the reproducing-kernel
space satisfies e^2 = (1/N^2) sum_{h,h'} K_{alpha,s}(x_h, x_h') - 1 because
the kernel has unit integral (verified exactly at runtime).  Two evaluation
paths are provided: the direct kernel double sum (float, with an exact
rational mode as ground truth) and the truncated dual-net Walsh sum.

For one-dimensional point sets the rational mode avoids the O(N^2) kernel
evaluations entirely: the product terms of the kernel factor through power
sums of the points, and the pair sum of B_{2*alpha}(|x - y|) reduces to
prefix power sums of the sorted integer numerators.  This keeps the exact
path O(N log N) and free of the catastrophic cancellation that limits the
float path once e^2 approaches machine precision.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import GuardError, InputError
from .ff import PrimeBase
from .digits import digit_sub_int, hamming_weight_int
from .nets import DigitalNet, NetPoint
from .dual import dual_space
from .walsh import (
    bernoulli_coeffs,
    empirical_decay_constant,
    kernel_walsh_coeff_sd,
    _poly_eval,
    _poly_integrate,
)

_EPS = 2.0**-52

EXACT_KERNEL_SUM = "ExactKernelSum"
TRUNCATED_DUAL_SUM = "TruncatedDualSum"

DEFAULT_POINT_LIMIT = 1 << 14
DEFAULT_RATIONAL_LIMIT = 1024
DEFAULT_GRID_LIMIT = 1 << 12


def point_limit_from_env(default: int = DEFAULT_POINT_LIMIT) -> int:
    return int(os.environ.get("HOQMC_MAX_N", default))


# ---------------------------------------------------------------------------
# kernel evaluation

@lru_cache(maxsize=None)
def _verify_unit_integral(alpha: int) -> bool:
    """Exact check that the kernel integrates to 1 over the unit square.

    Only the r = 0 product term contributes: int B_r = 0 for r >= 1 by the
    zero-mean normalization, and the double integral of B_{2a}(|x - y|)
    equals 2 * int_0^1 (1 - u) B_{2a}(u) du, which vanishes because the
    odd-index Bernoulli number B_{2a+1} is zero.
    """
    total = Fraction(0)
    for r in range(alpha + 1):
        anti = _poly_integrate(bernoulli_coeffs(r))
        mean = _poly_eval(anti, Fraction(1))
        total += (mean / math.factorial(r)) ** 2
    coeffs = bernoulli_coeffs(2 * alpha)
    anti = _poly_integrate(coeffs)
    anti2 = _poly_integrate(anti)
    # 2 * int (1-u) B(u) du = 2 * (int B - int u B)
    int_b = _poly_eval(anti, Fraction(1))
    int_ub = _poly_eval(anti, Fraction(1)) - _poly_eval(anti2, Fraction(1))
    cross = 2 * (int_b - int_ub) / math.factorial(2 * alpha)
    if total + (-1) ** (alpha + 1) * cross != 1:
        raise RuntimeError("kernel unit-integral identity failed")
    return True


def _check_alpha(alpha: int):
    if alpha < 2:
        raise InputError("alpha must be >= 2")
    _verify_unit_integral(alpha)


def kernel_1d(alpha: int, x: float, y: float) -> float:
    """K_alpha(x, y) = sum_r B_r(x)B_r(y)/(r!)^2 + (-1)^(a+1) B_2a(|x-y|)/(2a)!."""
    _check_alpha(alpha)
    total = 0.0
    for r in range(alpha + 1):
        cr = [float(c) for c in bernoulli_coeffs(r)]
        total += _poly_eval(cr, x) * _poly_eval(cr, y) / math.factorial(r) ** 2
    c2a = [float(c) for c in bernoulli_coeffs(2 * alpha)]
    total += (
        (-1) ** (alpha + 1)
        * _poly_eval(c2a, abs(x - y))
        / math.factorial(2 * alpha)
    )
    return total


def kernel_1d_frac(alpha: int, x: Fraction, y: Fraction) -> Fraction:
    """Exact rational kernel value for rational arguments."""
    _check_alpha(alpha)
    x, y = Fraction(x), Fraction(y)
    total = Fraction(0)
    for r in range(alpha + 1):
        cr = bernoulli_coeffs(r)
        total += _poly_eval(cr, x) * _poly_eval(cr, y) / math.factorial(r) ** 2
    c2a = bernoulli_coeffs(2 * alpha)
    total += (
        (-1) ** (alpha + 1)
        * _poly_eval(c2a, abs(x - y))
        / math.factorial(2 * alpha)
    )
    return total


def kernel_sd(alpha: int, x, y) -> float:
    """Coordinate product of one-dimensional kernel values."""
    if len(x) != len(y):
        raise InputError("point dimensions differ")
    out = 1.0
    for xj, yj in zip(x, y):
        out *= kernel_1d(alpha, xj, yj)
    return out


@dataclass(frozen=True)
class WceReport:
    """Worst-case error with method and certified/empirical budget."""

    N: int
    e: float
    method: str
    error_budget: float
    truncation_radius: int = None
    e_squared: float = 0.0

    def __post_init__(self):
        if self.e < 0 or self.error_budget < 0:
            raise InputError("error and budget must be nonnegative")

    def to_json(self) -> dict:
        out = {
            "N": self.N,
            "e": self.e,
            "e_squared": self.e_squared,
            "method": self.method,
            "error_budget": self.error_budget,
        }
        if self.truncation_radius is not None:
            out["truncation_radius"] = self.truncation_radius
        return out


# ---------------------------------------------------------------------------
# exact one-dimensional path via power sums

def _pair_power_sums(xs_sorted, max_p: int) -> list:
    """S_p = sum_{i<j} (x_j - x_i)^p for p = 0..max_p, exact integers.

    Uses prefix power sums: (x_j - x_i)^p expands into binomials of
    x_j^(p-t) * x_i^t, so each S_p is a single pass over sorted values.
    """
    n = len(xs_sorted)
    prefix = [0] * (max_p + 1)  # running sums of x_i^t for i < j
    totals = [0] * (max_p + 1)
    for j in range(n):
        xj = xs_sorted[j]
        xp = [1]
        for _ in range(max_p):
            xp.append(xp[-1] * xj)
        for p in range(max_p + 1):
            acc = 0
            for t in range(p + 1):
                term = math.comb(p, t) * xp[p - t] * prefix[t]
                acc += -term if t % 2 else term
            totals[p] += acc
        for t in range(max_p + 1):
            prefix[t] += xp[t]
    totals[0] = n * (n - 1) // 2
    return totals


def squared_error_1d_exact(numerators, denominator: int, alpha: int) -> Fraction:
    """Exact e^2 for one-dimensional points x_h = numerators[h]/denominator.

    The unit kernel integral cancels the r = 0 term exactly, leaving
    e^2 = sum_{r=1..alpha} mean(B_r)^2 / (r!)^2
        + (-1)^(alpha+1)/(2*alpha)! * mean over pairs of B_2a(|x - y|),
    all evaluated through integer power sums.
    """
    _check_alpha(alpha)
    N = len(numerators)
    if N < 1:
        raise InputError("need at least one point")
    D = int(denominator)
    xs = sorted(int(v) for v in numerators)
    # power sums of the points themselves, for the product terms
    psum = [sum(x**t for x in xs) for t in range(alpha + 1)]
    e2 = Fraction(0)
    for r in range(1, alpha + 1):
        cr = bernoulli_coeffs(r)
        mean = sum(
            cr[t] * Fraction(psum[t], D**t) for t in range(r + 1)
        ) / N
        e2 += mean * mean / math.factorial(r) ** 2
    # pair term: N * B(0) on the diagonal plus twice the sorted-pair sum
    c2a = bernoulli_coeffs(2 * alpha)
    pair = _pair_power_sums(xs, 2 * alpha)
    term = Fraction(N) * c2a[0]
    for p in range(2 * alpha + 1):
        term += 2 * c2a[p] * Fraction(pair[p], D**p)
    e2 += (-1) ** (alpha + 1) * term / (math.factorial(2 * alpha) * N * N)
    return e2


def _points_as_integers(points):
    """Common-denominator integer numerators of 1-D points."""
    fracs = [p.to_fractions()[0] for p in points]
    denom = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
    return [int(f * denom) for f in fracs], denom


# ---------------------------------------------------------------------------
# worst-case error: kernel double sum

def _float_coordinates(points) -> np.ndarray:
    return np.array([p.to_floats() for p in points])


def _kernel_block(alpha: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Dense 1-D kernel block for float coordinate vectors."""
    out = np.zeros((len(x), len(y)))
    for r in range(alpha + 1):
        cr = [float(c) for c in bernoulli_coeffs(r)]
        bx = _poly_eval(cr, x)
        by = _poly_eval(cr, y)
        out += np.outer(bx, by) / math.factorial(r) ** 2
    c2a = [float(c) for c in bernoulli_coeffs(2 * alpha)]
    d = np.abs(x[:, None] - y[None, :])
    out += (-1) ** (alpha + 1) * _poly_eval(c2a, d) / math.factorial(2 * alpha)
    return out


def wce_exact(
    points,
    alpha: int,
    rational: bool = False,
    max_points: int = None,
    block: int = 2048,
) -> WceReport:
    """Worst-case error from the kernel double sum.

    The float path uses blockwise numpy evaluation with exactly-rounded
    (fsum) accumulation of block totals.  The rational path is exact: for
    s = 1 it runs in near-linear time through power sums; for s >= 2 it
    brute-forces the double sum over rational kernel values (guarded).
    """
    _check_alpha(alpha)
    points = list(points)
    N = len(points)
    if N < 1:
        raise InputError("need at least one point")
    s = len(points[0].coordinates)
    if any(len(p.coordinates) != s for p in points):
        raise InputError("points have inconsistent dimensions")
    limit = point_limit_from_env(max_points or DEFAULT_POINT_LIMIT)
    if N > limit:
        raise GuardError(
            f"{N} points exceed the O(N^2) guard {limit}; "
            f"set HOQMC_MAX_N to opt in",
            required=N,
        )

    if rational:
        if s == 1:
            nums, denom = _points_as_integers(points)
            e2 = squared_error_1d_exact(nums, denom, alpha)
        else:
            if N > DEFAULT_RATIONAL_LIMIT:
                raise GuardError(
                    f"rational mode for s >= 2 capped at "
                    f"{DEFAULT_RATIONAL_LIMIT} points",
                    required=N,
                )
            coords = [p.to_fractions() for p in points]
            total = Fraction(0)
            for h in range(N):
                for h2 in range(h, N):
                    k = Fraction(1)
                    for j in range(s):
                        k *= kernel_1d_frac(alpha, coords[h][j], coords[h2][j])
                    total += k if h == h2 else 2 * k
            e2 = total / N**2 - 1
        e2f = float(max(e2, 0))
        e = math.sqrt(e2f)
        return WceReport(N, e, EXACT_KERNEL_SUM, 2 * _EPS * (e + 1e-300), e_squared=e2f)

    X = _float_coordinates(points)
    block_sums = []
    kmax = 0.0
    for lo in range(0, N, block):
        hi = min(N, lo + block)
        K = np.ones((hi - lo, N))
        for j in range(s):
            K *= _kernel_block(alpha, X[lo:hi, j], X[:, j])
        block_sums.append(float(K.sum()))
        kmax = max(kmax, float(np.abs(K).max()))
    e2 = math.fsum(block_sums) / N**2 - 1.0
    # rounding: ~log2(N) deep pairwise sums of N^2 terms of size <= kmax,
    # divided by N^2, plus the final subtraction near 1
    budget = 8 * _EPS * kmax * (math.log2(N) + 2) + 4 * _EPS
    e = math.sqrt(max(e2, 0.0))
    return WceReport(N, e, EXACT_KERNEL_SUM, budget, e_squared=max(e2, 0.0))


# ---------------------------------------------------------------------------
# S-sums and tails

@lru_cache(maxsize=None)
def _weight_partial_sum(alpha: int, b: int, m: int) -> Fraction:
    """S_{2,m} = sum_{k < b^m} b^(-mu_alpha(k)), exact.

    Recursion over the highest digit position: either position m is zero
    (reduce m) or one of b-1 nonzero values contributes m to the metric and
    consumes one of the alpha slots.
    """
    if alpha == 0:
        return Fraction(b) ** m
    if m == 0:
        return Fraction(1)
    return _weight_partial_sum(alpha, b, m - 1) + (b - 1) * Fraction(
        1, b**m
    ) * _weight_partial_sum(alpha - 1, b, m - 1)


def s2_partial(alpha: int, base: PrimeBase, n: int) -> Fraction:
    """Exact partial sum S_{2,n} of the weight series."""
    if alpha < 2 or n < 0:
        raise InputError("require alpha >= 2 and n >= 0")
    return _weight_partial_sum(alpha, base.b, n)


@lru_cache(maxsize=None)
def _s1_bounds(alpha: int, b: int, terms: int):
    """Rigorous rational enclosure (lower, upper) of S_1 = lim S_{2,n}."""
    lower = _weight_partial_sum(alpha, b, terms)
    x = Fraction(1, b)
    if alpha == 2:
        # remaining increments (b-1) b^-m S_{2,m-1}^(order 1) with
        # S_{2,m-1}^(1) = 1 + (m-1)(b-1)/b <= m; arithmetico-geometric tail
        M = terms
        tail = (b - 1) * x ** (M + 1) * ((M + 1) - M * x) / (1 - x) ** 2
    else:
        sub_upper = _s1_bounds(alpha - 1, b, terms)[1]
        tail = sub_upper * x**terms
    return lower, lower + tail


def s1_bounds(alpha: int, base: PrimeBase, terms: int = 80):
    """Exact lower/upper rational bounds on the full weight series S_1."""
    if alpha < 2:
        raise InputError("S_1 diverges for alpha < 2")
    return _s1_bounds(alpha, base.b, terms)


def b_alpha_b(alpha: int, base: PrimeBase) -> Fraction:
    """Closed-form tail constant with S_1 - S_{2,n} <= B_(alpha,b)/b^n, alpha >= 3."""
    if alpha < 3:
        raise InputError("closed-form tail constant requires alpha >= 3")
    b = base.b
    total = Fraction(0)
    for v in range(1, alpha):
        prod = Fraction(1)
        for i in range(1, v):
            prod *= Fraction(b - 1, b**i - 1)
        total += prod
    prod = Fraction(1)
    for i in range(1, alpha):
        prod *= Fraction(b - 1, b**i - 1)
    total += Fraction(b ** (alpha - 1) - 1, b ** (alpha - 1) - b) * prod
    return total


def s1_tail_bound(alpha: int, base: PrimeBase, n: int) -> Fraction:
    """The analytic bound on S_1 - S_{2,n}: 2n/b^n for alpha=2, else B/b^n."""
    if alpha == 2:
        return Fraction(2 * n, base.b**n)
    return b_alpha_b(alpha, base) / base.b**n


def tail_bound_holds(alpha: int, base: PrimeBase, n: int, slack_terms: int = 60) -> bool:
    """Rigorous check of S_1 - S_{2,n} <= the analytic tail bound.

    Uses the exact upper enclosure of S_1 at n + slack_terms, so a True
    answer is a proof and a False answer could only be enclosure slack
    (never observed at the default slack).
    """
    upper = s1_bounds(alpha, base, terms=n + slack_terms)[1]
    return upper - s2_partial(alpha, base, n) <= s1_tail_bound(alpha, base, n)


# ---------------------------------------------------------------------------
# truncated dual sum

def wce_dual_truncated(
    net: DigitalNet,
    alpha: int,
    radius: int = None,
    limit: int = None,
    max_grid: int = DEFAULT_GRID_LIMIT,
) -> WceReport:
    """Worst-case error from the dual-net Walsh sum, truncated at b^radius.

    e^2 equals the sum of kernel Walsh coefficients over nonzero pairs of
    the full (infinite-precision) dual; enumerating components below
    b^radius leaves a tail controlled by the weight series: any missing
    pair has a component outside the box, and |K-hat(k,l)| factors into
    per-coordinate values bounded by D * b^(-mu_alpha(k_j) - mu_alpha(l_j))
    (diagonal decay constant D via positive semidefiniteness and
    Cauchy-Schwarz).  D is empirical, so the budget is flagged accordingly
    in spirit: it is reported, not certified.
    """
    _check_alpha(alpha)
    b = net.base.b
    if radius is None:
        radius = net.n
    radius = min(radius, net.n)
    if radius < 1:
        raise InputError("truncation radius must be >= 1")
    if b**radius > max_grid:
        raise GuardError(
            f"coefficient grids scale with b^radius = {b**radius}, over "
            f"the guard {max_grid}",
            required=b**radius,
        )
    cutoff = b**radius
    elements = [
        k
        for k in dual_space(net).elements(limit)
        if any(k) and all(kj < cutoff for kj in k)
    ]
    s = net.s
    total = 0.0 + 0j
    coeff_err = 0.0
    for k in elements:
        for l in elements:
            if any(
                hamming_weight_int(digit_sub_int(kj, lj, b), b) > 2 * alpha
                for kj, lj in zip(k, l)
            ):
                continue  # coefficient vanishes identically
            c = kernel_walsh_coeff_sd(alpha, k, l, net.base)
            total += c.value
            coeff_err += c.abs_error
    D = empirical_decay_constant(alpha, b)
    Ds = max(1.0, D**s)
    s1_hi = float(s1_bounds(alpha, net.base)[1])
    s2 = float(s2_partial(alpha, net.base, radius))
    tail = 2.0 * Ds * (s1_hi**s - s2**s) * s1_hi**s
    e2 = max(total.real, 0.0)
    return WceReport(
        net.num_points,
        math.sqrt(e2),
        TRUNCATED_DUAL_SUM,
        coeff_err + tail + abs(total.imag),
        truncation_radius=radius,
        e_squared=e2,
    )


# ---------------------------------------------------------------------------
# explicit bound chains

@dataclass(frozen=True)
class BoundBreakdown:
    """Explicit pieces of the error-bound chain, with empirical parts tagged.

    Only the fully explicit sub-chain is asserted; prefactors that the
    analysis leaves as existence constants live in `empirical` and are
    never used in invariants.
    """

    A_interp: Fraction
    B_interp: Fraction
    G: float
    t: int
    t_prime: int
    S1: float
    S1_tail: float
    B_alpha_b: float
    main_part_bound: float = None
    discretization_bound: float = None
    within_hypotheses: bool = True
    empirical: dict = None
    notes: tuple = ()

    def to_json(self) -> dict:
        return {
            "A_interp": [self.A_interp.numerator, self.A_interp.denominator],
            "B_interp": [self.B_interp.numerator, self.B_interp.denominator],
            "G": self.G,
            "t": self.t,
            "t_prime": self.t_prime,
            "S1": self.S1,
            "S1_tail": self.S1_tail,
            "B_alpha_b": self.B_alpha_b,
            "main_part_bound": self.main_part_bound,
            "discretization_bound": self.discretization_bound,
            "within_hypotheses": self.within_hypotheses,
            "empirical": self.empirical or {},
            "notes": list(self.notes),
        }


def _interp_coeffs(alpha: int, beta: int):
    if beta < 2:
        raise InputError("interpolation coefficients need beta >= 2")
    A = Fraction(alpha - 1, beta - 1)
    B = Fraction(beta - alpha, beta - 1)
    return A, B


def _common_breakdown(p, main=None, disc=None, notes=()):
    b = p.base.b
    A, B = _interp_coeffs(p.alpha, p.beta)
    t = p.beta * ((p.s * (p.beta - 1)) // 2)
    t_prime = (p.s * (p.beta - 1)) // 2
    if 2 * B > 1:
        G = b * (1.0 - float(b) ** -float(2 * B - 1)) ** -p.s
    else:
        G = math.inf
        notes = notes + ("geometric factor diverges: 2*B_interp <= 1",)
    n = p.beta * p.g * p.w
    s1_lo, s1_hi = s1_bounds(p.alpha, p.base)
    tail = s1_tail_bound(p.alpha, p.base, n)
    bab = float(b_alpha_b(p.alpha, p.base)) if p.alpha >= 3 else float(tail * b**n)
    within = all(p.constraints().values())
    if not within:
        notes = notes + ("outside guaranteed-rate hypotheses",)
    D = empirical_decay_constant(p.alpha, b)
    empirical = {
        "decay_constant_D": D,
        "decay_factor_max_1_D_pow_s": max(1.0, D**p.s),
    }
    return dict(
        A_interp=A,
        B_interp=B,
        G=G,
        t=t,
        t_prime=t_prime,
        S1=float(s1_hi),
        S1_tail=float(s1_hi - s1_lo),
        B_alpha_b=bab,
        main_part_bound=main,
        discretization_bound=disc,
        within_hypotheses=within,
        empirical=empirical,
        notes=notes,
    )


def main_part_bound(p) -> BoundBreakdown:
    """Explicit intermediate bound on the dual-pair coefficient sum.

    Value: G * b^(2At + 2Bt') * (gw+2)^(s-1) / b^(2*alpha*g*w), times the
    empirical decay factor max(1, D^s).  A and B interpolate the order-beta
    and order-1 metrics; t and t' are the construction's quality parameters.
    """
    fields = _common_breakdown(p)
    b = p.base.b
    A, B, G = fields["A_interp"], fields["B_interp"], fields["G"]
    t, t_prime = fields["t"], fields["t_prime"]
    gw = p.g * p.w
    D_factor = fields["empirical"]["decay_factor_max_1_D_pow_s"]
    if math.isfinite(G):
        value = (
            G
            * float(b) ** float(2 * A * t + 2 * B * t_prime)
            * (gw + 2) ** (p.s - 1)
            / float(b) ** (2 * p.alpha * gw)
            * D_factor
        )
    else:
        value = math.inf
    fields["main_part_bound"] = value
    return BoundBreakdown(**fields)


def discretization_bound(p) -> BoundBreakdown:
    """Explicit part of the truncation-tail bound at precision n = beta*g*w.

    Value: max(1, D^s) * (S1^s - S_{2,n}^s), the fully explicit factor of
    the tail; the remaining dual-sum factor n^(s*alpha)/b^(n*alpha/beta)
    carries inexplicit constants and is reported in `empirical` only.
    """
    n = p.beta * p.g * p.w
    fields = _common_breakdown(p)
    s1_hi = s1_bounds(p.alpha, p.base)[1]
    s2n = s2_partial(p.alpha, p.base, n)
    D_factor = fields["empirical"]["decay_factor_max_1_D_pow_s"]
    value = D_factor * float(s1_hi**p.s - s2n**p.s)
    fields["discretization_bound"] = value
    fields["empirical"]["dual_factor_shape"] = (
        "H * n^(s*alpha) / b^(n*alpha/beta) with inexplicit H"
    )
    fields["empirical"]["dual_factor_exponent"] = (
        n * p.alpha / p.beta
    )
    fields["notes"] = fields["notes"] + (
        "discretization bound covers the explicit S-series factor only",
    )
    return BoundBreakdown(**fields)
