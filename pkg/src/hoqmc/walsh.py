"""b-adic Walsh functions and Walsh coefficients of Bernoulli polynomials.

All coefficient integrals are computed from exact piecewise-polynomial
integration: a Walsh function with most significant digit position a is
constant on the b^a intervals [c*b^-a, (c+1)*b^-a), so the integral against a
polynomial splits into exact rational pieces weighted by roots of unity.  The
two-dimensional periodic-Bernoulli coefficients use the same idea on a grid
of constancy rectangles; the per-rectangle integrals depend only on the
(scaled) diagonal offset and are tabulated exactly, with the final bilinear
phase sum done in binary64.  Every coefficient carries an abs_error field
bounding the rounding of that final step.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InputError
from .ff import PrimeBase
from .digits import DigitVector, MultiIndex, digits_of

MAX_BERNOULLI_DEGREE = 16
_EPS = 2.0**-52


def omega(b: int) -> complex:
    return cmath.exp(2j * math.pi / b)


# ---------------------------------------------------------------------------
# Bernoulli polynomials (exact rational coefficients)

@lru_cache(maxsize=None)
def bernoulli_coeffs(r: int) -> tuple:
    """Coefficients of B_r in ascending powers, exact rationals.

    Built from B_r' = r * B_{r-1} with the zero-mean normalization
    int_0^1 B_r = 0 for r >= 1, starting from B_0 = 1.
    """
    if r < 0:
        raise InputError("degree must be nonnegative")
    if r > MAX_BERNOULLI_DEGREE:
        raise InputError(f"Bernoulli degree capped at {MAX_BERNOULLI_DEGREE}")
    if r == 0:
        return (Fraction(1),)
    prev = bernoulli_coeffs(r - 1)
    coeffs = [Fraction(0)] * (r + 1)
    for i in range(1, r + 1):
        coeffs[i] = Fraction(r) * prev[i - 1] / i
    coeffs[0] = -sum(c / (i + 1) for i, c in enumerate(coeffs) if i > 0)
    return tuple(coeffs)


def _poly_eval(coeffs, x):
    acc = coeffs[-1] * 0  # zero of the right type
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _poly_integrate(coeffs):
    return (Fraction(0),) + tuple(c / (i + 1) for i, c in enumerate(coeffs))


def bernoulli(r: int, x: float) -> float:
    """B_r(x) in binary64."""
    return float(_poly_eval([float(c) for c in bernoulli_coeffs(r)], float(x)))


def bernoulli_frac(r: int, x: Fraction) -> Fraction:
    """B_r(x) exactly, for rational x."""
    return _poly_eval(bernoulli_coeffs(r), Fraction(x))


# ---------------------------------------------------------------------------
# Walsh functions

def _as_int(k) -> int:
    if isinstance(k, DigitVector):
        return k.value
    return int(k)


def wal(k, x_digits, base: PrimeBase) -> complex:
    """The k-th Walsh function at x given by its fractional digits.

    x_digits is the finite sequence (xi_1, xi_2, ...) with
    x = sum_i xi_i * b^-i; net points always have this form.
    """
    b = base.b
    kd = digits_of(_as_int(k), b)
    e = sum(kd[i] * x_digits[i] for i in range(min(len(kd), len(x_digits)))) % b
    return omega(b) ** e


def wal_multi(k: MultiIndex, point) -> complex:
    """Product of coordinate Walsh functions at a net point."""
    if k.s != len(point.coordinates):
        raise InputError("multi-index and point dimensions differ")
    out = 1 + 0j
    for comp, coord in zip(k.components, point.coordinates):
        out *= wal(comp, coord, point.base)
    return out


# ---------------------------------------------------------------------------
# interval machinery

def _msd_position(k: int, b: int) -> int:
    """Position a of the most significant nonzero digit (0 for k = 0)."""
    a = 0
    pos = 1
    while k:
        if k % b:
            a = pos
        k //= b
        pos += 1
    return a


@lru_cache(maxsize=64)
def _interval_digit_matrix(b: int, a: int) -> np.ndarray:
    """Digits (xi_1..xi_a) of every interval index c < b^a, shape (b^a, a)."""
    c = np.arange(b**a, dtype=np.int64)
    return np.stack([(c // b ** (a - 1 - t)) % b for t in range(a)], axis=1)


def _phase_vector(k: int, b: int) -> np.ndarray:
    """wal_k on its b^a constancy intervals as a complex vector."""
    a = _msd_position(k, b)
    if a == 0:
        return np.ones(1, dtype=np.complex128)
    kd = np.array(digits_of(k, b), dtype=np.int64)
    e = _interval_digit_matrix(b, a).dot(kd) % b
    return omega(b) ** e


@dataclass(frozen=True)
class WalshCoefficient:
    """A computed Walsh coefficient with a certified rounding bound."""

    value: complex
    abs_error: float

    def to_json(self) -> dict:
        return {
            "re": self.value.real,
            "im": self.value.imag,
            "abs_error": self.abs_error,
        }


@lru_cache(maxsize=None)
def _increment_table(r: int, b: int, a: int) -> tuple:
    """Exact integrals of B_r/r! over the b^a constancy intervals."""
    g1 = _poly_integrate(
        tuple(c / math.factorial(r) for c in bernoulli_coeffs(r))
    )
    B = b**a
    vals = [_poly_eval(g1, Fraction(c, B)) for c in range(B + 1)]
    return tuple(vals[c + 1] - vals[c] for c in range(B))


@lru_cache(maxsize=None)
def _walsh_coeff_bernoulli_cached(r: int, k: int, b: int) -> WalshCoefficient:
    if k == 0:
        return WalshCoefficient(1.0 + 0j if r == 0 else 0j, 0.0)
    a = _msd_position(k, b)
    incs = _increment_table(r, b, a)
    kd = digits_of(k, b)
    dm = _interval_digit_matrix(b, a)
    # exact rational sum per conjugate-phase class
    class_sums = [Fraction(0)] * b
    kvec = np.array(kd, dtype=np.int64)
    exps = dm.dot(kvec) % b
    for c, e in enumerate(exps):
        class_sums[int(e)] += incs[c]
    w = omega(b)
    value = sum(float(s) * w ** (-e) for e, s in enumerate(class_sums))
    err = (b + 2) * _EPS * sum(abs(float(s)) for s in class_sums)
    return WalshCoefficient(value, err)


def walsh_coeff_bernoulli(r: int, k, base: PrimeBase) -> WalshCoefficient:
    """Walsh coefficient of B_r/r! at index k, via exact piecewise integration."""
    if r < 0:
        raise InputError("degree must be nonnegative")
    return _walsh_coeff_bernoulli_cached(r, _as_int(k), base.b)


# ---------------------------------------------------------------------------
# periodic Bernoulli coefficients

@lru_cache(maxsize=None)
def _second_antiderivative(r: int):
    """Pieces of a C^1 second antiderivative G of the periodic B_r/r!.

    G''(z) = B_r(z)/r! on [0, 1] and B_r(z+1)/r! on [-1, 0); the linear
    matching terms make G and G' continuous at 0 (B_r itself is continuous
    across the period boundary for r >= 2).
    """
    scaled = tuple(c / math.factorial(r) for c in bernoulli_coeffs(r))
    g1 = _poly_integrate(scaled)
    g2 = _poly_integrate(g1)
    slope = -_poly_eval(g1, Fraction(1))
    const = -_poly_eval(g2, Fraction(1))
    return g2, slope, const


def _G(r: int, z: Fraction) -> Fraction:
    g2, slope, const = _second_antiderivative(r)
    if z >= 0:
        return _poly_eval(g2, z)
    return _poly_eval(g2, z + 1) + slope * z + const


@lru_cache(maxsize=None)
def _offset_integral_table(r: int, b: int, a1: int, d1: int):
    """Rectangle integrals of the periodic B_r/r! indexed by diagonal offset.

    For grids of b^a1 x b^d1 constancy rectangles with a1 >= d1, the integral
    over rectangle (c, d) depends only on q = c - d * b^(a1-d1).  Returns
    (float array I with I[q + B1 - R] = integral(q), offset B1 - R) where
    B1 = b^a1 and R = b^(a1-d1); also the maximum |I| for error budgets.
    """
    B1 = b**a1
    R = b ** (a1 - d1)
    h = Fraction(1, B1)
    lo, hi = R - B1, B1 - 1
    # G at every needed multiple of h
    needed = range(lo - R, hi + 2)
    gvals = {j: _G(r, j * h) for j in needed}
    vals = []
    for q in range(lo, hi + 1):
        val = gvals[q + 1] - gvals[q] - gvals[q + 1 - R] + gvals[q - R]
        vals.append(float(val))
    arr = np.array(vals)
    return arr, -lo, float(np.max(np.abs(arr))) if len(vals) else 0.0


def _periodic_bilinear(r, k, l, b):
    """Phase-weighted double sum over the constancy grid (a1 >= d1 side)."""
    a1 = _msd_position(k, b)
    d1 = _msd_position(l, b)
    table, offset, max_i = _offset_integral_table(r, b, a1, d1)
    R = b ** (a1 - d1)
    pk = _phase_vector(k, b).conj()
    pl = _phase_vector(l, b)
    c = np.arange(b**a1, dtype=np.int64)
    d = np.arange(b**d1, dtype=np.int64)
    T = table[(c[:, None] - R * d[None, :]) + offset]
    value = complex(pk.dot(T).dot(pl))
    err = 8.0 * _EPS * max_i * len(c) * len(d) + _EPS
    return WalshCoefficient(value, err)


@lru_cache(maxsize=None)
def _walsh_coeff_periodic_cached(r: int, k: int, l: int, b: int) -> WalshCoefficient:
    if k == 0 and l == 0:
        return WalshCoefficient(0j, 0.0)
    a1 = _msd_position(k, b)
    d1 = _msd_position(l, b)
    if a1 >= d1:
        return _periodic_bilinear(r, k, l, b)
    # B_r(-z) = (-1)^r B_r(z) on the period, so swapping arguments
    # conjugates and picks up the parity sign.
    swapped = _periodic_bilinear(r, l, k, b)
    return WalshCoefficient(
        (-1) ** r * swapped.value.conjugate(), swapped.abs_error
    )


def walsh_coeff_bernoulli_periodic(r: int, k, l, base: PrimeBase) -> WalshCoefficient:
    """Walsh coefficient of the periodically extended B_r/r! at (k, l)."""
    if r < 2:
        raise InputError("periodic coefficients require degree r >= 2")
    return _walsh_coeff_periodic_cached(r, _as_int(k), _as_int(l), base.b)


def walsh_coeff_periodic_recursion(
    r: int, k, l, base: PrimeBase, c_max: int = 40
) -> WalshCoefficient:
    """Cross-check path: degree-reduction recursion with a truncated tail.

    Only valid for r > 2 and k, l >= 1.  The infinite sum over digit
    prolongations of k is truncated at c_max with a geometric tail bound
    folded into abs_error.  The primary exact path is
    walsh_coeff_bernoulli_periodic.
    """
    k, l = _as_int(k), _as_int(l)
    if r <= 2 or k < 1 or l < 1:
        raise InputError("recursion cross-check requires r > 2 and k, l >= 1")
    b = base.b
    a1 = _msd_position(k, b)
    kappa1 = (k // b ** (a1 - 1)) % b
    k_prime = k - kappa1 * b ** (a1 - 1)
    w = omega(b)

    term1 = walsh_coeff_bernoulli_periodic(r - 1, k_prime, l, base)
    term2 = walsh_coeff_bernoulli_periodic(r - 1, k, l, base)
    c1 = 1.0 / (1.0 - w**-kappa1)
    c2 = 0.5 + 1.0 / (w**-kappa1 - 1.0)
    total = c1 * term1.value + c2 * term2.value
    err = abs(c1) * term1.abs_error + abs(c2) * term2.abs_error
    tail_scale = 0.0
    for c in range(1, c_max + 1):
        for theta in range(1, b):
            coeff = 1.0 / (b**c * (w**theta - 1.0))
            sub = walsh_coeff_bernoulli_periodic(
                r - 1, theta * b ** (c + a1 - 1) + k, l, base
            )
            total += coeff * sub.value
            err += abs(coeff) * sub.abs_error
            tail_scale = max(tail_scale, abs(sub.value) + sub.abs_error)
    # geometric tail of the truncated c-sum
    err += float(b) ** -c_max * (b - 1) * max(tail_scale, 1.0)
    value = -total / b**a1
    return WalshCoefficient(value, err / b**a1)


# ---------------------------------------------------------------------------
# kernel Walsh coefficients

def kernel_walsh_coeff_1d(alpha: int, k, l, base: PrimeBase) -> WalshCoefficient:
    """One-dimensional kernel Walsh coefficient.

    Combines the Bernoulli coefficients of degrees 0..alpha with the
    degree-2*alpha periodic coefficient carrying the sign (-1)^(alpha+1).
    """
    if alpha < 2:
        raise InputError("alpha must be >= 2")
    k, l = _as_int(k), _as_int(l)
    value = 0j
    err = 0.0
    for tau in range(alpha + 1):
        bk = walsh_coeff_bernoulli(tau, k, base)
        bl = walsh_coeff_bernoulli(tau, l, base)
        value += bk.value * bl.value.conjugate()
        err += (
            bk.abs_error * abs(bl.value)
            + bl.abs_error * abs(bk.value)
            + bk.abs_error * bl.abs_error
        )
    per = walsh_coeff_bernoulli_periodic(2 * alpha, k, l, base)
    value += (-1) ** (alpha + 1) * per.value
    err += per.abs_error
    return WalshCoefficient(value, err + 4 * _EPS * abs(value))


def kernel_walsh_coeff_sd(alpha: int, k, l, base: PrimeBase) -> WalshCoefficient:
    """Product of per-coordinate kernel coefficients for multi-indices."""
    kv = k.values() if isinstance(k, MultiIndex) else tuple(int(x) for x in k)
    lv = l.values() if isinstance(l, MultiIndex) else tuple(int(x) for x in l)
    if len(kv) != len(lv):
        raise InputError("multi-index dimensions differ")
    value = 1 + 0j
    err_bound = 0.0
    parts = [kernel_walsh_coeff_1d(alpha, kj, lj, base) for kj, lj in zip(kv, lv)]
    # worst-case propagation: |prod(v+e) - prod(v)| <= prod(|v|+e) - prod|v|
    prod_hi = 1.0
    prod_abs = 1.0
    for part in parts:
        value *= part.value
        prod_hi *= abs(part.value) + part.abs_error
        prod_abs *= abs(part.value)
    err_bound = prod_hi - prod_abs + 4 * len(parts) * _EPS * prod_hi
    return WalshCoefficient(value, err_bound)


# ---------------------------------------------------------------------------
# batch evaluation (sparsity / decay studies)

def kernel_coeff_table(alpha: int, base: PrimeBase, kmax: int) -> np.ndarray:
    """Dense table of K-hat_alpha(k, l) for all 0 <= k, l < kmax."""
    b = base.b
    out = np.zeros((kmax, kmax), dtype=np.complex128)
    # Bernoulli product part via outer products
    bhat = np.array(
        [
            [walsh_coeff_bernoulli(tau, k, base).value for k in range(kmax)]
            for tau in range(alpha + 1)
        ]
    )
    for tau in range(alpha + 1):
        out += np.outer(bhat[tau], bhat[tau].conj())
    # periodic part, batched by (a1, d1)
    r = 2 * alpha
    sign = (-1) ** (alpha + 1)
    groups = {}
    for k in range(kmax):
        groups.setdefault(_msd_position(k, b), []).append(k)
    for a1, ks in groups.items():
        pk = np.stack([_phase_vector(k, b).conj() for k in ks])
        c = np.arange(b**a1, dtype=np.int64)
        for d1, ls in groups.items():
            if a1 == 0 and d1 == 0:
                continue  # periodic coefficient at (0, 0) vanishes
            if d1 > a1:
                continue  # filled by conjugate symmetry below
            table, offset, _ = _offset_integral_table(r, b, a1, d1)
            R = b ** (a1 - d1)
            d = np.arange(b**d1, dtype=np.int64)
            T = table[(c[:, None] - R * d[None, :]) + offset]
            pl = np.stack([_phase_vector(l, b) for l in ls])
            block = pk.dot(T).dot(pl.T)
            for i, k in enumerate(ks):
                for j, l in enumerate(ls):
                    out[k, l] += sign * block[i, j]
                    if a1 != d1:
                        # even degree: swapping arguments conjugates
                        out[l, k] += sign * block[i, j].conjugate()
    return out


def _toeplitz_quadratic(table: np.ndarray, offset: int, p: np.ndarray) -> complex:
    """p^H T p for the Toeplitz matrix T[c, d] = table[c - d + offset].

    Uses circulant embedding and FFT so large constancy grids stay
    O(B log B) instead of materializing the B x B table.
    """
    B = len(p)
    col = table[np.arange(B) + offset]  # lags 0 .. B-1
    row_neg = table[np.arange(-(B - 1), 0) + offset]  # lags -(B-1) .. -1
    circ = np.concatenate([col, [0.0], row_neg])
    y = np.fft.ifft(np.fft.fft(circ) * np.fft.fft(p, 2 * B))[:B]
    return complex(np.vdot(p, y))


_DENSE_GRID_LIMIT = 2048


def kernel_diag_values(alpha: int, base: PrimeBase, kmax: int) -> np.ndarray:
    """|K-hat_alpha(k, k)| for k = 0 .. kmax-1, batched by digit length."""
    b = base.b
    out = np.zeros(kmax)
    r = 2 * alpha
    sign = (-1) ** (alpha + 1)
    groups = {}
    for k in range(kmax):
        groups.setdefault(_msd_position(k, b), []).append(k)
    for a1, ks in groups.items():
        diag_part = np.zeros(len(ks), dtype=np.complex128)
        for tau in range(alpha + 1):
            vals = np.array(
                [walsh_coeff_bernoulli(tau, k, base).value for k in ks]
            )
            diag_part += vals * vals.conj()
        if a1 > 0:
            table, offset, _ = _offset_integral_table(r, b, a1, a1)
            B = b**a1
            if B <= _DENSE_GRID_LIMIT:
                c = np.arange(B, dtype=np.int64)
                T = table[(c[:, None] - c[None, :]) + offset]
                P = np.stack([_phase_vector(k, b) for k in ks])
                diag_part += sign * ((P.conj().dot(T)) * P).sum(axis=1)
            else:
                for i, k in enumerate(ks):
                    diag_part[i] += sign * _toeplitz_quadratic(
                        table, offset, _phase_vector(k, b)
                    )
        for i, k in enumerate(ks):
            out[k] = abs(diag_part[i])
    return out


@lru_cache(maxsize=None)
def empirical_decay_constant(alpha: int, b: int, kmax: int = 256) -> float:
    """Empirical bound D with |K-hat(k, k)| <= D * b^(-2 mu_alpha(k)).

    The constant is cited from external work without an explicit value;
    this reports the observed maximum over k < kmax.
    """
    from .digits import mu_alpha_int

    base = PrimeBase(b)
    vals = kernel_diag_values(alpha, base, kmax)
    best = 0.0
    for k in range(1, kmax):
        best = max(best, vals[k] * float(b) ** (2 * mu_alpha_int(k, b, alpha)))
    return best
