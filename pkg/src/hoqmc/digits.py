"""Exact b-adic digit arithmetic.

Digit vectors store the expansion k = sum_i digits[i] * b^i least-significant
first, with no trailing zeros (the empty tuple is k = 0).  Digit positions in
the metric functions are 1-based: the digit of b^(a-1) has position a, so the
formulas for the Hamming weight, the NRT metric and the higher-order metric
read off positions directly.

The interlacing map merges beta digit streams into one by writing digit a of
stream j to position a*beta + j of the output (0-based), and is a bijection
{0,...,b^m-1}^beta -> {0,...,b^(beta*m)-1} for every m.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .ff import PrimeBase


def digits_of(k: int, b: int) -> tuple:
    """b-adic digits of k >= 0, least-significant first, canonical."""
    if k < 0:
        raise InputError("digit expansion defined for nonnegative integers only")
    out = []
    while k:
        k, d = divmod(k, b)
        out.append(d)
    return tuple(out)


def int_of_digits(digits, b: int) -> int:
    k = 0
    for d in reversed(digits):
        k = k * b + d
    return k


def hamming_weight_int(k: int, b: int) -> int:
    """Number of nonzero b-adic digits of k."""
    v = 0
    while k:
        if k % b:
            v += 1
        k //= b
    return v


def mu_alpha_int(k: int, b: int, alpha: int) -> int:
    """Sum of the alpha largest nonzero-digit positions of k (1-based)."""
    if alpha < 1:
        raise InputError("alpha must be >= 1")
    positions = []
    pos = 1
    while k:
        if k % b:
            positions.append(pos)
        k //= b
        pos += 1
    return sum(positions[-alpha:])


def digit_sub_int(k: int, l: int, b: int) -> int:
    """Digitwise k - l mod b, no borrows."""
    out = 0
    power = 1
    while k or l:
        out += ((k - l) % b) * power
        k //= b
        l //= b
        power *= b
    return out


def digit_add_int(k: int, l: int, b: int) -> int:
    """Digitwise k + l mod b, no carries."""
    out = 0
    power = 1
    while k or l:
        out += ((k + l) % b) * power
        k //= b
        l //= b
        power *= b
    return out


@dataclass(frozen=True)
class DigitVector:
    """Canonical b-adic expansion of a nonnegative integer."""

    base: PrimeBase
    digits: tuple

    def __post_init__(self):
        b = self.base.b
        if self.digits and self.digits[-1] == 0:
            raise InputError("digit vector not canonical (trailing zero)")
        for d in self.digits:
            if not 0 <= d < b:
                raise InputError(f"digit {d} outside [0, {b})")

    @classmethod
    def from_int(cls, k: int, base: PrimeBase) -> "DigitVector":
        return cls(base, digits_of(k, base.b))

    @property
    def value(self) -> int:
        return int_of_digits(self.digits, self.base.b)

    def nonzero_positions(self) -> tuple:
        """1-based positions a_1 > ... > a_v of the nonzero digits."""
        return tuple(
            i + 1 for i in range(len(self.digits) - 1, -1, -1) if self.digits[i]
        )

    def __str__(self):
        return f"{self.value} (base {self.base.b})"


def _require_same_base(k: DigitVector, l: DigitVector):
    if k.base != l.base:
        raise InputError(f"base mismatch: {k.base.b} vs {l.base.b}")


def digit_add(k: DigitVector, l: DigitVector) -> DigitVector:
    """Digitwise sum mod b (the group operation on N_0)."""
    _require_same_base(k, l)
    return DigitVector.from_int(digit_add_int(k.value, l.value, k.base.b), k.base)


def digit_sub(k: DigitVector, l: DigitVector) -> DigitVector:
    """Digitwise difference mod b (inverse of digit_add)."""
    _require_same_base(k, l)
    return DigitVector.from_int(digit_sub_int(k.value, l.value, k.base.b), k.base)


def hamming_weight(k: DigitVector) -> int:
    return sum(1 for d in k.digits if d)


def mu_alpha(k: DigitVector, alpha: int) -> int:
    return mu_alpha_int(k.value, k.base.b, alpha)


HAMMING = "hamming"


def dick(alpha: int):
    """Metric selector for the order-alpha metric (alpha=1 is NRT)."""
    if alpha < 1:
        raise InputError("alpha must be >= 1")
    return ("dick", alpha)


def metric_of_int(k: int, b: int, metric) -> int:
    if metric == HAMMING:
        return hamming_weight_int(k, b)
    if isinstance(metric, tuple) and metric[0] == "dick":
        return mu_alpha_int(k, b, metric[1])
    raise InputError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class MultiIndex:
    """A vector of s digit vectors sharing one base."""

    components: tuple

    def __post_init__(self):
        if not self.components:
            raise InputError("multi-index needs at least one component")
        base = self.components[0].base
        if any(c.base != base for c in self.components):
            raise InputError("multi-index components must share one base")

    @classmethod
    def from_ints(cls, values, base: PrimeBase) -> "MultiIndex":
        return cls(tuple(DigitVector.from_int(v, base) for v in values))

    @property
    def base(self) -> PrimeBase:
        return self.components[0].base

    @property
    def s(self) -> int:
        return len(self.components)

    def values(self) -> tuple:
        return tuple(c.value for c in self.components)

    def to_json(self):
        return list(self.values())


def metric_of_multiindex(k: MultiIndex, metric) -> int:
    """Componentwise sum of the chosen metric."""
    b = k.base.b
    return sum(metric_of_int(c.value, b, metric) for c in k.components)


def interlace_int(ks, b: int) -> int:
    """Digit-interleave the integers ks (beta = len(ks)) in base b."""
    beta = len(ks)
    ks = list(ks)
    out = 0
    power = 1
    while any(ks):
        for j in range(beta):
            out += (ks[j] % b) * power
            ks[j] //= b
            power *= b
    return out


def deinterlace_int(k: int, beta: int, b: int) -> tuple:
    """Inverse of interlace_int."""
    ks = [0] * beta
    powers = [1] * beta
    j = 0
    while k:
        k, d = divmod(k, b)
        ks[j] += d * powers[j]
        powers[j] *= b
        j = (j + 1) % beta
    return tuple(ks)


def interlace(ks) -> DigitVector:
    """Digit interlacing of beta = len(ks) digit vectors into one."""
    if not ks:
        raise InputError("interlace needs at least one input")
    base = ks[0].base
    if any(k.base != base for k in ks):
        raise InputError("interlace inputs must share one base")
    return DigitVector.from_int(
        interlace_int([k.value for k in ks], base.b), base
    )


def deinterlace(k: DigitVector, beta: int) -> tuple:
    """Split a digit vector back into beta interleaved streams."""
    if beta < 1:
        raise InputError("beta must be >= 1")
    return tuple(
        DigitVector.from_int(v, k.base)
        for v in deinterlace_int(k.value, beta, k.base.b)
    )


def interlace_multiindex(k: MultiIndex, beta: int) -> MultiIndex:
    """Apply interlacing to every non-overlapping block of beta components."""
    if k.s % beta:
        raise InputError(
            f"component count {k.s} not divisible by interlacing factor {beta}"
        )
    blocks = [
        interlace(k.components[i : i + beta]) for i in range(0, k.s, beta)
    ]
    return MultiIndex(tuple(blocks))
