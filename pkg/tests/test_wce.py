import math
import random
from fractions import Fraction

import numpy as np
import pytest

from hoqmc.errors import GuardError, InputError
from hoqmc.ff import PrimeBase
from hoqmc.digits import mu_alpha_int
from hoqmc.nets import ConstructionParams, NetPoint, chen_skriganov, interlace_net
from hoqmc.dual import dual_space
from hoqmc.wce import (
    EXACT_KERNEL_SUM,
    TRUNCATED_DUAL_SUM,
    b_alpha_b,
    discretization_bound,
    kernel_1d,
    kernel_1d_frac,
    kernel_sd,
    main_part_bound,
    s1_bounds,
    s1_tail_bound,
    s2_partial,
    squared_error_1d_exact,
    tail_bound_holds,
    wce_dual_truncated,
    wce_exact,
)

B2 = PrimeBase(2)


# ---------------------------------------------------------------------------
# kernel

def test_kernel_value_at_origin():
    expect = 1 + 0.25 + 1 / 144 + 1 / 720
    assert kernel_1d(2, 0.0, 0.0) == pytest.approx(expect, abs=1e-14)
    assert kernel_1d_frac(2, Fraction(0), Fraction(0)) == Fraction(
        1 + Fraction(1, 4) + Fraction(1, 144) + Fraction(1, 720)
    )


def test_kernel_symmetry_and_frac_agreement():
    rng = random.Random(5)
    for _ in range(40):
        x = Fraction(rng.randrange(0, 64), 64)
        y = Fraction(rng.randrange(0, 64), 64)
        for alpha in (2, 3):
            exact = kernel_1d_frac(alpha, x, y)
            assert exact == kernel_1d_frac(alpha, y, x)
            assert kernel_1d(alpha, float(x), float(y)) == pytest.approx(
                float(exact), abs=1e-12
            )


def test_kernel_sd_product():
    x, y = (0.0, 0.5), (0.25, 0.5)
    assert kernel_sd(2, x, y) == pytest.approx(
        kernel_1d(2, 0.0, 0.25) * kernel_1d(2, 0.5, 0.5), abs=1e-14
    )
    assert kernel_sd(2, (0.0,), (0.0,)) == pytest.approx(kernel_1d(2, 0.0, 0.0))
    with pytest.raises(InputError):
        kernel_sd(2, (0.1,), (0.1, 0.2))
    with pytest.raises(InputError):
        kernel_1d(1, 0.0, 0.0)


def test_kernel_gram_positive_semidefinite():
    rng = np.random.default_rng(42)
    pts = rng.random((12, 2))
    G = np.array(
        [[kernel_sd(2, tuple(x), tuple(y)) for y in pts] for x in pts]
    )
    eigs = np.linalg.eigvalsh(G)
    assert eigs.min() >= -1e-8 * len(pts)


# ---------------------------------------------------------------------------
# exact worst-case error

def _origin(s):
    return NetPoint(B2, tuple((0,) for _ in range(s)))


def test_single_point_oracle():
    report = wce_exact([_origin(1)], 2, rational=True)
    expect = math.sqrt(0.25 + 1 / 144 + 1 / 720)
    assert report.e == pytest.approx(expect, abs=1e-12)
    assert report.method == EXACT_KERNEL_SUM
    # float path agrees
    assert wce_exact([_origin(1)], 2).e == pytest.approx(expect, abs=1e-10)


def test_exact_1d_power_sum_matches_brute_force():
    rng = random.Random(9)
    for _ in range(10):
        denom = 2 ** rng.randrange(3, 7)
        nums = [rng.randrange(0, denom) for _ in range(rng.randrange(1, 12))]
        fast = squared_error_1d_exact(nums, denom, 2)
        brute = Fraction(0)
        for a in nums:
            for b in nums:
                brute += kernel_1d_frac(2, Fraction(a, denom), Fraction(b, denom))
        brute = brute / len(nums) ** 2 - 1
        assert fast == brute


def test_wce_reorder_and_duplication_invariance():
    pts = [
        NetPoint(B2, ((0, 1),)),
        NetPoint(B2, ((1, 0),)),
        NetPoint(B2, ((1, 1),)),
    ]
    e1 = wce_exact(pts, 2, rational=True).e
    e2 = wce_exact(list(reversed(pts)), 2, rational=True).e
    assert e1 == e2
    doubled = wce_exact(pts + pts, 2, rational=True).e
    assert doubled == pytest.approx(e1, abs=1e-15)


def test_wce_float_vs_rational_on_net():
    net = chen_skriganov(PrimeBase(3), 2, 1, 2, strict=False)
    pts = list(net.points())
    fl = wce_exact(pts, 2)
    ra = wce_exact(pts, 2, rational=True)
    assert fl.e_squared == pytest.approx(ra.e_squared, abs=1e-12)


def test_wce_guards():
    pts = [_origin(1)] * 10
    with pytest.raises(GuardError):
        wce_exact(pts, 2, max_points=5)
    pts2 = [_origin(2)] * 6
    import hoqmc.wce as wce_mod

    with pytest.raises(GuardError):
        # s >= 2 rational brute force has its own cap
        old = wce_mod.DEFAULT_RATIONAL_LIMIT
        wce_mod.DEFAULT_RATIONAL_LIMIT = 4
        try:
            wce_exact(pts2, 2, rational=True)
        finally:
            wce_mod.DEFAULT_RATIONAL_LIMIT = old
    with pytest.raises(InputError):
        wce_exact([], 2)


# ---------------------------------------------------------------------------
# dual-sum worst-case error

def test_dual_truncated_trivial_dual():
    net = chen_skriganov(PrimeBase(5), 1, 2, 2, strict=False)  # dual = {0}
    report = wce_dual_truncated(net, 2)
    assert report.e_squared == 0
    assert report.method == TRUNCATED_DUAL_SUM
    assert report.truncation_radius == net.n


def test_dual_truncated_matches_exact_within_budget():
    cases = []
    q = chen_skriganov(B2, 2, 1, 2, strict=False)
    cases.append(interlace_net(q, 2))
    cases.append(chen_skriganov(PrimeBase(3), 2, 1, 2, strict=False))
    cases.append(chen_skriganov(PrimeBase(5), 2, 2, 1, strict=False))
    for net in cases:
        exact = wce_exact(list(net.points()), 2, rational=True)
        dual = wce_dual_truncated(net, 2)
        gap = abs(exact.e_squared - dual.e_squared)
        assert gap <= exact.error_budget + dual.error_budget


def test_dual_truncated_radius_monotone_coverage():
    q = chen_skriganov(B2, 2, 1, 3, strict=False)
    net = interlace_net(q, 2)
    exact = wce_exact(list(net.points()), 2, rational=True).e_squared
    gaps = []
    for radius in range(2, net.n + 1):
        est = wce_dual_truncated(net, 2, radius=radius).e_squared
        gaps.append(abs(est - exact))
    assert gaps[-1] <= gaps[0] + 1e-12


def test_dual_truncated_guard():
    q = chen_skriganov(B2, 2, 1, 4, strict=False)
    net = interlace_net(q, 2)
    with pytest.raises(GuardError):
        wce_dual_truncated(net, 2, max_grid=16)


# ---------------------------------------------------------------------------
# S-series and tail bounds

def test_s2_partial_matches_brute_force():
    for (b, alpha, n) in [(2, 2, 10), (2, 3, 10), (3, 3, 6)]:
        base = PrimeBase(b)
        brute = sum(
            Fraction(1, b ** mu_alpha_int(k, b, alpha)) for k in range(b**n)
        )
        assert s2_partial(alpha, base, n) == brute


def test_s1_enclosure_is_consistent():
    for (b, alpha) in [(2, 2), (2, 3), (3, 3), (5, 2)]:
        base = PrimeBase(b)
        lo, hi = s1_bounds(alpha, base)
        assert lo <= hi
        assert hi - lo < Fraction(1, 10**20)
        # partial sums increase toward the enclosure
        assert s2_partial(alpha, base, 10) <= lo
    with pytest.raises(InputError):
        s1_bounds(1, PrimeBase(2))


def test_tail_bounds_hold():
    for (b, alpha) in [(2, 2), (2, 3), (3, 3)]:
        base = PrimeBase(b)
        for n in range(4, 21):
            assert tail_bound_holds(alpha, base, n)


def test_b_alpha_b_closed_form():
    assert b_alpha_b(3, PrimeBase(2)) == Fraction(5, 2)
    with pytest.raises(InputError):
        b_alpha_b(2, PrimeBase(2))
    assert s1_tail_bound(2, PrimeBase(2), 8) == Fraction(16, 256)


# ---------------------------------------------------------------------------
# bound chains

def test_interp_coefficients_and_geometric_factor():
    p = ConstructionParams(
        s=2, alpha=2, beta=4, g=8, w=1, base=PrimeBase(67)
    )
    bb = main_part_bound(p)
    assert bb.A_interp == Fraction(1, 3)
    assert bb.B_interp == Fraction(2, 3)
    assert bb.B_interp > Fraction(1, 2)  # guaranteed when beta >= 2*alpha
    assert bb.within_hypotheses
    assert math.isfinite(bb.G) and bb.G > 0
    assert bb.t == 4 * 3 and bb.t_prime == 3
    assert bb.main_part_bound > 0


def test_main_part_bound_dominates_measured_dual_sum():
    for (b, g) in [(5, 1), (13, 1)]:
        p = ConstructionParams(
            s=1, alpha=2, beta=4, g=g, w=1, base=PrimeBase(b), strict=False
        )
        from hoqmc.nets import construct_optimal_net

        net = construct_optimal_net(p)
        measured = sum(
            float(b) ** (-2 * sum(mu_alpha_int(kj, b, 2) for kj in k))
            for k in dual_space(net).elements()
            if any(k)
        )
        bb = main_part_bound(p)
        assert not bb.within_hypotheses  # relaxed parameters are flagged
        assert "outside guaranteed-rate hypotheses" in bb.notes
        assert bb.main_part_bound >= measured


def test_discretization_bound_fields():
    p = ConstructionParams(
        s=1, alpha=3, beta=6, g=6, w=1, base=PrimeBase(37)
    )
    bb = discretization_bound(p)
    assert bb.discretization_bound >= 0
    assert bb.S1 > 1 and bb.S1_tail >= 0
    assert bb.B_alpha_b == pytest.approx(float(b_alpha_b(3, PrimeBase(37))))
    assert "empirical" not in bb.notes  # empirical parts live in the dict
    assert "decay_constant_D" in bb.empirical
    data = bb.to_json()
    assert data["A_interp"] == [2, 5]
    assert data["within_hypotheses"] is True
