"""End-to-end acceptance checks for the whole package.

Each test is one acceptance criterion; run with -v to get a per-criterion
pass/fail line.  Full-scale parameter sets are astronomically large, so the
checks are property-based on enumerable instances plus a relaxed-parameter
convergence study.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from hoqmc.cli import SweepConfig, run_sweep
from hoqmc.digits import (
    MultiIndex,
    digit_sub_int,
    dick,
    hamming_weight_int,
    interlace_multiindex,
    metric_of_multiindex,
    mu_alpha_int,
    HAMMING,
)
from hoqmc.dual import (
    counting_bound_holds,
    dual_enumerate,
    min_metric,
    predicted_t_interlaced,
    propagate_t,
    verify_order_t,
)
from hoqmc.errors import InputError
from hoqmc.ff import PrimeBase
from hoqmc.nets import chen_skriganov, interlace_net
from hoqmc.walsh import kernel_coeff_table, kernel_diag_values
from hoqmc.wce import (
    tail_bound_holds,
    wce_dual_truncated,
    wce_exact,
)

B2 = PrimeBase(2)

CRITERION_1_INSTANCES = [(5, 2, 1, 1), (5, 2, 2, 1), (5, 1, 2, 2), (7, 3, 2, 1)]


def _criterion_1_nets():
    return [
        (b, s, g, w, chen_skriganov(PrimeBase(b), s, g, w, strict=False))
        for (b, s, g, w) in CRITERION_1_INSTANCES
    ]


def _criterion_2_instance():
    """Interlaced net small enough for exhaustive dual enumeration."""
    b, s, beta, g, w = 5, 1, 2, 2, 1
    q = chen_skriganov(PrimeBase(b), beta * s, g, w, strict=False)
    return q, interlace_net(q, beta), (b, s, beta, g, w)


def test_criterion_01_binomial_net_metric_bounds():
    # exhaustive dual enumeration; a trivial dual has infinite minima,
    # which satisfies any finite lower bound
    for (b, s, g, w, net) in _criterion_1_nets():
        assert min_metric(net, HAMMING) >= g + 1, (b, s, g, w)
        assert min_metric(net, dick(1)) >= g * w + 1, (b, s, g, w)


def test_criterion_02_interlaced_net_metric_bounds():
    _, net, (b, s, beta, g, w) = _criterion_2_instance()
    mu_beta_bound = max(0, beta * (g * w - (s * (beta - 1)) // 2)) + 1
    assert min_metric(net, HAMMING) >= g + 1
    assert min_metric(net, dick(beta)) >= mu_beta_bound


def test_criterion_03_interlaced_dual_structure():
    # the dual of the interlaced net is exactly the digit interlacing of
    # the base net's dual, and interlacing preserves the Hamming weight
    q, net, (b, s, beta, g, w) = _criterion_2_instance()
    base = net.base
    mapped = set()
    for k in dual_enumerate(q):
        mk = interlace_multiindex(MultiIndex.from_ints(k, base), beta)
        assert metric_of_multiindex(mk, HAMMING) == sum(
            hamming_weight_int(kj, b) for kj in k
        )
        mapped.add(tuple(c.value for c in mk.components))
    assert mapped == set(dual_enumerate(net))


def test_criterion_04_order_verification_consistency():
    _, net, (b, s, beta, g, w) = _criterion_2_instance()
    t = predicted_t_interlaced(0, beta, s, net.m)
    assert verify_order_t(net, beta, t)
    t_prime = propagate_t(t, beta, 1)
    assert verify_order_t(net, 1, t_prime)


def test_criterion_05_kernel_coefficient_sparsity():
    alpha = 2
    size = 2**7
    T = kernel_coeff_table(alpha, B2, size)
    worst = 0.0
    for k in range(size):
        for l in range(size):
            if hamming_weight_int(digit_sub_int(k, l, 2), 2) > 2 * alpha:
                worst = max(worst, abs(T[k, l]))
    assert worst < 1e-10
    # two-dimensional product kernel: vanishes whenever the total digit
    # distance exceeds 2*alpha*s, which forces one factor past 2*alpha
    size2 = 2**4
    T2 = kernel_coeff_table(alpha, B2, size2)
    worst2 = 0.0
    for k1 in range(size2):
        for l1 in range(size2):
            kappa1 = hamming_weight_int(digit_sub_int(k1, l1, 2), 2)
            for k2 in range(size2):
                for l2 in range(size2):
                    kappa2 = hamming_weight_int(digit_sub_int(k2, l2, 2), 2)
                    if max(kappa1, kappa2) > 2 * alpha:
                        worst2 = max(worst2, abs(T2[k1, l1] * T2[k2, l2]))
    assert worst2 < 1e-10


def test_criterion_06_diagonal_decay_is_bounded():
    kmax = 2**10
    vals = kernel_diag_values(2, B2, kmax)
    ratios = np.array(
        [vals[k] * 2.0 ** (2 * mu_alpha_int(k, 2, 2)) for k in range(1, kmax)]
    )
    overall = float(ratios.max())
    assert math.isfinite(overall)
    # dyadic blocks a1 = 5..10 (k with most significant digit at a1)
    block_max = {
        a1: float(
            max(
                vals[k] * 2.0 ** (2 * mu_alpha_int(k, 2, 2))
                for k in range(2 ** (a1 - 1), 2**a1)
            )
        )
        for a1 in range(5, 11)
    }
    # no growth trend: every block stays at the plateau of the early blocks
    plateau = max(block_max[5], block_max[6])
    for a1 in range(7, 11):
        assert block_max[a1] <= plateau * 1.05, (a1, block_max)
    print(f"criterion 6: max ratio {overall:.6f}, blocks {block_max}")


def _criterion_7_nets():
    nets = []
    for b in (2, 3, 5):
        base = PrimeBase(b)
        for s in (1, 2):
            for g in (1, 2):
                for w in (1, 2):
                    if b ** (g * w) > 256:
                        continue
                    try:
                        nets.append(chen_skriganov(base, s, g, w, strict=False))
                    except InputError:
                        continue  # not enough distinct betas in this field
                    if s == 1:
                        try:
                            q = chen_skriganov(base, 2, g, w, strict=False)
                        except InputError:
                            continue
                        nets.append(interlace_net(q, 2))
    return nets


def test_criterion_07_exact_vs_dual_truncated_wce():
    nets = _criterion_7_nets()
    assert len(nets) >= 10
    for net in nets:
        pts = list(net.points())
        rational = net.s == 1 or len(pts) <= 128
        exact = wce_exact(pts, 2, rational=rational)
        dual = wce_dual_truncated(net, 2, radius=net.n)
        gap = abs(float(exact.e_squared) - float(dual.e_squared))
        budget = float(exact.error_budget) + float(dual.error_budget)
        assert gap <= budget, (net.base.b, net.s, net.m, net.n, gap, budget)


def test_criterion_08_single_point_oracle():
    from hoqmc.nets import NetPoint

    report = wce_exact([NetPoint(B2, ((0,),))], 2, rational=True)
    expect = math.sqrt(0.25 + 1 / 144 + 1 / 720)
    assert abs(report.e - expect) <= 1e-12


def test_criterion_09_convergence_slopes():
    # base 2 admits only two distinct field elements, so the interlacing
    # factor is capped at beta = 2 there; the s = 1 rate prediction (slope
    # -2, no log factor) is unchanged
    cfg = SweepConfig(
        b=2, s=1, alpha=2, beta=2, g=1, w_min=4, w_max=13,
        method="exact", strict=False,
    )
    def full_fit(rows):
        # least-squares slope of log e vs log N over the whole sweep
        x = np.array([math.log10(r.N) for r in rows])
        y = np.array([math.log10(r.e) for r in rows])
        return float(np.polyfit(x, y, 1)[0])

    rows, _, failures = run_sweep(cfg)
    assert not failures
    assert len(rows) == 10
    slope = full_fit(rows)
    assert slope <= -1.8, slope
    mc_cfg = SweepConfig(
        b=2, s=1, alpha=2, beta=2, g=1, w_min=4, w_max=13,
        method="mc", seed=0, strict=False,
    )
    mc_rows, _, mc_failures = run_sweep(mc_cfg)
    assert not mc_failures
    mc_slope = full_fit(mc_rows)
    assert -0.65 <= mc_slope <= -0.35, mc_slope
    print(f"criterion 9: exact slope {slope:.3f}, mc slope {mc_slope:.3f}")


def test_criterion_10_counting_and_tail_bounds():
    for (b, s, g, w, net) in _criterion_1_nets():
        assert counting_bound_holds(net), (b, s, g, w)
    _, net2, _ = _criterion_2_instance()
    assert counting_bound_holds(net2)
    for (b, alpha) in [(2, 2), (2, 3), (3, 3)]:
        base = PrimeBase(b)
        for n in range(4, 21):
            assert tail_bound_holds(alpha, base, n), (b, alpha, n)
