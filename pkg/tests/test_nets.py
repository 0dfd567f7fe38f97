import math
from fractions import Fraction

import numpy as np
import pytest

from hoqmc.errors import GuardError, InputError
from hoqmc.ff import PrimeBase
from hoqmc.nets import (
    CHEN_SKRIGANOV,
    INTERLACED,
    ConstructionParams,
    DigitalNet,
    NetPoint,
    chen_skriganov,
    construct_optimal_net,
    default_betas,
    interlace_net,
)


def test_point_digit_semantics():
    base = PrimeBase(2)
    p = NetPoint(base, ((1, 0, 1), (0, 1)))
    assert p.to_fractions() == (Fraction(5, 8), Fraction(1, 4))
    assert p.to_floats() == (0.625, 0.25)


def test_binomial_matrix_entries_by_hand():
    # g=1, w=3: entry (i, v) is C(v-1, i-1) * beta^(v-i) mod b
    base = PrimeBase(5)
    net = chen_skriganov(base, 1, 1, 3, betas=(2,), strict=False)
    C = net.matrices[0].entries
    for i in range(1, 4):
        for v in range(1, 4):
            expect = (
                0 if v < i else math.comb(v - 1, i - 1) * 2 ** (v - i) % 5
            )
            assert C[i - 1][v - 1] == expect
    assert net.provenance == CHEN_SKRIGANOV


def test_beta_zero_matrix_is_identity_like():
    # beta = 0 with the 0^0 = 1 convention gives the identity (Pascal at 0)
    base = PrimeBase(5)
    net = chen_skriganov(base, 1, 1, 4, betas=(0,), strict=False)
    eye = tuple(tuple(1 if i == j else 0 for j in range(4)) for i in range(4))
    assert net.matrices[0].entries == eye


def test_g2_row_blocks():
    # rows are laid out in g blocks of w, each block using its own beta
    base = PrimeBase(7)
    net = chen_skriganov(base, 1, 2, 2, betas=(3, 5), strict=False)
    single3 = chen_skriganov(base, 1, 1, 4, betas=(3,), strict=False)
    single5 = chen_skriganov(base, 1, 1, 4, betas=(5,), strict=False)
    # block l=1 (rows 0..1) follows beta=3, block l=2 (rows 2..3) beta=5
    assert net.matrices[0].entries[0] == single3.matrices[0].entries[0]
    assert net.matrices[0].entries[1] == single3.matrices[0].entries[1]
    assert net.matrices[0].entries[2] == single5.matrices[0].entries[0]
    assert net.matrices[0].entries[3] == single5.matrices[0].entries[1]


def test_construction_rejections():
    base = PrimeBase(5)
    with pytest.raises(InputError):
        chen_skriganov(base, 3, 2, 1)  # strict: b < g*dims
    with pytest.raises(InputError):
        chen_skriganov(base, 2, 1, 1, betas=(1, 1), strict=False)
    with pytest.raises(InputError):
        chen_skriganov(base, 2, 1, 1, betas=(0,), strict=False)
    with pytest.raises(InputError):
        chen_skriganov(base, 2, 1, 1, betas=(0, 7), strict=False)
    with pytest.raises(InputError):
        default_betas(PrimeBase(3), 4)


def test_point_generation_matches_digit_formula():
    base = PrimeBase(3)
    net = chen_skriganov(base, 2, 1, 2, strict=False)
    b = 3
    for h in range(net.num_points):
        p = net.generate_point(h)
        eta = [(h // b**i) % b for i in range(net.m)]
        for j, mat in enumerate(net.matrices):
            for i in range(net.n):
                expect = sum(mat.entries[i][r] * eta[r] for r in range(net.m)) % b
                assert p.coordinates[j][i] == expect
    with pytest.raises(InputError):
        net.generate_point(net.num_points)


def test_points_array_matches_scalar_path():
    base = PrimeBase(5)
    net = chen_skriganov(base, 2, 1, 2, strict=False)
    arr = net.points_array()
    scalar = np.array([p.to_floats() for p in net.points()])
    # summation orders differ between the vectorized and scalar paths
    assert np.allclose(arr, scalar, atol=1e-15, rtol=0)
    assert arr.shape == (25, 2)


def test_net_json_round_trip():
    base = PrimeBase(5)
    net = chen_skriganov(base, 2, 2, 1, strict=False)
    again = DigitalNet.from_json(net.to_json())
    assert again == net


def test_first_points_of_faure_type_net():
    # b=2, single matrix beta=1: upper-triangular Pascal mod 2
    base = PrimeBase(2)
    net = chen_skriganov(base, 1, 1, 3, betas=(1,), strict=False)
    xs = [p.to_fractions()[0] for p in net.points()]
    assert len(set(xs)) == 8  # net is a permutation of the 8-point grid
    assert xs[0] == 0
    assert {x.denominator for x in xs}.issubset({1, 2, 4, 8})


def test_interlace_net_shapes_and_rows():
    base = PrimeBase(5)
    q = chen_skriganov(base, 4, 1, 2, strict=False)
    net = interlace_net(q, 2)
    assert (net.s, net.m, net.n) == (2, 2, 4)
    assert net.provenance == INTERLACED
    # row beta*(h-1)+i of D_j is row h of C_{beta*(j-1)+i}
    for j in range(1, 3):
        for h in range(1, 3):
            for i in range(1, 3):
                assert (
                    net.matrices[j - 1].entries[2 * (h - 1) + i - 1]
                    == q.matrices[2 * (j - 1) + i - 1].entries[h - 1]
                )
    with pytest.raises(InputError):
        interlace_net(q, 3)


def test_interlaced_points_are_digit_interleaved():
    # coordinate digits of the interlaced net interleave the base net's
    base = PrimeBase(5)
    q = chen_skriganov(base, 2, 1, 2, strict=False)
    net = interlace_net(q, 2)
    for h in range(net.num_points):
        pq = q.generate_point(h)
        pi = net.generate_point(h)
        merged = []
        for a in range(q.n):
            merged.append(pq.coordinates[0][a])
            merged.append(pq.coordinates[1][a])
        assert list(pi.coordinates[0]) == merged


def test_construction_params_constraints():
    base = PrimeBase(67)
    p = ConstructionParams(s=2, alpha=2, beta=4, g=8, w=1, base=base)
    assert all(p.constraints().values())
    assert p.num_points == 67**8
    with pytest.raises(InputError) as err:
        ConstructionParams(s=2, alpha=2, beta=4, g=4, w=1, base=base)
    assert "g >= 2*alpha*s" in str(err.value)
    # relaxed mode accepts the same parameters
    relaxed = ConstructionParams(
        s=2, alpha=2, beta=4, g=4, w=1, base=base, strict=False
    )
    assert not all(relaxed.constraints().values())


def test_construction_params_always_require_distinct_betas():
    with pytest.raises(InputError):
        ConstructionParams(
            s=1,
            alpha=2,
            beta=4,
            g=1,
            w=1,
            base=PrimeBase(2),
            betas=(0, 1, 0, 1),
            strict=False,
        )


def test_construct_optimal_net_shape_and_guard():
    p = ConstructionParams(
        s=1, alpha=2, beta=4, g=2, w=1, base=PrimeBase(11), strict=False
    )
    net = construct_optimal_net(p)
    assert (net.s, net.m, net.n) == (1, 2, 8)
    big = ConstructionParams(
        s=1, alpha=2, beta=4, g=2, w=9, base=PrimeBase(11), strict=False
    )
    with pytest.raises(GuardError):
        construct_optimal_net(big, max_matrix_rows=32)


def test_duplicated_points_allowed():
    # nets with n < m duplicate points; multiplicity is part of the model
    base = PrimeBase(2)
    net = chen_skriganov(base, 1, 1, 2, strict=False)
    pts = [p.to_fractions() for p in net.points()]
    assert len(pts) == 4
