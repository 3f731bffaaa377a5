import math
import random
from fractions import Fraction

import pytest

from ptlab import partitions as pts
from ptlab.errors import ResourceLimitError
from ptlab.partitions import Pairing, Partition


def test_pairing_invariants_and_validation():
    p = Pairing((2, 1, 4, 3))
    assert p.m == 2 and p(1) == 2 and p(3) == 4
    with pytest.raises(ValueError):
        Pairing((1, 2))          # fixed points
    with pytest.raises(ValueError):
        Pairing((3, 4, 1, 2))    # odd-odd pairs
    with pytest.raises(ValueError):
        Pairing((2, 1, 3))       # odd length


def test_enumerate_bipartite_pairings():
    assert [repr(p) for p in pts.enumerate_bipartite_pairings(1)] == ["(1,2)"]
    assert [repr(p) for p in pts.enumerate_bipartite_pairings(2)] == \
        ["(1,2)(3,4)", "(1,4)(2,3)"]
    assert len(pts.enumerate_bipartite_pairings(3)) == 6
    for m in range(1, 7):
        ps = pts.enumerate_bipartite_pairings(m)
        assert len(ps) == math.factorial(m)
        assert len(set(ps)) == len(ps)
    with pytest.raises(ResourceLimitError):
        pts.enumerate_bipartite_pairings(9)


def test_serialization_round_trip():
    p = pts.nu1(3)
    assert repr(p) == "(1,6)(2,3)(4,5)"
    assert pts.parse_pairing(repr(p)) == p
    assert repr(Partition(4, [(2, 3), (1,), (4,)])) == "{1}{2,3}{4}"


def test_nu1_nu2():
    assert set(pts.nu1(3).pairs()) == {(1, 6), (3, 2), (5, 4)}
    assert set(map(frozenset, pts.nu1(3).blocks())) == \
        {frozenset(x) for x in ((1, 6), (2, 3), (4, 5))}
    assert set(map(frozenset, pts.nu2(3).blocks())) == \
        {frozenset(x) for x in ((1, 4), (3, 6), (5, 2))}
    assert repr(pts.nu1(1)) == "(1,2)"
    # cyclic convention 2m + q = q: nu1 pairs (1, 2m); nu2 pairs (2m-1, 2)
    for m in (3, 4, 5):
        assert pts.nu1(m)(1) == 2 * m
        assert pts.nu2(m)(2 * m - 1) == 2
    for bad in (1, 2):
        with pytest.raises(ValueError):
            pts.nu2(bad)


def test_delta_and_join():
    for m in (1, 2, 3, 4):
        j = pts.join(pts.nu1(m), pts.delta(m))
        assert len(j.blocks) == 1
    p = Partition(4, [(1, 2), (3, 4)])
    assert pts.join(p, p) == p
    assert pts.join(p, pts.delta(2).as_partition()) == p
    with pytest.raises(ValueError):
        pts.join(Partition(4, [(1, 2, 3, 4)]), Partition(6, [tuple(range(1, 7))]))


def random_partition(rng, n):
    labels = [rng.randrange(n) for _ in range(n)]
    blocks = {}
    for x, lab in enumerate(labels, start=1):
        blocks.setdefault(lab, []).append(x)
    return Partition(n, blocks.values())


def coarser(fine, coarse):
    return all(any(set(b) <= set(c) for c in coarse.blocks) for b in fine.blocks)


def test_join_lattice_properties():
    rng = random.Random(99)
    for _ in range(40):
        n = rng.randrange(2, 13)
        p, q, r = (random_partition(rng, n) for _ in range(3))
        assert pts.join(p, q) == pts.join(q, p)
        assert pts.join(pts.join(p, q), r) == pts.join(p, pts.join(q, r))
        assert pts.join(p, p) == p
        j = pts.join(p, q)
        assert coarser(p, j) and coarser(q, j)


def test_crossing_and_segments():
    assert pts.is_crossing(Partition(4, [(1, 3), (2, 4)]))
    q = Partition(4, [(1, 4), (2, 3)])
    assert not pts.is_crossing(q)
    assert pts.segments(q) == [(2, 3)]
    for n in range(1, 9):
        for g in pts.enumerate_nc(n):
            assert len(pts.segments(g)) >= 1
    # cyclic segments: {1, n} wraps around
    p = Partition(4, [(1, 4), (2,), (3,)])
    assert pts.segments(p) == [(2,), (3,)]
    assert (1, 4) in pts.cyclic_segments(p)


def test_enumerate_nc_catalan_and_cap():
    for m in range(0, 9):
        assert len(pts.enumerate_nc(m)) == pts.catalan(m)
    for g in pts.enumerate_nc(5):
        assert not pts.is_crossing(g)
    with pytest.raises(ResourceLimitError):
        pts.enumerate_nc(11)
    with pytest.raises(ValueError):
        pts.NoncrossingPartition(4, [(1, 3), (2, 4)])


def test_hat_embedding():
    assert pts.hat(Partition(3, [(1,), (2, 3)])) == Partition(6, [(1, 2), (3, 4, 5, 6)])
    assert pts.hat(Partition(3, [(1, 2, 3)])) == Partition(6, [tuple(range(1, 7))])
    # hat is a bijection onto {rho in NC(2m) : rho v delta = rho}; the converse
    # inclusion is enumerated exhaustively up to m = 5 (NC(10))
    for m in (1, 2, 3, 4, 5):
        image = {pts.hat(g) for g in pts.enumerate_nc(m)}
        assert len(image) == pts.catalan(m)  # injective
        target = {Partition(2 * m, rho.blocks) for rho in pts.enumerate_nc(2 * m)
                  if pts.join(rho, pts.delta(m)) == rho}
        assert image == target
    # at m = 6 the forward property: hat(g) is noncrossing and delta-saturated
    image6 = {pts.hat(g) for g in pts.enumerate_nc(6)}
    assert len(image6) == pts.catalan(6)
    for rho in image6:
        assert not pts.is_crossing(rho)
        assert pts.join(rho, pts.delta(6)) == rho


def test_bipairing():
    conn = pts.enumerate_connected_bipairings(2, 2)
    assert [repr(p) for p in conn] == ["(1,4)(2,3)"]
    assert len(pts.enumerate_connected_bipairings(4, 4)) == \
        math.factorial(4) - math.factorial(2) * math.factorial(2)
    with pytest.raises(ValueError):
        pts.BiPairing(2, 2, (2, 1, 4, 3))  # decomposes over the groups
    with pytest.raises(ValueError):
        pts.enumerate_connected_bipairings(3, 2)


def test_moment_cumulant_conversion():
    # all free cumulants equal 1 -> free Poisson, Catalan moments
    moments = [pts.free_cumulants_to_moments(lambda w: Fraction(1), ("x",) * k)
               for k in (1, 2, 3, 4)]
    assert moments == [1, 2, 5, 14]
    # two-term Moebius: m1 = c, m2 = c^2 + c -> kappa1 = kappa2 = c
    c = Fraction(3, 7)
    table = {("x",): c, ("x", "x"): c * c + c}
    assert pts.moments_to_free_cumulants(lambda w: table[w], ("x",)) == c
    assert pts.moments_to_free_cumulants(lambda w: table[w], ("x", "x")) == c


def test_moment_cumulant_round_trip_random():
    rng = random.Random(12345)
    cache = {}

    def moment(w):
        if w not in cache:
            cache[w] = Fraction(rng.randint(-8, 8), rng.randint(1, 9))
        return cache[w]

    for n in range(1, 6):
        for _ in range(6):
            word = tuple(rng.choice("ab") for _ in range(n))
            back = pts.free_cumulants_to_moments(
                lambda sub: pts.moments_to_free_cumulants(moment, sub), word)
            assert back == moment(word)
