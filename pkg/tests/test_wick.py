import itertools
from fractions import Fraction

import numpy as np
import pytest

from ptlab import partitions as pts
from ptlab import perms as pm
from ptlab import wick as wk
from ptlab.errors import ResourceLimitError
from ptlab.perms import Identity, MatrixShape, PartialTranspose, Side, Transpose
from ptlab.wick import IndexTuple, WickWord


def word(M, P, *perms):
    return WickWord(MatrixShape(M, P), perms)


def test_word_validation():
    with pytest.raises(ValueError):
        word(4, 4)  # empty
    with pytest.raises(ValueError):
        word(4, 4, Identity(5))
    # non-symmetric permutations are rejected
    R = np.array([[1, 1, 2], [2, 3, 1], [3, 2, 3]])
    C = np.array([[1, 2, 1], [3, 2, 3], [1, 2, 3]])
    asym = pm.TablePermutation(R, C)
    assert not asym.is_symmetric()
    with pytest.raises(ValueError):
        word(3, 3, asym)


def test_weight_support_examples():
    w1 = word(4, 4, Identity(4))
    pi1 = pts.enumerate_bipartite_pairings(1)[0]
    for i in range(1, 5):
        assert wk.weight_support(pi1, w1, IndexTuple((i,), (2,)))
    w2 = word(4, 4, Identity(4), Identity(4))
    cross = pts.Pairing.from_pairs([(1, 4), (2, 3)])
    assert not wk.weight_support(cross, w2, IndexTuple((1, 1), (1, 2)))
    # sum of weights over all tuples at fixed pairing equals the count
    total = sum(
        wk.weight_support(cross, w2, IndexTuple((i1, i2), (j1, j2)))
        for i1 in range(1, 5) for i2 in range(1, 5)
        for j1 in range(1, 5) for j2 in range(1, 5))
    assert total == wk.count_admissible(cross, w2)


def test_count_admissible_hand_counts():
    M, P = 5, 3
    pi1 = pts.enumerate_bipartite_pairings(1)[0]
    assert wk.count_admissible(pi1, word(M, P, Identity(M))) == M * P
    interval = pts.Pairing.from_pairs([(1, 2), (3, 4)])
    cross = pts.Pairing.from_pairs([(1, 4), (2, 3)])
    w2 = word(M, P, Identity(M), Identity(M))
    assert wk.count_admissible(interval, w2) == M * P * P
    assert wk.count_admissible(cross, w2) == M * M * P


def test_exact_moment_examples():
    assert wk.exact_mixed_moment(word(4, 4, Identity(4))).total == 1
    assert wk.exact_mixed_moment(word(6, 5, Identity(6))).total == Fraction(5, 6)
    assert wk.exact_mixed_moment(word(4, 4, Identity(4), Identity(4))).total == 2
    rep = wk.exact_mixed_moment(word(12, 12, PartialTranspose(6, 2), PartialTranspose(4, 3)))
    assert rep.total == Fraction(23, 18)
    assert rep.total == sum(rep.per_pairing.values())
    assert all(rep.per_pairing[p] == Fraction(rep.tuple_counts[p], 12**3)
               for p in rep.per_pairing)


def test_exact_cumulant_examples():
    rng = np.random.default_rng(42)
    # kappa_1 = P/M for every symmetric word of length 1
    for sigma in (Identity(6), Transpose(6), pm.random_symmetric_table(6, rng)):
        assert wk.exact_mixed_cumulant(word(6, 5, sigma)) == Fraction(5, 6)
    # kappa_2(W, W^T) = P/M^2
    for (M, P) in ((8, 8), (12, 8)):
        assert wk.exact_mixed_cumulant(word(M, P, Identity(M), Transpose(M))) == \
            Fraction(P, M * M)


def test_kappa2_identity_mixed_kinds():
    rng = np.random.default_rng(11)
    for (M, P) in ((8, 8), (12, 8)):
        perms = [Identity(M), Transpose(M), PartialTranspose(2, M // 2),
                 PartialTranspose(M // 2, 2, Side.LEFT),
                 pm.random_symmetric_table(M, rng)]
        for s, t in itertools.combinations_with_replacement(perms, 2):
            k2 = wk.exact_mixed_cumulant(word(M, P, s, t))
            assert k2 == Fraction(P, M) * Fraction(pm.count_agreements(s, t), M * M)


def test_method_agreement_and_budget():
    w = word(6, 5, PartialTranspose(2, 3), PartialTranspose(2, 3))
    for pi in pts.enumerate_bipartite_pairings(2):
        fast = wk.count_admissible(pi, w, method="fast")
        assert fast == wk.count_admissible(pi, w, method="naive")
        assert fast == wk.count_admissible(pi, w, method="structured")
    mixed = word(6, 5, PartialTranspose(2, 3), PartialTranspose(3, 2))
    with pytest.raises(ValueError):
        wk.count_admissible(pts.delta(2), mixed, method="structured")
    big = word(256, 256, *(Identity(256),) * 5)
    with pytest.raises(ResourceLimitError):
        wk.count_admissible(pts.delta(5), big, method="fast")
    with pytest.raises(ResourceLimitError):
        wk.count_admissible(pts.delta(2), word(70000, 4, Identity(70000)), method="naive")
    with pytest.raises(ResourceLimitError):
        wk.exact_mixed_moment(word(4, 4, *(Identity(4),) * 7))


def test_restricted_counts_basics():
    for m in (1, 2, 3):
        for (M, P) in ((4, 4), (6, 5)):
            perms = tuple(itertools.islice(itertools.cycle(
                [Identity(M), Transpose(M)]), m))
            w = word(M, P, *perms)
            for pi in pts.enumerate_bipartite_pairings(m):
                assert wk.count_admissible_restricted(pi, w, range(1, 2 * m + 1)) == \
                    wk.count_admissible(pi, w)
                assert wk.count_admissible_restricted(pi, w, []) == \
                    (1 if wk.count_admissible(pi, w) else 0)
    with pytest.raises(ValueError):
        wk.count_admissible_restricted(pts.delta(2), word(4, 4, Identity(4), Identity(4)), [5])


def brute_restricted(pi, w, D):
    m, M, P = w.m, w.shape.M, w.shape.P
    out = set()
    for ii in itertools.product(range(1, M + 1), repeat=m):
        for jj in itertools.product(range(1, P + 1), repeat=m):
            if not wk.weight_support(pi, w, IndexTuple(ii, jj)):
                continue
            flat = []
            for k in range(1, m + 1):
                lk, lmk = w.perms[k - 1](ii[k - 1], ii[k % m])
                flat += [lk, jj[k - 1], jj[k - 1], lmk]
            out.add(tuple(x for dd in sorted(D) for x in (flat[2 * dd - 2], flat[2 * dd - 1])))
    return len(out)


def test_restricted_counts_against_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(25):
        m = int(rng.integers(1, 4))
        M = int(rng.integers(2, 5))
        P = int(rng.integers(2, 5))
        w = word(M, P, *(pm.random_symmetric_table(M, rng) for _ in range(m)))
        pis = pts.enumerate_bipartite_pairings(m)
        pi = pis[int(rng.integers(0, len(pis)))]
        size = int(rng.integers(0, 2 * m + 1))
        D = sorted(rng.choice(np.arange(1, 2 * m + 1), size=size, replace=False).tolist())
        assert wk.count_admissible_restricted(pi, w, D) == brute_restricted(pi, w, D)


def test_projection_growth_inequality():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 30:
        m = int(rng.integers(2, 5))
        M = int(rng.integers(2, 7))
        P = int(rng.integers(2, 7))
        w = word(M, P, *(pm.random_symmetric_table(M, rng) for _ in range(m)))
        pis = pts.enumerate_bipartite_pairings(m)
        pi = pis[int(rng.integers(0, len(pis)))]
        k = int(rng.integers(1, m + 1))
        if 2 * k + 2 > 2 * m:
            continue
        B = {2 * k + 1, 2 * k + 2}
        B |= {int(rng.integers(1, 2 * m + 1)) for _ in range(int(rng.integers(0, 2 * m)))}
        # close under the pairing
        while True:
            closed = B | {pi(x) for x in B}
            if closed == B:
                break
            B = closed
        B1 = B | {2 * k - 1, 2 * k} | {pi(2 * k - 1), pi(2 * k)}
        nB = wk.count_admissible_restricted(pi, w, B)
        nB1 = wk.count_admissible_restricted(pi, w, B1)
        assert nB1 <= nB * max(M, P) ** ((len(B1) - len(B)) // 2)
        checked += 1


def test_segment_sums():
    # spec examples
    w334 = word(4, 4, *(PartialTranspose(2, 2),) * 3)
    assert wk.segment_sum(pts.nu1(3), w334, 1) == Fraction(1, 4)
    w423 = word(6, 6, *(PartialTranspose(2, 3),) * 4)
    assert wk.segment_sum(pts.nu2(4), w423, 2) == Fraction(1, 4)
    # endpoint mismatch vanishes
    for m in (3, 4):
        w = word(6, 6, *(PartialTranspose(3, 2),) * m)
        for pi in (pts.nu1(m), pts.nu2(m)):
            assert wk.segment_sum(pi, w, 1, 2) == 0
    # independence of the endpoint, and the per-pairing value identity
    for m in (3, 4):
        for (b, d) in ((2, 2), (2, 3)):
            M = b * d
            w = word(M, M, *(PartialTranspose(b, d),) * m)
            for pi in (pts.nu1(m), pts.nu2(m)):
                vals = {wk.segment_sum(pi, w, a) for a in range(1, M + 1)}
                assert len(vals) == 1
                V = Fraction(wk.count_admissible(pi, w), M ** (m + 1))
                assert vals == {V}
    # domain errors
    with pytest.raises(ValueError):
        wk.segment_sum(pts.nu1(2), word(4, 4, Identity(4), Identity(4)), 1)
    with pytest.raises(ValueError):
        wk.segment_sum(pts.nu1(2), word(4, 4, PartialTranspose(2, 2),
                                        PartialTranspose(4, 1)), 1)
    with pytest.raises(ValueError):
        wk.segment_sum(pts.delta(3), word(8, 8, *(PartialTranspose(2, 4),) * 3), 1)


def test_segment_sum_against_full_enumeration():
    # doubly-naive cross-check of the factored enumeration on tiny shapes
    for m, b, d, P in ((3, 2, 2, 3), (3, 1, 3, 2)):
        M = b * d
        w = word(M, P, *(PartialTranspose(b, d),) * m)
        for pi in (pts.nu1(m), pts.nu2(m)):
            for (a, bb) in ((1, 1), (2, 2), (1, 2)):
                total = Fraction(0)
                for interior in itertools.product(range(1, M + 1), repeat=m - 1):
                    ii = (a,) + interior
                    full_i = ii + (bb,)
                    for jj in itertools.product(range(1, P + 1), repeat=m):
                        ok = True
                        for t, s in wk._factor_pairs(pi):
                            lt = w.perms[t - 1](full_i[t - 1], full_i[t])[0]
                            lms = w.perms[s - 1](full_i[s - 1], full_i[s])[1]
                            if lt != lms or jj[t - 1] != jj[s - 1]:
                                ok = False
                                break
                        if ok:
                            total += Fraction(1, M ** m)
                assert total == wk.segment_sum(pi, w, a, bb), (m, b, d, pi, a, bb)


def test_trace_covariance():
    for (M, P) in ((4, 4), (6, 5), (8, 8)):
        wI = word(M, P, Identity(M))
        assert wk.exact_trace_covariance(wI, wI) == Fraction(P, M)
    # coherence: E(Tr Tr) = Cov + E Tr * E Tr
    for (M, P) in ((4, 4), (6, 5)):
        w1 = word(M, P, Identity(M))
        w2 = word(M, P, PartialTranspose(2, M // 2))
        lhs = wk.exact_trace_product_expectation(w1, w2)
        cov = wk.exact_trace_covariance(w1, w2)
        e1 = M * wk.exact_mixed_moment(w1).total
        e2 = M * wk.exact_mixed_moment(w2).total
        assert lhs == cov + e1 * e2
    with pytest.raises(ValueError):
        wk.exact_trace_covariance(word(4, 4, Identity(4)), word(6, 6, Identity(6)))


def test_trace_covariance_boundedness_grid():
    # Cov(Tr, Tr) stays in a fixed band over the grid
    vals = []
    for M in (4, 8, 12, 16):
        w = word(M, M, PartialTranspose(2, M // 2), PartialTranspose(M // 2, 2))
        vals.append(wk.exact_trace_covariance(w, w))
    assert max(vals) < 3 * min(vals)
    assert all(v > 0 for v in vals)


def test_connected_bipairings():
    assert len(wk.connected_bipairings(1, 1)) == 1
    assert len(wk.connected_bipairings(2, 2)) == 24 - 4


def test_decomposition_identity_against_naive():
    # total moment equals the naive-path pairing sum on a small exhaustive grid
    for M, P in ((4, 4), (6, 5)):
        for m in (1, 2, 3):
            w = word(M, P, *(PartialTranspose(2, M // 2),) * m)
            naive_total = sum(
                Fraction(wk.count_admissible(pi, w, method="naive"), M ** (m + 1))
                for pi in pts.enumerate_bipartite_pairings(m))
            assert wk.exact_mixed_moment(w).total == naive_total


def test_full_join_pairings_vanish_except_nu(
):
    # non-nu pairings with full join have vanishing per-pairing values
    for m in (4, 5):
        nus = {pts.nu1(m), pts.nu2(m)}
        full = [p for p in pts.enumerate_bipartite_pairings(m)
                if len(pts.join(p, pts.delta(m)).blocks) == 1]
        assert nus <= set(full)
        for pi in full:
            Vs = []
            for M in (4, 8, 16):
                w = word(M, M, *(PartialTranspose(2, M // 2),) * m)
                Vs.append(Fraction(wk.count_admissible(pi, w), M ** (m + 1)))
            if pi in nus:
                assert Vs[-1] > 0
            else:
                assert Vs[-1] < Vs[0] and Vs[-1] <= Vs[0] / 2
