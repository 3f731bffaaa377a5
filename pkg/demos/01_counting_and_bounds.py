"""Walk through the entry-permutation counting statistics.

The block partial transpose G(b, d) transposes each d x d block of a
bd x bd matrix in place.  Two such permutations agree on a number of index
pairs controlled by the least common multiple of their inner block sizes:
with Q = lcm(d, D) = d L, the agreement count c sits in the sandwich

    M^2 / L^2  <=  c(G(b,d), G(B,D))  =  j(G(b,d), G(B,D))  <=  M^2 / L.

Run:  python demos/01_counting_and_bounds.py
"""

from ptlab import (
    PartialTranspose,
    all_partial_transposes,
    count_agreements,
    count_joint,
    gamma_lcm_data,
)

M = 24
print(f"factorizations of M = {M} and their pairwise agreement counts\n")
print(f"{'pair':28s} {'c':>6s} {'j':>6s} {'M^2/L^2':>9s} {'M^2/L':>7s}")
for p in all_partial_transposes(M):
    for q in all_partial_transposes(M):
        if p.d > q.d:
            continue
        lcm = gamma_lcm_data(p.d, q.d)
        c = count_agreements(p, q)
        j = count_joint(p, q)
        lo, hi = M * M // lcm.L**2, M * M // lcm.L
        assert lo <= c == j <= hi
        print(f"{p!r} vs {q!r:12s} {c:6d} {j:6d} {lo:9d} {hi:7d}")

print("\nagreement density c / M^2 for the pair G(M/2,2) vs G(2,M/2):")
for M in (8, 16, 32, 64, 128):
    c = count_agreements(PartialTranspose(M // 2, 2), PartialTranspose(2, M // 2))
    print(f"  M = {M:4d}:  c = {c:5d}   density = {c / M**2:.5f}  (= 4/M)")
print("\nthe density vanishes, which is exactly the asymptotic freeness criterion")
