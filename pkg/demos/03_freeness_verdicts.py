"""Limit cumulants and the asymptotic freeness verdict engine.

A partial transpose family G(b_N, d_N) has limit free cumulants determined
by the declared limits of b and d alone; pairwise freeness of several
families reduces to divergence of lcm-ratios of the inner block sizes
(right-right pairs) or of the cross products d*b' and b*d' (right-left
pairs).  Each verdict is corroborated by the exact agreement densities on a
sampled grid.

Run:  python demos/03_freeness_verdicts.py
"""

from fractions import Fraction

from ptlab import (
    INF,
    ShapeFamily,
    Side,
    empirical_density_probe,
    limit_moments_gamma,
    verdict_family,
)

print("limit moments of W^G(b,d) for a few regimes (c = lim P/M = 1):")
for b, d, name in ((INF, INF, "b, d -> inf (shifted semicircle)"),
                   (1, INF, "b = 1 (transpose: free Poisson)"),
                   (2, INF, "b = 2 fixed"),
                   (2, 3, "b = 2, d = 3 fixed")):
    moments = limit_moments_gamma(5, b, d, Fraction(1))
    print(f"  {name:36s} m_1..m_5 = {', '.join(str(x) for x in moments)}")

grid = (2, 4, 8, 16)
families = [
    ShapeFamily(Side.RIGHT, INF, INF, tuple((N, N, N * N) for N in grid), "G(N,N)"),
    ShapeFamily(Side.LEFT, INF, INF, tuple((N, N, N * N) for N in grid), "LG(N,N)"),
    ShapeFamily(Side.RIGHT, INF, 1, tuple((N * N, 1, N * N) for N in grid), "G(N^2,1)"),
    ShapeFamily(Side.RIGHT, INF, 2, tuple((N * N // 2, 2, N * N) for N in grid), "G(M/2,2)"),
]

print(f"\npairwise verdicts on the grid N = {grid}:")
matrix, overall = verdict_family(families)
for (i, j), v in sorted(matrix.items()):
    probe = empirical_density_probe(families[i], families[j])
    dens = ", ".join(str(x) for x in probe["densities"])
    flag = "free    " if v.free else "NOT free"
    print(f"  {families[i].label:9s} vs {families[j].label:9s} {flag}"
          f" [{v.rule}]  densities: {dens}")
print(f"\noverall family free: {overall}")
