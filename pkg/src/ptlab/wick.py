"""Exact finite-size Wick calculus for words in entry-permuted Wishart matrices.

For W = G G* with G an M x P Ginibre matrix (i.i.d. complex Gaussian entries,
E g = 0, E |g|^2 = 1/M) and symmetric entry permutations sigma_1, ..., sigma_m,

    E tr(W^{sigma_1} ... W^{sigma_m})
        = sum over bipartite pairings pi of [2m] of V(pi, sigmas),
    V(pi, sigmas) = #A(pi, sigmas) / M^(m+1),

where A counts the index tuples whose Wick weight is nonzero.  A tuple
consists of i_1..i_m in [M] and j_1..j_m in [P]; writing
(l_k, l_-k) = sigma_k(i_k, i_{k+1}) (cyclically), the weight of a pairing
that pairs position 2t-1 with 2s is nonzero iff l_t = l_-s and j_t = j_s for
every pair.  Everything in this module is exact rational arithmetic.

The Gaussian normalization E |g|^2 = 1/M (standard deviation 1/sqrt(M)) is
the unique reading under which E tr W = P/M; every identity below asserts
rational equality, no tolerances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import partitions as pts
from .partitions import Pairing, enumerate_bipartite_pairings
from .perms import (
    EntryPermutation,
    MatrixShape,
    PartialTranspose,
    ResourceLimitError,
    Side,
)

#: default refusal threshold for enumeration grid sizes
DEFAULT_BUDGET = 2**32
#: default cap on word length (pairing count grows like m!)
MAX_WORD_LEN = 6
#: flattened chunk size for vectorized index grids
_CHUNK = 1 << 21


@dataclass(frozen=True)
class WickWord:
    """An ordered tuple of symmetric entry permutations with a matrix shape."""

    shape: MatrixShape
    perms: tuple[EntryPermutation, ...]

    def __post_init__(self):
        object.__setattr__(self, "perms", tuple(self.perms))
        if not self.perms:
            raise ValueError("word must contain at least one permutation")
        for p in self.perms:
            if p.M != self.shape.M:
                raise ValueError(f"permutation side {p.M} != shape M {self.shape.M}")
            if not p.is_symmetric():
                raise ValueError(f"permutation {p!r} is not symmetric")

    @property
    def m(self) -> int:
        return len(self.perms)

    def subword(self, positions: tuple[int, ...]) -> "WickWord":
        return WickWord(self.shape, tuple(self.perms[t - 1] for t in positions))


@dataclass(frozen=True)
class IndexTuple:
    """Free coordinates (i_1..i_m, j_1..j_m) of a tuple in I(m).

    The dependent coordinates are forced: i_{-k} = i_{k+1} (cyclically) and
    j_{-k} = j_k.
    """

    i: tuple[int, ...]
    j: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "i", tuple(self.i))
        object.__setattr__(self, "j", tuple(self.j))
        if len(self.i) != len(self.j):
            raise ValueError("i and j must have equal length")


@dataclass
class RationalMomentReport:
    """Exact mixed moment with its per-pairing decomposition."""

    word: WickWord
    per_pairing: dict[Pairing, Fraction]
    tuple_counts: dict[Pairing, int]
    total: Fraction = field(default_factory=lambda: Fraction(0))

    def __post_init__(self):
        if not self.total:
            self.total = sum(self.per_pairing.values(), Fraction(0))


# ---------------------------------------------------------------------------
# admissible-tuple counting
# ---------------------------------------------------------------------------

def _factor_pairs(pairing: Pairing) -> list[tuple[int, int]]:
    """Pairs (t, s) with pi(2t - 1) = 2s, as factor indices in [m]."""
    return [(t, s) for t, s in enumerate(pairing.factor_map(), start=1)]


_ORBIT_CACHE: dict[tuple, list[int]] = {}


def _j_orbit_ids(pairing: Pairing) -> list[int]:
    """Orbit id per factor under the relation t ~ s for each pair (t, s).

    Depends only on the pairing, so the decomposition is computed once per
    pairing and shared across words.
    """
    cached = _ORBIT_CACHE.get(pairing.partner)
    if cached is not None:
        return cached
    m = pairing.m
    parent = list(range(m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t, s in _factor_pairs(pairing):
        ra, rb = find(t - 1), find(s - 1)
        if ra != rb:
            parent[rb] = ra
    ids = [find(k) for k in range(m)]
    _ORBIT_CACHE[pairing.partner] = ids
    return ids


def _j_orbit_count(pairing: Pairing) -> int:
    return len(set(_j_orbit_ids(pairing)))


def weight_support(pairing: Pairing, word: WickWord, u: IndexTuple) -> bool:
    """Whether the Wick weight v(pi, sigmas, u) is nonzero (v = M^-m if so)."""
    m = word.m
    if pairing.m != m or len(u.i) != m:
        raise ValueError("pairing / tuple length does not match the word")
    M, P = word.shape.M, word.shape.P
    if any(not 1 <= x <= M for x in u.i) or any(not 1 <= x <= P for x in u.j):
        raise ValueError("index tuple out of range for the word shape")
    l = [None] * (m + 1)
    lm = [None] * (m + 1)
    for k in range(1, m + 1):
        l[k], lm[k] = word.perms[k - 1](u.i[k - 1], u.i[k % m])
    for t, s in _factor_pairs(pairing):
        if l[t] != lm[s] or u.j[t - 1] != u.j[s - 1]:
            return False
    return True


def _iter_var_grid(n_vars: int, M: int, chunk: int = _CHUNK):
    """Yield 1-based value arrays (one per variable) covering [M]^n_vars."""
    if n_vars == 0:
        yield []
        return
    inner = n_vars
    while inner > 1 and M**inner > chunk:
        inner -= 1
    outer = n_vars - inner
    inner_grid = np.indices((M,) * inner).reshape(inner, -1) + 1
    for outer_vals in itertools.product(range(1, M + 1), repeat=outer):
        cols = [np.int64(v) for v in outer_vals]
        cols += [inner_grid[k] for k in range(inner)]
        yield cols


def _count_constrained_i(perms, M: int, pairs, arg_spec, chunk: int = _CHUNK) -> int:
    """Number of assignments of the i-variables satisfying all l-equalities.

    ``arg_spec`` lists, per factor, its two arguments as ("var", idx) or
    ("const", value); variable indices are 0-based and contiguous.  Every
    variable occurs in some factor argument, so the constraint mask always
    broadcasts over the full grid chunk.
    """
    n_vars = 0
    for a, b in arg_spec:
        for kind, v in (a, b):
            if kind == "var":
                n_vars = max(n_vars, v + 1)
    total = 0
    for cols in _iter_var_grid(n_vars, M, chunk):
        def resolve(spec):
            kind, v = spec
            return np.asarray(cols[v] if kind == "var" else np.int64(v))

        ls, lms = [], []
        for p, (a, b) in zip(perms, arg_spec):
            lk, lmk = p.eval_arrays(resolve(a), resolve(b))
            ls.append(lk)
            lms.append(lmk)
        mask = None
        for t, s in pairs:
            cond = ls[t - 1] == lms[s - 1]
            mask = cond if mask is None else (mask & cond)
        if isinstance(mask, np.ndarray):
            total += int(np.count_nonzero(mask))
        else:
            # scalar mask: no variables (all arguments pinned)
            total += int(bool(mask))
    return total


def _cyclic_arg_spec(m: int) -> list:
    return [(("var", k), ("var", (k + 1) % m)) for k in range(m)]


def _structured_i_count(word: WickWord, pairing: Pairing) -> int | None:
    """Closed-form i-count for words of partial transposes sharing one (b, d).

    For a common block structure the l-equalities decouple into independent
    equalities of block rows (values in [b]) and block offsets (values in
    [d]); the count is b^(#row orbits) * d^(#offset orbits).  Returns None
    when the word is not eligible.
    """
    perms = word.perms
    if not all(isinstance(p, PartialTranspose) for p in perms):
        return None
    b, d = perms[0].b, perms[0].d
    if any(p.b != b or p.d != d for p in perms):
        return None
    m = word.m

    def slots(k: int) -> tuple[int, int, int, int]:
        # (alpha slot of l_k, beta slot of l_k, alpha slot of l_-k, beta slot of l_-k)
        x, y = k, (k + 1) % m or m
        if perms[k - 1].side is Side.RIGHT:
            return x, y, y, x
        return y, x, x, y

    def orbit_count(edges) -> int:
        parent = list(range(m + 1))

        def find(z):
            while parent[z] != z:
                parent[z] = parent[parent[z]]
                z = parent[z]
            return z

        for u, v in edges:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[rv] = ru
        return len({find(z) for z in range(1, m + 1)})

    a_edges, b_edges = [], []
    for t, s in _factor_pairs(pairing):
        at, bt, _, _ = slots(t)
        _, _, ams, bms = slots(s)
        a_edges.append((at, ams))
        b_edges.append((bt, bms))
    return b ** orbit_count(a_edges) * d ** orbit_count(b_edges)


def count_admissible(pairing: Pairing, word: WickWord, method: str = "auto",
                     budget: int | None = DEFAULT_BUDGET) -> int:
    """#A(pi, sigmas): admissible index tuples of the word under the pairing.

    Methods: "fast" counts i-tuples and multiplies by P^(number of j-orbits);
    "naive" enumerates the full (i, j) grid and tests the Wick weight
    directly; "structured" is the closed form for constant-block words;
    "auto" picks structured when eligible, fast otherwise.
    """
    m = word.m
    if pairing.m != m:
        raise ValueError("pairing order does not match word length")
    M, P = word.shape.M, word.shape.P
    pairs = _factor_pairs(pairing)

    if method == "naive":
        cost = (M * P) ** m
        if budget is not None and cost > budget:
            raise ResourceLimitError(
                f"naive enumeration cost (M*P)^m = {cost} exceeds budget {budget}", cost)
        return _count_admissible_naive(pairing, word)

    if method in ("auto", "structured"):
        n = _structured_i_count(word, pairing)
        if n is not None:
            return P ** _j_orbit_count(pairing) * n
        if method == "structured":
            raise ValueError("structured path requires a constant-block partial transpose word")

    if method not in ("auto", "fast"):
        raise ValueError(f"unknown method {method!r}")
    cost = M**m
    if budget is not None and cost > budget:
        raise ResourceLimitError(
            f"fast enumeration cost M^m = {cost} exceeds budget {budget}", cost)
    n_i = _count_constrained_i(word.perms, M, pairs, _cyclic_arg_spec(m))
    return P ** _j_orbit_count(pairing) * n_i


def _count_admissible_naive(pairing: Pairing, word: WickWord) -> int:
    """Direct enumeration of I(m) testing every Wick pair constraint."""
    m = word.m
    M, P = word.shape.M, word.shape.P
    pairs = _factor_pairs(pairing)
    total = 0
    i_grid = np.indices((M,) * m).reshape(m, -1) + 1
    j_grid = np.indices((P,) * m).reshape(m, -1) + 1
    ls, lms = [], []
    for k in range(1, m + 1):
        lk, lmk = word.perms[k - 1].eval_arrays(i_grid[k - 1], i_grid[k % m])
        ls.append(lk)
        lms.append(lmk)
    i_mask = np.ones(i_grid.shape[1], dtype=bool)
    j_mask = np.ones(j_grid.shape[1], dtype=bool)
    for t, s in pairs:
        i_mask &= ls[t - 1] == lms[s - 1]
        j_mask &= j_grid[t - 1] == j_grid[s - 1]
    # the weight factors over disjoint (i, j) coordinates, so the joint count
    # is the product of the two masked counts
    return int(np.count_nonzero(i_mask)) * int(np.count_nonzero(j_mask))


def exact_mixed_moment(word: WickWord, method: str = "auto",
                       budget: int | None = DEFAULT_BUDGET,
                       max_m: int = MAX_WORD_LEN) -> RationalMomentReport:
    """E tr(W^{sigma_1} ... W^{sigma_m}} as an exact rational, per pairing."""
    m = word.m
    if m > max_m:
        raise ResourceLimitError(
            f"word length {m} exceeds the cap {max_m} (the pairing count grows like m!)",
            cost=m)
    M = word.shape.M
    per: dict[Pairing, Fraction] = {}
    counts: dict[Pairing, int] = {}
    denom = M ** (m + 1)
    for pi in enumerate_bipartite_pairings(m):
        n = count_admissible(pi, word, method=method, budget=budget)
        counts[pi] = n
        per[pi] = Fraction(n, denom)
    return RationalMomentReport(word=word, per_pairing=per, tuple_counts=counts)


def exact_mixed_cumulant(word: WickWord, method: str = "auto",
                         budget: int | None = DEFAULT_BUDGET) -> Fraction:
    """Multivariate free cumulant kappa_m of the word at finite (M, P)."""
    cache: dict[tuple, Fraction] = {}

    def moment(sub: tuple) -> Fraction:
        key = tuple(p.key() for p in sub)
        if key not in cache:
            cache[key] = exact_mixed_moment(
                WickWord(word.shape, sub), method=method, budget=budget).total
        return cache[key]

    return pts.moments_to_free_cumulants(moment, word.perms)


# ---------------------------------------------------------------------------
# restricted (projected) tuple counts
# ---------------------------------------------------------------------------

def _valid_i_tuples(word: WickWord, pairing: Pairing,
                    budget: int | None = DEFAULT_BUDGET,
                    max_tuples: int = 1 << 22) -> np.ndarray:
    """All i-tuples satisfying the l-equalities, as an (N, m) array."""
    m = word.m
    M = word.shape.M
    cost = M**m
    if budget is not None and cost > budget:
        raise ResourceLimitError(f"i-grid cost M^m = {cost} exceeds budget {budget}", cost)
    pairs = _factor_pairs(pairing)
    rows = []
    count = 0
    for cols in _iter_var_grid(m, M):
        size = next(c.size for c in cols if isinstance(c, np.ndarray))
        arrs = [c if isinstance(c, np.ndarray) else np.full(size, int(c), dtype=np.int64)
                for c in cols]
        ls, lms = [], []
        for k in range(1, m + 1):
            lk, lmk = word.perms[k - 1].eval_arrays(arrs[k - 1], arrs[k % m])
            ls.append(lk)
            lms.append(lmk)
        mask = np.ones(size, dtype=bool)
        for t, s in pairs:
            mask &= ls[t - 1] == lms[s - 1]
        sel = np.stack([a[mask] for a in arrs], axis=1)
        count += sel.shape[0]
        if count > max_tuples:
            raise ResourceLimitError(
                f"admissible i-tuple set exceeds the cap {max_tuples}", count)
        rows.append(sel)
    return np.concatenate(rows, axis=0) if rows else np.zeros((0, m), dtype=np.int64)


def count_admissible_restricted(pairing: Pairing, word: WickWord, D,
                                budget: int | None = DEFAULT_BUDGET,
                                max_tuples: int = 1 << 22) -> int:
    """#A_{pi, sigmas}(D): distinct projections sigmas(u)[D] over admissible u.

    The flat vector sigmas(u) = (l_1, j_1, j_-1, l_-1, ..., l_m, j_m, j_-m,
    l_-m) is projected onto the component pairs selected by D, a subset of
    [2m].  This counts projected images, which can be smaller than the number
    of admissible tuples when D is proper.
    """
    m = word.m
    D = sorted(set(int(x) for x in D))
    if any(not 1 <= x <= 2 * m for x in D):
        raise ValueError(f"D must be a subset of [1, {2 * m}]")
    tuples = _valid_i_tuples(word, pairing, budget=budget, max_tuples=max_tuples)
    if tuples.shape[0] == 0:
        return 0
    P = word.shape.P

    # l-side projection: components of the selected pairs that come from l
    l_cols = []
    touched_factors = []
    for dd in D:
        k = (dd + 1) // 2
        touched_factors.append(k)
        l_cols.append((k, "l" if dd % 2 else "lm"))
    if l_cols:
        comp = []
        for k, which in l_cols:
            lk, lmk = word.perms[k - 1].eval_arrays(tuples[:, k - 1], tuples[:, k % m])
            comp.append(lk if which == "l" else lmk)
        l_proj = np.stack(comp, axis=1)
        n_l = np.unique(l_proj, axis=0).shape[0]
    else:
        n_l = 1

    # j-side projection: position 2k-1 contributes j_k, position 2k also j_k
    # (j_-k = j_k); over orbit-constant assignments, distinct projections are
    # free choices of the touched orbit values
    orbit = _j_orbit_ids(pairing)
    touched_orbits = {orbit[k - 1] for k in touched_factors}
    n_j = P ** len(touched_orbits)
    return n_l * n_j


# ---------------------------------------------------------------------------
# trace covariance (unnormalized traces, connected pairings)
# ---------------------------------------------------------------------------

def exact_trace_covariance(word1: WickWord, word2: WickWord,
                           budget: int | None = DEFAULT_BUDGET,
                           max_total: int = MAX_WORD_LEN + 2) -> Fraction:
    """Cov(Tr W^{sigmas}, Tr W^{taus}) with Tr the unnormalized trace.

    Equals M^-(m+r) times the number of admissible combined tuples, summed
    over the connected bipartite pairings of [2(m+r)] (those coupling the two
    trace cycles).
    """
    if word1.shape != word2.shape:
        raise ValueError("words must share one matrix shape")
    m, r = word1.m, word2.m
    K = m + r
    if K > max_total:
        raise ResourceLimitError(f"total word length {K} exceeds the cap {max_total}", K)
    M, P = word1.shape.M, word1.shape.P
    cost = M**K
    if budget is not None and cost > budget:
        raise ResourceLimitError(f"covariance grid cost M^(m+r) = {cost} exceeds budget", cost)

    perms = word1.perms + word2.perms
    arg_spec = [(("var", k), ("var", (k + 1) % m)) for k in range(m)]
    arg_spec += [(("var", m + k), ("var", m + (k + 1) % r)) for k in range(r)]

    total = 0
    for pi in enumerate_bipartite_pairings(K):
        if not _is_connected(pi, m):
            continue
        pairs = _factor_pairs(pi)
        n_i = _count_constrained_i(perms, M, pairs, arg_spec)
        total += P ** _j_orbit_count(pi) * n_i
    return Fraction(total, M**K)


def exact_trace_product_expectation(word1: WickWord, word2: WickWord,
                                    budget: int | None = DEFAULT_BUDGET) -> Fraction:
    """E(Tr W^{sigmas} * Tr W^{taus}); all bipartite pairings, not just connected."""
    if word1.shape != word2.shape:
        raise ValueError("words must share one matrix shape")
    m, r = word1.m, word2.m
    K = m + r
    M, P = word1.shape.M, word1.shape.P
    cost = M**K
    if budget is not None and cost > budget:
        raise ResourceLimitError(f"grid cost M^(m+r) = {cost} exceeds budget", cost)
    perms = word1.perms + word2.perms
    arg_spec = [(("var", k), ("var", (k + 1) % m)) for k in range(m)]
    arg_spec += [(("var", m + k), ("var", m + (k + 1) % r)) for k in range(r)]
    total = 0
    for pi in enumerate_bipartite_pairings(K):
        pairs = _factor_pairs(pi)
        n_i = _count_constrained_i(perms, M, pairs, arg_spec)
        total += P ** _j_orbit_count(pi) * n_i
    return Fraction(total, M**K)


def _is_connected(pairing: Pairing, m: int) -> bool:
    """True iff some position in [2m] is paired beyond 2m."""
    return any(pairing(k) > 2 * m for k in range(1, 2 * m + 1))


def connected_bipairings(m: int, r: int) -> list[pts.BiPairing]:
    """The bipartite pairings of [2(m+r)] that couple the two trace groups."""
    return pts.enumerate_connected_bipairings(2 * m, 2 * r)


# ---------------------------------------------------------------------------
# segment sums (the nu_1 / nu_2 boundary sums of constant words)
# ---------------------------------------------------------------------------

def segment_sum(pairing: Pairing, word: WickWord, a: int, b: int | None = None,
                budget: int | None = DEFAULT_BUDGET) -> Fraction:
    """Sum of Wick weights over interior tuples with pinned trace endpoints.

    For a constant word (Gamma(b, d), ..., Gamma(b, d)) and pairing nu_1 or
    nu_2 this evaluates  sum over u in J(m) of v(pi, sigmas, (a, u, b)),
    enumerating the interior index grid directly.  The i_1 = a and
    i_{m+1} = b endpoints replace the cyclic identification.
    """
    m = word.m
    perms = word.perms
    p0 = perms[0]
    if not isinstance(p0, PartialTranspose) or p0.side is not Side.RIGHT:
        raise ValueError("segment sums are defined for constant right partial transpose words")
    if any(p.key() != p0.key() for p in perms):
        raise ValueError("segment sums require a constant word")
    allowed = [pts.nu1(m)] + ([pts.nu2(m)] if m >= 3 else [])
    if pairing not in allowed:
        raise ValueError("pairing must be nu1(m) or nu2(m)")
    M, P = word.shape.M, word.shape.P
    if not 1 <= a <= M:
        raise ValueError(f"endpoint a = {a} outside [1, {M}]")
    b = a if b is None else b
    if not 1 <= b <= M:
        raise ValueError(f"endpoint b = {b} outside [1, {M}]")

    cost = M ** (m - 1) + P**m
    if budget is not None and cost > budget:
        raise ResourceLimitError(f"segment grid cost {cost} exceeds budget", cost)

    pairs = _factor_pairs(pairing)

    # interior i-count: variables i_2 .. i_m, endpoints pinned
    arg_spec = []
    for k in range(1, m + 1):
        left = ("const", a) if k == 1 else ("var", k - 2)
        right = ("const", b) if k == m else ("var", k - 1)
        arg_spec.append((left, right))
    n_i = _count_constrained_i(perms, M, pairs, arg_spec)

    # j-count: direct enumeration of [P]^m under the pairing equalities
    j_grid = np.indices((P,) * m).reshape(m, -1) + 1
    mask = np.ones(j_grid.shape[1], dtype=bool)
    for t, s in pairs:
        mask &= j_grid[t - 1] == j_grid[s - 1]
    n_j = int(np.count_nonzero(mask))

    return Fraction(n_i * n_j, M**m)
