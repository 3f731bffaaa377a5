"""Pair partitions, partition joins, noncrossing structure and the
moment/free-cumulant conversion on the noncrossing lattice.

Ground sets are [n] = {1, ..., n}.  A bipartite pairing of [2m] pairs odd
positions with even positions (k + pi(k) is odd); there are m! of them.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .errors import ResourceLimitError

#: enumeration caps (factorial / Catalan growth)
MAX_PAIRING_ORDER = 8
MAX_NC_ORDER = 10


def _canonical_blocks(blocks: Iterable[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    bs = tuple(tuple(sorted(int(x) for x in b)) for b in blocks)
    return tuple(sorted(bs, key=lambda b: b[0]))


class Partition:
    """A set partition of [n] in canonical form (blocks sorted by minimum)."""

    def __init__(self, n: int, blocks: Iterable[Iterable[int]]):
        self.n = int(n)
        self.blocks = _canonical_blocks(blocks)
        seen = [x for b in self.blocks for x in b]
        if sorted(seen) != list(range(1, self.n + 1)):
            raise ValueError(f"blocks do not partition [1, {self.n}]: {self.blocks}")

    def block_of(self, x: int) -> tuple[int, ...]:
        for b in self.blocks:
            if x in b:
                return b
        raise ValueError(f"{x} not in ground set")

    def __eq__(self, other):
        return isinstance(other, Partition) and (self.n, self.blocks) == (other.n, other.blocks)

    def __hash__(self):
        return hash((self.n, self.blocks))

    def __repr__(self):
        return "".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)


class NoncrossingPartition(Partition):
    """A partition of [n] certified noncrossing at construction."""

    def __init__(self, n, blocks):
        super().__init__(n, blocks)
        if is_crossing(self):
            raise ValueError(f"partition is crossing: {self.blocks}")


class Pairing:
    """A bipartite pair partition of [2m]: partner[k] = pi(k), 1-based.

    Invariants: pi is a fixed-point-free involution and k + pi(k) is odd.
    """

    def __init__(self, partner: Sequence[int]):
        partner = tuple(int(x) for x in partner)
        n = len(partner)
        if n == 0 or n % 2:
            raise ValueError("partner array must have even positive length")
        for k in range(1, n + 1):
            p = partner[k - 1]
            if not 1 <= p <= n or p == k or partner[p - 1] != k:
                raise ValueError(f"not a fixed-point-free involution at {k}")
            if (k + p) % 2 == 0:
                raise ValueError(f"pair ({k}, {p}) is not odd-even bipartite")
        self.partner = partner
        self.m = n // 2

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "Pairing":
        pairs = list(pairs)
        n = 2 * len(pairs)
        partner = [0] * n
        for a, b in pairs:
            partner[a - 1] = b
            partner[b - 1] = a
        return cls(partner)

    def __call__(self, k: int) -> int:
        return self.partner[k - 1]

    def pairs(self) -> list[tuple[int, int]]:
        """The pairs as (odd position, even position)."""
        return [(k, self.partner[k - 1]) for k in range(1, 2 * self.m + 1, 2)]

    def factor_map(self) -> tuple[int, ...]:
        """The bijection f of [m] with pi(2t - 1) = 2 f(t)."""
        return tuple(self.partner[2 * t - 2] // 2 for t in range(1, self.m + 1))

    def blocks(self) -> tuple[tuple[int, ...], ...]:
        return _canonical_blocks((k, p) for k, p in self.pairs())

    def as_partition(self) -> Partition:
        return Partition(2 * self.m, self.blocks())

    def __eq__(self, other):
        return isinstance(other, Pairing) and self.partner == other.partner

    def __hash__(self):
        return hash(self.partner)

    def __repr__(self):
        ordered = sorted(tuple(sorted(p)) for p in self.pairs())
        return "".join(f"({a},{b})" for a, b in ordered)


def parse_pairing(text: str) -> Pairing:
    """Parse the serialized form ``(1,6)(2,3)(4,5)``."""
    toks = text.replace(" ", "").strip()
    if not (toks.startswith("(") and toks.endswith(")")):
        raise ValueError(f"malformed pairing literal: {text!r}")
    pairs = []
    for part in toks[1:-1].split(")("):
        a, b = part.split(",")
        pairs.append((int(a), int(b)))
    return Pairing.from_pairs(pairs)


def enumerate_bipartite_pairings(m: int, max_order: int = MAX_PAIRING_ORDER) -> list[Pairing]:
    """All m! bipartite pairings of [2m], lexicographic in (pi(1), pi(3), ...)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > max_order:
        raise ResourceLimitError(f"m = {m} exceeds the pairing enumeration cap {max_order}")
    evens = list(range(2, 2 * m + 1, 2))
    out = []
    for images in itertools.permutations(evens):
        out.append(Pairing.from_pairs(zip(range(1, 2 * m + 1, 2), images)))
    return out


def delta(m: int) -> Pairing:
    """The interval pairing (1,2)(3,4)...(2m-1,2m) on [2m]."""
    return Pairing.from_pairs((2 * k - 1, 2 * k) for k in range(1, m + 1))


def nu1(m: int) -> Pairing:
    """The pairing (1, 2m), (2, 3), (4, 5), ..., (2m-2, 2m-1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    pairs = [(1, 2 * m)] + [(2 * k, 2 * k + 1) for k in range(1, m)]
    return Pairing.from_pairs(pairs)


def nu2(m: int) -> Pairing:
    """The pairing (1, 4), (3, 6), ..., (2m-3, 2m), (2m-1, 2); defined for m >= 3."""
    if m < 3:
        raise ValueError(f"nu2 requires m >= 3, got {m}")
    pairs = []
    for k in range(1, m + 1):
        a = 2 * k - 1
        b = (2 * k + 2) % (2 * m)
        b = b if b else 2 * m
        pairs.append((a, b))
    return Pairing.from_pairs(pairs)


class BiPairing(Pairing):
    """A bipartite pairing of [a + b] that couples the two groups.

    At least one position s <= a is paired beyond a, i.e. the pairing is not
    a concatenation of separate pairings of [a] and of the remaining b spots.
    """

    def __init__(self, a: int, b: int, partner: Sequence[int]):
        super().__init__(partner)
        if a < 1 or b < 1 or a % 2 or b % 2 or a + b != 2 * self.m:
            raise ValueError("group sizes must be even and sum to the pairing length")
        if not any(self(k) > a for k in range(1, a + 1)):
            raise ValueError("pairing decomposes over the two groups")
        self.a = a
        self.b = b


def enumerate_connected_bipairings(a: int, b: int) -> list[BiPairing]:
    """All bipartite pairings of [a + b] with at least one cross-group pair."""
    if a % 2 or b % 2:
        raise ValueError("group sizes must be even")
    out = []
    for p in enumerate_bipartite_pairings((a + b) // 2):
        if any(p(k) > a for k in range(1, a + 1)):
            out.append(BiPairing(a, b, p.partner))
    return out


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _blocks_of(p) -> tuple[tuple[int, ...], ...]:
    if isinstance(p, Partition):
        return p.blocks
    if isinstance(p, Pairing):
        return p.blocks()
    raise TypeError(f"expected Partition or Pairing, got {type(p)}")


def _ground_of(p) -> int:
    return p.n if isinstance(p, Partition) else 2 * p.m


def join(p, q) -> Partition:
    """Least common coarsening of two partitions of the same ground set."""
    n, nq = _ground_of(p), _ground_of(q)
    if n != nq:
        raise ValueError(f"ground set mismatch: {n} != {nq}")
    uf = _UnionFind(n + 1)
    for blocks in (_blocks_of(p), _blocks_of(q)):
        for b in blocks:
            for x in b[1:]:
                uf.union(b[0], x)
    groups: dict[int, list[int]] = {}
    for x in range(1, n + 1):
        groups.setdefault(uf.find(x), []).append(x)
    return Partition(n, groups.values())


def is_crossing(p) -> bool:
    """True iff some a < b < c < d has a, c in one block and b, d in another."""
    blocks = _blocks_of(p)
    for b1, b2 in itertools.combinations(blocks, 2):
        # merge the two sorted blocks; they cross iff the label run pattern
        # alternates at least 4 times (e.g. ABAB)
        merged = sorted([(x, 0) for x in b1] + [(x, 1) for x in b2])
        runs = 1
        for (_, l1), (_, l2) in zip(merged, merged[1:]):
            if l1 != l2:
                runs += 1
        if runs >= 4:
            return True
    return False


def is_noncrossing(p) -> bool:
    return not is_crossing(p)


def segments(p) -> list[tuple[int, ...]]:
    """Blocks whose elements are consecutive integers."""
    return [b for b in _blocks_of(p) if b[-1] - b[0] == len(b) - 1]


def cyclic_segments(p) -> list[tuple[int, ...]]:
    """Blocks consecutive modulo n (the convention identifying n + q with q)."""
    n = _ground_of(p)
    out = []
    for b in _blocks_of(p):
        k = len(b)
        members = set(b)
        for start in b:
            if all((start - 1 + t) % n + 1 in members for t in range(k)):
                out.append(b)
                break
    return out


def enumerate_nc(m: int, max_order: int = MAX_NC_ORDER) -> list[NoncrossingPartition]:
    """All noncrossing partitions of [m]; there are Catalan(m) of them."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if m > max_order:
        raise ResourceLimitError(f"m = {m} exceeds the NC enumeration cap {max_order}")
    return [NoncrossingPartition(m, blocks) for blocks in _nc_blocks(m)]


@lru_cache(maxsize=None)
def _nc_blocks(m: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    # recursive: the block of 1 is {1} U S; the gaps between its elements and
    # the tail after its last element are partitioned independently
    if m == 0:
        return ((),)
    out = []
    for rest in itertools.combinations(range(2, m + 1), 0):
        pass
    universe = list(range(2, m + 1))
    for size in range(0, m):
        for comb in itertools.combinations(universe, size):
            first_block = (1,) + comb
            # gaps: (a_i, a_{i+1}) exclusive intervals, plus the tail after max
            pieces = []
            elems = list(first_block) + [m + 1]
            ok_pieces = []
            for a, b in zip(elems, elems[1:]):
                ok_pieces.append(list(range(a + 1, b)))
            # assemble noncrossing partitions of each gap independently
            gap_parts = []
            for gap in ok_pieces:
                k = len(gap)
                relabeled = []
                for blocks in _nc_blocks(k):
                    relabeled.append(tuple(tuple(gap[x - 1] for x in blk) for blk in blocks))
                gap_parts.append(relabeled)
            for chosen in itertools.product(*gap_parts):
                blocks = (first_block,) + tuple(blk for part in chosen for blk in part)
                out.append(_canonical_blocks(blocks))
    return tuple(out)


def catalan(m: int) -> int:
    c = 1
    for k in range(m):
        c = c * 2 * (2 * k + 1) // (k + 2)
    return c


def hat(gamma: Partition) -> Partition:
    """Doubling embedding: block (t1, ..., tq) becomes (2t1-1, 2t1, ..., 2tq-1, 2tq)."""
    blocks = []
    for b in _blocks_of(gamma):
        blocks.append(tuple(x for t in b for x in (2 * t - 1, 2 * t)))
    return Partition(2 * _ground_of(gamma), blocks)


# ---------------------------------------------------------------------------
# moment <-> free cumulant conversion (multivariate, on ordered words)
# ---------------------------------------------------------------------------

def _subword(word: tuple, block: tuple[int, ...]) -> tuple:
    return tuple(word[t - 1] for t in block)


def moments_to_free_cumulants(moment: Callable[[tuple], Fraction], word: tuple) -> Fraction:
    """Free cumulant kappa(word) from a mixed-moment functional.

    ``moment`` maps an ordered tuple of labels to its moment; it is consulted
    for every subword selected by a noncrossing block.  The recursion

        kappa_n(w) = m_n(w) - sum over gamma in NC(n), gamma != 1_n of
                     prod over blocks B of kappa_|B|(w[B])

    terminates because every proper noncrossing partition has blocks of size
    strictly less than n.
    """
    memo: dict[tuple, Fraction] = {}

    def kappa(w: tuple) -> Fraction:
        if w in memo:
            return memo[w]
        n = len(w)
        total = moment(w)
        if n > 1:
            for gamma in enumerate_nc(n):
                if len(gamma.blocks) == 1:
                    continue
                prod = Fraction(1)
                for b in gamma.blocks:
                    prod *= kappa(_subword(w, b))
                total -= prod
        memo[w] = total
        return total

    return kappa(tuple(word))


def free_cumulants_to_moments(cumulant: Callable[[tuple], Fraction], word: tuple) -> Fraction:
    """Mixed moment of ``word`` from a free-cumulant functional (NC sum)."""
    word = tuple(word)
    total = Fraction(0)
    for gamma in enumerate_nc(len(word)):
        prod = Fraction(1)
        for b in gamma.blocks:
            prod *= cumulant(_subword(word, b))
        total += prod
    return total
