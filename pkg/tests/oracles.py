"""Independent brute-force oracles for expected values.

Everything here is computed from first principles by naive enumeration
and deliberately shares no logic with the package internals: word and
path counting, multiset orbits through a local union-find, based and
monotone map calculi with their own composition and class definitions,
factorization search, and span composition through pullbacks.
"""

import itertools
from collections import Counter


# --- free constructions over one generator shape ---------------------------

def count_words(alphabet_size, length):
    """Words of a given length over a finite alphabet."""
    return alphabet_size ** length


def all_words(letters, length):
    return list(itertools.product(letters, repeat=length))


def all_multisets(kinds, size):
    """Multisets of a given size, as sorted tuples."""
    return list(itertools.combinations_with_replacement(sorted(kinds),
                                                        size))


class IndependentUnionFind:
    """A from-scratch union-find, used to compute orbit counts without
    touching the package's own partition helpers."""

    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb

    def class_count(self):
        return len({self.find(x) for x in self.parent})

    def classes(self):
        out = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return sorted(tuple(sorted(v)) for v in out.values())


def word_orbit_count(letters, length):
    """Orbits of words under all letter-position swaps, via union-find.

    Adjacent transpositions generate the full symmetric group, so the
    classes are exactly the multisets."""
    words = all_words(letters, length)
    uf = IndependentUnionFind(words)
    for w in words:
        for i in range(length - 1):
            swapped = w[:i] + (w[i + 1], w[i]) + w[i + 2:]
            uf.union(w, swapped)
    return uf.class_count()


def count_paths(vertices, edges, length):
    """Directed paths with exactly ``length`` edges, all start points.

    ``edges`` maps labels to (source, target) pairs."""
    counts = {v: 1 for v in vertices}
    for _ in range(length):
        nxt = {v: 0 for v in vertices}
        for _label, (s, t) in edges.items():
            nxt[s] += counts[t]
        counts = nxt
    return sum(counts.values())


# --- based maps (the pointed-sets shape family) ----------------------------

def based_maps(m, n):
    """All maps of pointed sets {0..m} -> {0..n} fixing 0, as value
    tuples on 1..m."""
    return list(itertools.product(range(n + 1), repeat=m))


def based_compose(w, v):
    """w after v, both as value tuples (v into w's domain)."""
    return tuple(0 if x == 0 else w[x - 1] for x in v)


def based_is_inert(n, v):
    """Every nonbasepoint target has exactly one preimage."""
    cnt = Counter(x for x in v if x != 0)
    return all(cnt.get(j, 0) == 1 for j in range(1, n + 1))


def based_is_active(v):
    """Nothing collapses to the basepoint."""
    return 0 not in v


def based_count(bound):
    return sum((n + 1) ** m
               for m in range(bound + 1) for n in range(bound + 1))


# --- monotone maps (the simplex shape family) ------------------------------

def monotone_maps(n, m):
    """All order-preserving maps {0..n} -> {0..m}, as value tuples."""
    return list(itertools.combinations_with_replacement(range(m + 1),
                                                        n + 1))


def monotone_compose(d2, d1):
    """d2 after d1, as value tuples."""
    return tuple(d2[x] for x in d1)


def monotone_is_interval(d):
    """Successive values increase by exactly one."""
    return all(d[i + 1] == d[i] + 1 for i in range(len(d) - 1))


def monotone_is_endpoint_preserving(d, m):
    return d[0] == 0 and d[-1] == m


def monotone_count(bound):
    total = 0
    for m in range(bound + 1):
        for n in range(bound + 1):
            total += len(monotone_maps(n, m))
    return total


# --- factorization search --------------------------------------------------

def factorization_buckets(cat, inert, active):
    """All (first, second) decompositions with the first part inert and
    the second active, bucketed by composite, in one sweep."""
    buckets = {f: [] for f in cat.morphisms}
    for second, first in cat.composable_pairs():
        if first in inert and second in active:
            buckets[cat.comp(second, first)].append((first, second))
    return buckets


def factorizations_equivalent(cat, pair_a, pair_b):
    """Do two decompositions differ by an invertible reparametrization?"""
    l1, r1 = pair_a
    l2, r2 = pair_b
    mid1, mid2 = cat.tgt(l1), cat.tgt(l2)
    for theta in cat.isos_between(mid1, mid2):
        if cat.comp(theta, l1) == l2 and cat.comp(r2, theta) == r1:
            return True
    return False


# --- spans between finite index sets ---------------------------------------

def span_classes(m, n, size):
    """Spans from an m-element to an n-element index set with a middle
    of the given size, up to identification of middle elements: multisets
    of (left leg value, right leg value) pairs."""
    kinds = [(i, j) for i in range(1, m + 1) for j in range(1, n + 1)]
    return list(itertools.combinations_with_replacement(kinds, size))


def span_compose(s2, s1):
    """Pullback composition: middles pair off where the legs agree."""
    out = []
    for (i, j1), a in Counter(s1).items():
        for (j2, k), b in Counter(s2).items():
            if j1 == j2:
                out.extend([(i, k)] * (a * b))
    return tuple(sorted(out))


def span_count(m, n, size):
    return len(span_classes(m, n, size))
