"""Finite categories with explicit composition tables.

Objects and morphisms are integer ids. A category stores its source/target
maps, identity assignment, and a composition Mapping keyed by composable
pairs (g, f) with g after f. Hand-built categories use plain dicts; large
truncations install a rule-backed lazy table with identical behavior.

Bulk validation (identity and associativity laws over the whole table) runs
on integer numpy arrays so that desk-scale categories with a few hundred
thousand composable pairs stay inside interactive budgets.
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, CoherenceError

TRIPLE_BUDGET = 2_000_000_000
MATERIALIZE_BUDGET = 3_000_000
COMMA_BUDGET = 2_000_000


class UnionFind:
    """Classic disjoint-set forest over hashable keys."""

    def __init__(self, items=()):
        self.parent = {x: x for x in items}

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x

    def find(self, x):
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # deterministic: smaller key wins as root
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def classes(self):
        groups = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        return [sorted(v) for _, v in sorted(groups.items())]


class LazyCompose(Mapping):
    """Composition table backed by a rule, memoized per queried pair.

    Observationally a dict {(g, f): g∘f over composable pairs}; __len__ must
    be supplied by the builder and equal the number of composable pairs.
    """

    __slots__ = ("_rule", "_count", "_pairs", "_memo")

    def __init__(self, rule, pair_count, pairs_iter):
        self._rule = rule
        self._count = pair_count
        self._pairs = pairs_iter
        self._memo = {}

    def __getitem__(self, key):
        memo = self._memo
        got = memo.get(key)
        if got is None:
            g, f = key
            got = self._rule(g, f)  # raises KeyError when not composable
            memo[key] = got
        return got

    def raw(self, g, f):
        """Rule access without memoization, for bulk scans."""
        return self._rule(g, f)

    def __len__(self):
        return self._count

    def __iter__(self):
        return self._pairs()


class _SwappedCompose(Mapping):
    """View of a composition table with the pair order reversed (opposites)."""

    __slots__ = ("_base",)

    def __init__(self, base):
        self._base = base

    def __getitem__(self, key):
        g, f = key
        return self._base[(f, g)]

    def __len__(self):
        return len(self._base)

    def __iter__(self):
        return ((f, g) for (g, f) in self._base)


class FinCategory:
    """A finite category presented by ids and a composition table."""

    __slots__ = ("objects", "morphisms", "_src", "_tgt", "_identity", "compose",
                 "_hom", "_iso")

    def __init__(self, objects, morphisms, identity, compose):
        self.objects = tuple(sorted(objects))
        triples = sorted(morphisms)
        ids = [m for m, _, _ in triples]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate morphism ids")
        self.morphisms = tuple(ids)
        self._src = {m: s for m, s, _ in triples}
        self._tgt = {m: t for m, _, t in triples}
        self._identity = dict(identity)
        self.compose = compose if isinstance(compose, Mapping) else dict(compose)
        hom = {}
        for m, s, t in triples:
            hom.setdefault((s, t), []).append(m)
        self._hom = {k: tuple(v) for k, v in hom.items()}
        self._iso = {}

    # --- basic accessors -------------------------------------------------

    def src(self, m):
        return self._src[m]

    def tgt(self, m):
        return self._tgt[m]

    def identity_of(self, x):
        return self._identity[x]

    def identities(self):
        return dict(self._identity)

    def is_identity(self, m):
        s = self._src[m]
        return s == self._tgt[m] and self._identity.get(s) == m

    def hom(self, a, b):
        return self._hom.get((a, b), ())

    def hom_blocks(self):
        return self._hom

    def mor_triples(self):
        for m in self.morphisms:
            yield m, self._src[m], self._tgt[m]

    def comp(self, g, f):
        """g∘f, raising ValueError on non-composable or missing pairs."""
        if self._tgt[f] != self._src[g]:
            raise ValueError(f"morphisms not composable: tgt({f}) != src({g})")
        try:
            return self.compose[(g, f)]
        except KeyError as exc:
            raise ValueError(f"composite missing from table: ({g}, {f})") from exc

    def composable_pairs(self):
        """Iterate (g, f) pairs derived from hom blocks, not the raw Mapping."""
        hom = self._hom
        for (a, b), fs in hom.items():
            for c in self.objects:
                gs = hom.get((b, c))
                if gs:
                    for g in gs:
                        for f in fs:
                            yield g, f

    def pair_count(self):
        total = 0
        outgoing = {}
        for (a, b), fs in self._hom.items():
            outgoing.setdefault(a, 0)
            outgoing[a] += len(fs)
        for (a, b), fs in self._hom.items():
            total += len(fs) * outgoing.get(b, 0)
        return total

    def triple_count(self):
        total = 0
        outgoing = {}
        for (b, c), gs in self._hom.items():
            outgoing.setdefault(b, 0)
            outgoing[b] += len(gs)
        for (a, b), fs in self._hom.items():
            for c in self.objects:
                gs = self._hom.get((b, c))
                if gs:
                    total += len(fs) * len(gs) * outgoing.get(c, 0)
        return total

    # --- isomorphisms ----------------------------------------------------

    def inverse(self, m):
        """Inverse morphism id, or None; result is cached."""
        if m in self._iso:
            return self._iso[m]
        a, b = self._src[m], self._tgt[m]
        inv = None
        ida, idb = self._identity[a], self._identity[b]
        for g in self.hom(b, a):
            if self.compose.get((g, m)) == ida and self.compose.get((m, g)) == idb:
                inv = g
                break
        self._iso[m] = inv
        if inv is not None:
            self._iso[inv] = m
        return inv

    def set_inverse_table(self, table):
        """Install a complete morphism -> inverse-or-None table.

        Builders with closed-form isomorphisms use this to avoid the
        quadratic hom-block scans of on-demand inverse search; entries
        are trusted."""
        self._iso = dict(table)

    def is_iso(self, m):
        return self.inverse(m) is not None

    def isos_between(self, a, b):
        return tuple(m for m in self.hom(a, b) if self.is_iso(m))

    def object_iso_classes(self):
        uf = UnionFind(self.objects)
        for (a, b), ms in self._hom.items():
            if a == b:
                continue
            if any(self.is_iso(m) for m in ms):
                uf.union(a, b)
        return uf.classes()

    def is_skeletal(self):
        return all(len(c) == 1 for c in self.object_iso_classes())

    # --- derived categories ----------------------------------------------

    def opposite(self):
        mors = [(m, self._tgt[m], self._src[m]) for m in self.morphisms]
        return FinCategory(self.objects, mors, self._identity,
                           _SwappedCompose(self.compose))

    def full_subcategory(self, objs):
        keep = set(objs)
        if not keep <= set(self.objects):
            raise ValueError("subcategory objects must exist")
        mors = [(m, s, t) for m, s, t in self.mor_triples()
                if s in keep and t in keep]
        ident = {x: self._identity[x] for x in sorted(keep)}
        sub_hom = {}
        for m, s, t in mors:
            sub_hom.setdefault((s, t), []).append(m)

        def pairs():
            for (a, b), fs in sub_hom.items():
                for c in sorted(keep):
                    gs = sub_hom.get((b, c))
                    if gs:
                        for g in gs:
                            for f in fs:
                                yield g, f

        count = 0
        out = {}
        for (a, b), fs in sub_hom.items():
            out.setdefault(a, 0)
            out[a] += len(fs)
        for (a, b), fs in sub_hom.items():
            count += len(fs) * out.get(b, 0)
        parent = self.compose
        table = LazyCompose(lambda g, f: parent[(g, f)], count, pairs)
        return FinCategory(sorted(keep), mors, ident, table)

    def materialized(self, budget=MATERIALIZE_BUDGET):
        """Same category with a plain dict table (refuses oversize tables)."""
        n = self.pair_count()
        if n > budget:
            raise BudgetExceeded(
                f"cannot materialize {n} composable pairs (budget {budget})")
        table = {(g, f): self.compose[(g, f)] for g, f in self.composable_pairs()}
        mors = list(self.mor_triples())
        return FinCategory(self.objects, mors, self._identity, table)

    def presentation(self, budget=MATERIALIZE_BUDGET):
        """Canonical nested tuples for structural equality of small categories."""
        n = self.pair_count()
        if n > budget:
            raise BudgetExceeded("presentation of oversize category refused")
        table = tuple(sorted((g, f, self.compose[(g, f)])
                             for g, f in self.composable_pairs()))
        return (self.objects, tuple(self.mor_triples()),
                tuple(sorted(self._identity.items())), table)


class FinFunctor:
    """A functor presented by its object and morphism assignments."""

    __slots__ = ("source", "target", "obj_map", "mor_map")

    def __init__(self, source, target, obj_map, mor_map):
        self.source = source
        self.target = target
        self.obj_map = dict(obj_map)
        self.mor_map = dict(mor_map)

    def obj(self, a):
        return self.obj_map[a]

    def mor(self, m):
        return self.mor_map[m]

    def opposite(self):
        return FinFunctor(self.source.opposite(), self.target.opposite(),
                          self.obj_map, self.mor_map)

    @staticmethod
    def identity(c):
        return FinFunctor(c, c, {x: x for x in c.objects},
                          {m: m for m in c.morphisms})


def compose_functors(F, G):
    """F after G."""
    if G.target is not F.source:
        # structural, not identity-based, compatibility
        if G.target.objects != F.source.objects or G.target.morphisms != F.source.morphisms:
            raise ValueError("functors not composable")
    return FinFunctor(G.source, F.target,
                      {a: F.obj_map[G.obj_map[a]] for a in G.source.objects},
                      {m: F.mor_map[G.mor_map[m]] for m in G.source.morphisms})


# --- validation ----------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def passed(self):
        return not self.violations

    def summary(self):
        if self.passed:
            return "pass"
        lines = [f"{len(self.violations)} violation(s):"]
        for v in self.violations[:20]:
            lines.append("  " + ", ".join(f"{k}={v[k]}" for k in sorted(v)))
        if len(self.violations) > 20:
            lines.append(f"  ... and {len(self.violations) - 20} more")
        return "\n".join(lines)


class _Stop(Exception):
    pass


class _Collector:
    def __init__(self, max_violations):
        self.max = max_violations
        self.items = []

    def add(self, kind, **data):
        data["kind"] = kind
        self.items.append(data)
        if self.max is not None and len(self.items) >= self.max:
            raise _Stop()

    def report(self):
        return ValidationReport(tuple(self.items))


def _structure_ok(c, v):
    ok = True
    objset = set(c.objects)
    for m, s, t in c.mor_triples():
        if s not in objset or t not in objset:
            v.add("morphism_endpoints", morphism=m, src=s, tgt=t)
            ok = False
    morset = set(c.morphisms)
    for x in c.objects:
        i = c.identities().get(x)
        if i is None or i not in morset:
            v.add("identity_missing", object=x)
            ok = False
        elif not (c.src(i) == x and c.tgt(i) == x):
            v.add("identity_endpoints", object=x, morphism=i)
            ok = False
    for x in c.identities():
        if x not in objset:
            v.add("identity_extra_object", object=x)
            ok = False
    return ok


def _position_tables(c, v):
    """Hom position indices plus per-(a,b,c) composite position arrays.

    Returns (homs, positions, comp_arr) or None when the table itself has
    missing or ill-typed entries (associativity is then meaningless).
    """
    homs = c.hom_blocks()
    positions = {key: {m: i for i, m in enumerate(ms)} for key, ms in homs.items()}
    comp_arr = {}
    table = c.compose
    if isinstance(table, LazyCompose):
        def lookup(key):
            try:
                return table.raw(*key)
            except KeyError:
                return None
    else:
        lookup = table.get
    clean = True
    for (a, b), fs in homs.items():
        for (b2, cc), gs in homs.items():
            if b2 != b:
                continue
            pos_ac = positions.get((a, cc))
            arr = np.empty((len(gs), len(fs)), dtype=np.int32)
            for i, g in enumerate(gs):
                row = arr[i]
                for j, f in enumerate(fs):
                    got = lookup((g, f))
                    if got is None:
                        v.add("composite_missing", g=g, f=f)
                        clean = False
                        row[j] = -1
                        continue
                    p = pos_ac.get(got) if pos_ac else None
                    if p is None:
                        v.add("composite_endpoints", g=g, f=f, got=got)
                        clean = False
                        row[j] = -1
                    else:
                        row[j] = p
            comp_arr[(a, b, cc)] = arr
    return homs, positions, comp_arr, clean


def validate_category(c, max_violations=None, triple_budget=TRIPLE_BUDGET):
    """Check the category laws; the report names offending ids."""
    v = _Collector(max_violations)
    try:
        if not _structure_ok(c, v):
            return v.report()

        expected_pairs = c.pair_count()
        try:
            actual = len(c.compose)
        except TypeError:
            actual = None
        if actual is not None and actual != expected_pairs:
            v.add("compose_domain_size", expected=expected_pairs, actual=actual)

        homs, positions, comp_arr, clean = _position_tables(c, v)

        # identity laws, with direct witnesses
        table = c.compose
        for m, a, b in c.mor_triples():
            ida, idb = c.identity_of(a), c.identity_of(b)
            if table.get((m, ida)) != m:
                v.add("right_identity", morphism=m, identity=ida,
                      got=table.get((m, ida)))
            if table.get((idb, m)) != m:
                v.add("left_identity", morphism=m, identity=idb,
                      got=table.get((idb, m)))

        if not clean:
            return v.report()

        total = c.triple_count()
        if total > triple_budget:
            raise BudgetExceeded(
                f"associativity scan over {total} triples exceeds budget")

        chunk_elems = 4_000_000
        objs = c.objects
        for a, b in ((x, y) for x in objs for y in objs):
            X_key = None
            fs = homs.get((a, b))
            if not fs:
                continue
            n1 = len(fs)
            for cc in objs:
                gs = homs.get((b, cc))
                if not gs:
                    continue
                n2 = len(gs)
                X = comp_arr[(a, b, cc)]  # (n2, n1) positions in hom(a, cc)
                Xr = X.ravel()
                for d in objs:
                    hs = homs.get((cc, d))
                    if not hs:
                        continue
                    n3 = len(hs)
                    Cacd = comp_arr[(a, cc, d)]   # (n3, n_ac)
                    Cbcd = comp_arr[(b, cc, d)]   # (n3, n2)
                    Cabd = comp_arr[(a, b, d)]    # (n_bd, n1)
                    step = max(1, chunk_elems // max(1, n2 * n1))
                    for lo in range(0, n3, step):
                        hi = min(n3, lo + step)
                        lhs = Cacd[lo:hi][:, Xr].reshape(hi - lo, n2, n1)
                        rhs = Cabd[Cbcd[lo:hi].ravel(), :].reshape(hi - lo, n2, n1)
                        if not np.array_equal(lhs, rhs):
                            bad = np.argwhere(lhs != rhs)[0]
                            i3, i2, i1 = int(bad[0]) + lo, int(bad[1]), int(bad[2])
                            v.add("associativity", h=hs[i3], g=gs[i2], f=fs[i1])
    except _Stop:
        pass
    return v.report()


def validate_functor(F, max_violations=None):
    """Check that a FinFunctor preserves endpoints, identities, composition."""
    v = _Collector(max_violations)
    A, B = F.source, F.target
    try:
        for a in A.objects:
            if F.obj_map.get(a) not in set(B.objects):
                v.add("object_image", object=a, got=F.obj_map.get(a))
        morB = set(B.morphisms)
        for m, s, t in A.mor_triples():
            fm = F.mor_map.get(m)
            if fm not in morB:
                v.add("morphism_image", morphism=m, got=fm)
                continue
            if B.src(fm) != F.obj_map.get(s) or B.tgt(fm) != F.obj_map.get(t):
                v.add("endpoint_mismatch", morphism=m, image=fm)
        for a in A.objects:
            if F.mor_map.get(A.identity_of(a)) != B.identity_of(F.obj_map[a]):
                v.add("identity_not_preserved", object=a)
        for g, f in A.composable_pairs():
            left = F.mor_map.get(A.compose[(g, f)])
            right = B.compose.get((F.mor_map.get(g), F.mor_map.get(f)))
            if left != right or left is None:
                v.add("composition_not_preserved", g=g, f=f,
                      image_of_composite=left, composite_of_images=right)
    except _Stop:
        pass
    return v.report()


# --- comma categories and (co)finality -----------------------------------


@dataclass
class CommaCategory:
    """Comma category F ↓ G with projections to both feet."""
    cat: FinCategory
    objs: tuple          # slot i holds (a, b, phi)
    mors: tuple          # slot j holds (src_obj_index, tgt_obj_index, u, v)
    left: FinFunctor
    right: FinFunctor


def build_comma(F, G, budget=COMMA_BUDGET):
    """Objects (a, b, phi: F a -> G b); morphisms component pairs (u, v)."""
    A, B, C = F.source, G.source, F.target
    objs = []
    for a in A.objects:
        for b in B.objects:
            for phi in C.hom(F.obj(a), G.obj(b)):
                objs.append((a, b, phi))
    objs.sort()
    index = {o: i for i, o in enumerate(objs)}
    if len(objs) * (len(A.morphisms) + 1) * (len(B.morphisms) + 1) > budget:
        raise BudgetExceeded("comma category too large to enumerate")
    mors = []
    for (a, b, phi) in objs:
        i = index[(a, b, phi)]
        for u in A.morphisms:
            if A.src(u) != a:
                continue
            fu = F.mor(u)
            for v in B.morphisms:
                if B.src(v) != b:
                    continue
                left_leg = C.comp(G.mor(v), phi)
                # phi' with phi' ∘ F(u) = G(v) ∘ phi
                for phi2 in C.hom(F.obj(A.tgt(u)), G.obj(B.tgt(v))):
                    if C.comp(phi2, fu) == left_leg:
                        j = index[(A.tgt(u), B.tgt(v), phi2)]
                        mors.append((i, j, u, v))
    mors.sort()
    mor_index = {m: k for k, m in enumerate(mors)}
    identity = {}
    for (a, b, phi), i in index.items():
        identity[i] = mor_index[(i, i, A.identity_of(a), B.identity_of(b))]
    table = {}
    by_tgt = {}
    for k, (i, j, u, v) in enumerate(mors):
        by_tgt.setdefault(j, []).append(k)
    for kg, (ig, jg, ug, vg) in enumerate(mors):
        for kf in by_tgt.get(ig, ()):
            if_, jf, uf, vf = mors[kf]
            key = (if_, jg, A.comp(ug, uf), B.comp(vg, vf))
            table[(kg, kf)] = mor_index[key]
    cat = FinCategory(range(len(objs)),
                      [(k, i, j) for k, (i, j, _, _) in enumerate(mors)],
                      identity, table)
    left = FinFunctor(cat, A, {i: o[0] for o, i in index.items()},
                      {k: u for k, (_, _, u, _) in enumerate(mors)})
    right = FinFunctor(cat, B, {i: o[1] for o, i in index.items()},
                       {k: vv for k, (_, _, _, vv) in enumerate(mors)})
    return CommaCategory(cat, tuple(objs),
                         tuple((i, j, u, v) for i, j, u, v in mors), left, right)


def _comma_to_object_components(F, b):
    """Nonempty/connected data for the comma (F ↓ b), without materializing it."""
    A, B = F.source, F.target
    nodes = []
    for a in A.objects:
        for phi in B.hom(F.obj(a), b):
            nodes.append((a, phi))
    if not nodes:
        return 0
    uf = UnionFind(nodes)
    for u in A.morphisms:
        a, a2 = A.src(u), A.tgt(u)
        fu = F.mor(u)
        for phi2 in B.hom(F.obj(a2), b):
            uf.union((a, B.comp(phi2, fu)), (a2, phi2))
    return len(uf.classes())


def is_initial_functor(F):
    """True when every comma (F ↓ b) is nonempty and connected.

    This is the condition under which limits restrict along F.
    """
    return all(_comma_to_object_components(F, b) == 1 for b in F.target.objects)


def is_final_functor(F):
    """True when every comma (b ↓ F) is nonempty and connected (colimits restrict)."""
    return is_initial_functor(F.opposite())


def is_equivalence(F):
    """Essentially surjective plus fully faithful, by exhaustive check."""
    A, B = F.source, F.target
    image = {F.obj(a) for a in A.objects}
    for d in B.objects:
        if d in image:
            continue
        if not any(B.isos_between(d, c) for c in image):
            return False
    for a in A.objects:
        for a2 in A.objects:
            dom = A.hom(a, a2)
            cod = B.hom(F.obj(a), F.obj(a2))
            images = [F.mor(m) for m in dom]
            if len(set(images)) != len(images):
                return False
            if set(images) != set(cod):
                return False
    return True


# --- products and pullbacks ----------------------------------------------


@dataclass
class CombineResult:
    cat: FinCategory
    obj_pairs: tuple     # slot i -> (a, b)
    mor_pairs: tuple     # slot k -> (u, v)
    proj_left: FinFunctor
    proj_right: FinFunctor


def _pairs_category(A, B, keep_obj, keep_mor):
    objs = [(a, b) for a in A.objects for b in B.objects if keep_obj(a, b)]
    objs.sort()
    oindex = {p: i for i, p in enumerate(objs)}
    mors = []
    for u in A.morphisms:
        for v in B.morphisms:
            if keep_mor(u, v):
                mors.append((oindex[(A.src(u), B.src(v))],
                             oindex[(A.tgt(u), B.tgt(v))], u, v))
    mors.sort()
    mindex = {m: k for k, m in enumerate(mors)}
    identity = {i: mindex[(i, i, A.identity_of(a), B.identity_of(b))]
                for (a, b), i in oindex.items()}

    def rule(kg, kf):
        ig, jg, ug, vg = mors[kg]
        if_, jf, uf, vf = mors[kf]
        if jf != ig:
            raise KeyError((kg, kf))
        return mindex[(if_, jg, A.comp(ug, uf), B.comp(vg, vf))]

    by_src = {}
    by_tgt = {}
    for k, (i, j, _, _) in enumerate(mors):
        by_src.setdefault(i, []).append(k)
        by_tgt.setdefault(j, []).append(k)

    def pairs():
        for k, (i, j, _, _) in enumerate(mors):
            for kf in by_tgt.get(i, ()):
                yield k, kf

    count = sum(len(by_tgt.get(i, ())) for k, (i, _, _, _) in enumerate(mors))
    table = LazyCompose(rule, count, pairs)
    cat = FinCategory(range(len(objs)),
                      [(k, i, j) for k, (i, j, _, _) in enumerate(mors)],
                      identity, table)
    left = FinFunctor(cat, A, {i: p[0] for p, i in oindex.items()},
                      {k: u for k, (_, _, u, _) in enumerate(mors)})
    right = FinFunctor(cat, B, {i: p[1] for p, i in oindex.items()},
                       {k: v for k, (_, _, _, v) in enumerate(mors)})
    return CombineResult(cat, tuple(objs), tuple((u, v) for _, _, u, v in mors),
                         left, right)


def product_category(A, B):
    return _pairs_category(A, B, lambda a, b: True, lambda u, v: True)


def pullback_category(F, G):
    """Strict pullback of F: A -> C against G: B -> C.

    Both feet (and the base) must be skeletal; strictify first otherwise,
    since the strict pullback of non-skeletal presentations is not invariant.
    """
    A, B = F.source, G.source
    for name, cat in (("left", A), ("right", B), ("base", F.target)):
        if not cat.is_skeletal():
            raise ValueError(
                f"pullback requires skeletal categories; {name} foot is not "
                "(apply skeletalize first)")
    return _pairs_category(
        A, B,
        lambda a, b: F.obj(a) == G.obj(b),
        lambda u, v: F.mor(u) == G.mor(v))


def combine(mode, *args):
    """mode 'product': combine(A, B). mode 'pullback': combine(F, G) over a cospan."""
    if mode == "product":
        return product_category(*args)
    if mode == "pullback":
        return pullback_category(*args)
    raise ValueError(f"unknown combine mode: {mode!r}")


# --- groupoids and skeleta -----------------------------------------------


@dataclass
class FinGroupoidView:
    """A category all of whose morphisms are invertible, with its component
    partition cached at construction."""
    cat: FinCategory
    components: tuple = field(default=())

    def __post_init__(self):
        for m in self.cat.morphisms:
            if not self.cat.is_iso(m):
                raise CoherenceError(f"morphism {m} is not invertible")
        uf = UnionFind(self.cat.objects)
        for m, s, t in self.cat.mor_triples():
            uf.union(s, t)
        self.components = tuple(frozenset(c) for c in uf.classes())

    def component_of(self, obj):
        for comp in self.components:
            if obj in comp:
                return comp
        raise KeyError(obj)


@dataclass
class SkeletalizeResult:
    cat: FinCategory
    rep_of: dict          # object -> chosen representative
    functor: FinFunctor   # retraction onto the skeleton


def skeletalize(c):
    """Min-id representative per object iso class, with the retraction functor."""
    rep_of = {}
    chosen_iso = {}
    for cls in c.object_iso_classes():
        rep = min(cls)
        for x in cls:
            rep_of[x] = rep
            if x == rep:
                chosen_iso[x] = c.identity_of(x)
            else:
                chosen_iso[x] = min(c.isos_between(x, rep))
    skel = c.full_subcategory(sorted(set(rep_of.values())))
    mor_map = {}
    for m, a, b in c.mor_triples():
        ia = chosen_iso[a]
        ib = chosen_iso[b]
        inv_ia = c.inverse(ia)
        mor_map[m] = c.comp(ib, c.comp(m, inv_ia))
    functor = FinFunctor(c, skel, rep_of, mor_map)
    return SkeletalizeResult(skel, rep_of, functor)
