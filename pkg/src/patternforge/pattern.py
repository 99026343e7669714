"""Algebraic patterns: categories with an inert-active factorization system
and a chosen family of elementary objects.

Conventions used throughout:

* A morphism factors as (active) after (inert): ``factorize`` returns
  ``(l, r)`` with ``l`` inert, ``r`` active, and ``m = r . l``.
* The elementary slice of an object X has as objects the inert morphisms
  X -> E into elementary objects and as morphisms the inert triangles
  between them.
* The active arrival category Act(O) has as objects the active morphisms
  Z -> O into O and as morphisms the isomorphisms over O.

Segal conditions compare a functor's value at X with the limit of its
values over the elementary slice of X; extendability compares Act(O) with
coherent sections of transported actives over the elementary slice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BudgetExceeded, BudgetMeter, CoherenceError
from .fincat import (FinCategory, FinFunctor, FinGroupoidView, LazyCompose,
                     UnionFind, ValidationReport, _Collector,
                     _position_tables, _Stop, is_initial_functor)
from .setfun import _families

import numpy as np


class Pattern:
    """A finite category with inert/active classes and elementary objects."""

    __slots__ = ("cat", "inert", "active", "elementary", "grade",
                 "grade_bound", "name", "_cache")

    def __init__(self, cat, inert, active, elementary, grade=None,
                 grade_bound=None, name=""):
        self.cat = cat
        self.inert = frozenset(inert)
        self.active = frozenset(active)
        self.elementary = tuple(sorted(elementary))
        self.grade = dict(grade) if grade is not None else None
        self.grade_bound = grade_bound
        self.name = name
        mor = set(cat.morphisms)
        if not self.inert <= mor or not self.active <= mor:
            raise ValueError("inert/active classes must consist of morphisms")
        if not set(self.elementary) <= set(cat.objects):
            raise ValueError("elementary objects must be objects")
        self._cache = {}

    def is_inert(self, m):
        return m in self.inert

    def is_active(self, m):
        return m in self.active

    def is_elementary(self, x):
        return x in set(self.elementary)

    def grade_of(self, x):
        if self.grade is None:
            raise ValueError("pattern carries no grading")
        return self.grade[x]

    def inerts_between(self, a, b):
        return tuple(m for m in self.cat.hom(a, b) if m in self.inert)

    def actives_between(self, a, b):
        return tuple(m for m in self.cat.hom(a, b) if m in self.active)

    def actives_into(self, O):
        key = ("act_into", O)
        got = self._cache.get(key)
        if got is None:
            got = tuple(m for z in self.cat.objects
                        for m in self.actives_between(z, O))
            self._cache[key] = got
        return got

    def inert_subcategory(self):
        """The wide subcategory on the inert morphisms."""
        got = self._cache.get("inert_subcat")
        if got is None:
            cat = self.cat
            mors = [(m, cat.src(m), cat.tgt(m)) for m in sorted(self.inert)]
            inert = self.inert
            table = {}
            by_tgt = {}
            for m, s, t in mors:
                by_tgt.setdefault(t, []).append(m)
            for g, s, t in mors:
                for f in by_tgt.get(s, ()):
                    table[(g, f)] = cat.compose[(g, f)]
            got = FinCategory(cat.objects, mors, cat.identities(), table)
            self._cache["inert_subcat"] = got
        return got

    def inert_inclusion(self):
        """The identity-on-objects inclusion of the inert subcategory."""
        sub = self.inert_subcategory()
        return FinFunctor(sub, self.cat, {x: x for x in sub.objects},
                          {m: m for m in sub.morphisms})


# --- validation ----------------------------------------------------------


def _compute_isos(cat):
    """Identify every invertible morphism at once, filling the iso cache."""
    got = getattr(cat, "_iso", None)
    key = "__all_isos__"
    # build from position tables for speed; falls back per-morphism if the
    # table is oversize
    isos = set()
    for x in cat.objects:
        isos.add(cat.identity_of(x))
    for (a, b), ms in cat.hom_blocks().items():
        back = cat.hom(b, a)
        if not back:
            continue
        ida, idb = cat.identity_of(a), cat.identity_of(b)
        for m in ms:
            if m in isos:
                continue
            for g in back:
                if (cat.compose.get((g, m)) == ida
                        and cat.compose.get((m, g)) == idb):
                    isos.add(m)
                    break
    return isos


def validate_pattern(p, max_violations=None):
    """Check the factorization-system and class axioms.

    Verified: both classes contain identities and all isomorphisms and are
    closed under composition; every morphism admits an inert-active
    factorization; inert and active are orthogonal (unique fillers), which
    also forces uniqueness of factorizations up to unique isomorphism.
    """
    v = _Collector(max_violations)
    cat = p.cat
    try:
        for x in cat.objects:
            i = cat.identity_of(x)
            if i not in p.inert:
                v.add("identity_not_inert", object=x)
            if i not in p.active:
                v.add("identity_not_active", object=x)
        isos = _compute_isos(cat)
        for m in sorted(isos):
            if m not in p.inert:
                v.add("iso_not_inert", morphism=m)
            if m not in p.active:
                v.add("iso_not_active", morphism=m)

        # composition closure, per class
        by_tgt_inert = {}
        by_tgt_active = {}
        for m in p.inert:
            by_tgt_inert.setdefault(cat.tgt(m), []).append(m)
        for m in p.active:
            by_tgt_active.setdefault(cat.tgt(m), []).append(m)
        for g in sorted(p.inert):
            for f in by_tgt_inert.get(cat.src(g), ()):
                if cat.compose[(g, f)] not in p.inert:
                    v.add("inert_not_closed", g=g, f=f)
        for g in sorted(p.active):
            for f in by_tgt_active.get(cat.src(g), ()):
                if cat.compose[(g, f)] not in p.active:
                    v.add("active_not_closed", g=g, f=f)

        # factorization existence: bucket all active-after-inert composites
        factored = set()
        by_src_active = {}
        for m in p.active:
            by_src_active.setdefault(cat.src(m), []).append(m)
        for l in sorted(p.inert):
            z = cat.tgt(l)
            for r in by_src_active.get(z, ()):
                factored.add(cat.compose[(r, l)])
        for m in cat.morphisms:
            if m not in factored:
                v.add("no_factorization", morphism=m)

        _check_orthogonality(p, v, isos)
    except _Stop:
        pass
    except BudgetExceeded as exc:
        v.items.append({"kind": "budget_exceeded", "detail": str(exc)})
    return ValidationReport(tuple(v.items))


def _composition_tables(cat):
    """Cached hom-position index and composite position arrays."""
    tables = getattr(cat, "_tables", None) if hasattr(cat, "_tables") else None
    # FinCategory has __slots__; keep the cache in a module-level dict keyed
    # by id to avoid touching its layout
    cache = _composition_tables._cache
    got = cache.get(id(cat))
    if got is not None and got[0] is cat:
        return got[1], got[2]
    v = _Collector(1)
    try:
        homs, positions, comp_arr, clean = _position_tables(cat, v)
    except _Stop:
        clean = False
    if not clean:
        raise CoherenceError("composition table has missing or ill-typed entries")
    cache[id(cat)] = (cat, positions, comp_arr)
    return positions, comp_arr


_composition_tables._cache = {}


def _check_orthogonality(p, v, isos):
    """Unique-filler condition for every (inert, active) pair.

    For i: a -> b inert and r: c -> d active, the map
    w |-> (w . i, r . w) from Hom(b, c) must be a bijection onto the pairs
    (u, v) with r . u = v . i. Pairs where i or r is invertible hold
    automatically and are skipped.
    """
    cat = p.cat
    positions, comp_arr = _composition_tables(cat)
    hom = cat.hom_blocks()
    inerts = [m for m in sorted(p.inert) if m not in isos]
    actives = [m for m in sorted(p.active) if m not in isos]
    for i in inerts:
        a, b = cat.src(i), cat.tgt(i)
        ip = positions[(a, b)][i]
        for r in actives:
            c, d = cat.src(r), cat.tgt(r)
            rp = positions[(c, d)][r]
            n_bc = len(hom.get((b, c), ()))
            n_ac = len(hom.get((a, c), ()))
            n_bd = len(hom.get((b, d), ()))
            n_ad = len(hom.get((a, d), ()))
            if n_bc:
                col_wi = comp_arr[(a, b, c)][:, ip].astype(np.int64)
                row_rw = comp_arr[(b, c, d)][rp, :].astype(np.int64)
                n_unique = len(np.unique(col_wi * max(1, n_bd) + row_rw))
            else:
                n_unique = 0
            if n_ac and n_bd:
                ru = comp_arr[(a, c, d)][rp, :]
                vi = comp_arr[(a, b, d)][:, ip]
                c1 = np.bincount(ru, minlength=n_ad)
                c2 = np.bincount(vi, minlength=n_ad)
                fiber = int(c1 @ c2)
            else:
                fiber = 0
            if n_unique != n_bc or fiber != n_bc:
                detail = _orthogonality_witness(p, i, r)
                v.add("orthogonality", i=i, r=r, fillers=n_bc,
                      distinct_images=n_unique, squares=fiber, **detail)


def _orthogonality_witness(p, i, r):
    """Slow, explicit witness extraction for a failing (i, r) pair."""
    cat = p.cat
    a, b = cat.src(i), cat.tgt(i)
    c, d = cat.src(r), cat.tgt(r)
    image = {}
    for w in cat.hom(b, c):
        key = (cat.comp(w, i), cat.comp(r, w))
        if key in image:
            return {"witness": {"duplicate_fillers": (image[key], w),
                                "square": key}}
        image[key] = w
    for u in cat.hom(a, c):
        ru = cat.comp(r, u)
        for vv in cat.hom(b, d):
            if cat.comp(vv, i) == ru and (u, vv) not in image:
                return {"witness": {"unfillable_square": (u, vv)}}
    return {}


# --- factorization -------------------------------------------------------


def factorize(p, m):
    """The canonical inert-active factorization (l, r) with m = r . l.

    Canonical means least (l, r) in lexicographic id order among all
    factorizations; any two are linked by a unique invertible morphism.
    """
    cache = p._cache.setdefault("factor", {})
    got = cache.get(m)
    if got is not None:
        return got
    cat = p.cat
    X, Y = cat.src(m), cat.tgt(m)
    for l in sorted(lm for z in cat.objects for lm in p.inerts_between(X, z)):
        z = cat.tgt(l)
        best = None
        for r in p.actives_between(z, Y):
            if cat.compose[(r, l)] == m:
                if best is None or r < best:
                    best = r
        if best is not None:
            cache[m] = (l, best)
            return l, best
    raise CoherenceError(f"morphism {m} admits no inert-active factorization")


def all_factorizations(p, m):
    """Every (l, r) with l inert, r active, m = r . l, sorted."""
    cat = p.cat
    X, Y = cat.src(m), cat.tgt(m)
    out = []
    for z in cat.objects:
        for l in p.inerts_between(X, z):
            for r in p.actives_between(z, Y):
                if cat.compose[(r, l)] == m:
                    out.append((l, r))
    out.sort()
    return tuple(out)


def factor_classes(p, m):
    """Factorizations of m grouped by connecting invertible morphisms.

    (l, r) and (l2, r2) fall in one group when some invertible morphism t
    between the middles satisfies t . l = l2 and r2 . t = r. A valid
    pattern yields exactly one group.
    """
    pairs = all_factorizations(p, m)
    cat = p.cat
    groups = []
    for pair in pairs:
        l, r = pair
        z = cat.tgt(l)
        placed = False
        for grp in groups:
            l2, r2 = grp[0]
            z2 = cat.tgt(l2)
            for t in cat.isos_between(z, z2):
                if cat.comp(t, l) == l2 and cat.comp(r2, t) == r:
                    grp.append(pair)
                    placed = True
                    break
            if placed:
                break
        if not placed:
            groups.append([pair])
    return tuple(tuple(g) for g in groups)


def inert_transport(p, active_m, inert_m):
    """Push an active morphism forward along an inert one out of its target.

    For psi: Z -> O active and e: O -> E inert, factor e . psi; returns
    (pushed_inert, transported_active)."""
    cat = p.cat
    if cat.src(inert_m) != cat.tgt(active_m):
        raise ValueError("inert morphism must start at the active target")
    if active_m not in p.active or inert_m not in p.inert:
        raise ValueError("arguments must be (active, inert)")
    return factorize(p, cat.comp(inert_m, active_m))


# --- elementary slices ---------------------------------------------------


@dataclass
class SliceCat:
    """The elementary slice of an object, as a fresh finite category.

    objects_data[i] is the underlying inert morphism X -> E_i; mor_data
    maps a slice morphism id to the underlying inert triangle edge.
    """
    cat: FinCategory
    objects_data: tuple
    mor_data: dict
    forget: FinFunctor
    index_of: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index_of = {alpha: i for i, alpha in enumerate(self.objects_data)}


def elementary_slice(p, X):
    key = ("el_slice", X)
    got = p._cache.get(key)
    if got is not None:
        return got
    cat = p.cat
    alphas = []
    for E in p.elementary:
        for alpha in p.inerts_between(X, E):
            alphas.append((E, alpha))
    alphas.sort()
    objs = [alpha for _, alpha in alphas]
    targets = [E for E, _ in alphas]
    mors = []
    for i, ai in enumerate(objs):
        for j, aj in enumerate(objs):
            for u in p.inerts_between(targets[i], targets[j]):
                if cat.compose[(u, ai)] == aj:
                    mors.append((i, j, u))
    mors.sort()
    mor_ids = {m: k for k, m in enumerate(mors)}
    identity = {}
    for i, E in enumerate(targets):
        identity[i] = mor_ids[(i, i, cat.identity_of(E))]
    table = {}
    by_tgt = {}
    for k, (i, j, u) in enumerate(mors):
        by_tgt.setdefault(j, []).append(k)
    for kg, (ig, jg, ug) in enumerate(mors):
        for kf in by_tgt.get(ig, ()):
            if_, jf, uf = mors[kf]
            table[(kg, kf)] = mor_ids[(if_, jg, cat.compose[(ug, uf)])]
    scat = FinCategory(range(len(objs)),
                       [(k, i, j) for k, (i, j, _) in enumerate(mors)],
                       identity, table)
    forget = FinFunctor(scat, cat, {i: targets[i] for i in range(len(objs))},
                        {k: u for k, (_, _, u) in enumerate(mors)})
    got = SliceCat(scat, tuple(objs), {k: u for k, (_, _, u) in enumerate(mors)},
                   forget)
    p._cache[key] = got
    return got


def slice_families(p, X, value_at, map_for, budget=None):
    """Compatible families over the elementary slice of X.

    value_at(i) lists candidates at slice object i; map_for(k) gives the
    transition dict for slice morphism k. Families come back as tuples
    aligned with slice object indices.
    """
    sl = elementary_slice(p, X)
    nodes = list(range(len(sl.objects_data)))
    meter = BudgetMeter(budget, "slice family search")
    constraints = []
    for k in range(len(sl.mor_data)):
        i, j = sl.cat.src(k), sl.cat.tgt(k)
        constraints.append((i, j, map_for(k)))
    return _families(nodes, value_at, constraints, meter)


# --- Segal conditions ----------------------------------------------------


@dataclass(frozen=True)
class SegalReport:
    ok: bool
    failures: tuple

    def summary(self):
        if self.ok:
            return "pass"
        lines = [f"{len(self.failures)} object(s) fail:"]
        for f in self.failures[:10]:
            lines.append("  " + ", ".join(f"{k}={f[k]}" for k in sorted(f)))
        return "\n".join(lines)


def segal_map(p, F, X):
    """The canonical comparison at X: element -> family over the slice."""
    sl = elementary_slice(p, X)
    out = {}
    for x in F.value(X):
        out[x] = tuple(F.apply(alpha, x) for alpha in sl.objects_data)
    return out


def segal_check(p, F, objects=None, budget=None):
    """Is F(X) -> lim over the elementary slice a bijection at each X?"""
    failures = []
    for X in (objects if objects is not None else p.cat.objects):
        sl = elementary_slice(p, X)
        fams = slice_families(
            p, X,
            lambda i: F.value(p.cat.tgt(sl.objects_data[i])),
            lambda k: F.map_dict(sl.mor_data[k]),
            budget)
        canon = segal_map(p, F, X)
        images = list(canon.values())
        ok = (len(set(images)) == len(images)
              and set(images) == set(fams))
        if not ok:
            failures.append({"object": X, "value_size": len(images),
                             "limit_size": len(fams),
                             "distinct_images": len(set(images))})
    return SegalReport(not failures, tuple(failures))


def graded_segal_check(p, GF, bound=None, objects=None, budget=None):
    """Segal comparison of a graded carrier, matched grade by grade.

    A family's grade is the sum of its components' grades. For each grade
    g <= bound the comparison must restrict to a bijection between
    grade-g elements and grade-g families; families beyond the bound are
    out of window and ignored.
    """
    if bound is None:
        bound = p.grade_bound
    if bound is None:
        raise ValueError("graded check needs a grade bound")
    failures = []
    for X in (objects if objects is not None else p.cat.objects):
        sl = elementary_slice(p, X)
        targets = [p.cat.tgt(a) for a in sl.objects_data]
        fams = slice_families(
            p, X,
            lambda i: GF.value(targets[i]),
            lambda k: GF.map_dict(sl.mor_data[k]),
            budget)

        def fam_grade(fam):
            return sum(GF.grade(targets[i], e) for i, e in enumerate(fam))

        fam_buckets = {}
        for fam in fams:
            g = fam_grade(fam)
            if g <= bound:
                fam_buckets.setdefault(g, set()).add(fam)
        val_buckets = {}
        image = {}
        grade_ok = True
        for x in GF.value(X):
            gx = GF.grade(X, x)
            fam = tuple(GF.apply(alpha, x) for alpha in sl.objects_data)
            image[x] = fam
            if fam_grade(fam) != gx:
                failures.append({"object": X, "element": x, "kind": "grade_drift",
                                 "element_grade": gx,
                                 "family_grade": fam_grade(fam)})
                grade_ok = False
                break
            val_buckets.setdefault(gx, []).append(x)
        if not grade_ok:
            continue
        for g in range(bound + 1):
            xs = val_buckets.get(g, [])
            fb = fam_buckets.get(g, set())
            imgs = [image[x] for x in xs]
            if len(set(imgs)) != len(imgs) or set(imgs) != fb:
                failures.append({"object": X, "grade": g, "kind": "bucket",
                                 "value_size": len(xs), "limit_size": len(fb)})
    return SegalReport(not failures, tuple(failures))


# --- saturation of representables ----------------------------------------


@dataclass(frozen=True)
class SaturationReport:
    ok: bool
    witness: dict | None

    def summary(self):
        if self.ok:
            return "pass"
        w = self.witness
        return (f"representable at {w['source']} fails at {w['object']}: "
                f"hom {w['value_size']} vs limit {w['limit_size']}")


def is_saturated(p, budget=None):
    """Do all covariant representables satisfy the Segal condition?"""
    cat = p.cat
    for X in cat.objects:
        for O in cat.objects:
            sl = elementary_slice(p, O)
            targets = [cat.tgt(a) for a in sl.objects_data]
            fams = slice_families(
                p, O,
                lambda i: cat.hom(X, targets[i]),
                lambda k: {f: cat.compose[(sl.mor_data[k], f)]
                           for f in cat.hom(X, targets[sl.cat.src(k)])},
                budget)
            images = []
            for f in cat.hom(X, O):
                images.append(tuple(cat.compose[(alpha, f)]
                                    for alpha in sl.objects_data))
            if len(set(images)) != len(images) or set(images) != set(fams):
                return SaturationReport(False, {
                    "source": X, "object": O, "value_size": len(images),
                    "limit_size": len(fams),
                    "distinct_images": len(set(images))})
    return SaturationReport(True, None)


# --- slimming ------------------------------------------------------------


def necessary_objects(p):
    """Objects admitting an active morphism to some elementary object."""
    cat = p.cat
    els = set(p.elementary)
    out = []
    for x in cat.objects:
        if any(m in p.active for E in els for m in cat.hom(x, E)):
            out.append(x)
    return tuple(out)


def is_slim(p):
    """True when every object admits an active map to an elementary one."""
    return set(necessary_objects(p)) == set(p.cat.objects)


def slim(p):
    """Restrict the pattern to its necessary objects.

    Returns (pattern, dropped_objects)."""
    keep = necessary_objects(p)
    dropped = tuple(x for x in p.cat.objects if x not in set(keep))
    sub = p.cat.full_subcategory(keep)
    mor = set(sub.morphisms)
    grade = ({x: p.grade[x] for x in keep} if p.grade is not None else None)
    q = Pattern(sub, p.inert & mor, p.active & mor,
                [e for e in p.elementary if e in set(keep)],
                grade=grade, grade_bound=p.grade_bound,
                name=(p.name + "-slim") if p.name else "slim")
    return q, dropped


# --- transported sections over the elementary slice ----------------------


@dataclass(frozen=True)
class Section:
    """A coherent family of actives over the elementary slice of an object.

    components[i] is an active morphism into the slice target E_i;
    transitions maps each slice morphism id to the connecting inert
    morphism between component sources."""
    obj: int
    components: tuple
    transitions: tuple  # sorted tuple of (slice_mor_id, morphism id)

    def transition(self, k):
        return dict(self.transitions)[k]


def _filler(p, i_mor, r_mor, u, v):
    """The unique w with w . i = u and r . w = v, if present.

    i inert, r active, and r . u = v . i is the given square."""
    cat = p.cat
    b = cat.tgt(i_mor)
    c = cat.src(r_mor)
    hits = [w for w in cat.hom(b, c)
            if cat.compose[(w, i_mor)] == u and cat.compose[(r_mor, w)] == v]
    if len(hits) != 1:
        raise CoherenceError(
            f"expected exactly one filler, found {len(hits)} "
            f"(i={i_mor}, r={r_mor})")
    return hits[0]


def section_grade(p, s):
    return sum(p.grade_of(p.cat.src(psi)) for psi in s.components)


def transport_section(p, psi):
    """Transport an active morphism into O to a section over the slice of O.

    Component i is the active part of (alpha_i . psi); transitions are the
    unique orthogonality fillers, which are checked to be inert."""
    cat = p.cat
    O = cat.tgt(psi)
    sl = elementary_slice(p, O)
    comps = []
    iotas = []
    for alpha in sl.objects_data:
        l, r = factorize(p, cat.comp(alpha, psi))
        iotas.append(l)
        comps.append(r)
    trans = []
    for k, u_t in sl.mor_data.items():
        i, j = sl.cat.src(k), sl.cat.tgt(k)
        w = _filler(p, iotas[i], comps[j], iotas[j],
                    cat.comp(u_t, comps[i]))
        if w not in p.inert:
            raise CoherenceError(
                f"transport transition {w} is not inert (object {O})")
        trans.append((k, w))
    return Section(O, tuple(comps), tuple(sorted(trans)))


def enumerate_sections(p, O, bound, budget=None):
    """All coherent sections over the elementary slice of O, total grade
    at most bound.

    Transitions must be inert, satisfy the over-triangle equation, send
    identity slice morphisms to identities, and compose strictly."""
    cat = p.cat
    sl = elementary_slice(p, O)
    n = len(sl.objects_data)
    meter = BudgetMeter(budget, "section enumeration")
    targets = [cat.tgt(a) for a in sl.objects_data]
    cands = []
    for i in range(n):
        opts = sorted(p.actives_into(targets[i]),
                      key=lambda m: (p.grade_of(cat.src(m)), m))
        cands.append([m for m in opts if p.grade_of(cat.src(m)) <= bound])
    nonid_mors = [k for k in range(len(sl.mor_data))
                  if not sl.cat.is_identity(k)]
    # composition relations among slice morphisms, for strictness
    relations = []
    for kg in range(len(sl.mor_data)):
        for kf in range(len(sl.mor_data)):
            if sl.cat.tgt(kf) == sl.cat.src(kg):
                relations.append((kg, kf, sl.cat.compose[(kg, kf)]))
    out = []
    comps = [None] * n

    def assign_transitions(idx, chosen):
        if idx == len(nonid_mors):
            full = dict(chosen)
            for k in range(len(sl.mor_data)):
                if k not in full:
                    full[k] = cat.identity_of(cat.src(comps[sl.cat.src(k)]))
            for kg, kf, kgf in relations:
                left = cat.compose.get((full[kg], full[kf]))
                if left != full[kgf]:
                    return
            out.append(Section(O, tuple(comps), tuple(sorted(full.items()))))
            return
        k = nonid_mors[idx]
        i, j = sl.cat.src(k), sl.cat.tgt(k)
        u_t = sl.mor_data[k]
        psi_i, psi_j = comps[i], comps[j]
        want = cat.comp(u_t, psi_i)
        for w in cat.hom(cat.src(psi_i), cat.src(psi_j)):
            meter.tick()
            if w in p.inert and cat.compose[(psi_j, w)] == want:
                chosen[k] = w
                assign_transitions(idx + 1, chosen)
                del chosen[k]

    def assign_components(i, used):
        if i == n:
            assign_transitions(0, {})
            return
        for psi in cands[i]:
            g = p.grade_of(cat.src(psi))
            if used + g > bound:
                continue
            meter.tick()
            comps[i] = psi
            assign_components(i + 1, used + g)
        comps[i] = None

    assign_components(0, 0)
    return tuple(out)


def section_isos(p, s1, s2, find_all=True, budget=None):
    """Families of invertible morphisms between two sections' components,
    compatible with both structures; returns the list (possibly empty)."""
    cat = p.cat
    if s1.obj != s2.obj:
        return []
    sl = elementary_slice(p, s1.obj)
    n = len(sl.objects_data)
    meter = BudgetMeter(budget, "section isomorphism search")
    t1 = dict(s1.transitions)
    t2 = dict(s2.transitions)
    per_index = []
    for i in range(n):
        z1, z2 = cat.src(s1.components[i]), cat.src(s2.components[i])
        opts = [t for t in cat.isos_between(z1, z2)
                if cat.compose[(s2.components[i], t)] == s1.components[i]]
        per_index.append(opts)
    results = []
    theta = [None] * n

    def extend(i):
        if i == n:
            results.append(tuple(theta))
            return
        for t in per_index[i]:
            meter.tick()
            theta[i] = t
            ok = True
            for k in range(len(sl.mor_data)):
                a, b = sl.cat.src(k), sl.cat.tgt(k)
                if max(a, b) != i and (theta[a] is None or theta[b] is None):
                    continue
                if theta[a] is None or theta[b] is None:
                    continue
                if cat.compose[(theta[b], t1[k])] != cat.compose[(t2[k], theta[a])]:
                    ok = False
                    break
            if ok:
                extend(i + 1)
                if results and not find_all:
                    return
        theta[i] = None

    extend(0)
    return results


def sections_equivalent(p, s1, s2, budget=None):
    return bool(section_isos(p, s1, s2, find_all=False, budget=budget))


# --- the elementary slice of an active morphism ---------------------------


@dataclass
class ActiveSliceResult:
    """Fibered elementary data of an active morphism phi: O -> O2.

    Objects pair an inert alpha: O2 -> E with an inert beta out of the
    middle of the factorization of alpha . phi. ``comparison`` lands in
    the elementary slice of O."""
    cat: FinCategory
    objects_data: tuple   # (alpha id, beta id) per object index
    comparison: FinFunctor


def elementary_slice_of_active(p, phi):
    if phi not in p.active:
        raise ValueError("morphism must be active")
    cat = p.cat
    O, O2 = cat.src(phi), cat.tgt(phi)
    sl2 = elementary_slice(p, O2)
    sl0 = elementary_slice(p, O)
    iota = []
    psi = []
    middles = []
    for alpha in sl2.objects_data:
        l, r = factorize(p, cat.comp(alpha, phi))
        iota.append(l)
        psi.append(r)
        middles.append(cat.tgt(l))
    inner = [elementary_slice(p, M) for M in middles]
    # h_g: middle connecting morphisms, one per slice morphism of O2
    h = {}
    for k, u_t in sl2.mor_data.items():
        i, j = sl2.cat.src(k), sl2.cat.tgt(k)
        w = _filler(p, iota[i], psi[j], iota[j], cat.comp(u_t, psi[i]))
        if w not in p.inert:
            raise CoherenceError("middle transition is not inert")
        h[k] = w
    objs = []
    for a in range(len(sl2.objects_data)):
        for beta in inner[a].objects_data:
            objs.append((a, beta))
    objs.sort()
    oindex = {o: i for i, o in enumerate(objs)}
    mors = []
    for k, u_t in sl2.mor_data.items():
        a, a2 = sl2.cat.src(k), sl2.cat.tgt(k)
        hg = h[k]
        for beta in inner[a].objects_data:
            Eb = cat.tgt(beta)
            for beta2 in inner[a2].objects_data:
                want = cat.comp(beta2, hg)
                for t in p.inerts_between(Eb, cat.tgt(beta2)):
                    if cat.compose[(t, beta)] == want:
                        mors.append((oindex[(a, beta)], oindex[(a2, beta2)],
                                     k, t))
    mors.sort()
    mindex = {m: q for q, m in enumerate(mors)}
    identity = {}
    for (a, beta), i in oindex.items():
        k_id = sl2.cat.identity_of(a)
        identity[i] = mindex[(i, i, k_id, cat.identity_of(cat.tgt(beta)))]
    table = {}
    by_tgt = {}
    for q, (i, j, k, t) in enumerate(mors):
        by_tgt.setdefault(j, []).append(q)
    try:
        for qg, (ig, jg, kg, tg) in enumerate(mors):
            for qf in by_tgt.get(ig, ()):
                if_, jf, kf, tf = mors[qf]
                key = (if_, jg, sl2.cat.compose[(kg, kf)],
                       cat.compose[(tg, tf)])
                table[(qg, qf)] = mindex[key]
    except KeyError as exc:
        raise CoherenceError(
            "fibered elementary data is not closed under composition; "
            "the pattern's factorization system is defective") from exc
    scat = FinCategory(range(len(objs)),
                       [(q, i, j) for q, (i, j, _, _) in enumerate(mors)],
                       identity, table)
    # comparison into the elementary slice of O
    try:
        cobj = {}
        for (a, beta), i in oindex.items():
            composite = cat.comp(beta, iota[a])
            cobj[i] = sl0.index_of[composite]
        cmor = {}
        sl0_lookup = {}
        for k0 in range(len(sl0.mor_data)):
            sl0_lookup[(sl0.cat.src(k0), sl0.cat.tgt(k0), sl0.mor_data[k0])] = k0
        for q, (i, j, k, t) in enumerate(mors):
            cmor[q] = sl0_lookup[(cobj[i], cobj[j], t)]
    except KeyError as exc:
        raise CoherenceError(
            "comparison into the elementary slice is ill-defined; "
            "the pattern's factorization system is defective") from exc
    comparison = FinFunctor(scat, sl0.cat, cobj, cmor)
    return ActiveSliceResult(scat, tuple((a, b) for a, b in objs), comparison)


# --- extendability --------------------------------------------------------


@dataclass(frozen=True)
class ExtendabilityReport:
    ok: bool
    failures: tuple
    boundary: tuple
    skipped: tuple
    checked_objects: int
    checked_actives: int

    def __bool__(self):
        return self.ok

    @property
    def disproved(self):
        return any(f["kind"] != "initiality_failed" for f in self.failures)

    def summary(self):
        if self.ok:
            note = ""
            if self.boundary:
                note = f" ({len(self.boundary)} class(es) beyond the grade window)"
            if self.skipped:
                note += f" ({len(self.skipped)} check(s) skipped on budget)"
            return "pass" + note
        kinds = sorted({f["kind"] for f in self.failures})
        return (f"fail: {len(self.failures)} failure(s) of kind {kinds}; "
                f"exact disproof: {self.disproved}")


def active_iso_classes(p, O):
    """Iso classes of Act(O): actives into O up to invertibles over O."""
    cat = p.cat
    objs = sorted(p.actives_into(O))
    uf = UnionFind(objs)
    for ix, psi1 in enumerate(objs):
        for psi2 in objs[ix + 1:]:
            z1, z2 = cat.src(psi1), cat.src(psi2)
            if any(cat.compose[(psi2, t)] == psi1
                   for t in cat.isos_between(z1, z2)):
                uf.union(psi1, psi2)
    return tuple(tuple(c) for c in uf.classes())


@dataclass(frozen=True)
class ActGroupoid:
    """Active arrivals at an object, organised as a groupoid.

    Slot i of objects_data is an active morphism into the base object;
    slot k of mor_data is (i, j, t) for an invertible t between the
    sources of slots i and j commuting with the two arrivals. The view
    exposes connected components (the arrival classes)."""
    base: int
    cat: FinCategory
    objects_data: tuple
    mor_data: tuple
    view: FinGroupoidView

    def arrival(self, i):
        return self.objects_data[i]

    def classes(self):
        """Arrival iso classes, as tuples of active morphism ids."""
        return tuple(tuple(self.objects_data[i] for i in comp)
                     for comp in self.view.components)


def active_groupoid(p, O, bound=None):
    """The groupoid of actives into O with invertibles over O between them.

    When the pattern is graded, arrivals from sources above the grade
    window are left out, matching the windows used by the free
    construction and the extendability checks."""
    cat = p.cat
    if bound is None:
        bound = p.grade_bound
    psis = sorted(p.actives_into(O))
    if p.grade is not None and bound is not None:
        psis = [m for m in psis if p.grade_of(cat.src(m)) <= bound]
    mors = []
    for i, psi1 in enumerate(psis):
        z1 = cat.src(psi1)
        for j, psi2 in enumerate(psis):
            z2 = cat.src(psi2)
            for t in cat.isos_between(z1, z2):
                if cat.compose[(psi2, t)] == psi1:
                    mors.append((i, j, t))
    mors.sort()
    mindex = {m: k for k, m in enumerate(mors)}
    identity = {i: mindex[(i, i, cat.identity_of(cat.src(psi)))]
                for i, psi in enumerate(psis)}
    by_src = {}
    by_tgt = {}
    for k, (i, j, _) in enumerate(mors):
        by_src.setdefault(i, []).append(k)
        by_tgt.setdefault(j, []).append(k)
    pair_count = sum(len(by_tgt.get(i, ())) * len(by_src.get(i, ()))
                    for i in range(len(psis)))

    def rule(kg, kf):
        ig, jg, tg = mors[kg]
        if_, jf, tf = mors[kf]
        return mindex[(if_, jg, cat.comp(tg, tf))]

    def pairs_iter():
        for kg, (ig, _, _) in enumerate(mors):
            for kf in by_tgt.get(ig, ()):
                yield (kg, kf)

    gcat = FinCategory(tuple(range(len(psis))),
                       [(k, i, j) for k, (i, j, _) in enumerate(mors)],
                       identity,
                       LazyCompose(rule, pair_count, pairs_iter))
    return ActGroupoid(O, gcat, tuple(psis), tuple(mors),
                       FinGroupoidView(gcat))


def _act_automorphisms(p, psi):
    cat = p.cat
    z = cat.src(psi)
    return tuple(t for t in cat.isos_between(z, z)
                 if cat.compose[(psi, t)] == psi)


def _section_automorphism_families(p, s, budget=None):
    return section_isos(p, s, s, find_all=True, budget=budget)


def _transported_iso_family(p, psi, theta, section):
    """Image of an Act-automorphism under transport: per-slice fillers."""
    cat = p.cat
    O = cat.tgt(psi)
    sl = elementary_slice(p, O)
    fam = []
    for i, alpha in enumerate(sl.objects_data):
        l, r = factorize(p, cat.comp(alpha, psi))
        w = _filler(p, l, r, cat.comp(l, theta), r)
        if not cat.is_iso(w):
            raise CoherenceError("transported automorphism is not invertible")
        fam.append(w)
    return tuple(fam)


def _check_object_sections(p, O, bound, failures, boundary, budget=None):
    classes = active_iso_classes(p, O)
    reps = [min(c) for c in classes]
    images = []
    for rep in reps:
        try:
            s = transport_section(p, rep)
        except CoherenceError as exc:
            failures.append({"kind": "transport_failed", "object": O,
                             "active": rep, "detail": str(exc)})
            return
        g = section_grade(p, s)
        if g > bound:
            boundary.append({"object": O, "active": rep, "section_grade": g})
        else:
            images.append((rep, s, g))
    # injectivity on iso classes
    for ix in range(len(images)):
        for jx in range(ix + 1, len(images)):
            if images[ix][2] != images[jx][2]:
                continue
            if sections_equivalent(p, images[ix][1], images[jx][1],
                                   budget=budget):
                failures.append({"kind": "sections_mismatch", "object": O,
                                 "detail": "two active classes transport to "
                                           "equivalent sections",
                                 "actives": (images[ix][0], images[jx][0])})
                return
    # essential surjectivity, grade by grade
    sections = enumerate_sections(p, O, bound, budget=budget)
    remaining = list(sections)
    section_classes = []
    while remaining:
        rep = remaining.pop(0)
        cls = [rep]
        rest = []
        for s in remaining:
            if (section_grade(p, s) == section_grade(p, rep)
                    and sections_equivalent(p, rep, s, budget=budget)):
                cls.append(s)
            else:
                rest.append(s)
        remaining = rest
        section_classes.append(cls)
    for cls in section_classes:
        rep = cls[0]
        if not any(section_grade(p, s) == section_grade(p, rep)
                   and sections_equivalent(p, s, rep, budget=budget)
                   for _, s, _ in images):
            failures.append({"kind": "sections_mismatch", "object": O,
                             "detail": "section class not reached by any "
                                       "active morphism",
                             "section_grade": section_grade(p, rep),
                             "components": rep.components})
            return
    # automorphism comparison on each reached class
    for rep, s, g in images:
        auts = _act_automorphisms(p, rep)
        transported = set()
        for theta in auts:
            transported.add(_transported_iso_family(p, rep, theta, s))
        section_auts = {tuple(fam) for fam in
                        _section_automorphism_families(p, s, budget=budget)}
        if len(transported) != len(auts) or transported != section_auts:
            failures.append({"kind": "automorphism_mismatch", "object": O,
                             "active": rep, "act_auts": len(auts),
                             "distinct_images": len(transported),
                             "section_auts": len(section_auts)})
            return


def is_extendable(p, bound=None, budget=None):
    """Decide extendability of the pattern within the grade window.

    Condition (1), exact: for every object O, transporting actives into O
    over the elementary slice is an equivalence onto coherent sections,
    grade bucket by grade bucket. Condition (2), sufficient form: for
    every active morphism, the comparison from its fibered elementary
    data to the elementary slice of its source leaves limits unchanged
    (checked via nonempty connected comma data). Failures of (2) alone
    are flagged 'initiality_failed' and are not an exact disproof.
    """
    if bound is None:
        bound = p.grade_bound
    if bound is None:
        raise ValueError("extendability needs a grade bound")
    failures = []
    boundary = []
    skipped = []
    n_obj = 0
    for O in p.cat.objects:
        try:
            _check_object_sections(p, O, bound, failures, boundary, budget)
            n_obj += 1
        except BudgetExceeded as exc:
            skipped.append({"stage": "sections", "object": O,
                            "detail": str(exc)})
    n_act = 0
    for phi in sorted(p.active):
        if p.cat.is_identity(phi):
            n_act += 1
            continue
        try:
            res = elementary_slice_of_active(p, phi)
            if not is_initial_functor(res.comparison):
                failures.append({"kind": "initiality_failed", "active": phi,
                                 "source": p.cat.src(phi),
                                 "target": p.cat.tgt(phi)})
            n_act += 1
        except BudgetExceeded as exc:
            skipped.append({"stage": "active_slice", "active": phi,
                            "detail": str(exc)})
        except CoherenceError as exc:
            failures.append({"kind": "transport_failed", "active": phi,
                             "detail": str(exc)})
    return ExtendabilityReport(not failures, tuple(failures), tuple(boundary),
                               tuple(skipped), n_obj, n_act)
