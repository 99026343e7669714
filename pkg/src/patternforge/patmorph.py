"""Morphisms between algebraic patterns and their transport properties.

A morphism is a functor between the underlying categories that sends
inert to inert, active to active, and elementary objects to elementary
objects. On top of validation this module decides:

- whether restriction along the morphism preserves the Segal condition
  (``is_strong_segal``, with ``is_segal_on`` as a witness-based check);
- whether inert and active morphisms lift uniquely through it;
- right extension of Segal carriers (``rke_segal``);
- extendability of the morphism itself: unique inert lifting, finality
  of the comparison into the transport pseudo-limit, and initiality of
  the fibered elementary data of every departing active morphism; and
- left extension of Segal carriers (``lke_segal``) over arrival
  categories, computed by zigzag classes without materializing them.

Pullbacks of cospans of morphisms and isomorphism testing between
patterns round out the toolkit.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BudgetExceeded, BudgetMeter, CoherenceError, GradeOverflow
from .fincat import (FinCategory, FinFunctor, UnionFind, ValidationReport,
                     _Collector, _Stop, compose_functors, is_final_functor,
                     is_initial_functor, pullback_category, validate_functor)
from .pattern import (ActiveSliceResult, ExtendabilityReport, Pattern,
                      SegalReport, _filler, elementary_slice, factorize,
                      graded_segal_check, segal_check, slice_families)
from .setfun import (GradedSetFunctor, SetFunctor, kan_extend, restrict_along)


class PatternMorphism:
    """A functor between pattern categories respecting both structures."""

    __slots__ = ("source", "target", "functor", "name", "_cache")

    def __init__(self, source, target, functor, name=""):
        self.source = source
        self.target = target
        self.functor = functor
        self.name = name
        self._cache = {}

    def obj(self, x):
        return self.functor.obj(x)

    def mor(self, m):
        return self.functor.mor(m)

    def __repr__(self):
        label = self.name or "morphism"
        return (f"PatternMorphism({label}: {self.source.name or 'source'}"
                f" -> {self.target.name or 'target'})")


def identity_morphism(p, target=None):
    """The identity functor as a morphism p -> target (default p -> p).

    Useful for comparing two pattern structures on one category, such as
    a single-elementary flavor against its all-cells refinement."""
    q = p if target is None else target
    if q.cat.objects != p.cat.objects or q.cat.morphisms != p.cat.morphisms:
        raise ValueError("identity morphism needs both patterns on one category")
    return PatternMorphism(p, q, FinFunctor.identity(p.cat),
                           name=f"id[{p.name or 'pattern'}]")


def compose_morphisms(m2, m1):
    """m2 after m1."""
    return PatternMorphism(m1.source, m2.target,
                           compose_functors(m2.functor, m1.functor),
                           name=f"{m2.name or 'outer'}.{m1.name or 'inner'}")


def inert_pattern_inclusion(p):
    """The inert part of a pattern, included back into it.

    The source carries the pattern structure in which every morphism is
    inert and only the invertibles are active; its elementary objects
    are those of p. Left extension along this inclusion is the free
    construction."""
    sub = p.inert_subcategory()
    isos = frozenset(m for m in sub.morphisms if sub.is_iso(m))
    src = Pattern(sub, frozenset(sub.morphisms), isos, p.elementary,
                  grade=p.grade, grade_bound=p.grade_bound,
                  name=(p.name + "-inert") if p.name else "inert-part")
    return PatternMorphism(src, p, p.inert_inclusion(),
                           name=f"inert-inclusion[{p.name or 'pattern'}]")


def point_inclusion(p, X):
    """The one-object, identity-only pattern at X, included into p."""
    cat = p.cat
    idm = cat.identity_of(X)
    sub = FinCategory((X,), [(idm, X, X)], {X: idm}, {(idm, idm): idm})
    els = (X,) if X in set(p.elementary) else ()
    grade = {X: p.grade[X]} if p.grade is not None else None
    src = Pattern(sub, frozenset([idm]), frozenset([idm]), els,
                  grade=grade, grade_bound=p.grade_bound,
                  name=f"point[{X}]")
    fun = FinFunctor(sub, cat, {X: X}, {idm: idm})
    return PatternMorphism(src, p, fun, name=f"point-inclusion[{X}]")


def validate_morphism(m, max_violations=None):
    """Check functoriality plus preservation of both classes and of
    elementary objects."""
    v = _Collector(max_violations)
    p, q = m.source, m.target
    try:
        if (m.functor.source.objects != p.cat.objects
                or m.functor.source.morphisms != p.cat.morphisms):
            v.add("source_mismatch")
        if (m.functor.target.objects != q.cat.objects
                or m.functor.target.morphisms != q.cat.morphisms):
            v.add("target_mismatch")
        for item in validate_functor(m.functor, max_violations).violations:
            v.add("functor_" + item["kind"],
                  **{k: x for k, x in item.items() if k != "kind"})
            if max_violations is not None and len(v.items) >= max_violations:
                raise _Stop()
        for i in sorted(p.inert):
            if m.mor(i) not in q.inert:
                v.add("inert_not_preserved", morphism=i, image=m.mor(i))
        for a in sorted(p.active):
            if m.mor(a) not in q.active:
                v.add("active_not_preserved", morphism=a, image=m.mor(a))
        els = set(q.elementary)
        for E in p.elementary:
            if m.obj(E) not in els:
                v.add("elementary_not_preserved", object=E, image=m.obj(E))
    except _Stop:
        pass
    return ValidationReport(tuple(v.items))


# --- Segal morphisms -------------------------------------------------------


def induced_slice_functor(m, X):
    """The functor between elementary slices induced at a source object.

    Sends an inert arrival X -> E to its image f(X) -> f(E); requires a
    validated morphism so that images stay inert with elementary targets."""
    p, q = m.source, m.target
    sl_s = elementary_slice(p, X)
    sl_t = elementary_slice(q, m.obj(X))
    obj_map = {}
    for i, alpha in enumerate(sl_s.objects_data):
        j = sl_t.index_of.get(m.mor(alpha))
        if j is None:
            raise CoherenceError(
                f"image of inert arrival {alpha} at {X} is not an inert "
                "arrival at its image; validate the morphism first")
        obj_map[i] = j
    lookup = {(sl_t.cat.src(k), sl_t.cat.tgt(k), sl_t.mor_data[k]): k
              for k in range(len(sl_t.mor_data))}
    mor_map = {}
    for k in range(len(sl_s.mor_data)):
        i, j = sl_s.cat.src(k), sl_s.cat.tgt(k)
        key = (obj_map[i], obj_map[j], m.mor(sl_s.mor_data[k]))
        if key not in lookup:
            raise CoherenceError(
                f"image of slice triangle {k} at {X} is missing from the "
                "target slice; validate the morphism first")
        mor_map[k] = lookup[key]
    return FinFunctor(sl_s.cat, sl_t.cat, obj_map, mor_map)


def is_strong_segal(m):
    """True when restriction along m preserves the Segal condition for
    every set-valued carrier: the induced slice functor is initial at
    every source object."""
    return all(is_initial_functor(induced_slice_functor(m, X))
               for X in m.source.cat.objects)


def segal_on_report(m, witnesses, objects=None, budget=None):
    """Compare both slice limits of each witness at each source object.

    Witnesses must be Segal carriers on the target; the comparison
    restricts a family over the target slice along the induced slice
    functor and demands a bijection with the source-slice families."""
    p, q = m.source, m.target
    failures = []
    for wi, F in enumerate(witnesses):
        rep = segal_check(q, F, budget=budget)
        if not rep.ok:
            raise ValueError(
                f"witness {wi} is not Segal on the target: {rep.summary()}")
        Fs = restrict_along(m.functor, F)
        for X in (p.cat.objects if objects is None else objects):
            u = induced_slice_functor(m, X)
            fX = m.obj(X)
            sl_t = elementary_slice(q, fX)
            t_targets = [q.cat.tgt(a) for a in sl_t.objects_data]
            fam_t = slice_families(
                q, fX, lambda i: F.value(t_targets[i]),
                lambda k: F.map_dict(sl_t.mor_data[k]), budget)
            sl_s = elementary_slice(p, X)
            s_targets = [p.cat.tgt(a) for a in sl_s.objects_data]
            fam_s = slice_families(
                p, X, lambda i: Fs.value(s_targets[i]),
                lambda k: Fs.map_dict(sl_s.mor_data[k]), budget)
            images = [tuple(fam[u.obj(i)]
                            for i in range(len(sl_s.objects_data)))
                      for fam in fam_t]
            if len(set(images)) != len(images) or set(images) != set(fam_s):
                failures.append({
                    "witness": wi, "object": X,
                    "target_families": len(fam_t),
                    "source_families": len(fam_s),
                    "distinct_restrictions": len(set(images))})
    return SegalReport(not failures, tuple(failures))


def is_segal_on(m, witnesses, objects=None, budget=None):
    """Witness-based Segal-morphism check: exact on the given carriers.

    A False verdict exhibits a genuine failure; a True verdict with a
    non-strong morphism is inconclusive beyond the supplied witnesses."""
    return segal_on_report(m, witnesses, objects, budget).ok


# --- unique lifting --------------------------------------------------------


def _inert_lift_table(m):
    got = m._cache.get("inert_lifts")
    if got is None:
        got = {}
        cs = m.source.cat
        for w in sorted(m.source.inert):
            got.setdefault((cs.src(w), m.mor(w)), []).append(w)
        m._cache["inert_lifts"] = got
    return got


def _unique_inert_lift(m, X, iota):
    lifts = _inert_lift_table(m).get((X, iota), ())
    if len(lifts) != 1:
        raise CoherenceError(
            f"expected exactly one inert lift of {iota} at {X}, "
            f"found {len(lifts)}")
    return lifts[0]


def inert_lifting_failures(m, max_failures=None):
    """Departing inerts in the target that fail to lift uniquely."""
    p, q = m.source, m.target
    table = _inert_lift_table(m)
    by_src = {}
    for i in sorted(q.inert):
        by_src.setdefault(q.cat.src(i), []).append(i)
    out = []
    for O in p.cat.objects:
        for iota in by_src.get(m.obj(O), ()):
            lifts = table.get((O, iota), ())
            if len(lifts) != 1:
                out.append({"kind": "inert_lift", "object": O,
                            "inert": iota, "lifts": tuple(lifts)})
                if max_failures and len(out) >= max_failures:
                    return out
    return out


def has_unique_inert_lifting(m):
    """Every inert departing from an image object lifts on the nose to
    exactly one inert of the source."""
    return not inert_lifting_failures(m, max_failures=1)


def active_lifting_failures(m, max_failures=None):
    """Arriving actives whose category of lifts is not a single point.

    A lift of an active arrival at f(O) is an active arrival at O with
    that image; two lifts are identified by an invertible between their
    sources, over the identity of the image source. The check demands
    exactly one identification class with trivial relative
    automorphisms."""
    p, q = m.source, m.target
    cs, ct = p.cat, q.cat
    out = []

    def record(item):
        out.append(item)
        return bool(max_failures and len(out) >= max_failures)

    for O in p.cat.objects:
        fO = m.obj(O)
        for phi in q.actives_into(fO):
            id_img = ct.identity_of(ct.src(phi))
            lifts = [w for w in p.actives_into(O) if m.mor(w) == phi]
            if not lifts:
                if record({"kind": "active_lift_missing", "object": O,
                           "active": phi}):
                    return out
                continue
            uf = UnionFind(lifts)
            for ix, w1 in enumerate(lifts):
                for w2 in lifts[ix + 1:]:
                    if any(cs.compose[(w2, t)] == w1 and m.mor(t) == id_img
                           for t in cs.isos_between(cs.src(w1), cs.src(w2))):
                        uf.union(w1, w2)
            classes = uf.classes()
            if len(classes) != 1:
                if record({"kind": "active_lift_classes", "object": O,
                           "active": phi, "classes": len(classes)}):
                    return out
                continue
            for w in lifts:
                z = cs.src(w)
                auts = [t for t in cs.isos_between(z, z)
                        if cs.compose[(w, t)] == w and m.mor(t) == id_img]
                if len(auts) != 1:
                    if record({"kind": "active_lift_automorphism",
                               "object": O, "active": phi, "lift": w,
                               "automorphisms": len(auts)}):
                        return out
                    break
    return out


def has_unique_active_lifting(m):
    """Every active arriving at an image object lifts uniquely up to a
    unique invertible over the image."""
    return not active_lifting_failures(m, max_failures=1)


# --- right extension -------------------------------------------------------


def rke_segal(m, F, budget=None):
    """Right-extend a Segal carrier along a morphism with unique active
    lifting; the result is checked to be Segal on the target."""
    if not has_unique_active_lifting(m):
        raise ValueError(
            "right extension needs unique active lifting along the morphism")
    rep = segal_check(m.source, F, budget=budget)
    if not rep.ok:
        raise ValueError("carrier is not Segal on the source: "
                         + rep.summary())
    out = kan_extend("right", m.functor, F, budget).functor
    rep2 = segal_check(m.target, out, budget=budget)
    if not rep2.ok:
        raise CoherenceError(
            "right extension failed the target Segal condition: "
            + rep2.summary())
    return out


# --- extendability of a morphism ------------------------------------------


@dataclass(frozen=True)
class MorphismSection:
    """A coherent family over a target object's elementary slice.

    fibers[i] pairs a source object with an active arrival of its image
    at the slice target E_i; transitions assign to each slice morphism
    an inert of the source satisfying the over-triangle equation through
    the morphism, strictly compatible with composition."""
    base: int
    fibers: tuple
    transitions: tuple  # sorted tuple of (slice morphism id, source inert id)

    def transition(self, k):
        return dict(self.transitions)[k]


def _transport_limit_sections(m, P, bound=None, budget=None):
    """All sections of the transport diagram at a target object."""
    p, q = m.source, m.target
    cs, ct = p.cat, q.cat
    sl = elementary_slice(q, P)
    n = len(sl.objects_data)
    meter = BudgetMeter(budget, "transport limit sections")
    targets = [ct.tgt(a) for a in sl.objects_data]
    graded = p.grade is not None and bound is not None
    cands = []
    for i in range(n):
        opts = []
        for X in cs.objects:
            if graded and p.grade_of(X) > bound:
                continue
            for psi in q.actives_between(m.obj(X), targets[i]):
                opts.append((X, psi))
        opts.sort(key=lambda c: ((p.grade_of(c[0]) if graded else 0), c))
        cands.append(opts)
    nonid_mors = [k for k in range(len(sl.mor_data))
                  if not sl.cat.is_identity(k)]
    relations = []
    for kg in range(len(sl.mor_data)):
        for kf in range(len(sl.mor_data)):
            if sl.cat.tgt(kf) == sl.cat.src(kg):
                relations.append((kg, kf, sl.cat.compose[(kg, kf)]))
    out = []
    fibers = [None] * n

    def assign_transitions(idx, chosen):
        if idx == len(nonid_mors):
            full = dict(chosen)
            for k in range(len(sl.mor_data)):
                if k not in full:
                    full[k] = cs.identity_of(fibers[sl.cat.src(k)][0])
            for kg, kf, kgf in relations:
                if cs.compose.get((full[kg], full[kf])) != full[kgf]:
                    return
            out.append(MorphismSection(P, tuple(fibers),
                                       tuple(sorted(full.items()))))
            return
        k = nonid_mors[idx]
        i, j = sl.cat.src(k), sl.cat.tgt(k)
        u_t = sl.mor_data[k]
        (Xi, psi_i), (Xj, psi_j) = fibers[i], fibers[j]
        want = ct.comp(u_t, psi_i)
        for w in cs.hom(Xi, Xj):
            meter.tick()
            if w in p.inert and ct.compose[(psi_j, m.mor(w))] == want:
                chosen[k] = w
                assign_transitions(idx + 1, chosen)
                del chosen[k]

    def assign_fibers(i, used):
        if i == n:
            assign_transitions(0, {})
            return
        for X, psi in cands[i]:
            g = p.grade_of(X) if graded else 0
            if graded and used + g > bound:
                continue
            meter.tick()
            fibers[i] = (X, psi)
            assign_fibers(i + 1, used + g)
        fibers[i] = None

    assign_fibers(0, 0)
    return tuple(out)


def _section_homs(m, sl, s1, s2, meter):
    """Families of source morphisms s1 -> s2 over the slice, compatible
    with both transition systems and with the arrival actives."""
    p, q = m.source, m.target
    cs, ct = p.cat, q.cat
    n = len(s1.fibers)
    if n == 0:
        return [()]
    t1, t2 = dict(s1.transitions), dict(s2.transitions)
    cands = []
    for i in range(n):
        (Xi, psi_i), (Yi, chi_i) = s1.fibers[i], s2.fibers[i]
        cands.append([g for g in cs.hom(Xi, Yi)
                      if ct.compose[(chi_i, m.mor(g))] == psi_i])
    constraints = []  # (k, i, j) checked once both slots are assigned
    for k in t1:
        i, j = sl.cat.src(k), sl.cat.tgt(k)
        if not sl.cat.is_identity(k):
            constraints.append((k, i, j))
    out = []
    chosen = [None] * n

    def ok_so_far(slot):
        for k, i, j in constraints:
            if i <= slot and j <= slot:
                if cs.compose.get((chosen[j], t1[k])) != \
                        cs.compose.get((t2[k], chosen[i])):
                    return False
        return True

    def rec(i):
        if i == n:
            out.append(tuple(chosen))
            return
        for g in cands[i]:
            meter.tick()
            chosen[i] = g
            if ok_so_far(i):
                rec(i + 1)
        chosen[i] = None

    rec(0)
    return out


def _transport_of(m, X, phi):
    """The canonical section induced by an arrival (X, phi), with the
    connecting inert lifts from X into each fiber."""
    p, q = m.source, m.target
    cs, ct = p.cat, q.cat
    P = ct.tgt(phi)
    sl = elementary_slice(q, P)
    fibers, ells, iotas, psis = [], [], [], []
    for alpha in sl.objects_data:
        l, r = factorize(q, ct.comp(alpha, phi))
        w = _unique_inert_lift(m, X, l)
        fibers.append((cs.tgt(w), r))
        ells.append(w)
        iotas.append(l)
        psis.append(r)
    trans = {}
    for k, u_t in sl.mor_data.items():
        i, j = sl.cat.src(k), sl.cat.tgt(k)
        if sl.cat.is_identity(k):
            trans[k] = cs.identity_of(fibers[i][0])
            continue
        v = _filler(q, iotas[i], psis[j], iotas[j], ct.comp(u_t, psis[i]))
        if v not in q.inert:
            raise CoherenceError("target transition filler is not inert")
        w = _unique_inert_lift(m, fibers[i][0], v)
        if cs.compose.get((w, ells[i])) != ells[j]:
            raise CoherenceError(
                "lifted transition does not close the connecting triangle")
        trans[k] = w
    section = MorphismSection(P, tuple(fibers), tuple(sorted(trans.items())))
    return section, tuple(ells)


def _transport_comparison(m, P, bound=None, budget=None):
    """The arrival category at P, the section category, the comparison
    functor between them, and the arrivals beyond the grade window."""
    p, q = m.source, m.target
    cs, ct = p.cat, q.cat
    sl = elementary_slice(q, P)
    meter = BudgetMeter(budget, "transport comparison")
    graded = p.grade is not None and bound is not None
    sections = _transport_limit_sections(m, P, bound, budget)
    sindex = {(s.fibers, s.transitions): i for i, s in enumerate(sections)}

    lmors = []
    for i1, s1 in enumerate(sections):
        for i2, s2 in enumerate(sections):
            for g in _section_homs(m, sl, s1, s2, meter):
                lmors.append((i1, i2, g))
    lmors.sort()
    lmindex = {x: k for k, x in enumerate(lmors)}
    lid = {}
    for i, s in enumerate(sections):
        key = (i, i, tuple(cs.identity_of(X) for X, _ in s.fibers))
        if key not in lmindex:
            raise CoherenceError("identity family missing from section homs")
        lid[i] = lmindex[key]
    ltable = {}
    by_tgt = {}
    for k, (i, j, _) in enumerate(lmors):
        by_tgt.setdefault(j, []).append(k)
    for kg, (ig, jg, gg) in enumerate(lmors):
        for kf in by_tgt.get(ig, ()):
            if_, _, gf = lmors[kf]
            key = (if_, jg, tuple(cs.comp(a, b) for a, b in zip(gg, gf)))
            if key not in lmindex:
                raise CoherenceError(
                    "section homs are not closed under composition")
            ltable[(kg, kf)] = lmindex[key]
    lcat = FinCategory(range(len(sections)),
                       [(k, i, j) for k, (i, j, _) in enumerate(lmors)],
                       lid, ltable)

    kept, kobj, kell, boundary = [], {}, {}, []
    for X in cs.objects:
        if graded and p.grade_of(X) > bound:
            continue
        for phi in q.actives_between(m.obj(X), P):
            section, ells = _transport_of(m, X, phi)
            if graded and sum(p.grade_of(F[0]) for F in section.fibers) > bound:
                boundary.append({"object": P, "arrival": (X, phi)})
                continue
            idx = sindex.get((section.fibers, section.transitions))
            if idx is None:
                raise CoherenceError(
                    "transported section escaped the enumeration window")
            kept.append((X, phi))
            kobj[(X, phi)] = idx
            kell[(X, phi)] = ells
    kept.sort()
    kindex = {o: i for i, o in enumerate(kept)}
    amors = []
    for (X, phi) in kept:
        for (Y, chi) in kept:
            for u in cs.hom(X, Y):
                if ct.compose[(chi, m.mor(u))] == phi:
                    amors.append((kindex[(X, phi)], kindex[(Y, chi)], u))
    amors.sort()
    amindex = {x: k for k, x in enumerate(amors)}
    aid = {kindex[(X, phi)]: amindex[(kindex[(X, phi)], kindex[(X, phi)],
                                      cs.identity_of(X))]
           for (X, phi) in kept}
    atable = {}
    aby_tgt = {}
    for k, (i, j, _) in enumerate(amors):
        aby_tgt.setdefault(j, []).append(k)
    for kg, (ig, jg, ug) in enumerate(amors):
        for kf in aby_tgt.get(ig, ()):
            if_, _, uf = amors[kf]
            key = (if_, jg, cs.comp(ug, uf))
            if key not in amindex:
                raise CoherenceError(
                    "arrival category is not closed under composition")
            atable[(kg, kf)] = amindex[key]
    acat = FinCategory(range(len(kept)),
                       [(k, i, j) for k, (i, j, _) in enumerate(amors)],
                       aid, atable)

    k_obj = {kindex[o]: kobj[o] for o in kept}
    k_mor = {}
    for k, (i1, i2, u) in enumerate(amors):
        o1, o2 = kept[i1], kept[i2]
        s1, s2 = sections[kobj[o1]], sections[kobj[o2]]
        ell1, ell2 = kell[o1], kell[o2]
        gs = []
        for a in range(len(s1.fibers)):
            (Xa, psi_a), (Ya, chi_a) = s1.fibers[a], s2.fibers[a]
            want = cs.comp(ell2[a], u)
            hits = [g for g in cs.hom(Xa, Ya)
                    if cs.compose[(g, ell1[a])] == want
                    and ct.compose[(chi_a, m.mor(g))] == psi_a]
            if len(hits) != 1:
                raise CoherenceError(
                    f"expected exactly one comparison component, found "
                    f"{len(hits)} at slice slot {a} over {P}")
            gs.append(hits[0])
        key = (kobj[o1], kobj[o2], tuple(gs))
        if key not in lmindex:
            raise CoherenceError(
                "comparison image is missing from the section homs")
        k_mor[k] = lmindex[key]
    K = FinFunctor(acat, lcat, k_obj, k_mor)
    return K, tuple(boundary)


def _fibered_slice_comparison(m, O, phi, budget=None):
    """Fibered elementary data of a departing active through a morphism.

    phi is an active of the target out of the image of O. Each target
    slice arrival is factorized, its inert part lifted uniquely, and the
    elementary slices of the lifted middles are glued along lifted
    transition fillers. The comparison lands in the elementary slice of
    O itself."""
    p, q = m.source, m.target
    cs, ct = p.cat, q.cat
    if phi not in q.active:
        raise ValueError("morphism must be active in the target")
    if ct.src(phi) != m.obj(O):
        raise ValueError("active morphism must depart from the image of O")
    P = ct.tgt(phi)
    sl2 = elementary_slice(q, P)
    sl0 = elementary_slice(p, O)
    iotas, psis, ells, middles = [], [], [], []
    for alpha in sl2.objects_data:
        l, r = factorize(q, ct.comp(alpha, phi))
        w = _unique_inert_lift(m, O, l)
        iotas.append(l)
        psis.append(r)
        ells.append(w)
        middles.append(cs.tgt(w))
    inner = [elementary_slice(p, M) for M in middles]
    h = {}
    for k, u_t in sl2.mor_data.items():
        i, j = sl2.cat.src(k), sl2.cat.tgt(k)
        if sl2.cat.is_identity(k):
            h[k] = cs.identity_of(middles[i])
            continue
        v = _filler(q, iotas[i], psis[j], iotas[j], ct.comp(u_t, psis[i]))
        if v not in q.inert:
            raise CoherenceError("target transition filler is not inert")
        w = _unique_inert_lift(m, middles[i], v)
        if cs.compose.get((w, ells[i])) != ells[j]:
            raise CoherenceError(
                "lifted transition does not close the connecting triangle")
        h[k] = w
    objs = []
    for a in range(len(sl2.objects_data)):
        for beta in inner[a].objects_data:
            objs.append((a, beta))
    objs.sort()
    oindex = {o: i for i, o in enumerate(objs)}
    mors = []
    for k in sl2.mor_data:
        a, a2 = sl2.cat.src(k), sl2.cat.tgt(k)
        hg = h[k]
        for beta in inner[a].objects_data:
            Eb = cs.tgt(beta)
            for beta2 in inner[a2].objects_data:
                want = cs.comp(beta2, hg)
                for t in p.inerts_between(Eb, cs.tgt(beta2)):
                    if cs.compose[(t, beta)] == want:
                        mors.append((oindex[(a, beta)], oindex[(a2, beta2)],
                                     k, t))
    mors.sort()
    mindex = {x: n for n, x in enumerate(mors)}
    identity = {}
    for (a, beta), i in oindex.items():
        k_id = sl2.cat.identity_of(a)
        key = (i, i, k_id, cs.identity_of(cs.tgt(beta)))
        if key not in mindex:
            raise CoherenceError("identity missing from fibered data")
        identity[i] = mindex[key]
    table = {}
    by_tgt = {}
    for n_, (i, j, k, t) in enumerate(mors):
        by_tgt.setdefault(j, []).append(n_)
    for ng, (ig, jg, kg, tg) in enumerate(mors):
        for nf in by_tgt.get(ig, ()):
            if_, _, kf, tf = mors[nf]
            key = (if_, jg, sl2.cat.compose[(kg, kf)], cs.compose[(tg, tf)])
            if key not in mindex:
                raise CoherenceError(
                    "fibered elementary data is not closed under composition")
            table[(ng, nf)] = mindex[key]
    scat = FinCategory(range(len(objs)),
                       [(n_, i, j) for n_, (i, j, _, _) in enumerate(mors)],
                       identity, table)
    cobj = {}
    for (a, beta), i in oindex.items():
        composite = cs.comp(beta, ells[a])
        if composite not in sl0.index_of:
            raise CoherenceError(
                "comparison into the elementary slice is ill-defined")
        cobj[i] = sl0.index_of[composite]
    sl0_lookup = {(sl0.cat.src(k0), sl0.cat.tgt(k0), sl0.mor_data[k0]): k0
                  for k0 in range(len(sl0.mor_data))}
    cmor = {}
    for n_, (i, j, k, t) in enumerate(mors):
        key = (cobj[i], cobj[j], t)
        if key not in sl0_lookup:
            raise CoherenceError(
                "comparison into the elementary slice is ill-defined")
        cmor[n_] = sl0_lookup[key]
    comparison = FinFunctor(scat, sl0.cat, cobj, cmor)
    return ActiveSliceResult(scat, tuple(objs), comparison)


def is_extendable_morphism(m, bound=None, budget=None):
    """Decide extendability of a pattern morphism.

    Three conditions: unique lifting of departing inerts; finality of
    the comparison from each arrival category into the section category
    of the transport diagram (checked as nonemptiness plus connectedness
    of the relevant commas, the criterion under which set-valued
    colimits restrict); and initiality of the fibered elementary data of
    every departing active. Initiality failures are recorded as
    inconclusive rather than disproofs, matching the object-level
    check. Sections are enumerated with the same strict-transition
    discipline as the object-level extendability machinery."""
    p, q = m.source, m.target
    if bound is None:
        bound = p.grade_bound
    failures = []
    boundary = []
    skipped = []
    fails1 = inert_lifting_failures(m)
    if fails1:
        return ExtendabilityReport(False, tuple(fails1), (), (),
                                   0, 0)
    checked_objects = 0
    for P in q.cat.objects:
        checked_objects += 1
        try:
            K, bnd = _transport_comparison(m, P, bound, budget)
            boundary.extend(bnd)
            if not is_final_functor(K):
                failures.append({"kind": "cofinality_failed", "object": P})
        except BudgetExceeded as exc:
            skipped.append({"object": P, "reason": str(exc)})
    checked_actives = 0
    for O in p.cat.objects:
        fO = m.obj(O)
        for phi in sorted(q.active):
            if q.cat.src(phi) != fO:
                continue
            checked_actives += 1
            try:
                res = _fibered_slice_comparison(m, O, phi, budget)
                if not is_initial_functor(res.comparison):
                    failures.append({"kind": "initiality_failed",
                                     "object": O, "active": phi})
            except BudgetExceeded as exc:
                skipped.append({"object": O, "active": phi,
                                "reason": str(exc)})
    return ExtendabilityReport(not failures, tuple(failures),
                               tuple(boundary), tuple(skipped),
                               checked_objects, checked_actives)


# --- left extension --------------------------------------------------------


def lke_segal(m, F, bound=None, budget=None, precheck=True):
    """Left-extend a Segal carrier along an extendable morphism.

    The value at a target object is the set of zigzag classes of pairs
    (arrival, element) over the arrival category; the action factorizes
    in the target, lifts the inert part uniquely, and pushes the
    element. The result is checked to be Segal on the target, grade
    bucket by grade bucket when the source is graded."""
    p, q = m.source, m.target
    cs, ct = p.cat, q.cat
    graded = p.grade is not None
    if bound is None:
        bound = p.grade_bound
    if precheck:
        repm = is_extendable_morphism(m, bound=bound, budget=budget)
        if not repm.ok:
            raise ValueError("left extension needs an extendable morphism: "
                             + repm.summary())
        if isinstance(F, GradedSetFunctor):
            reps = graded_segal_check(p, F, bound, budget=budget)
        else:
            reps = segal_check(p, F, budget=budget)
        if not reps.ok:
            raise ValueError("carrier is not Segal on the source: "
                             + reps.summary())
    meter = BudgetMeter(budget, "left extension")

    def arrivals(P):
        out = []
        for X in cs.objects:
            if graded and bound is not None and p.grade_of(X) > bound:
                continue
            for phi in q.actives_between(m.obj(X), P):
                out.append((X, phi))
        out.sort()
        return out

    pos = {X: {e: i for i, e in enumerate(F.value(X))}
           for X in cs.objects}
    elems = {X: tuple(F.value(X)) for X in cs.objects}
    values = {}
    class_of = {}
    for P in ct.objects:
        arr = arrivals(P)
        arr_set = set(arr)
        nodes = [(X, phi, i) for (X, phi) in arr
                 for i in range(len(elems[X]))]
        uf = UnionFind(nodes)
        for (Y, chi) in arr:
            for u in cs.morphisms:
                if cs.tgt(u) != Y:
                    continue
                X = cs.src(u)
                phi = ct.compose[(chi, m.mor(u))]
                if phi not in q.active or (X, phi) not in arr_set:
                    continue
                for i, e in enumerate(elems[X]):
                    meter.tick()
                    uf.union((X, phi, i),
                             (Y, chi, pos[Y][F.apply(u, e)]))
        labels = []
        for cls in uf.classes():
            rep = min(cls)
            label = (rep[0], rep[1], elems[rep[0]][rep[2]])
            labels.append(label)
            for node in cls:
                class_of[(P, node)] = label
        values[P] = tuple(sorted(labels, key=lambda L:
                                 (L[0], L[1], pos[L[0]][L[2]])))

    action = {}
    for rho in ct.morphisms:
        P, P2 = ct.src(rho), ct.tgt(rho)
        mapping = {}
        for label in values[P]:
            X, phi, e = label
            l, r = factorize(q, ct.comp(rho, phi))
            w = _unique_inert_lift(m, X, l)
            X2 = cs.tgt(w)
            if graded and bound is not None and p.grade_of(X2) > bound:
                raise GradeOverflow(
                    f"left extension along {rho} needs a source of grade "
                    f"{p.grade_of(X2)} beyond the bound {bound}")
            e2 = F.apply(w, e)
            mapping[label] = class_of[(P2, (X2, r, pos[X2][e2]))]
        action[rho] = mapping

    out = SetFunctor(ct, values, action)
    if graded:
        grades = {P: {label: p.grade_of(label[0]) for label in values[P]}
                  for P in ct.objects}
        gout = GradedSetFunctor(out, grades)
        rep2 = graded_segal_check(q, gout, bound, budget=budget)
        if not rep2.ok:
            raise CoherenceError(
                "left extension failed the target Segal condition: "
                + rep2.summary())
        return gout
    rep2 = segal_check(q, out, budget=budget)
    if not rep2.ok:
        raise CoherenceError(
            "left extension failed the target Segal condition: "
            + rep2.summary())
    return out


# --- pullbacks and isomorphism --------------------------------------------


@dataclass
class PatternPullbackResult:
    pattern: Pattern
    proj_left: PatternMorphism
    proj_right: PatternMorphism
    obj_pairs: tuple
    mor_pairs: tuple


def pattern_pullback(m1, m2):
    """Pull back a cospan of pattern morphisms.

    The underlying category is the strict pullback; a pair is inert,
    active, or elementary exactly when both components are. The result
    carries the left grading when present (the right one otherwise) and
    should be validated by the caller: componentwise classes form a
    pattern only when the cospan respects both factorizations."""
    t1, t2 = m1.target, m2.target
    if (t1.cat.objects != t2.cat.objects
            or t1.cat.morphisms != t2.cat.morphisms):
        raise ValueError("pullback needs a common target category")
    res = pullback_category(m1.functor, m2.functor)
    p1, p2 = m1.source, m2.source
    inert = frozenset(
        k for k, (u, v) in enumerate(res.mor_pairs)
        if u in p1.inert and v in p2.inert)
    active = frozenset(
        k for k, (u, v) in enumerate(res.mor_pairs)
        if u in p1.active and v in p2.active)
    el1, el2 = set(p1.elementary), set(p2.elementary)
    elementary = tuple(i for i, (a, b) in enumerate(res.obj_pairs)
                       if a in el1 and b in el2)
    grade = None
    bound = None
    if p1.grade is not None:
        grade = {i: p1.grade_of(a) for i, (a, _) in enumerate(res.obj_pairs)}
        bound = p1.grade_bound
    elif p2.grade is not None:
        grade = {i: p2.grade_of(b) for i, (_, b) in enumerate(res.obj_pairs)}
        bound = p2.grade_bound
    name = f"({p1.name or 'left'} x {p2.name or 'right'})"
    pat = Pattern(res.cat, inert, active, elementary,
                  grade=grade, grade_bound=bound, name=name)
    projL = PatternMorphism(pat, p1, res.proj_left, name="proj-left")
    projR = PatternMorphism(pat, p2, res.proj_right, name="proj-right")
    return PatternPullbackResult(pat, projL, projR,
                                 res.obj_pairs, res.mor_pairs)


def _is_pattern_iso(F, p, q):
    """Is the functor a bijective-on-everything match of pattern data?"""
    if sorted(F.obj_map) != sorted(p.cat.objects):
        return False
    if sorted(F.obj_map.values()) != sorted(q.cat.objects):
        return False
    if sorted(F.mor_map) != sorted(p.cat.morphisms):
        return False
    if sorted(F.mor_map.values()) != sorted(q.cat.morphisms):
        return False
    if not validate_functor(F, max_violations=1).passed:
        return False
    if {F.mor(i) for i in p.inert} != set(q.inert):
        return False
    if {F.mor(a) for a in p.active} != set(q.active):
        return False
    if {F.obj(E) for E in p.elementary} != set(q.elementary):
        return False
    if p.grade is not None and q.grade is not None:
        if any(p.grade_of(x) != q.grade_of(F.obj(x))
               for x in p.cat.objects):
            return False
    return True


def _object_signature(p, x):
    els = set(p.elementary)
    profile = sorted(
        (len(p.cat.hom(x, y)), len(p.cat.hom(y, x)),
         sum(1 for m_ in p.cat.hom(x, y) if m_ in p.inert),
         sum(1 for m_ in p.cat.hom(x, y) if m_ in p.active),
         y in els)
        for y in p.cat.objects)
    return (x in els, len(p.cat.hom(x, x)), tuple(profile))


def _search_pattern_iso(p, q, budget=None):
    """Backtracking search for a class-preserving isomorphism."""
    meter = BudgetMeter(budget, "pattern isomorphism search")
    objs_p = list(p.cat.objects)
    objs_q = list(q.cat.objects)
    if len(objs_p) != len(objs_q):
        return None
    if len(p.cat.morphisms) != len(q.cat.morphisms):
        return None
    sig_q = {}
    for y in objs_q:
        sig_q.setdefault(_object_signature(q, y), []).append(y)
    cand_obj = {}
    for x in objs_p:
        cand_obj[x] = sig_q.get(_object_signature(p, x), [])
        if not cand_obj[x]:
            return None
    cp, cq = p.cat, q.cat
    mors_p = sorted(cp.morphisms, key=lambda m_: (cp.src(m_), cp.tgt(m_), m_))

    def mor_class(pat, m_):
        return (m_ in pat.inert, m_ in pat.active,
                pat.cat.is_identity(m_))

    obj_assign = {}
    mor_assign = {}
    used_mor = set()

    def extend_morphisms(idx):
        if idx == len(mors_p):
            return True
        m_ = mors_p[idx]
        s, t = cp.src(m_), cp.tgt(m_)
        want_class = mor_class(p, m_)
        if cp.is_identity(m_):
            options = [cq.identity_of(obj_assign[s])]
        else:
            options = cq.hom(obj_assign[s], obj_assign[t])
        for im in options:
            meter.tick()
            if im in used_mor or mor_class(q, im) != want_class:
                continue
            consistent = True
            for f_, fi in mor_assign.items():
                if cp.tgt(f_) == s:
                    comp = cp.compose[(m_, f_)]
                    if comp in mor_assign and \
                            mor_assign[comp] != cq.compose[(im, fi)]:
                        consistent = False
                        break
                if cp.src(f_) == t:
                    comp = cp.compose[(f_, m_)]
                    if comp in mor_assign and \
                            mor_assign[comp] != cq.compose[(fi, im)]:
                        consistent = False
                        break
            if not consistent:
                continue
            mor_assign[m_] = im
            used_mor.add(im)
            if extend_morphisms(idx + 1):
                return True
            del mor_assign[m_]
            used_mor.discard(im)
        return False

    def extend_objects(i, used):
        if i == len(objs_p):
            return extend_morphisms(0)
        x = objs_p[i]
        for y in cand_obj[x]:
            if y in used:
                continue
            meter.tick()
            obj_assign[x] = y
            if extend_objects(i + 1, used | {y}):
                return True
            del obj_assign[x]
        return False

    if not extend_objects(0, set()):
        return None
    return FinFunctor(cp, cq, dict(obj_assign), dict(mor_assign))


def patterns_isomorphic(p, q, candidates=(), budget=None):
    """Are two patterns isomorphic over a class-preserving functor?

    Tries the candidate functors first, then falls back to a pruned
    backtracking search; returns the witness functor or None."""
    for F in candidates:
        if _is_pattern_iso(F, p, q):
            return F
    F = _search_pattern_iso(p, q, budget)
    if F is not None and _is_pattern_iso(F, p, q):
        return F
    return None
