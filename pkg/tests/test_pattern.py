import pytest

from patternforge import zoo
from patternforge.errors import CoherenceError
from patternforge.fincat import FinCategory, validate_functor
from patternforge.freemonad import FreeSegalMonad
from patternforge.pattern import (Pattern, all_factorizations,
                                  elementary_slice, enumerate_sections,
                                  factor_classes, factorize,
                                  graded_segal_check, is_extendable,
                                  is_saturated, is_slim, necessary_objects,
                                  segal_check, slice_families, slim,
                                  transport_section, validate_pattern)
from patternforge.setfun import GradedSetFunctor, SetFunctor

import oracles


def discrete_two():
    cat = FinCategory(["a", "b"],
                      [("ida", "a", "a"), ("idb", "b", "b")],
                      {"a": "ida", "b": "idb"},
                      {("ida", "ida"): "ida", ("idb", "idb"): "idb"})
    return Pattern(cat, frozenset(cat.morphisms), frozenset(cat.morphisms),
                   ("b",), grade={"a": 1, "b": 1}, grade_bound=1,
                   name="discrete-two")


def constant_carrier(p, elements=("s", "t")):
    values = {x: tuple(elements) for x in p.cat.objects}
    action = {m: {e: e for e in elements} for m in p.cat.morphisms}
    return SetFunctor(p.cat, values, action)


def test_validate_zoo_patterns(fstar_flat_3, fstar_natural_3, delta_flat_3,
                               delta_natural_3, theta_flat_2,
                               theta_natural_2):
    for p in (fstar_flat_3, fstar_natural_3, delta_flat_3, delta_natural_3,
              theta_flat_2, theta_natural_2):
        rep = validate_pattern(p)
        assert rep.passed, (p.name, rep.summary())


def test_validate_catches_missing_active(fstar_flat_2):
    p = fstar_flat_2
    dropped = (2, 1, (1, 1))
    q = Pattern(p.cat, p.inert, p.active - {dropped}, p.elementary,
                grade=p.grade, grade_bound=p.grade_bound)
    rep = validate_pattern(q)
    assert not rep.passed
    kinds = {v["kind"] for v in rep.violations}
    assert "no_factorization" in kinds


def test_validate_catches_class_pollution(fstar_flat_2):
    p = fstar_flat_2
    stray = (2, 1, (1, 0))
    assert p.is_inert(stray) and not p.is_active(stray)
    q = Pattern(p.cat, p.inert, p.active | {stray}, p.elementary,
                grade=p.grade, grade_bound=p.grade_bound)
    rep = validate_pattern(q)
    assert not rep.passed


def test_membership_helpers(fstar_flat_2):
    p = fstar_flat_2
    assert p.is_inert((2, 1, (1, 0)))
    assert p.is_active((2, 1, (1, 1)))
    assert p.is_elementary(1) and not p.is_elementary(2)
    assert p.grade_of(2) == 2
    assert (2, 1, (1, 0)) in p.inerts_between(2, 1)
    assert (2, 1, (1, 1)) in p.actives_between(2, 1)
    assert all(p.cat.tgt(m) == 1 for m in p.actives_into(1))


def test_inert_subcategory_and_inclusion(fstar_flat_2):
    p = fstar_flat_2
    sub = p.inert_subcategory()
    assert set(sub.morphisms) == set(p.inert)
    assert validate_functor(p.inert_inclusion()).passed


def test_factorize_against_brute_force(fstar_flat_2):
    p = fstar_flat_2
    buckets = oracles.factorization_buckets(p.cat, p.inert, p.active)
    for f in p.cat.morphisms:
        l, r = factorize(p, f)
        assert l in p.inert and r in p.active
        assert p.cat.comp(r, l) == f
        assert (l, r) in buckets[f]
        for other in buckets[f]:
            assert oracles.factorizations_equivalent(p.cat, (l, r), other)


def test_factor_classes_unique(fstar_flat_2):
    p = fstar_flat_2
    for f in p.cat.morphisms:
        classes = factor_classes(p, f)
        assert len(classes) == 1
        assert len(all_factorizations(p, f)) >= 1


def test_elementary_slice_shapes(fstar_flat_3, delta_natural_3):
    sl = elementary_slice(fstar_flat_3, 2)
    assert len(sl.objects_data) == 2
    assert all(fstar_flat_3.cat.is_identity(m) or False
               for m in () )
    sl2 = elementary_slice(delta_natural_3, 2)
    # two arcs and three vertices over the 2-simplex
    assert len(sl2.objects_data) == 5


def test_slice_families_product_for_flat(fstar_flat_3):
    p = fstar_flat_3
    vals = ("x", "y", "z")
    fams = slice_families(p, 3, lambda i: vals,
                          lambda k: {e: e for e in vals})
    assert len(fams) == 27


def test_segal_check_positive_and_negative(fstar_flat_3):
    p = fstar_flat_3
    ctx = FreeSegalMonad(p, zoo.constant_seed(p, 2))
    F = ctx.functor()
    assert graded_segal_check(p, F).ok
    bad = constant_carrier(p)
    rep = segal_check(p, bad)
    assert not rep.ok


def test_graded_segal_catches_grade_drift(fstar_flat_2):
    p = fstar_flat_2
    ctx = FreeSegalMonad(p, zoo.constant_seed(p, 2))
    F = ctx.functor()
    grades = {x: {e: F.grade(x, e) for e in F.value(x)}
              for x in p.cat.objects}
    some = next(iter(grades[1]))
    grades[1][some] += 1
    tampered = GradedSetFunctor(F.base, grades)
    rep = graded_segal_check(p, tampered)
    assert not rep.ok


def test_slim_detection_and_restriction():
    p = discrete_two()
    assert not is_slim(p)
    assert necessary_objects(p) == ("b",)
    q, dropped = slim(p)
    assert dropped == ("a",)
    assert q.cat.objects == ("b",)
    assert validate_pattern(q).passed


def test_zoo_patterns_are_slim(fstar_flat_3, delta_natural_3,
                               theta_natural_2):
    for p in (fstar_flat_3, delta_natural_3, theta_natural_2):
        assert is_slim(p)


def test_sections_and_transport(fstar_flat_2):
    p = fstar_flat_2
    secs = enumerate_sections(p, 1, 2)
    assert len(secs) == 3
    psi = (2, 1, (1, 1))
    s = transport_section(p, psi)
    assert s.obj == 1
    assert len(s.components) == 1
    assert s.components[0] in p.active


def test_saturation_verdicts(fstar_flat_4, delta_natural_4):
    rep = is_saturated(delta_natural_4)
    assert rep.ok
    rep2 = is_saturated(fstar_flat_4)
    assert not rep2.ok
    assert rep2.witness["source"] == 1
    assert rep2.witness["object"] == 2
    assert rep2.witness["value_size"] == 3
    assert rep2.witness["limit_size"] == 4


def test_extendability_verdicts(fstar_flat_3, theta_flat_2):
    assert is_extendable(fstar_flat_3).ok
    rep = is_extendable(theta_flat_2)
    assert not rep.ok
    assert rep.disproved
    assert "sections_mismatch" in {f["kind"] for f in rep.failures}
