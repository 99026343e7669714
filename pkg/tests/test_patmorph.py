import pytest

from patternforge import zoo
from patternforge.freemonad import FreeSegalMonad
from patternforge.patmorph import (compose_morphisms,
                                   has_unique_active_lifting,
                                   has_unique_inert_lifting,
                                   identity_morphism,
                                   inert_pattern_inclusion,
                                   is_extendable_morphism, is_segal_on,
                                   is_strong_segal, lke_segal,
                                   pattern_pullback, patterns_isomorphic,
                                   point_inclusion, rke_segal,
                                   segal_on_report, validate_morphism)
from patternforge.pattern import validate_pattern
from patternforge.setfun import GradedSetFunctor, SetFunctor


def constant_carrier(p, elements=("s", "t")):
    values = {x: tuple(elements) for x in p.cat.objects}
    action = {m: {e: e for e in elements} for m in p.cat.morphisms}
    return SetFunctor(p.cat, values, action)


def test_identity_and_composition(fstar_flat_2):
    p = fstar_flat_2
    ident = identity_morphism(p)
    assert validate_morphism(ident).passed
    again = compose_morphisms(ident, ident)
    assert validate_morphism(again).passed


def test_builders_validate(delta_natural_3, fstar_flat_3):
    spine = zoo.build_simplex_to_fstar(3, "natural")
    assert validate_morphism(spine).passed
    widen = zoo.build_flat_to_natural("fstar", 3)
    assert validate_morphism(widen).passed
    inc = inert_pattern_inclusion(fstar_flat_3)
    assert validate_morphism(inc).passed
    pt = point_inclusion(delta_natural_3, 0)
    assert validate_morphism(pt).passed


def test_strong_segal_verdicts():
    spine = zoo.build_simplex_to_fstar(3, "natural")
    assert is_strong_segal(spine)
    widen = zoo.build_flat_to_natural("fstar", 3)
    assert not is_strong_segal(widen)


def test_segal_on_witness_carrier():
    widen = zoo.build_flat_to_natural("fstar", 3)
    carrier = constant_carrier(widen.target)
    rep = segal_on_report(widen, [carrier])
    assert not rep.ok
    failing = {f["object"] for f in rep.failures}
    assert 0 in failing
    at0 = next(f for f in rep.failures if f["object"] == 0)
    assert at0["target_families"] == 2
    assert at0["source_families"] == 1
    assert not is_segal_on(widen, [carrier])


def test_segal_on_requires_target_segal_witness(fstar_flat_3):
    widen = zoo.build_flat_to_natural("fstar", 3)
    not_segal = constant_carrier(widen.target, ("s", "t", "u"))
    not_segal.values[0] = ("s",)
    not_segal.action[widen.target.cat.identity_of(0)] = {"s": "s"}
    for m, a, b in widen.target.cat.mor_triples():
        if a == 0 or b == 0:
            if m not in not_segal.action or a == 0:
                not_segal.action[m] = {"s": "s"}
    with pytest.raises(ValueError):
        segal_on_report(widen, [not_segal])


def test_lifting_properties():
    spine = zoo.build_simplex_to_fstar(3, "natural")
    # the four simplex vertices all collapse onto the one basepoint
    # projection, so inert lifts along the spine are not unique
    assert not has_unique_inert_lifting(spine)
    assert not has_unique_active_lifting(spine)
    widen = zoo.build_flat_to_natural("fstar", 3)
    assert has_unique_inert_lifting(widen)
    pt = point_inclusion(zoo.build(zoo.TruncationSpec(
        "delta_op", 3, "natural")), 0)
    assert has_unique_active_lifting(pt)


def test_rke_along_vertex_point(delta_natural_3):
    pt = point_inclusion(delta_natural_3, 0)
    src = pt.source
    ctx = FreeSegalMonad(src, zoo.constant_seed(src, 3))
    out = rke_segal(pt, ctx.functor().base)
    sizes = [len(out.value(X)) for X in delta_natural_3.cat.objects]
    assert sizes == [3, 9, 27, 81]


def test_lke_along_inert_inclusion_is_free(fstar_flat_3):
    p = fstar_flat_3
    m = inert_pattern_inclusion(p)
    assert is_extendable_morphism(m).ok
    free = FreeSegalMonad(p, zoo.constant_seed(p, 2)).functor()
    seedG = FreeSegalMonad(m.source, zoo.constant_seed(p, 2)).functor()
    L = lke_segal(m, seedG)
    assert isinstance(L, GradedSetFunctor)
    for X in p.cat.objects:
        left = {}
        for e in L.value(X):
            left[L.grade(X, e)] = left.get(L.grade(X, e), 0) + 1
        right = {}
        for e in free.value(X):
            right[free.grade(X, e)] = right.get(free.grade(X, e), 0) + 1
        assert left == right


def test_pattern_pullback_of_flavors(delta_flat_2):
    spine = zoo.build_simplex_to_fstar(2, "natural")
    widen = zoo.build_flat_to_natural("fstar", 2)
    res = pattern_pullback(spine, widen)
    assert validate_pattern(res.pattern).passed
    assert validate_morphism(res.proj_left).passed
    assert validate_morphism(res.proj_right).passed
    witness = patterns_isomorphic(res.pattern, delta_flat_2)
    assert witness is not None


def test_patterns_isomorphic_negative(fstar_flat_2, delta_flat_2):
    assert patterns_isomorphic(fstar_flat_2, delta_flat_2) is None
