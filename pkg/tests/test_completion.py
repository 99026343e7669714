import random

import pytest

from patternforge import zoo
from patternforge.completion import (CompletedHom, completion,
                                     compose_completed, factorize_completed,
                                     hom_completed, is_complete_monad,
                                     is_saturation_iso, lambda_int,
                                     nerve_check, saturate)
from patternforge.errors import GradeOverflow
from patternforge.freemonad import FreeSegalMonad
from patternforge.pattern import is_saturated
from patternforge.setfun import GradedSetFunctor, SetFunctor

import oracles
from test_pattern import discrete_two


def completed_span(p, h):
    """Decode a completed hom of the based-sets family into a span class:
    the multiset of (source index, target index) leg pairs."""
    psi, fam = h.label
    sl_objects = sorted(p.inerts_between(p.cat.src(psi), 1))
    pairs = []
    for k, alpha in enumerate(sl_objects):
        slot = alpha[2].index(1) + 1
        i = fam[k][2].index(1) + 1
        j = psi[2][slot - 1]
        pairs.append((i, j))
    return tuple(sorted(pairs))


def test_lambda_int_structure(fstar_flat_2):
    p = fstar_flat_2
    lam = lambda_int(p, 2)
    assert lam.base == 2
    assert set(lam.seed.value(1)) == set(p.inerts_between(2, 1))
    bij = lam.hom_bijection(p, 1)
    assert sorted(bij.values()) == sorted(p.inerts_between(2, 1))
    assert len(set(bij.values())) == len(bij)


def test_hom_counts_match_span_oracle(fstar_flat_3):
    p = fstar_flat_3
    comp = completion(p)
    for X in p.cat.objects:
        for Y in p.cat.objects:
            homs = comp.hom(X, Y)
            by_grade = {}
            for h in homs:
                g = comp.grade(h)
                by_grade[g] = by_grade.get(g, 0) + 1
            for g in range(4):
                assert by_grade.get(g, 0) == oracles.span_count(X, Y, g), \
                    (X, Y, g)


def test_completed_homs_biject_with_spans(fstar_flat_3):
    p = fstar_flat_3
    comp = completion(p)
    for (X, Y) in [(2, 1), (2, 2), (3, 1)]:
        for g in range(4):
            homs = [h for h in comp.hom(X, Y) if comp.grade(h) == g]
            spans = {completed_span(p, h) for h in homs}
            assert len(spans) == len(homs)
            assert spans == set(oracles.span_classes(X, Y, g))


def test_compose_matches_span_pullback(fstar_flat_3):
    p = fstar_flat_3
    comp = completion(p)
    rng = random.Random(7)
    triples = [(X, Y, Z) for X in (1, 2) for Y in (1, 2) for Z in (1, 2)]
    checked = 0
    for X, Y, Z in triples:
        fs = comp.hom(X, Y)
        gs = comp.hom(Y, Z)
        pairs = [(g, f) for g in gs for f in fs]
        rng.shuffle(pairs)
        for g, f in pairs[:40]:
            expected = oracles.span_compose(completed_span(p, g),
                                            completed_span(p, f))
            if len(expected) > 3:
                with pytest.raises(GradeOverflow):
                    comp.compose(g, f)
                continue
            got = comp.compose(g, f)
            assert completed_span(p, got) == expected
            checked += 1
    assert checked > 50


def test_identity_and_sigma(fstar_flat_2):
    p = fstar_flat_2
    comp = completion(p)
    for X in p.cat.objects:
        ident = comp.identity(X)
        for h in comp.hom(X, X):
            assert comp.compose(ident, h) == h
            assert comp.compose(h, ident) == h
    for g, f in p.cat.composable_pairs():
        sf = comp.sigma(f)
        sg = comp.sigma(g)
        assert comp.compose(sg, sf) == comp.sigma(p.cat.comp(g, f))


def test_sigma_grades(fstar_flat_2):
    p = fstar_flat_2
    comp = completion(p)
    for f in p.cat.morphisms:
        h = comp.sigma(f)
        assert isinstance(h, CompletedHom)
        assert comp.grade(h) <= p.grade_bound


def test_factorize_completed_recomposes(fstar_flat_2):
    p = fstar_flat_2
    comp = completion(p)
    for X in p.cat.objects:
        for Y in p.cat.objects:
            for h in comp.hom(X, Y):
                inert_part, active_part = comp.factorize(h)
                assert comp.is_inert_class(inert_part)
                assert comp.is_active_class(active_part)
                assert comp.compose(active_part, inert_part) == h


def test_invertibility(fstar_flat_2):
    p = fstar_flat_2
    comp = completion(p)
    assert comp.is_invertible(comp.identity(2))
    swap = comp.sigma((2, 2, (2, 1)))
    assert comp.is_invertible(swap)
    empty_loop = [h for h in comp.hom(1, 1) if comp.grade(h) == 0]
    assert len(empty_loop) == 1
    assert not comp.is_invertible(empty_loop[0])


def test_completed_pattern_validates(fstar_flat_2, delta_natural_3):
    rep = saturate(fstar_flat_2).completed.validate()
    assert rep.passed, rep.summary()
    rep2 = saturate(delta_natural_3).completed.validate(
        sample=200, rng=random.Random(1))
    assert rep2.passed, rep2.summary()


def test_module_wrappers(fstar_flat_2):
    p = fstar_flat_2
    homs = hom_completed(p, 2, 1)
    assert homs
    h = homs[0]
    ident = completion(p).identity(2)
    assert compose_completed(p, h, ident) == h
    l, r = factorize_completed(p, h)
    assert compose_completed(p, r, l) == h


def test_saturate_slims_first():
    p = discrete_two()
    res = saturate(p)
    assert res.dropped == ("a",)
    assert res.completed.objects == ("b",)
    assert res.sigma.obj("b") == "b"


def test_saturation_iso_agreement(fstar_flat_3, fstar_natural_3,
                                  delta_flat_3, delta_natural_3):
    for p in (fstar_flat_3, fstar_natural_3, delta_flat_3,
              delta_natural_3):
        assert is_saturation_iso(p) == is_saturated(p).ok, p.name


def test_complete_monad_on_flagships(fstar_flat_3, delta_natural_3):
    assert is_complete_monad(fstar_flat_3)
    assert is_complete_monad(delta_natural_3)


def test_nerve_positive_and_perturbed(fstar_flat_3):
    p = fstar_flat_3
    ctx = FreeSegalMonad(p, zoo.constant_seed(p, 2))
    A = ctx.functor()
    rep = nerve_check(p, A)
    assert rep.ok and not rep.skipped
    values = {x: list(A.value(x)) for x in A.cat.objects}
    action = {f: dict(A.map_dict(f)) for f, _s, _t in A.cat.mor_triples()}
    amap = action[(2, 1, (1, 1))]
    keys = sorted(amap, key=repr)
    a, b = next((x, y) for i, x in enumerate(keys) for y in keys[i + 1:]
                if amap[x] != amap[y])
    amap[a], amap[b] = amap[b], amap[a]
    grades = {x: {e: A.grade(x, e) for e in values[x]}
              for x in A.cat.objects}
    perturbed = GradedSetFunctor(SetFunctor(A.cat, values, action), grades)
    rep2 = nerve_check(p, perturbed)
    assert not rep2.ok
    kinds = {f.get("kind") for f in rep2.failures}
    assert kinds & {"action_drift", "composition_drift"}
