import pytest

from patternforge import io, zoo
from patternforge.errors import SchemaError
from patternforge.freemonad import FreeSegalMonad
from patternforge.patmorph import point_inclusion
from patternforge.setfun import GradedSetFunctor, SetFunctor

from test_fincat import span_cat


def test_category_round_trip():
    cat = span_cat()
    doc = io.category_to_doc(cat)
    text = io.canonical_dumps(doc)
    back = io.category_from_doc(io.loads(text))
    assert io.canonical_dumps(io.category_to_doc(back)) == text
    assert set(back.objects) == set(cat.objects)
    assert set(back.morphisms) == set(cat.morphisms)


def test_pattern_round_trip(fstar_flat_2, theta_natural_2):
    for p in (fstar_flat_2, theta_natural_2):
        text = io.canonical_dumps(io.pattern_to_doc(p))
        back = io.pattern_from_doc(io.loads(text))
        assert io.canonical_dumps(io.pattern_to_doc(back)) == text
        assert set(back.inert) == set(p.inert)
        assert set(back.active) == set(p.active)
        assert back.elementary == p.elementary


def test_carrier_round_trip(fstar_flat_2):
    p = fstar_flat_2
    seed = zoo.discrete_seed(p, {1: 2})
    monad = FreeSegalMonad(p, seed, bound=2)
    F = monad.functor()
    text = io.canonical_dumps(io.set_functor_to_doc(F))
    back = io.set_functor_from_doc(io.loads(text), p.cat)
    assert isinstance(back, GradedSetFunctor)
    assert io.canonical_dumps(io.set_functor_to_doc(back)) == text
    for x in p.cat.objects:
        assert back.value(x) == F.value(x)
        assert back.buckets(x) == F.buckets(x)


def test_plain_carrier_round_trip(fstar_flat_2):
    cat = fstar_flat_2.cat
    values = {x: tuple(f"e{i}" for i in range(2)) for x in cat.objects}
    action = {}
    for m, s, t in cat.mor_triples():
        action[m] = {e: values[t][0] for e in values[s]}
    F = SetFunctor(cat, values, action)
    text = io.canonical_dumps(io.set_functor_to_doc(F))
    back = io.set_functor_from_doc(io.loads(text), cat)
    assert not isinstance(back, GradedSetFunctor)
    assert io.canonical_dumps(io.set_functor_to_doc(back)) == text


def test_morphism_round_trip(delta_natural_3):
    P = point_inclusion(delta_natural_3, 0)
    text = io.canonical_dumps(io.morphism_to_doc(P))
    back = io.morphism_from_doc(io.loads(text))
    assert io.canonical_dumps(io.morphism_to_doc(back)) == text
    assert back.obj(0) == P.obj(0)


def test_schema_mismatch_names_both(fstar_flat_2):
    doc = io.pattern_to_doc(fstar_flat_2)
    with pytest.raises(SchemaError) as exc:
        io.category_from_doc(doc)
    assert io.FINCAT_SCHEMA in str(exc.value)
    assert io.PATTERN_SCHEMA in str(exc.value)


def test_malformed_json_rejected():
    with pytest.raises(SchemaError):
        io.loads("{not json")
    with pytest.raises(SchemaError):
        io.loads('"unclosed')


def test_label_encoding_restrictions(fstar_flat_2):
    assert io._enc((2, 1, (1, 1))) == [2, 1, [1, 1]]
    assert io._dec([2, 1, [1, 1]]) == (2, 1, (1, 1))
    with pytest.raises(SchemaError):
        io._enc(True)
    with pytest.raises(SchemaError):
        io._enc(3.5)
    with pytest.raises(SchemaError):
        io._enc(None)


def test_completion_doc(fstar_flat_2):
    from patternforge.completion import completion
    comp = completion(fstar_flat_2, bound=2)
    doc = io.completion_to_doc(comp)
    assert doc["schema"] == io.COMPLETION_SCHEMA
    counts = {(row[0], row[1]): row[2] for row in doc["hom_counts"]}
    assert counts[(1, 1)] == 3
    assert counts[(2, 2)] == 15
    io.canonical_dumps(doc)
