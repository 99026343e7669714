import pytest

from patternforge import zoo
from patternforge.errors import SchemaError
from patternforge.fincat import validate_category
from patternforge.pattern import validate_pattern

import oracles


def test_spec_validation():
    spec = zoo.TruncationSpec("fstar", 3, "flat")
    assert spec.name == "fstar:flat:3"
    with pytest.raises(SchemaError):
        zoo.TruncationSpec("nosuch", 3, "flat")
    with pytest.raises(SchemaError):
        zoo.TruncationSpec("fstar", 3, "sparkling")
    with pytest.raises(SchemaError):
        zoo.TruncationSpec("fstar", 0, "flat")
    with pytest.raises(SchemaError):
        zoo.TruncationSpec("fstar", "three", "flat")
    with pytest.raises(SchemaError):
        zoo.TruncationSpec("theta2", 3, "flat")


def test_parse_spec():
    spec = zoo.parse_spec("delta:natural:4")
    assert spec.family == "delta_op"
    assert spec.bound == 4
    assert zoo.parse_spec("fstar:flat:2").name == "fstar:flat:2"
    with pytest.raises(SchemaError):
        zoo.parse_spec("fstar:flat")
    with pytest.raises(SchemaError):
        zoo.parse_spec("fstar:flat:N")


def test_standard_zoo_contents():
    specs = zoo.standard_zoo()
    assert len(specs) == 6
    names = {s.name for s in specs}
    assert "fstar:flat:4" in names
    assert "theta2:natural:2" in names


def test_flavors_share_categories(fstar_flat_3, fstar_natural_3):
    assert fstar_flat_3.cat is fstar_natural_3.cat
    assert fstar_flat_3.elementary == (1,)
    assert fstar_natural_3.elementary == (0, 1)


def test_based_counts_at_bound_four(fstar_flat_4):
    p = fstar_flat_4
    assert len(p.cat.morphisms) == 1279
    assert p.cat.pair_count() == 848469
    non_id_iso = [m for m in p.cat.morphisms
                  if p.cat.is_iso(m) and not p.cat.is_identity(m)]
    assert len(p.inert) == 89
    assert len(p.active) == 499
    assert non_id_iso


def test_monotone_counts_at_bound_five():
    p = zoo.build(zoo.TruncationSpec("delta_op", 5, "flat"))
    assert len(p.cat.morphisms) == oracles.monotone_count(5) == 1709


def test_cell_shapes_at_bound_two(theta_natural_2):
    p = theta_natural_2
    assert len(p.cat.objects) == 4
    assert len(p.cat.morphisms) == 58
    assert p.grade_of((0, ())) == 0
    assert p.grade_of((1, (1,))) == 2
    assert p.grade_of((2, (0, 0))) == 2
    assert validate_category(p.cat).passed
    assert validate_pattern(p).passed


def test_based_classes_match_oracle(fstar_flat_3):
    p = fstar_flat_3
    for m, s, t in p.cat.mor_triples():
        v = m[2]
        assert p.is_inert(m) == oracles.based_is_inert(t, v)
        assert p.is_active(m) == oracles.based_is_active(v)


def test_based_composition_matches_oracle(fstar_flat_2):
    cat = fstar_flat_2.cat
    for g, f in cat.composable_pairs():
        assert cat.comp(g, f)[2] == oracles.based_compose(g[2], f[2])


def test_monotone_classes_match_oracle(delta_flat_3):
    p = delta_flat_3
    for m, s, t in p.cat.mor_triples():
        d = m[2]
        assert p.is_inert(m) == oracles.monotone_is_interval(d)
        assert p.is_active(m) == \
            oracles.monotone_is_endpoint_preserving(d, s)


def test_monotone_composition_matches_oracle(delta_flat_3):
    cat = delta_flat_3.cat
    for g, f in cat.composable_pairs():
        assert cat.comp(g, f)[2] == oracles.monotone_compose(f[2], g[2])


def test_inverse_tables_against_search(fstar_flat_3, delta_flat_3):
    cat = fstar_flat_3.cat
    for m, s, t in cat.mor_triples():
        expected = None
        for w in cat.hom(t, s):
            if cat.comp(w, m) == cat.identity_of(s) \
                    and cat.comp(m, w) == cat.identity_of(t):
                expected = w
                break
        assert cat.inverse(m) == expected
    dcat = delta_flat_3.cat
    for m in dcat.morphisms:
        if dcat.is_identity(m):
            assert dcat.inverse(m) == m
        else:
            assert dcat.inverse(m) is None


def test_elementary_category_and_seeds(fstar_flat_3, fstar_natural_3,
                                       delta_natural_3):
    el = zoo.elementary_category(fstar_flat_3)
    assert el.objects == (1,)
    seed = zoo.discrete_seed(fstar_flat_3, {1: 3})
    assert seed.value(1) == (0, 1, 2)
    with pytest.raises(SchemaError):
        zoo.discrete_seed(fstar_natural_3, {0: 1, 1: 2})
    const = zoo.constant_seed(fstar_natural_3, 2)
    assert set(const.values) == {0, 1}
    with pytest.raises(SchemaError):
        zoo.graph_seed(fstar_flat_3, ["a"], {})
    with pytest.raises(SchemaError):
        zoo.graph_seed(delta_natural_3, ["a"], {"e": ("a", "zzz")})
    g = zoo.graph_seed(delta_natural_3, ["a", "b"], {"e": ("a", "b")})
    assert g.value(0) == ("a", "b")
    assert g.value(1) == ("e",)


def test_morphism_builders_named():
    spine = zoo.build_simplex_to_fstar(2, "flat")
    assert spine.name == "spine_collapse:flat:2"
    assert spine.obj(2) == 2
    widen = zoo.build_flat_to_natural("delta_op", 2)
    assert widen.source.elementary == (1,)
    assert widen.target.elementary == (0, 1)
    assert widen.obj(1) == 1
