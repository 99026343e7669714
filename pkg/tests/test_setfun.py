import itertools

import pytest

from patternforge.errors import CoherenceError, SchemaError
from patternforge.fincat import FinCategory, FinFunctor
from patternforge.setfun import (GradedSetFunctor, NatTransformation,
                                 SetFunctor, Square, colimit,
                                 enumerate_nat_transfs, is_pullback_square,
                                 kan_extend, limit, restrict_along,
                                 validate_set_functor)

import oracles
from test_fincat import point, span_cat, walking_arrow


def arrow_functor(av=("x", "y"), bv=("z",), send=None):
    c = walking_arrow()
    send = send or {"x": "z", "y": "z"}
    return SetFunctor(c, {"a": av, "b": bv}, {"f": send})


def test_identity_actions_filled_in():
    F = arrow_functor()
    assert F.apply("ida", "x") == "x"
    assert F.map_dict("idb") == {"z": "z"}
    assert F.total_size() == 3
    assert not validate_set_functor(F)


def test_validate_catches_non_functorial_action():
    c = walking_arrow()
    F = SetFunctor(c, {"a": ("x",), "b": ("z", "w")}, {"f": {"x": "z"}})
    F.action["idb"] = {"z": "w", "w": "z"}
    assert validate_set_functor(F)


def test_validate_catches_missing_value():
    c = walking_arrow()
    F = SetFunctor(c, {"a": ("x",), "b": ("z",)}, {"f": {"x": "nope"}})
    assert validate_set_functor(F)


def test_limit_over_span_matches_fiber_product():
    c = span_cat()
    F = SetFunctor(
        c,
        {"l": (0, 1), "m": ("u", "v", "w"), "r": ("s", "t")},
        {"p": {"u": 0, "v": 0, "w": 1}, "q": {"u": "s", "v": "t", "w": "t"}})
    res = limit(F)
    assert len(res.elements) == 3
    for fam in res.elements:
        d = res.as_dict(fam)
        assert F.apply("p", d["m"]) == d["l"]
        assert F.apply("q", d["m"]) == d["r"]


def test_colimit_matches_independent_union_find():
    c = span_cat()
    F = SetFunctor(
        c,
        {"l": (0, 1), "m": ("u", "v"), "r": ("s",)},
        {"p": {"u": 0, "v": 1}, "q": {"u": "s", "v": "s"}})
    res = colimit(F)
    nodes = [(x, e) for x in c.objects for e in F.value(x)]
    uf = oracles.IndependentUnionFind(nodes)
    for m, a, b in c.mor_triples():
        for e in F.value(a):
            uf.union((a, e), (b, F.apply(m, e)))
    assert len(res.classes) == uf.class_count()
    assert res.class_of("l", 0) == res.class_of("l", 1)


def test_restrict_along_inclusion():
    c = walking_arrow()
    sub = c.full_subcategory(["a"])
    J = FinFunctor(sub, c, {"a": "a"}, {"ida": "ida"})
    F = arrow_functor()
    R = restrict_along(J, F)
    assert R.value("a") == F.value("a")
    assert not validate_set_functor(R)


def test_kan_extension_along_point_inclusion():
    c = walking_arrow()
    pt = point()
    J = FinFunctor(pt, c, {"pt": "a"}, {"id": "ida"})
    F = SetFunctor(pt, {"pt": (1, 2)}, {})
    right = kan_extend("right", J, F).functor
    left = kan_extend("left", J, F).functor
    assert len(right.value("a")) == 2
    assert len(right.value("b")) == 1
    assert len(left.value("a")) == 2
    assert len(left.value("b")) == 2
    assert not validate_set_functor(right)
    assert not validate_set_functor(left)
    with pytest.raises(ValueError):
        kan_extend("sideways", J, F)


def test_kan_extension_along_identity_is_identity():
    F = arrow_functor()
    J = FinFunctor.identity(F.cat)
    for direction in ("left", "right"):
        out = kan_extend(direction, J, F).functor
        assert {x: len(out.value(x)) for x in F.cat.objects} == \
            {x: len(F.value(x)) for x in F.cat.objects}


def test_nat_transformation_naturality():
    F = arrow_functor()
    G = arrow_functor(av=("x", "y"), bv=("z",), send={"x": "z", "y": "z"})
    eta = NatTransformation(F, G, {"a": {"x": "y", "y": "y"},
                                   "b": {"z": "z"}})
    assert eta.is_natural()
    assert eta.apply("a", "x") == "y"
    bad = NatTransformation(
        F, SetFunctor(F.cat, {"a": ("x", "y"), "b": ("z", "w")},
                      {"f": {"x": "z", "y": "w"}}),
        {"a": {"x": "x", "y": "y"}, "b": {"z": "w"}})
    assert not bad.is_natural()
    assert bad.naturality_failures()


def test_enumerate_nat_transfs_counts():
    F = arrow_functor()
    G = arrow_functor()
    found = enumerate_nat_transfs(F, G)
    # component at b is forced; component at a is any of 2x2 maps
    assert len(found) == 4
    for eta in found:
        assert eta.is_natural()


def test_pullback_square_detection():
    top = [("x", "u"), ("y", "u")]
    sq = Square(top=tuple(top), left_set=("x", "y"), right_set=("u",),
                bottom=("c",),
                to_left={t: t[0] for t in top},
                to_right={t: t[1] for t in top},
                left_down={"x": "c", "y": "c"},
                right_down={"u": "c"})
    assert is_pullback_square(sq)
    missing = Square(top=(("x", "u"),), left_set=("x", "y"),
                     right_set=("u",), bottom=("c",),
                     to_left={("x", "u"): "x"},
                     to_right={("x", "u"): "u"},
                     left_down={"x": "c", "y": "c"},
                     right_down={"u": "c"})
    assert not is_pullback_square(missing)
    broken = Square(top=(("x", "u"),), left_set=("x",), right_set=("u",),
                    bottom=("c", "d"),
                    to_left={("x", "u"): "x"},
                    to_right={("x", "u"): "u"},
                    left_down={"x": "c"}, right_down={"u": "d"})
    with pytest.raises(CoherenceError):
        is_pullback_square(broken)


def test_graded_functor_accessors():
    F = arrow_functor()
    G = GradedSetFunctor(F, {"a": {"x": 0, "y": 1}, "b": {"z": 0}})
    assert G.cat is F.cat
    assert G.value("a") == F.value("a")
    assert G.apply("f", "x") == "z"
    assert G.grade("a", "y") == 1
    assert G.buckets("a") == {0: ["x"], 1: ["y"]}
