"""JSON documents for categories, patterns, carriers, and morphisms.

Every document carries a ``schema`` tag. Serialization is canonical:
object keys are sorted, there is no insignificant whitespace, and the
same data always produces the same bytes, so a load followed by a dump
reproduces the input exactly. Composite labels (tuples) serialize as
arrays and reload as tuples; loading a document under the wrong schema
tag raises SchemaError naming both the expected and the found version.
"""

import json

from .errors import SchemaError
from .fincat import FinCategory, FinFunctor
from .pattern import Pattern
from .patmorph import PatternMorphism
from .setfun import GradedSetFunctor, SetFunctor

FINCAT_SCHEMA = "fincat/v1"
PATTERN_SCHEMA = "pattern/v1"
SETFUN_SCHEMA = "setfun/v1"
PATMORPH_SCHEMA = "patmorph/v1"
COMPLETION_SCHEMA = "completion/v1"


def canonical_dumps(doc):
    """Serialize a document to its canonical byte form."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def loads(text):
    """Parse a JSON document, reporting malformed input as SchemaError."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from None


def _expect(doc, schema):
    if not isinstance(doc, dict) or "schema" not in doc:
        raise SchemaError(f"expected a {schema} document with a "
                          "'schema' field")
    found = doc["schema"]
    if found != schema:
        raise SchemaError(f"expected schema {schema}, found {found}")


def _enc(label):
    """Encode a label: strings and integers stay, tuples become arrays."""
    if isinstance(label, bool) or label is None:
        raise SchemaError(f"unsupported label {label!r}")
    if isinstance(label, (str, int)):
        return label
    if isinstance(label, (tuple, list)):
        return [_enc(x) for x in label]
    raise SchemaError(f"unsupported label type {type(label).__name__} "
                      f"for {label!r}")


def _dec(node):
    """Decode a label: arrays become tuples."""
    if isinstance(node, list):
        return tuple(_dec(x) for x in node)
    return node


def category_to_doc(cat):
    """Serialize a finite category, composition table included."""
    pairs = sorted(cat.composable_pairs())
    return {
        "schema": FINCAT_SCHEMA,
        "objects": [_enc(x) for x in cat.objects],
        "morphisms": [[_enc(m), _enc(s), _enc(t)]
                      for m, s, t in cat.mor_triples()],
        "identity": [[_enc(x), _enc(cat.identity_of(x))]
                     for x in cat.objects],
        "compose": [[_enc(g), _enc(f), _enc(cat.comp(g, f))]
                    for g, f in pairs],
    }


def category_from_doc(doc):
    _expect(doc, FINCAT_SCHEMA)
    try:
        objects = [_dec(x) for x in doc["objects"]]
        morphisms = [(_dec(m), _dec(s), _dec(t))
                     for m, s, t in doc["morphisms"]]
        identity = {_dec(x): _dec(i) for x, i in doc["identity"]}
        compose = {(_dec(g), _dec(f)): _dec(h)
                   for g, f, h in doc["compose"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed {FINCAT_SCHEMA} document: "
                          f"{exc}") from None
    return FinCategory(objects, morphisms, identity, compose)


def pattern_to_doc(p):
    """Serialize a pattern: its category plus the marking data."""
    doc = category_to_doc(p.cat)
    doc["schema"] = PATTERN_SCHEMA
    doc["inert"] = [_enc(m) for m in sorted(p.inert)]
    doc["active"] = [_enc(m) for m in sorted(p.active)]
    doc["elementary"] = [_enc(x) for x in p.elementary]
    doc["grade"] = (None if p.grade is None else
                    [[_enc(x), p.grade[x]] for x in sorted(p.grade)])
    doc["grade_bound"] = p.grade_bound
    doc["name"] = p.name or None
    return doc


def pattern_from_doc(doc):
    _expect(doc, PATTERN_SCHEMA)
    inner = dict(doc)
    inner["schema"] = FINCAT_SCHEMA
    cat = category_from_doc(inner)
    try:
        inert = frozenset(_dec(m) for m in doc["inert"])
        active = frozenset(_dec(m) for m in doc["active"])
        elementary = tuple(_dec(x) for x in doc["elementary"])
        grade = doc["grade"]
        if grade is not None:
            grade = {_dec(x): g for x, g in grade}
        bound = doc["grade_bound"]
        name = doc.get("name") or ""
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed {PATTERN_SCHEMA} document: "
                          f"{exc}") from None
    return Pattern(cat, inert, active, elementary, grade=grade,
                   grade_bound=bound, name=name)


def set_functor_to_doc(F):
    """Serialize a Set-valued carrier.

    Elements use the same label encoding as morphisms, so computed
    carriers whose elements are nested tuples round-trip unchanged.
    """
    cat = F.cat
    values = [[_enc(x), [_enc(e) for e in F.value(x)]]
              for x in cat.objects]
    action = []
    for m, s, t in cat.mor_triples():
        fmap = F.map_dict(m) if hasattr(F, "map_dict") else F.action[m]
        action.append([_enc(m),
                       [[_enc(e), _enc(v)]
                        for e, v in sorted(fmap.items(),
                                           key=lambda kv: repr(kv[0]))]])
    doc = {"schema": SETFUN_SCHEMA, "values": values, "action": action}
    if isinstance(F, GradedSetFunctor):
        doc["grades"] = [[_enc(x),
                          [[_enc(e), F.grade(x, e)] for e in F.value(x)]]
                         for x in cat.objects]
    else:
        doc["grades"] = None
    return doc


def set_functor_from_doc(doc, cat):
    _expect(doc, SETFUN_SCHEMA)
    try:
        values = {_dec(x): [_dec(e) for e in es] for x, es in doc["values"]}
        action = {_dec(m): {_dec(e): _dec(v) for e, v in fm}
                  for m, fm in doc["action"]}
        grades = doc["grades"]
        if grades is not None:
            grades = {_dec(x): {_dec(e): g for e, g in gm}
                      for x, gm in grades}
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed {SETFUN_SCHEMA} document: "
                          f"{exc}") from None
    F = SetFunctor(cat, values, action)
    if grades is None:
        return F
    return GradedSetFunctor(F, grades)


def morphism_to_doc(m):
    """Serialize a pattern morphism with both endpoint patterns inline."""
    return {
        "schema": PATMORPH_SCHEMA,
        "name": m.name or None,
        "source": pattern_to_doc(m.source),
        "target": pattern_to_doc(m.target),
        "objects": [[_enc(x), _enc(m.obj(x))]
                    for x in m.source.cat.objects],
        "morphisms": [[_enc(f), _enc(m.mor(f))]
                      for f in m.source.cat.morphisms],
    }


def morphism_from_doc(doc):
    _expect(doc, PATMORPH_SCHEMA)
    try:
        source = pattern_from_doc(doc["source"])
        target = pattern_from_doc(doc["target"])
        obj_map = {_dec(x): _dec(y) for x, y in doc["objects"]}
        mor_map = {_dec(f): _dec(g) for f, g in doc["morphisms"]}
        name = doc.get("name") or ""
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed {PATMORPH_SCHEMA} document: "
                          f"{exc}") from None
    functor = FinFunctor(source.cat, target.cat, obj_map, mor_map)
    return PatternMorphism(source, target, functor, name=name)


def completion_to_doc(comp):
    """Summarize a completed pattern: hom counts and grade histogram."""
    p = comp.pattern
    homs = []
    histogram = {}
    for X in p.cat.objects:
        for Y in p.cat.objects:
            block = comp.hom(X, Y)
            homs.append([_enc(X), _enc(Y), len(block)])
            for h in block:
                g = comp.grade(h)
                histogram[g] = histogram.get(g, 0) + 1
    return {
        "schema": COMPLETION_SCHEMA,
        "name": p.name or None,
        "bound": comp.bound,
        "objects": [_enc(x) for x in p.cat.objects],
        "hom_counts": homs,
        "grade_histogram": [[g, histogram[g]] for g in sorted(histogram)],
    }


def dump_pattern(p):
    """Pattern to canonical JSON text."""
    return canonical_dumps(pattern_to_doc(p))


def load_pattern(text):
    """Pattern from JSON text."""
    return pattern_from_doc(loads(text))
