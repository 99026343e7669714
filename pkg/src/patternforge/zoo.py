"""Stock pattern families: pointed finite sets, simplex shapes, and
two-level cell shapes, each truncated by size and offered in two
flavors that differ only in the choice of elementary objects.

All flavors of one family at one truncation share a single category
object, so comparison functors between flavors are identities on the
underlying data.

Encodings (morphism ids are self-describing tuples):

* pointed sets: objects 0..N for the pointed sets {0,..,n} based at 0;
  morphism (m, n, v) is the based map sending i > 0 to v[i-1].
  Backward maps have singleton fibers over nonzero points; forward maps
  send nothing but 0 to 0.
* simplex shapes: objects 0..N for the linear orders {0,..,n}; the
  category is dual to monotone maps, so morphism (m, n, d) from m to n
  carries the monotone d: {0..n} -> {0..m}. Backward maps carry
  interval inclusions; forward maps carry endpoint-preserving d.
* cell shapes: objects (n, (c_1,..,c_n)) are linear orders with a
  linear order sitting on each gap; total size n + sum(c). Morphism
  (X, Y, (d, xi)) carries a monotone d plus gap maps xi, dual as for
  simplex shapes, with the backward/forward classes read off
  componentwise. Truncation at size 2 is the supported window.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from .errors import SchemaError
from .fincat import FinCategory, FinFunctor, LazyCompose
from .pattern import Pattern
from .patmorph import PatternMorphism
from .setfun import SetFunctor

FAMILIES = ("fstar", "delta_op", "theta2")
FLAVORS = ("flat", "natural")

_THETA_MAX = 2


@dataclass(frozen=True)
class TruncationSpec:
    """Which family, up to which total size, with which elementaries."""
    family: str
    bound: int
    flavor: str

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise SchemaError(f"unknown family {self.family!r}; "
                              f"expected one of {FAMILIES}")
        if self.flavor not in FLAVORS:
            raise SchemaError(f"unknown flavor {self.flavor!r}; "
                              f"expected one of {FLAVORS}")
        if not isinstance(self.bound, int) or self.bound < 1:
            raise SchemaError(f"bound must be a positive int, got "
                              f"{self.bound!r}")
        if self.family == "theta2" and self.bound > _THETA_MAX:
            raise SchemaError(
                f"cell-shape truncation supports bound <= {_THETA_MAX}, "
                f"got {self.bound}")

    @property
    def name(self):
        return f"{self.family}:{self.flavor}:{self.bound}"


_FAMILY_ALIASES = {"delta": "delta_op", "simplices": "delta_op"}


def parse_spec(text):
    """Parse 'family:flavor:N' into a TruncationSpec."""
    parts = text.split(":")
    if len(parts) != 3:
        raise SchemaError(f"expected 'family:flavor:N', got {text!r}")
    family, flavor, bound = parts
    family = _FAMILY_ALIASES.get(family, family)
    try:
        bound = int(bound)
    except ValueError:
        raise SchemaError(f"truncation bound must be an int, got "
                          f"{parts[2]!r}") from None
    return TruncationSpec(family, bound, flavor)


def _block_pair_data(mors):
    """Composable-pair count and iterator from morphism triples."""
    hom = {}
    for m, s, t in mors:
        hom.setdefault((s, t), []).append(m)
    outgoing = {}
    for (a, b), fs in hom.items():
        outgoing[a] = outgoing.get(a, 0) + len(fs)
    count = sum(len(fs) * outgoing.get(b, 0) for (a, b), fs in hom.items())
    by_src = {}
    for (a, b), fs in hom.items():
        by_src.setdefault(a, []).extend(fs)

    def pairs():
        for (a, b), fs in hom.items():
            for g in by_src.get(b, ()):
                for f in fs:
                    yield g, f

    return count, pairs


# --- pointed finite sets ---------------------------------------------------


def _fstar_rule(g, f):
    gm, gn, gv = g
    fm, fn, fv = f
    if fn != gm:
        raise KeyError((g, f))
    return (fm, gn, tuple(gv[x - 1] if x else 0 for x in fv))


@lru_cache(maxsize=None)
def _fstar_data(bound):
    mors = []
    for m in range(bound + 1):
        for n in range(bound + 1):
            for v in itertools.product(range(n + 1), repeat=m):
                mors.append(((m, n, v), m, n))
    count, pairs = _block_pair_data(mors)
    cat = FinCategory(range(bound + 1), mors,
                      {n: (n, n, tuple(range(1, n + 1)))
                       for n in range(bound + 1)},
                      LazyCompose(_fstar_rule, count, pairs))
    inert = []
    active = []
    iso_table = {}
    for mid in cat.morphisms:
        m, n, v = mid
        fibers = Counter(x for x in v if x)
        if all(fibers.get(j, 0) == 1 for j in range(1, n + 1)):
            inert.append(mid)
        if all(x != 0 for x in v):
            active.append(mid)
        if m == n and sorted(v) == list(range(1, n + 1)):
            w = [0] * n
            for i, x in enumerate(v):
                w[x - 1] = i + 1
            iso_table[mid] = (n, n, tuple(w))
        else:
            iso_table[mid] = None
    cat.set_inverse_table(iso_table)
    return cat, frozenset(inert), frozenset(active), \
        {n: n for n in range(bound + 1)}


# --- simplex shapes --------------------------------------------------------


def _delta_rule(g, f):
    gm, gn, gd = g
    fm, fn, fd = f
    if fn != gm:
        raise KeyError((g, f))
    return (fm, gn, tuple(fd[i] for i in gd))


def _monotone(n, m):
    """All monotone maps {0..n} -> {0..m} as tuples of length n + 1."""
    return itertools.combinations_with_replacement(range(m + 1), n + 1)


def _is_interval(d):
    return all(d[i] == d[0] + i for i in range(len(d)))


def _is_endpoint(d, m):
    return d[0] == 0 and d[-1] == m


@lru_cache(maxsize=None)
def _delta_op_data(bound):
    mors = []
    for m in range(bound + 1):
        for n in range(bound + 1):
            for d in _monotone(n, m):
                mors.append(((m, n, d), m, n))
    count, pairs = _block_pair_data(mors)
    cat = FinCategory(range(bound + 1), mors,
                      {n: (n, n, tuple(range(n + 1)))
                       for n in range(bound + 1)},
                      LazyCompose(_delta_rule, count, pairs))
    inert = []
    active = []
    for mid in cat.morphisms:
        m, n, d = mid
        if _is_interval(d):
            inert.append(mid)
        if _is_endpoint(d, m):
            active.append(mid)
    # monotone self-bijections of a chain are identities
    cat.set_inverse_table({mid: (mid if cat.is_identity(mid) else None)
                           for mid in cat.morphisms})
    return cat, frozenset(inert), frozenset(active), \
        {n: n for n in range(bound + 1)}


# --- two-level cell shapes -------------------------------------------------


def _theta_objects(bound):
    out = []
    for n in range(bound + 1):
        for cs in itertools.product(range(bound + 1), repeat=n):
            if n + sum(cs) <= bound:
                out.append((n, cs))
    return sorted(out)


def _wreath_maps(src, tgt):
    """Underlying maps tgt -> src of cell-shape morphisms src -> tgt:
    a monotone d into src's spine plus, per spine step landed on, a
    monotone map between the gap orders."""
    m, a = src
    n, b = tgt
    for d in _monotone(n, m):
        gap_choices = []
        for j in range(1, n + 1):
            ks = range(d[j - 1] + 1, d[j] + 1)
            gap_choices.append([
                tuple(row)
                for row in itertools.product(
                    *[_monotone(b[j - 1], a[k - 1]) for k in ks])])
        for xi in itertools.product(*gap_choices):
            yield d, tuple(xi)


def _wreath_compose(u, v):
    """(u: Y -> X) after (v: Z -> Y), both in underlying direction."""
    du, xu = u
    dv, xv = v
    d = tuple(du[t] for t in dv)
    xi = []
    for i in range(1, len(dv)):
        row = []
        for j in range(dv[i - 1] + 1, dv[i] + 1):
            inner = xv[i - 1][j - dv[i - 1] - 1]
            for k in range(du[j - 1] + 1, du[j] + 1):
                outer = xu[j - 1][k - du[j - 1] - 1]
                row.append(tuple(outer[t] for t in inner))
        xi.append(tuple(row))
    return d, tuple(xi)


def _theta_rule(g, f):
    fs, ft, uf = f
    gs, gt, ug = g
    if ft != gs:
        raise KeyError((g, f))
    return (fs, gt, _wreath_compose(uf, ug))


@lru_cache(maxsize=None)
def _theta2_data(bound):
    objs = _theta_objects(bound)
    mors = []
    for X in objs:
        for Y in objs:
            for u in _wreath_maps(X, Y):
                mors.append(((X, Y, u), X, Y))
    count, pairs = _block_pair_data(mors)
    ident = {}
    for (n, cs) in objs:
        xi = tuple((tuple(range(c + 1)),) for c in cs)
        ident[(n, cs)] = ((n, cs), (n, cs), (tuple(range(n + 1)), xi))
    cat = FinCategory(objs, mors, ident,
                      LazyCompose(_theta_rule, count, pairs))
    inert = []
    active = []
    for mid in cat.morphisms:
        (m, a), (n, b), (d, xi) = mid
        flat = [z for row in xi for z in row]
        if _is_interval(d) and all(_is_interval(z) for z in flat):
            inert.append(mid)
        if _is_endpoint(d, m):
            ok = True
            for j in range(1, n + 1):
                for k in range(d[j - 1] + 1, d[j] + 1):
                    z = xi[j - 1][k - d[j - 1] - 1]
                    if not _is_endpoint(z, a[k - 1]):
                        ok = False
            if ok:
                active.append(mid)
    # spine and gap components of an iso are monotone self-bijections
    cat.set_inverse_table({mid: (mid if cat.is_identity(mid) else None)
                           for mid in cat.morphisms})
    grade = {(n, cs): n + sum(cs) for (n, cs) in objs}
    return cat, frozenset(inert), frozenset(active), grade


# --- assembly --------------------------------------------------------------


_DATA = {"fstar": _fstar_data, "delta_op": _delta_op_data,
         "theta2": _theta2_data}


def _elementaries(spec):
    if spec.family == "theta2":
        if spec.flavor == "flat":
            return ((1, (1,)),)
        return ((0, ()), (1, (0,)), (1, (1,)))
    if spec.flavor == "flat":
        return (1,)
    return (0, 1)


_built = {}


def build(spec):
    """The pattern described by a TruncationSpec (cached per spec)."""
    got = _built.get(spec)
    if got is None:
        cat, inert, active, grade = _DATA[spec.family](spec.bound)
        got = Pattern(cat, inert, active, _elementaries(spec),
                      grade=grade, grade_bound=spec.bound, name=spec.name)
        _built[spec] = got
    return got


def standard_zoo(fstar_bound=4, delta_bound=4, theta_bound=2):
    """The default round-up of stock patterns, one per family/flavor."""
    specs = []
    for flavor in FLAVORS:
        specs.append(TruncationSpec("fstar", fstar_bound, flavor))
        specs.append(TruncationSpec("delta_op", delta_bound, flavor))
        specs.append(TruncationSpec("theta2", theta_bound, flavor))
    return tuple(specs)


# --- comparison functors ---------------------------------------------------


def _realized_map(mid):
    """Pointed-set image of a simplex-shape morphism: i lands in the
    unique spine step whose preimage interval contains it, or at 0."""
    m, n, d = mid
    vals = []
    for i in range(1, m + 1):
        hit = 0
        for j in range(1, n + 1):
            if d[j - 1] < i <= d[j]:
                hit = j
                break
        vals.append(hit)
    return (m, n, tuple(vals))


def build_simplex_to_fstar(bound, flavor):
    """The spine-collapse comparison from simplex shapes to pointed
    sets, as a pattern morphism (objectwise the identity on sizes)."""
    src = build(TruncationSpec("delta_op", bound, flavor))
    tgt = build(TruncationSpec("fstar", bound, flavor))
    functor = FinFunctor(src.cat, tgt.cat,
                         {n: n for n in src.cat.objects},
                         {mid: _realized_map(mid)
                          for mid in src.cat.morphisms})
    return PatternMorphism(src, tgt, functor,
                           name=f"spine_collapse:{flavor}:{bound}")


def build_flat_to_natural(family, bound):
    """Identity-on-data comparison from the flat flavor into the
    natural flavor of the same family and truncation."""
    src = build(TruncationSpec(family, bound, "flat"))
    tgt = build(TruncationSpec(family, bound, "natural"))
    functor = FinFunctor(src.cat, tgt.cat,
                         {x: x for x in src.cat.objects},
                         {m: m for m in src.cat.morphisms})
    return PatternMorphism(src, tgt, functor,
                           name=f"{family}:flat_to_natural:{bound}")


# --- seeds -----------------------------------------------------------------


def elementary_category(p):
    """The full subcategory of the backward part on the elementaries."""
    return p.inert_subcategory().full_subcategory(tuple(p.elementary))


def discrete_seed(p, sizes):
    """A seed with the given value sets and no relations; only valid
    when the elementaries have no maps between them (flat flavors)."""
    el_cat = elementary_category(p)
    for m in el_cat.morphisms:
        if not el_cat.is_identity(m):
            raise SchemaError(
                "discrete seeds need an identity-only elementary "
                "category; use a constant or graph seed instead")
    values = {}
    for E in p.elementary:
        size = sizes[E]
        values[E] = tuple(range(size)) if isinstance(size, int) \
            else tuple(sorted(size))
    action = {el_cat.identity_of(E): {x: x for x in values[E]}
              for E in p.elementary}
    return SetFunctor(el_cat, values, action)


def constant_seed(p, size):
    """The constant seed: the same value set everywhere, every map the
    identity."""
    el_cat = elementary_category(p)
    vals = tuple(range(size)) if isinstance(size, int) \
        else tuple(sorted(size))
    values = {E: vals for E in p.elementary}
    action = {m: {x: x for x in vals} for m in el_cat.morphisms}
    return SetFunctor(el_cat, values, action)


def graph_seed(p, vertices, edges):
    """Vertices and edges as a seed on the natural simplex elementaries.

    ``edges`` maps edge labels to (source, target) vertex pairs. The
    two point inclusions into the edge shape pick out source (spine
    position 0) and target (spine position 1)."""
    if tuple(p.elementary) != (0, 1):
        raise SchemaError("graph seeds need the natural simplex "
                          "elementaries 0 and 1")
    vertices = tuple(sorted(vertices))
    for e, (s, t) in edges.items():
        if s not in vertices or t not in vertices:
            raise SchemaError(f"edge {e!r} touches unknown vertices")
    el_cat = elementary_category(p)
    values = {0: vertices, 1: tuple(sorted(edges))}
    action = {}
    for m in el_cat.morphisms:
        if el_cat.is_identity(m):
            action[m] = {x: x for x in values[el_cat.src(m)]}
        else:
            _, _, d = m
            pick = 0 if d[0] == 0 else 1
            action[m] = {e: edges[e][pick] for e in values[1]}
    return SetFunctor(el_cat, values, action)
