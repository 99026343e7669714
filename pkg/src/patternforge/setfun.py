"""Set-valued functors on finite categories, and their calculus.

A SetFunctor stores, per object, an ordered tuple of element labels and,
per morphism, the induced map as a dict. Limits are computed by
constraint-propagating backtracking over family assignments; colimits by
union-find over the disjoint union of values. Kan extensions reduce to
limits/colimits over comma data, without materializing comma categories.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BudgetMeter, CoherenceError
from .fincat import UnionFind


class SetFunctor:
    """Functor to finite sets: values per object, maps per morphism.

    Identity actions may be omitted; they are filled in automatically.
    """

    __slots__ = ("cat", "values", "action")

    def __init__(self, cat, values, action):
        self.cat = cat
        self.values = {x: tuple(vs) for x, vs in values.items()}
        self.action = {m: dict(f) for m, f in action.items()}
        for x in cat.objects:
            i = cat.identity_of(x)
            if i not in self.action:
                self.action[i] = {e: e for e in self.values.get(x, ())}

    def value(self, x):
        return self.values[x]

    def apply(self, m, e):
        return self.action[m][e]

    def map_dict(self, m):
        return self.action[m]

    def total_size(self):
        return sum(len(v) for v in self.values.values())


def validate_set_functor(F, budget=2_000_000):
    """Check functoriality; returns a list of violation dicts (empty = pass)."""
    cat = F.cat
    bad = []
    for x in cat.objects:
        if x not in F.values:
            bad.append({"kind": "value_missing", "object": x})
    if bad:
        return bad
    for m, a, b in cat.mor_triples():
        f = F.action.get(m)
        if f is None:
            bad.append({"kind": "action_missing", "morphism": m})
            continue
        if set(f) != set(F.value(a)):
            bad.append({"kind": "action_domain", "morphism": m})
            continue
        if not set(f.values()) <= set(F.value(b)):
            bad.append({"kind": "action_codomain", "morphism": m})
    if bad:
        return bad
    for x in cat.objects:
        i = cat.identity_of(x)
        for e in F.value(x):
            if F.apply(i, e) != e:
                bad.append({"kind": "identity_action", "object": x, "element": e})
    meter = BudgetMeter(budget, "functoriality scan")
    for g, f in cat.composable_pairs():
        meter.tick()
        gf = cat.compose[(g, f)]
        for e in F.value(cat.src(f)):
            if F.apply(gf, e) != F.apply(g, F.apply(f, e)):
                bad.append({"kind": "composition_action", "g": g, "f": f,
                            "element": e})
                break
    return bad


def restrict_along(J, F):
    """Precompose the SetFunctor F (on J.target) with the functor J."""
    values = {a: F.value(J.obj(a)) for a in J.source.objects}
    action = {m: dict(F.map_dict(J.mor(m))) for m in J.source.morphisms}
    return SetFunctor(J.source, values, action)


# --- generic family search (shared by limits and right Kan extensions) ----


def _families(nodes, value_of, constraints, meter):
    """All assignments node -> element satisfying map constraints.

    constraints: list of (src_node, tgt_node, mapping dict). Returns
    families as tuples aligned with ``nodes`` (which must be sorted).
    """
    n = len(nodes)
    node_pos = {v: i for i, v in enumerate(nodes)}
    # BFS order from the least node over the constraint graph, so earlier
    # assignments force later ones
    adj = {v: set() for v in nodes}
    for s, t, _ in constraints:
        adj[s].add(t)
        adj[t].add(s)
    order = []
    seen = set()
    for start in nodes:
        if start in seen:
            continue
        queue = [start]
        seen.add(start)
        while queue:
            v = queue.pop(0)
            order.append(v)
            for w in sorted(adj[v]):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    placed = {v: i for i, v in enumerate(order)}
    ready = [[] for _ in range(n)]
    for s, t, mapping in constraints:
        ready[max(placed[s], placed[t])].append((s, t, mapping))
    assign = {}
    results = []

    def extend(i):
        if i == n:
            results.append(tuple(assign[v] for v in nodes))
            return
        node = order[i]
        forced = None
        checks = []
        for s, t, mapping in ready[i]:
            if t == node and s != node:
                v = mapping.get(assign[s])
                if forced is None:
                    forced = v
                elif forced != v:
                    return
            else:
                checks.append((s, t, mapping))
        if forced is not None:
            candidates = (forced,) if forced in set(value_of(node)) else ()
        else:
            candidates = value_of(node)
        for e in candidates:
            meter.tick()
            assign[node] = e
            if all(mapping.get(assign[s]) == assign[t] for s, t, mapping in checks):
                extend(i + 1)
        assign.pop(node, None)

    extend(0)
    results.sort(key=lambda fam: tuple(
        value_of(v).index(e) for v, e in zip(nodes, fam)))
    return results


@dataclass(frozen=True)
class LimitResult:
    """Limit of a SetFunctor over its whole source category.

    elements are compatible families, as tuples aligned with ``objects``.
    """
    objects: tuple
    elements: tuple

    def as_dict(self, family):
        return dict(zip(self.objects, family))


def limit(F, budget=None):
    cat = F.cat
    nodes = list(cat.objects)
    meter = BudgetMeter(budget, "limit family search")
    constraints = [(a, b, F.map_dict(m)) for m, a, b in cat.mor_triples()]
    fams = _families(nodes, F.value, constraints, meter)
    return LimitResult(tuple(nodes), tuple(fams))


@dataclass(frozen=True)
class ColimitResult:
    """Colimit of a SetFunctor: connected classes of the element graph.

    classes[i] lists its members as (object, element) pairs; labels[i] is
    the least member, used as the canonical name of the class.
    """
    classes: tuple
    labels: tuple
    index_of: dict

    def class_of(self, obj, elem):
        return self.index_of[(obj, elem)]

    def label_of(self, obj, elem):
        return self.labels[self.index_of[(obj, elem)]]


def _element_key(F):
    pos = {x: {e: i for i, e in enumerate(vs)} for x, vs in F.values.items()}
    return lambda node: (node[0], pos[node[0]][node[1]])


def colimit(F):
    cat = F.cat
    nodes = [(x, e) for x in cat.objects for e in F.value(x)]
    uf = UnionFind(nodes)
    for m, a, b in cat.mor_triples():
        mapping = F.map_dict(m)
        for e in F.value(a):
            uf.union((a, e), (b, mapping[e]))
    key = _element_key(F)
    groups = {}
    for node in nodes:
        groups.setdefault(uf.find(node), []).append(node)
    classes = sorted((sorted(g, key=key) for g in groups.values()),
                     key=lambda g: key(g[0]))
    labels = tuple(min(g, key=key) for g in classes)
    index_of = {}
    for i, g in enumerate(classes):
        for node in g:
            index_of[node] = i
    return ColimitResult(tuple(tuple(g) for g in classes), labels, index_of)


# --- Kan extensions ------------------------------------------------------


@dataclass(frozen=True)
class KanResult:
    """A Kan extension along a functor, with its universal transformation.

    direction 'left': ``arm`` is the unit F(a) -> (Lan F)(J a), as
    {a: {elem: elem}}. direction 'right': ``arm`` is the counit
    (Ran F)(J a) -> F(a).
    """
    direction: str
    functor: SetFunctor
    arm: dict


def _right_kan(J, F, budget):
    A, B = J.source, J.target
    meter = BudgetMeter(budget, "right Kan extension")
    node_sets = {}
    for b in B.objects:
        ns = sorted((a, phi) for a in A.objects for phi in B.hom(b, J.obj(a)))
        node_sets[b] = ns
    values = {}
    for b in B.objects:
        nodes = node_sets[b]
        constraints = []
        for (a, phi) in nodes:
            for u in A.morphisms:
                if A.src(u) != a:
                    continue
                phi2 = B.comp(J.mor(u), phi)
                constraints.append(((a, phi), (A.tgt(u), phi2), F.map_dict(u)))
        fams = _families(nodes, lambda nd: F.value(nd[0]), constraints, meter)
        values[b] = tuple(tuple(zip(nodes, fam)) for fam in fams)
    action = {}
    for v, b2, b in ((m, B.src(m), B.tgt(m)) for m in B.morphisms):
        lut = {}
        idx = {node: i for i, node in enumerate(node_sets[b2])}
        for fam in values[b2]:
            comps = dict(fam)
            image = tuple(((a, phi), comps[(a, B.comp(phi, v))])
                          for (a, phi) in node_sets[b])
            lut[fam] = image
        action[v] = lut
    out = SetFunctor(B, values, action)
    counit = {}
    for a in A.objects:
        b = J.obj(a)
        ident = B.identity_of(b)
        counit[a] = {fam: dict(fam)[(a, ident)] for fam in values[b]}
    return KanResult("right", out, counit)


def _left_kan(J, F, budget):
    A, B = J.source, J.target
    pos = {x: {e: i for i, e in enumerate(vs)} for x, vs in F.values.items()}

    def key(node):
        (a, phi), e = node
        return (a, phi, pos[a][e])

    classes_at = {}
    label_at = {}
    for b in B.objects:
        nodes = [((a, phi), e) for a in A.objects for phi in B.hom(J.obj(a), b)
                 for e in F.value(a)]
        uf = UnionFind(nodes)
        for u in A.morphisms:
            a, a2 = A.src(u), A.tgt(u)
            ju = J.mor(u)
            for phi2 in B.hom(J.obj(a2), b):
                phi = B.comp(phi2, ju)
                for e in F.value(a):
                    uf.union(((a, phi), e), ((a2, phi2), F.apply(u, e)))
        groups = {}
        for node in nodes:
            groups.setdefault(uf.find(node), []).append(node)
        labels = sorted((min(g, key=key) for g in groups.values()), key=key)
        classes_at[b] = labels
        lut = {}
        for g in groups.values():
            lab = min(g, key=key)
            for node in g:
                lut[node] = lab
        label_at[b] = lut
    values = {b: tuple(classes_at[b]) for b in B.objects}
    action = {}
    for v in B.morphisms:
        b, b2 = B.src(v), B.tgt(v)
        lut = {}
        for lab in classes_at[b]:
            (a, phi), e = lab
            moved = ((a, B.comp(v, phi)), e)
            lut[lab] = label_at[b2][moved]
        action[v] = lut
    out = SetFunctor(B, values, action)
    unit = {}
    for a in A.objects:
        b = J.obj(a)
        ident = B.identity_of(b)
        unit[a] = {e: label_at[b][((a, ident), e)] for e in F.value(a)}
    return KanResult("left", out, unit)


def kan_extend(direction, J, F, budget=None):
    """Kan-extend the SetFunctor F along the functor J.

    Right extensions are families over the departing comma; left
    extensions are zigzag classes over the arriving comma. The returned
    arm is the counit (right) or unit (left) at each source object.
    """
    if direction == "right":
        return _right_kan(J, F, budget)
    if direction == "left":
        return _left_kan(J, F, budget)
    raise ValueError(f"unknown Kan direction: {direction!r}")


# --- natural transformations ---------------------------------------------


class NatTransformation:
    """A natural transformation between two SetFunctors on one base.

    Components are stored as per-object dictionaries mapping source
    elements to target elements.
    """

    __slots__ = ("source", "target", "components")

    def __init__(self, source, target, components):
        self.source = source
        self.target = target
        self.components = {x: dict(c) for x, c in components.items()}

    def component(self, x):
        return self.components[x]

    def apply(self, x, e):
        return self.components[x][e]

    def naturality_failures(self, max_failures=None):
        """Squares that fail to commute, as witness dictionaries."""
        bad = []
        for m, a, b in self.source.cat.mor_triples():
            comp_b = self.components[b]
            for e in self.source.value(a):
                if comp_b[self.source.apply(m, e)] != \
                        self.target.apply(m, self.components[a][e]):
                    bad.append({"morphism": m, "object": a, "element": e})
                    if max_failures and len(bad) >= max_failures:
                        return bad
        return bad

    def is_natural(self):
        return not self.naturality_failures(max_failures=1)

    def __eq__(self, other):
        return (isinstance(other, NatTransformation)
                and self.components == other.components)

    def __hash__(self):
        return hash(tuple(sorted(
            (x, tuple(sorted(c.items())))
            for x, c in self.components.items())))


def enumerate_nat_transfs(F, G, budget=None):
    """All natural transformations F => G, as NatTransformation objects.

    Backtracking assigns one component value at a time and propagates
    every consequence through the morphism actions before branching.
    """
    cat = F.cat
    meter = BudgetMeter(budget, "natural transformation enumeration")
    out_mors = {a: [] for a in cat.objects}
    for m, a, b in cat.mor_triples():
        out_mors[a].append((m, b))
    slots = [(a, e) for a in cat.objects for e in F.value(a)]
    assignment = {}
    results = []

    def propagate(seed_key, seed_val, trail):
        stack = [(seed_key, seed_val)]
        while stack:
            (a, e), v = stack.pop()
            cur = assignment.get((a, e))
            if cur is not None:
                if cur != v:
                    return False
                continue
            if v not in set(G.value(a)):
                return False
            assignment[(a, e)] = v
            trail.append((a, e))
            for m, b in out_mors[a]:
                stack.append(((b, F.apply(m, e)), G.apply(m, v)))
        return True

    def search(i):
        while i < len(slots) and slots[i] in assignment:
            i += 1
        if i == len(slots):
            results.append(NatTransformation(
                F, G, {a: {e: assignment[(a, e)] for e in F.value(a)}
                       for a in cat.objects}))
            return
        key = slots[i]
        for v in G.value(key[0]):
            meter.tick()
            trail = []
            ok = propagate(key, v, trail)
            if ok:
                search(i + 1)
            for k in trail:
                del assignment[k]

    search(0)
    return tuple(results)


# --- pullback squares ----------------------------------------------------


@dataclass(frozen=True)
class Square:
    """A commuting square of finite sets: P -> A, P -> B over A -> C <- B."""
    top: tuple        # elements of P
    left_set: tuple   # elements of A
    right_set: tuple  # elements of B
    bottom: tuple     # elements of C
    to_left: dict     # P -> A
    to_right: dict    # P -> B
    left_down: dict   # A -> C
    right_down: dict  # B -> C


def is_pullback_square(square):
    """True when the square exhibits P as the fiber product of A and B over C.

    Raises CoherenceError if the square does not even commute.
    """
    for x in square.top:
        if square.left_down[square.to_left[x]] != square.right_down[square.to_right[x]]:
            raise CoherenceError(f"square does not commute at element {x!r}")
    pairs = [(square.to_left[x], square.to_right[x]) for x in square.top]
    if len(set(pairs)) != len(pairs):
        return False
    fiber = {(a, b) for a in square.left_set for b in square.right_set
             if square.left_down[a] == square.right_down[b]}
    return set(pairs) == fiber


# --- graded carriers ------------------------------------------------------


class GradedSetFunctor:
    """A SetFunctor together with an integer grade for each element.

    Grades are bookkeeping for size-truncated constructions; the action
    need not preserve them.
    """

    __slots__ = ("base", "grades")

    def __init__(self, base, grades):
        self.base = base
        self.grades = {x: dict(g) for x, g in grades.items()}

    @property
    def cat(self):
        return self.base.cat

    def value(self, x):
        return self.base.value(x)

    def apply(self, m, e):
        return self.base.apply(m, e)

    def map_dict(self, m):
        return self.base.map_dict(m)

    def grade(self, x, e):
        return self.grades[x][e]

    def buckets(self, x):
        out = {}
        for e in self.base.value(x):
            out.setdefault(self.grades[x][e], []).append(e)
        return out
