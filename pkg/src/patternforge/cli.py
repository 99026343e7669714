"""Batch command line interface.

Exit codes are a function of the verdict alone: 0 when the requested
check passes or the operation succeeds, 1 when a check fails, 2 for
malformed or unsupported input, 3 when a grade window or work budget
is exhausted.
"""

import argparse
import sys

from . import io, zoo
from .completion import completion, nerve_check, saturate
from .errors import (BudgetExceeded, CoherenceError, GradeOverflow,
                     SchemaError, current_budget)
from .freemonad import FreeSegalMonad
from .pattern import (factorize, graded_segal_check, is_extendable,
                      is_saturated, is_slim, segal_check, slim,
                      validate_pattern)
from .patmorph import (inert_pattern_inclusion, lke_segal, point_inclusion,
                       rke_segal)
from .setfun import GradedSetFunctor

_FSTAR_CAP = 4
_DELTA_CAP = 6

PASS = 0
FAIL = 1
INPUT_ERROR = 2
RESOURCE = 3


def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None


def _load_pattern(args):
    """A pattern from --build (zoo spec) or --input (pattern/v1 JSON)."""
    if getattr(args, "build", None):
        spec = zoo.parse_spec(args.build)
        if spec.family == "fstar" and spec.bound > _FSTAR_CAP:
            raise BudgetExceeded(
                f"refusing fstar beyond bound {_FSTAR_CAP}: the category "
                "grows too fast for exhaustive checking")
        if spec.family == "delta_op" and spec.bound > _DELTA_CAP:
            raise BudgetExceeded(
                f"refusing delta_op beyond bound {_DELTA_CAP}")
        return zoo.build(spec)
    if getattr(args, "input", None):
        return io.load_pattern(_read_text(args.input))
    raise SchemaError("no pattern given: use --build FAMILY:FLAVOR:N "
                      "or --input FILE")


def _load_carrier(args, p):
    """A carrier from --carrier (setfun/v1 JSON) or a free one from
    --seed-size."""
    if getattr(args, "carrier", None):
        doc = io.loads(_read_text(args.carrier))
        return io.set_functor_from_doc(doc, p.cat)
    size = getattr(args, "seed_size", None)
    if size is not None:
        ctx = FreeSegalMonad(p, zoo.constant_seed(p, size),
                             budget=args.budget)
        return ctx.functor()
    raise SchemaError("no carrier given: use --carrier FILE or "
                      "--seed-size N")


def _parse_label(text):
    """A morphism or object label from JSON; arrays become tuples."""
    return io._dec(io.loads(text))


def _load_morphism(args):
    """A pattern morphism from a builder tag or a patmorph/v1 file."""
    tag = args.morphism
    if tag is None:
        raise SchemaError("no morphism given: use --morphism TAG|FILE")
    parts = tag.split(":")
    if parts[0] == "inert_inclusion":
        return inert_pattern_inclusion(_load_pattern(args))
    if parts[0] == "point" and len(parts) == 2:
        p = _load_pattern(args)
        return point_inclusion(p, _parse_label(parts[1]))
    if parts[0] == "simplex_to_fstar" and len(parts) == 3:
        return zoo.build_simplex_to_fstar(int(parts[2]), parts[1])
    if parts[0] == "flat_to_natural" and len(parts) == 3:
        return zoo.build_flat_to_natural(parts[1], int(parts[2]))
    return io.morphism_from_doc(io.loads(_read_text(tag)))


def _print_report(rep):
    print(rep.summary())


def cmd_build(args):
    p = _load_pattern(args)
    text = io.dump_pattern(p)
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return PASS


def cmd_validate(args):
    p = _load_pattern(args)
    rep = validate_pattern(p)
    _print_report(rep)
    return PASS if rep.passed else FAIL


def cmd_factorize(args):
    p = _load_pattern(args)
    if args.morphism_label:
        targets = [_parse_label(args.morphism_label)]
        unknown = [m for m in targets if m not in set(p.cat.morphisms)]
        if unknown:
            raise SchemaError(f"unknown morphism {unknown[0]!r}")
    else:
        targets = list(p.cat.morphisms)
    for f in targets:
        l, r = factorize(p, f)
        print(f"{f!r} = {r!r} . {l!r}")
    return PASS


def cmd_segal(args):
    p = _load_pattern(args)
    F = _load_carrier(args, p)
    if isinstance(F, GradedSetFunctor):
        rep = graded_segal_check(p, F, budget=args.budget)
    else:
        rep = segal_check(p, F, budget=args.budget)
    _print_report(rep)
    return PASS if rep.ok else FAIL


def cmd_slim(args):
    p = _load_pattern(args)
    if is_slim(p):
        print("slim: all objects necessary")
        return PASS
    _, dropped = slim(p)
    print("not slim; unnecessary objects: "
          + " ".join(repr(x) for x in dropped))
    return FAIL


def cmd_saturated(args):
    p = _load_pattern(args)
    rep = is_saturated(p, budget=args.budget)
    if rep.ok:
        print("saturated: every representable satisfies the gluing "
              "condition")
        return PASS
    w = rep.witness
    print(f"not saturated: witness ({w['source']!r}, {w['object']!r})")
    _print_report(rep)
    return FAIL


def cmd_extendable(args):
    p = _load_pattern(args)
    rep = is_extendable(p, budget=args.budget)
    if rep.ok:
        print(f"extendable: {rep.checked_objects} objects, "
              f"{rep.checked_actives} actives checked")
        return PASS
    kinds = sorted({f["kind"] for f in rep.failures})
    verdict = "disproved" if rep.disproved else "inconclusive"
    print(f"not extendable ({verdict}): " + " ".join(kinds))
    return FAIL


def cmd_free(args):
    p = _load_pattern(args)
    ctx = FreeSegalMonad(p, zoo.constant_seed(p, args.seed_size),
                         budget=args.budget)
    # Carriers are built per object on demand; the structural action is
    # not needed for size reports, so the full functor is never forced.
    if args.at is not None:
        X = _parse_label(args.at)
        if X not in p.cat.objects:
            raise SchemaError(f"unknown object {X!r}")
        buckets = {}
        for e in ctx.value(X):
            g = ctx.grade(X, e)
            buckets[g] = buckets.get(g, 0) + 1
        bound = p.grade_bound
        print(" ".join(str(buckets.get(g, 0)) for g in range(bound + 1)))
    else:
        for X in p.cat.objects:
            print(f"{X!r} {len(ctx.value(X))}")
    return PASS


def cmd_saturate(args):
    p = _load_pattern(args)
    result = saturate(p, budget=args.budget)
    if result.dropped:
        print("dropped unnecessary objects: "
              + " ".join(repr(x) for x in result.dropped))
    print(io.canonical_dumps(io.completion_to_doc(result.completed.comp)))
    return PASS


def cmd_complete(args):
    p = _load_pattern(args)
    comp = completion(p, budget=args.budget)
    print(io.canonical_dumps(io.completion_to_doc(comp)))
    return PASS


def cmd_kan(args):
    m = _load_morphism(args)
    ctx = FreeSegalMonad(m.source, zoo.constant_seed(m.source,
                                                    args.seed_size),
                         budget=args.budget)
    F = ctx.functor()
    if args.direction == "left":
        out = lke_segal(m, F, budget=args.budget)
    else:
        out = rke_segal(m, F.base, budget=args.budget)
    for X in m.target.cat.objects:
        print(f"{X!r} {len(out.value(X))}")
    return PASS


def cmd_nerve(args):
    p = _load_pattern(args)
    F = _load_carrier(args, p)
    rep = nerve_check(p, F, budget=args.budget)
    print(rep.summary())
    return PASS if rep.ok else FAIL


def _add_pattern_source(sub):
    sub.add_argument("--build", help="zoo spec FAMILY:FLAVOR:N")
    sub.add_argument("--input", help="pattern/v1 JSON file ('-' for stdin)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="patternforge",
        description="Finite algebraic patterns: validation, free "
                    "constructions, completion, and extension checks.")
    parser.add_argument("--budget", type=int, default=None,
                        help="work budget (default: PATTERN_FORGE_BUDGET "
                             f"env or {current_budget()})")
    sub = parser.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("build", help="emit a zoo pattern as JSON")
    _add_pattern_source(s)
    s.add_argument("--output", help="write to file instead of stdout")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("validate", help="check the pattern axioms")
    _add_pattern_source(s)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("factorize", help="factor morphisms as inert "
                                         "then active")
    _add_pattern_source(s)
    s.add_argument("--morphism-label",
                   help="single morphism as JSON (arrays for tuples)")
    s.set_defaults(func=cmd_factorize)

    s = sub.add_parser("segal", help="check the gluing condition of a "
                                     "carrier")
    _add_pattern_source(s)
    s.add_argument("--carrier", help="setfun/v1 JSON file")
    s.add_argument("--seed-size", type=int, default=None,
                   help="use the free carrier on a constant seed")
    s.set_defaults(func=cmd_segal)

    s = sub.add_parser("slim", help="report unnecessary objects")
    _add_pattern_source(s)
    s.set_defaults(func=cmd_slim)

    s = sub.add_parser("saturated", help="check all representables glue")
    _add_pattern_source(s)
    s.set_defaults(func=cmd_saturated)

    s = sub.add_parser("extendable", help="check unique lifting and "
                                          "cofinality conditions")
    _add_pattern_source(s)
    s.set_defaults(func=cmd_extendable)

    s = sub.add_parser("free", help="sizes of the free construction")
    _add_pattern_source(s)
    s.add_argument("--seed-size", type=int, default=1)
    s.add_argument("--at", help="object label as JSON; prints one count "
                                "per grade")
    s.set_defaults(func=cmd_free)

    s = sub.add_parser("saturate", help="complete a pattern and "
                                        "summarize the result")
    _add_pattern_source(s)
    s.set_defaults(func=cmd_saturate)

    s = sub.add_parser("complete", help="summarize the completed hom "
                                        "classes")
    _add_pattern_source(s)
    s.set_defaults(func=cmd_complete)

    s = sub.add_parser("kan", help="extend a free carrier along a "
                                   "morphism")
    _add_pattern_source(s)
    s.add_argument("--morphism", required=True,
                   help="builder tag (inert_inclusion, point:X, "
                        "simplex_to_fstar:FLAVOR:N, "
                        "flat_to_natural:FAMILY:N) or patmorph/v1 file")
    s.add_argument("--seed-size", type=int, default=1)
    s.add_argument("--direction", choices=("left", "right"),
                   default="right")
    s.set_defaults(func=cmd_kan)

    s = sub.add_parser("nerve", help="check a carrier extends to the "
                                     "completion")
    _add_pattern_source(s)
    s.add_argument("--carrier", help="setfun/v1 JSON file")
    s.add_argument("--seed-size", type=int, default=None,
                   help="use the free carrier on a constant seed")
    s.set_defaults(func=cmd_nerve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except (BudgetExceeded, GradeOverflow) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return RESOURCE
    except CoherenceError as exc:
        print(f"coherence failure: {exc}", file=sys.stderr)
        return FAIL
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
