"""Finite algebraic patterns over sets.

Categories with an inert and active factorization, set-valued carriers
and their gluing conditions, free constructions graded by a size bound,
completion of the hom sets by formally glued classes, and a zoo of
truncated shape families with a batch command line interface.
"""

from .errors import (BudgetExceeded, CoherenceError, GradeOverflow,
                     PatternForgeError, SchemaError, current_budget)
from .fincat import (FinCategory, FinFunctor, ValidationReport,
                     build_comma, combine, compose_functors,
                     is_equivalence, is_final_functor, is_initial_functor,
                     product_category, pullback_category, skeletalize,
                     validate_category, validate_functor)
from .setfun import (GradedSetFunctor, NatTransformation, SetFunctor,
                     Square, colimit, enumerate_nat_transfs,
                     is_pullback_square, kan_extend, limit, restrict_along,
                     validate_set_functor)
from .pattern import (Pattern, elementary_slice, enumerate_sections,
                      factorize, graded_segal_check, is_extendable,
                      is_saturated, is_slim, necessary_objects,
                      segal_check, slice_families, slim, validate_pattern)
from .patmorph import (PatternMorphism, compose_morphisms,
                       has_unique_active_lifting,
                       has_unique_inert_lifting, identity_morphism,
                       inert_pattern_inclusion, is_extendable_morphism,
                       is_segal_on, is_strong_segal, lke_segal,
                       pattern_pullback, patterns_isomorphic,
                       point_inclusion, rke_segal, segal_on_report,
                       validate_morphism)
from .freemonad import (FreeSegalMonad, check_cartesian, check_monad_laws,
                        free_segal, map_free, mult, unit)
from .completion import (CompletedHom, CompletedPattern, Completion,
                         completion, compose_completed,
                         factorize_completed, hom_completed,
                         is_complete_monad, is_saturation_iso, lambda_int,
                         nerve_check, saturate)
from . import io, zoo

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded", "CoherenceError", "GradeOverflow",
    "PatternForgeError", "SchemaError", "current_budget",
    "FinCategory", "FinFunctor", "ValidationReport", "build_comma",
    "combine", "compose_functors", "is_equivalence", "is_final_functor",
    "is_initial_functor", "product_category", "pullback_category",
    "skeletalize", "validate_category", "validate_functor",
    "GradedSetFunctor", "NatTransformation", "SetFunctor", "Square",
    "colimit", "enumerate_nat_transfs", "is_pullback_square",
    "kan_extend", "limit", "restrict_along", "validate_set_functor",
    "Pattern", "elementary_slice", "enumerate_sections", "factorize",
    "graded_segal_check", "is_extendable", "is_saturated", "is_slim",
    "necessary_objects", "segal_check", "slice_families", "slim",
    "validate_pattern",
    "PatternMorphism", "compose_morphisms", "has_unique_active_lifting",
    "has_unique_inert_lifting", "identity_morphism",
    "inert_pattern_inclusion", "is_extendable_morphism", "is_segal_on",
    "is_strong_segal", "lke_segal", "pattern_pullback",
    "patterns_isomorphic", "point_inclusion", "rke_segal",
    "segal_on_report", "validate_morphism",
    "FreeSegalMonad", "check_cartesian", "check_monad_laws",
    "free_segal", "map_free", "mult", "unit",
    "CompletedHom", "CompletedPattern", "Completion", "completion",
    "compose_completed", "factorize_completed", "hom_completed",
    "is_complete_monad", "is_saturation_iso", "lambda_int",
    "nerve_check", "saturate",
    "io", "zoo",
]
