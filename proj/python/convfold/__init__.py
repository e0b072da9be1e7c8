"""Convex folding geometry and a p-Laplacian solver."""

from ._convfold import (
    ConvfoldError,
    builtin_domain,
    builtin_domain_names,
    folding_height,
    heart,
    lemma_fold_check,
    max_folding_height_kalpha,
    resolve_domain,
    run_cli,
    shadow_section,
    solve,
    width,
)

__all__ = [
    "ConvfoldError",
    "builtin_domain",
    "builtin_domain_names",
    "folding_height",
    "heart",
    "lemma_fold_check",
    "max_folding_height_kalpha",
    "resolve_domain",
    "run_cli",
    "shadow_section",
    "solve",
    "width",
]
