"""Ordinal structural EM for latent Gaussian DAG models."""

from ._osem import (
    InputError,
    NumericError,
    StructuralError,
    __version__,
    bootstrap,
    dag_to_cpdag,
    evaluate,
    fit,
    initialize,
    rectangle_log_prob,
    score,
    search,
    seed_scheme,
    set_max_threads,
    simulate,
    test_log_loss,
)

__all__ = [
    "InputError",
    "NumericError",
    "StructuralError",
    "__version__",
    "bootstrap",
    "dag_to_cpdag",
    "evaluate",
    "fit",
    "initialize",
    "rectangle_log_prob",
    "score",
    "search",
    "seed_scheme",
    "set_max_threads",
    "simulate",
    "test_log_loss",
]
