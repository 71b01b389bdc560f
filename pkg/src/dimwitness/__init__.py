"""Dimension witnesses for bipartite correlation Bell expressions."""

__version__ = "0.1.0"

from dimwitness.core import (  # noqa: E402
    BellExpression,
    GramMatrix,
    Strategy,
    bob_value,
    bob_value_from_gram,
    evaluate_strategy,
    gram_of,
    optimal_alice,
    witness_dimension,
)
from dimwitness.classical import bgamma_classical, classical_max  # noqa: E402
from dimwitness.families import bgamma_analytic, bgamma_matrix, chsh_matrix, zn_matrix  # noqa: E402
from dimwitness.optimizer import (  # noqa: E402
    OptimizerConfig,
    analyze,
    detect_gaps,
    dimension_profile,
    max_over_restarts,
    seesaw,
)

__all__ = [
    "BellExpression", "GramMatrix", "Strategy", "bob_value", "bob_value_from_gram",
    "evaluate_strategy", "gram_of", "optimal_alice", "witness_dimension",
    "bgamma_classical", "classical_max", "bgamma_analytic", "bgamma_matrix", "chsh_matrix",
    "zn_matrix", "OptimizerConfig", "analyze", "detect_gaps", "dimension_profile",
    "max_over_restarts", "seesaw",
]
