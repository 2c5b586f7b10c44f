"""Probabilistic and heuristic flooding on random graphs: simulation and
generating-function predictions."""

from heurflood.degree_model import (
    DegreeModel,
    above_phase_transition,
    build_model,
    edge_end_pmf,
    empirical,
    mean_and_moments,
    poisson,
    power_law,
)
from heurflood.graph_gen import (
    ComponentLabeling,
    Graph,
    generate_configuration,
    generate_er,
    largest_component,
)
from heurflood.rules import FloodRule, forward_probability, heuristic, probabilistic, uninformed
from heurflood.simulation import BatchStats, FloodOutcome, run_batch, run_flood
from heurflood.analytics import (
    DigraphAnalysis,
    GccAnalysis,
    UnsupportedPrediction,
    digraph_analysis,
    gcc_analysis,
    giant_fractions,
    predict_pm,
    predict_pn,
    predict_pt,
    solve_dead_end_probs,
)

__version__ = "0.1.0"
