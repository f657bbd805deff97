"""Horn-rule learning for theorem-prover tactic prediction.

Pipeline: encode proof states as ground facts, select per-tactic training
examples (orthogonalization, balanced clustering, k-NN negatives), induce
rules Aleph-style, prune them by validation precision, and use the survivors
to reorder k-NN tactic preselections.
"""

from .clauses import Clause, Const, Literal, Var, format_clause, parse_clause, parse_rules, theta_subsumes
from .corpus import CorpusError, load_corpus, parse_corpus, save_corpus, serialize_corpus
from .encoding import EncodingVariant, FactBase, anonymize, encode
from .evaluation import SweepGrid, f1, precision, run_sweep, run_test, topk_accuracy
from .ilp import CostSpec, SearchBudget, Variant, covers, learn_tactic, saturate, search
from .knn import NeighborModel, Preselection, extract_features, fit, nearest_negatives, preselect
from .rules import ConfusionCounts, RuleSet, accumulate_stats, prune
from .selection import AutomationOracle, LearningTask, build_tasks, cluster_positives, orthogonalize
from .synthetic import GeneratorSpec, PatternCount, TheorySpec, generate_synthetic_corpus
from .terms import (
    Category,
    Corpus,
    HypPosition,
    InvalidPositionError,
    NodeLabel,
    ProofState,
    Split,
    Term,
    node_at,
    subterm_at,
)

__version__ = "0.1.0"
