"""Octagon region embeddings for knowledge graphs.

Exact calculus on axis-aligned octagons and coordinate-wise relation
regions, rule entailment and capture checking, constructive exact
embeddings of graphs and rule bases, and a gradient-based trainer with a
filtered link-prediction evaluator.
"""

from .config import ExperimentConfig, TrainConfig
from .constructions import (
    AssignmentIndex,
    construct_comp,
    construct_kg_capture,
    construct_noncomp,
    verify_basic_exactness,
    verify_composition_exactness,
    verify_exactness,
)
from .estimator import OctagonEmbedding, check_triples
from .evaluation import EvalReport, evaluate, random_baseline_mrr
from .experiment import run_experiment, run_experiment_file
from .kg import KnowledgeGraph, load_triples
from .model import (
    OctagonModel,
    init_model,
    nssa_loss,
    score,
    soft_distances,
)
from .octagons import EMPTY, IdempotenceClass, Octagon, hull, rasterize_oracle
from .regions import (
    GeometricEmbedding,
    Region,
    captures,
    induced_graph,
    supports_triple,
)
from .rules import (
    Rule,
    RuleBase,
    RuleKind,
    deductive_closure,
    entails,
    parse_rule,
    precondition_regular,
)
from .serialize import (
    dump_checkpoint,
    dump_embedding,
    load_checkpoint,
    load_embedding,
)
from .training import Adam, TrainResult, train

__version__ = "0.1.0"

__all__ = [
    "Adam", "AssignmentIndex", "EMPTY", "EvalReport", "ExperimentConfig",
    "GeometricEmbedding", "IdempotenceClass", "KnowledgeGraph", "Octagon",
    "OctagonEmbedding", "OctagonModel", "Region", "Rule", "RuleBase",
    "RuleKind", "TrainConfig", "TrainResult", "captures", "check_triples",
    "construct_comp", "construct_kg_capture", "construct_noncomp",
    "deductive_closure", "dump_checkpoint", "dump_embedding", "entails",
    "evaluate", "hull", "init_model", "load_checkpoint", "load_embedding",
    "load_triples", "nssa_loss", "parse_rule", "precondition_regular",
    "random_baseline_mrr", "rasterize_oracle", "run_experiment",
    "run_experiment_file", "score", "soft_distances", "supports_triple",
    "train", "induced_graph", "verify_basic_exactness",
    "verify_composition_exactness", "verify_exactness",
]
