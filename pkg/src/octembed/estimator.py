"""Scikit-learn flavoured front door for the octagon embedding trainer.

``OctagonEmbedding`` follows the estimator contract (constructor parameters
stored verbatim, ``fit`` returns self, fitted attributes carry a trailing
underscore, ``get_params``/``set_params``/``clone`` work), so it slots into
pipelines, grid search, and friends.  Inputs are (head, relation, tail)
string triples; ``score_samples`` returns the soft-region score per triple,
higher is better.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .config import TrainConfig
from .evaluation import EvalReport, evaluate
from .kg import KnowledgeGraph
from .model import score_batch, score_candidates
from .regions import GeometricEmbedding
from .training import train


def check_triples(X) -> list:
    """Validate and normalise triple input to a list of string 3-tuples."""
    if isinstance(X, KnowledgeGraph):
        return sorted(X.name_triples())
    arr = np.asarray(X, dtype=object)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) array of triples, "
                         f"got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("expected at least one triple")
    return [tuple(str(v) for v in row) for row in arr]


class OctagonEmbedding(BaseEstimator):
    """Knowledge-graph link predictor backed by soft octagon regions.

    Parameters mirror the training configuration; see ``TrainConfig``.
    After ``fit``, ``model_`` holds the trained parameters, ``history_``
    the per-epoch loss/validation trace, and ``entities_``/``relations_``
    the learnt vocabularies.
    """

    def __init__(self, dim: int = 16, variant: str = "uvxy",
                 attention: bool = False, p: float = 1.0,
                 margin: float = 6.0, negatives: int = 8,
                 learning_rate: float = 1e-2, batch_size: int = 128,
                 epochs: int = 200, validation_period: int = 10,
                 adversarial_temperature: float = 1.0, loss: str = "nssa",
                 seed: int = 0):
        self.dim = dim
        self.variant = variant
        self.attention = attention
        self.p = p
        self.margin = margin
        self.negatives = negatives
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.validation_period = validation_period
        self.adversarial_temperature = adversarial_temperature
        self.loss = loss
        self.seed = seed

    def _config(self) -> TrainConfig:
        return TrainConfig(
            dim=self.dim, p=self.p, margin=self.margin,
            negatives=self.negatives, learning_rate=self.learning_rate,
            batch_size=self.batch_size, epochs=self.epochs,
            validation_period=self.validation_period, seed=self.seed,
            variant=self.variant, attention=self.attention,
            adversarial_temperature=self.adversarial_temperature,
            loss=self.loss)

    def fit(self, X, y=None, validation=None):
        """Train on (head, relation, tail) triples.

        ``validation``, when given, is a second triple collection used for
        periodic filtered-MRR validation; the best snapshot is kept.
        """
        triples = check_triples(X)
        train_kg = KnowledgeGraph.from_triples(triples, split="train")
        valid_kg = None
        if validation is not None:
            valid_kg = KnowledgeGraph.from_triples(check_triples(validation),
                                                   split="valid")
        result = train(train_kg, valid_kg, self._config())
        self.model_ = result.model
        self.history_ = result.history
        self.best_valid_mrr_ = result.best_valid_mrr
        self.train_kg_ = train_kg
        self.valid_kg_ = valid_kg
        self.entities_ = list(train_kg.entities)
        self.relations_ = list(train_kg.relations)
        return self

    def _require_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("this OctagonEmbedding is not fitted yet")

    def _triple_ids(self, triples) -> np.ndarray:
        ids = np.empty((len(triples), 3), dtype=np.int64)
        for i, (h, r, t) in enumerate(triples):
            try:
                ids[i] = (self.model_.entity_id(h),
                          self.model_.relation_id(r),
                          self.model_.entity_id(t))
            except KeyError as exc:
                raise ValueError(f"unknown symbol in triple {(h, r, t)}: "
                                 f"{exc}") from None
        return ids

    def score_samples(self, X) -> np.ndarray:
        """Soft-region score of each triple (higher is better, max 0)."""
        self._require_fitted()
        return score_batch(self.model_, self._triple_ids(check_triples(X)))

    def predict_tails(self, head: str, relation: str, k: int = 10) -> list:
        """Top-k candidate tails for (head, relation, ?) with scores."""
        self._require_fitted()
        scores = score_candidates(self.model_, self.model_.entity_id(head),
                                  self.model_.relation_id(relation), "tail")
        order = np.argsort(-scores, kind="stable")[:k]
        return [(self.entities_[i], float(scores[i])) for i in order]

    def predict_heads(self, tail: str, relation: str, k: int = 10) -> list:
        self._require_fitted()
        scores = score_candidates(self.model_, self.model_.entity_id(tail),
                                  self.model_.relation_id(relation), "head")
        order = np.argsort(-scores, kind="stable")[:k]
        return [(self.entities_[i], float(scores[i])) for i in order]

    def evaluate(self, X_test,
                 extra_filters: Sequence = ()) -> EvalReport:
        """Filtered link-prediction metrics on held-out triples."""
        self._require_fitted()
        test_kg = KnowledgeGraph.from_triples(check_triples(X_test),
                                              split="test")
        filters = [self.train_kg_]
        if self.valid_kg_ is not None:
            filters.append(self.valid_kg_)
        filters.extend(KnowledgeGraph.from_triples(check_triples(extra))
                       for extra in extra_filters)
        filters.append(test_kg)
        return evaluate(self.model_, test_kg, filters)

    def to_region_embedding(self) -> GeometricEmbedding:
        """Exact octagon view of the fitted model (0.5 threshold)."""
        self._require_fitted()
        return self.model_.to_geometric_embedding()
