"""Filtered link-prediction evaluation.

For every test triple both the true tail (against all corrupted tails) and
the true head (against all corrupted heads) are ranked by score.
Corruptions that appear in any provided split are filtered out of the
candidate set; the true entity itself always stays.  Ties are resolved with
the realistic rank, the mean of the optimistic and pessimistic ranks, so
constant scorers earn the middle rank rather than a free win.

Evaluation is deterministic: candidates are scored in entity-id order and
both directions of every test triple contribute one ranking case each.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .kg import KnowledgeGraph
from .model import OctagonModel, score_candidates
from .regions import GeometricEmbedding

HITS_AT = (1, 3, 10)


@dataclass
class EvalReport:
    mrr: float
    hits: dict
    cases: int
    skipped: int = 0
    per_relation: dict = field(default_factory=dict)
    ranking_mode: str = "realistic"

    def metric_rows(self) -> list:
        rows = [("mrr", self.mrr)]
        rows += [(f"hits@{k}", self.hits[k]) for k in sorted(self.hits)]
        rows += [("cases", self.cases), ("skipped", self.skipped),
                 ("ranking_mode", self.ranking_mode)]
        for rel in sorted(self.per_relation):
            stats = self.per_relation[rel]
            rows.append((f"mrr[{rel}]", stats["mrr"]))
        return rows


class _ModelScorer:
    def __init__(self, model: OctagonModel):
        self.model = model
        self.entities = list(model.entity_names)

    def knows(self, head, relation, tail):
        return (head in self.model._entity_index
                and tail in self.model._entity_index
                and relation in self.model._relation_index)

    def candidate_scores(self, anchor, relation, side):
        return score_candidates(self.model, self.model.entity_id(anchor),
                                self.model.relation_id(relation), side)


class _EmbeddingScorer:
    """Hard membership scoring: 0 for supported candidates, -1 otherwise."""

    def __init__(self, embedding: GeometricEmbedding):
        self.embedding = embedding
        self.entities = list(embedding.entity_vectors)

    def knows(self, head, relation, tail):
        return (head in self.embedding.entity_vectors
                and tail in self.embedding.entity_vectors
                and relation in self.embedding.relation_regions)

    def candidate_scores(self, anchor, relation, side):
        region = self.embedding.relation_regions[relation]
        anchor_vec = self.embedding.entity_vectors[anchor]
        out = np.empty(len(self.entities))
        for i, name in enumerate(self.entities):
            vec = self.embedding.entity_vectors[name]
            pair = (anchor_vec, vec) if side == "tail" else (vec, anchor_vec)
            out[i] = 0.0 if region.contains_pair(*pair) else -1.0
        return out


def _as_scorer(model_or_embedding):
    if isinstance(model_or_embedding, OctagonModel):
        return _ModelScorer(model_or_embedding)
    if isinstance(model_or_embedding, GeometricEmbedding):
        return _EmbeddingScorer(model_or_embedding)
    raise TypeError(f"cannot score with {type(model_or_embedding)!r}")


def _known_triples(kgs: Iterable[KnowledgeGraph]) -> set:
    known = set()
    for kg in kgs:
        known |= kg.name_triples()
    return known


def _realistic_rank(scores: np.ndarray, true_idx: int,
                    excluded: np.ndarray) -> float:
    true_score = scores[true_idx]
    valid = ~excluded
    valid[true_idx] = True
    better = int(((scores > true_score) & valid).sum())
    ties = int(((scores == true_score) & valid).sum()) - 1
    return 1.0 + better + 0.5 * ties


def evaluate(model_or_embedding, test_kg: KnowledgeGraph,
             filter_kgs: Sequence[KnowledgeGraph] = (),
             hits_at: Sequence[int] = HITS_AT) -> EvalReport:
    """Filtered MRR/Hits@k of a trained model or an exact embedding.

    ``filter_kgs`` should list every split whose triples are known true
    (train/valid/test); their triples are removed from the candidate sets.
    Test triples mentioning unknown entities or relations are skipped and
    counted.
    """
    scorer = _as_scorer(model_or_embedding)
    known = _known_triples(filter_kgs)
    entity_pos = {name: i for i, name in enumerate(scorer.entities)}

    ranks = []
    by_relation: dict = {}
    skipped = 0
    for h, r, t in sorted(test_kg.name_triples()):
        if not scorer.knows(h, r, t):
            skipped += 1
            continue
        for side, anchor, true_name in (("tail", h, t), ("head", t, h)):
            scores = scorer.candidate_scores(anchor, r, side)
            excluded = np.zeros(len(scores), dtype=bool)
            for i, candidate in enumerate(scorer.entities):
                if candidate == true_name:
                    continue
                triple = ((anchor, r, candidate) if side == "tail"
                          else (candidate, r, anchor))
                if triple in known:
                    excluded[i] = True
            rank = _realistic_rank(scores, entity_pos[true_name], excluded)
            ranks.append(rank)
            by_relation.setdefault(r, []).append(rank)

    def summarize(values):
        arr = np.asarray(values, dtype=float)
        return {
            "mrr": float((1.0 / arr).mean()) if len(arr) else 0.0,
            "hits": {k: float((arr <= k).mean()) if len(arr) else 0.0
                     for k in hits_at},
        }

    overall = summarize(ranks)
    per_relation = {
        rel: {"mrr": summarize(vals)["mrr"], "cases": len(vals)}
        for rel, vals in by_relation.items()
    }
    return EvalReport(mrr=overall["mrr"], hits=overall["hits"],
                      cases=len(ranks), skipped=skipped,
                      per_relation=per_relation)


def random_baseline_mrr(test_kg: KnowledgeGraph, entities: Sequence[str],
                        filter_kgs: Sequence[KnowledgeGraph] = ()) -> float:
    """Expected filtered MRR of a uniformly random ranking.

    ``entities`` is the candidate universe (the same one a model would rank
    over).  With m candidates left after filtering, a random permutation
    gives the true entity expected reciprocal rank H_m / m; this averages
    that value over both directions of every test triple.
    """
    known = _known_triples(filter_kgs)
    entities = list(entities)
    harmonic = np.concatenate(([0.0], np.cumsum(1.0 / np.arange(
        1, len(entities) + 1))))
    values = []
    for h, r, t in sorted(test_kg.name_triples()):
        for side, anchor, true_name in (("tail", h, t), ("head", t, h)):
            filtered = 0
            for candidate in entities:
                if candidate == true_name:
                    continue
                triple = ((anchor, r, candidate) if side == "tail"
                          else (candidate, r, anchor))
                if triple in known:
                    filtered += 1
            m = len(entities) - filtered
            values.append(harmonic[m] / m)
    return float(np.mean(values)) if values else 0.0
