"""Minibatch training of soft octagon models.

Single-threaded numpy throughout, with one seeded generator driving
initialisation, shuffling and negative sampling, so a fixed seed gives
bitwise-identical parameters, history, and checkpoints.  Octagon parameters
are left unconstrained during optimisation (widths and attention weights
take effect through their absolute values).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import TrainConfig
from .evaluation import evaluate
from .kg import KnowledgeGraph
from .model import Gradients, OctagonModel, init_model, loss_with_gradients


class Adam:
    """Adaptive-moment gradient descent over a model's parameter dict."""

    def __init__(self, model: OctagonModel, learning_rate: float,
                 beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = learning_rate
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.step_count = 0
        params = model.parameters()
        self.first = {k: np.zeros_like(v) for k, v in params.items()}
        self.second = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, model: OctagonModel, grads: Gradients) -> None:
        self.step_count += 1
        c1 = 1.0 - self.beta1 ** self.step_count
        c2 = 1.0 - self.beta2 ** self.step_count
        for name, param in model.parameters().items():
            g = grads[name]
            m = self.first[name]
            v = self.second[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            param -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    valid_mrr: Optional[float] = None


@dataclass
class TrainResult:
    model: OctagonModel
    history: list = field(default_factory=list)
    best_epoch: int = 0
    best_valid_mrr: float = float("nan")
    deterministic: bool = True


def sample_negatives(rng: np.random.Generator, batch: np.ndarray,
                     num_entities: int, count: int) -> np.ndarray:
    """Corrupt head or tail (probability one half each, uniform entities).

    Accidental positives are not filtered out; filtering applies only at
    evaluation time.
    """
    size = (len(batch), count)
    corrupt_head = rng.random(size) < 0.5
    replacements = rng.integers(0, num_entities, size=size)
    negatives = np.repeat(batch[:, None, :], count, axis=1)
    heads = negatives[:, :, 0]
    tails = negatives[:, :, 2]
    negatives[:, :, 0] = np.where(corrupt_head, replacements, heads)
    negatives[:, :, 2] = np.where(corrupt_head, tails, replacements)
    return negatives


def train(train_kg: KnowledgeGraph, valid_kg: Optional[KnowledgeGraph],
          config: TrainConfig) -> TrainResult:
    """Minibatch descent on the self-adversarial loss; keeps the snapshot
    with the best filtered validation MRR (validation every
    ``config.validation_period`` epochs, filtering over train plus valid)."""
    if not train_kg.triples:
        raise ValueError("empty training set")
    rng = np.random.default_rng(config.seed)
    model = init_model(config.dim, list(train_kg.entities),
                       list(train_kg.relations), variant=config.variant,
                       attention=config.attention, p=config.p,
                       seed=config.seed)
    optimizer = Adam(model, config.learning_rate)
    triples = np.asarray(train_kg.triples, dtype=np.int64)
    filter_kgs = [train_kg] + ([valid_kg] if valid_kg is not None else [])

    best_model = model.copy()
    best_mrr = -1.0
    best_epoch = 0
    history = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(triples))
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = triples[order[start:start + config.batch_size]]
            negatives = sample_negatives(rng, batch, train_kg.num_entities,
                                         config.negatives)
            loss, grads = loss_with_gradients(
                model, batch, negatives, config.margin,
                config.adversarial_temperature, config.loss)
            optimizer.step(model, grads)
            epoch_loss += loss * len(batch)
        epoch_loss /= len(triples)

        valid_mrr = None
        if valid_kg is not None and epoch % config.validation_period == 0:
            valid_mrr = evaluate(model, valid_kg, filter_kgs).mrr
            if valid_mrr > best_mrr:
                best_mrr = valid_mrr
                best_model = model.copy()
                best_epoch = epoch
        history.append(EpochRecord(epoch, epoch_loss, valid_mrr))

    if valid_kg is None or best_mrr < 0:
        best_model, best_epoch = model, config.epochs
        best_mrr = float("nan")
    return TrainResult(model=best_model, history=history,
                       best_epoch=best_epoch, best_valid_mrr=best_mrr)
