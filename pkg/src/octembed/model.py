"""Soft-boundary octagon model: parameters, scoring, loss, gradients.

Each relation carries a center and a width vector for up to four band
families per coordinate: position of the head (x), position of the tail
(y), tail minus head (u) and tail plus head (v).  A triple's distance to a
band is ``sigmoid(|deviation from center| - |width|)``: exactly 0.5 on the
hard band boundary, below inside, approaching 0 deep inside.  Scores negate
the p-norm of the active distance components, so higher is better and 0 is
a perfect fit.

The ``variant`` string picks which bands are active: any subset of "uvxy"
(e.g. "u", "uxy", "uvxy"), or "u+v", which activates the u band on the
first ceil(n/2) coordinates and the v band on the rest.  Width and
attention parameters are stored unconstrained; their absolute value is
taken at use, which keeps optimisation unconstrained while the geometry
stays well-formed.

Gradients are computed analytically (plain numpy, float64 throughout); the
test suite checks them against central finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Sequence

import numpy as np

from .bounds import INF, NEG_INF
from .octagons import Octagon
from .regions import GeometricEmbedding, Region

BANDS = ("x", "y", "u", "v")


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


def softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def variant_masks(variant: str, dim: int) -> Dict[str, np.ndarray]:
    """Per-band boolean coordinate masks for a variant string."""
    masks = {band: np.zeros(dim, dtype=bool) for band in BANDS}
    if variant == "u+v":
        half = math.ceil(dim / 2)
        masks["u"][:half] = True
        masks["v"][half:] = True
        return masks
    letters = set(variant)
    if not letters or not letters <= set(BANDS) or len(variant) != len(letters):
        raise ValueError(f"variant must be a subset of 'uvxy' or 'u+v': "
                         f"{variant!r}")
    for band in letters:
        masks[band][:] = True
    return masks


@dataclass
class OctagonModel:
    dim: int
    variant: str
    p: float
    attention: bool
    entity_names: list
    relation_names: list
    entities: np.ndarray                       # (E, dim)
    centers: Dict[str, np.ndarray]             # band -> (R, dim)
    widths: Dict[str, np.ndarray]              # band -> (R, dim)
    attentions: Optional[Dict[str, np.ndarray]] = None
    coord_masks: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if not self.coord_masks:
            self.coord_masks = variant_masks(self.variant, self.dim)
        self._entity_index = {n: i for i, n in enumerate(self.entity_names)}
        self._relation_index = {n: i for i, n in enumerate(self.relation_names)}

    @property
    def num_entities(self) -> int:
        return len(self.entity_names)

    @property
    def num_relations(self) -> int:
        return len(self.relation_names)

    def entity_id(self, name: str) -> int:
        return self._entity_index[name]

    def relation_id(self, name: str) -> int:
        return self._relation_index[name]

    def active_bands(self) -> list:
        return [b for b in BANDS if self.coord_masks[b].any()]

    def parameters(self) -> Dict[str, np.ndarray]:
        """Flat name -> array view of every trainable tensor."""
        params = {"entities": self.entities}
        for band in BANDS:
            params[f"center_{band}"] = self.centers[band]
            params[f"width_{band}"] = self.widths[band]
        if self.attention:
            for band in BANDS:
                params[f"attention_{band}"] = self.attentions[band]
        return params

    def copy(self) -> "OctagonModel":
        return OctagonModel(
            dim=self.dim, variant=self.variant, p=self.p,
            attention=self.attention,
            entity_names=list(self.entity_names),
            relation_names=list(self.relation_names),
            entities=self.entities.copy(),
            centers={b: a.copy() for b, a in self.centers.items()},
            widths={b: a.copy() for b, a in self.widths.items()},
            attentions=None if self.attentions is None else
            {b: a.copy() for b, a in self.attentions.items()},
            coord_masks={b: m.copy() for b, m in self.coord_masks.items()},
        )

    # -- hard-region view ------------------------------------------------------

    def hard_region(self, relation: str) -> Region:
        """The relation's exact octagon region at the 0.5 distance threshold.

        Inactive bands are unbounded; attention weights do not move the
        threshold and are ignored here.
        """
        r = self.relation_id(relation)
        los, his = {}, {}
        for band in BANDS:
            center = self.centers[band][r]
            width = np.abs(self.widths[band][r])
            los[band] = center - width
            his[band] = center + width
        slices = []
        for i in range(self.dim):
            bnds = []
            for band in BANDS:
                if self.coord_masks[band][i]:
                    bnds.extend((Fraction(float(los[band][i])),
                                 Fraction(float(his[band][i]))))
                else:
                    bnds.extend((NEG_INF, INF))
            slices.append(Octagon(*bnds).normalize())
        return Region(tuple(slices))

    def to_geometric_embedding(self) -> GeometricEmbedding:
        return GeometricEmbedding(
            dim=self.dim,
            entity_vectors={name: tuple(Fraction(float(v))
                                        for v in self.entities[i])
                            for i, name in enumerate(self.entity_names)},
            relation_regions={name: self.hard_region(name)
                              for name in self.relation_names},
        )


def glorot_uniform(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Uniform(-b, b) with b = sqrt(6 / (rows + cols))."""
    bound = math.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))


def init_model(dim: int, entity_names: Sequence[str],
               relation_names: Sequence[str], variant: str = "uvxy",
               attention: bool = False, p: float = 1.0,
               seed: int = 0) -> OctagonModel:
    """Fresh model with every tensor drawn Glorot-uniform from ``seed``.

    The draw order is fixed (entities, then per band: centers, widths, then
    attention vectors), so equal seeds give bitwise-equal parameters.
    """
    rng = np.random.default_rng(seed)
    num_e, num_r = len(entity_names), len(relation_names)
    entities = glorot_uniform(rng, num_e, dim)
    centers = {b: glorot_uniform(rng, num_r, dim) for b in BANDS}
    widths = {b: glorot_uniform(rng, num_r, dim) for b in BANDS}
    attentions = ({b: glorot_uniform(rng, num_r, dim) for b in BANDS}
                  if attention else None)
    return OctagonModel(dim=dim, variant=variant, p=p, attention=attention,
                        entity_names=list(entity_names),
                        relation_names=list(relation_names),
                        entities=entities, centers=centers, widths=widths,
                        attentions=attentions)


# ---------------------------------------------------------------------------
# forward / backward
# ---------------------------------------------------------------------------


def _band_deviation(band: str, e: np.ndarray, f: np.ndarray,
                    center: np.ndarray) -> np.ndarray:
    if band == "x":
        return e - center
    if band == "y":
        return f - center
    if band == "u":
        return (f - e) - center
    return (e + f) - center


def _forward(model: OctagonModel, heads: np.ndarray, rels: np.ndarray,
             tails: np.ndarray):
    """Batched scores plus the cache needed for the backward pass."""
    e = model.entities[heads]
    f = model.entities[tails]
    cache = {"heads": heads, "rels": rels, "tails": tails, "bands": {}}
    power_sum = np.zeros(len(heads))
    p = model.p
    for band in model.active_bands():
        mask = model.coord_masks[band]
        center = model.centers[band][rels]
        width_raw = model.widths[band][rels]
        m = _band_deviation(band, e, f, center)
        z = np.abs(m) - np.abs(width_raw)
        sig = sigmoid(z)
        if model.attention:
            att_raw = model.attentions[band][rels]
            d = np.abs(att_raw) * sig
        else:
            att_raw = None
            d = sig
        d = d * mask
        power_sum += (d ** p).sum(axis=1)
        cache["bands"][band] = {"m": m, "width_raw": width_raw, "sig": sig,
                                "att_raw": att_raw, "d": d, "mask": mask}
    scores = -power_sum ** (1.0 / p)
    cache["power_sum"] = power_sum
    return scores, cache


class Gradients(dict):
    """name -> dense gradient array, aligned with model.parameters()."""

    @classmethod
    def zeros_like(cls, model: OctagonModel) -> "Gradients":
        return cls({name: np.zeros_like(arr)
                    for name, arr in model.parameters().items()})


def _backward(model: OctagonModel, cache, dscore: np.ndarray,
              grads: Gradients) -> None:
    """Accumulate d(sum_i dscore_i * score_i)/d(params) into ``grads``."""
    heads, rels, tails = cache["heads"], cache["rels"], cache["tails"]
    p = model.p
    power_sum = cache["power_sum"]
    # s = -P^(1/p)  =>  ds/dP = -(1/p) P^(1/p - 1)
    safe = np.where(power_sum > 0.0, power_sum, 1.0)
    dP = np.where(power_sum > 0.0,
                  dscore * (-(1.0 / p) * safe ** (1.0 / p - 1.0)), 0.0)
    for band, c in cache["bands"].items():
        d, sig, m = c["d"], c["sig"], c["m"]
        dd = dP[:, None] * p * np.where(c["mask"], d ** (p - 1.0), 0.0)
        if model.attention:
            att = np.abs(c["att_raw"])
            dsig = dd * att
            datt = dd * sig * np.sign(c["att_raw"])
            np.add.at(grads[f"attention_{band}"], rels, datt)
        else:
            dsig = dd
        dz = dsig * sig * (1.0 - sig)
        dm = dz * np.sign(m)
        dwidth = -dz * np.sign(c["width_raw"])
        np.add.at(grads[f"width_{band}"], rels, dwidth)
        np.add.at(grads[f"center_{band}"], rels, -dm)
        if band == "x":
            np.add.at(grads["entities"], heads, dm)
        elif band == "y":
            np.add.at(grads["entities"], tails, dm)
        elif band == "u":
            np.add.at(grads["entities"], tails, dm)
            np.add.at(grads["entities"], heads, -dm)
        else:
            np.add.at(grads["entities"], tails, dm)
            np.add.at(grads["entities"], heads, dm)


def soft_distances(model: OctagonModel, triple) -> Dict[str, np.ndarray]:
    """Per-band distance vectors for one triple (active bands only).

    Attention weights, when enabled, are already multiplied in.  The score
    additionally restricts each band to its active coordinates (relevant for
    the split "u+v" variant).
    """
    head, relation, tail = triple
    h = np.array([model.entity_id(head)])
    r = np.array([model.relation_id(relation)])
    t = np.array([model.entity_id(tail)])
    e, f = model.entities[h], model.entities[t]
    out = {}
    for band in model.active_bands():
        m = _band_deviation(band, e, f, model.centers[band][r])
        sig = sigmoid(np.abs(m) - np.abs(model.widths[band][r]))
        if model.attention:
            sig = np.abs(model.attentions[band][r]) * sig
        out[band] = sig[0]
    return out


def score(model: OctagonModel, triple, p: Optional[float] = None) -> float:
    """Negated p-norm of the active distance components; higher is better."""
    head, relation, tail = triple
    if p is not None and p != model.p:
        model = model.copy()
        model.p = p
    scores, _ = _forward(model,
                         np.array([model.entity_id(head)]),
                         np.array([model.relation_id(relation)]),
                         np.array([model.entity_id(tail)]))
    return float(scores[0])


def score_batch(model: OctagonModel, triples: np.ndarray) -> np.ndarray:
    scores, _ = _forward(model, triples[:, 0], triples[:, 1], triples[:, 2])
    return scores


def score_candidates(model: OctagonModel, anchor: int, relation: int,
                     side: str) -> np.ndarray:
    """Scores of (anchor, relation, e) for every entity e (side='tail'),
    or of (e, relation, anchor) (side='head')."""
    count = model.num_entities
    anchors = np.full(count, anchor)
    rels = np.full(count, relation)
    candidates = np.arange(count)
    if side == "tail":
        scores, _ = _forward(model, anchors, rels, candidates)
    elif side == "head":
        scores, _ = _forward(model, candidates, rels, anchors)
    else:
        raise ValueError(f"side must be 'head' or 'tail': {side!r}")
    return scores


# ---------------------------------------------------------------------------
# loss
# ---------------------------------------------------------------------------


def adversarial_weights(neg_scores, temperature: float = 1.0) -> np.ndarray:
    """Softmax of the (temperature-scaled) negative scores, row-wise."""
    neg = np.atleast_2d(np.asarray(neg_scores, dtype=float))
    shifted = temperature * neg
    shifted = shifted - shifted.max(axis=1, keepdims=True)
    weights = np.exp(shifted)
    weights /= weights.sum(axis=1, keepdims=True)
    return weights


def nssa_loss(pos_scores, neg_scores, margin: float,
              temperature: float = 1.0, mode: str = "nssa", weights=None):
    """Margin logistic loss with self-adversarially weighted negatives.

    Returns (losses, dpos, dneg): one loss per positive, with gradients of
    that loss w.r.t. the positive score and each negative score.  The
    softmax weights over negatives are treated as constants (no gradient
    flows through them); pass ``weights`` to pin them explicitly, e.g. when
    finite-differencing the same detached objective.

    ``mode="nssa"`` is the standard convention for score functions where
    higher is better: -log sig(margin + pos) - sum_i a_i log sig(-neg_i -
    margin).  ``mode="paper-literal"`` evaluates the displayed form -log
    sig(margin - pos) - sum_i a_i log sig(neg_i - margin) instead, which
    rewards badly-fitting positives; it exists for comparison runs only.
    """
    pos = np.atleast_1d(np.asarray(pos_scores, dtype=float))
    neg = np.asarray(neg_scores, dtype=float)
    squeeze = neg.ndim == 1
    neg = np.atleast_2d(neg)
    if neg.shape[1] == 0:
        raise ValueError("need at least one negative sample")
    weights = (adversarial_weights(neg, temperature) if weights is None
               else np.atleast_2d(np.asarray(weights, dtype=float)))
    if mode == "nssa":
        losses = softplus(-(margin + pos)) + \
            (weights * softplus(neg + margin)).sum(axis=1)
        dpos = -sigmoid(-(margin + pos))
        dneg = weights * sigmoid(neg + margin)
    elif mode == "paper-literal":
        losses = softplus(pos - margin) + \
            (weights * softplus(margin - neg)).sum(axis=1)
        dpos = sigmoid(pos - margin)
        dneg = -weights * sigmoid(margin - neg)
    else:
        raise ValueError(f"unknown loss mode: {mode!r}")
    if squeeze:
        return float(losses[0]), float(dpos[0]), dneg[0]
    return losses, dpos, dneg


# ---------------------------------------------------------------------------
# full analytic gradients (used by training and by the gradient checks)
# ---------------------------------------------------------------------------


def score_with_gradients(model: OctagonModel, triple):
    """Score of one triple and the gradient of that score."""
    h = np.array([model.entity_id(triple[0])])
    r = np.array([model.relation_id(triple[1])])
    t = np.array([model.entity_id(triple[2])])
    scores, cache = _forward(model, h, r, t)
    grads = Gradients.zeros_like(model)
    _backward(model, cache, np.ones(1), grads)
    return float(scores[0]), grads


def loss_with_gradients(model: OctagonModel, pos_triples: np.ndarray,
                        neg_triples: np.ndarray, margin: float,
                        temperature: float = 1.0, mode: str = "nssa",
                        weights=None):
    """Mean self-adversarial loss over a batch and its full gradient.

    ``pos_triples`` is (B, 3); ``neg_triples`` is (B, N, 3) with each row
    holding the corruptions of the matching positive.
    """
    batch, num_neg, _ = neg_triples.shape
    pos_scores, pos_cache = _forward(
        model, pos_triples[:, 0], pos_triples[:, 1], pos_triples[:, 2])
    flat = neg_triples.reshape(-1, 3)
    neg_scores, neg_cache = _forward(model, flat[:, 0], flat[:, 1], flat[:, 2])
    losses, dpos, dneg = nssa_loss(pos_scores,
                                   neg_scores.reshape(batch, num_neg),
                                   margin, temperature, mode, weights=weights)
    grads = Gradients.zeros_like(model)
    scale = 1.0 / batch
    _backward(model, pos_cache, dpos * scale, grads)
    _backward(model, neg_cache, dneg.reshape(-1) * scale, grads)
    return float(losses.mean()), grads
