"""Synthetic knowledge graphs used by the training and acceptance tests."""

import random

from octembed.kg import KnowledgeGraph


def _split(triples, rng, fractions=(0.8, 0.1, 0.1)):
    triples = list(triples)
    rng.shuffle(triples)
    n = len(triples)
    cut1 = int(round(n * fractions[0]))
    cut2 = cut1 + int(round(n * fractions[1]))
    return triples[:cut1], triples[cut1:cut2], triples[cut2:]


def _build(all_entities, triples, split):
    kg = KnowledgeGraph(split=split)
    for e in all_entities:
        kg.entity_id(e)
    for h, r, t in triples:
        kg.add(h, r, t)
    return kg


def symmetric_irreflexive_kg(num_entities=50, num_pairs=60, seed=0):
    """One symmetric, irreflexive relation over random entity pairs.

    Both directions of every pair go into the triple pool before the
    80/10/10 split, so most test triples have their mirror in train.  The
    full entity vocabulary is interned in every split.
    """
    rng = random.Random(seed)
    entities = [f"n{i:02d}" for i in range(num_entities)]
    pairs = set()
    while len(pairs) < num_pairs:
        a, b = rng.sample(range(num_entities), 2)
        pairs.add((min(a, b), max(a, b)))
    triples = []
    for a, b in sorted(pairs):
        triples.append((entities[a], "linked", entities[b]))
        triples.append((entities[b], "linked", entities[a]))
    train, valid, test = _split(triples, rng)
    return (_build(entities, train, "train"),
            _build(entities, valid, "valid"),
            _build(entities, test, "test"))


def shifted_line_kg(num_entities=200, shifts=(1, 7, -3), seed=0):
    """Translation-structured graph: relation ``shift_s`` joins i to i+s.

    The regularity is exactly what a difference band can represent, so a
    trained model should rank held-out neighbours far above chance.
    """
    rng = random.Random(seed)
    entities = [f"v{i:03d}" for i in range(num_entities)]
    triples = []
    for s in shifts:
        rel = f"shift_{s:+d}"
        for i in range(num_entities):
            j = i + s
            if 0 <= j < num_entities:
                triples.append((entities[i], rel, entities[j]))
    train, valid, test = _split(triples, rng)
    return (_build(entities, train, "train"),
            _build(entities, valid, "valid"),
            _build(entities, test, "test"))
