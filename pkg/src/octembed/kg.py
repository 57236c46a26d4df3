"""Knowledge graph container and TSV ingestion."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)


@dataclass
class KnowledgeGraph:
    """Interned vocabulary plus a duplicate-free triple set.

    Entity and relation ids are dense from 0 in first-occurrence order.
    ``triples`` holds id-triples (head, relation, tail).
    """

    entities: list = field(default_factory=list)
    relations: list = field(default_factory=list)
    triples: list = field(default_factory=list)
    split: str = ""
    _entity_index: dict = field(default_factory=dict, repr=False)
    _relation_index: dict = field(default_factory=dict, repr=False)
    _triple_set: set = field(default_factory=set, repr=False)

    def entity_id(self, name: str) -> int:
        idx = self._entity_index.get(name)
        if idx is None:
            idx = len(self.entities)
            self.entities.append(name)
            self._entity_index[name] = idx
        return idx

    def relation_id(self, name: str) -> int:
        idx = self._relation_index.get(name)
        if idx is None:
            idx = len(self.relations)
            self.relations.append(name)
            self._relation_index[name] = idx
        return idx

    def add(self, head: str, relation: str, tail: str) -> bool:
        """Intern and insert one triple; returns False on duplicates."""
        triple = (self.entity_id(head), self.relation_id(relation),
                  self.entity_id(tail))
        if triple in self._triple_set:
            return False
        self._triple_set.add(triple)
        self.triples.append(triple)
        return True

    def has(self, head: str, relation: str, tail: str) -> bool:
        t = (self._entity_index.get(head), self._relation_index.get(relation),
             self._entity_index.get(tail))
        return None not in t and t in self._triple_set

    def has_ids(self, triple) -> bool:
        return tuple(triple) in self._triple_set

    def name_triples(self) -> set:
        return {(self.entities[h], self.relations[r], self.entities[t])
                for h, r, t in self.triples}

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_relations(self) -> int:
        return len(self.relations)

    def __len__(self) -> int:
        return len(self.triples)

    @classmethod
    def from_triples(cls, triples: Iterable[Sequence[str]],
                     split: str = "") -> "KnowledgeGraph":
        kg = cls(split=split)
        for head, relation, tail in triples:
            kg.add(head, relation, tail)
        return kg

    def with_vocab_of(self, other: "KnowledgeGraph") -> "KnowledgeGraph":
        """Re-intern this graph's triples on top of another graph's vocabulary."""
        kg = KnowledgeGraph(split=self.split)
        kg.entities = list(other.entities)
        kg.relations = list(other.relations)
        kg._entity_index = dict(other._entity_index)
        kg._relation_index = dict(other._relation_index)
        for h, r, t in self.triples:
            kg.add(self.entities[h], self.relations[r], self.entities[t])
        return kg


def load_triples(path, split: str = "") -> KnowledgeGraph:
    """Read a UTF-8 TSV file of ``head<TAB>relation<TAB>tail`` lines.

    Raises ValueError (with the line number) on malformed lines and on empty
    files; duplicate triples are dropped with a warning.
    """
    kg = KnowledgeGraph(split=split)
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(
                    f"{path}: line {lineno}: expected 3 tab-separated fields, "
                    f"got {len(fields)}")
            if not kg.add(*fields):
                duplicates += 1
    if not kg.triples:
        raise ValueError(f"{path}: no triples")
    if duplicates:
        logger.warning("%s: dropped %d duplicate triple(s)", path, duplicates)
    return kg
