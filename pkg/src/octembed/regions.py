"""Coordinate-wise relation regions and the geometric rule semantics.

A relation over n-dimensional entity vectors is represented as a product of
n planar octagons: the pair (e, f) belongs to the region iff (e_i, f_i)
belongs to slice i for every coordinate.  Because of the product structure,
intersection, composition, inverse, containment and disjointness all reduce
to exact slice-wise octagon operations; no sampling is ever needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .bounds import as_bound
from .kg import KnowledgeGraph
from .octagons import EMPTY, hull
from .rules import Rule, RuleKind


class DimensionMismatch(ValueError):
    pass


class UnknownSymbol(KeyError):
    pass


@dataclass(frozen=True)
class Region:
    slices: tuple

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple(self.slices))

    @property
    def dim(self) -> int:
        return len(self.slices)

    def is_empty(self) -> bool:
        return any(o.is_empty() for o in self.slices)

    def normalize(self) -> "Region":
        return Region(tuple(o.normalize() for o in self.slices))

    def _check_dim(self, other: "Region") -> None:
        if self.dim != other.dim:
            raise DimensionMismatch(f"{self.dim} != {other.dim}")

    def intersect(self, other: "Region") -> "Region":
        self._check_dim(other)
        return Region(tuple(a.intersect(b)
                            for a, b in zip(self.slices, other.slices)))

    def compose(self, other: "Region") -> "Region":
        self._check_dim(other)
        return Region(tuple(a.compose(b)
                            for a, b in zip(self.slices, other.slices)))

    def inverse(self) -> "Region":
        return Region(tuple(o.inverse() for o in self.slices))

    def issuperset(self, other: "Region") -> bool:
        self._check_dim(other)
        if other.is_empty():
            return True
        return all(a.issuperset(b) for a, b in zip(self.slices, other.slices))

    def disjoint_from(self, other: "Region") -> bool:
        """Product semantics: disjoint iff some slice pair is disjoint."""
        self._check_dim(other)
        return any(a.intersect(b) == EMPTY
                   for a, b in zip(self.slices, other.slices))

    def contains_pair(self, xs: Sequence, ys: Sequence) -> bool:
        if len(xs) != self.dim or len(ys) != self.dim:
            raise DimensionMismatch("point dimension does not match region")
        return all(o.contains(x, y)
                   for o, x, y in zip(self.slices, xs, ys))


def region_intersect(a: Region, b: Region) -> Region:
    return a.intersect(b)


def region_compose(a: Region, b: Region) -> Region:
    return a.compose(b)


def region_inverse(a: Region) -> Region:
    return a.inverse()


def region_hull(regions: Sequence[Region]) -> Region:
    dims = {r.dim for r in regions}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed dimensions: {sorted(dims)}")
    return Region(tuple(hull([r.slices[i] for r in regions])
                        for i in range(dims.pop())))


@dataclass
class GeometricEmbedding:
    """Entity points plus one Region per relation (all exact rationals)."""

    dim: int
    entity_vectors: dict = field(default_factory=dict)
    relation_regions: dict = field(default_factory=dict)

    def __post_init__(self):
        self.entity_vectors = {
            name: tuple(as_bound(v) for v in vec)
            for name, vec in self.entity_vectors.items()
        }
        for name, vec in self.entity_vectors.items():
            if len(vec) != self.dim:
                raise DimensionMismatch(f"entity {name}: {len(vec)} != {self.dim}")
        for name, region in self.relation_regions.items():
            if region.dim != self.dim:
                raise DimensionMismatch(f"relation {name}: {region.dim} != {self.dim}")

    def entity(self, name: str) -> tuple:
        try:
            return self.entity_vectors[name]
        except KeyError:
            raise UnknownSymbol(f"unknown entity: {name}") from None

    def region(self, name: str) -> Region:
        try:
            return self.relation_regions[name]
        except KeyError:
            raise UnknownSymbol(f"unknown relation: {name}") from None

    def supports(self, head: str, relation: str, tail: str) -> bool:
        """Does the concatenated entity pair lie inside the relation region?"""
        return self.region(relation).contains_pair(
            self.entity(head), self.entity(tail))

    def induced_graph(self, entities: Optional[Iterable[str]] = None,
                      relations: Optional[Iterable[str]] = None) -> KnowledgeGraph:
        """Exhaustive enumeration of every supported triple."""
        entities = list(entities if entities is not None
                        else self.entity_vectors)
        relations = list(relations if relations is not None
                         else self.relation_regions)
        kg = KnowledgeGraph(split="induced")
        for e in entities:
            kg.entity_id(e)
        for r in relations:
            kg.relation_id(r)
        for r in relations:
            for e in entities:
                for f in entities:
                    if self.supports(e, r, f):
                        kg.add(e, r, f)
        return kg


def supports_triple(embedding: GeometricEmbedding, triple) -> bool:
    head, relation, tail = triple
    return embedding.supports(head, relation, tail)


def induced_graph(embedding: GeometricEmbedding,
                  entities: Optional[Iterable[str]] = None,
                  relations: Optional[Iterable[str]] = None) -> KnowledgeGraph:
    return embedding.induced_graph(entities, relations)


def captures(regions, rule: Rule) -> bool:
    """Geometric satisfaction of one rule by a relation-region map.

    ``regions`` is a GeometricEmbedding or a plain {relation: Region}
    mapping.  Composition-shaped rules require normalized slices (fold the
    body left to right, then check containment).
    """
    if isinstance(regions, GeometricEmbedding):
        regions = regions.relation_regions

    def get(name: str) -> Region:
        try:
            return regions[name]
        except KeyError:
            raise UnknownSymbol(f"unknown relation: {name}") from None

    kind = rule.kind
    if kind == RuleKind.SYMMETRY:
        r = get(rule.head.relation)
        return r.inverse().issuperset(r)
    if kind == RuleKind.ASYMMETRY:
        r = get(rule.body[0].relation)
        return r.disjoint_from(r.inverse())
    if kind == RuleKind.INVERSION:
        return get(rule.head.relation).inverse().issuperset(
            get(rule.body[0].relation))
    if kind == RuleKind.HIERARCHY:
        return get(rule.head.relation).issuperset(get(rule.body[0].relation))
    if kind == RuleKind.INTERSECTION:
        met = get(rule.body[0].relation)
        for atom in rule.body[1:]:
            met = met.intersect(get(atom.relation))
        return get(rule.head.relation).issuperset(met)
    if kind == RuleKind.MUTUAL_EXCLUSION:
        met = get(rule.body[0].relation)
        for atom in rule.body[1:]:
            met = met.intersect(get(atom.relation))
        return met.is_empty()
    if kind in (RuleKind.COMPOSITION, RuleKind.EXTENDED_COMPOSITION):
        folded = get(rule.body[0].relation)
        for atom in rule.body[1:]:
            folded = folded.compose(get(atom.relation))
        return get(rule.head.relation).issuperset(folded)
    raise ValueError(f"unsupported rule kind: {kind}")
