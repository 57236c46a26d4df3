"""Constructive exact embeddings and their verification.

Three constructions, each of which realises a symbolic object *exactly* as a
coordinate-wise octagon embedding:

* any finite knowledge graph (one coordinate per relation/entity pair,
  with two pentagon shapes deciding whether the self pair is supported);
* any rule base of symmetry / inversion / hierarchy / (binary) intersection
  rules, by growing per-coordinate octagons from seed triangles until the
  entailed inclusions hold, without ever capturing anything not entailed;
* any regular, acyclically-dependent base of composition rules, using a
  family of staircase pentagons whose slack bounds count composition steps.

``verify_exactness`` sweeps a bounded candidate rule space and compares the
geometric capture test against the forward-chaining oracle; for the
constructions above the disagreement list must be empty.

Coordinates are independent, so per-coordinate work could run in parallel;
the coordinate order itself is fixed by a canonical assignment enumeration
and the output is deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .kg import KnowledgeGraph
from .octagons import Octagon, hull
from .regions import GeometricEmbedding, Region, captures
from .rules import (
    Rule,
    RuleBase,
    RuleKind,
    entails,
    precondition_regular,
    saturate,
)

FULL_SQUARE = Octagon(0, 2, 0, 2, -2, 2, 0, 4)
# [0,2]^2 with the difference band clipped to |y - x| <= 1: both 45-degree
# corners cut, so composing it with itself overflows to the full square.
BANDED_SQUARE = Octagon(0, 2, 0, 2, -1, 1, 0, 4)
# [0,2]^2 with y - x <= 1 only; keeping/cutting the origin corner decides
# whether the self pair (0, 0) is inside.
LOOP_PENTAGON = Octagon(0, 2, 0, 2, -2, 1, 0, 4)
NOLOOP_PENTAGON = Octagon(0, 2, 0, 2, -2, 1, 1, 4)


class ConstructionError(ValueError):
    def __init__(self, message: str, violations: Sequence = ()):
        super().__init__(message)
        self.violations = tuple(violations)


def lower_triangle(size: int) -> Octagon:
    """Triangle with vertices (0,0), (size,size), (size,0): the part of the
    square below the diagonal."""
    return Octagon(0, size, 0, size, -size, 0, 0, 2 * size)


def upper_triangle(size: int) -> Octagon:
    """Mirror image of lower_triangle across the diagonal (its inverse)."""
    return Octagon(0, size, 0, size, 0, size, 0, 2 * size)


def staircase(start: int, rise: int, size: int) -> Octagon:
    """Pentagon with vertices (start,0), (start,start+rise), (size-rise,size),
    (size,size), (size,0).

    The x lower bound remembers where a composition chain starts and the
    difference-band upper bound (``rise``) counts how many steps it has
    absorbed; both are additive under composition, which is what makes the
    composition construction order-sensitive.  Requires start + rise <= size.
    """
    if start + rise > size:
        raise ValueError("staircase needs start + rise <= size")
    return Octagon(start, size, 0, size, -size, rise, start, 2 * size)


# ---------------------------------------------------------------------------
# Knowledge-graph capture
# ---------------------------------------------------------------------------


def construct_kg_capture(kg: KnowledgeGraph) -> GeometricEmbedding:
    """Embedding whose induced graph is exactly ``kg``.

    Dimension is |relations| * |entities|, one coordinate per (relation,
    entity) pair.  Entity coordinates live in {0, 1, 2}; the owning
    relation's slice is a pentagon that keeps or cuts the origin corner
    depending on whether the self loop is present, and every foreign slice
    is the full square (non-binding).
    """
    rels, ents = kg.relations, kg.entities
    coords = [(r, f) for r in rels for f in ents]

    entity_vectors = {}
    for e in ents:
        vec = []
        for r, f in coords:
            if e == f:
                vec.append(0)
            elif kg.has(f, r, e):
                vec.append(1)
            else:
                vec.append(2)
        entity_vectors[e] = tuple(vec)

    relation_regions = {}
    for q in rels:
        slices = []
        for r, f in coords:
            if r != q:
                slices.append(FULL_SQUARE)
            elif kg.has(f, q, f):
                slices.append(LOOP_PENTAGON)
            else:
                slices.append(NOLOOP_PENTAGON)
        relation_regions[q] = Region(tuple(slices))

    return GeometricEmbedding(dim=len(coords), entity_vectors=entity_vectors,
                              relation_regions=relation_regions)


# ---------------------------------------------------------------------------
# Assignment bookkeeping shared by the rule-base constructions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AssignmentIndex:
    """Per-coordinate record of which assignment produced each slice.

    ``body_coord`` and ``relset_coord`` (composition construction only) name
    the coordinate engineered to refute candidates with a given ordered body
    or body relation-set; verification uses them to order its containment
    checks, which is purely a speed hint.
    """

    mode: str
    assignments: tuple
    body_coord: Mapping = field(default_factory=dict)
    relset_coord: Mapping = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.assignments)


NONCOMP_KINDS = (RuleKind.SYMMETRY, RuleKind.INVERSION, RuleKind.HIERARCHY,
                 RuleKind.INTERSECTION)

FULL_MODE_NONCOMP_CAP = 6
FULL_MODE_COMP_CAP = 3
UPDATE_ROUND_CAP = 32


def _noncomp_violations(kb: RuleBase) -> list:
    bad = []
    for rule in kb.rules:
        if rule.kind not in NONCOMP_KINDS:
            bad.append(rule)
        elif rule.kind == RuleKind.INTERSECTION and len(rule.body) != 2:
            bad.append(rule)
    return bad


def construct_noncomp(kb: RuleBase, mode: str = "witness") -> tuple:
    """Exact embedding of a symmetry/inversion/hierarchy/intersection base.

    Returns (embedding, assignment_index).  The embedding captures a rule of
    those kinds iff the base entails it, captures no composition rule, and
    no asymmetry or mutual-exclusion rule (every slice pair shares the
    origin).  ``witness`` mode keeps one coordinate per refutation target;
    ``full`` enumerates all 5^|R| seed assignments (capped).
    """
    bad = _noncomp_violations(kb)
    if bad:
        raise ConstructionError(
            "rule base contains shapes outside "
            "symmetry/inversion/hierarchy/binary-intersection: "
            + "; ".join(str(r) for r in bad), violations=bad)

    rels = list(kb.relations)
    if mode == "witness":
        assignments = []
        for r in rels:
            assignments.append(tuple((t, 2 if t == r else 1) for t in rels))
        for r, s in itertools.combinations(rels, 2):
            assignments.append(tuple((t, 2 if t in (r, s) else 1)
                                     for t in rels))
        assignments.append(tuple((t, 0) for t in rels))
    elif mode == "full":
        if len(rels) > FULL_MODE_NONCOMP_CAP:
            raise ConstructionError(
                f"full mode is exponential; capped at "
                f"{FULL_MODE_NONCOMP_CAP} relations, got {len(rels)}")
        assignments = [tuple(zip(rels, values)) for values in
                       itertools.product((-2, -1, 0, 1, 2), repeat=len(rels))]
    else:
        raise ValueError(f"unknown mode: {mode}")

    hier = {r: [s for s in rels if s != r
                and entails(kb, Rule.hierarchy(s, r)).holds] for r in rels}
    inv = {r: [s for s in rels if entails(
        kb, Rule.symmetry(r) if s == r else Rule.inversion(s, r)).holds]
        for r in rels}
    inter = {r: [(s, t) for s, t in itertools.combinations(rels, 2)
                 if entails(kb, Rule.intersection((s, t), r)).holds]
             for r in rels}

    per_relation_slices = {r: [] for r in rels}
    for assignment in assignments:
        octs = {}
        for rel, value in assignment:
            if value > 0:
                octs[rel] = lower_triangle(value)
            elif value < 0:
                octs[rel] = upper_triangle(-value)
            else:
                octs[rel] = BANDED_SQUARE
        for _ in range(UPDATE_ROUND_CAP):
            changed = False
            for r in rels:
                pieces = [octs[r]]
                pieces.extend(octs[s] for s in hier[r])
                pieces.extend(octs[s].inverse() for s in inv[r])
                pieces.extend(octs[s].intersect(octs[t])
                              for s, t in inter[r])
                new = hull(pieces)
                if new != octs[r]:
                    octs[r] = new
                    changed = True
            if not changed:
                break
        else:
            raise RuntimeError("seed-growing update did not stabilise")
        for r in rels:
            per_relation_slices[r].append(octs[r])

    embedding = GeometricEmbedding(
        dim=len(assignments),
        relation_regions={r: Region(tuple(per_relation_slices[r]))
                          for r in rels})
    return embedding, AssignmentIndex(mode=mode, assignments=tuple(assignments))


def construct_comp(kb: RuleBase, mode: str = "witness",
                   max_body_len: int = 4) -> tuple:
    """Exact embedding of a regular composition rule base.

    Returns (embedding, assignment_index).  Requires the regularity
    precondition (raises ConstructionError with the witness otherwise).  The
    embedding captures a composition-shaped rule with body length up to
    ``max_body_len`` iff the base entails it.
    """
    pre = precondition_regular(kb)
    if not pre.ok:
        raise ConstructionError(
            f"regularity precondition violated; {pre.violation}",
            violations=(pre.violation,))
    closure = sorted(pre.closure)
    rels = list(kb.relations)
    n = len(rels)

    # assignment: relation -> (start, size) pair with 1 <= start <= size
    if mode == "witness":
        assignments, body_coord, relset_coord = [], {}, {}
        for k in range(1, min(max_body_len, max(n - 1, 0)) + 1):
            for body in itertools.permutations(rels, k):
                alpha = {r: (k + 1, k + 1) for r in rels}
                for j, r in enumerate(body, start=1):
                    alpha[r] = (j, k + 1)
                body_coord[body] = len(assignments)
                assignments.append(tuple(sorted(alpha.items())))
        for size in range(1, n + 1):
            for subset in itertools.combinations(rels, size):
                alpha = {r: (n + 1, n + 1) for r in rels}
                for r in subset:
                    alpha[r] = (1, n + 1)
                relset_coord[frozenset(subset)] = len(assignments)
                assignments.append(tuple(sorted(alpha.items())))
    elif mode == "full":
        if n > FULL_MODE_COMP_CAP:
            raise ConstructionError(
                f"full mode is exponential; capped at "
                f"{FULL_MODE_COMP_CAP} relations, got {n}")
        # The size component is uniform within a coordinate: mixing sizes
        # puts point seeds at different diagonal positions, which makes some
        # slice composition empty and hence captures arbitrary rules
        # vacuously (an empty product region is contained in everything).
        # With a shared size every seed contains (size, size), so every
        # fold stays non-empty.
        assignments = []
        for size in range(1, n + 2):
            for starts in itertools.product(range(1, size + 1), repeat=n):
                assignments.append(tuple(
                    (r, (start, size)) for r, start in zip(rels, starts)))
        body_coord, relset_coord = {}, {}
    else:
        raise ValueError(f"unknown mode: {mode}")

    order = _topological_order(rels, kb)
    by_head: dict = {}
    for rule in closure:
        by_head.setdefault(rule[1], []).append(rule[0])

    per_relation_slices = {r: [] for r in rels}
    for assignment in assignments:
        alpha = dict(assignment)
        octs = {}
        for r in order:
            start, size = alpha[r]
            seed = (staircase(start, 1, size) if start < size
                    else Octagon.point(size, size))
            pieces = [seed]
            for body in by_head.get(r, ()):
                folded = octs[body[0]]
                for s in body[1:]:
                    folded = folded.compose(octs[s])
                pieces.append(folded)
            octs[r] = hull(pieces)
        for r in rels:
            per_relation_slices[r].append(octs[r])

    embedding = GeometricEmbedding(
        dim=len(assignments),
        relation_regions={r: Region(tuple(per_relation_slices[r]))
                          for r in rels})
    index = AssignmentIndex(mode=mode, assignments=tuple(assignments),
                            body_coord=body_coord, relset_coord=relset_coord)
    return embedding, index


def _topological_order(rels: Sequence[str], kb: RuleBase) -> list:
    """Relations ordered so rule bodies precede their heads (ties by name)."""
    edges = {r: set() for r in rels}
    indeg = {r: 0 for r in rels}
    for rule in kb.rules:
        head = rule.head.relation
        for s in set(rule.body_relations()):
            if head not in edges[s]:
                edges[s].add(head)
                indeg[head] += 1
    ready = sorted(r for r in rels if indeg[r] == 0)
    out = []
    while ready:
        r = ready.pop(0)
        out.append(r)
        for nxt in sorted(edges[r]):
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
        ready.sort()
    if len(out) != len(rels):
        raise ConstructionError("dependency graph is cyclic")
    return out


# ---------------------------------------------------------------------------
# Exactness verification
# ---------------------------------------------------------------------------


@dataclass
class ExactnessReport:
    description: str
    candidates: int = 0
    disagreements: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def record(self, rule: Rule, captured: bool, entailed: bool) -> None:
        self.candidates += 1
        if captured != entailed:
            self.disagreements.append((rule, captured, entailed))

    def render(self) -> str:
        lines = [f"exactness check: {self.description}",
                 f"candidates checked: {self.candidates}",
                 f"disagreements: {len(self.disagreements)}"]
        for rule, captured, entailed in self.disagreements:
            lines.append(f"  {rule}: captured={captured} entailed={entailed}")
        return "\n".join(lines)


def basic_rule_candidates(rels: Sequence[str]) -> Iterable[Rule]:
    """Every candidate of the seven basic shapes over a relation vocabulary."""
    for r in rels:
        yield Rule.symmetry(r)
        yield Rule.asymmetry(r)
    for r, s in itertools.permutations(rels, 2):
        yield Rule.inversion(r, s)
        yield Rule.hierarchy(r, s)
    for r, s in itertools.combinations(rels, 2):
        yield Rule.mutual_exclusion((r, s))
        for head in rels:
            yield Rule.intersection((r, s), head)
    for r, s in itertools.product(rels, repeat=2):
        for head in rels:
            yield Rule.composition((r, s), head)


def verify_basic_exactness(embedding: GeometricEmbedding,
                           kb: RuleBase) -> ExactnessReport:
    """Compare capture against entailment for all seven basic rule shapes."""
    rels = list(kb.relations)
    report = ExactnessReport(
        description=f"basic shapes over {len(rels)} relation(s)")
    for rule in basic_rule_candidates(rels):
        report.record(rule, captures(embedding, rule), entails(kb, rule).holds)
    return report


def verify_exactness(embedding: GeometricEmbedding, kb: RuleBase,
                     kinds: str = "auto", max_body_len: int = 4,
                     index: Optional[AssignmentIndex] = None
                     ) -> ExactnessReport:
    """Sweep a bounded candidate space, comparing capture to entailment.

    ``kinds="basic"`` sweeps the seven basic shapes, ``"composition"`` the
    composition-shaped bodies up to ``max_body_len``; ``"auto"`` picks by
    the rule base's own kinds (composition-shaped bases get the composition
    sweep).
    """
    if kinds == "auto":
        kinds = ("composition" if all(r.is_composition_shaped()
                                      for r in kb.rules) and kb.rules
                 else "basic")
    if kinds == "basic":
        return verify_basic_exactness(embedding, kb)
    if kinds == "composition":
        return verify_composition_exactness(embedding, kb,
                                            max_body_len=max_body_len,
                                            index=index)
    raise ValueError(f"unknown candidate space: {kinds!r}")


def verify_composition_exactness(embedding: GeometricEmbedding, kb: RuleBase,
                                 max_body_len: int = 4,
                                 index: Optional[AssignmentIndex] = None
                                 ) -> ExactnessReport:
    """Compare capture against entailment for composition-shaped candidates.

    One chase per candidate body decides entailment for every head at once;
    the capture side folds the body slice-wise with per-coordinate early
    exit, trying the coordinates engineered against this body first when an
    assignment index is available.
    """
    rels = list(kb.relations)
    report = ExactnessReport(
        description=f"composition bodies up to length {max_body_len} "
                    f"over {len(rels)} relation(s)")
    slices = {r: embedding.relation_regions[r].slices for r in rels}
    dim = embedding.dim

    for k in range(1, max_body_len + 1):
        for body in itertools.product(rels, repeat=k):
            facts = [(rel, i, i + 1) for i, rel in enumerate(body)]
            atoms, _ = saturate(kb.rules, facts)
            entailed = {h for h in rels if (h, 0, k) in atoms}

            coord_order = []
            if index is not None:
                hint = index.body_coord.get(body)
                if hint is not None:
                    coord_order.append(hint)
                hint = index.relset_coord.get(frozenset(body))
                if hint is not None:
                    coord_order.append(hint)
            coord_order.extend(i for i in range(dim)
                               if i not in set(coord_order))

            pending = {h for h in rels if body != (h,)}
            for i in coord_order:
                if not pending:
                    break
                folded = slices[body[0]][i]
                for s in body[1:]:
                    folded = folded.compose(slices[s][i])
                pending = {h for h in pending
                           if slices[h][i].issuperset(folded)}
            for h in rels:
                captured = True if body == (h,) else h in pending
                report.record(Rule.composition(body, h), captured,
                              h in entailed or body == (h,))
    return report
