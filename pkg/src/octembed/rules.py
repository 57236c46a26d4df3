"""Binary Horn rules over relations: parsing, entailment, and closure.

The rule language covers the shapes a region embedding can express
geometrically:

    symmetry          r(X,Y) -> r(Y,X)
    asymmetry         r(X,Y) -> !r(Y,X)
    inversion         r1(X,Y) -> r2(Y,X)
    hierarchy         r1(X,Y) -> r2(X,Y)
    intersection      r1(X,Y) & r2(X,Y) -> r3(X,Y)
    mutual exclusion  r1(X,Y) & r2(X,Y) -> false
    composition       r1(X,Y) & r2(Y,Z) -> r3(X,Z)
    extended comp.    r1(X1,X2) & ... & rk(Xk,Xk+1) -> r(X1,Xk+1)

Entailment is decided by ground forward chaining: instantiate the query
body with fresh constants and saturate under the rule base.  No rule ever
introduces a constant, so the chase is a finite fixpoint (at most
``|relations| * constants**2`` atoms).  Everything here is pure; concurrent
queries need no locking.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Optional, Sequence


class RuleKind(str, Enum):
    SYMMETRY = "symmetry"
    ASYMMETRY = "asymmetry"
    INVERSION = "inversion"
    HIERARCHY = "hierarchy"
    INTERSECTION = "intersection"
    MUTUAL_EXCLUSION = "mutual-exclusion"
    COMPOSITION = "composition"
    EXTENDED_COMPOSITION = "extended-composition"


class Atom(NamedTuple):
    relation: str
    first: int
    second: int


class RuleShapeError(ValueError):
    """The atoms do not match any of the supported rule shapes."""


@dataclass(frozen=True)
class Rule:
    kind: RuleKind
    body: tuple
    head: Optional[Atom]          # None for rules concluding falsity
    head_negated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))

    @property
    def relations(self) -> tuple:
        rels = [a.relation for a in self.body]
        if self.head is not None:
            rels.append(self.head.relation)
        return tuple(rels)

    def is_regular(self) -> bool:
        """All body and head relations pairwise distinct."""
        rels = self.relations
        return len(set(rels)) == len(rels)

    def is_trivial(self) -> bool:
        return (self.head is not None and not self.head_negated
                and self.body == (self.head,))

    # -- constructors for the common shapes -----------------------------------

    @staticmethod
    def symmetry(r: str) -> "Rule":
        return Rule(RuleKind.SYMMETRY, (Atom(r, 0, 1),), Atom(r, 1, 0))

    @staticmethod
    def asymmetry(r: str) -> "Rule":
        return Rule(RuleKind.ASYMMETRY, (Atom(r, 0, 1),), Atom(r, 1, 0),
                    head_negated=True)

    @staticmethod
    def inversion(r1: str, r2: str) -> "Rule":
        return Rule(RuleKind.INVERSION, (Atom(r1, 0, 1),), Atom(r2, 1, 0))

    @staticmethod
    def hierarchy(r1: str, r2: str) -> "Rule":
        return Rule(RuleKind.HIERARCHY, (Atom(r1, 0, 1),), Atom(r2, 0, 1))

    @staticmethod
    def intersection(body: Sequence[str], head: str) -> "Rule":
        atoms = tuple(Atom(r, 0, 1) for r in body)
        return Rule(RuleKind.INTERSECTION, atoms, Atom(head, 0, 1))

    @staticmethod
    def mutual_exclusion(body: Sequence[str]) -> "Rule":
        atoms = tuple(Atom(r, 0, 1) for r in body)
        return Rule(RuleKind.MUTUAL_EXCLUSION, atoms, None)

    @staticmethod
    def composition(body: Sequence[str], head: str) -> "Rule":
        atoms = tuple(Atom(r, i, i + 1) for i, r in enumerate(body))
        kind = (RuleKind.HIERARCHY if len(atoms) == 1 else
                RuleKind.COMPOSITION if len(atoms) == 2 else
                RuleKind.EXTENDED_COMPOSITION)
        return Rule(kind, atoms, Atom(head, 0, len(atoms)))

    # -- shape predicates ------------------------------------------------------

    def is_composition_shaped(self) -> bool:
        return self.kind in (RuleKind.HIERARCHY, RuleKind.COMPOSITION,
                             RuleKind.EXTENDED_COMPOSITION)

    def body_relations(self) -> tuple:
        return tuple(a.relation for a in self.body)

    def __str__(self) -> str:
        names = "XYZWVUTS"

        def var(i):
            return names[i] if i < len(names) else f"X{i}"

        body = " & ".join(f"{a.relation}({var(a.first)},{var(a.second)})"
                          for a in self.body)
        if self.head is None:
            return f"{body} -> false"
        sign = "!" if self.head_negated else ""
        return (f"{body} -> {sign}{self.head.relation}"
                f"({var(self.head.first)},{var(self.head.second)})")


_ATOM_RE = re.compile(r"\s*(!?)\s*([\w.\-]+)\s*\(\s*([\w]+)\s*,\s*([\w]+)\s*\)\s*")


def _parse_atom(text: str):
    m = _ATOM_RE.fullmatch(text)
    if not m:
        raise RuleShapeError(f"bad atom: {text!r}")
    negated, rel, a, b = m.groups()
    return bool(negated), rel, a, b


def parse_rule(text: str) -> Rule:
    """Parse one rule in the ``atom ('&' atom)* '->' (atom|'!'atom|'false')``
    grammar and classify its shape; anything outside the supported shapes is
    rejected."""
    if "->" not in text:
        raise RuleShapeError(f"missing '->' in rule: {text!r}")
    body_text, head_text = text.split("->", 1)
    body_parts = [p for p in (s.strip() for s in body_text.split("&")) if p]
    if not body_parts:
        raise RuleShapeError(f"empty body: {text!r}")

    var_ids: dict = {}

    def vid(name: str) -> int:
        return var_ids.setdefault(name, len(var_ids))

    body = []
    for part in body_parts:
        negated, rel, a, b = _parse_atom(part)
        if negated:
            raise RuleShapeError(f"negated body atom not supported: {part!r}")
        if a == b:
            raise RuleShapeError(f"repeated variable in atom: {part!r}")
        body.append(Atom(rel, vid(a), vid(b)))
    body = tuple(body)

    head_text = head_text.strip()
    if head_text == "false":
        head, head_negated = None, False
    else:
        head_negated, rel, a, b = _parse_atom(head_text)
        if a == b:
            raise RuleShapeError(f"repeated variable in atom: {head_text!r}")
        if a not in var_ids or b not in var_ids:
            raise RuleShapeError(f"head variable not bound by body: {text!r}")
        head = Atom(rel, vid(a), vid(b))

    return _classify(body, head, head_negated, text)


def _classify(body, head, head_negated, text) -> Rule:
    same_pair = all(a.first == body[0].first and a.second == body[0].second
                    for a in body)
    chain = all(a.first == i and a.second == i + 1
                for i, a in enumerate(body))
    if head is None:
        if same_pair and len(body) >= 2 and body[0][1:] == (0, 1):
            return Rule(RuleKind.MUTUAL_EXCLUSION, body, None)
        raise RuleShapeError(f"unsupported falsity rule shape: {text!r}")
    if head_negated:
        if (len(body) == 1 and body[0][1:] == (0, 1) and head[1:] == (1, 0)
                and head.relation == body[0].relation):
            return Rule(RuleKind.ASYMMETRY, body, head, head_negated=True)
        raise RuleShapeError(f"unsupported negated-head shape: {text!r}")
    if len(body) == 1 and body[0][1:] == (0, 1):
        if head[1:] == (1, 0):
            kind = (RuleKind.SYMMETRY if head.relation == body[0].relation
                    else RuleKind.INVERSION)
            return Rule(kind, body, head)
        if head[1:] == (0, 1):
            return Rule(RuleKind.HIERARCHY, body, head)
    if same_pair and len(body) >= 2 and body[0][1:] == (0, 1) \
            and head[1:] == (0, 1):
        return Rule(RuleKind.INTERSECTION, body, head)
    if chain and len(body) >= 2 and head[1:] == (0, len(body)):
        kind = (RuleKind.COMPOSITION if len(body) == 2
                else RuleKind.EXTENDED_COMPOSITION)
        return Rule(kind, body, head)
    raise RuleShapeError(f"unsupported rule shape: {text!r}")


def parse_rules(lines: Iterable[str]) -> list:
    """Parse a rule file: one rule per line, '#' comments, blank lines ignored."""
    rules = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rules.append(parse_rule(line))
        except RuleShapeError as exc:
            raise RuleShapeError(f"line {lineno}: {exc}") from exc
    return rules


def load_rules(path) -> "RuleBase":
    with open(path, encoding="utf-8") as fh:
        return RuleBase.of(parse_rules(fh))


@dataclass(frozen=True)
class RuleBase:
    rules: tuple
    relations: tuple

    @staticmethod
    def of(rules: Iterable[Rule], relations: Iterable[str] = ()) -> "RuleBase":
        rules = tuple(rules)
        rels = sorted({r for rule in rules for r in rule.relations}
                      | set(relations))
        return RuleBase(rules, tuple(rels))

    def __iter__(self):
        return iter(self.rules)

    def kinds(self) -> set:
        return {rule.kind for rule in self.rules}


# -- forward chaining ---------------------------------------------------------


class Inconsistent(Exception):
    pass


def _match_body(body, binding, atoms_by_rel):
    """Yield variable bindings extending ``binding`` that satisfy ``body``."""
    if not body:
        yield binding
        return
    atom, rest = body[0], body[1:]
    for a, b in atoms_by_rel.get(atom.relation, ()):
        new = binding
        ba = binding.get(atom.first)
        if ba is None:
            new = dict(new)
            new[atom.first] = a
        elif ba != a:
            continue
        bb = new.get(atom.second)
        if bb is None:
            if new is binding:
                new = dict(new)
            new[atom.second] = b
        elif bb != b:
            continue
        yield from _match_body(rest, new, atoms_by_rel)


def saturate(rules: Iterable[Rule], facts: Iterable[tuple]):
    """Forward-chain to the finite fixpoint over the given constants.

    ``facts`` are ground atoms (relation, a, b).  Returns the closed fact set
    and whether falsity was derived.  Rules never invent constants, so the
    fixpoint exists and is reached after finitely many sweeps.
    """
    atoms_by_rel: dict = {}
    atoms = set()

    def insert(fact):
        if fact in atoms:
            return False
        atoms.add(fact)
        atoms_by_rel.setdefault(fact[0], set()).add((fact[1], fact[2]))
        return True

    for fact in facts:
        insert(fact)

    bottom = False
    changed = True
    while changed and not bottom:
        changed = False
        for rule in rules:
            for binding in list(_match_body(rule.body, {}, atoms_by_rel)):
                if rule.head is None or rule.head_negated:
                    if rule.head is None:
                        bottom = True
                    else:
                        flipped = (rule.head.relation,
                                   binding[rule.head.first],
                                   binding[rule.head.second])
                        if flipped in atoms:
                            bottom = True
                    if bottom:
                        break
                    continue
                fact = (rule.head.relation, binding[rule.head.first],
                        binding[rule.head.second])
                changed |= insert(fact)
            if bottom:
                break
    return atoms, bottom


@dataclass(frozen=True)
class EntailmentResult:
    head_derived: bool
    inconsistent: bool

    @property
    def holds(self) -> bool:
        """Entailed in the classical sense: derived, or vacuous via falsity."""
        return self.head_derived or self.inconsistent

    @property
    def vacuous(self) -> bool:
        return self.inconsistent and not self.head_derived

    def __bool__(self) -> bool:
        return self.holds


def entails(kb: RuleBase, query: Rule) -> EntailmentResult:
    """Decide ``kb |= query`` by chasing the query body's canonical instance.

    Positive-head queries report both whether the head was derived and
    whether the canonical body is inconsistent under ``kb`` (an inconsistent
    body entails anything; callers can tell the vacuous case apart).
    Falsity-head and negated-head queries hold iff the body extended with
    the negated head's positive complement derives falsity.
    """
    facts = [(a.relation, a.first, a.second) for a in query.body]
    if query.head is None:
        _, bottom = saturate(kb.rules, facts)
        return EntailmentResult(head_derived=False, inconsistent=bottom)
    if query.head_negated:
        facts.append((query.head.relation, query.head.first, query.head.second))
        _, bottom = saturate(kb.rules, facts)
        return EntailmentResult(head_derived=False, inconsistent=bottom)
    atoms, bottom = saturate(kb.rules, facts)
    head = (query.head.relation, query.head.first, query.head.second)
    return EntailmentResult(head_derived=head in atoms, inconsistent=bottom)


def is_consistent(kb: RuleBase) -> bool:
    """Satisfiable with every relation non-empty.

    Seeding each relation with one private edge and chasing suffices: the
    disjoint union of the per-seed chases is a model when none derives
    falsity.
    """
    for rel in kb.relations:
        _, bottom = saturate(kb.rules, [(rel, 0, 1)])
        if bottom:
            return False
    return True


# -- composition-rule closure ---------------------------------------------------


@dataclass(frozen=True)
class RegularityViolation:
    reason: str
    witness: object

    def __str__(self):
        return f"{self.reason}: {self.witness}"


@dataclass(frozen=True)
class PreconditionResult:
    ok: bool
    violation: Optional[RegularityViolation] = None
    closure: Optional[frozenset] = None   # frozenset[(body tuple, head)]


def _comp_form(rule: Rule):
    if not rule.is_composition_shaped():
        raise ValueError(f"not a composition-shaped rule: {rule}")
    return rule.body_relations(), rule.head.relation


def _dependency_cycle(forms):
    """Find a cycle in the body-to-head relation dependency graph, if any."""
    edges: dict = {}
    for body, head in forms:
        for rel in body:
            edges.setdefault(rel, set()).add(head)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {r: WHITE for r in edges}
    stack = []

    def visit(node):
        color[node] = GREY
        stack.append(node)
        for nxt in edges.get(node, ()):
            if color.get(nxt, WHITE) == GREY:
                return stack[stack.index(nxt):] + [nxt]
            if color.get(nxt, WHITE) == WHITE:
                color.setdefault(nxt, WHITE)
                found = visit(nxt)
                if found:
                    return found
        stack.pop()
        color[node] = BLACK
        return None

    for node in list(edges):
        if color.get(node, WHITE) == WHITE:
            found = visit(node)
            if found:
                return found
    return None


def precondition_regular(kb: RuleBase) -> PreconditionResult:
    """Check that a composition-only rule base can be embedded exactly.

    Requires every given rule to be regular, the body-to-head dependency
    graph to be acyclic, and every rule in the unfolding closure to be
    regular or trivial.  Violations are reported as values with a witness,
    never raised.
    """
    forms = []
    for rule in kb.rules:
        if not rule.is_composition_shaped():
            return PreconditionResult(False, RegularityViolation(
                "rule is not composition-shaped", rule))
        if not rule.is_regular():
            return PreconditionResult(False, RegularityViolation(
                "non-regular rule", rule))
        forms.append(_comp_form(rule))

    cycle = _dependency_cycle(forms)
    if cycle:
        return PreconditionResult(False, RegularityViolation(
            "cyclic relation dependencies", " -> ".join(cycle)))

    # Unfold: replace a body relation by the body of a rule deriving it.
    # Each popped rule is paired with everything already closed, both as the
    # unfolded rule and as the inner replacement, so no pair is missed.
    # Acyclicity makes this terminate (each replacement strictly lowers the
    # replaced position in topological order).
    closed = set(forms)
    worklist = list(forms)
    while worklist:
        body, head = worklist.pop()
        partners = list(closed)
        derived = []
        for i, rel in enumerate(body):
            derived.extend((body[:i] + sub_body + body[i + 1:], head)
                           for sub_body, sub_head in partners
                           if sub_head == rel)
        for outer_body, outer_head in partners:
            derived.extend(
                (outer_body[:i] + body + outer_body[i + 1:], outer_head)
                for i, rel in enumerate(outer_body) if rel == head)
        for new_body, new_head in derived:
            new = (new_body, new_head)
            if new in closed or new_body == (new_head,):
                continue
            if len(set(new_body)) != len(new_body) or new_head in new_body:
                return PreconditionResult(False, RegularityViolation(
                    "entailed non-regular rule",
                    Rule.composition(new_body, new_head)))
            closed.add(new)
            worklist.append(new)
    return PreconditionResult(True, closure=frozenset(closed))


def deductive_closure(kb: RuleBase) -> set:
    """All non-trivial composition-shaped rules entailed by ``kb``.

    Computed by body unfolding; only defined when the regularity
    precondition holds (raises otherwise).  Agrees with the chase oracle on
    every composition-shaped query.
    """
    pre = precondition_regular(kb)
    if not pre.ok:
        raise ValueError(f"regularity precondition violated; {pre.violation}")
    return {Rule.composition(body, head) for body, head in pre.closure}
