"""Command-line interface.

Subcommands:
    octa       exact single-octagon operations on literals
    entail     decide whether a rule base entails a query rule
    construct  exact embedding of a knowledge graph or rule base
    train      run a training experiment from a config file
    eval       filtered link-prediction metrics for a checkpoint
    verify     capture report of an embedding against a rule file

Usage errors exit with status 2 (argparse default); data and file errors
print to stderr and exit with status 1.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .constructions import (
    construct_comp,
    construct_kg_capture,
    construct_noncomp,
    verify_basic_exactness,
    verify_composition_exactness,
)
from .evaluation import evaluate
from .experiment import run_experiment
from .kg import load_triples
from .octagons import Octagon
from .regions import captures
from .rules import RuleKind, entails, load_rules, parse_rule
from .serialize import dump_embedding, load_checkpoint, load_embedding

COMP_KINDS = {RuleKind.HIERARCHY, RuleKind.COMPOSITION,
              RuleKind.EXTENDED_COMPOSITION}
NONCOMP_KINDS = {RuleKind.SYMMETRY, RuleKind.INVERSION, RuleKind.HIERARCHY,
                 RuleKind.INTERSECTION}


def _cmd_octa(args) -> int:
    operands = [Octagon.parse(text) for text in args.octagon]
    op = args.operation
    if op == "normalize":
        print(operands[0].normalize().literal())
    elif op == "inverse":
        print(operands[0].inverse().literal())
    elif op == "classify":
        print(operands[0].normalize().classify_idempotent())
    elif op == "intersect":
        print(operands[0].intersect(operands[1]).literal())
    elif op == "compose":
        print(operands[0].normalize().compose(operands[1].normalize())
              .literal())
    return 0


def _cmd_entail(args) -> int:
    kb = load_rules(args.rules)
    query = parse_rule(args.query)
    result = entails(kb, query)
    print("true" if result.holds else "false")
    if result.vacuous:
        print("note: entailment is vacuous (inconsistent rule body)",
              file=sys.stderr)
    return 0


def _cmd_construct(args) -> int:
    if args.kind == "kg":
        kg = load_triples(args.input)
        embedding = construct_kg_capture(kg)
        induced = embedding.induced_graph()
        mismatches = induced.name_triples() ^ kg.name_triples()
        report = (f"triples checked: "
                  f"{kg.num_entities ** 2 * kg.num_relations}\n"
                  f"disagreements: {len(mismatches)}")
    else:
        kb = load_rules(args.input)
        kinds = kb.kinds()
        if kinds <= COMP_KINDS:
            embedding, index = construct_comp(kb, mode=args.mode,
                                              max_body_len=args.max_body_len)
            report = verify_composition_exactness(
                embedding, kb, max_body_len=args.max_body_len,
                index=index).render()
        elif kinds <= NONCOMP_KINDS:
            embedding, _ = construct_noncomp(kb, mode=args.mode)
            report = verify_basic_exactness(embedding, kb).render()
        else:
            unsupported = sorted(k.value for k in kinds - COMP_KINDS
                                 - NONCOMP_KINDS) or sorted(
                k.value for k in kinds)
            raise ValueError(
                "rule base mixes composition with other kinds or uses "
                f"unsupported kinds: {', '.join(unsupported)}")
    dump_embedding(embedding, args.output)
    print(report)
    return 0


def _cmd_train(args) -> int:
    config = load_config(args.config)
    artifacts = run_experiment(config)
    print(f"checkpoint: {artifacts.checkpoint_path}")
    print(f"history: {artifacts.history_path}")
    if artifacts.eval_path:
        print(f"eval: {artifacts.eval_path}")
        print(f"test mrr: {artifacts.report.mrr:.6f}")
    return 0


def _cmd_eval(args) -> int:
    model, _, _ = load_checkpoint(args.checkpoint)
    test_kg = load_triples(args.test, split="test")
    filters = [load_triples(path) for path in args.filter] + [test_kg]
    report = evaluate(model, test_kg, filters)
    for metric, value in report.metric_rows():
        print(f"{metric},{value}")
    return 0


def _cmd_verify(args) -> int:
    embedding = load_embedding(args.embedding)
    kb = load_rules(args.rules)
    for rule in kb.rules:
        print(f"{rule}\t{'captured' if captures(embedding, rule) else 'not-captured'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="octembed",
        description="Octagon region embeddings for knowledge graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    octa = sub.add_parser("octa", help="exact octagon operations")
    octa.add_argument("operation",
                      choices=["normalize", "compose", "intersect",
                               "inverse", "classify"])
    octa.add_argument("octagon", nargs="+",
                      help="octagon literal(s) like octa(0,1,0,1,-1,1,0,2)")
    octa.set_defaults(func=_cmd_octa, arity_check=True)

    entail = sub.add_parser("entail", help="rule entailment query")
    entail.add_argument("rules", help="rule file (one rule per line)")
    entail.add_argument("query", help="query rule, e.g. 'r(X,Y) -> s(X,Y)'")
    entail.set_defaults(func=_cmd_entail)

    construct = sub.add_parser("construct",
                               help="exact embedding of a graph or rule base")
    construct.add_argument("kind", choices=["kg", "rules"])
    construct.add_argument("input", help="TSV triples or rule file")
    construct.add_argument("-o", "--output", required=True,
                           help="embedding export destination")
    construct.add_argument("--mode", choices=["witness", "full"],
                           default="witness")
    construct.add_argument("--max-body-len", type=int, default=4)
    construct.set_defaults(func=_cmd_construct)

    train_cmd = sub.add_parser("train", help="run a training experiment")
    train_cmd.add_argument("config", help="key = value configuration file")
    train_cmd.set_defaults(func=_cmd_train)

    eval_cmd = sub.add_parser("eval", help="evaluate a checkpoint")
    eval_cmd.add_argument("--checkpoint", required=True)
    eval_cmd.add_argument("--test", required=True, help="test TSV")
    eval_cmd.add_argument("--filter", action="append", default=[],
                          help="additional known-true TSV splits "
                               "(repeatable)")
    eval_cmd.set_defaults(func=_cmd_eval)

    verify = sub.add_parser("verify",
                            help="which rules an embedding captures")
    verify.add_argument("embedding", help="embedding export file")
    verify.add_argument("rules", help="rule file")
    verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s",
                        stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "octa":
        needed = 2 if args.operation in ("compose", "intersect") else 1
        if len(args.octagon) != needed:
            parser.error(f"octa {args.operation} takes exactly {needed} "
                         f"octagon literal(s)")
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
