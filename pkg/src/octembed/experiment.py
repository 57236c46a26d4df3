"""End-to-end experiment runner: config file in, artifact files out."""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass
from typing import Optional

from .config import ExperimentConfig, load_config
from .evaluation import EvalReport, evaluate
from .kg import load_triples
from .serialize import dump_checkpoint
from .training import TrainResult, train

logger = logging.getLogger(__name__)


@dataclass
class ExperimentArtifacts:
    checkpoint_path: str
    history_path: str
    eval_path: Optional[str]
    result: TrainResult
    report: Optional[EvalReport]


def run_experiment(config: ExperimentConfig) -> ExperimentArtifacts:
    """Train per the config, checkpoint the best model, write CSV reports.

    Requires ``train_path``; validation and test splits are optional.  The
    run is single-threaded and seed-determined, so repeated runs produce
    byte-identical artifacts.
    """
    if not config.train_path:
        raise ValueError("configuration is missing train_path")
    train_kg = load_triples(config.train_path, split="train")
    valid_kg = (load_triples(config.valid_path, split="valid")
                if config.valid_path else None)
    test_kg = (load_triples(config.test_path, split="test")
               if config.test_path else None)

    result = train(train_kg, valid_kg, config.train)

    os.makedirs(config.output_dir, exist_ok=True)
    checkpoint_path = os.path.join(config.output_dir, "checkpoint.txt")
    dump_checkpoint(result.model, config.train, checkpoint_path)

    history_path = os.path.join(config.output_dir, "history.csv")
    with open(history_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "valid_mrr"])
        for record in result.history:
            writer.writerow([record.epoch, f"{record.loss:.17g}",
                             "" if record.valid_mrr is None
                             else f"{record.valid_mrr:.17g}"])

    eval_path, report = None, None
    if test_kg is not None:
        filters = [train_kg] + ([valid_kg] if valid_kg else []) + [test_kg]
        report = evaluate(result.model, test_kg, filters)
        eval_path = os.path.join(config.output_dir, "eval.csv")
        with open(eval_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["metric", "value"])
            for metric, value in report.metric_rows():
                writer.writerow([metric, value if isinstance(value, str)
                                 else f"{value:.17g}" if isinstance(value, float)
                                 else value])
        logger.info("test MRR %.4f over %d cases", report.mrr, report.cases)

    return ExperimentArtifacts(checkpoint_path=checkpoint_path,
                               history_path=history_path,
                               eval_path=eval_path, result=result,
                               report=report)


def run_experiment_file(config_path: str) -> ExperimentArtifacts:
    return run_experiment(load_config(config_path))
