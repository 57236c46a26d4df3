"""Acceptance suite: one test per criterion, one printed line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS lines as
they happen (each test also fails loudly on its own if the criterion does
not hold).
"""

import random
import time
from fractions import Fraction

import numpy as np
import pytest

from octembed.config import TrainConfig, load_config
from octembed.constructions import (
    construct_comp,
    construct_kg_capture,
    construct_noncomp,
    staircase,
    verify_basic_exactness,
    verify_composition_exactness,
)
from octembed.evaluation import evaluate, random_baseline_mrr
from octembed.experiment import run_experiment
from octembed.kg import KnowledgeGraph
from octembed.model import (
    Gradients,
    adversarial_weights,
    init_model,
    loss_with_gradients,
    score,
    score_with_gradients,
)
from octembed.octagons import (
    EMPTY,
    IdempotenceClass,
    Octagon,
    grid_axis,
    hull,
    raster_mask,
)
from octembed.regions import Region
from octembed.rules import Rule, RuleBase, parse_rules
from octembed.training import train
from octembed.bounds import INF, NEG_INF

from conftest import join_masks, random_normalized, random_octagon
from datasets import shifted_line_kg, symmetric_irreflexive_kg
from test_constructions import random_comp_kb, random_kg, random_noncomp_kb


def report(number: int, detail: str) -> None:
    print(f"ACCEPTANCE {number:02d}: PASS ({detail})")


# -- 1: octagon algebra against the half-step raster oracle --------------------------


def test_criterion_01_octagon_algebra_vs_oracle():
    started = time.monotonic()
    rng = random.Random(2024)
    axis = grid_axis(-6, 6, Fraction(1, 2))
    octagons = [random_octagon(rng) for _ in range(1000)]
    for i, raw in enumerate(octagons):
        normalized = raw.normalize()
        raw_m = raster_mask(raw, axis)
        norm_m = raster_mask(normalized, axis)
        assert np.array_equal(raw_m, norm_m)

        other = octagons[(i + 1) % len(octagons)]
        other_n = other.normalize()
        other_m = raster_mask(other_n, axis)

        met = raw.intersect(other)
        assert np.array_equal(raster_mask(met, axis), raw_m & other_m)

        comp = normalized.compose(other_n)
        assert np.array_equal(raster_mask(comp, axis),
                              join_masks(norm_m, other_m))

        both = hull([normalized, other_n])
        union = norm_m | other_m
        points = [(axis[a], axis[b]) for a, b in np.argwhere(union)]
        assert np.array_equal(raster_mask(both, axis) & union, union)
        if points:
            assert both.xlo == min(x for x, _ in points)
            assert both.xhi == max(x for x, _ in points)
            assert both.ylo == min(y for _, y in points)
            assert both.yhi == max(y for _, y in points)
            assert both.ulo == min(y - x for x, y in points)
            assert both.uhi == max(y - x for x, y in points)
            assert both.vlo == min(x + y for x, y in points)
            assert both.vhi == max(x + y for x, y in points)

        assert np.array_equal(raster_mask(raw.inverse(), axis), raw_m.T)
        assert raw.inverse().inverse() == raw
    elapsed = time.monotonic() - started
    assert elapsed < 60.0
    report(1, f"1000 octagons x 5 operations in {elapsed:.1f}s")


# -- 2: closed-form identities of the canonical families ------------------------------


def test_criterion_02_composition_identities():
    banded = Octagon(0, 2, 0, 2, -1, 1, 0, 4)
    assert banded.compose(banded) == Octagon(0, 2, 0, 2, -2, 2, 0, 4)
    assert staircase(1, 1, 3).compose(staircase(2, 1, 3)) == staircase(1, 2, 3)
    for k in range(2, 6):
        size = k + 1
        chain = staircase(1, 1, size)
        for j in range(2, k + 1):
            chain = chain.compose(staircase(j, 1, size))
        assert chain == staircase(1, k, size)
    report(2, "banded-square doubling and staircase chains up to length 5")


# -- 3: idempotence classifier ---------------------------------------------------------


def test_criterion_03_idempotence_classifier():
    rng = random.Random(99)
    disagreements = 0
    for _ in range(10_000):
        o = random_normalized(rng, allow_empty=True)
        tagged = o.classify_idempotent() != IdempotenceClass.NOT_IDEMPOTENT
        if tagged != (o.compose(o) == o):
            disagreements += 1
    assert disagreements == 0
    report(3, "10,000 random normalized octagons, zero disagreements")


# -- 4: self-composition fixpoints ------------------------------------------------------


def test_criterion_04_fixpoint_taxonomy():
    rng = random.Random(123)
    checked = 0
    while checked < 500:
        o = random_normalized(rng)
        if not o.vlo < o.vhi:
            continue
        checked += 1
        m, limit = o.fixpoint(max_iter=64)
        assert limit.compose(o) == limit
        cls = limit.classify_idempotent()
        assert cls != IdempotenceClass.NOT_IDEMPOTENT
        if o.uhi < 0 or o.ulo > 0:
            assert limit == EMPTY
        elif o.ulo == 0 == o.uhi:
            assert cls == IdempotenceClass.DIAGONAL and limit == o
        elif o.ulo < 0 < o.uhi:
            assert cls in (IdempotenceClass.RECTANGLE,
                           IdempotenceClass.DIAGONAL)
        elif o.ulo == 0:
            assert cls in (IdempotenceClass.ULO_ZERO,
                           IdempotenceClass.RECTANGLE)
        else:
            assert cls in (IdempotenceClass.UHI_ZERO,
                           IdempotenceClass.RECTANGLE)
    report(4, "500 random octagons with open sum-band, all within 64 steps")


# -- 5: exact knowledge-graph capture ---------------------------------------------------


def test_criterion_05_kg_capture():
    rng = random.Random(7)
    mirror = KnowledgeGraph.from_triples([("e", "r", "f"), ("f", "r", "e")])
    embedding = construct_kg_capture(mirror)
    assert embedding.induced_graph().name_triples() == mirror.name_triples()
    for _ in range(200):
        kg = random_kg(rng, rng.randint(1, 6), rng.randint(1, 3),
                       rng.random())
        embedding = construct_kg_capture(kg)
        assert embedding.induced_graph().name_triples() == kg.name_triples()
    report(5, "200 random graphs (up to 6 entities, 3 relations) plus the "
              "symmetric-irreflexive pair, all captured exactly")


# -- 6: difference-band-only regions cannot separate symmetric pairs ----------------------


def test_criterion_06_unbounded_sum_band_limitation():
    rng = random.Random(55)
    fired = violations = 0
    for _ in range(1000):
        dim = rng.randint(1, 3)
        slices, e, f = [], [], []
        for _ in range(dim):
            lo, hi = -rng.randint(0, 3), rng.randint(0, 3)
            slices.append(Octagon(-4, 4, -4, 4, lo, hi, NEG_INF, INF))
            base = rng.randint(-3, 3)
            e.append(base)
            f.append(base + rng.randint(-2, 2))
        region = Region(tuple(slices))
        if region.contains_pair(e, f) and region.contains_pair(f, e):
            fired += 1
            if not region.contains_pair(e, e):
                violations += 1
    assert violations == 0
    assert fired >= 100
    report(6, f"1000 sampled regions/pairs, premise fired {fired} times, "
              f"zero violations")


# -- 7: rule-base constructions are exact --------------------------------------------------


def test_criterion_07_rule_base_exactness():
    rng = random.Random(41)
    for _ in range(100):
        kb = random_noncomp_kb(rng)
        embedding, _ = construct_noncomp(kb)
        result = verify_basic_exactness(embedding, kb)
        assert result.ok, result.render()
    for _ in range(100):
        kb = random_comp_kb(rng)
        embedding, index = construct_comp(kb)
        result = verify_composition_exactness(embedding, kb, max_body_len=4,
                                              index=index)
        assert result.ok, result.render()

    from octembed.constructions import ConstructionError
    squaring = RuleBase.of([Rule.composition(("r1", "r1"), "r2"),
                            Rule.composition(("r2", "r2"), "r3")])
    with pytest.raises(ConstructionError, match="non-regular") as err:
        construct_comp(squaring)
    assert "r1" in str(err.value)

    lines = [f"s{i}(X,Y) -> r{j}(X,Y)"
             for i in range(1, 5) for j in range(1, 5) if i != j]
    lines += ["r2(X,Y) & r3(X,Y) & r4(X,Y) -> s1(X,Y)",
              "s1(X,Y) & r1(X,Y) -> false"]
    mixed = RuleBase.of(parse_rules(lines))
    from octembed.rules import is_consistent
    assert is_consistent(mixed)
    with pytest.raises(ConstructionError) as err:
        construct_noncomp(mixed)
    assert any(r.kind.value == "mutual-exclusion"
               for r in err.value.violations)
    report(7, "100 seed-grown and 100 composition bases exact; "
              "non-regular and mutual-exclusion bases rejected with witnesses")


# -- 8: analytic gradients match finite differences -----------------------------------------


def _flatten(grads):
    return np.concatenate([grads[k].ravel() for k in sorted(grads)])


def _finite_difference(fn, model, h=1e-5):
    out = Gradients.zeros_like(model)
    for name, arr in model.parameters().items():
        flat, dest = arr.ravel(), out[name].ravel()
        for i in range(arr.size):
            orig = flat[i]
            flat[i] = orig + h
            up = fn()
            flat[i] = orig - h
            down = fn()
            flat[i] = orig
            dest[i] = (up - down) / (2 * h)
    return out


def test_criterion_08_gradient_check():
    rng = np.random.default_rng(12)
    variants = ("u", "ux", "uxy", "uv", "uvxy", "u+v")
    worst = 0.0
    for trial in range(100):
        model = init_model(dim=int(rng.integers(2, 5)),
                           entity_names=["a", "b", "c"],
                           relation_names=["r", "s"],
                           variant=variants[trial % len(variants)],
                           attention=bool(trial % 2),
                           p=(1.0, 2.0)[trial % 2], seed=trial)
        triple = ("a", "r", "b")
        _, analytic = score_with_gradients(model, triple)
        numeric = _finite_difference(lambda: score(model, triple), model)
        ga, gn = _flatten(analytic), _flatten(numeric)
        err = np.linalg.norm(ga - gn) / max(np.linalg.norm(ga),
                                            np.linalg.norm(gn), 1e-12)
        worst = max(worst, err)
        assert err <= 1e-4

        pos = np.array([[0, 0, 1]])
        neg = np.array([[[0, 0, 2], [2, 1, 1]]])
        from octembed.model import _forward
        flat = neg.reshape(-1, 3)
        base, _ = _forward(model, flat[:, 0], flat[:, 1], flat[:, 2])
        frozen = adversarial_weights(base.reshape(1, 2), 1.0)
        _, analytic = loss_with_gradients(model, pos, neg, margin=2.0,
                                          weights=frozen)
        numeric = _finite_difference(
            lambda: loss_with_gradients(model, pos, neg, margin=2.0,
                                        weights=frozen)[0], model)
        ga, gn = _flatten(analytic), _flatten(numeric)
        err = np.linalg.norm(ga - gn) / max(np.linalg.norm(ga),
                                            np.linalg.norm(gn), 1e-12)
        worst = max(worst, err)
        assert err <= 1e-4
    report(8, f"100 random models, worst relative error {worst:.2e}")


# -- 9: the sum band is what separates symmetric-irreflexive data ----------------------------


def test_criterion_09_ablation_on_symmetric_irreflexive_data():
    started = time.monotonic()
    train_kg, valid_kg, test_kg = symmetric_irreflexive_kg(
        num_entities=50, num_pairs=60, seed=0)
    results = {}
    for variant in ("uvxy", "uxy"):
        config = TrainConfig(dim=16, p=1.0, margin=12.0, negatives=16,
                             learning_rate=5e-2, batch_size=32, epochs=400,
                             validation_period=20, seed=7, variant=variant)
        outcome = train(train_kg, valid_kg, config)
        results[variant] = evaluate(outcome.model, test_kg,
                                    [train_kg, valid_kg, test_kg])
    elapsed = time.monotonic() - started
    assert results["uvxy"].hits[1] >= 0.5, results["uvxy"]
    assert results["uxy"].hits[1] <= 0.1, results["uxy"]
    assert elapsed < 300.0
    report(9, f"H@1 uvxy={results['uvxy'].hits[1]:.3f} vs "
              f"uxy={results['uxy'].hits[1]:.3f} in {elapsed:.0f}s")


# -- 10: sanity floor on a small structured benchmark ----------------------------------------


def test_criterion_10_small_benchmark_floor():
    started = time.monotonic()
    train_kg, valid_kg, test_kg = shifted_line_kg(num_entities=200, seed=0)
    baseline = random_baseline_mrr(test_kg, list(train_kg.entities),
                                   [train_kg, valid_kg, test_kg])
    config = TrainConfig(dim=40, p=1.0, margin=6.0, negatives=16,
                         learning_rate=5e-2, batch_size=128, epochs=400,
                         validation_period=20, seed=3, variant="uvxy")
    outcome = train(train_kg, valid_kg, config)
    result = evaluate(outcome.model, test_kg, [train_kg, valid_kg, test_kg])
    elapsed = time.monotonic() - started
    assert result.mrr >= 5.0 * baseline, (result.mrr, baseline)
    assert elapsed < 600.0
    report(10, f"MRR {result.mrr:.3f} vs random baseline {baseline:.4f} "
               f"({result.mrr / baseline:.1f}x) in {elapsed:.0f}s")


# -- 11: bitwise determinism ------------------------------------------------------------------


def test_criterion_11_determinism(tmp_path):
    train_kg, valid_kg, test_kg = symmetric_irreflexive_kg(
        num_entities=12, num_pairs=20, seed=8)
    for name, kg in (("train", train_kg), ("valid", valid_kg),
                     ("test", test_kg)):
        with open(tmp_path / f"{name}.tsv", "w", encoding="utf-8") as fh:
            for h, r, t in sorted(kg.name_triples()):
                fh.write(f"{h}\t{r}\t{t}\n")
    outputs = []
    for run in ("one", "two"):
        config_text = (
            "dim = 8\nepochs = 30\nbatch_size = 16\nnegatives = 4\n"
            "learning_rate = 2e-2\nmargin = 3\nvalidation_period = 10\n"
            "seed = 13\n"
            f"train_path = {tmp_path / 'train.tsv'}\n"
            f"valid_path = {tmp_path / 'valid.tsv'}\n"
            f"test_path = {tmp_path / 'test.tsv'}\n"
            f"output_dir = {tmp_path / run}\n")
        config_path = tmp_path / f"{run}.cfg"
        config_path.write_text(config_text, encoding="utf-8")
        outputs.append(run_experiment(load_config(config_path, env={})))
    first, second = outputs
    checkpoint_one = open(first.checkpoint_path, "rb").read()
    checkpoint_two = open(second.checkpoint_path, "rb").read()
    assert checkpoint_one == checkpoint_two
    assert open(first.history_path, "rb").read() == \
        open(second.history_path, "rb").read()
    assert open(first.eval_path, "rb").read() == \
        open(second.eval_path, "rb").read()
    assert first.report.mrr == second.report.mrr
    assert first.report.hits == second.report.hits
    report(11, "two seeded runs: identical checkpoints, histories, reports")
