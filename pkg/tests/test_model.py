import math

import numpy as np
import pytest

from octembed.model import (
    Gradients,
    adversarial_weights,
    glorot_uniform,
    init_model,
    loss_with_gradients,
    nssa_loss,
    score,
    score_with_gradients,
    sigmoid,
    soft_distances,
    variant_masks,
)


def tiny_model(variant="uvxy", attention=False, p=1.0, dim=4, seed=3):
    return init_model(dim=dim, entity_names=["a", "b", "c"],
                      relation_names=["r", "s"], variant=variant,
                      attention=attention, p=p, seed=seed)


def flatten(grads):
    return np.concatenate([grads[k].ravel() for k in sorted(grads)])


def finite_difference(fn, model, h=1e-5):
    fd = Gradients.zeros_like(model)
    for name, arr in model.parameters().items():
        flat, out = arr.ravel(), fd[name].ravel()
        for i in range(arr.size):
            orig = flat[i]
            flat[i] = orig + h
            up = fn()
            flat[i] = orig - h
            down = fn()
            flat[i] = orig
            out[i] = (up - down) / (2 * h)
    return fd


# -- variants and masks ---------------------------------------------------------


def test_variant_masks_subsets():
    masks = variant_masks("uxy", 5)
    assert masks["u"].all() and masks["x"].all() and masks["y"].all()
    assert not masks["v"].any()


def test_split_variant_masks_halves():
    masks = variant_masks("u+v", 5)
    assert masks["u"].sum() == 3  # ceil(5/2)
    assert masks["v"].sum() == 2
    assert not (masks["u"] & masks["v"]).any()
    assert not masks["x"].any() and not masks["y"].any()


def test_variant_masks_reject_garbage():
    for bad in ("", "uu", "uvz", "xyzw"):
        with pytest.raises(ValueError):
            variant_masks(bad, 4)


# -- distances and score ----------------------------------------------------------


def test_distance_is_half_on_band_boundary():
    model = tiny_model(variant="u", dim=2)
    r = model.relation_id("r")
    a, b = model.entity_id("a"), model.entity_id("b")
    model.centers["u"][r] = np.array([0.5, -0.25])
    model.widths["u"][r] = np.array([0.0, 0.75])
    # center hit with zero width
    model.entities[a] = np.array([0.0, 0.0])
    model.entities[b] = np.array([0.5, 0.5])  # f - e = (0.5, 0.5)
    dist = soft_distances(model, ("a", "r", "b"))["u"]
    assert dist[0] == pytest.approx(0.5)      # exactly on the degenerate band
    assert dist[1] == pytest.approx(0.5)      # |0.5 + 0.25| = width
    assert score(model, ("a", "r", "b"), p=1) == pytest.approx(-1.0)


def test_distance_deep_inside_band_is_tiny():
    assert sigmoid(np.array([-10.0]))[0] == pytest.approx(4.5397868702e-05)


def test_score_all_boundary_components():
    model = tiny_model(variant="uvxy", dim=1)
    r = model.relation_id("r")
    for band in "xyuv":
        model.widths[band][r] = np.zeros(1)
    a, b = model.entity_id("a"), model.entity_id("b")
    model.entities[a] = np.array([1.0])
    model.entities[b] = np.array([2.0])
    model.centers["x"][r] = np.array([1.0])
    model.centers["y"][r] = np.array([2.0])
    model.centers["u"][r] = np.array([1.0])
    model.centers["v"][r] = np.array([3.0])
    assert score(model, ("a", "r", "b"), p=1) == pytest.approx(-2.0)


def test_score_monotone_as_pair_approaches_band_center():
    model = tiny_model(variant="u", dim=3, seed=11)
    r = model.relation_id("r")
    a, b = model.entity_id("a"), model.entity_id("b")
    center = model.centers["u"][r]
    start = model.entities[b] - model.entities[a]
    last = -np.inf
    for t in np.linspace(0.0, 1.0, 7):
        model.entities[b] = model.entities[a] + (1 - t) * start + t * center
        current = score(model, ("a", "r", "b"))
        assert current >= last - 1e-12
        last = current


def test_inactive_parameters_do_not_move_the_score():
    model = tiny_model(variant="u")
    base = score(model, ("a", "r", "b"))
    rng = np.random.default_rng(0)
    for band in ("x", "y", "v"):
        model.centers[band] += rng.normal(size=model.centers[band].shape)
        model.widths[band] += rng.normal(size=model.widths[band].shape)
    assert score(model, ("a", "r", "b")) == base


def test_split_variant_uses_disjoint_coordinates():
    model = tiny_model(variant="u+v", dim=5, seed=2)
    base = score(model, ("a", "r", "b"))
    half = math.ceil(5 / 2)
    # u parameters beyond the split point are inactive, v before it likewise
    model.centers["u"][:, half:] += 7.0
    model.centers["v"][:, :half] -= 3.0
    assert score(model, ("a", "r", "b")) == base


def test_hard_region_matches_soft_threshold():
    rng = np.random.default_rng(8)
    for trial in range(60):
        variant = ("u", "uxy", "uvxy", "u+v")[trial % 4]
        model = init_model(dim=3, entity_names=["a", "b"],
                           relation_names=["r"], variant=variant,
                           attention=False, p=1.0, seed=trial)
        region = model.hard_region("r")
        e = rng.normal(size=3)
        f = rng.normal(size=3)
        model.entities[0] = e
        model.entities[1] = f
        dists = soft_distances(model, ("a", "r", "b"))
        margin_ok = all(
            abs(abs(v) - 0.5) > 1e-9
            for band, vec in dists.items()
            for v, active in zip(vec, model.coord_masks[band]) if active)
        if not margin_ok:
            continue
        inside_soft = all(
            v <= 0.5
            for band, vec in dists.items()
            for v, active in zip(vec, model.coord_masks[band]) if active)
        from fractions import Fraction
        inside_hard = region.contains_pair(
            [Fraction(float(x)) for x in e], [Fraction(float(x)) for x in f])
        assert inside_soft == inside_hard


# -- initialisation -----------------------------------------------------------------


def test_init_is_deterministic_per_seed():
    one = tiny_model(seed=42, attention=True)
    two = tiny_model(seed=42, attention=True)
    for name, arr in one.parameters().items():
        assert np.array_equal(arr, two.parameters()[name])
    other = tiny_model(seed=43, attention=True)
    assert any(not np.array_equal(arr, other.parameters()[name])
               for name, arr in one.parameters().items())


def test_glorot_bound():
    rng = np.random.default_rng(0)
    sample = glorot_uniform(rng, 30, 20)
    bound = math.sqrt(6.0 / 50)
    assert np.abs(sample).max() <= bound
    assert np.abs(sample).max() > 0.8 * bound  # actually fills the range


# -- loss ------------------------------------------------------------------------


def test_loss_perfect_positive_and_hopeless_negatives():
    loss, _, _ = nssa_loss(0.0, np.array([-1e9]), margin=3.0)
    assert loss == pytest.approx(-math.log(sigmoid(np.array([3.0]))[0]),
                                 rel=1e-9)


def test_loss_at_margin_scores():
    loss, _, _ = nssa_loss(-3.0, np.array([-3.0]), margin=3.0)
    assert loss == pytest.approx(2 * math.log(2))


def test_adversarial_weights_symmetry():
    weights = adversarial_weights(np.array([[-1.0, -1.0]]))
    assert weights[0] == pytest.approx([0.5, 0.5])
    skew = adversarial_weights(np.array([[-1.0, -5.0]]), temperature=2.0)
    assert skew[0, 0] > skew[0, 1]


def test_loss_rejects_no_negatives():
    with pytest.raises(ValueError):
        nssa_loss(0.0, np.zeros((1, 0)), margin=1.0)


def test_paper_literal_mode_flips_the_pressure():
    # the displayed form goes down when the positive score gets worse
    worse, _, _ = nssa_loss(-10.0, np.array([-1.0]), margin=2.0,
                            mode="paper-literal")
    better, _, _ = nssa_loss(-0.1, np.array([-1.0]), margin=2.0,
                             mode="paper-literal")
    assert worse < better


# -- gradients ----------------------------------------------------------------------


@pytest.mark.parametrize("variant,attention,p", [
    ("uvxy", False, 1.0),
    ("uvxy", True, 1.0),
    ("u", False, 2.0),
    ("u+v", True, 2.0),
])
def test_score_gradients_match_finite_differences(variant, attention, p):
    model = tiny_model(variant=variant, attention=attention, p=p, seed=5)
    triple = ("a", "r", "b")
    _, analytic = score_with_gradients(model, triple)
    numeric = finite_difference(lambda: score(model, triple), model)
    ga, gn = flatten(analytic), flatten(numeric)
    assert np.linalg.norm(ga - gn) <= 1e-4 * max(np.linalg.norm(ga),
                                                 np.linalg.norm(gn))


def test_loss_gradients_match_finite_differences():
    model = tiny_model(variant="uvxy", attention=True, seed=7)
    pos = np.array([[0, 0, 1], [1, 1, 2]])
    neg = np.array([[[0, 0, 2], [2, 0, 1]], [[0, 1, 2], [1, 1, 0]]])
    from octembed.model import _forward
    flat = neg.reshape(-1, 3)
    base_neg, _ = _forward(model, flat[:, 0], flat[:, 1], flat[:, 2])
    frozen = adversarial_weights(base_neg.reshape(2, 2), 1.5)

    _, analytic = loss_with_gradients(model, pos, neg, margin=2.0,
                                      temperature=1.5, weights=frozen)
    numeric = finite_difference(
        lambda: loss_with_gradients(model, pos, neg, margin=2.0,
                                    temperature=1.5, weights=frozen)[0],
        model)
    ga, gn = flatten(analytic), flatten(numeric)
    assert np.linalg.norm(ga - gn) <= 1e-4 * max(np.linalg.norm(ga),
                                                 np.linalg.norm(gn))
