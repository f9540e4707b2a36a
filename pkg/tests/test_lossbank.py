import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from outpaint import lossbank as lb


def numeric_grad(f, x, h=1e-6):
    g = np.zeros_like(x)
    for i in np.ndindex(x.shape):
        old = x[i]
        x[i] = old + h
        up = f(x)
        x[i] = old - h
        down = f(x)
        x[i] = old
        g[i] = (up - down) / (2 * h)
    return g


def test_weights_defaults_and_validation():
    w = lb.LossWeights()
    assert (w.lambda_l1, w.lambda_adv, w.lambda_perc, w.lambda_style) == (1.0, 0.2, 0.1, 250.0)
    assert (w.lambda_hinge, w.lambda_fm) == (1.0, 10.0)
    with pytest.raises(ValueError):
        lb.LossWeights(lambda_fm=-1.0)


def test_hinge_examples():
    assert lb.hinge_g_loss(np.zeros(3)) == 0.0
    assert lb.hinge_g_loss([0.3, 0.3]) == pytest.approx(-0.3)
    s = np.array([0.2, -1.3, 0.7])
    assert lb.hinge_g_loss(3 * s) == pytest.approx(3 * lb.hinge_g_loss(s))
    assert lb.hinge_d_loss([1.0, 2.0], [-1.0, -3.0]) == 0.0
    assert lb.hinge_d_loss([0.5], [-0.5]) == pytest.approx(1.0)
    assert lb.hinge_d_loss(np.zeros(4), np.zeros(4)) == 2.0
    with pytest.raises(ValueError):
        lb.hinge_g_loss([])
    with pytest.raises(ValueError):
        lb.hinge_d_loss([], [1.0])


def test_nsgan_examples():
    assert lb.nsgan_g_loss([0.5]) == pytest.approx(math.log(2))
    assert lb.nsgan_g_loss([1.0]) == pytest.approx(0.0, abs=1e-6)
    assert lb.nsgan_g_loss([0.25, 0.75]) == pytest.approx(0.8370, abs=1e-4)
    assert lb.nsgan_d_loss([0.5], [0.5]) == pytest.approx(2 * math.log(2))
    assert lb.nsgan_d_loss([1.0], [0.0]) == pytest.approx(0.0, abs=1e-6)
    assert lb.nsgan_d_loss([0.9], [0.1]) == pytest.approx(0.2107, abs=1e-4)
    for bad in ([1.5], [-0.1], []):
        with pytest.raises(ValueError):
            lb.nsgan_g_loss(bad)


def test_feature_matching_examples():
    a = [np.ones((2, 3, 3)), np.zeros((4, 2, 2))]
    assert lb.feature_matching_loss(a, a) == 0.0
    assert lb.feature_matching_loss([np.zeros((3, 4))], [np.full((3, 4), -0.7)]) == pytest.approx(0.7)
    b = [a[0] + 0.25, a[1] - 0.5]
    assert lb.feature_matching_loss(a, b) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        lb.feature_matching_loss(a, a[:1])
    with pytest.raises(ValueError):
        lb.feature_matching_loss([np.zeros(3)], [np.zeros(4)])


def test_l1_masked_examples(rng):
    gt = rng.random((2, 3, 6, 6))
    m = np.zeros((2, 1, 6, 6))
    m[..., 2:4] = 1
    assert lb.l1_masked_loss(gt, gt, m) == 0.0
    for width in (1, 3, 6):
        mm = np.zeros((2, 1, 6, 6))
        mm[..., :width] = 1
        assert lb.l1_masked_loss(gt + 0.125, gt, mm) == pytest.approx(0.125)
    outside = gt + 0.3 * (1 - m)
    assert lb.l1_masked_loss(outside, gt, m) == 0.0
    with pytest.raises(ValueError):
        lb.l1_masked_loss(gt, gt, np.zeros_like(m))


def test_l1_masked_hwc_mask():
    gt = np.zeros((4, 4, 3))
    m = np.zeros((4, 4))
    m[0, 0] = 1
    assert lb.l1_masked_loss(gt + 0.5, gt, m) == pytest.approx(0.5)


def test_gram_examples(rng):
    g = lb.gram_matrix(np.full((1, 3, 5), 0.6))
    assert g.shape == (1, 1) and g[0, 0] == pytest.approx(0.36)
    f = np.zeros((2, 2, 2))
    f[0, 0, :] = 1.0
    f[1, 1, :] = 1.0
    g = lb.gram_matrix(f)
    assert g[0, 1] == 0.0 and g[1, 0] == 0.0
    r = lb.gram_matrix(rng.normal(size=(4, 3, 3)))
    assert np.allclose(r, r.T)
    assert np.linalg.eigvalsh(r).min() > -1e-12


def test_style_examples(rng):
    a = [rng.random((3, 4, 4))]
    assert lb.style_loss(a, a) == 0.0
    assert lb.style_loss([np.full((1, 2, 2), 0.5)], [np.full((1, 2, 2), 0.9)]) == pytest.approx(
        abs(0.25 - 0.81))
    perm = rng.permutation(16)
    x = rng.random((3, 4, 4))
    y = rng.random((3, 4, 4))
    xp = x.reshape(3, 16)[:, perm].reshape(3, 4, 4)
    assert lb.style_loss([x], [y]) == pytest.approx(lb.style_loss([xp], [y]))


def test_perceptual_examples(rng):
    a = [rng.random((2, 4, 4))]
    assert lb.perceptual_loss(a, a) == 0.0
    assert lb.perceptual_loss([a[0] + 0.2], a) == pytest.approx(0.2)
    b, c = [rng.random((2, 4, 4))], [rng.random((2, 4, 4))]
    assert lb.perceptual_loss(a, c) <= lb.perceptual_loss(a, b) + lb.perceptual_loss(b, c) + 1e-12


def test_totals():
    assert lb.total_edge_loss((1.0, 0.0)) == 1.0
    assert lb.total_edge_loss((0.5, 0.1)) == pytest.approx(1.5)
    zero = lb.LossWeights(0, 0, 0, 0, 0, 0)
    assert lb.total_edge_loss((0.5, 0.1), zero) == 0.0
    assert lb.total_completion_loss((1.0, 0, 0, 0)) == 1.0
    assert lb.total_completion_loss((0, 0, 0, 0.01)) == pytest.approx(2.5)
    assert lb.total_completion_loss((0.1, 0.1, 0.1, 0.1)) == pytest.approx(25.13)
    assert lb.total_completion_loss(lb.CompletionLossParts(0.1, 0.1, 0.1, 0.1)) == pytest.approx(25.13)


small = arrays(np.float64, st.tuples(st.integers(1, 3), st.integers(1, 4)),
               elements=st.floats(-3, 3))
probs = arrays(np.float64, st.tuples(st.integers(1, 3), st.integers(1, 4)),
               elements=st.floats(0.01, 0.99))


@given(small, small.map(lambda x: x + 0.5))
def test_losses_non_negative_and_finite(a, b):
    assert lb.hinge_d_loss(a, a) >= 0
    assert math.isfinite(lb.hinge_g_loss(a))
    if a.shape == b.shape:
        assert lb.feature_matching_loss([a], [b]) >= 0
        assert lb.perceptual_loss([a], [b]) >= 0
        f = a.reshape((1,) + a.shape)
        assert lb.style_loss([f], [f + 0.1]) >= 0


@given(probs)
def test_nsgan_non_negative(p):
    assert lb.nsgan_g_loss(p) >= 0
    assert lb.nsgan_d_loss(p, p) >= 0


@given(st.integers(0, 10_000))
def test_batch_permutation_invariance(seed):
    r = np.random.default_rng(seed)
    real, fake = r.normal(size=5), r.normal(size=5)
    p = r.permutation(5)
    assert lb.hinge_d_loss(real[p], fake[p]) == pytest.approx(lb.hinge_d_loss(real, fake))
    pr, pf = r.uniform(0.1, 0.9, 5), r.uniform(0.1, 0.9, 5)
    assert lb.nsgan_d_loss(pr[p], pf[p]) == pytest.approx(lb.nsgan_d_loss(pr, pf))
    x, y = r.random((5, 2, 3, 3)), r.random((5, 2, 3, 3))
    assert lb.style_loss([x[p]], [y[p]]) == pytest.approx(lb.style_loss([x], [y]))
    assert lb.perceptual_loss([x[p]], [y[p]]) == pytest.approx(lb.perceptual_loss([x], [y]))
    m = (r.random((5, 1, 3, 3)) > 0.3).astype(float)
    m[0, 0, 0, 0] = 1
    assert lb.l1_masked_loss(x[p], y[p], m[p]) == pytest.approx(lb.l1_masked_loss(x, y, m))


@given(st.integers(0, 10_000))
def test_l1_ignores_values_outside_mask(seed):
    r = np.random.default_rng(seed)
    pred, gt = r.random((2, 3, 4, 4)), r.random((2, 3, 4, 4))
    m = (r.random((2, 1, 4, 4)) > 0.5).astype(float)
    m[0, 0, 0, 0] = 1
    shaken = pred + r.normal(size=pred.shape) * (1 - m)
    assert lb.l1_masked_loss(shaken, gt, m) == lb.l1_masked_loss(pred, gt, m)


# -- analytic gradients against central differences ---------------------------

def _away_from(x, points, gap=1e-2):
    for p in points:
        x = np.where(np.abs(x - p) < gap, p + gap * np.sign(x - p + 1e-12) * 2, x)
    return x


def test_adversarial_grads(rng):
    s = _away_from(rng.normal(size=(3, 2)), (1.0, -1.0))
    t = _away_from(rng.normal(size=(3, 2)), (1.0, -1.0))
    assert np.allclose(lb.hinge_g_grad(s), numeric_grad(lb.hinge_g_loss, s.copy()), atol=1e-8)
    gr, gf = lb.hinge_d_grad(s, t)
    assert np.allclose(gr, numeric_grad(lambda x: lb.hinge_d_loss(x, t), s.copy()), atol=1e-8)
    assert np.allclose(gf, numeric_grad(lambda x: lb.hinge_d_loss(s, x), t.copy()), atol=1e-8)
    p, q = rng.uniform(0.05, 0.95, (4,)), rng.uniform(0.05, 0.95, (4,))
    assert np.allclose(lb.nsgan_g_grad(p), numeric_grad(lb.nsgan_g_loss, p.copy()), rtol=1e-6)
    gr, gf = lb.nsgan_d_grad(p, q)
    assert np.allclose(gr, numeric_grad(lambda x: lb.nsgan_d_loss(x, q), p.copy()), rtol=1e-6)
    assert np.allclose(gf, numeric_grad(lambda x: lb.nsgan_d_loss(p, x), q.copy()), rtol=1e-6)


def test_nsgan_grad_zero_where_clamped():
    assert lb.nsgan_g_grad([0.0])[0] == 0.0


def test_distance_grads(rng):
    a = [rng.random((2, 3, 3)), rng.random((2, 4, 2, 2))]
    b = [x + _away_from(rng.normal(size=x.shape), (0.0,)) for x in a]
    for loss, grad in ((lb.feature_matching_loss, lb.feature_matching_grad),
                       (lb.perceptual_loss, None)):
        if grad is None:
            gs = lb.perceptual_grad(b, a)
            f = lambda x, i: lb.perceptual_loss([x if j == i else b[j] for j in range(2)], a)
        else:
            gs = grad(a, b)
            f = lambda x, i: loss(a, [x if j == i else b[j] for j in range(2)])
        for i in range(2):
            num = numeric_grad(lambda x: f(x, i), b[i].copy())
            assert np.allclose(gs[i], num, atol=1e-7)


def test_l1_and_style_grads(rng):
    gt = rng.random((2, 2, 3, 3))
    pred = gt + _away_from(rng.normal(size=gt.shape), (0.0,))
    m = (rng.random((2, 1, 3, 3)) > 0.4).astype(float)
    m[0, 0, 0, 0] = 1
    num = numeric_grad(lambda x: lb.l1_masked_loss(x, gt, m), pred.copy())
    assert np.allclose(lb.l1_masked_grad(pred, gt, m), num, atol=1e-7)

    p = [rng.random((2, 3, 3, 3)), rng.random((2, 2, 2, 2))]
    g = [rng.random((2, 3, 3, 3)), rng.random((2, 2, 2, 2))]
    gs = lb.style_grad(p, g)
    for i in range(2):
        f = lambda x: lb.style_loss([x if j == i else p[j] for j in range(2)], g)
        assert np.allclose(gs[i], numeric_grad(f, p[i].copy()), atol=1e-7)
