"""End-to-end criteria, one test each.  Every test records a pass/fail line
that is printed in the terminal summary."""

import json
import math
import time

import numpy as np
import pytest

from outpaint import lossbank as lb
from outpaint.cli import run
from outpaint.maskschedule import ScheduleSpec, mask_width_at_step
from outpaint.metrics import (
    brisque_features,
    fid_from_features,
    fit_ggd,
    inception_score_from_probs,
    mscn,
    psnr,
    ssim,
)
from outpaint.rearrange import make_outpaint_canvas, rearrange_forward, rearrange_inverse, shift_columns
from outpaint.toynet.data import synthetic_stripes
from outpaint.toynet.gradcheck import gradient_check
from outpaint.toynet.network import make_discriminator, make_feature_extractor, make_generator
from outpaint.toynet.objectives import CompletionBatch, EdgeBatch, completion_g_step, edge_g_step
from outpaint.toynet.pipeline import infer_outpaint, seam_discontinuity, zero_fill_outpaint
from outpaint.toynet.train import toy_config, train_completion_stage, train_edge_stage

skimage_metrics = pytest.importorskip("skimage.metrics")


def test_1_rearrangement_round_trip(acceptance):
    r = np.random.default_rng(1)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(1000):
        w, h = (int(v) for v in r.integers(1, 65, size=2))
        c = int(r.choice([1, 3]))
        img = r.random((h, w, c))
        if not np.array_equal(shift_columns(shift_columns(img, w // 2), w - w // 2), img):
            bad += 1
        known = int(r.integers(1, w + 1))
        canvas = make_outpaint_canvas(img[:, :known], w)
        back = rearrange_inverse(rearrange_forward(canvas))
        if not (np.array_equal(back.image, canvas.image) and np.array_equal(back.mask, canvas.mask)):
            bad += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 5.0
    acceptance(1, "rearrangement round trip", ok, f"1000 cases, {bad} mismatches, {dt:.2f} s")
    assert ok


def test_2_schedule_endpoints(acceptance):
    spec = ScheduleSpec(256, 128)
    widths = [mask_width_at_step(spec, s) for s in range(1, 33)]
    ok = widths[0] == 8 and widths[-1] == 128 and all(a <= b for a, b in zip(widths, widths[1:]))
    acceptance(2, "schedule endpoints", ok, f"step 1 -> {widths[0]}, step 32 -> {widths[-1]}")
    assert ok


def test_3_loss_weights(acceptance):
    total = lb.total_completion_loss((1.0, 1.0, 1.0, 1.0))
    ok = abs(total - 251.3) <= 1e-12
    acceptance(3, "completion loss weights", ok, f"total {total!r}")
    assert ok


def _gradcheck_edge():
    r = np.random.default_rng(0)
    g = make_generator(3, 1, (8, 16), 2, rng=r, init_std=0.3)
    d = make_discriminator(2, (8, 16, 32), "linear", rng=r, init_std=0.3)
    m = np.zeros((1, 1, 8, 8))
    m[..., 2:6] = 1.0
    batch = EdgeBatch(r.random((1, 1, 8, 8)), (r.random((1, 1, 8, 8)) > 0.8).astype(float), m)
    w = lb.LossWeights()
    return g, gradient_check(g, lambda bp: edge_g_step(g, d, batch, w, "hinge", bp)[0])


def _gradcheck_completion():
    r = np.random.default_rng(0)
    g = make_generator(4, 3, (8, 16), 2, rng=r, role="completion_generator", init_std=0.3)
    d = make_discriminator(4, (8, 16, 32), "sigmoid", rng=r, init_std=0.3)
    ext = make_feature_extractor(3, seed=7)
    m = np.zeros((1, 1, 8, 8))
    m[..., 2:6] = 1.0
    batch = CompletionBatch(r.random((1, 3, 8, 8)), r.random((1, 1, 8, 8)), m)
    w = lb.LossWeights()
    return g, gradient_check(g, lambda bp: completion_g_step(g, d, ext, batch, w, bp)[0])


def test_4_gradient_checks(acceptance):
    t0 = time.perf_counter()
    ge, edge = _gradcheck_edge()
    gc, comp = _gradcheck_completion()
    dt = time.perf_counter() - t0
    ok = edge.passed and comp.passed and dt < 120
    acceptance(4, "gradient checks on full toy generators", ok,
               f"edge G {ge.num_params()} params max rel {edge.max_rel_error:.2e}; "
               f"completion G {gc.num_params()} params max rel {comp.max_rel_error:.2e}; {dt:.0f} s")
    assert ok


def test_5_metric_oracles(acceptance):
    z = np.zeros((12, 12))
    checks = {
        "psnr inf": psnr(z, z) == math.inf,
        "psnr 0.5": abs(psnr(z, z + 0.5) - 10 * math.log10(4)) < 1e-6,
        "psnr halving": abs(psnr(z, z + 0.25) - psnr(z, z + 0.5) - 10 * math.log10(4)) < 1e-6,
        "ssim constants": abs(ssim(z, z + 1) - 1e-4 / (1 + 1e-4)) < 1e-6,
    }
    r = np.random.default_rng(5)
    a, b = r.random((20, 20)), r.random((20, 20))
    checks["ssim symmetric"] = abs(ssim(a, b) - ssim(b, a)) < 1e-6
    ref = skimage_metrics.structural_similarity(a, b, gaussian_weights=True, sigma=1.5,
                                                use_sample_covariance=False, data_range=1.0)
    checks["ssim reference"] = abs(ssim(a, b) - ref) < 1e-6
    checks["ssim self x50"] = all(abs(ssim(x, x) - 1.0) < 1e-6
                                  for x in (r.random((16 + i % 7, 16 + i % 5)) for i in range(50)))
    f = r.normal(size=(30, 4))
    checks["fid identical"] = abs(fid_from_features(f, f)) < 1e-8
    p, q = np.zeros((4, 2)), np.zeros((4, 2))
    q[:, 1] = 2.0
    checks["fid point masses"] = abs(fid_from_features(p, q) - 4.0) < 1e-8
    checks["is uniform"] = abs(inception_score_from_probs(np.full((3, 4), 0.25)) - 1.0) < 1e-6
    checks["is one-hot"] = abs(inception_score_from_probs(np.eye(5)) - 5.0) < 1e-6
    failed = [k for k, v in checks.items() if not v]
    ok = not failed
    acceptance(5, "metric oracles", ok, f"{len(checks) - len(failed)}/{len(checks)} cases"
               + (f", failed: {failed}" if failed else ""))
    assert ok


def test_6_brisque_sanity(acceptance):
    r = np.random.default_rng(6)
    noise = r.normal(0.0, 1.0, (320, 320))
    alpha = fit_ggd(noise)[0]
    alpha_mscn = fit_ggd(mscn(np.clip(0.5 + 0.1 * noise, 0, 1)))[0]
    feats = [brisque_features(r.random((32, 40)) * r.random()) for _ in range(50)]
    finite = all(f.shape == (36,) and np.isfinite(f).all() for f in feats)
    ok = 1.8 <= alpha <= 2.2 and finite
    acceptance(6, "BRISQUE sanity", ok,
               f"GGD alpha on Gaussian-noise pixels {alpha:.3f} (on its MSCN map {alpha_mscn:.2f}); "
               f"50-image sweep finite: {finite}")
    assert ok


# -- training-based criteria -----------------------------------------------------

@pytest.fixture(scope="module")
def trained():
    images = synthetic_stripes(200, 64, 32, seed=0)
    train, held = images[:180], images[180:]
    cfg = toy_config(seed=0)
    t0 = time.perf_counter()
    edge = train_edge_stage(cfg, train, held)
    comp = train_completion_stage(cfg, train, edge.generator, held)
    return {"edge": edge, "completion": comp, "held": held, "train": train,
            "seconds": time.perf_counter() - t0}


def _short_logs(train, held):
    cfg = toy_config(seed=3, total_steps=2, iters_per_step=5, eval_every=5)
    e = train_edge_stage(cfg, train[:20], held)
    c = train_completion_stage(cfg, train[:20], e.generator, held)
    return json.dumps(e.log + c.log, sort_keys=True)


@pytest.mark.slow
def test_7_toy_training(trained, acceptance):
    edge, comp = trained["edge"], trained["completion"]
    f1_0 = edge.evals[0]["f1"]
    f1_best = max(e["f1"] for e in edge.evals)
    gain = f1_best - f1_0
    l1_0, l1_end = comp.evals[0]["l1"], comp.evals[-1]["l1"]
    drop = 1.0 - l1_end / l1_0
    reproducible = _short_logs(trained["train"], trained["held"]) == _short_logs(trained["train"], trained["held"])
    iters = edge.config.total_iters
    ok = gain >= 0.15 and iters <= 2000 and drop >= 0.30 and reproducible and trained["seconds"] < 1800
    acceptance(7, "toy training", ok,
               f"edge F1 {f1_0:.3f} -> best {f1_best:.3f} (final {edge.evals[-1]['f1']:.3f}, "
               f"gain {gain:.3f}) in {iters} iters; completion masked L1 {l1_0:.4f} -> {l1_end:.4f} "
               f"({100 * drop:.1f}% drop); logs reproducible: {reproducible}; "
               f"{trained['seconds']:.0f} s")
    assert ok


@pytest.mark.slow
def test_8_pipeline_identity(trained, acceptance):
    ge, gc = trained["edge"].generator, trained["completion"].generator
    held = trained["held"]
    img = held[0]
    same = infer_outpaint(ge, gc, img, 64)
    identity = np.array_equal(same, img)
    out = infer_outpaint(ge, gc, img, 128)
    known = out.shape == (32, 128, 3) and np.array_equal(out[:, 32:96], img)

    seam_model, seam_zero = [], []
    for x in held:
        crop = x[:, 16:48]
        seam_model.append(seam_discontinuity(infer_outpaint(ge, gc, crop, 64), 32))
        seam_zero.append(seam_discontinuity(zero_fill_outpaint(crop, 64), 32))
    sm, sz = float(np.mean(seam_model)), float(np.mean(seam_zero))
    ok = identity and known and sm <= sz
    acceptance(8, "pipeline identity", ok,
               f"same width returns input: {identity}; 64->128 known pixels exact: {known}; "
               f"seam |dx| model {sm:.4f} vs zero-fill {sz:.4f}")
    assert ok


def test_9_ablation_report(tmp_path, acceptance):
    out = tmp_path / "ablation"
    code = run(["ablate-loss", "--synthetic", "40", "--steps", "4", "--iters", "10",
                "--out", str(out)])
    report = json.loads((out / "ablation.json").read_text()) if code == 0 else {}
    variants = report.get("variants", {})
    ok = (code == 0 and set(variants) == {"hinge", "nsgan"}
          and all(len(v["f1_curve"]) >= 2 and v["final_step_amplitude"] >= 0 for v in variants.values()))
    detail = ", ".join(f"{k}: amplitude {v['final_step_amplitude']:.3f}, best F1 {v['best_f1']:.3f}"
                       for k, v in sorted(variants.items()))
    acceptance(9, "ablation report", ok, detail or f"exit code {code}")
    assert ok
