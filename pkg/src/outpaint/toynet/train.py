"""Two-stage adversarial training under the progressive mask schedule.

Both trainers walk the schedule steps in order.  Every iteration draws a
seeded batch, takes one discriminator step and then one generator step.
The learning rate drops from ``lr_initial`` to ``lr_fine`` after
``fine_tune_at`` of all iterations.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import lossbank as lb
from ..edgemap import CannyParams, edge_f1, image_edges
from ..imagecore import as_image, to_grayscale
from ..maskschedule import ScheduleSpec, build_center_mask, mask_width_at_step
from .adam import AdamState, NumericError, adam_update
from .network import ToyNetwork, make_discriminator, make_feature_extractor, make_generator
from .objectives import (
    CompletionBatch,
    EdgeBatch,
    completion_d_step,
    completion_g_step,
    edge_d_step,
    edge_g_step,
)

log = logging.getLogger(__name__)

LOSS_VARIANTS = ("hinge", "nsgan")


@dataclass
class TrainConfig:
    seed: int = 0
    iters_per_step: int = 10
    batch_size: int = 4
    lr_initial: float = 1e-4
    lr_fine: float = 1e-5
    fine_tune_at: float = 0.8
    d_lr_ratio: float = 1.0
    loss_variant: str = "hinge"
    image_size: tuple[int, int] = (64, 32)      # (W, H)
    total_steps: int = 32
    start_fraction: float = 1.0 / 32.0
    end_fraction: float = 0.5
    gen_widths: tuple[int, int] = (8, 16)
    n_res: int = 2
    disc_widths: tuple[int, int, int] = (8, 16, 32)
    eval_every: int = 100
    weights: lb.LossWeights = field(default_factory=lb.LossWeights)
    canny: CannyParams = field(default_factory=CannyParams)

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.lr_initial <= 0 or self.lr_fine <= 0 or self.d_lr_ratio <= 0:
            raise ValueError("learning rates must be positive")
        if self.iters_per_step < 1:
            raise ValueError("iters_per_step must be at least 1")
        if self.loss_variant not in LOSS_VARIANTS:
            raise ValueError(f"loss_variant must be one of {LOSS_VARIANTS}")
        w, h = self.image_size
        if w % 4 or h % 4:
            raise ValueError("image dimensions must be multiples of 4 for the toy nets")

    @property
    def schedule(self) -> ScheduleSpec:
        w, h = self.image_size
        return ScheduleSpec(w, h, self.total_steps, self.start_fraction, self.end_fraction)

    @property
    def total_iters(self) -> int:
        return self.total_steps * self.iters_per_step

    def lr_at(self, it: int) -> float:
        return self.lr_initial if it < self.fine_tune_at * self.total_iters else self.lr_fine

    def to_dict(self) -> dict:
        d = asdict(self)
        d["image_size"] = list(self.image_size)
        d["gen_widths"] = list(self.gen_widths)
        d["disc_widths"] = list(self.disc_widths)
        return d


def toy_config(**overrides) -> TrainConfig:
    """Settings that train the 64x32 toy nets within ~2000 iterations.

    At lr 1e-4 the sigmoid head never leaves its near-0.5 start in that
    budget, an unslowed discriminator wipes out the feature-matching
    signal, and a style weight of 250 swamps the reconstruction term for
    the small random-feature extractor.
    """
    base = dict(iters_per_step=62, lr_initial=3e-3, lr_fine=3e-4, d_lr_ratio=0.01,
                eval_every=400, weights=lb.LossWeights(lambda_style=0.1))
    base.update(overrides)
    return TrainConfig(**base)


@dataclass
class PreparedData:
    rgb: np.ndarray     # (N, 3, H, W)
    gray: np.ndarray    # (N, 1, H, W)
    edges: np.ndarray   # (N, 1, H, W)

    def __len__(self):
        return self.rgb.shape[0]


def prepare(images, canny: CannyParams, size: tuple[int, int] | None = None) -> PreparedData:
    """Grayscale and Canny edge maps for a list of RGB images."""
    if len(images) == 0:
        raise ValueError("dataset is empty")
    rgb, gray, edges = [], [], []
    for img in images:
        img = as_image(img)
        if img.shape[2] == 1:
            img = np.repeat(img, 3, axis=2)
        if size is not None and (img.shape[1], img.shape[0]) != tuple(size):
            raise ValueError(f"image of size {img.shape[1]}x{img.shape[0]} does not match {size}")
        rgb.append(img.transpose(2, 0, 1))
        gray.append(to_grayscale(img).transpose(2, 0, 1))
        edges.append(image_edges(img, canny)[None])
    return PreparedData(np.stack(rgb), np.stack(gray), np.stack(edges))


def _mask_tensor(mask: np.ndarray, batch: int) -> np.ndarray:
    return np.broadcast_to(mask[None, None], (batch, 1) + mask.shape).copy()


def _check_finite(value: float, what: str) -> float:
    if not np.isfinite(value):
        raise NumericError(f"non-finite {what}: {value}")
    return value


def _check_schedule(cfg: TrainConfig) -> None:
    spec = cfg.schedule
    for s in range(1, spec.total_steps + 1):
        if mask_width_at_step(spec, s) < 1:
            raise ValueError(f"schedule step {s} has an empty mask")


def eval_mask(cfg: TrainConfig) -> np.ndarray:
    """The widest schedule mask, used for held-out evaluation."""
    return build_center_mask(cfg.schedule, cfg.schedule.total_steps)


def build_edge_nets(cfg: TrainConfig, rng: np.random.Generator):
    g = make_generator(3, 1, cfg.gen_widths, cfg.n_res, rng=rng, role="edge_generator")
    out = "linear" if cfg.loss_variant == "hinge" else "sigmoid"
    d = make_discriminator(2, cfg.disc_widths, out, rng=rng)
    return g, d


def predict_edges(g: ToyNetwork, gray, edges, mask) -> np.ndarray:
    """Run the edge generator on ``(B, 1, H, W)`` inputs."""
    return g.forward(EdgeBatch(gray, edges, mask).generator_input())


def heldout_edge_f1(g: ToyNetwork, data: PreparedData, mask: np.ndarray) -> float:
    """F1 over the missing region, pooled across all held-out images."""
    m = _mask_tensor(mask, len(data))
    pred = predict_edges(g, data.gray, data.edges, m)
    pooled_pred = pred[:, 0].reshape(-1, mask.shape[1])
    pooled_gt = data.edges[:, 0].reshape(-1, mask.shape[1])
    region = np.tile(mask, (len(data), 1))
    return edge_f1(pooled_pred, pooled_gt, region=region)[2]


@dataclass
class StageResult:
    generator: ToyNetwork
    discriminator: ToyNetwork
    log: list[dict]
    evals: list[dict]
    config: TrainConfig


def train_edge_stage(cfg: TrainConfig, dataset, holdout=None) -> StageResult:
    """Train the edge generator and its discriminator.

    *dataset* and *holdout* are lists of RGB images (or :class:`PreparedData`).
    Held-out edge F1 is recorded before training, every ``eval_every``
    iterations and at the end.
    """
    data = dataset if isinstance(dataset, PreparedData) else prepare(dataset, cfg.canny, cfg.image_size)
    held = None
    if holdout is not None:
        held = holdout if isinstance(holdout, PreparedData) else prepare(holdout, cfg.canny, cfg.image_size)
    _check_schedule(cfg)

    init_ss, sample_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    g, d = build_edge_nets(cfg, np.random.default_rng(init_ss))
    rng = np.random.default_rng(sample_ss)
    opt_g = AdamState(lr=cfg.lr_initial)
    opt_d = AdamState(lr=cfg.lr_initial)
    w = cfg.weights
    emask = eval_mask(cfg)

    records, evals = [], []
    if held is not None:
        evals.append({"iter": 0, "step": 0, "f1": heldout_edge_f1(g, held, emask)})

    it = 0
    for step in range(1, cfg.total_steps + 1):
        mask = _mask_tensor(build_center_mask(cfg.schedule, step), cfg.batch_size)
        for _ in range(cfg.iters_per_step):
            lr = cfg.lr_at(it)
            opt_g.lr = lr
            opt_d.lr = lr * cfg.d_lr_ratio
            idx = rng.integers(0, len(data), size=cfg.batch_size)
            batch = EdgeBatch(data.gray[idx], data.edges[idx], mask)

            e_pred = predict_edges(g, batch.gray, batch.edges, batch.mask)
            d.zero_grad()
            d_loss = _check_finite(edge_d_step(e_pred, d, batch, cfg.loss_variant), "D_e loss")
            adam_update(opt_d, d)

            g.zero_grad()
            total, parts, _ = edge_g_step(g, d, batch, w, cfg.loss_variant)
            _check_finite(total, "G_e loss")
            adam_update(opt_g, g)

            it += 1
            records.append({"stage": "edge", "step": step, "iter": it, "lr": lr,
                            "d_loss": d_loss, "adv": parts.adv, "fm": parts.fm, "g_loss": total})
            if held is not None and (it % cfg.eval_every == 0 or it == cfg.total_iters):
                evals.append({"iter": it, "step": step, "f1": heldout_edge_f1(g, held, emask)})
        log.debug("edge step %d/%d done, g_loss %.4f", step, cfg.total_steps, records[-1]["g_loss"])
    return StageResult(g, d, records, evals, cfg)


def composite_edges(e_gt: np.ndarray, e_pred: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return e_gt * (1.0 - mask) + e_pred * mask


def heldout_masked_l1(gc: ToyNetwork, ge: ToyNetwork, data: PreparedData, mask: np.ndarray) -> float:
    m = _mask_tensor(mask, len(data))
    e_comp = composite_edges(data.edges, predict_edges(ge, data.gray, data.edges, m), m)
    pred = gc.forward(CompletionBatch(data.rgb, e_comp, m).generator_input())
    return lb.l1_masked_loss(pred, data.rgb, m)


def train_completion_stage(cfg: TrainConfig, dataset, edge_generator: ToyNetwork,
                           holdout=None, extractor: ToyNetwork | None = None) -> StageResult:
    """Train the completion generator against an nsgan discriminator.

    The edge generator is frozen; its prediction fills the missing region of
    the composite edge map fed to the completion generator.
    """
    data = dataset if isinstance(dataset, PreparedData) else prepare(dataset, cfg.canny, cfg.image_size)
    held = None
    if holdout is not None:
        held = holdout if isinstance(holdout, PreparedData) else prepare(holdout, cfg.canny, cfg.image_size)
    _check_schedule(cfg)

    init_ss, sample_ss = np.random.SeedSequence(cfg.seed + 1).spawn(2)
    init_rng = np.random.default_rng(init_ss)
    gc = make_generator(4, 3, cfg.gen_widths, cfg.n_res, rng=init_rng, role="completion_generator")
    dc = make_discriminator(4, cfg.disc_widths, "sigmoid", rng=init_rng)
    extractor = extractor or make_feature_extractor(3)
    rng = np.random.default_rng(sample_ss)
    opt_g = AdamState(lr=cfg.lr_initial)
    opt_d = AdamState(lr=cfg.lr_initial)
    w = cfg.weights
    emask = eval_mask(cfg)

    records, evals = [], []
    if held is not None:
        evals.append({"iter": 0, "step": 0, "l1": heldout_masked_l1(gc, edge_generator, held, emask)})

    it = 0
    for step in range(1, cfg.total_steps + 1):
        mask = _mask_tensor(build_center_mask(cfg.schedule, step), cfg.batch_size)
        for _ in range(cfg.iters_per_step):
            lr = cfg.lr_at(it)
            opt_g.lr = lr
            opt_d.lr = lr * cfg.d_lr_ratio
            idx = rng.integers(0, len(data), size=cfg.batch_size)
            e_pred = predict_edges(edge_generator, data.gray[idx], data.edges[idx], mask)
            batch = CompletionBatch(data.rgb[idx], composite_edges(data.edges[idx], e_pred, mask), mask)

            i_pred = gc.forward(batch.generator_input())
            dc.zero_grad()
            d_loss = _check_finite(completion_d_step(i_pred, dc, batch), "D_c loss")
            adam_update(opt_d, dc)

            gc.zero_grad()
            total, parts, _ = completion_g_step(gc, dc, extractor, batch, w)
            _check_finite(total, "G_c loss")
            adam_update(opt_g, gc)

            it += 1
            records.append({"stage": "completion", "step": step, "iter": it, "lr": lr,
                            "d_loss": d_loss, "l1": parts.l1, "adv": parts.adv,
                            "perc": parts.perc, "style": parts.style, "total": total})
            if held is not None and (it % cfg.eval_every == 0 or it == cfg.total_iters):
                evals.append({"iter": it, "step": step,
                              "l1": heldout_masked_l1(gc, edge_generator, held, emask)})
        log.debug("completion step %d/%d done, total %.4f", step, cfg.total_steps, records[-1]["total"])
    return StageResult(gc, dc, records, evals, cfg)


def final_step_amplitude(records: list[dict], key: str = "g_loss") -> float:
    """Peak-to-peak spread of *key* over the records of the last schedule step."""
    last = max(r["step"] for r in records)
    vals = [r[key] for r in records if r["step"] == last]
    return float(max(vals) - min(vals))
