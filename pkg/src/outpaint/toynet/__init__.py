"""Numpy network stack, objectives, trainers and inference for the toy nets."""

from .adam import AdamState, NumericError, adam_update
from .checkpoint import CheckpointError, load_checkpoint, read_jsonl, save_checkpoint, write_jsonl
from .data import synthetic_stripes
from .gradcheck import GradCheckReport, gradient_check
from .network import (
    ToyNetwork,
    build_from_arch,
    make_discriminator,
    make_feature_extractor,
    make_generator,
)
from .pipeline import infer_outpaint, seam_discontinuity, zero_fill_outpaint
from .train import (
    PreparedData,
    StageResult,
    TrainConfig,
    final_step_amplitude,
    prepare,
    toy_config,
    train_completion_stage,
    train_edge_stage,
)

__all__ = [
    "AdamState",
    "CheckpointError",
    "GradCheckReport",
    "NumericError",
    "PreparedData",
    "StageResult",
    "ToyNetwork",
    "TrainConfig",
    "adam_update",
    "build_from_arch",
    "final_step_amplitude",
    "gradient_check",
    "infer_outpaint",
    "load_checkpoint",
    "make_discriminator",
    "make_feature_extractor",
    "make_generator",
    "prepare",
    "read_jsonl",
    "save_checkpoint",
    "seam_discontinuity",
    "synthetic_stripes",
    "toy_config",
    "train_completion_stage",
    "train_edge_stage",
    "write_jsonl",
    "zero_fill_outpaint",
]
