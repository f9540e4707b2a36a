"""Evaluation battery: PSNR, SSIM, BRISQUE, FID and Inception Score."""

from .brisque import BrisqueModel, brisque_features, brisque_score, fit_aggd, fit_ggd, mscn
from .distribution import (
    FeatureSet,
    fid_from_features,
    inception_score_from_probs,
    load_feature_csv,
    matrix_sqrt_psd,
    save_feature_csv,
)
from .fidelity import psnr, ssim, ssim_channels

__all__ = [
    "BrisqueModel",
    "FeatureSet",
    "brisque_features",
    "brisque_score",
    "fid_from_features",
    "fit_aggd",
    "fit_ggd",
    "inception_score_from_probs",
    "load_feature_csv",
    "matrix_sqrt_psd",
    "mscn",
    "psnr",
    "save_feature_csv",
    "ssim",
    "ssim_channels",
]
