"""Kernel-field (QIPF) uncertainty quantification for classifier predictions."""

from .bandwidth import BandwidthConfig, cross_validate_factor, silverman
from .data import CorruptionSpec, Dataset, PredictionSet, corrupt, downsample, load_predictions, make_blobs, make_moons, save_predictions
from .decomposition import Energies, ModeSpectrum, calibrate_energies, decompose, hermite, hermite_normalized, raw_mode_ratio
from .estimator import QIPFUncertainty
from .kernel_field import KernelField, gaussian_kernel, ipf, ipf_gradient, wavefunction, wavefunction_laplacian
from .metrics import EvalReport, evaluate, point_biserial, pr_auc, roc_auc
from .networks import ToyMLP, ensemble_score, mc_dropout_score, predict_raw, train

__version__ = "0.1.0"

__all__ = [
    "BandwidthConfig",
    "calibrate_energies",
    "corrupt",
    "CorruptionSpec",
    "cross_validate_factor",
    "Dataset",
    "decompose",
    "downsample",
    "Energies",
    "ensemble_score",
    "EvalReport",
    "evaluate",
    "gaussian_kernel",
    "hermite",
    "hermite_normalized",
    "ipf",
    "ipf_gradient",
    "KernelField",
    "load_predictions",
    "make_blobs",
    "make_moons",
    "mc_dropout_score",
    "ModeSpectrum",
    "point_biserial",
    "pr_auc",
    "predict_raw",
    "PredictionSet",
    "QIPFUncertainty",
    "raw_mode_ratio",
    "roc_auc",
    "save_predictions",
    "silverman",
    "ToyMLP",
    "train",
    "wavefunction",
    "wavefunction_laplacian",
]
