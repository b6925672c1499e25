"""Low-rank plus dictionary-sparse demixing for hyperspectral target
detection."""

__version__ = "0.1.0"

from .dictionary import Dictionary, frame_bounds, learn_dictionary, pseudo_inverse, sample_dictionary
from .detect import (
    RocCurve,
    ScoreVector,
    best_auc_over_lambda,
    column_norm_scores,
    matched_filter,
    matched_filter_dagger,
    roc,
)
from .guarantees import GuaranteeReport, InstanceGeometry, compute_gammas, compute_mu, compute_xi, diagnose, lambda_bounds, project_phi
from .hsio import GroundTruthMask, HsCube, load_cube, load_mask, normalize_joint, refold, save_cube, unfold
from .solver import ApgConfig, DemixResult, demix, lambda_grid, rpca_dagger, soft_threshold, svt
from .synth import SynthSpec, generate, recovery_error

__all__ = [name for name in dir() if not name.startswith("_")]
