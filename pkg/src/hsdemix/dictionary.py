"""Dictionary construction and characterization.

A dictionary is an f x d matrix of unit-norm spectral signatures, together
with its frame bounds (extreme squared singular values) and, when it has
full column rank, its pseudo-inverse.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateInputError,
    InsufficientSamplesError,
    RankError,
    ShapeError,
    ThinViolationError,
)
from .hsio import GroundTruthMask

logger = logging.getLogger(__name__)

RANK_DEFICIENCY_RTOL = 1e-10  # sigma_min < rtol * sigma_max counts as deficient


@dataclass
class Dictionary:
    """f x d matrix with unit-norm columns plus cached spectral data."""

    atoms: np.ndarray
    frame_lower: float
    frame_upper: float
    pinv: np.ndarray | None = None
    atom_indices: np.ndarray | None = None  # source voxel columns, when sampled
    learn_objective: list[float] | None = None  # per-round trace, when learned

    @property
    def f(self) -> int:
        return self.atoms.shape[0]

    @property
    def d(self) -> int:
        return self.atoms.shape[1]

    @classmethod
    def from_matrix(cls, R_raw: np.ndarray, **extra) -> "Dictionary":
        """Column-normalize, compute frame bounds, and attach the
        pseudo-inverse when R has full column rank."""
        R = np.asarray(R_raw, dtype=float)
        if R.ndim != 2 or R.size == 0:
            raise ShapeError(f"dictionary must be a non-empty 2-D matrix, got {R.shape}")
        norms = np.linalg.norm(R, axis=0)
        if np.any(norms == 0):
            raise DegenerateInputError("dictionary has an all-zero column")
        R = R / norms
        f_l, f_u = frame_bounds(R)
        sigma_min, sigma_max = np.sqrt(f_l), np.sqrt(f_u)
        pinv = None
        if R.shape[0] >= R.shape[1] and sigma_min >= RANK_DEFICIENCY_RTOL * sigma_max:
            pinv = np.linalg.solve(R.T @ R, R.T)
        return cls(atoms=R, frame_lower=f_l, frame_upper=f_u, pinv=pinv, **extra)


def frame_bounds(R: np.ndarray) -> tuple[float, float]:
    """Squared extreme singular values (F_L, F_U) of R."""
    R = np.asarray(R, dtype=float)
    if R.size == 0:
        raise ShapeError("empty matrix has no frame bounds")
    s = np.linalg.svd(R, compute_uv=False)
    return float(s[-1] ** 2), float(s[0] ** 2)


def pseudo_inverse(R: np.ndarray) -> np.ndarray:
    """Left inverse (R^T R)^-1 R^T of a full-column-rank R."""
    R = np.asarray(R, dtype=float)
    s = np.linalg.svd(R, compute_uv=False)
    if R.shape[0] < R.shape[1] or s[-1] < RANK_DEFICIENCY_RTOL * s[0]:
        raise RankError(
            f"dictionary is rank deficient (sigma_min={s[-1]:.3e}, sigma_max={s[0]:.3e})"
        )
    return np.linalg.solve(R.T @ R, R.T)


def sample_dictionary(
    Y: np.ndarray, mask: GroundTruthMask, d: int, seed: int
) -> Dictionary:
    """Pick d distinct positive-class voxels uniformly at random (seeded) and
    normalize them into atoms."""
    Y = np.asarray(Y, dtype=float)
    positives = mask.positive_indices
    if len(mask.labels) != Y.shape[1]:
        raise ShapeError(
            f"mask length {len(mask.labels)} != data columns {Y.shape[1]}"
        )
    if d > positives.size:
        raise InsufficientSamplesError(
            f"requested d={d} atoms but only {positives.size} positive voxels"
        )
    rng = np.random.default_rng(seed)
    chosen = rng.choice(positives, size=d, replace=False)
    return Dictionary.from_matrix(Y[:, chosen], atom_indices=chosen)


def learn_dictionary(
    Y_pos: np.ndarray,
    d: int,
    rho: float,
    iters: int = 50,
    seed: int = 0,
    coding_iters: int = 50,
) -> Dictionary:
    """Minimal alternating-minimization dictionary learner.

    Alternates iterative soft-thresholding on the coefficients with a
    per-atom least-squares update projected onto the unit ball, so the
    objective 0.5*||Y - RA||_F^2 + rho*||A||_1 never increases across
    rounds. Atoms that collapse to zero are re-seeded from the worst
    residual column.
    """
    Y_pos = np.asarray(Y_pos, dtype=float)
    f, n_cols = Y_pos.shape
    if d > f:
        raise ThinViolationError(f"d={d} atoms exceed f={f} bands")
    if rho <= 0:
        raise ValueError("rho must be positive")

    rng = np.random.default_rng(seed)
    init = rng.choice(n_cols, size=d, replace=n_cols < d)
    R = Y_pos[:, init].copy()
    norms = np.linalg.norm(R, axis=0)
    norms[norms == 0] = 1.0
    R /= norms
    A = np.zeros((d, n_cols))

    def objective(R, A):
        return 0.5 * np.linalg.norm(Y_pos - R @ A) ** 2 + rho * np.abs(A).sum()

    trace = []
    for _ in range(iters):
        # Sparse coding: ISTA with the exact Lipschitz step.
        L = max(np.linalg.norm(R, 2) ** 2, 1e-12)
        for _ in range(coding_iters):
            G = R.T @ (R @ A - Y_pos)
            A = A - G / L
            A = np.sign(A) * np.maximum(np.abs(A) - rho / L, 0.0)

        # Dictionary update: block coordinate least squares, unit-ball projected.
        E = Y_pos - R @ A
        for j in range(d):
            aj = A[j]
            sq = aj @ aj
            if sq < 1e-24:
                # Dead atom: re-seed from the column worst explained so far.
                worst = int(np.argmax(np.linalg.norm(E, axis=0)))
                logger.info("re-seeding collapsed atom %d from column %d", j, worst)
                col = E[:, worst]
                if np.linalg.norm(col) == 0:
                    col = rng.standard_normal(f)
                R[:, j] = col / np.linalg.norm(col)
                continue
            E += np.outer(R[:, j], aj)
            rj = E @ aj / sq
            nrm = np.linalg.norm(rj)
            if nrm > 1.0:
                rj /= nrm
            elif nrm == 0.0:
                rj = R[:, j]
            R[:, j] = rj
            E -= np.outer(rj, aj)
        trace.append(objective(R, A))

    return Dictionary.from_matrix(R, learn_objective=trace)
