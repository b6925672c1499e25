"""Seeded synthetic instances of the low-rank plus dictionary-sparse model,
plus recovery-error metrics used throughout the tests."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .dictionary import Dictionary
from .guarantees import GuaranteeReport, diagnose
from .solver import DemixResult

logger = logging.getLogger(__name__)

DICTIONARY_KINDS = ("gaussian-normalized", "orthonormal-columns")


@dataclass
class SynthSpec:
    f: int
    nm: int
    r: int
    d: int
    s: int
    dictionary_kind: str = "gaussian-normalized"
    magnitude_low: float = 0.5
    magnitude_high: float = 1.5
    seed: int = 0

    def __post_init__(self):
        if self.r > min(self.f, self.nm):
            raise ValueError("r must be <= min(f, nm)")
        if self.d > self.f:
            raise ValueError("d must be <= f for the thin model")
        if self.s > self.d * self.nm:
            raise ValueError("s exceeds the number of coefficient slots")
        if self.magnitude_low <= 0 or self.magnitude_high < self.magnitude_low:
            raise ValueError("need 0 < magnitude_low <= magnitude_high")
        if self.dictionary_kind not in DICTIONARY_KINDS:
            raise ValueError(f"dictionary_kind must be one of {DICTIONARY_KINDS}")


def generate(spec: SynthSpec):
    """Draw (Y, X0, A0, R, report) deterministically from the seed.

    X0 is an outer product of Gaussian factors (rank r almost surely), R has
    unit-norm columns, and A0 has s globally-placed entries with magnitudes
    bounded away from zero."""
    seed = spec.seed
    while True:
        rng = np.random.default_rng(seed)
        if spec.r > 0:
            P = rng.standard_normal((spec.f, spec.r))
            Q = rng.standard_normal((spec.nm, spec.r))
            X0 = P @ Q.T
        else:
            X0 = np.zeros((spec.f, spec.nm))

        if spec.dictionary_kind == "orthonormal-columns":
            G = rng.standard_normal((spec.f, spec.d))
            Qr, _ = np.linalg.qr(G)
            R = Dictionary.from_matrix(Qr[:, : spec.d])
        else:
            G = rng.standard_normal((spec.f, spec.d))
            R = Dictionary.from_matrix(G)

        A0 = np.zeros((spec.d, spec.nm))
        if spec.s > 0:
            flat = rng.choice(spec.d * spec.nm, size=spec.s, replace=False)
            mags = rng.uniform(spec.magnitude_low, spec.magnitude_high, spec.s)
            signs = rng.choice([-1.0, 1.0], size=spec.s)
            A0.ravel()[flat] = mags * signs

        if spec.r > 0 and np.linalg.matrix_rank(X0) < spec.r:
            logger.warning("rank-deficient draw at seed %d; retrying", seed)
            seed += 1
            continue
        break

    Y = X0 + R.atoms @ A0
    report = diagnose(X0, A0, R)
    return Y, X0, A0, R, report


def recovery_error(est: DemixResult, X0: np.ndarray, A0: np.ndarray):
    """(relX, relA, support_f1) of an estimate against the ground truth."""
    X0 = np.asarray(X0, dtype=float)
    A0 = np.asarray(A0, dtype=float)
    if est.X_hat.shape != X0.shape or est.A_hat.shape != A0.shape:
        from .errors import ShapeError

        raise ShapeError("estimate and truth shapes differ")
    rel_x = np.linalg.norm(est.X_hat - X0) / max(np.linalg.norm(X0), 1.0)
    rel_a = np.linalg.norm(est.A_hat - A0) / max(np.linalg.norm(A0), 1.0)

    a_max = np.max(np.abs(est.A_hat))
    detected = np.abs(est.A_hat) > 1e-6 * a_max if a_max > 0 else np.zeros_like(A0, bool)
    true_supp = A0 != 0
    tp = np.sum(detected & true_supp)
    fp = np.sum(detected & ~true_supp)
    fn = np.sum(~detected & true_supp)
    if tp + fp + fn == 0:
        f1 = 1.0  # both supports empty
    else:
        f1 = 2.0 * tp / (2.0 * tp + fp + fn)
    return float(rel_x), float(rel_a), float(f1)
