"""Recovery-guarantee diagnostics.

Given a low-rank component (through its singular subspaces U, V), a sparse
support, and the dictionary, these routines compute the incoherence
quantities that govern recoverability, the admissible regularizer interval
[lambda_min, lambda_max], the sparsity ceiling s_max, and the pass/fail
flags of the two sufficient-condition assumptions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .dictionary import Dictionary
from .errors import (
    ConvergenceError,
    DegenerateInputError,
    ShapeError,
    TrivialInstanceError,
)

MU_POWER_MAX_ROUNDS = 10_000


@dataclass
class InstanceGeometry:
    """Singular subspaces of the low-rank part plus the sparse support."""

    U: np.ndarray  # f x r, orthonormal columns
    V: np.ndarray  # nm x r, orthonormal columns
    support_rows: np.ndarray  # atom index per support entry
    support_cols: np.ndarray  # voxel index per support entry
    R: Dictionary

    def __post_init__(self):
        self.U = np.asarray(self.U, dtype=float)
        self.V = np.asarray(self.V, dtype=float)
        self.support_rows = np.asarray(self.support_rows, dtype=int)
        self.support_cols = np.asarray(self.support_cols, dtype=int)
        r = self.U.shape[1]
        if self.V.shape[1] != r:
            raise ShapeError("U and V must have the same number of columns")
        for M, name in ((self.U, "U"), (self.V, "V")):
            if r and np.max(np.abs(M.T @ M - np.eye(r))) > 1e-10:
                raise ShapeError(f"{name} columns are not orthonormal")
        if self.support_rows.shape != self.support_cols.shape:
            raise ShapeError("support row/col index arrays differ in length")
        if self.s:
            if self.support_rows.min() < 0 or self.support_rows.max() >= self.R.d:
                raise ShapeError("support row index out of dictionary range")
            if self.support_cols.min() < 0:
                raise ShapeError("support column index negative")

    @property
    def r(self) -> int:
        return self.U.shape[1]

    @property
    def s(self) -> int:
        return self.support_rows.size


@dataclass
class GuaranteeReport:
    mu: float
    gamma_UR: float
    gamma_V: float
    xi: float
    frame_lower: float
    frame_upper: float
    s: int
    r: int
    d: int
    f: int
    nm: int
    s_max: float
    C: float
    lambda_min: float
    lambda_max: float
    a1_holds: bool
    a2_holds: bool
    s_ok: bool

    @property
    def certified(self) -> bool:
        return self.a1_holds and self.a2_holds and self.s_ok

    def to_json(self, **kwargs) -> str:
        data = asdict(self)
        data["certified"] = self.certified
        return json.dumps(data, **kwargs)


def project_phi(Z: np.ndarray, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Project onto the tangent space of the low-rank component:
    P_U Z + Z P_V - P_U Z P_V."""
    Z = np.asarray(Z, dtype=float)
    if U.shape[1] == 0:
        return np.zeros_like(Z)
    UtZ = U.T @ Z
    ZV = Z @ V
    return U @ UtZ + (ZV - U @ (UtZ @ V)) @ V.T


def _support_gram_isqrt(geom: InstanceGeometry) -> np.ndarray:
    """Inverse square root of the Gram matrix of the map h -> R*H(h).

    Support entries in distinct voxel columns are orthogonal; entries sharing
    a column interact through the atom Gram."""
    rows, cols = geom.support_rows, geom.support_cols
    atoms = geom.R.atoms[:, rows]
    G = (atoms.T @ atoms) * (cols[:, None] == cols[None, :])
    w, Q = np.linalg.eigh(G)
    if w[-1] <= 0:
        raise DegenerateInputError("support map has vanished entirely")
    if w[0] < 1e-12 * w[-1]:
        raise DegenerateInputError(
            "dictionary is not injective on the given support"
        )
    return (Q / np.sqrt(w)) @ Q.T


def _scatter(geom: InstanceGeometry, h: np.ndarray, nm: int) -> np.ndarray:
    """Apply h -> R * H(h), an f x nm matrix."""
    Z = np.zeros((geom.R.f, nm))
    contrib = geom.R.atoms[:, geom.support_rows] * h
    np.add.at(Z.T, geom.support_cols, contrib.T)
    return Z


def _gather(geom: InstanceGeometry, Z: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`_scatter`."""
    return np.einsum(
        "fk,fk->k", geom.R.atoms[:, geom.support_rows], Z[:, geom.support_cols]
    )


def mu_operator_matrix(geom: InstanceGeometry, nm: int) -> np.ndarray:
    """Dense (f*nm) x s matrix whose largest singular value is mu.

    Columns are vec(P_Phi(R e_i e_j^T)) over the support, right-multiplied by
    the inverse square root of the support Gram so that the column space is
    parametrized isometrically in ||R H||_F. Used as the brute-force oracle
    for small instances."""
    s = geom.s
    W = _support_gram_isqrt(geom)
    cols = []
    for k in range(s):
        Z = _scatter(geom, np.eye(s)[k], nm)
        cols.append(project_phi(Z, geom.U, geom.V).ravel())
    return np.column_stack(cols) @ W


def compute_mu(geom: InstanceGeometry, nm: int, tol: float = 1e-10) -> float:
    """Largest fraction of a dictionary-sparse matrix's energy captured by
    the low-rank tangent space, via power iteration on the support
    coordinates."""
    if geom.s == 0 or geom.r == 0:
        return 0.0
    W = _support_gram_isqrt(geom)

    def apply(h):
        Z = _scatter(geom, W @ h, nm)
        P = project_phi(Z, geom.U, geom.V)
        return W @ _gather(geom, P)

    # Deterministic start vector with energy in every coordinate.
    h = np.cos(np.arange(geom.s) + 1.0)
    h /= np.linalg.norm(h)
    lam_prev = 0.0
    for _ in range(MU_POWER_MAX_ROUNDS):
        g = apply(h)
        lam = float(h @ g)
        norm = np.linalg.norm(g)
        if norm == 0.0:
            return 0.0
        h = g / norm
        if abs(lam - lam_prev) <= tol * max(lam, 1e-300):
            return float(min(np.sqrt(max(lam, 0.0)), 1.0))
        lam_prev = lam
    raise ConvergenceError(
        f"mu power iteration did not converge: last estimates "
        f"{lam_prev:.12e}, {lam:.12e}"
    )


def compute_gammas(geom: InstanceGeometry) -> tuple[float, float]:
    """(gamma_UR, gamma_V): how much the dictionary resembles the column
    space, and how concentrated the row space is on single voxels."""
    R = geom.R.atoms
    norms_sq = np.einsum("fi,fi->i", R, R)
    if np.any(norms_sq == 0):
        raise DegenerateInputError("dictionary has an all-zero column")
    if geom.r == 0:
        return 0.0, 0.0
    PuR = geom.U @ (geom.U.T @ R)
    gamma_ur = float(np.max(np.einsum("fi,fi->i", PuR, PuR) / norms_sq))
    gamma_v = float(np.max(np.einsum("ij,ij->i", geom.V, geom.V)))
    return gamma_ur, gamma_v


def compute_xi(geom: InstanceGeometry) -> float:
    """Max absolute entry of R^T U V^T."""
    if geom.r == 0:
        return 0.0
    return float(np.max(np.abs((geom.R.atoms.T @ geom.U) @ geom.V.T)))


def lambda_bounds(
    mu: float,
    gamma_ur: float,
    gamma_v: float,
    xi: float,
    frame_lower: float,
    frame_upper: float,
    s: int,
    r: int,
    d: int,
    nm: int,
):
    """Admissible regularizer interval plus the assumption flags.

    Returns (C, lambda_min, lambda_max, s_max, a1, a2)."""
    if s == 0:
        raise TrivialInstanceError("empty sparse support: nothing to bound")
    sd = min(s, d)
    c = (frame_upper / 2.0) * (
        (1.0 + 2.0 * gamma_ur) * (sd + s * gamma_v) + 2.0 * s * gamma_v
    ) - (frame_lower / 2.0) * (sd + s * gamma_v)
    denom = frame_lower * (1.0 - mu) ** 2 - c
    if denom <= 0.0:
        C = math.inf if c > 0 else 0.0
    else:
        C = c / denom

    if C >= 1.0 or not math.isfinite(C):
        lambda_min = math.inf
    else:
        lambda_min = (1.0 + C) / (1.0 - C) * xi
    lambda_max = (
        math.sqrt(frame_lower) * (1.0 - mu) - math.sqrt(r * frame_upper) * mu
    ) / math.sqrt(s)

    s_max = math.inf if r == 0 else (1.0 - mu) ** 2 / 2.0 * nm / r
    s_ok = s <= s_max
    if not s_ok:
        a2 = False
    else:
        numerator = (1.0 - mu) ** 2 - 2.0 * s * gamma_v
        if s <= min(d, s_max):
            bound = numerator / (2.0 * s * (1.0 + gamma_v))
        else:  # d < s <= s_max
            bound = numerator / (2.0 * (d + s * gamma_v))
        a2 = gamma_ur <= bound
    a1 = lambda_max >= lambda_min
    return C, lambda_min, lambda_max, s_max, a1, a2


def diagnose(
    X0: np.ndarray,
    A0: np.ndarray,
    R: Dictionary,
    rank_tol: float = 1e-8,
    mu_tol: float = 1e-10,
) -> GuaranteeReport:
    """Full diagnostic report for a ground-truth instance (X0, A0, R)."""
    X0 = np.asarray(X0, dtype=float)
    A0 = np.asarray(A0, dtype=float)
    f, nm = X0.shape
    if A0.shape != (R.d, nm):
        raise ShapeError(
            f"A0 is {A0.shape}, expected ({R.d}, {nm}) to match X0 and R"
        )
    if R.f != f:
        raise ShapeError(f"dictionary has {R.f} rows, X0 has {f}")

    sv = np.linalg.svd(X0, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        r = 0
        U = np.zeros((f, 0))
        V = np.zeros((nm, 0))
    else:
        r = int(np.sum(sv > rank_tol * sv[0]))
        Uf, _, Vtf = np.linalg.svd(X0, full_matrices=False)
        U, V = Uf[:, :r], Vtf[:r].T

    rows, cols = np.nonzero(A0)
    geom = InstanceGeometry(U=U, V=V, support_rows=rows, support_cols=cols, R=R)
    s = geom.s

    mu = compute_mu(geom, nm, tol=mu_tol)
    gamma_ur, gamma_v = compute_gammas(geom)
    xi = compute_xi(geom)

    if s == 0:
        C = lambda_min = lambda_max = math.nan
        s_max = math.inf if r == 0 else (1.0 - mu) ** 2 / 2.0 * nm / r
        a1 = a2 = False
        s_ok = True
    else:
        C, lambda_min, lambda_max, s_max, a1, a2 = lambda_bounds(
            mu, gamma_ur, gamma_v, xi, R.frame_lower, R.frame_upper, s, r, R.d, nm
        )
        s_ok = s <= s_max

    return GuaranteeReport(
        mu=mu,
        gamma_UR=gamma_ur,
        gamma_V=gamma_v,
        xi=xi,
        frame_lower=R.frame_lower,
        frame_upper=R.frame_upper,
        s=s,
        r=r,
        d=R.d,
        f=f,
        nm=nm,
        s_max=s_max,
        C=C,
        lambda_min=lambda_min,
        lambda_max=lambda_max,
        a1_holds=bool(a1),
        a2_holds=bool(a2),
        s_ok=bool(s_ok),
    )
