"""Independent brute-force oracles used by the unit and acceptance tests.

These deliberately avoid the library's own computational paths: scalar prox
by grid refinement, nuclear prox by a generic convex solver, the tangent
space captured-energy ratio by an explicitly assembled dense operator, and
AUC by the pairwise-ordering statistic.
"""

import numpy as np


def soft_threshold_grid(m, tau, passes=4, points=2001):
    """argmin_x 0.5*(x-m)^2 + tau*|x| by iterative grid refinement."""
    lo, hi = -abs(m) - tau - 1.0, abs(m) + tau + 1.0
    best = 0.0
    for _ in range(passes):
        xs = np.linspace(lo, hi, points)
        vals = 0.5 * (xs - m) ** 2 + tau * np.abs(xs)
        best = xs[np.argmin(vals)]
        step = (hi - lo) / (points - 1)
        lo, hi = best - 2 * step, best + 2 * step
    # Snap to exact zero when it is at least as good (the kink).
    if 0.5 * m * m <= 0.5 * (best - m) ** 2 + tau * abs(best) + 1e-15:
        return 0.0
    return float(best)


def nuclear_prox_cvxpy(M, tau):
    """argmin_Z 0.5*||Z-M||_F^2 + tau*||Z||_* via a generic conic solver."""
    import cvxpy as cp

    Z = cp.Variable(M.shape)
    problem = cp.Problem(
        cp.Minimize(0.5 * cp.sum_squares(Z - M) + tau * cp.normNuc(Z))
    )
    problem.solve(solver=cp.CLARABEL)
    return Z.value


def dense_tangent_ratio_operator(U, V, R_atoms, rows, cols, nm):
    """Dense matrix whose largest singular value is the captured-energy ratio.

    Columns are vectorized tangent-space projections of R e_i e_j^T over the
    support, right-weighted by the inverse square root of the support Gram so
    the domain is isometric to the dictionary-sparse matrices themselves.
    Everything here is assembled with explicit projector matrices."""
    f = R_atoms.shape[0]
    s = rows.size
    Pu = U @ U.T
    Pv = V @ V.T
    cols_mat = np.zeros((f * nm, s))
    for k in range(s):
        Z = np.zeros((f, nm))
        Z[:, cols[k]] = R_atoms[:, rows[k]]
        P = Pu @ Z + Z @ Pv - Pu @ Z @ Pv
        cols_mat[:, k] = P.ravel()
    atoms = R_atoms[:, rows]
    G = (atoms.T @ atoms) * (cols[:, None] == cols[None, :])
    w, Q = np.linalg.eigh(G)
    W = (Q / np.sqrt(w)) @ Q.T
    return cols_mat @ W


def auc_pairwise(scores, labels):
    """Wilcoxon-Mann-Whitney statistic: fraction of positive-negative pairs
    ordered correctly, ties counted one half."""
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    diff = pos[:, None] - neg[None, :]
    return float((np.sum(diff > 0) + 0.5 * np.sum(diff == 0)) / diff.size)
