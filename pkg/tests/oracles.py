"""Independent oracles used to generate and check expected values.

These deliberately avoid the code paths they verify: receptive fields come
from brute-force impulse simulation, PCA from an eigendecomposition of the
covariance matrix, matching from an O(n^2) loop, and t-distribution tails
from numerical integration of the density.
"""

import math

import numpy as np
from scipy.integrate import quad


def simulate_influence(layers, n_input):
    """Boolean influence matrix of a 1-D conv/pool stack.

    Row i of the result marks which input positions can affect output cell
    i, found by sliding-window propagation with zero padding.
    """
    mat = np.eye(n_input, dtype=bool)
    for (k, s, p) in layers:
        n_prev = mat.shape[0]
        n_out = (n_prev + 2 * p - k) // s + 1
        if n_out < 1:
            raise ValueError("stack shrinks the signal to nothing")
        out = np.zeros((n_out, n_input), dtype=bool)
        base = np.arange(n_out) * s - p
        for t in range(k):
            rows = base + t
            valid = (rows >= 0) & (rows < n_prev)
            out[valid] |= mat[rows[valid]]
        mat = out
    return mat


def rf_from_simulation(layers, n_input=1024):
    """(jump, rf, start) plus per-cell supports, measured from simulation.

    Only cells whose receptive field lies fully inside the input are used,
    so border clipping cannot shrink the measured extent.
    """
    mat = simulate_influence(layers, n_input)
    supports = []
    for row in mat:
        idx = np.flatnonzero(row)
        if len(idx) == 0:
            supports.append(None)  # cell fed purely by padding
            continue
        # stride under a size-1 kernel can leave holes; the measured
        # extent is the bounding span, matching the closed-form value
        supports.append((idx[0], idx[-1]))
    widths = [s[1] - s[0] + 1 if s else 0 for s in supports]
    rf = max(widths)
    interior = [i for i, s in enumerate(supports)
                if s and widths[i] == rf and s[0] > 0 and s[1] < n_input - 1]
    if len(interior) < 2:
        raise ValueError("input too small for this stack")
    centers = {i: (supports[i][0] + supports[i][1]) / 2 + 0.5 for i in interior}
    i0, i1 = interior[0], interior[1]
    jump = (centers[i1] - centers[i0]) / (i1 - i0)
    start = centers[i0] - i0 * jump
    for i in interior:
        assert centers[i] == i * jump + start
    return jump, rf, start


def brute_force_match(query, ref, ratio):
    """Reference matcher: exhaustive distances, explicit tie-breaking."""
    out = []
    for qi in range(len(query)):
        dists = [float(np.linalg.norm(query[qi] - ref[ri]))
                 for ri in range(len(ref))]
        order = sorted(range(len(ref)), key=lambda ri: (dists[ri], ri))
        d1, d2 = dists[order[0]], dists[order[1]]
        if d2 == 0.0:
            continue
        if d1 / d2 < ratio:
            out.append((qi, order[0], d1))
    return out


def pca_by_eigendecomposition(samples, target):
    """Principal directions from the covariance eigendecomposition."""
    X = np.asarray(samples, dtype=np.float64)
    mean = X.mean(axis=0)
    cov = (X - mean).T @ (X - mean) / (len(X) - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    m = min(target, X.shape[1])
    return mean, evecs[:, :m].T, evals[:m]


def t_two_sided_p_by_quadrature(t, dof):
    """2 * upper tail of the Student-t density, integrated numerically."""
    lognorm = (math.lgamma((dof + 1) / 2) - math.lgamma(dof / 2)
               - 0.5 * math.log(dof * math.pi))

    def pdf(x):
        return math.exp(lognorm - (dof + 1) / 2 * math.log1p(x * x / dof))

    tail, _ = quad(pdf, abs(t), math.inf, limit=200)
    return 2.0 * tail


def affine_by_normal_equations(src, dst):
    """Closed-form least-squares affine via the normal equations."""
    A = np.column_stack([src, np.ones(len(src))])
    sol = np.linalg.solve(A.T @ A, A.T @ dst)
    M = np.eye(3)
    M[:2, :] = sol.T
    return M
