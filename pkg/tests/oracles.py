"""Independent oracles for the test suite.

Each oracle computes its answer by a route disjoint from the implementation
it checks: the polyhedral norm via a linear program, diameters and
eccentricities by brute force over all pairs, lens membership by a direct
dense-grid construction, isometry defect by an explicit double loop.
"""

import numpy as np
from scipy.optimize import linprog


def minkowski_lp(vertices, x):
    """Minkowski functional of conv(vertices) at x, as a linear program:
    min sum(mu) s.t. V^T mu = x, mu >= 0."""
    V = np.asarray(vertices, dtype=float)
    x = np.asarray(x, dtype=float)
    n = V.shape[0]
    res = linprog(
        c=np.ones(n),
        A_eq=V.T,
        b_eq=x,
        bounds=[(0, None)] * n,
        method="highs",
    )
    assert res.success, res.message
    return float(res.fun)


def brute_diameter(points, norm_fn):
    best = 0.0
    P = np.asarray(points, dtype=float)
    for i in range(P.shape[0]):
        for j in range(i + 1, P.shape[0]):
            best = max(best, norm_fn(P[i] - P[j]))
    return best


def brute_eccentricities(points, norm_fn):
    P = np.asarray(points, dtype=float)
    out = np.zeros(P.shape[0])
    for i in range(P.shape[0]):
        out[i] = max(norm_fn(P[i] - P[j]) for j in range(P.shape[0]))
    return out


def brute_refine(points, norm_fn, tau):
    """Reference refinement: keep x with max_y ||x - y|| <= diameter/2 + tau."""
    ecc = brute_eccentricities(points, norm_fn)
    delta = ecc.max()
    return np.asarray(points)[ecc <= delta / 2.0 + tau]


def brute_defect(sources, images, norm_fn):
    S = np.asarray(sources, dtype=float)
    T = np.asarray(images, dtype=float)
    worst = 0.0
    for i in range(S.shape[0]):
        for j in range(i + 1, S.shape[0]):
            worst = max(worst, abs(norm_fn(T[i] - T[j]) - norm_fn(S[i] - S[j])))
    return worst


def dense_grid_lens(x0, x1, norm_fn, eta, pitch, pad=0.0):
    """Direct dense-grid construction of the inflated two-ball lens, anchored
    at the midpoint like the implementation but built with meshgrid."""
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    d = norm_fn(x1 - x0)
    R = d / 2.0 + eta
    mid = (x0 + x1) / 2.0
    dim = x0.size
    axes = []
    for i in range(dim):
        lo = min(x0[i], x1[i]) - R - pad
        hi = max(x0[i], x1[i]) + R + pad
        k0 = int(np.ceil((lo - mid[i]) / pitch))
        k1 = int(np.floor((hi - mid[i]) / pitch))
        axes.append(mid[i] + pitch * np.arange(k0, k1 + 1))
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    keep = np.array([norm_fn(p - x0) <= R + 1e-12 and norm_fn(p - x1) <= R + 1e-12 for p in pts])
    lens = pts[keep]
    return np.unique(np.vstack([lens, mid.reshape(1, -1)]), axis=0)
