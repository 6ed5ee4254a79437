"""Brute-force references that share no code with the package under test."""

import itertools

import numpy as np


def vertex_enumeration(c, A, row_lower, row_upper, lower, upper, tol=1e-9):
    """Minimum of ``c @ x`` over a bounded polytope by enumerating every vertex.

    Variable bounds must be finite; infinite row bounds are dropped. Returns ``(objective, x)`` or ``(inf, None)``
    when no vertex is feasible.
    """
    c = np.asarray(c, float)
    n = c.size
    A = np.asarray(A, float).reshape(-1, n)
    G = np.vstack([A, -A, np.eye(n), -np.eye(n)])
    h = np.concatenate([row_upper, -np.asarray(row_lower), upper, -np.asarray(lower)])
    finite = np.isfinite(h)
    G, h = G[finite], h[finite]
    combos = np.array(list(itertools.combinations(range(G.shape[0]), n)))
    mats = G[combos]
    rhs = h[combos]
    det = np.linalg.det(mats)
    ok = np.abs(det) > 1e-10
    xs = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    feas = np.all(xs @ G.T <= h + tol * (1 + np.abs(h)), axis=1)
    if not feas.any():
        return np.inf, None
    objs = xs[feas] @ c
    k = int(np.argmin(objs))
    return float(objs[k]), xs[feas][k]


def dense_flows(n_bus, lines, slack, injection):
    """DC line flows from the Laplacian pseudo-inverse (no slack elimination)."""
    L = np.zeros((n_bus, n_bus))
    for f, t, b in lines:
        L[f, f] += b
        L[t, t] += b
        L[f, t] -= b
        L[t, f] -= b
    theta = np.linalg.pinv(L) @ injection
    theta = theta - theta[slack]
    return np.array([b * (theta[f] - theta[t]) for f, t, b in lines])


def random_connected_lines(rng, n_bus, extra):
    """Random spanning tree plus ``extra`` chords, each with a positive susceptance."""
    order = rng.permutation(n_bus)
    lines = []
    for k in range(1, n_bus):
        f = int(order[k])
        t = int(order[rng.integers(0, k)])
        lines.append((f, t, float(rng.uniform(0.5, 5.0))))
    for _ in range(extra):
        f, t = rng.choice(n_bus, size=2, replace=False)
        lines.append((int(f), int(t), float(rng.uniform(0.5, 5.0))))
    return lines
