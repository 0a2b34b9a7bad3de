"""Finite-volume Laplacian on tensor-product grids (possibly nonuniform).

The discrete Dirichlet form is a sum over grid edges:

    form(u, u) = sum_e c_e (u_a - u_b)^2,
    c_e = (product of the two transverse dual widths) / (edge length),

which is symmetric and nonnegative by construction. Neumann boundaries are
natural (edges simply stop); Dirichlet boundaries are imposed by eliminating
nodes. Dual widths are the usual half-sums of neighboring spacings, halved
at the ends.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def axis_dual_weights(coords: np.ndarray) -> np.ndarray:
    c = np.asarray(coords, dtype=float)
    if c.size < 2 or np.any(np.diff(c) <= 0):
        raise ValueError("axis coordinates must be strictly increasing, >= 2 nodes")
    d = np.diff(c)
    w = np.empty(c.size)
    w[0] = d[0] / 2.0
    w[-1] = d[-1] / 2.0
    w[1:-1] = (d[:-1] + d[1:]) / 2.0
    return w


def cell_volumes(xs, ys, zs) -> np.ndarray:
    """Dual-cell volumes, shape (nx, ny, nz)."""
    wx, wy, wz = (axis_dual_weights(c) for c in (xs, ys, zs))
    return wx[:, None, None] * wy[None, :, None] * wz[None, None, :]


def tensor_laplacian(xs, ys, zs) -> sp.csr_matrix:
    """Graph Laplacian of the finite-volume form over all grid nodes."""
    xs, ys, zs = (np.asarray(c, dtype=float) for c in (xs, ys, zs))
    nx, ny, nz = xs.size, ys.size, zs.size
    n = nx * ny * nz
    weights = [axis_dual_weights(c) for c in (xs, ys, zs)]
    spacings = [np.diff(c) for c in (xs, ys, zs)]
    idx = np.arange(n, dtype=np.int64).reshape(nx, ny, nz)

    total = sp.csr_matrix((n, n))
    for axis in range(3):
        sl_lo = [slice(None)] * 3
        sl_hi = [slice(None)] * 3
        sl_lo[axis] = slice(0, -1)
        sl_hi[axis] = slice(1, None)
        a = idx[tuple(sl_lo)].ravel()
        b = idx[tuple(sl_hi)].ravel()
        t_axes = [ax for ax in range(3) if ax != axis]
        shape = [1, 1, 1]
        shape[axis] = spacings[axis].size
        c = np.ones(shape)
        c = c * spacings[axis].reshape(shape) ** -1
        for t in t_axes:
            s = [1, 1, 1]
            s[t] = weights[t].size
            c = c * weights[t].reshape(s)
        c = np.broadcast_to(c, [spacings[ax].size if ax == axis else
                                (nx, ny, nz)[ax] for ax in range(3)]).ravel()
        rows = np.concatenate([a, b, a, b])
        cols = np.concatenate([a, b, b, a])
        vals = np.concatenate([c, c, -c, -c])
        total = total + sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return total


def dirichlet_energy(xs, ys, zs, u: np.ndarray) -> float:
    """Edge-sum Dirichlet energy of nodal values u (shape (nx, ny, nz)).

    Equals <u, L u> with L = tensor_laplacian(...) to round-off."""
    xs, ys, zs = (np.asarray(c, dtype=float) for c in (xs, ys, zs))
    weights = [axis_dual_weights(c) for c in (xs, ys, zs)]
    total = 0.0
    for axis, coords in enumerate((xs, ys, zs)):
        d = np.diff(coords)
        shape = [1, 1, 1]
        shape[axis] = d.size
        jump2 = np.diff(u, axis=axis) ** 2 / d.reshape(shape)
        for t in range(3):
            if t == axis:
                continue
            s = [1, 1, 1]
            s[t] = weights[t].size
            jump2 = jump2 * weights[t].reshape(s)
        total += float(jump2.sum())
    return total
