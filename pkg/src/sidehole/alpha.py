"""Hole coupling constant: the Dirichlet energy of the half-space potential.

alpha = int_K |grad zeta|^2 where zeta is harmonic on the half-space
K = {x2 < 0}, zero on the unit-square hole in the top plane, with zero normal
derivative on the rest of the plane, and tending to 1 far away.

The half-space is truncated to the box [-R,R] x [-R,0] x [-R,R]; the far
faces carry Dirichlet value 1 (the decay of zeta - 1 makes this a pure
truncation error, removed by the R-ladder). A uniform 7-point finite
difference / finite volume grid is used; the h-ladder removes the edge
singularity of grad zeta at the hole rim by extrapolation.

An independent oracle: reflecting 1 - zeta evenly across the top plane turns
the mixed problem into the full-space unit-potential problem for the square
plate, so alpha equals half the plate's total charge with the 1/(4 pi r)
kernel. That charge is computed by the method of subareas.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import pyamg
import scipy.sparse as sp

from .fvgrid import dirichlet_energy, tensor_laplacian
from .model import SideholeError

ASINH1 = math.asinh(1.0)          # ln(1 + sqrt(2))


class SolveError(SideholeError):
    """Iterative solve failed to reach the residual tolerance."""


@dataclass(frozen=True)
class HalfSpaceGrid:
    """Uniform tensor grid over the truncated box, in hole-side units."""

    box_radius_R: float
    spacing_h: float
    hole_half: float = 0.5

    def __post_init__(self):
        R, h = self.box_radius_R, self.spacing_h
        if not (R > 0 and h > 0):
            raise ValueError(f"R and h must be positive, got R={R}, h={h}")
        if abs(2 * R / h - round(2 * R / h)) > 1e-9:
            raise ValueError(f"h={h} must divide the box extent 2R={2 * R} evenly")

    def violations(self) -> list[str]:
        out = []
        R, h, hh = self.box_radius_R, self.spacing_h, self.hole_half
        if R < 2:
            out.append(f"box_radius_R must be >= 2, got {R}")
        if h > hh / 2:
            out.append(f"spacing_h={h} leaves fewer than 4 cells across the "
                       f"hole (need h <= {hh / 2})")
        if abs(hh / h - round(hh / h)) > 1e-9:
            out.append(f"spacing_h={h} must divide the hole half-width {hh} evenly")
        return out

    @property
    def x(self) -> np.ndarray:
        R, h = self.box_radius_R, self.spacing_h
        n = int(round(2 * R / h))
        return np.linspace(-R, R, n + 1)

    @property
    def y(self) -> np.ndarray:
        R, h = self.box_radius_R, self.spacing_h
        n = int(round(R / h))
        return np.linspace(-R, 0.0, n + 1)

    z = x

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.x.size, self.y.size, self.z.size)


@dataclass(frozen=True)
class ZetaField:
    """Solved potential on a HalfSpaceGrid, with its boundary classification."""

    grid: HalfSpaceGrid
    values: np.ndarray                 # shape grid.shape, indexed [ix, iy, iz]
    hole_mask: np.ndarray
    far_mask: np.ndarray
    residual: float


def classify(grid: HalfSpaceGrid):
    """Boolean node masks (hole Dirichlet-0, far Dirichlet-1)."""
    x, y, z = grid.x, grid.y, grid.z
    tol = 1e-9 * grid.spacing_h
    on_top = np.abs(y - 0.0) <= tol
    hh = grid.hole_half + tol
    hole = ((np.abs(x)[:, None, None] <= hh)
            & on_top[None, :, None]
            & (np.abs(z)[None, None, :] <= hh))
    R = grid.box_radius_R
    far = ((np.abs(x)[:, None, None] >= R - tol)
           | (y[None, :, None] <= -R + tol)
           | (np.abs(z)[None, None, :] >= R - tol))
    hole = hole & ~far
    return hole, far


def assemble_laplacian(grid: HalfSpaceGrid) -> sp.csr_matrix:
    """Graph Laplacian of the finite-volume Dirichlet form over all nodes,
    so that u^T L u equals the edge-sum energy of energy() exactly. Neumann
    faces are natural (edges simply stop at the boundary)."""
    return tensor_laplacian(grid.x, grid.y, grid.z)


def solve_zeta(R: float, h: float, tol: float = 1e-10,
               hole_half: float = 0.5, strict: bool = True) -> ZetaField:
    """Solve the truncated half-space problem to relative residual `tol`."""
    grid = HalfSpaceGrid(box_radius_R=R, spacing_h=h, hole_half=hole_half)
    if strict:
        v = grid.violations()
        if v:
            raise ValueError("; ".join(v))
    hole, far = classify(grid)
    L = assemble_laplacian(grid)
    n = L.shape[0]
    u = np.zeros(n)
    u[far.ravel()] = 1.0
    dirichlet = (hole | far).ravel()
    interior = ~dirichlet
    A = L[interior][:, interior].tocsr()
    b = -(L[interior][:, dirichlet] @ u[dirichlet])

    ml = pyamg.ruge_stuben_solver(A)
    x = ml.solve(b, tol=tol * 1e-2, accel="cg", maxiter=400)
    resid = np.linalg.norm(b - A @ x) / max(np.linalg.norm(b), 1e-300)
    if resid > tol:
        raise SolveError(f"zeta solve stalled at relative residual {resid:.3e} "
                         f"(target {tol:.1e}) for R={R}, h={h}")
    u[interior] = x
    return ZetaField(grid=grid, values=u.reshape(grid.shape),
                     hole_mask=hole, far_mask=far, residual=float(resid))


def energy(field: ZetaField) -> float:
    """Discrete Dirichlet energy: sum over grid edges of conductance * jump^2.

    Identical by construction to <u, L u> with L from assemble_laplacian."""
    g = field.grid
    return dirichlet_energy(g.x, g.y, g.z, field.values)


def operator_energy(field: ZetaField) -> float:
    """<u, L u> with the assembled operator; form-consistency cross-check."""
    L = assemble_laplacian(field.grid)
    u = field.values.ravel()
    return float(u @ (L @ u))


# ----------------------------------------------------------------------------
# double-ladder extrapolation

@dataclass(frozen=True)
class AlphaEstimate:
    alpha: float
    ladder_R: tuple[tuple[float, float], ...]    # (R, energy) at fixed h
    ladder_h: tuple[tuple[float, float], ...]    # (h, energy) at fixed R
    order_R: float
    order_h: float
    extrapolated_R: float
    extrapolated_h: float
    low_confidence: bool
    oracle_alpha: float | None = None

    def to_json_dict(self):
        return {
            "alpha": self.alpha,
            "ladder_R": [list(t) for t in self.ladder_R],
            "ladder_h": [list(t) for t in self.ladder_h],
            "order_R": self.order_R,
            "order_h": self.order_h,
            "extrapolated_R": self.extrapolated_R,
            "extrapolated_h": self.extrapolated_h,
            "low_confidence": self.low_confidence,
            "oracle_alpha": self.oracle_alpha,
        }


def _fit_and_extrapolate(params: np.ndarray, energies: np.ndarray,
                         decreasing_param: bool):
    """Observed-order Richardson on a 3+ entry geometric ladder.

    `params` is the small quantity tending to 0 (h, or 1/R)."""
    p = np.asarray(params, dtype=float)
    E = np.asarray(energies, dtype=float)
    order = np.argsort(-p)
    p, E = p[order], E[order]
    ratios = p[:-1] / p[1:]
    if np.any(np.abs(ratios - ratios[0]) > 1e-6 * ratios[0]):
        raise ValueError(f"ladder must be geometric, got parameters {p}")
    r = ratios[0]
    d = np.diff(E)
    if np.any(d[:-1] * d[1:] <= 0):
        raise SolveError(f"ladder energies are not monotone: {E} "
                         "(signals a broken solve)")
    q = math.log(abs(d[-2] / d[-1])) / math.log(r)
    limit = E[-1] + d[-1] / (r ** q - 1.0)
    return limit, q


def estimate_alpha(ladder_R=(4.0, 8.0, 16.0),
                   ladder_h=(0.25, 0.125, 0.0625),
                   tol: float = 1e-10,
                   with_oracle: bool = True,
                   verbose: bool = False) -> AlphaEstimate:
    """Double-extrapolated alpha.

    Observed orders come from the pure ladders (R-ladder at the coarsest h,
    h-ladder at the smallest R). The truncation and discretization errors
    carry a cross term, so the combination is nested rather than additive:
    the h-ladder is extrapolated at the two smallest radii (the second one
    needs one extra medium-size solve), and those h-limits are then
    extrapolated in R at the observed order.
    """
    ladder_R = tuple(sorted(ladder_R))
    ladder_h = tuple(sorted(ladder_h, reverse=True))
    if len(ladder_R) < 3 or len(ladder_h) < 3:
        raise ValueError("need at least 3 entries per ladder")
    h0, h1 = ladder_h[0], ladder_h[1]
    R0, R1 = ladder_R[0], ladder_R[1]

    cache: dict[tuple[float, float], float] = {}

    def solve_energy(R, h):
        key = (R, h)
        if key not in cache:
            t0 = time.perf_counter()
            cache[key] = energy(solve_zeta(R, h, tol=tol))
            if verbose:
                print(f"  R={R:5g} h={h:8g}  E={cache[key]:.8f}  "
                      f"({time.perf_counter() - t0:.1f}s)")
        return cache[key]

    eR = [solve_energy(R, h0) for R in ladder_R]
    eh = [solve_energy(R0, h) for h in ladder_h]

    lim_R, p_R = _fit_and_extrapolate(1.0 / np.asarray(ladder_R), eR, True)
    lim_h, q_h = _fit_and_extrapolate(np.asarray(ladder_h), eh, True)

    # h-limit at R1 from a two-point ladder at the order observed at R0
    e_R1_h1 = solve_energy(R1, h1)
    lim_h_R1 = e_R1_h1 + (e_R1_h1 - cache[(R1, h0)]) / ((h0 / h1) ** q_h - 1.0)
    alpha = lim_h_R1 + (lim_h_R1 - lim_h) / ((R1 / R0) ** p_R - 1.0)
    low_conf = not (0.5 < p_R < 2.5 and 0.5 < q_h < 2.5)

    oracle = capacitance_oracle(16) if with_oracle else None
    return AlphaEstimate(
        alpha=float(alpha),
        ladder_R=tuple(zip(ladder_R, eR)),
        ladder_h=tuple(zip(ladder_h, eh)),
        order_R=float(p_R), order_h=float(q_h),
        extrapolated_R=float(lim_R), extrapolated_h=float(lim_h),
        low_confidence=low_conf,
        oracle_alpha=oracle)


# ----------------------------------------------------------------------------
# method-of-subareas oracle

def plate_charges(n: int) -> np.ndarray:
    """Patch charges of the unit square plate at unit potential, n x n patches,
    kernel 1/(4 pi |x - y|); midpoint collocation, analytic self term."""
    if n < 8:
        raise ValueError(f"need n >= 8 patches per side, got {n}")
    s = 1.0 / n
    c = (np.arange(n) + 0.5) * s
    cx, cy = np.meshgrid(c, c, indexing="ij")
    pts = np.column_stack([cx.ravel(), cy.ravel()])
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    with np.errstate(divide="ignore"):
        P = s * s / (4.0 * math.pi * d)
    # average ... self potential of a uniformly charged square of side s at its
    # center: integral of 1/r over the patch = 4 s asinh(1)
    np.fill_diagonal(P, 4.0 * s * ASINH1 / (4.0 * math.pi))
    sigma = np.linalg.solve(P, np.ones(n * n))
    cond = np.linalg.cond(P)
    if not np.isfinite(cond) or cond > 1e12:
        raise SolveError(f"influence matrix is numerically singular (cond={cond:g}); "
                         "assembly bug")
    return (sigma * s * s).reshape(n, n)   # densities -> patch charges


def capacitance_oracle(n_patches: int = 16) -> float:
    """alpha = (total plate charge at unit potential) / 2, extrapolated over
    n and 2n assuming first-order patch convergence."""
    a_n = float(plate_charges(n_patches).sum()) / 2.0
    a_2n = float(plate_charges(2 * n_patches).sum()) / 2.0
    return 2.0 * a_2n - a_n
