import math

import numpy as np
import pytest

from sidehole.model import HoleSpec
from sidehole.tube3d import (BudgetError, Tube3DConfig, assemble, build_grid,
                             dirichlet_mask, limit_spectrum, smallest_eigs,
                             solve_tube)

PI = math.pi

HOLE_CFG = Tube3DConfig(epsilon=0.3, hole=HoleSpec(position_a=0.7, delta=2.0))


def test_config_validation():
    with pytest.raises(ValueError, match="epsilon"):
        Tube3DConfig(epsilon=1.5)
    with pytest.raises(ValueError, match="smaller than the tube"):
        Tube3DConfig(epsilon=0.1, hole=HoleSpec(position_a=0.5, delta=20.0))
    with pytest.raises(ValueError, match="mouth"):
        Tube3DConfig(epsilon=0.4, hole=HoleSpec(position_a=0.45, delta=1.0))
    with pytest.raises(ValueError, match="grading"):
        Tube3DConfig(epsilon=0.3, grading_ratio=2.0)


def test_grid_has_patch_node_lines():
    grid = build_grid(HOLE_CFG)
    a, w = 0.7, HOLE_CFG.hole_width
    for target in (0.0, HOLE_CFG.epsilon, a - w / 2, a + w / 2, 1.0):
        assert np.min(np.abs(grid.xs - target)) < 1e-12
    for target in (-w / 2, w / 2):
        assert np.min(np.abs(grid.zs - target)) < 1e-12
    assert grid.max_adjacent_ratio() <= HOLE_CFG.grading_ratio + 1e-9


def test_budget_rejection():
    cfg = Tube3DConfig(epsilon=0.3, hole=HoleSpec(position_a=0.7, delta=2.0),
                       node_budget=1000)
    with pytest.raises(BudgetError, match="node_budget >= "):
        build_grid(cfg)


def test_dirichlet_mask_counts():
    grid = build_grid(HOLE_CFG)
    with_hole = dirichlet_mask(HOLE_CFG, grid, include_hole=True)
    without = dirichlet_mask(HOLE_CFG, grid, include_hole=False)
    assert with_hole.sum() > without.sum()
    assert (with_hole & ~without).sum() >= HOLE_CFG.hole_cells ** 2


def test_assembled_operator_symmetric_nonnegative():
    grid = build_grid(HOLE_CFG)
    op = assemble(HOLE_CFG, grid)
    A = op.a_std
    assert (A - A.T).nnz == 0
    rng = np.random.default_rng(1)
    for _ in range(10):
        v = rng.standard_normal(A.shape[0])
        assert v @ (A @ v) >= -1e-10 * (v @ v)


def test_closed_pipe_eigenvalue():
    # no mouth, Dirichlet right end: lowest mode is the quarter-wave (pi/2)^2,
    # exact for every cross-section width
    cfg = Tube3DConfig(epsilon=0.2, mouth=False, right_end_dirichlet=True)
    r = solve_tube(cfg, m=1)
    assert abs(r.eigenvalues[0] - (PI / 2) ** 2) / (PI / 2) ** 2 < 1e-3


def test_pure_neumann_kernel():
    cfg = Tube3DConfig(epsilon=0.3, mouth=False, right_end_dirichlet=False)
    r = solve_tube(cfg, m=2)
    assert abs(r.eigenvalues[0]) < 1e-8
    assert r.eigenvalues[1] > 1.0


def test_determinism():
    cfg = Tube3DConfig(epsilon=0.3, mouth=False, right_end_dirichlet=True)
    r1 = solve_tube(cfg, m=2, seed=7)
    r2 = solve_tube(cfg, m=2, seed=7)
    assert r1.eigenvalues == r2.eigenvalues


def test_domain_monotonicity_small():
    grid = build_grid(HOLE_CFG)
    op_hole = assemble(HOLE_CFG, grid)
    op_plain = assemble(HOLE_CFG, grid,
                        mask=dirichlet_mask(HOLE_CFG, grid, include_hole=False))
    lam_hole = smallest_eigs(op_hole, 2).eigenvalues
    lam_plain = smallest_eigs(op_plain, 2).eigenvalues
    for lh, lp in zip(lam_hole, lam_plain):
        assert lh >= lp - 1e-8


def test_limit_spectrum_routes():
    lam = limit_spectrum(HOLE_CFG, alpha=2.3186, m=2).lambdas
    assert 13.0 < lam[0] < 15.0
    closed = Tube3DConfig(epsilon=0.2, mouth=False)
    lam_c = limit_spectrum(closed, alpha=2.3186, m=1).lambdas
    assert abs(lam_c[0] - (PI / 2) ** 2) < 1e-9
    neutral = Tube3DConfig(epsilon=0.2)
    lam_n = limit_spectrum(neutral, alpha=2.3186, m=1).lambdas
    assert abs(lam_n[0] - PI ** 2) < 1e-9


def test_eigensolver_residuals_reported():
    cfg = Tube3DConfig(epsilon=0.3, mouth=False, right_end_dirichlet=True)
    r = solve_tube(cfg, m=2, tol=1e-9)
    assert all(res < 1e-9 for res in r.residuals)
