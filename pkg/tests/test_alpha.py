import math

import numpy as np
import pytest

from sidehole.alpha import (HalfSpaceGrid, SolveError, _fit_and_extrapolate,
                            capacitance_oracle, energy, operator_energy,
                            plate_charges, solve_zeta)

# regression constant frozen from plate_charges at n in {16, 32}
FROZEN_ORACLE_ALPHA = 2.3072598029901794


@pytest.fixture(scope="module")
def field():
    return solve_zeta(4.0, 0.25)


def test_grid_validation():
    with pytest.raises(ValueError, match="divide"):
        HalfSpaceGrid(box_radius_R=4.0, spacing_h=0.3)
    assert HalfSpaceGrid(box_radius_R=1.0, spacing_h=0.5).violations()
    assert HalfSpaceGrid(box_radius_R=4.0, spacing_h=0.5).violations()
    assert not HalfSpaceGrid(box_radius_R=4.0, spacing_h=0.25).violations()


def test_maximum_principle(field):
    assert field.values.min() >= -1e-10
    assert field.values.max() <= 1.0 + 1e-10


def test_dihedral_symmetry(field):
    u = field.values
    assert np.max(np.abs(u - u[::-1, :, :])) < 1e-8      # x -> -x
    assert np.max(np.abs(u - u[:, :, ::-1])) < 1e-8      # z -> -z
    assert np.max(np.abs(u - u.transpose(2, 1, 0))) < 1e-8   # x <-> z


def test_boundary_values(field):
    assert np.max(np.abs(field.values[field.hole_mask])) == 0.0
    assert np.max(np.abs(field.values[field.far_mask] - 1.0)) == 0.0


def test_form_consistency(field):
    e = energy(field)
    assert abs(e - operator_energy(field)) < 1e-12 * e


def test_energy_scaling():
    # scaling all lengths by 2 scales the Dirichlet energy by exactly 2
    # (same grid topology, conductances scale linearly)
    e1 = energy(solve_zeta(4.0, 0.25, hole_half=0.5))
    e2 = energy(solve_zeta(8.0, 0.5, hole_half=1.0))
    assert abs(e2 - 2.0 * e1) < 1e-6 * e1


def test_energy_monotone_in_hole_size():
    small = energy(solve_zeta(4.0, 0.125, hole_half=0.25))
    big = energy(solve_zeta(4.0, 0.125, hole_half=0.5))
    assert 0.0 < small < big


def test_fit_and_extrapolate_recovers_power_law():
    h = np.array([0.2, 0.1, 0.05])
    E = 3.0 - 2.0 * h ** 1.5
    limit, q = _fit_and_extrapolate(h, E, True)
    assert abs(limit - 3.0) < 1e-10
    assert abs(q - 1.5) < 1e-10


def test_fit_and_extrapolate_rejects_bad_ladders():
    with pytest.raises(ValueError, match="geometric"):
        _fit_and_extrapolate(np.array([0.4, 0.2, 0.15]),
                             np.array([1.0, 2.0, 3.0]), True)
    with pytest.raises(SolveError, match="monotone"):
        _fit_and_extrapolate(np.array([0.4, 0.2, 0.1]),
                             np.array([1.0, 3.0, 2.0]), True)


def test_plate_charges_corner_dominates():
    q = plate_charges(16).reshape(16, 16)
    assert q.min() > 0.0
    assert q[0, 0] > 2.0 * q[8, 8]
    # 8-fold symmetry of the square plate
    assert np.allclose(q, q[::-1, :], rtol=1e-10)
    assert np.allclose(q, q.T, rtol=1e-10)


def test_capacitance_oracle_frozen_value():
    assert abs(capacitance_oracle(16) - FROZEN_ORACLE_ALPHA) < 1e-9


def test_self_term_formula():
    # int over an s x s patch of 1/|x - y0| dy with x at the center
    # equals 4 s asinh(1); check against quadrature
    s = 0.1
    n = 1000
    t = (np.arange(n) + 0.5) / n * s - s / 2
    X, Y = np.meshgrid(t, t)
    quad = np.sum(1.0 / np.hypot(X, Y)) * (s / n) ** 2
    # midpoint rule converges at first order near the 1/r singularity
    assert abs(quad - 4 * s * math.asinh(1.0)) < 1e-3 * quad
