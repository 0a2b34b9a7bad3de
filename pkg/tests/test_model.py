import json
import math

import numpy as np
import pytest

from sidehole.model import (BoreProfile, EigenSolution1D, EndCondition,
                            HoleSpec, ModelConfig, TubeSpec, ValidationError,
                            cents, to_frequency_hz, validate)


def test_bore_constant_and_cone():
    b = BoreProfile(kind="constant", value=2.0)
    assert b(0.3) == 2.0
    assert b.is_constant
    c = BoreProfile(kind="cone", g0=1.0, g1=3.0)
    assert c(0.5) == pytest.approx(2.0)
    assert not c.is_constant


def test_bore_sampled_interpolates():
    b = BoreProfile(kind="sampled", x_samples=(0.0, 0.5, 1.0),
                    g_samples=(1.0, 2.0, 1.0))
    assert b(0.25) == pytest.approx(1.5)
    assert not b.violations()


def test_bore_json_round_trip():
    for b in (BoreProfile(),
              BoreProfile(kind="cone", g0=2.0, g1=0.5),
              BoreProfile(kind="sampled", x_samples=(0.0, 1.0),
                          g_samples=(1.0, 2.0))):
        b2 = BoreProfile.from_json_dict(b.to_json_dict())
        xs = np.linspace(0, 1, 11)
        assert np.allclose(b2(xs), b(xs))


def test_bore_violations_reported():
    assert BoreProfile(kind="constant", value=-1.0).violations()
    assert BoreProfile(kind="sampled", x_samples=(0.5, 1.0),
                       g_samples=(1.0, 1.0)).violations()
    assert BoreProfile(kind="nope").violations()


def test_config_json_round_trip():
    cfg = ModelConfig(
        tube=TubeSpec(length_L=0.66, left_end=EndCondition.CLOSED,
                      right_end=EndCondition.OPEN, sound_speed_c=340.0),
        holes=(HoleSpec(position_a=0.4, delta=1.5, open_fraction=0.5),
               HoleSpec(position_a=0.7, delta=2.0)),
        alpha=2.3, epsilon=0.1)
    cfg2 = ModelConfig.from_json(cfg.to_json())
    assert cfg2 == cfg


def test_config_rejects_unknown_keys():
    with pytest.raises(ValidationError, match="unknown key"):
        ModelConfig.from_json(json.dumps({"alpha": 2.0, "bogus": 1}))
    with pytest.raises(ValidationError, match="unknown key"):
        ModelConfig.from_json(json.dumps(
            {"holes": [{"position_a": 0.5, "radius": 1.0}]}))


def test_validate_collects_all_violations():
    cfg = ModelConfig(
        tube=TubeSpec(length_L=-1.0),
        holes=(HoleSpec(position_a=1.5, delta=-1.0),),
        alpha=-2.0)
    with pytest.raises(ValidationError) as exc:
        validate(cfg)
    v = exc.value.violations
    assert len(v) >= 4
    assert any("length_L" in s for s in v)
    assert any("position_a" in s for s in v)
    assert any("delta" in s for s in v)
    assert any("alpha" in s for s in v)


def test_validate_epsilon_invariants():
    # epsilon must be smaller than the hole's distance to both ends, and the
    # physical hole side delta * eps^2 must stay below eps
    cfg = ModelConfig(holes=(HoleSpec(position_a=0.7, delta=1.0),), epsilon=0.5)
    with pytest.raises(ValidationError, match="min"):
        validate(cfg)
    cfg = ModelConfig(holes=(HoleSpec(position_a=0.5, delta=100.0),), epsilon=0.2)
    with pytest.raises(ValidationError, match="eps"):
        validate(cfg)
    validate(ModelConfig(holes=(HoleSpec(position_a=0.5, delta=1.0),), epsilon=0.2))


def test_hole_ordering_enforced():
    cfg = ModelConfig(holes=(HoleSpec(position_a=0.7), HoleSpec(position_a=0.4)))
    with pytest.raises(ValidationError, match="increasing"):
        validate(cfg)


def test_kappa_scales_with_open_fraction_and_override():
    h = HoleSpec(position_a=0.5, delta=2.0, open_fraction=0.5)
    assert h.kappa(3.0) == pytest.approx(3.0)
    h2 = HoleSpec(position_a=0.5, delta=2.0, alpha_override=1.0)
    assert h2.kappa(3.0) == pytest.approx(2.0)


def test_frequency_and_cents():
    tube = TubeSpec(length_L=1.0, sound_speed_c=343.0)
    f = to_frequency_hz(math.pi, tube)
    assert f == pytest.approx(343.0 / 2.0)
    assert cents(2 * f, f) == pytest.approx(1200.0)
    assert cents(f, 2 * f) == pytest.approx(-1200.0)
    # antisymmetry
    assert cents(f, 1.3 * f) == pytest.approx(-cents(1.3 * f, f))
    with pytest.raises(ValueError):
        to_frequency_hz(0.0, tube)


def test_eigensolution_invariants():
    mu = math.pi
    seg = ((0.0, 1.0, math.sqrt(2.0), 0.0),)
    sol = EigenSolution1D(mu=mu, lam=mu * mu, segments=seg)
    assert sol(0.5) == pytest.approx(math.sqrt(2.0))
    assert sol.derivative(0.0, "+") == pytest.approx(math.sqrt(2.0) * mu)
    with pytest.raises(ValueError):
        EigenSolution1D(mu=mu, lam=1.0, segments=seg)
    with pytest.raises(ValueError):
        sol.derivative(1.0, "+")
