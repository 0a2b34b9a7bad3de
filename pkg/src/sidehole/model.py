"""Domain types, validation and unit conversions shared by all solvers.

Everything is nondimensionalized to the unit tube [0, 1]; physical length
and sound speed enter only in :func:`to_frequency_hz`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

#: Dirichlet energy of the half-space potential for the unit-square hole,
#: computed once by sidehole.alpha.estimate_alpha with the default ladders
#: (R in {4, 8, 16}, h in {1/4, 1/8, 1/16}) and frozen here as the default
#: coupling constant per unit hole size.
DEFAULT_SQUARE_HOLE_ALPHA = 2.3186


class EndCondition(str, Enum):
    """End of the tube: open to the air (pressure node) or closed."""

    OPEN = "open"
    CLOSED = "closed"


class SideholeError(Exception):
    pass


class ValidationError(SideholeError):
    """Raised by validate() with the complete list of violations."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class BoreProfile:
    """Cross-section area g(x) of the tube on [0, 1].

    kind is one of:
      * "constant" : g identically `value`
      * "sampled"  : piecewise-linear through (x_samples, g_samples)
      * "cone"     : linear area g(x) = g0 + (g1 - g0) x
    """

    kind: str = "constant"
    value: float = 1.0
    x_samples: tuple[float, ...] = ()
    g_samples: tuple[float, ...] = ()
    g0: float = 1.0
    g1: float = 1.0

    def __call__(self, x):
        if self.kind == "constant":
            return np.full_like(np.asarray(x, dtype=float), self.value) \
                if np.ndim(x) else self.value
        if self.kind == "cone":
            return self.g0 + (self.g1 - self.g0) * np.asarray(x, dtype=float)
        return np.interp(x, self.x_samples, self.g_samples)

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant" or (self.kind == "cone" and self.g0 == self.g1)

    def violations(self, prefix: str = "bore") -> list[str]:
        out = []
        if self.kind not in ("constant", "sampled", "cone"):
            out.append(f"{prefix}.kind must be constant|sampled|cone, got {self.kind!r}")
            return out
        if self.kind == "constant" and self.value <= 0:
            out.append(f"{prefix}.value must be positive, got {self.value}")
        if self.kind == "cone" and (self.g0 <= 0 or self.g1 <= 0):
            out.append(f"{prefix}.g0/g1 must be positive, got {self.g0}, {self.g1}")
        if self.kind == "sampled":
            xs, gs = np.asarray(self.x_samples), np.asarray(self.g_samples)
            if xs.size < 2 or gs.size != xs.size:
                out.append(f"{prefix}: sampled profile needs >= 2 matching samples")
            else:
                if np.any(np.diff(xs) <= 0):
                    out.append(f"{prefix}.x_samples must be strictly increasing")
                if xs[0] > 0.0 or xs[-1] < 1.0:
                    out.append(f"{prefix}.x_samples must cover [0, 1], got "
                               f"[{xs[0]}, {xs[-1]}]")
                if np.any(gs <= 0):
                    out.append(f"{prefix}.g_samples must be strictly positive")
        return out

    def to_json_dict(self):
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "cone":
            return {"kind": "cone", "g0": self.g0, "g1": self.g1}
        return {"kind": "sampled",
                "x_samples": list(self.x_samples),
                "g_samples": list(self.g_samples)}

    @staticmethod
    def from_json_dict(d) -> "BoreProfile":
        if isinstance(d, (int, float)):
            return BoreProfile(kind="constant", value=float(d))
        known = {"kind", "value", "x_samples", "g_samples", "g0", "g1"}
        _reject_unknown(d, known, "bore")
        kind = d.get("kind", "constant")
        if kind == "constant":
            return BoreProfile(kind="constant", value=float(d.get("value", 1.0)))
        if kind == "cone":
            return BoreProfile(kind="cone", g0=float(d["g0"]), g1=float(d["g1"]))
        return BoreProfile(kind="sampled",
                           x_samples=tuple(float(x) for x in d["x_samples"]),
                           g_samples=tuple(float(g) for g in d["g_samples"]))


@dataclass(frozen=True)
class TubeSpec:
    """Geometry and physics of the 1-D tube model."""

    length_L: float = 1.0
    left_end: EndCondition = EndCondition.OPEN
    right_end: EndCondition = EndCondition.OPEN
    bore: BoreProfile = field(default_factory=BoreProfile)
    sound_speed_c: float = 343.0

    def violations(self) -> list[str]:
        out = []
        if not self.length_L > 0:
            out.append(f"length_L must be positive, got {self.length_L}")
        if not self.sound_speed_c > 0:
            out.append(f"sound_speed_c must be positive, got {self.sound_speed_c}")
        out += self.bore.violations()
        return out


@dataclass(frozen=True)
class HoleSpec:
    """One side hole: position, size parameter and open fraction.

    The physical hole side is delta * epsilon**2 in tube units; delta is the
    size parameter that enters the 1-D coupling kappa = alpha * delta.
    """

    position_a: float
    delta: float = 1.0
    open_fraction: float = 1.0
    alpha_override: float | None = None

    def violations(self, idx: int | None = None) -> list[str]:
        tag = f"holes[{idx}]." if idx is not None else ""
        out = []
        if not (0.0 < self.position_a < 1.0):
            out.append(f"{tag}position_a must lie in (0,1), got {self.position_a}")
        if self.delta < 0:
            out.append(f"{tag}delta must be nonnegative, got {self.delta}")
        if not (0.0 <= self.open_fraction <= 1.0):
            out.append(f"{tag}open_fraction must lie in [0,1], got {self.open_fraction}")
        if self.alpha_override is not None and not self.alpha_override > 0:
            out.append(f"{tag}alpha_override must be positive, got {self.alpha_override}")
        return out

    def kappa(self, alpha: float) -> float:
        """Effective coupling alpha * delta * open_fraction (linear half-holing)."""
        a = self.alpha_override if self.alpha_override is not None else alpha
        return a * self.delta * self.open_fraction


@dataclass(frozen=True)
class ModelConfig:
    """Full problem description: tube, holes, coupling constant, optional epsilon."""

    tube: TubeSpec = field(default_factory=TubeSpec)
    holes: tuple[HoleSpec, ...] = ()
    alpha: float = DEFAULT_SQUARE_HOLE_ALPHA
    epsilon: float | None = None

    def violations(self) -> list[str]:
        out = self.tube.violations()
        for i, h in enumerate(self.holes):
            out += h.violations(i)
        pos = [h.position_a for h in self.holes]
        if any(b <= a for a, b in zip(pos, pos[1:])):
            out.append(f"hole positions must be distinct and strictly increasing, got {pos}")
        if not self.alpha > 0:
            out.append(f"alpha must be positive, got {self.alpha}")
        if self.epsilon is not None:
            if not self.epsilon > 0:
                out.append(f"epsilon must be positive, got {self.epsilon}")
            else:
                for i, h in enumerate(self.holes):
                    if not (0.0 < h.position_a and
                            self.epsilon < min(h.position_a, 1.0 - h.position_a)):
                        out.append(
                            f"epsilon={self.epsilon} must be < min(a, 1-a) "
                            f"for holes[{i}] at a={h.position_a}")
                    if not h.delta * self.epsilon**2 < self.epsilon:
                        out.append(
                            f"holes[{i}]: hole side delta*eps^2="
                            f"{h.delta * self.epsilon**2} must be < epsilon={self.epsilon}")
        return out

    def to_json_dict(self):
        d = {
            "tube": {
                "length_L": self.tube.length_L,
                "left_end": self.tube.left_end.value,
                "right_end": self.tube.right_end.value,
                "bore": self.tube.bore.to_json_dict(),
                "sound_speed_c": self.tube.sound_speed_c,
            },
            "holes": [
                {k: v for k, v in (
                    ("position_a", h.position_a),
                    ("delta", h.delta),
                    ("open_fraction", h.open_fraction),
                    ("alpha_override", h.alpha_override),
                ) if v is not None}
                for h in self.holes
            ],
            "alpha": self.alpha,
        }
        if self.epsilon is not None:
            d["epsilon"] = self.epsilon
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_json_dict(), **kw)

    @staticmethod
    def from_json_dict(d) -> "ModelConfig":
        _reject_unknown(d, {"tube", "holes", "alpha", "epsilon"}, "config")
        td = d.get("tube", {})
        _reject_unknown(td, {"length_L", "left_end", "right_end", "bore",
                             "sound_speed_c"}, "tube")
        tube = TubeSpec(
            length_L=float(td.get("length_L", 1.0)),
            left_end=EndCondition(td.get("left_end", "open")),
            right_end=EndCondition(td.get("right_end", "open")),
            bore=BoreProfile.from_json_dict(td.get("bore", {"kind": "constant"})),
            sound_speed_c=float(td.get("sound_speed_c", 343.0)),
        )
        holes = []
        for hd in d.get("holes", []):
            _reject_unknown(hd, {"position_a", "delta", "open_fraction",
                                 "alpha_override"}, "hole")
            holes.append(HoleSpec(
                position_a=float(hd["position_a"]),
                delta=float(hd.get("delta", 1.0)),
                open_fraction=float(hd.get("open_fraction", 1.0)),
                alpha_override=(None if hd.get("alpha_override") is None
                                else float(hd["alpha_override"])),
            ))
        return ModelConfig(
            tube=tube,
            holes=tuple(holes),
            alpha=float(d.get("alpha", DEFAULT_SQUARE_HOLE_ALPHA)),
            epsilon=(None if d.get("epsilon") is None else float(d["epsilon"])),
        )

    @staticmethod
    def from_json(s: str) -> "ModelConfig":
        return ModelConfig.from_json_dict(json.loads(s))


def _reject_unknown(d, known: set, where: str):
    if not isinstance(d, dict):
        raise ValidationError([f"{where} must be a JSON object, got {type(d).__name__}"])
    unknown = set(d) - known
    if unknown:
        raise ValidationError(
            [f"{where}: unknown key {k!r} (allowed: {sorted(known)})"
             for k in sorted(unknown)])


@dataclass(frozen=True)
class EigenSolution1D:
    """One eigenpair of the 1-D limit operator, as a piecewise solution.

    Each segment is (x_lo, x_hi, c_sin, c_cos) describing
    u(x) = c_sin * sin(mu x) + c_cos * cos(mu x) on [x_lo, x_hi].
    The eigenfunction is normalized to unit L2(0,1) norm.
    """

    mu: float
    lam: float
    segments: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self):
        if not math.isclose(self.lam, self.mu**2, rel_tol=1e-14):
            raise ValueError("lam must equal mu**2")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        u = np.zeros_like(x)
        for lo, hi, cs, cc in self.segments:
            m = (x >= lo) & (x <= hi)
            u = np.where(m, cs * np.sin(self.mu * x) + cc * np.cos(self.mu * x), u)
        return u if u.ndim else float(u)

    def derivative(self, x: float, side: str = "+") -> float:
        """One-sided derivative u'(x) taken from the segment on that side."""
        for lo, hi, cs, cc in self.segments:
            inside = lo <= x <= hi
            if inside and ((side == "+" and x < hi) or (side == "-" and x > lo)):
                return self.mu * (cs * math.cos(self.mu * x) - cc * math.sin(self.mu * x))
        raise ValueError(f"x={x} not interior to any segment on side {side!r}")


def validate(config: ModelConfig) -> ModelConfig:
    """Return config unchanged if all invariants hold, else raise ValidationError
    carrying the complete list of violations."""
    v = config.violations()
    if v:
        raise ValidationError(v)
    return config


def to_frequency_hz(mu: float, tube: TubeSpec) -> float:
    """Physical frequency in Hz: c * mu / (2 pi L)."""
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    return tube.sound_speed_c * mu / (2.0 * math.pi * tube.length_L)


def cents(f: float, f_ref: float) -> float:
    """Musical interval between two frequencies, in cents."""
    if not (f > 0 and f_ref > 0):
        raise ValueError(f"frequencies must be positive, got {f}, {f_ref}")
    return 1200.0 * math.log2(f / f_ref)
