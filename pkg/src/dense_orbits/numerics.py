"""Shared constants, rectangles and tolerance policy.

Every module pulls its geometric constants from here so that identities such
as ``F2(z + 2*pi*i) == F1(z)`` hold to rounding with bit-identical inputs.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)
PI = math.pi


@dataclass(frozen=True)
class Rect:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))


@dataclass(frozen=True)
class SystemConstants:
    a: float
    b: float
    mid: float
    diam_R: float
    outer: float


def _make_constants() -> SystemConstants:
    a = 2.0 * SQRT2 * PI
    b = 4.0 * PI
    return SystemConstants(
        a=a,
        b=b,
        mid=2.0 * PI,
        diam_R=PI * math.sqrt(24.0),
        outer=math.exp(a),
    )


CONSTANTS = _make_constants()

R = Rect(0.0, CONSTANTS.a, 0.0, CONSTANTS.b)
R1 = Rect(0.0, CONSTANTS.a, 0.0, CONSTANTS.mid)
R2 = Rect(0.0, CONSTANTS.a, CONSTANTS.mid, CONSTANTS.b)


@dataclass(frozen=True)
class TolerancePolicy:
    """Numerical tolerances shared by the orbit and conjugation pipelines.

    ``backward_depth`` must be deep enough that the backward-evaluation error
    ``diam_R * 2**(-depth/2)`` falls below ``shadowing_tol``.
    """

    bad_set_margin: float = 1e-6
    shadowing_tol: float = 1e-10
    conjugacy_rel_tol: float = 1e-9
    backward_depth: int = 120

    def __post_init__(self):
        for name in ("bad_set_margin", "shadowing_tol", "conjugacy_rel_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if int(self.backward_depth) != self.backward_depth or self.backward_depth < 1:
            raise ValueError("backward_depth must be a positive integer")
        need = 2.0 * math.log2(CONSTANTS.diam_R / self.shadowing_tol)
        if self.backward_depth < need:
            raise ValueError(
                f"backward_depth={self.backward_depth} too shallow for "
                f"shadowing_tol={self.shadowing_tol} (need >= {need:.1f})"
            )

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_POLICY = TolerancePolicy()


def in_rect(p: complex, r: Rect, margin: float = 0.0) -> bool:
    """True iff ``p`` is inside ``r`` with every side-distance ``> margin``."""
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    x, y = p.real, p.imag
    return (
        x - r.x_min > margin
        and r.x_max - x > margin
        and y - r.y_min > margin
        and r.y_max - y > margin
    )


def in_rect_array(p: np.ndarray, r: Rect, margin: float = 0.0) -> np.ndarray:
    """Vectorised :func:`in_rect` over a complex array."""
    x, y = np.real(p), np.imag(p)
    return (
        (x - r.x_min > margin)
        & (r.x_max - x > margin)
        & (y - r.y_min > margin)
        & (r.y_max - y > margin)
    )
