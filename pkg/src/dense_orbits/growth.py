"""Worst-case model of the exhaustion volume recurrence.

Each step recovers a fixed fraction ``kappa = rho(m) / (3 * 32**(2m))`` of
the volume still missing, ``v_{j+1} = v_j + kappa * (|U| - v_j)``.  Any
limit ``A < |U|`` would satisfy ``A >= A + kappa*(|U| - A)``, which is
impossible, so ``v_j -> |U|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .packing import rho


def kappa(m: int) -> float:
    """Per-step recovered fraction ``rho(m) / (3 * 32**(2m))``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return rho(m) / (3.0 * 32.0 ** (2 * m))


@dataclass(frozen=True)
class GrowthParams:
    m: int
    U_volume: float = 1.0
    v0: float = 0.0

    def __post_init__(self):
        if not self.U_volume > 0:
            raise ValueError("U_volume must be positive")
        if not 0 <= self.v0 <= self.U_volume:
            raise ValueError("v0 must lie in [0, U_volume]")

    @property
    def kappa(self) -> float:
        return kappa(self.m)


def iterate(p: GrowthParams, steps: int) -> np.ndarray:
    """``[v_0, ..., v_steps]`` from the recurrence (equality case)."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    k = p.kappa
    U = p.U_volume
    out = np.empty(steps + 1)
    v = p.v0
    out[0] = v
    for j in range(1, steps + 1):
        v = v + k * (U - v)
        out[j] = v
    return out


def iterate_gap(p: GrowthParams, steps: int) -> np.ndarray:
    """Missing volumes ``g_j = |U| - v_j`` from ``g_{j+1} = (1 - kappa) * g_j``.

    Same recurrence as :func:`iterate`, but ``v_j`` rounds to ``|U|`` once
    ``g_j`` drops below half an ulp of ``|U|``, while ``g_j`` stays
    representable (and strictly decreasing) for far longer.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    return np.cumprod(np.r_[p.U_volume - p.v0, np.full(steps, 1.0 - p.kappa)])


def closed_form(p: GrowthParams, j) -> float:
    """``|U| - (|U| - v_0) * (1 - kappa)**j``, via ``log1p`` for accuracy."""
    j = np.asarray(j)
    if np.any(j < 0):
        raise ValueError("j must be >= 0")
    decay = np.exp(j * math.log1p(-p.kappa))
    out = p.U_volume - (p.U_volume - p.v0) * decay
    return float(out) if out.ndim == 0 else out


def steps_to_fraction(p: GrowthParams, delta: float, max_steps: int = 10**8) -> int:
    """Least ``j`` with ``(|U| - v_j) / |U| <= delta``, found by iterating.

    The count is cross-checked against the closed-form estimate
    ``ceil(ln(delta / g0) / ln(1 - kappa))`` with ``g0 = (|U| - v_0) / |U|``;
    a disagreement of more than one step raises ``RuntimeError``.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    k = p.kappa
    U = p.U_volume
    v = p.v0
    j = 0
    while (U - v) / U > delta:
        v = v + k * (U - v)
        j += 1
        if j > max_steps:
            raise RuntimeError("step cap exceeded")
    gap0 = (U - p.v0) / U
    estimate = 0 if gap0 <= delta else math.ceil(math.log(delta / gap0) / math.log1p(-k))
    if abs(estimate - j) > 1:
        raise RuntimeError(f"iteration ({j}) and closed form ({estimate}) disagree")
    return j
