"""Exponential conjugation of the expanding map to the slit annulus.

``exp`` maps each half rectangle ``R_j`` biholomorphically onto the slit
annulus ``D = {1 < |w| < e^a} minus [0, inf)``.  The induced map
``Phi(e^z) = e^{F(z)}`` does not depend on the half used because
``F_2(z + 2*pi*i) == F_1(z)``; we always go through the strip
``0 < Im z < 2*pi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expanding import branch_forward, in_omega
from .numerics import CONSTANTS, PI, R1
from .orbit import OrbitRecord

MEMBERSHIP_RTOL = 1e-12
TWO_PI = 2.0 * PI


class OutsideDomain(ValueError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


def in_slit_annulus(w, rtol: float = MEMBERSHIP_RTOL):
    """Vectorised membership in ``D`` with a relative rounding allowance."""
    w = np.asarray(w, dtype=complex)
    r = np.abs(w)
    on_slit = (w.real >= 0) & (np.abs(w.imag) <= rtol * r)
    return (r > 1.0 - rtol) & (r < CONSTANTS.outer * (1.0 + rtol)) & ~on_slit


def log_branch(w):
    """Logarithm with imaginary part in ``(0, 2*pi)``.

    Raises
    ------
    OutsideDomain
        If any ``w`` is not in the slit annulus.
    """
    arr = np.asarray(w, dtype=complex)
    ok = in_slit_annulus(arr)
    if not np.all(ok):
        bad = np.flatnonzero(~np.atleast_1d(ok))[0]
        raise OutsideDomain(f"{np.atleast_1d(arr)[bad]!r} is outside the slit annulus", index=int(bad))
    theta = np.mod(np.angle(arr), TWO_PI)
    z = np.log(np.abs(arr)) + 1j * theta
    return complex(z) if np.ndim(z) == 0 else z


def phi(w):
    """``Phi(w) = exp(F_1(log w))`` on the slit annulus."""
    return np.exp(branch_forward(1, log_branch(w)))


def psi(ws) -> np.ndarray:
    """Coordinatewise ``Phi`` on ``D**m``; ``OutsideDomain.index`` is 1-based."""
    ws = np.asarray(ws, dtype=complex)
    ok = in_slit_annulus(ws)
    if not ok.all():
        coord = int(np.flatnonzero(~ok.reshape(-1, ws.shape[-1]).all(axis=0))[0])
        raise OutsideDomain(f"coordinate {coord + 1} is outside the slit annulus", index=coord + 1)
    return phi(ws)


def well_definedness_check(n: int, seed: int = 0) -> float:
    """Max of ``|F_2(z + 2*pi*i) - F_1(z)|`` over ``n`` random ``z`` in ``R1``."""
    if n < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    z = rng.uniform(R1.x_min, R1.x_max, n) + 1j * rng.uniform(R1.y_min, R1.y_max, n)
    return float(np.abs(branch_forward(2, z + TWO_PI * 1j) - branch_forward(1, z)).max())


def sample_omega(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` uniform samples of ``Omega**m`` (the line ``Im = 2*pi`` has measure zero)."""
    z = rng.uniform(0.0, CONSTANTS.a, (n, m)) + 1j * rng.uniform(0.0, CONSTANTS.b, (n, m))
    keep = in_omega(z, 0.0).all(axis=1)
    return z[keep]


def apply_F(p: np.ndarray) -> np.ndarray:
    """The two-to-one map ``F`` applied elementwise (no margin checks)."""
    s = np.where(p.imag < CONSTANTS.mid, 1, 2)
    return branch_forward(s, p)


def conjugacy_check(n: int, m: int = 1, seed: int = 0) -> float:
    """Max relative error of ``Psi(exp p) = exp(F(p))`` over ``n`` samples of ``Omega**m``."""
    rng = np.random.default_rng(seed)
    p = sample_omega(n, m, rng)
    lhs = psi(np.exp(p))
    rhs = np.exp(apply_F(p))
    return float((np.abs(lhs - rhs) / np.abs(rhs)).max())


@dataclass(frozen=True, eq=False)
class DOrbit:
    points: np.ndarray
    conjugacy_defects: np.ndarray

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def max_defect(self) -> float:
        return float(self.conjugacy_defects.max()) if self.conjugacy_defects.size else 0.0


def push_orbit(orbit: OrbitRecord | np.ndarray, tail=None) -> DOrbit:
    """Map an orbit of ``F`` to an orbit of ``Psi`` by ``q_n = exp(p_n)``.

    ``conjugacy_defects[n] = max_coord |Psi(q_n) - q_{n+1}| / max(1, |q_{n+1}|)``.
    When the point after the last one is unknown (``tail`` missing and not
    stored on the record) the final defect is omitted.
    """
    if isinstance(orbit, OrbitRecord):
        pts = orbit.points
        tail = orbit.tail if tail is None else tail
    else:
        pts = np.asarray(orbit, dtype=complex)
        if pts.ndim == 1:
            pts = pts[:, None]
    if pts.shape[0] == 0:
        return DOrbit(pts.copy(), np.empty(0))
    q = np.exp(pts)
    ok = in_slit_annulus(q)
    if not ok.all():
        n = int(np.flatnonzero(~ok.all(axis=1))[0])
        raise OutsideDomain(f"q_{n} is outside the slit annulus", index=n)
    nxt = q[1:]
    if tail is not None:
        nxt = np.vstack([nxt, np.exp(np.asarray(tail, dtype=complex).reshape(1, -1))])
    image = psi(q[: nxt.shape[0]])
    defects = (np.abs(image - nxt) / np.maximum(1.0, np.abs(nxt))).max(axis=1)
    return DOrbit(q, defects)
