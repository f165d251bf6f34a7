"""Disjoint inscribed balls in a bounded open set, from a grid of cubes.

Sets live in ``R**(2m)`` (``C**m`` with interleaved real/imaginary parts).
The grid is anchored at the lower corner of the set's bounding box.  Every
cube whose closure lies inside the set contributes its inscribed ball of
radius ``h/2``, so the packed volume is exactly ``rho(m)`` times the volume
of those cubes.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class IterationCap(RuntimeError):
    pass


def rho(m: int) -> float:
    """Volume ratio of the inscribed ball to its cube in real dimension ``2m``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return math.pi**m / (4**m * math.factorial(m))


def ball_volume(d: int, r: float) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r**d


@dataclass(frozen=True)
class Box:
    """Open axis-parallel box."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def contains(self, x):
        return ((x > np.asarray(self.lo)) & (x < np.asarray(self.hi))).all(axis=1)

    def contains_cubes(self, lo, hi):
        return ((lo > np.asarray(self.lo)) & (hi < np.asarray(self.hi))).all(axis=1)


@dataclass(frozen=True)
class Ball:
    """Open Euclidean ball."""

    center: tuple[float, ...]
    radius: float

    @property
    def lo(self):
        return tuple(c - self.radius for c in self.center)

    @property
    def hi(self):
        return tuple(c + self.radius for c in self.center)

    def contains(self, x):
        return ((x - np.asarray(self.center)) ** 2).sum(axis=1) < self.radius**2

    def contains_cubes(self, lo, hi):
        c = np.asarray(self.center)
        far = np.maximum(np.abs(lo - c), np.abs(hi - c))
        return (far**2).sum(axis=1) < self.radius**2


@dataclass(frozen=True)
class OpenSet:
    """Membership oracle plus bounding box.

    ``pieces`` (a union of :class:`Box`/:class:`Ball`) switches cube
    acceptance to exact geometry; without it a sampled test is used.
    """

    membership: Callable[[np.ndarray], np.ndarray]
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    pieces: tuple = field(default=())

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def m(self) -> int:
        if self.dim % 2:
            raise ValueError("ambient dimension must be even")
        return self.dim // 2

    @property
    def exact(self) -> bool:
        return bool(self.pieces)

    def contains(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        inside_box = ((x >= np.asarray(self.lo)) & (x <= np.asarray(self.hi))).all(axis=1)
        return inside_box & np.asarray(self.membership(x), dtype=bool)

    @classmethod
    def union(cls, *pieces) -> "OpenSet":
        if not pieces:
            raise ValueError("empty union")
        d = len(pieces[0].lo)
        if any(len(p.lo) != d for p in pieces):
            raise ValueError("pieces of mixed dimension")
        lo = tuple(min(p.lo[i] for p in pieces) for i in range(d))
        hi = tuple(max(p.hi[i] for p in pieces) for i in range(d))

        def membership(x):
            out = np.zeros(x.shape[0], dtype=bool)
            for p in pieces:
                out |= p.contains(x)
            return out

        return cls(membership, lo, hi, tuple(pieces))


def _cube_grid(V: OpenSet, h: float) -> np.ndarray:
    """Lower corners of the grid cubes meeting the bounding box."""
    lo = np.asarray(V.lo, dtype=float)
    counts = [max(1, math.ceil((b - a) / h)) for a, b in zip(V.lo, V.hi)]
    idx = np.indices(counts).reshape(len(counts), -1).T
    return lo + idx * h


def _probe_offsets(d: int, k: int = 3) -> np.ndarray:
    """Unit-scale probe directions for the sampled inclusion test.

    ``2**d * k`` points along the cube diagonals at fractions ``1/k..1`` of
    the circumscribed radius, plus the ``2d`` axis extremes of that sphere.
    """
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=d))) / math.sqrt(d)
    fracs = np.arange(1, k + 1) / k
    diag = (signs[:, None, :] * fracs[None, :, None]).reshape(-1, d)
    axes = np.vstack([np.eye(d), -np.eye(d)])
    return np.vstack([diag, axes])


def interior_cubes(V: OpenSet, h: float, chunk: int = 100_000) -> np.ndarray:
    """Centres of grid cubes of side ``h`` whose closure lies in ``V``.

    Exact sets test cube containment in a single piece, which is exact for
    one box or ball and conservative for unions.  Generic oracles require the
    centre and every probe of the circumscribed ball (radius
    ``h*sqrt(2m)/2``) to be members.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    corners = _cube_grid(V, h)
    d = V.dim
    keep = np.zeros(corners.shape[0], dtype=bool)
    if V.exact:
        hi = corners + h
        for p in V.pieces:
            keep |= p.contains_cubes(corners, hi)
    else:
        radius = 0.5 * h * math.sqrt(d)
        probes = radius * _probe_offsets(d)
        for s in range(0, corners.shape[0], chunk):
            c = corners[s : s + chunk] + 0.5 * h
            ok = V.contains(c)
            for off in probes:
                cand = np.flatnonzero(ok)
                if cand.size == 0:
                    break
                ok[cand] = V.contains(c[cand] + off)
            keep[s : s + chunk] = ok
    return corners[keep] + 0.5 * h


def _touching_count(V: OpenSet, h: float, chunk: int = 20_000) -> int:
    corners = _cube_grid(V, h)
    d = V.dim
    sub = (np.array(list(itertools.product(range(4), repeat=d))) + 0.5) * (h / 4)
    count = 0
    for s in range(0, corners.shape[0], chunk):
        c = corners[s : s + chunk]
        hit = np.zeros(c.shape[0], dtype=bool)
        for off in sub:
            todo = np.flatnonzero(~hit)
            if todo.size == 0:
                break
            hit[todo] = V.contains(c[todo] + off)
        count += int(hit.sum())
    return count


@dataclass(frozen=True, eq=False)
class PackingResult:
    h: float
    m: int
    cubes: np.ndarray
    total_ball_volume: float
    V_volume_lower: float
    V_volume_upper: float
    inclusion_test: str

    @property
    def balls(self) -> list[tuple[np.ndarray, float]]:
        return [(c, 0.5 * self.h) for c in self.cubes]

    @property
    def cube_count(self) -> int:
        return int(self.cubes.shape[0])

    @property
    def bound_ok(self) -> bool:
        return self.total_ball_volume > rho(self.m) * self.V_volume_upper / 2

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "cube_count": self.cube_count,
            "ball_volume": self.total_ball_volume,
            "v_lower": self.V_volume_lower,
            "v_upper": self.V_volume_upper,
            "bound_ok": self.bound_ok,
            "inclusion_test": self.inclusion_test,
        }


def pack_balls(V: OpenSet, h: float) -> PackingResult:
    """One inscribed ball per interior cube, with volume brackets for ``V``.

    ``V_volume_upper`` counts the cubes having a member among the centres of
    their ``h/4`` sub-cubes.
    """
    cubes = interior_cubes(V, h)
    m = V.m
    cell = h ** V.dim
    n = cubes.shape[0]
    return PackingResult(
        h=h,
        m=m,
        cubes=cubes,
        total_ball_volume=n * rho(m) * cell,
        V_volume_lower=n * cell,
        V_volume_upper=_touching_count(V, h) * cell,
        inclusion_test="exact" if V.exact else "sampled",
    )


def verify_lemma(V: OpenSet, h0: float, max_halvings: int = 20) -> tuple[float, PackingResult]:
    """Halve ``h`` from ``h0`` until the packed volume beats ``rho * V_upper / 2``."""
    if not h0 > 0:
        raise ValueError("h0 must be positive")
    h = float(h0)
    for _ in range(max_halvings + 1):
        res = pack_balls(V, h)
        if res.cube_count and res.bound_ok:
            return h, res
        h /= 2
    raise IterationCap(f"packing bound not reached after {max_halvings} halvings from h0={h0}")


def unit_square() -> OpenSet:
    return OpenSet.union(Box((0.0, 0.0), (1.0, 1.0)))


def unit_disc() -> OpenSet:
    return OpenSet.union(Ball((0.0, 0.0), 1.0))


def l_shape() -> OpenSet:
    return OpenSet.union(Box((0.0, 0.0), (2.0, 1.0)), Box((0.0, 0.0), (1.0, 2.0)))


NAMED_GEOMETRIES = {"unit-square": unit_square, "unit-disc": unit_disc, "l-shape": l_shape}


def parse_geometry(spec: str) -> OpenSet:
    """Named geometry or a JSON list of ``{"box": [lo, hi]}`` /
    ``{"ball": [center, radius]}`` items."""
    if spec in NAMED_GEOMETRIES:
        return NAMED_GEOMETRIES[spec]()
    items = json.loads(spec)
    pieces = []
    for item in items:
        if "box" in item:
            lo, hi = item["box"]
            pieces.append(Box(tuple(map(float, lo)), tuple(map(float, hi))))
        elif "ball" in item:
            c, r = item["ball"]
            pieces.append(Ball(tuple(map(float, c)), float(r)))
        else:
            raise ValueError(f"unknown geometry item {item!r}")
    return OpenSet.union(*pieces)
