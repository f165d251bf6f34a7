"""Finite-resolution density certificates by grid coverage.

Points in ``C**m`` are viewed as vectors in ``R**(2m)`` ordered
``(re_1, im_1, ..., re_m, im_m)``.  A domain is anything with a
``bounds`` pair and a vectorised ``contains(x, margin)`` predicate on
``(n, 2m)`` arrays.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .expanding import in_omega
from .numerics import CONSTANTS, R


class EmptyDomain(ValueError):
    pass


class Domain(Protocol):
    bounds: tuple[np.ndarray, np.ndarray]

    def contains(self, x: np.ndarray, margin: float) -> np.ndarray: ...


def to_real(points) -> np.ndarray:
    """``(n, m)`` complex -> ``(n, 2m)`` real with interleaved re/im columns."""
    z = np.asarray(points, dtype=complex)
    if z.ndim == 1:
        z = z[:, None]
    out = np.empty((z.shape[0], 2 * z.shape[1]))
    out[:, 0::2] = z.real
    out[:, 1::2] = z.imag
    return out


def _to_complex(x: np.ndarray) -> np.ndarray:
    return x[:, 0::2] + 1j * x[:, 1::2]


@dataclass(frozen=True)
class OmegaProduct:
    """``(R1 ∪ R2)**m``; the margin is the distance to the excluded lines."""

    m: int = 1

    @property
    def bounds(self):
        lo = np.tile([R.x_min, R.y_min], self.m)
        hi = np.tile([R.x_max, R.y_max], self.m)
        return lo, hi

    def contains(self, x, margin):
        return in_omega(_to_complex(np.atleast_2d(x)), margin).all(axis=1)


@dataclass(frozen=True)
class SlitAnnulusProduct:
    """``D**m`` with ``D = {1 < |w| < e^a} minus [0, inf)``, Euclidean margin."""

    m: int = 1

    @property
    def bounds(self):
        o = CONSTANTS.outer
        return np.full(2 * self.m, -o), np.full(2 * self.m, o)

    def contains(self, x, margin):
        w = _to_complex(np.atleast_2d(x))
        r = np.abs(w)
        slit_dist = np.where(w.real >= 0, np.abs(w.imag), r)
        ok = (r > 1.0 + margin) & (r < CONSTANTS.outer - margin) & (slit_dist > margin)
        return ok.all(axis=1)


@dataclass(frozen=True)
class CoverageReport:
    epsilon: float
    cells_total: int
    cells_hit: int
    coverage_fraction: float
    first_hit_time: dict
    max_first_hit: int | None

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "cells_total": self.cells_total,
            "cells_hit": self.cells_hit,
            "coverage_fraction": self.coverage_fraction,
            "max_first_hit": self.max_first_hit,
        }


def _grid_shape(lo, hi, eps):
    return tuple(max(1, math.ceil((h - l) / eps)) for l, h in zip(lo, hi))


def cell_centers(domain: Domain, eps: float):
    """Qualifying cells: flat indices and centres of cells whose centre lies in
    the domain with margin ``eps/2``."""
    lo, hi = domain.bounds
    shape = _grid_shape(lo, hi, eps)
    idx = np.indices(shape).reshape(len(shape), -1).T
    centers = lo + (idx + 0.5) * eps
    keep = domain.contains(centers, 0.5 * eps)
    flat = np.ravel_multi_index(idx[keep].T, shape) if keep.any() else np.empty(0, np.int64)
    return shape, flat, centers[keep]


def coverage(points, domain: Domain, eps: float, chunk: int = 200_000) -> CoverageReport:
    """Grid coverage of ``points`` at resolution ``eps``.

    A qualifying cell is hit when some point is within sup-distance
    ``eps/2`` of its centre; a point on a shared face hits both cells.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    lo, hi = domain.bounds
    shape, qual, _ = cell_centers(domain, eps)
    if qual.size == 0:
        raise EmptyDomain(f"no cell qualifies at eps={eps}")

    x = to_real(points) if len(points) else np.empty((0, len(lo)))
    ncells = int(np.prod(shape))
    big = np.iinfo(np.int64).max
    first = np.full(ncells, big, dtype=np.int64)
    dims = len(shape)
    half = 0.5 * eps
    offsets = np.array(list(itertools.product((0, 1), repeat=dims)))
    for start in range(0, x.shape[0], chunk):
        block = x[start : start + chunk]
        times = np.arange(start, start + block.shape[0])
        base = np.ceil((block - lo) / eps - 1.0).astype(np.int64)
        for off in offsets:
            idx = base + off
            inside = ((idx >= 0) & (idx < shape)).all(axis=1)
            centers = lo + (idx + 0.5) * eps
            close = (np.abs(block - centers) <= half).all(axis=1)
            ok = inside & close
            if not ok.any():
                continue
            flat = np.ravel_multi_index(idx[ok].T, shape)
            np.minimum.at(first, flat, times[ok])

    fq = first[qual]
    hit = fq != big
    first_hit = {int(c): (int(t) if h else None) for c, t, h in zip(qual, fq, hit)}
    cells_hit = int(hit.sum())
    return CoverageReport(
        epsilon=float(eps),
        cells_total=int(qual.size),
        cells_hit=cells_hit,
        coverage_fraction=cells_hit / qual.size,
        first_hit_time=first_hit,
        max_first_hit=int(fq[hit].max()) if cells_hit else None,
    )


def density_profile(points, domain: Domain, eps_list: Sequence[float]) -> list[CoverageReport]:
    eps_list = list(eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be decreasing")
    return [coverage(points, domain, e) for e in eps_list]
