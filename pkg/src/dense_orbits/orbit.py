"""Dense orbits of the expanding map by cylinder steering.

A refining family of targets is turned into an itinerary by concatenating
truncated forward addresses of the target centres.  Orbit points are then
evaluated *backwards*: the point at time ``n`` is the image of the centre of
``R`` under the inverse branches ``s_{n+depth-1}, ..., s_n``.  Because each
inverse branch is a similarity with ratio ``1/sqrt(2)`` the evaluation error
is uniform in ``n``, unlike forward iteration of a single seed.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .expanding import (
    BadSetProximity,
    branch_forward,
    branch_inverse,
    cylinder_diameter,
    in_omega,
    product_address,
)
from .numerics import CONSTANTS, DEFAULT_POLICY, R, R1, R2, TolerancePolicy

SEED_POINT = R.center
MAX_PERTURBATIONS = 20
MAX_REORDERS = 20


class TargetUnaddressable(RuntimeError):
    def __init__(self, cell, epsilon):
        super().__init__(f"no addressable centre for cell {cell} at resolution {epsilon}")
        self.cell = cell
        self.epsilon = epsilon


class OrbitGrazesBadSet(RuntimeError):
    """No target ordering kept every orbit point away from the excluded lines."""


class TargetMissed(AssertionError):
    def __init__(self, index, distance, epsilon):
        super().__init__(f"target {index}: hit distance {distance!r} >= {epsilon!r}")
        self.index = index
        self.distance = distance
        self.epsilon = epsilon


@dataclass(frozen=True)
class Target:
    center: tuple[complex, ...]
    radius: float
    level: int
    cell: tuple = ()
    retries: int = 0

    @property
    def m(self) -> int:
        return len(self.center)


@dataclass(frozen=True)
class Checkpoint:
    index: int
    time: int
    depth: int


@dataclass(frozen=True, eq=False)
class Itinerary:
    """Symbol rows (one ``m``-tuple per time step) plus target checkpoints."""

    symbols: np.ndarray
    checkpoints: tuple[Checkpoint, ...] = ()

    def __post_init__(self):
        sym = np.array(self.symbols, dtype=np.int8, copy=True)
        if sym.ndim == 1:
            sym = sym[:, None]
        if sym.ndim != 2 or sym.shape[0] == 0:
            raise ValueError("itinerary needs a nonempty (length, m) symbol array")
        if not np.isin(sym, (1, 2)).all():
            raise ValueError("symbols must be 1 or 2")
        sym.setflags(write=False)
        object.__setattr__(self, "symbols", sym)

    def __len__(self) -> int:
        return self.symbols.shape[0]

    @property
    def m(self) -> int:
        return self.symbols.shape[1]

    @classmethod
    def periodic(cls, pattern: Sequence, length: int) -> "Itinerary":
        """Repeat ``pattern`` (symbols or ``m``-tuples) to ``length`` steps."""
        rows = [pattern[i % len(pattern)] for i in range(length)]
        return cls(np.array(rows))


@dataclass(frozen=True, eq=False)
class OrbitRecord:
    points: np.ndarray
    eval_error_bound: float
    shadowing_defects: np.ndarray
    depth: int
    tail: np.ndarray | None = None

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1]

    @property
    def max_defect(self) -> float:
        return float(self.shadowing_defects.max()) if len(self) else 0.0


def depth_for(epsilon: float) -> int:
    """Smallest ``k >= 1`` with ``cylinder_diameter(k) < epsilon``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    k = max(1, math.ceil(2.0 * math.log2(CONSTANTS.diam_R / epsilon)) - 1)
    while cylinder_diameter(k) >= epsilon:
        k += 1
    while k > 1 and cylinder_diameter(k - 1) < epsilon:
        k -= 1
    return k


def _grid_centers(epsilon: float) -> list[tuple[tuple[int, int, int], complex]]:
    out = []
    for half, rect in enumerate((R1, R2), start=1):
        nx = int((rect.x_max - rect.x_min) // epsilon)
        ny = int((rect.y_max - rect.y_min) // epsilon)
        for i in range(nx):
            for j in range(ny):
                c = complex(rect.x_min + (i + 0.5) * epsilon, rect.y_min + (j + 0.5) * epsilon)
                out.append(((half, i, j), c))
    return out


def _perturb(rng: np.random.Generator, center: tuple[complex, ...], radius: float):
    r = radius * np.sqrt(rng.uniform(size=len(center)))
    theta = rng.uniform(0.0, 2.0 * math.pi, size=len(center))
    return tuple(c + complex(rr * math.cos(t), rr * math.sin(t)) for c, rr, t in zip(center, r, theta))


def build_target_list(
    m: int,
    resolutions: Iterable[float],
    policy: TolerancePolicy = DEFAULT_POLICY,
    seed: int = 0,
    accept: Callable[[tuple[complex, ...]], bool] | None = None,
) -> list[Target]:
    """Enumerate grid targets covering ``Omega**m``, coarse to fine.

    For each resolution the cells of side ``epsilon`` lying inside ``R1`` or
    ``R2`` (grids anchored at each half rectangle's lower-left corner) give
    one target per cell of the ``m``-fold product.  A centre whose address at
    the required depth grazes the excluded set is moved by at most
    ``epsilon/10``, with up to 20 draws from ``default_rng(seed)``.

    Within a level the targets are put in a seeded random order.  Runs of
    edge-adjacent cells in grid order concatenate into itineraries of
    boundary points of ``R``, which would put orbit points on the excluded
    lines.

    ``accept`` optionally filters targets, e.g. to steer the orbit into a
    prescribed dense open subset.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    resolutions = [float(e) for e in resolutions]
    if not resolutions:
        raise ValueError("at least one resolution is required")
    if any(b >= a for a, b in zip(resolutions, resolutions[1:])):
        raise ValueError("resolutions must be strictly decreasing")
    for eps in resolutions:
        if eps <= 2.0 * policy.bad_set_margin:
            raise ValueError(f"resolution {eps} must exceed twice the bad-set margin")

    rng = np.random.default_rng(seed)
    targets = []
    for level, eps in enumerate(resolutions):
        k = depth_for(eps)
        base = _grid_centers(eps)
        for combo in itertools.product(base, repeat=m):
            cell = tuple(c[0] for c in combo)
            center = tuple(c[1] for c in combo)
            if accept is not None and not accept(center):
                continue
            retries = 0
            candidate = center
            while True:
                try:
                    product_address(candidate, k, policy.bad_set_margin)
                    break
                except BadSetProximity:
                    if retries == MAX_PERTURBATIONS:
                        raise TargetUnaddressable(cell, eps) from None
                    retries += 1
                    candidate = _perturb(rng, center, eps / 10.0)
            targets.append(Target(candidate, eps, level, cell, retries))
    return shuffle_within_levels(targets, rng)


def shuffle_within_levels(targets: Sequence[Target], rng: np.random.Generator) -> list[Target]:
    """Permute targets inside each resolution level, keeping levels in order."""
    out = []
    levels = sorted({t.level for t in targets})
    for level in levels:
        group = [t for t in targets if t.level == level]
        out.extend(group[i] for i in rng.permutation(len(group)))
    return out


def assemble_itinerary(
    targets: Sequence[Target],
    policy: TolerancePolicy = DEFAULT_POLICY,
    depth_shift: int = 0,
) -> Itinerary:
    """Concatenate the depth-``k_i`` addresses of the target centres.

    ``depth_shift`` offsets every ``k_i``; it exists for negative controls
    (``-1`` deliberately undershoots the depth that guarantees a hit).
    """
    if not targets:
        raise ValueError("no targets")
    rows = []
    checkpoints = []
    t = 0
    for i, target in enumerate(targets):
        k = max(1, depth_for(target.radius) + depth_shift)
        try:
            word = product_address(target.center, k, policy.bad_set_margin)
        except BadSetProximity:
            raise TargetUnaddressable(target.cell, target.radius) from None
        checkpoints.append(Checkpoint(i, t, k))
        rows.extend(word)
        t += k
    return Itinerary(np.array(rows, dtype=np.int8), tuple(checkpoints))


def orbit_points(it: Itinerary, times, depth: int) -> np.ndarray:
    """Backward evaluation at several times; returns shape ``(len(times), m)``.

    The itinerary is extended periodically past its end, so any
    ``0 <= n < len(it)`` can be evaluated at full depth.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    times = np.asarray(times, dtype=np.int64)
    if times.size and (times.min() < 0 or times.max() >= len(it)):
        raise IndexError("time outside the itinerary")
    L = len(it)
    z = np.full((times.size, it.m), SEED_POINT, dtype=complex)
    for d in range(depth - 1, -1, -1):
        s = it.symbols[(times + d) % L]
        z = branch_inverse(s, z)
    return z


def orbit_point(it: Itinerary, n: int, depth: int) -> np.ndarray:
    """Point of the orbit at time ``n`` evaluated through ``depth`` inverse branches."""
    return orbit_points(it, [n], depth)[0]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DOL_THREADS", "1")))
    except ValueError:
        return 1


def build_orbit(
    it: Itinerary,
    N: int | None = None,
    policy: TolerancePolicy = DEFAULT_POLICY,
    chunk: int = 65536,
) -> OrbitRecord:
    """Evaluate the first ``N`` orbit points and their shadowing defects.

    ``shadowing_defects[n]`` is ``max_coord |F_{s_n}(p_n) - p_{n+1}|``; the
    point ``p_N`` needed for the last defect comes from the periodic
    extension of the itinerary.  Chunks are evaluated on up to
    ``DOL_THREADS`` threads; the result does not depend on the schedule.
    """
    L = len(it)
    if N is None:
        N = L
    if not 0 <= N <= L:
        raise ValueError(f"N={N} must lie in [0, {L}]")
    depth = policy.backward_depth
    bound = cylinder_diameter(depth)
    if not bound < policy.shadowing_tol / 10:
        raise ValueError("backward depth too shallow for the shadowing tolerance")
    if N == 0:
        return OrbitRecord(np.empty((0, it.m), complex), bound, np.empty(0), depth)

    times = np.arange(N + 1) % L
    pieces = [times[i : i + chunk] for i in range(0, times.size, chunk)]
    workers = min(_threads(), len(pieces))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            evaluated = list(pool.map(lambda t: orbit_points(it, t, depth), pieces))
    else:
        evaluated = [orbit_points(it, t, depth) for t in pieces]
    allpts = np.concatenate(evaluated, axis=0)
    pts = allpts[:N]
    images = branch_forward(it.symbols[:N], pts)
    defects = np.abs(images - allpts[1:]).max(axis=1)
    pts.setflags(write=False)
    defects.setflags(write=False)
    return OrbitRecord(pts, bound, defects, depth, allpts[N].copy())


def verify_targets(
    orbit: OrbitRecord, it: Itinerary, targets: Sequence[Target]
) -> list[tuple[int, float]]:
    """Check every checkpoint hit; distances are the max over coordinates.

    Raises
    ------
    TargetMissed
        At the first checkpoint whose point is not within ``epsilon_i`` of its
        target centre.
    """
    out = []
    for cp in it.checkpoints:
        if cp.time >= len(orbit):
            raise ValueError(f"orbit too short for checkpoint at time {cp.time}")
        target = targets[cp.index]
        dist = float(np.abs(orbit.points[cp.time] - np.asarray(target.center)).max())
        if not dist < target.radius:
            raise TargetMissed(cp.index, dist, target.radius)
        out.append((cp.index, dist))
    return out


def bad_set_violations(orbit: OrbitRecord, margin: float) -> np.ndarray:
    """Times at which some coordinate is within ``margin`` of the excluded lines."""
    if len(orbit) == 0:
        return np.empty(0, dtype=np.int64)
    ok = in_omega(orbit.points, margin).all(axis=1)
    return np.flatnonzero(~ok)


def dense_orbit(
    m: int,
    resolutions: Iterable[float],
    policy: TolerancePolicy = DEFAULT_POLICY,
    seed: int = 0,
):
    """Targets, itinerary, orbit and hit distances in one call.

    If an orbit point falls within ``bad_set_margin`` of the excluded lines
    the targets are reshuffled within their levels (same generator, so runs
    stay reproducible) up to ``MAX_REORDERS`` times.
    """
    rng = np.random.default_rng([seed, 1])
    targets = build_target_list(m, resolutions, policy, seed)
    for _ in range(MAX_REORDERS + 1):
        it = assemble_itinerary(targets, policy)
        orbit = build_orbit(it, len(it), policy)
        if bad_set_violations(orbit, policy.bad_set_margin).size == 0:
            break
        targets = shuffle_within_levels(targets, rng)
    else:
        raise OrbitGrazesBadSet(f"orbit grazes the excluded set after {MAX_REORDERS} reorders")
    hits = verify_targets(orbit, it, targets)
    return targets, it, orbit, hits
