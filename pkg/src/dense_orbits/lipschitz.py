"""Sampled checks for domains below a Lipschitz graph.

Coordinates are ``(z, u + i v)`` with ``z`` in ``C**(m-1)``; the domain is
``{u < r(z, v)}``.  A graph sample stores the points ``x_i = (v_i, z_i)``
(real vectors of length ``2(m-1) + 1``, ``v`` first) and values
``r_i = r(x_i)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

EXACT_PAIR_LIMIT = 2000
NEIGHBOURS = 12
REL_SLACK = 1e-12

GraphFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


class TooFewPoints(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GraphSample:
    m: int
    x: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        r = np.asarray(self.r, dtype=float).reshape(-1)
        if x.shape != (r.size, 2 * self.m - 1):
            raise ValueError(f"expected points of shape ({r.size}, {2 * self.m - 1}), got {x.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "r", r)

    def __len__(self) -> int:
        return self.r.size

    @classmethod
    def from_function(cls, fn: GraphFn, x: np.ndarray, m: int = 1) -> "GraphSample":
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        v, z = split_coords(x)
        return cls(m, x, np.asarray(fn(z, v), dtype=float))


def split_coords(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(n, 2(m-1)+1)`` real points -> ``(v, z)`` with ``z`` of shape ``(n, m-1)`` complex."""
    v = x[:, 0]
    z = x[:, 1::2] + 1j * x[:, 2::2]
    return v, z


def _pairs(s: GraphSample) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Scanned pairs ``(i, j, |r_i - r_j|, ||x_i - x_j||)``."""
    n = len(s)
    if n <= EXACT_PAIR_LIMIT:
        i, j = np.triu_indices(n, k=1)
        dist = pdist(s.x)
    else:
        tree = cKDTree(s.x)
        _, nb = tree.query(s.x, k=min(NEIGHBOURS + 1, n))
        a = np.repeat(np.arange(n), nb.shape[1] - 1)
        b = nb[:, 1:].reshape(-1)
        ij = np.unique(np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1), axis=0)
        i, j = ij[:, 0], ij[:, 1]
        dist = np.linalg.norm(s.x[i] - s.x[j], axis=1)
    if np.any(dist == 0):
        raise ValueError("sample points must be pairwise distinct")
    return i, j, np.abs(s.r[i] - s.r[j]), dist


def lipschitz_estimate(s: GraphSample) -> float:
    """Largest difference quotient ``|r_i - r_j| / ||x_i - x_j||`` over scanned pairs.

    All pairs are scanned up to 2000 points; larger samples use the
    ``NEIGHBOURS`` nearest neighbours of each point.
    """
    if len(s) < 2:
        raise TooFewPoints("need at least two sample points")
    _, _, dr, dx = _pairs(s)
    return float((dr / dx).max())


def cone_check(s: GraphSample, c: float) -> list[tuple[int, int]]:
    """Pairs whose values violate ``|r_i - r_j| <= c * ||x_i - x_j||``.

    An empty list means no sample point lies in the double cone of slope
    ``c`` erected at another sample point.
    """
    if c < 0:
        raise ValueError("c must be nonnegative")
    if len(s) < 2:
        return []
    i, j, dr, dx = _pairs(s)
    bad = dr > c * dx * (1.0 + REL_SLACK)
    return [(int(a), int(b)) for a, b in zip(i[bad], j[bad])]


@dataclass(frozen=True)
class SpacePoint:
    z: tuple[complex, ...]
    u: float
    v: float


def h_map(t: float, alpha, beta: float, p: SpacePoint) -> SpacePoint:
    """Translate by ``-t * (alpha, 1 + i*beta)``: ``(z - t*alpha, u - t, v - t*beta)``."""
    alpha = tuple(complex(a) for a in np.atleast_1d(alpha)) if len(p.z) else ()
    if len(alpha) != len(p.z):
        raise ValueError("alpha must have one entry per z coordinate")
    return SpacePoint(
        tuple(zk - t * ak for zk, ak in zip(p.z, alpha)),
        p.u - t,
        p.v - t * beta,
    )


def inside(r: GraphFn, p: SpacePoint) -> bool:
    """Strict ``u < r(z, v)`` with relative slack ``REL_SLACK``."""
    z = np.array([p.z], dtype=complex).reshape(1, -1)
    rv = float(np.asarray(r(z, np.array([p.v])))[0])
    return p.u < rv + REL_SLACK * max(1.0, abs(rv))


@dataclass(frozen=True)
class StarVerdict:
    passed: bool
    trials: int
    failures: int
    counterexample: dict | None = None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "trials": self.trials,
            "failures": self.failures,
            "counterexample": self.counterexample,
        }


def translation_probe(r: GraphFn, p: SpacePoint, t: float, alpha, beta: float) -> dict | None:
    """Return a counterexample record if ``p`` is inside but its translate is not."""
    if not inside(r, p):
        raise ValueError("probe start point is not inside the domain")
    q = h_map(t, alpha, beta, p)
    if inside(r, q):
        return None
    return _record(p, q, t, alpha, beta, r)


def _record(p, q, t, alpha, beta, r) -> dict:
    z = np.array([q.z], dtype=complex).reshape(1, -1)
    return {
        "start": {"z": [[w.real, w.imag] for w in p.z], "u": p.u, "v": p.v},
        "image": {"z": [[w.real, w.imag] for w in q.z], "u": q.u, "v": q.v},
        "r_at_image": float(np.asarray(r(z, np.array([q.v])))[0]),
        "t": float(t),
        "alpha": [[complex(a).real, complex(a).imag] for a in np.atleast_1d(alpha)] if len(p.z) else [],
        "beta": float(beta),
    }


def star_property_check(
    r: GraphFn,
    c: float,
    trials: int,
    seed: int = 0,
    m: int = 1,
    extent: float = 1.0,
    gap: float = 1e-9,
    alpha=None,
    beta: float | None = None,
) -> StarVerdict:
    """Sample the invariance ``H_{t,alpha,beta}(Omega) ⊂ Omega``.

    Start points have ``(z, v)`` uniform in ``[-extent/2, extent/2]`` and
    ``u`` at least ``gap`` below the graph.  Directions are uniform in the
    open ball of radius ``1/c`` unless ``alpha``/``beta`` are fixed (used to
    probe inadmissible directions).  ``t`` is uniform in ``(0, c*extent/2]``
    so translates stay within ``[-extent, extent]`` for admissible
    directions.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    d = 2 * m - 1
    half = 0.5 * extent
    xz = rng.uniform(-half, half, (trials, d))
    v, z = split_coords(xz)
    rv = np.asarray(r(z, v), dtype=float)
    u = rv - gap - rng.uniform(0.0, half, trials)

    if alpha is None and beta is None:
        g = rng.standard_normal((trials, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        g *= (rng.uniform(size=trials) ** (1.0 / d) / c)[:, None]
        b = g[:, 0]
        a = g[:, 1::2] + 1j * g[:, 2::2]
        t_max = c * half
    else:
        a = np.broadcast_to(np.atleast_1d(np.asarray(alpha if alpha is not None else [], complex)), (trials, m - 1))
        b = np.full(trials, float(beta if beta is not None else 0.0))
        norm = np.sqrt(np.abs(a[0]) @ np.abs(a[0]) + b[0] ** 2)
        t_max = half / max(norm, 1.0)
    t = t_max * (1.0 - rng.uniform(size=trials))

    z2 = z - t[:, None] * a
    v2 = v - t * b
    u2 = u - t
    r2 = np.asarray(r(z2, v2), dtype=float)
    ok = u2 < r2 + REL_SLACK * np.maximum(1.0, np.abs(r2))
    failures = int((~ok).sum())
    counter = None
    if failures:
        k = int(np.flatnonzero(~ok)[0])
        p = SpacePoint(tuple(z[k]), float(u[k]), float(v[k]))
        q = SpacePoint(tuple(z2[k]), float(u2[k]), float(v2[k]))
        counter = _record(p, q, t[k], a[k], b[k], r)
    return StarVerdict(failures == 0, trials, failures, counter)


def mcshane_extension(s: GraphSample, c: float) -> GraphFn:
    """``x -> min_i (r_i + c * ||x - x_i||)``: agrees with a ``c``-Lipschitz
    sample on its points and is ``c``-Lipschitz everywhere."""
    pts = s.x
    vals = s.r

    def fn(z, v):
        z = np.asarray(z, dtype=complex).reshape(len(v), -1)
        x = np.empty((len(v), pts.shape[1]))
        x[:, 0] = v
        x[:, 1::2] = z.real
        x[:, 2::2] = z.imag
        out = np.empty(len(v))
        for k in range(0, len(v), 512):
            blk = x[k : k + 512]
            dist = np.linalg.norm(blk[:, None, :] - pts[None, :, :], axis=2)
            out[k : k + 512] = (vals[None, :] + c * dist).min(axis=1)
        return out

    return fn


def read_graph_csv(path) -> GraphSample:
    """Read ``v,z_re_1,z_im_1,...,r`` rows (header required)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if header[0] != "v" or header[-1] != "r" or (len(header) - 2) % 2:
        raise ValueError(f"{path}: bad header {header}")
    m = (len(header) - 2) // 2 + 1
    data = np.array([[float(c) for c in row] for row in body], dtype=float).reshape(-1, len(header))
    return GraphSample(m, data[:, :-1], data[:, -1])


def write_graph_csv(path, s: GraphSample) -> None:
    header = ["v"] + [f"z_{part}_{k}" for k in range(1, s.m) for part in ("re", "im")] + ["r"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for xi, ri in zip(s.x, s.r):
            w.writerow([repr(float(c)) for c in xi] + [repr(float(ri))])


NAMED_GRAPHS: dict[str, tuple[GraphFn, float]] = {
    "zero": (lambda z, v: np.zeros_like(np.asarray(v, dtype=float)), 1.0),
    "linear": (lambda z, v: np.asarray(v, dtype=float), 1.0),
    "neg-abs": (lambda z, v: -np.abs(np.asarray(v, dtype=float)), 1.0),
}
