"""The two affine expanding branches on the split rectangle and their products.

Branch ``s`` (1 or 2) acts as ``F_s(z) = sqrt(2)*i*z + s*a`` with
``a = 2*sqrt(2)*pi``; it maps the half rectangle ``R_s`` onto the full
rectangle ``R``.  Points are plain Python/numpy complex numbers.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .numerics import CONSTANTS, R, R1, R2, SQRT2, in_rect, in_rect_array

SYMBOLS = (1, 2)
MAX_ADDRESS_DEPTH = 60

_ROT = SQRT2 * 1j


class BadSetProximity(ValueError):
    """A point lies within the margin of the lines excluded from the domain."""

    def __init__(self, message: str, index: int | None = None, coordinate: int | None = None):
        super().__init__(message)
        self.index = index
        self.coordinate = coordinate


def _check_symbol(s: int) -> None:
    if s not in SYMBOLS:
        raise ValueError(f"symbol must be 1 or 2, got {s!r}")


def branch_forward(s, z):
    """Evaluate ``sqrt(2)*i*z + s*a``; ``s`` and ``z`` may be numpy arrays."""
    if np.isscalar(s):
        _check_symbol(s)
    return _ROT * z + s * CONSTANTS.a


def branch_inverse(s, w):
    """Inverse branch ``(w - s*a) / (sqrt(2)*i)``, contracting by ``1/sqrt(2)``."""
    if np.isscalar(s):
        _check_symbol(s)
    return (w - s * CONSTANTS.a) / _ROT


def apply_map(z: complex, margin: float = 1e-6) -> tuple[int, complex]:
    """Apply the two-to-one map ``F`` on ``R1 ∪ R2``.

    Raises
    ------
    BadSetProximity
        If ``z`` is outside the open rectangle or within ``margin`` of one of
        the lines ``Re = 0, a`` or ``Im = 0, 2pi, 4pi``.
    """
    z = complex(z)
    if in_rect(z, R1, margin):
        return 1, branch_forward(1, z)
    if in_rect(z, R2, margin):
        return 2, branch_forward(2, z)
    raise BadSetProximity(f"{z!r} is within {margin} of the excluded set or outside R")


def address(c: complex, k: int, margin: float = 1e-6) -> list[int]:
    """Forward itinerary ``[s_0, ..., s_{k-1}]`` of ``c`` under ``F``.

    Forward iteration loses a factor ``sqrt(2)`` of accuracy per step, so
    depths beyond ``MAX_ADDRESS_DEPTH`` are refused.  On failure the raised
    :class:`BadSetProximity` carries the failing step in ``.index``.
    """
    if k < 0:
        raise ValueError("depth must be nonnegative")
    if k > MAX_ADDRESS_DEPTH:
        raise ValueError(f"address depth {k} exceeds the trusted limit {MAX_ADDRESS_DEPTH}")
    word = []
    z = complex(c)
    for j in range(k):
        try:
            s, z = apply_map(z, margin)
        except BadSetProximity as exc:
            raise BadSetProximity(f"iterate {j} of {c!r}: {exc}", index=j) from None
        word.append(s)
    return word


def cylinder_diameter(k: int) -> float:
    """Upper bound ``diam_R * 2**(-k/2)`` on the diameter of a depth-``k`` cylinder."""
    if k < 0:
        raise ValueError("depth must be nonnegative")
    return CONSTANTS.diam_R * 2.0 ** (-0.5 * k)


def product_apply(zs: Sequence[complex], margin: float = 1e-6) -> tuple[tuple[int, ...], np.ndarray]:
    """Coordinatewise :func:`apply_map` on a point of the product domain.

    The ``coordinate`` attribute of a raised :class:`BadSetProximity` is
    1-based.
    """
    symbols = []
    images = []
    for i, z in enumerate(zs):
        try:
            s, w = apply_map(z, margin)
        except BadSetProximity as exc:
            raise BadSetProximity(f"coordinate {i + 1}: {exc}", coordinate=i + 1) from None
        symbols.append(s)
        images.append(w)
    return tuple(symbols), np.array(images, dtype=complex)


def product_address(cs: Sequence[complex], k: int, margin: float = 1e-6) -> list[tuple[int, ...]]:
    """Itinerary of a product point as a list of ``m``-tuples of symbols."""
    words = []
    for i, c in enumerate(cs):
        try:
            words.append(address(c, k, margin))
        except BadSetProximity as exc:
            raise BadSetProximity(
                f"coordinate {i + 1}: {exc}", index=exc.index, coordinate=i + 1
            ) from None
    return [tuple(col) for col in zip(*words)] if words else []


def in_omega(z, margin: float = 0.0):
    """Membership in ``R1 ∪ R2`` with a margin, vectorised over complex arrays."""
    z = np.asarray(z)
    return in_rect_array(z, R1, margin) | in_rect_array(z, R2, margin)


def fixed_point(s: int) -> complex:
    """Closed-form fixed point of branch ``s``: ``s*a / (1 - sqrt(2)*i)``."""
    _check_symbol(s)
    return s * CONSTANTS.a / (1 - _ROT)


__all__ = [
    "BadSetProximity",
    "MAX_ADDRESS_DEPTH",
    "R",
    "R1",
    "R2",
    "SYMBOLS",
    "address",
    "apply_map",
    "branch_forward",
    "branch_inverse",
    "cylinder_diameter",
    "fixed_point",
    "in_omega",
    "product_address",
    "product_apply",
]
