import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dense_orbits.expanding import (
    BadSetProximity,
    MAX_ADDRESS_DEPTH,
    address,
    apply_map,
    branch_forward,
    branch_inverse,
    cylinder_diameter,
    product_apply,
)

SQ2, PI = math.sqrt(2), math.pi
A = 2 * SQ2 * PI
# Fixed point of F1 from the real 2x2 system x = -sqrt2*y + A, y = sqrt2*x.
FIX1 = complex(2.9619219587722442, 4.1887902047863910)


def test_branch_forward_examples():
    assert branch_forward(1, 0) == pytest.approx(8.885766, abs=1e-6)
    assert branch_forward(1, A + 2j * PI) == pytest.approx(4j * PI, abs=1e-12)
    assert branch_forward(2, 2j * PI) == pytest.approx(A, abs=1e-12)


def test_branch_inverse_examples():
    assert abs(branch_inverse(1, A)) < 1e-15
    assert branch_inverse(1, 4j * PI) == pytest.approx(A + 2j * PI, abs=1e-12)
    assert abs(branch_inverse(2, branch_forward(2, 3 + 7j)) - (3 + 7j)) < 1e-13


def test_bad_symbol():
    with pytest.raises(ValueError):
        branch_forward(3, 0j)


def test_corner_mapping():
    corners = lambda x0, x1, y0, y1: {complex(x, y) for x in (x0, x1) for y in (y0, y1)}
    full = corners(0, A, 0, 4 * PI)
    for s, (y0, y1) in ((1, (0, 2 * PI)), (2, (2 * PI, 4 * PI))):
        images = [branch_forward(s, c) for c in corners(0, A, y0, y1)]
        matched = {min(full, key=lambda w: abs(w - im)) for im in images}
        assert matched == full
        assert max(min(abs(w - im) for w in full) for im in images) < 1e-12


def test_round_trip_and_similarity(rng):
    n = 100_000
    z = rng.uniform(0, A, n) + 1j * rng.uniform(0, 4 * PI, n)
    w = rng.uniform(0, A, n) + 1j * rng.uniform(0, 4 * PI, n)
    for s in (1, 2):
        assert np.abs(branch_inverse(s, branch_forward(s, z)) - z).max() < 1e-12
        ratio = np.abs(branch_forward(s, z) - branch_forward(s, w)) / np.abs(z - w)
        assert np.abs(ratio / SQ2 - 1).max() < 1e-12
        ratio = np.abs(branch_inverse(s, z) - branch_inverse(s, w)) / np.abs(z - w)
        assert np.abs(ratio * SQ2 - 1).max() < 1e-12


def test_apply_map_examples():
    s, w = apply_map(1 + 1j, 1e-6)
    assert s == 1
    assert w == pytest.approx(7.4715523139436374 + 1.4142135623730950j, abs=1e-12)
    s, w = apply_map(FIX1, 1e-6)
    assert s == 1 and abs(w - FIX1) < 1e-12
    with pytest.raises(BadSetProximity):
        apply_map(1 + 2j * PI, 1e-6)
    with pytest.raises(BadSetProximity):
        apply_map(20 + 1j, 0.0)


def _address_oracle(c, k):
    # plain real arithmetic, independent of apply_map
    x, y = c.real, c.imag
    word = []
    for _ in range(k):
        s = 1 if y < 2 * PI else 2
        word.append(s)
        x, y = s * A - SQ2 * y, SQ2 * x
    return word


def test_address_examples():
    assert address(1 + 1j, 3) == [1, 1, 2] == _address_oracle(1 + 1j, 3)
    assert address(FIX1, 5) == [1, 1, 1, 1, 1]
    with pytest.raises(BadSetProximity) as info:
        address(1 + (2 * PI - 1e-9) * 1j, 1)
    assert info.value.index == 0


def test_address_depth_limit():
    with pytest.raises(ValueError):
        address(1 + 1j, MAX_ADDRESS_DEPTH + 1)


def test_address_matches_oracle(rng):
    for _ in range(200):
        c = complex(rng.uniform(0.5, A - 0.5), rng.uniform(0.5, 4 * PI - 0.5))
        try:
            word = address(c, 20)
        except BadSetProximity:
            continue
        assert word == _address_oracle(c, 20)


@given(
    x=st.floats(0.01, A - 0.01), y=st.floats(0.01, 4 * PI - 0.01), k=st.integers(0, 30)
)
def test_address_prefix_property(x, y, k):
    try:
        longer = address(complex(x, y), k + 1)
        shorter = address(complex(x, y), k)
    except BadSetProximity:
        return
    assert longer[:k] == shorter


@pytest.mark.parametrize(
    "k, expected",
    [(0, 15.390597961942369), (2, 7.6952989809711846), (14, 0.12023904657767476), (15, 0.085021845198478962)],
)
def test_cylinder_diameter(k, expected):
    assert cylinder_diameter(k) == pytest.approx(expected, rel=1e-14)


def test_cylinder_nested_and_threshold():
    d = [cylinder_diameter(k) for k in range(80)]
    assert all(b < a for a, b in zip(d, d[1:]))
    assert cylinder_diameter(15) < 0.1 <= cylinder_diameter(14)


def test_cylinder_contains_depth_k_images(rng):
    # image of R under k random inverse branches has diameter diam_R * 2**(-k/2)
    corners = np.array([0, A, 4j * PI, A + 4j * PI])
    for k in (1, 5, 12):
        z = corners.copy()
        for s in rng.integers(1, 3, k):
            z = branch_inverse(int(s), z)
        diam = max(abs(p - q) for p in z for q in z)
        assert diam == pytest.approx(cylinder_diameter(k), rel=1e-12)


def test_product_apply():
    s1, w1 = apply_map(1 + 1j)
    syms, imgs = product_apply([1 + 1j])
    assert syms == (1,) and imgs[0] == w1
    syms, imgs = product_apply([1 + 1j, 1 + 1j])
    assert syms == (1, 1) and np.all(imgs == w1)
    with pytest.raises(BadSetProximity) as info:
        product_apply([1 + 1j, 1 + 2j * PI])
    assert info.value.coordinate == 2
