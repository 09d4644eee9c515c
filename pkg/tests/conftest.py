import itertools

import numpy as np
import pytest

from plqkit.geometry import Polyhedron
from plqkit.plq import PLQFunction, Quadratic


def interval(lo=None, hi=None) -> Polyhedron:
    rows, rhs = [], []
    if lo is not None:
        rows.append([-1.0])
        rhs.append(-lo)
    if hi is not None:
        rows.append([1.0])
        rhs.append(hi)
    if not rows:
        return Polyhedron.whole_space(1)
    return Polyhedron.build(np.array(rows), np.array(rhs))


def box(lo, hi) -> Polyhedron:
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    n = lo.shape[0]
    eye = np.eye(n)
    return Polyhedron.build(np.vstack([eye, -eye]), np.concatenate([hi, -lo]))


def abs_plq() -> PLQFunction:
    neg = Polyhedron.build([[1.0]], [0.0])
    pos = Polyhedron.build([[-1.0]], [0.0])
    return PLQFunction.build([
        (neg, Quadratic.affine([-1.0])),
        (pos, Quadratic.affine([1.0])),
    ])


def random_fan_plq(rng, n, n_planes, coeff=2.0, center=None,
                   stationary_bias=False):
    """Continuous PLQ on the cells of a hyperplane fan through `center`:
    a base quadratic plus signed squared-plus terms, so continuity holds by
    construction and every cell's quadratic is explicit.

    With stationary_bias the base gradient vanishes at the center, which
    makes the center a candidate local minimizer instead of an almost-sure
    descent point."""
    center = np.zeros(n) if center is None else np.asarray(center, float)
    normals = rng.randn(n_planes, n)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = normals @ center
    weights = rng.uniform(-coeff, coeff, n_planes)
    Q0 = rng.uniform(-coeff, coeff, (n, n))
    Q0 = Q0 + Q0.T
    if stationary_bias:
        weights = np.abs(weights) * np.where(rng.rand(n_planes) < 0.3, -1.0, 1.0)
        if rng.rand() < 0.7:
            Q0 = Q0 + (coeff - np.linalg.eigvalsh(Q0).min()) * np.eye(n)
        c0 = -Q0 @ center
    else:
        c0 = rng.uniform(-coeff, coeff, n)
    a0 = rng.uniform(-coeff, coeff)
    pieces = []
    for signs in itertools.product((1.0, -1.0), repeat=n_planes):
        rows = np.array([-s * a for s, a in zip(signs, normals)])
        rhs = np.array([-s * o for s, o in zip(signs, offsets)])
        P = Polyhedron.build(rows, rhs)
        Q = Q0.copy()
        c = c0.copy()
        alpha = a0
        for s, w, a, o in zip(signs, weights, normals, offsets):
            if s > 0:  # (a.x - o)_+^2 active on this side
                Q += 2.0 * w * np.outer(a, a)
                c += -2.0 * w * o * a
                alpha += w * o * o
        pieces.append((P, Quadratic.build(Q, c, alpha)))
    return PLQFunction.build(pieces)


@pytest.fixture
def rng():
    return np.random.RandomState(20240817)
