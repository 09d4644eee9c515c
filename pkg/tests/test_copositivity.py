import itertools

import numpy as np
import pytest

from plqkit.copositivity import (
    COPOSITIVE,
    NOT_COPOSITIVE,
    STRICTLY_COPOSITIVE,
    absvalue_classify,
    absvalue_copositivity,
    classified_cone,
    copositive_on_cone,
    copositive_one_neg_eig,
    min_quadratic_over_polytope,
    orthant_cone,
    strictly_copositive_on_cone,
)
from plqkit.errors import InvalidCoefficients, TooManyConstraints, UnboundedSet, WrongInertia
from plqkit.geometry import ConeHRep, Polyhedron

from conftest import box


def _grid_min_form(Q, lo, hi, mask=None, steps=41):
    """Dense-grid oracle for min v^T Q v over a box with optional coordinate
    sign masks ('0' fixed zero, '+'/'-' sign constrained, 'f' free)."""
    n = Q.shape[0]
    axes = []
    for i in range(n):
        kind = "f" if mask is None else mask[i]
        if kind == "0":
            axes.append(np.array([0.0]))
        elif kind == "+":
            axes.append(np.linspace(0, hi, steps))
        elif kind == "-":
            axes.append(np.linspace(lo, 0, steps))
        else:
            axes.append(np.linspace(lo, hi, steps))
    best = np.inf
    for pt in itertools.product(*axes):
        v = np.array(pt)
        best = min(best, float(v @ Q @ v))
    return best


# ---------------------------------------------------------------------------
# quadratic form over polytope


def test_min_form_psd_over_box():
    val, x = min_quadratic_over_polytope(np.eye(2), box([-1, -1], [1, 1]))
    assert abs(val) <= 1e-12


def test_min_form_boundary_attainment():
    val, x = min_quadratic_over_polytope(np.diag([-1.0, 0.0]), box([-1, -1], [1, 1]))
    assert abs(val + 1.0) <= 1e-9
    assert abs(abs(x[0]) - 1.0) <= 1e-9


def test_min_form_cross_term_grid_oracle():
    Q = np.array([[0.0, -1.0], [-1.0, 0.0]])
    val, x = min_quadratic_over_polytope(Q, box([-1, -1], [1, 1]))
    assert abs(val + 2.0) <= 1e-9
    assert abs(val - _grid_min_form(Q, -1, 1)) <= 1e-9


def test_min_form_random_vs_grid(rng):
    for _ in range(40):
        n = rng.randint(1, 4)
        Q = rng.uniform(-2, 2, (n, n))
        Q = Q + Q.T
        val, x = min_quadratic_over_polytope(Q, box(-np.ones(n), np.ones(n)))
        grid = _grid_min_form(Q, -1, 1, steps=33)
        assert val <= grid + 1e-9
        assert val >= grid - 0.4  # grid is coarse; exact min can only be lower
        # the argmin certifies the value
        assert abs(float(x @ Q @ x) - val) <= 1e-9


def test_min_form_unbounded_rejected():
    with pytest.raises(UnboundedSet):
        min_quadratic_over_polytope(np.eye(1), Polyhedron.build([[1.0]], [0.0]))


def test_min_form_guard():
    n = 3
    A = np.vstack([np.eye(n), -np.eye(n), np.ones((16, n))])
    b = np.concatenate([np.ones(2 * n), np.full(16, 5.0)])
    with pytest.raises(TooManyConstraints):
        min_quadratic_over_polytope(np.eye(n), Polyhedron.build(A, b))


# ---------------------------------------------------------------------------
# oracle copositivity


def test_copositive_psd_any_cone(rng):
    for _ in range(10):
        G = rng.randn(3, 3)
        Q = G @ G.T
        C = ConeHRep.build(rng.randn(rng.randint(1, 4), 3))
        assert copositive_on_cone(Q, C).status == COPOSITIVE


def test_copositive_orthant_witness():
    v = copositive_on_cone(np.array([[1.0, -2.0], [-2.0, 1.0]]), orthant_cone(2))
    assert v.status == NOT_COPOSITIVE
    assert np.allclose(v.witness, [1.0, 1.0], atol=1e-8)
    assert abs(v.min_value + 2.0) <= 1e-8
    assert v.witness @ np.array([[1.0, -2.0], [-2.0, 1.0]]) @ v.witness < 0


def test_copositive_offdiagonal_on_orthant():
    assert copositive_on_cone(np.array([[0.0, 1.0], [1.0, 0.0]]),
                              orthant_cone(2)).status == COPOSITIVE


def test_strictly_copositive_identity():
    assert strictly_copositive_on_cone(np.eye(2), orthant_cone(2)).status \
        == STRICTLY_COPOSITIVE


def test_strict_fails_on_axis_zero():
    v = strictly_copositive_on_cone(np.array([[0.0, 1.0], [1.0, 0.0]]),
                                    orthant_cone(2))
    assert v.status == COPOSITIVE  # copositive but not strictly


def test_strict_vacuous_on_zero_cone():
    zero = ConeHRep.build(np.eye(2), ["=", "="])
    v = strictly_copositive_on_cone(-np.eye(2), zero)
    assert v.status == STRICTLY_COPOSITIVE


def test_verdict_scaling_invariance(rng):
    for _ in range(20):
        Q = rng.uniform(-2, 2, (3, 3))
        Q = Q + Q.T
        C = ConeHRep.build(rng.uniform(-1, 1, (2, 3)))
        s1 = copositive_on_cone(Q, C).status
        s2 = copositive_on_cone(7.5 * Q, C).status
        assert s1 == s2


def test_witness_soundness(rng):
    for _ in range(30):
        Q = rng.uniform(-2, 2, (3, 3))
        Q = Q + Q.T
        C = ConeHRep.build(rng.uniform(-1, 1, (2, 3)))
        v = copositive_on_cone(Q, C)
        if v.status == NOT_COPOSITIVE:
            assert v.witness @ Q @ v.witness < 0
            assert C.contains_direction(v.witness, tol=1e-7)


# ---------------------------------------------------------------------------
# one negative eigenvalue


def test_one_neg_eig_narrow_cone_copositive():
    C = ConeHRep.build([[-1.0, 2.0], [0.0, -1.0]])  # v1 >= 2 v2 >= 0
    v = copositive_one_neg_eig(np.diag([1.0, -4.0]), C)
    assert v.status == COPOSITIVE


def test_one_neg_eig_orthant_witness():
    v = copositive_one_neg_eig(np.diag([1.0, -4.0]), orthant_cone(2))
    assert v.status == NOT_COPOSITIVE
    w = v.witness / np.max(np.abs(v.witness))
    assert np.allclose(w, [0.0, 1.0], atol=1e-7)


def test_one_neg_eig_subspace_copositive():
    C = ConeHRep.build([[0.0, 1.0]], ["="])
    assert copositive_one_neg_eig(np.diag([1.0, -1.0]), C).status == COPOSITIVE


def test_one_neg_eig_wrong_inertia():
    with pytest.raises(WrongInertia):
        copositive_one_neg_eig(np.eye(2), orthant_cone(2))
    with pytest.raises(WrongInertia):
        copositive_one_neg_eig(-np.eye(2), orthant_cone(2))


def test_one_neg_eig_agrees_with_oracle(rng):
    done = 0
    while done < 40:
        n = rng.randint(2, 5)
        d = np.sort(rng.uniform(0.05, 2.0, n))[::-1]
        d[-1] = -rng.uniform(0.05, 2.0)
        G = np.linalg.qr(rng.randn(n, n))[0]
        Q = G @ np.diag(d) @ G.T
        Q = 0.5 * (Q + Q.T)
        C = ConeHRep.build(rng.uniform(-1, 1, (rng.randint(1, 4), n)))
        fast = copositive_one_neg_eig(Q, C)
        slow = copositive_on_cone(Q, C)
        assert fast.status == slow.status, (Q, C.A)
        done += 1


# ---------------------------------------------------------------------------
# absolute-value constraint


def test_classify_lemma_cases():
    cls = absvalue_classify([0.0, 1.0, -1.0, 0.0], [1.0, 1.0, 1.0, 0.0])
    assert cls.zero_idx == (0,)
    assert cls.minus_idx == (1,)
    assert cls.plus_idx == (2,)
    assert cls.free_idx == (3,)


def test_classify_all_free():
    cls = absvalue_classify([0.0, 0.0], [0.0, 0.0])
    assert cls.free_idx == (0, 1)


def test_classify_invalid():
    with pytest.raises(InvalidCoefficients):
        absvalue_classify([2.0], [1.0])
    with pytest.raises(InvalidCoefficients):
        absvalue_classify([0.0], [-1.0])


def test_classify_partitions(rng):
    for _ in range(50):
        n = rng.randint(1, 6)
        alpha = np.abs(rng.randn(n)) * (rng.rand(n) < 0.7)
        frac = rng.choice([-1.0, -0.5, 0.0, 0.5, 1.0], n)
        b = frac * alpha
        cls = absvalue_classify(b, alpha)
        all_idx = sorted(cls.zero_idx + cls.plus_idx + cls.minus_idx + cls.free_idx)
        assert all_idx == list(range(n))


def test_absvalue_all_zero_vacuous():
    v = absvalue_copositivity(-np.eye(2), [0.5, -0.5], [1.0, 1.0])
    assert v.status == COPOSITIVE
    assert v.details.get("vacuous") or v.details["classification"].zero_idx == (0, 1)


def test_absvalue_free_negative_definite():
    v = absvalue_copositivity([[-1.0]], [0.0], [0.0])
    assert v.status == NOT_COPOSITIVE
    assert abs(abs(v.witness[0]) - 1.0) <= 1e-9


def test_absvalue_hand_schur():
    # I+ = {0}, I_f = {1}: Schur complement 1 - 2*1*2 = -3
    Q = np.array([[1.0, 2.0], [2.0, 1.0]])
    v = absvalue_copositivity(Q, [-1.0, 0.0], [1.0, 0.0])
    assert v.status == NOT_COPOSITIVE
    S = v.details["schur_complement"]
    assert np.allclose(S, [[-3.0]])
    assert v.witness @ Q @ v.witness < 0
    assert v.witness[0] >= -1e-12  # sign constraint of I+


def test_absvalue_schur_symmetric(rng):
    for _ in range(30):
        n = rng.randint(2, 6)
        Q = rng.uniform(-2, 2, (n, n))
        Q = Q + Q.T
        alpha = np.abs(rng.randn(n)) * (rng.rand(n) < 0.6)
        frac = rng.choice([-1.0, 0.0, 1.0], n)
        b = frac * alpha
        v = absvalue_copositivity(Q, b, alpha)
        S = v.details.get("schur_complement")
        if S is not None and np.size(S):
            assert np.max(np.abs(S - S.T)) <= 1e-10 * (1 + np.max(np.abs(S)))


def test_absvalue_agrees_with_oracle(rng):
    for _ in range(60):
        n = rng.randint(1, 6)
        Q = rng.uniform(-2, 2, (n, n))
        Q = Q + Q.T
        alpha = np.round(np.abs(rng.randn(n)), 2) * (rng.rand(n) < 0.7)
        frac = rng.choice([-1.0, -0.5, 0.0, 0.5, 1.0], n)
        b = frac * alpha
        cls = absvalue_classify(b, alpha)
        fast = absvalue_copositivity(Q, b, alpha)
        slow = copositive_on_cone(Q, classified_cone(cls, n))
        assert fast.status == slow.status


def test_method_agreement_includes_witness_check(rng):
    for _ in range(20):
        n = rng.randint(1, 5)
        Q = rng.uniform(-3, 3, (n, n))
        Q = Q + Q.T
        alpha = np.abs(rng.randn(n))
        frac = rng.choice([-1.0, 0.0, 1.0], n)
        b = frac * alpha
        v = absvalue_copositivity(Q, b, alpha)
        if v.status == NOT_COPOSITIVE:
            cls = absvalue_classify(b, alpha)
            assert classified_cone(cls, n).contains_direction(v.witness, tol=1e-7)
            assert v.witness @ Q @ v.witness < 0
