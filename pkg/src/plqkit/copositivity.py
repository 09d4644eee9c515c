"""Copositivity of symmetric matrices on polyhedral cones, three ways.

Oracle: the global minimum of v^T Q v over the cone sliced by the unit
box, computed exactly by enumerating stationary points over active-row
subsets (faces).  OneNegEig: two convex QPs when Q has exactly one
negative eigenvalue.  AbsValueSchur: the sign-classification and Schur
complement reduction for a single absolute-value constraint, delegating
the reduced test to the Oracle on the nonnegative orthant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from ._config import DEFAULT, Config
from .errors import (
    DimensionMismatch,
    EmptyPolyhedron,
    InvalidCoefficients,
    TooManyConstraints,
    UnboundedSet,
    WrongInertia,
)
from .geometry import (
    ConeHRep,
    Polyhedron,
    _as_matrix,
    _as_vector,
    contains,
    eigh_desc,
    lp_solve,
    qp_convex_solve,
)

COPOSITIVE = "Copositive"
STRICTLY_COPOSITIVE = "StrictlyCopositive"
NOT_COPOSITIVE = "NotCopositive"


@dataclass(frozen=True)
class CopositivityVerdict:
    status: str
    method: str
    min_value: float
    witness: np.ndarray | None = None
    details: dict | None = None

    @property
    def is_copositive(self) -> bool:
        return self.status in (COPOSITIVE, STRICTLY_COPOSITIVE)


@dataclass(frozen=True)
class SignClassification:
    """Index partition of the single absolute-value constraint
    b^T v + sum alpha_i |v_i| <= 0: forced-zero, sign-constrained
    (nonnegative / nonpositive), and free coordinates."""

    zero_idx: tuple[int, ...]
    plus_idx: tuple[int, ...]
    minus_idx: tuple[int, ...]
    free_idx: tuple[int, ...]
    free_pos_eig: tuple[int, ...] | None = None
    free_null_eig: tuple[int, ...] | None = None


def _q_scale(Q: np.ndarray) -> float:
    return 1.0 + (float(np.max(np.abs(Q))) if Q.size else 0.0)


def _symmetrize(Q) -> np.ndarray:
    Q = _as_matrix(Q, "Q")
    if Q.shape[0] != Q.shape[1]:
        raise DimensionMismatch("matrix must be square")
    return 0.5 * (Q + Q.T)


def orthant_cone(k: int) -> ConeHRep:
    return ConeHRep.build(-np.eye(k), n=k)


# ---------------------------------------------------------------------------
# exact minimization of a quadratic form over a bounded polytope


def _subset_candidates(Q2, A, b, n, subsets):
    """Batched KKT solves for stationarity of the form on active subsets.

    Q2 is the Hessian of the form (2Q).  Each subset S gives the system
      [Q2  A_S^T] [x  ]   [0  ]
      [A_S  0   ] [mu ] = [b_S]
    Singular systems fall back to least-norm solutions kept only when
    consistent.
    """
    if not subsets:
        return np.zeros((0, n))
    k = len(subsets[0])
    dim = n + k
    batch = len(subsets)
    idx = np.asarray(subsets, dtype=int)
    M = np.zeros((batch, dim, dim))
    M[:, :n, :n] = Q2
    rhs = np.zeros((batch, dim))
    if k:
        Asub = A[idx]  # (batch, k, n)
        M[:, n:, :n] = Asub
        M[:, :n, n:] = np.transpose(Asub, (0, 2, 1))
        rhs[:, n:] = b[idx]
    sign, logdet = np.linalg.slogdet(M)
    scale = 1.0 + max(float(np.max(np.abs(Q2))) if Q2.size else 0.0,
                      float(np.max(np.abs(A))) if A.size else 0.0)
    ok = (sign != 0) & (logdet > dim * np.log(1e-10 * scale))
    out = []
    if np.any(ok):
        sol = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
        resid = np.abs(np.einsum("bij,bj->bi", M[ok], sol) - rhs[ok]).max(axis=1)
        good = resid <= 1e-7 * (1.0 + np.abs(rhs[ok]).max(initial=0.0))
        out.append(sol[good][:, :n])
    for t in np.where(~ok)[0]:
        z, *_ = np.linalg.lstsq(M[t], rhs[t], rcond=None)
        if np.abs(M[t] @ z - rhs[t]).max(initial=0.0) <= 1e-8 * (
            1.0 + np.abs(rhs[t]).max(initial=0.0)
        ):
            out.append(z[None, :n])
    return np.vstack(out) if out else np.zeros((0, n))


def min_quadratic_over_polytope(Q, polytope: Polyhedron,
                                config: Config = DEFAULT):
    """Exact global minimum of the quadratic FORM v^T Q v over a bounded
    polytope, with an attaining point.

    Candidates are the stationary points of the form restricted to every
    active-row subset of size <= n (which covers all faces and vertices);
    the feasible candidate of least value is the global minimizer because
    the minimum of a quadratic over a polytope is attained on a face, and
    on that face either at a relatively-interior stationary point or on
    the relative boundary.
    """
    Q = _symmetrize(Q)
    n = polytope.n
    if Q.shape[0] != n:
        raise DimensionMismatch("matrix and polytope dimensions differ")
    n_ineq = int(np.sum(~polytope.eq_mask))
    if n_ineq > config.max_polytope_rows:
        raise TooManyConstraints(
            f"{n_ineq} rows exceed polytope guard {config.max_polytope_rows}")
    # normalize rows so the LP feasibility view and the candidate membership
    # filter agree on near-degenerate systems
    if polytope.m:
        norms = np.linalg.norm(polytope.A, axis=1)
        keep = norms > 1e-300
        scalef = np.where(keep, norms, 1.0)
        polytope = Polyhedron.build(polytope.A / scalef[:, None],
                                    polytope.b / scalef,
                                    polytope.eq_mask)
    res = lp_solve(np.zeros(n), polytope, config)
    if res.status != "optimal":
        raise EmptyPolyhedron("minimization over an empty polytope")
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        for sgn in (1.0, -1.0):
            if lp_solve(sgn * e, polytope, config).status == "unbounded":
                raise UnboundedSet("polytope is unbounded")

    eq_rows = [i for i in range(polytope.m) if polytope.eq_mask[i]]
    ineq_rows = [i for i in range(polytope.m) if not polytope.eq_mask[i]]
    A, b = polytope.A, polytope.b
    Q2 = 2.0 * Q
    # the same threshold the simplex phase-1 uses to declare feasibility
    tol = max(polytope.membership_tol(config),
              1e-8 * (1.0 + float(np.max(np.abs(b)) if b.size else 0.0)))

    best_val = np.inf
    best_x = None
    for k in range(0, min(n, len(ineq_rows)) + 1):
        subsets = [tuple(eq_rows) + S
                   for S in itertools.combinations(ineq_rows, k)]
        cand = _subset_candidates(Q2, A, b, n, subsets)
        if cand.shape[0] == 0:
            continue
        if polytope.m:
            r = cand @ A.T - b
            feas = np.all(r[:, ~polytope.eq_mask] <= tol, axis=1)
            if np.any(polytope.eq_mask):
                feas &= np.all(np.abs(r[:, polytope.eq_mask]) <= tol, axis=1)
        else:
            feas = np.ones(cand.shape[0], dtype=bool)
        cand = cand[feas]
        if cand.shape[0] == 0:
            continue
        vals = np.einsum("bi,ij,bj->b", cand, Q, cand)
        t = int(np.argmin(vals))
        if vals[t] < best_val - 0.0:
            best_val = float(vals[t])
            best_x = cand[t]
    if best_x is None:
        raise EmptyPolyhedron("no feasible stationary candidate found")
    return best_val, best_x


# ---------------------------------------------------------------------------
# oracle copositivity tests


def _check_cone_guard(C: ConeHRep, config: Config):
    if C.k > config.max_cone_rows:
        raise TooManyConstraints(
            f"{C.k} cone rows exceed guard {config.max_cone_rows}")


def _box_rows(n: int):
    eye = np.eye(n)
    return np.vstack([eye, -eye]), np.ones(2 * n)


def _cone_box(C: ConeHRep) -> Polyhedron:
    bx, bb = _box_rows(C.n)
    A = np.vstack([C.A, bx]) if C.k else bx
    b = np.concatenate([np.zeros(C.k), bb])
    sense = list(np.where(C.eq_mask, "=", "<=")) + ["<="] * (2 * C.n)
    return Polyhedron.build(A, b, sense)


def copositive_on_cone(Q, C: ConeHRep, config: Config = DEFAULT) -> CopositivityVerdict:
    """Oracle test: v^T Q v >= 0 on C iff the minimum over C intersected
    with the unit box is >= -tol (homogeneity makes the slice sufficient)."""
    Q = _symmetrize(Q)
    _check_cone_guard(C, config)
    if Q.shape[0] != C.n:
        raise DimensionMismatch("matrix and cone dimensions differ")
    val, x = min_quadratic_over_polytope(Q, _cone_box(C), config)
    tol = config.cop_tol * _q_scale(Q)
    if val < -tol:
        w = x / np.max(np.abs(x))
        return CopositivityVerdict(
            NOT_COPOSITIVE, "Oracle", float(w @ Q @ w), w)
    return CopositivityVerdict(COPOSITIVE, "Oracle", val)


def strictly_copositive_on_cone(Q, C: ConeHRep,
                                config: Config = DEFAULT) -> CopositivityVerdict:
    """Strict test over the box surface: v^T Q v > tol on every facet slice
    C intersect {v_i = +-1, |v|_inf <= 1}.  All slices empty (C = {0})
    is vacuously strict."""
    Q = _symmetrize(Q)
    _check_cone_guard(C, config)
    n = C.n
    if Q.shape[0] != n:
        raise DimensionMismatch("matrix and cone dimensions differ")
    tol = config.cop_tol * _q_scale(Q)
    best_val = np.inf
    best_x = None
    base = _cone_box(C)
    for i in range(n):
        for sgn in (1.0, -1.0):
            row = np.zeros(n)
            row[i] = 1.0
            facet = base.intersect(
                Polyhedron.build(row[None, :], [sgn], ["="]))
            try:
                val, x = min_quadratic_over_polytope(Q, facet, config)
            except EmptyPolyhedron:
                continue
            if val < best_val:
                best_val, best_x = val, x
    if best_x is None:
        return CopositivityVerdict(STRICTLY_COPOSITIVE, "Oracle", np.inf,
                                   details={"vacuous": True})
    if best_val < -tol:
        w = best_x / np.max(np.abs(best_x))
        return CopositivityVerdict(
            NOT_COPOSITIVE, "Oracle", float(w @ Q @ w), w)
    if best_val > tol:
        return CopositivityVerdict(STRICTLY_COPOSITIVE, "Oracle", best_val)
    return CopositivityVerdict(COPOSITIVE, "Oracle", best_val, best_x,
                               details={"strictness_gap": best_val})


# ---------------------------------------------------------------------------
# one negative eigenvalue: two convex QPs


def copositive_one_neg_eig(Q, C: ConeHRep, config: Config = DEFAULT,
                           executor=None) -> CopositivityVerdict:
    """Copositivity via two convex QPs when Q has exactly one eigenvalue
    below -tol (rows-as-eigenvectors convention, Q = P^T D P).

    After substituting y = P v, the form is sum_i sigma_i y_i^2 with only
    sigma_n negative; the cone admits a negative value iff one of the two
    programs slicing y_n = +1 or y_n = -1 is feasible with a negative
    optimum.
    """
    Q = _symmetrize(Q)
    _check_cone_guard(C, config)
    n = Q.shape[0]
    if n != C.n:
        raise DimensionMismatch("matrix and cone dimensions differ")
    sig, P = eigh_desc(Q, config)
    scale = _q_scale(Q)
    inertia_tol = 1e-9 * scale
    neg = sig < -inertia_tol
    if np.sum(neg) != 1 or not neg[-1]:
        raise WrongInertia(
            "the test needs exactly one eigenvalue below -tol")
    sigma_n = float(sig[-1])
    p_n = P[-1]
    # PSD part of the form in v-coordinates: sum_{i<n} sigma_i (p_i.v)^2
    sig_pos = np.clip(sig[:-1], 0.0, None)
    Qpos = (P[:-1].T * sig_pos) @ P[:-1]
    Qpos = 0.5 * (Qpos + Qpos.T)

    cone_poly = C.as_polyhedron()
    branches = []
    for rhs in (1.0, -1.0):
        slice_poly = cone_poly.intersect(
            Polyhedron.build(p_n[None, :], [rhs], ["="]))
        branches.append((rhs, slice_poly))

    def _solve(item):
        rhs, poly = item
        return rhs, qp_convex_solve(Qpos, np.zeros(n), poly, config=config)

    if executor is not None:
        results = list(executor.map(_solve, branches))
    else:
        results = [_solve(it) for it in branches]

    tol = config.cop_tol * scale
    details = {}
    for rhs, res in results:
        key = f"branch_{'+1' if rhs > 0 else '-1'}"
        if res.status != "optimal":
            details[key] = res.status
            continue
        total = float(res.value) - 0.5 * abs(sigma_n)
        details[key] = total
        if total < -0.5 * tol:
            w = res.point / np.max(np.abs(res.point))
            return CopositivityVerdict(
                NOT_COPOSITIVE, "OneNegEig", float(w @ Q @ w), w, details)
    return CopositivityVerdict(COPOSITIVE, "OneNegEig", 0.0, None, details)


# ---------------------------------------------------------------------------
# single absolute-value constraint: sign classification + Schur reduction


def absvalue_classify(b, alpha, config: Config = DEFAULT) -> SignClassification:
    """Partition coordinates of the constraint b^T v + sum alpha_i |v_i| <= 0.

    Requires alpha >= 0 and |b_i| <= alpha_i (otherwise the constraint set
    would not be a cone of the stated form).
    """
    b = _as_vector(b, "b")
    alpha = _as_vector(alpha, "alpha")
    if b.shape != alpha.shape:
        raise DimensionMismatch("b and alpha lengths differ")
    tol = 1e-12 * (1.0 + float(np.max(np.abs(alpha)) if alpha.size else 0.0))
    if np.any(alpha < -tol):
        raise InvalidCoefficients("alpha must be nonnegative")
    if np.any(np.abs(b) > alpha + tol):
        raise InvalidCoefficients("|b_i| <= alpha_i must hold for every i")
    zero, plus, minus, free = [], [], [], []
    for i in range(b.shape[0]):
        if alpha[i] <= tol and abs(b[i]) <= tol:
            free.append(i)
        elif abs(b[i]) < alpha[i] - tol:
            zero.append(i)
        elif b[i] < 0:  # -b_i = alpha_i > 0
            plus.append(i)
        else:           # b_i = alpha_i > 0
            minus.append(i)
    return SignClassification(tuple(zero), tuple(plus), tuple(minus), tuple(free))


def classified_cone(cls: SignClassification, n: int) -> ConeHRep:
    """The feasible cone of the absolute-value constraint as an H-system."""
    rows, sense = [], []
    for i in cls.zero_idx:
        e = np.zeros(n)
        e[i] = 1.0
        rows.append(e)
        sense.append("=")
    for i in cls.plus_idx:
        e = np.zeros(n)
        e[i] = -1.0
        rows.append(e)
        sense.append("<=")
    for i in cls.minus_idx:
        e = np.zeros(n)
        e[i] = 1.0
        rows.append(e)
        sense.append("<=")
    if not rows:
        return ConeHRep.whole_space(n)
    return ConeHRep.build(np.array(rows), sense, n=n)


def absvalue_copositivity(Q, b, alpha, config: Config = DEFAULT) -> CopositivityVerdict:
    """Copositivity of Q on the absolute-value constraint cone via the
    sign-flipped Schur complement reduced to the nonnegative orthant.

    Copositive iff (i) the free-block submatrix is PSD, (ii) the
    sign-constrained-to-free cross blocks annihilate the null eigenvectors
    of the free block, and (iii) the Schur complement eliminating the
    positive-eigenvalue part of the free block is copositive on the
    orthant of the sign-constrained coordinates.
    """
    Q = _symmetrize(Q)
    n = Q.shape[0]
    cls = absvalue_classify(b, alpha, config)
    scale = _q_scale(Q)
    tol = config.cop_tol * scale

    sgn_idx = list(cls.plus_idx) + list(cls.minus_idx)
    signs = np.array([1.0] * len(cls.plus_idx) + [-1.0] * len(cls.minus_idx))
    f_idx = list(cls.free_idx)

    def _lift(u_s, v_f):
        v = np.zeros(n)
        for pos, i in enumerate(sgn_idx):
            v[i] = signs[pos] * u_s[pos]
        for pos, i in enumerate(f_idx):
            v[i] = v_f[pos]
        return v

    def _not_copositive(v, details):
        nrm = np.max(np.abs(v))
        w = v / nrm if nrm > 0 else v
        val = float(w @ Q @ w)
        if val >= 0.0:
            # near-tolerance construction: fall back to the oracle witness
            cone = classified_cone(cls, n)
            oracle = copositive_on_cone(Q, cone, config)
            if oracle.status == NOT_COPOSITIVE:
                return CopositivityVerdict(
                    NOT_COPOSITIVE, "AbsValueSchur", oracle.min_value,
                    oracle.witness, details)
            return CopositivityVerdict(COPOSITIVE, "AbsValueSchur", 0.0,
                                       None, details)
        return CopositivityVerdict(NOT_COPOSITIVE, "AbsValueSchur", val, w, details)

    if not sgn_idx and not f_idx:
        return CopositivityVerdict(
            COPOSITIVE, "AbsValueSchur", 0.0, None,
            {"classification": cls, "vacuous": True})

    details: dict = {"classification": cls}
    if f_idx:
        Qff = Q[np.ix_(f_idx, f_idx)]
        xi, V = np.linalg.eigh(Qff)
        qff_scale = 1.0 + float(np.max(np.abs(Qff)))
        null_tol = config.null_eig_tol * qff_scale
        if xi[0] < -tol:
            vf = V[:, 0]
            v = _lift(np.zeros(len(sgn_idx)), vf)
            details["free_block_psd"] = False
            return _not_copositive(v, details)
        pos_mask = xi > null_tol
        f_plus = tuple(f_idx[k] for k in range(len(f_idx)) if pos_mask[k])
        f_zero = tuple(f_idx[k] for k in range(len(f_idx)) if not pos_mask[k])
        cls = replace(cls, free_pos_eig=f_plus, free_null_eig=f_zero)
        details["classification"] = cls
        details["free_block_psd"] = True
        if sgn_idx:
            Msf = (signs[:, None] * Q[np.ix_(sgn_idx, f_idx)])
            M0 = Msf @ V[:, ~pos_mask]
            ann = float(np.max(np.abs(M0))) if M0.size else 0.0
            details["annihilation_residual"] = ann
            if ann > config.annihilation_tol * scale:
                k, z = np.unravel_index(int(np.argmax(np.abs(M0))), M0.shape)
                u_s = np.zeros(len(sgn_idx))
                u_s[k] = 1.0
                t = -(np.sign(M0[k, z]) or 1.0) * (abs(Q[sgn_idx[k], sgn_idx[k]]) + scale) / abs(M0[k, z])
                v = _lift(u_s, t * (V[:, ~pos_mask][:, z]))
                return _not_copositive(v, details)
            Mp = Msf @ V[:, pos_mask]
            Xi_p = xi[pos_mask]
            S = Q[np.ix_(sgn_idx, sgn_idx)] * np.outer(signs, signs)
            if Mp.size:
                S = S - (Mp / Xi_p) @ Mp.T
            S = 0.5 * (S + S.T)
            details["schur_complement"] = S
        else:
            return CopositivityVerdict(COPOSITIVE, "AbsValueSchur", 0.0,
                                       None, details)
    else:
        V = np.zeros((0, 0))
        pos_mask = np.zeros(0, dtype=bool)
        Xi_p = np.zeros(0)
        Mp = np.zeros((len(sgn_idx), 0))
        cls = replace(cls, free_pos_eig=(), free_null_eig=())
        details["classification"] = cls
        S = Q[np.ix_(sgn_idx, sgn_idx)] * np.outer(signs, signs)
        details["schur_complement"] = S

    reduced = copositive_on_cone(S, orthant_cone(len(sgn_idx)), config)
    details["reduced_verdict"] = reduced.status
    if reduced.status == NOT_COPOSITIVE:
        u_s = reduced.witness
        if Mp.size:
            u_fp = -(Mp.T @ u_s) / Xi_p
            v_f = V[:, pos_mask] @ u_fp
        else:
            v_f = np.zeros(len(f_idx))
        v = _lift(u_s, v_f)
        return _not_copositive(v, details)
    return CopositivityVerdict(COPOSITIVE, "AbsValueSchur", 0.0, None, details)
