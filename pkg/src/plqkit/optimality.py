"""First and second-order optimality certification for QP and PLQ programs.

A QP point is a local minimizer iff it is stationary and the Hessian is
copositive on the critical cone; strict copositivity characterizes
strong (= strict = isolated) local minimality.  A PLQ program inherits
both characterizations piecewise: every active piece must pass its QP
test on the piece intersected with the constraint set.  The same support
enumeration that proves finiteness of strict minima drives their exact
enumeration, and stationary values are collected over KKT solution
families per piece.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._config import DEFAULT, Config
from .copositivity import (
    COPOSITIVE,
    NOT_COPOSITIVE,
    STRICTLY_COPOSITIVE,
    CopositivityVerdict,
    copositive_on_cone,
    strictly_copositive_on_cone,
)
from .errors import PointNotFeasible, TooManyConstraints
from .geometry import (
    ConeHRep,
    Polyhedron,
    _as_vector,
    contains,
    lp_solve,
    tangent_cone,
)
from .plq import PLQFunction, Quadratic, plq_eval

NOT_STATIONARY = "NotStationary"
STATIONARY = "Stationary"
LOCAL_MIN = "LocalMin"
STRONG_LOCAL_MIN = "StrongLocalMin"

_LEVEL_ORDER = {NOT_STATIONARY: 0, STATIONARY: 1, LOCAL_MIN: 2, STRONG_LOCAL_MIN: 3}


@dataclass(frozen=True)
class KKTPoint:
    x: np.ndarray
    multiplier: np.ndarray  # full length m, zero off the active set
    support: tuple[int, ...]
    stationarity_residual: float
    complementarity_residual: float


@dataclass(frozen=True)
class PieceEvidence:
    piece: int
    kkt: KKTPoint | None
    critical_cone: ConeHRep | None
    verdict: CopositivityVerdict | None
    descent: np.ndarray | None = None


@dataclass(frozen=True)
class OptimalityCertificate:
    level: str
    evidence: tuple[PieceEvidence, ...]
    refutation: np.ndarray | None = None
    notes: str = ""

    @property
    def is_local_min(self) -> bool:
        return _LEVEL_ORDER[self.level] >= _LEVEL_ORDER[LOCAL_MIN]

    @property
    def is_strong_local_min(self) -> bool:
        return self.level == STRONG_LOCAL_MIN


# ---------------------------------------------------------------------------
# QP stationarity and critical cones


def _require_feasible(P: Polyhedron, xbar, config: Config):
    inside, active = contains(P, xbar, None, config)
    if not inside:
        raise PointNotFeasible("base point is not feasible")
    return active


def qp_stationary(q: Quadratic, P: Polyhedron, xbar, config: Config = DEFAULT):
    """KKT multiplier search at a feasible point.

    Returns ("stationary", KKTPoint) when a nonnegative multiplier on the
    active rows balances the gradient, else ("descent", v) with a feasible
    direction of strict descent obtained from the dual LP.
    """
    xbar = _as_vector(xbar, "xbar")
    active = _require_feasible(P, xbar, config)
    g = q.gradient(xbar)
    act_ineq = [i for i in active if not P.eq_mask[i]]
    eq_rows = [i for i in range(P.m) if P.eq_mask[i]]
    rows = act_ineq + eq_rows
    n = P.n

    if rows:
        # multipliers lam live on `rows`; lam >= 0 on the inequality part
        At = P.A[rows].T  # (n, k)
        k = len(rows)
        sense = ["="] * n + ["<="] * len(act_ineq)
        A_feas = np.vstack([At, -np.eye(k)[: len(act_ineq)]])
        b_feas = np.concatenate([-g, np.zeros(len(act_ineq))])
        res = lp_solve(np.zeros(k), Polyhedron.build(A_feas, b_feas, sense), config)
        if res.status == "optimal":
            lam_full = np.zeros(P.m)
            for pos, i in enumerate(rows):
                lam_full[i] = res.point[pos]
            support = tuple(
                i for i in rows
                if lam_full[i] > 1e-9 * (1.0 + np.abs(lam_full).max(initial=0.0))
            )
            stat = float(np.linalg.norm(P.A.T @ lam_full + g, ord=np.inf)) if P.m else float(np.linalg.norm(g, ord=np.inf))
            comp = float(np.max(np.abs(lam_full * (P.A @ xbar - P.b)))) if P.m else 0.0
            return "stationary", KKTPoint(xbar, lam_full, support, stat, comp)
    else:
        tol = config.kkt_tol * (1.0 + float(np.abs(q.c).max(initial=0.0)))
        if float(np.linalg.norm(g, ord=np.inf)) <= tol:
            return "stationary", KKTPoint(
                xbar, np.zeros(P.m), (), float(np.linalg.norm(g, ord=np.inf)), 0.0)

    # no multiplier: find a descent direction in the tangent cone
    cone = tangent_cone(P, xbar, None, config)
    box = Polyhedron.build(
        np.vstack([np.eye(n), -np.eye(n)]), np.ones(2 * n))
    region = cone.as_polyhedron().intersect(box)
    res = lp_solve(g, region, config)
    if res.status != "optimal" or res.value >= -1e-12:
        # gradient balanced numerically after all; treat as stationary
        lam_full = np.zeros(P.m)
        return "stationary", KKTPoint(
            xbar, lam_full, (), float(np.linalg.norm(g, ord=np.inf)), 0.0)
    return "descent", res.point


def critical_cone(q: Quadratic, P: Polyhedron, xbar,
                  config: Config = DEFAULT) -> ConeHRep:
    """Tangent cone intersected with the orthogonal complement of the
    gradient."""
    xbar = _as_vector(xbar, "xbar")
    _require_feasible(P, xbar, config)
    cone = tangent_cone(P, xbar, None, config)
    g = q.gradient(xbar)
    gn = float(np.linalg.norm(g))
    # a gradient below the stationarity tolerance adds no restriction; a
    # larger one enters as a normalized row so the cone is well scaled
    if gn <= 1e-13 * q.coeff_scale():
        return cone
    g = g / gn
    A = np.vstack([cone.A, g[None, :]]) if cone.k else g[None, :]
    sense = list(np.where(cone.eq_mask, "=", "<=")) + ["="]
    return ConeHRep.build(A, sense, n=P.n)


def critical_cone_support_form(q: Quadratic, P: Polyhedron, xbar,
                               kkt: KKTPoint, config: Config = DEFAULT) -> ConeHRep:
    """Multiplier-support description: tangent cone plus A_i v = 0 for
    i in supp(lambda)."""
    cone = tangent_cone(P, xbar, None, config)
    rows = [cone.A] if cone.k else []
    sense = list(np.where(cone.eq_mask, "=", "<=")) if cone.k else []
    for i in kkt.support:
        rows.append(P.A[i][None, :])
        sense.append("=")
    if not rows:
        return ConeHRep.whole_space(P.n)
    return ConeHRep.build(np.vstack(rows), sense, n=P.n)


def _qp_certificate(q, P, xbar, strict, config) -> OptimalityCertificate:
    status, payload = qp_stationary(q, P, xbar, config)
    if status == "descent":
        ev = PieceEvidence(0, None, None, None, payload)
        return OptimalityCertificate(NOT_STATIONARY, (ev,), payload)
    kkt = payload
    cone = critical_cone(q, P, xbar, config)
    if strict:
        verdict = strictly_copositive_on_cone(q.Q, cone, config)
        if verdict.status == STRICTLY_COPOSITIVE:
            level = STRONG_LOCAL_MIN
            notes = "strict = isolated = strong local minimality for QPs"
        elif verdict.status == COPOSITIVE:
            level = LOCAL_MIN
            notes = "copositive but not strictly: local, not strong"
        else:
            level = STATIONARY
            notes = ""
    else:
        verdict = copositive_on_cone(q.Q, cone, config)
        if verdict.status != NOT_COPOSITIVE:
            level = LOCAL_MIN
            notes = "copositivity on the critical cone is exact for QPs"
        else:
            level = STATIONARY
            notes = ""
    ev = PieceEvidence(0, kkt, cone, verdict)
    refut = verdict.witness if verdict.status == NOT_COPOSITIVE else None
    return OptimalityCertificate(level, (ev,), refut, notes)


def qp_local_min(q: Quadratic, P: Polyhedron, xbar,
                 config: Config = DEFAULT) -> OptimalityCertificate:
    """Local minimality of a QP: stationary + copositive on the critical
    cone (necessary and sufficient)."""
    return _qp_certificate(q, P, _as_vector(xbar, "xbar"), False, config)


def qp_strong_min(q: Quadratic, P: Polyhedron, xbar,
                  config: Config = DEFAULT) -> OptimalityCertificate:
    """Strong (= strict = isolated) local minimality of a QP: stationary +
    strictly copositive on the critical cone."""
    return _qp_certificate(q, P, _as_vector(xbar, "xbar"), True, config)


# ---------------------------------------------------------------------------
# PLQ programs: piecewise certification


def _plq_certificate(f: PLQFunction, X: Polyhedron, xbar, strict, config,
                     executor=None) -> OptimalityCertificate:
    xbar = _as_vector(xbar, "xbar")
    inside, _ = contains(X, xbar, None, config)
    if not inside:
        raise PointNotFeasible("point violates the constraint polyhedron")
    act = f.active_pieces(xbar, None, config)
    if not act:
        raise PointNotFeasible("point outside the PLQ domain")

    def _one(i):
        P, q = f.pieces[i]
        cert = _qp_certificate(q, X.intersect(P), xbar, strict, config)
        return i, cert

    if executor is not None:
        results = list(executor.map(_one, act))
    else:
        results = [_one(i) for i in act]

    evidence = []
    level = STRONG_LOCAL_MIN if strict else LOCAL_MIN
    refutation = None
    for i, cert in results:
        ev = cert.evidence[0]
        evidence.append(PieceEvidence(i, ev.kkt, ev.critical_cone,
                                      ev.verdict, ev.descent))
        if _LEVEL_ORDER[cert.level] < _LEVEL_ORDER[level]:
            level = cert.level
            if refutation is None:
                refutation = cert.refutation if cert.refutation is not None else ev.descent
    notes = ("piecewise certification: every active piece certified on "
             "the piece intersected with the constraint set")
    return OptimalityCertificate(level, tuple(evidence), refutation, notes)


def plq_local_min(f: PLQFunction, X: Polyhedron, xbar,
                  config: Config = DEFAULT, executor=None) -> OptimalityCertificate:
    """Local minimality of a PLQ program: every active piece is a QP local
    minimizer on X intersected with the piece (exact equivalence)."""
    return _plq_certificate(f, X, xbar, False, config, executor)


def plq_strong_min(f: PLQFunction, X: Polyhedron, xbar,
                   config: Config = DEFAULT, executor=None) -> OptimalityCertificate:
    """Strong local minimality of a PLQ program: every active piece passes
    the strict QP test; strict = isolated = strong carries over."""
    return _plq_certificate(f, X, xbar, True, config, executor)


# ---------------------------------------------------------------------------
# enumeration via multiplier supports


def _kkt_system(q: Quadratic, P: Polyhedron, beta, eq_rows):
    """Square linear system for stationarity with support beta:
    unknowns (x, lam_beta, mu_eq)."""
    n = q.n
    rows = list(beta) + eq_rows
    k = len(rows)
    M = np.zeros((n + k, n + k))
    M[:n, :n] = q.Q
    if k:
        Ar = P.A[rows]
        M[:n, n:] = Ar.T
        M[n:, :n] = Ar
    rhs = np.concatenate([-q.c, P.b[rows] if k else np.zeros(0)])
    return M, rhs


def _consistent_lstsq(M, rhs):
    z, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    resid = float(np.abs(M @ z - rhs).max(initial=0.0))
    ok = resid <= 1e-8 * (1.0 + float(np.abs(rhs).max(initial=0.0)))
    return ok, z


def _support_candidates(q: Quadratic, P: Polyhedron, config: Config):
    """Feasible KKT candidates (x, lam_beta >= 0) over multiplier supports
    of size <= n, pruning supersets of infeasible equality systems."""
    n = q.n
    eq_rows = [i for i in range(P.m) if P.eq_mask[i]]
    ineq_rows = [i for i in range(P.m) if not P.eq_mask[i]]
    if len(ineq_rows) > config.max_enum_rows:
        raise TooManyConstraints(
            f"{len(ineq_rows)} rows exceed enumeration guard {config.max_enum_rows}")
    tol = max(P.membership_tol(config), 1e-9)
    infeasible: list[frozenset] = []
    out = []
    for k in range(0, min(n, len(ineq_rows)) + 1):
        for beta in itertools.combinations(ineq_rows, k):
            bset = frozenset(beta)
            if any(bad <= bset for bad in infeasible):
                continue
            rows = list(beta) + eq_rows
            if rows:
                E, e = P.A[rows], P.b[rows]
                ok, _ = _consistent_lstsq(E, e)
                if not ok:
                    infeasible.append(bset)
                    continue
            M, rhs = _kkt_system(q, P, beta, eq_rows)
            ok, z = _consistent_lstsq(M, rhs)
            if not ok:
                continue
            x = z[:n]
            lam_beta = z[n:n + len(beta)]
            if np.any(lam_beta < -1e-9):
                continue
            inside, _ = contains(P, x, tol, config)
            if not inside:
                continue
            out.append((beta, x, M, rhs))
    return out


def enumerate_strict_minima(f: PLQFunction, X: Polyhedron,
                            config: Config = DEFAULT):
    """All strict (= strong = isolated) local minima of the PLQ program.

    Per piece, every multiplier support gives a square KKT system whose
    solution is the unique candidate carrying that support; candidates
    surviving feasibility are certified through the full piecewise strict
    test.  The result is finite by construction.
    """
    found = []
    for P, q in f.pieces:
        piece_set = X.intersect(P)
        for beta, x, _, _ in _support_candidates(q, piece_set, config):
            if any(np.max(np.abs(x - y)) <= config.dedup_point_tol
                   for y, _ in found):
                continue
            try:
                cert = plq_strong_min(f, X, x, config)
            except PointNotFeasible:
                continue
            if cert.level == STRONG_LOCAL_MIN:
                found.append((x, cert))
    found.sort(key=lambda t: (plq_eval(f, t[0], None, config),
                              tuple(np.round(t[0], 12))))
    return found


def _is_d_stationary(f: PLQFunction, X: Polyhedron, x, config: Config) -> bool:
    act = f.active_pieces(x, None, config)
    if not act:
        return False
    for i in act:
        P, q = f.pieces[i]
        status, _ = qp_stationary(q, X.intersect(P), x, config)
        if status != "stationary":
            return False
    return True


def enumerate_stationary_values(f: PLQFunction, X: Polyhedron,
                                config: Config = DEFAULT):
    """The finitely many objective values attained at d-stationary points.

    KKT solution families per (piece, support) have constant objective
    value (asserted); each family contributes its value when it contains
    a feasible representative that is d-stationary for the whole program.
    """
    values: list[float] = []
    for P, q in f.pieces:
        piece_set = X.intersect(P)
        n = q.n
        eq_rows = [i for i in range(piece_set.m) if piece_set.eq_mask[i]]
        ineq_rows = [i for i in range(piece_set.m) if not piece_set.eq_mask[i]]
        if len(ineq_rows) > config.max_enum_rows:
            raise TooManyConstraints(
                f"{len(ineq_rows)} rows exceed enumeration guard "
                f"{config.max_enum_rows}")
        infeasible: list[frozenset] = []
        for k in range(0, min(n, len(ineq_rows)) + 1):
            for beta in itertools.combinations(ineq_rows, k):
                bset = frozenset(beta)
                if any(bad <= bset for bad in infeasible):
                    continue
                rows = list(beta) + eq_rows
                if rows:
                    ok, _ = _consistent_lstsq(piece_set.A[rows], piece_set.b[rows])
                    if not ok:
                        infeasible.append(bset)
                        continue
                M, rhs = _kkt_system(q, piece_set, beta, eq_rows)
                ok, z = _consistent_lstsq(M, rhs)
                if not ok:
                    continue
                # feasible representative of the solution family:
                # KKT equalities + piece membership + lam_beta >= 0 as an LP
                kdim = M.shape[1]
                nb = len(beta)
                A_lift = [np.hstack([M, np.zeros((M.shape[0], 0))])]
                b_lift = [rhs]
                sense = ["="] * M.shape[0]
                pad = np.zeros((piece_set.m, kdim - n))
                if piece_set.m:
                    A_lift.append(np.hstack([piece_set.A, pad]))
                    b_lift.append(piece_set.b)
                    sense += piece_set.sense
                if nb:
                    lam_rows = np.zeros((nb, kdim))
                    lam_rows[:, n:n + nb] = -np.eye(nb)
                    A_lift.append(lam_rows)
                    b_lift.append(np.zeros(nb))
                    sense += ["<="] * nb
                lifted = Polyhedron.build(np.vstack(A_lift),
                                          np.concatenate(b_lift), sense)
                res = lp_solve(np.zeros(kdim), lifted, config)
                if res.status != "optimal":
                    continue
                x = res.point[:n]
                # objective is constant along the family: null directions are
                # orthogonal to the gradient and curvature-free
                _, s, Vt = np.linalg.svd(M)
                rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 1.0)))
                g = q.gradient(x)
                for d in Vt[rank:]:
                    dx = d[:n]
                    assert abs(g @ dx) <= 1e-6 * (1 + np.abs(g).max(initial=0.0)), \
                        "stationary family value must be constant"
                    assert abs(dx @ q.Q @ dx) <= 1e-6 * (1 + abs(dx @ dx)), \
                        "stationary family value must be constant"
                if not _is_d_stationary(f, X, x, config):
                    continue
                values.append(q.value(x))
    out: list[float] = []
    for v in sorted(values):
        if not out or abs(v - out[-1]) > config.dedup_value_tol * (1.0 + abs(out[-1])):
            out.append(float(v))
    return out
