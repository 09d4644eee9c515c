"""Dense numerical and polyhedral primitives.

Everything here is exact-at-desk-scale: a revised primal simplex with
Bland's rule for LPs, a null-space active-set method (with an exhaustive
KKT enumeration fallback) for convex QPs, and LP-certified polyhedral
queries (membership, tangent cones, 1-norm distance, affine hulls, face
enumeration).  The inequality convention is Ax <= b throughout; equality
rows are tagged per row.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ._config import DEFAULT, Config
from .errors import (
    AlgorithmFailure,
    DimensionMismatch,
    EmptyPolyhedron,
    GuardExceeded,
    NonSymmetric,
    NotPSD,
    PointNotInSet,
    TooManyConstraints,
)

LEQ = "<="
EQ = "="


def _as_matrix(A, name="A") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return A.reshape(0, A.shape[1] if A.ndim == 2 else 0)
    if A.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-dimensional")
    if not np.all(np.isfinite(A)):
        raise DimensionMismatch(f"{name} has non-finite entries")
    return A


def _as_vector(b, name="b") -> np.ndarray:
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if b.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-dimensional")
    if not np.all(np.isfinite(b)):
        raise DimensionMismatch(f"{name} has non-finite entries")
    return b


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class Polyhedron:
    """H-representation {x : A_i x <= b_i or A_i x = b_i}; m = 0 is all of R^n."""

    A: np.ndarray
    b: np.ndarray
    eq_mask: np.ndarray
    n: int

    @staticmethod
    def build(A, b, sense=None, n=None) -> "Polyhedron":
        A = _as_matrix(A)
        b = _as_vector(b) if np.size(b) or A.shape[0] else np.zeros(0)
        if A.shape[0] != b.shape[0]:
            raise DimensionMismatch("A rows and b length differ")
        if n is None:
            n = A.shape[1]
        if A.shape[0] and A.shape[1] != n:
            raise DimensionMismatch("A columns and n differ")
        if A.shape[0] == 0:
            A = A.reshape(0, n)
        if sense is None:
            eq = np.zeros(A.shape[0], dtype=bool)
        elif isinstance(sense, np.ndarray) and sense.dtype == bool:
            eq = sense.copy()
        else:
            eq = np.array([s == EQ for s in sense], dtype=bool)
        if eq.shape[0] != A.shape[0]:
            raise DimensionMismatch("sense length and A rows differ")
        A = np.ascontiguousarray(A)
        A.setflags(write=False)
        b = b.copy()
        b.setflags(write=False)
        eq.setflags(write=False)
        return Polyhedron(A, b, eq, int(n))

    @staticmethod
    def whole_space(n: int) -> "Polyhedron":
        return Polyhedron.build(np.zeros((0, n)), np.zeros(0), n=n)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def sense(self) -> list[str]:
        return [EQ if e else LEQ for e in self.eq_mask]

    def membership_tol(self, config: Config = DEFAULT) -> float:
        scale = 1.0 + (np.max(np.abs(self.b)) if self.m else 0.0)
        return config.base_tol * scale

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        if other.n != self.n:
            raise DimensionMismatch("dimension mismatch in intersection")
        return Polyhedron.build(
            np.vstack([self.A, other.A]),
            np.concatenate([self.b, other.b]),
            np.concatenate([self.eq_mask, other.eq_mask]),
        )

    def tighten(self, rows) -> "Polyhedron":
        """Turn the given <=-rows into equalities."""
        eq = self.eq_mask.copy()
        eq[list(rows)] = True
        return Polyhedron.build(self.A, self.b, eq)

    def translated(self, shift: np.ndarray) -> "Polyhedron":
        shift = _as_vector(shift)
        return Polyhedron.build(self.A, self.b + self.A @ shift, self.eq_mask)


@dataclass(frozen=True)
class ConeHRep:
    """Homogeneous system {v : A_i v <= 0 or A_i v = 0}; k = 0 is all of R^n."""

    A: np.ndarray
    eq_mask: np.ndarray
    n: int

    @staticmethod
    def build(A, sense=None, n=None) -> "ConeHRep":
        poly = Polyhedron.build(A, np.zeros(np.asarray(A).shape[0] if np.size(A) else 0),
                                sense, n=n)
        return ConeHRep(poly.A, poly.eq_mask, poly.n)

    @staticmethod
    def whole_space(n: int) -> "ConeHRep":
        return ConeHRep.build(np.zeros((0, n)), n=n)

    @property
    def k(self) -> int:
        return self.A.shape[0]

    def as_polyhedron(self) -> Polyhedron:
        return Polyhedron.build(self.A, np.zeros(self.k), self.eq_mask, n=self.n)

    def contains_direction(self, v, tol=None, config: Config = DEFAULT) -> bool:
        v = _as_vector(v)
        if self.k == 0:
            return True
        if tol is None:
            scale = max(1.0, float(np.max(np.abs(self.A)))) * (1.0 + float(np.max(np.abs(v))))
            tol = config.base_tol * scale
        r = self.A @ v
        ok_ineq = np.all(r[~self.eq_mask] <= tol)
        ok_eq = np.all(np.abs(r[self.eq_mask]) <= tol)
        return bool(ok_ineq and ok_eq)


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    point: np.ndarray | None = None
    value: float | None = None
    active_set: tuple[int, ...] = ()


@dataclass(frozen=True)
class QpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    point: np.ndarray | None = None
    value: float | None = None
    active_set: tuple[int, ...] = ()
    multipliers: np.ndarray | None = None


# ---------------------------------------------------------------------------
# symmetric eigendecomposition, rows-as-eigenvectors convention


def eigh_desc(S, config: Config = DEFAULT):
    """Eigenvalues (descending) and an orthogonal matrix whose ROWS are the
    eigenvectors, so S = P^T diag(d) P."""
    S = _as_matrix(S, "S")
    n = S.shape[0]
    if S.shape[1] != n:
        raise DimensionMismatch("matrix must be square")
    if n > config.max_eigh_dim:
        raise GuardExceeded(f"dimension {n} exceeds eigh guard {config.max_eigh_dim}")
    scale = 1.0 + (np.max(np.abs(S)) if n else 0.0)
    if n and np.max(np.abs(S - S.T)) > config.sym_tol * scale:
        raise NonSymmetric("matrix is not symmetric within tolerance")
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order].T.copy()


# ---------------------------------------------------------------------------
# dense revised primal simplex with Bland's rule


class _StdLp:
    """Standard-form LP  min c~^T z  s.t.  A~ z = rhs, z >= 0  built from a
    Polyhedron over free variables plus extra inequality blocks.

    Free x is split as x = u - w; every <=-row gets a slack.  Keeps the
    column/row bookkeeping needed to map solutions back and to enumerate
    dual-feasible bases.
    """

    def __init__(self, P: Polyhedron, c_x: np.ndarray):
        n, m = P.n, P.m
        ineq = ~P.eq_mask
        n_slack = int(np.sum(ineq))
        self.n = n
        self.ncols = 2 * n + n_slack
        self.nrows = m
        A = np.zeros((m, self.ncols))
        if m:
            A[:, :n] = P.A
            A[:, n:2 * n] = -P.A
            A[np.where(ineq)[0], 2 * n + np.arange(n_slack)] = 1.0
        self.A = A
        self.rhs = P.b.copy()
        self.c = np.concatenate([c_x, -c_x, np.zeros(n_slack)])
        self.slack_of_row = {int(r): 2 * n + j for j, r in enumerate(np.where(ineq)[0])}

    def x_from_z(self, z: np.ndarray) -> np.ndarray:
        return z[: self.n] - z[self.n: 2 * self.n]


def _simplex_phase(A, rhs, c, basis, banned, tol, max_iter):
    """Revised simplex, minimizing, Bland's rule.  Returns (status, basis, z)
    where status is 'optimal' or 'unbounded'.  basis is modified in place."""
    m, nc = A.shape
    for _ in range(max_iter):
        B = A[:, basis]
        try:
            xB = np.linalg.solve(B, rhs)
            y = np.linalg.solve(B.T, c[basis])
        except np.linalg.LinAlgError:
            raise AlgorithmFailure("singular basis in simplex")
        red = c - A.T @ y
        entering = -1
        for j in range(nc):
            if j in banned or j in basis:
                continue
            if red[j] < -tol:
                entering = j
                break
        if entering < 0:
            z = np.zeros(nc)
            z[basis] = xB
            return "optimal", z
        d = np.linalg.solve(B, A[:, entering])
        # ratio test, Bland tie-break on smallest basic variable index
        leave_pos = -1
        best = np.inf
        best_var = None
        for i in range(m):
            if d[i] > tol:
                ratio = xB[i] / d[i]
                if ratio < best - tol or (
                    abs(ratio - best) <= tol and (best_var is None or basis[i] < best_var)
                ):
                    best = ratio
                    leave_pos = i
                    best_var = basis[i]
        if leave_pos < 0:
            return "unbounded", entering
        basis[leave_pos] = entering
    raise AlgorithmFailure("simplex iteration cap exceeded")


def _solve_standard(std: _StdLp, config: Config = DEFAULT):
    """Two-phase simplex on a _StdLp.  Returns (status, z or None)."""
    m, nc = std.nrows, std.ncols
    A = std.A.copy()
    rhs = std.rhs.copy()
    neg = rhs < 0
    A[neg] *= -1.0
    rhs[neg] *= -1.0
    scale = 1.0 + max(
        float(np.max(np.abs(A))) if A.size else 0.0,
        float(np.max(np.abs(rhs))) if rhs.size else 0.0,
    )
    tol = 1e-11 * scale
    max_iter = 2000 + 50 * (m + nc)

    if m == 0:
        # feasibility is trivial; objective must be checked by the caller
        return "optimal", np.zeros(nc)

    # phase 1
    A1 = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(nc), np.ones(m)])
    basis = list(range(nc, nc + m))
    status, z1 = _simplex_phase(A1, rhs, c1, basis, set(), tol, max_iter)
    if status != "optimal":
        raise AlgorithmFailure("phase-1 LP cannot be unbounded")
    if float(c1 @ z1) > 1e-8 * scale:
        return "infeasible", None
    # drive artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= nc:
            B = A1[:, basis]
            row = np.linalg.solve(B, A1[:, :nc])[i]
            repl = -1
            for j in range(nc):
                if j not in basis and abs(row[j]) > 1e-9 * scale:
                    repl = j
                    break
            if repl >= 0:
                basis[i] = repl
    banned = set(range(nc, nc + m))

    # phase 2
    c2 = np.concatenate([std.c, np.zeros(m)])
    status, res = _simplex_phase(A1, rhs, c2, basis, banned, tol, max_iter)
    if status == "unbounded":
        return "unbounded", None
    return "optimal", res[:nc]


def lp_solve(c, P: Polyhedron, config: Config = DEFAULT) -> LpResult:
    """min c^T x over P by dense two-phase simplex with Bland's rule."""
    c = _as_vector(c, "c")
    if c.shape[0] != P.n:
        raise DimensionMismatch("objective length and polyhedron dimension differ")
    std = _StdLp(P, c)
    status, z = _solve_standard(std, config)
    if status != "optimal":
        return LpResult(status=status)
    x = std.x_from_z(z)
    ok, active = contains(P, x, max(P.membership_tol(config), 1e-7 * (1 + np.abs(x).max(initial=0.0))))
    value = float(c @ x)
    return LpResult("optimal", x, value, tuple(active))


def _feasible_point(P: Polyhedron, config: Config = DEFAULT) -> np.ndarray | None:
    res = lp_solve(np.zeros(P.n), P, config)
    return res.point if res.status == "optimal" else None


# ---------------------------------------------------------------------------
# membership / tangent cone


def contains(P: Polyhedron, x, tol: float | None = None, config: Config = DEFAULT):
    """Membership test; returns (bool, active_row_indices).

    Active rows are <=-rows at equality within tol, plus satisfied
    equality rows.
    """
    x = _as_vector(x, "x")
    if x.shape[0] != P.n:
        raise DimensionMismatch("point dimension mismatch")
    if tol is None:
        tol = P.membership_tol(config)
    if tol <= 0:
        raise DimensionMismatch("tol must be positive")
    if P.m == 0:
        return True, []
    r = P.A @ x - P.b
    inside = bool(
        np.all(r[~P.eq_mask] <= tol) and np.all(np.abs(r[P.eq_mask]) <= tol)
    )
    active = [int(i) for i in range(P.m) if abs(r[i]) <= tol]
    return inside, active


def tangent_cone(P: Polyhedron, xbar, tol: float | None = None,
                 config: Config = DEFAULT) -> ConeHRep:
    """Active-constraint cone at a feasible point: active <=-rows give
    A_i v <= 0 and every equality row gives A_i v = 0."""
    inside, active = contains(P, xbar, tol, config)
    if not inside:
        raise PointNotInSet("tangent cone requested at an infeasible point")
    rows = []
    sense = []
    for i in active:
        if not P.eq_mask[i]:
            rows.append(P.A[i])
            sense.append(LEQ)
    for i in range(P.m):
        if P.eq_mask[i]:
            rows.append(P.A[i])
            sense.append(EQ)
    if not rows:
        return ConeHRep.whole_space(P.n)
    return ConeHRep.build(np.array(rows), sense, n=P.n)


# ---------------------------------------------------------------------------
# 1-norm distance


def _dist1_lp(P: Polyhedron, x: np.ndarray) -> tuple[Polyhedron, np.ndarray]:
    """LP encoding of min ||s - x||_1 over s in P, variables (s, t)."""
    n = P.n
    eye = np.eye(n)
    A = np.vstack([
        np.hstack([eye, -eye]),
        np.hstack([-eye, -eye]),
        np.hstack([P.A, np.zeros((P.m, n))]),
    ])
    b = np.concatenate([x, -x, P.b])
    sense = [LEQ] * (2 * n) + P.sense
    c = np.concatenate([np.zeros(n), np.ones(n)])
    return Polyhedron.build(A, b, sense), c


def dist1(x, P: Polyhedron, config: Config = DEFAULT):
    """1-norm distance to P and a nearest point, via the split-variable LP."""
    x = _as_vector(x, "x")
    if x.shape[0] != P.n:
        raise DimensionMismatch("point dimension mismatch")
    lifted, c = _dist1_lp(P, x)
    res = lp_solve(c, lifted, config)
    if res.status == "infeasible":
        raise EmptyPolyhedron("dist1 of an empty polyhedron")
    if res.status != "optimal":
        raise AlgorithmFailure("dist1 LP cannot be unbounded")
    nearest = res.point[: P.n]
    value = float(np.sum(np.abs(nearest - x)))
    return value, nearest


def dist1_affine_pieces(P: Polyhedron, config: Config = DEFAULT,
                        max_bases: int = 2_000_000):
    """Affine pieces (coef, const) with dist1(x;P) = max_k (coef_k.x + const_k).

    Enumerates dual-feasible bases of the split-variable distance LP.  By
    weak duality every such basis gives a global affine minorant; the
    optimal basis for each x attains the value, so the pointwise max over
    the collected pieces reproduces the distance function exactly.
    """
    if _feasible_point(P, config) is None:
        raise EmptyPolyhedron("dist1 pieces of an empty polyhedron")
    n = P.n
    lifted, c = _dist1_lp(P, np.zeros(n))
    std = _StdLp(lifted, c)
    # rhs(x) = r0 + R x on the first 2n rows
    R = np.vstack([np.eye(n), -np.eye(n), np.zeros((P.m, n))])
    r0 = np.concatenate([np.zeros(2 * n), P.b])
    m, nc = std.nrows, std.ncols
    combos = itertools.combinations(range(nc), m)
    total = 1
    for i in range(m):
        total = total * (nc - i) // (i + 1)
    if total > max_bases:
        raise TooManyConstraints("dist1 basis enumeration too large")
    pieces = {}
    A = std.A
    chunk = 4096
    buf = []
    scale = 1.0 + float(np.max(np.abs(A)))

    def flush(buf):
        if not buf:
            return
        idx = np.array(buf)
        mats = A[:, idx].transpose(1, 0, 2)  # (batch, m, m)
        sign, logdet = np.linalg.slogdet(mats)
        good = (sign != 0) & (logdet > np.log(1e-12 * scale**m))
        if not np.any(good):
            return
        mats = mats[good]
        idx = idx[good]
        cB = std.c[idx]  # (batch, m)
        y = np.linalg.solve(np.transpose(mats, (0, 2, 1)), cB[..., None])[..., 0]
        red = std.c[None, :] - y @ A  # (batch, nc)
        feas = np.all(red >= -1e-9 * scale, axis=1)
        for yk in y[feas]:
            coef = R.T @ yk
            const = float(r0 @ yk)
            key = tuple(np.round(coef, 12)) + (round(const, 12),)
            if key not in pieces:
                pieces[key] = (coef, const)

    for comb in combos:
        buf.append(comb)
        if len(buf) == chunk:
            flush(buf)
            buf = []
    flush(buf)
    out = sorted(pieces.values(), key=lambda p: (tuple(np.round(p[0], 12)), round(p[1], 12)))
    if not out:
        raise AlgorithmFailure("no dual-feasible basis found for dist1 LP")
    return out


# ---------------------------------------------------------------------------
# affine hull


def affine_hull(P: Polyhedron, config: Config = DEFAULT):
    """A point of P and an orthonormal list of directions spanning aff(P).

    Implicit equalities among the <=-rows are detected by minimizing each
    row value over P: the row is forced tight iff its minimum equals b_i.
    """
    x0 = _feasible_point(P, config)
    if x0 is None:
        raise EmptyPolyhedron("affine hull of an empty polyhedron")
    tol = max(P.membership_tol(config), 1e-7 * (1.0 + float(np.max(np.abs(P.b)) if P.m else 0.0)))
    eq_rows = [P.A[i] for i in range(P.m) if P.eq_mask[i]]
    for i in range(P.m):
        if P.eq_mask[i]:
            continue
        res = lp_solve(P.A[i], P, config)
        if res.status == "optimal" and res.value >= P.b[i] - tol:
            eq_rows.append(P.A[i])
    if not eq_rows:
        dirs = [np.eye(P.n)[j] for j in range(P.n)]
        return x0, dirs
    E = np.array(eq_rows)
    _, s, Vt = np.linalg.svd(E)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 1.0)))
    null = Vt[rank:]
    dirs = []
    for d in null:
        nz = np.nonzero(np.abs(d) > 1e-12)[0]
        if nz.size and d[nz[0]] < 0:
            d = -d
        dirs.append(d)
    return x0, dirs


# ---------------------------------------------------------------------------
# face enumeration


def _canonical_active(P: Polyhedron, face: Polyhedron, config: Config):
    """Indices of <=-rows of P forced to equality on the face, or None if the
    face is empty."""
    if _feasible_point(face, config) is None:
        return None
    tol = max(face.membership_tol(config), 1e-7)
    out = []
    for i in range(P.m):
        if P.eq_mask[i]:
            continue
        if face.eq_mask[i]:
            out.append(i)
            continue
        res = lp_solve(face.A[i], face, config)
        if res.status == "optimal" and res.value >= face.b[i] - tol:
            out.append(i)
    return frozenset(out)


def faces(P: Polyhedron, config: Config = DEFAULT):
    """All nonempty faces as (canonical active tuple, face polyhedron).

    Faces are reached by tightening <=-rows; geometric duplicates collapse
    onto the inclusion-maximal (canonical) active set.  Sorted by active
    set size then lexicographically.
    """
    if P.m > config.max_face_rows:
        raise TooManyConstraints(
            f"{P.m} rows exceed face-enumeration guard {config.max_face_rows}")
    found: dict[frozenset, Polyhedron] = {}
    root = _canonical_active(P, P, config)
    if root is None:
        return []
    queue = [root]
    found[root] = P.tighten(root)
    while queue:
        cur = queue.pop()
        face = found[cur]
        for j in range(P.m):
            if P.eq_mask[j] or j in cur:
                continue
            child = face.tighten([j])
            canon = _canonical_active(P, child, config)
            if canon is None or canon in found:
                continue
            found[canon] = P.tighten(canon)
            queue.append(canon)
    items = sorted(found.items(), key=lambda kv: (len(kv[0]), tuple(sorted(kv[0]))))
    return [(tuple(sorted(k)), v) for k, v in items]


# ---------------------------------------------------------------------------
# convex QP: null-space active-set method with enumeration fallback


def _null_basis(E: np.ndarray, n: int) -> np.ndarray:
    if E.shape[0] == 0:
        return np.eye(n)
    _, s, Vt = np.linalg.svd(E)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 1.0)))
    return Vt[rank:].T


def _eqp(Q, c, E, e):
    """min 1/2 x^T Q x + c^T x over {E x = e} with Q PSD.

    Returns ("infeasible",), ("point", x*), or ("ray", x*, d) where d is a
    direction of linear decrease staying inside the equality set.
    """
    n = Q.shape[0]
    if E.shape[0]:
        x0, *_ = np.linalg.lstsq(E, e, rcond=None)
        if np.linalg.norm(E @ x0 - e, ord=np.inf) > 1e-8 * (1.0 + np.abs(e).max(initial=0.0)):
            return ("infeasible",)
    else:
        x0 = np.zeros(n)
    Z = _null_basis(E, n)
    if Z.shape[1] == 0:
        return ("point", x0)
    H = Z.T @ Q @ Z
    g = Z.T @ (Q @ x0 + c)
    w, V = np.linalg.eigh(0.5 * (H + H.T))
    scale = 1.0 + float(np.max(np.abs(H)))
    pos = w > 1e-10 * scale
    g_spec = V.T @ g
    t = np.zeros_like(g)
    t[pos] = -g_spec[pos] / w[pos]
    xstar = x0 + Z @ (V @ t)
    g_null = V[:, ~pos] @ g_spec[~pos] if np.any(~pos) else np.zeros_like(g)
    if np.linalg.norm(g_null) > 1e-9 * (1.0 + np.linalg.norm(g)):
        d = -(Z @ g_null)
        return ("ray", xstar, d / np.linalg.norm(d))
    return ("point", xstar)


def _max_step(P: Polyhedron, x, p, skip, tol):
    """Largest alpha with x + alpha p feasible for rows outside `skip`;
    returns (alpha, blocking_row or None)."""
    num = P.b - P.A @ x
    den = P.A @ p
    alpha = np.inf
    blocker = None
    for i in range(P.m):
        if i in skip or P.eq_mask[i]:
            continue
        if den[i] > tol:
            a = num[i] / den[i]
            if a < alpha - 1e-15:
                alpha = a
                blocker = i
    return max(alpha, 0.0), blocker


def _qp_multipliers(Q, c, P, x, working, config):
    """Least-squares multipliers on (equality rows + working set)."""
    rows = [i for i in range(P.m) if P.eq_mask[i]] + sorted(working)
    g = Q @ x + c
    if not rows:
        return rows, np.zeros(0), float(np.linalg.norm(g, ord=np.inf))
    At = P.A[rows].T
    lam, *_ = np.linalg.lstsq(At, -g, rcond=None)
    resid = float(np.linalg.norm(At @ lam + g, ord=np.inf))
    return rows, lam, resid


def _qp_enumerate(Q, c, P: Polyhedron, config: Config) -> QpResult:
    """Exhaustive KKT search over working sets; exact for convex QPs.

    A convex QP bounded below on a nonempty polyhedron attains its minimum
    at a KKT point, so if none exists the problem is unbounded.
    """
    ineq = [i for i in range(P.m) if not P.eq_mask[i]]
    if len(ineq) > config.max_polytope_rows:
        raise TooManyConstraints("QP enumeration guard exceeded")
    if _feasible_point(P, config) is None:
        return QpResult("infeasible")
    eq_rows = [i for i in range(P.m) if P.eq_mask[i]]
    n = P.n
    tol = max(P.membership_tol(config), 1e-8)
    for k in range(0, min(n, len(ineq)) + 1):
        for S in itertools.combinations(ineq, k):
            rows = eq_rows + list(S)
            E = P.A[rows] if rows else np.zeros((0, n))
            e = P.b[rows] if rows else np.zeros(0)
            res = _eqp(Q, c, E, e)
            if res[0] != "point":
                continue
            x = res[1]
            ok, _ = contains(P, x, tol)
            if not ok:
                continue
            _, lam, resid = _qp_multipliers(Q, c, P, x, set(S), config)
            if resid > 1e-7 * (1.0 + np.abs(c).max(initial=0.0) + np.abs(x).max(initial=0.0)):
                continue
            lam_ineq = lam[len(eq_rows):]
            if np.all(lam_ineq >= -1e-8):
                value = float(0.5 * x @ Q @ x + c @ x)
                _, act = contains(P, x, tol)
                return QpResult("optimal", x, value, tuple(act), lam)
    return QpResult("unbounded")


def qp_convex_solve(Q, c, P: Polyhedron, alpha: float = 0.0,
                    config: Config = DEFAULT) -> QpResult:
    """min 1/2 x^T Q x + c^T x + alpha over P for PSD Q.

    Primal active-set method seeded by an LP feasibility phase; falls back
    to exhaustive KKT enumeration if the iteration cap is hit.
    """
    Q = _as_matrix(Q, "Q")
    c = _as_vector(c, "c")
    n = P.n
    if Q.shape != (n, n) or c.shape[0] != n:
        raise DimensionMismatch("QP dimensions inconsistent")
    scale = 1.0 + float(np.max(np.abs(Q)) if Q.size else 0.0)
    if np.max(np.abs(Q - Q.T), initial=0.0) > 1e-9 * scale:
        raise NonSymmetric("QP matrix must be symmetric")
    Q = 0.5 * (Q + Q.T)
    if n and float(np.linalg.eigvalsh(Q).min()) < -1e-9 * scale:
        raise NotPSD("convex QP requires a positive semidefinite matrix")

    x = _feasible_point(P, config)
    if x is None:
        return QpResult("infeasible")
    tol = max(P.membership_tol(config), 1e-9)
    _, active0 = contains(P, x, tol)
    working = {i for i in active0 if not P.eq_mask[i]}
    eq_rows = [i for i in range(P.m) if P.eq_mask[i]]
    cap = 100 + 20 * (P.m + n)

    for _ in range(cap):
        rows = eq_rows + sorted(working)
        E = P.A[rows] if rows else np.zeros((0, n))
        e = P.b[rows] if rows else np.zeros(0)
        res = _eqp(Q, c, E, e)
        if res[0] == "infeasible":
            break  # numerically inconsistent working set: fall back
        xstar = res[1]
        p = xstar - x
        if np.linalg.norm(p, ord=np.inf) > 1e-11 * (1.0 + np.abs(x).max(initial=0.0)):
            alpha_max, blocker = _max_step(P, x, p, working, 1e-12)
            if alpha_max < 1.0:
                x = x + alpha_max * p
                if blocker is not None:
                    working.add(blocker)
                continue
            x = xstar
        if res[0] == "ray":
            d = res[2]
            alpha_max, blocker = _max_step(P, x, d, working, 1e-12)
            if blocker is None:
                return QpResult("unbounded")
            x = x + alpha_max * d
            working.add(blocker)
            continue
        rows, lam, resid = _qp_multipliers(Q, c, P, x, working, config)
        lam_w = lam[len(eq_rows):]
        if resid <= config.kkt_tol * (1.0 + np.abs(c).max(initial=0.0)) and np.all(
            lam_w >= -1e-9 * scale
        ):
            value = float(0.5 * x @ Q @ x + c @ x + alpha)
            _, act = contains(P, x, tol)
            return QpResult("optimal", x, value, tuple(act), lam)
        worst = None
        sorted_w = sorted(working)
        for j, lam_j in zip(sorted_w, lam_w):
            if lam_j < -1e-9 * scale:
                worst = j
                break
        if worst is None:
            break  # residual too large: fall back
        working.discard(worst)

    result = _qp_enumerate(Q, c, P, config)
    if result.status == "optimal":
        return QpResult(result.status, result.point,
                        float(result.value + alpha), result.active_set,
                        result.multipliers)
    return result
