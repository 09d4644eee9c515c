"""Quadratic, piecewise affine, and piecewise linear-quadratic functions.

A PLQ function is a finite list of (polyhedron, quadratic) pieces agreeing
on overlaps; its domain is the union of the piece polyhedra.  Continuity
and C1 checks are exact coefficient tests after restriction to the affine
hull of pairwise intersections (shared facets can be measure zero, so
sampling would be unsound).  First and second directional derivatives are
evaluated piecewise through tangent-cone membership, with an explicit
+inf flag outside the domain's tangent cone.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import backend
from ._config import DEFAULT, Config
from .errors import (
    DimensionMismatch,
    InconsistentPieces,
    InvalidParameter,
    NonSymmetric,
    NotUnitEigenvector,
    OutsideDomain,
    PointNotInDomain,
    SampleOutsideCone,
    TooManyPieces,
)
from .geometry import (
    ConeHRep,
    Polyhedron,
    _as_matrix,
    _as_vector,
    affine_hull,
    contains,
    dist1_affine_pieces,
    eigh_desc,
    tangent_cone,
)

# ---------------------------------------------------------------------------
# quadratic pieces


@dataclass(frozen=True)
class Quadratic:
    """q(x) = 1/2 x^T Q x + c^T x + alpha with symmetric Q."""

    Q: np.ndarray
    c: np.ndarray
    alpha: float

    @staticmethod
    def build(Q, c, alpha=0.0) -> "Quadratic":
        Q = _as_matrix(Q, "Q")
        c = _as_vector(c, "c")
        n = c.shape[0]
        if Q.shape != (n, n):
            raise DimensionMismatch("Q and c dimensions differ")
        scale = 1.0 + (np.max(np.abs(Q)) if Q.size else 0.0)
        if Q.size and np.max(np.abs(Q - Q.T)) > 1e-12 * scale:
            raise NonSymmetric("quadratic matrix must be symmetric")
        Q = 0.5 * (Q + Q.T)
        Q.setflags(write=False)
        c = c.copy()
        c.setflags(write=False)
        return Quadratic(Q, c, float(alpha))

    @staticmethod
    def affine(c, alpha=0.0) -> "Quadratic":
        c = _as_vector(c, "c")
        return Quadratic.build(np.zeros((c.shape[0], c.shape[0])), c, alpha)

    @property
    def n(self) -> int:
        return self.c.shape[0]

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x + self.c @ x + self.alpha)

    def gradient(self, x) -> np.ndarray:
        return self.Q @ np.asarray(x, dtype=float) + self.c

    def minus(self, other: "Quadratic") -> "Quadratic":
        return Quadratic.build(self.Q - other.Q, self.c - other.c,
                               self.alpha - other.alpha)

    def coeff_scale(self) -> float:
        return 1.0 + max(
            float(np.max(np.abs(self.Q))) if self.Q.size else 0.0,
            float(np.max(np.abs(self.c))) if self.c.size else 0.0,
            abs(self.alpha),
        )


def _restrict_quadratic(q: Quadratic, point: np.ndarray, dirs: list[np.ndarray]):
    """Coefficients of t -> q(point + V t) for V the column stack of dirs."""
    if dirs:
        V = np.column_stack(dirs)
    else:
        V = np.zeros((q.n, 0))
    Qr = V.T @ q.Q @ V
    cr = V.T @ (q.Q @ point + q.c)
    ar = q.value(point)
    return Qr, cr, ar


# ---------------------------------------------------------------------------
# PLQ functions


@dataclass(frozen=True)
class PLQFunction:
    """Continuous piecewise linear-quadratic function given by its pieces."""

    pieces: tuple[tuple[Polyhedron, Quadratic], ...]

    @staticmethod
    def build(pieces) -> "PLQFunction":
        pieces = tuple((P, q) for P, q in pieces)
        if not pieces:
            raise InvalidParameter("a PLQ function needs at least one piece")
        n = pieces[0][0].n
        for P, q in pieces:
            if P.n != n or q.n != n:
                raise DimensionMismatch("inconsistent piece dimensions")
        return PLQFunction(pieces)

    @property
    def n(self) -> int:
        return self.pieces[0][0].n

    @property
    def npieces(self) -> int:
        return len(self.pieces)

    def membership_tol(self, config: Config = DEFAULT) -> float:
        return max(P.membership_tol(config) for P, _ in self.pieces)

    def active_pieces(self, x, tol=None, config: Config = DEFAULT) -> list[int]:
        if tol is None:
            tol = self.membership_tol(config)
        out = []
        for i, (P, _) in enumerate(self.pieces):
            inside, _ = contains(P, x, tol, config)
            if inside:
                out.append(i)
        return out

    def kernel_data(self):
        """Flattened piece arrays for the batch-evaluation backend."""
        rows = []
        rhs = []
        is_eq = []
        row_start = [0]
        n = self.n
        for P, _ in self.pieces:
            rows.append(P.A)
            rhs.append(P.b)
            is_eq.append(P.eq_mask.astype(np.uint8))
            row_start.append(row_start[-1] + P.m)
        Q = np.stack([q.Q for _, q in self.pieces])
        c = np.stack([q.c for _, q in self.pieces])
        alpha = np.array([q.alpha for _, q in self.pieces])
        return (
            np.ascontiguousarray(np.vstack(rows)) if row_start[-1] else np.zeros((0, n)),
            np.concatenate(rhs) if row_start[-1] else np.zeros(0),
            np.concatenate(is_eq).astype(np.uint8) if row_start[-1] else np.zeros(0, np.uint8),
            np.array(row_start, dtype=np.int64),
            np.ascontiguousarray(Q),
            np.ascontiguousarray(c),
            alpha,
        )

    def eval_batch(self, pts, tol=None, config: Config = DEFAULT):
        """Vectorized evaluation; returns (values, inside_domain)."""
        if tol is None:
            tol = self.membership_tol(config)
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        data = self.kernel_data()
        return backend.plq_eval_batch(*data, float(tol), pts)


def plq_eval(f: PLQFunction, x, tol=None, config: Config = DEFAULT) -> float:
    """Value of any active piece; asserts all active pieces agree."""
    x = _as_vector(x, "x")
    act = f.active_pieces(x, tol, config)
    if not act:
        raise OutsideDomain("point outside the domain of the PLQ function")
    vals = [f.pieces[i][1].value(x) for i in act]
    ref = vals[0]
    for v in vals[1:]:
        if abs(v - ref) > config.base_tol * (1.0 + abs(ref)):
            raise InconsistentPieces(
                f"active pieces disagree: {vals} at {x}")
    return ref


@dataclass(frozen=True)
class ValidationReport:
    continuous: bool
    violations: tuple


def plq_validate(f: PLQFunction, config: Config = DEFAULT) -> ValidationReport:
    """Exact pairwise continuity check on affine hulls of intersections."""
    violations = []
    for i, j in itertools.combinations(range(f.npieces), 2):
        Pi, qi = f.pieces[i]
        Pj, qj = f.pieces[j]
        inter = Pi.intersect(Pj)
        try:
            point, dirs = affine_hull(inter, config)
        except Exception:
            continue  # empty intersection
        diff = qi.minus(qj)
        Qr, cr, ar = _restrict_quadratic(diff, point, dirs)
        scale = max(qi.coeff_scale(), qj.coeff_scale())
        tol = config.continuity_tol * scale
        worst = max(
            float(np.max(np.abs(Qr))) if Qr.size else 0.0,
            float(np.max(np.abs(cr))) if cr.size else 0.0,
            abs(ar),
        )
        if worst > tol:
            violations.append((i, j, worst))
    return ValidationReport(not violations, tuple(violations))


@dataclass(frozen=True)
class GradientCheck:
    is_C1: bool
    gradient: "PiecewiseAffineMap | None"
    violations: tuple


def gradient_pa_check(f: PLQFunction, config: Config = DEFAULT) -> GradientCheck:
    """C1 test: gradients of overlapping pieces must agree identically on
    the affine hull of the intersection.  When C1, the gradient is the
    piecewise affine map with the same pieces."""
    violations = []
    for i, j in itertools.combinations(range(f.npieces), 2):
        Pi, qi = f.pieces[i]
        Pj, qj = f.pieces[j]
        inter = Pi.intersect(Pj)
        try:
            point, dirs = affine_hull(inter, config)
        except Exception:
            continue
        dQ = qi.Q - qj.Q
        g0 = dQ @ point + (qi.c - qj.c)
        V = np.column_stack(dirs) if dirs else np.zeros((f.n, 0))
        scale = max(qi.coeff_scale(), qj.coeff_scale())
        tol = config.continuity_tol * scale
        worst = max(
            float(np.max(np.abs(g0))) if g0.size else 0.0,
            float(np.max(np.abs(dQ @ V))) if V.size else 0.0,
        )
        if worst > tol:
            violations.append((i, j, worst))
    if violations:
        return GradientCheck(False, None, tuple(violations))
    grad = PiecewiseAffineMap.build(
        [(P, q.Q, q.c) for P, q in f.pieces])
    return GradientCheck(True, grad, ())


def plq_dir1(f: PLQFunction, xbar, v, config: Config = DEFAULT) -> float:
    """One-sided directional derivative; +inf outside the domain's tangent
    cone.  Valid pieces are active pieces whose tangent cone contains v."""
    return _plq_dir(f, xbar, v, order=1, config=config)


def plq_dir2(f: PLQFunction, xbar, v, config: Config = DEFAULT) -> float:
    """Second directional derivative v^T Q_i v on qualifying pieces; +inf
    when no active piece's tangent cone contains v."""
    return _plq_dir(f, xbar, v, order=2, config=config)


def _plq_dir(f, xbar, v, order, config):
    xbar = _as_vector(xbar, "xbar")
    v = _as_vector(v, "v")
    act = f.active_pieces(xbar, None, config)
    if not act:
        raise PointNotInDomain("base point outside the PLQ domain")
    vals = []
    for i in act:
        P, q = f.pieces[i]
        cone = tangent_cone(P, xbar, None, config)
        if cone.contains_direction(v, config=config):
            if order == 1:
                vals.append(float(q.gradient(xbar) @ v))
            else:
                vals.append(float(v @ q.Q @ v))
    if not vals:
        return math.inf
    ref = vals[0]
    for w in vals[1:]:
        if abs(w - ref) > config.base_tol * (1.0 + abs(ref)):
            raise InconsistentPieces(
                f"qualifying pieces disagree on directional derivative: {vals}")
    return ref


def expansion_exactness_check(f: PLQFunction, xbar, samples,
                              config: Config = DEFAULT) -> float:
    """Max residual of f(x) = f(xbar) + f'(xbar;x-xbar) + 1/2 f''(xbar;x-xbar)
    over samples lying in an active piece at xbar."""
    xbar = _as_vector(xbar, "xbar")
    fx0 = plq_eval(f, xbar, None, config)
    act = f.active_pieces(xbar, None, config)
    worst = 0.0
    for x in np.atleast_2d(np.asarray(samples, dtype=float)):
        piece = None
        for i in act:
            inside, _ = contains(f.pieces[i][0], x, None, config)
            if inside:
                piece = i
                break
        if piece is None:
            raise SampleOutsideCone(f"sample {x} leaves every active piece")
        q = f.pieces[piece][1]
        v = x - xbar
        pred = fx0 + float(q.gradient(xbar) @ v) + 0.5 * float(v @ q.Q @ v)
        fx = plq_eval(f, x, None, config)
        resid = abs(fx - pred) / (1.0 + abs(fx))
        worst = max(worst, resid)
    return worst


# ---------------------------------------------------------------------------
# quadratic decomposition into signed squares


@dataclass(frozen=True)
class QuadraticSplit:
    """q = 1/2 [sum w+ (r.x)^2 - sum w- (r.x)^2] + c^T x + alpha."""

    positive: tuple[tuple[float, np.ndarray], ...]
    negative: tuple[tuple[float, np.ndarray], ...]
    c: np.ndarray
    alpha: float

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        s = 0.0
        for w, r in self.positive:
            s += w * float(r @ x) ** 2
        for w, r in self.negative:
            s -= w * float(r @ x) ** 2
        return 0.5 * s + float(self.c @ x) + self.alpha


def quadratic_split(q: Quadratic, config: Config = DEFAULT) -> QuadraticSplit:
    """Eigen-split of the quadratic form into positive and negative squared
    affine terms plus the affine part."""
    d, P = eigh_desc(q.Q, config)
    scale = 1.0 + (np.max(np.abs(d)) if d.size else 0.0)
    pos = tuple((float(d[i]), P[i].copy()) for i in range(q.n)
                if d[i] > 1e-12 * scale)
    neg = tuple((float(-d[i]), P[i].copy()) for i in range(q.n)
                if d[i] < -1e-12 * scale)
    return QuadraticSplit(pos, neg, q.c.copy(), q.alpha)


# ---------------------------------------------------------------------------
# piecewise affine functions


@dataclass(frozen=True)
class PAFunction:
    """Piecewise affine function, either as max-min affine families or as an
    explicit piecewise (all-affine PLQ) decomposition."""

    form: str  # "maxmin" | "piecewise"
    families: tuple[tuple[tuple[np.ndarray, float], ...], ...] | None = None
    piecewise: PLQFunction | None = None

    @staticmethod
    def maxmin(families) -> "PAFunction":
        fams = []
        n = None
        for fam in families:
            cur = []
            for a, alpha in fam:
                a = _as_vector(a, "a")
                if n is None:
                    n = a.shape[0]
                if a.shape[0] != n:
                    raise DimensionMismatch("inconsistent affine dimensions")
                cur.append((a, float(alpha)))
            if not cur:
                raise InvalidParameter("empty inner family")
            fams.append(tuple(cur))
        if not fams:
            raise InvalidParameter("empty max-min representation")
        return PAFunction("maxmin", families=tuple(fams))

    @staticmethod
    def from_plq(f: PLQFunction) -> "PAFunction":
        for _, q in f.pieces:
            if np.max(np.abs(q.Q), initial=0.0) > 1e-12:
                raise InvalidParameter("piecewise form requires affine pieces")
        return PAFunction("piecewise", piecewise=f)

    @property
    def n(self) -> int:
        if self.form == "maxmin":
            return self.families[0][0][0].shape[0]
        return self.piecewise.n

    def term_count(self) -> int:
        if self.form != "maxmin":
            raise InvalidParameter("term_count applies to max-min form")
        return sum(len(fam) for fam in self.families)

    def value(self, x, config: Config = DEFAULT) -> float:
        x = np.asarray(x, dtype=float)
        if self.form == "maxmin":
            return max(
                min(float(a @ x) + alpha for a, alpha in fam)
                for fam in self.families
            )
        return plq_eval(self.piecewise, x, None, config)


def pa_maxmin_to_piecewise(g: PAFunction, config: Config = DEFAULT) -> PAFunction:
    """Polyhedral pieces of a max-min form by selection-pattern enumeration.

    For every choice of inner minimizers (one per family) and outer
    maximizer the candidate cell is polyhedral; cells with empty interior
    are dropped, and the surviving cells cover R^n.
    """
    if g.form != "maxmin":
        raise InvalidParameter("expected a max-min form")
    if g.term_count() > config.max_maxmin_terms:
        raise TooManyPieces(
            f"{g.term_count()} affine terms exceed guard {config.max_maxmin_terms}")
    n = g.n
    fams = g.families
    I = len(fams)
    pieces = []
    seen = set()
    for selection in itertools.product(*(range(len(fam)) for fam in fams)):
        for istar in range(I):
            rows, rhs = [], []
            # chosen j_i attains the inner min of family i
            for i, fam in enumerate(fams):
                ai, bi = fam[selection[i]]
                for j, (aj, bj) in enumerate(fam):
                    if j == selection[i]:
                        continue
                    rows.append(ai - aj)
                    rhs.append(bj - bi)
            # family istar attains the outer max of the selected values
            astar, bstar = fams[istar][selection[istar]]
            for i in range(I):
                if i == istar:
                    continue
                ai, bi = fams[i][selection[i]]
                rows.append(ai - astar)
                rhs.append(bstar - bi)
            region = (
                Polyhedron.build(np.array(rows), np.array(rhs), n=n)
                if rows else Polyhedron.whole_space(n)
            )
            try:
                _, dirs = affine_hull(region, config)
            except Exception:
                continue  # empty cell
            if len(dirs) < n:
                continue  # empty interior
            key = (
                tuple(np.round(astar, 10)), round(bstar, 10),
                tuple(sorted(
                    (tuple(np.round(r, 10)), round(v, 10))
                    for r, v in zip(rows, rhs)
                )),
            )
            if key in seen:
                continue
            seen.add(key)
            pieces.append((region, Quadratic.affine(astar, bstar)))
    return PAFunction.from_plq(PLQFunction.build(pieces))


def pa_to_dc(g: PAFunction, config: Config = DEFAULT):
    """Difference-max-affine representation g = G - H.

    Uses min_j f_j = sum_j f_j - max_j sum_{k != j} f_k per inner family,
    then re-groups so that both G and H are pointwise maxima of affines.
    Returns (G_family, H_family) as lists of (coef, const).
    """
    if g.form != "maxmin":
        raise InvalidParameter("expected a max-min form")
    if g.term_count() > config.max_maxmin_terms:
        raise TooManyPieces(
            f"{g.term_count()} affine terms exceed guard {config.max_maxmin_terms}")
    n = g.n
    fams = g.families
    I = len(fams)
    sums = []       # s_i = sum_j f_ij
    max_fams = []   # M_i = max_j sum_{k != j} f_ik
    for fam in fams:
        a_tot = np.sum([a for a, _ in fam], axis=0)
        b_tot = sum(b for _, b in fam)
        sums.append((a_tot, b_tot))
        max_fams.append([(a_tot - a, b_tot - b) for a, b in fam])

    def _sum_of_maxes(indices):
        terms = [(np.zeros(n), 0.0)]
        for i in indices:
            terms = [
                (a + ai, b + bi)
                for a, b in terms
                for ai, bi in max_fams[i]
            ]
        return terms

    H = _sum_of_maxes(range(I))
    G = []
    for i in range(I):
        si_a, si_b = sums[i]
        for a, b in _sum_of_maxes([k for k in range(I) if k != i]):
            G.append((si_a + a, si_b + b))

    def _dedupe(fam):
        out = {}
        for a, b in fam:
            key = tuple(np.round(a, 12)) + (round(b, 12),)
            out.setdefault(key, (a, float(b)))
        return [out[k] for k in sorted(out)]

    return _dedupe(G), _dedupe(H)


# ---------------------------------------------------------------------------
# elementary representation of a PLQ function


@dataclass(frozen=True)
class BuildingBlock:
    """SquaredPCA: max(a.x+alpha,0)^2, SquaredAffine: (a.x+alpha)^2,
    Affine: a.x+alpha."""

    kind: str
    a: np.ndarray
    alpha: float

    def value(self, x) -> float:
        t = float(self.a @ np.asarray(x, dtype=float)) + self.alpha
        if self.kind == "SquaredPCA":
            return max(t, 0.0) ** 2
        if self.kind == "SquaredAffine":
            return t * t
        return t

    def value_batch(self, pts) -> np.ndarray:
        t = pts @ self.a + self.alpha
        if self.kind == "SquaredPCA":
            return np.maximum(t, 0.0) ** 2
        if self.kind == "SquaredAffine":
            return t * t
        return t


@dataclass(frozen=True)
class SignedSum:
    """One inner term: a fixed signed sum of building blocks."""

    blocks: tuple[tuple[int, BuildingBlock], ...]

    def value(self, x) -> float:
        return sum(s * blk.value(x) for s, blk in self.blocks)

    def value_batch(self, pts) -> np.ndarray:
        out = np.zeros(pts.shape[0])
        for s, blk in self.blocks:
            out += s * blk.value_batch(pts)
        return out


@dataclass(frozen=True)
class ElementaryRepresentation:
    """f(x) = min_i [ q_i(x) + phi_i(x) ], phi_i = max over inner terms,
    with phi_i vanishing exactly on the i-th piece."""

    source: PLQFunction
    base: tuple[Quadratic, ...]
    inner: tuple[tuple[SignedSum, ...], ...]
    lipschitz: tuple[float, ...]

    def phi(self, i: int, x) -> float:
        terms = self.inner[i]
        if not terms:
            return 0.0
        return max(t.value(x) for t in terms)

    def phi_batch(self, i: int, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        terms = self.inner[i]
        if not terms:
            return np.zeros(pts.shape[0])
        vals = np.stack([t.value_batch(pts) for t in terms])
        return vals.max(axis=0)

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return min(
            q.value(x) + self.phi(i, x) for i, q in enumerate(self.base)
        )

    def value_batch(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        vals = []
        for i, q in enumerate(self.base):
            qv = 0.5 * np.einsum("ki,ij,kj->k", pts, q.Q, pts) + pts @ q.c + q.alpha
            vals.append(qv + self.phi_batch(i, pts))
        return np.stack(vals).min(axis=0)


_SQRT_HALF = math.sqrt(0.5)


def _pca_product_terms(ell, h):
    """Signed sums expressing max(ell,0)*max(h,0) for affine ell, h.

    Pointwise, 2 (l)+ (h)+ = max{ ((l+h)+)^2 - ((l)+)^2 - ((h)+)^2,
    -((h)+)^2, -((l)+)^2 }; the 1/2 factor is absorbed by scaling every
    affine by sqrt(1/2) before squaring.
    """
    (la, lb), (ha, hb) = ell, h
    blk = lambda a, b: BuildingBlock("SquaredPCA", _SQRT_HALF * a, _SQRT_HALF * b)
    b_sum = blk(la + ha, lb + hb)
    b_l = blk(la, lb)
    b_h = blk(ha, hb)
    return (
        SignedSum(((1, b_sum), (-1, b_l), (-1, b_h))),
        SignedSum(((-1, b_h),)),
        SignedSum(((-1, b_l),)),
    )


def _abs_sum_family(rows, consts):
    """Affine family whose pointwise max is sum_t |rows_t . x + consts_t|.

    Rows that are identically zero contribute |const| to every member.
    """
    n = rows.shape[1] if rows.size else len(consts) and 0
    live = []
    base_const = 0.0
    for r, c in zip(rows, consts):
        if np.max(np.abs(r), initial=0.0) > 1e-14:
            live.append((r, c))
        else:
            base_const += abs(c)
    out = []
    for signs in itertools.product((1.0, -1.0), repeat=len(live)):
        a = np.zeros(rows.shape[1])
        b = base_const
        for s, (r, c) in zip(signs, live):
            a = a + s * r
            b += s * c
        out.append((a, b))
    if not out:
        out.append((np.zeros(rows.shape[1]), base_const))
    return out


def elementary_representation(f: PLQFunction,
                              config: Config = DEFAULT) -> ElementaryRepresentation:
    """Min-max representation of a continuous PLQ function from squared
    plus-composite-affine building blocks.

    The gap function of piece i multiplies the 1-norm distance to the
    piece by a gradient-difference bound plus a quadratic distance term;
    both factors are expanded into plus-composite-affine families (the
    distance via dual-feasible LP bases) and their product into signed
    squared-PCA sums.
    """
    if f.npieces > config.max_rep_pieces:
        raise TooManyPieces(
            f"{f.npieces} pieces exceed guard {config.max_rep_pieces}")
    for P, _ in f.pieces:
        if P.m > config.max_rep_rows:
            raise TooManyPieces(
                f"{P.m} rows exceed per-piece guard {config.max_rep_rows}")
    report = plq_validate(f, config)
    if not report.continuous:
        raise InconsistentPieces("representation requires a continuous PLQ input")

    I = f.npieces
    spectral = {}
    for i, j in itertools.combinations(range(I), 2):
        d, _ = eigh_desc(f.pieces[i][1].Q - f.pieces[j][1].Q, config)
        spectral[(i, j)] = spectral[(j, i)] = float(
            np.max(np.abs(d)) if d.size else 0.0)
    dist_fams = [dist1_affine_pieces(P, config) for P, _ in f.pieces]

    inner_all = []
    lips = []
    for i in range(I):
        L_i = max((spectral[(j, i)] for j in range(I) if j != i), default=0.0)
        lips.append(L_i)
        qi = f.pieces[i][1]
        terms: list[SignedSum] = []
        for j in range(I):
            if j == i:
                continue
            qj = f.pieces[j][1]
            # gradient difference 1-norm: sum_t |(Qj-Qi)_t . x + (cj-ci)_t|
            grad_fam = _abs_sum_family(qj.Q - qi.Q, qj.c - qi.c)
            # g_ji = grad-diff norm + (3 L_i / 2) dist1(x; P_i)
            g_fam = [
                (ga + 1.5 * L_i * da, gb + 1.5 * L_i * db)
                for ga, gb in grad_fam
                for da, db in dist_fams[i]
            ]
            for ell in dist_fams[i]:
                for h in g_fam:
                    terms.extend(_pca_product_terms(ell, h))
        inner_all.append(tuple(terms))
    return ElementaryRepresentation(
        f,
        tuple(q for _, q in f.pieces),
        tuple(inner_all),
        tuple(lips),
    )


# ---------------------------------------------------------------------------
# vector piecewise affine maps


@dataclass(frozen=True)
class PiecewiseAffineMap:
    """Vector PA map given piecewise: on piece (P, B, q) the value is Bx+q."""

    pieces: tuple[tuple[Polyhedron, np.ndarray, np.ndarray], ...]

    @staticmethod
    def build(pieces) -> "PiecewiseAffineMap":
        out = []
        for P, B, q in pieces:
            B = _as_matrix(B, "B")
            q = _as_vector(q, "q")
            if B.shape[0] != q.shape[0] or B.shape[1] != P.n:
                raise DimensionMismatch("piece map dimensions inconsistent")
            out.append((P, B, q))
        if not out:
            raise InvalidParameter("a piecewise affine map needs pieces")
        return PiecewiseAffineMap(tuple(out))

    @property
    def n_in(self) -> int:
        return self.pieces[0][0].n

    @property
    def n_out(self) -> int:
        return self.pieces[0][1].shape[0]

    def active(self, w, config: Config = DEFAULT) -> list[int]:
        return [
            i for i, (P, _, _) in enumerate(self.pieces)
            if contains(P, w, None, config)[0]
        ]

    def value(self, w, config: Config = DEFAULT) -> np.ndarray:
        w = _as_vector(w, "w")
        act = self.active(w, config)
        if not act:
            raise PointNotInDomain("point outside the map domain")
        vals = [self.pieces[i][1] @ w + self.pieces[i][2] for i in act]
        ref = vals[0]
        for v in vals[1:]:
            if np.max(np.abs(v - ref)) > config.base_tol * (1.0 + np.max(np.abs(ref))):
                raise InconsistentPieces("active map pieces disagree")
        return ref

    def dir(self, w, v, config: Config = DEFAULT) -> np.ndarray:
        """Directional derivative via tangent-cone qualified pieces."""
        w = _as_vector(w, "w")
        v = _as_vector(v, "v")
        act = self.active(w, config)
        if not act:
            raise PointNotInDomain("point outside the map domain")
        vals = []
        for i in act:
            P, B, _ = self.pieces[i]
            cone = tangent_cone(P, w, None, config)
            if cone.contains_direction(v, config=config):
                vals.append(B @ v)
        if not vals:
            raise PointNotInDomain("direction leaves the map domain")
        ref = vals[0]
        for u in vals[1:]:
            if np.max(np.abs(u - ref)) > config.base_tol * (1.0 + np.max(np.abs(ref))):
                raise InconsistentPieces("qualifying map pieces disagree")
        return ref


def composite_dir2(F: PiecewiseAffineMap, Phi: PiecewiseAffineMap, wbar, v,
                   config: Config = DEFAULT) -> float:
    """Second directional derivative of f∘Phi when F = grad f is PA and Phi
    is PA: Phi'(w;v)^T F'(Phi(w); Phi'(w;v)), the Phi'' term vanishing."""
    wbar = _as_vector(wbar, "wbar")
    v = _as_vector(v, "v")
    u = Phi.dir(wbar, v, config)
    z = Phi.value(wbar, config)
    Fu = F.dir(z, u, config)
    return float(u @ Fu)


# ---------------------------------------------------------------------------
# the unit-ball piecewise quadratic example


@dataclass(frozen=True)
class BallExample:
    """f(x) = 1/2 [ max(|x|^2, 1) - x^T Q x ]: a PQ (not PLQ) function with
    closed-form first/second directional derivatives and second
    subderivative at unit stationary points."""

    Q: np.ndarray

    @staticmethod
    def build(Q) -> "BallExample":
        Q = _as_matrix(Q, "Q")
        scale = 1.0 + (np.max(np.abs(Q)) if Q.size else 0.0)
        if np.max(np.abs(Q - Q.T), initial=0.0) > 1e-12 * scale:
            raise NonSymmetric("ball example needs a symmetric matrix")
        Q = 0.5 * (Q + Q.T)
        Q.setflags(write=False)
        return BallExample(Q)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    def value(self, x) -> float:
        x = _as_vector(x, "x")
        return 0.5 * (max(float(x @ x), 1.0) - float(x @ self.Q @ x))

    def dir1(self, x, d, tol=1e-12) -> float:
        x = _as_vector(x, "x")
        d = _as_vector(d, "d")
        nx = float(x @ x)
        xQd = float(x @ self.Q @ d)
        if nx > 1.0 + tol:
            return float(x @ d) - xQd
        if nx < 1.0 - tol:
            return -xQd
        return max(float(x @ d), 0.0) - xQd

    def dir2(self, x, d, tol=1e-12) -> float:
        x = _as_vector(x, "x")
        d = _as_vector(d, "d")
        nx = float(x @ x)
        dQd = float(d @ self.Q @ d)
        on_sphere = abs(nx - 1.0) <= tol
        if nx > 1.0 + tol or (on_sphere and float(x @ d) >= 0.0):
            return float(d @ d) - dQd
        return -dQd

    def unit_stationary(self, xbar, tol=1e-9):
        """Eigenvector criterion at a unit vector: stationary iff Q xbar =
        beta xbar with beta in [0, 1].  Returns (bool, beta or None)."""
        xbar = _as_vector(xbar, "xbar")
        if abs(float(xbar @ xbar) - 1.0) > tol:
            raise NotUnitEigenvector("point is not on the unit sphere")
        beta = float(xbar @ self.Q @ xbar)
        resid = float(np.max(np.abs(self.Q @ xbar - beta * xbar)))
        if resid > tol * (1.0 + abs(beta)):
            return False, None
        if -tol <= beta <= 1.0 + tol:
            return True, beta
        return False, None

    def d2_sub(self, xbar, d, tol=1e-9) -> float:
        """Second subderivative at zero along d for a unit eigenvector base
        point with eigenvalue in [0,1]: beta |d|^2 - d^T Q d."""
        ok, beta = self.unit_stationary(xbar, tol)
        if not ok:
            raise NotUnitEigenvector(
                "second subderivative formula needs a unit eigenvector with "
                "eigenvalue in [0, 1]")
        d = _as_vector(d, "d")
        return beta * float(d @ d) - float(d @ self.Q @ d)

    def descent_path(self, eps: float) -> np.ndarray:
        """The descent curve refuting local minimality at xbar = (0, -1) for
        diagonal 2x2 Q with 0 < Q22 < Q11 < 1."""
        if self.n != 2:
            raise InvalidParameter("descent path is defined for the 2x2 case")
        Q11, Q22 = self.Q[0, 0], self.Q[1, 1]
        if abs(self.Q[0, 1]) > 1e-12 or not (0.0 < Q22 < Q11 < 1.0):
            raise InvalidParameter(
                "descent path needs diagonal Q with 0 < Q22 < Q11 < 1")
        if not (0.0 < eps < 1.0):
            raise InvalidParameter("eps must lie in (0, 1)")
        return np.array([
            math.sqrt(2.0 * eps / (1.0 + Q11 / Q22)),
            -math.sqrt(1.0 - eps),
        ])


def ball_example(Q) -> BallExample:
    return BallExample.build(Q)
