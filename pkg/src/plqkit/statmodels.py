"""Statistical estimation front end: losses, sparsity surrogates, piecewise
affine models, composite objectives, and the second-order condition
checkers for the composite absolute-value program.

Losses are realized as validated univariate PLQ functions.  Sparsity
surrogates come in a separable capped-l1 form and the nonseparable exact
top-K form; their one-sided directional derivatives are computed exactly
from the piecewise affine ray structure.  SCAD and MCP are registered as
extension names without formulas.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._config import DEFAULT, Config
from .copositivity import (
    COPOSITIVE,
    NOT_COPOSITIVE,
    STRICTLY_COPOSITIVE,
    copositive_on_cone,
    strictly_copositive_on_cone,
)
from .errors import (
    DimensionMismatch,
    InvalidParameter,
    NotCompositeConvexPA,
    SecondOrderUnavailable,
    TooManyPieces,
)
from .geometry import ConeHRep, Polyhedron, _as_matrix, _as_vector, contains, lp_solve, tangent_cone
from .plq import PiecewiseAffineMap, PLQFunction, Quadratic

# ---------------------------------------------------------------------------
# losses


def _interval(lo=None, hi=None) -> Polyhedron:
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


@dataclass(frozen=True)
class Loss:
    kind: str
    param: float
    plq: PLQFunction

    @staticmethod
    def huber(K: float) -> "Loss":
        """Quadratic inside [-K, K], linear growth 2K|t| - K^2 outside."""
        if not K > 0:
            raise InvalidParameter("Huber truncation K must be positive")
        pieces = [
            (_interval(hi=-K), Quadratic.build([[0.0]], [-2.0 * K], -K * K)),
            (_interval(lo=-K, hi=K), Quadratic.build([[2.0]], [0.0], 0.0)),
            (_interval(lo=K), Quadratic.build([[0.0]], [2.0 * K], -K * K)),
        ]
        return Loss("huber", float(K), PLQFunction.build(pieces))

    @staticmethod
    def margin(eps: float) -> "Loss":
        """max(|t| - eps, 0), the soft-margin loss."""
        if not eps > 0:
            raise InvalidParameter("margin eps must be positive")
        pieces = [
            (_interval(hi=-eps), Quadratic.affine([-1.0], -eps)),
            (_interval(lo=-eps, hi=eps), Quadratic.affine([0.0], 0.0)),
            (_interval(lo=eps), Quadratic.affine([1.0], -eps)),
        ]
        return Loss("margin", float(eps), PLQFunction.build(pieces))

    @staticmethod
    def truncated_hinge(s: float) -> "Loss":
        """Hinge max(1-t, 0) truncated at level 1-s for some s <= 0."""
        if not s <= 0:
            raise InvalidParameter("truncation point s must be <= 0")
        pieces = [
            (_interval(hi=s), Quadratic.affine([0.0], 1.0 - s)),
            (_interval(lo=s, hi=1.0), Quadratic.affine([-1.0], 1.0)),
            (_interval(lo=1.0), Quadratic.affine([0.0], 0.0)),
        ]
        return Loss("truncated-hinge", float(s), PLQFunction.build(pieces))

    @staticmethod
    def build(kind: str, param: float) -> "Loss":
        kind = kind.lower()
        if kind == "huber":
            return Loss.huber(param)
        if kind == "margin":
            return Loss.margin(param)
        if kind in ("truncated-hinge", "hinge"):
            return Loss.truncated_hinge(param)
        raise InvalidParameter(f"unknown loss kind {kind!r}")

    def value(self, t: float) -> float:
        t = float(t)
        if self.kind == "huber":
            K = self.param
            return t * t if abs(t) <= K else K * K + 2.0 * K * (abs(t) - K)
        if self.kind == "margin":
            return max(abs(t) - self.param, 0.0)
        s = self.param
        if t >= 1.0:
            return 0.0
        if t >= s:
            return 1.0 - t
        return 1.0 - s

    def deriv(self, t: float) -> float:
        """Pointwise derivative where it exists (kink values use the case
        formula's boundary convention)."""
        t = float(t)
        if self.kind == "huber":
            K = self.param
            return 2.0 * t if abs(t) <= K else 2.0 * K * math.copysign(1.0, t)
        raise InvalidParameter("closed-form derivative is kept for Huber only")

    def deriv_double_max(self, t: float) -> float:
        """Huber derivative as 2[max(0, -K-t) - max(-t, -K)]."""
        if self.kind != "huber":
            raise InvalidParameter("identity applies to the Huber loss")
        K = self.param
        return 2.0 * (max(0.0, -K - t) - max(-t, -K))

    def dir1(self, t: float, s: float) -> float:
        """Exact one-sided derivative of the loss at t along s."""
        t, s = float(t), float(s)
        if self.kind == "huber":
            K = self.param
            if abs(t) < K:
                return 2.0 * t * s
            if t >= K:
                return 2.0 * t * s if (t == K and s < 0) else 2.0 * K * s
            return 2.0 * t * s if (t == -K and s > 0) else -2.0 * K * s
        if self.kind == "margin":
            e = self.param
            if abs(t) < e:
                return 0.0
            if t > e:
                return s
            if t < -e:
                return -s
            if t == e:
                return max(s, 0.0)
            return max(-s, 0.0)
        sv = self.param
        if sv < t < 1.0:
            return -s
        if t > 1.0 or t < sv:
            return 0.0
        if t == 1.0:
            return -min(s, 0.0) * 0.0 - (s if s < 0 else 0.0)
        # t == sv: flat to the left, slope -1 to the right
        return -s if s > 0 else 0.0

    def dderiv_dir(self, t: float, s: float) -> float:
        """Directional derivative of the (piecewise affine) Huber derivative."""
        if self.kind != "huber":
            raise SecondOrderUnavailable(
                "second-order information requires a C1 PLQ loss")
        K = self.param
        if abs(t) < K:
            return 2.0 * s
        if t == K:
            return 2.0 * s if s < 0 else 0.0
        if t == -K:
            return 2.0 * s if s > 0 else 0.0
        return 0.0


def loss_eval(loss: Loss, t: float) -> float:
    return loss.value(t)


# ---------------------------------------------------------------------------
# sparsity functions


_SPARSITY_EXTENSIONS: dict[str, object] = {"scad": None, "mcp": None}


def register_sparsity(name: str, factory) -> None:
    """Extension hook for additional surrogate penalties (SCAD, MCP, ...)."""
    _SPARSITY_EXTENSIONS[name.lower()] = factory


@dataclass(frozen=True)
class Sparsity:
    kind: str  # "capped-l1" (separable) | "exact-topk" (nonseparable)
    tau: float = 0.0
    K: int = 0

    @staticmethod
    def capped_l1(tau: float) -> "Sparsity":
        if not tau > 0:
            raise InvalidParameter("capped-l1 needs tau > 0")
        return Sparsity("capped-l1", tau=float(tau))

    @staticmethod
    def exact_topk(K: int) -> "Sparsity":
        if K < 0:
            raise InvalidParameter("exact-topk needs K >= 0")
        return Sparsity("exact-topk", K=int(K))

    @staticmethod
    def build(kind: str, **kw) -> "Sparsity":
        kind = kind.lower()
        if kind == "capped-l1":
            return Sparsity.capped_l1(kw["tau"])
        if kind == "exact-topk":
            return Sparsity.exact_topk(kw["K"])
        if kind in _SPARSITY_EXTENSIONS:
            factory = _SPARSITY_EXTENSIONS[kind]
            if factory is None:
                raise InvalidParameter(
                    f"{kind} is registered by name only; supply its formula "
                    f"through register_sparsity")
            return factory(**kw)
        raise InvalidParameter(f"unknown sparsity kind {kind!r}")

    def value(self, w) -> float:
        w = _as_vector(w, "w")
        if self.kind == "capped-l1":
            return float(np.sum(np.minimum(1.0, np.abs(w) / self.tau)))
        a = np.sort(np.abs(w))[::-1]
        return float(np.sum(a) - np.sum(a[: self.K]))

    def _ray_breakpoints(self, w, v):
        """Positive parameters where the affine ray structure can change."""
        w = np.asarray(w, float)
        v = np.asarray(v, float)
        pts = []
        for wi, vi in zip(w, v):
            if abs(vi) > 1e-300:
                t = -wi / vi
                if t > 1e-14:
                    pts.append(t)
        if self.kind == "capped-l1":
            for wi, vi in zip(w, v):
                # |wi + t vi| crosses tau
                for target in (self.tau, -self.tau):
                    if abs(vi) > 1e-300:
                        t = (target - wi) / vi
                        if t > 1e-14:
                            pts.append(t)
        else:
            m = len(w)
            for i in range(m):
                for j in range(i + 1, m):
                    # |wi + t vi| = |wj + t vj| under either sign pairing
                    for s in (1.0, -1.0):
                        den = v[i] - s * v[j]
                        if abs(den) > 1e-300:
                            t = (s * w[j] - w[i]) / den
                            if t > 1e-14:
                                pts.append(t)
        return pts

    def dir1(self, w, v) -> float:
        """Exact one-sided derivative: piecewise affine functions are exactly
        affine along the ray before the first breakpoint."""
        w = _as_vector(w, "w")
        v = _as_vector(v, "v")
        pts = self._ray_breakpoints(w, v)
        tau = 0.5 * min(pts) if pts else 1.0
        tau = min(tau, 1.0)
        return (self.value(w + tau * v) - self.value(w)) / tau


def sparsity_eval(sp: Sparsity, w) -> float:
    return sp.value(w)


# ---------------------------------------------------------------------------
# piecewise affine statistical model


@dataclass(frozen=True)
class PAModel:
    """m(x; theta) = max_i (a_i.x + alpha_i) - max_i (b_i.x + beta_i)."""

    a: np.ndarray      # (k1, d)
    alpha: np.ndarray  # (k1,)
    b: np.ndarray      # (k2, d)
    beta: np.ndarray   # (k2,)

    @staticmethod
    def build(a, alpha, b, beta) -> "PAModel":
        a = _as_matrix(np.atleast_2d(a), "a")
        b = _as_matrix(np.atleast_2d(b), "b")
        alpha = _as_vector(alpha, "alpha")
        beta = _as_vector(beta, "beta")
        if a.shape[0] != alpha.shape[0] or b.shape[0] != beta.shape[0]:
            raise DimensionMismatch("family sizes disagree")
        if a.shape[0] < 1 or b.shape[0] < 1:
            raise InvalidParameter("both affine families need at least one member")
        if a.shape[1] != b.shape[1]:
            raise DimensionMismatch("input dimensions disagree")
        return PAModel(a, alpha, b, beta)

    @property
    def d(self) -> int:
        return self.a.shape[1]

    @property
    def k1(self) -> int:
        return self.a.shape[0]

    @property
    def k2(self) -> int:
        return self.b.shape[0]

    @property
    def n_params(self) -> int:
        return (self.k1 + self.k2) * (self.d + 1)

    def theta(self) -> np.ndarray:
        return np.concatenate([
            np.hstack([self.a, self.alpha[:, None]]).ravel(),
            np.hstack([self.b, self.beta[:, None]]).ravel(),
        ])

    @staticmethod
    def from_theta(theta, k1: int, k2: int, d: int) -> "PAModel":
        theta = _as_vector(theta, "theta")
        if theta.shape[0] != (k1 + k2) * (d + 1):
            raise DimensionMismatch("theta length disagrees with (k1,k2,d)")
        top = theta[: k1 * (d + 1)].reshape(k1, d + 1)
        bot = theta[k1 * (d + 1):].reshape(k2, d + 1)
        return PAModel.build(top[:, :d], top[:, d], bot[:, :d], bot[:, d])

    def value(self, x) -> float:
        x = _as_vector(x, "x")
        return float(np.max(self.a @ x + self.alpha) - np.max(self.b @ x + self.beta))

    def theta_functionals(self, x):
        """Linear functionals on theta-space: m(x; .) = max G - max H."""
        x = _as_vector(x, "x")
        d = self.d
        p = self.n_params
        feat = np.concatenate([x, [1.0]])
        G, H = [], []
        for i in range(self.k1):
            phi = np.zeros(p)
            phi[i * (d + 1): (i + 1) * (d + 1)] = feat
            G.append((phi, 0.0))
        off = self.k1 * (d + 1)
        for i in range(self.k2):
            psi = np.zeros(p)
            psi[off + i * (d + 1): off + (i + 1) * (d + 1)] = feat
            H.append((psi, 0.0))
        return G, H

    def dir_theta(self, x, v, tol=1e-10) -> float:
        """One-sided derivative of theta -> m(x; theta) along v."""
        x = _as_vector(x, "x")
        v = _as_vector(v, "v")
        G, H = self.theta_functionals(x)
        th = self.theta()
        gv = np.array([phi @ th for phi, _ in G])
        hv = np.array([psi @ th for psi, _ in H])
        gt = gv.max()
        ht = hv.max()
        scale = 1.0 + max(abs(gt), abs(ht))
        dg = max(
            (G[i][0] @ v) for i in range(len(G)) if gv[i] >= gt - tol * scale)
        dh = max(
            (H[i][0] @ v) for i in range(len(H)) if hv[i] >= ht - tol * scale)
        return float(dg - dh)


def pa_model_eval(model: PAModel, x) -> float:
    return model.value(x)


def pa_model_as_pa_in_theta(model: PAModel, x):
    """The theta-space PA function as a max-min family (difference of two
    max-affine families folded into max_i min_j (g_i - h_j))."""
    from .plq import PAFunction

    G, H = model.theta_functionals(x)
    families = [
        [(g - h, gc - hc) for h, hc in H]
        for g, gc in G
    ]
    return PAFunction.maxmin(families), (G, H)


# ---------------------------------------------------------------------------
# link functions for the exponential-family objective


_LINKS = {
    "square": (lambda t: t * t, lambda t: 2.0 * t),
    "logistic-log": (lambda t: math.log1p(math.exp(t)) if t < 40 else t,
                     lambda t: 1.0 / (1.0 + math.exp(-t))),
    "exp": (math.exp, math.exp),
}


# ---------------------------------------------------------------------------
# composite objectives


@dataclass(frozen=True)
class CompositeObjective:
    """Loss-composite or exponential-family estimation objective over the
    parameters of a PA model, plus an optional sparsity penalty on the
    flattened parameter vector."""

    X: np.ndarray  # (N, d)
    y: np.ndarray  # (N,)
    model: PAModel
    loss: Loss | None = None
    link: str | None = None
    sparsity: Sparsity | None = None
    gamma: float = 0.0

    @staticmethod
    def build(X, y, model: PAModel, loss=None, link=None,
              sparsity=None, gamma=0.0) -> "CompositeObjective":
        X = _as_matrix(np.atleast_2d(X), "X")
        y = _as_vector(y, "y")
        if X.shape[0] != y.shape[0]:
            raise DimensionMismatch("X rows and y length differ")
        if X.shape[1] != model.d:
            raise DimensionMismatch("data dimension and model dimension differ")
        if (loss is None) == (link is None):
            raise InvalidParameter("exactly one of loss or link must be given")
        if link is not None and link not in _LINKS:
            raise InvalidParameter(f"unknown link {link!r}")
        if gamma < 0:
            raise InvalidParameter("gamma must be nonnegative")
        if gamma > 0 and sparsity is None:
            raise InvalidParameter("gamma > 0 needs a sparsity function")
        return CompositeObjective(X, y, model, loss, link, sparsity, float(gamma))

    @property
    def N(self) -> int:
        return self.X.shape[0]


class ObjectiveOracles:
    """Evaluation plus first/second directional derivative oracles in the
    model parameters."""

    def __init__(self, co: CompositeObjective):
        self.co = co

    def _model_at(self, theta) -> PAModel:
        m = self.co.model
        return PAModel.from_theta(theta, m.k1, m.k2, m.d)

    def value(self, theta) -> float:
        co = self.co
        model = self._model_at(theta)
        # fixed-tree pairwise reduction keeps the sum order deterministic
        terms = []
        for xi, yi in zip(co.X, co.y):
            mi = model.value(xi)
            if co.loss is not None:
                terms.append(co.loss.value(yi - mi))
            else:
                b, _ = _LINKS[co.link]
                terms.append(yi * mi + b(mi))
        total = _pairwise_sum(terms) / co.N
        if co.gamma > 0:
            total += co.gamma * co.sparsity.value(np.asarray(theta, float))
        return float(total)

    def dir1(self, theta, v) -> float:
        co = self.co
        theta = _as_vector(theta, "theta")
        v = _as_vector(v, "v")
        model = self._model_at(theta)
        terms = []
        for xi, yi in zip(co.X, co.y):
            dm = model.dir_theta(xi, v)
            mi = model.value(xi)
            if co.loss is not None:
                terms.append(co.loss.dir1(yi - mi, -dm))
            else:
                _, db = _LINKS[co.link]
                terms.append((yi + db(mi)) * dm)
        total = _pairwise_sum(terms) / co.N
        if co.gamma > 0:
            total += co.gamma * co.sparsity.dir1(theta, v)
        return float(total)

    def dir2(self, theta, v) -> float:
        """Second directional derivative through the composite chain rule;
        available when the outer loss is C1 PLQ (Huber or square link).
        Piecewise affine penalty terms contribute nothing."""
        co = self.co
        theta = _as_vector(theta, "theta")
        v = _as_vector(v, "v")
        model = self._model_at(theta)
        if co.loss is not None and co.loss.kind != "huber":
            raise SecondOrderUnavailable(
                f"loss {co.loss.kind!r} is not C1; its second-order theory "
                f"is out of reach of the composite formula")
        if co.link is not None and co.link != "square":
            raise SecondOrderUnavailable(
                f"link {co.link!r} is not piecewise linear-quadratic")
        terms = []
        for xi, yi in zip(co.X, co.y):
            dm = model.dir_theta(xi, v)
            mi = model.value(xi)
            if co.loss is not None:
                u = -dm
                terms.append(u * co.loss.dderiv_dir(yi - mi, u))
            else:
                terms.append(2.0 * dm * dm)
        return float(_pairwise_sum(terms) / co.N)


def _pairwise_sum(terms):
    vals = list(terms)
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def assemble_objective(co: CompositeObjective) -> ObjectiveOracles:
    return ObjectiveOracles(co)


# ---------------------------------------------------------------------------
# stationarity certificate for convex outer o PA inner objectives


def convex_pa_certificate(co: CompositeObjective, wbar,
                          config: Config = DEFAULT, tol=1e-9):
    """d-stationarity check for the exponential-family objective, whose
    outer function is convex and inner map is PA in the parameters; any
    d-stationary point is a local minimizer.

    Returns ("LocalMin", None) or ("NotStationary", direction).
    """
    if co.link is None:
        raise NotCompositeConvexPA("certificate needs the link (convex outer) form")
    if co.gamma > 0:
        raise NotCompositeConvexPA(
            "a nonconvex sparsity term breaks the convex-composite structure")
    wbar = _as_vector(wbar, "wbar")
    model0 = co.model
    model = PAModel.from_theta(wbar, model0.k1, model0.k2, model0.d)
    _, db = _LINKS[co.link]
    p = wbar.shape[0]

    # per-datum tied families and outer weights
    data = []
    npatterns = 1
    for xi, yi in zip(co.X, co.y):
        G, H = model.theta_functionals(xi)
        gv = np.array([g @ wbar for g, _ in G])
        hv = np.array([h @ wbar for h, _ in H])
        sc = 1.0 + max(abs(gv.max()), abs(hv.max()))
        Tg = [i for i in range(len(G)) if gv[i] >= gv.max() - tol * sc]
        Th = [i for i in range(len(H)) if hv[i] >= hv.max() - tol * sc]
        mi = float(gv.max() - hv.max())
        data.append((G, H, Tg, Th, yi + db(mi)))
        npatterns *= len(Tg) * len(Th)
        if npatterns > 4096:
            raise TooManyPieces("too many tied selection patterns")

    box = Polyhedron.build(np.vstack([np.eye(p), -np.eye(p)]), np.ones(2 * p))
    choices = [
        [(jg, jh) for jg in Tg for jh in Th]
        for _, _, Tg, Th, _ in data
    ]
    for pattern in itertools.product(*choices):
        rows, rhs = [], []
        grad = np.zeros(p)
        for (G, H, Tg, Th, wgt), (jg, jh) in zip(data, pattern):
            # cone where the chosen functionals attain the directional max
            for j2 in Tg:
                if j2 != jg:
                    rows.append(G[j2][0] - G[jg][0])
                    rhs.append(0.0)
            for j2 in Th:
                if j2 != jh:
                    rows.append(H[j2][0] - H[jh][0])
                    rhs.append(0.0)
            grad += wgt * (G[jg][0] - H[jh][0])
        grad /= co.N
        region = box if not rows else box.intersect(
            Polyhedron.build(np.array(rows), np.array(rhs)))
        res = lp_solve(grad, region, config)
        if res.status == "optimal" and res.value < -tol * (1.0 + np.abs(grad).max(initial=0.0)):
            return "NotStationary", res.point
    return "LocalMin", None


# ---------------------------------------------------------------------------
# composite structure and the (a)/(b)/(c) second-order conditions


@dataclass(frozen=True)
class CompositeStructure:
    """theta(w) = f(Phi(w)) + sum alpha_i |w_i| with F = grad f piecewise
    affine on an explicit polyhedral subdivision and Phi piecewise affine."""

    F: PiecewiseAffineMap    # pieces (Z_j, A_j, p_j), A_j symmetric
    Phi: PiecewiseAffineMap  # pieces (W_k, B_k, q_k)
    alpha: np.ndarray        # (n,), nonnegative

    @staticmethod
    def build(F: PiecewiseAffineMap, Phi: PiecewiseAffineMap, alpha,
              config: Config = DEFAULT) -> "CompositeStructure":
        alpha = _as_vector(alpha, "alpha")
        if np.any(alpha < 0):
            raise InvalidParameter("absolute-value weights must be nonnegative")
        n = Phi.n_in
        m = Phi.n_out
        if alpha.shape[0] != n:
            raise DimensionMismatch("alpha length and Phi input dimension differ")
        if F.n_in != m or F.n_out != m:
            raise DimensionMismatch("F must map Phi's range space to itself")
        if n > config.max_composite_dim:
            raise TooManyPieces(
                f"dimension {n} exceeds guard {config.max_composite_dim}")
        if len(F.pieces) > config.max_composite_pieces or \
                len(Phi.pieces) > config.max_composite_pieces:
            raise TooManyPieces("too many pieces in the composite structure")
        for _, A, _ in F.pieces:
            if np.max(np.abs(A - A.T), initial=0.0) > 1e-9 * (1.0 + np.abs(A).max(initial=0.0)):
                raise InvalidParameter(
                    "gradient pieces of a C1 PLQ function must be symmetric")
        return CompositeStructure(F, Phi, alpha)


@dataclass(frozen=True)
class CompositeReport:
    condition_a: bool
    condition_b: bool
    condition_c: bool
    level: str  # "StrongLocalMin" | "LocalMin" | "Refuted"
    refutation: tuple | None = None


def composite_conditions(cs: CompositeStructure, wbar,
                         config: Config = DEFAULT) -> CompositeReport:
    """Checks the first-order condition (a) and the copositivity conditions
    (b), (c) of the composite absolute-value program at wbar.

    Directions are split by active Phi piece and by sign pattern over the
    zero coordinates of wbar, making the first-order form linear on each
    polyhedral cone; (b)/(c) delegate B_k^T A_j B_k copositivity on the
    nonpositive-slope subcone to the oracle.
    """
    wbar = _as_vector(wbar, "wbar")
    n = cs.Phi.n_in
    if wbar.shape[0] != n:
        raise DimensionMismatch("point dimension mismatch")
    zbar = cs.Phi.value(wbar, config)
    Fz = cs.F.value(zbar, config)

    zero_idx = [i for i in range(n) if wbar[i] == 0.0]
    sgn_fixed = np.array([0.0 if wbar[i] == 0.0 else math.copysign(1.0, wbar[i])
                          for i in range(n)])
    act_phi = cs.Phi.active(wbar, config)
    act_F = cs.F.active(zbar, config)

    cond_a = True
    cond_b = True
    cond_c = True
    refutation = None
    box = Polyhedron.build(np.vstack([np.eye(n), -np.eye(n)]), np.ones(2 * n))
    tol = 1e-9 * (1.0 + float(np.abs(Fz).max(initial=0.0)) + float(np.abs(cs.alpha).max(initial=0.0)))

    for k in act_phi:
        Wk, Bk, _ = cs.Phi.pieces[k]
        cone_k = tangent_cone(Wk, wbar, None, config)
        for signs in itertools.product((1.0, -1.0), repeat=len(zero_idx)):
            rows = [cone_k.A] if cone_k.k else []
            sense = list(np.where(cone_k.eq_mask, "=", "<=")) if cone_k.k else []
            for i, s in zip(zero_idx, signs):
                r = np.zeros(n)
                r[i] = -s  # s * v_i >= 0
                rows.append(r[None, :])
                sense.append("<=")
            D_A = np.vstack(rows) if rows else np.zeros((0, n))
            # linear form of theta'(wbar; v) on this cone
            ell = Bk.T @ Fz + cs.alpha * sgn_fixed
            for i, s in zip(zero_idx, signs):
                ell[i] += cs.alpha[i] * s
            # (a): nonnegativity of the form over the cone
            region = Polyhedron.build(D_A, np.zeros(D_A.shape[0]), sense).intersect(box)
            res = lp_solve(ell, region, config)
            if res.status == "optimal" and res.value < -tol:
                cond_a = False
                if refutation is None:
                    refutation = ("a", None, k, signs, res.point)
            # (b)/(c): copositivity on the subcone where the form is <= 0
            for j in act_F:
                Zj, Aj, _ = cs.F.pieces[j]
                cone_F = tangent_cone(Zj, zbar, None, config)
                sub_rows = [D_A] if D_A.size else []
                sub_sense = list(sense)
                if cone_F.k:
                    sub_rows.append(cone_F.A @ Bk)
                    sub_sense += list(np.where(cone_F.eq_mask, "=", "<="))
                sub_rows.append(ell[None, :])
                sub_sense.append("<=")
                cone = ConeHRep.build(np.vstack(sub_rows), sub_sense, n=n)
                Qjk = Bk.T @ Aj @ Bk
                v_b = copositive_on_cone(Qjk, cone, config)
                if v_b.status == NOT_COPOSITIVE:
                    cond_b = False
                    cond_c = False
                    if refutation is None:
                        refutation = ("b", j, k, signs, v_b.witness)
                    continue
                v_c = strictly_copositive_on_cone(Qjk, cone, config)
                if v_c.status != STRICTLY_COPOSITIVE:
                    cond_c = False
                    if refutation is None and not cond_a:
                        pass
                    elif refutation is None and v_c.witness is not None:
                        refutation = ("c", j, k, signs, v_c.witness)
    if cond_a and cond_c:
        level = "StrongLocalMin"
    elif cond_a and cond_b:
        level = "LocalMin"
    else:
        level = "Refuted"
    return CompositeReport(cond_a, cond_b, cond_c, level, refutation)
