"""Pure-numpy implementations of the batch evaluation kernels.

Same semantics as the compiled extension in _kernels.pyx; the backend
module picks whichever is importable.  Piece data arrives flattened:

  rows        (R, n)  stacked constraint rows of all pieces
  rhs         (R,)    stacked right-hand sides
  is_eq       (R,)    uint8 equality flags
  row_start   (I+1,)  piece p owns rows [row_start[p], row_start[p+1])
  Q           (I, n, n), c (I, n), alpha (I,)  quadratic data per piece
"""

import numpy as np

BACKEND_NAME = "python"


def contains_batch(rows, rhs, is_eq, tol, pts):
    """Feasibility of every point against one stacked row system: (S,) bool."""
    pts = np.ascontiguousarray(pts, dtype=float)
    if rows.shape[0] == 0:
        return np.ones(pts.shape[0], dtype=bool)
    r = pts @ rows.T - rhs
    eq = is_eq.astype(bool)
    ok = np.ones(pts.shape[0], dtype=bool)
    if np.any(~eq):
        ok &= np.all(r[:, ~eq] <= tol, axis=1)
    if np.any(eq):
        ok &= np.all(np.abs(r[:, eq]) <= tol, axis=1)
    return ok


def plq_eval_batch(rows, rhs, is_eq, row_start, Q, c, alpha, tol, pts):
    """Evaluate a PLQ function at many points.

    Returns (values, inside) where values[k] is the value of the first
    piece containing pts[k] (np.nan outside the domain) and inside[k]
    flags domain membership.
    """
    pts = np.ascontiguousarray(pts, dtype=float)
    S = pts.shape[0]
    values = np.full(S, np.nan)
    inside = np.zeros(S, dtype=bool)
    todo = np.ones(S, dtype=bool)
    I = len(row_start) - 1
    for p in range(I):
        if not np.any(todo):
            break
        sl = slice(row_start[p], row_start[p + 1])
        ok = contains_batch(rows[sl], rhs[sl], is_eq[sl], tol, pts[todo])
        if not np.any(ok):
            continue
        idx = np.where(todo)[0][ok]
        x = pts[idx]
        values[idx] = 0.5 * np.einsum("ki,ij,kj->k", x, Q[p], x) + x @ c[p] + alpha[p]
        inside[idx] = True
        todo[idx] = False
    return values, inside
