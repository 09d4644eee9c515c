"""Problem-file schema: loading, validation, and object construction.

The on-disk format is versioned JSON with row-major matrices and explicit
dimensions; schema/problem-v1.json documents it.  Validation happens
before any numeric work so malformed inputs fail with location messages.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .geometry import ConeHRep, Polyhedron
from .plq import BallExample, PAFunction, PLQFunction, Quadratic
from .statmodels import CompositeObjective, Loss, PAModel, Sparsity

SCHEMA_VERSION = "1"

OBJECTIVE_TYPES = ("plq", "pa-maxmin", "composite", "ball-example")


def _expect(cond: bool, msg: str):
    if not cond:
        raise SchemaError(msg)


def _matrix(doc, key, ctx, rows=None, cols=None):
    _expect(key in doc, f"{ctx}: missing field {key!r}")
    M = doc[key]
    _expect(isinstance(M, list) and all(isinstance(r, list) for r in M),
            f"{ctx}.{key}: expected a list of rows")
    widths = {len(r) for r in M}
    _expect(len(widths) <= 1, f"{ctx}.{key}: ragged matrix")
    arr = np.array(M, dtype=float) if M else np.zeros((0, cols or 0))
    if arr.ndim == 1:
        arr = arr.reshape(0, cols or 0)
    if rows is not None:
        _expect(arr.shape[0] == rows, f"{ctx}.{key}: expected {rows} rows")
    if cols is not None and arr.shape[0]:
        _expect(arr.shape[1] == cols, f"{ctx}.{key}: expected {cols} columns")
    return arr


def _vector(doc, key, ctx, length=None):
    _expect(key in doc, f"{ctx}: missing field {key!r}")
    v = doc[key]
    _expect(isinstance(v, list) and all(isinstance(t, (int, float)) for t in v),
            f"{ctx}.{key}: expected a list of numbers")
    arr = np.array(v, dtype=float)
    if length is not None:
        _expect(arr.shape[0] == length, f"{ctx}.{key}: expected length {length}")
    return arr


def polyhedron_from_json(doc, ctx="polyhedron") -> Polyhedron:
    _expect(isinstance(doc, dict), f"{ctx}: expected an object")
    n = doc.get("n")
    A = _matrix(doc, "A", ctx, cols=n)
    b = _vector(doc, "b", ctx, length=A.shape[0])
    sense = doc.get("sense", ["<="] * A.shape[0])
    _expect(isinstance(sense, list) and all(s in ("<=", "=") for s in sense),
            f"{ctx}.sense: entries must be '<=' or '='")
    _expect(len(sense) == A.shape[0], f"{ctx}.sense: wrong length")
    if n is None:
        _expect(A.shape[0] > 0, f"{ctx}: empty A needs an explicit n")
        n = A.shape[1]
    return Polyhedron.build(A, b, sense, n=int(n))


def cone_from_json(doc, ctx="cone") -> ConeHRep:
    _expect(isinstance(doc, dict), f"{ctx}: expected an object")
    n = doc.get("n")
    A = _matrix(doc, "A", ctx, cols=n)
    sense = doc.get("sense", ["<="] * A.shape[0])
    _expect(len(sense) == A.shape[0], f"{ctx}.sense: wrong length")
    _expect(all(s in ("<=", "=") for s in sense),
            f"{ctx}.sense: entries must be '<=' or '='")
    if n is None:
        _expect(A.shape[0] > 0, f"{ctx}: empty A needs an explicit n")
        n = A.shape[1]
    return ConeHRep.build(A, sense, n=int(n))


def quadratic_from_json(doc, ctx="quadratic") -> Quadratic:
    _expect(isinstance(doc, dict), f"{ctx}: expected an object")
    c = _vector(doc, "c", ctx)
    Q = _matrix(doc, "Q", ctx, rows=c.shape[0], cols=c.shape[0])
    alpha = doc.get("alpha", 0.0)
    _expect(isinstance(alpha, (int, float)), f"{ctx}.alpha: expected a number")
    return Quadratic.build(Q, c, float(alpha))


def plq_from_json(doc, ctx="objective") -> PLQFunction:
    _expect("pieces" in doc, f"{ctx}: missing field 'pieces'")
    pieces = doc["pieces"]
    _expect(isinstance(pieces, list) and pieces, f"{ctx}.pieces: need at least one")
    out = []
    for i, piece in enumerate(pieces):
        _expect(isinstance(piece, dict), f"{ctx}.pieces[{i}]: expected an object")
        P = polyhedron_from_json(piece.get("polyhedron", {}), f"{ctx}.pieces[{i}].polyhedron")
        q = quadratic_from_json(piece.get("quadratic", {}), f"{ctx}.pieces[{i}].quadratic")
        _expect(P.n == q.n, f"{ctx}.pieces[{i}]: polyhedron/quadratic dimensions differ")
        out.append((P, q))
    return PLQFunction.build(out)


def pa_maxmin_from_json(doc, ctx="objective") -> PAFunction:
    _expect("families" in doc, f"{ctx}: missing field 'families'")
    fams = doc["families"]
    _expect(isinstance(fams, list) and fams, f"{ctx}.families: need at least one")
    parsed = []
    for i, fam in enumerate(fams):
        _expect(isinstance(fam, list) and fam, f"{ctx}.families[{i}]: need affines")
        cur = []
        for j, aff in enumerate(fam):
            c = f"{ctx}.families[{i}][{j}]"
            _expect(isinstance(aff, dict), f"{c}: expected an object")
            a = _vector(aff, "a", c)
            alpha = aff.get("alpha", 0.0)
            _expect(isinstance(alpha, (int, float)), f"{c}.alpha: expected a number")
            cur.append((a, float(alpha)))
        parsed.append(cur)
    return PAFunction.maxmin(parsed)


def load_dataset(doc, base: Path, ctx="dataset"):
    """Inline {"X": ..., "y": ...} or {"csv": path}; CSV rows are
    observations with the response in the last column."""
    _expect(isinstance(doc, dict), f"{ctx}: expected an object")
    if "csv" in doc:
        path = base / doc["csv"]
        _expect(path.exists(), f"{ctx}.csv: file {path} not found")
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.reader(fh):
                if not rec or rec[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append([float(t) for t in rec])
                except ValueError as exc:
                    raise SchemaError(f"{ctx}.csv: non-numeric entry ({exc})")
        _expect(bool(rows), f"{ctx}.csv: empty file")
        arr = np.array(rows, dtype=float)
        _expect(arr.shape[1] >= 2, f"{ctx}.csv: need at least two columns")
        return arr[:, :-1], arr[:, -1]
    X = _matrix(doc, "X", ctx)
    y = _vector(doc, "y", ctx, length=X.shape[0])
    return X, y


def composite_from_json(doc, base: Path, ctx="objective") -> CompositeObjective:
    _expect("model" in doc, f"{ctx}: missing field 'model'")
    mdoc = doc["model"]
    a = _matrix(mdoc, "a", f"{ctx}.model")
    alpha = _vector(mdoc, "alpha", f"{ctx}.model", length=a.shape[0])
    b = _matrix(mdoc, "b", f"{ctx}.model")
    beta = _vector(mdoc, "beta", f"{ctx}.model", length=b.shape[0])
    model = PAModel.build(a, alpha, b, beta)
    X, y = load_dataset(doc.get("dataset", {}), base, f"{ctx}.dataset")
    loss = link = None
    if "loss" in doc:
        ldoc = doc["loss"]
        _expect(isinstance(ldoc, dict) and "kind" in ldoc, f"{ctx}.loss: need a kind")
        loss = Loss.build(ldoc["kind"], float(ldoc.get("param", 1.0)))
    if "link" in doc:
        link = doc["link"]
    sparsity = None
    gamma = float(doc.get("gamma", 0.0))
    if "sparsity" in doc:
        sdoc = doc["sparsity"]
        _expect(isinstance(sdoc, dict) and "kind" in sdoc, f"{ctx}.sparsity: need a kind")
        kw = {k: v for k, v in sdoc.items() if k != "kind"}
        sparsity = Sparsity.build(sdoc["kind"], **kw)
    try:
        return CompositeObjective.build(X, y, model, loss, link, sparsity, gamma)
    except Exception as exc:
        raise SchemaError(f"{ctx}: {exc}")


def ball_from_json(doc, ctx="objective") -> BallExample:
    c0 = _matrix(doc, "Q", ctx)
    _expect(c0.shape[0] == c0.shape[1], f"{ctx}.Q: must be square")
    return BallExample.build(c0)


class Problem:
    """Parsed problem file."""

    def __init__(self, doc: dict, base: Path):
        _expect(isinstance(doc, dict), "problem: expected a JSON object")
        _expect(doc.get("version") == SCHEMA_VERSION,
                f"problem.version: expected {SCHEMA_VERSION!r}")
        obj = doc.get("objective")
        _expect(isinstance(obj, dict), "problem.objective: expected an object")
        kind = obj.get("type")
        _expect(kind in OBJECTIVE_TYPES,
                f"problem.objective.type: expected one of {OBJECTIVE_TYPES}")
        self.kind = kind
        self.doc = doc
        self.plq = None
        self.pa = None
        self.composite = None
        self.ball = None
        if kind == "plq":
            self.plq = plq_from_json(obj)
        elif kind == "pa-maxmin":
            self.pa = pa_maxmin_from_json(obj)
        elif kind == "composite":
            self.composite = composite_from_json(obj, base)
        else:
            self.ball = ball_from_json(obj)
        if "constraints" in doc:
            self.constraints = polyhedron_from_json(doc["constraints"], "problem.constraints")
        else:
            self.constraints = None
        self.points = [
            _vector({"p": p}, "p", f"problem.points[{i}]")
            for i, p in enumerate(doc.get("points", []))
        ]
        self.directions = [
            _vector({"d": d}, "d", f"problem.directions[{i}]")
            for i, d in enumerate(doc.get("directions", []))
        ]
        opts = doc.get("options", {})
        _expect(isinstance(opts, dict), "problem.options: expected an object")
        self.options = opts

    def default_constraints(self, n: int) -> Polyhedron:
        return self.constraints if self.constraints is not None \
            else Polyhedron.whole_space(n)


def load_problem(path) -> Problem:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"problem file {path} not found")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")
    return Problem(doc, path.parent)


def jsonable(obj):
    """Recursively convert report payloads to JSON-encodable values."""
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if obj is None or isinstance(obj, (str, bool)):
        return obj
    return repr(obj)
