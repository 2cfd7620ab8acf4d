"""Dense linear algebra over :class:`~tubecalc.scalars.Scalar`.

Matrices are plain lists of lists. Sizes in this package stay small (tube
algebras and fusion products at desk scale), so clarity beats vectorisation.
Pivot decisions are exact on the exact backend and threshold-based on the
float backend.
"""

from __future__ import annotations

import mpmath

from .scalars import Scalar, DEFAULT_PRECISION


def zeros(rows: int, cols: int, backend: str, prec: int = DEFAULT_PRECISION):
    z = Scalar.zero(backend, prec)
    return [[z for _ in range(cols)] for _ in range(rows)]


def identity(n: int, backend: str, prec: int = DEFAULT_PRECISION):
    mat = zeros(n, n, backend, prec)
    one = Scalar.one(backend, prec)
    for i in range(n):
        mat[i][i] = one
    return mat


def matmul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    if a and len(a[0]) != inner:
        raise ValueError("matmul shape mismatch")
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = None
            for k in range(inner):
                if a[i][k].is_zero() or b[k][j].is_zero():
                    continue
                term = a[i][k] * b[k][j]
                acc = term if acc is None else acc + term
            if acc is None:
                acc = a[i][0].__class__.zero(a[i][0].backend, a[i][0].prec or DEFAULT_PRECISION) if inner else None
            row.append(acc)
        out.append(row)
    return out


def mat_add(a, b, sign=1):
    return [
        [a[i][j] + b[i][j] if sign > 0 else a[i][j] - b[i][j] for j in range(len(a[0]))]
        for i in range(len(a))
    ]


def mat_scale(a, s: Scalar):
    return [[s * x for x in row] for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)] if a else []

def conj_transpose(a):
    return [[x.conj() for x in col] for col in zip(*a)] if a else []


def apply_row(vec, mat):
    """Row vector times matrix."""
    return matmul([vec], mat)[0]


def _pivot_size(x: Scalar):
    return x.abs_mpf() if not x.is_zero() else mpmath.mpf(0)


def _is_negligible(x: Scalar, tol) -> bool:
    if x.backend == "exact":
        return x.is_zero()
    return x.abs_mpf() <= tol


def row_echelon(rows, col_order=None, tol=0):
    """In-place style echelon reduction with a prescribed column priority.

    Returns ``(reduced_rows, pivot_cols)`` where ``reduced_rows`` is a list of
    fully reduced (Gauss-Jordan) independent rows and ``pivot_cols`` the list
    of their pivot column indices in elimination order. Columns are visited
    in ``col_order`` (default left to right), so callers can steer which
    coordinates get eliminated first.
    """
    if not rows:
        return [], []
    ncols = len(rows[0])
    order = list(col_order) if col_order is not None else list(range(ncols))
    work = [list(r) for r in rows]
    reduced = []
    pivots = []
    for col in order:
        best, best_size = None, None
        for i, row in enumerate(work):
            if _is_negligible(row[col], tol):
                continue
            size = _pivot_size(row[col])
            if best is None or size > best_size:
                best, best_size = i, size
        if best is None:
            continue
        pivot_row = work.pop(best)
        inv = 1 / pivot_row[col]
        pivot_row = [inv * x for x in pivot_row]
        for target in (work, reduced):
            for i, row in enumerate(target):
                c = row[col]
                if not _is_negligible(c, tol):
                    target[i] = [row[j] - c * pivot_row[j] for j in range(ncols)]
        reduced.append(pivot_row)
        pivots.append(col)
    return reduced, pivots


def rank(rows, tol=0) -> int:
    return len(row_echelon(rows, tol=tol)[0])


def reduce_against(vec, reduced_rows, pivots):
    """Subtract the span of reduced rows from ``vec`` (residual vector)."""
    out = list(vec)
    for row, col in zip(reduced_rows, pivots):
        c = out[col]
        if not c.is_zero():
            out = [out[j] - c * row[j] for j in range(len(out))]
    return out


def solve(a, b, tol=0):
    """Solve ``a x = b`` for column(s) b; raises on singular systems."""
    n = len(a)
    m = len(b[0])
    aug = [list(a[i]) + list(b[i]) for i in range(n)]
    reduced, pivots = row_echelon(aug, col_order=list(range(n)), tol=tol)
    if len(pivots) != n:
        raise ValueError("singular linear system")
    x = zeros(n, m, a[0][0].backend, a[0][0].prec or DEFAULT_PRECISION)
    for row, col in zip(reduced, pivots):
        for j in range(m):
            x[col][j] = row[n + j]
    return x


def inverse(a, tol=0):
    n = len(a)
    backend = a[0][0].backend
    prec = a[0][0].prec or DEFAULT_PRECISION
    return solve(a, identity(n, backend, prec), tol=tol)


def nullspace(rows, tol=0):
    """Basis of the right nullspace ``{x : rows @ x = 0}`` as row vectors."""
    if not rows:
        return []
    ncols = len(rows[0])
    backend = rows[0][0].backend
    prec = rows[0][0].prec or DEFAULT_PRECISION
    reduced, pivots = row_echelon(rows, tol=tol)
    pivset = set(pivots)
    basis = []
    one = Scalar.one(backend, prec)
    for free in range(ncols):
        if free in pivset:
            continue
        vec = [Scalar.zero(backend, prec) for _ in range(ncols)]
        vec[free] = one
        for row, col in zip(reduced, pivots):
            vec[col] = -row[free]
        basis.append(vec)
    return basis


def to_mp_matrix(a, prec):
    with mpmath.workprec(prec):
        m = mpmath.matrix(len(a), len(a[0]))
        for i, row in enumerate(a):
            for j, x in enumerate(row):
                m[i, j] = x.to_mpc(prec)
        return m


def eigensystem(a, prec):
    """Eigenvalues and right eigenvectors of a float-backend matrix."""
    with mpmath.workprec(prec):
        e, er = mpmath.eig(to_mp_matrix(a, prec))
        vals = [Scalar.from_mpc(v, prec) for v in e]
        n = len(a)
        vecs = [
            [Scalar.from_mpc(er[i, j], prec) for i in range(n)] for j in range(n)
        ]
    return vals, vecs
