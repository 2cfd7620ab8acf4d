"""Representations of the tube algebra.

A representation is a family of vector spaces graded by the diagonal simples
together with one action matrix per tube basis element (right action written
as row vector times matrix).  This module provides the regular representation,
the trivial representation, semisimple decomposition by commutant
eigensplitting, intertwiner spaces, and the functor turning half-braiding data
into a module.
"""

from __future__ import annotations

import random
from fractions import Fraction

import mpmath

from . import linalg
from .homspace import Calculus, FusionTree, HomVector
from .scalars import Scalar, TolerancePolicy
from .tube import TubeAlgebra, TubeBasisIndex, TubeElement


class RepresentationError(Exception):
    pass


class DecompositionError(RepresentationError):
    """Failure to split a representation at the working tolerance."""


class Representation:
    """Graded module over a tube algebra with explicit action matrices.

    ``act[i]`` is the matrix of the ``i``-th tube basis element, a block from
    the grade it starts at to the grade it ends at; elements of the module are
    dicts mapping a grade to a coefficient row.
    """

    def __init__(self, T: TubeAlgebra, dims: dict[int, int], act: dict[int, list]):
        self.T = T
        self.dims = {a: d for a, d in dims.items() if d}
        self.act = act

    def dim(self, a: int) -> int:
        return self.dims.get(a, 0)

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())

    def grade_vector(self) -> tuple[int, ...]:
        return tuple(self.dim(a) for a in self.T.grades)

    def zero_element(self):
        return {}

    def basis_elements(self):
        for a, d in sorted(self.dims.items()):
            for i in range(d):
                row = [self.T.spec.zero] * d
                row[i] = self.T.spec.one
                yield a, i, {a: row}

    def act_basis(self, m: dict, i: int) -> dict:
        """Action of the i-th tube basis element on a module element."""
        key = self.T.basis[i]
        row = m.get(key.a)
        if row is None or i not in self.act:
            return {}
        out = linalg.apply_row(row, self.act[i])
        return {key.b: out} if any(not c.is_zero() for c in out) else {}

    def apply(self, m: dict, f: TubeElement) -> dict:
        """Action of an arbitrary tube element."""
        out: dict = {}
        for key, c in f.coeffs.items():
            if c.is_zero():
                continue
            i = self.T.index[key]
            part = self.act_basis(m, i)
            for b, row in part.items():
                scaled = [c * x for x in row]
                if b in out:
                    out[b] = [p + q for p, q in zip(out[b], scaled)]
                else:
                    out[b] = scaled
        return out

    def action_matrix(self, f: TubeElement, source: int, target: int):
        """Dense matrix of ``f`` from grade ``source`` to grade ``target``."""
        spec = self.T.spec
        rows = []
        ds, dt = self.dim(source), self.dim(target)
        for i in range(ds):
            m = {source: [spec.one if j == i else spec.zero for j in range(ds)]}
            out = self.apply(m, f)
            rows.append(out.get(target, [spec.zero] * dt))
        return rows

    def module_law_residual(self, max_pairs: int | None = None) -> float:
        """Largest violation of ``m.(f g) = (m.f).g`` over basis pairs."""
        T = self.T
        worst = mpmath.mpf(0)
        pairs = 0
        for i, ki in enumerate(T.basis):
            for j, kj in enumerate(T.basis):
                if ki.b != kj.a:
                    continue
                fg = T.weld(T.basis_element(i), T.basis_element(j))
                for a, _, m in self.basis_elements():
                    if a != ki.a:
                        continue
                    lhs = self.apply(self.act_basis(m, i), T.basis_element(j))
                    rhs = self.apply(m, fg)
                    worst = max(worst, _element_residual(self, lhs, rhs))
                pairs += 1
                if max_pairs and pairs >= max_pairs:
                    return float(worst)
        return float(worst)


def _element_residual(rep: Representation, m1: dict, m2: dict):
    spec = rep.T.spec
    worst = mpmath.mpf(0)
    for a in set(m1) | set(m2):
        r1 = m1.get(a, [spec.zero] * rep.dim(a))
        r2 = m2.get(a, [spec.zero] * rep.dim(a))
        for x, y in zip(r1, r2):
            worst = max(worst, (x - y).abs_mpf())
    return worst


def regular(T: TubeAlgebra) -> Representation:
    """Right regular representation, graded by the incoming tube label."""
    spec = T.spec
    by_grade: dict[int, list[int]] = {}
    for i, key in enumerate(T.basis):
        by_grade.setdefault(key.b, []).append(i)
    dims = {b: len(ix) for b, ix in by_grade.items()}
    pos = {}
    for b, ix in by_grade.items():
        for p, i in enumerate(ix):
            pos[i] = p
    act = {}
    for j, kj in enumerate(T.basis):
        src = by_grade.get(kj.a, [])
        tgt = by_grade.get(kj.b, [])
        mat = linalg.zeros(len(src), len(tgt), spec.backend, spec.precision)
        for r, i in enumerate(src):
            welded = T.weld(T.basis_element(i), T.basis_element(j))
            for key, c in welded.coeffs.items():
                if c.is_zero():
                    continue
                mat[r][pos[T.index[key]]] = mat[r][pos[T.index[key]]] + c
        act[j] = mat
    return Representation(T, dims, act)


def trivial(T: TubeAlgebra) -> Representation:
    """Monoidal unit: one dimension per 0-cell, supported at the unit grade."""
    spec = T.spec
    calc = T.calc
    dims = {spec.unit(i): 1 for i in range(spec.zero_cells)}
    act = {}
    for j, kj in enumerate(T.basis):
        if kj.a not in dims or kj.b not in dims:
            continue
        # l.f = d_x ptr_x(l o_a f): strip the unit slot and close the tube
        f = calc.basis_vector(T.word(kj.a, kj.b, kj.x), kj.tree)
        stripped = calc.strip_unit(f, 3)          # (bbar, xbar, x)
        closed = calc.ctr(stripped, 2)            # (bbar,)
        closed = calc.strip_all_units(closed)     # empty word
        value = closed.coeffs.get(FusionTree((), ()), spec.zero) * spec.d(kj.x)
        act[j] = [[value]]
    return Representation(T, dims, act)


class HalfBraidingData:
    """Sector dimensions of a central object plus its crossing matrices.

    ``sigma[x][(t, u)]`` is a list over the canonical tree basis of the
    coupling space ``H(dual x, dual t, x, u)`` of matrices ``V_t -> V_u``
    (row convention).
    """

    def __init__(self, spec, dims: dict[int, int], sigma: dict, name: str = ""):
        self.spec = spec
        self.dims = {t: d for t, d in dims.items() if d}
        self.sigma = sigma
        self.name = name

    def coupling(self, calc: Calculus, x: int, t: int, u: int):
        """Crossing component as ``V_t -> V_u`` matrices tensored with trees."""
        entries = self.sigma.get(x, {}).get((t, u))
        if entries is None:
            return None
        spec = self.spec
        word = calc.word((spec.dual(x), spec.dual(t), x, u), spec.target(x))
        trees = calc.trees(word)
        return list(zip(trees, entries))


def load_halfbraiding(spec, calc: Calculus, doc: dict, name: str = "") -> HalfBraidingData:
    """Parse half-braiding data from its JSON document.

    ``object`` maps sector names to dimensions.  Each ``sigma`` entry carries
    one crossing matrix per simple ``x``: rows are source sectors ``(t, i)``
    and columns target sectors ``(u, j)`` in sorted order, and the scalar at
    ``((t, i), (u, j))`` is the coefficient of the unique basis tree of the
    coupling space ``H(dual x, dual t, x, u)``.  Sector pairs whose coupling
    space is not one-dimensional cannot be expressed in this flat format and
    are rejected; use :class:`HalfBraidingData` directly for those.
    """
    from .scalars import parse_scalar

    dims: dict[int, int] = {}
    for sector_name, d in doc["object"].items():
        dims[spec.by_name(sector_name)] = int(d)
    slots = []
    for t in sorted(dims):
        for i in range(dims[t]):
            slots.append((t, i))
    sigma: dict = {}
    for entry in doc.get("sigma", []):
        x = spec.by_name(entry["x"])
        matrix = entry["matrix"]
        if len(matrix) != len(slots) or any(len(row) != len(slots) for row in matrix):
            raise RepresentationError(
                f"sigma matrix for {spec.simples[x].name} must be "
                f"{len(slots)}x{len(slots)}"
            )
        blocks: dict = {}
        for r, (t, i) in enumerate(slots):
            for c, (u, j) in enumerate(slots):
                value = parse_scalar(str(matrix[r][c]), spec.backend, spec.precision)
                if value.is_zero():
                    continue
                try:
                    word = calc.word(
                        (spec.dual(x), spec.dual(t), x, u), spec.target(x)
                    )
                except Exception:
                    raise RepresentationError(
                        f"sigma entry for {spec.simples[x].name}: sectors "
                        f"{spec.simples[t].name}->{spec.simples[u].name} do not couple"
                    ) from None
                trees = calc.trees(word)
                if len(trees) != 1:
                    raise RepresentationError(
                        "flat sigma matrices need one-dimensional coupling spaces"
                    )
                block = blocks.setdefault(
                    (t, u),
                    [linalg.zeros(dims[t], dims[u], spec.backend, spec.precision)],
                )
                block[0][i][j] = value
        sigma[x] = blocks
    return HalfBraidingData(spec, dims, sigma, name=name or doc.get("name", ""))


def identity_halfbraiding(T: TubeAlgebra) -> HalfBraidingData:
    """The unit object with its trivial crossings."""
    spec = T.spec
    calc = T.calc
    dims = {spec.unit(i): 1 for i in range(spec.zero_cells)}
    sigma: dict = {}
    for x in range(len(spec.simples)):
        t = spec.unit(spec.source(x))
        u = spec.unit(spec.target(x))
        # identity crossing encoded on (xbar, 1, x, 1) ~ the unit of x
        e = calc.unit_vector(x)  # (xbar, x)
        e = calc.insert_unit(e, 1)
        e = calc.insert_unit(e, 3)
        word = calc.word((spec.dual(x), spec.dual(t), x, u), spec.target(x))
        entries = []
        for tree in calc.trees(word):
            c = e.coeffs.get(tree, spec.zero)
            entries.append([[c]])
        sigma.setdefault(x, {})[(t, u)] = entries
    return HalfBraidingData(spec, dims, sigma, name="unit")


def from_halfbraiding(
    T: TubeAlgebra, hb: HalfBraidingData, check: bool = True, tol: float = 1e-12
) -> Representation:
    """Module structure on the graded Hom spaces out of a central object."""
    spec = T.spec
    calc = T.calc
    dims = {t: d for t, d in hb.dims.items() if t in T.grades}
    act = {}
    for j, kj in enumerate(T.basis):
        if kj.a not in dims:
            continue
        a, b, x = kj.a, kj.b, kj.x
        f = calc.basis_vector(T.word(a, b, x), kj.tree)
        frot = calc.rotate_by(f, 3)  # (x, bbar, xbar, a): ends with a
        coup = hb.coupling(calc, x, a, b)
        if coup is None:
            continue
        # sector vector of the module element: the bare tree on (abar, a)
        m_vec = calc.basis_vector(
            calc.word((spec.dual(a), a)), FusionTree((), ())
        )
        g1 = calc.compose(frot, m_vec, 1)  # (x, bbar, xbar, a)
        g1 = calc.rotate(g1)               # (bbar, xbar, a, x)
        target_tree = FusionTree((), ())
        mat = None
        for tree, vmat in coup:
            delta = calc.basis_vector(
                calc.word((spec.dual(x), spec.dual(a), x, b), spec.target(x)),
                tree,
            )
            glued = calc.compose(g1, delta, 2)  # (bbar, xbar) + (x, b)
            closed = calc.ctr(glued, 2)         # (bbar, b)
            coeff = closed.coeffs.get(target_tree, spec.zero) * spec.d(x)
            if coeff.is_zero():
                continue
            scaled = linalg.mat_scale(vmat, coeff)
            mat = scaled if mat is None else linalg.mat_add(mat, scaled)
        if mat is not None:
            act[j] = mat
    rep = Representation(T, dims, act)
    if check:
        resid = rep.module_law_residual()
        if resid > tol:
            raise RepresentationError(
                f"half-braiding data violates the module law (residual {resid:.3e})"
            )
    return rep


def hom(M: Representation, N: Representation):
    """Basis of grade-preserving intertwiners ``M -> N``."""
    T = M.T
    spec = T.spec
    grades = sorted(set(M.dims) | set(N.dims))
    offsets = {}
    total = 0
    for a in grades:
        offsets[a] = total
        total += M.dim(a) * N.dim(a)
    if total == 0:
        return []
    rows = []
    zero = spec.zero
    for i, key in enumerate(T.basis):
        a, b = key.a, key.b
        if M.dim(a) == 0 and N.dim(a) == 0:
            continue
        A = M.act.get(i)
        B = N.act.get(i)
        # constraint: A X_b - X_a B = 0, entries indexed by (r, c)
        for r in range(M.dim(a)):
            for c in range(N.dim(b)):
                row = [zero] * total
                if A is not None:
                    for k in range(M.dim(b)):
                        row[offsets[b] + k * N.dim(b) + c] = (
                            row[offsets[b] + k * N.dim(b) + c] + A[r][k]
                        )
                if B is not None:
                    for k in range(N.dim(a)):
                        row[offsets[a] + r * N.dim(a) + k] = (
                            row[offsets[a] + r * N.dim(a) + k] - B[k][c]
                        )
                if any(not x.is_zero() for x in row):
                    rows.append(row)
    tol = 0 if spec.backend == "exact" else mpmath.mpf("1e-40")
    if not rows:
        kernel = linalg.identity(total, spec.backend, spec.precision)
    else:
        kernel = linalg.nullspace(rows, tol=tol)
    out = []
    for vec in kernel:
        blocks = {}
        for a in grades:
            da, na = M.dim(a), N.dim(a)
            if da and na:
                blocks[a] = [
                    vec[offsets[a] + r * na: offsets[a] + (r + 1) * na]
                    for r in range(da)
                ]
        out.append(blocks)
    return out


def is_isomorphic(M: Representation, N: Representation) -> bool:
    if M.grade_vector() != N.grade_vector():
        return False
    maps = hom(M, N)
    if not maps:
        return False
    spec = M.T.spec
    tol = 0 if spec.backend == "exact" else mpmath.mpf("1e-30")
    candidates = list(maps)
    if len(maps) > 1:
        total = {}
        for blocks in maps:
            for a, mat in blocks.items():
                if a in total:
                    total[a] = linalg.mat_add(total[a], mat)
                else:
                    total[a] = mat
        candidates.insert(0, total)
    for blocks in candidates:
        # blockwise invertibility certifies an isomorphism
        ok = True
        for a in sorted(set(M.dims) | set(N.dims)):
            if M.dim(a) != N.dim(a):
                ok = False
                break
            block = blocks.get(a)
            if block is None:
                ok = M.dim(a) == 0
                if not ok:
                    break
                continue
            if len(linalg.row_echelon(block, tol=tol)[0]) != M.dim(a):
                ok = False
                break
        if ok:
            return True
    return False


class SimpleModule:
    """A simple summand with its canonical invariants."""

    def __init__(self, rep: Representation, twist: Scalar, multiplicity: int = 1):
        self.rep = rep
        self.twist = twist
        self.multiplicity = multiplicity

    @property
    def total_dim(self) -> int:
        return self.rep.total_dim

    def __repr__(self):
        return (
            f"SimpleModule(dim={self.total_dim}, grades={self.rep.grade_vector()}, "
            f"twist={self.twist}, mult={self.multiplicity})"
        )


def twist_scalar(rep: Representation, tol: float = 1e-12) -> Scalar:
    """Eigenvalue of the ribbon twist on a simple module."""
    T = rep.T
    spec = T.spec
    for a in sorted(rep.dims):
        tau = T.twist(a)
        mat = rep.action_matrix(tau, a, a)
        d = rep.dim(a)
        diag = mat[0][0]
        worst = mpmath.mpf(0)
        for i in range(d):
            for j in range(d):
                if i == j:
                    worst = max(worst, (mat[i][j] - diag).abs_mpf())
                else:
                    worst = max(worst, mat[i][j].abs_mpf())
        if worst > tol:
            raise RepresentationError(
                f"twist action is not scalar on a simple module ({float(worst):.3e})"
            )
        return diag
    raise RepresentationError("empty representation has no twist")


def _restrict(rep: Representation, rows_by_grade: dict):
    """Subrepresentation on the row span of ``rows_by_grade``."""
    spec = rep.T.spec
    tol = 0 if spec.backend == "exact" else mpmath.mpf("1e-40")
    # reduced bases and pivot columns per grade
    bases, pivots = {}, {}
    for a, rows in rows_by_grade.items():
        if not rows:
            continue
        red, piv = linalg.row_echelon(rows, tol=tol)
        if red:
            bases[a] = red
            pivots[a] = piv
    dims = {a: len(rows) for a, rows in bases.items()}
    act = {}
    for i, key in enumerate(rep.T.basis):
        a, b = key.a, key.b
        if a not in bases or i not in rep.act:
            continue
        image = linalg.matmul(bases[a], rep.act[i])
        if b not in bases:
            # the image must vanish for a genuine submodule
            continue
        # coordinates w.r.t. the reduced basis: read off pivot columns
        mat = [[row[c] for c in pivots[b]] for row in image]
        act[i] = mat
    return Representation(rep.T, dims, act)


def _float_eigensplit(rep: Representation, rng: random.Random):
    spec = rep.T.spec
    comm = hom(rep, rep)
    if len(comm) <= 1:
        return None
    coeffs = [Scalar.from_mpc(rng.uniform(-1, 1), spec.precision) for _ in comm]
    blocks = {}
    for a in rep.dims:
        mat = linalg.zeros(rep.dim(a), rep.dim(a), spec.backend, spec.precision)
        for c, X in zip(coeffs, comm):
            if a in X:
                mat = linalg.mat_add(mat, linalg.mat_scale(X[a], c))
        blocks[a] = mat
    # global eigenvalue clustering
    entries = []  # (lambda, grade, eigvec row)
    for a, mat in blocks.items():
        if not mat:
            continue
        vals, vecs = linalg.eigensystem(mat, spec.precision)
        for lam, vec in zip(vals, vecs):
            entries.append((lam, a, vec))
    clusters: list[list] = []
    reps_: list[Scalar] = []
    ctol = mpmath.mpf("1e-30")
    for lam, a, vec in entries:
        for idx, mu in enumerate(reps_):
            if (lam - mu).abs_mpf() <= ctol:
                clusters[idx].append((a, vec))
                break
        else:
            reps_.append(lam)
            clusters.append([(a, vec)])
    if len(clusters) <= 1:
        return "retry"
    parts = []
    for members in clusters:
        rows_by_grade: dict[int, list] = {}
        for a, vec in members:
            rows_by_grade.setdefault(a, []).append(vec)
        parts.append(_restrict(rep, rows_by_grade))
    return parts


def _exact_eigensplit(rep: Representation):
    spec = rep.T.spec
    comm = hom(rep, rep)
    if len(comm) <= 1:
        return None
    one = spec.one
    for X in comm:
        # float eigenvalues suggest exact rational candidates
        candidates = set()
        for a, mat in X.items():
            vals, _ = linalg.eigensystem(mat, 128)
            for lam in vals:
                with mpmath.workprec(128):
                    v = lam.to_mpc(128)
                    if abs(v.imag) > mpmath.mpf("1e-20"):
                        continue
                    for q in (1, 2, 3, 4, 5, 6):
                        p = mpmath.nint(v.real * q)
                        if abs(v.real * q - p) < mpmath.mpf("1e-20"):
                            candidates.add(Fraction(int(p), q))
                            break
        splits = []
        total = 0
        for lam in sorted(candidates):
            rows_by_grade = {}
            found = 0
            for a in rep.dims:
                mat = X.get(a)
                if mat is None:
                    continue
                shifted = [
                    [
                        mat[i][j] - (Scalar.exact(lam) if i == j else spec.zero)
                        for j in range(rep.dim(a))
                    ]
                    for i in range(rep.dim(a))
                ]
                kern = linalg.nullspace(shifted, tol=0)
                if kern:
                    rows_by_grade[a] = kern
                    found += len(kern)
            if found:
                splits.append(rows_by_grade)
                total += found
        if total == rep.total_dim and len(splits) > 1:
            return [_restrict(rep, rows) for rows in splits]
    raise DecompositionError(
        "no exact rational eigensplit found; use the float backend"
    )


def _twist_sort_key(sm: SimpleModule):
    with mpmath.workprec(64):
        theta = sm.twist.to_mpc(64)
        angle = mpmath.arg(theta) % (2 * mpmath.pi)
        # snap tiny angles so exact и float orderings agree
        if float(angle) > float(2 * mpmath.pi) - 1e-9:
            angle = mpmath.mpf(0)
        angle_key = round(float(angle), 9)
    return (sm.total_dim, angle_key, sm.rep.grade_vector())


def decompose(rep: Representation, seed: int = 0) -> list[SimpleModule]:
    """Split into pairwise non-isomorphic simples with multiplicities.

    Eigensplitting of seeded random commutant elements, recursing until all
    endomorphism algebras are scalars; the result is canonically ordered by
    (total dimension, twist angle, grade vector).
    """
    spec = rep.T.spec
    rng = random.Random(seed)
    leaves: list[Representation] = []

    def walk(r: Representation):
        if r.total_dim == 0:
            return
        if spec.backend == "exact":
            parts = _exact_eigensplit(r)
        else:
            parts = _float_eigensplit(r, rng)
            attempts = 0
            while parts == "retry":
                attempts += 1
                if attempts > 8:
                    raise DecompositionError(
                        "random commutant elements failed to split the module"
                    )
                parts = _float_eigensplit(r, rng)
        if parts is None:
            leaves.append(r)
            return
        for part in parts:
            walk(part)

    walk(rep)
    groups: list[SimpleModule] = []
    for leaf in leaves:
        theta = twist_scalar(leaf)
        for sm in groups:
            if is_isomorphic(sm.rep, leaf):
                sm.multiplicity += 1
                break
        else:
            groups.append(SimpleModule(leaf, theta))
    groups.sort(key=_twist_sort_key)
    return groups
