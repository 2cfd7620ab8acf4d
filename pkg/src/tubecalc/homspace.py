"""Cyclically invariant Hom spaces in the fusion-tree basis.

``H(x_1 ... x_n)`` denotes the space of morphisms from the tensor unit into
``x_1 (x) ... (x) x_n`` for a cyclically composable chain of simples.  Vectors
are stored over the canonical left-nested tree basis: internal edge labels
``t_2, ..., t_{n-1}`` (``t_k`` is the fusion channel of the prefix
``x_1 ... x_k``) plus one multiplicity index per internal vertex.

Every operation of the calculus (rotation, relative composition, partial
traces, the spherical pairing, dual bases, the star resolution of a dual edge
pair) reduces to four elementary moves whose matrix elements are F-symbols:

* ``concat`` -- juxtapose two closed diagrams (coefficient-free),
* ``ctr`` -- evaluate an adjacent dual pair of legs against the cup,
* ``ins_pair`` -- create an adjacent dual pair of legs from a cap,
* ``graft`` -- mount a closed tree on the right leg of a cap (used by
  rotation only).

The cup/cap normalisation pins ``tr(e_x) = d_x``: evaluation carries
``sqrt(d_x)`` and coevaluation ``sqrt(d_x) * p_x`` with ``p_x`` the stored
pivotal coefficient.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import mpmath

from . import linalg
from .category import CategorySpec
from .scalars import Scalar, TolerancePolicy


class HomspaceError(Exception):
    pass


@dataclass(frozen=True)
class BoundaryWord:
    """A cyclically composable tuple of simple labels anchored at a 0-cell."""

    labels: tuple[int, ...]
    base: int

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)


@dataclass(frozen=True, order=True)
class FusionTree:
    """Internal labels and per-vertex multiplicities of a left-nested tree."""

    inners: tuple[int, ...]
    mults: tuple[int, ...]


class HomVector:
    """An element of ``H(word)``: sparse coefficients over fusion trees."""

    __slots__ = ("word", "coeffs")

    def __init__(self, word: BoundaryWord, coeffs: dict):
        self.word = word
        self.coeffs = coeffs

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs.values())

    def __add__(self, other: "HomVector") -> "HomVector":
        if other.word != self.word:
            raise HomspaceError("cannot add vectors over different words")
        coeffs = dict(self.coeffs)
        for tree, c in other.coeffs.items():
            s = coeffs.get(tree)
            coeffs[tree] = c if s is None else s + c
        return HomVector(self.word, coeffs)

    def __sub__(self, other: "HomVector") -> "HomVector":
        return self + other.scaled(-1)

    def scaled(self, s) -> "HomVector":
        return HomVector(self.word, {t: s * c for t, c in self.coeffs.items()})

    def __repr__(self):
        return f"HomVector(word={self.word.labels}, terms={len(self.coeffs)})"


class Calculus:
    """All Hom-space operations for one category, with per-word memo tables."""

    def __init__(self, spec: CategorySpec):
        self.spec = spec
        self._trees: dict[BoundaryWord, list[FusionTree]] = {}
        self._rotations: dict[BoundaryWord, list] = {}
        self._rotation_inverses: dict[BoundaryWord, list] = {}
        self._dual_bases: dict[BoundaryWord, tuple] = {}

    # -- words and trees ----------------------------------------------------

    def word(self, labels, base: int | None = None) -> BoundaryWord:
        labels = tuple(labels)
        spec = self.spec
        if labels:
            if base is None:
                base = spec.source(labels[0])
            elif base != spec.source(labels[0]):
                raise HomspaceError("base 0-cell disagrees with first label")
            cell = base
            for x in labels:
                if spec.source(x) != cell:
                    raise HomspaceError(
                        f"incomposable word {spec.names(labels)}"
                    )
                cell = spec.target(x)
            if cell != base:
                raise HomspaceError(f"word {spec.names(labels)} is not closed")
        elif base is None:
            raise HomspaceError("empty word needs an explicit base 0-cell")
        return BoundaryWord(labels, base)

    def reversed_dual(self, word: BoundaryWord) -> BoundaryWord:
        labels = tuple(self.spec.dual(x) for x in reversed(word.labels))
        base = (
            word.base
            if not word.labels
            else self.spec.target(word.labels[-1])
        )
        return BoundaryWord(labels, base)

    def trees(self, word: BoundaryWord) -> list[FusionTree]:
        if word in self._trees:
            return self._trees[word]
        spec = self.spec
        n = len(word)
        out: list[FusionTree] = []
        if n == 0:
            out.append(FusionTree((), ()))
        elif n == 1:
            if word.labels[0] == spec.unit(word.base):
                out.append(FusionTree((), ()))
        elif n == 2:
            if spec.dual(word.labels[0]) == word.labels[1]:
                out.append(FusionTree((), ()))
        else:
            xs = word.labels
            last_channel = spec.dual(xs[n - 1])

            def walk(k, channel, inners, mults):
                if k == n - 1:
                    m = spec.N(channel, xs[k - 1], last_channel)
                    for mu in range(m):
                        out.append(
                            FusionTree(inners + (last_channel,), mults + (mu,))
                        )
                    return
                for t, m in spec.fusion.outcomes(channel, xs[k - 1]):
                    for mu in range(m):
                        walk(k + 1, t, inners + (t,), mults + (mu,))

            walk(2, xs[0], (), ())
        self._trees[word] = out
        return out

    def dim(self, word: BoundaryWord) -> int:
        return len(self.trees(word))

    def zero_vector(self, word: BoundaryWord) -> HomVector:
        return HomVector(word, {})

    def basis_vector(self, word: BoundaryWord, tree: FusionTree) -> HomVector:
        return HomVector(word, {tree: self.spec.one})

    def basis(self, word: BoundaryWord) -> list[HomVector]:
        return [self.basis_vector(word, t) for t in self.trees(word)]

    def coords(self, v: HomVector) -> list[Scalar]:
        order = self.trees(v.word)
        return [v.coeffs.get(t, self.spec.zero) for t in order]

    def from_coords(self, word: BoundaryWord, coords) -> HomVector:
        out = {}
        for tree, c in zip(self.trees(word), coords):
            if not c.is_zero():
                out[tree] = c
        return HomVector(word, out)

    def random_vector(self, word: BoundaryWord, rng: random.Random) -> HomVector:
        spec = self.spec
        coeffs = {}
        for tree in self.trees(word):
            if spec.backend == "exact":
                coeffs[tree] = Scalar.exact(rng.randint(-9, 9))
            else:
                with mpmath.workprec(spec.precision):
                    val = mpmath.mpc(rng.uniform(-1, 1), rng.uniform(-1, 1))
                coeffs[tree] = Scalar.from_mpc(val, spec.precision)
        return HomVector(word, coeffs)

    # -- prefix-label accessors ---------------------------------------------

    def _prefix(self, word: BoundaryWord, tree: FusionTree, j: int) -> int:
        """Fusion channel of the first ``j`` legs (unit for j = 0 or j = n)."""
        n = len(word)
        if j <= 0 or j >= n:
            return self.spec.unit(word.base)
        if j == 1:
            return word.labels[0]
        return tree.inners[j - 2]

    @staticmethod
    def _mult(tree: FusionTree, j: int, n: int) -> int:
        """Multiplicity index at vertex ``j`` (root and leaf vertices are 0)."""
        if 2 <= j <= n - 1:
            return tree.mults[j - 2]
        return 0

    # -- elementary moves -----------------------------------------------------

    def concat(self, u: HomVector, v: HomVector) -> HomVector:
        """Juxtaposition ``u (x) v``; both words must share the base 0-cell."""
        spec = self.spec
        if u.word.base != v.word.base:
            raise HomspaceError("concat needs matching base 0-cells")
        p, q = len(u.word), len(v.word)
        empty = FusionTree((), ())
        if p == 0:
            return v.scaled(u.coeffs.get(empty, spec.zero))
        if q == 0:
            return u.scaled(v.coeffs.get(empty, spec.zero))
        word = self.word(u.word.labels + v.word.labels, u.word.base)
        unit = spec.unit(u.word.base)
        out: dict = {}
        for tu, cu in u.coeffs.items():
            for tv, cv in v.coeffs.items():
                inners, mults = [], []
                inners.extend(tu.inners)
                mults.extend(tu.mults)
                if p >= 2:
                    inners.append(unit)  # channel of the whole u prefix
                    mults.append(0)
                if q >= 2:
                    inners.append(v.word.labels[0])
                    mults.append(0)
                    inners.extend(tv.inners)
                    mults.extend(tv.mults)
                # trim: inners/mults lists run over prefixes 2 .. p+q-1
                tree = FusionTree(tuple(inners[: p + q - 2]), tuple(mults[: p + q - 2]))
                c = cu * cv
                prev = out.get(tree)
                out[tree] = c if prev is None else prev + c
        return HomVector(word, out)

    def ctr(self, v: HomVector, k: int) -> HomVector:
        """Evaluate the adjacent dual pair at legs ``(k, k+1)``, 1-indexed.

        Carries the evaluation normalisation ``sqrt(d)``, so a single ``ctr``
        is exactly relative composition along one simple label.
        """
        spec = self.spec
        n = len(v.word)
        if not (1 <= k <= n - 1):
            raise HomspaceError("ctr position out of range")
        z = v.word.labels[k - 1]
        if v.word.labels[k] != spec.dual(z):
            raise HomspaceError("ctr needs an adjacent dual pair")
        labels = v.word.labels[:k - 1] + v.word.labels[k + 1:]
        base = v.word.base if labels or True else v.word.base
        word = self.word(labels, v.word.base) if labels else BoundaryWord((), v.word.base)
        zbar = spec.dual(z)
        sq = spec.sqrt_d(z)
        out: dict = {}
        for tree, c in v.coeffs.items():
            p_prev = self._prefix(v.word, tree, k - 1)
            p_next = self._prefix(v.word, tree, k + 1)
            if p_prev != p_next:
                continue
            p_mid = self._prefix(v.word, tree, k)
            m_k = self._mult(tree, k, n)
            m_k1 = self._mult(tree, k + 1, n)
            f = self._f(p_prev, z, zbar, p_next, (p_mid, m_k, m_k1),
                        (spec.unit(spec.source(z)), 0, 0))
            if f.is_zero():
                continue
            # prefixes 2..(n-2)-1 of the shortened word
            inners, mults = [], []
            for j2 in range(2, n - 2 - 1 + 1):
                jo = j2 if j2 < k else j2 + 2
                inners.append(self._prefix(v.word, tree, jo))
                mults.append(self._mult(tree, jo, n))
            new_tree = FusionTree(tuple(inners), tuple(mults))
            coeff = c * sq * f
            prev = out.get(new_tree)
            out[new_tree] = coeff if prev is None else prev + coeff
        return HomVector(word, out)

    def ins_pair(self, v: HomVector, k: int, z: int, scale: Scalar) -> HomVector:
        """Create legs ``(z, dual z)`` after position ``k`` with a bare cap."""
        spec = self.spec
        n = len(v.word)
        if not (0 <= k <= n):
            raise HomspaceError("ins_pair position out of range")
        cell = (
            v.word.base if k == 0 else spec.target(v.word.labels[k - 1])
        )
        if spec.source(z) != cell:
            raise HomspaceError("inserted pair does not match the 0-cell")
        zbar = spec.dual(z)
        labels = v.word.labels[:k] + (z, zbar) + v.word.labels[k:]
        word = self.word(labels, v.word.base)
        m = n + 2
        out: dict = {}
        for tree, c in v.coeffs.items():
            t_k = self._prefix(v.word, tree, k)
            lk, rk, li, ri, _ = spec.f_symbols.block(t_k, z, zbar, t_k)
            inv = spec.f_symbols.inverse(t_k, z, zbar, t_k)
            fkey = (spec.unit(cell), 0, 0)
            if fkey not in ri:
                continue
            for (e, mu, nu) in lk:
                f = inv[ri[fkey]][li[(e, mu, nu)]]
                if f.is_zero():
                    continue
                inners, mults = [], []
                for j2 in range(2, m - 1 + 1):
                    if j2 <= k:
                        inners.append(self._prefix(v.word, tree, j2))
                        mults.append(self._mult(tree, j2, n))
                    elif j2 == k + 1:
                        inners.append(e)
                        mults.append(mu)
                    elif j2 == k + 2:
                        inners.append(t_k)
                        mults.append(nu)
                    else:
                        inners.append(self._prefix(v.word, tree, j2 - 2))
                        mults.append(self._mult(tree, j2 - 2, n))
                new_tree = FusionTree(tuple(inners[: m - 2]), tuple(mults[: m - 2]))
                coeff = c * scale * f
                prev = out.get(new_tree)
                out[new_tree] = coeff if prev is None else prev + coeff
        return HomVector(word, out)

    def insert_unit(self, v: HomVector, k: int) -> HomVector:
        """Insert the invisible unit leg after position ``k`` (coefficient 1)."""
        spec = self.spec
        n = len(v.word)
        cell = v.word.base if k == 0 else spec.target(v.word.labels[k - 1])
        u = spec.unit(cell)
        labels = v.word.labels[:k] + (u,) + v.word.labels[k:]
        word = self.word(labels, v.word.base)
        m = n + 1
        out: dict = {}
        for tree, c in v.coeffs.items():
            inners, mults = [], []
            for j2 in range(2, m - 1 + 1):
                if j2 <= k:
                    inners.append(self._prefix(v.word, tree, j2))
                    mults.append(self._mult(tree, j2, n))
                elif j2 == k + 1:
                    inners.append(self._prefix(v.word, tree, k))
                    mults.append(0)
                else:
                    inners.append(self._prefix(v.word, tree, j2 - 1))
                    mults.append(self._mult(tree, j2 - 1, n))
            out[FusionTree(tuple(inners), tuple(mults))] = c
        return HomVector(word, out)

    def strip_unit(self, v: HomVector, k: int) -> HomVector:
        """Remove the unit leg at position ``k`` (coefficient 1)."""
        spec = self.spec
        n = len(v.word)
        if not spec.is_unit(v.word.labels[k - 1]):
            raise HomspaceError("strip_unit needs a unit label")
        labels = v.word.labels[:k - 1] + v.word.labels[k:]
        word = self.word(labels, v.word.base) if labels else BoundaryWord((), v.word.base)
        m = n - 1
        out: dict = {}
        for tree, c in v.coeffs.items():
            inners, mults = [], []
            for j2 in range(2, m - 1 + 1):
                jo = j2 if j2 < k else j2 + 1
                inners.append(self._prefix(v.word, tree, jo))
                mults.append(self._mult(tree, jo, n))
            new_tree = FusionTree(tuple(inners), tuple(mults))
            prev = out.get(new_tree)
            out[new_tree] = c if prev is None else prev + c
        return HomVector(word, out)

    def strip_all_units(self, v: HomVector) -> HomVector:
        while True:
            for pos, x in enumerate(v.word.labels, start=1):
                if self.spec.is_unit(x):
                    v = self.strip_unit(v, pos)
                    break
            else:
                return v

    def _f(self, a, b, c, d, ekey, fkey, inverse=False) -> Scalar:
        spec = self.spec
        lk, rk, li, ri, mat = spec.f_symbols.block(a, b, c, d)
        if ekey not in li or fkey not in ri:
            return spec.zero
        if inverse:
            return spec.f_symbols.inverse(a, b, c, d)[ri[fkey]][li[ekey]]
        return mat[li[ekey]][ri[fkey]]

    # -- rotation -------------------------------------------------------------

    def rotate(self, v: HomVector) -> HomVector:
        """Cyclic shift: the first leg moves to the end of the word."""
        n = len(v.word)
        if n <= 1:
            return HomVector(v.word, dict(v.coeffs))
        mat = self._rotation_matrix(v.word)
        coords = self.coords(v)
        target = self.word(v.word.labels[1:] + v.word.labels[:1])
        out = linalg.apply_row(coords, mat) if coords else []
        return self.from_coords(target, out)

    def rotate_inv(self, v: HomVector) -> HomVector:
        n = len(v.word)
        if n <= 1:
            return HomVector(v.word, dict(v.coeffs))
        source = self.word(v.word.labels[-1:] + v.word.labels[:-1])
        if source not in self._rotation_inverses:
            mat = self._rotation_matrix(source)
            self._rotation_inverses[source] = linalg.inverse(
                mat, tol=self.spec.pivot_tol
            )
        coords = self.coords(v)
        out = linalg.apply_row(coords, self._rotation_inverses[source])
        return self.from_coords(source, out)

    def rotate_by(self, v: HomVector, k: int) -> HomVector:
        n = max(len(v.word), 1)
        k %= n
        for _ in range(k):
            v = self.rotate(v)
        return v

    def _rotation_matrix(self, word: BoundaryWord):
        if word in self._rotations:
            return self._rotations[word]
        spec = self.spec
        n = len(word)
        x1 = word.labels[0]
        target = self.word(word.labels[1:] + word.labels[:1])
        src_trees = self.trees(word)
        tgt_trees = self.trees(target)
        tgt_index = {t: i for i, t in enumerate(tgt_trees)}
        mat = linalg.zeros(len(src_trees), len(tgt_trees), spec.backend, spec.precision)
        gamma = spec.sqrt_d(x1)  # bar-coevaluation scale
        for i, tree in enumerate(src_trees):
            grafted = self._graft_rotation(word, tree)
            # grafted: closed vector on (dual x1, x1, ..., xn, x1)
            contracted = self.ctr(grafted.scaled(gamma), 1)
            for t2, c in contracted.coeffs.items():
                if c.is_zero():
                    continue
                mat[i][tgt_index[t2]] = mat[i][tgt_index[t2]] + c
        self._rotations[word] = mat
        return mat

    def _graft_rotation(self, word: BoundaryWord, tree: FusionTree) -> HomVector:
        """Mount ``dual(x1)`` to the left of ``tree (x) wire(x1)`` on a cap."""
        spec = self.spec
        n = len(word)
        x1 = word.labels[0]
        z = spec.dual(x1)
        legs = word.labels + (x1,)
        m = n + 1
        unit_base = spec.unit(word.base)

        def pl(j):  # prefix labels of the partial tree, root at j = m
            if j == 0:
                return unit_base
            if j == 1:
                return word.labels[0]
            if j <= n - 1:
                return tree.inners[j - 2]
            if j == n:
                return unit_base
            return x1  # j == m: root

        def mu(j):
            if 2 <= j <= n - 1:
                return tree.mults[j - 2]
            return 0

        # rec(j) maps (root e, vertex mult alpha) -> {partial output tree: coeff}
        def rec(j):
            if j == 1:
                out = {}
                for e in range(len(spec.simples)):
                    cnt = spec.N(z, legs[0], e)
                    for alpha in range(cnt):
                        out[(e, alpha)] = {((e,), (alpha,)): spec.one}
                return out
            prev = rec(j - 1)
            out: dict = {}
            s = pl(j - 1)
            L = legs[j - 1]
            for e in range(len(spec.simples)):
                for alpha in range(spec.N(z, s, e)):
                    sub = prev.get((e, alpha))
                    if not sub:
                        continue
                    for q in range(len(spec.simples)):
                        for beta in range(spec.N(e, L, q)):
                            for kappa in range(spec.N(z, pl(j), q)):
                                f = self._f(
                                    z, s, L, q,
                                    (e, alpha, beta),
                                    (pl(j), mu(j), kappa),
                                    inverse=True,
                                )
                                if f.is_zero():
                                    continue
                                bucket = out.setdefault((q, kappa), {})
                                for (labs, ms), c in sub.items():
                                    key = (labs + (q,), ms + (beta,))
                                    val = c * f
                                    old = bucket.get(key)
                                    bucket[key] = val if old is None else old + val
            return out

        table = rec(m)
        # close with the cap vertex: root q = unit at cell target(x1), kappa = 0
        cap_cell = spec.target(x1)
        root = spec.unit(cap_cell)
        closed_word = self.word((z,) + legs, cap_cell)
        out: dict = {}
        for (labs, ms), c in table.get((root, 0), {}).items():
            # labs = channels of (z, legs[0..j]) for j = 1..m; drop the root
            inners = (labs[:-1])
            mults = (ms[:-1])
            out[FusionTree(tuple(inners), tuple(mults))] = c
        return HomVector(closed_word, out)

    # -- derived operations ---------------------------------------------------

    def compose(self, u: HomVector, v: HomVector, along: int, scaled: bool = False) -> HomVector:
        """Relative composition: ``u`` ends with the reversed dual of ``v``'s
        first ``along`` legs; glue along that segment.

        With ``scaled=True`` this is the dimension-corrected composition that
        adds one factor ``sqrt(d)`` per glued label.
        """
        spec = self.spec
        k = along
        if k < 0 or k > len(u.word) or k > len(v.word):
            raise HomspaceError("compose segment out of range")
        head = v.word.labels[:k]
        tail = u.word.labels[len(u.word) - k:]
        if tuple(spec.dual(x) for x in reversed(head)) != tail:
            raise HomspaceError("compose segments are not dual")
        out = self.concat(u, v)
        pos = len(u.word)
        for _ in range(k):
            out = self.ctr(out, pos)
            pos -= 1
        if scaled:
            for x in head:
                out = out.scaled(spec.sqrt_d(x))
        return out

    def unit_vector(self, x: int) -> HomVector:
        """The unit morphism ``e_x`` represented on the word ``(dual x, x)``."""
        return self.unit_vector_word((x,))

    def unit_vector_word(self, xs) -> HomVector:
        """``e_{x_1 ... x_k}`` on ``(dual x_k, ..., dual x_1, x_1, ..., x_k)``."""
        spec = self.spec
        xs = tuple(xs)
        if not xs:
            raise HomspaceError("unit of the empty word is the empty diagram")
        base = spec.target(xs[-1])
        v = HomVector(BoundaryWord((), base), {FusionTree((), ()): spec.one})
        for idx in range(len(xs) - 1, -1, -1):
            pos = len(xs) - 1 - idx
            v = self.ins_pair(v, pos, spec.dual(xs[idx]), spec.sqrt_d(xs[idx]))
        return v

    def empty_vector(self, cell: int) -> HomVector:
        return HomVector(
            BoundaryWord((), cell), {FusionTree((), ()): self.spec.one}
        )

    def ptrace(self, v: HomVector, nlegs: int) -> HomVector:
        """Partial trace over the trailing ``nlegs`` legs and their duals.

        The word must end with ``(x_1 .. x_k, dual x_k .. dual x_1)``.
        """
        spec = self.spec
        n = len(v.word)
        k = nlegs
        if 2 * k > n:
            raise HomspaceError("ptrace segment too long")
        seg = v.word.labels[n - 2 * k: n - k]
        segbar = v.word.labels[n - k:]
        if tuple(spec.dual(x) for x in reversed(seg)) != segbar:
            raise HomspaceError("ptrace needs a trailing dual pair of segments")
        out = v
        pos = n - k
        for _ in range(k):
            out = self.ctr(out, pos)
            pos -= 1
        return out

    def trace(self, v: HomVector) -> Scalar:
        """Full trace of a vector on a word of the form ``(X, rev dual X)``."""
        n = len(v.word)
        if n == 0:
            return v.coeffs.get(FusionTree((), ()), self.spec.zero)
        if n % 2:
            raise HomspaceError("trace needs an even word")
        out = self.ptrace(v, n // 2)
        return out.coeffs.get(FusionTree((), ()), self.spec.zero)

    def pair(self, u: HomVector, v: HomVector) -> Scalar:
        """Spherical pairing of ``u`` over the reversed dual word with ``v``."""
        if self.reversed_dual(v.word) != u.word:
            raise HomspaceError("pairing words are not mutually dual")
        n = len(v.word)
        if n == 0:
            cu = u.coeffs.get(FusionTree((), ()), self.spec.zero)
            cv = v.coeffs.get(FusionTree((), ()), self.spec.zero)
            return cu * cv
        glued = self.concat(u, v)
        for pos in range(n, 0, -1):
            glued = self.ctr(glued, pos)
        return glued.coeffs.get(FusionTree((), ()), self.spec.zero)

    def dual_basis(self, word: BoundaryWord):
        """Canonical basis of ``H(word)`` and its pairing-dual family."""
        if word in self._dual_bases:
            return self._dual_bases[word]
        dword = self.reversed_dual(word)
        basis = self.basis(word)
        dtrees = self.trees(dword)
        if not basis:
            self._dual_bases[word] = ([], [])
            return self._dual_bases[word]
        gram = [
            [self.pair(self.basis_vector(dword, dt), b) for b in basis]
            for dt in dtrees
        ]
        try:
            inv = linalg.inverse(gram, tol=self.spec.pivot_tol)
        except ValueError:
            raise HomspaceError(
                f"singular Gram matrix on {self.spec.names(word.labels)}"
            ) from None
        duals = []
        for i in range(len(basis)):
            coeffs = {}
            for j, dt in enumerate(dtrees):
                c = inv[i][j]
                if not c.is_zero():
                    coeffs[dt] = c
            duals.append(HomVector(dword, coeffs))
        self._dual_bases[word] = (basis, duals)
        return self._dual_bases[word]

    def star(self, v: HomVector, xstart: int, xlen: int, xbarstart: int):
        """Resolve the dual segment pair of ``v`` over simple labels.

        ``v`` lives on ``(A, X, B, rev dual X, C)`` with the ``X`` segment at
        1-indexed position ``xstart`` and its dual at ``xbarstart``; the result
        maps each simple ``t`` to a vector on ``(A, t, B, dual t, C)``.
        """
        spec = self.spec
        n = len(v.word)
        X = v.word.labels[xstart - 1: xstart - 1 + xlen]
        Xbar = v.word.labels[xbarstart - 1: xbarstart - 1 + xlen]
        if tuple(spec.dual(x) for x in reversed(X)) != Xbar:
            raise HomspaceError("star segments are not dual")
        lenB = xbarstart - (xstart + xlen)
        if lenB < 0:
            raise HomspaceError("star segments overlap")
        lenA = xstart - 1
        lenC = n - (xbarstart - 1 + xlen)
        out = {}
        cell = spec.source(X[0])
        for t in range(len(spec.simples)):
            if spec.source(t) != cell or spec.target(t) != spec.target(X[-1]):
                continue
            wxt = None
            try:
                wxt = self.word(X + (spec.dual(t),))
            except HomspaceError:
                continue
            bas, duals = self.dual_basis(wxt)
            if not bas:
                continue
            acc = None
            for alpha, alphabar in zip(bas, duals):
                # glue alpha onto the dual segment (scaled composition)
                v1 = self.rotate_by(v, (xbarstart + xlen - 1) % n)
                step1 = self.compose(v1, alpha, xlen, scaled=True)
                # word now (C, A, X, B, dual t); glue alphabar onto X
                shift = (lenC + lenA + xlen) % len(step1.word)
                v2 = self.rotate_by(step1, shift)
                abar = self.rotate(alphabar)  # (t, Xbar) -> (Xbar..., t)
                step2 = self.compose(v2, abar, xlen, scaled=True)
                # word now (B, dual t, C, A, t); rotate to (A, t, B, dual t, C)
                v3 = self.rotate_by(step2, (lenB + 1 + lenC) % len(step2.word))
                acc = v3 if acc is None else acc + v3
            if acc is not None and not acc.is_zero():
                out[t] = acc
        return out

    # -- comparison helpers ---------------------------------------------------

    def max_residual(self, u: HomVector, v: HomVector) -> float:
        if u.word != v.word:
            return float("inf")
        keys = set(u.coeffs) | set(v.coeffs)
        worst = mpmath.mpf(0)
        for key in keys:
            a = u.coeffs.get(key, self.spec.zero)
            b = v.coeffs.get(key, self.spec.zero)
            worst = max(worst, (a - b).abs_mpf())
        return float(worst)

    def norm(self, v: HomVector) -> float:
        worst = mpmath.mpf(0)
        for c in v.coeffs.values():
            worst = max(worst, c.abs_mpf())
        return float(worst)


def dim(calc: Calculus, word) -> int:
    """Dimension of ``H(word)`` by counting admissible fusion trees."""
    if not isinstance(word, BoundaryWord):
        word = calc.word(word)
    return calc.dim(word)
