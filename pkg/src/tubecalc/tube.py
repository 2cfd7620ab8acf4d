"""The tube algebra: basis, welding product, trace form, involution, twists.

The space of tubes from ``b`` to ``a`` is ``T[a;b] = sum_x H(bbar xbar a x)``
over simple around-labels ``x``; the grades ``a, b`` run over the diagonal
simples.  Welding glues two tubes along their shared grade and resolves the
composite around-label back into simples.
"""

from __future__ import annotations

from dataclasses import dataclass

from .category import CategorySpec
from .homspace import BoundaryWord, Calculus, FusionTree, HomVector
from .scalars import Scalar


class TubeError(Exception):
    pass


@dataclass(frozen=True, order=True)
class TubeBasisIndex:
    """Basis label ``(a, b, x, tree)``: grades, around-label and fusion tree."""

    a: int
    b: int
    x: int
    tree: FusionTree


class TubeElement:
    """Finitely supported coefficient vector over tube basis indices."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        self.coeffs = dict(coeffs or {})

    def __add__(self, other):
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            s = out.get(key)
            out[key] = c if s is None else s + c
        return TubeElement(out)

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, s) -> "TubeElement":
        return TubeElement({k: s * c for k, c in self.coeffs.items()})

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs.values())

    def __repr__(self):
        return f"TubeElement(terms={len(self.coeffs)})"


class TubeAlgebra:
    """Tube algebra of a category over the diagonal simple grades."""

    def __init__(self, spec: CategorySpec, calculus: Calculus | None = None):
        self.spec = spec
        self.calc = calculus or Calculus(spec)
        self.grades = spec.diagonal_simples()
        self.basis: list[TubeBasisIndex] = []
        self._words: dict[tuple[int, int, int], BoundaryWord] = {}
        for a in self.grades:
            for b in self.grades:
                for x in range(len(spec.simples)):
                    word = self._tube_word(a, b, x)
                    if word is None:
                        continue
                    trees = self.calc.trees(word)
                    if not trees:
                        continue
                    self._words[(a, b, x)] = word
                    for tree in trees:
                        self.basis.append(TubeBasisIndex(a, b, x, tree))
        self.basis.sort()
        self.index = {key: i for i, key in enumerate(self.basis)}
        self._weld_cache: dict[tuple[int, int], TubeElement] = {}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _tube_word(self, a: int, b: int, x: int) -> BoundaryWord | None:
        spec = self.spec
        # word (bbar, xbar, a, x) must chain through the 0-cells
        if spec.source(x) != spec.source(a) or spec.target(x) != spec.source(b):
            return None
        try:
            return self.calc.word(
                (spec.dual(b), spec.dual(x), a, x), spec.source(b)
            )
        except Exception:
            return None

    def word(self, a: int, b: int, x: int) -> BoundaryWord:
        return self._words[(a, b, x)]

    def element(self, a: int, b: int, x: int, vec: HomVector) -> TubeElement:
        """Wrap a Hom vector on the tube word as a tube element."""
        coeffs = {}
        for tree, c in vec.coeffs.items():
            coeffs[TubeBasisIndex(a, b, x, tree)] = c
        return TubeElement(coeffs)

    def vector(self, f: TubeElement, a: int, b: int, x: int) -> HomVector:
        """Extract the ``(a, b, x)``-homogeneous part as a Hom vector."""
        word = self._words.get((a, b, x))
        if word is None:
            raise TubeError("no such tube component")
        coeffs = {}
        for key, c in f.coeffs.items():
            if (key.a, key.b, key.x) == (a, b, x):
                coeffs[key.tree] = c
        return HomVector(word, coeffs)

    def components(self, f: TubeElement):
        seen = set()
        for key in f.coeffs:
            abx = (key.a, key.b, key.x)
            if abx not in seen:
                seen.add(abx)
                yield abx

    def basis_element(self, i: int) -> TubeElement:
        return TubeElement({self.basis[i]: self.spec.one})

    def unit(self, a: int) -> TubeElement:
        """The local unit idempotent concentrated at grade ``a``."""
        spec = self.spec
        calc = self.calc
        e = calc.unit_vector(a)  # on (abar, a)
        x = spec.unit(spec.source(a))
        e = calc.insert_unit(e, 1)   # (abar, x, a)
        e = calc.insert_unit(e, 3)   # (abar, x, a, x)
        return self.element(a, a, x, e)

    def local_unit(self, grades) -> TubeElement:
        out = TubeElement()
        for a in grades:
            out = out + self.unit(a)
        return out

    # -- product ---------------------------------------------------------------

    def weld(self, f: TubeElement, g: TubeElement) -> TubeElement:
        """Bilinear welding product; grade mismatches give zero."""
        out = TubeElement()
        for kf, cf in f.coeffs.items():
            if cf.is_zero():
                continue
            for kg, cg in g.coeffs.items():
                if cg.is_zero() or kf.b != kg.a:
                    continue
                prod = self._weld_basis(kf, kg)
                out = out + prod.scaled(cf * cg)
        return out

    def _weld_basis(self, kf: TubeBasisIndex, kg: TubeBasisIndex) -> TubeElement:
        cache_key = (self.index[kf], self.index[kg])
        hit = self._weld_cache.get(cache_key)
        if hit is not None:
            return hit
        calc = self.calc
        f = calc.basis_vector(self.word(kf.a, kf.b, kf.x), kf.tree)
        g = calc.basis_vector(self.word(kg.a, kg.b, kg.x), kg.tree)
        # glue f's incoming grade b against g's outgoing grade a = b:
        # f on (bbar xbar a x) rotated to end with bbar; g rotated to start
        # with its a-leg
        frot = calc.rotate(f)                   # (xbar, a, x, bbar)
        grot = calc.rotate_by(g, 2)             # (b, y, cbar, ybar) with b = kg.a
        glued = calc.compose(frot, grot, 1)     # (xbar, a, x, y, cbar, ybar)
        glued = calc.rotate(glued)              # (a, x, y, cbar, ybar, xbar)
        resolved = calc.star(glued, 2, 2, 5)    # pair (x,y) against (ybar,xbar)
        out = TubeElement()
        for t, vec in resolved.items():
            # vec on (a, t, cbar, tbar); canonical arrangement (cbar tbar a t)
            arranged = calc.rotate_by(vec, 2)
            out = out + self.element(kf.a, kg.b, t, arranged)
        self._weld_cache[cache_key] = out
        return out

    # -- linear structure --------------------------------------------------------

    def epsilon(self, f: TubeElement) -> Scalar:
        """Symmetric trace form: full trace of the unit-around diagonal part."""
        spec = self.spec
        calc = self.calc
        total = spec.zero
        for (a, b, x) in self.components(f):
            if a != b or not spec.is_unit(x):
                continue
            vec = self.vector(f, a, b, x)
            vec = calc.strip_all_units(vec)  # (abar, a)
            total = total + calc.trace(vec)
        return total

    def sharp(self, f: TubeElement) -> TubeElement:
        """Anti-multiplicative involution ``(a, b, x) -> (bbar, abar, xbar)``."""
        spec = self.spec
        calc = self.calc
        out = TubeElement()
        for (a, b, x) in self.components(f):
            vec = self.vector(f, a, b, x)
            moved = calc.rotate_by(vec, 2)  # (a, x, bbar, xbar)
            out = out + self.element(
                spec.dual(b), spec.dual(a), spec.dual(x), moved
            )
        return out

    # -- twist elements ------------------------------------------------------------

    def twist(self, a: int) -> TubeElement:
        """The twist tube element at a diagonal simple grade ``a``."""
        return self._twist_impl(a, inverse=False)

    def twist_inverse(self, a: int) -> TubeElement:
        return self._twist_impl(a, inverse=True)

    def _twist_impl(self, a: int, inverse: bool) -> TubeElement:
        spec = self.spec
        calc = self.calc
        e = calc.unit_vector(a)
        if not inverse:
            # square with around-label a, cut along the unit diagonal into
            # two unit triangles
            t_upper = calc.insert_unit(e, 2)              # (abar, a, 1)
            t_lower = calc.insert_unit(calc.rotate(e), 2)  # (a, abar, 1)
            t_lower = calc.rotate_by(t_lower, 2)           # (1, a, abar)
            glued = calc.compose(t_upper, t_lower, 1)      # (abar, a, a, abar)
            arranged = calc.rotate_by(glued, 3)            # (abar, abar, a, a)
            x = a
        else:
            t_top = calc.insert_unit(calc.rotate(e), 2)    # (a, abar, 1)
            t_bot = calc.insert_unit(e, 2)                 # (abar, a, 1)
            t_bot = calc.rotate_by(t_bot, 2)               # (1, abar, a)
            glued = calc.compose(t_top, t_bot, 1)          # (a, abar, abar, a)
            arranged = calc.rotate_by(glued, 2)            # (abar, a, a, abar)
            x = spec.dual(a)
        return self.element(a, a, x, arranged).scaled(1 / spec.d(a))


def build(spec: CategorySpec) -> TubeAlgebra:
    """Enumerate the tube basis of a validated category specification."""
    return TubeAlgebra(spec)
