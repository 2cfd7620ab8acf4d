"""Coefficient arithmetic with an exact and a high-precision float backend.

The exact backend stores numbers in the normal form

    sum of  q * sqrt(m) * zeta_n^k

with ``q`` rational, ``m`` a squarefree positive integer and ``zeta_n = e^{2 pi i/n}``
with ``gcd(k, n) = 1``.  Sums and products stay in this form; quotients are
rationalised when possible.  The float backend wraps an ``mpmath`` complex
number tagged with its binary precision (default 256 bits).  The two backends
never mix silently: combining them raises :class:`BackendMismatch`.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd, isqrt

import mpmath

DEFAULT_PRECISION = 256


class ScalarError(Exception):
    pass


class BackendMismatch(ScalarError):
    """Raised when exact and float scalars meet in one computation."""


class NotExactlyRepresentable(ScalarError):
    """Raised in exact mode for expressions leaving the supported normal form."""


class ParseError(ScalarError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def _squarefree_split(m: int) -> tuple[int, int]:
    """Return ``(s, f)`` with ``m = s^2 * f`` and ``f`` squarefree."""
    s, f = 1, 1
    d = 2
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            s *= d ** (e // 2)
            if e % 2:
                f *= d
        d += 1 if d == 2 else 2
    return s, f * m


def _cyclo_key(n: int, k: int) -> tuple[int, int]:
    k %= n
    if k == 0:
        return (1, 0)
    g = gcd(n, k)
    return (n // g, k // g)


def _cyclo_mul(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    n = a[0] * b[0] // gcd(a[0], b[0])
    return _cyclo_key(n, a[1] * (n // a[0]) + b[1] * (n // b[0]))


# term key: (m, n, k) for sqrt(m) * zeta_n^k
_ONE_TERM = (1, 1, 0)


class Scalar:
    """An immutable number from the coefficient field.

    Either ``_terms`` (exact backend, mapping term keys to ``Fraction``) or
    ``_num`` (float backend, an ``mpmath.mpc`` at ``prec`` bits) is set.
    """

    __slots__ = ("_terms", "_num", "prec")

    def __init__(self, terms=None, num=None, prec=None):
        self._terms = terms
        self._num = num
        self.prec = prec

    # -- constructors ------------------------------------------------------

    @staticmethod
    def exact(q) -> "Scalar":
        q = Fraction(q)
        return Scalar(terms={} if q == 0 else {_ONE_TERM: q})

    @staticmethod
    def exact_sqrt(m: int) -> "Scalar":
        if m <= 0:
            raise ScalarError("sqrt argument must be a positive integer")
        s, f = _squarefree_split(m)
        key = _ONE_TERM if f == 1 else (f, 1, 0)
        return Scalar(terms={key: Fraction(s)})

    @staticmethod
    def exact_cyclo(n: int, k: int) -> "Scalar":
        if n <= 0:
            raise ScalarError("cyclo order must be positive")
        nn, kk = _cyclo_key(n, k)
        return Scalar(terms={(1, nn, kk): Fraction(1)})

    @staticmethod
    def from_mpc(value, prec: int = DEFAULT_PRECISION) -> "Scalar":
        with mpmath.workprec(prec):
            return Scalar(num=mpmath.mpc(value), prec=prec)

    @staticmethod
    def zero(backend: str = "exact", prec: int = DEFAULT_PRECISION) -> "Scalar":
        if backend == "exact":
            return Scalar.exact(0)
        return Scalar.from_mpc(0, prec)

    @staticmethod
    def one(backend: str = "exact", prec: int = DEFAULT_PRECISION) -> "Scalar":
        if backend == "exact":
            return Scalar.exact(1)
        return Scalar.from_mpc(1, prec)

    # -- basic queries -----------------------------------------------------

    @property
    def backend(self) -> str:
        return "exact" if self._terms is not None else "float"

    def is_zero(self) -> bool:
        if self._terms is not None:
            return not self._terms
        return self._num == 0

    def is_rational(self) -> bool:
        return self._terms is not None and set(self._terms) <= {_ONE_TERM}

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ScalarError("not a rational scalar")
        return self._terms.get(_ONE_TERM, Fraction(0))

    def to_mpc(self, prec: int | None = None):
        """Numeric value as ``mpmath.mpc`` (evaluating exact terms if needed)."""
        if self._num is not None:
            return self._num
        p = prec or DEFAULT_PRECISION
        with mpmath.workprec(p + 16):
            total = mpmath.mpc(0)
            for (m, n, k), q in self._terms.items():
                t = mpmath.mpf(q.numerator) / q.denominator * mpmath.sqrt(m)
                if (n, k) != (1, 0):
                    t = t * mpmath.expjpi(mpmath.mpf(2 * k) / n)
                total += t
            total = +total
        return total

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            if other.backend != self.backend:
                raise BackendMismatch(
                    f"cannot combine {self.backend} and {other.backend} scalars"
                )
            if self.backend == "float" and other.prec != self.prec:
                raise BackendMismatch("cannot combine floats of different precision")
            return other
        if isinstance(other, (int, Fraction)):
            if self.backend == "exact":
                return Scalar.exact(other)
            return Scalar.from_mpc(other, self.prec)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.backend == "exact":
            terms = dict(self._terms)
            for key, q in other._terms.items():
                s = terms.get(key, Fraction(0)) + q
                if s:
                    terms[key] = s
                else:
                    terms.pop(key, None)
            return Scalar(terms=terms)
        with mpmath.workprec(self.prec):
            return Scalar(num=self._num + other._num, prec=self.prec)

    __radd__ = __add__

    def __neg__(self):
        if self.backend == "exact":
            return Scalar(terms={key: -q for key, q in self._terms.items()})
        with mpmath.workprec(self.prec):
            return Scalar(num=-self._num, prec=self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.backend == "exact":
            terms: dict = {}
            for (m1, n1, k1), q1 in self._terms.items():
                for (m2, n2, k2), q2 in other._terms.items():
                    s, f = _squarefree_split(m1 * m2)
                    n, k = _cyclo_mul((n1, k1), (n2, k2))
                    key = (f, n, k)
                    q = terms.get(key, Fraction(0)) + q1 * q2 * s
                    if q:
                        terms[key] = q
                    else:
                        terms.pop(key, None)
            return Scalar(terms=terms)
        with mpmath.workprec(self.prec):
            return Scalar(num=self._num * other._num, prec=self.prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("scalar division by zero")
        if self.backend == "float":
            with mpmath.workprec(self.prec):
                return Scalar(num=self._num / other._num, prec=self.prec)
        return self * other._exact_inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def _exact_inverse(self) -> "Scalar":
        if not self._terms:
            raise ZeroDivisionError("scalar division by zero")
        if len(self._terms) == 1:
            ((m, n, k), q), = self._terms.items()
            # 1 / (q sqrt(m) zeta_n^k) = sqrt(m) zeta_n^{-k} / (q m)
            return Scalar(terms={(m,) + _cyclo_key(n, -k): 1 / (q * m)})
        # rationalise one square root at a time; works for nested-free
        # sqrt sums such as (1 + sqrt 5)/2 but not for mixed cyclotomics
        for (m, n, k) in self._terms:
            if m != 1 and (n, k) == (1, 0):
                conj = Scalar(
                    terms={
                        key: (-q if key[0] % m == 0 else q)
                        for key, q in self._terms.items()
                    }
                )
                reduced = self * conj
                if len(reduced._terms) < len(self._terms):
                    return conj * reduced._exact_inverse()
        raise NotExactlyRepresentable(
            "cannot invert this sum exactly; use the float backend"
        )

    def conj(self) -> "Scalar":
        if self.backend == "exact":
            terms = {}
            for (m, n, k), q in self._terms.items():
                terms[(m,) + _cyclo_key(n, -k)] = q
            return Scalar(terms=terms)
        with mpmath.workprec(self.prec):
            return Scalar(num=mpmath.conj(self._num), prec=self.prec)

    def abs_mpf(self):
        """Numeric absolute value as ``mpmath.mpf``."""
        if self.backend == "float":
            with mpmath.workprec(self.prec):
                return abs(self._num)
        return abs(self.to_mpc())

    # -- comparison and hashing -------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self._coerce(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        if self.backend != other.backend:
            return False
        if self.backend == "exact":
            return self._terms == other._terms
        return self._num == other._num

    def __hash__(self):
        if self.backend == "exact":
            return hash(frozenset(self._terms.items()))
        return hash((str(self._num), self.prec))

    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        if self.backend == "float":
            with mpmath.workprec(self.prec):
                return mpmath.nstr(self._num, mpmath.mp.dps, strip_zeros=False)
        if not self._terms:
            return "0"
        parts = []
        for (m, n, k), q in sorted(self._terms.items()):
            atoms = []
            if q != 1 or ((m, n, k) == _ONE_TERM):
                atoms.append(str(q))
            if m != 1:
                atoms.append(f"sqrt({m})")
            if (n, k) != (1, 0):
                atoms.append(f"cyclo({n},{k})")
            parts.append("*".join(atoms))
        return " + ".join(parts)


class TolerancePolicy:
    """Absolute/relative tolerances used by every numeric comparison."""

    __slots__ = ("abs_tol", "rel_tol")

    def __init__(self, abs_tol: float = 1e-20, rel_tol: float = 1e-20):
        for t in (abs_tol, rel_tol):
            if not (t >= 0 and t < float("inf")):
                raise ScalarError("tolerances must be finite and nonnegative")
        self.abs_tol = abs_tol
        self.rel_tol = rel_tol

    def __repr__(self):
        return f"TolerancePolicy(abs_tol={self.abs_tol}, rel_tol={self.rel_tol})"


def approx_eq(a: Scalar, b: Scalar, pol: TolerancePolicy | None = None) -> bool:
    """Backend-aware equality: structural for exact, tolerance-based for float."""
    pol = pol or TolerancePolicy()
    if a.backend != b.backend:
        raise BackendMismatch("approx_eq requires scalars of the same backend")
    if a.backend == "exact":
        return a == b
    with mpmath.workprec(a.prec):
        diff = abs(a._num - b._num)
        bound = pol.abs_tol + pol.rel_tol * max(abs(a._num), abs(b._num))
        return diff <= bound


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(\d+|[()+\-*/,]|sqrt|cyclo)")


class _Parser:
    """Recursive-descent parser for the scalar expression grammar."""

    def __init__(self, text: str, backend: str, prec: int):
        self.text = text
        self.pos = 0
        self.backend = backend
        self.prec = prec
        self.tokens: list[tuple[str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                if text[pos:].strip():
                    raise ParseError("unexpected character", pos)
                break
            self.tokens.append((m.group(1), m.start(1)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def next(self):
        if self.i >= len(self.tokens):
            raise ParseError("unexpected end of expression", len(self.text))
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, want: str):
        tok, at = self.next()
        if tok != want:
            raise ParseError(f"expected '{want}', found '{tok}'", at)

    def _lift(self, value) -> Scalar:
        if self.backend == "exact":
            return value
        return Scalar.from_mpc(value.to_mpc(self.prec), self.prec)

    def parse(self) -> Scalar:
        value = self.expr()
        if self.i < len(self.tokens):
            raise ParseError("trailing input", self.tokens[self.i][1])
        return value

    def expr(self) -> Scalar:
        value = self.term()
        while self.peek() in ("+", "-"):
            op, _ = self.next()
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Scalar:
        value = self.factor()
        while self.peek() in ("*", "/"):
            op, at = self.next()
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by zero", at)
                value = value / rhs
        return value

    def factor(self) -> Scalar:
        tok, at = self.next()
        if tok == "-":
            return -self.factor()
        if tok == "(":
            value = self.expr()
            self.expect(")")
            return value
        if tok == "sqrt":
            self.expect("(")
            arg, aat = self.next()
            if not arg.isdigit() or int(arg) <= 0:
                raise ParseError("sqrt expects a positive integer", aat)
            self.expect(")")
            return self._lift(Scalar.exact_sqrt(int(arg)))
        if tok == "cyclo":
            self.expect("(")
            n, nat = self.next()
            if not n.isdigit() or int(n) <= 0:
                raise ParseError("cyclo order must be a positive integer", nat)
            self.expect(",")
            neg = False
            k, kat = self.next()
            if k == "-":
                neg = True
                k, kat = self.next()
            if not k.isdigit():
                raise ParseError("cyclo exponent must be an integer", kat)
            self.expect(")")
            kk = -int(k) if neg else int(k)
            return self._lift(Scalar.exact_cyclo(int(n), kk))
        if tok.isdigit():
            num = int(tok)
            if self.peek() == "/" and self._rational_ahead():
                self.next()
                den, dat = self.next()
                if int(den) == 0:
                    raise ParseError("division by zero", dat)
                return self._lift(Scalar.exact(Fraction(num, int(den))))
            return self._lift(Scalar.exact(num))
        raise ParseError(f"unexpected token '{tok}'", at)

    def _rational_ahead(self) -> bool:
        # int "/" posint binds as a rational literal only when the next
        # token is a bare integer (not an opening parenthesis etc.)
        if self.i + 1 >= len(self.tokens):
            return False
        nxt = self.tokens[self.i + 1][0]
        return nxt.isdigit()


def parse_scalar(
    text: str, backend: str = "exact", precision: int = DEFAULT_PRECISION
) -> Scalar:
    """Parse a scalar expression string into a normalized :class:`Scalar`.

    Exact mode raises :class:`NotExactlyRepresentable` for quotients leaving
    the normal form; float mode evaluates everything at ``precision`` bits.
    """
    if backend not in ("exact", "float"):
        raise ScalarError(f"unknown backend {backend!r}")
    if backend == "float":
        # evaluate exact subexpressions, then divide numerically: this keeps
        # expressions like 1/(1+sqrt(5)) parseable in float mode
        parser = _Parser(text, "float", precision)
        return parser.parse()
    return _Parser(text, "exact", precision).parse()
