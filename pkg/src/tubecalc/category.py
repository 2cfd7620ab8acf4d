"""Presentation data for a spherical semisimple multifusion category.

A category is specified by a JSON document listing 0-cells, simple 1-cells
with duals and quantum dimensions, fusion multiplicities and F-symbols (the
change of basis between left- and right-nested fusion trees).  The loader
builds dense F-blocks, fills the unit-label blocks demanded by the strictness
gauge, and exposes the lookup tables every other module consumes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import mpmath

from . import linalg
from .scalars import (
    DEFAULT_PRECISION,
    Scalar,
    ScalarError,
    TolerancePolicy,
    parse_scalar,
)


class SpecError(Exception):
    """Structural problem in a category specification document."""


@dataclass(frozen=True)
class SimpleLabel:
    id: int
    name: str
    source: int
    target: int
    dual: int
    qdim: Scalar
    sqrt_qdim: Scalar
    pivotal: Scalar

    def __repr__(self):
        return f"<{self.name}>"


class FusionRules:
    """Sparse fusion multiplicities N[a,b]^c over label ids."""

    def __init__(self, table: dict[tuple[int, int, int], int]):
        self._table = dict(table)
        self._outcomes: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for (a, b, c), m in sorted(table.items()):
            if m > 0:
                self._outcomes.setdefault((a, b), []).append((c, m))

    def N(self, a: int, b: int, c: int) -> int:
        return self._table.get((a, b, c), 0)

    def outcomes(self, a: int, b: int) -> list[tuple[int, int]]:
        return self._outcomes.get((a, b), [])

    def items(self):
        return self._table.items()


class FSymbolTable:
    """Dense F-blocks indexed by the outer labels (a, b, c; d).

    A block row is a left-nested tree ``(e, mu, nu)`` for
    ``d -> (a x b) x c`` and a column a right-nested tree ``(f, rho, sigma)``
    for ``d -> a x (b x c)``; the matrix expresses left trees in terms of
    right trees.
    """

    def __init__(self, spec: "CategorySpec", entries):
        self.spec = spec
        self._entries = entries
        self._blocks: dict[tuple[int, int, int, int], tuple] = {}
        self._inverses: dict[tuple[int, int, int, int], list] = {}

    def left_keys(self, a, b, c, d):
        N = self.spec.fusion.N
        keys = []
        for e in range(len(self.spec.simples)):
            for mu in range(N(a, b, e)):
                for nu in range(N(e, c, d)):
                    keys.append((e, mu, nu))
        return keys

    def right_keys(self, a, b, c, d):
        N = self.spec.fusion.N
        keys = []
        for f in range(len(self.spec.simples)):
            for rho in range(N(b, c, f)):
                for sigma in range(N(a, f, d)):
                    keys.append((f, rho, sigma))
        return keys

    def block(self, a, b, c, d):
        """Return ``(left_keys, right_keys, rows, cols, matrix)`` for a block."""
        key = (a, b, c, d)
        if key in self._blocks:
            return self._blocks[key]
        spec = self.spec
        lk = self.left_keys(a, b, c, d)
        rk = self.right_keys(a, b, c, d)
        if len(lk) != len(rk):
            raise SpecError(
                f"non-square F-block at {spec.names(key)}: {len(lk)} x {len(rk)}"
            )
        li = {t: i for i, t in enumerate(lk)}
        ri = {t: i for i, t in enumerate(rk)}
        mat = linalg.zeros(len(lk), len(rk), spec.backend, spec.precision)
        unit = spec.unit_ids
        if a in unit or b in unit or c in unit:
            # strictness gauge: unit-label blocks are identity in the
            # canonical pairing of surviving multiplicity indices
            for (e, mu, nu) in lk:
                if a in unit:
                    match = (d, nu, 0)
                elif b in unit:
                    match = (c, 0, nu)
                else:  # c unit
                    match = (b, mu, 0)
                if match in ri:
                    mat[li[(e, mu, nu)]][ri[match]] = spec.one
            for entry in self._entries.get(key, []):
                (ekey, fkey), value = entry
                expected = mat[li[ekey]][ri[fkey]]
                if not self._entry_matches(expected, value):
                    raise SpecError(
                        f"F-entry at {spec.names(key)} violates the unit gauge"
                    )
        else:
            for (ekey, fkey), value in self._entries.get(key, []):
                if ekey not in li or fkey not in ri:
                    raise SpecError(
                        f"inadmissible F-entry {spec.names(key)} {ekey}/{fkey}"
                    )
                mat[li[ekey]][ri[fkey]] = value
        result = (lk, rk, li, ri, mat)
        self._blocks[key] = result
        return result

    def _entry_matches(self, expected: Scalar, value: Scalar) -> bool:
        if expected.backend == "exact":
            return expected == value
        return (expected - value).abs_mpf() < mpmath.mpf("1e-12")

    def inverse(self, a, b, c, d):
        key = (a, b, c, d)
        if key not in self._inverses:
            _, _, _, _, mat = self.block(a, b, c, d)
            if not mat:
                self._inverses[key] = []
            else:
                try:
                    self._inverses[key] = linalg.inverse(
                        mat, tol=self.spec.pivot_tol
                    )
                except ValueError:
                    raise SpecError(
                        f"singular F-block at {self.spec.names(key)}"
                    ) from None
        return self._inverses[key]


class CategorySpec:
    """Immutable presentation of a spherical multifusion category."""

    def __init__(
        self,
        zero_cells: int,
        simples: list[SimpleLabel],
        fusion: FusionRules,
        f_entries,
        metadata: dict,
        backend: str,
        precision: int,
    ):
        self.zero_cells = zero_cells
        self.simples = simples
        self.fusion = fusion
        self.metadata = metadata
        self.backend = backend
        self.precision = precision
        self.one = Scalar.one(backend, precision)
        self.zero = Scalar.zero(backend, precision)
        # pivot threshold for float-mode eliminations inside the loader
        self.pivot_tol = 0 if backend == "exact" else mpmath.mpf("1e-40")
        self.unit_ids = self._detect_units()
        self.f_symbols = FSymbolTable(self, f_entries)
        self._unit_of_cell = {}
        for u in self.unit_ids:
            self._unit_of_cell[simples[u].source] = u

    # -- label helpers -----------------------------------------------------

    def names(self, ids) -> str:
        return "(" + ",".join(self.simples[i].name for i in ids) + ")"

    def by_name(self, name: str) -> int:
        for s in self.simples:
            if s.name == name:
                return s.id
        raise SpecError(f"dangling label {name!r}")

    def dual(self, a: int) -> int:
        return self.simples[a].dual

    def d(self, a: int) -> Scalar:
        return self.simples[a].qdim

    def sqrt_d(self, a: int) -> Scalar:
        return self.simples[a].sqrt_qdim

    def pivotal(self, a: int) -> Scalar:
        return self.simples[a].pivotal

    def source(self, a: int) -> int:
        return self.simples[a].source

    def target(self, a: int) -> int:
        return self.simples[a].target

    def is_unit(self, a: int) -> bool:
        return a in self.unit_ids

    def unit(self, cell: int) -> int:
        try:
            return self._unit_of_cell[cell]
        except KeyError:
            raise SpecError(f"0-cell {cell} has no unit simple") from None

    def diagonal_simples(self) -> list[int]:
        return [s.id for s in self.simples if s.source == s.target]

    def N(self, a: int, b: int, c: int) -> int:
        return self.fusion.N(a, b, c)

    def _detect_units(self) -> set[int]:
        units = set()
        for cand in self.simples:
            if cand.source != cand.target:
                continue
            u = cand.id
            ok = True
            for b in self.simples:
                if b.source == cand.source:
                    for c in self.simples:
                        want = 1 if c.id == b.id else 0
                        if self.fusion.N(u, b.id, c.id) != want:
                            ok = False
                            break
                if not ok:
                    break
                if b.target == cand.source:
                    for c in self.simples:
                        want = 1 if c.id == b.id else 0
                        if self.fusion.N(b.id, u, c.id) != want:
                            ok = False
                            break
                if not ok:
                    break
            if ok:
                units.add(u)
        cells = sorted({self.simples[u].source for u in units})
        if cells != list(range(self.zero_cells)) or len(units) != self.zero_cells:
            raise SpecError("could not identify exactly one unit simple per 0-cell")
        return units


def load_spec(
    document,
    backend: str = "float",
    precision: int = DEFAULT_PRECISION,
) -> CategorySpec:
    """Load a category specification from JSON bytes, text, path or dict."""
    if isinstance(document, (bytes, str)) and not _looks_like_json(document):
        with open(document, "rb") as fh:
            document = fh.read()
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SpecError(f"schema violation: not valid JSON ({exc})") from None
    if not isinstance(document, dict):
        raise SpecError("schema violation: top level must be an object")

    def parse(text):
        try:
            return parse_scalar(str(text), backend, precision)
        except ScalarError as exc:
            raise SpecError(f"scalar parse failure for {text!r}: {exc}") from None

    try:
        zero_cells = int(document["zero_cells"])
        raw_simples = document["simples"]
        raw_fusion = document.get("fusion", [])
        raw_f = document.get("F", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"schema violation: {exc}") from None
    if zero_cells < 1:
        raise SpecError("schema violation: zero_cells must be >= 1")

    name_to_id = {}
    for i, entry in enumerate(raw_simples):
        name = entry.get("name")
        if not isinstance(name, str) or name in name_to_id:
            raise SpecError(f"schema violation: bad or duplicate simple name {name!r}")
        name_to_id[name] = i

    simples = []
    for i, entry in enumerate(raw_simples):
        try:
            source, target = int(entry["source"]), int(entry["target"])
            dual_name = entry["dual"]
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"schema violation in simple {entry.get('name')}: {exc}")
        if not (0 <= source < zero_cells and 0 <= target < zero_cells):
            raise SpecError(f"schema violation: 0-cell out of range in {entry['name']}")
        if dual_name not in name_to_id:
            raise SpecError(f"dangling label {dual_name!r} (dual of {entry['name']})")
        simples.append(
            SimpleLabel(
                id=i,
                name=entry["name"],
                source=source,
                target=target,
                dual=name_to_id[dual_name],
                qdim=parse(entry["qdim"]),
                sqrt_qdim=parse(entry["sqrt_qdim"]),
                pivotal=parse(entry.get("pivotal", "1")),
            )
        )

    table = {}
    for entry in raw_fusion:
        try:
            a = name_to_id[entry["a"]]
            b = name_to_id[entry["b"]]
            c = name_to_id[entry["c"]]
            mult = int(entry.get("mult", 1))
        except KeyError as exc:
            raise SpecError(f"dangling label {exc} in fusion table") from None
        if mult < 1:
            raise SpecError("schema violation: fusion mult must be >= 1")
        sa, sb, sc = simples[a], simples[b], simples[c]
        if sa.target != sb.source or sa.source != sc.source or sb.target != sc.target:
            raise SpecError(
                f"schema violation: incomposable fusion triple "
                f"{sa.name},{sb.name}->{sc.name}"
            )
        table[(a, b, c)] = mult

    f_entries: dict[tuple, list] = {}
    for entry in raw_f:
        try:
            outer = tuple(name_to_id[entry[key]] for key in ("a", "b", "c", "d"))
            e = name_to_id[entry["e"]]
            f = name_to_id[entry["f"]]
        except KeyError as exc:
            raise SpecError(f"dangling label {exc} in F table") from None
        mu = int(entry.get("mu", 0))
        nu = int(entry.get("nu", 0))
        rho = int(entry.get("rho", 0))
        sigma = int(entry.get("sigma", 0))
        value = parse(entry["value"])
        f_entries.setdefault(outer, []).append(
            (((e, mu, nu), (f, rho, sigma)), value)
        )

    spec = CategorySpec(
        zero_cells=zero_cells,
        simples=simples,
        fusion=FusionRules(table),
        f_entries=f_entries,
        metadata={"name": document.get("name", ""), "notes": document.get("notes", "")},
        backend=backend,
        precision=precision,
    )
    # force assembly of every admissible F-block so structural errors
    # (non-square or singular blocks, gauge violations) surface at load time
    for a, b, c, d in _admissible_f_keys(spec):
        spec.f_symbols.block(a, b, c, d)
        spec.f_symbols.inverse(a, b, c, d)
    return spec


def _looks_like_json(document) -> bool:
    if isinstance(document, bytes):
        document = document[:64].decode("utf-8", "replace")
    return document.lstrip()[:1] in ("{", "[")


def _admissible_f_keys(spec: CategorySpec):
    n = len(spec.simples)
    for a in range(n):
        for b in range(n):
            if spec.target(a) != spec.source(b):
                continue
            for c in range(n):
                if spec.target(b) != spec.source(c):
                    continue
                for d in range(n):
                    if spec.source(d) != spec.source(a) or spec.target(d) != spec.target(c):
                        continue
                    if spec.f_symbols.left_keys(a, b, c, d):
                        yield (a, b, c, d)


def qdim(spec: CategorySpec, a) -> Scalar:
    """Stored quantum dimension of a simple, by id or name."""
    if isinstance(a, str):
        a = spec.by_name(a)
    if not (0 <= a < len(spec.simples)):
        raise SpecError(f"unknown label {a}")
    return spec.d(a)


class ValidationReport:
    """Per-check residuals; failures are entries, never exceptions."""

    def __init__(self, tol: float):
        self.tol = tol
        self.checks: dict[str, float] = {}
        self.messages: dict[str, str] = {}

    def record(self, name: str, residual, message: str = ""):
        residual = float(residual)
        self.checks[name] = max(residual, self.checks.get(name, 0.0))
        if message and residual > self.tol:
            self.messages[name] = message

    @property
    def passed(self) -> bool:
        return all(r <= self.tol for r in self.checks.values())

    def failures(self) -> list[str]:
        return [n for n, r in self.checks.items() if r > self.tol]

    def lines(self) -> list[str]:
        out = []
        for name in sorted(self.checks):
            r = self.checks[name]
            status = "PASS" if r <= self.tol else "FAIL"
            out.append(f"{name}: {status} (max residual {r:.3e})")
        return out

    def __str__(self):
        return "\n".join(self.lines())


def _residual(x: Scalar) -> float:
    return float(x.abs_mpf())


def validate(spec: CategorySpec, pol: TolerancePolicy | None = None) -> ValidationReport:
    """Run the full consistency suite and report per-check max residuals."""
    pol = pol or TolerancePolicy()
    report = ValidationReport(tol=pol.abs_tol)
    n = len(spec.simples)
    N = spec.fusion.N

    # unit structure and duality of the fusion ring
    for s in spec.simples:
        a, abar = s.id, s.dual
        report.record(
            "dual_involution",
            0 if spec.dual(abar) == a else 1,
            f"dual(dual({s.name})) != {s.name}",
        )
        report.record(
            "dual_cells",
            0 if (spec.source(abar) == s.target and spec.target(abar) == s.source) else 1,
        )
        report.record("dim_duality", _residual(spec.d(a) - spec.d(abar)))
        report.record(
            "sqrt_consistency",
            _residual(spec.sqrt_d(a) * spec.sqrt_d(a) - spec.d(a)),
        )
        # Schur: the unit occurs in a x b exactly when b is the dual of a
        u = spec.unit(s.source)
        for b in range(n):
            if spec.target(a) != spec.source(b):
                continue
            want = 1 if b == abar else 0
            report.record(
                "rigidity_unit_count",
                abs(N(a, b, u) - want),
                f"N({s.name},{spec.simples[b].name})^unit wrong",
            )
    for u in spec.unit_ids:
        report.record("unit_qdim", _residual(spec.d(u) - spec.one))
        report.record("unit_selfdual", 0 if spec.dual(u) == u else 1)
        report.record("unit_pivotal", _residual(spec.pivotal(u) - spec.one))

    # Frobenius reciprocity N_ab^c = N_{b cbar}^{abar} = N_{cbar a}^{bbar}
    for (a, b, c), m in spec.fusion.items():
        r1 = abs(m - N(b, spec.dual(c), spec.dual(a)))
        r2 = abs(m - N(spec.dual(c), a, spec.dual(b)))
        report.record("frobenius_reciprocity", max(r1, r2))

    # fusion associativity (dimension count of the two nestings)
    for a in range(n):
        for b in range(n):
            if spec.target(a) != spec.source(b):
                continue
            for c in range(n):
                if spec.target(b) != spec.source(c):
                    continue
                for d in range(n):
                    lhs = sum(N(a, b, e) * N(e, c, d) for e in range(n))
                    rhs = sum(N(b, c, f) * N(a, f, d) for f in range(n))
                    report.record("fusion_associativity", abs(lhs - rhs))

    # dimension equation d_a d_b = sum_c N_ab^c d_c
    for a in range(n):
        for b in range(n):
            if spec.target(a) != spec.source(b):
                continue
            total = spec.zero
            for c, m in spec.fusion.outcomes(a, b):
                total = total + m * spec.d(c)
            report.record("dimension_equation", _residual(spec.d(a) * spec.d(b) - total))

    # pentagon: two re-association paths from (((ab)c)d) to (a(b(cd)))
    _pentagon_check(spec, report)

    # snake identities for the cup/cap normalisation, plus trace round trips
    _snake_checks(spec, report)
    return report


def _f_entry(spec, a, b, c, d, ekey, fkey, inverse=False):
    lk, rk, li, ri, mat = spec.f_symbols.block(a, b, c, d)
    if ekey not in li or fkey not in ri:
        return spec.zero
    if inverse:
        inv = spec.f_symbols.inverse(a, b, c, d)
        return inv[ri[fkey]][li[ekey]]
    return mat[li[ekey]][ri[fkey]]


def _pentagon_check(spec: CategorySpec, report: ValidationReport):
    """Compare the two F-move paths on every admissible 4-letter tree space."""
    n = len(spec.simples)
    N = spec.fusion.N

    def b1_basis(a, b, c, d, e0):
        for e in range(n):
            for m1 in range(N(a, b, e)):
                for f in range(n):
                    for m2 in range(N(e, c, f)):
                        for m3 in range(N(f, d, e0)):
                            yield (e, f, m1, m2, m3)

    def b4_basis(a, b, c, d, e0):
        for p in range(n):
            for t1 in range(N(c, d, p)):
                for q in range(n):
                    for t2 in range(N(b, p, q)):
                        for t3 in range(N(a, q, e0)):
                            yield (p, q, t1, t2, t3)

    for a in range(n):
        for b in range(n):
            if spec.target(a) != spec.source(b):
                continue
            for c in range(n):
                if spec.target(b) != spec.source(c):
                    continue
                for d in range(n):
                    if spec.target(c) != spec.source(d):
                        continue
                    for e0 in range(n):
                        if spec.source(e0) != spec.source(a):
                            continue
                        if spec.target(e0) != spec.target(d):
                            continue
                        rows = list(b1_basis(a, b, c, d, e0))
                        if not rows:
                            continue
                        cols = list(b4_basis(a, b, c, d, e0))
                        for row in rows:
                            for col in cols:
                                lhs = _pentagon_lhs(spec, a, b, c, d, e0, row, col)
                                rhs = _pentagon_rhs(spec, a, b, c, d, e0, row, col)
                                report.record(
                                    "pentagon",
                                    _residual(lhs - rhs),
                                    f"pentagon fails at {spec.names((a, b, c, d))}",
                                )


def _pentagon_lhs(spec, a, b, c, d, e0, row, col):
    # path ((ab)c)d -> (a(bc))d -> a((bc)d) -> a(b(cd))
    (e, f, m1, m2, m3) = row
    (p, q, t1, t2, t3) = col
    n = len(spec.simples)
    N = spec.fusion.N
    total = spec.zero
    for g in range(n):
        for r1 in range(N(b, c, g)):
            for r2 in range(N(a, g, f)):
                c1 = _f_entry(spec, a, b, c, f, (e, m1, m2), (g, r1, r2))
                if c1.is_zero():
                    continue
                for h in range(n):
                    for s1 in range(N(g, d, h)):
                        if h != q:
                            continue
                        c2 = _f_entry(spec, a, g, d, e0, (f, r2, m3), (h, s1, t3))
                        if c2.is_zero():
                            continue
                        c3 = _f_entry(spec, b, c, d, q, (g, r1, s1), (p, t1, t2))
                        if c3.is_zero():
                            continue
                        total = total + c1 * c2 * c3
    return total


def _pentagon_rhs(spec, a, b, c, d, e0, row, col):
    # path ((ab)c)d -> (ab)(cd) -> a(b(cd))
    (e, f, m1, m2, m3) = row
    (p, q, t1, t2, t3) = col
    N = spec.fusion.N
    total = spec.zero
    for u1 in range(N(c, d, p)):
        for u2 in range(N(e, p, e0)):
            c1 = _f_entry(spec, e, c, d, e0, (f, m2, m3), (p, u1, u2))
            if c1.is_zero() or u1 != t1:
                continue
            c2 = _f_entry(spec, a, b, p, e0, (e, m1, u2), (q, t2, t3))
            if c2.is_zero():
                continue
            total = total + c1 * c2
    return total


def _snake_checks(spec: CategorySpec, report: ValidationReport):
    """Cup/cap snake constants and homspace trace round trips."""
    from .homspace import Calculus  # deferred: homspace depends on this module

    for s in spec.simples:
        x, xbar = s.id, s.dual
        if spec.N(x, xbar, spec.unit(s.source)) != 1:
            report.record("snake", 1.0, f"missing cup vertex for {s.name}")
            continue
        f1x = _f_entry(
            spec, x, xbar, x, x, (spec.unit(s.source), 0, 0), (spec.unit(s.target), 0, 0)
        )
        f1xbar = _f_entry(
            spec, xbar, x, xbar, xbar,
            (spec.unit(s.target), 0, 0), (spec.unit(s.source), 0, 0),
        )
        g1x = _f_entry(
            spec, x, xbar, x, x,
            (spec.unit(s.source), 0, 0), (spec.unit(s.target), 0, 0), inverse=True,
        )
        g1xbar = _f_entry(
            spec, xbar, x, xbar, xbar,
            (spec.unit(s.target), 0, 0), (spec.unit(s.source), 0, 0), inverse=True,
        )
        d, p = spec.d(x), spec.pivotal(x)
        report.record("snake", _residual(d * p * f1x - spec.one))
        report.record("snake", _residual(d * f1xbar / p - spec.one))
        report.record("snake", _residual(d * g1x / p - spec.one))
        report.record("snake", _residual(d * p * g1xbar - spec.one))

    calc = Calculus(spec)
    for s in spec.simples:
        ex = calc.unit_vector(s.id)
        # left and right closures of the unit loop both give the dimension
        tl = calc.trace(ex)
        tr = calc.trace(calc.rotate(ex))
        report.record("trace_left_right", _residual(tl - tr))
        report.record("trace_left_right", _residual(tl - spec.d(s.id)))
    for s in spec.simples:
        for t in spec.simples:
            if s.target != t.source:
                continue
            # closing the trailing loop of the rotated two-strand unit
            # leaves the single-strand unit times the loop value d_t p_t
            ey = calc.unit_vector_word((s.id, t.id))
            rotated = calc.rotate(ey)
            traced = calc.ptrace(rotated, 1)
            expect = calc.unit_vector(s.id).scaled(spec.d(t.id) * spec.pivotal(t.id))
            report.record("ptrace_roundtrip", calc.max_residual(traced, expect))
        # genuine snake: create a dual pair next to a leg, cancel it against
        # the leg, and recover the pivotal coefficient times the original
        ex = calc.unit_vector(s.id)  # word (dual s, s)
        bent = calc.ins_pair(ex, 2, spec.dual(s.id), spec.sqrt_d(s.id))
        snaked = calc.ctr(bent, 2)
        report.record(
            "snake_roundtrip",
            calc.max_residual(snaked, ex.scaled(spec.pivotal(s.id))),
        )
