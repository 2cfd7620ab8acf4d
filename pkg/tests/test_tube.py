import random

import pytest

from tubecalc import linalg
from tubecalc.homspace import Calculus
from tubecalc.tube import TubeAlgebra, TubeElement, build


@pytest.fixture(scope="module")
def z2t(vecz2):
    return build(vecz2)


@pytest.fixture(scope="module")
def fibt(fib):
    return build(fib)


@pytest.fixture(scope="module")
def m2t(m2):
    return build(m2)


def residual(T, f: TubeElement, g: TubeElement) -> float:
    worst = 0.0
    for key in set(f.coeffs) | set(g.coeffs):
        a = f.coeffs.get(key, T.spec.zero)
        b = g.coeffs.get(key, T.spec.zero)
        worst = max(worst, float((a - b).abs_mpf()))
    return worst


def random_element(T, rng, grade=None):
    out = TubeElement()
    for i, key in enumerate(T.basis):
        if grade and (key.a, key.b) != grade:
            continue
        c = rng.uniform(-1, 1)
        from tubecalc.scalars import Scalar
        out = out + T.basis_element(i).scaled(Scalar.from_mpc(c, T.spec.precision))
    return out


def test_dimensions(z2t, fibt, m2t):
    assert z2t.dim == 4
    assert fibt.dim == 7
    assert m2t.dim == 4


def test_regular_grades_fib(fibt, fib):
    by_incoming = {}
    for key in fibt.basis:
        by_incoming[key.b] = by_incoming.get(key.b, 0) + 1
    one, tau = fib.by_name("1"), fib.by_name("tau")
    assert by_incoming == {one: 3, tau: 4}


def test_vecz2_weld_group_law(z2t, vecz2):
    g = vecz2.by_name("g")
    one = vecz2.by_name("1")
    # basis element f_{g,g}: grades a=b=g, around-label g
    def pick(a, b, x):
        for i, key in enumerate(z2t.basis):
            if (key.a, key.b, key.x) == (a, b, x):
                return z2t.basis_element(i)
        raise AssertionError("missing basis element")

    fgg = pick(g, g, g)
    prod = z2t.weld(fgg, fgg)
    fge = pick(g, g, one)
    assert residual(z2t, prod, fge) <= 1e-30


def test_local_units(fibt, fib):
    rng = random.Random(2)
    f = random_element(fibt, rng)
    e = fibt.local_unit(fibt.grades)
    assert residual(fibt, fibt.weld(e, f), f) <= 1e-36
    assert residual(fibt, fibt.weld(f, e), f) <= 1e-36


def test_weld_associativity_all_basis_triples(fibt):
    n = fibt.dim
    for i in range(n):
        f = fibt.basis_element(i)
        for j in range(n):
            g = fibt.basis_element(j)
            fg = fibt.weld(f, g)
            for k in range(n):
                h = fibt.basis_element(k)
                lhs = fibt.weld(fg, h)
                rhs = fibt.weld(f, fibt.weld(g, h))
                assert residual(fibt, lhs, rhs) <= 1e-35


def test_weld_associativity_m2(m2t):
    n = m2t.dim
    for i in range(n):
        for j in range(n):
            for k in range(n):
                f, g, h = (m2t.basis_element(t) for t in (i, j, k))
                lhs = m2t.weld(m2t.weld(f, g), h)
                rhs = m2t.weld(f, m2t.weld(g, h))
                assert residual(m2t, lhs, rhs) <= 1e-35


def test_epsilon_values(fibt, fib):
    tau = fib.by_name("tau")
    e_tau = fibt.unit(tau)
    val = fibt.epsilon(e_tau)
    assert float((val - fib.d(tau)).abs_mpf()) <= 1e-36
    # basis elements with nontrivial around-label have vanishing trace form
    for i, key in enumerate(fibt.basis):
        if not fib.is_unit(key.x):
            assert fibt.epsilon(fibt.basis_element(i)).is_zero()


def test_epsilon_symmetric(fibt):
    rng = random.Random(5)
    for _ in range(10):
        f = random_element(fibt, rng)
        g = random_element(fibt, rng)
        lhs = fibt.epsilon(fibt.weld(f, g))
        rhs = fibt.epsilon(fibt.weld(g, f))
        assert float((lhs - rhs).abs_mpf()) <= 1e-35


def test_epsilon_nondegenerate(fibt, z2t, m2t):
    for T in (fibt, z2t, m2t):
        n = T.dim
        gram = [
            [
                T.epsilon(T.weld(T.basis_element(i), T.basis_element(j)))
                for j in range(n)
            ]
            for i in range(n)
        ]
        assert len(linalg.row_echelon(gram, tol=1e-30)[0]) == n


def test_sharp_involution(fibt):
    for i in range(fibt.dim):
        f = fibt.basis_element(i)
        assert residual(fibt, fibt.sharp(fibt.sharp(f)), f) <= 1e-35


def test_sharp_of_unit(fibt, fib):
    tau = fib.by_name("tau")
    e = fibt.unit(tau)
    sharp = fibt.sharp(e)
    assert residual(fibt, sharp, fibt.unit(fib.dual(tau))) <= 1e-35


def test_sharp_antimultiplicative(fibt):
    rng = random.Random(7)
    for _ in range(5):
        f = random_element(fibt, rng)
        g = random_element(fibt, rng)
        lhs = fibt.sharp(fibt.weld(f, g))
        rhs = fibt.weld(fibt.sharp(g), fibt.sharp(f))
        assert residual(fibt, lhs, rhs) <= 1e-34


def test_twist_vecz2(z2t, vecz2):
    one, g = vecz2.by_name("1"), vecz2.by_name("g")
    assert residual(z2t, z2t.twist(one), z2t.unit(one)) <= 1e-35
    tg = z2t.twist(g)
    # expands to the (g, g, g) basis element with unit normalisation d_g = 1
    expect = None
    for i, key in enumerate(z2t.basis):
        if (key.a, key.b, key.x) == (g, g, g):
            expect = z2t.basis_element(i)
    assert residual(z2t, tg, expect) <= 1e-35


def test_twist_invertible(fibt, fib):
    for a in fibt.grades:
        t = fibt.twist(a)
        tinv = fibt.twist_inverse(a)
        prod = fibt.weld(t, tinv)
        assert residual(fibt, prod, fibt.unit(a)) <= 1e-34
        prod2 = fibt.weld(tinv, t)
        assert residual(fibt, prod2, fibt.unit(a)) <= 1e-34


def test_twist_central(fibt):
    rng = random.Random(11)
    for a in fibt.grades:
        for b in fibt.grades:
            f = random_element(fibt, rng, grade=(a, b))
            lhs = fibt.weld(fibt.twist(a), f)
            rhs = fibt.weld(f, fibt.twist(b))
            assert residual(fibt, lhs, rhs) <= 1e-34
