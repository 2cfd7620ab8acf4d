import random

import pytest

from tubecalc.homspace import Calculus, HomspaceError
from tubecalc.scalars import Scalar, TolerancePolicy, approx_eq

TOL = 1e-40


@pytest.fixture(scope="module")
def fibc(fib):
    return Calculus(fib)


@pytest.fixture(scope="module")
def z2c(vecz2):
    return Calculus(vecz2)


def close(value, expect, tol=TOL):
    return float((value - expect).abs_mpf()) <= tol


# -- dimensions -------------------------------------------------------------


def test_dim_unit_word(z2c, vecz2):
    one = vecz2.by_name("1")
    assert z2c.dim(z2c.word((one,))) == 1


def test_dim_fib_tau4(fibc, fib):
    tau = fib.by_name("tau")
    assert fibc.dim(fibc.word((tau,) * 4)) == 2
    assert fibc.dim(fibc.word((tau,) * 3)) == 1
    assert fibc.dim(fibc.word((tau,) * 2)) == 1


def test_dim_vecz2_ggg_is_zero(z2c, vecz2):
    g = vecz2.by_name("g")
    assert z2c.dim(z2c.word((g, g, g))) == 0


def test_incomposable_word_rejected(m2):
    calc = Calculus(m2)
    with pytest.raises(HomspaceError):
        calc.word((m2.by_name("x01"), m2.by_name("x01")))


# -- rotation ---------------------------------------------------------------


def test_rotate_unit_both_ways(fibc, fib):
    tau = fib.by_name("tau")
    e = fibc.unit_vector(tau)  # on (tau, tau) both labels self dual
    r = fibc.rotate(e)
    # e_x viewed in the dual arrangement is again the unit morphism
    direct = fibc.ins_pair(
        fibc.empty_vector(0), 0, tau, fib.sqrt_d(tau) * fib.pivotal(tau)
    )
    assert fibc.max_residual(r, direct) <= TOL


def test_rotate_periodicity(fibc, fib):
    rng = random.Random(3)
    tau, one = fib.by_name("tau"), fib.by_name("1")
    for labels in [(tau, tau, tau), (tau, tau, tau, tau), (tau, one, tau),
                   (one, tau, tau, tau, tau)]:
        word = fibc.word(labels)
        v = fibc.random_vector(word, rng)
        r = v
        for _ in range(len(labels)):
            r = fibc.rotate(r)
        assert fibc.max_residual(r, v) <= TOL


def test_rotate_inverse(fibc, fib):
    rng = random.Random(5)
    tau = fib.by_name("tau")
    word = fibc.word((tau, tau, tau, tau))
    v = fibc.random_vector(word, rng)
    assert fibc.max_residual(fibc.rotate_inv(fibc.rotate(v)), v) <= TOL


def test_rotate_zero(fibc, fib):
    tau = fib.by_name("tau")
    z = fibc.zero_vector(fibc.word((tau, tau, tau)))
    assert fibc.rotate(z).is_zero()


# -- pairing and dual bases ---------------------------------------------------


def test_pair_unit_gives_dimension(fibc, fib):
    tau = fib.by_name("tau")
    e = fibc.unit_vector(tau)
    val = fibc.pair(e, e)
    assert close(val, fib.d(tau))


def test_pair_zero(fibc, fib):
    tau = fib.by_name("tau")
    e = fibc.unit_vector(tau)
    z = fibc.zero_vector(fibc.word((tau, tau)))
    assert fibc.pair(e, z).is_zero()


def test_dual_basis_gram(fibc, fib):
    tau = fib.by_name("tau")
    for labels in [(tau, tau), (tau, tau, tau), (tau, tau, tau, tau)]:
        word = fibc.word(labels)
        basis, duals = fibc.dual_basis(word)
        for i, dual in enumerate(duals):
            for j, vec in enumerate(basis):
                val = fibc.pair(dual, vec)
                expect = fib.one if i == j else fib.zero
                assert close(val, expect)


def test_dual_basis_unit_normalisation(fibc, fib):
    """(e_a, e_a / d_a) is a dual pair of the two-leg space."""
    tau = fib.by_name("tau")
    word = fibc.word((fib.dual(tau), tau))
    basis, duals = fibc.dual_basis(word)
    assert len(basis) == 1
    e = fibc.unit_vector(tau)  # same word, self (reversed-)dual
    assert close(fibc.pair(e.scaled(1 / fib.d(tau)), e), fib.one)


def test_empty_word_dual_basis(z2c, vecz2):
    g = vecz2.by_name("g")
    word = z2c.word((g, g, g))
    basis, duals = z2c.dual_basis(word)
    assert basis == [] and duals == []


# -- composition and units ----------------------------------------------------


def test_compose_unit_identity(fibc, fib):
    """f composed with the unit along a single label returns f."""
    rng = random.Random(7)
    tau = fib.by_name("tau")
    word = fibc.word((tau, tau, tau, tau))
    f = fibc.random_vector(word, rng)
    e = fibc.unit_vector(tau)  # on (tau, tau): starts with tau
    glued = fibc.compose(f, e, 1)
    assert glued.word == word
    assert fibc.max_residual(glued, f) <= TOL


def test_compose_units_give_composite_unit(fibc, fib):
    """e_{xy} equals e_x glued to e_y along the interposed unit."""
    tau = fib.by_name("tau")
    exy = fibc.unit_vector_word((tau, tau))
    ex = fibc.unit_vector(tau)                 # (xbar, x)
    ey_rot = fibc.rotate(fibc.unit_vector(tau))  # (y, ybar)
    v = fibc.concat(ex, ey_rot)                # (xbar, x, y, ybar)
    # transport to the canonical arrangement (ybar, xbar, x, y)
    v = fibc.rotate_by(v, 1)
    assert fibc.max_residual(v, exy) <= TOL


def test_compose_symmetry(fibc, fib):
    """f glued to g along y equals g glued to f along dual y."""
    rng = random.Random(11)
    tau = fib.by_name("tau")
    wf = fibc.word((tau, tau, tau))  # f in H<x ybar> shape: x=(tau,tau), ybar=tau
    wg = fibc.word((tau, tau, tau))
    f = fibc.random_vector(wf, rng)
    g = fibc.random_vector(wg, rng)
    lhs = fibc.compose(f, g, 1)  # glue f's last (dual y) with g's first (y)
    rhs = fibc.compose(g, f, 1)  # glue g's last with f's first
    # lhs lives on (tau,tau | tau,tau) starting from f's remainder; rhs is the
    # cyclic rotation starting from g's remainder
    assert fibc.max_residual(fibc.rotate_by(lhs, 2), rhs) <= TOL


def test_ptrace_zero(fibc, fib):
    tau = fib.by_name("tau")
    z = fibc.zero_vector(fibc.word((tau, tau, tau, tau)))
    assert fibc.ptrace(z, 1).is_zero()


def test_trace_of_unit(z2c, vecz2, fibc, fib):
    g = vecz2.by_name("g")
    assert close(z2c.trace(z2c.unit_vector(g)), vecz2.one)
    tau = fib.by_name("tau")
    assert close(fibc.trace(fibc.unit_vector(tau)), fib.d(tau))


# -- dominance, base change, pairing properties --------------------------------


def test_dominance(fibc, fib):
    """e_{ab} decomposes as sum over simples of dual basis pairs weighted by d_t."""
    for a in range(2):
        for b in range(2):
            eab = fibc.unit_vector_word((a, b))
            total = fibc.zero_vector(eab.word)
            for t in range(2):
                try:
                    wt = fibc.word((fib.dual(t), a, b))
                except HomspaceError:
                    continue
                basis, duals = fibc.dual_basis(wt)
                for alpha, alphabar in zip(basis, duals):
                    # alphabar on (bbar, abar, t) ends with t; alpha starts
                    # with dual t: glue them along t
                    glued = fibc.compose(alphabar, alpha, 1)
                    total = total + glued.scaled(fib.d(t))
            assert total.word == eab.word
            assert fibc.max_residual(total, eab) <= 1e-38


def test_base_change(fibc, fib):
    """sum_i (alphabar_i . f) (x) alpha_i = sum_j betabar_j (x) (f . beta_j)."""
    rng = random.Random(23)
    tau = fib.by_name("tau")
    # f in H<a b> with a = b = tau
    f = fibc.random_vector(fibc.word((tau, tau)), rng)
    x = tau
    wa = fibc.word((tau, x))          # H<a x>
    wb = fibc.word((fib.dual(tau), x))  # H<dual b, x>? bases of H<bbar x>
    alphas, alphabars = fibc.dual_basis(wa)
    betas, betabars = fibc.dual_basis(wb)
    # lhs: (alphabar_i composed with f along a) tensor alpha_i
    lhs = {}
    for alpha, alphabar in zip(alphas, alphabars):
        # alphabar on (xbar, abar): glue its abar leg against f's a leg
        glued = fibc.compose(fibc.rotate_by(f, 1), fibc.rotate_by(alphabar, 1), 1)
        # f rotated: (b, a); alphabar rotated: (abar, xbar); glue -> (b, xbar)
        for tree, c in glued.coeffs.items():
            for tree2, c2 in alpha.coeffs.items():
                key = (tree, tree2)
                lhs[key] = lhs.get(key, fib.zero) + c * c2
    rhs = {}
    for beta, betabar in zip(betas, betabars):
        # f glued with beta along b: beta on (bbar, x); f on (a, b)
        glued = fibc.compose(f, beta, 1)  # (a, x)
        # matching tensor-leg order: betabar (x) (f.beta): left factor on (xbar, b)
        for tree, c in betabar.coeffs.items():
            for tree2, c2 in glued.coeffs.items():
                key = (tree, tree2)
                rhs[key] = rhs.get(key, fib.zero) + c * c2
    # compare: lhs lives on (b, xbar) (x) (a, x); rhs on (xbar, b) (x) (a, x).
    # rotate the first factor of lhs to (xbar, b) coordinates via the matrix.
    total = 0.0
    for key in set(lhs) | set(rhs):
        pass
    # rotate lhs first factors explicitly
    from collections import defaultdict
    lhs_rot = defaultdict(lambda: fib.zero)
    word_bx = fibc.word((tau, fib.dual(x)))
    for (t1, t2), c in lhs.items():
        vec = fibc.rotate(fibc.basis_vector(word_bx, t1))
        for t1r, cr in vec.coeffs.items():
            lhs_rot[(t1r, t2)] = lhs_rot[(t1r, t2)] + c * cr
    worst = 0.0
    for key in set(lhs_rot) | set(rhs):
        a = lhs_rot.get(key, fib.zero)
        b = rhs.get(key, fib.zero)
        worst = max(worst, float((a - b).abs_mpf()))
    assert worst <= 1e-38


def test_pairing_property_scalar(fibc, fib):
    """d_y f o_a g = <f, g> e_y for simple y."""
    rng = random.Random(31)
    tau = fib.by_name("tau")
    y = tau
    # f in H<a y> with a = (tau, tau); g in H<ybar abar>
    f = fibc.random_vector(fibc.word((tau, tau, y)), rng)
    g = fibc.random_vector(fibc.word((fib.dual(y), tau, tau)), rng)
    # glue along a = two legs: f rotated to put a at the end: (y, a1, a2)
    frot = fibc.rotate_by(f, 2)
    lhs = fibc.compose(frot, fibc.rotate_by(g, 1), 2).scaled(fib.d(y))
    # pairing <f, g>: f over the reversed dual word of g's word?
    # pair(u, v) with v = g on (ybar abar) needs u on rev dual = (a, y): f.
    val = fibc.pair(f, g)
    ey = fibc.unit_vector(y)
    # lhs lives on (y, ybar): unit rep is on (ybar, y); rotate
    assert fibc.max_residual(fibc.rotate(lhs), ey.scaled(val)) <= 1e-37


def test_pairing_multiplicativity(fibc, fib):
    """<f *_y g, h *_y k> = <f,k><g,h> on random vectors."""
    rng = random.Random(37)
    tau = fib.by_name("tau")
    y = tau
    f = fibc.random_vector(fibc.word((tau, y)), rng)        # H<a y>, a=tau
    g = fibc.random_vector(fibc.word((fib.dual(y), tau)), rng)  # H<ybar b>, b=tau
    h = fibc.random_vector(fibc.word((fib.dual(tau), y)), rng)  # H<bbar y>
    k = fibc.random_vector(fibc.word((fib.dual(y), fib.dual(tau))), rng)  # H<ybar abar>
    fog = fibc.compose(f, g, 1, scaled=True)    # H<a b>
    hok = fibc.compose(h, k, 1, scaled=True)    # H<bbar abar>
    lhs = fibc.pair(fog, hok) if False else fibc.pair(hok, fog)
    rhs = fibc.pair(k, f) * fibc.pair(h, g) if False else fibc.pair(k, f) * fibc.pair(h, g)
    # orientation: pair(u, v) pairs u over rev-dual of v's word
    assert close(lhs, rhs, 1e-36)


# -- star resolution -----------------------------------------------------------


def test_star_simple_is_identity(fibc, fib):
    rng = random.Random(41)
    tau = fib.by_name("tau")
    # f on (a, x, b, xbar, c) with a=tau, x=tau, b=tau, xbar=tau, c=(tau)
    word = fibc.word((tau, tau, tau, tau, tau))
    f = fibc.random_vector(word, rng)
    res = fibc.star(f, 2, 1, 4)
    assert set(res) <= {tau, fib.by_name("1")}
    # the x-component reproduces f, other components vanish
    assert fibc.max_residual(res[tau], f) <= 1e-37
    one = fib.by_name("1")
    if one in res:
        assert fibc.norm(res[one]) <= 1e-37


def test_star_distributes_over_gluing(fibc, fib):
    """star_y(f o_z g) = star_y(f) o_z g on random data."""
    rng = random.Random(43)
    tau = fib.by_name("tau")
    # f on (ybar, x, y, z); g on (zbar, w1, w2); all labels tau
    f = fibc.random_vector(fibc.word((tau, tau, tau, tau)), rng)
    g = fibc.random_vector(fibc.word((tau, tau, tau)), rng)
    fog = fibc.compose(f, g, 1)  # (ybar, x, y, w1, w2)
    lhs = fibc.star(fibc.rotate(fog), 2, 1, 5)  # on (x, y, w1, w2, ybar)
    star_f = fibc.star(fibc.rotate(f), 2, 1, 4)  # on (x, y, z, ybar)
    for t in set(lhs) | set(star_f):
        vec = lhs.get(t)
        comp = star_f.get(t)
        if comp is None:
            assert fibc.norm(vec) <= 1e-36
            continue
        if vec is None:
            continue
        # comp on (x, t, z, tbar): expose the z-leg, glue g, restore order
        crot = fibc.rotate_by(comp, 3)      # (tbar, x, t, z)
        glued = fibc.compose(crot, g, 1)    # (tbar, x, t, w1, w2)
        glued = fibc.rotate_by(glued, 1)    # (x, t, w1, w2, tbar)
        assert fibc.max_residual(glued, vec) <= 1e-36


def test_star_iterated_resolution(fibc, fib):
    """sum_t star_{xt}(star_{yz}(f)_t) = star_{xyz}(f) on random data."""
    rng = random.Random(47)
    tau = fib.by_name("tau")
    # f on (a, x, y, z, b, zbar, ybar, xbar) with everything tau, a=b=tau
    word = fibc.word((tau,) * 8)
    f = fibc.random_vector(word, rng)
    # segments: x=legs 2, (y,z)=legs 3-4, b=leg 5, duals at 6-8
    lhs_parts = {}
    inner = fibc.star(f, 3, 2, 6)  # resolve (y,z) pair -> words (a,x,t,b,tbar,xbar)
    for t, vec in inner.items():
        outer = fibc.star(vec, 2, 2, 5)  # resolve (x,t) pair
        for s, vec2 in outer.items():
            lhs_parts[s] = lhs_parts.get(s) + vec2 if s in lhs_parts else vec2
    rhs = fibc.star(f, 2, 3, 6)
    for s in set(lhs_parts) | set(rhs):
        a = lhs_parts.get(s)
        b = rhs.get(s)
        if a is None:
            assert fibc.norm(b) <= 1e-35
        elif b is None:
            assert fibc.norm(a) <= 1e-35
        else:
            assert fibc.max_residual(a, b) <= 1e-35


def test_star_commutes(fibc, fib):
    """star_z(star_y(f)) = star_y(star_z(f)) with two resolvable pairs."""
    rng = random.Random(53)
    tau = fib.by_name("tau")
    # f on (x, y, z, w, zbar, ybar): pairs y at 2/6 and z at 3/5
    word = fibc.word((tau,) * 6)
    f = fibc.random_vector(word, rng)
    ab = {}
    for t, v in fibc.star(f, 2, 1, 6).items():  # resolve y-pair
        for s, v2 in fibc.star(v, 3, 1, 5).items():  # then z-pair
            ab[(t, s)] = ab.get((t, s)) + v2 if (t, s) in ab else v2
    ba = {}
    for s, v in fibc.star(f, 3, 1, 5).items():
        for t, v2 in fibc.star(v, 2, 1, 6).items():
            ba[(t, s)] = ba.get((t, s)) + v2 if (t, s) in ba else v2
    for key in set(ab) | set(ba):
        a, b = ab.get(key), ba.get(key)
        if a is None:
            assert fibc.norm(b) <= 1e-35
        elif b is None:
            assert fibc.norm(a) <= 1e-35
        else:
            assert fibc.max_residual(a, b) <= 1e-35
