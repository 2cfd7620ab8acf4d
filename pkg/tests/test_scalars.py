import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from tubecalc.scalars import (
    BackendMismatch,
    NotExactlyRepresentable,
    ParseError,
    Scalar,
    TolerancePolicy,
    approx_eq,
    parse_scalar,
)


def test_parse_rational():
    s = parse_scalar("1/2")
    assert s.is_rational() and s.as_fraction() == Fraction(1, 2)


def test_parse_golden_ratio_float():
    s = parse_scalar("(1+sqrt(5))/2", backend="float")
    with mpmath.workprec(256):
        phi = (1 + mpmath.sqrt(5)) / 2
        assert abs(s.to_mpc() - phi) < mpmath.mpf("1e-60")


def test_parse_golden_ratio_exact():
    s = parse_scalar("(1+sqrt(5))/2", backend="exact")
    # phi^2 = phi + 1 exactly in the normal form
    assert s * s == s + 1


def test_parse_cyclo_unit():
    assert parse_scalar("cyclo(1,0)") == Scalar.exact(1)
    assert parse_scalar("cyclo(5,0)") == Scalar.exact(1)


def test_parse_errors_report_position():
    with pytest.raises(ParseError) as err:
        parse_scalar("1+%")
    assert err.value.position == 2
    with pytest.raises(ParseError):
        parse_scalar("sqrt(0)")
    with pytest.raises(ParseError):
        parse_scalar("cyclo(0,1)")
    with pytest.raises(ParseError):
        parse_scalar("1/0")


def test_division_by_zero_value():
    with pytest.raises(ParseError):
        parse_scalar("1/(2-2)")


def test_exact_normalization_idempotent():
    texts = ["sqrt(8)", "sqrt(2)*sqrt(2)", "cyclo(4,6)", "(1+sqrt(5))/2 - 1/2"]
    for text in texts:
        a = parse_scalar(text)
        b = parse_scalar(str(a).replace(" ", ""))
        assert a == b


def test_sqrt_squares_normalize():
    assert parse_scalar("sqrt(2)*sqrt(2)") == Scalar.exact(2)
    assert parse_scalar("sqrt(8)") == parse_scalar("2*sqrt(2)")


def test_approx_eq_default_policy():
    pol = TolerancePolicy()
    one = Scalar.one("float")
    assert approx_eq(one, Scalar.from_mpc(1), pol)
    phi = parse_scalar("(1+sqrt(5))/2", backend="float")
    assert approx_eq(phi * phi, phi + 1, pol)
    s2 = parse_scalar("sqrt(2)*sqrt(2)")
    assert approx_eq(s2, Scalar.exact(2), pol)


def test_backend_mismatch():
    with pytest.raises(BackendMismatch):
        Scalar.exact(1) + Scalar.from_mpc(1)
    with pytest.raises(BackendMismatch):
        approx_eq(Scalar.exact(1), Scalar.from_mpc(1))


def test_exact_inverse_of_radical_sum():
    phi = parse_scalar("(1+sqrt(5))/2")
    inv = 1 / phi
    assert inv * phi == Scalar.exact(1)
    assert inv == phi - 1


def test_exact_inverse_rejects_cyclotomic_sums():
    s = parse_scalar("1+cyclo(3,1)")
    with pytest.raises(NotExactlyRepresentable):
        1 / s


def test_conj_cyclo_relation():
    for n in range(1, 25):
        for k in range(1, n):
            assert Scalar.exact_cyclo(n, k).conj() == Scalar.exact_cyclo(n, n - k)


_exact_atoms = st.one_of(
    st.integers(-6, 6).map(Scalar.exact),
    st.integers(1, 20).map(Scalar.exact_sqrt),
    st.tuples(st.integers(1, 12), st.integers(0, 11)).map(
        lambda nk: Scalar.exact_cyclo(nk[0], nk[1])
    ),
)


@given(a=_exact_atoms, b=_exact_atoms, c=_exact_atoms)
@settings(max_examples=200, deadline=None)
def test_exact_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    assert a * b == b * a


def test_float_field_axioms_random():
    rng = random.Random(11)
    pol = TolerancePolicy(1e-40, 1e-40)
    for _ in range(1000):
        vals = []
        for _ in range(3):
            with mpmath.workprec(256):
                vals.append(
                    Scalar.from_mpc(
                        mpmath.mpc(rng.uniform(-2, 2), rng.uniform(-2, 2))
                    )
                )
        a, b, c = vals
        assert approx_eq((a + b) + c, a + (b + c), pol)
        assert approx_eq(a * (b + c), a * b + a * c, pol)


def test_tolerance_policy_validation():
    with pytest.raises(Exception):
        TolerancePolicy(abs_tol=-1)
    with pytest.raises(Exception):
        TolerancePolicy(rel_tol=float("inf"))
