import json

import pytest

from tubecalc.category import SpecError, load_spec, qdim, validate
from tubecalc.scalars import Scalar, TolerancePolicy, approx_eq, parse_scalar

from conftest import fixture_path


def test_load_vecz2(vecz2):
    assert vecz2.zero_cells == 1
    assert len(vecz2.simples) == 2
    assert {s.name for s in vecz2.simples} == {"1", "g"}
    g = vecz2.by_name("g")
    assert vecz2.dual(g) == g


def test_load_fib_f_block(fib):
    tau = fib.by_name("tau")
    lk, rk, li, ri, mat = fib.f_symbols.block(tau, tau, tau, tau)
    assert len(lk) == 2 and len(rk) == 2
    one = fib.by_name("1")
    pol = TolerancePolicy(1e-60, 0)
    inv_phi = parse_scalar("(sqrt(5)-1)/2", backend="float")
    assert approx_eq(mat[li[(one, 0, 0)]][ri[(one, 0, 0)]], inv_phi, pol)
    assert approx_eq(
        mat[li[(tau, 0, 0)]][ri[(tau, 0, 0)]], -inv_phi, pol
    )


def test_load_m2(m2):
    assert m2.zero_cells == 2
    assert len(m2.simples) == 4
    assert sorted(m2.unit_ids) == [m2.by_name("x00"), m2.by_name("x11")]


def test_qdim_values(vecz2, fib):
    assert qdim(vecz2, "1") == Scalar.from_mpc(1)
    pol = TolerancePolicy(1e-60, 0)
    assert approx_eq(qdim(vecz2, "g"), Scalar.from_mpc(1), pol)
    phi = parse_scalar("(1+sqrt(5))/2", backend="float")
    assert approx_eq(qdim(fib, "tau"), phi, pol)
    with pytest.raises(SpecError):
        qdim(vecz2, "nope")


def test_validate_vecz2_exact(vecz2_exact):
    report = validate(vecz2_exact, TolerancePolicy(0, 0))
    assert report.passed, report.failures()


def test_validate_fib(fib):
    report = validate(fib, TolerancePolicy(1e-20, 0))
    assert report.passed, "\n".join(report.lines())
    assert report.checks["pentagon"] <= 1e-20


def test_validate_m2(m2_exact):
    report = validate(m2_exact, TolerancePolicy(0, 0))
    assert report.passed, report.failures()


def test_validate_corrupted_fib_pentagon():
    with open(fixture_path("fib.json")) as fh:
        doc = json.load(fh)
    for entry in doc["F"]:
        if entry["e"] == "tau" and entry["f"] == "1":
            entry["value"] = "-(" + entry["value"] + ")"
    spec = load_spec(json.dumps(doc), backend="float")
    report = validate(spec, TolerancePolicy(1e-15, 0))
    assert not report.passed
    assert report.checks["pentagon"] > 0.1


def test_load_errors():
    with pytest.raises(SpecError):
        load_spec('{"zero_cells": 1}')
    with pytest.raises(SpecError):
        load_spec(
            json.dumps(
                {
                    "zero_cells": 1,
                    "simples": [
                        {"name": "1", "source": 0, "target": 0, "dual": "missing",
                         "qdim": "1", "sqrt_qdim": "1"}
                    ],
                    "fusion": [{"a": "1", "b": "1", "c": "1"}],
                }
            )
        )
    with pytest.raises(SpecError):
        load_spec(
            json.dumps(
                {
                    "zero_cells": 1,
                    "simples": [
                        {"name": "1", "source": 0, "target": 0, "dual": "1",
                         "qdim": "not a scalar (", "sqrt_qdim": "1"}
                    ],
                    "fusion": [{"a": "1", "b": "1", "c": "1"}],
                }
            )
        )


def test_unit_gauge_rejected():
    with open(fixture_path("vecz2.json")) as fh:
        doc = json.load(fh)
    doc["F"].append(
        {"a": "1", "b": "g", "c": "g", "d": "1", "e": "g", "f": "1", "value": "-1"}
    )
    with pytest.raises(SpecError):
        load_spec(json.dumps(doc))


def test_global_dimension_consistency(m2_exact):
    # connected multifusion: the global dimension per 0-cell agrees
    totals = []
    for cell in range(m2_exact.zero_cells):
        total = m2_exact.zero
        for s in m2_exact.simples:
            if s.source == s.target == cell:
                total = total + s.qdim * s.qdim
        totals.append(total)
    assert totals[0] == totals[1]
