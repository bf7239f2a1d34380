import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmaxreg import integration as integ
from cmaxreg.integration import OperatorPath, Partition, convolve
from cmaxreg.lcs_core import SeminormFamily, unit
from cmaxreg.operators import BoundedOp, DiagonalGenerator, in_domain
from cmaxreg.regularity import (MildSolution, a_convolution, admissibility_check, convergence_order,
                                integrated_residual, maxreg_check, mild_solution, phi_r,
                                probe_battery, strict_residual, travis_extract, travis_function,
                                uniform_bound)
from cmaxreg.semigroups import Semigroup, equicontinuity_constants
from cmaxreg.semivariation import sv_estimate

from oracles import conv_const, psi_bound

E1 = 1 - math.exp(-1)


def scalar(m=-1.0):
    A = DiagonalGenerator.from_list([m])
    return A, Semigroup(A)


def linear(N):
    A = DiagonalGenerator.linear(N)
    return A, Semigroup(A)


# ---------------------------------------------------------------- solutions

def test_mild_solution_matches_closed_form_and_direct_formula():
    A, T = linear(4)
    x0 = np.array([1.0, -1.0, 0.5, 0.0])
    f = integ.sinusoid(2, np.ones(4), 0, 1)
    u = MildSolution(T, x0, f, 1e-12)
    ts = [0.0, 0.3, 1.0]
    assert np.allclose(u.values(ts), [mild_solution(T, x0, f, t, 1e-12) for t in ts], atol=1e-11)
    A1, T1 = scalar()
    free = MildSolution(T1, [1.0], integ.zero(1, 0, 1))
    assert np.allclose(free.values([0.2, 0.9])[:, 0], np.exp([-0.2, -0.9]), atol=1e-15)


def test_integrated_residual_examples():
    A, T = scalar()
    assert integrated_residual(MildSolution(T, [0.0], integ.zero(1, 0, 1)), A, 1.0) == 0.0
    assert integrated_residual(MildSolution(T, [1.0], integ.zero(1, 0, 1)), A, 1.0) <= 1e-7
    A2 = DiagonalGenerator.from_list([-1.0, -2.0])
    u = MildSolution(Semigroup(A2), [0.0, 0.0], integ.constant([1.0, 1.0], 0, 1))
    assert integrated_residual(u, A2, 0.5) <= 1e-7


def test_integrated_residual_unbounded_generator():
    A, T = linear(32)
    n = np.arange(1, 33)
    u = MildSolution(T, 1.0 / n**2, integ.sinusoid(1, 1 / np.sqrt(n), 0, 1), 1e-11)
    assert integrated_residual(u, A, 0.8, tol=1e-10) <= 1e-6


@pytest.mark.parametrize("x0,f,exact", [
    ([1.0], integ.zero(1, 0, 1), lambda t: math.exp(-t)),
    ([0.0], integ.ramp([1.0], 0, 1), lambda t: t - 1 + math.exp(-t)),
])
def test_strict_residual_second_order(x0, f, exact):
    A, T = scalar()
    u = MildSolution(T, x0, f, 1e-13)
    assert u(0.5)[0] == pytest.approx(exact(0.5), abs=1e-12)
    hs = [1e-2, 1e-3, 1e-4]
    for t in (0.5, 0.0, 1.0):
        res = [strict_residual(u, A, t, h).max for h in hs]
        assert convergence_order(hs, res) >= 1.8, (t, res)
    assert strict_residual(u, A, 0.0, 1e-2).stencil == "forward"
    assert strict_residual(u, A, 1.0, 1e-2).stencil == "backward"


def test_strict_vs_classical_for_non_domain_initial_value():
    A, T = linear(64)
    u = MildSolution(T, np.ones(64), integ.zero(64, 0, 1))
    at0 = strict_residual(u, A, 0.0, 1e-3, "strict")
    assert not at0.is_solution and at0.certificate.verdict == "non_member"
    assert strict_residual(u, A, 0.0, 1e-3, "classical").skipped
    for t in (0.25, 0.5, 1.0):
        res = strict_residual(u, A, t, 1e-3, "classical")
        assert res.is_solution and res.max < 1e-3
    with pytest.raises(ValueError):
        strict_residual(u, A, 0.5, 0.6)


# ---------------------------------------------------------- A(T*Bf)

def test_a_convolution_examples():
    A, T = scalar()
    f = integ.constant([1.0], 0, 1)
    zero, cert = a_convolution(T, A, None, f, 0.0)
    assert not zero.any() and cert.member
    for route in ("direct", "rs"):
        val, cert = a_convolution(T, A, None, f, 1.0, route, 1e-10)
        assert val[0] == pytest.approx(-E1, abs=1e-9)
        assert cert.member


def test_convolution_derivative_identity():
    A = DiagonalGenerator.from_list([-1.0, -2.0])
    T = Semigroup(A)
    f = integ.constant([1.0, 1.0], 0, 1)
    t = 0.5
    errs = []
    hs = [1e-1, 1e-2, 1e-3]
    rhs = a_convolution(T, A, None, f, t, tol=1e-13)[0] + f(t)
    for h in hs:
        d = (convolve(T, f, t + h, 1e-13) - convolve(T, f, t - h, 1e-13)) / (2 * h)
        errs.append(np.max(np.abs(d - rhs)))
    assert convergence_order(hs, errs) >= 1.8


def test_a_commutes_with_convolution_on_domain_valued_inputs():
    A, T = linear(16)
    n = np.arange(1, 17)
    f = integ.sinusoid(1, 1.0 / n**2, 0, 1)
    lhs = a_convolution(T, A, None, f, 0.7, tol=1e-12)[0]
    rhs = convolve(T, f.mapped(BoundedOp.diagonal(A.m)), 0.7, 1e-12)
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_convolution_of_derivative_identity():
    A, T = linear(8)
    f = integ.sinusoid(2, np.ones(8), 0, 1)
    t = 0.6
    target = convolve(T, f.derivative, t, 1e-13) + T.apply(t, f(0.0))
    hs = [1e-2, 1e-3, 1e-4]
    errs = [np.max(np.abs((convolve(T, f, t + h, 1e-14) - convolve(T, f, t - h, 1e-14)) / (2 * h) - target))
            for h in hs]
    assert convergence_order(hs[:2], errs[:2]) >= 1.8
    assert errs[-1] < 1e-6


def test_routes_agree_on_probe_battery():
    A = DiagonalGenerator.from_list([-1.0, -2.0, -3.0])
    T = Semigroup(A)
    sv = sv_estimate(OperatorPath.forward(T, 0, 1))
    for f in probe_battery(T, None, 1.0)[::3]:
        d = a_convolution(T, A, None, f, 0.5, "direct", 1e-10)[0]
        r = a_convolution(T, A, None, f, 0.5, "rs", 1e-10, sv)[0]
        assert np.max(np.abs(d - r)) <= 1e-8, f.label


def test_mild_solution_estimate_from_equicontinuity():
    A, T = linear(16)
    eq = equicontinuity_constants(T, 1.0, np.ones(16), [np.ones(16)])
    x0 = np.linspace(-1, 1, 16)
    for f in probe_battery(T, None, 1.0)[:6]:
        u = MildSolution(T, x0, f).values(np.linspace(0, 1, 9))
        bound = eq.C * (np.max(np.abs(x0)) + f.sup_seminorm())
        assert np.max(np.abs(u)) <= bound + 1e-9


def test_orbit_lies_in_domain_when_semivariation_converges():
    A, T = linear(64)
    assert sv_estimate(OperatorPath.forward(T, 0, 1)).converged
    x = np.ones(64)
    vals = []
    for t in np.linspace(0, 1, 9)[1:]:
        y = T.apply(t, x)
        assert in_domain(A, y, bound=uniform_bound(A, t, 1.0)).member
        vals.append(np.max(np.abs(t * A.m * y)))
    assert max(np.abs(np.diff(vals))) < 0.2


# ---------------------------------------------------------- Travis

def test_travis_function_formula():
    d = Partition([0.0, 1.0])
    x1, x2 = np.array([1.0, 0.0]), np.array([0.0, 2.0])
    f = travis_function(d, 0.5, [x1, x2])
    assert np.allclose(f(0.25), x1)
    assert np.allclose(f(1.0), x2)
    assert np.allclose(f(0.75), x2 + (x2 - x1) * (-0.25) / 0.5)
    g = travis_function(Partition.uniform(0, 1, 3), 0.1, [x1] * 4)
    assert np.allclose(g.values(np.linspace(0, 1, 33)), x1)
    with pytest.raises(ValueError):
        travis_function(Partition.uniform(0, 1, 2), 0.5, [x1] * 3)


@given(st.integers(0, 2**16))
@settings(max_examples=20)
def test_travis_function_sup_is_max_of_nodes(seed):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-1, 1, (5, 3))
    f = travis_function(Partition.uniform(0, 1, 4), 0.05, xs)
    dense = np.max(np.abs(f.values(np.linspace(0, 1, 20001))))
    assert dense == pytest.approx(np.max(np.abs(xs)), abs=1e-12)


def test_travis_extract_recovers_semivariation():
    A = DiagonalGenerator.from_list([-1.0, -2.0])
    T = Semigroup(A)
    ext = travis_extract(T, A, None, 1.0, Partition.uniform(0, 1, 4), [1e-1, 1e-2, 1e-3],
                         probes=probe_battery(T, None, 1.0))
    assert ext.sv_sum == pytest.approx(1 - math.exp(-2), abs=1e-6)
    assert ext.gap >= -1e-6
    zero = travis_extract(T, A, None, 1.0, Partition.uniform(0, 1, 4), [0.1], xs=np.zeros((5, 2)))
    assert zero.sv_sum == 0.0 and zero.partition_sum == 0.0 and zero.operator_bound_C == 0.0
    one = travis_extract(T, A, None, 1.0, Partition([0.0, 1.0]), [0.5], xs=np.ones((2, 2)))
    assert one.sv_sum == pytest.approx(np.max(1 - np.exp(A.m)), abs=1e-9)


@given(st.integers(0, 2**16))
@settings(max_examples=10)
def test_travis_decomposition_is_an_identity(seed):
    rng = np.random.default_rng(seed)
    A = DiagonalGenerator.from_list([-1.0, -3.0, -0.5])
    T = Semigroup(A)
    xs = rng.uniform(-1, 1, (4, 3))
    ext = travis_extract(T, A, None, 1.0, Partition.uniform(0, 1, 3), [0.2, 0.02], xs=xs)
    for row in ext.rows:
        assert row["sv_sum"] == pytest.approx(ext.partition_sum, abs=1e-8)
        assert row["bound"] >= row["sv_sum"] - 1e-9
    assert ext.rows[1]["corrections"] < ext.rows[0]["corrections"]


# ---------------------------------------------------------- verdicts

def test_maxreg_examples():
    A, T = linear(32)
    assert maxreg_check(T, A, envelope="c0").holds == "yes"
    v = maxreg_check(T, A, family=SeminormFamily.beta0(32))
    assert v.holds == "yes" and v.sv_converged
    assert any("3C" in a for a in v.assumptions)
    R = DiagonalGenerator.rotation(16)
    v = maxreg_check(Semigroup(R), R)
    assert v.holds == "counterexample"
    assert not v.sv_certificate.converged


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_maxreg_verdict_independent_of_horizon(r):
    A, T = linear(32)
    assert maxreg_check(T, A, r=r, envelope="c0").holds == maxreg_check(T, A, envelope="c0").holds
    R = DiagonalGenerator.rotation(16)
    assert maxreg_check(Semigroup(R), R, r=r).holds == "counterexample"


def test_phi_r_examples():
    A, T = scalar()
    f = integ.constant([1.0], 0, 1)
    val, cert = phi_r(T, A, BoundedOp.zero(1, "Xminus1"), f, 1.0)
    assert not val.any() and cert.member
    val, cert = phi_r(T, A, BoundedOp.extension_of(A), f, 1.0, 1e-10)
    assert val[0] == pytest.approx(-E1, abs=1e-9) and cert.member
    with pytest.raises(ValueError):
        phi_r(*scalar(1.0)[::-1], BoundedOp.extension_of(DiagonalGenerator.from_list([1.0])), f, 1.0)


def test_phi_r_closed_form_bound_and_rs_identity():
    A, T = linear(32)
    ext = BoundedOp.extension_of(A)
    k = np.arange(1, 33)
    for f in probe_battery(T, None, 1.0)[::4]:
        val, cert = phi_r(T, A, ext, f, 1.0, 1e-10)
        assert cert.member
        assert np.all(np.abs(val) <= 1 - np.exp(-k) + 1e-8)
    A3 = DiagonalGenerator.from_list([-1.0, -2.0, -3.0])
    T3 = Semigroup(A3)
    f = integ.sinusoid(3, [1.0, -1.0, 0.5], 0, 1)
    direct = phi_r(T3, A3, BoundedOp.extension_of(A3), f, 1.0, 1e-11)[0]
    rs = a_convolution(T3, A3, None, f, 1.0, "rs", 1e-11, sv_estimate(OperatorPath.forward(T3, 0, 1)))[0]
    assert np.allclose(direct, rs, atol=1e-8)


def test_admissibility_examples_and_transfer():
    A, T = linear(32)
    assert admissibility_check(T, A, envelope="c0").holds == "yes"
    transfer = {"half": BoundedOp.diagonal(0.5 * A.m, "Xminus1"),
                "bounded": BoundedOp.diagonal(np.ones(32), "Xminus1")}
    v = admissibility_check(T, A, family=SeminormFamily.beta0(32), transfer=transfer)
    assert v.holds == "yes" and v.transfer_consistent
    assert all(t.holds == "yes" for t in v.transfer.values())
    R = DiagonalGenerator.rotation(16, shift=-1.0)
    assert admissibility_check(Semigroup(R), R).holds == "counterexample"


def test_probe_battery_shape():
    A, T = linear(8)
    probes = probe_battery(T, None, 1.0, "c0", seed=3)
    assert len(probes) == 23
    assert len({p.label for p in probes}) == 23
    assert max(p.sup_seminorm() for p in probes) <= 1.0 + 1e-12
    again = probe_battery(T, None, 1.0, "c0", seed=3)
    ts = np.linspace(0, 1, 7)
    assert all(np.array_equal(a.values(ts), b.values(ts)) for a, b in zip(probes, again))


def test_psi_closed_form_constant_input():
    A, T = linear(8)
    psi = convolve(T, integ.constant(np.ones(8), 0, 1), 1.0, 1e-12)
    for k in range(1, 9):
        assert psi[k - 1] == pytest.approx(conv_const(-k, 1.0), abs=1e-12)
        assert abs(psi[k - 1]) <= psi_bound(k, 1.0) + 1e-12
