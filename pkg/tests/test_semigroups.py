import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from cmaxreg.operators import DiagonalGenerator
from cmaxreg.semigroups import (Semigroup, continuity_modulus, equicontinuity_constants,
                                law_residual)

times = st.floats(0.0, 3.0)


def test_multiplication_semigroup_values():
    T = Semigroup(DiagonalGenerator.from_list([-1.0, -2.0]))
    assert np.allclose(T.apply(1.0, [1.0, 1.0]), [np.exp(-1), np.exp(-2)])
    assert T.omega == -1.0
    assert T.diag([0.0, 1.0]).shape == (2, 2)
    with pytest.raises(ValueError):
        T.apply(-0.1, [1.0, 1.0])
    with pytest.raises(ValueError):
        Semigroup(DiagonalGenerator.linear(3), omega=-5.0)


def test_matrix_semigroup_matches_expm():
    M = np.array([[-1.0, 1.0], [0.0, -2.0]])
    T = Semigroup(M)
    assert T.kind == "matrix" and not T.is_diagonal
    assert np.allclose(T.matrix(0.7), expm(0.7 * M))
    xs = np.array([[1.0, 0.0], [0.0, 1.0]])
    got = T.apply_many([0.3, 0.5], xs)
    assert np.allclose(got[1], expm(0.5 * M) @ xs[1])
    with pytest.raises(ValueError):
        Semigroup(np.ones((2, 3)))


@given(t=times, s=times, theta=st.floats(-5, 5))
def test_semigroup_law_rotation(t, s, theta):
    T = Semigroup(DiagonalGenerator.rotation(16, theta))
    x = np.linspace(-1, 1, 16)
    assert law_residual(T, t, s, x, np.ones(16)) <= 1e-12


@given(t=times, s=times)
def test_semigroup_law_matrix(t, s):
    T = Semigroup(np.array([[-1.0, 0.5], [-0.5, -0.2]]))
    assert law_residual(T, t, s, [1.0, -1.0], np.ones(2)) <= 1e-10


def test_strong_continuity_on_orbits():
    T = Semigroup(DiagonalGenerator.linear(32))
    n = np.arange(1, 33)
    x = 1.0 / n**2  # in D(A): modulus is O(h)
    mods = [continuity_modulus(T, h, x, np.ones(32)) for h in (1e-1, 1e-2, 1e-3)]
    assert mods[0] > mods[1] > mods[2] and mods[2] < 2e-3


def test_equicontinuity_constants_exact():
    T = Semigroup(DiagonalGenerator.from_list([0.5, -1.0]))
    res = equicontinuity_constants(T, 2.0, np.ones(2), [np.ones(2)])
    assert res.ok and res.exact and np.isclose(res.C, np.exp(1.0))
    # q sees coordinate 2 but the first candidate does not
    res = equicontinuity_constants(T, 1.0, np.ones(2), [np.array([1.0, 0.0]), np.array([1.0, 2.0])])
    assert res.p_index == 1 and np.isclose(res.C, np.exp(0.5))
    bad = equicontinuity_constants(T, 1.0, np.ones(2), [np.array([1.0, 0.0])])
    assert not bad.ok and bad.violation["coordinate"] == 2


def test_equicontinuity_matrix_lower_bound():
    M = np.array([[0.0, 1.0], [-1.0, 0.0]])  # rotation: |e^{tM}| row sums <= sqrt 2
    res = equicontinuity_constants(Semigroup(M), np.pi, np.ones(2), [np.ones(2)])
    assert res.ok and not res.exact
    assert 1.0 <= res.C <= np.sqrt(2) + 1e-9
