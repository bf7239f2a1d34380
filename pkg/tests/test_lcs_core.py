import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from cmaxreg.lcs_core import (DimensionError, SeminormFamily, as_vector, family_sup, pair,
                              seminorm_eval, unit)

finite = st.floats(-1e6, 1e6, allow_nan=False)
vec5 = arrays(float, 5, elements=finite)
weights5 = arrays(float, 5, elements=st.floats(0, 10))


def test_as_vector_keeps_complex_and_rejects_bad_input():
    assert as_vector([1, 2]).dtype == float
    assert np.iscomplexobj(as_vector([1j, 2]))
    with pytest.raises(ValueError):
        as_vector([np.nan, 1.0])
    with pytest.raises(ValueError):
        as_vector([[1.0]])
    with pytest.raises(DimensionError):
        as_vector([1.0, 2.0], dim=3)


def test_unit_is_one_based():
    assert unit(1, 3).tolist() == [1.0, 0.0, 0.0]
    with pytest.raises(ValueError):
        unit(0, 3)
    with pytest.raises(ValueError):
        unit(4, 3)


def test_family_must_be_hausdorff():
    with pytest.raises(ValueError, match="Hausdorff"):
        SeminormFamily((np.array([1.0, 0.0]), np.array([0.5, 0.0])))
    with pytest.raises(ValueError):
        SeminormFamily((np.array([1.0, -1.0]),))
    with pytest.raises(DimensionError):
        SeminormFamily((np.ones(2), np.ones(3)))


def test_named_families():
    fam = SeminormFamily.beta0(8)
    assert fam.labels == ("v1", "v4", "v16")
    n = np.arange(1, 9)
    assert np.allclose(fam["v4"], 1 / (1 + n / 4))
    x = np.ones(8)
    assert np.allclose(fam.evaluate(x), [1 / 2, 1 / 1.25, 1 / (1 + 1 / 16)])
    prefixes = SeminormFamily.prefixes(3)
    assert prefixes.evaluate(np.array([0.0, 0.0, 5.0])).tolist() == [0.0, 0.0, 5.0]
    assert family_sup(SeminormFamily.sup(3), [1, -4, 2]) == 4.0
    assert fam.truncate(3).dim == 3


def test_pair_is_bilinear_without_conjugation():
    assert pair([1j, 0], [1j, 5]) == -1
    with pytest.raises(DimensionError):
        pair([1, 2], [1])


@given(w=weights5, x=vec5, y=vec5, c=finite)
def test_seminorm_axioms(w, x, y, c):
    px, py = seminorm_eval(w, x), seminorm_eval(w, y)
    assert px >= 0
    assert seminorm_eval(w, x + y) <= px + py + 1e-9 * (1 + px + py)
    assert seminorm_eval(w, c * x) == pytest.approx(abs(c) * px, rel=1e-12, abs=1e-300)


@given(x=vec5)
def test_hausdorff_family_separates_points(x):
    fam = SeminormFamily((np.array([1, 0, 1, 0, 1.0]), np.array([0, 2, 0, 3, 0.0])))
    assert (np.max(fam.evaluate(x)) == 0) == (not np.any(x))
