import numpy as np
import pytest
from hypothesis import given, strategies as st

from subspace_sim.errors import ArgumentError, DimensionError
from subspace_sim.pauli import (PauliString, PauliSum, commutator, embed, hs_inner, multiply,
                                remap, total_z, weight)

labels = lambda n: st.text(alphabet="IXYZ", min_size=n, max_size=n)


def test_single_qubit_products():
    x, y, z = (PauliString.from_label(c) for c in "XYZ")
    assert multiply(x, y) == PauliString.from_label("iZ")
    assert multiply(y, z) == PauliString.from_label("iX")
    assert multiply(z, x) == PauliString.from_label("iY")
    assert multiply(y, x) == PauliString.from_label("-iZ")


def test_label_round_trip_and_phase():
    p = PauliString.from_label("-iXY")
    assert p.phase == 3
    assert p.label == "XY"
    assert p == PauliString.from_label("XY") * PauliString.from_label("-i" + "II")


def test_commutator_values():
    xi, zi = PauliString.from_label("XI"), PauliString.from_label("ZI")
    assert commutator(xi, zi).allclose(PauliSum.from_terms([(-2j, "YI")]))
    assert commutator(PauliString.from_label("XX"), PauliString.from_label("ZZ")).is_zero()


def test_weight_and_support():
    p = PauliString.from_label("IXIZY")
    assert weight(p) == 3
    assert p.support() == (1, 3, 4)


def test_sum_simplifies_and_prunes():
    s = PauliSum.from_label("XX") + PauliSum.from_label("XX", -1.0 + 1e-16)
    assert s.is_zero()


def test_hs_inner_normalized():
    a = PauliSum.from_label("XZ")
    assert hs_inner(a, a) == pytest.approx(1.0)
    assert hs_inner(a, PauliSum.from_label("ZZ")) == pytest.approx(0.0)


def test_text_round_trip_exact():
    s = PauliSum.from_terms([(0.1 + 0.2j, "XYZ"), (np.pi, "IIZ"), (-1e-7, "ZZZ")])
    t = PauliSum.from_text(s.to_text())
    assert t.to_text() == s.to_text()
    assert np.array_equal(t.coeffs, s.coeffs)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        PauliSum.from_label("XX") + PauliSum.from_label("X")


def test_bad_label():
    with pytest.raises((ArgumentError, ValueError)):
        PauliString.from_label("XQ")


def test_matrix_matches_kron():
    p = PauliString.from_label("XZ")
    X = np.array([[0, 1], [1, 0]])
    Z = np.diag([1, -1])
    assert np.allclose(p.to_matrix(), np.kron(X, Z))


def test_total_z_matrix():
    assert np.allclose(total_z(2).to_matrix(), np.diag([2, 0, 0, -2]))


def test_remap_and_embed():
    op = PauliSum.from_label("XZ")
    big = embed(op, [1, 3], 4)
    assert big.to_dict() == {"IXIZ": 1.0}
    assert remap(big, [1, 3]).to_dict() == {"XZ": 1.0}


@given(labels(5), labels(5))
def test_commutes_iff_symplectic_form(a, b):
    p, q = PauliString.from_label(a), PauliString.from_label(b)
    assert p.commutes(q) == np.allclose(p.to_matrix() @ q.to_matrix(), q.to_matrix() @ p.to_matrix())


@given(labels(3), labels(3))
def test_product_matches_matrices(a, b):
    p, q = PauliString.from_label(a), PauliString.from_label(b)
    assert np.allclose((p * q).to_matrix(), p.to_matrix() @ q.to_matrix())
