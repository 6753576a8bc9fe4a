import numpy as np
import pytest

from hermsos import (
    CommutationError,
    CommutingTuple,
    HermPoly,
    MatPoly,
    ShapeMismatchError,
    bivar_outer,
    coeff_matrix,
    grlex_monomials,
    herm_congruence,
    hereditary_eval,
)


def z_var(i, d):
    return MatPoly.variable(i, d)


def disk_defect():
    """1 - w z as a scalar HermPoly in one variable."""
    return HermPoly(1, 1, {((0,), (0,)): [[1.0]], ((1,), (1,)): [[-1.0]]})


# ---------------------------------------------------------------- grlex


def test_grlex_order_bivariate():
    mons = grlex_monomials(2, 2)
    assert mons == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]


def test_grlex_counts():
    # C(d + D, d) monomials of degree <= D
    assert len(grlex_monomials(3, 4)) == 35
    assert len(grlex_monomials(1, 7)) == 8


# ---------------------------------------------------------------- eval


def test_eval_monomial_times_identity():
    p = MatPoly(2, 2, 2, {(1, 0): np.eye(2)})
    val = p.eval([0.5, 0.3])
    assert np.allclose(val, np.diag([0.5, 0.5]))


def test_eval_constant():
    c = np.array([[1.0, 2.0j], [0.0, -1.0]])
    p = MatPoly.constant(c, 3)
    for z in ([0, 0, 0], [1, 2, 3], [0.1j, -0.5, 2.0]):
        assert np.allclose(p.eval(z), c)


def test_eval_coordinate_row():
    p = MatPoly(2, 1, 2, {(1, 0): [[1.0, 0.0]], (0, 1): [[0.0, 1.0]]})
    val = p.eval([0.2, 0.4j])
    assert np.allclose(val, [[0.2, 0.4j]])


def test_eval_dimension_mismatch():
    p = MatPoly.variable(0, 2)
    with pytest.raises(ShapeMismatchError):
        p.eval([0.5])


def test_eval_distributes_over_add_and_product():
    rng = np.random.default_rng(7)
    for _ in range(20):
        f = _random_matpoly(rng, d=2, rows=2, cols=3, degree=2)
        g = _random_matpoly(rng, d=2, rows=2, cols=3, degree=2)
        h = _random_matpoly(rng, d=2, rows=3, cols=2, degree=2)
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        assert np.linalg.norm((f + g).eval(z) - (f.eval(z) + g.eval(z))) < 1e-12 * 100
        prod = f @ h
        assert np.linalg.norm(prod.eval(z) - f.eval(z) @ h.eval(z)) < 1e-12 * 100


def _random_matpoly(rng, d, rows, cols, degree):
    coeffs = {}
    for exp in grlex_monomials(d, degree):
        if rng.random() < 0.6:
            coeffs[exp] = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return MatPoly(d, rows, cols, coeffs)


# ---------------------------------------------------------------- bivar_outer


def test_bivar_outer_scalar_z():
    f = z_var(0, 1)
    out = bivar_outer(f, f)
    assert out.size == 1
    assert set(out.coeffs) == {((1,), (1,))}
    assert np.allclose(out.coeffs[((1,), (1,))], [[1.0]])


def test_bivar_outer_stacked_column():
    # f = [1; z] gives 1 + w z
    f = MatPoly(1, 2, 1, {(0,): [[1.0], [0.0]], (1,): [[0.0], [1.0]]})
    out = bivar_outer(f, f)
    expected = HermPoly(1, 1, {((0,), (0,)): [[1.0]], ((1,), (1,)): [[1.0]]})
    assert out.allclose(expected)


def test_bivar_outer_mixed():
    one = MatPoly.constant([[1.0]], 1)
    z = z_var(0, 1)
    out = bivar_outer(one, z)
    assert set(out.coeffs) == {((0,), (1,))}


def test_bivar_outer_symmetry_is_structural():
    rng = np.random.default_rng(3)
    for _ in range(25):
        f = _random_matpoly(rng, d=2, rows=3, cols=2, degree=2)
        out = bivar_outer(f, f)
        assert out.herm_defect() == 0.0


def test_bivar_outer_shape_mismatch():
    f = MatPoly.zero(1, 2, 1)
    g = MatPoly.zero(1, 3, 1)
    with pytest.raises(ShapeMismatchError):
        bivar_outer(f, g)


# ---------------------------------------------------------------- herm ops


def test_herm_sub_cancels():
    p = disk_defect()
    assert (p - p).is_zero()


def test_herm_scale():
    p = disk_defect()
    q = 2.0 * p
    assert np.allclose(q.coeffs[((0,), (0,))], [[2.0]])
    assert np.allclose(q.coeffs[((1,), (1,))], [[-2.0]])


def test_herm_sub_constant():
    two = HermPoly.constant([[2.0]], 1) + HermPoly(1, 1, {((1,), (1,)): [[-1.0]]})
    one = HermPoly.constant([[1.0]], 1)
    assert (two - one).allclose(disk_defect())


def test_herm_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        disk_defect() + HermPoly.constant(np.eye(2), 1)


# ---------------------------------------------------------------- hereditary


def test_hereditary_scalar_disk():
    T = CommutingTuple([np.array([[0.5]])])
    val = hereditary_eval(disk_defect(), T)
    assert np.allclose(val, [[0.75]])


def test_hereditary_diagonal():
    T = CommutingTuple([np.diag([0.5, -0.5])])
    val = hereditary_eval(disk_defect(), T)
    assert np.allclose(val, np.diag([0.75, 0.75]))


def test_hereditary_nilpotent():
    # P = w z on the 2x2 shift: T*T = diag(0, 1)
    P = HermPoly(1, 1, {((1,), (1,)): [[1.0]]})
    T = CommutingTuple([np.array([[0.0, 1.0], [0.0, 0.0]])])
    val = hereditary_eval(P, T)
    assert np.allclose(val, np.diag([0.0, 1.0]))


def test_hereditary_matches_substitution_on_diagonal_tuples():
    rng = np.random.default_rng(11)
    for _ in range(20):
        f = _random_matpoly(rng, d=2, rows=3, cols=2, degree=2)
        pts = 0.5 * (rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2)))
        T = CommutingTuple.joint_diagonal(pts)
        # f(T) by substituting the diagonal matrices for the variables
        fT = np.zeros((f.rows * 3, f.cols * 3), dtype=complex)
        for exp, mat in f.coeffs.items():
            fT += np.kron(mat, T.monomial(exp))
        lhs = hereditary_eval(bivar_outer(f, f), T)
        assert np.linalg.norm(lhs - fT.conj().T @ fT) < 1e-10


def test_hereditary_real_linear():
    rng = np.random.default_rng(5)
    P = _random_herm(rng, d=2, size=2, degree=2)
    Q = _random_herm(rng, d=2, size=2, degree=2)
    pts = 0.4 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    T = CommutingTuple.joint_diagonal(pts)
    lhs = hereditary_eval(P + Q, T)
    rhs = hereditary_eval(P, T) + hereditary_eval(Q, T)
    assert np.linalg.norm(lhs - rhs) < 1e-12 * 10


def _random_herm(rng, d, size, degree):
    coeffs = {}
    for wexp in grlex_monomials(d, degree):
        for zexp in grlex_monomials(d, degree):
            if (wexp, zexp) in coeffs:
                continue
            m = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
            if wexp == zexp:
                m = 0.5 * (m + m.conj().T)
            coeffs[(wexp, zexp)] = m
            coeffs[(zexp, wexp)] = m.conj().T
    return HermPoly(d, size, coeffs)


def test_hereditary_constant_psd():
    rng = np.random.default_rng(13)
    B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    A = B.conj().T @ B
    P = HermPoly.constant(A, 2)
    pts = 0.3 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    T = CommutingTuple.joint_diagonal(pts)
    val = hereditary_eval(P, T)
    assert np.allclose(val, np.kron(A, np.eye(2)))
    assert np.linalg.eigvalsh(0.5 * (val + val.conj().T)).min() > -1e-12


def test_hereditary_dimension_mismatch():
    T = CommutingTuple([np.eye(2) * 0.1, np.eye(2) * 0.2])
    with pytest.raises(ShapeMismatchError):
        hereditary_eval(disk_defect(), T)


def test_commutation_violation_raises():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    b = np.array([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(CommutationError):
        CommutingTuple([a, b])


# ---------------------------------------------------------------- coeff_matrix


def test_coeff_matrix_hand_example():
    # f = [z; 1], basis (1, z): stacked blocks [[0],[1],[1],[0]]
    f = MatPoly(1, 2, 1, {(1,): [[1.0], [0.0]], (0,): [[0.0], [1.0]]})
    M = coeff_matrix(f, [(0,), (1,)])
    assert np.allclose(M, [[0.0], [1.0], [1.0], [0.0]])


def test_coeff_matrix_zero():
    f = MatPoly.zero(1, 2, 3)
    M = coeff_matrix(f, [(0,), (1,)])
    assert M.shape == (4, 3)
    assert np.all(M == 0)


def test_coeff_matrix_constant():
    C = np.array([[1.0, 2.0], [3.0, 4.0]])
    f = MatPoly.constant(C, 1)
    assert np.allclose(coeff_matrix(f, [(0,)]), C)


def test_coeff_matrix_missing_basis():
    f = MatPoly.variable(0, 1)
    with pytest.raises(ShapeMismatchError):
        coeff_matrix(f, [(0,)])


# ---------------------------------------------------------------- congruence


def test_herm_congruence_matches_pointwise():
    rng = np.random.default_rng(17)
    P = _random_herm(rng, d=2, size=3, degree=1)
    F = _random_matpoly(rng, d=2, rows=3, cols=2, degree=1)
    out = herm_congruence(P, F)
    for _ in range(5):
        z = 0.5 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        w = 0.5 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        lhs = out.eval(w, z)
        rhs = F.eval(np.conj(w)).conj().T @ P.eval(w, z) @ F.eval(z)
        assert np.linalg.norm(lhs - rhs) < 1e-10


def test_normalization_drops_tiny_terms():
    p = MatPoly(1, 1, 1, {(0,): [[1.0]], (5,): [[1e-16]]})
    assert set(p.coeffs) == {(0,)}
