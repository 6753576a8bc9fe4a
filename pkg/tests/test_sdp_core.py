import numpy as np
import pytest

from hermsos.sdp import (
    LinearConstraint,
    PsdFeasibilityProblem,
    embed_complex,
    maximize_slack,
    psd_factor,
    solve_psd_feasibility,
    unembed_complex,
)


# ---------------------------------------------------------------- embedding


def test_embed_scalar():
    assert np.allclose(embed_complex(np.array([[1.0]])), np.eye(2))


def test_embed_pauli_like():
    H = np.array([[0.0, 1j], [-1j, 0.0]])
    expected = np.array([
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
    ])
    S = embed_complex(H)
    assert np.allclose(S, expected)
    # eigenvalues +-1 preserved (each doubled)
    assert np.allclose(np.sort(np.linalg.eigvalsh(S)), [-1, -1, 1, 1])


def test_embed_identity():
    assert np.allclose(embed_complex(np.eye(3)), np.eye(6))


def test_embed_round_trip():
    rng = np.random.default_rng(0)
    for _ in range(10):
        A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        H = 0.5 * (A + A.conj().T)
        assert np.array_equal(unembed_complex(embed_complex(H)), H)


def test_embed_rejects_non_hermitian():
    with pytest.raises(ValueError):
        embed_complex(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_embed_cone_isomorphism():
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = rng.integers(1, 6)
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        H = 0.5 * (A + A.conj().T)
        s1 = np.sign(np.linalg.eigvalsh(H).min())
        s2 = np.sign(np.linalg.eigvalsh(embed_complex(H)).min())
        assert s1 == s2


# ---------------------------------------------------------------- solver


def test_trace_one_feasible():
    prob = PsdFeasibilityProblem(
        block_sizes=[2],
        constraints=[LinearConstraint(terms=[(0, 0, 0, 1.0 + 0j), (0, 1, 1, 1.0 + 0j)],
                                      rhs=1.0 + 0j, label="trace")],
    )
    res = solve_psd_feasibility(prob, tol=1e-8)
    assert res.feasible
    X = res.solution.blocks[0]
    assert abs(np.trace(X) - 1.0) <= 1e-8
    assert np.linalg.eigvalsh(0.5 * (X + X.conj().T)).min() >= -1e-8
    assert res.solution.residual <= 1e-8


def test_negative_scalar_infeasible():
    prob = PsdFeasibilityProblem(
        block_sizes=[1],
        constraints=[LinearConstraint(terms=[(0, 0, 0, 1.0 + 0j)], rhs=-1.0 + 0j)],
    )
    res = solve_psd_feasibility(prob, tol=1e-8)
    assert res.status == "infeasible"
    assert res.gap > 1e-8


def test_maximize_slack_symmetric_pair():
    prob = PsdFeasibilityProblem(
        block_sizes=[1, 1],
        constraints=[LinearConstraint(
            terms=[(0, 0, 0, 1.0 + 0j), (1, 0, 0, 1.0 + 0j)], rhs=2.0 + 0j)],
    )
    t, res = maximize_slack(prob, slack_tol=1e-4)
    assert res.feasible
    x = res.solution.blocks[0][0, 0]
    y = res.solution.blocks[1][0, 0]
    assert abs(x - 1.0) <= 1e-6
    assert abs(y - 1.0) <= 1e-6
    assert abs(t - 1.0) <= 2e-4


def test_adding_constraints_never_rescues_infeasibility():
    base = [LinearConstraint(terms=[(0, 0, 0, 1.0 + 0j)], rhs=-1.0 + 0j)]
    prob1 = PsdFeasibilityProblem(block_sizes=[1, 1], constraints=list(base))
    res1 = solve_psd_feasibility(prob1)
    assert res1.status == "infeasible"
    extra = base + [LinearConstraint(terms=[(1, 0, 0, 1.0 + 0j)], rhs=1.0 + 0j)]
    prob2 = PsdFeasibilityProblem(block_sizes=[1, 1], constraints=extra)
    res2 = solve_psd_feasibility(prob2)
    assert res2.status == "infeasible"


def test_complex_constraint_round():
    # Force an off-diagonal value: X[0,1] = 0.3 - 0.2i on a 2x2 PSD block.
    prob = PsdFeasibilityProblem(
        block_sizes=[2],
        constraints=[
            LinearConstraint(terms=[(0, 0, 1, 1.0 + 0j)], rhs=0.3 - 0.2j),
            LinearConstraint(terms=[(0, 0, 0, 1.0 + 0j)], rhs=0.5 + 0j),
        ],
    )
    res = solve_psd_feasibility(prob)
    assert res.feasible
    X = res.solution.blocks[0]
    assert abs(X[0, 1] - (0.3 - 0.2j)) <= 1e-8
    assert abs(X[0, 0] - 0.5) <= 1e-8
    assert np.linalg.eigvalsh(X).min() >= -1e-8


def test_solver_determinism():
    prob = PsdFeasibilityProblem(
        block_sizes=[3],
        constraints=[
            LinearConstraint(terms=[(0, 0, 0, 1.0 + 0j), (0, 1, 1, 1.0 + 0j),
                                    (0, 2, 2, 1.0 + 0j)], rhs=3.0 + 0j),
            LinearConstraint(terms=[(0, 0, 1, 1.0 + 0j)], rhs=0.25 + 0.5j),
        ],
    )
    r1 = solve_psd_feasibility(prob)
    r2 = solve_psd_feasibility(prob)
    assert r1.iterations == r2.iterations
    for a, b in zip(r1.solution.blocks, r2.solution.blocks):
        assert np.array_equal(a, b)


# ---------------------------------------------------------------- psd_factor


def test_psd_factor_rank_one():
    V, r = psd_factor(np.diag([1.0, 0.0]))
    assert r == 1
    assert V.shape == (1, 2)
    assert np.allclose(V.conj().T @ V, np.diag([1.0, 0.0]))


def test_psd_factor_identity():
    V, r = psd_factor(np.eye(2))
    assert r == 2
    assert np.allclose(V.conj().T @ V, np.eye(2))


def test_psd_factor_dense():
    W = np.array([[2.0, 1.0], [1.0, 2.0]])
    V, r = psd_factor(W)
    assert r == 2
    assert np.linalg.norm(V.conj().T @ V - W) <= 1e-12


def test_psd_factor_random_property():
    rng = np.random.default_rng(9)
    for n in (3, 10, 25, 60):
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        W = A.conj().T @ A
        V, r = psd_factor(W, rank_tol=1e-9)
        err = np.linalg.norm(V.conj().T @ V - W)
        assert err <= 10 * 1e-9 * np.linalg.norm(W)
        assert r == n


def test_psd_factor_rejects_indefinite():
    with pytest.raises(ValueError):
        psd_factor(np.diag([1.0, -0.5]))
