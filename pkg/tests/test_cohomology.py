import numpy as np
import pytest

from algbundle.algebra import (
    StructureConstants,
    associator_residual,
    change_basis,
    gen_diagonal,
    gen_polynomial,
    gen_quadratic,
    gen_truncated,
    gen_zero,
    gh_default,
)
from algbundle.cohomology import (
    coboundary,
    coboundary_matrix,
    coboundary_solve,
    cocycle_defect,
    cocycle_tensor,
    derivations,
    tangent_operator,
    z2_dimension,
)
from algbundle.errors import InputError, PreconditionError
from algbundle.invariants import try_isomorphism
from algbundle.linalg import nullspace

import oracles

ASSOCIATIVE = [
    gen_truncated(3),
    gh_default(3),
    gen_diagonal(2),
    gen_quadratic(0.0),
    gen_quadratic(-1.0),
    gen_polynomial(3),
]


def test_tangent_operator_n1_is_zero():
    M = tangent_operator(StructureConstants([[[1.0]]]))
    assert M.shape == (1, 1) and M[0, 0] == 0.0


@pytest.mark.parametrize("seed", range(3))
def test_tangent_operator_matches_naive_assembly(seed):
    a = np.random.default_rng(seed).standard_normal((2, 2, 2))
    assert np.allclose(tangent_operator(StructureConstants(a)), np.array(oracles.naive_tangent_matrix(a.tolist())))


@pytest.mark.parametrize("seed", range(5))
def test_euler_relation(seed):
    a = np.random.default_rng(seed).standard_normal((3, 3, 3))
    A = StructureConstants(a)
    lhs = tangent_operator(A) @ a.ravel()
    assert np.allclose(lhs, 2 * associator_residual(A).tensor.ravel(), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_tangent_operator_is_jacobian(seed):
    rng = np.random.default_rng(seed)
    a, v = rng.standard_normal((2, 3, 3, 3))
    h = 1e-5
    F = lambda x: associator_residual(StructureConstants(x)).tensor.ravel()
    fd = (F(a + h * v) - F(a - h * v)) / (2 * h)
    assert np.abs(tangent_operator(StructureConstants(a)) @ v.ravel() - fd).max() <= 1e-6 * (1 + np.linalg.norm(v))


def test_cocycle_is_minus_linearized_associator():
    rng = np.random.default_rng(2)
    A = StructureConstants(rng.standard_normal((3, 3, 3)))
    v = rng.standard_normal((3, 3, 3))
    assert np.allclose(cocycle_tensor(A, v).ravel(), -(tangent_operator(A) @ v.ravel()), atol=1e-12)


@pytest.mark.parametrize(
    "A, expected",
    [(StructureConstants([[[1.0]]]), 1), (gen_zero(2), 8), (gen_diagonal(2), 4)],
    ids=["R", "zero2", "R+R"],
)
def test_z2_dimension_examples(A, expected):
    assert z2_dimension(A) == expected
    assert A.n**3 - oracles.exact_rank(oracles.naive_tangent_matrix(A.alpha.tolist())) == expected


@pytest.mark.parametrize("A", ASSOCIATIVE, ids=range(len(ASSOCIATIVE)))
def test_z2_dimension_matches_exact_rank(A):
    assert z2_dimension(A) == A.n**3 - oracles.exact_rank(oracles.naive_tangent_matrix(A.alpha.tolist()))


def test_z2_dimension_stable_under_tiny_perturbations():
    rng = np.random.default_rng(4)
    for A in ASSOCIATIVE:
        B = StructureConstants(A.alpha + 1e-12 * rng.standard_normal(A.alpha.shape))
        assert z2_dimension(B) == z2_dimension(A)


def test_z2_dimension_precondition():
    with pytest.raises(PreconditionError):
        z2_dimension(StructureConstants(np.arange(8.0).reshape(2, 2, 2)))


def test_z2_invariant_under_isomorphism_certificates():
    rng = np.random.default_rng(9)
    A = gen_truncated(3)
    B = change_basis(A, rng.standard_normal((3, 3)) + 2 * np.eye(3))
    g = try_isomorphism(A, B, attempts=5, tol=1e-8, seed=0)
    assert g is not None
    assert z2_dimension(A, 1e-8) == z2_dimension(B, 1e-8)


def test_cocycle_defect_examples():
    for A in ASSOCIATIVE:
        assert cocycle_defect(A, np.zeros(A.alpha.shape)) == 0.0
        assert cocycle_defect(A, A.alpha) <= 1e-12


@pytest.mark.parametrize("A", ASSOCIATIVE, ids=range(len(ASSOCIATIVE)))
def test_nullspace_vectors_are_cocycles(A):
    N = nullspace(tangent_operator(A))
    rng = np.random.default_rng(0)
    for _ in range(10):
        v = (N @ rng.standard_normal(N.shape[1])).reshape(A.alpha.shape)
        assert cocycle_defect(A, v) <= 1e-10
        assert oracles.cocycle_via_products(A.alpha, v) <= 1e-10


def test_cocycle_defect_matches_product_oracle():
    rng = np.random.default_rng(12)
    A = gen_truncated(3)
    f = rng.standard_normal((3, 3, 3))
    assert cocycle_defect(A, f) == pytest.approx(oracles.cocycle_via_products(A.alpha, f), rel=1e-12)


def test_cocycle_defect_dimension_mismatch():
    with pytest.raises(InputError):
        cocycle_defect(gen_truncated(3), np.zeros((2, 2, 2)))


def test_coboundary_examples():
    A = gen_truncated(3)
    assert not np.any(coboundary(A, np.zeros((3, 3))))
    assert np.allclose(coboundary(A, np.eye(3)), A.alpha)


def test_coboundary_matches_naive_and_matrix():
    rng = np.random.default_rng(1)
    for A in ASSOCIATIVE:
        G = rng.standard_normal((A.n, A.n))
        d = coboundary(A, G)
        assert np.allclose(d, oracles.naive_coboundary(A.alpha, G))
        assert np.allclose(coboundary_matrix(A) @ G.ravel(), d.ravel())


def test_coboundaries_are_cocycles():
    rng = np.random.default_rng(3)
    for A in ASSOCIATIVE[:5]:
        G = rng.standard_normal((A.n, A.n))
        assert cocycle_defect(A, coboundary(A, G)) <= 1e-10


def test_coboundary_dimension_mismatch():
    with pytest.raises(InputError):
        coboundary(gen_truncated(3), np.eye(2))


def test_coboundary_solve_consistent():
    rng = np.random.default_rng(8)
    for A in ASSOCIATIVE:
        f = coboundary(A, rng.standard_normal((A.n, A.n)))
        G, res = coboundary_solve(A, f)
        assert res <= 1e-10
        assert np.allclose(coboundary(A, G), f, atol=1e-10)


def test_coboundary_solve_dual_number_obstruction():
    A = gen_quadratic(0.0)
    f = np.zeros((2, 2, 2))
    f[1, 1, 0] = 1.0
    G, res = coboundary_solve(A, f)
    assert res == pytest.approx(1.0, abs=1e-12)
    # oracle: dense least squares over the four entries of G
    C = np.zeros((8, 4))
    for p in range(4):
        E = np.zeros(4)
        E[p] = 1.0
        C[:, p] = oracles.naive_coboundary(A.alpha, E.reshape(2, 2)).ravel()
    sol, *_ = np.linalg.lstsq(C, f.ravel(), rcond=None)
    assert np.linalg.norm(C @ sol - f.ravel()) == pytest.approx(res, abs=1e-12)


def test_coboundary_solve_zero_target():
    G, res = coboundary_solve(gen_truncated(3), np.zeros((3, 3, 3)))
    assert not np.any(G) and res == 0.0


def test_derivations_do_not_change_coboundary():
    # R[x]/(x^3) has the derivations x^k d/dx
    A = gen_polynomial(3)
    D = derivations(A)
    assert len(D) > 0
    rng = np.random.default_rng(6)
    G = rng.standard_normal((3, 3))
    for d in D:
        assert np.abs(coboundary(A, d)).max() <= 1e-12
        assert np.abs(coboundary(A, G + 2.5 * d) - coboundary(A, G)).max() <= 1e-12


def test_tangent_condition_iff_cocycle_condition():
    # c = 1: the two defects are the same numbers up to sign
    rng = np.random.default_rng(15)
    tol = 1e-10
    for A in ASSOCIATIVE[:5]:
        M = tangent_operator(A)
        N = nullspace(M)
        for k in range(20):
            if k % 2:
                v = N @ rng.standard_normal(N.shape[1])
            else:
                v = rng.standard_normal(M.shape[1])
            tangent = np.abs(M @ v).max() <= tol
            assert tangent == (cocycle_defect(A, v.reshape(A.alpha.shape)) <= 1.0 * tol)
