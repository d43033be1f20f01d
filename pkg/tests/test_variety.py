import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from algbundle.algebra import (
    StructureConstants,
    associator_residual,
    gen_gh,
    gen_truncated,
    gen_zero,
)
from algbundle.errors import InputError, PreconditionError
from algbundle.variety import embed, project_to_variety, restrict


def perturbed_truncated(eps, seed=0):
    R = np.random.default_rng(seed).standard_normal((3, 3, 3))
    return StructureConstants(gen_truncated(3).alpha + eps * R)


def test_projection_of_variety_point_is_immediate():
    rep = project_to_variety(gen_truncated(3))
    assert rep.iterations == 0 and rep.final_residual == 0.0 and rep.converged


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_projection_converges_near_variety(seed):
    eps = 1e-2
    start = perturbed_truncated(eps, seed)
    rep = project_to_variety(start, tol=1e-10)
    assert rep.converged and rep.final_residual <= 1e-10
    assert associator_residual(rep.point).max_abs <= 1e-10
    assert np.linalg.norm(rep.point.alpha - start.alpha) <= 10 * eps
    # normalized iterates keep the starting scale
    assert np.linalg.norm(rep.point.alpha) == pytest.approx(np.linalg.norm(start.alpha), rel=1e-12)


def test_projection_distance_scales_with_perturbation():
    d = []
    for eps in (1e-2, 5e-3, 2.5e-3):
        start = perturbed_truncated(eps)
        d.append(np.linalg.norm(project_to_variety(start, tol=1e-10).point.alpha - start.alpha))
    assert d[1] / d[0] == pytest.approx(0.5, abs=0.01)
    assert d[2] / d[1] == pytest.approx(0.5, abs=0.01)


def test_projection_is_idempotent():
    rep = project_to_variety(perturbed_truncated(1e-2), tol=1e-10)
    again = project_to_variety(rep.point, tol=1e-10)
    assert again.iterations == 0 and again.converged


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_projection_commutes_with_scaling(lam):
    start = perturbed_truncated(1e-2)
    base = project_to_variety(start, tol=1e-12)
    scaled = project_to_variety(start.scaled(lam), tol=1e-12)
    assert np.allclose(scaled.point.alpha, lam * base.point.alpha, atol=1e-9)


def test_projection_of_zero():
    rep = project_to_variety(gen_zero(2), normalize=False)
    assert rep.converged and rep.iterations == 0 and not np.any(rep.point.alpha)
    with pytest.raises(InputError):
        project_to_variety(gen_zero(2), normalize=True)


def test_projection_reports_nonconvergence():
    rng = np.random.default_rng(0)
    start = StructureConstants(rng.standard_normal((3, 3, 3)))
    rep = project_to_variety(start, tol=1e-14, max_iter=1)
    assert not rep.converged and rep.iterations == 1 and len(rep.step_norms) == 1


def test_projection_rejects_bad_tol():
    with pytest.raises(InputError):
        project_to_variety(gen_truncated(2), tol=0.0)


def test_embed_truncated_two():
    E = embed(gen_truncated(2))
    assert E.n == 3
    assert np.array_equal(E.alpha[:2, :2, :2], gen_truncated(2).alpha)
    assert np.count_nonzero(E.alpha) == 4
    assert not np.any(E.alpha[2]) and not np.any(E.alpha[:, 2]) and not np.any(E.alpha[:, :, 2])
    assert associator_residual(E).max_abs == 0.0


def test_embed_zero():
    E = embed(gen_zero(2))
    assert E.n == 3 and not np.any(E.alpha)


def test_embedded_residual_restricts_exactly():
    rng = np.random.default_rng(5)
    A = StructureConstants(rng.standard_normal((3, 3, 3)))
    R = associator_residual(A).tensor
    RE = associator_residual(embed(A)).tensor
    assert np.array_equal(RE[:3, :3, :3, :3], R)
    mask = np.ones(RE.shape, dtype=bool)
    mask[:3, :3, :3, :3] = False
    assert not np.any(RE[mask])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: arrays(float, (n, n, n), elements=st.floats(-5, 5))))
def test_restrict_embed_round_trip(a):
    A = StructureConstants(a)
    assert restrict(embed(A)).same_as(A)


def test_restrict_examples():
    assert restrict(embed(gen_truncated(2))).same_as(gen_truncated(2))
    with pytest.raises(PreconditionError, match="alpha_12\\^3 = 1.0 touches index 3"):
        restrict(gen_truncated(3))
    R = restrict(gen_zero(2))
    assert R.n == 1 and not np.any(R.alpha)


def test_restrict_n1():
    with pytest.raises(PreconditionError):
        restrict(StructureConstants([[[1.0]]]))
