import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from cartan3.core import (
    ComplexSymMatrix,
    DomainError,
    InvalidInputError,
    NumericalError,
    OrthogonalMatrix,
    PosDefMatrix,
    RealSymMatrix,
    ResourceError,
    UniformBox,
    haar_orthogonal,
    haar_orthogonal_batch,
    integrate_box,
    integrate_mc,
    jackknife,
    jacobi_rule,
    pack,
    packed_size,
    posdef_check,
    principal_minor_det,
    unpack,
)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_pack_roundtrip(n):
    rng = np.random.default_rng(n)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    S = A + A.T
    p = pack(S)
    assert p.shape == (packed_size(n),)
    assert np.array_equal(unpack(p, n), S)


def test_pack_order_n2():
    S = np.array([[1, 2], [2, 3]], complex)
    assert pack(S).tolist() == [1, 2, 3]


def test_containers_validate_and_freeze():
    Z = ComplexSymMatrix.from_dense([[1j, 2], [2, 0]])
    with pytest.raises(ValueError):
        Z.packed[0] = 0
    with pytest.raises(InvalidInputError):
        ComplexSymMatrix.from_dense([[0, 1], [0, 0]])
    with pytest.raises(InvalidInputError):
        RealSymMatrix.from_dense([[1, 0], [0, 1j]])
    with pytest.raises(DomainError):
        PosDefMatrix.from_dense([[1, 0], [0, -1]])
    with pytest.raises(InvalidInputError):
        OrthogonalMatrix(np.array([[1.0, 0.1], [0, 1.0]]))
    assert np.allclose(np.asarray(Z), Z.dense())


@pytest.mark.parametrize(
    "M,expected",
    [
        (np.eye(2), True),
        (np.diag([1.0, 0.0]), False),
        (np.array([[2.0, 1.0], [1.0, 2.0]]), True),
        (np.array([[1.0, 2.0], [2.0, 1.0]]), False),
    ],
)
def test_posdef_check_examples(M, expected):
    assert posdef_check(M) is expected


@given(arrays(float, (3, 3), elements=finite), arrays(float, (3, 3), elements=finite))
@settings(max_examples=60, deadline=None)
def test_posdef_congruence_invariance(B, C):
    # Congruence by an invertible matrix preserves positive definiteness.
    M = B @ B.T + 0.5 * np.eye(3)
    if abs(np.linalg.det(C)) < 1e-2 or np.linalg.cond(C) > 1e4:
        return
    assert posdef_check(C @ M @ C.T)


def test_principal_minor_det():
    Z = np.array([[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]])
    assert principal_minor_det(1, Z) == pytest.approx(2.0)
    assert principal_minor_det(2, Z) == pytest.approx(5.0)
    assert principal_minor_det(3, Z) == pytest.approx(np.linalg.det(Z))


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_haar_orthogonal(n):
    Q = haar_orthogonal(n, np.random.default_rng(0)).dense()
    assert np.allclose(Q @ Q.T, np.eye(n), atol=1e-12)


def test_haar_det_sign_frequency():
    Q = haar_orthogonal_batch(3, 20000, np.random.default_rng(1))
    d = np.linalg.det(Q)
    assert np.allclose(np.abs(d), 1.0)
    assert abs(np.mean(d > 0) - 0.5) < 0.02


def test_haar_first_column_uniform():
    # Mean of the first column vanishes and its second moment is I/n.
    Q = haar_orthogonal_batch(3, 40000, np.random.default_rng(2))
    v = Q[:, :, 0]
    assert np.abs(v.mean(axis=0)).max() < 0.02
    assert np.abs(v.T @ v / len(v) - np.eye(3) / 3).max() < 0.02


@pytest.mark.parametrize("p,q", [(0, 0), (0.5, 0), (1.0, 2.5), (3.0, 0.5)])
def test_jacobi_rule_moments(p, q):
    from scipy.special import beta

    x, w = jacobi_rule(20, p, q)
    for k in range(5):
        assert np.sum(w * x**k) == pytest.approx(beta(p + k + 1, q + 1), rel=1e-12)


@given(st.lists(st.integers(0, 4), min_size=2, max_size=2))
@settings(max_examples=25, deadline=None)
def test_box_rule_exact_on_monomials(exps):
    a, b = exps
    val = integrate_box(lambda P: P[:, 0] ** a * P[:, 1] ** b, 2, 0.0, 1.0, order=6)
    assert val == pytest.approx(1.0 / ((a + 1) * (b + 1)), rel=1e-12)


def test_box_budget():
    with pytest.raises(ResourceError):
        integrate_box(lambda P: P[:, 0], 6, 0.0, 1.0, order=40, budget=1e6)


def test_mc_constant_is_exact():
    est = integrate_mc(lambda P: np.ones(len(P)), UniformBox([0, 0], [2, 3]), 1000, seed=0)
    assert est.value == 6.0
    assert est.std_error == 0.0


def test_mc_error_calibrated():
    # Mean of x^2 on [0, 1]; deviation within 3 standard errors for most seeds.
    hits = 0
    for seed in range(40):
        est = integrate_mc(lambda P: P[:, 0] ** 2, UniformBox([0], [1]), 2000, seed=seed)
        hits += abs(est.value - 1 / 3) <= 3 * est.std_error
    assert hits >= 37


@pytest.mark.parametrize("workers", [1, 2, 3])
def test_mc_deterministic_across_workers(workers):
    f = lambda P: np.exp(P[:, 0]) * np.sin(P[:, 1])
    ref = integrate_mc(f, UniformBox([0, 0], [1, 1]), 5000, seed=7, workers=1)
    est = integrate_mc(f, UniformBox([0, 0], [1, 1]), 5000, seed=7, workers=workers)
    assert est.value == ref.value
    assert est.std_error == ref.std_error


def test_mc_vector_and_chunking():
    f = lambda P: np.stack([P[:, 0], P[:, 0] ** 2], axis=-1)
    a = integrate_mc(f, UniformBox([0], [1]), 5000, seed=3, chunk=100)
    b = integrate_mc(f, UniformBox([0], [1]), 5000, seed=3)
    assert np.allclose(a.value, b.value, rtol=0, atol=1e-14)
    assert a.value.shape == (2,)


def test_mc_nonfinite_names_sample():
    def f(P):
        out = np.ones(len(P))
        out[P[:, 0] > 0.99] = np.nan
        return out

    with pytest.raises(NumericalError, match="sample index"):
        integrate_mc(f, UniformBox([0], [1]), 5000, seed=0)


def test_mc_rejects_small_n():
    with pytest.raises(InvalidInputError):
        integrate_mc(lambda P: P[:, 0], UniformBox([0], [1]), 10, seed=0)


def test_jackknife_ratio():
    f = lambda P: np.stack([P[:, 0], np.ones(len(P))], axis=-1)
    est = integrate_mc(f, UniformBox([0], [1]), 4000, seed=1)
    val, err = jackknife(lambda m: np.array([m[0] / m[1]]), est)
    assert abs(val[0] - 0.5) < 4 * err[0] + 1e-12
    assert err[0] == pytest.approx(est.std_error[0], rel=0.5)
