import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cartan3.core import DomainError, InvalidInputError
from cartan3.domains import DomainPoint
from cartan3.geometry import (
    Action,
    GroupGenerator,
    bergman_metric,
    hamiltonian_residual,
    induced_field,
    kahler_form,
    moment,
    moment_pairing,
)
from cartan3.symbols import random_points

POINTS = {"radius": 0.5, "y_floor": 1.0}


def _tangent(rng, n):
    V = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    V = V + V.T
    return V / np.linalg.norm(V)


def _gen(act, rng, n):
    if act is Action.PARABOLIC:
        S = rng.standard_normal((n, n))
        return GroupGenerator(act, S + S.T)
    return GroupGenerator(act, float(rng.uniform(0.5, 2)))


def test_moment_examples():
    assert moment("elliptic", np.zeros((2, 2))).to_json() == -4.0
    assert moment("parabolic", 1j * np.eye(2)).to_json() == [[-2.0, 0.0], [0.0, -2.0]]
    assert moment("hyperbolic", 1j * np.eye(2)).to_json() == 0.0
    with pytest.raises(DomainError):
        moment("elliptic", np.eye(2))
    with pytest.raises(DomainError):
        moment("hyperbolic", DomainPoint.of("bounded", np.zeros((1, 1))))


def test_kahler_example():
    # At Z = 0 with U = I, V = iI the form is 2n.
    assert kahler_form("bounded", np.zeros((2, 2)), np.eye(2), 1j * np.eye(2)) == pytest.approx(4.0)


@pytest.mark.parametrize("tag", ["bounded", "siegel"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_metric_hermitian_and_compatible(tag, n):
    rng = np.random.default_rng(n)
    Z = random_points(tag, n, 1, rng)[0]
    U, V = _tangent(rng, n), _tangent(rng, n)
    g = bergman_metric(tag, Z, U, V)
    assert g == pytest.approx(np.conj(bergman_metric(tag, Z, V, U)), rel=1e-12)
    assert bergman_metric(tag, Z, U, U).real > 0
    # Antisymmetric and invariant under the complex structure.
    w = kahler_form(tag, Z, U, V)
    assert w == pytest.approx(-kahler_form(tag, Z, V, U), abs=1e-12)
    assert kahler_form(tag, Z, 1j * U, 1j * V) == pytest.approx(w, rel=1e-10, abs=1e-12)


def test_generator_validation():
    with pytest.raises(InvalidInputError):
        GroupGenerator("elliptic", np.eye(2))
    with pytest.raises(InvalidInputError):
        GroupGenerator("loxodromic", 1.0)
    g = GroupGenerator("parabolic", [[1.0, 2.0], [2.0, 0.0]])
    assert np.allclose(induced_field(g, 1j * np.eye(2)).dense(), [[1, 2], [2, 0]])


def test_induced_fields():
    Z = 0.3 * np.eye(2)
    assert np.allclose(induced_field(GroupGenerator("elliptic", 1.5), Z).dense(), 3j * Z)
    W = 1j * np.eye(2) + 0.2
    assert np.allclose(induced_field(GroupGenerator("hyperbolic", 0.5), W).dense(), W)
    with pytest.raises(DomainError):
        induced_field(GroupGenerator("elliptic", 1.0), np.eye(2))


@pytest.mark.parametrize("act", list(Action))
@pytest.mark.parametrize("n", [1, 2, 3])
def test_hamiltonian_identity(act, n):
    rng = np.random.default_rng(100 + n)
    tag = "bounded" if act is Action.ELLIPTIC else "siegel"
    for Z in random_points(tag, n, 5, rng, **POINTS):
        r = hamiltonian_residual(_gen(act, rng, n), Z, _tangent(rng, n), 1e-4)
        assert r <= 1e-6


@pytest.mark.parametrize("act", list(Action))
def test_hamiltonian_second_order(act):
    # Halving h twice: residual ratios near 4 for a central scheme.
    rng = np.random.default_rng(7)
    tag = "bounded" if act is Action.ELLIPTIC else "siegel"
    Z = random_points(tag, 2, 1, rng, **POINTS)[0]
    gen, V = _gen(act, rng, 2), _tangent(rng, 2)
    r = [hamiltonian_residual(gen, Z, V, h) for h in (8e-4, 4e-4, 2e-4)]
    for a, b in zip(r, r[1:]):
        assert 3.5 <= a / b <= 4.5


def test_hamiltonian_step_guard():
    with pytest.raises(InvalidInputError):
        hamiltonian_residual(GroupGenerator("elliptic", 1.0), np.zeros((1, 1)), [[1.0]], 1e-2)
    Z = [[0.99995]]
    with pytest.raises(DomainError, match="boundary"):
        hamiltonian_residual(GroupGenerator("elliptic", 1.0), Z, [[1.0]], 1e-3)


@given(st.floats(0.1, 5.0), st.integers(1, 3), st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_moment_pairing_linear_in_generator(t, n, seed):
    rng = np.random.default_rng(seed)
    Z = random_points("siegel", n, 1, rng)[0]
    a = moment_pairing(GroupGenerator("hyperbolic", t), Z)
    b = moment_pairing(GroupGenerator("hyperbolic", 1.0), Z)
    assert a == pytest.approx(t * b, rel=1e-12, abs=1e-12)


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_parabolic_moment_translation_exact(seed):
    rng = np.random.default_rng(seed)
    Z = random_points("siegel", 2, 1, rng)[0]
    S = rng.standard_normal((2, 2))
    S = S + S.T
    m0 = moment("parabolic", Z).matrix.dense()
    m1 = moment("parabolic", Z + S).matrix.dense()
    assert np.array_equal(m0, m1)


def test_moment_json_normalizes_negative_zero():
    v = moment("hyperbolic", 1j * np.eye(1)).to_json()
    assert str(v) == "0.0"
