import json
import math

import numpy as np
import pytest

from cartan3.core import DomainError, InvalidInputError
from cartan3.oracle import (
    MCConfig,
    QuadConfig,
    circle_invariant,
    commutativity_check,
    commutator_norm,
    eval_monomials,
    frame_check,
    gram_matrix,
    isometry_check,
    monomial_exponents,
    report_json,
    reproduce_check,
    toeplitz_matrices,
    toeplitz_matrix,
)
from cartan3.spectral import c_coeff, c_elliptic
from cartan3.symbols import parse_symbol, raw_symbol

Q = QuadConfig(80)


def test_monomial_basis():
    assert len(monomial_exponents(2, 2)) == 10
    assert monomial_exponents(1, 3) == [(0,), (1,), (2,), (3,)]
    P = np.array([[2.0, 3.0, 5.0]])
    vals = eval_monomials([(0, 0, 0), (1, 0, 2), (0, 2, 1)], P)
    assert vals[0].tolist() == [1, 50, 45]


@pytest.mark.parametrize("lam", [1.5, 2.0, 3.5])
def test_gram_n1_closed_form(lam):
    # ||z^k||^2 = k! Gamma(lam) / Gamma(lam + k); distinct powers are orthogonal.
    b = gram_matrix(monomial_exponents(1, 6), "bounded", lam, Q)
    ref = [math.factorial(k) * math.gamma(lam) / math.gamma(lam + k) for k in range(7)]
    assert np.allclose(np.diag(b.gram).real, ref, rtol=1e-12)
    assert np.abs(b.gram - np.diag(np.diag(b.gram))).max() < 1e-13


def test_gram_siegel_matches_bounded():
    # The Cayley pullback is unitary, so the Gram matrices coincide.
    exps = monomial_exponents(1, 4)
    gb = gram_matrix(exps, "bounded", 3.0, Q).gram
    gs = gram_matrix(exps, "siegel", 3.0, Q).gram
    assert np.allclose(gb, gs, atol=1e-12)


def test_elliptic_matrix_diagonal_n1():
    b = gram_matrix(monomial_exponents(1, 8), "bounded", 2.0, Q)
    M = toeplitz_matrix(raw_symbol(lambda Z: np.abs(Z[..., 0, 0]) ** 2, "bounded"), b)
    off = M.entries - np.diag(np.diag(M.entries))
    assert np.all(np.abs(off) <= 3 * M.error)
    assert np.allclose(np.diag(M.entries).real, [(k + 1) / (k + 2) for k in range(9)], atol=1e-10)


@pytest.mark.parametrize("lam", [1.5, 2.0, 3.0])
def test_elliptic_profile_n1_matches_c_elliptic(lam):
    spec = parse_symbol({"kind": "elliptic", "profile": "cauchy"}, 1)
    b = gram_matrix(monomial_exponents(1, 5), "bounded", lam, Q)
    M = toeplitz_matrix(spec, b)
    for k in range(6):
        v, _ = c_elliptic(spec.profile, lam, (k,), quad_order=80)
        assert abs(M.entries[k, k] - v) <= 3 * M.error[k, k] + 1e-10


@pytest.mark.parametrize("k", range(5))
@pytest.mark.parametrize("lam", [2.0, 3.5])
def test_reproducing_bounded_n1(k, lam):
    for z in [0.0, 0.3 + 0.2j, -0.5j, 0.6 - 0.1j, -0.2 + 0.7j]:
        assert reproduce_check("bounded", lam, lambda W: W[..., 0, 0] ** k, [[z]], Q) <= 1e-6


@pytest.mark.parametrize("z", [1j, 0.4 + 0.7j, -1.2 + 2j])
def test_reproducing_siegel_n1(z):
    r, err = reproduce_check("siegel", 2.5, lambda W: 1 + W[..., 0, 0] ** 2, [[z]], Q, return_error=True)
    assert r <= 1e-6 and err < 1e-6


def test_reproducing_mc_n2():
    mc = MCConfig(N=100_000, seed=3)
    Z = np.array([[0.2, 0.1j], [0.1j, -0.3]])
    r, err = reproduce_check("bounded", 3.5, lambda W: W[..., 0, 1] + 1, Z, mc, return_error=True)
    assert r <= 4 * err


def test_quadrature_only_n1():
    with pytest.raises(InvalidInputError):
        gram_matrix(monomial_exponents(2, 1), "bounded", 3.5, Q)


def test_mc_gram_needs_exact_sampler_weight():
    with pytest.raises(DomainError):
        gram_matrix(monomial_exponents(2, 1), "bounded", 2.5, MCConfig(N=1000))


def test_toeplitz_n2_diagonal_vs_c_coeff():
    # Bonus consistency: the oracle's diagonal on 1, z11 + z22 style monomials
    # is not a signature block, but the constant function is: <T_a 1, 1> = c_(0,0).
    mc = MCConfig(N=200_000, seed=2)
    spec = parse_symbol({"kind": "elliptic", "profile": "exp_neg"}, 2)
    b = gram_matrix(monomial_exponents(2, 1), "bounded", 4.0, mc)
    M = toeplitz_matrix(spec, b)
    v, _ = c_coeff(spec, 4.0, (0, 0))
    assert abs(M.entries[0, 0] - v) <= 4 * M.error[0, 0]


def test_commutator_norm_self_is_zero():
    mc = MCConfig(N=20_000, seed=1)
    spec = parse_symbol({"kind": "raw", "function": "re_z11"}, 2)
    b = gram_matrix(monomial_exponents(2, 1), "bounded", 3.5, mc)
    M = toeplitz_matrix(spec, b)
    val, noise = commutator_norm(M, M)
    assert val == 0.0 and noise > 0


def test_toeplitz_domain_mismatch():
    b = gram_matrix(monomial_exponents(1, 2), "bounded", 2.0, Q)
    with pytest.raises(DomainError):
        toeplitz_matrices([parse_symbol({"kind": "hyperbolic", "profile": "tanh"}, 1)], b)


def test_circle_invariance_detection():
    assert circle_invariant(parse_symbol({"kind": "elliptic", "profile": "exp_neg"}, 2), 2)
    assert circle_invariant(parse_symbol({"kind": "raw", "function": "hs_norm2"}, 2), 2)
    assert not circle_invariant(parse_symbol({"kind": "raw", "function": "re_z11"}, 2), 2)
    assert not circle_invariant(parse_symbol({"kind": "hyperbolic", "profile": "tanh"}, 2), 2)


def test_commutativity_small_elliptic():
    a = parse_symbol({"kind": "elliptic", "profile": "exp_neg"}, 2)
    b = parse_symbol({"kind": "elliptic", "profile": "cauchy"}, 2)
    r = commutativity_check(a, b, 4.0, integrator=MCConfig(N=50_000, seed=4))
    assert r.passed and r.details["truncation"] == 0.0
    d = r.to_json()
    assert set(d) >= {"check", "params", "value", "bound", "pass", "verdict"}


def test_commutativity_inconclusive_at_tiny_sample():
    a = parse_symbol({"kind": "elliptic", "profile": "exp_neg"}, 2)
    b = parse_symbol({"kind": "elliptic", "profile": "cauchy"}, 2)
    r = commutativity_check(a, b, 4.0, integrator=MCConfig(N=200, seed=4), resolution=1e-3)
    assert r.verdict == "inconclusive"


def test_frame_check_default():
    r = frame_check(lambda Y: np.exp(-Y[..., 0, 0]), 2.5)
    assert r.passed
    dev, bnd = np.array(r.details["diag_dev"]), np.array(r.details["diag_bound"])
    assert np.all(dev <= bnd)


def test_frame_check_constant_is_identity():
    r = frame_check(lambda Y: np.ones(Y.shape[0]), 3.0)
    assert np.allclose(r.details["diag"], 1.0, atol=1e-10)


def test_frame_check_detects_wrong_multiplier():
    r = frame_check(lambda Y: np.exp(-Y[..., 0, 0]), 2.5, gamma_fn=lambda x: 0.5)
    assert not r.passed


def test_isometry_n1():
    f = lambda X: X[..., 0, 0] ** 2 * np.exp(-X[..., 0, 0])
    g = lambda X: (X[..., 0, 0] ** 3 - X[..., 0, 0] ** 2) * np.exp(-X[..., 0, 0])
    r = isometry_check(f, g, 2.5, det_powers=(2, 2), exp_rate=1.0)
    assert r.passed and r.value < 1e-8


def test_report_json_roundtrip():
    r = frame_check(lambda Y: np.ones(Y.shape[0]), 2.0)
    obj = json.loads(report_json([r]))
    assert obj[0]["check"] == "parabolic_frame" and obj[0]["pass"] is True
