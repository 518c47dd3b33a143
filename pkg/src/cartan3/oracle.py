"""Brute-force verification: truncated Toeplitz matrices and reproducing checks.

Everything here integrates definitions directly; no spectral formula is used
to produce a matrix. Expected values enter only in the comparison step.

Integration schemes
-------------------
* ``QuadConfig`` (``n = 1``): polar product rule on the disc, Gauss-Jacobi in
  ``s = |w|^2`` with weight ``(1 - s)^{lam-2}`` and the trapezoid rule in the
  angle. The reported error of every entry is the change between two orders
  plus an absolute floor.
* ``MCConfig`` (any ``n``): exact samples of the weighted probability measure
  on the bounded domain. Entry errors come from a delete-one-batch jackknife,
  which carries the correlation between the Gram matrix and the symbol
  integrals into the orthonormalized matrix.

Siegel-domain integrals are pulled back through the Cayley map:
``int_S F dv = int_D F(Z) w_S(Z) / (|J(Z)|^2 w_D(W)) dv_D(W)`` with
``Z = cayley_inv(W)``; the basis on the Siegel side is ``U p_j``.
"""
from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import roots_genlaguerre, roots_legendre

from .core import (
    DomainError,
    InvalidInputError,
    MCEstimate,
    NumericalError,
    integrate_mc,
    jackknife,
    jacobi_rule,
    packed_size,
    unpack,
)
from .domains import (
    DomainPoint,
    DomainTag,
    WeightedBoundedSampler,
    cayley_inv_map,
    cayley_jacobian_batch,
    check_weight,
    kernel_batch,
    pullback_factor_batch,
    weight_density_batch,
)
from .symbols import SymbolKind, SymbolSpec, eval_symbol_batch, random_points

__all__ = [
    "QuadConfig",
    "MCConfig",
    "TruncatedBasis",
    "ToeplitzMatrix",
    "monomial_exponents",
    "eval_monomials",
    "gram_matrix",
    "toeplitz_matrix",
    "toeplitz_matrices",
    "commutator_norm",
    "leakage",
    "reproduce_check",
    "CheckResult",
    "commutativity_check",
    "circle_invariant",
    "extended_commutator",
    "frame_check",
    "isometry_check",
]

GRAM_COND_WARN = 1e8


class IllConditionedWarning(UserWarning):
    """Gram matrix condition number above the warning threshold."""


@dataclass(frozen=True)
class QuadConfig:
    """Polar product quadrature on the disc (``n = 1`` only)."""

    order: int = 80
    floor: float = 1e-12

    def orders(self):
        return self.order, self.order + max(8, self.order // 4)


@dataclass(frozen=True)
class MCConfig:
    """Monte Carlo with exact weighted samples; requires ``lam >= n + 1``."""

    N: int = 100_000
    seed: int = 0
    workers: int = 1
    batches: int = 32


# ---------------------------------------------------------------------------
# monomial bases on packed coordinates


def monomial_exponents(n: int, degree: int) -> list[tuple]:
    """Exponent tuples over the packed entries ``z_jk`` (``j <= k``) with total degree ``<= degree``."""
    d = packed_size(n)
    out = [e for e in itertools.product(range(degree + 1), repeat=d) if sum(e) <= degree]
    return sorted(out, key=lambda e: (sum(e), tuple(-v for v in e)))


def eval_monomials(exps, P: np.ndarray) -> np.ndarray:
    """Monomials at packed points ``P`` (m, d); shape (m, K)."""
    E = np.asarray(exps, int)
    out = np.ones((P.shape[0], len(E)), complex)
    for c in range(P.shape[1]):
        top = int(E[:, c].max()) if len(E) else 0
        if top == 0:
            continue
        pw = np.stack([P[:, c] ** q for q in range(top + 1)], axis=-1)
        out = out * pw[:, E[:, c]]
    return out


# ---------------------------------------------------------------------------
# integration engine


def _polar_rule(order: int, lam: float, K_theta: int):
    """Points and probability weights of the weighted measure on the unit disc."""
    s, ws = jacobi_rule(order, 0.0, lam - 2)
    th = 2 * np.pi * np.arange(K_theta) / K_theta
    S, T = np.meshgrid(s, th, indexing="ij")
    W = (np.sqrt(S) * np.exp(1j * T)).ravel()
    # density (lam-1)/pi (1-s)^{lam-2}, area element ds dtheta / 2
    w = ((lam - 1) * np.outer(ws, np.full(K_theta, 1.0 / K_theta))).ravel()
    return W[:, None], w


def _siegel_factor(lam: float, n: int, P: np.ndarray):
    """Siegel points, change-of-variables ratio and pullback factor at packed bounded points."""
    W = unpack(P, n)
    Z = cayley_inv_map(W)
    ws = weight_density_batch(DomainTag.SIEGEL, lam, Z, inside=np.ones(len(W), bool))
    wd = weight_density_batch(DomainTag.BOUNDED, lam, W, inside=np.ones(len(W), bool))
    ratio = ws / (np.abs(cayley_jacobian_batch(Z)) ** 2 * wd)
    return Z, ratio, pullback_factor_batch(lam, Z)


def _integrand_factory(tag: DomainTag, lam: float, n: int, exps, fields):
    """Integrand over packed bounded points returning upper-triangle entries for each field.

    ``fields`` is a list of symbol callables of the tagged-domain point (or None
    for the Gram matrix).
    """
    K = len(exps)
    iu = np.triu_indices(K)

    def f(P):
        B = eval_monomials(exps, P)
        if tag is DomainTag.SIEGEL:
            Z, ratio, fac = _siegel_factor(lam, n, P)
            B = B * fac[:, None]
            pts = Z
        else:
            ratio = None
            pts = unpack(P, n)
        outer = B[:, iu[0]] * B[:, iu[1]].conj()
        cols = []
        for g in fields:
            v = outer if g is None else outer * np.asarray(g(pts))[:, None]
            cols.append(v if ratio is None else v * ratio[:, None])
        return np.concatenate(cols, axis=-1)

    return f


def _fill_hermitian(vec: np.ndarray, K: int) -> np.ndarray:
    """Hermitian matrix from upper-triangle entries where entry (j,k) = int p_j conj(p_k) ..."""
    iu = np.triu_indices(K)
    M = np.zeros(vec.shape[:-1] + (K, K), complex)
    M[..., iu[0], iu[1]] = vec
    M[..., iu[1], iu[0]] = vec.conj()
    return M


def _run(tag, lam, n, exps, fields, integrator):
    """Integrate all fields; returns (values (F, L), errors (F, L) or None, estimate or None)."""
    f = _integrand_factory(tag, lam, n, exps, fields)
    L = len(exps) * (len(exps) + 1) // 2
    if isinstance(integrator, QuadConfig):
        if n != 1:
            raise InvalidInputError("polar quadrature is available for n = 1 only")
        degree = max(sum(e) for e in exps)
        vals = []
        for q in integrator.orders():
            # trapezoid in the angle: exact for trigonometric degree < K_theta
            P, w = _polar_rule(q, lam, max(2 * q, 4 * degree + 8))
            vals.append(np.tensordot(w, f(P), axes=(0, 0)))
        v = vals[1].reshape(len(fields), L)
        err = np.abs(vals[1] - vals[0]).reshape(len(fields), L) + integrator.floor
        return v, err, None
    if isinstance(integrator, MCConfig):
        sampler = WeightedBoundedSampler(n, lam)
        width = L * len(fields)
        chunk = int(max(1024, min(1 << 16, (1 << 22) // max(1, width))))
        est = integrate_mc(f, sampler, integrator.N, integrator.seed, integrator.workers, integrator.batches, chunk=chunk)
        v = np.asarray(est.value).reshape(len(fields), L)
        return v, np.asarray(est.std_error).reshape(len(fields), L), est
    raise InvalidInputError(f"unknown integrator {integrator!r}")


# ---------------------------------------------------------------------------
# Gram and Toeplitz matrices


@dataclass(eq=False)
class TruncatedBasis:
    """Monomials of bounded degree with their Gram matrix.

    On the Siegel domain the elements are the pulled-back monomials ``U p_j``.
    """

    tag: DomainTag
    lam: float
    n: int
    exponents: list
    gram: np.ndarray
    gram_error: np.ndarray
    integrator: object
    warnings: list = field(default_factory=list)
    _est: MCEstimate | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.exponents)


@dataclass(eq=False)
class ToeplitzMatrix:
    """Matrix of a Toeplitz operator in the orthonormalized truncated basis."""

    entries: np.ndarray
    error: np.ndarray
    name: str = ""


def gram_matrix(exponents, tag, lam: float, integrator, n: int | None = None) -> TruncatedBasis:
    """Gram matrix ``<p_j, p_k>`` under the weighted probability measure.

    Parameters
    ----------
    exponents : list of tuple
        Monomial exponents on packed coordinates (see :func:`monomial_exponents`).
    tag : DomainTag or str
    lam : float
    integrator : QuadConfig or MCConfig
    n : int, optional
        Matrix size; inferred from the exponent length.
    """
    tag = DomainTag.parse(tag)
    exps = [tuple(e) for e in exponents]
    d = len(exps[0])
    if n is None:
        n = int(round((math.sqrt(8 * d + 1) - 1) / 2))
    if packed_size(n) != d:
        raise InvalidInputError("exponent length does not match n")
    check_weight(n, lam)
    v, err, est = _run(tag, lam, n, exps, [None], integrator)
    K = len(exps)
    G = _fill_hermitian(v[0], K)
    E = np.abs(_fill_hermitian(err[0], K))
    notes = []
    ev = np.linalg.eigvalsh(G)
    cond = ev[-1] / ev[0] if ev[0] > 0 else np.inf
    if cond > GRAM_COND_WARN:
        msg = f"Gram matrix condition number {cond:.3g} exceeds {GRAM_COND_WARN:g}"
        notes.append(msg)
        warnings.warn(msg, IllConditionedWarning, stacklevel=2)
    return TruncatedBasis(tag, lam, n, exps, G, E, integrator, notes, est)


def _inv_sqrt(G: np.ndarray) -> np.ndarray:
    ev, V = np.linalg.eigh(G)
    if ev[0] <= 0:
        cond = ev[-1] / ev[0] if ev[0] != 0 else np.inf
        raise NumericalError(f"Gram matrix is not positive definite (condition number {cond:.3g})")
    return (V / np.sqrt(ev)) @ V.conj().T


def _compress(G: np.ndarray, A: np.ndarray) -> np.ndarray:
    R = _inv_sqrt(G)
    return R @ A @ R


def toeplitz_matrices(symbols, basis: TruncatedBasis, integrator=None) -> list[ToeplitzMatrix]:
    """Toeplitz matrices of several symbols in one integration pass.

    ``M = G^{-1/2} A G^{-1/2}`` with ``A_jk = int a p_k conj(p_j)``; the
    projection drops out against holomorphic test vectors.
    """
    integrator = basis.integrator if integrator is None else integrator
    if integrator != basis.integrator:
        raise InvalidInputError("symbols must be integrated with the basis integrator (shared samples)")
    for s in symbols:
        if s.tag is not basis.tag:
            raise DomainError(f"symbol {s.name!r} lives on {s.tag.value}, basis on {basis.tag.value}")
    K = basis.size
    fields = [(lambda pts, s=s: eval_symbol_batch(s, pts)) for s in symbols]
    v, err, est = _run(basis.tag, basis.lam, basis.n, basis.exponents, fields, integrator)
    out = []
    L = K * (K + 1) // 2
    if est is None:
        # Quadrature: propagate order differences of G and A to first order.
        for i, s in enumerate(symbols):
            A = _fill_hermitian(v[i], K).T  # entry (j,k) = <T p_k, p_j>
            M = _compress(basis.gram, A)
            Ap = _fill_hermitian(v[i] + err[i], K).T
            Gp = basis.gram + basis.gram_error
            dM = np.abs(_compress(Gp, Ap) - M) + np.abs(_compress(basis.gram, _fill_hermitian(err[i], K).T))
            out.append(ToeplitzMatrix(M, dM + 1e-12, s.name))
        return out
    gest = basis._est
    if gest is None or gest.batch_means is None:
        raise InvalidInputError("MC basis lacks batch data for error propagation")
    joint_bm = np.concatenate([gest.batch_means, est.batch_means], axis=1)
    joint = MCEstimate(None, None, est.samples, joint_bm, est.batch_counts)
    for i, s in enumerate(symbols):
        def fn(mean, i=i):
            G = _fill_hermitian(mean[:L], K)
            A = _fill_hermitian(mean[L + i * L: L + (i + 1) * L], K).T
            return _compress(G, A)

        M, E = jackknife(fn, joint)
        out.append(ToeplitzMatrix(M, E, s.name))
    return out


def toeplitz_matrix(a: SymbolSpec, basis: TruncatedBasis, integrator=None) -> ToeplitzMatrix:
    """Matrix of ``T_a`` in the Gram-orthonormalized basis (symmetric orthogonalization)."""
    return toeplitz_matrices([a], basis, integrator)[0]


def commutator_norm(A: ToeplitzMatrix, B: ToeplitzMatrix):
    """Frobenius norm of ``AB - BA`` and its first-order propagated noise.

    The noise treats entry errors as independent:
    ``var(dC_ij) = sum_k s_A,ik^2 |B_kj|^2 + |A_ik|^2 s_B,kj^2 + s_B,ik^2 |A_kj|^2 + |B_ik|^2 s_A,kj^2``,
    and the reported bound is ``sqrt(sum_ij var(dC_ij))``.
    """
    a, b = A.entries, B.entries
    if a.shape != b.shape:
        raise InvalidInputError("matrices have different sizes")
    C = a @ b - b @ a
    sa2, sb2 = A.error ** 2, B.error ** 2
    var = sa2 @ np.abs(b) ** 2 + np.abs(a) ** 2 @ sb2 + sb2 @ np.abs(a) ** 2 + np.abs(b) ** 2 @ sa2
    return float(np.linalg.norm(C)), float(np.sqrt(var.sum()))


def leakage(M_abs2: ToeplitzMatrix, M: ToeplitzMatrix) -> float:
    """Frobenius bound on ``(I - P) T_a P``: ``sqrt(tr M_{|a|^2} - ||M_a||_F^2)``."""
    return float(math.sqrt(max(0.0, np.trace(M_abs2.entries).real - np.linalg.norm(M.entries) ** 2)))


# ---------------------------------------------------------------------------
# reproducing property


def reproduce_check(tag, lam: float, p, Z, integrator, return_error: bool = False):
    """``|int p(W) K(Z, W) dv(W) - p(Z)|`` for a holomorphic polynomial ``p``.

    On the Siegel domain ``p`` is a bounded-domain polynomial and the tested
    function is its pullback ``U p``.

    Parameters
    ----------
    p : callable
        Function of dense bounded-domain matrices ``(m, n, n)``.
    Z : array_like or DomainPoint
        Evaluation point in the tagged domain.
    integrator : QuadConfig or MCConfig
    return_error : bool
        Also return the integration error estimate.
    """
    tag = DomainTag.parse(tag)
    P0 = Z if isinstance(Z, DomainPoint) else DomainPoint.of(tag, Z)
    if P0.tag is not tag:
        raise DomainError("point and tag disagree")
    n = P0.n
    check_weight(n, lam)
    Zd = P0.dense()

    def target(pts):
        if tag is DomainTag.SIEGEL:
            from .domains import cayley_map

            return pullback_factor_batch(lam, pts) * np.asarray(p(cayley_map(pts)))
        return np.asarray(p(pts))

    def f(Pk):
        W = unpack(Pk, n)
        if tag is DomainTag.SIEGEL:
            Zs, ratio, fac = _siegel_factor(lam, n, Pk)
            vals = fac * np.asarray(p(W)) * kernel_batch(tag, lam, Zd[None], Zs) * ratio
        else:
            vals = np.asarray(p(W)) * kernel_batch(tag, lam, Zd[None], W)
        return vals

    exact = complex(target(Zd[None])[0])
    if isinstance(integrator, QuadConfig):
        if n != 1:
            raise InvalidInputError("polar quadrature is available for n = 1 only")
        vals = []
        for q in integrator.orders():
            P, w = _polar_rule(q, lam, 2 * q)
            vals.append(complex(w @ f(P)))
        res = abs(vals[1] - exact)
        err = abs(vals[1] - vals[0]) + integrator.floor
    else:
        est = integrate_mc(f, WeightedBoundedSampler(n, lam), integrator.N, integrator.seed,
                           integrator.workers, integrator.batches)
        res = abs(est.value - exact)
        err = float(est.std_error)
    return (float(res), float(err)) if return_error else float(res)


# ---------------------------------------------------------------------------
# verification reports


@dataclass
class CheckResult:
    """One verification outcome.

    ``verdict`` is ``pass``, ``fail`` or ``inconclusive``; the last means the
    noise floor exceeds the check's resolution, so the outcome says nothing
    either way and more samples are needed.
    """

    check: str
    params: dict
    value: float
    bound: float
    passed: bool
    verdict: str = ""
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = {"check": self.check, "params": self.params, "value": self.value, "bound": self.bound,
             "pass": bool(self.passed), "verdict": self.verdict or ("pass" if self.passed else "fail")}
        if self.details:
            d["details"] = self.details
        return d


def _verdict(ok: bool, noise: float, resolution: float | None) -> str:
    if resolution is not None and noise > resolution:
        return "inconclusive"
    return "pass" if ok else "fail"


def circle_invariant(s: SymbolSpec, n: int, trials: int = 64, tol: float = 1e-10, seed: int = 0) -> bool:
    """Whether a bounded-domain symbol is invariant under ``Z -> e^{it} Z`` (numerically)."""
    if s.tag is not DomainTag.BOUNDED:
        return False
    if s.kind is SymbolKind.ELLIPTIC:
        return True
    rng = np.random.default_rng(seed)
    Z = random_points(DomainTag.BOUNDED, n, trials, rng)
    ph = np.exp(1j * rng.uniform(0, 2 * np.pi, trials))[:, None, None]
    a0 = eval_symbol_batch(s, Z)
    a1 = eval_symbol_batch(s, ph * Z)
    return bool(np.max(np.abs(a1 - a0)) <= tol * max(1.0, float(np.max(np.abs(a0)))))


def extended_commutator(a: SymbolSpec, b: SymbolSpec, lam: float, n: int, degree: int, extended_degree: int,
                        integrator: MCConfig):
    """``||P [M'_a, M'_b] P||_F`` with ``M'`` truncated at ``extended_degree`` and ``P`` onto ``degree``.

    Uses the Cholesky (nested) orthonormalization, so the first basis
    elements span the lower-degree space. This approximates the untruncated
    compression ``P [T_a, T_b] P`` better than the plain truncated
    commutator. Returns ``(value, jackknife error)``.
    """
    if not isinstance(integrator, MCConfig):
        raise InvalidInputError("extended commutator uses the Monte Carlo integrator")
    exps = monomial_exponents(n, extended_degree)
    k = len(monomial_exponents(n, degree))
    basis = gram_matrix(exps, a.tag, lam, integrator, n)
    K = basis.size
    L = K * (K + 1) // 2
    v, err, est = _run(a.tag, lam, n, exps, [
        (lambda pts, s=s: eval_symbol_batch(s, pts)) for s in (a, b)], integrator)
    joint = MCEstimate(None, None, est.samples,
                       np.concatenate([basis._est.batch_means, est.batch_means], axis=1), est.batch_counts)

    def fn(mean):
        G = _fill_hermitian(mean[:L], K)
        C = np.linalg.cholesky(G.T)  # Gram in the (row = bra) convention
        Ci = np.linalg.inv(C)
        Ma = Ci @ _fill_hermitian(mean[L:2 * L], K).T @ Ci.conj().T
        Mb = Ci @ _fill_hermitian(mean[2 * L:], K).T @ Ci.conj().T
        comm = (Ma @ Mb - Mb @ Ma)[:k, :k]
        return np.array([np.linalg.norm(comm)])

    val, e = jackknife(fn, joint)
    return float(val[0]), float(e[0])


def commutativity_check(a: SymbolSpec, b: SymbolSpec, lam: float, n: int = 2, degree: int = 2,
                        integrator=None, expect_commute: bool = True, resolution: float | None = 1e-2,
                        name: str = "commutator", extended_degree: int | None = None) -> CheckResult:
    """Compare ``||[M_a, M_b]||_F`` with ``3 (noise + truncation)``.

    The truncation term bounds ``||P [T_a, T_b] P - [M_a, M_b]||_F``, which
    equals ``||P T_a (I-P) T_b P - P T_b (I-P) T_a P||_F``. It is 0 when either
    symbol is circle invariant on the bounded domain (the truncated space is a
    sum of homogeneous components, which such operators preserve); otherwise
    it is ``2 l_a l_b`` with ``l`` from :func:`leakage`. With
    ``expect_commute=False`` (a control pair) the check passes when the
    commutator exceeds the same bound. ``extended_degree`` adds the
    diagnostic from :func:`extended_commutator` to the details.
    """
    integrator = integrator or MCConfig()
    tag = a.tag
    if b.tag is not tag:
        raise DomainError("both symbols must live on one domain")
    basis = gram_matrix(monomial_exponents(n, degree), tag, lam, integrator, n)
    graded = any(circle_invariant(s, n) for s in (a, b))
    syms = [a, b]
    if not graded:
        syms += [_abs2(a), _abs2(b)]
    mats = toeplitz_matrices(syms, basis)
    value, noise = commutator_norm(mats[0], mats[1])
    if graded:
        trunc, method = 0.0, "graded"
    else:
        trunc, method = 2 * leakage(mats[2], mats[0]) * leakage(mats[3], mats[1]), "leakage"
    bound = 3 * (noise + trunc)
    ok = value <= bound if expect_commute else value > bound
    params = {"lambda": lam, "n": n, "degree": degree, "tag": tag.value, "a": a.name, "b": b.name,
              "expect_commute": expect_commute, **_integrator_params(integrator)}
    details = {"noise": noise, "truncation": trunc, "truncation_method": method}
    if extended_degree is not None:
        ev, ee = extended_commutator(a, b, lam, n, degree, extended_degree, integrator)
        details.update({"extended_degree": extended_degree, "extended_value": ev, "extended_error": ee})
    return CheckResult(name, params, value, bound, ok, _verdict(ok, noise, resolution), details)


def _abs2(s: SymbolSpec) -> SymbolSpec:
    bound = None if s.bound is None else s.bound**2
    return SymbolSpec(SymbolKind.RAW, s.tag, lambda Z, s=s: np.abs(eval_symbol_batch(s, Z)) ** 2,
                      bound, f"|{s.name}|^2")


def _integrator_params(integrator) -> dict:
    d = asdict(integrator)
    d["integrator"] = type(integrator).__name__
    d.pop("workers", None)
    return d


# ---------------------------------------------------------------------------
# parabolic frame check (n = 1)


def _bump_coeffs(p: float, q: float) -> float:
    """Normalizer of ``(x-p)^3 (q-x)^3`` in L^2([p, q])."""
    h = q - p
    # int_0^h t^6 (h-t)^6 dt = h^13 B(7, 7)
    return 1.0 / math.sqrt(h**13 * math.gamma(7) ** 2 / math.gamma(14))


def frame_check(symbol, lam: float, supports=((0.5, 1.5), (1.5, 2.5), (2.5, 3.5)),
                orders=(2000, 40, 300), x_max: float = 400.0, gamma_fn=None,
                resolution: float | None = 1e-6) -> CheckResult:
    """Matrix of a parabolic Toeplitz operator in the frame ``{R* e_j}`` for ``n = 1``.

    ``e_j`` are disjointly supported ``C^2`` bumps normalized in ``L^2(0, inf)``.
    ``R* e_j`` is evaluated by Gauss-Legendre over the support, and
    ``<T_a R* e_j, R* e_k> = int_S a(y) R*e_j conj(R*e_k) w(y) dx dy`` by
    Gauss-Legendre in ``x`` on ``[-x_max, x_max]`` and generalized
    Gauss-Laguerre in ``y``. ``orders = (x nodes, y nodes, xi nodes)``; the
    xi rule must resolve ``e^{i xi x_max}``. Since ``e_j`` has three vanishing
    derivatives at its endpoints, ``|R* e_j| = O(|x|^{-4})`` and the dropped
    tail is below 1e-12 at the default window. Errors are differences against
    a 1.5x finer rule plus a 1e-12 floor. Off-diagonal mass must stay within 3 x noise and the diagonal must
    match ``int gamma(x) |e_j(x)|^2 dx``.

    Parameters
    ----------
    symbol : SymbolSpec or callable
        Parabolic symbol, or its profile: a vectorized function of ``(m, 1, 1)``
        arrays holding ``Im z``.
    gamma_fn : callable, optional
        Scalar multiplier ``x -> gamma(x)`` for the diagonal. Defaults to
        :func:`cartan3.spectral.gamma_parabolic` of the profile.
    """
    check_weight(1, lam)
    if isinstance(symbol, SymbolSpec):
        if symbol.kind is not SymbolKind.PARABOLIC:
            raise InvalidInputError("frame check needs a parabolic symbol")
        profile = symbol.profile
    else:
        profile = symbol
    if gamma_fn is None:
        from .spectral import gamma_parabolic

        def gamma_fn(x):
            return gamma_parabolic(profile, lam, np.array([[x]]))
    J = len(supports)

    def matrix(qx, qy, qxi):
        # R* e_j(x + iy) = sum_xi g(xi) e^{i xi x} e^{-xi y}: separable in (x, y)
        t, wt = roots_legendre(qx)
        x, wx = x_max * t, x_max * wt
        y, wy = roots_genlaguerre(qy, lam - 2)
        wy = wy * np.exp(y) * (lam - 1) / math.pi * 2.0 ** (lam - 2)
        a = np.asarray(profile(y[:, None, None])).reshape(-1)
        xi_n, xi_w = roots_legendre(qxi)
        Vx, Vy = [], []
        for (p, q) in supports:
            xs = p + (q - p) * (xi_n + 1) / 2
            ws = xi_w * (q - p) / 2
            e = _bump_coeffs(p, q) * (xs - p) ** 3 * (q - xs) ** 3
            g = e * xs ** (lam / 2 - 0.5) * ws / math.sqrt(math.gamma(lam))
            Vx.append(np.exp(1j * np.outer(x, xs)) * g)  # (qx, qxi)
            Vy.append(np.exp(-np.outer(xs, y)))  # (qxi, qy)
        V = np.stack([vx @ vy for vx, vy in zip(Vx, Vy)], axis=-1)  # (qx, qy, J)
        w = np.outer(wx, wy * a)
        return np.einsum("xy,xyj,xyk->jk", w, V, V.conj())  # (j, k) = int a R*e_j conj(R*e_k)

    M1 = matrix(*orders)
    M2 = matrix(*[int(1.5 * o) for o in orders])
    err = np.abs(M2 - M1) + 1e-12
    off = ~np.eye(J, dtype=bool)
    off_mass = float(np.linalg.norm(M2[off]))
    off_noise = float(np.linalg.norm(err[off]))
    details = {"matrix_re": M2.real.tolist(), "matrix_im": M2.imag.tolist(),
               "off_mass": off_mass, "off_noise": off_noise}
    ok = off_mass <= 3 * off_noise
    expected, exp_err = [], []
    for (p, q) in supports:
        vals = []
        for order in (40, 60):
            xn, xw = roots_legendre(order)
            xs = p + (q - p) * (xn + 1) / 2
            ws = xw * (q - p) / 2
            e2 = (_bump_coeffs(p, q) * (xs - p) ** 3 * (q - xs) ** 3) ** 2
            vals.append(sum(complex(gamma_fn(float(xv))) * ev * wv for xv, ev, wv in zip(xs, e2, ws)))
        expected.append(vals[1])
        exp_err.append(abs(vals[1] - vals[0]) + 1e-12)
    diag_dev = np.abs(np.diag(M2) - np.array(expected))
    diag_bound = 3 * (np.diag(err) + np.array(exp_err))
    details.update({"diag": np.diag(M2).real.tolist(), "expected_diag": np.real(expected).tolist(),
                    "diag_dev": diag_dev.tolist(), "diag_bound": diag_bound.tolist()})
    ok = ok and bool(np.all(diag_dev <= diag_bound))
    noise = max(off_noise, float(np.max(np.diag(err))))
    return CheckResult("parabolic_frame", {"lambda": lam, "n": 1, "supports": [list(s) for s in supports],
                                           "orders": list(orders)},
                       off_mass, 3 * off_noise, ok, _verdict(ok, noise, resolution), details)


def isometry_check(f, g, lam: float, integrator: QuadConfig | None = None, det_powers=(0.0, 0.0),
                   exp_rate: float | None = None, quad_order: int = 40) -> CheckResult:
    """``|<R* f, R* g> - <f, g>|`` for ``n = 1``.

    The left side is a 2-D integral over the upper half-plane, taken in the
    Cayley chart with the polar rule of ``integrator``; ``R*`` is evaluated by
    :func:`cartan3.spectral.fourier_laplace_adjoint_batch` at every node. The
    right side is an adaptive 1-D integral over ``(0, inf)``.

    Parameters
    ----------
    f, g : callable
        Functions of ``(m, 1, 1)`` arrays.
    det_powers, exp_rate :
        Passed to ``R*`` for ``f`` and ``g`` respectively (``exp_rate`` shared).
    """
    from scipy.integrate import quad

    from .spectral import fourier_laplace_adjoint_batch

    integrator = integrator or QuadConfig()
    check_weight(1, lam)

    def lhs(order):
        P, w = _polar_rule(order, lam, 2 * order)
        Z, ratio, _ = _siegel_factor(lam, 1, P)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            F = fourier_laplace_adjoint_batch(f, lam, Z, quad_order, det_powers[0], exp_rate=exp_rate)
            G = fourier_laplace_adjoint_batch(g, lam, Z, quad_order, det_powers[1], exp_rate=exp_rate)
        return complex(np.sum(w * ratio * F * G.conj()))

    o1, o2 = integrator.orders()
    v1, v2 = lhs(o1), lhs(o2)

    def fg(x):
        return complex(f(np.array([[[x]]]))[0] * np.conj(g(np.array([[[x]]]))[0]))

    re, e_re = quad(lambda x: fg(x).real, 0, np.inf, epsabs=1e-13, limit=200)
    im, e_im = quad(lambda x: fg(x).imag, 0, np.inf, epsabs=1e-13, limit=200)
    rhs = complex(re, im)
    err = abs(v2 - v1) + e_re + e_im + integrator.floor
    dev = abs(v2 - rhs)
    ok = dev <= 1e-4
    return CheckResult("isometry", {"lambda": lam, "n": 1, "order": o2, "quad_order": quad_order},
                       dev, 1e-4, ok, "pass" if ok else "fail",
                       {"lhs": [v2.real, v2.imag], "rhs": [rhs.real, rhs.imag], "error": err})


def report_json(results) -> str:
    """Serialize check results as a JSON list."""
    return json.dumps([r.to_json() for r in results], indent=2, sort_keys=True) + "\n"
