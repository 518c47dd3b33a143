"""Spectral formulas for Toeplitz operators with invariant symbols.

* ``c_coeff`` / ``c_coeff_full`` / ``c_elliptic``: eigenvalue of the Toeplitz
  operator of a ``U(n)``-invariant symbol on the block of holomorphic
  polynomials indexed by a signature ``alpha``.
* ``fourier_laplace_adjoint``: the isometry from ``L^2`` of the cone of positive
  definite matrices onto the weighted Bergman space of the Siegel domain.
* ``gamma_parabolic``: the multiplier that represents a parabolic Toeplitz
  operator after that isometry.

Cone integrals use the chart ``W = L L^T`` (``L`` lower triangular with
positive diagonal) with generalized Gauss-Laguerre rules in ``u_j = L_jj^2``
and Gauss-Hermite rules in the off-diagonal entries. The cone measure is the
trace-norm Lebesgue measure, ``2**(n(n-1)/4)`` times coordinate measure.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_genlaguerre, roots_hermite

from .core import (
    AccuracyWarning,
    DomainError,
    InvalidInputError,
    MCEstimate,
    ResourceError,
    SamplerError,
    as_array,
    haar_orthogonal_batch,
    jacobi_rule,
    posdef_check,
    spawn_rng,
)
from .domains import DomainPoint, DomainTag, check_weight, log_multigamma, logdet_branch
from .symbols import SymbolSpec, eval_symbol_batch

__all__ = [
    "Signature",
    "signatures",
    "conical_poly",
    "conical_poly_batch",
    "H_factor",
    "h_alpha",
    "c_coeff",
    "c_coeff_full",
    "c_coeff_full_many",
    "c_elliptic",
    "fourier_laplace_adjoint",
    "fourier_laplace_adjoint_batch",
    "gamma_parabolic",
    "SpectralTable",
    "MatrixIntervalSampler",
    "sqrtm_psd",
]

DEFAULT_NODE_BUDGET = 4_000_000


# ---------------------------------------------------------------------------
# signatures and conical polynomials


@dataclass(frozen=True, order=True)
class Signature:
    """Non-increasing tuple of non-negative integers."""

    alpha: tuple

    def __post_init__(self):
        a = tuple(int(v) for v in self.alpha)
        if any(int(v) != v for v in self.alpha):
            raise InvalidInputError(f"signature entries must be integers: {self.alpha}")
        if not a:
            raise InvalidInputError("signature must be non-empty")
        if a[-1] < 0 or any(a[i] < a[i + 1] for i in range(len(a) - 1)):
            raise InvalidInputError(f"signature must be non-increasing and >= 0: {a}")
        object.__setattr__(self, "alpha", a)

    @classmethod
    def parse(cls, s) -> "Signature":
        if isinstance(s, Signature):
            return s
        if isinstance(s, str):
            parts = s.replace(";", ",").strip("()[] ").split(",")
            try:
                return cls(tuple(int(p) for p in parts if p.strip()))
            except ValueError:
                raise InvalidInputError(f"cannot parse signature {s!r}") from None
        return cls(tuple(np.atleast_1d(s).tolist()))

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def degree(self) -> int:
        return sum(self.alpha)

    def exponents(self) -> tuple:
        """``alpha_j - alpha_{j+1}`` with ``alpha_{n+1} = 0``."""
        a = self.alpha + (0,)
        return tuple(a[j] - a[j + 1] for j in range(self.n))

    def key(self) -> str:
        return ";".join(str(v) for v in self.alpha)


def signatures(n: int, max_degree: int) -> list[Signature]:
    """All signatures of length ``n`` with ``|alpha| <= max_degree``, by degree then reverse-lex."""
    out = []
    for a in itertools.product(range(max_degree, -1, -1), repeat=n):
        if sum(a) <= max_degree and all(a[i] >= a[i + 1] for i in range(n - 1)):
            out.append(Signature(a))
    return sorted(out, key=lambda s: (s.degree, tuple(-v for v in s.alpha)))


def conical_poly_batch(alpha: Signature, Zs: np.ndarray) -> np.ndarray:
    """Conical polynomial on ``(m, n, n)`` arrays."""
    Zs = np.asarray(Zs)
    n = Zs.shape[-1]
    if alpha.n != n:
        raise InvalidInputError(f"signature length {alpha.n} does not match matrix size {n}")
    out = np.ones(Zs.shape[:-2], dtype=np.result_type(Zs.dtype, float))
    for j, e in enumerate(alpha.exponents(), start=1):
        if e:
            out = out * np.linalg.det(Zs[..., :j, :j]) ** e
    return out


def conical_poly(alpha, Z) -> complex:
    """``prod_j Delta_j(Z)^{alpha_j - alpha_{j+1}}`` with ``Delta_j`` the leading minors."""
    alpha = Signature.parse(alpha)
    Z = as_array(Z.Z if isinstance(Z, DomainPoint) else Z)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise InvalidInputError("conical_poly expects a single square matrix")
    return complex(conical_poly_batch(alpha, Z[None])[0])


# ---------------------------------------------------------------------------
# reduced-form ingredients


def H_factor(alpha_n: int, lam: float, x) -> np.ndarray | float:
    """``(prod x)^{alpha_n} (prod (1 - x))^{lam-n-1} |prod_{j<k} (x_j - x_k)|``.

    ``x`` is an ``(n,)`` vector or an ``(m, n)`` batch in ``(0, 1)^n`` with
    pairwise distinct coordinates.
    """
    x = np.asarray(x, float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    n = x.shape[-1]
    check_weight(n, lam)
    if np.any((x <= 0) | (x >= 1)):
        raise DomainError("H_factor needs coordinates in the open interval (0, 1)")
    vd = np.ones(x.shape[0])
    for j in range(n):
        for k in range(j + 1, n):
            vd = vd * np.abs(x[:, j] - x[:, k])
    if n > 1 and np.any(vd == 0):
        raise InvalidInputError("H_factor is degenerate at coincident coordinates")
    out = np.prod(x, axis=-1) ** alpha_n * np.prod(1 - x, axis=-1) ** (lam - n - 1) * vd
    return float(out[0]) if single else out


def _h2_exact(exp1: int, x: np.ndarray) -> np.ndarray:
    """Average of ``(x1 cos^2 t + x2 sin^2 t)^exp1`` over the circle.

    The integrand is a trigonometric polynomial of degree ``2 exp1``, so the
    equispaced trapezoid rule with more than ``2 exp1`` nodes is exact.
    """
    if exp1 == 0:
        return np.ones(x.shape[0])
    K = 2 * exp1 + 2
    t = 2 * np.pi * np.arange(K) / K
    c2, s2 = np.cos(t) ** 2, np.sin(t) ** 2
    vals = (x[:, 0:1] * c2 + x[:, 1:2] * s2) ** exp1
    return vals.mean(axis=-1)


def _h_samples(alpha: Signature, x: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Integrand of ``h_alpha`` at points ``x`` (m, n) for Haar draws ``A`` (N, n, n); shape (N, m)."""
    n = alpha.n
    ex = alpha.exponents()[: n - 1]
    # (A D(x) A^T)_{ab} = sum_c A_ac x_c A_bc
    M = np.einsum("Nac,mc,Nbc->Nmab", A, x, A, optimize=True)
    out = np.ones(M.shape[:2])
    for j, e in enumerate(ex, start=1):
        if e:
            out = out * np.linalg.det(M[..., :j, :j]) ** e
    return out


def h_alpha(alpha, x, N: int = 10_000, seed: int = 0) -> MCEstimate:
    """Haar average ``int_{O(n)} prod_{j<n} Delta_j(A D(x) A^T)^{alpha_j - alpha_{j+1}} dA``.

    ``n = 1`` and constant signatures give exactly 1. ``n = 2`` uses the exact
    circle reduction (``std_error = 0``). ``n >= 3`` uses ``N`` Haar draws.
    """
    alpha = Signature.parse(alpha)
    x = np.asarray(x, float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    n = alpha.n
    if x.shape[-1] != n:
        raise InvalidInputError("x has the wrong length for this signature")
    if n == 1 or all(e == 0 for e in alpha.exponents()[: n - 1]):
        val, err = np.ones(x.shape[0]), np.zeros(x.shape[0])
        N_used = 0
    elif n == 2:
        val, err = _h2_exact(alpha.exponents()[0], x), np.zeros(x.shape[0])
        N_used = 0
    else:
        A = haar_orthogonal_batch(n, N, spawn_rng(seed, 0))
        S = _h_samples(alpha, x, A)
        val = S.mean(axis=0)
        err = S.std(axis=0, ddof=1) / math.sqrt(N)
        N_used = N
    if single:
        return MCEstimate(float(val[0]), float(err[0]), N_used)
    return MCEstimate(val, err, N_used)


def _diag_sqrt(x: np.ndarray) -> np.ndarray:
    m, n = x.shape
    D = np.zeros((m, n, n), complex)
    idx = np.arange(n)
    D[:, idx, idx] = np.sqrt(x)
    return D


def _reduced_ratio(afun, lam: float, alpha: Signature, order: int, N: int, seed: int):
    """Ratio of the reduced-form integrals for a symbol given as ``a(x)`` on ``(0,1)^n``.

    ``n = 1``: Gauss-Jacobi with weight ``x^{alpha_1} (1-x)^{lam-2}``.
    ``n = 2``: the ordered half ``x_2 > x_1`` in coordinates ``u_1 = 1 - x_1``,
    ``u_2 = 1 - x_2 = t u_1``; the weight becomes
    ``u_1^{2 lam - 4} t^{lam-3} (1 - t)``, absorbed into Gauss-Jacobi rules.
    ``n >= 3``: full box with per-axis weight ``x^{alpha_n} (1-x)^{lam-n-1}``;
    the ratio is unchanged because every factor is permutation symmetric.
    """
    n = alpha.n
    check_weight(n, lam)
    an = alpha.alpha[-1]
    if n == 1:
        x, w = jacobi_rule(order, an, lam - 2)
        pts = x[:, None]
        g = np.ones_like(x)
    elif n == 2:
        u1, wu = jacobi_rule(order, 2 * lam - 4, 0.0)
        t, wt = jacobi_rule(order, lam - 3, 1.0)
        U1, T = np.meshgrid(u1, t, indexing="ij")
        w = np.outer(wu, wt).ravel()
        pts = np.stack([1 - U1.ravel(), 1 - (T * U1).ravel()], axis=-1)
        g = np.prod(pts, axis=-1) ** an * _h2_exact(alpha.exponents()[0], pts)
    else:
        if float(order) ** n > DEFAULT_NODE_BUDGET:
            raise ResourceError(f"{order}**{n} quadrature nodes exceed the budget")
        x, wx = jacobi_rule(order, an, lam - n - 1)
        grids = np.meshgrid(*([x] * n), indexing="ij")
        pts = np.stack([gr.ravel() for gr in grids], axis=-1)
        w = np.prod(np.stack(np.meshgrid(*([wx] * n), indexing="ij"), axis=-1).reshape(-1, n), axis=-1)
        vd = np.ones(len(w))
        for j in range(n):
            for k in range(j + 1, n):
                vd = vd * np.abs(pts[:, j] - pts[:, k])
        w = w * vd
        g = None
    a = np.asarray(afun(pts))
    if g is not None:
        wg = w * g
        num = np.sum(wg * a)
        den = np.sum(wg)
        if not den > 0:
            raise DomainError("denominator integral is not positive")
        return num / den, 0.0
    # h_alpha by shared Haar draws; per-draw numerator u and denominator v.
    A = haar_orthogonal_batch(n, N, spawn_rng(seed, 1))
    u = np.empty(N, dtype=np.result_type(a.dtype, float))
    v = np.empty(N)
    step = max(1, 2_000_000 // max(1, len(w)))
    for s in range(0, N, step):
        h = _h_samples(alpha, pts, A[s:s + step])
        v[s:s + step] = h @ w
        u[s:s + step] = h @ (w * a)
    c = u.sum() / v.sum()
    se = math.sqrt(np.sum(np.abs(u - c * v) ** 2) / (N * (N - 1))) / (v.mean())
    return c, se


def _result(val):
    v = complex(val)
    return v.real if v.imag == 0 else v


def c_coeff(a: SymbolSpec, lam: float, alpha, quad_order: int = 40, mc_samples: int = 4000, seed: int = 0):
    """Eigenvalue of ``T_a`` on the signature-``alpha`` block, reduced form.

    Ratio of ``int a(D(sqrt x)) H h_alpha dx`` to ``int H h_alpha dx`` over the
    ordered region of ``(0, 1)^n``.

    Parameters
    ----------
    a : SymbolSpec
        Bounded-domain symbol whose values on diagonal points determine it
        (``U(n)``-invariant).
    lam : float
        Weight, ``lam > n``.
    alpha : Signature or sequence of int
    quad_order : int
        Gauss-Jacobi nodes per axis.
    mc_samples, seed : int
        Haar draws for ``h_alpha`` when ``n >= 3``.

    Returns
    -------
    (value, std_error)
        ``std_error`` is 0 for ``n <= 2`` (pure quadrature).
    """
    alpha = Signature.parse(alpha)
    if a.tag is not DomainTag.BOUNDED:
        raise DomainError("c_coeff needs a symbol on the bounded domain")
    val, se = _reduced_ratio(lambda x: eval_symbol_batch(a, _diag_sqrt(x)), lam, alpha, quad_order, mc_samples, seed)
    return _result(val), float(se)


def c_elliptic(f, lam: float, alpha, quad_order: int = 40, mc_samples: int = 4000, seed: int = 0):
    """Eigenvalue for an elliptic moment-map symbol with profile ``f``.

    Uses ``a(D(sqrt x)) = f(sum_j 1/(1 - x_j))`` directly.
    """
    alpha = Signature.parse(alpha)
    val, se = _reduced_ratio(lambda x: np.asarray(f(np.sum(1.0 / (1.0 - x), axis=-1))), lam, alpha,
                             quad_order, mc_samples, seed)
    return _result(val), float(se)


# ---------------------------------------------------------------------------
# full-cone form


def sqrtm_psd(X: np.ndarray) -> np.ndarray:
    """Principal square root of symmetric positive (semi)definite matrices via eigh."""
    ev, V = np.linalg.eigh(X)
    return (V * np.sqrt(np.clip(ev, 0.0, None))[..., None, :]) @ V.swapaxes(-1, -2)


@dataclass(frozen=True)
class MatrixIntervalSampler:
    """Uniform law on ``{0 < X < I}`` by rejection from the packed-coordinate cube.

    Diagonal entries are drawn from ``(0, 1)`` and off-diagonal entries from
    ``(-1, 1)``; the cube contains the region. Returns dense ``(m, n, n)``.
    """

    n: int
    min_acceptance: float = 1e-4
    scale = 1.0

    def _inside(self, X):
        n = self.n
        if n == 1:
            return (X[:, 0, 0] > 0) & (X[:, 0, 0] < 1)
        if n == 2:
            a, b, c = X[:, 0, 0], X[:, 0, 1], X[:, 1, 1]
            return (a * c - b * b > 0) & ((1 - a) * (1 - c) - b * b > 0)
        ev = np.linalg.eigvalsh(X)
        return (ev[:, 0] > 0) & (ev[:, -1] < 1)

    def draw(self, rng, m):
        n = self.n
        out = np.empty((m, n, n))
        got = tried = 0
        r, c = np.triu_indices(n)
        diag = r == c
        while got < m:
            rate = got / tried if got else 0.1
            k = int(np.clip(1.5 * (m - got) / max(rate, self.min_acceptance), 1024, 1 << 20))
            p = rng.random((k, r.size))
            p[:, ~diag] = 2 * p[:, ~diag] - 1
            X = np.zeros((k, n, n))
            X[:, r, c] = p
            X[:, c, r] = p
            ok = self._inside(X)
            tried += k
            sel = X[ok][: m - got]
            out[got:got + len(sel)] = sel
            got += len(sel)
            if tried > 10_000 and got / tried < self.min_acceptance:
                raise SamplerError(f"acceptance rate {got / tried:.2e} below {self.min_acceptance:g}")
        return out


def _full_uv(a: SymbolSpec, lam: float, alphas: list[Signature], X: np.ndarray):
    n = X.shape[-1]
    base = np.linalg.det(np.eye(n) - X) ** (lam - n - 1)
    av = eval_symbol_batch(a, sqrtm_psd(X).astype(complex))
    v = np.stack([conical_poly_batch(al, X) * base for al in alphas], axis=-1)
    u = av[:, None] * v
    return u, v


def c_coeff_full_many(a: SymbolSpec, lam: float, alphas, N: int = 100_000, seed: int = 0,
                      workers: int = 1, batches: int = 32) -> list[MCEstimate]:
    """Full-cone eigenvalue estimates for several signatures from one sample set.

    Ratio of ``int_{0<X<I} a(sqrt X) Delta_alpha(X) det(I-X)^{lam-n-1} dX`` to
    the same integral with ``a = 1``, with ``X`` uniform on ``{0 < X < I}``.
    ``N`` counts accepted samples. The standard error uses the residuals
    ``u - c v`` in a second pass over the same seed streams, so ``a = 1`` gives
    exactly 1 with zero error.
    """
    alphas = [Signature.parse(al) for al in alphas]
    n = alphas[0].n
    if any(al.n != n for al in alphas):
        raise InvalidInputError("signatures must share one length")
    check_weight(n, lam)
    if a.tag is not DomainTag.BOUNDED:
        raise DomainError("c_coeff_full needs a symbol on the bounded domain")
    if N < 100:
        raise InvalidInputError("N must be >= 100")
    sampler = MatrixIntervalSampler(n)
    sizes = [N // batches + (1 if b < N % batches else 0) for b in range(min(batches, N))]
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(job, c=None):
        sq, size = job
        rng = np.random.default_rng(sq)
        su = sv = 0.0
        sr = 0.0
        done = 0
        while done < size:
            m = min(1 << 15, size - done)
            u, v = _full_uv(a, lam, alphas, sampler.draw(rng, m))
            if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
                raise SamplerError("non-finite integrand in the full-cone estimate")
            if c is None:
                su = su + u.sum(axis=0)
                sv = sv + v.sum(axis=0)
            else:
                sr = sr + (np.abs(u - c * v) ** 2).sum(axis=0)
            done += m
        return (su, sv) if c is None else sr

    def fan(fn):
        jobs = list(zip(seqs, sizes))
        if workers == 1:
            return [fn(j) for j in jobs]
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs))

    parts = fan(run)
    su = sum(p[0] for p in parts)
    sv = sum(p[1] for p in parts)
    c = su / sv
    sr = sum(fan(lambda j: run(j, c)))
    se = np.sqrt(sr / (N * (N - 1))) / (sv / N)
    out = []
    for k in range(len(alphas)):
        out.append(MCEstimate(_result(c[k]), float(se[k]), N))
    return out


def c_coeff_full(a: SymbolSpec, lam: float, alpha, N: int = 100_000, seed: int = 0, workers: int = 1) -> MCEstimate:
    """Full-cone Monte Carlo eigenvalue estimate for one signature."""
    return c_coeff_full_many(a, lam, [alpha], N, seed, workers)[0]


# ---------------------------------------------------------------------------
# cone quadrature


def _cone_rule(n: int, betas, order: int, budget: int = DEFAULT_NODE_BUDGET):
    """Nodes ``W = L L^T`` and weights for ``int_cone g(W) e^{-tr W} prod_j u_j^{beta_j} du dL_off``.

    Diagonal: generalized Gauss-Laguerre in ``u_j = L_jj^2`` with exponent
    ``beta_j``; off-diagonal entries: Gauss-Hermite (weight ``e^{-x^2}``).
    """
    n_off = n * (n - 1) // 2
    if float(order) ** (n + n_off) > budget:
        raise ResourceError(f"{order}**{n + n_off} cone nodes exceed the budget of {budget}")
    axes = []
    for j in range(n):
        if not betas[j] > -1:
            raise DomainError(f"Laguerre exponent {betas[j]} must exceed -1")
        x, w = roots_genlaguerre(order, betas[j])
        axes.append((np.sqrt(x), w))
    hx, hw = roots_hermite(order)
    axes += [(hx, hw)] * n_off
    grids = np.meshgrid(*[ax[0] for ax in axes], indexing="ij")
    wgrids = np.meshgrid(*[ax[1] for ax in axes], indexing="ij")
    vals = np.stack([g.ravel() for g in grids], axis=-1)
    wts = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    K = len(wts)
    L = np.zeros((K, n, n))
    idx = np.arange(n)
    L[:, idx, idx] = vals[:, :n]
    r, c = np.tril_indices(n, -1)
    L[:, r, c] = vals[:, n:]
    W = L @ L.swapaxes(-1, -2)
    return W, wts


def _sym_power(Y: np.ndarray, p: float) -> np.ndarray:
    ev, V = np.linalg.eigh(Y)
    return (V * ev[..., None, :] ** p) @ V.swapaxes(-1, -2)


def _csym_cholesky(M: np.ndarray) -> np.ndarray:
    """Lower ``R`` with ``M = R R^T`` (no conjugation) for complex symmetric batches.

    Pivots are Schur complements; they are nonzero when ``Re M`` is positive definite.
    """
    n = M.shape[-1]
    R = np.zeros_like(M, dtype=complex)
    for j in range(n):
        piv = M[..., j, j] - np.sum(R[..., j, :j] ** 2, axis=-1)
        R[..., j, j] = np.sqrt(piv)
        for i in range(j + 1, n):
            R[..., i, j] = (M[..., i, j] - np.sum(R[..., i, :j] * R[..., j, :j], axis=-1)) / R[..., j, j]
    return R


def _fla_once(f, lam, Zs, order, det_power, exp_rate=None):
    m, n, _ = Zs.shape
    p = lam / 2 - (n + 1) / 4 + det_power
    betas = [p + (n - j) / 2 for j in range(1, n + 1)]
    W, wts = _cone_rule(n, betas, order)
    if exp_rate is None:
        # Real whitening by Im Z; the oscillation e^{i tr(xi Re Z)} stays in the integrand.
        Rinv = _sym_power(Zs.imag, -0.5)
        logdetM = np.log(np.linalg.det(Zs.imag))
    else:
        # Rotation onto M = b I - i Z: tr(xi M) = tr W, valid for holomorphic f.
        M = exp_rate * np.eye(n) - 1j * Zs
        Rinv = np.linalg.inv(_csym_cholesky(M))
        logdetM = logdet_branch(M)
    xi = np.einsum("mba,kbc,mcd->mkad", Rinv, W, Rinv, optimize=True)
    fv = np.asarray(f(xi.reshape(-1, n, n))).reshape(m, -1)
    if det_power:
        logdetW = np.log(np.linalg.det(W))
        fv = fv * np.exp(-det_power * (logdetW[None, :] - logdetM[:, None]))
    if exp_rate is None:
        fv = fv * np.exp(1j * np.einsum("mkab,mba->mk", xi, Zs.real, optimize=True))
    else:
        fv = fv * np.exp(exp_rate * np.trace(xi, axis1=-2, axis2=-1))
    pref = (math.exp(-0.5 * log_multigamma(n, lam)) * 2.0 ** (n * (n - 1) / 4)
            * np.exp(-(p + (n + 1) / 2) * logdetM))
    return pref * (fv @ wts)


def fourier_laplace_adjoint_batch(f, lam: float, Zs, quad_order: int = 40, det_power: float = 0.0,
                                  tol: float = 1e-8, check: bool = True,
                                  exp_rate: float | None = None) -> np.ndarray:
    """Vectorized ``R* f`` at Siegel points ``Zs`` (dense ``(m, n, n)``).

    See :func:`fourier_laplace_adjoint`.
    """
    Zs = np.asarray(Zs, complex)
    if Zs.ndim == 2:
        Zs = Zs[None]
    n = Zs.shape[-1]
    check_weight(n, lam)
    out = _fla_once(f, lam, Zs, quad_order, det_power, exp_rate)
    if check:
        alt = _fla_once(f, lam, Zs, quad_order + max(4, quad_order // 2), det_power, exp_rate)
        diff = np.max(np.abs(alt - out) / np.maximum(1.0, np.abs(alt)))
        if diff > tol:
            warnings.warn(f"Fourier-Laplace quadrature not converged: relative change {diff:.2e} between orders",
                          AccuracyWarning, stacklevel=2)
        out = alt
    return out


def fourier_laplace_adjoint(f, lam: float, Z, quad_order: int = 40, det_power: float = 0.0, tol: float = 1e-8,
                            exp_rate: float | None = None) -> complex:
    """Adjoint Fourier-Laplace transform evaluated at a Siegel point.

    ``Gamma_cone(lam)^{-1/2} int_cone f(xi) det(xi)^{lam/2-(n+1)/4} e^{i tr(xi Z)} d xi``.

    Parameters
    ----------
    f : callable
        Vectorized function of ``(m, n, n)`` positive definite matrices with
        enough decay for the integral to converge.
    lam : float
        Weight, ``lam > n``.
    Z : array_like or DomainPoint
        Siegel point. The cone is whitened by ``(Im Z)^{-1/2}`` so the
        Laguerre weight matches the exponential decay exactly.
    quad_order : int
        Nodes per axis; the estimate is recomputed at a higher order and an
        :class:`AccuracyWarning` is issued when the two differ by more than ``tol``.
    det_power : float
        Declared behaviour ``f ~ det(xi)^{det_power}`` near the cone boundary;
        moved into the Laguerre weight for fast convergence.
    exp_rate : float, optional
        Declares ``f(xi) = g(xi) e^{-b tr xi}`` with ``g`` holomorphic of
        polynomial growth (``f`` must accept complex matrices). The cone
        integral is then rotated onto ``xi = R^{-T} W R^{-1}``,
        ``R R^T = b I - iZ``, which removes the oscillation; without it the
        real whitening loses accuracy once ``|Re Z|`` is large against
        ``Im Z``.
    """
    if isinstance(Z, DomainPoint):
        if Z.tag is not DomainTag.SIEGEL:
            raise DomainError("R* is evaluated on the Siegel domain")
        Zd = Z.dense()
    else:
        Zd = DomainPoint.of(DomainTag.SIEGEL, Z).dense()
    return complex(fourier_laplace_adjoint_batch(f, lam, Zd, quad_order, det_power, tol, exp_rate=exp_rate)[0])


def _gamma_once(f, lam, X, order):
    n = X.shape[-1]
    betas = [lam - n - 1 + (n - j) / 2 for j in range(1, n + 1)]
    W, wts = _cone_rule(n, betas, order)
    Xh = _sym_power(X, -0.5)
    Y = 0.5 * Xh @ W @ Xh
    fv = np.asarray(f(Y))
    s = lam - (n + 1) / 2
    return 2.0 ** (n * (n - 1) / 4) * math.exp(-log_multigamma(n, s)) * (fv @ wts)


def gamma_parabolic(f, lam: float, X, quad_order: int = 40, tol: float = 1e-8) -> complex:
    """Spectral multiplier of a parabolic Toeplitz operator.

    ``2^{n(n+1)/2} det(X)^{lam-(n+1)/2} / Gamma_cone(lam-(n+1)/2)
    * int_cone f(Y) e^{-2 tr(XY)} det(2Y)^{lam-n-1} dY``.

    Evaluated with ``Y = X^{-1/2} W X^{-1/2} / 2`` so that the integral becomes a
    probability average over ``W``; ``f = 1`` returns 1 up to rounding.

    Parameters
    ----------
    f : callable
        Vectorized bounded function of ``(m, n, n)`` positive definite matrices.
    lam : float
        Weight, ``lam > n``.
    X : array_like or PosDefMatrix
    quad_order : int
        Nodes per axis. A second, higher order is used as a convergence check.
    """
    X = as_array(X, float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    n = X.shape[-1]
    check_weight(n, lam)
    if not posdef_check(X):
        raise DomainError("gamma_parabolic needs a positive definite X")
    v1 = _gamma_once(f, lam, X, quad_order)
    v2 = _gamma_once(f, lam, X, quad_order + max(4, quad_order // 2))
    if abs(v2 - v1) > tol * max(1.0, abs(v2)):
        warnings.warn(f"cone quadrature not converged: change {abs(v2 - v1):.2e} between orders",
                      AccuracyWarning, stacklevel=2)
    return _result(v2)


# ---------------------------------------------------------------------------
# tables


@dataclass
class SpectralTable:
    """Eigenvalue family ``alpha -> (value, std_error)`` for one weight."""

    lam: float
    n: int
    entries: list = field(default_factory=list)  # (Signature, complex, float)
    meta: dict = field(default_factory=dict)

    def add(self, alpha: Signature, value, std_error: float) -> None:
        self.entries.append((Signature.parse(alpha), complex(value), float(std_error)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in self.meta.items():
            buf.write(f"# {k}: {json.dumps(v, sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "value_re", "value_im", "std_error"])
        for al, val, se in self.entries:
            w.writerow([al.key(), repr(float(val.real) + 0.0), repr(float(val.imag) + 0.0), repr(se + 0.0)])
        return buf.getvalue()

    def to_json(self) -> str:
        obj = {
            "meta": self.meta,
            "lambda": self.lam,
            "n": self.n,
            "entries": [
                {"alpha": list(al.alpha), "value_re": val.real + 0.0, "value_im": val.imag + 0.0, "std_error": se + 0.0}
                for al, val, se in self.entries
            ],
        }
        return json.dumps(obj, indent=2, sort_keys=True) + "\n"
