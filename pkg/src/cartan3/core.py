"""Numeric substrate.

Packed symmetric matrix containers, Haar sampling on O(n), tensor
Gauss quadrature and seeded Monte Carlo integration with error estimates.

Everything here is pure: containers are immutable after construction and the
Monte Carlo driver derives every random stream from one master seed, so a
result depends only on ``(seed, N)`` and never on scheduling.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

__all__ = [
    "InvalidInputError",
    "DomainError",
    "ResourceError",
    "NumericalError",
    "SamplerError",
    "BranchError",
    "AccuracyWarning",
    "ComplexSymMatrix",
    "RealSymMatrix",
    "PosDefMatrix",
    "OrthogonalMatrix",
    "MCEstimate",
    "Sampler",
    "UniformBox",
    "pack",
    "unpack",
    "packed_size",
    "as_array",
    "posdef_check",
    "min_eigenvalue",
    "principal_minor_det",
    "haar_orthogonal",
    "haar_orthogonal_batch",
    "integrate_box",
    "integrate_mc",
    "jackknife",
    "spawn_rng",
    "default_workers",
    "jacobi_rule",
    "legendre_rule",
    "SYM_TOL",
    "ORTH_TOL",
]

SYM_TOL = 1e-12
ORTH_TOL = 1e-12
DEFAULT_NODE_BUDGET = 20_000_000
DEFAULT_BATCHES = 32
# Bound on the number of points a sampler materializes at once.
_CHUNK = 1 << 16


class InvalidInputError(ValueError):
    """Malformed input: wrong shape, asymmetric matrix, bad signature."""


class DomainError(ValueError):
    """A point or parameter lies outside the region where a formula holds."""


class ResourceError(RuntimeError):
    """A requested computation exceeds its configured budget."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (non-finite values, failed solves)."""


class SamplerError(NumericalError):
    """A rejection sampler could not produce samples at a usable rate."""


class BranchError(NumericalError):
    """A complex power could not be continued along the checked path."""


class AccuracyWarning(UserWarning):
    """A quadrature estimate failed its self-consistency check."""


# ---------------------------------------------------------------------------
# packed symmetric storage


def packed_size(n: int) -> int:
    return n * (n + 1) // 2


def _triu(n: int):
    return np.triu_indices(n)


def pack(M) -> np.ndarray:
    """Upper triangle of ``M`` (row-major), shape ``(..., n(n+1)/2)``."""
    M = np.asarray(M)
    n = M.shape[-1]
    r, c = _triu(n)
    return M[..., r, c]


def unpack(p, n: int | None = None) -> np.ndarray:
    """Dense symmetric matrix from packed upper-triangle entries."""
    p = np.asarray(p)
    m = p.shape[-1]
    if n is None:
        n = int(round((np.sqrt(8 * m + 1) - 1) / 2))
    if packed_size(n) != m:
        raise InvalidInputError(f"{m} packed entries do not form a symmetric {n}x{n} matrix")
    r, c = _triu(n)
    out = np.zeros(p.shape[:-1] + (n, n), dtype=p.dtype)
    out[..., r, c] = p
    out[..., c, r] = p
    return out


def _check_square(M: np.ndarray) -> None:
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise InvalidInputError(f"expected a square matrix, got shape {M.shape}")


def _from_dense(M, hermitian: bool) -> np.ndarray:
    M = np.asarray(M)
    _check_square(M)
    other = M.conj().swapaxes(-1, -2) if hermitian else M.swapaxes(-1, -2)
    if M.size and np.max(np.abs(M - other)) > SYM_TOL * max(1.0, np.max(np.abs(M))):
        kind = "Hermitian" if hermitian else "symmetric"
        raise InvalidInputError(f"matrix is not {kind} within {SYM_TOL:g}")
    return pack(M)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ComplexSymMatrix:
    """Complex symmetric ``n x n`` matrix stored as its packed upper triangle."""

    n: int
    packed: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.packed, dtype=complex)
        if p.shape != (packed_size(self.n),):
            raise InvalidInputError(f"need {packed_size(self.n)} packed entries for n={self.n}")
        object.__setattr__(self, "packed", _frozen(p))

    @classmethod
    def from_dense(cls, M) -> "ComplexSymMatrix":
        M = np.asarray(M, dtype=complex)
        return cls(M.shape[-1], _from_dense(M, hermitian=False))

    def dense(self) -> np.ndarray:
        return unpack(self.packed, self.n)

    def __array__(self, dtype=None, copy=None):
        d = self.dense()
        return d if dtype is None else d.astype(dtype)


@dataclass(frozen=True, eq=False)
class RealSymMatrix:
    """Real symmetric ``n x n`` matrix stored as its packed upper triangle."""

    n: int
    packed: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.packed)
        if np.iscomplexobj(p):
            if np.any(p.imag != 0):
                raise InvalidInputError("RealSymMatrix entries must be real")
            p = p.real
        p = p.astype(float)
        if p.shape != (packed_size(self.n),):
            raise InvalidInputError(f"need {packed_size(self.n)} packed entries for n={self.n}")
        object.__setattr__(self, "packed", _frozen(p))

    @classmethod
    def from_dense(cls, M) -> "RealSymMatrix":
        M = np.asarray(M)
        if np.iscomplexobj(M):
            if np.any(M.imag != 0):
                raise InvalidInputError("RealSymMatrix entries must be real")
            M = M.real
        M = M.astype(float)
        return cls(M.shape[-1], _from_dense(M, hermitian=False))

    def dense(self) -> np.ndarray:
        return unpack(self.packed, self.n)

    def __array__(self, dtype=None, copy=None):
        d = self.dense()
        return d if dtype is None else d.astype(dtype)


@dataclass(frozen=True, eq=False)
class PosDefMatrix:
    """Element of the cone of positive definite real symmetric matrices."""

    base: RealSymMatrix

    def __post_init__(self):
        if not posdef_check(self.base.dense()):
            lo = min_eigenvalue(self.base.dense())
            raise DomainError(f"matrix is not positive definite (smallest eigenvalue {lo:.3g})")

    @classmethod
    def from_dense(cls, M) -> "PosDefMatrix":
        return cls(RealSymMatrix.from_dense(M))

    @property
    def n(self) -> int:
        return self.base.n

    def dense(self) -> np.ndarray:
        return self.base.dense()

    def __array__(self, dtype=None, copy=None):
        d = self.dense()
        return d if dtype is None else d.astype(dtype)


@dataclass(frozen=True, eq=False)
class OrthogonalMatrix:
    """Real orthogonal matrix, ``max|A^T A - I| <= 1e-12``."""

    entries: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.entries, dtype=float)
        _check_square(A)
        if A.ndim != 2:
            raise InvalidInputError("OrthogonalMatrix holds a single matrix")
        err = np.max(np.abs(A.T @ A - np.eye(A.shape[0])))
        if err > ORTH_TOL:
            raise InvalidInputError(f"matrix is not orthogonal (max deviation {err:.3g})")
        object.__setattr__(self, "entries", _frozen(A))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def dense(self) -> np.ndarray:
        return np.array(self.entries)

    def __array__(self, dtype=None, copy=None):
        d = self.dense()
        return d if dtype is None else d.astype(dtype)


def as_array(M, dtype=None) -> np.ndarray:
    """Dense ndarray view of a container or array-like."""
    if isinstance(M, (ComplexSymMatrix, RealSymMatrix, PosDefMatrix, OrthogonalMatrix)):
        M = M.dense()
    return np.asarray(M, dtype=dtype)


# ---------------------------------------------------------------------------
# small matrix predicates


def _hermitian_eigvals(M) -> np.ndarray:
    M = as_array(M)
    _check_square(M)
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if np.max(np.abs(M - M.conj().swapaxes(-1, -2)), initial=0.0) > SYM_TOL * scale:
        raise InvalidInputError(f"matrix is not symmetric/Hermitian within {SYM_TOL:g}")
    return np.linalg.eigvalsh(M)


def min_eigenvalue(M) -> float:
    """Smallest eigenvalue of a symmetric or Hermitian matrix."""
    return float(np.min(_hermitian_eigvals(M)))


def posdef_check(M) -> bool:
    """Strict positive definiteness by a symmetric eigensolve.

    Parameters
    ----------
    M : array_like or RealSymMatrix
        Square real symmetric or complex Hermitian matrix.

    Returns
    -------
    bool
        True iff every eigenvalue is ``> 0``. No slack is applied, so points
        on the boundary of the cone are rejected.

    Raises
    ------
    InvalidInputError
        If ``M`` is not square or deviates from symmetry by more than 1e-12.
    """
    return bool(np.all(_hermitian_eigvals(M) > 0))


def principal_minor_det(j: int, Z) -> complex:
    """Determinant of the leading ``j x j`` block of ``Z`` (``1 <= j <= n``)."""
    Z = as_array(Z)
    _check_square(Z)
    n = Z.shape[-1]
    if not 1 <= j <= n:
        raise InvalidInputError(f"minor index {j} outside 1..{n}")
    d = np.linalg.det(Z[..., :j, :j])
    return complex(d) if np.ndim(d) == 0 else d


# ---------------------------------------------------------------------------
# Haar measure on O(n)


def haar_orthogonal_batch(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` independent Haar-distributed elements of O(n), shape ``(m, n, n)``.

    Gaussian QR with the sign of each diagonal entry of R moved into Q. The
    sign fix is what makes the law exactly Haar.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    G = rng.standard_normal((m, n, n))
    Q, R = np.linalg.qr(G)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    bad = d == 0
    if np.any(bad):
        # Rank-deficient draws have probability zero; redraw them.
        idx = np.nonzero(np.any(bad, axis=-1))[0]
        Q[idx] = haar_orthogonal_batch(n, idx.size, rng)
        d = np.where(bad, 1.0, d)
    return Q * np.sign(d)[..., None, :]


def haar_orthogonal(n: int, rng: np.random.Generator) -> OrthogonalMatrix:
    """One Haar-distributed element of O(n)."""
    return OrthogonalMatrix(haar_orthogonal_batch(n, 1, rng)[0])


# ---------------------------------------------------------------------------
# quadrature


def legendre_rule(order: int, a: float = 0.0, b: float = 1.0):
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = roots_legendre(order)
    h = 0.5 * (b - a)
    return a + h * (x + 1.0), h * w


def jacobi_rule(order: int, p: float, q: float):
    """Nodes/weights on ``(0, 1)`` for the weight ``x**p * (1 - x)**q``."""
    x, w = roots_jacobi(order, q, p)
    return 0.5 * (x + 1.0), w / 2.0 ** (p + q + 1.0)


def integrate_box(
    f: Callable[[np.ndarray], np.ndarray],
    dim: int,
    lower,
    upper,
    order: int,
    budget: int = DEFAULT_NODE_BUDGET,
):
    """Tensor Gauss-Legendre quadrature over a box.

    Parameters
    ----------
    f : callable
        Vectorized integrand taking an ``(m, dim)`` array of points.
    dim : int
        Number of axes.
    lower, upper : float or sequence of float
        Box corners.
    order : int
        Nodes per axis (``>= 2``); exact for per-axis degree ``<= 2*order-1``.
    budget : int
        Maximum number of tensor nodes.

    Returns
    -------
    complex or float
    """
    if order < 2:
        raise InvalidInputError("quadrature order must be >= 2")
    if dim < 1:
        raise InvalidInputError("dim must be >= 1")
    if float(order) ** dim > budget:
        raise ResourceError(f"{order}**{dim} nodes exceed the budget of {budget}")
    lo = np.broadcast_to(np.asarray(lower, float), (dim,))
    hi = np.broadcast_to(np.asarray(upper, float), (dim,))
    rules = [legendre_rule(order, lo[k], hi[k]) for k in range(dim)]
    total = 0.0
    count = order**dim
    for start in range(0, count, _CHUNK):
        idx = np.arange(start, min(count, start + _CHUNK))
        digits = np.stack(np.unravel_index(idx, (order,) * dim), axis=-1)
        pts = np.stack([rules[k][0][digits[:, k]] for k in range(dim)], axis=-1)
        wts = np.prod(np.stack([rules[k][1][digits[:, k]] for k in range(dim)], axis=-1), axis=-1)
        vals = np.asarray(f(pts))
        total = total + np.tensordot(wts, vals, axes=(0, 0))
    if np.ndim(total) == 0:
        return complex(total) if np.iscomplexobj(total) else float(total)
    return total


# ---------------------------------------------------------------------------
# Monte Carlo


class Sampler(Protocol):
    """Draws i.i.d. points from a law whose total mass is ``scale``.

    ``integrate_mc`` estimates ``scale * E[f(X)]``.
    """

    scale: float

    def draw(self, rng: np.random.Generator, m: int) -> np.ndarray: ...


@dataclass(frozen=True)
class UniformBox:
    """Uniform law on an axis-aligned box; ``scale`` is the box volume."""

    lower: tuple
    upper: tuple

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def scale(self) -> float:
        return float(np.prod(np.subtract(self.upper, self.lower)))

    def draw(self, rng, m):
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        return lo + (hi - lo) * rng.random((m, lo.size))


@dataclass(frozen=True, eq=False)
class MCEstimate:
    """Monte Carlo estimate with its standard error.

    ``value`` and ``std_error`` may be arrays for vector-valued integrands.
    ``std_error`` is the sample standard deviation of the scaled integrand
    divided by ``sqrt(samples)``. ``batch_means`` holds the per-batch means
    (one row per fixed seed stream) for resampling-based error propagation.
    """

    value: complex | np.ndarray
    std_error: float | np.ndarray
    samples: int
    batch_means: np.ndarray | None = field(default=None, repr=False)
    batch_counts: np.ndarray | None = field(default=None, repr=False)


def default_workers() -> int:
    """Worker count from ``CARTAN3_WORKERS`` (default 1)."""
    raw = os.environ.get("CARTAN3_WORKERS", "").strip()
    if not raw:
        return 1
    try:
        w = int(raw)
    except ValueError as exc:
        raise InvalidInputError(f"CARTAN3_WORKERS={raw!r} is not an integer") from exc
    if w < 1:
        raise InvalidInputError("CARTAN3_WORKERS must be >= 1")
    return w


def _batch_sizes(N: int, batches: int) -> list[int]:
    b = min(batches, N)
    q, r = divmod(N, b)
    return [q + (1 if k < r else 0) for k in range(b)]


def _run_batch(f, sampler, seq: np.random.SeedSequence, size: int, offset: int, shift, chunk: int = _CHUNK):
    """Shifted running sums for one seed stream.

    Returns ``(count, mean_of_shifted, M2)`` where M2 is split into real and
    imaginary parts so complex variance is ``var(Re) + var(Im)``.
    """
    rng = np.random.default_rng(seq)
    s1 = 0.0
    s2 = 0.0
    done = 0
    while done < size:
        m = min(chunk, size - done)
        pts = sampler.draw(rng, m)
        vals = np.asarray(f(pts))
        if vals.shape[0] != m:
            raise InvalidInputError("integrand must return one value per sample along axis 0")
        finite = np.isfinite(vals)
        if not np.all(finite):
            bad = np.nonzero(~finite.reshape(m, -1).all(axis=1))[0][0]
            raise NumericalError(f"non-finite integrand value at sample index {offset + done + bad}")
        d = vals - shift
        s1 = s1 + d.sum(axis=0)
        s2 = s2 + (np.abs(d) ** 2).sum(axis=0)
        done += m
    mean = s1 / size
    m2 = s2 - size * np.abs(mean) ** 2
    return size, mean, np.maximum(m2, 0.0)


def integrate_mc(
    f: Callable[[np.ndarray], np.ndarray],
    sampler: Sampler,
    N: int,
    seed: int,
    workers: int = 1,
    batches: int = DEFAULT_BATCHES,
    chunk: int = _CHUNK,
) -> MCEstimate:
    """Seeded Monte Carlo estimate of ``scale * E[f(X)]``.

    Parameters
    ----------
    f : callable
        Vectorized integrand; maps the sampler's ``(m, ...)`` points to
        ``(m,)`` or ``(m, k)`` values (real or complex).
    sampler : Sampler
        Source of i.i.d. points.
    N : int
        Number of samples, ``>= 100``.
    seed : int
        Master seed. It is split into ``batches`` independent streams with
        ``SeedSequence.spawn``; the stream layout is independent of
        ``workers``, so the result is bitwise identical for any worker count.
    workers : int
        Threads used to evaluate batches.
    batches : int
        Number of seed streams.
    chunk : int
        Points drawn per sampler call; lower it for wide vector integrands.
        Part of the stream layout, so it must be fixed for reproducibility.

    Returns
    -------
    MCEstimate

    Raises
    ------
    NumericalError
        If the integrand produces a non-finite value; the message names the
        global sample index.
    """
    if N < 100:
        raise InvalidInputError("N must be >= 100")
    if workers < 1:
        raise InvalidInputError("workers must be >= 1")
    sizes = _batch_sizes(N, batches)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])

    # Shift by the first sample so that a constant integrand has exactly zero
    # spread and its mean is reproduced exactly.
    probe = np.asarray(f(sampler.draw(np.random.default_rng(seqs[0]), 1)))
    if not np.all(np.isfinite(probe)):
        raise NumericalError("non-finite integrand value at sample index 0")
    shift = probe[0]

    jobs = list(zip(seqs, sizes, offsets))
    if workers == 1:
        parts = [_run_batch(f, sampler, s, k, o, shift, chunk) for s, k, o in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda j: _run_batch(f, sampler, *j, shift, chunk), jobs))

    # Chan's pairwise merge in fixed batch order.
    n_tot, mean, m2 = parts[0]
    for cnt, mu, q in parts[1:]:
        tot = n_tot + cnt
        delta = mu - mean
        mean = mean + delta * (cnt / tot)
        m2 = m2 + q + (np.abs(delta) ** 2) * (n_tot * cnt / tot)
        n_tot = tot

    scale = float(sampler.scale)
    value = scale * (shift + mean)
    sd = np.sqrt(m2 / (N - 1)) if N > 1 else np.zeros_like(m2)
    std_error = scale * sd / np.sqrt(N)
    batch_means = np.stack([scale * (shift + p[1]) for p in parts])
    counts = np.asarray(sizes)
    if np.ndim(value) == 0:
        value = complex(value) if np.iscomplexobj(value) else float(value)
        std_error = float(std_error)
    return MCEstimate(value, std_error, N, batch_means, counts)


def jackknife(fn: Callable[[np.ndarray], np.ndarray], est: MCEstimate):
    """Delete-one-batch jackknife of a smooth function of batch means.

    Parameters
    ----------
    fn : callable
        Maps a pooled mean (same shape as ``est.value``) to a derived array.
    est : MCEstimate
        Must carry ``batch_means`` and ``batch_counts``.

    Returns
    -------
    (value, error)
        ``fn`` at the full mean and the jackknife standard error, elementwise.
    """
    bm, bc = est.batch_means, est.batch_counts
    if bm is None or bc is None or len(bc) < 2:
        raise InvalidInputError("jackknife needs at least two batches")
    w = bc.astype(float)
    total = np.tensordot(w, bm, axes=(0, 0))
    full = fn(total / w.sum())
    loo = np.stack([fn((total - w[b] * bm[b]) / (w.sum() - w[b])) for b in range(len(w))])
    B = len(w)
    err = np.sqrt((B - 1) / B * np.sum(np.abs(loo - loo.mean(axis=0)) ** 2, axis=0))
    return full, err


def spawn_rng(seed: int, *keys: int) -> np.random.Generator:
    """Generator for a named substream of a master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(keys)))

