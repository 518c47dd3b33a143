"""The bounded and the Siegel realizations of the type III domain.

Bounded realization: symmetric ``Z`` with ``I - Z conj(Z) > 0``.
Siegel realization: symmetric ``Z`` with ``Im Z > 0``.

Measure convention
------------------
Densities returned here are with respect to plain Lebesgue measure on the
real coordinates ``(Re z_jk, Im z_jk)``, ``j <= k``. The normalizing constant
of the weighted probability measures is stated for the trace-norm Lebesgue
measure, which is ``2**(n(n-1)/2)`` times the coordinate measure (each
off-diagonal entry appears twice in the trace norm); that factor is folded
into :func:`weight_constant`. For ``n = 1`` the two agree.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import (
    BranchError,
    ComplexSymMatrix,
    DomainError,
    InvalidInputError,
    NumericalError,
    SamplerError,
    as_array,
    min_eigenvalue,
    pack,
    packed_size,
    unpack,
)

__all__ = [
    "DomainTag",
    "DomainPoint",
    "contains",
    "contains_batch",
    "membership_margin",
    "cayley",
    "cayley_inv",
    "cayley_map",
    "cayley_inv_map",
    "multigamma",
    "log_multigamma",
    "weight_constant",
    "weight_density",
    "weight_density_batch",
    "bergman_kernel",
    "kernel_batch",
    "logdet_branch",
    "cayley_jacobian",
    "cayley_jacobian_batch",
    "cayley_pullback",
    "pullback_factor_batch",
    "PolydiscSampler",
    "WeightedBoundedSampler",
    "check_weight",
]


class DomainTag(enum.Enum):
    BOUNDED = "bounded"
    SIEGEL = "siegel"

    @classmethod
    def parse(cls, s) -> "DomainTag":
        if isinstance(s, cls):
            return s
        key = str(s).strip().lower()
        aliases = {"bounded": cls.BOUNDED, "d": cls.BOUNDED, "disk": cls.BOUNDED,
                   "siegel": cls.SIEGEL, "s": cls.SIEGEL, "upper": cls.SIEGEL}
        if key not in aliases:
            raise InvalidInputError(f"unknown domain tag {s!r}; use 'bounded' or 'siegel'")
        return aliases[key]


def _dense(Z) -> np.ndarray:
    if isinstance(Z, DomainPoint):
        return Z.Z.dense()
    return as_array(Z, complex)


def _defining_matrix(tag: DomainTag, Z: np.ndarray) -> np.ndarray:
    """Hermitian matrix whose positivity defines membership."""
    if tag is DomainTag.BOUNDED:
        n = Z.shape[-1]
        return np.eye(n) - Z @ Z.conj()
    return Z.imag


def membership_margin(tag, Z) -> float:
    """Smallest eigenvalue of the defining matrix (``> 0`` iff inside)."""
    tag = DomainTag.parse(tag)
    Z = _dense(Z)
    if np.max(np.abs(Z - Z.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(Z))):
        raise InvalidInputError("Z must be symmetric")
    return min_eigenvalue(_defining_matrix(tag, Z))


def contains(tag, Z) -> bool:
    """Membership predicate of the tagged domain (strict)."""
    return membership_margin(tag, Z) > 0


def contains_batch(tag, Zs: np.ndarray) -> np.ndarray:
    """Vectorized membership over dense ``(m, n, n)`` arrays."""
    tag = DomainTag.parse(tag)
    Zs = np.asarray(Zs, complex)
    M = _defining_matrix(tag, Zs)
    M = 0.5 * (M + M.conj().swapaxes(-1, -2))
    return np.linalg.eigvalsh(M)[..., 0] > 0


@dataclass(frozen=True, eq=False)
class DomainPoint:
    """A symmetric matrix validated as a member of the tagged domain."""

    tag: DomainTag
    Z: ComplexSymMatrix

    def __post_init__(self):
        tag = DomainTag.parse(self.tag)
        object.__setattr__(self, "tag", tag)
        Z = self.Z if isinstance(self.Z, ComplexSymMatrix) else ComplexSymMatrix.from_dense(self.Z)
        object.__setattr__(self, "Z", Z)
        margin = min_eigenvalue(_defining_matrix(tag, Z.dense()))
        if not margin > 0:
            what = "I - Z conj(Z)" if tag is DomainTag.BOUNDED else "Im Z"
            raise DomainError(f"point is not in the {tag.value} domain: smallest eigenvalue of {what} is {margin:.6g}")

    @classmethod
    def of(cls, tag, Z) -> "DomainPoint":
        return cls(DomainTag.parse(tag), ComplexSymMatrix.from_dense(np.asarray(Z, complex)))

    @property
    def n(self) -> int:
        return self.Z.n

    def dense(self) -> np.ndarray:
        return self.Z.dense()


def _as_point(tag: DomainTag, Z) -> DomainPoint:
    if isinstance(Z, DomainPoint):
        if Z.tag is not tag:
            raise DomainError(f"expected a {tag.value} point, got {Z.tag.value}")
        return Z
    return DomainPoint.of(tag, Z)


# ---------------------------------------------------------------------------
# Cayley transform


def cayley_map(Z: np.ndarray) -> np.ndarray:
    """``(I + iZ)(I - iZ)^{-1}`` on dense arrays, no validation."""
    Z = np.asarray(Z, complex)
    n = Z.shape[-1]
    I = np.eye(n)
    # (I+iZ)(I-iZ)^{-1} = -I + 2 (I-iZ)^{-1}; symmetrize away rounding.
    W = -I + 2.0 * np.linalg.inv(I - 1j * Z)
    return 0.5 * (W + W.swapaxes(-1, -2))


def cayley_inv_map(W: np.ndarray) -> np.ndarray:
    """``-i (W - I)(W + I)^{-1}`` on dense arrays, no validation."""
    W = np.asarray(W, complex)
    n = W.shape[-1]
    I = np.eye(n)
    # -i(W-I)(W+I)^{-1} = -i (I - 2 (W+I)^{-1})
    Z = -1j * (I - 2.0 * np.linalg.inv(W + I))
    return 0.5 * (Z + Z.swapaxes(-1, -2))


def cayley(Z) -> DomainPoint:
    """Map a Siegel point to the bounded realization."""
    Z = _as_point(DomainTag.SIEGEL, Z)
    try:
        W = cayley_map(Z.dense())
    except np.linalg.LinAlgError as exc:
        raise NumericalError("I - iZ is numerically singular") from exc
    return DomainPoint.of(DomainTag.BOUNDED, W)


def cayley_inv(W) -> DomainPoint:
    """Inverse Cayley transform, bounded to Siegel."""
    W = _as_point(DomainTag.BOUNDED, W)
    try:
        Z = cayley_inv_map(W.dense())
    except np.linalg.LinAlgError as exc:
        raise NumericalError("W + I is numerically singular") from exc
    return DomainPoint.of(DomainTag.SIEGEL, Z)


# ---------------------------------------------------------------------------
# multi-gamma and weighted measures


def log_multigamma(n: int, lam: float) -> float:
    """``log`` of the cone gamma function."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if not lam > (n - 1) / 2:
        raise DomainError(f"multigamma needs lambda > (n-1)/2 = {(n - 1) / 2}, got {lam}")
    j = np.arange(n)
    return n * (n - 1) / 4 * math.log(2 * math.pi) + float(np.sum(gammaln(lam - j / 2)))


def multigamma(n: int, lam: float) -> float:
    """Cone gamma function ``(2 pi)^{n(n-1)/4} prod_j Gamma(lam - (j-1)/2)``.

    Examples
    --------
    >>> round(multigamma(2, 3.0), 5)
    6.66432
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if not lam > (n - 1) / 2:
        raise DomainError(f"multigamma needs lambda > (n-1)/2 = {(n - 1) / 2}, got {lam}")
    out = (2 * math.pi) ** (n * (n - 1) / 4)
    for j in range(n):
        out *= math.gamma(lam - j / 2)
    return out


def check_weight(n: int, lam: float) -> None:
    if not lam > n:
        raise DomainError(f"Bergman weight must satisfy lambda > n = {n}, got {lam}")


def weight_constant(n: int, lam: float) -> float:
    """Density constant of the weighted probability measure (coordinate measure)."""
    check_weight(n, lam)
    d = packed_size(n)
    logc = (log_multigamma(n, lam) - log_multigamma(n, lam - (n + 1) / 2)
            - d * math.log(math.pi) + n * (n - 1) / 2 * math.log(2.0))
    return math.exp(logc)


def _base_det(tag: DomainTag, Z: np.ndarray) -> np.ndarray:
    if tag is DomainTag.BOUNDED:
        n = Z.shape[-1]
        return np.linalg.det(np.eye(n) - Z @ Z.conj()).real
    return np.linalg.det(2.0 * Z.imag)


def weight_density_batch(tag, lam: float, Zs: np.ndarray, inside: np.ndarray | None = None) -> np.ndarray:
    """Weighted density at dense ``(m, n, n)`` points; zero outside the domain."""
    tag = DomainTag.parse(tag)
    Zs = np.asarray(Zs, complex)
    n = Zs.shape[-1]
    C = weight_constant(n, lam)
    if inside is None:
        inside = contains_batch(tag, Zs)
    det = np.where(inside, _base_det(tag, Zs), 1.0)
    return np.where(inside, C * np.abs(det) ** (lam - n - 1), 0.0)


def weight_density(tag, lam: float, Z) -> float:
    """Weighted probability density at ``Z``.

    Parameters
    ----------
    tag : DomainTag or str
    lam : float
        Weight, ``lam > n``.
    Z : array_like or DomainPoint
        Point of the tagged domain.

    Returns
    -------
    float
        ``C det(I - Z conj Z)^{lam-n-1}`` (bounded) or ``C det(2 Im Z)^{lam-n-1}``
        (Siegel) with respect to coordinate Lebesgue measure.
    """
    tag = DomainTag.parse(tag)
    P = _as_point(tag, Z)
    n = P.n
    return float(weight_constant(n, lam) * _base_det(tag, P.dense()) ** (lam - n - 1))


# ---------------------------------------------------------------------------
# kernels


def logdet_branch(M: np.ndarray) -> np.ndarray:
    """Sum of principal logs of the eigenvalues of ``M``.

    On both domains the kernel matrices ``I - Z conj(W)`` and
    ``-i(Z - conj(W))`` have spectra in the open right half-plane, so this sum
    is a holomorphic logarithm of the determinant that is real on the
    diagonal ``Z = W``.
    """
    ev = np.linalg.eigvals(np.asarray(M, complex))
    if np.any(ev.real <= 0):
        raise BranchError("kernel matrix has an eigenvalue outside the right half-plane")
    return np.sum(np.log(ev), axis=-1)


def _kernel_matrix(tag: DomainTag, Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    if tag is DomainTag.BOUNDED:
        n = Z.shape[-1]
        return np.eye(n) - Z @ W.conj()
    return -1j * (Z - W.conj())


def kernel_batch(tag, lam: float, Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Weighted Bergman kernel on broadcastable dense arrays (no path check)."""
    tag = DomainTag.parse(tag)
    M = _kernel_matrix(tag, np.asarray(Z, complex), np.asarray(W, complex))
    return np.exp(-lam * logdet_branch(M))


def bergman_kernel(tag, lam: float, Z, W, path_points: int = 33) -> complex:
    """Weighted Bergman kernel ``K_lam(Z, W)``.

    ``det(I - Z conj W)^{-lam}`` on the bounded domain and
    ``det(-i(Z - conj W))^{-lam}`` on the Siegel domain, evaluated as
    ``exp(-lam Log det)`` with the principal logarithm.

    The principal ``Log det`` is compared with the continuous logarithm along
    the segment from ``(Z, Z)`` to ``(Z, W)`` (both domains are convex). If
    the determinant path reaches the negative real axis the two disagree and
    :class:`BranchError` is raised instead of choosing a branch silently.
    """
    tag = DomainTag.parse(tag)
    Zp, Wp = _as_point(tag, Z), _as_point(tag, W)
    n = Zp.n
    if Wp.n != n:
        raise InvalidInputError("Z and W have different sizes")
    check_weight(n, lam)
    Zd, Wd = Zp.dense(), Wp.dense()
    t = np.linspace(0.0, 1.0, path_points)[:, None, None]
    path = _kernel_matrix(tag, Zd, Zd + t * (Wd - Zd))
    args = logdet_branch(path).imag
    if np.max(np.abs(args)) >= np.pi:
        raise BranchError(
            f"det path crosses the negative real axis (continuous arg reaches {np.max(np.abs(args)):.4f})"
        )
    d = np.linalg.det(_kernel_matrix(tag, Zd, Wd))
    return complex(np.exp(-lam * np.log(d)))


# ---------------------------------------------------------------------------
# Cayley Jacobian and the intertwining unitary


def _jacobian_numeric(Z: np.ndarray) -> complex:
    """Determinant of ``V -> 2i A V A``, ``A = (I - iZ)^{-1}``, in packed coordinates."""
    n = Z.shape[-1]
    A = np.linalg.inv(np.eye(n) - 1j * Z)
    d = packed_size(n)
    cols = np.eye(d)
    E = unpack(cols, n)  # (d, n, n): E_jk basis with ones at (j,k) and (k,j)
    images = 2j * A @ E @ A
    return complex(np.linalg.det(pack(images).T))


def cayley_jacobian_batch(Zs: np.ndarray) -> np.ndarray:
    """Closed form ``(2i)^{n(n+1)/2} det(I - iZ)^{-(n+1)}`` on dense arrays."""
    Zs = np.asarray(Zs, complex)
    n = Zs.shape[-1]
    return (2j) ** packed_size(n) * np.linalg.det(np.eye(n) - 1j * Zs) ** (-(n + 1))


def cayley_jacobian(Z) -> complex:
    """Complex Jacobian determinant of the Cayley map at a Siegel point.

    Computed as the determinant of the linearization ``V -> 2i A V A`` in the
    ``E_jk`` basis, and cross-checked against the closed form.
    """
    P = _as_point(DomainTag.SIEGEL, Z)
    J = _jacobian_numeric(P.dense())
    ref = complex(cayley_jacobian_batch(P.dense()))
    if abs(J - ref) > 1e-8 * max(1.0, abs(ref)):
        raise NumericalError(f"Jacobian mismatch: linearization {J} vs closed form {ref}")
    return J


def pullback_factor_batch(lam: float, Zs: np.ndarray) -> np.ndarray:
    """``J(Z)^{lam/(n+1)}`` on the holomorphic branch, dense arrays.

    The power is ``(2i)^{n lam / 2} exp(-lam Log det(I - iZ))`` with ``Log det``
    the eigenvalue-sum logarithm. This branch is holomorphic on the whole
    Siegel domain; the principal power of ``J`` is not once ``lam/(n+1)`` is
    fractional.
    """
    Zs = np.asarray(Zs, complex)
    n = Zs.shape[-1]
    pref = np.exp(n * lam / 2 * (math.log(2.0) + 0.5j * math.pi))
    return pref * np.exp(-lam * logdet_branch(np.eye(n) - 1j * Zs))


def cayley_pullback(lam: float, f, Z) -> complex:
    """Intertwining unitary applied to ``f``, evaluated at a Siegel point.

    ``(U f)(Z) = J(Z)^{lam/(n+1)} f(cayley(Z))``.

    Parameters
    ----------
    lam : float
        Weight, ``lam > n``.
    f : callable
        Function of a dense bounded-domain matrix.
    Z : array_like or DomainPoint
        Siegel point.
    """
    P = _as_point(DomainTag.SIEGEL, Z)
    check_weight(P.n, lam)
    J = cayley_jacobian(P)
    fac = complex(pullback_factor_batch(lam, P.dense()))
    # The branch factor must be a (lam/(n+1))-th power of the computed J.
    if abs(abs(fac) - abs(J) ** (lam / (P.n + 1))) > 1e-8 * max(1.0, abs(fac)):
        raise NumericalError("pullback factor disagrees with |J|^(lam/(n+1))")
    val = f(cayley(P).dense())
    return complex(fac * val)


# ---------------------------------------------------------------------------
# samplers on the bounded domain


def _disk(rng: np.random.Generator, shape) -> np.ndarray:
    r = np.sqrt(rng.random(shape))
    t = 2 * np.pi * rng.random(shape)
    return r * np.exp(1j * t)


@dataclass(frozen=True)
class PolydiscSampler:
    """Uniform law on ``{|z_jk| <= 1}`` in packed coordinates; ``scale`` is its volume."""

    n: int

    @property
    def scale(self) -> float:
        return math.pi ** packed_size(self.n)

    def draw(self, rng, m):
        return _disk(rng, (m, packed_size(self.n)))


def _bounded_det_packed(p: np.ndarray, n: int):
    """``det(I - Z conj Z)`` and the membership mask from packed points."""
    if n == 1:
        h = 1.0 - np.abs(p[:, 0]) ** 2
        return h, h > 0
    if n == 2:
        a, b, c = p[:, 0], p[:, 1], p[:, 2]
        h11 = 1 - np.abs(a) ** 2 - np.abs(b) ** 2
        h22 = 1 - np.abs(b) ** 2 - np.abs(c) ** 2
        h12 = -(a * b.conj() + b * c.conj())
        det = h11 * h22 - np.abs(h12) ** 2
        return det, (h11 > 0) & (det > 0)
    Z = unpack(p, n)
    H = np.eye(n) - Z @ Z.conj()
    H = 0.5 * (H + H.conj().swapaxes(-1, -2))
    ev = np.linalg.eigvalsh(H)
    return np.prod(ev, axis=-1), ev[:, 0] > 0


@dataclass(frozen=True)
class WeightedBoundedSampler:
    """Exact sampler for the weighted probability measure on the bounded domain.

    Rejection from the uniform polydisc law with acceptance probability
    ``det(I - Z conj Z)^{lam-n-1}``, which is at most 1 when ``lam >= n + 1``.
    Returns packed complex coordinates; ``scale`` is 1.
    """

    n: int
    lam: float
    min_acceptance: float = 1e-4

    def __post_init__(self):
        check_weight(self.n, self.lam)
        if self.lam < self.n + 1:
            raise DomainError(
                f"rejection sampler needs lambda >= n+1 = {self.n + 1} (density is unbounded below that)"
            )

    scale = 1.0

    def draw(self, rng, m):
        d = packed_size(self.n)
        out = np.empty((m, d), complex)
        got = 0
        tried = 0
        expo = self.lam - self.n - 1
        while got < m:
            k = max(1024, int(1.3 * (m - got) / max(self.min_acceptance, got / tried if tried else 0.05)))
            k = min(k, 1 << 20)
            p = _disk(rng, (k, d))
            det, ok = _bounded_det_packed(p, self.n)
            u = rng.random(k)
            acc = ok & (u < np.where(ok, np.abs(det), 0.0) ** expo) if expo > 0 else ok
            tried += k
            sel = p[acc][: m - got]
            out[got:got + len(sel)] = sel
            got += len(sel)
            if tried > 10_000 and got / tried < self.min_acceptance:
                raise SamplerError(f"acceptance rate {got / tried:.2e} below {self.min_acceptance:g}")
        return out
