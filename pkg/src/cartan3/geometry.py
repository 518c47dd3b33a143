"""Bergman metrics, Kähler forms, and the moment maps of three Abelian actions.

Actions and their induced vector fields:

* elliptic (circle) on the bounded domain, ``t -> 2itZ``;
* hyperbolic (positive reals) on the Siegel domain, ``t -> 2tZ``;
* parabolic (real symmetric translations) on the Siegel domain, ``S -> S``.

The moment maps use the normalization without additive constants.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import (
    ComplexSymMatrix,
    DomainError,
    InvalidInputError,
    RealSymMatrix,
    as_array,
    pack,
    packed_size,
    unpack,
)
from .domains import DomainPoint, DomainTag, contains

__all__ = [
    "Action",
    "GroupGenerator",
    "MomentValue",
    "bergman_metric",
    "kahler_form",
    "induced_field",
    "moment",
    "moment_batch",
    "moment_pairing",
    "hamiltonian_residual",
    "action_tag",
]


class Action(enum.Enum):
    ELLIPTIC = "elliptic"
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"

    @classmethod
    def parse(cls, s) -> "Action":
        if isinstance(s, cls):
            return s
        try:
            return cls(str(s).strip().lower())
        except ValueError:
            raise InvalidInputError(f"unknown action {s!r}; use elliptic, hyperbolic or parabolic") from None


def action_tag(action) -> DomainTag:
    """Domain on which an action is defined."""
    return DomainTag.BOUNDED if Action.parse(action) is Action.ELLIPTIC else DomainTag.SIEGEL


@dataclass(frozen=True, eq=False)
class GroupGenerator:
    """Lie algebra element: a real ``t`` (elliptic, hyperbolic) or a symmetric ``S`` (parabolic)."""

    action: Action
    param: float | RealSymMatrix

    def __post_init__(self):
        action = Action.parse(self.action)
        object.__setattr__(self, "action", action)
        if action is Action.PARABOLIC:
            p = self.param if isinstance(self.param, RealSymMatrix) else RealSymMatrix.from_dense(np.atleast_2d(self.param))
            object.__setattr__(self, "param", p)
        else:
            if isinstance(self.param, RealSymMatrix) or np.ndim(self.param) != 0:
                raise InvalidInputError(f"{action.value} generator takes a real scalar")
            object.__setattr__(self, "param", float(self.param))


@dataclass(frozen=True, eq=False)
class MomentValue:
    """Moment map value: a real scalar or, for the parabolic action, a symmetric matrix."""

    scalar: float | None = None
    matrix: RealSymMatrix | None = None

    def to_json(self):
        # Adding 0.0 turns -0.0 into 0.0 for stable output.
        if self.matrix is not None:
            return (self.matrix.dense() + 0.0).tolist()
        return self.scalar + 0.0


def _pt(tag: DomainTag, Z) -> np.ndarray:
    if isinstance(Z, DomainPoint):
        if Z.tag is not tag:
            raise DomainError(f"expected a {tag.value} point, got {Z.tag.value}")
        return Z.dense()
    return as_array(Z, complex)


def _resolvents(tag: DomainTag, Z: np.ndarray):
    """Left and right inverse factors of the metric."""
    n = Z.shape[-1]
    if tag is DomainTag.BOUNDED:
        L = np.linalg.inv(np.eye(n) - Z @ Z.conj())
        R = np.linalg.inv(np.eye(n) - Z.conj() @ Z)
        return L, R
    Yi = np.linalg.inv(Z.imag)
    return Yi, Yi


def bergman_metric(tag, Z, U, V) -> complex:
    """Bergman metric ``g_Z(U, V)``.

    Bounded: ``tr((I - Z conj Z)^{-1} U (I - conj Z Z)^{-1} conj V)``.
    Siegel: ``tr((Im Z)^{-1} U (Im Z)^{-1} conj V)``.
    """
    tag = DomainTag.parse(tag)
    Zd = _pt(tag, Z)
    L, R = _resolvents(tag, Zd)
    U, V = as_array(U, complex), as_array(V, complex)
    return complex(np.trace(L @ U @ R @ V.conj()))


def kahler_form(tag, Z, U, V) -> float:
    """Kähler form ``omega_Z(U, V)`` from its trace formula.

    The result is checked against ``-2 Im g_Z(U, V)``.
    """
    tag = DomainTag.parse(tag)
    Zd = _pt(tag, Z)
    U, V = as_array(U, complex), as_array(V, complex)
    L, R = _resolvents(tag, Zd)
    if tag is DomainTag.BOUNDED:
        w = 1j * np.trace(L @ U @ R @ V.conj()) - 1j * np.trace(R @ U.conj() @ L @ V)
        w = w.real
    else:
        Yi = L
        w = 2 * np.trace(Yi @ U.real @ Yi @ V.imag) - 2 * np.trace(Yi @ U.imag @ Yi @ V.real)
    g = np.trace(L @ U @ R @ V.conj())
    ref = -2 * g.imag
    scale = max(1.0, abs(ref), float(np.linalg.norm(L)) ** 2 * np.linalg.norm(U) * np.linalg.norm(V))
    if abs(w - ref) > 1e-12 * scale:
        raise AssertionError(f"Kähler form {w} disagrees with -2 Im g = {ref}")
    return float(w)


def induced_field(gen: GroupGenerator, Z) -> ComplexSymMatrix:
    """Induced vector field of a generator at ``Z``."""
    tag = action_tag(gen.action)
    Zd = _pt(tag, Z)
    if not isinstance(Z, DomainPoint) and not contains(tag, Zd):
        raise DomainError(f"{gen.action.value} action lives on the {tag.value} domain; point is outside it")
    if gen.action is Action.ELLIPTIC:
        X = 2j * gen.param * Zd
    elif gen.action is Action.HYPERBOLIC:
        X = 2 * gen.param * Zd
    else:
        X = gen.param.dense().astype(complex)
    return ComplexSymMatrix.from_dense(X)


def _moment_dense(action: Action, Z: np.ndarray):
    n = Z.shape[-1]
    if action is Action.ELLIPTIC:
        return -2 * np.trace(np.linalg.inv(np.eye(n) - Z @ Z.conj()), axis1=-2, axis2=-1).real
    Yi = np.linalg.inv(Z.imag)
    if action is Action.HYPERBOLIC:
        return -4 * np.trace(Yi @ Z.real, axis1=-2, axis2=-1)
    return -2 * 0.5 * (Yi + Yi.swapaxes(-1, -2))


def moment_batch(action, Zs: np.ndarray) -> np.ndarray:
    """Moment map on dense ``(m, n, n)`` points (no validation); matrices for the parabolic action."""
    return _moment_dense(Action.parse(action), np.asarray(Zs, complex))


def moment(action, Z) -> MomentValue:
    """Moment map of an action at ``Z``.

    ``-2 tr((I - Z conj Z)^{-1})`` (elliptic), ``-4 tr((Im Z)^{-1} Re Z)``
    (hyperbolic), ``-2 (Im Z)^{-1}`` (parabolic).
    """
    action = Action.parse(action)
    tag = action_tag(action)
    if isinstance(Z, DomainPoint):
        P = Z
        if P.tag is not tag:
            raise DomainError(f"{action.value} moment map is defined on the {tag.value} domain")
    else:
        P = DomainPoint.of(tag, Z)
    val = _moment_dense(action, P.dense())
    if action is Action.PARABOLIC:
        return MomentValue(matrix=RealSymMatrix.from_dense(val))
    return MomentValue(scalar=float(val))


def moment_pairing(gen: GroupGenerator, Z: np.ndarray) -> float:
    """Component ``<mu(Z), X>`` of the moment map along a generator (no validation)."""
    val = _moment_dense(gen.action, Z)
    if gen.action is Action.PARABOLIC:
        return float(np.trace(val @ gen.param.dense()))
    return float(val * gen.param)


def hamiltonian_residual(gen: GroupGenerator, Z, V, h: float = 1e-4) -> float:
    """``|d<mu, X>(V) - omega(X#, V)|`` with ``d<mu, X>`` by central differences.

    The differential is taken coordinate-wise on ``(Re z_jk, Im z_jk)`` of the
    packed upper triangle with per-coordinate step ``h (1 + |x_c|)``, then
    contracted with ``V``.

    Raises
    ------
    DomainError
        If a difference stencil leaves the domain.
    """
    if not 1e-6 <= h <= 1e-3:
        raise InvalidInputError("step h must lie in [1e-6, 1e-3]")
    tag = action_tag(gen.action)
    P = Z if isinstance(Z, DomainPoint) else DomainPoint.of(tag, Z)
    if P.tag is not tag:
        raise DomainError(f"{gen.action.value} action lives on the {tag.value} domain")
    Zd = P.dense()
    n = P.n
    Vd = as_array(V, complex)
    if Vd.shape != (n, n):
        raise InvalidInputError("tangent vector has the wrong size")
    z = pack(Zd)
    v = pack(Vd)
    coords = np.concatenate([z.real, z.imag])
    dirs = np.concatenate([v.real, v.imag])
    d = packed_size(n)
    dmu = 0.0
    for c in range(2 * d):
        if dirs[c] == 0:
            continue
        step = h * (1 + abs(coords[c]))
        vals = []
        for sgn in (1.0, -1.0):
            x = coords.copy()
            x[c] += sgn * step
            Zs = unpack(x[:d] + 1j * x[d:], n)
            # Stencil must stay well inside: margin of at least two steps.
            for sgn2 in (1.0, -1.0):
                x2 = coords.copy()
                x2[c] += sgn2 * 2 * step
                if not contains(tag, unpack(x2[:d] + 1j * x2[d:], n)):
                    raise DomainError(f"difference step {step:.3g} crosses the domain boundary")
            vals.append(moment_pairing(gen, Zs))
        dmu += (vals[0] - vals[1]) / (2 * step) * dirs[c]
    X = induced_field(gen, P).dense()
    return float(abs(dmu - kahler_form(tag, P, X, Vd)))
