"""Moment-map symbols and invariance diagnostics.

A symbol is a profile composed with one of three invariants:

* elliptic: ``f(tr((I - Z conj Z)^{-1}))`` on the bounded domain,
* hyperbolic: ``f(tr((Im Z)^{-1} Re Z))`` on the Siegel domain,
* parabolic: ``f(Im Z)`` on the Siegel domain,

or a raw function ``g(Z)``. The elliptic and hyperbolic invariants are the
moment maps up to the factors -2 and -4, which the profile absorbs.

Profiles are vectorized: scalar profiles map an ``(m,)`` array to ``(m,)``
values, parabolic profiles map ``(m, n, n)`` real matrices to ``(m,)``, and
raw functions map ``(m, n, n)`` complex matrices to ``(m,)``.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import DomainError, InvalidInputError, haar_orthogonal_batch
from .domains import DomainPoint, DomainTag

__all__ = [
    "SymbolKind",
    "SymbolSpec",
    "Group",
    "elliptic_symbol",
    "hyperbolic_symbol",
    "parabolic_symbol",
    "raw_symbol",
    "eval_symbol",
    "eval_symbol_batch",
    "invariance_residual",
    "bound_violation",
    "parse_symbol",
    "scalar_profile",
    "random_points",
    "elliptic_invariant",
    "hyperbolic_invariant",
]


class SymbolKind(enum.Enum):
    ELLIPTIC = "elliptic"
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"
    RAW = "raw"


_KIND_TAG = {
    SymbolKind.ELLIPTIC: DomainTag.BOUNDED,
    SymbolKind.HYPERBOLIC: DomainTag.SIEGEL,
    SymbolKind.PARABOLIC: DomainTag.SIEGEL,
}


@dataclass(frozen=True, eq=False)
class SymbolSpec:
    """Bounded symbol on one realization.

    Attributes
    ----------
    kind : SymbolKind
    tag : DomainTag
        Realization the symbol lives on; fixed by ``kind`` except for raw symbols.
    profile : callable
        Vectorized profile or raw function (see module docstring).
    bound : float or None
        Declared sup-norm; None when the profile is not bounded on the range
        of its invariant. Not verified.
    name : str
        Human-readable label used in reports.
    """

    kind: SymbolKind
    tag: DomainTag
    profile: Callable[[np.ndarray], np.ndarray]
    bound: float | None = None
    name: str = ""

    def __post_init__(self):
        kind = SymbolKind(self.kind) if not isinstance(self.kind, SymbolKind) else self.kind
        tag = DomainTag.parse(self.tag)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "tag", tag)
        need = _KIND_TAG.get(kind)
        if need is not None and tag is not need:
            raise InvalidInputError(f"{kind.value} symbols live on the {need.value} domain, not {tag.value}")


def elliptic_symbol(f, bound=None, name="elliptic") -> SymbolSpec:
    return SymbolSpec(SymbolKind.ELLIPTIC, DomainTag.BOUNDED, f, bound, name)


def hyperbolic_symbol(f, bound=None, name="hyperbolic") -> SymbolSpec:
    return SymbolSpec(SymbolKind.HYPERBOLIC, DomainTag.SIEGEL, f, bound, name)


def parabolic_symbol(f, bound=None, name="parabolic") -> SymbolSpec:
    return SymbolSpec(SymbolKind.PARABOLIC, DomainTag.SIEGEL, f, bound, name)


def raw_symbol(g, tag, bound=None, name="raw") -> SymbolSpec:
    return SymbolSpec(SymbolKind.RAW, DomainTag.parse(tag), g, bound, name)


def elliptic_invariant(Zs: np.ndarray) -> np.ndarray:
    """``tr((I - Z conj Z)^{-1})`` on ``(m, n, n)`` arrays."""
    n = Zs.shape[-1]
    H = np.eye(n) - Zs @ Zs.conj()
    return np.trace(np.linalg.inv(H), axis1=-2, axis2=-1).real


def hyperbolic_invariant(Zs: np.ndarray) -> np.ndarray:
    """``tr((Im Z)^{-1} Re Z)`` on ``(m, n, n)`` arrays."""
    return np.trace(np.linalg.solve(Zs.imag, Zs.real), axis1=-2, axis2=-1)


def eval_symbol_batch(spec: SymbolSpec, Zs: np.ndarray) -> np.ndarray:
    """Symbol values at dense ``(m, n, n)`` points of ``spec.tag`` (no validation)."""
    Zs = np.asarray(Zs, complex)
    if spec.kind is SymbolKind.ELLIPTIC:
        arg = elliptic_invariant(Zs)
    elif spec.kind is SymbolKind.HYPERBOLIC:
        arg = hyperbolic_invariant(Zs)
    elif spec.kind is SymbolKind.PARABOLIC:
        arg = Zs.imag
    else:
        arg = Zs
    return np.asarray(spec.profile(arg))


def eval_symbol(spec: SymbolSpec, Z) -> complex:
    """Symbol value at one validated point."""
    if isinstance(Z, DomainPoint):
        if Z.tag is not spec.tag:
            raise DomainError(f"symbol lives on the {spec.tag.value} domain, point on {Z.tag.value}")
        P = Z
    else:
        P = DomainPoint.of(spec.tag, Z)
    v = eval_symbol_batch(spec, P.dense()[None])[0]
    return complex(v)


# ---------------------------------------------------------------------------
# invariance diagnostics


class Group(enum.Enum):
    UN = "Un"
    GLNR = "GLnR"
    SYMMNR = "SymmnR"
    T = "T"
    RPLUS = "Rplus"

    @classmethod
    def parse(cls, s) -> "Group":
        if isinstance(s, cls):
            return s
        for g in cls:
            if g.value.lower() == str(s).strip().lower():
                return g
        raise InvalidInputError(f"unknown group {s!r}")


_GROUP_TAG = {
    Group.UN: DomainTag.BOUNDED,
    Group.T: DomainTag.BOUNDED,
    Group.GLNR: DomainTag.SIEGEL,
    Group.RPLUS: DomainTag.SIEGEL,
    Group.SYMMNR: DomainTag.SIEGEL,
}


def random_points(tag, n: int, m: int, rng: np.random.Generator, radius: float = 0.9,
                  y_floor: float = 0.1) -> np.ndarray:
    """Well-conditioned random points, dense ``(m, n, n)``.

    Bounded: a random symmetric direction scaled to operator norm uniform in
    ``(0, radius)``. Siegel: Gaussian real part, ``Im Z = L L^T + y_floor I``.
    """
    tag = DomainTag.parse(tag)
    A = rng.standard_normal((m, n, n)) + 1j * rng.standard_normal((m, n, n))
    S = 0.5 * (A + A.swapaxes(-1, -2))
    if tag is DomainTag.BOUNDED:
        norms = np.linalg.norm(S, ord=2, axis=(-2, -1))
        r = radius * rng.random(m)
        return S * (r / norms)[:, None, None]
    L = rng.standard_normal((m, n, n))
    Y = L @ L.swapaxes(-1, -2) + y_floor * np.eye(n)
    return S.real + 1j * Y


def _act(group: Group, Zs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    m, n, _ = Zs.shape
    if group is Group.UN:
        O = haar_orthogonal_batch(n, m, rng)
        ph = np.exp(2j * np.pi * rng.random((m, n)))
        U = O * ph[:, None, :]
        return U @ Zs @ U.swapaxes(-1, -2)
    if group is Group.T:
        return np.exp(2j * np.pi * rng.random(m))[:, None, None] * Zs
    if group is Group.RPLUS:
        return np.exp(rng.uniform(-2, 2, m))[:, None, None] * Zs
    if group is Group.SYMMNR:
        S = rng.standard_normal((m, n, n))
        return Zs + 3 * 0.5 * (S + S.swapaxes(-1, -2))
    # GL(n, R): Gaussian, redrawn while |det| < 0.1 to keep probes well conditioned.
    A = rng.standard_normal((m, n, n))
    bad = np.abs(np.linalg.det(A)) < 0.1
    while np.any(bad):
        A[bad] = rng.standard_normal((int(bad.sum()), n, n))
        bad = np.abs(np.linalg.det(A)) < 0.1
    return A @ Zs @ A.swapaxes(-1, -2)


def invariance_residual(spec: SymbolSpec, group, trials: int, rng: np.random.Generator, n: int = 2,
                        **point_kw) -> float:
    """``max |a(h.Z) - a(Z)|`` over random group elements ``h`` and points ``Z``.

    Parameters
    ----------
    spec : SymbolSpec
    group : Group or str
        One of ``Un``, ``T`` (bounded domain) or ``GLnR``, ``Rplus``,
        ``SymmnR`` (Siegel domain).
    trials : int
    rng : numpy.random.Generator
    n : int
        Matrix size of the random points.
    **point_kw
        Passed to :func:`random_points`.
    """
    group = Group.parse(group)
    if _GROUP_TAG[group] is not spec.tag:
        raise DomainError(f"{group.value} acts on the {_GROUP_TAG[group].value} domain, symbol lives on {spec.tag.value}")
    Zs = random_points(spec.tag, n, trials, rng, **point_kw)
    moved = _act(group, Zs, rng)
    moved = 0.5 * (moved + moved.swapaxes(-1, -2))
    a0 = eval_symbol_batch(spec, Zs)
    a1 = eval_symbol_batch(spec, moved)
    return float(np.max(np.abs(a1 - a0)))


def bound_violation(spec: SymbolSpec, samples: int, rng: np.random.Generator, n: int = 2) -> float:
    """Largest excess of ``|a|`` over the declared bound on random points (0 if none)."""
    if spec.bound is None:
        raise InvalidInputError("symbol declares no bound")
    Zs = random_points(spec.tag, n, samples, rng, radius=0.999)
    vals = np.abs(eval_symbol_batch(spec, Zs))
    return float(max(0.0, np.max(vals) - spec.bound))


# ---------------------------------------------------------------------------
# declarative symbols


def _scalar_builtin(name: str, params: dict):
    """Vectorized scalar profile and its sup over the reals (None if unbounded)."""
    if name == "constant":
        c = complex(params.get("c", 1.0))
        c = c.real if c.imag == 0 else c
        return (lambda s, c=c: np.full(np.shape(s), c)), abs(c)
    if name == "identity":
        return (lambda s: np.asarray(s, float) * 1.0), None
    if name == "exp_neg":
        return (lambda s: np.exp(-np.asarray(s))), None
    if name == "power":
        if "p" not in params:
            raise InvalidInputError("power profile needs 'p'")
        p = float(params["p"])
        return (lambda s, p=p: np.asarray(s, float) ** p), None
    if name == "indicator":
        iv = params.get("interval")
        if not (isinstance(iv, (list, tuple)) and len(iv) == 2):
            raise InvalidInputError("indicator profile needs 'interval': [lo, hi]")
        lo, hi = float(iv[0]), float(iv[1])
        return (lambda s, lo=lo, hi=hi: ((np.asarray(s) >= lo) & (np.asarray(s) <= hi)).astype(float)), 1.0
    if name == "tanh":
        return (lambda s: np.tanh(np.asarray(s))), 1.0
    if name == "cauchy":
        return (lambda s: 1.0 / (1.0 + np.asarray(s) ** 2)), 1.0
    if name == "inv1p":
        return (lambda s: 1.0 / (1.0 + np.asarray(s))), None
    raise InvalidInputError(f"unknown profile {name!r}")


def scalar_profile(name: str, **params):
    """Built-in scalar profile by name: constant, identity, exp_neg, power, indicator, tanh, cauchy, inv1p."""
    return _scalar_builtin(name, params)[0]


def _range_bound(name: str, params: dict, lo: float | None, sup):
    """Sup of a built-in profile on ``[lo, inf)``, tighter than over all reals."""
    if sup is not None:
        return sup
    if lo is None:
        return None
    if name == "exp_neg":
        return math.exp(-lo)
    if name == "inv1p" and lo > -1:
        return 1.0 / (1.0 + lo)
    if name == "power" and float(params["p"]) <= 0 and lo > 0:
        return lo ** float(params["p"])
    return None


_RAW_FUNCTIONS = {
    "hs_norm2": lambda Z: np.trace(Z @ Z.conj(), axis1=-2, axis2=-1).real,
    "re_z11": lambda Z: Z[..., 0, 0].real,
    "abs2_z11": lambda Z: np.abs(Z[..., 0, 0]) ** 2,
    "elliptic_trace": elliptic_invariant,
    "hyperbolic_trace": hyperbolic_invariant,
}


def parse_symbol(text_or_obj, n: int | None = None) -> SymbolSpec:
    """Build a symbol from its JSON description.

    Examples
    --------
    ``{"kind": "elliptic", "profile": "exp_neg"}``,
    ``{"kind": "elliptic", "profile": "power", "p": -1}``,
    ``{"kind": "parabolic", "profile": "exp_neg", "of": "trace"}``,
    ``{"kind": "hyperbolic", "profile": "tanh"}``,
    ``{"kind": "raw", "tag": "bounded", "function": "hs_norm2"}``,
    ``{"kind": "raw", "function": "elliptic_trace", "profile": "exp_neg"}``.
    """
    try:
        obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else dict(text_or_obj)
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"symbol is not valid JSON: {exc}") from None
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InvalidInputError("symbol JSON must be an object with a 'kind' field")
    try:
        kind = SymbolKind(str(obj["kind"]).lower())
    except ValueError:
        raise InvalidInputError(f"unknown symbol kind {obj['kind']!r}") from None
    params = {k: v for k, v in obj.items() if k not in ("kind", "profile", "tag", "of", "function")}
    label = json.dumps(obj, sort_keys=True)

    if kind is SymbolKind.RAW:
        fname = obj.get("function")
        if fname not in _RAW_FUNCTIONS:
            raise InvalidInputError(f"unknown raw function {fname!r}; known: {sorted(_RAW_FUNCTIONS)}")
        tag = DomainTag.parse(obj.get("tag", "siegel" if fname == "hyperbolic_trace" else "bounded"))
        g = _RAW_FUNCTIONS[fname]
        bound = None
        if "profile" in obj:
            f, sup = _scalar_builtin(obj["profile"], params)
            lo = n if (fname == "elliptic_trace" and n) else None
            bound = _range_bound(obj["profile"], params, lo, sup)
            g = (lambda Z, g=g, f=f: f(g(Z)))
        return raw_symbol(g, tag, bound, label)

    pname = obj.get("profile")
    if pname is None:
        raise InvalidInputError("symbol JSON needs a 'profile'")
    f, sup = _scalar_builtin(pname, params)
    if kind is SymbolKind.ELLIPTIC:
        # The invariant tr((I - Z conj Z)^{-1}) takes values in [n, inf).
        return elliptic_symbol(f, _range_bound(pname, params, n, sup), label)
    if kind is SymbolKind.HYPERBOLIC:
        return hyperbolic_symbol(f, sup, label)
    of = obj.get("of", "trace")
    if of == "trace":
        return parabolic_symbol(lambda Y, f=f: f(np.trace(Y, axis1=-2, axis2=-1)),
                                _range_bound(pname, params, 0.0, sup), label)
    if of == "det":
        return parabolic_symbol(lambda Y, f=f: f(np.linalg.det(Y)),
                                _range_bound(pname, params, 0.0, sup), label)
    raise InvalidInputError(f"parabolic 'of' must be 'trace' or 'det', got {of!r}")
