"""Command-line interface: spectral tables, multiplier grids, moment maps, verification.

Exit codes: 0 ok, 1 verification failure or inconclusive, 2 invalid input,
3 numerical failure. Every output embeds the run configuration and the
library version and nothing time dependent, so reruns are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .core import (
    DomainError,
    InvalidInputError,
    NumericalError,
    ResourceError,
    default_workers,
    spawn_rng,
)
from .domains import DomainPoint, DomainTag, check_weight, multigamma
from .geometry import Action, GroupGenerator, action_tag, hamiltonian_residual, moment, moment_batch
from .symbols import (
    Group,
    SymbolKind,
    bound_violation,
    invariance_residual,
    parse_symbol,
    random_points,
    raw_symbol,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
SUITES = ("geometry", "symbols", "spectral", "oracle")


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by all subcommands."""

    seed: int = 0
    mc_samples: int = 100_000
    quad_order: int = 40
    workers: int = 1
    output: str = "csv"
    out_path: str | None = None

    def __post_init__(self):
        if self.mc_samples < 100:
            raise InvalidInputError("mc_samples must be >= 100")
        if self.quad_order < 4:
            raise InvalidInputError("quad_order must be >= 4")
        if self.workers < 1:
            raise InvalidInputError("workers must be >= 1")
        if self.output not in ("csv", "json"):
            raise InvalidInputError("output must be csv or json")

    def meta(self) -> dict:
        # workers does not change results, so it stays out of the artifact.
        d = asdict(self)
        d.pop("workers")
        d.pop("out_path")
        return {"version": __version__, "config": d}


# ---------------------------------------------------------------------------
# input parsing


def _read_json_arg(text: str):
    """JSON literal or ``@path``."""
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InvalidInputError(f"cannot read {text[1:]}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"invalid JSON: {exc}") from None


def _entry(v) -> complex:
    if isinstance(v, bool):
        raise InvalidInputError("matrix entries must be numbers")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", "").replace("i", "j"))
        except ValueError:
            raise InvalidInputError(f"cannot parse matrix entry {v!r}") from None
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise InvalidInputError(f"cannot parse matrix entry {v!r}; use a number, [re, im] or a string like '1+2i'")


def parse_matrix(obj) -> np.ndarray:
    """Square complex matrix from nested lists of numbers, ``[re, im]`` pairs or strings."""
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise InvalidInputError("matrix must be a non-empty list of rows")
    n = len(obj)
    if any(len(r) != n for r in obj):
        raise InvalidInputError("matrix must be square")
    return np.array([[_entry(v) for v in r] for r in obj], complex)


def parse_grid(text: str) -> list[float]:
    """``start:stop:num`` (inclusive linspace) or a comma-separated list of positive numbers."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            a, b, k = float(parts[0]), float(parts[1]), int(parts[2])
            if k < 1:
                raise ValueError
            vals = np.linspace(a, b, k).tolist()
        else:
            vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InvalidInputError(f"malformed grid {text!r}; use 'start:stop:num' or 'x1,x2,...'") from None
    if not vals or not all(math.isfinite(v) and v > 0 for v in vals):
        raise InvalidInputError(f"grid points must be positive and finite, got {text!r}")
    return vals


def parse_alphas(text: str, n: int):
    from .spectral import Signature

    out = []
    for tok in text.split(";"):
        tok = tok.strip()
        if not tok:
            continue
        al = Signature.parse(tok)
        if al.n != n:
            raise InvalidInputError(f"signature {tok!r} has length {al.n}, expected {n}")
        out.append(al)
    if not out:
        raise InvalidInputError("empty signature list")
    return out


# ---------------------------------------------------------------------------
# output


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(meta: dict, header: list, rows: list) -> str:
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {json.dumps(v, sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x) + 0.0) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def cmd_c_table(n: int, lam: float, symbol, alphas, cfg: RunConfig, method: str = "auto") -> int:
    """Eigenvalue table ``alpha -> c_alpha(a)``.

    ``method``: ``reduced`` (quadrature), ``full`` (Monte Carlo over the
    matrix interval) or ``auto`` (reduced for ``n = 1``, full otherwise).
    """
    from .spectral import SpectralTable, c_coeff, c_coeff_full_many

    check_weight(n, lam)
    spec = symbol if not isinstance(symbol, (str, dict)) else parse_symbol(symbol, n)
    if spec.tag is not DomainTag.BOUNDED:
        raise InvalidInputError("c-table needs a bounded-domain symbol (elliptic or raw on the bounded domain)")
    if method == "auto":
        method = "reduced" if n == 1 else "full"
    if method not in ("reduced", "full"):
        raise InvalidInputError(f"unknown method {method!r}")
    meta = cfg.meta()
    meta.update({"command": "c-table", "n": n, "lambda": lam, "symbol": spec.name, "method": method})
    table = SpectralTable(lam, n, meta=meta)
    if method == "reduced":
        for al in alphas:
            v, se = c_coeff(spec, lam, al, quad_order=cfg.quad_order, mc_samples=cfg.mc_samples, seed=cfg.seed)
            table.add(al, v, se)
    else:
        ests = c_coeff_full_many(spec, lam, alphas, N=cfg.mc_samples, seed=cfg.seed, workers=cfg.workers)
        for al, est in zip(alphas, ests):
            table.add(al, est.value, est.std_error)
    _emit(table.to_csv() if cfg.output == "csv" else table.to_json(), cfg)
    return EXIT_OK


def cmd_gamma(n: int, lam: float, symbol, grid: list[float], cfg: RunConfig) -> int:
    """Parabolic multiplier ``gamma(x I)`` on a grid of the diagonal ray."""
    from .spectral import gamma_parabolic

    check_weight(n, lam)
    spec = symbol if not isinstance(symbol, (str, dict)) else parse_symbol(symbol, n)
    if spec.kind is not SymbolKind.PARABOLIC:
        raise InvalidInputError("gamma needs a parabolic symbol")
    rows = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for x in grid:
            g = complex(gamma_parabolic(spec.profile, lam, x * np.eye(n), quad_order=cfg.quad_order))
            rows.append([x, g.real, g.imag])
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    meta = cfg.meta()
    meta.update({"command": "gamma", "n": n, "lambda": lam, "symbol": spec.name})
    if cfg.output == "csv":
        text = _csv_text(meta, ["x", "gamma_re", "gamma_im"], rows)
    else:
        text = json.dumps({"meta": meta, "rows": [{"x": r[0], "gamma_re": r[1] + 0.0, "gamma_im": r[2] + 0.0}
                                                  for r in rows]}, indent=2, sort_keys=True) + "\n"
    _emit(text, cfg)
    return EXIT_OK


def cmd_moment(action: str, Z, tag: str | None, cfg: RunConfig) -> int:
    """Moment map value as JSON."""
    act = Action.parse(action)
    need = action_tag(act)
    if tag is not None and DomainTag.parse(tag) is not need:
        raise InvalidInputError(f"{act.value} moment map is defined on the {need.value} domain")
    Zd = Z if isinstance(Z, np.ndarray) else parse_matrix(Z)
    P = DomainPoint.of(need, Zd)
    val = moment(act, P)
    out = {"action": act.value, "tag": need.value, "moment": val.to_json(), "version": __version__}
    _emit(json.dumps(out, sort_keys=True) + "\n", cfg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verification suites


def _res(check, params, value, bound, ok, verdict=None, **details):
    from .oracle import CheckResult

    return CheckResult(check, params, float(value), float(bound), bool(ok),
                       verdict or ("pass" if ok else "fail"), details)


def _noise_verdict(ok: bool, noise: float, resolution: float) -> str:
    if noise > resolution:
        return "inconclusive"
    return "pass" if ok else "fail"


# Interior test points for the moment-map checks: operator norm <= 0.5 on the
# bounded domain, Im Z >= I on the Siegel domain, unit tangent vectors.
GEOMETRY_POINTS = {"radius": 0.5, "y_floor": 1.0}


def geometry_probe(act: Action, n: int, rng):
    """Random point, generator and unit tangent vector for a Hamiltonian check."""
    Z = random_points(action_tag(act), n, 1, rng, **GEOMETRY_POINTS)[0]
    if act is Action.PARABOLIC:
        S = rng.standard_normal((n, n))
        gen = GroupGenerator(act, S + S.T)
    else:
        gen = GroupGenerator(act, float(rng.uniform(0.5, 2.0)))
    V = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    V = V + V.T
    return Z, gen, V / np.linalg.norm(V)


def suite_geometry(cfg: RunConfig) -> list:
    rng = spawn_rng(cfg.seed, 1)
    out = []
    for act in Action:
        worst = 0.0
        for n in (1, 2, 3):
            for _ in range(10):
                Z, gen, V = geometry_probe(act, n, rng)
                worst = max(worst, hamiltonian_residual(gen, Z, V, 1e-4))
        out.append(_res(f"hamiltonian_{act.value}", {"h": 1e-4, "points": 30}, worst, 1e-6, worst <= 1e-6))
    probes = [(Action.ELLIPTIC, Group.UN), (Action.HYPERBOLIC, Group.GLNR)]
    for act, grp in probes:
        spec = raw_symbol(lambda Z, a=act: moment_batch(a, Z), action_tag(act), name=f"moment_{act.value}")
        r = max(invariance_residual(spec, grp, 50, rng, n=n, **GEOMETRY_POINTS) for n in (1, 2, 3))
        out.append(_res(f"moment_invariance_{act.value}", {"group": grp.value}, r, 1e-10, r <= 1e-10))
    # Scalar probe of the matrix-valued map: fixed generic linear functional.
    spec = raw_symbol(lambda Z: moment_batch(Action.PARABOLIC, Z).reshape(len(Z), -1)
                      @ np.arange(1.0, Z.shape[-1] ** 2 + 1), DomainTag.SIEGEL)
    r = max(invariance_residual(spec, Group.SYMMNR, 50, rng, n=n) for n in (1, 2, 3))
    out.append(_res("moment_invariance_parabolic", {"group": Group.SYMMNR.value}, r, 0.0, r == 0.0))
    return out


def suite_symbols(cfg: RunConfig) -> list:
    rng = spawn_rng(cfg.seed, 2)
    cases = [
        ({"kind": "elliptic", "profile": "exp_neg"}, Group.UN),
        ({"kind": "elliptic", "profile": "exp_neg"}, Group.T),
        ({"kind": "hyperbolic", "profile": "tanh"}, Group.GLNR),
        ({"kind": "hyperbolic", "profile": "tanh"}, Group.RPLUS),
        ({"kind": "parabolic", "profile": "exp_neg", "of": "trace"}, Group.SYMMNR),
    ]
    out = []
    for obj, grp in cases:
        spec = parse_symbol(obj, 2)
        r = invariance_residual(spec, grp, 100, rng, n=2)
        out.append(_res("symbol_invariance", {"symbol": spec.name, "group": grp.value}, r, 1e-10, r <= 1e-10))
        v = bound_violation(spec, 1000, rng, n=2)
        out.append(_res("symbol_bound", {"symbol": spec.name}, v, 0.0, v <= 0.0))
    return out


def suite_spectral(cfg: RunConfig) -> list:
    from scipy.special import gamma as G

    from .spectral import c_coeff, gamma_parabolic

    out = []
    ref = math.sqrt(2 * math.pi) * G(3) * G(2.5)
    d = abs(multigamma(2, 3) - ref)
    out.append(_res("multigamma", {"n": 2, "lambda": 3}, d, 1e-10, d <= 1e-10))
    raw = parse_symbol({"kind": "raw", "function": "hs_norm2"}, 1)
    dev = max(abs(c_coeff(raw, 2.0, (k,), quad_order=cfg.quad_order)[0] - (k + 1) / (k + 2)) for k in range(9))
    out.append(_res("c_coeff_radial", {"n": 1, "lambda": 2.0, "k_max": 8}, dev, 1e-8, dev <= 1e-8))
    one = lambda Y: np.ones(len(Y))
    for n, tol in ((1, 1e-8), (2, 1e-4)):
        dv = abs(gamma_parabolic(one, n + 1.5, np.eye(n), quad_order=cfg.quad_order) - 1)
        out.append(_res("gamma_constant", {"n": n}, dv, tol, dv <= tol))
    lam = 2.0
    f = lambda Y: np.exp(-np.trace(Y, axis1=-2, axis2=-1))
    dev = max(abs(gamma_parabolic(f, lam, [[x]], quad_order=cfg.quad_order) - (2 * x / (2 * x + 1)) ** (lam - 1))
              for x in np.linspace(0.25, 4, 10))
    out.append(_res("gamma_exp_neg", {"n": 1, "lambda": lam}, dev, 1e-6, dev <= 1e-6))
    return out


def suite_oracle(cfg: RunConfig) -> list:
    from .core import integrate_mc, unpack
    from .domains import PolydiscSampler, weight_density_batch
    from .oracle import MCConfig, QuadConfig, commutativity_check, frame_check, reproduce_check

    out = []
    q = QuadConfig(max(cfg.quad_order, 80))
    pts = [0.0, 0.3 + 0.2j, -0.5j, 0.6 - 0.1j, -0.2 + 0.7j]
    worst = max(reproduce_check("bounded", lam, lambda W, k=k: W[..., 0, 0] ** k, [[z]], q)
                for lam in (2.0, 3.5) for k in range(5) for z in pts)
    out.append(_res("reproducing_kernel", {"n": 1, "order": q.order}, worst, 1e-6, worst <= 1e-6))
    r = frame_check(lambda Y: np.exp(-Y[..., 0, 0]), 2.5)
    out.append(r)
    # Noise-bounded checks scale with mc_samples.
    for lam in (3.5, 4.0):
        est = integrate_mc(lambda P, lam=lam: weight_density_batch("bounded", lam, unpack(P, 2)),
                           PolydiscSampler(2), cfg.mc_samples, cfg.seed, cfg.workers)
        dev, se = abs(est.value - 1.0), est.std_error
        ok = dev <= 3 * se
        out.append(_res("normalization", {"n": 2, "lambda": lam, "N": cfg.mc_samples}, dev, 3 * se, ok,
                        _noise_verdict(ok, se, 1e-2), std_error=se))
    mc = MCConfig(N=cfg.mc_samples, seed=cfg.seed, workers=cfg.workers)
    a = parse_symbol({"kind": "elliptic", "profile": "exp_neg"}, 2)
    b = parse_symbol({"kind": "elliptic", "profile": "power", "p": -1}, 2)
    try:
        out.append(commutativity_check(a, b, 4.0, 2, 2, mc, name="commutator_elliptic"))
    except NumericalError as exc:
        out.append(_res("commutator_elliptic", {"N": cfg.mc_samples}, math.inf, 0.0, False, "inconclusive",
                        reason=str(exc)))
    return out


_SUITE_FUNCS = {"geometry": suite_geometry, "symbols": suite_symbols, "spectral": suite_spectral,
                "oracle": suite_oracle}


def cmd_verify(suite: str, cfg: RunConfig) -> int:
    """Run invariant suites; JSON report; exit 0 iff every check passes."""
    if suite not in SUITES + ("all",):
        raise InvalidInputError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    names = SUITES if suite == "all" else (suite,)
    results = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for nm in names:
            for r in _SUITE_FUNCS[nm](cfg):
                d = r.to_json()
                d["suite"] = nm
                results.append(d)
    report = {"meta": cfg.meta(), "suite": suite, "results": results,
              "pass": all(r["verdict"] == "pass" for r in results)}
    _emit(json.dumps(report, indent=2, sort_keys=True, default=float) + "\n", cfg)
    return EXIT_OK if report["pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser, fmt: bool = True) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mc-samples", type=int, default=100_000)
    p.add_argument("--quad-order", type=int, default=40)
    p.add_argument("--workers", type=int, default=None, help="default: $CARTAN3_WORKERS or 1")
    if fmt:
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cartan3", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cartan3 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("c-table", help="eigenvalues c_alpha of a bounded-domain symbol")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--symbol", required=True, help="JSON symbol or @file")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--alphas", help="signatures separated by ';', e.g. '1,0;2,1'")
    g.add_argument("--max-degree", type=int)
    p.add_argument("--method", choices=("auto", "reduced", "full"), default="auto")
    _common(p)

    p = sub.add_parser("gamma", help="parabolic multiplier on the ray x I")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--symbol", required=True, help="JSON parabolic symbol or @file")
    p.add_argument("--grid", required=True, help="'start:stop:num' or 'x1,x2,...'")
    _common(p)

    p = sub.add_parser("moment", help="moment map at a point")
    p.add_argument("--action", required=True, choices=[a.value for a in Action])
    p.add_argument("--point", required=True, help="JSON matrix or @file")
    p.add_argument("--tag", default=None, help="domain tag (checked against the action)")
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", default="all")
    _common(p, fmt=False)
    return parser


def _config(args) -> RunConfig:
    workers = getattr(args, "workers", None)
    return RunConfig(
        seed=getattr(args, "seed", 0),
        mc_samples=getattr(args, "mc_samples", 100_000),
        quad_order=getattr(args, "quad_order", 40),
        workers=default_workers() if workers is None else workers,
        output=getattr(args, "format", "json"),
        out_path=getattr(args, "out", None),
    )


def _dispatch(args) -> int:
    cfg = _config(args)
    if args.command == "c-table":
        from .spectral import signatures

        if args.n < 1:
            raise InvalidInputError("n must be >= 1")
        alphas = parse_alphas(args.alphas, args.n) if args.alphas else signatures(args.n, args.max_degree)
        return cmd_c_table(args.n, args.lam, _read_json_arg(args.symbol), alphas, cfg, args.method)
    if args.command == "gamma":
        return cmd_gamma(args.n, args.lam, _read_json_arg(args.symbol), parse_grid(args.grid), cfg)
    if args.command == "moment":
        return cmd_moment(args.action, _read_json_arg(args.point), args.tag, cfg)
    return cmd_verify(args.suite, cfg)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return _dispatch(args)
    except (InvalidInputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, ResourceError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
