"""``curv4`` command line: analyze, scan, verify and pinch."""

from __future__ import annotations

import argparse
import inspect
import sys
from pathlib import Path

import numpy as np

from . import __version__, catalog, pinch
from .biorthogonal import k1perp_bruteforce
from .catalog import CatalogEntry, CatalogVerificationError
from .duality import curvature_blocks, weyl_spectrum
from .errors import Curv4Error, InputError, NumericError, ZeroLocusError
from .geometry import curvature_at, curvature_field, fd_margin_mask
from .manifest import load_manifest
from .report import SCHEMA_VERSION, heatmap_svg, to_csv, to_json
from .survey import survey

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_VIOLATION = 0, 2, 3, 4

TOL_PROFILES = {
    "default": {
        "bianchi": 1e-8,
        "harmonic_weyl": 1e-4,
        "kato": 1e-6,
        "kato_guard": 0.01,
        "weitzenbock_abs": 1e-3,
        "weitzenbock_rel": 1e-2,
        "algebraic": 1e-12,
        "discriminant": 1e-12,
        "discriminant_sharp": 1e-9,
    },
    "strict": {
        "bianchi": 1e-10,
        "harmonic_weyl": 1e-6,
        "kato": 1e-8,
        "kato_guard": 0.01,
        "weitzenbock_abs": 1e-4,
        "weitzenbock_rel": 1e-3,
        "algebraic": 1e-13,
        "discriminant": 1e-12,
        "discriminant_sharp": 1e-10,
    },
}

# catalog keyword for each convenience flag
_FLAG_PARAMS = {"radius": "r", "a": "a", "b": "b", "mass": "m"}

SCAN_COLUMNS = (
    "s",
    "k1perp",
    "sectional_min",
    "ric_min",
    "ric_max",
    "wplus_norm",
    "wminus_norm",
    "div_weyl",
    "einstein_residual",
)


class Target:
    """A catalog entry or a manifest metric, with its provenance."""

    def __init__(self, label, metric, entry=None, params=None, provenance=None):
        self.label = label
        self.metric = metric
        self.entry = entry
        self.params = dict(params or {})
        self.provenance = dict(provenance or {})


def _parse_params(items):
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise InputError(f"--param expects name=value, got {item!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise InputError(f"--param {key}: {val!r} is not a number") from None
    return out


def resolve_target(name, args) -> Target:
    if not name:
        raise InputError("a target (catalog name or manifest path) is required")
    params = _parse_params(getattr(args, "param", None))
    flags = {kw: getattr(args, flag) for flag, kw in _FLAG_PARAMS.items() if getattr(args, flag, None) is not None}
    path = Path(name)
    if name.lower() not in catalog.BUILDERS and (path.suffix == ".json" or path.exists()):
        if flags:
            raise InputError("--radius/--a/--b/--mass apply to catalog targets; use --param for manifests")
        m = load_manifest(path, params)
        return Target(m.name, m, None, m.params, {"manifest": str(name)})
    if name.lower() not in catalog.BUILDERS:
        raise InputError(f"unknown catalog entry {name!r} (known: {', '.join(catalog.names())})")
    params.update(flags)
    accepted = inspect.signature(catalog.BUILDERS[name.lower()]).parameters
    for k in params:
        if k not in accepted:
            raise InputError(f"catalog entry {name!r} has no parameter {k!r} (has: {', '.join(accepted)})")
    try:
        entry = catalog.get_entry(name, **params)
    except CatalogVerificationError as exc:
        raise NumericError(str(exc)) from None
    prov = {"catalog": entry.name, "description": entry.description}
    prov.update(entry.provenance)
    return Target(entry.name, entry.metric, entry, entry.defaults, prov)


def _header(command, target: Target | None, tol):
    doc = {"schema": SCHEMA_VERSION, "tool": "curv4", "version": __version__, "command": command}
    if target is not None:
        doc.update(
            target=target.label,
            params=dict(sorted(target.params.items())),
            coordinates=list(target.metric.coords),
            provenance=target.provenance,
        )
    doc["tolerances"] = tol
    return doc


def _parse_point(text):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"--point expects four comma-separated numbers, got {text!r}") from None
    if len(vals) != 4 or not all(np.isfinite(vals)):
        raise InputError(f"--point expects four finite numbers, got {text!r}")
    return np.array(vals)


def _row_dicts(sv, coords):
    rows = []
    for k in range(len(sv)):
        row = {"index": k, "point": dict(zip(coords, sv.X[k].tolist())), "status": sv.status[k]}
        row.update(_scan_values(sv, k))
        rows.append(row)
    return rows


def _scan_values(sv, k):
    sec = sv.sectional_min[k] if sv.sectional_min is not None else np.nan
    return {
        "s": sv.s[k],
        "k1perp": sv.k1perp[k],
        "sectional_min": sec,
        "ric_min": sv.ric_min[k],
        "ric_max": sv.ric_max[k],
        "wplus_norm": sv.wplus_norm[k],
        "wminus_norm": sv.wminus_norm[k],
        "div_weyl": sv.div_norm[k],
        "einstein_residual": sv.einstein_residual[k],
    }


def _extrema(sv):
    out = {}
    values = [_scan_values(sv, k) for k in range(len(sv))]
    for col in SCAN_COLUMNS:
        col_vals = np.array([v[col] for v in values], dtype=float)
        col_vals = col_vals[np.isfinite(col_vals)]
        out[col] = (
            {"min": float(col_vals.min()), "max": float(col_vals.max())} if col_vals.size else {"min": None, "max": None}
        )
    return out


def _csv_table(sv, coords):
    header = ["index", *coords, "status", *SCAN_COLUMNS]
    rows = []
    for k in range(len(sv)):
        vals = _scan_values(sv, k)
        rows.append([k, *sv.X[k].tolist(), sv.status[k], *(vals[c] for c in SCAN_COLUMNS)])
    return to_csv(header, rows)


# -- commands --------------------------------------------------------------------


def cmd_analyze(args, tol):
    if args.format == "svg":
        raise InputError("analyze produces json or csv")
    t = resolve_target(args.target, args)
    if args.point is None:
        raise InputError("analyze needs --point a,b,c,d")
    p = _parse_point(args.point)
    if not t.metric.contains(p):
        raise InputError(f"point {p.tolist()} lies outside the chart domain {t.metric.domain.tolist()}")
    rap = curvature_at(t.metric, p)
    cb = curvature_blocks(rap)
    ws = weyl_spectrum(cb)
    bf = k1perp_bruteforce(cb, grid=args.grid if args.grid else 16)
    ta, tm = cb.trace_residuals()
    result = {
        "scalar_curvature": rap.s,
        "ricci_eigenvalues": rap.ricci_eigenvalues(),
        "einstein_residual": rap.einstein_residual(),
        "weyl": {
            "convention": "norms and determinants of the 3x3 blocks on Lambda+-; tensor norms are 4x in square",
            "wplus": ws.wplus,
            "wminus": ws.wminus,
            "norm_plus": float(np.sqrt(ws.norm_plus_sq)),
            "norm_minus": float(np.sqrt(ws.norm_minus_sq)),
            "norm_plus_sq": ws.norm_plus_sq,
            "norm_minus_sq": ws.norm_minus_sq,
            "tensor_norm_plus_sq": ws.tensor_norm_plus_sq,
            "tensor_norm_minus_sq": ws.tensor_norm_minus_sq,
            "det_plus": ws.det_plus,
            "det_minus": ws.det_minus,
        },
        "k1perp": {
            "closed": bf.K1perp_closed,
            "bruteforce": bf.K1perp_bruteforce,
            "estimated_error": bf.method["estimated_error"],
            "grid": bf.method["grid"],
            "iterations": bf.method["iterations"],
        },
        "sectional_min": bf.sectional_min,
        "residuals": {
            "bianchi": rap.bianchi_residual(),
            "symmetry": rap.symmetry_residual(),
            "weyl_trace": rap.weyl_trace_residual(),
            "block_trace_plus": ta,
            "block_trace_minus": tm,
        },
    }
    if args.format == "csv":
        flat = [
            ("s", rap.s),
            ("k1perp_closed", bf.K1perp_closed),
            ("k1perp_bruteforce", bf.K1perp_bruteforce),
            ("sectional_min", bf.sectional_min),
            ("einstein_residual", rap.einstein_residual()),
            *((f"wplus_{i + 1}", v) for i, v in enumerate(ws.wplus)),
            *((f"wminus_{i + 1}", v) for i, v in enumerate(ws.wminus)),
            ("norm_plus", np.sqrt(ws.norm_plus_sq)),
            ("norm_minus", np.sqrt(ws.norm_minus_sq)),
            ("det_plus", ws.det_plus),
            ("det_minus", ws.det_minus),
        ]
        header = [*t.metric.coords, *(k for k, _ in flat)]
        return to_csv(header, [[*p.tolist(), *(v for _, v in flat)]]), EXIT_OK
    doc = _header("analyze", t, tol)
    doc["point"] = p
    doc["result"] = result
    return to_json(doc), EXIT_OK


def _parse_slice(text):
    try:
        i, j = (int(v) for v in text.split(","))
    except ValueError:
        raise InputError(f"--slice expects two coordinate indices like 0,1, got {text!r}") from None
    if not (0 <= i < 4 and 0 <= j < 4 and i != j):
        raise InputError(f"--slice indices must be distinct and in 0..3, got {text!r}")
    return i, j


def cmd_scan(args, tol):
    t = resolve_target(args.target, args)
    n = 4 if args.grid is None else args.grid
    if not 2 <= n <= 64:
        raise InputError(f"--grid must be in [2, 64], got {n}")
    sl = _parse_slice(args.slice)
    m = t.metric
    X = m.interior_points(n)
    sv = survey(m, X, divergence=True, sectional=not args.no_sectional)
    coords = list(m.coords)
    if args.format == "csv":
        return _csv_table(sv, coords), EXIT_OK
    if args.format == "svg":
        i, j = sl
        mid = n // 2
        idx = np.arange(len(X)).reshape((n,) * 4)
        take = [mid] * 4
        take[i] = take[j] = slice(None)
        cells = idx[tuple(take)]
        if i > j:
            cells = cells.T
        lo, hi = m.domain[:, 0], m.domain[:, 1]
        xs, ys = (lo[k] + (np.arange(n) + 0.5) * (hi[k] - lo[k]) / n for k in (i, j))
        fixed = ", ".join(f"{coords[a]}={X[cells[0, 0], a]:.6g}" for a in range(4) if a not in (i, j))
        title = f"K1perp on {t.label} ({fixed})"
        return heatmap_svg(sv.k1perp[cells], xs, ys, coords[i], coords[j], title), EXIT_OK
    doc = _header("scan", t, tol)
    doc["grid"] = {"n": n, "order": "lexicographic, cell-centred", "domain": m.domain, "slice": list(sl)}
    doc["columns"] = list(SCAN_COLUMNS)
    doc["rows"] = _row_dicts(sv, coords)
    doc["extrema"] = _extrema(sv)
    doc["failed_rows"] = int(np.sum(~sv.valid))
    return to_json(doc), EXIT_OK


def _verify_algebraic(tol, seed):
    alg = pinch.algebraic_suite(10**6, seed=seed, tol=tol["algebraic"])
    disc = pinch.discriminant_suite(10**5, seed=seed, tol=tol["discriminant"], sharp_tol=tol["discriminant_sharp"])
    rng = np.random.default_rng(seed)
    s = rng.uniform(0, 100, 10**4)
    lam = rng.uniform(0, 100, 10**4)
    s[s == 0] = 100.0
    lam[lam == 0] = 100.0
    cmp_bad = int(np.sum(~(s**2 / (8 * (3 * s + 5 * lam)) > s**2 / (24 * (s + 3 * lam)))))
    checks = {
        "det_bound": {"samples": alg.samples, "violations": alg.det_violations, "worst_margin": alg.worst_det_margin,
                      "max_ratio": alg.det_max_ratio, "bound_coefficient": pinch.DET_BOUND_COEF},
        "eigenvalue_bound": {"samples": alg.samples, "violations": alg.eigen_violations,
                             "worst_margin": alg.worst_eigen_margin},
        "equality_family": {"residual": alg.equality_residual, "violations": int(alg.equality_residual > 1e-10)},
        "discriminant": {"samples": disc.samples, "violations": disc.claim_violations,
                         "max_discriminant": disc.max_discriminant},
        "discriminant_sharp": {"samples": disc.samples, "violations": disc.sharp_violations,
                               "max_excess": disc.max_sharp_excess},
        "threshold_order": {"samples": 10**4, "violations": cmp_bad},
    }
    return checks


def _verify_field(t: Target, tol, warn):
    m = t.metric
    pts = m.halton_points(16, margin_frac=0.1)
    pts = pts[fd_margin_mask(m, pts)]
    cf = curvature_field(m, pts)
    bianchi = max(cf.at(k).bianchi_residual() for k in range(len(cf)))
    sym = max(cf.at(k).symmetry_residual() for k in range(len(cf)))
    scale = max(1.0, float(np.max(np.abs(cf.R))))
    checks = {
        "bianchi": {"samples": len(pts), "max_residual": bianchi, "violations": int(bianchi > tol["bianchi"] * scale)},
        "symmetry": {"samples": len(pts), "max_residual": sym, "violations": int(sym > tol["bianchi"] * scale)},
    }
    kato = None
    try:
        kato = pinch.check_refined_kato(
            m, pts, guard=tol["kato_guard"], tol=tol["kato"], harmonic_tol=tol["harmonic_weyl"]
        )
    except ZeroLocusError as exc:
        warn(f"Kato checks skipped: {exc}")
    harmonic = kato.refined if kato is not None else None
    if harmonic is None:
        sv = survey(m, pts)
        wmax = float(np.nanmax(np.hypot(sv.wplus_norm, sv.wminus_norm)))
        harmonic = bool(np.nanmax(sv.div_norm) <= tol["harmonic_weyl"] * max(1.0, wmax))
    checks["harmonic_weyl"] = {"measured": harmonic, "max_div_plus": None if kato is None else kato.max_div_plus}
    if kato is not None:
        if kato.refined:
            checks["refined_kato"] = {"samples": kato.evaluated, "guarded": kato.guarded,
                                      "worst_margin": kato.worst_margin,
                                      "violations": int(kato.worst_margin < -tol["kato"])}
        else:
            warn("refined Kato skipped: Weyl tensor is not harmonic on the samples; plain Kato checked")
        checks["plain_kato"] = {"samples": kato.evaluated, "worst_margin": kato.plain_worst_margin,
                                "violations": int(kato.plain_worst_margin < -tol["kato"])}
    if harmonic:
        rows = []
        for p in pts[:4]:
            w = pinch.check_weitzenbock(m, p, harmonic_tol=tol["harmonic_weyl"])
            for half in (w.plus, w.minus):
                limit = max(tol["weitzenbock_abs"], tol["weitzenbock_rel"] * abs(half.scalar_term))
                rows.append((abs(half.residual), half.relative, abs(half.residual) > limit))
        checks["weitzenbock"] = {
            "samples": len(rows),
            "max_residual": max(r[0] for r in rows),
            "max_relative": max(r[1] for r in rows),
            "violations": sum(r[2] for r in rows),
        }
    else:
        warn("Weitzenbock identity skipped: Weyl tensor is not harmonic")
    return checks


def cmd_verify(args, tol, warn):
    if args.format != "json":
        raise InputError("verify produces json")
    suite = args.target_or_suite
    if suite not in ("algebraic", "field"):
        raise InputError(f"unknown verification suite {suite!r} (algebraic or field)")
    if suite == "algebraic":
        t = None
        checks = _verify_algebraic(tol, args.seed)
    else:
        t = resolve_target(args.verify_target, args)
        checks = _verify_field(t, tol, warn)
    violations = sum(c.get("violations", 0) for c in checks.values())
    doc = _header("verify", t, tol)
    doc["suite"] = suite
    doc["checks"] = checks
    doc["violations"] = violations
    doc["passed"] = violations == 0
    return to_json(doc), EXIT_OK if violations == 0 else EXIT_VIOLATION


def _auto_or_float(text, flag):
    if text is None or text == "auto":
        return None
    try:
        v = float(text)
    except ValueError:
        raise InputError(f"{flag} expects a number or 'auto', got {text!r}") from None
    if not v > 0:
        raise InputError(f"{flag} must be positive, got {text!r}")
    return v


def cmd_pinch(args, tol):
    if args.format == "svg":
        raise InputError("pinch produces json or csv")
    t = resolve_target(args.target, args)
    lam = _auto_or_float(args.lambda1, "--lambda1")
    rho = _auto_or_float(args.rho, "--rho")
    rep = pinch.pinch_report(
        t.entry if t.entry is not None else t.metric,
        lambda1_source="auto" if lam is None else "user",
        grid=4 if args.grid is None else args.grid,
        lambda1=lam,
        rho=rho,
        harmonic_tol=tol["harmonic_weyl"],
    )
    if args.format == "csv":
        return _csv_table(rep.survey, list(t.metric.coords)), EXIT_OK
    th = rep.thresholds
    doc = _header("pinch", t, tol)
    doc["grid"] = rep.grid
    doc["lambda1"] = {"value": rep.lambda1, "source": rep.lambda1_source, "bracket": rep.lambda1_bracket}
    doc["rho"] = {"value": rep.rho, "source": rep.rho_source}
    doc["thresholds"] = {
        "yang_constant": pinch.YANG_CONSTANT,
        "costa_constant": pinch.COSTA_CONSTANT,
        "new_threshold": None if th is None else th.new_threshold,
        "old_threshold": None if th is None else th.old_threshold,
        "corollary_threshold": None if th is None else th.corollary_threshold,
        "evaluated_at_sup_s": rep.sup_s,
    }
    doc["manifold"] = {
        "inf_k1perp": rep.inf_k1perp,
        "inf_s": rep.inf_s,
        "sup_s": rep.sup_s,
        "max_div_weyl": rep.max_div_weyl,
        "harmonic_weyl": rep.harmonic_weyl,
    }
    doc["margins"] = {
        "k1perp_minus_new_threshold": rep.margin_new,
        "k1perp_minus_corollary_threshold": rep.margin_corollary,
        "pointwise_min_new": rep.pointwise_margin_new,
    }
    doc["hypotheses"] = rep.hypotheses
    doc["verdicts"] = rep.verdicts
    doc["einstein_normalized"] = rep.normalized
    doc["rows"] = _row_dicts(rep.survey, list(t.metric.coords))
    return to_json(doc), EXIT_OK


# -- entry point -----------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "svg"), default="json")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--tol-profile", choices=tuple(TOL_PROFILES), default="default")
    common.add_argument("--param", action="append", metavar="NAME=VALUE", help="metric parameter (repeatable)")
    common.add_argument("--radius", type=float, help="sphere radius r (s4, s4-perturbed, s1xs3)")
    common.add_argument("--a", type=float, help="first factor radius (s2xs2)")
    common.add_argument("--b", type=float, help="second factor radius (s2xs2)")
    common.add_argument("--mass", type=float, help="mass m (schwarzschild)")
    common.add_argument("--grid", type=int, help="points per axis")

    parser = argparse.ArgumentParser(prog="curv4", description="Curvature diagnostics for four-dimensional metrics.")
    parser.add_argument("--version", action="version", version=f"curv4 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="full pointwise record at one point")
    p.add_argument("target", help="catalog name or manifest path")
    p.add_argument("--point", metavar="A,B,C,D")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("scan", parents=[common], help="pointwise table over a grid")
    p.add_argument("target")
    p.add_argument("--slice", default="0,1", metavar="I,J", help="coordinate pair for the SVG heatmap")
    p.add_argument("--no-sectional", action="store_true", help="skip the per-point sectional minimum")
    p.set_defaults(handler=cmd_scan)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("target_or_suite", metavar="suite", help="algebraic or field")
    p.add_argument("verify_target", nargs="?", metavar="target")
    p.add_argument("--target", dest="verify_target_opt")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("pinch", parents=[common], help="evaluate the pinching hypotheses")
    p.add_argument("target")
    p.add_argument("--lambda1", default="auto", metavar="X|auto")
    p.add_argument("--rho", default="auto", metavar="X|auto")
    p.set_defaults(handler=cmd_pinch)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    tol = dict(TOL_PROFILES[args.tol_profile])

    def warn(msg):
        print(f"curv4: warning: {msg}", file=sys.stderr)

    try:
        if args.command == "verify":
            if args.verify_target_opt is not None:
                args.verify_target = args.verify_target_opt
            text, code = args.handler(args, tol, warn)
        else:
            text, code = args.handler(args, tol)
    except InputError as exc:
        print(f"curv4: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericError, Curv4Error, CatalogVerificationError, FloatingPointError) as exc:
        print(f"curv4: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
