"""Command-line interface.

Every command reads a family file, writes data files plus ``report.json``
and ``manifest.json`` into ``--out``, and exits with 0 on success, 2 on
configuration errors, 3 on numerical failures and 4 when a checked
invariant is violated (outputs are still written in that case).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .core import FamilyError, SingularLeadingCoefficientWarning, as_point, load_family
from .grids import GridSpec
from .io import Layer, csv_text, emit_svg, json_text, write_manifest, write_text
from .jordan import JordanChainError, jordan_pair, stratify
from .pseudospectral import PseudoQuery, check_axis_symmetry, pseudospectrum_grid
from .ranges import (
    DegenerateLeadingCoefficientError,
    jw_sample,
    numrange_grid,
    numrange_membership,
    reconstruct_w_from_jw,
    w_bound,
)
from .regularity import MAP_KINDS, default_scales, fit_holder, genericity_probe, sample_scale_pairs
from .rng import random_direction, stream, unit_ball
from .spectral import spectral_radius, spectrum_at, verify_spectrum_perturbation

log = logging.getLogger("polystab")

COMMANDS = ("spectrum", "pseudo", "numrange", "jointnr", "holder", "jordan", "stratify", "certify")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INVARIANT = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    family_path: str
    command: str
    out_dir: str
    at: Optional[list] = None
    eps: Optional[float] = None
    region: Optional[list] = None
    resolution: Optional[list] = None
    scales: Optional[list] = None
    seed: int = 0
    tol: Optional[float] = None
    map_kind: Optional[str] = None
    direction: Optional[list] = None
    samples: Optional[int] = None
    radius: Optional[float] = None
    axes: list = field(default_factory=list)
    dims: Optional[list] = None


# ---------------------------------------------------------------- parsing

def _floats(text, what):
    try:
        return [float(x) for x in str(text).split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must be comma-separated numbers, got {text!r}") from None


def _region(text):
    vals = _floats(text, "region")
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("region needs re_min,re_max,im_min,im_max")
    return vals


def _resolution(text):
    try:
        vals = [int(x) for x in str(text).split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"resolution must be integers, got {text!r}") from None
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("resolution is N or N_re,N_im")
    return vals


def _axis(text):
    vals = _floats(text, "axis")
    if len(vals) != 3 or vals[2] != int(vals[2]) or vals[2] < 2:
        raise argparse.ArgumentTypeError("axis is lo,hi,count with count >= 2")
    return [vals[0], vals[1], int(vals[2])]


_VALUE_FLAGS = ("--at", "--region", "--direction", "--axis", "--scales", "--eps", "--radius")


def _join_negative_values(argv):
    # "--region -2,2,-2,2" would read as a flag; glue such values on with "="
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and len(argv[i + 1]) > 1 \
                and (argv[i + 1][1].isdigit() or argv[i + 1][1] == "."):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def build_parser():
    p = argparse.ArgumentParser(
        prog="polystab",
        description="Spectra, pseudospectra, numerical ranges and Jordan structure of parameter-dependent matrix polynomials.",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("family", help="family file (YAML/JSON with n, d, m, coeff)")
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--seed", type=int, default=0)

    def at(sp, required=True):
        sp.add_argument("--at", type=lambda s: _floats(s, "--at"), required=required,
                        help="parameter point t1,...,tm")

    def grid(sp, region_required=True):
        sp.add_argument("--region", type=_region, required=region_required, help="re_min,re_max,im_min,im_max")
        sp.add_argument("--res", dest="resolution", type=_resolution, default=[101, 101], help="N or N_re,N_im")

    sp = sub.add_parser("spectrum", help="eigenvalues with multiplicities and the spectral radius")
    common(sp); at(sp)

    sp = sub.add_parser("pseudo", help="structured eps-pseudospectrum grid")
    common(sp); at(sp); grid(sp)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--tol", type=float, default=None, help="node membership tolerance in half-cell units (default 1e-4)")

    sp = sub.add_parser("numrange", help="numerical range grid")
    common(sp); at(sp); grid(sp, region_required=False)

    sp = sub.add_parser("jointnr", help="sampled joint numerical range")
    common(sp); at(sp)
    sp.add_argument("--samples", type=int, default=2000)

    sp = sub.add_parser("holder", help="fit a Hoelder exponent of a set-valued map")
    common(sp); at(sp)
    sp.add_argument("--map", dest="map_kind", choices=MAP_KINDS, required=True)
    sp.add_argument("--scales", type=lambda s: _floats(s, "--scales"), default=None,
                    help="decreasing step sizes (default 2^-1..2^-8)")
    sp.add_argument("--direction", type=lambda s: _floats(s, "--direction"), default=None)
    sp.add_argument("--eps", type=float, default=None, help="eps for the pseudospectrum map (default 0.1)")

    sp = sub.add_parser("jordan", help="Jordan signature and Jordan pair")
    common(sp); at(sp)

    sp = sub.add_parser("stratify", help="Jordan signature map over a parameter slice")
    common(sp); at(sp, required=False)
    sp.add_argument("--axis", dest="axes", type=_axis, action="append", required=True,
                    help="lo,hi,count; give once or twice")
    sp.add_argument("--dims", type=lambda s: [int(x) for x in s.split(",")], default=None,
                    help="0-based parameter indices varied by the axes")

    sp = sub.add_parser("certify", help="check the spectrum perturbation inequalities on random triples")
    common(sp); at(sp)
    sp.add_argument("--samples", type=int, default=200, help="number of (u, u') pairs")
    sp.add_argument("--radius", type=float, default=1.0, help="sampling ball radius around --at")
    return p


def config_from_args(ns):
    d = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__}
    d["family_path"] = ns.family
    d["out_dir"] = ns.out
    return RunConfig(**d)


# ---------------------------------------------------------------- commands

def _point(f, cfg):
    if cfg.at is None:
        return np.zeros(f.m)
    try:
        return as_point(f, cfg.at)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _spectrum_layer(values):
    return Layer("points", np.asarray(values, dtype=complex), "spectrum", "#000000")


def _grid_rows(g):
    nodes = g.spec.nodes()
    cm = g.center_member if g.center_member is not None else g.member
    for j in range(nodes.shape[0]):
        for i in range(nodes.shape[1]):
            z = nodes[j, i]
            yield (z.real, z.imag, bool(g.member[j, i]), bool(cm[j, i]), float(g.values[j, i]))


def cmd_spectrum(f, cfg, out):
    u = _point(f, cfg)
    s = spectrum_at(f, u)
    rows = [(v.real, v.imag, m) for v, m in s.eigenvalues]
    out["spectrum.csv"] = csv_text(["re", "im", "multiplicity"], rows)
    out["spectrum.svg"] = emit_svg([_spectrum_layer(s.values)], title="spectrum")
    report = {"u": u, "total": s.total, "distinct": len(s), "spectral_radius": spectral_radius(s),
              "eigenvalues": [[v, m] for v, m in s.eigenvalues]}
    problems = []
    if f.monic and s.total != f.d * f.n:
        problems.append(f"multiplicities sum to {s.total}, expected {f.d * f.n}")
    return report, problems


def cmd_pseudo(f, cfg, out):
    u = _point(f, cfg)
    q = PseudoQuery(u, cfg.eps, tuple(cfg.region), tuple(cfg.resolution))
    g = pseudospectrum_grid(f, q, tol=cfg.tol if cfg.tol is not None else 1e-4, seed=cfg.seed)
    out["grid.csv"] = csv_text(["re", "im", "member", "center_member", "value"], _grid_rows(g))
    out["pseudo.svg"] = emit_svg([
        Layer("cells", (g.spec, g.member), f"Lambda_eps, eps={cfg.eps:g}"),
        Layer("polylines", g.boundary, "boundary"),
        _spectrum_layer(g.spectrum),
    ], viewport=g.spec.region, title="structured pseudospectrum")
    report = {"u": u, "eps": cfg.eps, "region": g.spec.region, "resolution": g.spec.resolution,
              "member_cells": g.member_count, "center_member_cells": int(g.center_member.sum()),
              "components": g.components, "cell_diagonal": g.spec.diagonal, "checks": dict(g.checks)}
    problems = [f"check failed: {k}" for k, ok in g.checks.items() if not ok]
    if f.is_real() and g.spec.is_axis_symmetric():
        sym, total, inner = check_axis_symmetry(g, cfg.seed)
        report["symmetry"] = {"mismatches": total, "interior_mismatches": inner}
        if inner:
            problems.append(f"{inner} interior cells break real-axis symmetry")
    return report, problems


def cmd_numrange(f, cfg, out):
    u = _point(f, cfg)
    region = cfg.region
    if region is None:
        if not f.monic:
            raise ConfigError("--region is required for non-monic families")
        r = w_bound(f, u)
        region = [-r, r, -r, r]
        cfg.region = region
    g = numrange_grid(f, u, tuple(region), tuple(cfg.resolution))
    out["grid.csv"] = csv_text(["re", "im", "member", "center_member", "value"], _grid_rows(g))
    out["numrange.svg"] = emit_svg([
        Layer("cells", (g.spec, g.member), "W"),
        Layer("polylines", g.boundary, "boundary"),
        _spectrum_layer(g.spectrum),
    ], viewport=g.spec.region, title="numerical range")
    contained = [bool(numrange_membership(f, u, lam)) for lam in g.spectrum]
    report = {"u": u, "region": g.spec.region, "resolution": g.spec.resolution,
              "member_cells": g.member_count, "components": g.components,
              "spectrum_in_w": all(contained), "checks": dict(g.checks)}
    problems = [f"check failed: {k}" for k, ok in g.checks.items() if not ok]
    if not all(contained):
        problems.append("an eigenvalue failed the numerical range membership test")
    return report, problems


def cmd_jointnr(f, cfg, out):
    u = _point(f, cfg)
    if cfg.samples < 1:
        raise ConfigError("--samples must be >= 1")
    c = jw_sample(f, u, cfg.samples, cfg.seed)
    header = [f"{part}{k}" for k in range(f.d + 1) for part in ("re_a", "im_a")]
    rows = ([x for z in pt for x in (z.real, z.imag)] for pt in c.points)
    out["jw.csv"] = csv_text(header, rows)
    report = {"u": u, "points": c.points.shape[0], "sphere_samples": c.sphere_samples}
    problems = []
    if f.monic:
        dev = float(np.max(np.abs(c.points[:, -1] - 1.0)))
        report["last_coordinate_deviation"] = dev
        if dev > 1e-12:
            problems.append(f"last JW coordinate deviates from 1 by {dev:.3e}")
    try:
        w = reconstruct_w_from_jw(c)
    except DegenerateLeadingCoefficientError as exc:
        report["w_from_jw"] = str(exc)
    else:
        out["w_from_jw.csv"] = csv_text(["re", "im"], ((z.real, z.imag) for z in w))
        out["jointnr.svg"] = emit_svg([
            Layer("points", w, "roots over JW points", extra={"radius": 1}),
            _spectrum_layer(spectrum_at(f, u).values),
        ], title="numerical range from the joint numerical range")
        report["w_from_jw_points"] = int(w.size)
    return report, problems


def cmd_holder(f, cfg, out):
    u = _point(f, cfg)
    scales = cfg.scales if cfg.scales is not None else default_scales()
    cfg.scales = scales
    direction = cfg.direction
    if direction is None:
        direction = random_direction(stream(cfg.seed, "direction"), f.m)
        cfg.direction = [float(x) for x in direction]
    opts = {}
    if cfg.map_kind == "pseudospectrum":
        opts["eps"] = cfg.eps if cfg.eps is not None else 0.1
    try:
        pairs = sample_scale_pairs(f, u, cfg.map_kind, direction, scales, cfg.seed, **opts)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    fit = fit_holder(pairs)
    probe = genericity_probe(f, u, seed=cfg.seed)
    out["pairs.csv"] = csv_text(["h", "dist"], ((p.h, p.dist) for p in pairs))
    report = {"map_kind": cfg.map_kind, "base": u, "direction": np.asarray(direction, dtype=float),
              "pairs": [{"h": p.h, "dist": p.dist} for p in pairs],
              "c_hat": fit.c_hat, "alpha_hat": fit.alpha_hat, "r2": fit.r2, "n_pairs": fit.n_pairs,
              "degenerate": fit.degenerate, "verdict": probe.verdict}
    pts = [complex(np.log2(p.h), np.log2(p.dist)) for p in pairs if p.dist > 0]
    if pts:
        out["holder.svg"] = emit_svg([Layer("points", pts, "log2 h vs log2 dist")], title=f"{cfg.map_kind} scaling")
    return report, []


def _sig_rows(sig):
    for lam, parts in sig.blocks:
        yield (lam.real, lam.imag, sum(parts), " ".join(str(q) for q in parts))


def cmd_jordan(f, cfg, out):
    u = _point(f, cfg)
    jp = jordan_pair(f, u)
    sig = jp.signature
    out["signature.csv"] = csv_text(["re", "im", "multiplicity", "blocks"], _sig_rows(sig))
    N = jp.X.shape[1]
    header = ["row"] + [f"{part}{c}" for c in range(N) for part in ("re_x", "im_x")]
    rows = ([i] + [x for z in jp.X[i] for x in (z.real, z.imag)] for i in range(jp.X.shape[0]))
    out["X.csv"] = csv_text(header, rows)
    report = {"u": u, "signature": sig.key(), "distinct": sig.k, "size": sig.size,
              "blocks": [{"eigenvalue": lam, "partition": list(parts)} for lam, parts in sig.blocks],
              "min_gap": sig.min_gap, "confident": sig.confident, "chain_residual": jp.residual}
    problems = []
    if f.monic and sum(sum(p) for _, p in sig.blocks) != f.d * f.n:
        problems.append("block sizes do not sum to dn")
    return report, problems


def _signature_hash(key):
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:12]


def cmd_stratify(f, cfg, out):
    if len(cfg.axes) not in (1, 2):
        raise ConfigError("give --axis once or twice")
    base = _point(f, cfg)
    axes = [np.linspace(lo, hi, n) for lo, hi, n in cfg.axes]
    dims = cfg.dims if cfg.dims is not None else list(range(len(axes)))
    if len(dims) != len(axes) or max(dims) >= f.m or min(dims) < 0:
        raise ConfigError("--dims must name one valid parameter index per axis")
    smap = stratify(f, axes, base=base, dims=dims)
    header = [f"t{k + 1}" for k in range(f.m)] + ["region", "signature_hash", "signature", "gap"]
    rows = []
    for idx in np.ndindex(*smap.keys.shape):
        key = str(smap.keys[idx])
        rows.append(list(smap.nodes[idx]) + [int(smap.regions[idx]), _signature_hash(key), key, float(smap.gaps[idx])])
    out["strata.csv"] = csv_text(header, rows)
    # render: the slice as a grid of coloured cells, one layer per signature
    if len(axes) == 1:
        xs, ys = axes[0], np.array([-0.5, 0.5])
        keys2 = smap.keys[None, :]
    else:
        xs, ys = axes[0], axes[1]
        keys2 = smap.keys.T
    spec = GridSpec((xs[0], xs[-1], ys[0], ys[-1]), (xs.size, ys.size))
    layers = [Layer("cells", (spec, keys2 == key), key) for key in sorted(smap.legend)]
    if np.any(keys2 == "undetermined"):
        layers.append(Layer("cells", (spec, keys2 == "undetermined"), "undetermined", "#7f7f7f"))
    out["strata.svg"] = emit_svg(layers, title="Jordan signature strata")
    counts = {k: int(np.sum(smap.keys == k)) for k in sorted(set(smap.keys.ravel().tolist()))}
    report = {"base": base, "dims": dims, "axes": cfg.axes, "legend": smap.legend, "classes": smap.classes,
              "node_counts": counts, "regions": int(smap.regions.max())}
    return report, []


def cmd_certify(f, cfg, out):
    u0 = _point(f, cfg)
    if cfg.samples < 1:
        raise ConfigError("--samples must be >= 1")
    rng = stream(cfg.seed, "certify")
    U = u0 + cfg.radius * unit_ball(rng, cfg.samples, f.m)
    V = u0 + cfg.radius * unit_ball(rng, cfg.samples, f.m)
    rows = []
    fails = [0, 0]
    for u, v in zip(U, V):
        s = spectrum_at(f, u)
        for lam in s.roots:
            c = verify_spectrum_perturbation(f, u, v, lam, sigma_u=s)
            h = c.holds
            fails[0] += not h[0]
            fails[1] += not h[1]
            rows.append(list(u) + list(v) + [lam.real, lam.imag, c.dist_pow, c.det_val, c.det_bound, h[0], h[1]])
    header = [f"u{k + 1}" for k in range(f.m)] + [f"v{k + 1}" for k in range(f.m)] + [
        "re_lambda", "im_lambda", "dist_pow", "det_val", "det_bound", "holds_dist", "holds_det"]
    out["certificates.csv"] = csv_text(header, rows)
    report = {"triples": len(rows), "dist_failures": fails[0], "det_failures": fails[1]}
    problems = []
    if f.monic and (fails[0] or fails[1]):
        problems.append(f"certificate inequalities failed: {fails[0]} and {fails[1]} triples")
    return report, problems


_DISPATCH = {
    "spectrum": cmd_spectrum, "pseudo": cmd_pseudo, "numrange": cmd_numrange, "jointnr": cmd_jointnr,
    "holder": cmd_holder, "jordan": cmd_jordan, "stratify": cmd_stratify, "certify": cmd_certify,
}


# ---------------------------------------------------------------- driver

def _prepare_out_dir(path):
    os.makedirs(path, exist_ok=True)
    present = set(os.listdir(path))
    if not present:
        return
    manifest = os.path.join(path, "manifest.json")
    if "manifest.json" not in present:
        raise ConfigError(f"output directory {path!r} is not empty and holds no manifest")
    with open(manifest, encoding="utf-8") as fh:
        old = {e["name"] for e in json.load(fh).get("files", [])}
    foreign = present - old
    if foreign:
        raise ConfigError(f"output directory {path!r} holds files from elsewhere: {sorted(foreign)}")
    for name in old:
        p = os.path.join(path, name)
        if os.path.isfile(p):
            os.remove(p)


def run(cfg: RunConfig):
    """Execute one command; returns the exit status."""
    if cfg.command not in _DISPATCH:
        raise ConfigError(f"unknown command {cfg.command!r}")
    try:
        f = load_family(cfg.family_path)
    except OSError as exc:
        raise ConfigError(f"cannot read family file: {exc}") from None
    _prepare_out_dir(cfg.out_dir)
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("error", SingularLeadingCoefficientWarning)
        report, problems = _DISPATCH[cfg.command](f, cfg, out)
    report = {"command": cfg.command, "family": {"n": f.n, "d": f.d, "m": f.m, "monic": f.monic},
              "invariant_violations": problems, **report}
    out["report.json"] = json_text(report)
    for name, text in out.items():
        write_text(os.path.join(cfg.out_dir, name), text)
    resolved = asdict(cfg)
    resolved["family_sha256"] = hashlib.sha256(f.source.encode("utf-8")).hexdigest()
    write_manifest(cfg.out_dir, list(out), resolved)
    for msg in problems:
        log.error("invariant violation: %s", msg)
    return EXIT_INVARIANT if problems else EXIT_OK


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = config_from_args(ns)
    try:
        return run(cfg)
    except (ConfigError, FamilyError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except SingularLeadingCoefficientWarning as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except JordanChainError as exc:
        log.error("invariant violation: %s", exc)
        return EXIT_INVARIANT
    except (ArithmeticError, np.linalg.LinAlgError, DegenerateLeadingCoefficientError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except ValueError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
