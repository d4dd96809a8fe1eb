"""Command-line front end: ``spvertex <command> [flags]``.

Exit codes: 0 pass, 1 violation or numerical failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np
from threadpoolctl import threadpool_limits

from . import csvio
from .algebra import check_r_identities, make_model
from .errors import ConfigError, SpVertexError
from .fusion import check_fused_identities, fundamental_projectors, fusion_hierarchy
from .thermo import kappa_general, omega_general
from .transfer import (
    LeadingBranch,
    finite_kappa,
    interpolate_eigen_polynomial,
    polynomial_zeros,
)
from .verify import verify_fusion_ladder

COMMANDS = ("verify", "spectrum", "zeros", "fusion-check", "thermo", "compare")
DEFAULTS = {
    "n": 3, "L": "4", "level": 1, "lambda": "0.2", "grid": "-0.4:0.4:0.1",
    "tol": None, "max_iter": 5000, "seed": 0, "threads": 1, "out": None,
}
CUT_MARGIN = 1e-6


# --------------------------------------------------------------------------
# configuration


def read_config_file(path: str) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"--config: cannot read {path}: {exc}") from exc
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"--config: line {num} is not 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"--config: unknown key '{key}' on line {num}")
        out[key] = value
    return out


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step``; start included, stop excluded beyond a small tolerance."""
    try:
        start, stop, step = (float(s) for s in str(text).split(":"))
    except ValueError as exc:
        raise ConfigError(f"--grid: expected start:stop:step, got '{text}'") from exc
    if step <= 0 or start >= stop:
        raise ConfigError("--grid: need step > 0 and start < stop")
    count = int(np.floor((stop - start) / step - 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


def _int_list(text, flag):
    try:
        vals = [int(s) for s in str(text).split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"{flag}: expected integers, got '{text}'") from exc
    if not vals:
        raise ConfigError(f"{flag}: empty list")
    return vals


def _float_list(text, flag):
    try:
        return [float(s) for s in str(text).split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"{flag}: expected numbers, got '{text}'") from exc


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge flags over config file over defaults, then validate."""
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config_file(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    try:
        cfg["n"] = int(cfg["n"])
        cfg["level"] = int(cfg["level"])
        cfg["max_iter"] = int(cfg["max_iter"])
        cfg["seed"] = int(cfg["seed"])
        cfg["threads"] = int(cfg["threads"])
        cfg["tol"] = None if cfg["tol"] is None else float(cfg["tol"])
    except ValueError as exc:
        raise ConfigError(f"invalid numeric setting: {exc}") from exc
    if cfg["n"] < 1:
        raise ConfigError(f"--n must be a positive integer, got {cfg['n']}")
    if not 1 <= cfg["level"] <= cfg["n"]:
        raise ConfigError(f"--level must lie in 1..{cfg['n']}, got {cfg['level']}")
    if cfg["tol"] is not None and cfg["tol"] <= 0:
        raise ConfigError("--tol must be positive")
    if cfg["threads"] < 1:
        raise ConfigError("--threads must be at least 1")
    if cfg["max_iter"] < 1:
        raise ConfigError("--max-iter must be at least 1")
    cfg["L_list"] = _int_list(cfg["L"], "--L")
    if min(cfg["L_list"]) < 2:
        raise ConfigError("--L must be at least 2")
    cfg["lambda_list"] = _float_list(cfg["lambda"], "--lambda")
    return cfg


def _emit(text: str, cfg: dict):
    if cfg["out"]:
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _say(msg: str, cfg: dict):
    """Summary lines go to stdout when the artifact went to a file, else stderr."""
    print(msg, file=sys.stdout if cfg["out"] else sys.stderr)


def _check_off_cut(grid, n, level):
    if level == n:
        return
    bad = [x for x in grid if abs(x + (n + 1) / 2) < CUT_MARGIN]
    if bad:
        raise ConfigError(f"--grid: point {bad[0]} lies on the cut Re(lambda) = {-(n + 1) / 2}")


# --------------------------------------------------------------------------
# commands


def cmd_verify(cfg: dict) -> int:
    n = cfg["n"]
    tol = cfg["tol"] if cfg["tol"] is not None else 1e-10
    params = make_model(n)
    rng = np.random.default_rng(cfg["seed"])
    rows = []
    pts = rng.uniform(-1, 1, (20, 4))
    for a, b, c, d in pts:
        lam, mu = complex(a, b), complex(c, d)
        for name, val in check_r_identities(params, lam, mu).items():
            rows.append({"suite": "algebra", "check": name, "level": 1,
                         "lambda": [lam.real, lam.imag], "mu": [mu.real, mu.imag], "residual": val})
    for proj in fundamental_projectors(params):
        for name, val in proj.defects().items():
            rows.append({"suite": "projector", "check": f"{proj.target}:{name}", "level": 1, "residual": val})
    for fam in fusion_hierarchy(n)[1:]:
        for i, (a, b, c, d) in enumerate(pts[:3]):
            lam, mu = complex(a, b), complex(c, d)
            for name, val in check_fused_identities(params, fam, lam, mu, yang_baxter=i == 0).items():
                rows.append({"suite": "fusion", "check": name, "level": fam.level,
                             "lambda": [lam.real, lam.imag], "mu": [mu.real, mu.imag], "residual": val})
    worst = max(r["residual"] for r in rows)
    report = {"n": n, "seed": cfg["seed"], "tol": tol, "max_residual": worst,
              "passed": worst <= tol, "residuals": rows}
    _emit(json.dumps(report, indent=1) + "\n", cfg)
    if worst > tol:
        print(f"verify: max residual {worst:.3e} exceeds tol {tol:.1e}", file=sys.stderr)
        return 1
    return 0


def _branch(cfg: dict, L: int) -> LeadingBranch:
    tol = cfg["tol"] if cfg["tol"] is not None else 1e-12
    return LeadingBranch(cfg["n"], L, seed=cfg["seed"], tol=tol, max_iter=cfg["max_iter"])


def cmd_spectrum(cfg: dict) -> int:
    rows = []
    for L in cfg["L_list"]:
        br = _branch(cfg, L)
        for lam in cfg["lambda_list"]:
            s = br.sample(cfg["level"], lam)
            rows.append((s.lam.real, s.lam.imag, s.value.real, s.value.imag, s.residual))
    _emit(csvio.write_csv("samples", rows), cfg)
    return 0


def cmd_zeros(cfg: dict) -> int:
    L = cfg["L_list"][0]
    poly = interpolate_eigen_polynomial(_branch(cfg, L), cfg["level"])
    rep = polynomial_zeros(poly)
    rows = [(z.real, z.imag, bool(c), bool(s)) for z, c, s in zip(rep.zeros, rep.on_centerline, rep.in_strip)]
    _emit(csvio.write_csv("zeros", rows), cfg)
    in_strip = int(rep.in_strip.sum())
    _say(f"summary n={cfg['n']} L={L} level={cfg['level']} degree={poly.degree} "
         f"centerline_count={rep.centerline_count} in_strip_offline_count={rep.in_strip_offline_count} "
         f"in_strip_count={in_strip} heldout_error={poly.heldout_error:.3e}", cfg)
    return 0


def cmd_fusion_check(cfg: dict) -> int:
    params = make_model(cfg["n"])
    if cfg["n"] < 2:
        raise ConfigError("--n must be at least 2 for the fusion ladder")
    rows, by_id, flagged = [], {}, False
    for L in cfg["L_list"]:
        br = _branch(cfg, L)
        for lam in cfg["lambda_list"]:
            for r in verify_fusion_ladder(params, L, lam, branch=br):
                rows.append((r.identity_id, cfg["n"], L, r.lam.real, r.lam.imag, r.relative_defect))
                by_id.setdefault((r.identity_id, lam), []).append(r.relative_defect)
                flagged |= r.flagged
    _emit(csvio.write_csv("verify", rows), cfg)
    growing = [k for k, v in by_id.items() if any(b >= a for a, b in zip(v, v[1:]))]
    if growing:
        _say(f"fusion-check: defects not decreasing in L for {sorted(growing)}", cfg)
    if flagged:
        _say("fusion-check: some rows failed the eigenvector certificate", cfg)
    return 1 if (growing or flagged) else 0


def cmd_thermo(cfg: dict) -> int:
    n, m = cfg["n"], cfg["level"]
    grid = parse_grid(cfg["grid"])
    _check_off_cut(grid, n, m)
    rows = []
    for lam in grid:
        region = "-" if m == n else ("II" if lam > -(n + 1) / 2 else "I")
        k = kappa_general(n, m, None, lam) if n >= 2 else np.nan
        w = omega_general(n, m, None, lam) if n >= 2 else np.nan
        rows.append((n, m, region, float(lam), float(np.real(k)), float(np.real(w))))
    _emit(csvio.write_csv("thermo", rows), cfg)
    return 0


def cmd_compare(cfg: dict) -> int:
    n, m = cfg["n"], cfg["level"]
    grid = parse_grid(cfg["grid"])
    _check_off_cut(grid, n, m)
    rows = []
    for L in cfg["L_list"]:
        br = _branch(cfg, L)
        for lam in grid:
            k_l = finite_kappa(br.value(m, lam), L)
            k_inf = float(np.real(kappa_general(n, m, None, lam)))
            rows.append((float(lam), k_l, k_inf, abs(k_l - k_inf) / abs(k_inf)))
    _emit(csvio.write_csv("compare", rows), cfg)
    return 0


HANDLERS = {
    "verify": cmd_verify, "spectrum": cmd_spectrum, "zeros": cmd_zeros,
    "fusion-check": cmd_fusion_check, "thermo": cmd_thermo, "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", help="rank of Sp(2n)")
    common.add_argument("--L", help="chain length, or a comma list")
    common.add_argument("--level", help="fusion level 1..n")
    common.add_argument("--lambda", dest="lambda", help="spectral parameter(s), comma separated")
    common.add_argument("--grid", help="real grid start:stop:step")
    common.add_argument("--tol", help="tolerance (verify) or eigensolver tolerance")
    common.add_argument("--max-iter", dest="max_iter", help="eigensolver iteration cap")
    common.add_argument("--seed", help="random seed")
    common.add_argument("--threads", help="BLAS thread count; 1 gives reproducible output")
    common.add_argument("--out", help="write the artifact here instead of stdout")
    common.add_argument("--config", help="key = value settings file")
    parser = argparse.ArgumentParser(prog="spvertex", description="Sp(2n) vertex model checks and sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _glue_negative_values(argv):
    """Let ``--grid -4.4:0.4:0.1`` through by rewriting it as ``--grid=-4.4:0.4:0.1``."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok.startswith("--") and "=" not in tok and nxt is not None and nxt[:1] == "-" \
                and len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] == "."):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        with threadpool_limits(limits=cfg["threads"]):
            return HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SpVertexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
