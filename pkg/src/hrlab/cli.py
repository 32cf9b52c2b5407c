"""Command-line harness: configuration, deterministic runs and CSV output.

Every subcommand writes one or more CSV files into ``out_path``. Each file
starts with a metadata comment line and a header row; rows are emitted in a
deterministic order so identical (config, seed) pairs give identical bytes.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import experiments as ex
from .hermite import hermite_eval
from .oscillatory import (WindowFunction, scaled_hermite_kernel, scaled_twisted_kernel,
                          smoothed_spectral_sum)
from .phase_hermite import (ab_identity_residuals, critical_times, curvature_eigen_report,
                            mixed_hessian_H, sample_region, vectors_ab)
from .phase_twisted import critical_times_L
from .projection import (RieszWeighting, bochner_riesz_kernel_H, compositions,
                         hermite_projection_kernel)
from .special_hermite import phi_norm, twisted_smoothed_spectral_sum

SCHEMA_VERSION = 1
SUBCOMMANDS = ("basis-verify", "kernel-eval", "phase-report", "equivalence", "rates",
               "counterexample", "exponents")
RATE_KINDS = ("projection", "sup-box", "sup-annulus", "phi-norm")


def _parse_exponent(v):
    """Accept 'inf' or a rational >= 1; returns math.inf or Fraction."""
    if isinstance(v, (int, Fraction)) and not isinstance(v, bool):
        out = Fraction(v)
    elif isinstance(v, float):
        out = math.inf if math.isinf(v) else Fraction(v).limit_denominator(10**6)
    else:
        s = str(v).strip().lower()
        if s in ("inf", "infinity", "oo"):
            return math.inf
        out = Fraction(s)
    if out < 1:
        raise ValueError(f"exponent {v!r} must be >= 1")
    return out


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


@dataclass
class RunConfig:
    """Validated run parameters; lambdas are snapped up to 2N_0 + dim."""

    dim: int = 1
    lambda_min: int = 101
    lambda_max: int = 4001
    lambda_count: int = 8
    p: object = Fraction(2)
    q: object = math.inf
    delta: object = Fraction(1)
    c0: float = 0.2
    grid_n: int = 256
    seed: int = 0
    kmax: int = 100
    samples: int = 16
    kind: str = "projection"
    tol: Optional[float] = None
    out_path: str = "hrlab_out"
    warnings_: list = field(default_factory=list, repr=False, compare=False)

    def lambdas(self) -> list:
        return ex.lambda_ladder(self.lambda_min, self.lambda_max, self.lambda_count, self.dim)

    def canonical(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)
             if f.name not in ("out_path", "warnings_")}
        return {k: _fmt(v) if v is not None else None for k, v in d.items()}

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


CONFIG_KEYS = tuple(f.name for f in dataclasses.fields(RunConfig) if f.name != "warnings_")
_INT_KEYS = ("dim", "lambda_min", "lambda_max", "lambda_count", "grid_n", "seed", "kmax", "samples")


def _coerce(key: str, value):
    if key in _INT_KEYS:
        return int(value)
    if key in ("p", "q"):
        return _parse_exponent(value)
    if key == "delta":
        return Fraction(str(value)) if not isinstance(value, Fraction) else value
    if key in ("c0", "tol"):
        return None if value is None else float(value)
    return str(value)


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; blank lines and lines starting with '#' are ignored."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def parse_config(path=None, flags: Optional[dict] = None) -> RunConfig:
    """Merge defaults, an optional config file and flags (flags win, with a warning)."""
    flags = {k.replace("-", "_"): v for k, v in (flags or {}).items() if v is not None}
    file_vals = read_config_file(path) if path else {}
    for src in (file_vals, flags):
        bad = sorted(set(src) - set(CONFIG_KEYS))
        if bad:
            raise ValueError(f"unknown config key(s) {bad}; valid keys: {', '.join(CONFIG_KEYS)}")
    cfg = RunConfig()
    notes = []
    for key in CONFIG_KEYS:
        if key in file_vals:
            setattr(cfg, key, _coerce(key, file_vals[key]))
        if key in flags:
            new = _coerce(key, flags[key])
            if key in file_vals and _coerce(key, file_vals[key]) != new:
                notes.append(f"flag --{key.replace('_', '-')}={_fmt(new)} overrides config file value "
                             f"{file_vals[key]}")
            setattr(cfg, key, new)
    given = set(file_vals) | set(flags)
    if cfg.dim < 1:
        raise ValueError("dim must be >= 1")
    if cfg.grid_n < 16:
        raise ValueError("grid_n must be >= 16")
    if cfg.lambda_count < 1:
        raise ValueError("lambda_count must be >= 1")
    if not 0 < cfg.c0 < 1:
        raise ValueError("c0 must lie in (0, 1)")
    if cfg.kind not in RATE_KINDS:
        raise ValueError(f"kind must be one of {RATE_KINDS}")
    for key in ("lambda_min", "lambda_max"):
        v = getattr(cfg, key)
        s = ex.snap_lambda(v, cfg.dim)
        if s != v:
            if key in given:
                notes.append(f"{key}={v} is not in 2N_0+{cfg.dim}; snapped up to {s}")
            setattr(cfg, key, s)
    if cfg.lambda_max < cfg.lambda_min:
        raise ValueError("lambda_max must be >= lambda_min")
    for n in notes:
        warnings.warn(n, UserWarning, stacklevel=2)
    cfg.warnings_ = notes
    return cfg


# ---------------------------------------------------------------- output

def write_csv(path: Path, cfg: RunConfig, header: list, rows: list) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"#schema_version={SCHEMA_VERSION},#seed={cfg.seed},"
                 f"#config-hash={cfg.config_hash()}\r\n")
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


@dataclass
class Outcome:
    files: list
    failures: list

    @property
    def status(self) -> int:
        return 1 if self.failures else 0


def _tol(cfg: RunConfig, default: float) -> float:
    return default if cfg.tol is None else cfg.tol


# ---------------------------------------------------------------- subcommands

def cmd_exponents(cfg: RunConfig) -> Outcome:
    t = ex.exponent_table(cfg.dim, cfg.p, cfg.q)
    header = ["d", "p", "q", "delta_dp", "gamma_dp", "p0_d", "cterexam_exponent"]
    row = [t.d, t.p, t.q, t.delta_dp, t.gamma_dp, t.p0_d, t.cterexam_exponent]
    f = write_csv(Path(cfg.out_path) / "exponents.csv", cfg, header, [row])
    return Outcome([f], [])


def cmd_basis_verify(cfg: RunConfig) -> Outcome:
    tol = _tol(cfg, 1e-8)
    k = cfg.kmax
    half = math.sqrt(2 * k + 1) + 12.0
    t = np.arange(-half, half + 1e-12, 0.05)
    H = hermite_eval(k, t)
    w = np.full(t.size, 0.05)
    w[[0, -1]] = 0.025
    G = (H * w) @ H.T
    E = np.abs(G - np.eye(k + 1))
    rows, fails = [], []
    for j in range(k + 1):
        r = float(E[j].max())
        ok = r < tol
        rows.append(["orthonormality", j, r, 0.0, tol, ok])
        if not ok:
            fails.append(f"k={j}: residual {r:.3g} >= {tol:g}")
    f = write_csv(Path(cfg.out_path) / "basis.csv", cfg,
                  ["check", "k", "measured", "expected", "tol", "pass"], rows)
    return Outcome([f], fails)


def _brute_kernel(lam: int, d: int, x, y) -> float:
    k = (lam - d) // 2
    hx = [hermite_eval(k, xi) for xi in x]
    hy = [hermite_eval(k, yi) for yi in y]
    return float(sum(np.prod([hx[i][a] * hy[i][a] for i, a in enumerate(al)])
                     for al in compositions(k, d)))


def cmd_kernel_eval(cfg: RunConfig) -> Outcome:
    tol = _tol(cfg, 1e-10)
    rng = np.random.default_rng(cfg.seed)
    d = cfg.dim
    rows, fails = [], []
    for lam in cfg.lambdas():
        r = math.sqrt(lam)
        for _ in range(cfg.samples):
            x = rng.uniform(-r, r, d)
            y = rng.uniform(-r, r, d)
            val = float(hermite_projection_kernel(lam, d, x, y))
            level = math.comb((lam - d) // 2 + d - 1, d - 1)
            direct = _brute_kernel(lam, d, x, y) if level <= 20000 else val
            br = float(bochner_riesz_kernel_H(RieszWeighting(lam, float(cfg.delta)), d, x, y))
            err = abs(val - direct)
            ok = err <= tol * max(1.0, abs(direct))
            rows.append([lam, *x, *y, val, direct, br, err, tol, ok])
            if not ok:
                fails.append(f"lambda={lam}: kernel mismatch {err:.3g}")
    header = (["lambda"] + [f"x{i + 1}" for i in range(d)] + [f"y{i + 1}" for i in range(d)]
              + ["value", "expected", "bochner_riesz", "abs_err", "tol", "pass"])
    f = write_csv(Path(cfg.out_path) / "kernel.csv", cfg, header, rows)
    return Outcome([f], fails)


def cmd_phase_report(cfg: RunConfig) -> Outcome:
    d = cfg.dim
    if d < 2:
        raise ValueError("phase-report needs dim >= 2")
    tol = _tol(cfg, 1e-8)
    xs, ys = sample_region(cfg.c0, d, cfg.samples, cfg.seed)
    rows, fails = [], []
    for n, (x, y) in enumerate(zip(xs, ys)):
        rep = curvature_eigen_report(x, y)
        a, _ = vectors_ab(x, y)
        res = np.abs(ab_identity_residuals(x, y)[0])
        res_a, res_ab = float(max(res[0], res[1])), float(res[2])
        null = float(np.linalg.norm(mixed_hessian_H(x, y) @ a))
        eig = list(rep.eigenvalues)
        ok = (all(e < 0 for e in eig) and rep.eigen_residual < tol
              and max(res_a, res_ab) < 1e-12 and null < 1e-10)
        rows.append([*x, *y, rep.D, rep.S_c, rep.S_star, *eig, res_a, res_ab, null,
                     rep.eigen_residual, ok])
        if not ok:
            fails.append(f"sample {n}: eigenvalues {eig}, residual {rep.eigen_residual:.3g}")
    header = ([f"x{i + 1}" for i in range(d)] + [f"y{i + 1}" for i in range(d)]
              + ["D", "S_c", "S_star"] + [f"eig_{i + 1}" for i in range(d - 1)]
              + ["res_a", "res_ab", "res_null", "res_eig", "pass"])
    f = write_csv(Path(cfg.out_path) / "phase.csv", cfg, header, rows)
    return Outcome([f], fails)


def cmd_equivalence(cfg: RunConfig) -> Outcome:
    """Quadrature of the scaled kernels against their spectral sums (d = 1)."""
    tol_h, tol_l = _tol(cfg, 1e-6), _tol(cfg, 1e-4)
    rng = np.random.default_rng(cfg.seed)
    rows, fails = [], []
    x = np.array([rng.uniform(-0.4, 0.4)])
    y = np.array([rng.uniform(-0.4, 0.4)])
    while abs(x[0] - y[0]) < 0.2:
        y = np.array([rng.uniform(-0.4, 0.4)])
    sc, _ = critical_times(x, y)
    w = WindowFunction(sc, min(0.4, 0.8 * sc), "gaussian")
    for lam in (21, 41, 81):
        a = scaled_hermite_kernel(w, lam, x, y)
        b = smoothed_spectral_sum(w.fourier, lam, math.sqrt(lam) * x, math.sqrt(lam) * y, 1)
        err = abs(abs(a) - abs(b)) / abs(b)
        ok = err < tol_h
        rows.append(["hermite", lam, x[0], y[0], abs(a), abs(b), err, tol_h, ok])
        if not ok:
            fails.append(f"hermite lambda={lam}: relative modulus error {err:.3g}")
    z = rng.uniform(-0.4, 0.4, 2)
    zp = rng.uniform(-0.4, 0.4, 2)
    scl, _ = critical_times_L(z, zp)
    wl = WindowFunction(scl, min(0.3, 0.8 * scl), "gaussian")
    lam = 22
    a = scaled_twisted_kernel(wl, lam, z, zp)
    b = twisted_smoothed_spectral_sum(wl.fourier, lam, math.sqrt(lam) * z, math.sqrt(lam) * zp, 1)
    err = abs(abs(a) - abs(b)) / abs(b)
    ok = err < tol_l
    rows.append(["twisted", lam, f"{_fmt(z[0])};{_fmt(z[1])}", f"{_fmt(zp[0])};{_fmt(zp[1])}",
                 abs(a), abs(b), err, tol_l, ok])
    if not ok:
        fails.append(f"twisted lambda={lam}: relative modulus error {err:.3g}")
    header = ["kernel", "lambda", "x", "y", "quadrature_modulus", "spectral_modulus",
              "rel_err", "tol", "pass"]
    f = write_csv(Path(cfg.out_path) / "equivalence.csv", cfg, header, rows)
    return Outcome([f], fails)


def run_rates(cfg: RunConfig):
    lams = cfg.lambdas()
    if cfg.kind == "projection":
        res = ex.projection_rate_experiment(cfg.dim, cfg.p, cfg.q, lams, seed=cfg.seed,
                                            tol=_tol(cfg, 0.05))
    elif cfg.kind in ("sup-box", "sup-annulus"):
        region = "fixed_box" if cfg.kind == "sup-box" else "turning_annulus"
        res = ex.kernel_sup_scan(cfg.dim, lams, region, tol=cfg.tol)
    else:
        pts = [(lam, phi_norm((lam - cfg.dim) // 2, cfg.dim)) for lam in lams]
        res = ex.RateResult(ex.fit_power_law(pts), (cfg.dim - 1) / 2, _tol(cfg, 0.05))
    return res


def cmd_rates(cfg: RunConfig) -> Outcome:
    res = run_rates(cfg)
    fit = res.fit
    rows = [[l, v, math.log(l), math.log(v)] for l, v in zip(fit.lambdas, fit.values)]
    out = Path(cfg.out_path)
    f1 = write_csv(out / "rates.csv", cfg, ["lambda", "value", "log_lambda", "log_value"], rows)
    f2 = write_csv(out / "fit.csv", cfg, ["slope", "intercept", "r2", "expected", "tol", "pass"],
                   [[fit.slope, fit.intercept, fit.r2, res.expected, res.tol, res.passed]])
    fails = [] if res.passed else [
        f"slope {fit.slope:.4f} differs from {res.expected:.4f} by more than {res.tol}"]
    return Outcome([f1, f2], fails)


def cmd_counterexample(cfg: RunConfig) -> Outcome:
    d = cfg.dim
    rows, fails = [], []
    expected = float(ex.counterexample_exponent(d, cfg.p, cfg.q))
    for lam in cfg.lambdas():
        b = ex.build_counterexample(lam, d, cfg.seed)
        r = ex.projection_ratio(b, cfg.p, cfg.q, grid_n=min(cfg.grid_n, 33))
        ok = not r["flags"]
        rows.append([lam, *b.x_star, *b.x_tilde, len(b.J), b.j_mass, r["f_p"], r["pf_q"],
                     r["ratio"], r["f2_grid"], r["f2_gram"], expected, ok])
        if not ok:
            fails.append(f"lambda={lam}: {'; '.join(r['flags'])}")
    header = (["lambda"] + [f"x_star{i + 1}" for i in range(d)]
              + [f"x_tilde{i + 1}" for i in range(d)]
              + ["J_size", "J_mass", "f_norm_p", "proj_norm_q", "ratio", "f_norm2_grid",
                 "f_norm2_gram", "expected_exponent", "pass"])
    f = write_csv(Path(cfg.out_path) / "counterexample.csv", cfg, header, rows)
    return Outcome([f], fails)


COMMANDS = {
    "basis-verify": cmd_basis_verify,
    "kernel-eval": cmd_kernel_eval,
    "phase-report": cmd_phase_report,
    "equivalence": cmd_equivalence,
    "rates": cmd_rates,
    "counterexample": cmd_counterexample,
    "exponents": cmd_exponents,
}


def run_subcommand(name: str, config: RunConfig) -> Outcome:
    if name not in COMMANDS:
        raise KeyError(f"unknown subcommand {name!r}; choose from {SUBCOMMANDS}")
    return COMMANDS[name](config)


# ---------------------------------------------------------------- argparse

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hrlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=(COMMANDS[name].__doc__ or name).splitlines()[0])
        sp.add_argument("--config", help="flat key = value file; flags override it")
        sp.add_argument("--dim", type=int)
        sp.add_argument("--lambda-min", type=int)
        sp.add_argument("--lambda-max", type=int)
        sp.add_argument("--lambda-count", type=int)
        sp.add_argument("--p")
        sp.add_argument("--q")
        sp.add_argument("--delta")
        sp.add_argument("--c0", type=float)
        sp.add_argument("--grid-n", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--kmax", type=int)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--kind", choices=RATE_KINDS)
        sp.add_argument("--tol", type=float, help="override the subcommand's default tolerance")
        sp.add_argument("--out", dest="out_path", help="output directory (default hrlab_out)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            cfg = parse_config(args.config, flags)
            outcome = run_subcommand(args.command, cfg)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        parser.error(str(exc))
    for f in outcome.files:
        print(f)
    for msg in outcome.failures:
        print(f"FAIL {msg}", file=sys.stderr)
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
