"""Command-line front end.

Commands: find-misiurewicz, verify-similarity, render-julia, render-locus,
trace-ray, landing-check, transversality.  Configuration comes from an
optional flat key=value file plus flag overrides (flags win), so runs are
reproducible from artifacts checked into a repository.  All numeric output
is printed with 17 significant digits; files are written atomically and every
command is deterministic given its configuration.

Exit codes: 0 success, 2 solver failure, 3 precision/domain guard, 4 config
error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import curve, grids, rays, similarity
from .dynamics import CubicMap, bounded_mask
from .errors import ConfigError, CubicSPError, GuardError, SolverError

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_GUARD = 3
EXIT_CONFIG = 4

COMMANDS = (
    "find-misiurewicz",
    "verify-similarity",
    "render-julia",
    "render-locus",
    "trace-ray",
    "landing-check",
    "transversality",
)


@dataclass
class RunConfig:
    command: str = ""
    p: int = 1
    ell: int = 1
    m: int = 1
    seed_a: complex = 0j
    seed_v: complex = 0j
    r: float = 2.0
    resolution: int = 512
    k_min: int = 1
    k_max: int = 6
    max_iter: int = 500
    mu: int = 1
    theta: float = 0.0
    output_dir: str = "."
    certificate: str = ""
    s_start: float = 2.0
    s_end: float = 1e-5
    steps: int = 120
    s_ladder: str = "1e-1,1e-2,1e-3,1e-4"
    radius: float = 1e-3
    samples: int = 64

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown command {self.command!r}")
        for field in ("p", "ell", "m", "mu"):
            if getattr(self, field) < 1:
                raise ConfigError(f"{field}: must be >= 1")
        if self.r <= 0:
            raise ConfigError("r: window radius must be positive")
        if self.resolution < 2:
            raise ConfigError("resolution: must be >= 2")
        if not (0 <= self.k_min <= self.k_max):
            raise ConfigError("k_min/k_max: need 0 <= k_min <= k_max")
        if self.max_iter < 1:
            raise ConfigError("max_iter: must be >= 1")
        if not (self.s_start > self.s_end > 0):
            raise ConfigError("s_start/s_end: need s_start > s_end > 0")
        if self.steps < 2:
            raise ConfigError("steps: must be >= 2")
        if self.radius <= 0:
            raise ConfigError("radius: must be positive")
        if self.samples < 8:
            raise ConfigError("samples: must be >= 8")
        try:
            ladder = self.parsed_ladder()
        except ValueError as exc:
            raise ConfigError(f"s_ladder: {exc}") from exc
        if not ladder or any(b >= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigError("s_ladder: must be strictly decreasing")
        for field in ("seed_a", "seed_v"):
            z = getattr(self, field)
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise ConfigError(f"{field}: must be finite")

    def parsed_ladder(self) -> list:
        return [float(part) for part in self.s_ladder.split(",") if part.strip()]


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex value {text!r}") from exc


_FIELD_PARSERS = {
    "command": str,
    "p": int,
    "ell": int,
    "m": int,
    "seed_a": _parse_complex,
    "seed_v": _parse_complex,
    "r": float,
    "resolution": int,
    "k_min": int,
    "k_max": int,
    "max_iter": int,
    "mu": int,
    "theta": float,
    "output_dir": str,
    "certificate": str,
    "s_start": float,
    "s_end": float,
    "steps": int,
    "s_ladder": str,
    "radius": float,
    "samples": int,
}


def load_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="ascii") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
                key, _, value = line.partition("=")
                key = key.strip()
                if key not in _FIELD_PARSERS:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = _FIELD_PARSERS[key](value.strip())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        for key, value in load_config_file(args.config).items():
            setattr(cfg, key, value)
    for field in fields(RunConfig):
        if field.name == "command":
            continue
        flag = getattr(args, field.name, None)
        if flag is not None:
            setattr(cfg, field.name, _FIELD_PARSERS[field.name](flag))
    cfg.command = args.command
    cfg.validate()
    return cfg


def _fmt(value) -> str:
    if isinstance(value, complex):
        return f"{value.real:.17g} {value.imag:+.17g}i"
    return f"{value:.17g}"


def _write_text(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _load_certificate(cfg: RunConfig) -> curve.MisiurewiczCertificate:
    if not cfg.certificate:
        raise ConfigError("certificate: a certificate file is required for this command")
    try:
        with open(cfg.certificate, "r", encoding="ascii") as fh:
            return curve.certificate_from_json(fh.read())
    except OSError as exc:
        raise ConfigError(f"certificate: cannot read {cfg.certificate}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"certificate: {exc}") from exc


def cmd_find_misiurewicz(cfg: RunConfig) -> None:
    cert = curve.find_misiurewicz(cfg.p, cfg.ell, cfg.m, (cfg.seed_a, cfg.seed_v))
    F = cert.map
    res_eta = abs(curve.eta(F.a, F.v, cfg.p))
    orbit = [F.free_critical]
    for _ in range(cfg.ell + cfg.m):
        orbit.append(F(orbit[-1]))
    res_land = abs(orbit[cfg.ell + cfg.m] - orbit[cfg.ell])
    print(f"a = {_fmt(F.a)}")
    print(f"v = {_fmt(F.v)}")
    print(f"eta residual = {_fmt(res_eta)}")
    print(f"landing residual = {_fmt(res_land)}")
    print(f"a0 = {_fmt(cert.a0)}")
    print(f"lambda0 = {_fmt(cert.lambda0)}")
    print(f"A0 = {_fmt(cert.A0)}")
    print(f"B0 = {_fmt(cert.B0)}")
    print(f"Q = {_fmt(cert.Q)}")
    print(f"q = {_fmt(cert.q)}")
    out = os.path.join(cfg.output_dir, "certificate.json")
    _write_text(out, curve.certificate_to_json(cert))
    print(f"wrote {out}")


def cmd_verify_similarity(cfg: RunConfig) -> None:
    cert = _load_certificate(cfg)
    report, grids_by_name = similarity.run_similarity(
        cert, cfg.r, cfg.k_min, cfg.k_max, cfg.resolution, cfg.max_iter, keep_grids=True
    )
    outdir = cfg.output_dir
    for k in report.k_range:
        grids.write_pgm(grids_by_name["limit_model"],
                        os.path.join(outdir, f"limit_model_k{k}.pgm"))
        grids.write_pgm(grids_by_name[f"rescaled_julia_k{k}"],
                        os.path.join(outdir, f"rescaled_julia_k{k}.pgm"))
        name = f"rescaled_locus_k{k}"
        if name in grids_by_name:
            grids.write_pgm(grids_by_name[name], os.path.join(outdir, f"{name}.pgm"))
        else:
            print(f"rescaled_locus_k{k}: skipped (chart-domain guard)")
    _write_text(os.path.join(outdir, "report.csv"), report.to_csv())
    _write_text(os.path.join(outdir, "report_params.json"),
                report.params_json(cfg.max_iter))
    for k, dd, dp in zip(report.k_range, report.d_dyn, report.d_par):
        print(f"k={k} d_dyn={_fmt(dd)} d_par={_fmt(dp)}")
    print(f"cell_size = {_fmt(report.cell_size)}")
    print(f"wrote report.csv, report_params.json and PGMs under {outdir}")


def cmd_render_julia(cfg: RunConfig) -> None:
    F = CubicMap(cfg.seed_a, cfg.seed_v)
    g = grids.from_predicate(
        cfg.r,
        cfg.resolution,
        lambda Z: bounded_mask(F.a, F.v, Z, cfg.max_iter),
        vectorized=True,
    )
    out = os.path.join(cfg.output_dir, "julia.pgm")
    grids.write_pgm(g, out)
    print(f"wrote {out} ({int(g.bits.sum())} member cells)")


def cmd_render_locus(cfg: RunConfig) -> None:
    cert = _load_certificate(cfg)
    if cfg.r > cert.chart.domain_radius:
        raise GuardError(
            f"r = {cfg.r} exceeds the chart domain radius {cert.chart.domain_radius}"
        )
    xs = (np.arange(cfg.resolution) + 0.5) * (2.0 * cfg.r / cfg.resolution) - cfg.r
    T = xs[:, None] + 1j * xs[None, :]
    A, V = curve.chart_grid(cert.chart, T)
    bits = curve.locus_mask(A, V, cfg.max_iter)
    g = grids.GridSet(cfg.r, cfg.resolution, bits)
    out = os.path.join(cfg.output_dir, "locus.pgm")
    grids.write_pgm(g, out)
    print(f"wrote {out} ({int(g.bits.sum())} member cells)")


def cmd_trace_ray(cfg: RunConfig) -> None:
    F = CubicMap(cfg.seed_a, cfg.seed_v)
    trace = rays.trace_dynamic_ray(F, cfg.theta, cfg.s_start, cfg.s_end, cfg.steps)
    out = os.path.join(cfg.output_dir, "ray.csv")
    _write_text(out, trace.to_csv())
    print(f"landed = {trace.landed}")
    if trace.landing_estimate is not None:
        print(f"landing_estimate = {_fmt(trace.landing_estimate)}")
    print(f"wrote {out}")


def cmd_landing_check(cfg: RunConfig) -> None:
    cert = _load_certificate(cfg)
    report = rays.landing_check(cert, cfg.theta, cfg.mu, cfg.parsed_ladder())
    out = os.path.join(cfg.output_dir, "landing.csv")
    _write_text(out, report.to_csv())
    for s, t, ang in report.rows:
        print(f"s={_fmt(s)} t={_fmt(t)} angle={_fmt(ang)}")
    print(f"wrote {out}")


def cmd_transversality(cfg: RunConfig) -> None:
    cert = _load_certificate(cfg)
    winding = curve.transversality_winding(cert, cfg.radius, cfg.samples)
    print(f"winding = {winding}")
    out = os.path.join(cfg.output_dir, "winding.txt")
    _write_text(out, f"radius={cfg.radius:.17g}\nsamples={cfg.samples}\nwinding={winding}\n")
    print(f"wrote {out}")


_DISPATCH = {
    "find-misiurewicz": cmd_find_misiurewicz,
    "verify-similarity": cmd_verify_similarity,
    "render-julia": cmd_render_julia,
    "render-locus": cmd_render_locus,
    "trace-ray": cmd_trace_ray,
    "landing-check": cmd_landing_check,
    "transversality": cmd_transversality,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cubicsp",
        description="Misiurewicz maps and similarity experiments on the cubic curves S_p",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run {name.replace('-', ' ')}")
        p.add_argument("--config", help="flat key=value config file (flags win)")
        for field in fields(RunConfig):
            if field.name == "command":
                continue
            p.add_argument(f"--{field.name.replace('_', '-')}", dest=field.name)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        if cfg.output_dir:
            os.makedirs(cfg.output_dir, exist_ok=True)
        _DISPATCH[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GuardError as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (SolverError, CubicSPError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
