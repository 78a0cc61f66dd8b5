"""Command-line front end.

Subcommands evaluate kernels and closed-form densities, run the Monte Carlo
experiments, and write self-describing artifacts:

    curve.csv          r_lo, r_hi, empirical, std_err, theory, z_score
    summary.json       config echo + results; byte-identical across reruns
                       with the same config and seed (no timestamps inside)
    plot.svg           empirical points with error bars over the theory curve
    run_manifest.json  command, timestamps, file list; written last as the
                       completion marker

Exit codes: 0 success, 1 error, 2 acceptance-threshold failure, 64 usage.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ._version import __version__
from .densities import (
    FsRadialBump,
    conditional_density_finiteN,
    kappa_cond,
    limit_density_kkm,
)
from .ensembles import EnsembleSpec
from .experiments import ExperimentConfig, ExperimentResult, run_experiment
from .kernels import conditional_kernel_diag, kernel_eval

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_THRESHOLD = 2
EXIT_USAGE = 64

MODEL_ALIASES = {"cp1": "projective_line", "projective_line": "projective_line",
                 "bf": "bargmann_fock", "bargmann_fock": "bargmann_fock"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"cannot parse complex number from {text!r}")


def _parse_grid(text: str):
    lo, hi, step = (float(x) for x in text.split(":"))
    n = int(round((hi - lo) / step))
    return np.linspace(lo, lo + n * step, n + 1)


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------


@dataclass
class RunManifest:
    command: str
    config_path: str
    master_seed: int
    output_dir: str
    started_at: str
    finished_at: str
    version: str
    files: list


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _json_safe(obj):
    """Recursively replace non-finite floats with null (no NaN/Inf tokens)."""
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(float(obj)) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_json_safe(v) for v in obj.tolist()]
    return obj


def _curve_rows(result: ExperimentResult):
    curve = result.curve
    rows = []
    for i in range(curve.n_bins):
        empty = curve.samples_per_bin[i] == 0
        rows.append({
            "r_lo": _fmt(curve.bin_edges[i]),
            "r_hi": _fmt(curve.bin_edges[i + 1]),
            "empirical": "" if empty else _fmt(curve.value[i]),
            "std_err": "" if empty else _fmt(curve.std_err[i]),
            "theory": _fmt(result.theory[i]),
            "z_score": "" if empty else _fmt(result.z_scores[i]),
        })
    return rows


def summary_payload(result: ExperimentResult) -> dict:
    """Deterministic summary content (excludes wall-clock data)."""
    payload = {
        "experiment": result.experiment,
        "master_seed": result.config["master_seed"],
        "config": result.config,
        "passed": result.passed,
        "max_abs_z_score": result.max_abs_z_score,
        "scalars": result.scalars,
        "version": result.version,
        "backend": result.backend,
    }
    if result.curve is not None:
        payload["curve"] = {
            "bin_edges": [_fmt(x) for x in result.curve.bin_edges],
            "empirical": [None if n == 0 else _fmt(v) for v, n in
                          zip(result.curve.value, result.curve.samples_per_bin)],
            "std_err": [None if n == 0 else _fmt(v) for v, n in
                        zip(result.curve.std_err, result.curve.samples_per_bin)],
            "theory": [_fmt(x) for x in result.theory],
            "samples_per_bin": [int(n) for n in result.curve.samples_per_bin],
        }
    return _json_safe(payload)


def write_outputs(result: ExperimentResult, out_dir, command: str = "",
                  started_at: str = "", log_y: bool = False,
                  config_path: str = "") -> RunManifest:
    """Write curve.csv / summary.json / plot.svg plus the manifest.

    The manifest is written last (atomic completion marker); partial files
    are removed if any write fails.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        if result.curve is not None:
            csv_path = out / "curve.csv"
            with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("r_lo,r_hi,empirical,std_err,theory,z_score\n")
                for row in _curve_rows(result):
                    fh.write(",".join(row[k] for k in
                                      ("r_lo", "r_hi", "empirical", "std_err",
                                       "theory", "z_score")) + "\n")
            written.append(csv_path)

            svg_path = out / "plot.svg"
            with open(svg_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(_svg_plot(result, log_y=log_y))
            written.append(svg_path)

        summary_path = out / "summary.json"
        with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(summary_payload(result), fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(summary_path)

        manifest = RunManifest(
            command=command,
            config_path=config_path,
            master_seed=result.config["master_seed"],
            output_dir=str(out),
            started_at=started_at,
            finished_at=datetime.now(timezone.utc).isoformat(),
            version=result.version,
            files=[p.name for p in written] + ["run_manifest.json"],
        )
        manifest_path = out / "run_manifest.json"
        with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(manifest.__dict__, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return manifest
    except OSError:
        for p in written:
            try:
                p.unlink()
            except OSError:
                pass
        raise


# ---------------------------------------------------------------------------
# SVG plot (no plotting dependency; reviewable in any browser)
# ---------------------------------------------------------------------------

_W, _H = 720, 480
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _svg_plot(result: ExperimentResult, log_y: bool = False) -> str:
    curve = result.curve
    centers = curve.centers
    filled = curve.samples_per_bin > 0
    ys = [result.theory]
    if filled.any():
        ys.append(curve.value[filled] - curve.std_err[filled])
        ys.append(curve.value[filled] + curve.std_err[filled])
    yall = np.concatenate([np.atleast_1d(y) for y in ys])
    if log_y:
        yall = yall[yall > 0]
    ylo, yhi = float(yall.min()), float(yall.max())
    if log_y:
        ylo, yhi = math.log10(ylo), math.log10(yhi)
    pad = 0.05 * (yhi - ylo or 1.0)
    ylo, yhi = ylo - pad, yhi + pad
    xlo, xhi = float(curve.bin_edges[0]), float(curve.bin_edges[-1])

    def sx(x):
        return _ML + (_W - _ML - _MR) * (x - xlo) / (xhi - xlo)

    def sy(y):
        v = math.log10(y) if log_y else y
        return _H - _MB - (_H - _MT - _MB) * (v - ylo) / (yhi - ylo)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W/2:.0f}" y="18" text-anchor="middle" font-size="14">'
        f'{result.experiment} (seed {result.config["master_seed"]})</text>',
        f'<line x1="{_ML}" y1="{_H-_MB}" x2="{_W-_MR}" y2="{_H-_MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H-_MB}" stroke="black"/>',
    ]
    for k in range(6):
        x = xlo + (xhi - xlo) * k / 5
        parts.append(f'<line x1="{sx(x):.1f}" y1="{_H-_MB}" x2="{sx(x):.1f}" '
                     f'y2="{_H-_MB+5}" stroke="black"/>')
        parts.append(f'<text x="{sx(x):.1f}" y="{_H-_MB+20}" text-anchor="middle" '
                     f'font-size="11">{x:.3g}</text>')
        v = ylo + (yhi - ylo) * k / 5
        yv = 10 ** v if log_y else v
        ypix = _H - _MB - (_H - _MT - _MB) * k / 5
        parts.append(f'<line x1="{_ML-5}" y1="{ypix:.1f}" x2="{_ML}" '
                     f'y2="{ypix:.1f}" stroke="black"/>')
        parts.append(f'<text x="{_ML-8}" y="{ypix+4:.1f}" text-anchor="end" '
                     f'font-size="11">{yv:.3g}</text>')
    parts.append(f'<text x="{_W/2:.0f}" y="{_H-12}" text-anchor="middle" '
                 f'font-size="12">scaled radius r</text>')

    pts = " ".join(f"{sx(c):.2f},{sy(t):.2f}" for c, t in zip(centers, result.theory))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="2"/>')
    for c, v, e, n in zip(centers, curve.value, curve.std_err, curve.samples_per_bin):
        if n == 0:
            continue
        if log_y and v <= 0:
            continue
        x = sx(c)
        lo = max(v - e, 1e-300) if log_y else v - e
        parts.append(f'<line x1="{x:.2f}" y1="{sy(lo):.2f}" x2="{x:.2f}" '
                     f'y2="{sy(v+e):.2f}" stroke="#d62728" stroke-width="1"/>')
        parts.append(f'<circle cx="{x:.2f}" cy="{sy(v):.2f}" r="3" fill="#d62728"/>')
    parts.append("</svg>\n")
    return "\n".join(parts)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_kernel(args) -> int:
    spec = EnsembleSpec(MODEL_ALIASES[args.model], args.N)
    ke = kernel_eval(spec, args.z, args.w)
    out = {
        "model": spec.model,
        "degree": spec.degree,
        "p_n": ke.p_n,
        "lambda_n": None if math.isinf(ke.lambda_n) else ke.lambda_n,
        "pi_norm": ke.pi_norm,
    }
    if args.points:
        pts = [_parse_complex(p) for p in args.points.split(";")]
        out["conditional_diag_at_z"] = conditional_kernel_diag(spec, pts, args.z)
    print(json.dumps(_json_safe(out), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_density(args) -> int:
    grid = _parse_grid(args.r_grid)
    lines = []
    if args.mode == "kappa-cond":
        lines.append("r,kappa")
        for r in grid:
            lines.append(f"{_fmt(r)},{_fmt(kappa_cond(args.m, max(r, 1e-300)))}")
    elif args.mode == "kkm":
        lines.append("r,density")
        for r in grid:
            lines.append(f"{_fmt(r)},{_fmt(limit_density_kkm(args.m, args.k, max(r, 1e-300)))}")
    else:  # finite-n
        spec = EnsembleSpec(MODEL_ALIASES[args.model], args.N)
        p = args.p
        if spec.is_projective and p != 0:
            raise ValueError("finite-n density radial grid requires p = 0 on "
                             "the projective line (the law is rotation invariant)")
        lines.append("r,density,density_scaled")
        for r in grid:
            if r <= 0:
                continue
            if spec.is_projective:
                z = math.tan(r / math.sqrt(spec.degree))
                dens = conditional_density_finiteN(spec, 0.0, z)
                scaled = dens * math.pi / spec.degree
            else:
                dens = conditional_density_finiteN(spec, p, p + r)
                scaled = dens * math.pi
            lines.append(f"{_fmt(r)},{_fmt(dens)},{_fmt(scaled)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _experiment_config(args, experiment: str) -> ExperimentConfig:
    kwargs = dict(
        experiment=experiment,
        model=MODEL_ALIASES[args.model],
        trials=args.trials,
        master_seed=args.seed,
        base_point=args.p,
        batch_size=args.batch_size,
    )
    if getattr(args, "N", None) is not None:
        kwargs["degree"] = args.N
    if getattr(args, "bins", None):
        lo, hi, n = args.bins.split(":")
        kwargs.update(r_min=float(lo), r_max=float(hi), n_bins=int(n))
    if getattr(args, "window_scale", None) is not None:
        kwargs["window_scale"] = args.window_scale
    if getattr(args, "bump_radius", None) is not None:
        kwargs["bump_radius"] = args.bump_radius
    if getattr(args, "n_sweep", None):
        kwargs["n_sweep"] = tuple(int(x) for x in args.n_sweep.split(","))
    if getattr(args, "multi_point", False):
        kwargs["multi_point"] = True
    if getattr(args, "joint_n", None) is not None:
        kwargs["joint_n"] = args.joint_n
    if getattr(args, "eps", None) is not None:
        kwargs["joint_eps"] = args.eps
    return ExperimentConfig(**kwargs)


def _cmd_experiment(args, experiment: str) -> int:
    started = datetime.now(timezone.utc).isoformat()
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            cfg = ExperimentConfig.from_dict(json.load(fh))
        if cfg.experiment != experiment:
            raise ValueError(f"config file is for {cfg.experiment!r}, "
                             f"not {experiment!r}")
    else:
        cfg = _experiment_config(args, experiment)
    result = run_experiment(cfg)
    if args.out:
        write_outputs(result, args.out, command=" ".join(sys.argv[1:]),
                      started_at=started, log_y=getattr(args, "log_y", False),
                      config_path=getattr(args, "config", None) or "")
    brief = {
        "experiment": result.experiment,
        "passed": result.passed,
        "max_abs_z_score": result.max_abs_z_score,
        "runtime_seconds": round(result.runtime_seconds, 3),
        "backend": result.backend,
        "out": args.out or None,
    }
    print(json.dumps(_json_safe(brief), indent=2, sort_keys=True))
    return EXIT_OK if result.passed else EXIT_THRESHOLD


def _cmd_selftest(args) -> int:
    from . import selftest

    failures = selftest.run(verbose=True)
    return EXIT_OK if failures == 0 else EXIT_THRESHOLD


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="zerocond",
                     description="Conditional zero statistics of Gaussian "
                                 "random polynomials: kernels, densities, "
                                 "Monte Carlo verification.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_bins=True):
        p.add_argument("--config", default=None,
                       help="flat JSON config file (overrides tuning flags)")
        p.add_argument("--model", default="cp1", choices=sorted(MODEL_ALIASES))
        p.add_argument("--N", type=int, default=None, help="degree/truncation")
        p.add_argument("--trials", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=7, dest="seed")
        p.add_argument("--p", type=_parse_complex, default=0j,
                       help="base point, 're,im'")
        p.add_argument("--batch-size", type=int, default=512)
        p.add_argument("--out", default=None, help="output directory")
        if with_bins:
            p.add_argument("--bins", default=None, help="rmin:rmax:nbins")
            p.add_argument("--log-y", action="store_true")

    p = sub.add_parser("kernel", help="evaluate P_N / Lambda_N / conditional kernel")
    p.add_argument("--model", default="cp1", choices=sorted(MODEL_ALIASES))
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--z", type=_parse_complex, required=True)
    p.add_argument("--w", type=_parse_complex, required=True)
    p.add_argument("--points", default=None,
                   help="conditioning points for the downdated diagonal, "
                        "semicolon-separated 're,im' pairs")
    p.set_defaults(func=_cmd_kernel)

    p = sub.add_parser("density", help="emit closed-form densities as CSV")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--kappa-cond", dest="mode", action="store_const",
                      const="kappa-cond")
    mode.add_argument("--kkm", dest="mode", action="store_const", const="kkm")
    mode.add_argument("--finite-n", dest="mode", action="store_const",
                      const="finite-n")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--model", default="cp1", choices=sorted(MODEL_ALIASES))
    p.add_argument("--p", type=_parse_complex, default=0j)
    p.add_argument("--r-grid", default="0.1:3:0.1")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("cond-density", help="scaled conditional density experiment")
    add_common(p)
    p.set_defaults(func=lambda a: _cmd_experiment(a, "cond_density"))

    p = sub.add_parser("pair-corr", help="pair correlation experiment")
    add_common(p)
    p.add_argument("--window-scale", type=float, default=None)
    p.set_defaults(func=lambda a: _cmd_experiment(a, "pair_corr"))

    p = sub.add_parser("unscaled-sweep", help="degree-correction law sweep")
    add_common(p, with_bins=False)
    p.add_argument("--n-sweep", default="50,100,200,400")
    p.add_argument("--bump-radius", type=float, default=None)
    p.add_argument("--multi-point", action="store_true")
    p.set_defaults(func=lambda a: _cmd_experiment(a, "unscaled_sweep"))

    p = sub.add_parser("variance-check", help="variance vs bipotential quadrature")
    add_common(p, with_bins=False)
    p.add_argument("--bump-radius", type=float, default=None)
    p.set_defaults(func=lambda a: _cmd_experiment(a, "variance_check"))

    p = sub.add_parser("joint-density", help="small-N joint density ratios")
    add_common(p, with_bins=False)
    p.add_argument("--joint-n", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.set_defaults(func=lambda a: _cmd_experiment(a, "joint_density_small_n"))

    p = sub.add_parser("selftest", help="run the fast invariant suite")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
