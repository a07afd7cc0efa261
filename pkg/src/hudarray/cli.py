"""
``hudarray`` command line.

Subcommands: generate, spectrum, radiate, parametric, tile, metrics, repro.
Angles on the command line and in output files are degrees.  Every
artifact is written together with ``<artifact>.provenance.json``.

Exit codes: 0 success, 1 compute failure, 2 usage or input error.  Errors
go to stderr as one JSON line ``{"error": ..., "message": ..., ...}``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .errors import ConvergenceError, HudArrayError, InvalidArgumentError, PatternParseError, SeparationError
from .export import read_directivity_csv, write_directivity_csv, write_json, write_sidecar, write_spectrum_csv
from .parametric import Atmosphere, ParametricSetup, default_attenuation, predict
from .pattern import (
    StealthyTargetSpec,
    generate_periodic,
    generate_random,
    generate_stealthy,
    load_pattern,
    save_pattern,
    tile,
)
from .radiation import (
    PistonElement,
    SteeringTarget,
    array_factor,
    cut_grid,
    exclusion_radius,
    hemisphere_grid,
    metrics,
    quantize_delays,
    steering_weights,
    total_directivity,
)
from .recipes import repro_recipes, run_recipe, write_artifacts
from .spectral import stealth_summary, structure_factor

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- helpers

def _config(args) -> RunConfig:
    base = load_config(args.config) if args.config else RunConfig()
    return base.updated(seed=getattr(args, "seed", None))


def _read_pattern(path):
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(str(p))
    return load_pattern(p)


def _out(path) -> Path:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _theta_exc(pattern, cfg: RunConfig, frequency: float) -> float:
    smap = structure_factor(pattern, cfg.n_max, method="separable")
    summary = stealth_summary(smap, pattern.n, cfg.zero_threshold)
    return exclusion_radius(summary.k_c, frequency, cfg.sound_speed)[0]


def _directivity(pattern, cfg, frequency, steer_theta_deg, steer_phi_deg, cut, isotropic,
                 piston_radius=None, quantize=None):
    target = SteeringTarget(math.radians(steer_theta_deg), math.radians(steer_phi_deg), frequency, cfg.sound_speed)
    weights = steering_weights(pattern, target)
    if quantize is not None:
        weights = quantize_delays(weights, frequency, quantize)
    if cut == "hemisphere":
        theta, phi = hemisphere_grid(cfg.hemisphere_step_deg)
    else:
        theta = cut_grid(cfg.theta_step_deg)
        phi = np.array([0.0 if cut == "azimuth" else math.pi / 2])
    if isotropic:
        return array_factor(pattern, weights, theta, phi, frequency, cfg.sound_speed)
    radius = cfg.piston_radius if piston_radius is None else piston_radius
    return total_directivity(pattern, weights, PistonElement(radius), theta, phi, frequency, cfg.sound_speed)


# ---------------------------------------------------------------- commands

def _sidecar(out, command, argv, params, cfg, inputs=()):
    params = dict(params, config=cfg.to_dict())
    return write_sidecar(out, command, argv, params, inputs)


def cmd_generate(args, argv):
    cfg = _config(args)
    report = None
    if args.kind == "periodic":
        side = int(round(math.sqrt(args.n if args.n else cfg.n_elements)))
        rows = args.rows or side
        cols = args.cols or side
        spacing = args.spacing or cfg.element_spacing
        pattern = generate_periodic(rows, cols, spacing, args.box)
        params = {"kind": "periodic", "rows": rows, "cols": cols, "spacing": spacing, "box": pattern.box_length}
    else:
        n = args.n or cfg.n_elements
        box = args.box or cfg.box_length
        if args.kind == "random":
            pattern = generate_random(n, box, cfg.seed)
            params = {"kind": "random", "n": n, "box": box, "seed": cfg.seed}
        else:
            min_sep = cfg.min_separation if args.min_sep is None else args.min_sep
            spec = StealthyTargetSpec(n, args.chi, box, min_sep, cfg.seed,
                                      args.tol or cfg.tolerance, args.max_iter or cfg.max_iterations,
                                      args.restarts or cfg.restarts)
            pattern, report = generate_stealthy(spec)
            params = {"kind": "hud", "n": n, "chi": args.chi, "box": box, "min_separation": min_sep,
                      "seed": cfg.seed, "tolerance": spec.tolerance, "max_iterations": spec.max_iterations,
                      "restarts": spec.restarts}
    out = _out(args.out)
    save_pattern(pattern, out)
    if report is not None:
        params["report"] = {k: (v.item() if isinstance(v, np.generic) else v) for k, v in vars(report).items()}
    _sidecar(out, "generate", argv, params, cfg)
    return [out]


def cmd_spectrum(args, argv):
    cfg = _config(args)
    pattern = _read_pattern(args.pattern)
    n_max = args.nmax or cfg.n_max
    smap = structure_factor(pattern, n_max, method=args.method)
    out = _out(args.out)
    write_spectrum_csv(smap, out)
    summary = stealth_summary(smap, pattern.n, cfg.zero_threshold)
    params = {"n_max": n_max, "method": args.method, "zero_threshold": cfg.zero_threshold,
              "summary": {"chi_achieved": summary.chi_achieved, "k_c": summary.k_c,
                          "m_constrained": summary.m_constrained, "max_s_inside": summary.max_s_inside}}
    _sidecar(out, "spectrum", argv, params, cfg, inputs=[args.pattern])
    return [out]


def cmd_radiate(args, argv):
    cfg = _config(args)
    pattern = _read_pattern(args.pattern)
    d = _directivity(pattern, cfg, args.freq, args.steer_theta, args.steer_phi, args.cut,
                     args.isotropic, args.piston_radius, args.quantize)
    out = _out(args.out)
    write_directivity_csv(d, out)
    params = {"frequency": args.freq, "steer_theta_deg": args.steer_theta, "steer_phi_deg": args.steer_phi,
              "quantize": args.quantize, "cut": args.cut, "isotropic": args.isotropic,
              "piston_radius": None if args.isotropic else (args.piston_radius or cfg.piston_radius),
              "sound_speed": cfg.sound_speed}
    _sidecar(out, "radiate", argv, params, cfg, inputs=[args.pattern])
    written = [out]
    if args.metrics_out:
        theta_exc = _theta_exc(pattern, cfg, args.freq)
        m = metrics(d, (math.radians(args.steer_theta), math.radians(args.steer_phi)), theta_exc=theta_exc)
        mout = _out(args.metrics_out)
        write_json(m.to_dict(), mout)
        _sidecar(mout, "radiate", argv, params, cfg, inputs=[args.pattern])
        written.append(mout)
    return written


def cmd_parametric(args, argv):
    cfg = _config(args)
    atm = Atmosphere(cfg.temperature_c, cfg.relative_humidity)
    setup = ParametricSetup(args.f1, args.f2,
                            default_attenuation(args.f1, atm, args.alpha1),
                            default_attenuation(args.f2, atm, args.alpha2),
                            cfg.sound_speed, args.model)
    inputs = []
    if args.pattern:
        pattern = _read_pattern(args.pattern)
        d1 = _directivity(pattern, cfg, args.f1, args.steer_theta, 0.0, "azimuth", args.isotropic)
        d2 = _directivity(pattern, cfg, args.f2, args.steer_theta, 0.0, "azimuth", args.isotropic)
        inputs.append(args.pattern)
    else:
        if not (args.d1 and args.d2):
            raise UsageError("give --pattern or both --d1 and --d2")
        for p in (args.d1, args.d2):
            if not Path(p).is_file():
                raise FileNotFoundError(p)
        d1 = read_directivity_csv(args.d1, args.f1)
        d2 = read_directivity_csv(args.d2, args.f2)
        inputs += [args.d1, args.d2]
    pred = predict(d1, d2, setup)
    out = _out(args.out)
    write_directivity_csv(pred.cut, out)
    params = {"f1": setup.f1, "f2": setup.f2, "alpha1": setup.alpha1, "alpha2": setup.alpha2,
              "difference_frequency": setup.difference_frequency, "model": setup.model,
              "steer_theta_deg": args.steer_theta, "isotropic": args.isotropic,
              "sound_speed": setup.sound_speed}
    _sidecar(out, "parametric", argv, params, cfg, inputs=inputs)
    return [out]


def cmd_tile(args, argv):
    cfg = _config(args)
    pattern = _read_pattern(args.pattern)
    big = tile(pattern, args.reps_x, args.reps_y)
    out = _out(args.out)
    save_pattern(big, out)
    _sidecar(out, "tile", argv, {"reps_x": args.reps_x, "reps_y": args.reps_y}, cfg, inputs=[args.pattern])
    return [out]


def cmd_metrics(args, argv):
    cfg = _config(args)
    if not Path(args.directivity).is_file():
        raise FileNotFoundError(args.directivity)
    d = read_directivity_csv(args.directivity, args.freq if args.freq else float("nan"))
    inputs = [args.directivity]
    theta_exc = None
    if args.theta_exc is not None:
        theta_exc = math.radians(args.theta_exc)
    elif args.pattern:
        if not args.freq:
            raise UsageError("--pattern needs --freq to derive the exclusion angle")
        theta_exc = _theta_exc(_read_pattern(args.pattern), cfg, args.freq)
        inputs.append(args.pattern)
    m = metrics(d, (math.radians(args.main_theta), math.radians(args.main_phi)), theta_exc=theta_exc)
    out = _out(args.out)
    write_json(m.to_dict(), out)
    params = {"main_theta_deg": args.main_theta, "main_phi_deg": args.main_phi,
              "theta_exc_deg": None if theta_exc is None else math.degrees(theta_exc)}
    _sidecar(out, "metrics", argv, params, cfg, inputs=inputs)
    return [out]


def cmd_repro(args, argv):
    if args.list or not args.recipe:
        print("\n".join(repro_recipes()))
        return []
    cfg = _config(args)
    out_dir = args.out_dir or cfg.output_dir
    return write_artifacts(run_recipe(args.recipe, cfg), out_dir, "repro", argv, cfg)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="INI run configuration; flags override it")

    parser = _Parser(prog="hudarray", description="Stealthy hyperuniform transducer array toolkit.")
    parser.add_argument("--version", action="version", version=f"hudarray {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], help="write a point pattern")
    g.add_argument("--kind", choices=("periodic", "random", "hud"), required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--chi", type=float, default=0.5)
    g.add_argument("--box", type=float, help="box side in meters")
    g.add_argument("--min-sep", type=float, help="minimum separation in meters")
    g.add_argument("--seed", type=int)
    g.add_argument("--rows", type=int)
    g.add_argument("--cols", type=int)
    g.add_argument("--spacing", type=float)
    g.add_argument("--tol", type=float)
    g.add_argument("--max-iter", type=int)
    g.add_argument("--restarts", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("spectrum", parents=[common], help="structure factor map")
    s.add_argument("--pattern", required=True)
    s.add_argument("--nmax", type=int)
    s.add_argument("--method", choices=("direct", "separable"), default="direct")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_spectrum)

    r = sub.add_parser("radiate", parents=[common], help="far-field directivity")
    r.add_argument("--pattern", required=True)
    r.add_argument("--freq", type=float, required=True)
    r.add_argument("--steer-theta", type=float, default=0.0)
    r.add_argument("--steer-phi", type=float, default=0.0)
    r.add_argument("--quantize", type=float, help="delay resolution in seconds")
    r.add_argument("--cut", choices=("azimuth", "elevation", "hemisphere"), default="azimuth")
    r.add_argument("--piston-radius", type=float)
    r.add_argument("--isotropic", action="store_true", help="array factor only")
    r.add_argument("--out", required=True)
    r.add_argument("--metrics-out")
    r.set_defaults(func=cmd_radiate)

    p = sub.add_parser("parametric", parents=[common], help="secondary-beam prediction")
    p.add_argument("--pattern")
    p.add_argument("--d1")
    p.add_argument("--d2")
    p.add_argument("--f1", type=float, required=True)
    p.add_argument("--f2", type=float, required=True)
    p.add_argument("--steer-theta", type=float, default=0.0)
    p.add_argument("--model", choices=("product", "convolution"), default="convolution")
    p.add_argument("--alpha1", type=float, help="Np/m")
    p.add_argument("--alpha2", type=float, help="Np/m")
    p.add_argument("--isotropic", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_parametric)

    t = sub.add_parser("tile", parents=[common], help="replicate a pattern on a lattice")
    t.add_argument("--pattern", required=True)
    t.add_argument("--reps-x", type=int, default=2)
    t.add_argument("--reps-y", type=int, default=2)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_tile)

    m = sub.add_parser("metrics", parents=[common], help="PSLL, exclusion floor and beamwidth of a directivity CSV")
    m.add_argument("--directivity", required=True)
    m.add_argument("--main-theta", type=float, default=0.0)
    m.add_argument("--main-phi", type=float, default=0.0)
    m.add_argument("--theta-exc", type=float)
    m.add_argument("--pattern")
    m.add_argument("--freq", type=float)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_metrics)

    rp = sub.add_parser("repro", parents=[common], help="regenerate figure data")
    rp.add_argument("recipe", nargs="?")
    rp.add_argument("--list", action="store_true")
    rp.add_argument("--seed", type=int)
    rp.add_argument("--out-dir")
    rp.set_defaults(func=cmd_repro)
    return parser


def _fail(kind, message, code, **extra):
    record = {"error": kind, "message": message, "exit_code": code, **extra}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        args.func(args, argv)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except FileNotFoundError as exc:
        path = exc.filename or (exc.args[0] if exc.args else "")
        return _fail("file_not_found", f"no such file: {path}", EXIT_USAGE, path=str(path))
    except PatternParseError as exc:
        return _fail("parse", str(exc), EXIT_USAGE, line=exc.line)
    except (ConvergenceError, SeparationError) as exc:
        return _fail("compute", str(exc), EXIT_COMPUTE)
    except (InvalidArgumentError, ValueError) as exc:
        return _fail("invalid_argument", str(exc), EXIT_USAGE)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_USAGE, path=str(exc.filename or ""))
    except HudArrayError as exc:
        return _fail("compute", str(exc), EXIT_COMPUTE)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
