"""
Named pipelines that regenerate the data behind each figure.

Each recipe is a plain composition of the public operations and returns
a list of :class:`Artifact` records; :func:`write_artifacts` turns them
into files with provenance sidecars.  All parameters come from a
:class:`~hudarray.config.RunConfig`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .config import RunConfig
from .export import write_directivity_csv, write_json, write_sidecar, write_spectrum_csv
from .parametric import Atmosphere, ParametricSetup, convolution_model, default_attenuation, product_model
from .pattern import (
    PointPattern,
    StealthyTargetSpec,
    generate_periodic,
    generate_random,
    generate_stealthy,
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
    measured_exclusion_angle,
    metrics,
    spacing_frequency,
    steering_weights,
    total_directivity,
)
from .spectral import stealth_summary, structure_factor

CHI_SWEEP = (0.1, 0.2, 0.3, 0.4, 0.5)
PAIRS = ((40e3, 39e3), (40e3, 41e3))


@dataclass
class Artifact:
    name: str
    kind: str  # pattern | spectrum | directivity | json
    payload: object
    parameters: dict = field(default_factory=dict)


# ---------------------------------------------------------------- building blocks

@lru_cache(maxsize=16)
def _stealthy(n, chi, box, min_sep, seed, tol, max_iter, restarts):
    return generate_stealthy(StealthyTargetSpec(n, chi, box, min_sep, seed, tol, max_iter, restarts))


def hud_pattern(config: RunConfig, chi: float = 0.5, min_separation: float | None = None) -> PointPattern:
    """Stealthy layout at the configured scale (cached per parameter set)."""
    sep = config.min_separation if min_separation is None else min_separation
    pattern, _ = _stealthy(config.n_elements, chi, config.box_length, sep, config.seed,
                           config.tolerance, config.max_iterations, config.restarts)
    return pattern


def periodic_pattern(config: RunConfig) -> PointPattern:
    side = int(round(math.sqrt(config.n_elements)))
    return generate_periodic(side, side, config.element_spacing)


def random_pattern(config: RunConfig) -> PointPattern:
    return generate_random(config.n_elements, config.box_length, config.seed)


def element(config: RunConfig) -> PistonElement:
    return PistonElement(config.piston_radius)


def azimuth_cut(pattern, config, frequency, steer_deg=0.0, piston=True, weights=None):
    theta = cut_grid(config.theta_step_deg)
    phi = np.array([0.0])
    if weights is None:
        target = SteeringTarget(math.radians(steer_deg), 0.0, frequency, config.sound_speed)
        weights = steering_weights(pattern, target)
    if piston:
        return total_directivity(pattern, weights, element(config), theta, phi, frequency, config.sound_speed)
    return array_factor(pattern, weights, theta, phi, frequency, config.sound_speed)


def hemisphere_map(pattern, config, frequency, steer_deg=0.0):
    theta, phi = hemisphere_grid(config.hemisphere_step_deg)
    target = SteeringTarget(math.radians(steer_deg), 0.0, frequency, config.sound_speed)
    return array_factor(pattern, steering_weights(pattern, target), theta, phi, frequency, config.sound_speed)


def theta_exc_for(pattern, config, frequency):
    smap = structure_factor(pattern, config.n_max, method="separable")
    summary = stealth_summary(smap, pattern.n, config.zero_threshold)
    return exclusion_radius(summary.k_c, frequency, config.sound_speed)[0], summary


def parametric_setup(config, f1, f2, model="convolution"):
    atm = Atmosphere(config.temperature_c, config.relative_humidity)
    return ParametricSetup(f1, f2, default_attenuation(f1, atm), default_attenuation(f2, atm),
                           config.sound_speed, model)


def secondary(pattern, config, f1, f2, steer_deg=0.0, model="convolution", piston=True):
    """Secondary-beam cut from simulated primaries (piston elements unless ``piston`` is False)."""
    d1 = azimuth_cut(pattern, config, f1, steer_deg, piston)
    d2 = azimuth_cut(pattern, config, f2, steer_deg, piston)
    if model == "product":
        return product_model(d1, d2)
    return convolution_model(d1, d2, parametric_setup(config, f1, f2, model))


def _metrics_json(pattern, cut, config, steer_deg, frequency):
    theta_exc, _ = theta_exc_for(pattern, config, frequency)
    m = metrics(cut, (math.radians(steer_deg), 0.0), theta_exc=theta_exc)
    return m.to_dict()


# ---------------------------------------------------------------- recipes

def fig1(config: RunConfig, panels=("a", "b", "c", "d", "e")):
    layouts = {"hud": hud_pattern(config), "periodic": periodic_pattern(config), "random": random_pattern(config)}
    f0 = spacing_frequency(layouts["hud"], config.sound_speed)
    out = []
    for name, p in layouts.items():
        if "a" in panels:
            out.append(Artifact(f"fig1a_{name}_pattern.txt", "pattern", p, {"layout": name}))
        if "b" in panels:
            out.append(Artifact(f"fig1b_{name}_spectrum.csv", "spectrum",
                                structure_factor(p, config.n_max, method="separable"), {"n_max": config.n_max}))
        if "c" in panels:
            out.append(Artifact(f"fig1c_{name}_af_f0.csv", "directivity", hemisphere_map(p, config, f0),
                                {"frequency": f0}))
        if "d" in panels:
            out.append(Artifact(f"fig1d_{name}_af_3f0.csv", "directivity", hemisphere_map(p, config, 3 * f0),
                                {"frequency": 3 * f0}))
        if "e" in panels:
            out.append(Artifact(f"fig1e_{name}_af_3f0_steer30.csv", "directivity",
                                hemisphere_map(p, config, 3 * f0, 30.0), {"frequency": 3 * f0, "steer_theta_deg": 30.0}))
    return out


def fig4_primary(config: RunConfig, layout: str):
    pattern = hud_pattern(config) if layout == "hud" else periodic_pattern(config)
    panel = "fig4b" if layout == "hud" else "fig4a"
    out = []
    summary = {}
    for f in (39e3, 40e3, 41e3):
        cut = azimuth_cut(pattern, config, f)
        out.append(Artifact(f"{panel}_{layout}_{f / 1e3:g}kHz.csv", "directivity", cut, {"frequency": f}))
        summary[f"{f / 1e3:g}kHz"] = _metrics_json(pattern, cut, config, 0.0, f)
    out.append(Artifact(f"{panel}_{layout}_metrics.json", "json", summary, {}))
    return out


def fig_secondary(config: RunConfig, steer_list, prefix):
    out = []
    for layout in ("periodic", "hud"):
        pattern = hud_pattern(config) if layout == "hud" else periodic_pattern(config)
        for steer in steer_list:
            for f1, f2 in PAIRS:
                for model in ("product", "convolution"):
                    pred = secondary(pattern, config, f1, f2, steer, model)
                    setup = parametric_setup(config, f1, f2, model)
                    params = {"f1": f1, "f2": f2, "model": model, "steer_theta_deg": steer,
                              "alpha1": setup.alpha1, "alpha2": setup.alpha2}
                    name = f"{prefix}_{layout}_steer{steer:g}_{f1 / 1e3:g}-{f2 / 1e3:g}kHz_{model}.csv"
                    out.append(Artifact(name, "directivity", pred.cut, params))
    return out


def fig6(config: RunConfig):
    sub = hud_pattern(config)
    big = tile(sub, 2, 2)
    f = config.design_frequency
    theta_exc, _ = theta_exc_for(sub, config, f)
    out = [Artifact("fig6_large_pattern.txt", "pattern", big, {"reps": 2})]
    summary = {}
    for steer in (0.0, 30.0):
        for name, p in (("sub", sub), ("large", big)):
            cut = azimuth_cut(p, config, f, steer)
            out.append(Artifact(f"fig6_{name}_steer{steer:g}.csv", "directivity", cut,
                                {"frequency": f, "steer_theta_deg": steer}))
            summary[f"{name}_steer{steer:g}"] = metrics(cut, (math.radians(steer), 0.0), theta_exc=theta_exc).to_dict()
    out.append(Artifact("fig6_metrics.json", "json", summary, {}))
    return out


def fig7(config: RunConfig):
    out = []
    f = config.design_frequency
    table = {}
    for chi in CHI_SWEEP:
        # the sweep studies the pure stealthy family, so no hard core
        p = hud_pattern(config, chi, min_separation=0.0)
        tag = f"chi{chi:g}"
        theta_exc, summary = theta_exc_for(p, config, f)
        out.append(Artifact(f"fig7_{tag}_pattern.txt", "pattern", p, {"chi": chi}))
        out.append(Artifact(f"fig7_{tag}_spectrum.csv", "spectrum",
                            structure_factor(p, config.n_max, method="separable"), {"chi": chi}))
        out.append(Artifact(f"fig7_{tag}_af.csv", "directivity", hemisphere_map(p, config, f), {"chi": chi, "frequency": f}))
        table[tag] = {
            "chi_achieved": summary.chi_achieved,
            "k_c": summary.k_c,
            "theta_exc_predicted_deg": math.degrees(theta_exc),
            "theta_exc_measured_deg": math.degrees(measured_exclusion_angle(p, f, config.sound_speed)),
        }
    out.append(Artifact("fig7_summary.json", "json", table, {}))
    return out


def fig8(config: RunConfig):
    out = []
    summary = {}
    for layout in ("periodic", "hud"):
        pattern = hud_pattern(config) if layout == "hud" else periodic_pattern(config)
        for f in (30e3, 40e3):
            cut = azimuth_cut(pattern, config, f)
            out.append(Artifact(f"fig8_{layout}_{f / 1e3:g}kHz.csv", "directivity", cut, {"frequency": f}))
            summary[f"{layout}_{f / 1e3:g}kHz"] = _metrics_json(pattern, cut, config, 0.0, f)
    out.append(Artifact("fig8_metrics.json", "json", summary, {}))
    return out


def fig9(config: RunConfig):
    out = []
    summary = {}
    f = config.design_frequency
    for layout in ("periodic", "hud"):
        pattern = hud_pattern(config) if layout == "hud" else periodic_pattern(config)
        for steer in (15.0, 30.0):
            cut = azimuth_cut(pattern, config, f, steer)
            out.append(Artifact(f"fig9_{layout}_steer{steer:g}.csv", "directivity", cut,
                                {"frequency": f, "steer_theta_deg": steer}))
            summary[f"{layout}_steer{steer:g}"] = _metrics_json(pattern, cut, config, steer, f)
    out.append(Artifact("fig9_metrics.json", "json", summary, {}))
    return out


RECIPES = {
    "fig1": lambda c: fig1(c),
    "fig1a": lambda c: fig1(c, ("a",)),
    "fig1b": lambda c: fig1(c, ("b",)),
    "fig1c": lambda c: fig1(c, ("c",)),
    "fig1d": lambda c: fig1(c, ("d",)),
    "fig1e": lambda c: fig1(c, ("e",)),
    "fig4a": lambda c: fig4_primary(c, "periodic"),
    "fig4b": lambda c: fig4_primary(c, "hud"),
    "fig4cd": lambda c: fig_secondary(c, (0.0,), "fig4cd"),
    "fig5": lambda c: fig_secondary(c, (15.0, 30.0), "fig5"),
    "fig6": fig6,
    "fig7": fig7,
    "fig8": fig8,
    "fig9": fig9,
}


def repro_recipes() -> list[str]:
    return sorted(RECIPES)


def run_recipe(name: str, config: RunConfig) -> list[Artifact]:
    try:
        recipe = RECIPES[name]
    except KeyError:
        from .errors import InvalidArgumentError

        raise InvalidArgumentError(f"unknown recipe {name!r}; choose from {', '.join(repro_recipes())}") from None
    return recipe(config)


def write_artifacts(artifacts, out_dir, command: str, argv, config: RunConfig) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for art in artifacts:
        path = out_dir / art.name
        if art.kind == "pattern":
            save_pattern(art.payload, path)
        elif art.kind == "spectrum":
            write_spectrum_csv(art.payload, path)
        elif art.kind == "directivity":
            write_directivity_csv(art.payload, path)
        else:
            write_json(art.payload, path)
        params = dict(art.parameters)
        params["config"] = config.to_dict()
        write_sidecar(path, command, argv, params)
        written.append(path)
    return written
