"""
Grating lobes, quiet zones and steering
=======================================

At three times the spacing frequency a square lattice with 1.5 wavelength
pitch radiates full-strength grating lobes at arcsin(2/3).  The stealthy
layout instead keeps a quiet zone of angular radius arcsin(k_c / k)
around the main beam, and that zone follows the beam when it is steered.
"""

import math

import numpy as np

from hudarray import RunConfig
from hudarray.radiation import (
    PistonElement,
    SteeringTarget,
    array_factor,
    cut_grid,
    exclusion_radius,
    metrics,
    quantize_delays,
    sidelobe_peaks,
    steering_weights,
    total_directivity,
)
from hudarray.recipes import hud_pattern, periodic_pattern, theta_exc_for

cfg = RunConfig()
f = cfg.design_frequency
hud, lattice = hud_pattern(cfg), periodic_pattern(cfg)
theta = cut_grid(0.1)

###############################################################################
# Unsteered array factors

for name, p in (("periodic", lattice), ("hud", hud)):
    th, lvl = array_factor(p, None, theta, [0.0], f).cut()
    pk, pl = sidelobe_peaks(th, lvl, 0.0)
    top = np.argsort(pl)[::-1][:2]
    print(name, "strongest side lobes:", [(round(math.degrees(pk[i]), 1), round(float(pl[i]), 1)) for i in top])
print(f"expected grating lobes at +/-{math.degrees(math.asin(2 / 3)):.1f} deg")

theta_exc, summary = theta_exc_for(hud, cfg, f)
print(f"quiet zone radius {math.degrees(theta_exc):.1f} deg (k_c = {summary.k_c:.1f} rad/m)")

###############################################################################
# Steering with real transducers
# ------------------------------
# Pistons of 5 mm radius taper the pattern; delays are realized with a
# 0.8 us resolution.

elem = PistonElement(cfg.piston_radius)
for steer in (0.0, 15.0, 30.0):
    target = SteeringTarget(math.radians(steer), 0.0, f)
    row = [f"steer {steer:4.1f}:"]
    for name, p in (("periodic", lattice), ("hud", hud)):
        w = quantize_delays(steering_weights(p, target), f, cfg.delay_resolution)
        d = total_directivity(p, w, elem, theta, [0.0], f)
        m = metrics(d, (math.radians(steer), 0.0), theta_exc=theta_exc)
        row.append(f"{name} PSLL {m.psll_db:6.1f} dB")
    print("  ".join(row))
