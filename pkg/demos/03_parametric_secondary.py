"""
Secondary beam of a parametric loudspeaker
==========================================

A 1 kHz difference tone is generated in air by two primaries, 40 kHz and
39 or 41 kHz.  Its directivity is estimated from the primary cuts, either
by their product or by convolving that product with the Westervelt
directivity of the virtual end-fire array.
"""

import math

from hudarray import RunConfig
from hudarray.parametric import ParametricSetup, default_attenuation
from hudarray.radiation import sidelobe_peaks
from hudarray.recipes import hud_pattern, periodic_pattern, secondary

cfg = RunConfig()
for f in (39e3, 40e3, 41e3):
    print(f"air absorption at {f / 1e3:g} kHz: {default_attenuation(f) * 8.686:.2f} dB/m")

setup = ParametricSetup(40e3, 41e3)
half = math.degrees(math.atan(math.sqrt(setup.alpha_sum / setup.k_difference)))
print(f"Westervelt half-power half-angle: {half:.1f} deg")

###############################################################################
# Grating lobes survive down to 1 kHz for the lattice, not for the HUD layout

for name, p in (("periodic", periodic_pattern(cfg)), ("hud", hud_pattern(cfg))):
    for model in ("product", "convolution"):
        th, lvl = secondary(p, cfg, 40e3, 41e3, 0.0, model).cut.cut()
        pk, pl = sidelobe_peaks(th, lvl, 0.0)
        strong = [(round(math.degrees(a), 1), round(float(b), 1)) for a, b in zip(pk, pl) if b > -20]
        print(f"{name:8s} {model:11s} lobes above -20 dB: {strong or 'none'}")
