"""
How the quiet zone scales
=========================

Raising chi enlarges the constrained disk, so the quiet zone widens.  And
tiling a stealthy subarray keeps its quiet zone while the extra aperture
narrows the residual side lobes.
"""

import math

from hudarray import RunConfig, tile
from hudarray.radiation import measured_exclusion_angle, metrics
from hudarray.recipes import CHI_SWEEP, azimuth_cut, hud_pattern, theta_exc_for

cfg = RunConfig()
f = cfg.design_frequency

###############################################################################
# chi sweep (no hard core, so only the spectral constraint shapes the layout)

for chi in CHI_SWEEP:
    p = hud_pattern(cfg, chi, min_separation=0.0)
    predicted, summary = theta_exc_for(p, cfg, f)
    measured = measured_exclusion_angle(p, f)
    print(f"chi {chi:.1f} (achieved {summary.chi_achieved:.3f}): predicted {math.degrees(predicted):5.2f} deg, "
          f"read off the array factor {math.degrees(measured):5.2f} deg")

###############################################################################
# 2 x 2 tiling

sub = hud_pattern(cfg)
big = tile(sub, 2, 2)
theta_exc, _ = theta_exc_for(sub, cfg, f)
for steer in (0.0, 30.0):
    floors = [metrics(azimuth_cut(p, cfg, f, steer), (math.radians(steer), 0.0), theta_exc=theta_exc).exclusion_floor_db
              for p in (sub, big)]
    print(f"steer {steer:4.1f}: quiet-zone floor {floors[0]:.1f} dB with 200 elements, {floors[1]:.1f} dB with 800")
