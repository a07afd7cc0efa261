"""
Acceptance gate: each criterion at its stated tolerance.

Every check records a PASS/FAIL line (printed at the end of the run under
"acceptance criteria").  Cases that are known not to meet their criterion
are marked ``xfail(strict=True)``: they still run at full tolerance, a
failure is reported as FAIL, and an unexpected pass turns the suite red.
The analysis of each failure is in the decisions ledger.

The canonical stealthy layout is seed 0 throughout.
"""

import math

import numpy as np
import pytest

from hudarray.pattern import constrained_wavevectors, generate_periodic, stealth_objective, tile
from hudarray.radiation import (
    PistonElement,
    SteeringTarget,
    array_factor,
    array_power,
    cut_grid,
    measured_exclusion_angle,
    metrics,
    piston_field,
    quantize_delays,
    sidelobe_peaks,
    steering_weights,
    total_directivity,
    wavenumber,
)
from hudarray.recipes import CHI_SWEEP, PAIRS, azimuth_cut, hud_pattern, secondary, theta_exc_for
from hudarray.spectral import growth_exponent, number_variance, stealth_summary, structure_factor

C = 343.0
F = 40e3  # 3 f0 for the default scale


def known_failure(reason):
    return pytest.mark.xfail(strict=True, reason=reason)


# ---------------------------------------------------------------- 1. stealth generation

def test_c1_stealth_generation(hud_200mm, acceptance):
    pattern, report, seconds = hud_200mm
    L = pattern.box_length
    k, _ = constrained_wavevectors(0.5, 200, L)
    # independent direct sum over the constrained set
    rho = np.array([np.exp(1j * (pattern.points @ kk)).sum() for kk in k])
    s_max = float((np.abs(rho) ** 2 / pattern.n).max())
    # brute-force minimum-image separation
    d = pattern.points[:, None, :] - pattern.points[None, :, :]
    d -= L * np.round(d / L)
    dist = np.hypot(d[..., 0], d[..., 1])
    np.fill_diagonal(dist, np.inf)
    sep = float(dist.min())
    chi = stealth_summary(structure_factor(pattern, 20), pattern.n).chi_achieved

    ok = acceptance(1, s_max < 1e-8, f"max S on {len(k)} constrained k = {s_max:.2e} (< 1e-8)")
    ok &= acceptance(1, sep >= 0.010, f"min separation {sep * 1e3:.3f} mm (>= 10 mm) in {L * 1e3:.0f} mm box")
    ok &= acceptance(1, 0.48 <= chi <= 0.52, f"achieved chi {chi:.3f} in [0.48, 0.52]")
    ok &= acceptance(1, seconds < 600, f"wall clock {seconds:.1f} s (< 600 s)")
    assert ok


# ---------------------------------------------------------------- 2. grating lobes

def test_c2_periodic_grating_lobes(periodic, acceptance):
    theta = cut_grid(0.01)
    af = array_factor(periodic, None, theta, [0.0], F, C)
    th, lvl = af.cut()
    expected = math.degrees(math.asin(2 / 3))
    ok = True
    for sign in (+1, -1):
        window = np.abs(np.degrees(th) - sign * expected) < 2.0
        i = np.argmax(np.where(window, lvl, -np.inf))
        where, level = math.degrees(th[i]), lvl[i]
        ok &= acceptance(2, abs(where - sign * expected) <= 0.2 and level >= -0.1,
                         f"lobe at {where:+.2f} deg (expected {sign * expected:+.2f}), {level:.3f} dB re main lobe")
    assert ok


# ---------------------------------------------------------------- 3. exclusion region

def test_c3_exclusion_angle(hud, config, acceptance):
    theta_exc, _ = theta_exc_for(hud, config, F)
    deg = math.degrees(theta_exc)
    assert acceptance(3, 30 <= deg <= 34, f"theta_exc = {deg:.2f} deg from measured k_c (in [30, 34])")


@known_failure("finite-aperture side lobes near the main lobe exceed -30 dB")
def test_c3_exclusion_floor(hud, config, acceptance):
    theta_exc, _ = theta_exc_for(hud, config, F)
    af = array_factor(hud, None, cut_grid(0.1), [0.0], F, C)
    th, lvl = af.cut()
    deg = np.abs(np.degrees(th))
    zone = (deg > 2) & (deg <= math.degrees(theta_exc) - 1)
    worst = float(lvl[zone].max())
    at = float(np.degrees(th[zone][np.argmax(lvl[zone])]))
    assert acceptance(3, worst <= -30,
                      f"max array factor {worst:.1f} dB at {at:+.1f} deg for 2 < |theta| <= theta_exc - 1 (<= -30 dB)")


# ---------------------------------------------------------------- 4. steering

@pytest.mark.parametrize("steer", [15.0, 30.0])
def test_c4_steering(hud, config, acceptance, steer):
    target = SteeringTarget(math.radians(steer), 0.0, F, C)
    w = steering_weights(hud, target)
    theta = cut_grid(0.01)
    af = array_factor(hud, w, theta, [0.0], F, C)
    peak = math.degrees(theta[np.argmax(af.power[0])])
    ok = acceptance(4, abs(peak - steer) <= 0.2, f"steer {steer:g}: argmax at {peak:.2f} deg (within 0.2)")

    # the quiet zone moves with the beam: in direction cosines the steered
    # cut is the unsteered cut shifted to sin(theta_s)
    theta_exc, _ = theta_exc_for(hud, config, F)
    us = math.sin(math.radians(steer))
    du = np.linspace(-math.sin(theta_exc), math.sin(theta_exc), 801)
    du = du[np.abs(us + du) < 1]
    steered = array_power(hud, w, np.arcsin(us + du), [0.0], F, C)[0]
    plain = array_power(hud, None, np.arcsin(du), [0.0], F, C)[0]
    err = float(np.max(np.abs(steered - plain)) / plain.max())
    ok &= acceptance(4, err < 1e-9, f"steer {steer:g}: annulus tracks main lobe, max mismatch {err:.1e} of peak")

    q = quantize_delays(w, F, 0.8e-6)
    p_exact = array_power(hud, w, theta, [0.0], F, C).max()
    p_quant = array_power(hud, q, theta, [0.0], F, C).max()
    change = abs(10 * math.log10(p_quant / p_exact))
    ok &= acceptance(4, change < 0.5, f"steer {steer:g}: 0.8 us delay quantization changes peak by {change:.3f} dB")
    assert ok


# ---------------------------------------------------------------- 5. chi sweep

def test_c5_chi_sweep(config, acceptance):
    measured, predicted = [], []
    ok = True
    for chi in CHI_SWEEP:
        p = hud_pattern(config, chi, min_separation=0.0)
        pred, _ = theta_exc_for(p, config, F)
        meas = measured_exclusion_angle(p, F, C)
        measured.append(math.degrees(meas))
        predicted.append(math.degrees(pred))
        ok &= acceptance(5, abs(measured[-1] - predicted[-1]) <= 1.5,
                         f"chi {chi:g}: measured {measured[-1]:.2f} deg vs predicted {predicted[-1]:.2f} deg (1.5 deg)")
    ok &= acceptance(5, bool(np.all(np.diff(measured) > 0)), "measured exclusion angle increases with chi")
    assert ok


# ---------------------------------------------------------------- 6. tiling

def test_c6_tiling_factorization(hud, acceptance):
    big = tile(hud, 2, 2)
    L = hud.box_length
    theta = np.radians(np.arange(0.0, 90.5, 0.5))
    phi = np.radians(np.arange(0.0, 360.0, 2.0))
    ok = True
    for steer in (0.0, 30.0):
        t_sub = SteeringTarget(math.radians(steer), 0.0, F, C)
        p_sub = array_power(hud, steering_weights(hud, t_sub), theta, phi, F, C)
        p_big = array_power(big, steering_weights(big, t_sub), theta, phi, F, C)
        # lattice factor of the four copies, with the steering phase, relative to the big box center
        th, ph = np.meshgrid(theta, phi)
        k = wavenumber(F, C)
        kx = k * (np.sin(th) * np.cos(ph) - math.sin(math.radians(steer)))
        ky = k * np.sin(th) * np.sin(ph)
        lattice = sum(np.exp(1j * (kx * (i - 0.5) * L + ky * (j - 0.5) * L)) for i in (0, 1) for j in (0, 1))
        expected = p_sub * np.abs(lattice) ** 2 / 4
        # pointwise rtol 1e-12; at exact lattice nulls both sides are rounding
        # noise, hence the absolute allowance of 1e-12 of the peak
        err = np.abs(p_big - expected)
        excess = float(np.max(err / (1e-12 * np.abs(expected) + 1e-12 * p_big.max())))
        above = expected > 1e-6 * expected.max()
        rel = float(np.max(err[above] / expected[above]))
        ok &= acceptance(6, excess <= 1.0,
                         f"steer {steer:g}: |A_tiled|^2 = |A_sub|^2 |lattice|^2 / 4 within rtol 1e-12 + 1e-12 of peak "
                         f"(worst {excess:.2f} of allowance; pointwise rel err {rel:.1e} above -60 dB)")
    assert ok


def _floors(hud, config, steer):
    theta_exc, _ = theta_exc_for(hud, config, F)
    big = tile(hud, 2, 2)
    direction = (math.radians(steer), 0.0)
    sub = metrics(azimuth_cut(hud, config, F, steer), direction, theta_exc=theta_exc).exclusion_floor_db
    large = metrics(azimuth_cut(big, config, F, steer), direction, theta_exc=theta_exc).exclusion_floor_db
    return sub, large


@pytest.mark.parametrize("steer", [
    0.0,
    pytest.param(30.0, marks=known_failure("steered floor improves by slightly under 5 dB")),
])
def test_c6_tiled_floor_is_deeper(hud, config, acceptance, steer):
    sub, large = _floors(hud, config, steer)
    assert acceptance(6, sub - large >= 5.0,
                      f"steer {steer:g}: exclusion floor 200 el {sub:.2f} dB, 800 el {large:.2f} dB, "
                      f"deeper by {sub - large:.2f} dB (>= 5)")


# ---------------------------------------------------------------- 7. parametric structure

def _overlap_check(pattern, config, f1, f2, steer, piston=True):
    """(convolution lobe, product/overlap lobe) angles in degrees near the primary grating lobes."""
    conv = secondary(pattern, config, f1, f2, steer, piston=piston).cut
    prod = secondary(pattern, config, f1, f2, steer, "product", piston=piston).cut
    th, lc = conv.cut()
    _, lp = prod.cut()
    main = math.radians(steer)
    pk_p, lv_p = sidelobe_peaks(th, lp, main)
    overlap = pk_p[np.argmax(lv_p)]
    pk_c, _ = sidelobe_peaks(th, lc, main)
    nearest = pk_c[np.argmin(np.abs(pk_c - overlap))] if len(pk_c) else float("nan")
    return math.degrees(nearest), math.degrees(overlap)


PERIODIC_CASES = [
    pytest.param(s, f2, marks=known_failure("convolution pulls the secondary grating lobe toward boresight by > 1 deg"))
    if s in (0.0, 15.0) else (s, f2)
    for s in (0.0, 15.0, 30.0) for f2 in (39e3, 41e3)
]


@pytest.mark.parametrize("steer, f2", PERIODIC_CASES)
def test_c7_periodic_secondary_grating_lobe(periodic, config, acceptance, steer, f2):
    conv, overlap = _overlap_check(periodic, config, 40e3, f2, steer)
    iso_conv, iso_overlap = _overlap_check(periodic, config, 40e3, f2, steer, piston=False)
    assert acceptance(
        7, abs(conv - overlap) <= 1.0,
        f"periodic steer {steer:g}, 40/{f2 / 1e3:g} kHz: secondary lobe {conv:+.1f} deg, primary overlap "
        f"{overlap:+.1f} deg (within 1); isotropic primaries {iso_conv:+.1f} vs {iso_overlap:+.1f}")


HUD_CASES = [
    pytest.param(s, f2, marks=known_failure("structure-factor peak beyond k_c of this layout shows through at 30 deg"))
    if s == 30.0 else (s, f2)
    for s in (0.0, 15.0, 30.0) for f2 in (39e3, 41e3)
]


@pytest.mark.parametrize("steer, f2", HUD_CASES)
def test_c7_hud_secondary_has_no_lobes(hud, config, acceptance, steer, f2):
    conv = secondary(hud, config, 40e3, f2, steer).cut
    th, lvl = conv.cut()
    _, pk = sidelobe_peaks(th, lvl, math.radians(steer))
    worst = float(pk.max()) if len(pk) else float("-inf")
    shown = f"{worst:.1f} dB" if len(pk) else "none"
    assert acceptance(7, worst <= -20.0,
                      f"HUD steer {steer:g}, 40/{f2 / 1e3:g} kHz: highest secondary lobe outside 5 deg cap "
                      f"{shown} (<= -20 dB)")


# ---------------------------------------------------------------- 8. oracles

def test_c8_structure_factor_paths(hud, acceptance):
    a = structure_factor(hud, 40, method="direct").s
    b = structure_factor(hud, 40, method="separable").s
    err = float(np.max(np.abs(a - b)))
    assert acceptance(8, err <= 1e-10, f"direct vs separable S(k), n_max 40: max abs diff {err:.1e} (<= 1e-10)")


def test_c8_piston_field_oracle(acceptance):
    p = generate_periodic(2, 2, 0.010, box_length=0.05)
    elem = PistonElement(0.005)
    f = 16e3
    th = np.radians(np.arange(-60.0, 60.05, 0.5))
    R = 2.0
    obs = np.column_stack([R * np.sin(th), np.zeros_like(th), R * np.cos(th)])
    brute = np.abs(piston_field(p, None, elem, obs, f, C)) ** 2
    brute_db = 10 * np.log10(brute / brute.max())
    model_db = total_directivity(p, None, elem, th, [0.0], f, C).level_db[0]
    err = float(np.max(np.abs(brute_db - model_db)))
    assert acceptance(8, err <= 0.5, f"total directivity vs field sum at 2 m, |theta| <= 60: max {err:.3f} dB (<= 0.5)")


def test_c8_gradient(acceptance):
    worst = 0.0
    for seed in range(20):
        pts = np.random.default_rng(seed).random((10, 2))
        k, _ = constrained_wavevectors(0.5, 10, 1.0)
        _, grad = stealth_objective(pts, k)
        h = 1e-6
        fd = np.zeros_like(pts)
        for i in range(10):
            for d in range(2):
                e = np.zeros_like(pts)
                e[i, d] = h
                fd[i, d] = (stealth_objective(pts + e, k)[0] - stealth_objective(pts - e, k)[0]) / (2 * h)
        worst = max(worst, float(np.max(np.abs(grad - fd)) / np.max(np.abs(grad))))
    assert acceptance(8, worst <= 1e-6, f"gradient vs central differences, 20 instances: max rel err {worst:.1e}")


# ---------------------------------------------------------------- 9. PSLL ordering

@pytest.mark.parametrize("steer", [
    0.0,
    15.0,
    pytest.param(30.0, marks=known_failure("a structure-factor peak of this layout limits the steered PSLL")),
])
def test_c9_psll_ordering(hud, periodic, config, acceptance, steer):
    direction = (math.radians(steer), 0.0)
    h = metrics(azimuth_cut(hud, config, F, steer), direction).psll_db
    p = metrics(azimuth_cut(periodic, config, F, steer), direction).psll_db
    assert acceptance(9, p - h >= 10.0,
                      f"steer {steer:g}: PSLL HUD {h:.1f} dB, periodic {p:.1f} dB, gap {p - h:.1f} dB (>= 10)")


# ---------------------------------------------------------------- 10. number variance

def test_c10_number_variance(hud, poisson, acceptance):
    L = hud.box_length
    radii = np.geomspace(L / 40, L / 4, 12)
    _, v_hud, _ = number_variance(hud, radii, n_windows=4000, seed=0)
    _, v_poi, _ = number_variance(poisson, radii, n_windows=4000, seed=0)
    s_hud = growth_exponent(radii, v_hud)
    s_poi = growth_exponent(radii, v_poi)
    ok = acceptance(10, s_hud < 1.7, f"HUD variance slope {s_hud:.2f} over R in [L/40, L/4] (< 1.7)")
    ok &= acceptance(10, 1.8 <= s_poi <= 2.2, f"Poisson variance slope {s_poi:.2f} (in [1.8, 2.2])")
    assert ok
