import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hudarray.config import RunConfig, load_config, save_config
from hudarray.errors import InvalidArgumentError, PatternParseError
from hudarray.export import (
    file_digest,
    read_directivity_csv,
    sidecar_path,
    write_directivity_csv,
    write_json,
    write_sidecar,
    write_spectrum_csv,
)
from hudarray.pattern import generate_random
from hudarray.radiation import DirectivityPattern, array_factor, cut_grid, hemisphere_grid
from hudarray.spectral import structure_factor


def test_default_scale_puts_design_frequency_at_three_f0():
    cfg = RunConfig()
    assert cfg.f0 == pytest.approx(40e3 / 3)
    assert cfg.element_spacing == pytest.approx(343 / (2 * cfg.f0))
    assert cfg.box_length == pytest.approx(cfg.element_spacing * math.sqrt(200))


def test_config_round_trip_default(tmp_path):
    path = tmp_path / "run.ini"
    save_config(RunConfig(), path)
    assert load_config(path) == RunConfig()


@settings(max_examples=30, deadline=None)
@given(st.floats(100, 1000), st.floats(0.0, 0.05), st.integers(0, 2 ** 31), st.floats(1e-16, 1e-3))
def test_config_round_trip_is_lossless(tmp_path_factory, c, sep, seed, tol):
    cfg = RunConfig(sound_speed=c, min_separation=sep, seed=seed, tolerance=tol, output_dir="out dir")
    path = tmp_path_factory.mktemp("cfg") / "run.ini"
    save_config(cfg, path)
    assert load_config(path) == cfg


def test_config_validation(tmp_path):
    with pytest.raises(InvalidArgumentError):
        RunConfig(sound_speed=0)
    with pytest.raises(InvalidArgumentError):
        RunConfig(piston_radius=-1)
    bad = tmp_path / "bad.ini"
    bad.write_text("[physics]\nwarp_factor = 9\n")
    with pytest.raises(InvalidArgumentError, match="unknown"):
        load_config(bad)
    bad.write_text("[physics]\nsound_speed = fast\n")
    with pytest.raises(InvalidArgumentError):
        load_config(bad)
    with pytest.raises(InvalidArgumentError):
        load_config(tmp_path / "missing.ini")


def test_updated_ignores_none():
    cfg = RunConfig().updated(seed=None, n_max=10)
    assert cfg.seed == 0 and cfg.n_max == 10


def test_spectrum_csv_schema(tmp_path):
    smap = structure_factor(generate_random(10, 1.0, 0), 2)
    path = tmp_path / "s.csv"
    write_spectrum_csv(smap, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "nx,ny,kx,ky,S"
    assert len(lines) == 1 + 25
    row = lines[1].split(",")
    assert float(row[4]) == smap.s[0]


def test_directivity_csv_round_trip(tmp_path):
    p = generate_random(20, 0.1, 0)
    theta, phi = hemisphere_grid(5.0)
    d = array_factor(p, None, theta, phi, 40e3)
    path = tmp_path / "d.csv"
    write_directivity_csv(d, path)
    assert path.read_text().splitlines()[0] == "theta_deg,phi_deg,level_db"
    back = read_directivity_csv(path, 40e3)
    np.testing.assert_allclose(back.theta, d.theta, atol=1e-12)
    np.testing.assert_allclose(back.phi, d.phi, atol=1e-12)
    np.testing.assert_allclose(back.level_db, np.maximum(d.level_db, -120), atol=1e-9)


def test_directivity_csv_clips_zeros(tmp_path):
    d = DirectivityPattern(np.array([0.0, 0.1]), np.array([0.0]), np.array([[1.0, 0.0]]), 40e3)
    path = tmp_path / "d.csv"
    write_directivity_csv(d, path)
    assert path.read_text().splitlines()[2].endswith(",-120.0")


def test_directivity_reader_errors(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b,c\n")
    with pytest.raises(PatternParseError):
        read_directivity_csv(path)
    path.write_text("theta_deg,phi_deg,level_db\n0,0,zero\n")
    with pytest.raises(PatternParseError) as exc:
        read_directivity_csv(path)
    assert exc.value.line == 2


def test_outputs_are_byte_identical(tmp_path):
    d = array_factor(generate_random(30, 0.2, 1), None, cut_grid(1.0), [0.0], 40e3)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_directivity_csv(d, a)
    write_directivity_csv(d, b)
    assert file_digest(a) == file_digest(b)


def test_sidecar_contents(tmp_path):
    art = tmp_path / "x.json"
    inp = tmp_path / "in.txt"
    inp.write_text("data")
    write_json({"b": 1, "a": 2}, art)
    side = write_sidecar(art, "metrics", ["metrics", "--out", "x.json"], {"seed": 3}, inputs=[inp])
    assert side == sidecar_path(art)
    record = json.loads(side.read_text())
    assert record["command"] == "metrics"
    assert record["parameters"] == {"seed": 3}
    assert record["inputs"][str(inp)] == file_digest(inp)
    assert "version" in record
    assert list(json.loads(art.read_text())) == ["a", "b"]
