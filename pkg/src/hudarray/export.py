"""CSV/JSON writers and readers for spectra, directivities and metrics.

All angles in files are degrees.  Floats are written with ``repr`` so
repeated runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .errors import PatternParseError
from .radiation import DirectivityPattern, LobeMetrics
from .spectral import SpectralMap


def _num(v):
    return repr(float(v))


def write_spectrum_csv(smap: SpectralMap, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["nx", "ny", "kx", "ky", "S"])
        for row in zip(smap.nx, smap.ny, smap.kx, smap.ky, smap.s):
            w.writerow([int(row[0]), int(row[1]), _num(row[2]), _num(row[3]), _num(row[4])])


def write_directivity_csv(pattern: DirectivityPattern, path) -> None:
    """One ``theta_deg, phi_deg, level_db`` row per sample (clipped at -120 dB)."""
    level = pattern.export_level_db()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta_deg", "phi_deg", "level_db"])
        for i, ph in enumerate(pattern.phi):
            for j, th in enumerate(pattern.theta):
                w.writerow([_num(math.degrees(th)), _num(math.degrees(ph)), _num(level[i, j])])


def read_directivity_csv(path, frequency: float = float("nan")) -> DirectivityPattern:
    """Inverse of :func:`write_directivity_csv` (phi-major rows on a full grid)."""
    path = Path(path)
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["theta_deg", "phi_deg", "level_db"]:
            raise PatternParseError("expected header theta_deg,phi_deg,level_db", line=1)
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append(tuple(float(v) for v in row))
            except ValueError:
                raise PatternParseError(f"non-numeric row {row!r}", line=lineno) from None
            if len(row) != 3:
                raise PatternParseError(f"expected 3 columns, got {len(row)}", line=lineno)
    if not rows:
        raise PatternParseError("no samples")
    data = np.array(rows)
    phi_deg = list(dict.fromkeys(data[:, 1]))
    theta_deg = data[data[:, 1] == phi_deg[0], 0]
    if len(theta_deg) * len(phi_deg) != len(data):
        raise PatternParseError("samples do not form a full (phi, theta) grid")
    level = data[:, 2].reshape(len(phi_deg), len(theta_deg))
    power = 10 ** (level / 10)
    return DirectivityPattern(np.radians(theta_deg), np.radians(np.array(phi_deg)),
                              power / power.max(), frequency, f"loaded:{path.name}")


def metrics_dict(m: LobeMetrics) -> dict:
    return m.to_dict()


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".provenance.json")


def write_sidecar(artifact, command: str, argv, parameters: dict, inputs=()) -> Path:
    """Provenance record next to ``artifact``: everything needed to re-run it."""
    record = {
        "artifact": Path(artifact).name,
        "command": command,
        "argv": list(argv),
        "parameters": parameters,
        "inputs": {str(p): file_digest(p) for p in inputs},
        "version": __version__,
    }
    out = sidecar_path(artifact)
    write_json(record, out)
    return out
