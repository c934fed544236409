"""Run configuration and on-disk artifacts.

Config files are INI-style text::

    [grid]
    dim = 2
    n = 256            # one value for every axis, or a comma list
    len = 1.0

    [model]
    epsRule = 3/N      # or: eps = 0.01
    sigmaRule = 4*eps^2
    dtRule = 0.01*eps^2
    alpha = 0
    beta = 0
    projection = true

    [shape.1]
    type = sphere
    center = 0.5, 0.5
    radius = 0.3

    [run]
    steps = 1000
    diagEvery = 100
    snapshotEvery = 0              # 0 disables intermediate dumps
    extinctionThreshold = 0.05     # halt when max u drops below
    radiusMode = circle2d          # circle2d | sphere3d | ring3d | none
    outputDir = out
    experimentName = run
    maskLevel = 0.1666666667       # level of the 3D mask exports

Rules resolve against ``N = min(n)``.  Several ``[shape.*]`` sections form a
union of interfaces.  Shape types and their keys (vectors are comma or space
separated, point lists are separated by ``;``):

    sphere        center, radius
    ring          center, radius, normal (default 0 0 1)
    segment       a, b
    polyline      points, closed (default false)
    sphere_system center, radii
    dumbbell      center_a, center_b, ball_radius, neck_radius
    ball_union    centers, radii     (boundary of the union of solid balls)
    glued_balls   centers, radii     (outer boundary plus interior walls)

A radius estimate assumes a single sphere (or ring); with other shapes it is
refused unless ``forceRadius = true``.
"""
from __future__ import annotations

import configparser
import csv
from dataclasses import dataclass, field
import json
import math
from pathlib import Path
import re

import numpy as np

from . import geometry as geo
from .grid import Grid
from .model import ModelParams

CSV_HEADER = ("step,time,energy_total,energy_mass,energy_willmore,radius_est,"
              "discrepancy_sup,u_max,interface_peak_min")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str, line: int | None = None):
        self.key, self.line = key, line
        where = f" (line {line})" if line else ""
        super().__init__(f"{key}{where}: {message}")


_SCHEMA = {
    "grid": {"dim": True, "n": True, "len": False},
    "model": {"eps": False, "epsRule": False, "sigma": False, "sigmaRule": False,
              "dt": False, "dtRule": False, "alpha": False, "beta": False,
              "projection": False, "dealias": False},
    "run": {"steps": True, "diagEvery": False, "snapshotEvery": False,
            "extinctionThreshold": False, "outputDir": False, "experimentName": False,
            "radiusMode": False, "forceRadius": False, "maskLevel": False},
}

_SHAPE_KEYS = {
    "sphere": ("center", "radius"),
    "ring": ("center", "radius", "normal"),
    "segment": ("a", "b"),
    "polyline": ("points", "closed"),
    "sphere_system": ("center", "radii"),
    "dumbbell": ("center_a", "center_b", "ball_radius", "neck_radius"),
    "ball_union": ("centers", "radii"),
    "glued_balls": ("centers", "radii"),
}
_SHAPE_OPTIONAL = {"normal", "closed"}

# radius estimator -> (grid dimension, the single shape it assumes)
_RADIUS_MODES = {"circle2d": (2, "sphere"), "sphere3d": (3, "sphere"), "ring3d": (3, "ring")}


def _vec(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _points(text):
    return tuple(_vec(p) for p in text.split(";") if p.strip())


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def build_shape(kind: str, p: dict):
    """Instantiate a shape from string parameters."""
    if kind == "sphere":
        return geo.Sphere(_vec(p["center"]), float(p["radius"]))
    if kind == "ring":
        return geo.Ring(_vec(p["center"]), float(p["radius"]),
                        _vec(p.get("normal", "0 0 1")))
    if kind == "segment":
        return geo.Segment(_vec(p["a"]), _vec(p["b"]))
    if kind == "polyline":
        return geo.Polyline(_points(p["points"]), _bool(p.get("closed", "false")))
    if kind == "sphere_system":
        return geo.SphereSystem(_vec(p["center"]), _vec(p["radii"]))
    if kind == "dumbbell":
        return geo.dumbbell(_vec(p["center_a"]), _vec(p["center_b"]),
                            float(p["ball_radius"]), float(p["neck_radius"]))
    if kind == "ball_union":
        cs, rs = _points(p["centers"]), _vec(p["radii"])
        if len(cs) != len(rs):
            raise ValueError("centers and radii differ in length")
        return geo.SolidBoundary(tuple(geo.Ball(c, r) for c, r in zip(cs, rs)))
    if kind == "glued_balls":
        return geo.glued_balls(_points(p["centers"]), _vec(p["radii"]))
    raise ValueError(f"unknown shape type {kind!r}")


_RULE_N = re.compile(r"^\s*([0-9.eE+-]+)\s*/\s*N\s*$")
_RULE_EPS2 = re.compile(r"^\s*(?:([0-9.eE+-]+)\s*\*\s*)?eps\s*\^\s*2\s*$")


def resolve_rule(kind: str, rule: str, N: int, eps: float | None = None) -> float:
    """Evaluate ``"c/N"`` (eps) or ``"c*eps^2"`` (sigma, dt) rules."""
    if kind == "eps":
        m = _RULE_N.match(rule)
        if not m:
            raise ValueError(f"expected 'c/N', got {rule!r}")
        return float(m.group(1)) / N
    m = _RULE_EPS2.match(rule)
    if not m:
        raise ValueError(f"expected 'c*eps^2', got {rule!r}")
    c = float(m.group(1)) if m.group(1) else 1.0
    return c * eps ** 2


@dataclass
class RunConfig:
    """Validated configuration; ``raw`` keeps the text values for round trips."""

    grid: Grid
    params: ModelParams
    shapes: list
    shape_specs: list
    steps: int
    diagEvery: int = 100
    snapshotEvery: int = 0
    extinctionThreshold: float = 0.05
    outputDir: str = "out"
    experimentName: str = "run"
    radiusMode: str | None = None
    maskLevel: float = 1.0 / 6.0
    dealias: bool = False
    raw: dict = field(default_factory=dict)

    @property
    def shape(self):
        if not self.shapes:
            return None
        return self.shapes[0] if len(self.shapes) == 1 else geo.Union(tuple(self.shapes))

    def resolved(self) -> dict:
        """Concrete parameter set (what the manifest records)."""
        return {
            "grid": {"dim": self.grid.dim, "n": list(self.grid.n),
                     "len": list(self.grid.length)},
            "model": self.params.to_dict() | {"dealias": self.dealias},
            "shapes": [dict(s) for s in self.shape_specs],
            "run": {"steps": self.steps, "diagEvery": self.diagEvery,
                    "snapshotEvery": self.snapshotEvery,
                    "extinctionThreshold": self.extinctionThreshold,
                    "outputDir": self.outputDir, "experimentName": self.experimentName,
                    "radiusMode": self.radiusMode, "maskLevel": self.maskLevel},
        }

    def to_text(self) -> str:
        lines = []
        for section, items in self.raw.items():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {v}" for k, v in items.items())
            lines.append("")
        return "\n".join(lines)


def _line_index(text: str) -> dict:
    """Map ``(section, key)`` and ``(section, None)`` to 1-based line numbers."""
    out, section = {}, None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
            out.setdefault((section, None), i)
        elif section and ("=" in s or ":" in s) and not s.startswith(("#", ";")):
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip()
            out.setdefault((section, key), i)
    return out


def apply_overrides(text: str, overrides) -> str:
    """Apply ``section.key=value`` overrides to config text.

    Setting a value replaces the paired rule and vice versa.
    """
    cp = _read(text)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(item, "override must look like section.key=value")
        path, value = item.split("=", 1)
        if "." not in path:
            raise ConfigError(path, "override key must be section.key")
        section, key = path.rsplit(".", 1)
        section, key = section.strip(), key.strip()
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, value.strip())
        if section == "model":
            twin = key[:-4] if key.endswith("Rule") else key + "Rule"
            if twin in ("eps", "sigma", "dt", "epsRule", "sigmaRule", "dtRule"):
                cp.remove_option(section, twin)
    return "\n".join(
        f"[{s}]\n" + "\n".join(f"{k} = {v}" for k, v in cp[s].items()) + "\n"
        for s in cp.sections())


def _read(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"),
                                   interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError("config", str(exc).splitlines()[0], line) from exc
    return cp


def parse_config(text: str) -> RunConfig:
    lines = _line_index(text)
    cp = _read(text)

    def err(section, key, msg):
        line = lines.get((section, key)) or lines.get((section, None))
        return ConfigError(f"{section}.{key}" if key else section, msg, line)

    raw = {}
    for section in cp.sections():
        if section.startswith("shape."):
            continue
        if section not in _SCHEMA:
            raise err(section, None, "unknown section")
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                raise err(section, key, "unknown key")
    for section, keys in _SCHEMA.items():
        for key, required in keys.items():
            if required and not (cp.has_section(section) and cp.has_option(section, key)):
                raise err(section, key, "missing required key")

    def get(section, key, conv, default=None):
        if not cp.has_option(section, key):
            return default
        value = cp.get(section, key)
        try:
            return conv(value)
        except (ValueError, TypeError) as exc:
            raise err(section, key, str(exc)) from exc

    # grid
    dim = get("grid", "dim", int)
    if dim not in (1, 2, 3):
        raise err("grid", "dim", "must be 1, 2 or 3")
    n = get("grid", "n", lambda v: tuple(int(float(x)) for x in v.replace(",", " ").split()))
    length = get("grid", "len", _vec, (1.0,))
    if len(n) == 1:
        n = n * dim
    if len(length) == 1:
        length = length * dim
    if len(n) != dim:
        raise err("grid", "n", f"expected 1 or {dim} values")
    if len(length) != dim:
        raise err("grid", "len", f"expected 1 or {dim} values")
    try:
        grid = Grid(n, length)
    except ValueError as exc:
        raise err("grid", "n", str(exc)) from exc
    N = min(grid.n)

    # model
    resolved = {}
    for name in ("eps", "sigma", "dt"):
        has_v = cp.has_option("model", name)
        has_r = cp.has_option("model", name + "Rule")
        if has_v == has_r:
            raise err("model", name, "give exactly one of the value or the rule")
        if has_v:
            resolved[name] = get("model", name, float)
        else:
            rule = cp.get("model", name + "Rule")
            try:
                resolved[name] = resolve_rule(name, rule, N, resolved.get("eps"))
            except ValueError as exc:
                raise err("model", name + "Rule", str(exc)) from exc
    for name in ("eps", "dt"):
        if not resolved[name] > 0:
            key = name if cp.has_option("model", name) else name + "Rule"
            raise err("model", key, "must be positive")
    alpha = get("model", "alpha", float, 0.0)
    beta = get("model", "beta", float, 0.0)
    try:
        params = ModelParams(resolved["eps"], resolved["sigma"], resolved["dt"], alpha, beta,
                             get("model", "projection", _bool, True))
    except ValueError as exc:
        raise err("model", None, str(exc)) from exc

    # shapes
    shapes, specs = [], []
    for section in sorted((s for s in cp.sections() if s.startswith("shape.")),
                          key=lambda s: (len(s), s)):
        p = dict(cp[section])
        kind = p.get("type")
        if kind is None:
            raise err(section, "type", "missing required key")
        if kind not in _SHAPE_KEYS:
            raise err(section, "type", f"unknown shape type {kind!r}")
        for key in p:
            if key != "type" and key not in _SHAPE_KEYS[kind]:
                raise err(section, key, "unknown key")
        for key in _SHAPE_KEYS[kind]:
            if key not in p and key not in _SHAPE_OPTIONAL:
                raise err(section, key, "missing required key")
        try:
            shapes.append(build_shape(kind, p))
        except (ValueError, KeyError) as exc:
            raise err(section, "type", str(exc)) from exc
        specs.append(p)
    if not shapes:
        raise err("shape.1", None, "at least one [shape.*] section is required")

    steps = get("run", "steps", int)
    if steps < 1:
        raise err("run", "steps", "must be >= 1")
    diag = get("run", "diagEvery", int, 100)
    snap = get("run", "snapshotEvery", int, 0)
    if diag < 1:
        raise err("run", "diagEvery", "must be >= 1")
    if snap < 0:
        raise err("run", "snapshotEvery", "must be >= 0")
    radius_mode = get("run", "radiusMode", str, None)
    if radius_mode in ("", "none"):
        radius_mode = None
    if radius_mode is not None and radius_mode not in _RADIUS_MODES:
        raise err("run", "radiusMode", f"unknown radius mode {radius_mode!r}")
    if radius_mode is not None:
        need_dim, need_kind = _RADIUS_MODES[radius_mode]
        if dim != need_dim:
            raise err("run", "radiusMode", f"{radius_mode} needs a {need_dim}D grid")
        single = len(specs) == 1 and specs[0]["type"] == need_kind
        if not single and not get("run", "forceRadius", _bool, False):
            raise err("run", "radiusMode",
                      f"{radius_mode} assumes a single {need_kind}; set forceRadius = true "
                      "to emit it anyway")

    for section in cp.sections():
        raw[section] = dict(cp[section])
    return RunConfig(
        grid=grid, params=params, shapes=shapes, shape_specs=specs, steps=steps,
        diagEvery=diag, snapshotEvery=snap,
        extinctionThreshold=get("run", "extinctionThreshold", float, 0.05),
        outputDir=get("run", "outputDir", str, "out"),
        experimentName=get("run", "experimentName", str, "run"),
        radiusMode=radius_mode,
        maskLevel=get("run", "maskLevel", float, 1.0 / 6.0),
        dealias=get("model", "dealias", _bool, False),
        raw=raw,
    )


def load_config(path, overrides=None) -> RunConfig:
    text = Path(path).read_text()
    if overrides:
        text = apply_overrides(text, overrides)
    return parse_config(text)


# diagnostics CSV --------------------------------------------------------

def _fmt(x) -> str:
    return "" if x is None else f"{x:.17g}"


def diagnostics_row(rec) -> list[str]:
    return [str(rec.step), _fmt(rec.time), _fmt(rec.energy.total), _fmt(rec.energy.mass),
            _fmt(rec.energy.willmore), _fmt(rec.radiusEstimate), _fmt(rec.discrepancySup),
            _fmt(rec.uMax), _fmt(rec.interfacePeakMin)]


class DiagnosticsCSVWriter:
    """Streams records to CSV as they arrive (flushes after each row)."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._fh.write(CSV_HEADER + "\n")
        self._last = None

    def write(self, rec):
        if self._last is not None and rec.step < self._last:
            raise ValueError("records must arrive in step order")
        self._last = rec.step
        self._w.writerow(diagnostics_row(rec))
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_diagnostics_csv(records, path) -> None:
    with DiagnosticsCSVWriter(path) as w:
        for rec in records:
            w.write(rec)


def read_diagnostics_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        out.append({k: (int(v) if k == "step" else (None if v == "" else float(v)))
                    for k, v in r.items()})
    return out


# raw field dumps --------------------------------------------------------

def _sidecar_path(path) -> Path:
    return Path(str(path) + ".meta")


def write_field_dump(grid: Grid, u: np.ndarray, path, eps: float = math.nan,
                     step: int = 0, time: float = 0.0) -> None:
    """Raw little-endian float64 payload (row-major) plus a text sidecar."""
    u = grid.check_field(u)
    path = Path(path)
    np.ascontiguousarray(u, dtype="<f8").tofile(path)
    meta = [f"dim = {grid.dim}",
            "n = " + " ".join(str(v) for v in grid.n),
            "len = " + " ".join(repr(v) for v in grid.length),
            f"eps = {eps!r}", f"step = {step}", f"time = {time!r}"]
    _sidecar_path(path).write_text("\n".join(meta) + "\n")


def read_field_dump(path):
    """Return ``(grid, field, meta)`` from a dump written by :func:`write_field_dump`."""
    path = Path(path)
    meta = {}
    for line in _sidecar_path(path).read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            meta[k.strip()] = v.strip()
    n = tuple(int(v) for v in meta["n"].split())
    length = tuple(float(v) for v in meta["len"].split())
    grid = Grid(n, length)
    data = np.fromfile(path, dtype="<f8")
    if data.size != grid.size:
        raise ValueError(f"payload holds {data.size} values, expected {grid.size}")
    parsed = {"eps": float(meta.get("eps", "nan")), "step": int(meta.get("step", 0)),
              "time": float(meta.get("time", 0.0))}
    return grid, data.reshape(grid.shape).astype(float), parsed


def write_snapshot_2d(grid: Grid, u: np.ndarray, path) -> None:
    """Binary PGM (P5); rows run over axis 1, columns over axis 0."""
    if grid.dim != 2:
        raise ValueError("PGM snapshots need a 2D field")
    u = grid.check_field(u)
    pix = np.floor(np.clip(u / 0.25, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    img = np.ascontiguousarray(pix.T)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{grid.n[0]} {grid.n[1]}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def level_set_mask(u: np.ndarray, level: float = 1.0 / 6.0) -> np.ndarray:
    return (u >= level).astype(float)


def export_level_set_mask(grid: Grid, u: np.ndarray, path, level: float = 1.0 / 6.0,
                          eps: float = math.nan, step: int = 0, time: float = 0.0) -> None:
    """Dump ``{u >= level}`` as 0/1 values in the raw field format."""
    write_field_dump(grid, level_set_mask(grid.check_field(u), level), path, eps, step, time)


def write_manifest(cfg: RunConfig, path, extra: dict | None = None) -> None:
    data = {"resolved": cfg.resolved(), "config": cfg.raw}
    if extra:
        data.update(extra)
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
