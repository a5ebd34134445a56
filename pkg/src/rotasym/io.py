"""
Text formats: scenario configs, field snapshots and PGM heatmaps.

Configs and snapshot headers share one syntax: ``dotted.key = value`` per
line, ``#`` starts a comment.  Snapshot files continue after the header with
a line holding ``values`` and then one ring per line (``ntheta`` numbers,
17 significant digits, so reading back is exact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .geometry import Field, GridError, PolarGrid, RadialDomain, build_grid

__all__ = [
    "ConfigError",
    "KeyValues",
    "parse_keyvalues",
    "read_keyvalues",
    "format_keyvalues",
    "write_field",
    "read_field",
    "field_to_text",
    "field_from_text",
    "render_pgm",
    "FIELD_MAGIC",
]

FIELD_MAGIC = "# rotasym field v1"


class ConfigError(ValueError):
    """Malformed or invalid configuration; ``line`` points at the culprit if known."""

    def __init__(self, message, key=None, line=None, source=None):
        self.key = key
        self.line = line
        self.source = source
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        if key:
            message = f"{key}: {message}"
        super().__init__(f"{prefix}: {message}" if prefix else message)


@dataclass
class KeyValues:
    """Ordered ``key -> raw string`` mapping remembering source line numbers."""

    values: dict = dc_field(default_factory=dict)
    lines: dict = dc_field(default_factory=dict)
    source: str | None = None
    used: set = dc_field(default_factory=set)

    def __contains__(self, key):
        return key in self.values

    def error(self, key, message):
        return ConfigError(message, key, self.lines.get(key), self.source)

    def raw(self, key, default=None):
        self.used.add(key)
        return self.values.get(key, default)

    def get_str(self, key, default=None, choices=None):
        value = self.raw(key)
        if value is None:
            if default is None:
                raise ConfigError("missing required key", key, None, self.source)
            return default
        if choices is not None and value not in choices:
            raise self.error(key, f"must be one of {sorted(choices)}, got {value!r}")
        return value

    def get_float(self, key, default=None):
        value = self.raw(key)
        if value is None:
            if default is None:
                raise ConfigError("missing required key", key, None, self.source)
            return float(default)
        try:
            x = float(value)
        except ValueError:
            raise self.error(key, f"expected a number, got {value!r}") from None
        if not math.isfinite(x):
            raise self.error(key, f"expected a finite number, got {value!r}")
        return x

    def get_int(self, key, default=None):
        value = self.raw(key)
        if value is None:
            if default is None:
                raise ConfigError("missing required key", key, None, self.source)
            return int(default)
        try:
            return int(value)
        except ValueError:
            raise self.error(key, f"expected an integer, got {value!r}") from None

    def get_bool(self, key, default=None):
        value = self.raw(key)
        if value is None:
            if default is None:
                raise ConfigError("missing required key", key, None, self.source)
            return bool(default)
        low = value.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise self.error(key, f"expected a boolean, got {value!r}")

    def section(self, prefix):
        """Keys under ``prefix.`` (with the prefix stripped)."""
        p = prefix + "."
        return {k[len(p):]: k for k in self.values if k.startswith(p)}

    def unused(self):
        return [k for k in self.values if k not in self.used]


def parse_keyvalues(text: str, source=None) -> KeyValues:
    kv = KeyValues(source=source)
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {line.strip()!r}", None, lineno, source)
        key, value = (s.strip() for s in stripped.split("=", 1))
        if not key or any(c.isspace() for c in key):
            raise ConfigError(f"invalid key {key!r}", None, lineno, source)
        if key in kv.values:
            raise ConfigError(f"duplicate key (first on line {kv.lines[key]})", key, lineno, source)
        kv.values[key] = value
        kv.lines[key] = lineno
    return kv


def read_keyvalues(path) -> KeyValues:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read: {err.strerror}", source=str(path)) from None
    return parse_keyvalues(text, source=str(path))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_keyvalues(items, header: str | None = None) -> str:
    lines = [header] if header else []
    lines += [f"{k} = {_fmt(v)}" for k, v in items]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# field snapshots

def field_to_text(field: Field) -> str:
    g = field.grid
    head = format_keyvalues(
        [("domain.kind", g.domain.kind), ("domain.r_inner", float(g.domain.r_inner)),
         ("domain.r_outer", float(g.domain.r_outer)), ("grid.nr", g.nr),
         ("grid.ntheta", g.ntheta), ("t", float(field.t))],
        header=FIELD_MAGIC,
    )
    rows = "\n".join(" ".join(format(x, ".17g") for x in ring) for ring in field.values)
    return head + "values\n" + rows + "\n"


def field_from_text(text: str, source=None) -> Field:
    head, sep, body = text.partition("\nvalues\n")
    if not sep or not head.startswith(FIELD_MAGIC):
        raise ConfigError("not a rotasym field file", source=source)
    kv = parse_keyvalues(head, source)
    try:
        domain = RadialDomain(kv.get_float("domain.r_inner"), kv.get_float("domain.r_outer"))
        kind = kv.get_str("domain.kind", choices={"disk", "annulus"})
        if kind != domain.kind:
            raise kv.error("domain.kind", f"{kind!r} inconsistent with r_inner")
        grid = build_grid(domain, kv.get_int("grid.nr"), kv.get_int("grid.ntheta"))
    except GridError as err:
        raise ConfigError(str(err), source=source) from None
    try:
        values = np.array([[float(x) for x in line.split()] for line in body.strip().splitlines()])
    except ValueError as err:
        raise ConfigError(f"bad value: {err}", source=source) from None
    if values.shape != grid.shape:
        raise ConfigError(f"expected {grid.shape} values, got {values.shape}", source=source)
    try:
        return Field(grid, values, kv.get_float("t"))
    except GridError as err:
        raise ConfigError(str(err), source=source) from None


def write_field(field: Field, path) -> Path:
    path = Path(path)
    path.write_text(field_to_text(field))
    return path


def read_field(path) -> Field:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read: {err.strerror}", source=str(path)) from None
    return field_from_text(text, source=str(path))


# ---------------------------------------------------------------------------
# heatmaps

def _raster_cells(grid: PolarGrid, size: int):
    R = grid.domain.r_outer
    c = -R + (np.arange(size) + 0.5) * (2 * R / size)
    X, Y = np.meshgrid(c, c[::-1])
    rr = np.hypot(X, Y)
    inside = (rr <= R) & (rr >= grid.domain.r_inner)
    ir = np.clip(np.floor((rr - grid.domain.r_inner) / grid.dr).astype(int), 0, grid.nr - 1)
    phi = np.arctan2(Y, X) % (2 * math.pi)
    jt = np.floor(phi / grid.dphi + 0.5).astype(int) % grid.ntheta
    return inside, ir, jt


def render_pgm(field: Field, size: int = 128) -> str:
    """ASCII PGM (P2) of ``field`` on a Cartesian raster, nearest polar cell.

    Values map affinely from [min, max] to 0..255; a constant field maps to
    127.  Pixels outside the domain are 0.
    """
    g = field.grid
    inside, ir, jt = _raster_cells(g, size)
    vmin = float(field.values.min())
    vmax = float(field.values.max())
    vals = field.values[ir, jt]
    if vmax > vmin:
        gray = np.rint((vals - vmin) / (vmax - vmin) * 255).astype(int)
    else:
        gray = np.full(vals.shape, 127)
    gray = np.where(inside, np.clip(gray, 0, 255), 0)
    lines = [
        "P2",
        f"# t={float(field.t)!r}",
        f"# grid kind={g.domain.kind} r_inner={g.domain.r_inner!r} r_outer={g.domain.r_outer!r} "
        f"nr={g.nr} ntheta={g.ntheta}",
        f"# min={vmin!r} max={vmax!r}",
        "# mask: pixels outside the domain are 0",
        f"{size} {size}",
        "255",
    ]
    lines += [" ".join(str(int(p)) for p in row) for row in gray]
    return "\n".join(lines) + "\n"
