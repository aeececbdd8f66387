"""Analytic terrain worlds composed of height-field primitives.

A world is a sum of primitives, each contributing height (meters) at any
(x, y).  Heights are defined everywhere; the extent bounds where robots may
start and where class validation samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# realized elevation-gain bands per scenario class (meters)
CLASS_BANDS = {
    "flat": (0.0, 1e-9),
    "low": (0.0, 1.0),
    "medium": (1.0, 2.0),
    "high": (3.0, math.inf),
    "curb": (0.0, math.inf),
}


def _rotate_local(x, y, cx, cy, yaw):
    dx = np.asarray(x, dtype=float) - cx
    dy = np.asarray(y, dtype=float) - cy
    if yaw == 0.0:
        return dx, dy
    c, s = math.cos(yaw), math.sin(yaw)
    return c * dx + s * dy, -s * dx + c * dy


@dataclass(frozen=True)
class Plane:
    """Tilted plane: height + slope . (p - center)."""

    height: float = 0.0
    slope: tuple = (0.0, 0.0)
    center: tuple = (0.0, 0.0)

    def contribution(self, x, y):
        return (self.height
                + self.slope[0] * (np.asarray(x, dtype=float) - self.center[0])
                + self.slope[1] * (np.asarray(y, dtype=float) - self.center[1]))

    def to_dict(self):
        return {"type": "plane", "height": self.height,
                "slope": list(self.slope), "center": list(self.center)}


@dataclass(frozen=True)
class Hill:
    """Gaussian hill (height > 0) or ditch (height < 0)."""

    center: tuple
    sigma: tuple
    height: float

    def contribution(self, x, y):
        dx = (np.asarray(x, dtype=float) - self.center[0]) / self.sigma[0]
        dy = (np.asarray(y, dtype=float) - self.center[1]) / self.sigma[1]
        return self.height * np.exp(-0.5 * (dx * dx + dy * dy))

    def to_dict(self):
        return {"type": "hill", "center": list(self.center),
                "sigma": list(self.sigma), "height": self.height}


@dataclass(frozen=True)
class Ramp:
    """Linear rise from 0 to height along local +x inside a lateral band;
    holds the plateau height past the top edge."""

    center: tuple
    length: float
    width: float
    height: float
    yaw: float = 0.0

    def contribution(self, x, y):
        lx, ly = _rotate_local(x, y, self.center[0], self.center[1], self.yaw)
        t = np.clip((lx + 0.5 * self.length) / self.length, 0.0, 1.0)
        band = np.abs(ly) <= 0.5 * self.width
        return self.height * t * band

    def to_dict(self):
        return {"type": "ramp", "center": list(self.center), "length": self.length,
                "width": self.width, "height": self.height, "yaw": self.yaw}


@dataclass(frozen=True)
class Box:
    """Rectangular step (curb, plateau); sharp edges."""

    center: tuple
    size: tuple
    height: float
    yaw: float = 0.0

    def contribution(self, x, y):
        lx, ly = _rotate_local(x, y, self.center[0], self.center[1], self.yaw)
        inside = (np.abs(lx) <= 0.5 * self.size[0]) & (np.abs(ly) <= 0.5 * self.size[1])
        return self.height * inside

    def to_dict(self):
        return {"type": "box", "center": list(self.center), "size": list(self.size),
                "height": self.height, "yaw": self.yaw}


_PRIMITIVE_TYPES = {"plane": Plane, "hill": Hill, "ramp": Ramp, "box": Box}


def primitive_from_dict(d: dict):
    kind = d.get("type")
    if kind not in _PRIMITIVE_TYPES:
        raise ConfigError(f"unknown terrain primitive type {kind!r}")
    body = {k: v for k, v in d.items() if k != "type"}
    for key in ("center", "slope", "sigma", "size"):
        if key in body:
            body[key] = tuple(float(v) for v in body[key])
    try:
        return _PRIMITIVE_TYPES[kind](**body)
    except TypeError as exc:
        raise ConfigError(f"bad fields for primitive {kind!r}: {exc}") from exc


@dataclass(frozen=True)
class TerrainWorld:
    """Analytic height field with an extent and a scenario class tag."""

    primitives: tuple = ()
    extent: tuple = ((-12.0, 12.0), (-12.0, 12.0))
    terrain_class: str = "flat"

    def height(self, x, y):
        """Terrain height in meters; vectorized over array inputs."""
        x_arr = np.asarray(x, dtype=float)
        total = np.zeros(np.broadcast(x_arr, np.asarray(y, dtype=float)).shape)
        for prim in self.primitives:
            total = total + prim.contribution(x, y)
        if np.isscalar(x) and np.isscalar(y):
            return float(total)
        return total

    def contains(self, x: float, y: float) -> bool:
        (x0, x1), (y0, y1) = self.extent
        return x0 <= x <= x1 and y0 <= y <= y1

    def elevation_gain(self, step: float = 0.25) -> float:
        """max - min height over the extent, sampled every ``step`` meters."""
        (x0, x1), (y0, y1) = self.extent
        xs = np.arange(x0, x1 + step / 2, step)
        ys = np.arange(y0, y1 + step / 2, step)
        z = self.height(xs[:, None], ys[None, :])
        return float(z.max() - z.min())

    def validate_class(self) -> float:
        """Check the realized elevation gain against the declared class band.

        Returns the realized gain; raises ConfigError on mismatch.
        """
        if self.terrain_class not in CLASS_BANDS:
            raise ConfigError(f"unknown terrain class {self.terrain_class!r}")
        gain = self.elevation_gain()
        lo, hi = CLASS_BANDS[self.terrain_class]
        if not (lo - 1e-9 <= gain <= hi + 1e-9):
            raise ConfigError(
                f"class {self.terrain_class!r} requires gain in [{lo}, {hi}] m, "
                f"realized {gain:.3f} m")
        return gain

    def to_dict(self):
        return {
            "class": self.terrain_class,
            "extent": [list(self.extent[0]), list(self.extent[1])],
            "primitives": [p.to_dict() for p in self.primitives],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TerrainWorld":
        extent = d.get("extent", [[-12.0, 12.0], [-12.0, 12.0]])
        world = cls(
            primitives=tuple(primitive_from_dict(p) for p in d.get("primitives", [])),
            extent=(tuple(float(v) for v in extent[0]),
                    tuple(float(v) for v in extent[1])),
            terrain_class=d.get("class", "flat"),
        )
        world.validate_class()
        return world
