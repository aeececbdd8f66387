"""Deterministic SVG rendering: top-down heightmap shading with overlaid
trajectories, start/goal markers and a legend.

The writer emits fixed-precision coordinates and no timestamps, so the same
inputs always produce identical bytes.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError

PALETTE = {
    "terp": "#e6308a",
    "terp-noattn": "#f2c21f",
    "terp-file": "#8a2be2",
    "dwa": "#1f77d0",
    "ego": "#ff7f0e",
    "ego+": "#2ca02c",
}
FALLBACK_COLORS = ["#d62728", "#17becf", "#7f7f7f", "#bcbd22"]

# low -> high terrain shading stops (RGB in [0, 1])
_STOPS = [(0.16, 0.22, 0.34), (0.38, 0.50, 0.42), (0.72, 0.66, 0.48),
          (0.94, 0.92, 0.84)]


def _shade(t: float) -> str:
    pos = t * (len(_STOPS) - 1)
    k = min(int(pos), len(_STOPS) - 2)
    frac = pos - k
    rgb = [(1 - frac) * a + frac * b for a, b in zip(_STOPS[k], _STOPS[k + 1])]
    return "#" + "".join(f"{int(round(255 * c)):02x}" for c in rgb)


def render_trajectory(world, trajectories, out_path, *, start=None, goal=None,
                      cells: int = 96, size: int = 640) -> None:
    """Write an SVG of the world with zero or more labeled trajectories.

    ``trajectories`` is a list of (label, (T, >=2) pose array) pairs; every
    pose must lie inside the world extent.
    """
    (x0, x1), (y0, y1) = world.extent
    span = max(x1 - x0, y1 - y0)
    scale = size / span

    def sx(wx):
        return (wx - x0) * scale

    def sy(wy):
        # world +y up, svg +y down
        return size - (wy - y0) * scale

    for label, traj in trajectories:
        traj = np.asarray(traj, dtype=float)
        if traj.ndim != 2 or traj.shape[1] < 2:
            raise ContractError(f"trajectory {label!r} must be (T, >=2)")
        if (traj[:, 0].min() < x0 or traj[:, 0].max() > x1
                or traj[:, 1].min() < y0 or traj[:, 1].max() > y1):
            raise ContractError(f"trajectory {label!r} leaves the world extent")

    xs = np.linspace(x0, x1, cells + 1)
    ys = np.linspace(y0, y1, cells + 1)
    cx = (xs[:-1] + xs[1:]) / 2
    cy = (ys[:-1] + ys[1:]) / 2
    z = world.height(cx[:, None], cy[None, :])
    z_lo, z_hi = float(z.min()), float(z.max())
    norm = (z - z_lo) / (z_hi - z_lo) if z_hi > z_lo else np.full_like(z, 0.5)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size + 28}" '
        f'viewBox="0 0 {size} {size + 28}">',
        f'<rect width="{size}" height="{size + 28}" fill="#ffffff"/>',
    ]
    cell_w = (x1 - x0) / cells * scale
    cell_h = (y1 - y0) / cells * scale
    for a in range(cells):
        for b in range(cells):
            parts.append(
                f'<rect x="{sx(xs[a]):.2f}" y="{sy(ys[b + 1]):.2f}" '
                f'width="{cell_w + 0.5:.2f}" height="{cell_h + 0.5:.2f}" '
                f'fill="{_shade(float(norm[a, b]))}"/>')

    legend_entries = []
    for idx, (label, traj) in enumerate(trajectories):
        traj = np.asarray(traj, dtype=float)
        color = PALETTE.get(label, FALLBACK_COLORS[idx % len(FALLBACK_COLORS)])
        points = " ".join(f"{sx(px):.2f},{sy(py):.2f}" for px, py in traj[:, :2])
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" '
                     f'stroke-width="2.5" stroke-opacity="0.9"/>')
        legend_entries.append((label, color))

    if start is not None:
        parts.append(f'<circle cx="{sx(start[0]):.2f}" cy="{sy(start[1]):.2f}" r="6" '
                     f'fill="#1db954" stroke="#0a5c2a" stroke-width="1.5"/>')
    if goal is not None:
        gx, gy = sx(goal[0]), sy(goal[1])
        parts.append(f'<circle cx="{gx:.2f}" cy="{gy:.2f}" r="7" fill="none" '
                     f'stroke="#c00020" stroke-width="2"/>')
        parts.append(f'<path d="M {gx - 5:.2f} {gy - 5:.2f} L {gx + 5:.2f} {gy + 5:.2f} '
                     f'M {gx - 5:.2f} {gy + 5:.2f} L {gx + 5:.2f} {gy - 5:.2f}" '
                     f'stroke="#c00020" stroke-width="2"/>')

    tx = 8
    for label, color in legend_entries:
        parts.append(f'<line x1="{tx}" y1="{size + 14}" x2="{tx + 22}" y2="{size + 14}" '
                     f'stroke="{color}" stroke-width="3"/>')
        parts.append(f'<text x="{tx + 27}" y="{size + 18}" font-family="sans-serif" '
                     f'font-size="12">{label}</text>')
        tx += 27 + 8 * len(label) + 18
    parts.append("</svg>")
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
