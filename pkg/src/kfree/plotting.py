"""Static figures: point-set patches (SVG or PPM) and density convergence plots.

SVG output is byte-stable: the hash salt is fixed and the date stamp dropped.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .analytics import DensityReport  # noqa: E402
from .errors import ConfigError  # noqa: E402
from .sieve import PointSet  # noqa: E402

_RC = {
    "svg.hashsalt": "kfree",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "path.simplify": False,
}


def _embed(points: np.ndarray, ring: str | None) -> np.ndarray:
    """Real embedding for Eisenstein coordinates: ``a + b*rho -> (a - b/2, b*sqrt(3)/2)``."""
    pts = points.astype(float)
    if ring != "eisenstein" or len(pts) == 0:
        return pts
    return np.column_stack([pts[:, 0] - 0.5 * pts[:, 1], pts[:, 1] * math.sqrt(3) / 2])


def _save(fig, path: Path) -> None:
    fmt = path.suffix.lstrip(".").lower() or "svg"
    meta = {"Software": None} if fmt == "png" else {"Date": None, "Creator": None}
    fig.savefig(path, format=fmt, metadata=meta)
    plt.close(fig)


def render_svg(sets: Sequence[PointSet], path: str | Path, embed: bool = False, title: str | None = None) -> Path:
    """First set as filled dots, the optional second as open circles, origin as a cross."""
    if not 1 <= len(sets) <= 2:
        raise ConfigError("render takes one or two point sets")
    if any(ps.box.d != 2 for ps in sets):
        raise ConfigError("only planar sets can be rendered")
    path = Path(path)
    R = max(ps.box.half_width for ps in sets)
    size = 8.0 / max(1.0, R / 10)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 6))
        styles = [
            dict(marker="o", s=size * 4, c="black", linewidths=0),
            dict(marker="o", s=size * 12, facecolors="none", edgecolors="tab:red", linewidths=0.6),
        ]
        for ps, style in zip(sets, styles):
            ring = ps.spec.ring if embed else None
            xy = _embed(ps.points, ring)
            if len(xy):
                ax.scatter(xy[:, 0], xy[:, 1], label=ps.spec.label(), **style)
        ax.plot([0], [0], marker="x", markersize=8, color="tab:blue", linestyle="none")
        ax.set_xlim(-R - 1, R + 1)
        ax.set_ylim(-R - 1, R + 1)
        ax.set_aspect("equal")
        ax.set_xticks([])
        ax.set_yticks([])
        if any(len(ps) for ps in sets):
            ax.legend(loc="upper center", bbox_to_anchor=(0.5, -0.01), ncol=2, fontsize=7, frameon=False)
        if title:
            ax.set_title(title)
        _save(fig, path)
    return path


def render_ppm(ps: PointSet, path: str | Path, scale: int = 3) -> Path:
    """Binary PPM with one ``scale x scale`` black block per point; origin in blue."""
    if ps.box.d != 2:
        raise ConfigError("only planar sets can be rendered")
    path = Path(path)
    side = ps.box.side
    img = np.full((side, side, 3), 255, dtype=np.uint8)
    R = ps.box.half_width
    if len(ps.points):
        # row index grows downwards, so flip the second coordinate
        img[R - ps.points[:, 1], ps.points[:, 0] + R] = 0
    img[R, R] = (40, 90, 200)
    img = img.repeat(scale, axis=0).repeat(scale, axis=1)
    h, w = img.shape[:2]
    path.write_bytes(f"P6\n{w} {h}\n255\n".encode() + img.tobytes())
    return path


def plot_density(report: DensityReport, path: str | Path) -> Path:
    """Empirical densities against the theoretical constant, with relative errors."""
    path = Path(path)
    with plt.rc_context(_RC):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
        radii = report.radii
        ax1.plot(radii, [float(e) for e in report.empirical], "o-", color="black", label="empirical")
        ax1.axhline(report.theoretical.value, color="tab:red", lw=0.8,
                    label=f"theoretical ({report.theoretical.provenance})")
        ax1.set_xscale("log")
        ax1.set_xlabel("box half-width R")
        ax1.set_ylabel("density")
        ax1.legend(fontsize=7)
        ax2.loglog(radii, [max(e, 1e-16) for e in report.relative_errors], "s-", color="tab:blue")
        ax2.set_xlabel("box half-width R")
        ax2.set_ylabel("relative error")
        fig.suptitle(report.spec.label())
        fig.tight_layout()
        _save(fig, path)
    return path
