"""Minimal deterministic SVG output for region and scaling plots.

Hand-rolled on purpose: every coordinate is formatted with a fixed precision
and the viewport math is explicit, so a plot produced twice from the same
data is byte-identical and can be pinned by golden files.
"""

from __future__ import annotations

import math

import numpy as np

from ..regions import EnclosureRegion, XiRegion, gamma_polyline, z_star

__all__ = ["SvgCanvas", "plot_loglog", "plot_region", "plot_spectrum_region"]


def _fmt(v: float) -> str:
    out = f"{v:.4f}"
    return "0.0000" if out == "-0.0000" else out


class SvgCanvas:
    """Fixed-viewport canvas mapping world coordinates to pixels."""

    def __init__(self, viewport, width: int = 640, height: int = 480):
        xmin, xmax, ymin, ymax = viewport
        if not (xmax > xmin and ymax > ymin):
            raise ValueError(f"degenerate viewport {viewport}")
        self.viewport = (float(xmin), float(xmax), float(ymin), float(ymax))
        self.width = int(width)
        self.height = int(height)
        self._elems: list[str] = []

    def _px(self, x: float) -> float:
        xmin, xmax, _, _ = self.viewport
        return (x - xmin) / (xmax - xmin) * self.width

    def _py(self, y: float) -> float:
        _, _, ymin, ymax = self.viewport
        return self.height - (y - ymin) / (ymax - ymin) * self.height

    def polyline(self, points, stroke="#1f4e79", width=1.5, dashed=False):
        if len(points) < 2:
            return
        coords = " ".join(
            f"{_fmt(self._px(p.real))},{_fmt(self._py(p.imag))}" for p in points
        )
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        self._elems.append(
            f'<polyline points="{coords}" fill="none" stroke="{stroke}" '
            f'stroke-width="{width}"{dash}/>'
        )

    def circle(self, center, radius_world, stroke="#777777", width=1.0, dashed=False):
        # world-radius circle; x scale is used (plots keep a square aspect)
        xmin, xmax, _, _ = self.viewport
        r = radius_world / (xmax - xmin) * self.width
        dash = ' stroke-dasharray="4,3"' if dashed else ""
        self._elems.append(
            f'<circle cx="{_fmt(self._px(center.real))}" cy="{_fmt(self._py(center.imag))}" '
            f'r="{_fmt(r)}" fill="none" stroke="{stroke}" stroke-width="{width}"{dash}/>'
        )

    def dot(self, point, radius_px=2.5, fill="#c0392b"):
        self._elems.append(
            f'<circle cx="{_fmt(self._px(point.real))}" cy="{_fmt(self._py(point.imag))}" '
            f'r="{_fmt(radius_px)}" fill="{fill}"/>'
        )

    def axes(self, stroke="#bbbbbb"):
        xmin, xmax, ymin, ymax = self.viewport
        if ymin < 0 < ymax:
            self.polyline([complex(xmin, 0), complex(xmax, 0)], stroke=stroke, width=0.8)
        if xmin < 0 < xmax:
            self.polyline([complex(0, ymin), complex(0, ymax)], stroke=stroke, width=0.8)

    def render(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect width="{self.width}" height="{self.height}" fill="#ffffff"/>\n'
        )
        return head + "\n".join(self._elems) + "\n</svg>\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(self.render())


def _xi_lambda_for_radius(alpha: float, radius: float) -> float:
    lam_min = 1.0 / math.tan(math.pi / alpha)
    lam = math.sqrt(max(radius ** (2.0 / alpha) - 1.0, 0.0))
    return max(lam, lam_min + 1.0)


def plot_region(
    alpha: float,
    path,
    *,
    viewport=None,
    width: int = 640,
    height: int = 480,
    n_points: int = 1024,
) -> None:
    """Arc pair and meeting point; fixed viewport derived from the geometry."""
    zst = z_star(alpha)
    if viewport is None:
        extent = 2.5 * abs(zst)
        viewport = (-2.2 * abs(zst), 1.6 * abs(zst), -extent, extent)
    canvas = SvgCanvas(viewport, width, height)
    canvas.axes()
    radius = 2.0 * max(abs(v) for v in viewport)
    pts = gamma_polyline(alpha, _xi_lambda_for_radius(alpha, radius), n_points)
    canvas.polyline(pts, stroke="#1f4e79")
    canvas.polyline(np.conj(pts), stroke="#1f4e79")
    # the half-line inside the exterior component
    canvas.polyline([complex(viewport[0], 0.0), complex(zst, 0.0)], stroke="#2e8b57", dashed=True)
    canvas.dot(complex(zst, 0.0), fill="#2e8b57")
    canvas.write(path)


def _central_radius(region: EnclosureRegion) -> float | None:
    """Outer radius of the central sublevel disc, if the level is reached."""
    level = region.C * region.vnorm
    if level <= 0:
        return None
    lo, hi = 0.0, 1.0
    for _ in range(200):
        if region.central_value(hi) >= level:
            break
        hi *= 2.0
        if hi > 1e12:
            return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if region.central_value(mid) < level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def plot_spectrum_region(
    spectrum,
    region: EnclosureRegion | None,
    xi: XiRegion | None = None,
    *,
    path,
    viewport=None,
    width: int = 640,
    height: int = 480,
) -> None:
    """Eigenvalue dots, enclosure discs, central-region contour, arc pair.

    Layout is deterministic: the auto viewport is computed from the data with
    fixed rounding, so identical inputs give identical bytes.
    """
    spectrum = np.asarray(spectrum, dtype=complex)
    if viewport is None:
        xs, ys = [0.0], [0.0]
        if len(spectrum):
            xs += list(spectrum.real)
            ys += list(spectrum.imag)
        if region is not None:
            shown = region.centers[region.centers <= np.partition(
                region.centers, min(8, len(region.centers) - 1)
            )[min(8, len(region.centers) - 1)]]
            for c, r in zip(region.centers, region.radii):
                if c in shown:
                    xs += [c - r, c + r]
                    ys += [-r, r]
        if xi is not None:
            xs.append(xi.zstar * 1.5)
        span_x = max(xs) - min(xs) or 1.0
        span_y = max(ys) - min(ys) or 1.0
        pad_x, pad_y = 0.08 * span_x, 0.25 * span_y
        ylim = max(abs(min(ys) - pad_y), abs(max(ys) + pad_y))
        viewport = (
            round(min(xs) - pad_x, 3),
            round(max(xs) + pad_x, 3),
            -round(ylim, 3),
            round(ylim, 3),
        )
    canvas = SvgCanvas(viewport, width, height)
    canvas.axes()
    if xi is not None:
        radius = 2.0 * max(abs(v) for v in viewport)
        pts = gamma_polyline(xi.alpha, _xi_lambda_for_radius(xi.alpha, radius), 1024)
        canvas.polyline(pts, stroke="#1f4e79")
        canvas.polyline(np.conj(pts), stroke="#1f4e79")
    if region is not None:
        xmax = viewport[1]
        seen = set()
        for c, r in zip(region.centers, region.radii):
            key = (round(float(c), 12), round(float(r), 12))
            if key in seen or c > xmax:
                continue
            seen.add(key)
            canvas.circle(complex(c, 0.0), r, stroke="#777777")
        rc = _central_radius(region)
        if rc is not None:
            canvas.circle(0j, rc, stroke="#b8860b", dashed=True)
    for z in spectrum:
        canvas.dot(z)
    canvas.write(path)


def plot_loglog(points, path, *, width: int = 640, height: int = 480, label=""):
    """Log-log polyline of positive (x, y) pairs with fitted-line overlay."""
    pts = [(float(x), float(y)) for x, y in points if x > 0 and y > 0]
    if len(pts) < 2:
        raise ValueError("need at least two positive points")
    lx = [math.log10(x) for x, _ in pts]
    ly = [math.log10(y) for _, y in pts]
    pad = 0.05
    viewport = (
        min(lx) - pad,
        max(lx) + pad,
        min(ly) - pad * 4,
        max(ly) + pad * 4,
    )
    canvas = SvgCanvas(viewport, width, height)
    canvas.polyline([complex(a, b) for a, b in zip(lx, ly)], stroke="#1f4e79")
    for a, b in zip(lx, ly):
        canvas.dot(complex(a, b))
    canvas.write(path)
