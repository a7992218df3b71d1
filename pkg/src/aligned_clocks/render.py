"""Plain-text and binary writers: CSV, SVG 1.1 and binary PPM (P6)."""
from __future__ import annotations

import io
from typing import Iterable, Sequence

import numpy as np

from .core import Window

# Sink colours by (l mod 2, k mod 2); undecided cells are black.
PALETTE = {
    (0, 0): (230, 159, 0),
    (1, 0): (86, 180, 233),
    (0, 1): (0, 158, 115),
    (1, 1): (204, 121, 167),
}
UNDECIDED = (0, 0, 0)

CURVE_COLORS = {
    "nullcline-vertical": "#d55e00",
    "nullcline-horizontal": "#0072b2",
    "manifold": "#000000",
    "other": "#555555",
}
MARKER_COLORS = {"source": "#d55e00", "saddle": "#009e73", "sink": "#0072b2"}


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def basin_rgb(labels: np.ndarray, decided: np.ndarray) -> np.ndarray:
    """RGB image, row 0 at the top (largest ``y``)."""
    ny, nx = decided.shape
    img = np.zeros((ny, nx, 3), dtype=np.uint8)
    par = np.mod(labels, 2)
    for (pl, pk), rgb in PALETTE.items():
        mask = decided & (par[..., 0] == pl) & (par[..., 1] == pk)
        img[mask] = rgb
    img[~decided] = UNDECIDED
    return img[::-1]


def ppm_bytes(img: np.ndarray) -> bytes:
    h, w, _ = img.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def read_ppm(data: bytes) -> np.ndarray:
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4], dtype=np.uint8).reshape(h, w, 3)


class SvgCanvas:
    """Minimal SVG builder mapping a phase-plane window onto pixels."""

    def __init__(self, window: Window, width: int = 600, margin: int = 20):
        self.window = window
        span_x = window.xmax - window.xmin
        span_y = window.ymax - window.ymin
        self.scale = (width - 2 * margin) / span_x
        self.margin = margin
        self.width = width
        self.height = int(round(span_y * self.scale)) + 2 * margin
        self.items = []

    def xy(self, x, y):
        px = self.margin + (x - self.window.xmin) * self.scale
        py = self.height - self.margin - (y - self.window.ymin) * self.scale
        return px, py

    def _pts(self, vertices):
        return " ".join(f"{px:.3f},{py:.3f}" for px, py in (self.xy(x, y) for x, y in vertices))

    def path(self, vertices, color="#000000", width=1.5, cls="curve"):
        pts = [self.xy(x, y) for x, y in vertices]
        d = "M " + " L ".join(f"{px:.3f} {py:.3f}" for px, py in pts)
        self.items.append(
            f'<path class="{cls}" d="{d}" fill="none" stroke="{color}" stroke-width="{width}"/>'
        )

    def polygon(self, vertices, color="#888888", fill="none", cls="region"):
        self.items.append(
            f'<polygon class="{cls}" points="{self._pts(vertices)}" fill="{fill}" '
            f'stroke="{color}" stroke-width="1" stroke-dasharray="4 3"/>'
        )

    def marker(self, x, y, color="#000000", r=4.0, title=""):
        px, py = self.xy(x, y)
        t = f"<title>{title}</title>" if title else ""
        self.items.append(
            f'<circle class="marker" cx="{px:.3f}" cy="{py:.3f}" r="{r}" fill="{color}">{t}</circle>'
        )

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect width="{self.width}" height="{self.height}" fill="#ffffff"/>\n'
        )
        return head + "\n".join(self.items) + "\n</svg>\n"
