"""Basins of attraction of the phase-opposition sinks ``(pi + 2 pi l, pi + 2 pi k)``."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import TWO_PI, Window, _coupling, apply_line_map
from .errors import NotConverging
from .symmetry import wrap_array, wrapped_difference

DEFAULT_EPS = 1e-6
DEFAULT_N_MAX = 100_000
SINK = np.array([np.pi, np.pi])


class AttractorHit(NamedTuple):
    l: int
    k: int
    iterations: int

    @property
    def location(self):
        return (np.pi + TWO_PI * self.l, np.pi + TWO_PI * self.k)


def iterate_batch(points, params, eps: float = DEFAULT_EPS, n_max: int = DEFAULT_N_MAX):
    """Iterate many initial points until each is within ``eps`` of a sink.

    Points are first reduced to ``[0, 2 pi)^2``; the orbit is followed
    unwrapped and the sink it reaches is identified from the final position
    plus the reduction offset.  An orbit that sits exactly on a fixed point
    other than a sink is stopped early as undecided.

    Returns:
        ``(labels, iterations, decided)`` where ``labels`` holds the
        ``(l, k)`` sink indices as an ``(N, 2)`` integer array.
    """
    a = _coupling(params)
    if eps <= 0 or n_max < 1:
        raise ValueError("need eps > 0 and n_max >= 1")
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    q, offset = wrap_array(p)
    n = len(q)
    labels = np.zeros((n, 2), dtype=np.int64)
    iters = np.full(n, -1, dtype=np.int64)
    decided = np.zeros(n, dtype=bool)

    idx = np.arange(n)
    z = q.copy()
    for step in range(n_max + 1):
        d = wrapped_difference(z - SINK)
        hit = np.hypot(d[:, 0], d[:, 1]) < eps
        if hit.any():
            h = idx[hit]
            labels[h] = np.rint((z[hit] - SINK) / TWO_PI).astype(np.int64) + offset[h]
            iters[h] = step
            decided[h] = True
            keep = ~hit
            idx, z = idx[keep], z[keep]
        if idx.size == 0 or step == n_max:
            break
        nz = apply_line_map(z, a)
        stuck = np.all(nz == z, axis=1)
        if stuck.any():
            keep = ~stuck
            idx, nz = idx[keep], nz[keep]
        z = nz
    return labels, iters, decided


def iterate_to_attractor(p, params, eps: float = DEFAULT_EPS,
                         n_max: int = DEFAULT_N_MAX) -> Optional[AttractorHit]:
    """Sink reached by the orbit of ``p``, or ``None`` if undecided after
    ``n_max`` steps."""
    labels, iters, decided = iterate_batch(np.asarray(p, dtype=float)[None, :], params, eps, n_max)
    if not decided[0]:
        return None
    return AttractorHit(int(labels[0, 0]), int(labels[0, 1]), int(iters[0]))


@dataclass
class BasinRaster:
    """Sink labels on the cell centres of a window.

    Arrays are indexed ``[j, i]`` with ``j`` the row (``y``) and ``i`` the
    column (``x``); row 0 is the bottom of the window.
    """

    window: Window
    nx: int
    ny: int
    labels: np.ndarray       # (ny, nx, 2) sink indices
    iterations: np.ndarray   # (ny, nx), -1 where undecided
    decided: np.ndarray      # (ny, nx) bool

    def cell_centers(self):
        return cell_centers(self.window, self.nx, self.ny)

    @property
    def catalog(self) -> list:
        lk = self.labels[self.decided]
        return sorted({(int(l), int(k)) for l, k in lk})

    def relative_labels(self):
        """Labels with the window's own 2 pi offset removed, for comparing
        rasters of translated windows."""
        shift = np.array([round(self.window.xmin / TWO_PI), round(self.window.ymin / TWO_PI)])
        return np.where(self.decided[..., None], self.labels - shift, 0)


def cell_centers(window: Window, nx: int, ny: int):
    dx = (window.xmax - window.xmin) / nx
    dy = (window.ymax - window.ymin) / ny
    xs = window.xmin + (np.arange(nx) + 0.5) * dx
    ys = window.ymin + (np.arange(ny) + 0.5) * dy
    X, Y = np.meshgrid(xs, ys)
    return np.stack([X, Y], axis=-1)


def rasterize_basin(window, nx: int, ny: int, params, eps: float = DEFAULT_EPS,
                    n_max: int = DEFAULT_N_MAX, workers: int = 1) -> BasinRaster:
    """Label every cell centre of ``window`` by the sink its orbit reaches.

    Cells are independent; with ``workers > 1`` row blocks are evaluated in
    a thread pool and the result is identical to the sequential one.
    """
    if not isinstance(window, Window):
        window = Window(*window)
    if nx < 2 or ny < 2:
        raise ValueError("raster needs nx, ny >= 2")
    a = _coupling(params)
    centers = cell_centers(window, nx, ny).reshape(-1, 2)

    if workers <= 1:
        labels, iters, decided = iterate_batch(centers, a, eps, n_max)
    else:
        blocks = np.array_split(np.arange(len(centers)), workers * 4)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: iterate_batch(centers[b], a, eps, n_max), blocks))
        labels = np.concatenate([r[0] for r in parts])
        iters = np.concatenate([r[1] for r in parts])
        decided = np.concatenate([r[2] for r in parts])
    return BasinRaster(window, nx, ny, labels.reshape(ny, nx, 2),
                       iters.reshape(ny, nx), decided.reshape(ny, nx))


def convergence_rate(p, params, n: int, near: float = 1e-2) -> float:
    """Empirical contraction ``|F^{n+1} p - p*| / |F^n p - p*|`` towards the
    nearest sink ``p*``.

    Raises:
        NotConverging: if ``F^n(p)`` is not within ``near`` of a sink, or
            has already landed on it exactly.
    """
    a = _coupling(params)
    z = np.asarray(p, dtype=float)
    for _ in range(n):
        z = apply_line_map(z, a)
    lk = np.rint((z - SINK) / TWO_PI)
    star = SINK + TWO_PI * lk
    d0 = float(np.hypot(*(z - star)))
    if d0 > near:
        raise NotConverging(f"orbit is {d0:.3e} from the nearest sink after {n} steps")
    if d0 == 0.0:
        raise NotConverging("orbit reached the sink exactly; use fewer steps")
    d1 = float(np.hypot(*(apply_line_map(z, a) - star)))
    return d1 / d0
