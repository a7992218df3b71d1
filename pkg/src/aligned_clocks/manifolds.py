"""Invariant manifolds of the saddles and the separatrix of ``S_10``.

Branches are grown from a fundamental segment next to the saddle: the
segment is pushed forward by ``F`` (unstable) or ``F^-1`` (stable), one
fundamental domain per step.  When neighbouring image points drift further
apart than the step bound, a midpoint is inserted in seed coordinates and
re-iterated from the seed, so every vertex is an exact orbit point of the
seed segment.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    TWO_PI,
    CouplingParams,
    Curve2D,
    FixedPointInfo,
    PhasePoint,
    _coupling,
    apply_line_map,
    apply_line_map_inverse,
    fixed_point,
)
from .errors import GraphValidationFailed, NotASaddle, StepCollapse
from .symmetry import S10, DiagonalBox, s10_internal_rotation

log = logging.getLogger(__name__)

SEED_POINTS = 32
DEFAULT_DELTA = 1e-4
DEFAULT_STEP = 1e-3
STAGNATION = 1e-9

# The four quarter squares of S_10 around its centre (pi, 0).
SMALL_SQUARES = {
    "s1": DiagonalBox(-np.pi, 0.0, 0.0, np.pi),
    "s2": DiagonalBox(-np.pi, 0.0, np.pi, TWO_PI),
    "s3": DiagonalBox(-TWO_PI, -np.pi, 0.0, np.pi),
    "s4": DiagonalBox(-TWO_PI, -np.pi, np.pi, TWO_PI),
}


@dataclass
class ManifoldBranch:
    saddle: FixedPointInfo
    direction: str
    side: int
    polyline: Curve2D
    delta: float
    step: float
    iterations: int
    stagnated: bool

    @property
    def head(self) -> PhasePoint:
        return PhasePoint(*self.polyline.vertices[-1])

    @property
    def vertices(self) -> np.ndarray:
        return self.polyline.vertices


def _coarsen(pts, t, step):
    # Halve the sample density while the decimated polyline stays well below
    # the step bound; keeps shrinking domains from piling up vertices.
    while len(pts) > 3:
        idx = np.arange(0, len(pts), 2)
        if idx[-1] != len(pts) - 1:
            idx = np.append(idx, len(pts) - 1)
        gaps = np.hypot(*np.diff(pts[idx], axis=0).T)
        if gaps.max() > 0.5 * step:
            break
        pts, t = pts[idx], t[idx]
    return pts, t


def grow_manifold(saddle: FixedPointInfo, direction: str, side: int, params,
                  delta: float = DEFAULT_DELTA, max_arclength: float = 20.0,
                  step: float = DEFAULT_STEP, seed_points: int = SEED_POINTS,
                  max_domains: int = 20000) -> ManifoldBranch:
    """Grow one branch of the stable or unstable manifold of a saddle.

    Args:
        saddle: fixed point with one eigenvalue on each side of 1.
        direction: ``"stable"`` (grown under ``F^-1``) or ``"unstable"``
            (grown under ``F``).
        side: +1 or -1, the orientation along the eigenvector as returned
            by :func:`aligned_clocks.core.eigenvector` (second component 1).
        delta: distance of the seed segment's outer end from the saddle.
        max_arclength: stop once the branch is at least this long.
        step: bound on the spacing of consecutive vertices.

    Growth also stops when the head moves less than ``1e-9`` in one
    domain, i.e. it has stalled next to another fixed point.
    """
    a = _coupling(params)
    if saddle.stability != "saddle":
        raise NotASaddle(f"{saddle.family} at {tuple(saddle.location)} is a {saddle.stability}")
    if direction not in ("stable", "unstable"):
        raise ValueError(f"direction must be 'stable' or 'unstable', got {direction!r}")
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    if not 0.0 < delta <= 1e-3:
        raise ValueError(f"seed offset must lie in (0, 1e-3], got {delta}")

    lam_s, lam_u = saddle.eigenvalues
    if direction == "stable":
        vec, growth = saddle.eigenvectors[0], 1.0 / lam_s

        def advance(p):
            return apply_line_map_inverse(p, a)
    else:
        vec, growth = saddle.eigenvectors[1], lam_u

        def advance(p):
            return apply_line_map(p, a)

    origin = np.array(saddle.location, dtype=float)
    v = side * np.asarray(vec, dtype=float)
    v /= np.hypot(*v)
    s0 = origin + (delta / growth) * v
    s1 = advance(s0)
    if np.hypot(*(s1 - s0)) > step:
        raise StepCollapse(f"seed segment longer than step bound {step}; reduce delta")

    def seed(t):
        out = s0 + t[:, None] * (s1 - s0)
        out[t == 1.0] = s1
        return out

    def orbit(t, n):
        p = seed(t)
        for _ in range(n):
            p = advance(p)
        return p

    t = np.linspace(0.0, 1.0, seed_points)
    pts = seed(t)
    chunks = [pts]
    length = float(np.sum(np.hypot(*np.diff(pts, axis=0).T)))
    stagnated = False
    n = 0
    while n < max_domains and length < max_arclength:
        n += 1
        new = advance(pts)
        for _ in range(60):
            gaps = np.hypot(*np.diff(new, axis=0).T)
            wide = np.flatnonzero(gaps > step)
            if wide.size == 0:
                break
            t_mid = 0.5 * (t[wide] + t[wide + 1])
            if np.any((t_mid <= t[wide]) | (t_mid >= t[wide + 1])):
                raise StepCollapse(
                    f"cannot meet spacing bound {step} after {n} domains; seed offset too large"
                )
            mids = orbit(t_mid, n)
            t = np.insert(t, wide + 1, t_mid)
            new = np.insert(new, wide + 1, mids, axis=0)
        else:
            raise StepCollapse(f"refinement did not converge at domain {n}")
        new, t = _coarsen(new, t, step)
        moved = float(np.hypot(*(new[-1] - pts[-1])))
        chunks.append(new[1:])
        length += float(np.sum(np.hypot(*np.diff(new, axis=0).T)))
        pts = new
        if moved < STAGNATION:
            stagnated = True
            break

    verts = np.concatenate(chunks)
    log.debug("grew %s branch: %d domains, %d vertices, length %.4f",
              direction, n, len(verts), length)
    return ManifoldBranch(saddle, direction, side, Curve2D(verts, "manifold"),
                          delta, step, n, stagnated)


# -- separatrix ------------------------------------------------------------

@dataclass
class SeparatrixCurve:
    """``eta``: closure of the two heteroclinics of ``S_10`` through ``(pi, 0)``.

    ``left`` runs from the saddle to ``(0, 0)`` (as grown), ``right`` from the
    saddle to ``(2 pi, 0)``.  ``eta`` joins them with the three anchors into
    a polyline with strictly increasing ``x``.
    """

    left: Curve2D
    right: Curve2D
    eta: Curve2D
    params: CouplingParams

    def y_at(self, x):
        return np.interp(x, self.eta.x, self.eta.y)


def build_separatrix(params, delta: float = DEFAULT_DELTA, step: float = DEFAULT_STEP) -> SeparatrixCurve:
    """Grow the stable branch of ``(pi, 0)`` into ``s1``, rotate it onto
    ``s4`` and validate the joined curve.

    Raises:
        GraphValidationFailed: if the joined curve is not a graph over ``x``
            or misses one of its anchors.
    """
    params = params if isinstance(params, CouplingParams) else CouplingParams(params)
    saddle = fixed_point("P2", 0, 0, params)
    branch = grow_manifold(saddle, "stable", -1, params, delta=delta, step=step)
    left = branch.vertices
    right = s10_internal_rotation(left)

    anchors = np.array([[0.0, 0.0], [np.pi, 0.0], [TWO_PI, 0.0]])
    for end, anchor in ((left[-1], anchors[0]), (right[-1], anchors[2])):
        if np.hypot(*(end - anchor)) > 1e-6:
            raise GraphValidationFailed(
                f"heteroclinic ends at {tuple(end)}, not within 1e-6 of {tuple(anchor)}"
            )
    eta = np.concatenate([anchors[:1], left[::-1], anchors[1:2], right, anchors[2:]])
    eta = Curve2D(eta, "manifold").vertices
    dx = np.diff(eta[:, 0])
    if np.any(dx <= 0.0):
        i = int(np.argmax(dx <= 0.0))
        raise GraphValidationFailed(
            f"separatrix is not a graph over x near x = {eta[i, 0]:.6f}"
        )
    return SeparatrixCurve(Curve2D(left, "manifold"), Curve2D(right, "manifold"),
                           Curve2D(eta, "manifold"), params)


REGION_CODES = {"S10_plus": 1, "S10_minus": -1, "on_separatrix": 0, "outside_S10": 2}
_CODE_NAMES = {v: k for k, v in REGION_CODES.items()}


def classify_regions(points, sep: SeparatrixCurve, tol: float = 1e-9, square_tol: float = 1e-12):
    """Vectorised :func:`classify_region`, returning the integer codes of
    :data:`REGION_CODES`."""
    p = np.asarray(points, dtype=float)
    inside = S10.contains(p, square_tol)
    gap = p[..., 1] - sep.y_at(p[..., 0])
    code = np.where(gap > tol, 1, np.where(gap < -tol, -1, 0))
    return np.where(inside, code, 2)


def classify_region(p, sep: SeparatrixCurve, tol: float = 1e-9) -> str:
    """Which side of ``eta`` a point of ``S_10`` lies on."""
    return _CODE_NAMES[int(classify_regions(np.asarray(p, dtype=float), sep, tol))]


# -- polyline geometry -----------------------------------------------------

def point_to_polyline_distance(points, polyline, k: int = 8):
    """Distance from each point to a polyline (segments, not just vertices)."""
    from scipy.spatial import cKDTree

    pts = np.atleast_2d(np.asarray(points, dtype=float))
    poly = np.asarray(polyline, dtype=float)
    k = min(k, len(poly))
    _, idx = cKDTree(poly).query(pts, k=k)
    idx = idx.reshape(len(pts), -1)
    best = np.full(len(pts), np.inf)
    for j in range(idx.shape[1]):
        for off in (-1, 0):
            i0 = np.clip(idx[:, j] + off, 0, len(poly) - 2)
            a, b = poly[i0], poly[i0 + 1]
            ab = b - a
            denom = np.einsum("ij,ij->i", ab, ab)
            s = np.where(denom > 0, np.einsum("ij,ij->i", pts - a, ab) / np.where(denom > 0, denom, 1), 0.0)
            s = np.clip(s, 0.0, 1.0)
            d = np.hypot(*(pts - (a + s[:, None] * ab)).T)
            best = np.minimum(best, d)
    return best


def hausdorff_distance(c1, c2) -> float:
    """Symmetric Hausdorff distance between two polylines."""
    v1 = c1.vertices if isinstance(c1, Curve2D) else np.asarray(c1, dtype=float)
    v2 = c2.vertices if isinstance(c2, Curve2D) else np.asarray(c2, dtype=float)
    return float(max(point_to_polyline_distance(v1, v2).max(),
                     point_to_polyline_distance(v2, v1).max()))


def saddle_connection(params, delta: float = DEFAULT_DELTA, step: float = DEFAULT_STEP) -> ManifoldBranch:
    """Unstable branch of ``(pi, 0)`` pointing into ``s2``; it ends at the
    sink ``(pi, pi)``."""
    saddle = fixed_point("P2", 0, 0, params)
    return grow_manifold(saddle, "unstable", 1, params, delta=delta, step=step)


def exit_edge(p, params, max_steps: int = 100000) -> Optional[str]:
    """Follow the orbit of a point of ``s1`` until it leaves ``s1``.

    Returns ``"l1"`` if it exits into ``s2`` across ``y = pi - x``,
    ``"l2"`` if it exits into ``s3`` across ``y = x - pi``, ``None`` if it
    never leaves within ``max_steps``.
    """
    a = _coupling(params)
    s1 = SMALL_SQUARES["s1"]
    q = np.asarray(p, dtype=float)
    for _ in range(max_steps):
        q = apply_line_map(q, a)
        m = s1.margins(q)
        if m.min() < 0.0:
            if m[3] < 0.0 and m[3] <= m[0]:
                return "l1"
            if m[0] < 0.0:
                return "l2"
            return "other"
    return None
