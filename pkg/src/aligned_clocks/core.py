"""Phase-difference maps for three impact-coupled clocks.

The line model ``F`` couples clock A (centre) with its neighbours B and C;
the triangle model ``Omega`` adds the direct B-C interaction.  State is the
pair ``(x, y)`` of phase differences of B and C relative to A, in raw
radians.  Every map accepts arrays of shape ``(..., 2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DegenerateCoupling, EmptyWindow, InvalidParameters, NonConvergence

TWO_PI = 2.0 * np.pi
A_MAX = 1.0 / 6.0

INVERSE_TOL = 1e-12
INVERSE_MAX_ITER = 50


class PhasePoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class CouplingParams:
    """Coupling strength of the impact interaction.

    ``a`` must satisfy ``0 < a < 1/6``; in that range the map is a global
    diffeomorphism of the plane.  The optional physical parameters record
    where ``a`` came from when built with :meth:`from_physical`.
    """

    a: float
    alpha: Optional[float] = None
    mu: Optional[float] = None
    h: Optional[float] = None

    def __post_init__(self):
        a = float(self.a)
        if not np.isfinite(a):
            raise InvalidParameters(f"coupling a must be finite, got {self.a!r}")
        if a == 0.0:
            raise DegenerateCoupling("coupling a = 0 gives the identity map; need 0 < a < 1/6")
        if not 0.0 < a < A_MAX:
            raise InvalidParameters(f"coupling a = {a!r} outside the diffeomorphism range 0 < a < 1/6")
        object.__setattr__(self, "a", a)

    @classmethod
    def from_physical(cls, alpha: float, mu: float, h: float) -> "CouplingParams":
        """Build from the clock's coupling force ``alpha``, dry friction ``mu``
        and kick speed ``h`` via ``a = alpha * mu / (8 h^2)``."""
        if h == 0:
            raise InvalidParameters("h must be non-zero")
        return cls(a=alpha * mu / (8.0 * h * h), alpha=alpha, mu=mu, h=h)


def _coupling(params) -> float:
    if isinstance(params, CouplingParams):
        return params.a
    return CouplingParams(params).a


@dataclass(frozen=True)
class Window:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.xmax, self.ymin, self.ymax)
        if not all(np.isfinite(v) for v in vals):
            raise EmptyWindow(f"window bounds must be finite: {vals}")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise EmptyWindow(f"degenerate window {vals}")

    def shifted(self, dx: float, dy: float) -> "Window":
        return Window(self.xmin + dx, self.xmax + dx, self.ymin + dy, self.ymax + dy)

    def as_tuple(self):
        return (self.xmin, self.xmax, self.ymin, self.ymax)


FUNDAMENTAL_WINDOW = Window(0.0, TWO_PI, 0.0, TWO_PI)


@dataclass
class Curve2D:
    """Ordered polyline in the phase plane."""

    vertices: np.ndarray
    tag: str = "other"

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        if len(v) > 1:
            keep = np.ones(len(v), dtype=bool)
            keep[1:] = np.any(v[1:] != v[:-1], axis=1)
            v = v[keep]
        if len(v) < 2:
            raise ValueError("a curve needs at least two distinct vertices")
        self.vertices = v

    def __len__(self):
        return len(self.vertices)

    @property
    def x(self):
        return self.vertices[:, 0]

    @property
    def y(self):
        return self.vertices[:, 1]

    def arclength(self) -> float:
        return float(np.sum(np.hypot(*np.diff(self.vertices, axis=0).T)))


def lattice_sin(x):
    """Sine reduced against the nearest multiple of pi.

    Multiples of ``np.pi`` map to an exact zero, so the fixed-point lattice
    of the maps is fixed exactly in floating point.
    """
    x = np.asarray(x, dtype=float)
    k = np.rint(x / np.pi)
    s = np.sin(x - k * np.pi)
    return np.where(np.fmod(k, 2.0) == 0.0, s, -s)


def _split(p):
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != 2:
        raise ValueError(f"expected points with trailing dimension 2, got shape {p.shape}")
    return p, p[..., 0], p[..., 1]


def perturbation_field(p):
    """Return ``(phi(x, y), phi(y, x))`` with ``phi(x, y) = 2 sin x + sin y``."""
    p, x, y = _split(p)
    sx, sy = lattice_sin(x), lattice_sin(y)
    return np.stack([2.0 * sx + sy, sx + 2.0 * sy], axis=-1)


def apply_line_map(p, params):
    """One step of the nearest-neighbour line model,
    ``(x + 2a sin x + a sin y, y + a sin x + 2a sin y)``."""
    a = _coupling(params)
    p = np.asarray(p, dtype=float)
    return p + a * perturbation_field(p)


def jacobian(p, params):
    """Jacobian of the line map, shape ``(..., 2, 2)``."""
    a = _coupling(params)
    p, x, y = _split(p)
    cx, cy = np.cos(x), np.cos(y)
    return np.stack(
        [np.stack([1.0 + 2.0 * a * cx, a * cy], axis=-1),
         np.stack([a * cx, 1.0 + 2.0 * a * cy], axis=-1)],
        axis=-2,
    )


def jacobian_determinant(p, params):
    a = _coupling(params)
    p, x, y = _split(p)
    cx, cy = np.cos(x), np.cos(y)
    return 1.0 + 2.0 * a * (cx + cy) + 3.0 * a * a * cx * cy


def apply_line_map_inverse(p, params, tol: float = INVERSE_TOL, max_iter: int = INVERSE_MAX_ITER):
    """Invert the line map by damped Newton iteration seeded at ``p``.

    Raises:
        NonConvergence: if the sup-norm residual stays above ``tol`` after
            ``max_iter`` iterations.
    """
    a = _coupling(params)
    target = np.asarray(p, dtype=float)
    flat = target.reshape(-1, 2)
    q = flat.copy()
    res = apply_line_map(q, a) - flat
    err = np.max(np.abs(res), axis=-1)
    # Relative floor: the residual of a huge coordinate cannot beat its own ulp.
    thresh = np.maximum(tol, 8.0 * np.spacing(np.max(np.abs(flat), axis=-1)))
    for _ in range(max_iter):
        active = err > thresh
        if not active.any():
            return _polish(q, res, err, flat, a).reshape(target.shape)
        qa, ra, ea = q[active], res[active], err[active]
        step = np.linalg.solve(jacobian(qa, a), ra[..., None])[..., 0]
        lam = np.ones(len(qa))
        trial = qa - step
        tres = apply_line_map(trial, a) - flat[active]
        terr = np.max(np.abs(tres), axis=-1)
        for _ in range(30):
            worse = terr > ea
            if not worse.any():
                break
            lam[worse] *= 0.5
            trial[worse] = qa[worse] - lam[worse, None] * step[worse]
            tres[worse] = apply_line_map(trial[worse], a) - flat[active][worse]
            terr[worse] = np.max(np.abs(tres[worse]), axis=-1)
        q[active], res[active], err[active] = trial, tres, terr
    if np.any(err > thresh):
        raise NonConvergence(
            f"inverse map residual {err.max():.3e} above {tol:g} after {max_iter} iterations"
        )
    return q.reshape(target.shape)


def _polish(q, res, err, target, a):
    # One extra Newton step is nearly free and buys several digits.
    step = np.linalg.solve(jacobian(q, a), res[..., None])[..., 0]
    trial = q - step
    terr = np.max(np.abs(apply_line_map(trial, a) - target), axis=-1)
    better = terr < err
    q[better] = trial[better]
    return q


def apply_triangle_map(p, params):
    """One step of the all-to-all (triangle) model, which adds the direct
    ``sin(x - y)`` interaction between the outer clocks."""
    a = _coupling(params)
    p, x, y = _split(p)
    sx, sy, sxy = lattice_sin(x), lattice_sin(y), lattice_sin(x - y)
    return np.stack(
        [x + a * (2.0 * sx + sy + sxy), y + a * (sx + 2.0 * sy - sxy)], axis=-1
    )


def triangle_locked_states():
    """The two 120-degree configurations fixed by the triangle map."""
    return (PhasePoint(TWO_PI / 3.0, 2.0 * TWO_PI / 3.0),
            PhasePoint(2.0 * TWO_PI / 3.0, TWO_PI / 3.0))


def iterate(p, params, n: int, map_fn=None):
    """Orbit ``[p, F(p), ..., F^n(p)]`` as an ``(n + 1, ..., 2)`` array."""
    step = apply_line_map if map_fn is None else map_fn
    a = _coupling(params)
    out = [np.asarray(p, dtype=float)]
    for _ in range(n):
        out.append(step(out[-1], a))
    return np.stack(out)


# -- fixed points ----------------------------------------------------------

FAMILIES = ("P0", "P1", "P2", "P3")
_FAMILY_OFFSET = {"P0": (0.0, 0.0), "P1": (0.0, np.pi), "P2": (np.pi, 0.0), "P3": (np.pi, np.pi)}


@dataclass(frozen=True)
class FixedPointInfo:
    location: PhasePoint
    family: str
    l: int
    k: int
    eigenvalues: tuple
    eigenvectors: tuple = field(repr=False)
    stability: str = ""

    @property
    def is_saddle(self) -> bool:
        return self.stability == "saddle"


def family_eigenvalues(family: str, a: float) -> tuple:
    """Closed-form eigenvalues of each fixed-point family, ascending."""
    r3 = np.sqrt(3.0)
    table = {
        "P0": (1.0 + a, 1.0 + 3.0 * a),
        "P1": (1.0 - a * r3, 1.0 + a * r3),
        "P2": (1.0 - a * r3, 1.0 + a * r3),
        "P3": (1.0 - 3.0 * a, 1.0 - a),
    }
    return tuple(float(v) for v in table[family])


def classify_eigenvalues(eigenvalues: Sequence[float]) -> str:
    mods = np.abs(np.asarray(eigenvalues, dtype=float))
    if np.all(mods > 1.0):
        return "source"
    if np.all(mods < 1.0):
        return "sink"
    return "saddle"


def eigenvector(jac: np.ndarray, lam: float) -> tuple:
    """Eigenvector of a 2x2 matrix for the eigenvalue ``lam``.

    Scaled so the second component is 1 when that component is usable,
    otherwise to unit length.
    """
    (p, q), (r, s) = jac
    c1 = np.array([q, lam - p])
    c2 = np.array([lam - s, r])
    v = c1 if np.hypot(*c1) >= np.hypot(*c2) else c2
    norm = np.hypot(*v)
    if norm == 0.0:
        # Scalar multiple of the identity; any direction works.
        return (1.0, 0.0)
    if abs(v[1]) > 1e-12 * norm:
        v = v / v[1]
    else:
        v = v / norm
    return (float(v[0]), float(v[1]))


def fixed_point(family: str, l: int, k: int, params) -> FixedPointInfo:
    if family not in _FAMILY_OFFSET:
        raise ValueError(f"unknown fixed-point family {family!r}")
    a = _coupling(params)
    ox, oy = _FAMILY_OFFSET[family]
    loc = PhasePoint(ox + TWO_PI * l, oy + TWO_PI * k)
    lams = family_eigenvalues(family, a)
    jac = jacobian(np.array(loc), a)
    vecs = tuple(eigenvector(jac, lam) for lam in lams)
    return FixedPointInfo(loc, family, int(l), int(k), lams, vecs, classify_eigenvalues(lams))


def fixed_points(params, l_range=(0, 0), k_range=(0, 0)) -> list:
    """All fixed points of the line map with ``l`` and ``k`` in the inclusive
    index ranges, ordered by family, then ``l``, then ``k``."""
    out = []
    for fam in FAMILIES:
        for l in range(l_range[0], l_range[1] + 1):
            for k in range(k_range[0], k_range[1] + 1):
                out.append(fixed_point(fam, l, k, params))
    return out


# -- nullclines ------------------------------------------------------------

def _phi(x, y):
    return 2.0 * lattice_sin(x) + lattice_sin(y)


def nullclines(params, window: Window = FUNDAMENTAL_WINDOW, resolution: int = 512) -> list:
    """Zero sets of the two components of the perturbation field.

    ``phi(x, y) = 0`` (tag ``nullcline-vertical``, the field is vertical
    there) and ``phi(y, x) = 0`` (``nullcline-horizontal``) are traced by
    marching squares on a ``resolution``-squared grid, then each vertex is
    refined by bisection along the cell edge it lies on.  The zero sets do
    not depend on ``a``; ``params`` is validated for interface symmetry.
    """
    from scipy.optimize import brentq
    from skimage.measure import find_contours

    _coupling(params)
    if not isinstance(window, Window):
        window = Window(*window)
    if resolution < 16:
        raise InvalidParameters(f"resolution must be at least 16, got {resolution}")
    xs = np.linspace(window.xmin, window.xmax, resolution)
    ys = np.linspace(window.ymin, window.ymax, resolution)
    X, Y = np.meshgrid(xs, ys)

    curves = []
    for tag, fn in (("nullcline-vertical", _phi),
                    ("nullcline-horizontal", lambda x, y: _phi(y, x))):
        Z = fn(X, Y)
        for contour in find_contours(Z, 0.0):
            pts = []
            for r, c in contour:
                pts.append(_refine_on_edge(fn, xs, ys, r, c, brentq))
            try:
                curves.append(Curve2D(np.array(pts), tag))
            except ValueError:
                continue
    return curves


def _refine_on_edge(fn, xs, ys, r, c, brentq):
    ri, ci = np.floor(r), np.floor(c)
    r_on, c_on = r == ri, c == ci
    if r_on and c_on:
        return (xs[int(ci)], ys[int(ri)])
    if r_on:
        y = ys[int(ri)]
        j = int(ci)
        lo, hi = xs[j], xs[min(j + 1, len(xs) - 1)]
        x0 = lo + (c - ci) * (hi - lo)
        g = lambda x: float(fn(x, y))
        glo, ghi = g(lo), g(hi)
        if glo == 0.0:
            return (lo, y)
        if ghi == 0.0:
            return (hi, y)
        if glo * ghi > 0.0:
            return (x0, y)
        return (brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps), y)
    x = xs[int(ci)]
    i = int(ri)
    lo, hi = ys[i], ys[min(i + 1, len(ys) - 1)]
    y0 = lo + (r - ri) * (hi - lo)
    g = lambda y: float(fn(x, y))
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return (x, lo)
    if ghi == 0.0:
        return (x, hi)
    if glo * ghi > 0.0:
        return (x, y0)
    return (x, brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
