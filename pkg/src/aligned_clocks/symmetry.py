"""Symmetries of the line map and the invariant sets they organise.

Transforms are affine maps ``p -> L p + 2 pi (l, k)`` with ``L`` a signed
permutation matrix.  The linear part is stored by name and the translation
as an integer pair, so composition and inversion are exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import TWO_PI, PhasePoint, _coupling, apply_line_map

# The signed permutations of the plane.  The first four commute with the
# line map; the rest are kept so composition is closed for any input.
LINEAR_PARTS = {
    "identity": ((1, 0), (0, 1)),
    "negation": ((-1, 0), (0, -1)),
    "swap": ((0, 1), (1, 0)),
    "negated_swap": ((0, -1), (-1, 0)),
    "flip_x": ((-1, 0), (0, 1)),
    "flip_y": ((1, 0), (0, -1)),
    "rotate_ccw": ((0, -1), (1, 0)),
    "rotate_cw": ((0, 1), (-1, 0)),
}
EQUIVARIANT_PARTS = ("identity", "negation", "swap", "negated_swap")
_BY_MATRIX = {m: name for name, m in LINEAR_PARTS.items()}


def _matmul(m1, m2):
    return tuple(
        tuple(sum(m1[i][r] * m2[r][j] for r in range(2)) for j in range(2)) for i in range(2)
    )


@dataclass(frozen=True)
class SymmetryTransform:
    linear: str = "identity"
    l: int = 0
    k: int = 0

    def __post_init__(self):
        if self.linear not in LINEAR_PARTS:
            raise ValueError(f"unknown linear part {self.linear!r}")
        object.__setattr__(self, "l", int(self.l))
        object.__setattr__(self, "k", int(self.k))

    @property
    def matrix(self):
        return LINEAR_PARTS[self.linear]

    def __call__(self, p):
        return apply_transform(self, p)

    def compose(self, other: "SymmetryTransform") -> "SymmetryTransform":
        """``self o other``: apply ``other`` first."""
        m = self.matrix
        l = m[0][0] * other.l + m[0][1] * other.k + self.l
        k = m[1][0] * other.l + m[1][1] * other.k + self.k
        return SymmetryTransform(_BY_MATRIX[_matmul(m, other.matrix)], l, k)

    __matmul__ = compose

    def inverse(self) -> "SymmetryTransform":
        m = self.matrix
        mt = ((m[0][0], m[1][0]), (m[0][1], m[1][1]))
        l = -(mt[0][0] * self.l + mt[0][1] * self.k)
        k = -(mt[1][0] * self.l + mt[1][1] * self.k)
        return SymmetryTransform(_BY_MATRIX[mt], l, k)

    def to_dict(self) -> dict:
        return {"linear": self.linear, "l": self.l, "k": self.k}

    @classmethod
    def from_dict(cls, d: dict) -> "SymmetryTransform":
        return cls(d["linear"], d.get("l", 0), d.get("k", 0))


IDENTITY = SymmetryTransform()
SIGMA = SymmetryTransform("negation")
PSI_PLUS = SymmetryTransform("swap")
PSI_MINUS = SymmetryTransform("negated_swap")


def translation(l: int, k: int) -> SymmetryTransform:
    return SymmetryTransform("identity", l, k)


def generators(max_shift: int = 1) -> list:
    """Translations with ``|l|, |k| <= max_shift`` plus the three linear
    symmetries of the line map."""
    out = [SIGMA, PSI_PLUS, PSI_MINUS]
    for l in range(-max_shift, max_shift + 1):
        for k in range(-max_shift, max_shift + 1):
            if (l, k) != (0, 0):
                out.append(translation(l, k))
    return out


def apply_transform(t: SymmetryTransform, p):
    p = np.asarray(p, dtype=float)
    (m00, m01), (m10, m11) = t.matrix
    x, y = p[..., 0], p[..., 1]
    # Signed permutations: pick and negate components, no floating products.
    nx = (x if m00 == 1 else -x) if m00 else (y if m01 == 1 else -y)
    ny = (x if m10 == 1 else -x) if m10 else (y if m11 == 1 else -y)
    if t.l:
        nx = nx + TWO_PI * t.l
    if t.k:
        ny = ny + TWO_PI * t.k
    return np.stack([nx, ny], axis=-1)


def check_equivariance(t: SymmetryTransform, params, samples: int = 1000, seed: int = 0,
                       span: float = 2.0 * TWO_PI) -> float:
    """Largest sup-norm gap ``|F(t(p)) - t(F(p))|`` over random points in
    ``[-span, span]^2``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    a = _coupling(params)
    rng = np.random.default_rng(seed)
    p = rng.uniform(-span, span, size=(samples, 2))
    lhs = apply_line_map(apply_transform(t, p), a)
    rhs = apply_transform(t, apply_line_map(p, a))
    return float(np.max(np.abs(lhs - rhs)))


def wrap_to_fundamental(p):
    """Reduce ``p`` into ``[0, 2 pi)^2``.

    Returns the representative ``q`` and the translation ``t`` with
    ``t(q) == p`` (exact for non-negative coordinates; otherwise to within
    one ulp of ``2 pi``).
    """
    x, y = float(p[0]), float(p[1])
    l = math.floor(x / TWO_PI)
    k = math.floor(y / TWO_PI)
    qx, qy = x - TWO_PI * l, y - TWO_PI * k
    # x / 2pi can round across an integer boundary.
    if qx < 0.0:
        l -= 1
        qx = x - TWO_PI * l
    if qx >= TWO_PI:
        l += 1
        qx = max(x - TWO_PI * l, 0.0)
    if qy < 0.0:
        k -= 1
        qy = y - TWO_PI * k
    if qy >= TWO_PI:
        k += 1
        qy = max(y - TWO_PI * k, 0.0)
    return PhasePoint(qx, qy), translation(l, k)


def wrap_array(p):
    """Vectorised fundamental-domain reduction; returns ``(q, lk)`` with
    integer translation indices ``lk``."""
    p = np.asarray(p, dtype=float)
    lk = np.floor(p / TWO_PI)
    q = p - TWO_PI * lk
    lo = q < 0.0
    lk[lo] -= 1
    hi = q >= TWO_PI
    lk[hi] += 1
    q = np.where(lo | hi, p - TWO_PI * lk, q)
    q = np.clip(q, 0.0, np.nextafter(TWO_PI, 0.0))
    return q, lk.astype(np.int64)


def wrapped_difference(d):
    """Map angle differences to ``[-pi, pi)``."""
    return np.mod(np.asarray(d, dtype=float) + np.pi, TWO_PI) - np.pi


@dataclass(frozen=True)
class InvariantLine:
    """``y = x + 2 pi m`` (slope +1) or ``y = -x + 2 pi m`` (slope -1)."""

    slope: int
    index: int

    def __post_init__(self):
        if self.slope not in (1, -1):
            raise ValueError("slope must be +1 or -1")

    @property
    def name(self) -> str:
        return f"Gamma{'+' if self.slope == 1 else '-'}_{self.index}"

    def residual(self, p):
        p = np.asarray(p, dtype=float)
        return p[..., 1] - self.slope * p[..., 0] - TWO_PI * self.index

    def point(self, x):
        x = np.asarray(x, dtype=float)
        return np.stack([x, self.slope * x + TWO_PI * self.index], axis=-1)


def on_invariant_line(p, tol: float = 1e-12) -> Optional[InvariantLine]:
    """The invariant line through ``p`` within ``tol``, slope +1 first."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    x, y = float(p[0]), float(p[1])
    for slope in (1, -1):
        m = round((y - slope * x) / TWO_PI)
        if abs(y - slope * x - TWO_PI * m) < tol:
            return InvariantLine(slope, int(m))
    return None


@dataclass(frozen=True)
class DiagonalBox:
    """Closed square with edges on lines of slope +-1.

    Described by bounds on ``u = y - x`` and ``v = y + x``.
    """

    u_lo: float
    u_hi: float
    v_lo: float
    v_hi: float

    def margins(self, p):
        p = np.asarray(p, dtype=float)
        u = p[..., 1] - p[..., 0]
        v = p[..., 1] + p[..., 0]
        return np.stack([u - self.u_lo, self.u_hi - u, v - self.v_lo, self.v_hi - v], axis=-1)

    def classify(self, p, tol: float = 1e-12):
        m = self.margins(p).min(axis=-1)
        return np.where(m > tol, "interior", np.where(m >= -tol, "boundary", "outside"))

    def contains(self, p, tol: float = 1e-12):
        return self.margins(p).min(axis=-1) >= -tol

    @property
    def vertices(self):
        out = []
        for u, v in ((self.u_hi, self.v_lo), (self.u_lo, self.v_lo),
                     (self.u_lo, self.v_hi), (self.u_hi, self.v_hi)):
            out.append(PhasePoint((v - u) / 2.0, (v + u) / 2.0))
        return out

    @property
    def centroid(self):
        u = (self.u_lo + self.u_hi) / 2.0
        v = (self.v_lo + self.v_hi) / 2.0
        return PhasePoint((v - u) / 2.0, (v + u) / 2.0)


class InvariantSquare(DiagonalBox):
    """``S_lk``: bounded by the invariant lines with indices ``l-1, l``
    (slope -1) and ``k-1, k`` (slope +1)."""

    def __init__(self, l: int, k: int):
        super().__init__(TWO_PI * (k - 1), TWO_PI * k, TWO_PI * (l - 1), TWO_PI * l)
        object.__setattr__(self, "l", int(l))
        object.__setattr__(self, "k", int(k))

    def __repr__(self):
        return f"InvariantSquare(l={self.l}, k={self.k})"

    @property
    def lines(self):
        return (InvariantLine(-1, self.l - 1), InvariantLine(-1, self.l),
                InvariantLine(1, self.k - 1), InvariantLine(1, self.k))


S10 = InvariantSquare(1, 0)


def square_membership(p, square: DiagonalBox, tol: float = 1e-12) -> str:
    return str(square.classify(p, tol))


def s10_internal_rotation(p):
    """Half-turn about the centre ``(pi, 0)`` of ``S_10``: ``(2 pi - x, -y)``."""
    return apply_transform(S10_ROTATION, p)


S10_ROTATION = translation(1, 0).compose(SIGMA)
