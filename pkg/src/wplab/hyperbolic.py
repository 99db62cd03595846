"""Upper half-plane primitives and the space of complete geodesics.

Points are accepted either as :class:`HPoint` or as complex numbers (scalars or
numpy arrays); the vectorised helpers prefixed with an underscore work on
complex arrays and homogeneous endpoint coordinates, which is what the series
code uses internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INF = math.inf
DET_TOL = 1e-12


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)) or self.y <= 0:
            raise GeometryError(f"not a point of the upper half-plane: ({self.x}, {self.y})")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(float(z.real), float(z.imag))


@dataclass(frozen=True)
class GeodesicEnds:
    """Unordered endpoint pair on the extended real line.

    Stored with ``a < b``; ``b`` may be ``inf`` (at most one endpoint is at
    infinity, and it is always the second one).
    """

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if math.isinf(a) and math.isinf(b):
            raise GeometryError("at most one endpoint may be at infinity")
        if math.isnan(a) or math.isnan(b):
            raise GeometryError("endpoint is NaN")
        if math.isinf(a):
            a, b = b, INF
        elif not math.isinf(b) and b < a:
            a, b = b, a
        if a == b:
            raise GeometryError("geodesic endpoints must differ")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def vertical(self) -> bool:
        return math.isinf(self.b)

    def homogeneous(self) -> np.ndarray:
        """Endpoints as columns of homogeneous coordinates ``[[a1, b1], [a2, b2]]``."""
        if self.vertical:
            return np.array([[self.a, 1.0], [1.0, 0.0]])
        return np.array([[self.a, self.b], [1.0, 1.0]])


@dataclass(frozen=True)
class MoebiusMap:
    m11: float
    m12: float
    m21: float
    m22: float

    def __post_init__(self):
        det = self.m11 * self.m22 - self.m12 * self.m21
        if abs(det - 1.0) > DET_TOL * max(1.0, abs(self.m11 * self.m22), abs(self.m12 * self.m21)):
            raise GeometryError(f"determinant {det!r} is not 1")

    @classmethod
    def from_array(cls, m) -> "MoebiusMap":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    @property
    def trace(self) -> float:
        return self.m11 + self.m22

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap.from_array(self.matrix @ other.matrix)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.m22, -self.m12, -self.m21, self.m11)


def _as_complex(z):
    if isinstance(z, HPoint):
        return z.z
    return z


def mobius_apply(M: MoebiusMap, z):
    """Apply ``M`` to a point; returns an :class:`HPoint` for HPoint input."""
    w = _apply_matrix(M.matrix, _as_complex(z))
    if isinstance(z, HPoint):
        return HPoint.from_complex(complex(w))
    return w


def _apply_matrix(m: np.ndarray, z):
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def mobius_apply_ends(M: MoebiusMap, g: GeodesicEnds) -> GeodesicEnds:
    h = M.matrix @ g.homogeneous()
    pts = []
    for k in range(2):
        num, den = h[0, k], h[1, k]
        pts.append(INF if abs(den) <= 1e-300 * max(1.0, abs(num)) else num / den)
    return GeodesicEnds(*pts)


# -- vectorised kernels on homogeneous endpoints ------------------------------
#
# A geodesic with homogeneous endpoints (a1:a2), (b1:b2) is the zero set of
# p|z|^2 - 2 q x + s with p = a2 b2, 2q = a1 b2 + a2 b1, s = a1 b1.

def _form(a1, a2, b1, b2):
    p = a2 * b2
    q2 = a1 * b2 + a2 * b1
    s = a1 * b1
    disc = np.abs(a1 * b2 - a2 * b1)  # sqrt(4q^2 - 4ps)
    return p, q2, s, disc


def _sinh_dist(z, a1, a2, b1, b2):
    p, q2, s, disc = _form(a1, a2, b1, b2)
    x, y = np.real(z), np.imag(z)
    return np.abs(p * (x * x + y * y) - q2 * x + s) / (y * disc)


def _exp_m2d(z, a1, a2, b1, b2):
    """``exp(-2 d(z, geodesic))`` computed without cancellation."""
    sh = _sinh_dist(z, a1, a2, b1, b2)
    e = 1.0 / (np.sqrt(1.0 + sh * sh) + sh)
    return e * e


def _omega(z, a1, a2, b1, b2):
    """Coefficient of ``(a-b)^2 dz^2 / ((z-a)(z-b))^2`` in homogeneous form."""
    num = a1 * b2 - a2 * b1
    den = (a2 * z - a1) * (b2 * z - b1)
    return (num / den) ** 2


def _ends_arrays(g: GeodesicEnds):
    h = g.homogeneous()
    return h[0, 0], h[1, 0], h[0, 1], h[1, 1]


# -- public scalar operations -------------------------------------------------

def cross_ratio(z, g: GeodesicEnds) -> float:
    """``|a-b| Im z / (|z-a||z-b|)``, with the finite limit ``Im z/|z-a|`` at infinity."""
    zz = _as_complex(z)
    if g.vertical:
        return float(np.imag(zz) / abs(zz - g.a))
    return float(abs(g.a - g.b) * np.imag(zz) / (abs(zz - g.a) * abs(zz - g.b)))


def dist_point_geodesic(z, g: GeodesicEnds) -> float:
    """Hyperbolic distance from a point to a complete geodesic.

    Uses ``sinh d = ||z-c|^2 - r^2| / (2 r y)`` for the half-circle with centre
    ``c`` and radius ``r``, and ``sinh d = |x-a|/y`` for a vertical line.
    """
    sh = _sinh_dist(_as_complex(z), *_ends_arrays(g))
    return float(np.arcsinh(sh))


def gaussian(z, g: GeodesicEnds) -> float:
    return float(_exp_m2d(_as_complex(z), *_ends_arrays(g)))


def geodesic_measure_density(g: GeodesicEnds) -> float:
    if g.vertical:
        raise GeometryError("density chart excludes ∞")
    return 1.0 / (g.a - g.b) ** 2


def hyperbolic_distance(z, w) -> float:
    z, w = _as_complex(z), _as_complex(w)
    return float(np.arccosh(1.0 + abs(z - w) ** 2 / (2.0 * np.imag(z) * np.imag(w))))
