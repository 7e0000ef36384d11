"""PSL2(R) acting on the upper half-plane.

Group elements are stored as canonical representatives of 2x2 unimodular
matrices modulo +-I.  The three one-parameter subgroups are

    k_theta = [[cos, -sin], [sin, cos]]    (rotations fixing i)
    a_r     = diag(e^{r/2}, e^{-r/2})      (d(a_r i, i) = |r|)
    n_t     = [[1, t], [0, 1]]             (horocycle translations)

Angles of K are PSL2 angles, taken in [0, pi).  Besides the scalar API there
are a few vectorised helpers operating on ``(n, 2, 2)`` arrays, used by the
Monte Carlo code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hypererg.errors import DegenerateEvaluationError, DomainError, NotUnimodularError

__all__ = [
    "GroupElement", "Point", "CartanCoords", "IwasawaCoords", "RankOneProfile",
    "rotation", "boost", "unipotent", "identity", "BASEPOINT",
    "act", "distance", "cartan_decompose", "iwasawa_decompose",
    "cartan_reconstruct", "iwasawa_reconstruct",
    "horocycle_to_radius", "radius_to_horocycle",
    "angular_components", "angular_component_angles", "angle_of", "angular_distance",
    "knk_decompose",
    "random_elements", "act_array", "cartan_radius_array", "cartan_array",
    "rotation_array", "kak_array", "knk_array", "inverse_array",
    "iwasawa_array", "kan_array", "rep_distance_array",
]

DET_RENORMALIZE = 1e-13
# input matrices further than this from det = 1 are rejected outright
DET_ACCEPT = 1e-8
POLE_EPS = 1e-300
HALF_PI = 0.5 * math.pi


def _canonical(a: float, b: float, c: float, d: float) -> tuple[float, float, float, float]:
    if a < 0 or (a == 0 and b < 0):
        return -a, -b, -c, -d
    return a, b, c, d


@dataclass(frozen=True)
class GroupElement:
    """An element of PSL2(R), i.e. +-[[a, b], [c, d]] with ad - bc = 1.

    The stored representative is canonical: ``a > 0``, or ``a == 0`` and
    ``b > 0``.  Entries with a slightly drifted determinant are rescaled by
    ``1/sqrt(det)``; a determinant far from one raises
    :class:`NotUnimodularError`.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        a, b, c, d = (float(v) for v in (self.a, self.b, self.c, self.d))
        if not all(math.isfinite(v) for v in (a, b, c, d)):
            raise NotUnimodularError("non-finite matrix entry")
        det = a * d - b * c
        scale = max(1.0, abs(a * d), abs(b * c))
        if det <= 0 or abs(det - 1.0) > DET_ACCEPT * scale:
            raise NotUnimodularError(f"determinant {det!r} is not 1")
        if abs(det - 1.0) > DET_RENORMALIZE:
            s = 1.0 / math.sqrt(det)
            a, b, c, d = a * s, b * s, c * s, d * s
        a, b, c, d = _canonical(a, b, c, d)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def from_array(cls, m) -> GroupElement:
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: GroupElement) -> GroupElement:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> GroupElement:
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def rep_distance(self, other: GroupElement) -> float:
        """Max-entry distance between the two elements modulo +-I."""
        p = self.as_array()
        q = other.as_array()
        return float(min(np.abs(p - q).max(), np.abs(p + q).max()))

    def is_close(self, other: GroupElement, tol: float = 1e-9) -> bool:
        return self.rep_distance(other) <= tol


@dataclass(frozen=True)
class Point:
    """A point x + iy of the upper half-plane."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError("point coordinates must be finite")
        if not self.y > 0:
            raise DomainError(f"y must be positive, got {self.y!r}")

    @classmethod
    def from_complex(cls, z: complex) -> Point:
        return cls(z.real, z.imag)

    def as_complex(self) -> complex:
        return complex(self.x, self.y)


BASEPOINT = Point(0.0, 1.0)


@dataclass(frozen=True)
class CartanCoords:
    """``g = k_{theta1} a_r k_{theta2}`` with ``r >= 0`` and angles in [0, pi)."""

    theta1: float
    r: float
    theta2: float


@dataclass(frozen=True)
class IwasawaCoords:
    """``g = k_theta a_s n_u`` with theta in [0, pi)."""

    theta: float
    s: float
    u: float


@dataclass(frozen=True)
class RankOneProfile:
    """Radial data of a real rank one group: root multiplicities and metric scale.

    ``m1 = dim g_alpha``, ``m2 = dim g_{2 alpha}`` and ``c`` rescales the
    hyperbolic metric on the embedded plane (``d_c = c d``).
    """

    m1: int
    m2: int
    c: float = 1.0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if int(self.m1) != self.m1 or int(self.m2) != self.m2:
            raise DomainError("multiplicities must be integers")
        if self.m1 < 1 or self.m2 < 0:
            raise DomainError(f"invalid multiplicities ({self.m1}, {self.m2})")
        if not self.c > 0:
            raise DomainError("metric scale c must be positive")
        object.__setattr__(self, "m1", int(self.m1))
        object.__setattr__(self, "m2", int(self.m2))
        object.__setattr__(self, "c", float(self.c))

    @property
    def is_real_hyperbolic(self) -> bool:
        return self.m2 == 0

    @property
    def is_plane(self) -> bool:
        return self.m1 == 1 and self.m2 == 0

    @property
    def kappa(self) -> float:
        """Leading exponent of the horocycle density psi."""
        if self.m2 > 0:
            return float(self.m1 + 2 * self.m2 - 1)
        return float(2 * self.m1 - 1)

    @property
    def kappa_prime(self) -> float:
        return self.kappa - 1.0

    @property
    def default_b(self) -> float:
        return 1.0 / (2.0 * self.c)

    def label(self) -> str:
        return self.name or f"({self.m1},{self.m2},{self.c:g})"

    # Built-in profiles.  The default scale follows the plane embedding:
    # c = 1 when there is no 2*alpha root space, c = 1/2 otherwise.
    @classmethod
    def hyperbolic_plane(cls, c: float = 1.0) -> RankOneProfile:
        return cls(1, 0, c, "H2")

    @classmethod
    def real_hyperbolic(cls, n: int, c: float = 1.0) -> RankOneProfile:
        """SO(n, 1), the isometry group of real hyperbolic n-space."""
        if n < 2:
            raise DomainError("n must be at least 2")
        return cls(n - 1, 0, c, f"H{n}")

    @classmethod
    def hyperbolic_space(cls, c: float = 1.0) -> RankOneProfile:
        return cls(2, 0, c, "H3")

    @classmethod
    def su21(cls, c: float = 0.5) -> RankOneProfile:
        return cls(2, 1, c, "SU21")

    @classmethod
    def sp21(cls, c: float = 0.5) -> RankOneProfile:
        return cls(4, 3, c, "Sp21")

    @classmethod
    def f4(cls, c: float = 0.5) -> RankOneProfile:
        return cls(8, 7, c, "F4")


# -- generators ---------------------------------------------------------------

def rotation(theta: float) -> GroupElement:
    return GroupElement(math.cos(theta), -math.sin(theta), math.sin(theta), math.cos(theta))


def boost(r: float) -> GroupElement:
    return GroupElement(math.exp(r / 2), 0.0, 0.0, math.exp(-r / 2))


def unipotent(t: float) -> GroupElement:
    return GroupElement(1.0, t, 0.0, 1.0)


def identity() -> GroupElement:
    return GroupElement(1.0, 0.0, 0.0, 1.0)


def _mod_pi(theta: float) -> float:
    theta = math.fmod(theta, math.pi)
    if theta < 0:
        theta += math.pi
    # fmod can return pi - tiny -> keep it, but map an exact pi to 0
    return 0.0 if theta >= math.pi else theta


def angle_of(k: GroupElement) -> float:
    """PSL2 angle in [0, pi) of a rotation."""
    return _mod_pi(math.atan2(k.c, k.a))


def angular_distance(theta: float, phi: float) -> float:
    """Distance between two PSL2 angles on the circle R / pi Z."""
    delta = abs(_mod_pi(theta - phi))
    return min(delta, math.pi - delta)


# -- action and metric --------------------------------------------------------

def act(g: GroupElement, z: Point) -> Point:
    """Moebius action ``(a z + b) / (c z + d)``."""
    zc = z.as_complex()
    den = g.c * zc + g.d
    if abs(den) < POLE_EPS:
        raise DegenerateEvaluationError("cz + d vanishes")
    w = (g.a * zc + g.b) / den
    # Im w = y / |cz+d|^2 exactly; avoid cancellation in the complex division
    return Point(w.real, z.y / abs(den) ** 2)


def distance(p: Point, q: Point) -> float:
    """Hyperbolic distance in the curvature -1 upper half-plane."""
    num = (p.x - q.x) ** 2 + (p.y - q.y) ** 2
    # 2 asinh(sqrt(num / 4 y1 y2)) == acosh(1 + num / 2 y1 y2) without the
    # loss of precision near coincident points
    return 2.0 * math.asinh(math.sqrt(num / (4.0 * p.y * q.y)))


# -- decompositions -----------------------------------------------------------

def _cartan_raw(a, b, c, d):
    e = 0.5 * (a + d)
    f = 0.5 * (a - d)
    g = 0.5 * (c + b)
    h = 0.5 * (c - b)
    q = np.hypot(e, h)
    s = np.hypot(f, g)
    r = 2.0 * np.log(q + s)
    alpha = np.arctan2(g, f)
    beta = np.arctan2(h, e)
    return 0.5 * (beta + alpha), r, 0.5 * (beta - alpha), s


def cartan_decompose(g: GroupElement) -> CartanCoords:
    """Return ``(theta1, r, theta2)`` with ``g = k_theta1 a_r k_theta2``.

    ``r`` is the displacement ``d(g i, i)``.  At ``r == 0`` the angles are
    not unique; ``theta1 = 0`` and ``theta2`` is the rotation angle of g.
    """
    t1, r, t2, s = _cartan_raw(g.a, g.b, g.c, g.d)
    # r can round to 0 while s > 0; the angle split is then meaningless
    if s == 0.0 or r <= 0.0:
        return CartanCoords(0.0, 0.0, _mod_pi(math.atan2(g.c, g.a)))
    return CartanCoords(_mod_pi(float(t1)), max(float(r), 0.0), _mod_pi(float(t2)))


def cartan_reconstruct(coords: CartanCoords) -> GroupElement:
    return rotation(coords.theta1) @ boost(coords.r) @ rotation(coords.theta2)


def iwasawa_decompose(g: GroupElement) -> IwasawaCoords:
    """Return ``(theta, s, u)`` with ``g = k_theta a_s n_u``."""
    rho2 = g.a * g.a + g.c * g.c
    theta = _mod_pi(math.atan2(g.c, g.a))
    return IwasawaCoords(theta, math.log(rho2), (g.a * g.b + g.c * g.d) / rho2)


def iwasawa_reconstruct(coords: IwasawaCoords) -> GroupElement:
    return rotation(coords.theta) @ boost(coords.s) @ unipotent(coords.u)


# -- horocycle / radius conversion --------------------------------------------

def radius_to_horocycle(r: float, profile: RankOneProfile | None = None) -> float:
    """Horocycle parameter t with ``K n_t K = K a_{r/c} K``: t = 2 sinh(r / 2c)."""
    if r < 0:
        raise DomainError("radius must be nonnegative")
    c = 1.0 if profile is None else profile.c
    return 2.0 * math.sinh(r / (2.0 * c))


def horocycle_to_radius(t: float, profile: RankOneProfile | None = None) -> float:
    """Inverse of :func:`radius_to_horocycle`."""
    if t < 0:
        raise DomainError("horocycle parameter must be nonnegative")
    c = 1.0 if profile is None else profile.c
    return 2.0 * c * math.asinh(t / 2.0)


def angular_component_angles(r):
    """Angles of ``(w_r, w'_r)`` in ``n_t = w_r a_r w'_r``, t = 2 sinh(r/2).

    ``theta_r`` solves ``e^r sin^2 + e^-r cos^2 = 1`` and is taken positive
    (the sign that reconstructs n_t for t > 0); ``theta'_r = pi/2 + theta_r``.
    Accepts scalars or arrays; the angles vary continuously in r and are not
    reduced modulo pi.
    """
    r = np.asarray(r, dtype=float)
    sin2 = -np.expm1(-r) / (2.0 * np.sinh(r))
    theta = np.arcsin(np.sqrt(sin2))
    return theta, HALF_PI + theta


def angular_components(r: float) -> tuple[GroupElement, GroupElement]:
    """The rotations ``w_r, w'_r`` with ``n_t = w_r a_r w'_r``, t = 2 sinh(r/2)."""
    if not r > 0:
        raise DomainError("angular components are defined only for r > 0")
    theta, theta_p = angular_component_angles(r)
    return rotation(float(theta)), rotation(float(theta_p))


def knk_decompose(g: GroupElement) -> tuple[float, float, float]:
    """Return ``(phi1, t, phi2)`` with ``g = k_phi1 n_t k_phi2`` and t >= 0."""
    coords = cartan_decompose(g)
    if coords.r == 0.0:
        return 0.0, 0.0, coords.theta2
    theta, theta_p = angular_component_angles(coords.r)
    return (_mod_pi(coords.theta1 - float(theta)), radius_to_horocycle(coords.r),
            _mod_pi(coords.theta2 - float(theta_p)))


# -- vectorised helpers -------------------------------------------------------

def random_elements(rng: np.random.Generator, n: int, scale: float = 3.0) -> np.ndarray:
    """Random ``(n, 2, 2)`` unimodular matrices: gaussian entries normalised by sqrt(det).

    Samples with negative determinant get their second row negated.
    """
    m = rng.normal(scale=scale, size=(n, 2, 2))
    det = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    m[det < 0, 1, :] *= -1.0
    det = np.abs(det)
    return m / np.sqrt(det)[:, None, None]


def inverse_array(m: np.ndarray) -> np.ndarray:
    out = np.empty_like(m)
    out[:, 0, 0] = m[:, 1, 1]
    out[:, 1, 1] = m[:, 0, 0]
    out[:, 0, 1] = -m[:, 0, 1]
    out[:, 1, 0] = -m[:, 1, 0]
    return out


def act_array(m: np.ndarray, x, y):
    """Apply each matrix of an ``(n, 2, 2)`` stack to the points ``x + iy``."""
    a, b, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    cx = c * x + d
    cy = c * y
    den = cx * cx + cy * cy
    if np.any(den < POLE_EPS):
        raise DegenerateEvaluationError("cz + d vanishes")
    ax = a * x + b
    ay = a * y
    return (ax * cx + ay * cy) / den, y / den


def cartan_radius_array(m: np.ndarray) -> np.ndarray:
    """Cartan radius ``d(g i, i)`` of each matrix."""
    return cartan_array(m)[1]


def cartan_array(m: np.ndarray):
    """Vectorised Cartan coordinates (angles reduced to [0, pi))."""
    t1, r, t2, _ = _cartan_raw(m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1])
    return np.mod(t1, np.pi), np.maximum(r, 0.0), np.mod(t2, np.pi)


def rotation_array(theta: np.ndarray) -> np.ndarray:
    c = np.cos(theta)
    s = np.sin(theta)
    out = np.empty(np.shape(theta) + (2, 2))
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def kak_array(theta1: np.ndarray, r: np.ndarray, theta2: np.ndarray) -> np.ndarray:
    """Stack of ``k_theta1 a_r k_theta2``."""
    c1, s1 = np.cos(theta1), np.sin(theta1)
    c2, s2 = np.cos(theta2), np.sin(theta2)
    e = np.exp(0.5 * r)
    ei = 1.0 / e
    out = np.empty(np.shape(r) + (2, 2))
    out[..., 0, 0] = c1 * e * c2 - s1 * ei * s2
    out[..., 0, 1] = -c1 * e * s2 - s1 * ei * c2
    out[..., 1, 0] = s1 * e * c2 + c1 * ei * s2
    out[..., 1, 1] = -s1 * e * s2 + c1 * ei * c2
    return out


def knk_array(theta1: np.ndarray, t: np.ndarray, theta2: np.ndarray) -> np.ndarray:
    """Stack of ``k_theta1 n_t k_theta2``."""
    n = np.zeros(np.shape(t) + (2, 2))
    n[..., 0, 0] = 1.0
    n[..., 1, 1] = 1.0
    n[..., 0, 1] = t
    return rotation_array(theta1) @ n @ rotation_array(theta2)


def iwasawa_array(m: np.ndarray):
    """Vectorised Iwasawa coordinates ``(theta, s, u)``."""
    a, b, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    rho2 = a * a + c * c
    return np.mod(np.arctan2(c, a), np.pi), np.log(rho2), (a * b + c * d) / rho2


def kan_array(theta: np.ndarray, s: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Stack of ``k_theta a_s n_u``."""
    e = np.exp(0.5 * s)
    an = np.zeros(np.shape(s) + (2, 2))
    an[..., 0, 0] = e
    an[..., 0, 1] = e * u
    an[..., 1, 1] = 1.0 / e
    return rotation_array(theta) @ an


def rep_distance_array(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Max-norm distance between stacks of matrices, up to the sign ambiguity of PSL2."""
    plus = np.abs(p - q).max(axis=(-2, -1))
    minus = np.abs(p + q).max(axis=(-2, -1))
    return np.minimum(plus, minus)
