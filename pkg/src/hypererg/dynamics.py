"""Explicit ergodic actions used as test beds.

* The modular surface X = PSL2(Z) \\ PSL2(R) with its Haar probability measure.
  A point is a coset ``Gamma g``; G acts on the right, ``x -> x g^{-1}``.
  Observables only look at the base point ``g i`` reduced to the standard
  fundamental domain ``|Re z| <= 1/2, |z| >= 1``.
* Linear flows on the 2-torus, ergodic for irrational slope.

Both expose the same small interface (``haar_sample``, ``act_inverse``) so the
estimators can treat them uniformly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hypererg.errors import DegenerateEvaluationError, DomainError
from hypererg.geometry import (
    BASEPOINT,
    GroupElement,
    Point,
    act,
    act_array,
    inverse_array,
    unipotent,
)

MAX_REDUCTION_STEPS = 100_000
SQRT3_2 = math.sqrt(3.0) / 2.0
DOMAIN_AREA = math.pi / 3.0
# fundamental-domain wall slack
WALL_TOL = 1e-12


# -- modular surface ------------------------------------------------------------

def reduce(z: Point) -> tuple[Point, GroupElement]:
    """Move z into the standard fundamental domain.

    Returns ``(z', gamma)`` with gamma in PSL2(Z) and ``gamma z = z'``.  The
    real part is normalised into [-1/2, 1/2) and points on the unit circle are
    left in place.
    """
    x, y = z.x, z.y
    a, b, c, d = 1, 0, 0, 1
    for _ in range(MAX_REDUCTION_STEPS):
        n = math.floor(x + 0.5)
        if n:
            x -= n
            # T^{-n} gamma
            a, b = a - n * c, b - n * d
        r2 = x * x + y * y
        if r2 >= 1.0:
            return Point(x, y), GroupElement(float(a), float(b), float(c), float(d))
        x, y = -x / r2, y / r2
        # S gamma with S = [[0, -1], [1, 0]]
        a, b, c, d = -c, -d, a, b
    raise DegenerateEvaluationError("modular reduction did not terminate")


def reduce_array(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`reduce`, returning only the reduced points."""
    x = np.array(x, dtype=float)
    y = np.array(y, dtype=float)
    x -= np.floor(x + 0.5)
    active = np.flatnonzero(x * x + y * y < 1.0)
    steps = 0
    while active.size:
        steps += 1
        if steps > MAX_REDUCTION_STEPS:
            raise DegenerateEvaluationError("modular reduction did not terminate")
        xa, ya = x[active], y[active]
        r2 = xa * xa + ya * ya
        xa = -xa / r2
        ya = ya / r2
        xa -= np.floor(xa + 0.5)
        x[active] = xa
        y[active] = ya
        active = active[xa * xa + ya * ya < 1.0]
    return x, y


def in_fundamental_domain(x, y, tol: float = WALL_TOL):
    x = np.asarray(x)
    y = np.asarray(y)
    return (np.abs(x) <= 0.5 + tol) & (x * x + y * y >= (1.0 - tol) ** 2) & (y > 0)


@dataclass(frozen=True)
class ModularPoint:
    """A point ``Gamma g`` of the modular surface.

    ``rep`` is kept reduced (``rep i`` lies in the fundamental domain), so
    ``base`` is simply ``rep i``.
    """

    rep: GroupElement
    base: Point

    @classmethod
    def from_rep(cls, g: GroupElement) -> ModularPoint:
        z, gamma = reduce(act(g, BASEPOINT))
        return cls(gamma @ g, z)


def modular_apply(x: ModularPoint, g: GroupElement) -> ModularPoint:
    """The right action ``Gamma h -> Gamma h g^{-1}``."""
    return ModularPoint.from_rep(x.rep @ g.inverse())


def horocycle_flow_modular(x: ModularPoint, t: float) -> ModularPoint:
    """Horocycle flow ``Gamma h -> Gamma h n_t``; equals ``modular_apply(x, n_{-t})``."""
    return modular_apply(x, unipotent(-t))


def _haar_reps(x, y, theta):
    # n_x a_{log y} k_theta maps i to x + iy
    sy = np.sqrt(y)
    c, s = np.cos(theta), np.sin(theta)
    m = np.empty(x.shape + (2, 2))
    m[:, 0, 0] = sy * c + x * s / sy
    m[:, 0, 1] = -sy * s + x * c / sy
    m[:, 1, 0] = s / sy
    m[:, 1, 1] = c / sy
    return m


def haar_sample_modular_batch(rng: np.random.Generator, n: int, return_stats: bool = False):
    """n Haar-distributed points of X, as ``(reps, x, y)`` arrays.

    Base points are drawn from hyperbolic area on the fundamental domain by
    rejection from the box ``[-1/2, 1/2] x [sqrt3/2, inf)`` with dx dy / y^2;
    the fiber angle is uniform.  With ``return_stats`` the number of
    proposals is returned as a fourth element.
    """
    xs, ys = [], []
    have = proposals = 0
    while have < n:
        m = max(16, int(1.12 * (n - have)) + 16)
        px = rng.uniform(-0.5, 0.5, size=m)
        py = SQRT3_2 / (1.0 - rng.random(m))
        ok = px * px + py * py >= 1.0
        idx = np.flatnonzero(ok)[: n - have]
        # count proposals up to and including the last one used
        proposals += (int(np.flatnonzero(ok)[n - have - 1]) + 1) if idx.size == n - have else m
        xs.append(px[idx])
        ys.append(py[idx])
        have += idx.size
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    theta = rng.uniform(0.0, math.pi, size=n)
    reps = _haar_reps(x, y, theta)
    if return_stats:
        return reps, x, y, proposals
    return reps, x, y


def haar_sample_modular(rng: np.random.Generator) -> ModularPoint:
    reps, x, y = haar_sample_modular_batch(rng, 1)
    return ModularPoint(GroupElement.from_array(reps[0]), Point(float(x[0]), float(y[0])))


class ModularSurface:
    """PSL2(Z) \\ PSL2(R) as a probability G-space."""

    name = "modular"

    def haar_sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return haar_sample_modular_batch(rng, n)[0]

    def start_state(self, point: ModularPoint) -> np.ndarray:
        return point.rep.as_array()

    def default_start(self) -> np.ndarray:
        return ModularPoint.from_rep(GroupElement(1.3, 0.4, 0.35, 1.0 / 1.3 + 0.4 * 0.35 / 1.3)).rep.as_array()

    def act_inverse(self, start: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Reduced base points of ``x g^{-1}`` for each g in the stack, as an (n, 2) array."""
        m = np.asarray(start) @ inverse_array(g)
        x, y = act_array(m, 0.0, 1.0)
        x, y = reduce_array(x, y)
        return np.stack([x, y], axis=-1)

    def start_from_list(self, entry) -> np.ndarray:
        """A start given as ``[x, y]`` or ``[x, y, theta]``: the coset of ``n_x a_{log y} k_theta``."""
        vals = [float(v) for v in entry]
        if len(vals) == 2:
            vals.append(0.0)
        if len(vals) != 3 or not vals[1] > 0:
            raise DomainError(f"modular start must be [x, y] or [x, y, theta] with y > 0, got {entry!r}")
        m = _haar_reps(np.array([vals[0]]), np.array([vals[1]]), np.array([vals[2]]))[0]
        return ModularPoint.from_rep(GroupElement.from_array(m)).rep.as_array()


def horocycle_orbit(start: np.ndarray, t) -> np.ndarray:
    """Reduced base points of ``x n_t`` for an array of times, as an (n, 2) array."""
    m = np.asarray(start)
    w = np.asarray(t, dtype=float) + 1j
    z = (m[0, 0] * w + m[0, 1]) / (m[1, 0] * w + m[1, 1])
    x, y = reduce_array(z.real, z.imag)
    return np.stack([x, y], axis=-1)


class HorocycleFlow(ModularSurface):
    """The R-action ``h_t x = x n_t`` on the modular surface."""

    name = "horocycle"

    def act_inverse(self, start: np.ndarray, t) -> np.ndarray:
        return horocycle_orbit(start, -np.asarray(t, dtype=float))


# -- torus flows ----------------------------------------------------------------

@dataclass(frozen=True)
class TorusPoint:
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x) % 1.0)
        object.__setattr__(self, "y", float(self.y) % 1.0)


def torus_flow(p: TorusPoint, t: float, slope: float = math.sqrt(2.0)) -> TorusPoint:
    """The linear flow ``(x + t, y + slope t) mod 1``."""
    return TorusPoint(p.x + t, p.y + slope * t)


class TorusFlow:
    """The R-action on the 2-torus by a linear flow of the given slope."""

    name = "torus"

    def __init__(self, slope: float = math.sqrt(2.0)):
        self.slope = float(slope)

    def __eq__(self, other):
        return isinstance(other, TorusFlow) and other.slope == self.slope

    def __hash__(self):
        return hash(("torus", self.slope))

    def haar_sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.random((n, 2))

    def start_state(self, point: TorusPoint) -> np.ndarray:
        return np.array([point.x, point.y])

    def default_start(self) -> np.ndarray:
        return np.array([0.1, 0.2])

    def act_inverse(self, start, t) -> np.ndarray:
        """States ``h_t^{-1} x = x - t (1, slope)`` for an array of times."""
        t = np.asarray(t, dtype=float)
        start = np.asarray(start, dtype=float)
        x = np.mod(start[..., 0] - t, 1.0)
        y = np.mod(start[..., 1] - self.slope * t, 1.0)
        return np.stack([x, y], axis=-1)

    def start_from_list(self, entry) -> np.ndarray:
        x, y = (float(v) for v in entry)
        return self.start_state(TorusPoint(x, y))


# -- observables ------------------------------------------------------------------

class Observable:
    """A bounded function on phase space with a known space average.

    Subclasses implement ``__call__`` on an ``(n, 2)`` array of states.
    """

    name: str = "observable"
    exact_mean: float = 0.0
    sup_norm: float = 1.0
    provenance: str = ""

    def lp_norm(self, p: float) -> float | None:
        """Exact ``||f||_p`` when known in closed form, else None."""
        return None

    def __add__(self, other: Observable) -> Observable:
        return LinearCombination(((1.0, self), (1.0, other)))

    def __rmul__(self, alpha: float) -> Observable:
        return LinearCombination(((float(alpha), self),))


@dataclass(frozen=True)
class CuspIndicator(Observable):
    """Indicator of the cusp region ``{y > Y0}`` of the modular surface."""

    Y0: float = 2.0

    def __post_init__(self):
        if not self.Y0 >= 1.0:
            raise DomainError("cusp height must be at least 1")

    @property
    def name(self) -> str:
        return f"modular/cusp:{self.Y0:g}"

    @property
    def exact_mean(self) -> float:
        # area of [-1/2, 1/2] x (Y0, inf) is 1/Y0, total area pi/3
        return 3.0 / (math.pi * self.Y0)

    sup_norm = 1.0
    provenance = "hyperbolic area of the cusp rectangle / area of the fundamental domain"

    def lp_norm(self, p: float) -> float:
        return self.exact_mean ** (1.0 / p)

    def __call__(self, states: np.ndarray) -> np.ndarray:
        return (states[..., 1] > self.Y0).astype(float)


@dataclass(frozen=True)
class Constant(Observable):
    value: float = 1.0

    @property
    def name(self) -> str:
        return f"const:{self.value:g}"

    @property
    def exact_mean(self) -> float:
        return self.value

    @property
    def sup_norm(self) -> float:
        return abs(self.value)

    provenance = "constant function"

    def lp_norm(self, p: float) -> float:
        return abs(self.value)

    def __call__(self, states: np.ndarray) -> np.ndarray:
        return np.full(np.shape(states)[:-1], self.value)


@dataclass(frozen=True)
class TorusTrig(Observable):
    """``cos(2 pi k1 x) cos(2 pi k2 y)`` on the torus."""

    k1: int = 1
    k2: int = 1

    @property
    def name(self) -> str:
        return f"torus/trig:{self.k1},{self.k2}"

    @property
    def exact_mean(self) -> float:
        return 1.0 if self.k1 == 0 and self.k2 == 0 else 0.0

    sup_norm = 1.0
    provenance = "orthogonality of characters on the torus"

    def lp_norm(self, p: float) -> float:
        # int_0^1 |cos 2 pi k x|^p dx = Gamma((p+1)/2) / (sqrt(pi) Gamma(p/2 + 1)) for k != 0
        one = math.exp(math.lgamma(0.5 * (p + 1)) - math.lgamma(0.5 * p + 1)) / math.sqrt(math.pi)
        factor = (one if self.k1 else 1.0) * (one if self.k2 else 1.0)
        return factor ** (1.0 / p)

    def __call__(self, states: np.ndarray) -> np.ndarray:
        return np.cos(2 * np.pi * self.k1 * states[..., 0]) * np.cos(2 * np.pi * self.k2 * states[..., 1])


@dataclass(frozen=True)
class LinearCombination(Observable):
    terms: tuple[tuple[float, Observable], ...]

    @property
    def name(self) -> str:
        return " + ".join(f"{a:g}*{f.name}" for a, f in self.terms)

    @property
    def exact_mean(self) -> float:
        return math.fsum(a * f.exact_mean for a, f in self.terms)

    @property
    def sup_norm(self) -> float:
        return math.fsum(abs(a) * f.sup_norm for a, f in self.terms)

    provenance = "linearity"

    def __call__(self, states: np.ndarray) -> np.ndarray:
        out = 0.0
        for a, f in self.terms:
            out = out + a * f(states)
        return out


def cusp_observable(Y0: float) -> CuspIndicator:
    return CuspIndicator(float(Y0))


def parse_observable(spec: str) -> Observable:
    """Resolve names like ``modular/cusp:2``, ``torus/trig:1,1`` or ``const:1``."""
    head, _, arg = spec.partition(":")
    try:
        if head == "modular/cusp":
            return CuspIndicator(float(arg) if arg else 2.0)
        if head == "torus/trig":
            k1, k2 = (int(v) for v in arg.split(","))
            return TorusTrig(k1, k2)
        if head == "const":
            return Constant(float(arg) if arg else 1.0)
    except ValueError as exc:
        raise DomainError(f"bad observable parameters in {spec!r}: {exc}") from None
    raise DomainError(f"unknown observable {spec!r}")


def parse_action(spec: str, **params):
    """Resolve ``modular``, ``horocycle`` or ``torus`` (optional ``slope``)."""
    allowed = {"torus": {"slope"}}.get(spec, set())
    extra = set(params) - allowed
    if extra:
        raise DomainError(f"unknown parameters for action {spec!r}: {sorted(extra)}")
    if spec == "modular":
        return ModularSurface()
    if spec == "horocycle":
        return HorocycleFlow()
    if spec == "torus":
        return TorusFlow(params.get("slope", math.sqrt(2.0)))
    raise DomainError(f"unknown action {spec!r}")
