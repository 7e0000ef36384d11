"""Radial Haar densities of rank one groups and inverse-CDF samplers for them.

Two densities describe Haar measure in polar-type coordinates:

* ``KakDensity``: ``sinh(t)^(m1+m2) cosh(t)^m2`` in G = K A K,
* ``HorocycleDensity``: the density psi of G = K N_L K, in closed form
  ``2^-(m1+m2+1) T^(m1+m2) (T^2/4 + 1)^((m2-1)/2)`` when m2 > 0 and
  ``T^m1 (T^2/4 + 1)^((m1-1)/2)`` when m2 = 0.

Both are normalised away by every sampler, so overall constants do not matter.
Samplers draw by inverting a tabulated CDF; for the hyperbolic plane the
KAK shell/ball CDF is inverted in closed form.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from hypererg.errors import DomainError, QuadratureError
from hypererg.geometry import RankOneProfile

TABLE_NODES = 2048
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)
_LOG2 = math.log(2.0)


def _logsinh(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return t - _LOG2 + np.log(-np.expm1(-2.0 * t))


def _logcosh(t):
    t = np.abs(np.asarray(t, dtype=float))
    return t - _LOG2 + np.log1p(np.exp(-2.0 * t))


def _log_quarter_sq_plus_one(T):
    # log(T^2/4 + 1), overflow-safe
    T = np.asarray(T, dtype=float)
    with np.errstate(divide="ignore"):
        return np.logaddexp(2.0 * np.log(T / 2.0), 0.0)


# -- line weights ---------------------------------------------------------------

@dataclass(frozen=True)
class KakDensity:
    """Radial density of Haar measure in K A K coordinates."""

    profile: RankOneProfile

    def log(self, t):
        p = self.profile
        t = np.asarray(t, dtype=float)
        out = (p.m1 + p.m2) * _logsinh(t)
        if p.m2:
            out = out + p.m2 * _logcosh(t)
        return out

    def __call__(self, t):
        return np.exp(self.log(t))

    @property
    def lower_exponent(self) -> float:
        return float(self.profile.m1 + self.profile.m2)


@dataclass(frozen=True)
class HorocycleDensity:
    """The K N_L K radial density psi, with its growth exponents kappa > kappa'."""

    profile: RankOneProfile

    @property
    def kappa(self) -> float:
        return self.profile.kappa

    @property
    def kappa_prime(self) -> float:
        return self.profile.kappa_prime

    @property
    def lower_exponent(self) -> float:
        """Largest a with psi(T) / T^a nondecreasing; used for certified shell-ratio bounds."""
        p = self.profile
        return float(p.m1 + p.m2) if p.m2 else float(p.m1)

    def log(self, T):
        p = self.profile
        T = np.asarray(T, dtype=float)
        with np.errstate(divide="ignore"):
            logT = np.log(T)
        if p.m2 > 0:
            return ((p.m1 + p.m2) * logT + 0.5 * (p.m2 - 1) * _log_quarter_sq_plus_one(T)
                    - (p.m1 + p.m2 + 1) * _LOG2)
        return p.m1 * logT + 0.5 * (p.m1 - 1) * _log_quarter_sq_plus_one(T)

    def __call__(self, T):
        return np.exp(self.log(T))

    def window_map(self, R):
        """T(R) relating the two radial coordinates: 2 sinh R (m2 > 0) or 2 sinh(R/2)."""
        R = np.asarray(R, dtype=float)
        return 2.0 * np.sinh(R) if self.profile.m2 else 2.0 * np.sinh(0.5 * R)


@dataclass(frozen=True)
class PolynomialWeight:
    """``psi(t) = C t^kappa`` on [0, inf)."""

    kappa: float
    C: float = 1.0

    def __post_init__(self):
        if not self.kappa > -1:
            raise DomainError("t^kappa is not integrable at 0 for kappa <= -1")
        if not self.C > 0:
            raise DomainError("weight constant must be positive")

    @property
    def kappa_prime(self) -> float:
        return self.kappa - 1.0

    @property
    def lower_exponent(self) -> float:
        return float(self.kappa)

    def log(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return math.log(self.C) + self.kappa * np.log(t)

    def __call__(self, t):
        return np.exp(self.log(t))


def kak_density_eval(profile: RankOneProfile, t: float) -> float:
    if t < 0:
        raise DomainError("t must be nonnegative")
    return float(KakDensity(profile)(t))


def psi_eval(profile: RankOneProfile, T: float) -> float:
    if T < 0:
        raise DomainError("T must be nonnegative")
    return float(HorocycleDensity(profile)(T))


def normalization_identity_check(profile: RankOneProfile, R: float, rtol: float = 1e-10) -> float:
    """Compare the K A K mass of a ball of radius R with the K N_L K mass of its image.

    Both sides are integrated adaptively.  The return value is
    ``|LHS - RHS| / max(1, |LHS|)``: an absolute residual for small balls and a
    relative one once the masses grow past one (they reach ~1e76 for F4 at R=8).
    """
    if R < 0:
        raise DomainError("R must be nonnegative")
    if R == 0:
        return 0.0
    kak = KakDensity(profile)
    psi = HorocycleDensity(profile)
    T = float(psi.window_map(R))

    def quad(f, hi):
        val, err, info = integrate.quad(lambda x: float(f(x)), 0.0, hi, epsabs=0.0, epsrel=rtol,
                                        limit=500, full_output=True)[:3]
        if err > 10 * rtol * abs(val) + 1e-300:
            raise QuadratureError(f"quadrature did not converge (estimate {val}, error {err})")
        return val

    lhs = quad(kak, R)
    rhs = quad(psi, T)
    return abs(lhs - rhs) / max(1.0, abs(lhs))


# -- inverse-CDF machinery ------------------------------------------------------

class TabulatedDistribution:
    """A distribution on [lo, hi] with density proportional to ``exp(logpdf)``.

    The CDF is tabulated on Chebyshev-Lobatto nodes by 10-point Gauss-Legendre
    quadrature per cell (exact to rounding for these smooth densities).
    Inversion starts from a monotone cubic (PCHIP) interpolant of the inverse
    table and is polished by bracketed Newton steps on the exact CDF, falling
    back to bisection whenever a step leaves the bracket.
    """

    def __init__(self, logpdf, lo: float, hi: float, nodes: int = TABLE_NODES):
        if not hi > lo:
            raise DomainError(f"empty support [{lo}, {hi}]")
        self.logpdf = logpdf
        self.lo = float(lo)
        self.hi = float(hi)
        k = np.arange(nodes)
        t = self.lo + (self.hi - self.lo) * 0.5 * (1.0 - np.cos(np.pi * k / (nodes - 1)))
        t[0], t[-1] = self.lo, self.hi
        self.nodes = t
        self._logscale = float(np.max(logpdf(np.linspace(self.lo, self.hi, 257))))
        cells = self._integrate(t[:-1], t[1:])
        cum = np.concatenate(([0.0], np.cumsum(cells)))
        self._mass = cum[-1]
        if not (self._mass > 0 and np.isfinite(self._mass)):
            raise DomainError("density has no finite positive mass on the support")
        self.table = cum / self._mass
        # drop nodes where the CDF is numerically flat (e.g. t^22 near 0)
        keep = np.concatenate(([True], np.diff(self.table) > 1e-13))
        self._guess = PchipInterpolator(self.table[keep], t[keep], extrapolate=True)

    def _scaled_pdf(self, t):
        return np.exp(self.logpdf(t) - self._logscale)

    def _integrate(self, a, b):
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        x = mid[..., None] + half[..., None] * _GL_NODES
        return half * (self._scaled_pdf(x) @ _GL_WEIGHTS)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.lo) & (t <= self.hi)
        return np.where(inside, self._scaled_pdf(np.clip(t, self.lo, self.hi)) / self._mass, 0.0)

    def _cdf_in_cell(self, idx, t):
        return self.table[idx] + self._integrate(self.nodes[idx], t) / self._mass

    def cdf(self, t):
        t = np.clip(np.asarray(t, dtype=float), self.lo, self.hi)
        idx = np.clip(np.searchsorted(self.nodes, t, side="right") - 1, 0, len(self.nodes) - 2)
        return np.clip(self._cdf_in_cell(idx, t), 0.0, 1.0)

    def ppf(self, u, tol: float = 1e-10, max_iter: int = 100):
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 0
        u = np.atleast_1d(u)
        if np.any((u < 0) | (u > 1)):
            raise DomainError("quantile level outside [0, 1]")
        idx = np.clip(np.searchsorted(self.table, u, side="right") - 1, 0, len(self.nodes) - 2)
        lo = self.nodes[idx].copy()
        hi = self.nodes[idx + 1].copy()
        t = np.clip(self._guess(u), lo, hi)
        active = np.ones(u.shape, dtype=bool)
        for _ in range(max_iter):
            ia = np.flatnonzero(active)
            if ia.size == 0:
                break
            ta = t[ia]
            resid = self._cdf_in_cell(idx[ia], ta) - u[ia]
            dens = self._scaled_pdf(ta) / self._mass
            below = resid < 0
            lo[ia] = np.where(below, ta, lo[ia])
            hi[ia] = np.where(below, hi[ia], ta)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = ta - resid / dens
            bad = ~np.isfinite(step) | (step < lo[ia]) | (step > hi[ia])
            new = np.where(bad, 0.5 * (lo[ia] + hi[ia]), step)
            # a Newton step of size tol leaves an error of order tol^2
            scale = np.maximum(1.0, np.abs(ta))
            done = (~bad & (np.abs(new - ta) <= tol * scale)) | (resid == 0) \
                | (hi[ia] - lo[ia] <= 1e-3 * tol * scale)
            t[ia] = np.where(resid == 0, ta, new)
            active[ia[done]] = False
        return float(t[0]) if scalar else t

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.ppf(rng.random(n))


class SinhShellDistribution:
    """Density proportional to sinh(t) on [lo, hi], inverted in closed form.

    Uses ``cosh t - 1 = 2 sinh^2(t/2)`` so that small radii keep full precision.
    """

    def __init__(self, lo: float, hi: float):
        if not hi > lo >= 0:
            raise DomainError(f"invalid support [{lo}, {hi}]")
        self.lo = float(lo)
        self.hi = float(hi)
        self._s0 = math.sinh(0.5 * lo) ** 2
        self._s1 = math.sinh(0.5 * hi) ** 2

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.lo) & (t <= self.hi)
        return np.where(inside, 0.5 * np.sinh(t) / (self._s1 - self._s0), 0.0)

    def cdf(self, t):
        t = np.clip(np.asarray(t, dtype=float), self.lo, self.hi)
        return (np.sinh(0.5 * t) ** 2 - self._s0) / (self._s1 - self._s0)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        if np.any((u < 0) | (u > 1)):
            raise DomainError("quantile level outside [0, 1]")
        t = 2.0 * np.arcsinh(np.sqrt(self._s0 + u * (self._s1 - self._s0)))
        t = np.clip(t, self.lo, self.hi)
        return float(t) if t.ndim == 0 else t

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.ppf(rng.random(n))


def _check_shell(r: float, eps: float) -> None:
    if r < 0:
        raise DomainError("radius must be nonnegative")
    if not eps > 0:
        raise DomainError("shell width eps must be positive")


@functools.lru_cache(maxsize=256)
def kak_distribution(profile: RankOneProfile, lo: float, hi: float):
    """The KAK radial law restricted to [lo, hi]."""
    if profile.is_plane:
        return SinhShellDistribution(lo, hi)
    return TabulatedDistribution(KakDensity(profile).log, lo, hi)


@functools.lru_cache(maxsize=256)
def weight_distribution(weight, lo: float, hi: float) -> TabulatedDistribution:
    """A line weight (psi or polynomial) restricted to [lo, hi]."""
    return TabulatedDistribution(weight.log, lo, hi)


def radial_shell(profile: RankOneProfile, r: float, eps: float):
    _check_shell(r, eps)
    return kak_distribution(profile, float(r), float(r + eps))


def radial_ball(profile: RankOneProfile, r: float):
    if not r > 0:
        raise DomainError("ball radius must be positive")
    return kak_distribution(profile, 0.0, float(r))


def window_bounds(r: float, eps: float, b: float) -> tuple[float, float]:
    """``[2 sinh(b r), 2 sinh(b (r + eps))]``."""
    _check_shell(r, eps)
    if not b > 0:
        raise DomainError("window scale b must be positive")
    return 2.0 * math.sinh(b * r), 2.0 * math.sinh(b * (r + eps))


def horocycle_window(profile: RankOneProfile, r: float, eps: float, b: float | None = None):
    b = profile.default_b if b is None else b
    lo, hi = window_bounds(r, eps, b)
    return weight_distribution(HorocycleDensity(profile), lo, hi)


def sample_radial_shell(profile, r, eps, rng, n=None):
    dist = radial_shell(profile, r, eps)
    return dist.ppf(rng.random()) if n is None else dist.sample(rng, n)


def sample_radial_ball(profile, r, rng, n=None):
    dist = radial_ball(profile, r)
    return dist.ppf(rng.random()) if n is None else dist.sample(rng, n)


def sample_horocycle_window(profile, r, eps, b, rng, n=None):
    dist = horocycle_window(profile, r, eps, b)
    return dist.ppf(rng.random()) if n is None else dist.sample(rng, n)


# -- shell ratios -----------------------------------------------------------------

def weight_mass(weight, lo: float, hi: float) -> float:
    """``int_lo^hi psi`` by adaptive quadrature."""
    val, err = integrate.quad(lambda x: float(weight(x)), lo, hi, epsabs=0.0, epsrel=1e-12, limit=500)
    return val


def shell_ratio(weight, r: float, eps: float, b: float) -> float:
    """``eta([0, T)) / eta([T, (1+delta) T))`` with T = 2 sinh(br), (1+delta)T = 2 sinh(b(r+eps))."""
    T0, T1 = window_bounds(r, eps, b)
    # scale both masses by psi(T1) to keep F4-sized numbers finite
    logscale = float(weight.log(T1))
    scaled = _ScaledWeight(weight, logscale)
    return weight_mass(scaled, 0.0, T0) / weight_mass(scaled, T0, T1)


@dataclass(frozen=True)
class _ScaledWeight:
    weight: object
    logscale: float

    def __call__(self, t):
        return np.exp(self.weight.log(t) - self.logscale)


def shell_ratio_bound(weight, eps: float, b: float, exponent: float | None = None) -> float:
    """Upper bound ``1 / (rho^(a+1) - 1)`` with ``rho = 1 + b^2 eps^2 / 8``.

    With ``exponent=None`` the weight's ``lower_exponent`` a is used, which
    makes the bound hold for every r (psi(t)/t^a nondecreasing).  Passing the
    leading exponent kappa gives the asymptotic bound instead.
    """
    a = weight.lower_exponent if exponent is None else exponent
    rho = 1.0 + b * b * eps * eps / 8.0
    return 1.0 / (rho ** (a + 1.0) - 1.0)
