"""Averaging families on G and their samplers.

Every family is a product ``nu * rho_r * lambda`` of a left K-factor, a radial
law and a right K-factor.  Haar measure factorises in K A K coordinates, so the
bi-sector measure sigma^{U,V}_{r,eps} is sampled exactly by drawing
``k1 in U``, ``t`` from the sinh-weighted shell and ``k2 in V`` independently.
The horocycle kind uses ``k1 n_t k2`` with t from the psi-weighted window,
which for U = V = K is the same shell measure written in K N K coordinates.

Group-valued sampling is implemented for PSL2(R) only; other rank one profiles
expose their radial laws through :meth:`MeasureFamily.radial`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from hypererg import radial
from hypererg.arcs import ArcSet, KDensity
from hypererg.errors import DomainError
from hypererg.geometry import (
    GroupElement,
    RankOneProfile,
    angular_component_angles,
    kak_array,
    knk_array,
)

KINDS = ("ball", "shell", "sector", "horocycle", "convolution")
# number of panels used to sweep the angular components over [r, r + eps)
SWEEP_PANELS = 64

KFactor = Union[ArcSet, KDensity, None]


def _sample_factor(factor: KFactor, rng: np.random.Generator, n: int) -> np.ndarray:
    if factor is None:
        return rng.uniform(0.0, np.pi, size=n)
    return factor.sample(rng, n)


def _factor_support(factor: KFactor) -> ArcSet:
    if factor is None:
        return ArcSet.full()
    if isinstance(factor, KDensity):
        return factor.support()
    return factor


@dataclass(frozen=True)
class MeasureFamily:
    """One of the averaging families, indexed by the radius r.

    Parameters
    ----------
    kind : str
        ``ball`` (beta_r, or beta^{U,V}_r with arcs), ``shell`` (sigma_{r,eps}),
        ``sector`` (sigma^{U,V}_{r,eps}), ``horocycle`` (nu * eta_{r,eps} * lambda)
        or ``convolution`` (nu * alpha_{r,eps} * lambda with bounded K-densities).
    profile : RankOneProfile
        Radial geometry; defaults to the hyperbolic plane.
    eps : float
        Shell width (ignored by balls).
    b : float, optional
        Horocycle window scale, ``profile.default_b`` when omitted.
    left, right : ArcSet, KDensity or None
        K-factors; None means Haar measure on K.
    """

    kind: str
    profile: RankOneProfile = field(default_factory=RankOneProfile.hyperbolic_plane)
    eps: float = 0.1
    b: float | None = None
    left: KFactor = None
    right: KFactor = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown family kind {self.kind!r}")
        if self.kind != "ball" and not self.eps > 0:
            raise DomainError("shell width eps must be positive")
        if self.b is not None and not self.b > 0:
            raise DomainError("window scale b must be positive")
        if self.kind == "shell" and (self.left is not None or self.right is not None):
            raise DomainError("shell families are bi-K-invariant; use kind='sector' for arcs")
        if self.kind == "sector":
            for f in (self.left, self.right):
                if f is not None and not isinstance(f, ArcSet):
                    raise DomainError("sector factors must be arc sets")
        for f in (self.left, self.right):
            if isinstance(f, ArcSet) and f.is_empty:
                raise DomainError("empty arc set")

    @property
    def window_scale(self) -> float:
        return self.profile.default_b if self.b is None else float(self.b)

    def radial(self, r: float):
        """Law of the radial coordinate at radius r (t for KAK kinds, T for horocycle)."""
        if self.kind == "ball":
            return radial.radial_ball(self.profile, r)
        if self.kind == "horocycle":
            return radial.horocycle_window(self.profile, r, self.eps, self.window_scale)
        return radial.radial_shell(self.profile, r, self.eps)

    def cartan_radius_cdf(self, r: float):
        """CDF of the displacement d(g i, i) of a sample, for plane families."""
        self._require_plane()
        if self.kind == "horocycle":
            return _window_radius_cdf(self.radial(r))
        return self.radial(r).cdf

    def _require_plane(self) -> None:
        if not (self.profile.is_plane and self.profile.c == 1.0):
            raise DomainError("group-valued sampling is implemented for PSL2(R) (profile (1,0,1)) only")

    def sample_batch(self, r: float, rng: np.random.Generator, n: int) -> np.ndarray:
        """n independent samples as an ``(n, 2, 2)`` matrix stack."""
        self._require_plane()
        dist = self.radial(r)
        theta1 = _sample_factor(self.left, rng, n)
        t = dist.sample(rng, n)
        theta2 = _sample_factor(self.right, rng, n)
        if self.kind == "horocycle":
            return knk_array(theta1, t, theta2)
        return kak_array(theta1, t, theta2)

    def left_support(self) -> ArcSet:
        return _factor_support(self.left)

    def right_support(self) -> ArcSet:
        return _factor_support(self.right)


def _window_radius_cdf(dist):
    def cdf(s):
        return dist.cdf(2.0 * np.sinh(0.5 * np.asarray(s, dtype=float)))
    return cdf


def sample_measure(family: MeasureFamily, r: float, rng: np.random.Generator) -> GroupElement:
    """One sample of the family at radius r."""
    return GroupElement.from_array(family.sample_batch(r, rng, 1)[0])


def sweep_angles(r: float, eps: float, panels: int = SWEEP_PANELS):
    """Ranges of the angular components theta(w_s), theta(w'_s) over s in [r, r + eps]."""
    s = np.linspace(r, r + eps, panels + 1)
    theta, theta_p = angular_component_angles(s)
    return (float(theta.min()), float(theta.max())), (float(theta_p.min()), float(theta_p.max()))


def sector_domination_constant(U: ArcSet, V: ArcSet, r: float, eps: float,
                               panels: int = SWEEP_PANELS) -> tuple[ArcSet, ArcSet, float]:
    """Enlarged arcs U_r, V_r and the constant C_r with sigma^{U,V} <= C_r nu_r * eta * lambda_r.

    ``U_r`` is the union of ``U w_s^{-1}`` and ``V_r`` of ``(w'_s)^{-1} V`` over
    s in [r, r + eps).  Both angle paths are monotone in s, so the union of
    translates is the interval hull of the swept range; the sweep grid only
    locates the extremes.
    """
    if not r > 0:
        raise DomainError("r must be positive")
    if not eps > 0:
        raise DomainError("eps must be positive")
    if U.is_empty or V.is_empty:
        raise DomainError("arc sets must be nonempty")
    (lo, hi), (lo_p, hi_p) = sweep_angles(r, eps, panels)
    U_r = U if U.is_full else U.sweep(-hi, -lo)
    V_r = V if V.is_full else V.sweep(-hi_p, -lo_p)
    C_r = (U_r.measure() * V_r.measure()) / (U.measure() * V.measure())
    return U_r, V_r, C_r
