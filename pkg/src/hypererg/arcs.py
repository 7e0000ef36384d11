"""Subsets and densities on K = SO(2)/{+-I}, parametrised by angles in [0, pi).

m_K is the normalised Haar measure, so an arc [lo, hi) has mass (hi - lo)/pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from hypererg.errors import DomainError

PI = math.pi
# endpoints closer than this are merged during normalisation
_MERGE_EPS = 1e-15


def _normalize(intervals: Iterable[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    pieces = []
    for lo, hi in intervals:
        lo, hi = float(lo), float(hi)
        if hi < lo:
            raise DomainError(f"interval ({lo}, {hi}) has hi < lo")
        if hi - lo >= PI:
            return ((0.0, PI),)
        if hi == lo:
            continue
        shift = math.floor(lo / PI) * PI
        lo, hi = lo - shift, hi - shift
        if hi <= PI:
            pieces.append((lo, hi))
        else:
            pieces.append((lo, PI))
            pieces.append((0.0, hi - PI))
    pieces.sort()
    merged: list[list[float]] = []
    for lo, hi in pieces:
        if merged and lo <= merged[-1][1] + _MERGE_EPS:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return tuple((lo, min(hi, PI)) for lo, hi in merged)


@dataclass(frozen=True)
class ArcSet:
    """A finite union of half-open arcs ``[lo, hi)`` of K, kept disjoint and sorted.

    Construct from any iterable of ``(lo, hi)`` pairs in radians; arcs are
    wrapped modulo pi and merged.  An empty set is allowed as a value (so that
    intersections are closed operations) but samplers reject it.
    """

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "intervals", _normalize(self.intervals))

    @classmethod
    def full(cls) -> ArcSet:
        return cls(((0.0, PI),))

    @classmethod
    def empty(cls) -> ArcSet:
        return cls(())

    @classmethod
    def from_pi_units(cls, intervals: Iterable[Sequence[float]]) -> ArcSet:
        """Arcs given as multiples of pi, e.g. ``[(0, 0.25)]`` for [0, pi/4)."""
        return cls(tuple((lo * PI, hi * PI) for lo, hi in intervals))

    def to_pi_units(self) -> list[list[float]]:
        return [[lo / PI, hi / PI] for lo, hi in self.intervals]

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_full(self) -> bool:
        return self.intervals == ((0.0, PI),)

    def measure(self) -> float:
        """Haar probability m_K of the set."""
        return math.fsum(hi - lo for lo, hi in self.intervals) / PI

    def length(self) -> float:
        return math.fsum(hi - lo for lo, hi in self.intervals)

    def union(self, other: ArcSet) -> ArcSet:
        return ArcSet(self.intervals + other.intervals)

    def complement(self) -> ArcSet:
        out = []
        prev = 0.0
        for lo, hi in self.intervals:
            if lo > prev:
                out.append((prev, lo))
            prev = hi
        if prev < PI:
            out.append((prev, PI))
        return ArcSet(tuple(out))

    def intersection(self, other: ArcSet) -> ArcSet:
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return ArcSet(tuple(out))

    __or__ = union
    __and__ = intersection

    def translate(self, phi: float) -> ArcSet:
        """The set ``{theta + phi}``; as subsets of K this is right (or left) multiplication by k_phi."""
        return ArcSet(tuple((lo + phi, hi + phi) for lo, hi in self.intervals))

    def sweep(self, phi_min: float, phi_max: float) -> ArcSet:
        """Union of the translates by every phi in [phi_min, phi_max]."""
        if phi_max < phi_min:
            phi_min, phi_max = phi_max, phi_min
        return ArcSet(tuple((lo + phi_min, hi + phi_max) for lo, hi in self.intervals))

    def contains(self, theta) -> np.ndarray | bool:
        theta = np.mod(np.asarray(theta, dtype=float), PI)
        hit = np.zeros(theta.shape, dtype=bool)
        for lo, hi in self.intervals:
            hit |= (theta >= lo) & (theta < hi)
        return hit if hit.ndim else bool(hit)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n angles drawn uniformly (w.r.t. m_K) from the set."""
        if self.is_empty:
            raise DomainError("cannot sample from an empty arc set")
        if self.is_full:
            return rng.uniform(0.0, PI, size=n)
        lengths = np.array([hi - lo for lo, hi in self.intervals])
        cum = np.concatenate(([0.0], np.cumsum(lengths)))
        u = rng.uniform(0.0, cum[-1], size=n)
        idx = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(lengths) - 1)
        lo = np.array([lo for lo, _ in self.intervals])
        return np.minimum(lo[idx] + (u - cum[idx]), np.array([hi for _, hi in self.intervals])[idx])


@dataclass(frozen=True)
class KDensity:
    """A piecewise-constant probability density on K with respect to m_K.

    ``pieces`` pairs disjoint arc sets with nonnegative weights; the weights
    are rescaled on construction so that the density integrates to one.
    """

    pieces: tuple[tuple[ArcSet, float], ...]

    def __post_init__(self):
        pieces = tuple((arcs, float(w)) for arcs, w in self.pieces)
        if not pieces:
            raise DomainError("density needs at least one piece")
        for arcs, w in pieces:
            if w < 0 or not math.isfinite(w):
                raise DomainError("density weights must be finite and nonnegative")
        for i in range(len(pieces)):
            for j in range(i + 1, len(pieces)):
                if pieces[i][0].intersection(pieces[j][0]).measure() > 1e-14:
                    raise DomainError("density pieces must be disjoint")
        mass = math.fsum(arcs.measure() * w for arcs, w in pieces)
        if not mass > 0:
            raise DomainError("density has zero mass")
        object.__setattr__(self, "pieces", tuple((arcs, w / mass) for arcs, w in pieces))

    @classmethod
    def uniform_on(cls, arcs: ArcSet) -> KDensity:
        return cls(((arcs, 1.0),))

    def total_mass(self) -> float:
        return math.fsum(arcs.measure() * w for arcs, w in self.pieces)

    def sup(self) -> float:
        return max(w for arcs, w in self.pieces if arcs.measure() > 0)

    def support(self) -> ArcSet:
        out = ArcSet.empty()
        for arcs, w in self.pieces:
            if w > 0:
                out = out.union(arcs)
        return out

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape)
        for arcs, w in self.pieces:
            out = np.where(arcs.contains(theta), w, out)
        return out

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        probs = np.array([arcs.measure() * w for arcs, w in self.pieces])
        probs /= probs.sum()
        which = rng.choice(len(self.pieces), size=n, p=probs)
        out = np.empty(n)
        for k, (arcs, _) in enumerate(self.pieces):
            sel = which == k
            count = int(sel.sum())
            if count:
                out[sel] = arcs.sample(rng, count)
        return out
