"""Monte Carlo and quadrature evaluation of averaging operators.

``nu_r(f)(x) = int f(g^{-1} x) dnu_r(g)`` is estimated by averaging f over
i.i.d. draws from the family.  Draws for one estimate are split into W chunks,
each with its own substream (see :mod:`hypererg.streams`), and concatenated in
chunk order, so an estimate is a deterministic function of (seed, n, W).

The tolerance policy used by :func:`convergence_sweep` (3 standard errors plus
a fixed bias budget) is a choice made here; no convergence rate is known.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from hypererg import radial, streams
from hypererg.errors import DomainError
from hypererg.measures import MeasureFamily

DEFAULT_BIAS_BUDGET = 0.01
PANEL_WIDTH = 0.1
GL_ORDER = 8
MAX_PANELS = 50_000_000
_BLOCK_PANELS = 200_000
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)
LINE_KINDS = ("line-ball", "line-window")


# -- one-dimensional families ------------------------------------------------------

@dataclass(frozen=True)
class LineFamily:
    """Weighted averages along an R-flow, sampled by time.

    ``line-ball`` draws t from ``weight`` on [0, r]; ``line-window`` from
    ``weight`` on ``[2 sinh(b r), 2 sinh(b (r + eps))]``.
    """

    kind: str
    weight: object = field(default_factory=lambda: radial.PolynomialWeight(1.0))
    eps: float = 0.1
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in LINE_KINDS:
            raise DomainError(f"unknown line family {self.kind!r}")
        if not self.eps > 0 or not self.b > 0:
            raise DomainError("eps and b must be positive")

    def interval(self, r: float) -> tuple[float, float]:
        if self.kind == "line-ball":
            if not r > 0:
                raise DomainError("T must be positive")
            return 0.0, float(r)
        return radial.window_bounds(r, self.eps, self.b)

    def radial(self, r: float):
        lo, hi = self.interval(r)
        return radial.weight_distribution(self.weight, lo, hi)

    def sample_batch(self, r: float, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.radial(r).sample(rng, n)


# -- results -----------------------------------------------------------------------

@dataclass(frozen=True)
class AverageEstimate:
    r: float
    n_samples: int
    mean: float
    std_error: float
    seed: int
    wall_time: float
    workers: int = 1

    def as_dict(self) -> dict:
        return {"r": self.r, "n_samples": self.n_samples, "mean": self.mean,
                "std_error": self.std_error, "seed": self.seed, "workers": self.workers,
                "wall_time": self.wall_time}


@dataclass(frozen=True)
class ConvergenceRecord:
    r: float
    start: int
    estimate: AverageEstimate
    target: float
    deviation: float
    flag: bool


@dataclass(frozen=True)
class ConvergenceReport:
    grid: tuple[float, ...]
    records: tuple[ConvergenceRecord, ...]
    target: float
    bias_budget: float

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise DomainError("r grid must be strictly increasing")

    @property
    def passed(self) -> bool:
        return not any(rec.flag for rec in self.records)

    @property
    def flagged_radii(self) -> list[float]:
        return sorted({rec.r for rec in self.records if rec.flag})

    def deviations(self, start: int = 0) -> list[float]:
        return [rec.deviation for rec in self.records if rec.start == start]


@dataclass(frozen=True)
class MaximalEstimate:
    grid: tuple[float, ...]
    p: float
    sup_values: np.ndarray = field(repr=False)
    f_norm: float
    ratio: float
    n_per_r: int

    @property
    def maximal_norm(self) -> float:
        return float(np.mean(self.sup_values ** self.p) ** (1.0 / self.p))


# -- Monte Carlo averages ---------------------------------------------------------

def _chunk_values(task) -> np.ndarray:
    family, action, f, x0, r, n, seed, key = task
    rng = streams.substream(seed, *key)
    g = family.sample_batch(r, rng, n)
    return np.asarray(f(action.act_inverse(x0, g)), dtype=float)


def sample_values(family, action, f, x0, r: float, n: int, seed: int,
                  workers: int | None = 1, key: tuple = ()) -> np.ndarray:
    """The n values ``f(g_i^{-1} x0)`` behind :func:`estimate_average`, in merge order."""
    if n < 1:
        raise DomainError("n must be at least 1")
    workers = streams.resolve_workers(workers)
    sizes = streams.split(n, workers)
    base = (streams.TAG_AVERAGE,) + tuple(key)
    tasks = [(family, action, f, x0, r, m, seed, base + (i,)) for i, m in enumerate(sizes)]
    return streams.concat(streams.run_ordered(_chunk_values, tasks, workers))


def _summarise(values: np.ndarray, r, seed, wall, workers) -> AverageEstimate:
    n = values.size
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if n > 1 else 0.0
    if not math.isfinite(mean):
        raise ArithmeticError("non-finite average")
    return AverageEstimate(float(r), n, mean, std / math.sqrt(n), seed, wall, workers)


def estimate_average(family, action, f, x0, r: float, n: int, seed: int,
                     workers: int | None = 1, key: tuple = ()) -> AverageEstimate:
    """Monte Carlo estimate of ``nu_r(f)(x0)``.

    Parameters
    ----------
    family : MeasureFamily or LineFamily
        Averaging family; for a LineFamily ``action`` must be an R-flow.
    action : ModularSurface, TorusFlow or HorocycleFlow
    f : Observable
    x0 : ndarray
        Start state, as returned by ``action.start_state`` or ``default_start``.
    r : float
        Radius (or ball length T for line families).
    n : int
        Number of samples, at least 1.
    seed : int
        Master seed.
    workers : int, optional
        Number of chunks/processes; None reads ``$HYPERERG_WORKERS``.
    key : tuple of int
        Extra stream address, used by sweeps to separate radii and starts.
    """
    workers = streams.resolve_workers(workers)
    t0 = time.perf_counter()
    values = sample_values(family, action, f, x0, r, n, seed, workers, key)
    return _summarise(values, r, seed, time.perf_counter() - t0, workers)


def haar_starts(action, count: int, seed: int) -> list[np.ndarray]:
    """``count`` start states drawn from the invariant measure."""
    if count < 1:
        raise DomainError("need at least one start point")
    states = action.haar_sample(streams.substream(seed, streams.TAG_STARTS), count)
    return list(states)


def convergence_sweep(family, action, f, starts, r_grid, n_per_r: int, seed: int,
                      workers: int | None = 1, bias_budget: float = DEFAULT_BIAS_BUDGET) -> ConvergenceReport:
    """Estimate ``nu_r f`` at every grid radius and start; flag deviations above ``3 se + bias_budget``."""
    grid = tuple(float(r) for r in r_grid)
    if not grid:
        raise DomainError("empty r grid")
    starts = list(starts)
    if not starts:
        raise DomainError("need at least one start point")
    target = float(f.exact_mean)
    records = []
    for ri, r in enumerate(grid):
        for si, x0 in enumerate(starts):
            est = estimate_average(family, action, f, x0, r, n_per_r, seed, workers, key=(ri, si))
            dev = abs(est.mean - target)
            flag = dev > 3.0 * est.std_error + bias_budget
            records.append(ConvergenceRecord(r, si, est, target, dev, flag))
    return ConvergenceReport(grid, tuple(records), target, float(bias_budget))


def log_grid(r_min: float, r_max: float, count: int) -> np.ndarray:
    return np.geomspace(r_min, r_max, count)


# -- maximal function ----------------------------------------------------------------

def _radius_sups(task) -> np.ndarray:
    family, action, f, starts, r, n, seed, ri = task
    rng = streams.substream(seed, streams.TAG_MAXIMAL, ri)
    out = np.empty(len(starts))
    for si, x0 in enumerate(starts):
        g = family.sample_batch(r, rng, n)
        out[si] = np.mean(np.abs(f(action.act_inverse(x0, g))))
    return out


def lp_norm(f, action, p: float, seed: int, n: int = 1_000_000) -> float:
    """``||f||_p`` under the invariant measure; Monte Carlo when no closed form is known."""
    exact = f.lp_norm(p)
    if exact is not None:
        return float(exact)
    states = action.haar_sample(streams.substream(seed, streams.TAG_NORM), n)
    return float(np.mean(np.abs(f(states)) ** p) ** (1.0 / p))


def maximal_ratio(family, action, f, starts, r_grid, p: float, n: int, seed: int,
                  workers: int | None = 1) -> MaximalEstimate:
    """Empirical ``||max_grid nu_r |f| ||_p / ||f||_p`` over the given starts.

    The supremum over r > 0 is replaced by a maximum over ``r_grid``; the
    result is a diagnostic witness, not a bound.
    """
    if not p > 1:
        raise DomainError("maximal ratio needs p > 1")
    grid = tuple(float(r) for r in r_grid)
    if not grid:
        raise DomainError("empty r grid")
    starts = list(starts)
    workers = streams.resolve_workers(workers)
    tasks = [(family, action, f, starts, r, n, seed, ri) for ri, r in enumerate(grid)]
    per_r = streams.run_ordered(_radius_sups, tasks, workers)
    sups = np.max(np.stack(per_r), axis=0)
    norm = lp_norm(f, action, p, seed)
    if norm == 0:
        raise DomainError("observable has zero L^p norm")
    mnorm = float(np.mean(sups ** p) ** (1.0 / p))
    return MaximalEstimate(grid, float(p), sups, norm, mnorm / norm, n)


# -- weighted Birkhoff averages by quadrature ----------------------------------------------

def _check_weight(weight) -> None:
    kappa = getattr(weight, "kappa", None)
    if kappa is None or not kappa > -1:
        raise DomainError("weight is not locally integrable at 0")
    kp = getattr(weight, "kappa_prime", None)
    if kp is not None and not kp < kappa:
        raise DomainError("weight needs kappa' < kappa")


def _weighted_sums(flow, f, x0, weight, lo: float, hi: float, logscale: float,
                   width: float = PANEL_WIDTH) -> tuple[float, float]:
    """``(int f(h_t^{-1} x0) psi(t) dt, int psi dt)`` over [lo, hi], both scaled by ``exp(-logscale)``."""
    if hi <= lo:
        return 0.0, 0.0
    m = int(math.ceil((hi - lo) / width))
    if m > MAX_PANELS:
        raise DomainError(f"interval of length {hi - lo:g} needs {m} panels (limit {MAX_PANELS})")
    h = (hi - lo) / m
    num, den = [], []
    for start in range(0, m, _BLOCK_PANELS):
        j = np.arange(start, min(m, start + _BLOCK_PANELS))
        left = lo + j * h
        t = (left[:, None] + 0.5 * h * (_GL_X + 1.0)[None, :]).ravel()
        w = np.tile(0.5 * h * _GL_W, j.size) * np.exp(weight.log(t) - logscale)
        vals = np.asarray(f(flow.act_inverse(x0, t)), dtype=float)
        num.append(math.fsum(w * vals))
        den.append(math.fsum(w))
    return math.fsum(num), math.fsum(den)


def weighted_birkhoff(flow, f, x0, weight, T: float | None = None, *, mode: str = "ball",
                      r: float | None = None, eps: float | None = None, b: float = 1.0) -> float:
    """``(1 / eta(I)) int_I f(h_t^{-1} x0) psi(t) dt`` by composite Gauss-Legendre quadrature.

    ``mode="ball"`` integrates over I = [0, T]; ``mode="window"`` over
    ``[2 sinh(b r), 2 sinh(b (r + eps))]``.  Panels have width at most 0.1
    with 8 nodes each.
    """
    _check_weight(weight)
    if mode == "ball":
        if T is None or not T > 0:
            raise DomainError("ball mode needs T > 0")
        lo, hi = 0.0, float(T)
    elif mode == "window":
        if r is None or eps is None:
            raise DomainError("window mode needs r and eps")
        lo, hi = radial.window_bounds(r, eps, b)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    num, den = _weighted_sums(flow, f, x0, weight, lo, hi, float(weight.log(hi)))
    return num / den


@dataclass(frozen=True)
class WindowDecomposition:
    """Pieces of ``A_{(1+d)T} = (1 - q) A_T + q W`` with ``q = eta[T,(1+d)T) / eta[0,(1+d)T)``."""

    A_T: float
    A_big: float
    window: float
    mass_ratio: float  # eta([0, T)) / eta([T, (1+d) T))
    residual: float


def window_decomposition(flow, f, x0, weight, T: float, delta: float) -> WindowDecomposition:
    """Check ``W = A_{(1+d)T} + (eta[0,T) / eta[T,(1+d)T)) (A_{(1+d)T} - A_T)``.

    The three averages are computed independently by quadrature; the residual
    measures how well they recombine.
    """
    _check_weight(weight)
    if not T > 0 or not delta > 0:
        raise DomainError("T and delta must be positive")
    T1 = (1.0 + delta) * T
    scale = float(weight.log(T1))
    n0, d0 = _weighted_sums(flow, f, x0, weight, 0.0, T, scale)
    nw, dw = _weighted_sums(flow, f, x0, weight, T, T1, scale)
    nb, db = _weighted_sums(flow, f, x0, weight, 0.0, T1, scale)
    A_T, W, A_big = n0 / d0, nw / dw, nb / db
    ratio = d0 / dw
    residual = abs(W - (A_big + ratio * (A_big - A_T)))
    return WindowDecomposition(A_T, A_big, W, ratio, residual)
