"""Fast invariant checks behind ``hypererg check``.

Each check returns ``(passed, detail)``; :func:`run_all` times them.  These
are smoke-level versions of the test suite meant for a deployed install.
"""
from __future__ import annotations

import math
import time

import numpy as np

from hypererg import dynamics, geometry, radial, streams
from hypererg.arcs import ArcSet
from hypererg.geometry import GroupElement, RankOneProfile
from hypererg.measures import sector_domination_constant

BUILTIN_PROFILES = (
    RankOneProfile.hyperbolic_plane(),
    RankOneProfile.hyperbolic_space(),
    RankOneProfile.su21(),
    RankOneProfile.sp21(),
    RankOneProfile.f4(),
)


def check_round_trip(seed: int, n: int = 2000):
    rng = streams.substream(seed, 100)
    worst = 0.0
    for m in geometry.random_elements(rng, n):
        g = GroupElement.from_array(m)
        worst = max(worst,
                    g.rep_distance(geometry.cartan_reconstruct(geometry.cartan_decompose(g))),
                    g.rep_distance(geometry.iwasawa_reconstruct(geometry.iwasawa_decompose(g))))
    return worst <= 1e-9, f"max residual {worst:.2e}"


def check_horocycle_distance(seed: int):
    r = np.linspace(0.1, 30.0, 300)
    err = max(abs(geometry.distance(geometry.act(geometry.unipotent(2 * math.sinh(x / 2)), geometry.BASEPOINT),
                                    geometry.BASEPOINT) - x) for x in r)
    return err <= 1e-9, f"max |d - r| {err:.2e}"


def check_normalization(seed: int):
    worst = max(radial.normalization_identity_check(p, R)
                for p in BUILTIN_PROFILES for R in (0.5, 1.0, 2.0, 4.0, 8.0))
    return worst <= 1e-9, f"max residual {worst:.2e}"


def check_angular(seed: int):
    r = np.linspace(1.0, 30.0, 291)
    theta, theta_p = geometry.angular_component_angles(r)
    ok1 = bool(np.all(theta ** 2 <= 4 * np.exp(-r)))
    # the half-turn class of [[0, -1], [1, 0]] is k_{pi/2}
    dist = np.array([geometry.angular_distance(float(t), math.pi / 2) for t in theta_p])
    ok2 = bool(np.all(dist <= 2 * np.exp(-r / 2)))
    return ok1 and ok2, f"theta^2 bound {ok1}, w' bound {ok2}"


def check_sector(seed: int):
    U, V = ArcSet(((0.0, 1.0),)), ArcSet(((1.0, 2.0),))
    cs = [(r, sector_domination_constant(U, V, r, 0.1)[2]) for r in (0.5, 1, 2, 5, 10, 20, 25, 30)]
    ok = all(c >= 1 for _, c in cs) and all(c - 1 <= 0.01 for r, c in cs if r >= 20)
    return ok, f"C_20 - 1 = {dict(cs)[20] - 1:.2e}"


def check_haar(seed: int, n: int = 200_000):
    rng = streams.substream(seed, 101)
    reps, x, y, proposals = dynamics.haar_sample_modular_batch(rng, n, return_stats=True)
    rate = n / proposals
    inside = bool(np.all(dynamics.in_fundamental_domain(x, y)))
    ok = inside and abs(rate - (math.pi / 3) / (2 / math.sqrt(3))) <= 0.003
    return ok, f"acceptance {rate:.4f}, all in domain {inside}"


def check_reduction(seed: int):
    rng = streams.substream(seed, 102)
    ok = True
    for _ in range(200):
        z = geometry.Point(rng.uniform(-5, 5), math.exp(rng.uniform(-8, 3)))
        w, gamma = dynamics.reduce(z)
        w2, gamma2 = dynamics.reduce(w)
        ok &= gamma2.is_close(geometry.identity()) and (w2.x, w2.y) == (w.x, w.y)
        ok &= abs(geometry.act(gamma, z).as_complex() - w.as_complex()) <= 1e-9 * max(1.0, abs(w.as_complex()))
    return bool(ok), "idempotent and gamma z = z'"


CHECKS = (
    ("decomposition round trip", check_round_trip),
    ("horocycle distance law", check_horocycle_distance),
    ("density normalization", check_normalization),
    ("angular asymptotics", check_angular),
    ("sector domination", check_sector),
    ("modular haar sampler", check_haar),
    ("modular reduction", check_reduction),
)


def run_all(seed: int = 1):
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        passed, detail = fn(seed)
        yield name, bool(passed), detail, time.perf_counter() - t0
