import json
import math
from pathlib import Path

import numpy as np
import pytest

from hypererg.arcs import ArcSet
from hypererg.dynamics import Constant, CuspIndicator, HorocycleFlow, ModularSurface, TorusFlow, TorusTrig
from hypererg.errors import DomainError
from hypererg.estimators import (
    MAX_PANELS,
    ConvergenceReport,
    LineFamily,
    convergence_sweep,
    estimate_average,
    haar_starts,
    maximal_ratio,
    sample_values,
    weighted_birkhoff,
    window_decomposition,
)
from hypererg import streams
from hypererg.geometry import RankOneProfile, cartan_array
from hypererg.measures import MeasureFamily
from hypererg.radial import HorocycleDensity, PolynomialWeight

import oracles

GOLDEN = Path(__file__).parent / "golden"
SURFACE = ModularSurface()
CUSP = CuspIndicator(2.0)


# -- Monte Carlo averages ------------------------------------------------------------------------

def test_constant_observable_is_exact():
    est = estimate_average(MeasureFamily("shell", eps=0.5), SURFACE, Constant(1.0),
                           SURFACE.default_start(), 10.0, 1_000_000, seed=1)
    assert est.mean == 1.0 and est.std_error == 0.0
    assert est.n_samples == 1_000_000


def test_full_k_sector_matches_shell(rng):
    shell = MeasureFamily("shell", eps=0.5)
    sector = MeasureFamily("sector", eps=0.5, left=ArcSet.full(), right=ArcSet.full())
    ref = oracles.sinh_shell_cdf(6.0, 6.5)
    for fam in (shell, sector):
        _, r, _ = cartan_array(fam.sample_batch(6.0, rng, 1_000_000))
        assert oracles.ks_statistic(r, ref) <= 0.003


def test_deterministic_given_seed_and_workers():
    fam = MeasureFamily("ball")
    a = estimate_average(fam, SURFACE, CUSP, SURFACE.default_start(), 6.0, 50_000, seed=11, workers=2)
    b = estimate_average(fam, SURFACE, CUSP, SURFACE.default_start(), 6.0, 50_000, seed=11, workers=2)
    assert a.mean == b.mean and a.std_error == b.std_error


def test_worker_count_changes_stay_within_noise():
    fam = MeasureFamily("ball")
    ests = [estimate_average(fam, SURFACE, CUSP, SURFACE.default_start(), 6.0, 100_000, seed=11, workers=w)
            for w in (1, 2, 4)]
    for e in ests[1:]:
        assert abs(e.mean - ests[0].mean) <= 3 * math.hypot(e.std_error, ests[0].std_error)
    assert ests[0].mean != ests[1].mean


def test_env_worker_fallback(monkeypatch):
    fam = MeasureFamily("ball")
    explicit = sample_values(fam, SURFACE, CUSP, SURFACE.default_start(), 4.0, 1000, seed=2, workers=3)
    monkeypatch.setenv(streams.WORKERS_ENV, "3")
    env = sample_values(fam, SURFACE, CUSP, SURFACE.default_start(), 4.0, 1000, seed=2, workers=None)
    assert np.array_equal(explicit, env)


def test_linearity_on_shared_draws():
    fam = MeasureFamily("shell", eps=0.3)
    x0 = SURFACE.default_start()
    f, g = CuspIndicator(1.5), CuspIndicator(3.0)
    args = (fam, SURFACE)
    a = estimate_average(*args, f, x0, 5.0, 20_000, seed=4).mean
    b = estimate_average(*args, g, x0, 5.0, 20_000, seed=4).mean
    c = estimate_average(*args, 2.0 * f + g, x0, 5.0, 20_000, seed=4).mean
    assert c == pytest.approx(2 * a + b, abs=1e-12)


def test_positivity():
    vals = sample_values(MeasureFamily("ball"), SURFACE, CUSP, SURFACE.default_start(), 3.0, 10_000, seed=5)
    assert np.all(vals >= 0)
    assert set(np.unique(vals)) <= {0.0, 1.0}


def test_rejects_empty_sample():
    with pytest.raises(DomainError):
        estimate_average(MeasureFamily("ball"), SURFACE, CUSP, SURFACE.default_start(), 3.0, 0, seed=1)


def test_horocycle_family_agrees_with_shell():
    # for U = V = K the K N K window law is the shell law written in other coordinates
    x0 = SURFACE.default_start()
    b = estimate_average(MeasureFamily("horocycle", eps=0.5, b=0.5), SURFACE, CUSP, x0, 8.0, 400_000, seed=6)
    assert abs(b.mean - CUSP.exact_mean) <= 3 * b.std_error + 0.01


# -- convergence sweeps ------------------------------------------------------------------------

def test_ball_sweep_converges():
    grid = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0]
    rep = convergence_sweep(MeasureFamily("ball"), SURFACE, CUSP, [SURFACE.default_start()], grid,
                            200_000, seed=1)
    dev = rep.deviations()
    se = [rec.estimate.std_error for rec in rep.records]
    # deviations shrink until they reach the Monte Carlo noise floor
    for i in range(len(dev) - 1):
        assert dev[i + 1] <= dev[i] + 3 * se[i + 1]
    assert dev[-1] <= 0.01
    assert dev[0] > 0.05
    assert rep.records[-1].flag is False
    assert rep.target == CUSP.exact_mean


def test_sweep_flags_a_biased_target():
    # r = 1 ball averages at a cusp start are far from the space mean
    rep = convergence_sweep(MeasureFamily("ball"), SURFACE, CUSP, [SURFACE.start_from_list([0.0, 5.0])],
                            [1.0, 10.0], 50_000, seed=3)
    assert rep.flagged_radii == [1.0]
    assert not rep.passed


def test_sweep_multiple_starts():
    starts = haar_starts(SURFACE, 3, seed=8)
    rep = convergence_sweep(MeasureFamily("shell", eps=0.5), SURFACE, CUSP, starts, [9.0, 10.0], 50_000, seed=8)
    assert len(rep.records) == 6
    assert {rec.start for rec in rep.records} == {0, 1, 2}
    assert rep.passed


def test_grid_must_increase():
    with pytest.raises(DomainError):
        ConvergenceReport((2.0, 1.0), (), 0.0, 0.01)


# -- maximal function ------------------------------------------------------------------------

def test_maximal_constant_is_one():
    starts = haar_starts(SURFACE, 20, seed=1)
    m = maximal_ratio(MeasureFamily("ball"), SURFACE, Constant(1.0), starts, [1.0, 3.0], 2.0, 100, seed=1)
    assert m.ratio == pytest.approx(1.0, abs=1e-15)


def test_maximal_cusp_pinned():
    pin = json.loads((GOLDEN / "maximal_cusp_ball.json").read_text())
    starts = haar_starts(SURFACE, pin["starts"], seed=pin["start_seed"])
    m = maximal_ratio(MeasureFamily("ball"), SURFACE, CUSP, starts, pin["grid"], pin["p"], pin["n_per_r"],
                      seed=pin["seed"])
    assert m.ratio <= 5.0
    assert m.ratio == pytest.approx(pin["ratio"], rel=1e-12)
    assert m.maximal_norm == pytest.approx(pin["maximal_norm"], rel=1e-12)
    doubled = maximal_ratio(MeasureFamily("ball"), SURFACE, CUSP, starts, pin["grid"], pin["p"],
                            2 * pin["n_per_r"], seed=pin["seed"])
    assert doubled.ratio == pytest.approx(m.ratio, rel=0.02)


def test_maximal_rejects_p_at_most_one():
    with pytest.raises(DomainError):
        maximal_ratio(MeasureFamily("ball"), SURFACE, CUSP, [SURFACE.default_start()], [1.0], 1.0, 10, seed=1)


# -- weighted Birkhoff averages ------------------------------------------------------------------------

@pytest.mark.parametrize("k", [(1, 0), (0, 1), (1, 1), (2, 3)])
def test_weighted_birkhoff_torus_oracle(k):
    flow = TorusFlow()
    x0 = flow.default_start()
    T = 1e4
    got = weighted_birkhoff(flow, TorusTrig(*k), x0, PolynomialWeight(1.0), T=T)
    ref = oracles.torus_trig_linear_weight_average(*k, x0[0], x0[1], flow.slope, T)
    assert got == pytest.approx(ref, abs=1e-12)
    assert abs(got) <= 1e-4


def test_weighted_birkhoff_constant():
    flow = TorusFlow()
    assert weighted_birkhoff(flow, Constant(2.0), flow.default_start(), PolynomialWeight(3.0), T=50.0) == \
        pytest.approx(2.0, rel=1e-13)


def test_weighted_birkhoff_psi_weight_window():
    flow = TorusFlow()
    psi = HorocycleDensity(RankOneProfile.su21())
    val = weighted_birkhoff(flow, TorusTrig(1, 1), flow.default_start(), psi, mode="window", r=6.0, eps=0.5)
    assert abs(val) <= 0.01


def test_line_family_monte_carlo_matches_quadrature():
    flow = TorusFlow()
    x0 = flow.default_start()
    f = TorusTrig(1, 0)
    fam = LineFamily("line-window", PolynomialWeight(1.0), eps=0.5, b=1.0)
    quad = weighted_birkhoff(flow, f, x0, fam.weight, mode="window", r=3.0, eps=0.5, b=1.0)
    mc = estimate_average(fam, flow, f, x0, 3.0, 400_000, seed=2)
    assert abs(mc.mean - quad) <= 4 * mc.std_error


@pytest.mark.parametrize("kappa", [0.0, 1.0, 2.5])
def test_window_identity(kappa):
    flow = HorocycleFlow()
    d = window_decomposition(flow, CUSP, flow.default_start(), PolynomialWeight(kappa), T=200.0, delta=0.3)
    assert d.residual <= 1e-12
    assert d.mass_ratio == pytest.approx(1.0 / (1.3 ** (kappa + 1) - 1.0), rel=1e-12)
    direct = weighted_birkhoff(flow, CUSP, flow.default_start(), PolynomialWeight(kappa), T=200.0)
    assert d.A_T == pytest.approx(direct, abs=1e-12)


def test_panel_limit():
    flow = TorusFlow()
    with pytest.raises(DomainError):
        weighted_birkhoff(flow, TorusTrig(1, 1), flow.default_start(), PolynomialWeight(1.0),
                          T=0.1 * MAX_PANELS * 1.01)


def test_weight_preconditions():
    flow = TorusFlow()

    class Bad:
        kappa = 1.0
        kappa_prime = 1.0

    with pytest.raises(DomainError):
        weighted_birkhoff(flow, Constant(1.0), flow.default_start(), Bad(), T=1.0)
    with pytest.raises(DomainError):
        weighted_birkhoff(flow, Constant(1.0), flow.default_start(), PolynomialWeight(1.0), mode="window", r=1.0)
    with pytest.raises(DomainError):
        weighted_birkhoff(flow, Constant(1.0), flow.default_start(), PolynomialWeight(1.0), mode="ring", T=1.0)
