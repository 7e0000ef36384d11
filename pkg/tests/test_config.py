from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypererg.arcs import ArcSet, KDensity
from hypererg.config import ExperimentConfig, from_dict, load_config, parse_config, parse_profile
from hypererg.errors import ConfigError
from hypererg.estimators import LineFamily
from hypererg.measures import MeasureFamily

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"

arc_lists = st.lists(
    st.tuples(st.floats(min_value=0, max_value=0.9), st.floats(min_value=0.01, max_value=0.1))
    .map(lambda p: [p[0], p[0] + p[1]]),
    min_size=1, max_size=3,
)


@st.composite
def configs(draw):
    kind = draw(st.sampled_from(["ball", "shell", "sector", "horocycle"]))
    family = {"kind": kind, "profile": "plane"}
    if kind != "ball":
        family["eps"] = draw(st.floats(min_value=0.01, max_value=2))
    if kind in ("sector", "horocycle"):
        family["left"] = draw(arc_lists)
        family["right"] = draw(arc_lists)
    lo = draw(st.floats(min_value=0.5, max_value=10))
    grid = {"min": lo, "max": lo + draw(st.floats(min_value=0.5, max_value=10)),
            "count": draw(st.integers(min_value=1, max_value=8)),
            "spacing": draw(st.sampled_from(["lin", "log"]))}
    starts = draw(st.sampled_from([
        {"mode": "fixed", "count": 1},
        {"mode": "haar", "count": 4},
        {"mode": "fixed", "count": 1, "points": [[0.1, 1.5], [0.0, 2.0, 0.3]]},
    ]))
    return ExperimentConfig(
        action={"name": "modular"},
        observable=f"modular/cusp:{draw(st.floats(min_value=1, max_value=10)):.6g}",
        family=family,
        grid=grid,
        n_per_r=draw(st.integers(min_value=1, max_value=10**7)),
        starts=starts,
        seed=draw(st.integers(min_value=0, max_value=2**64 - 1)),
        bias_budget=draw(st.floats(min_value=0, max_value=0.5)),
        p=draw(st.floats(min_value=1.01, max_value=8)),
        workers=draw(st.integers(min_value=1, max_value=16)),
        output={"format": draw(st.sampled_from(["csv", "json"]))},
    )


@given(configs())
def test_round_trip(conf):
    back = parse_config(conf.dumps())
    assert back.to_dict() == conf.to_dict()
    assert np.array_equal(back.r_grid(), conf.r_grid())
    assert back.build_family() == conf.build_family()


def test_torus_round_trip():
    conf = ExperimentConfig(action={"name": "torus", "slope": 0.5}, observable="torus/trig:1,2",
                            family={"kind": "line-window", "eps": 0.5, "b": 1.0,
                                    "weight": {"kind": "polynomial", "kappa": 2.0}})
    back = parse_config(conf.dumps())
    assert back.to_dict() == conf.to_dict()
    fam = back.build_family()
    assert isinstance(fam, LineFamily) and fam.weight.kappa == 2.0
    assert back.build_action().slope == 0.5


def test_density_factor():
    conf = ExperimentConfig(family={"kind": "convolution", "eps": 0.2,
                                    "left": [{"arcs": [[0, 0.5]], "weight": 3.0},
                                             {"arcs": [[0.5, 1.0]], "weight": 1.0}]})
    fam = conf.build_family()
    assert isinstance(fam.left, KDensity) and fam.right is None
    assert parse_config(conf.dumps()).build_family() == fam


@pytest.mark.parametrize("name", ["cusp_ball.toml", "sector_shell.toml", "torus_window.toml"])
def test_shipped_configs_load(name):
    conf = load_config(CONFIG_DIR / name)
    assert conf.schema_version == 1
    assert len(conf.build_starts()) >= 1


def test_sector_config_arcs():
    fam = load_config(CONFIG_DIR / "sector_shell.toml").build_family()
    assert isinstance(fam, MeasureFamily)
    assert fam.left == ArcSet.from_pi_units([(0.0, 0.25)])


BASE = "schema_version = 1\n"


@pytest.mark.parametrize("text", [
    "schema_version = 1\nseed = [",                          # not TOML
    'observable = "modular/cusp:2"\n',                       # no schema_version
    "schema_version = 2\n",                                  # unsupported version
    BASE + "colour = 1\n",                                   # unknown key
    BASE + "seed = -1\n",
    BASE + "seed = 18446744073709551616\n",                  # 2^64
    BASE + 'seed = "7"\n',
    BASE + "n_per_r = 0\n",
    BASE + "workers = 0\n",
    BASE + 'observable = "modular/cusp:0.5"\n',
    BASE + 'observable = "sphere/cap:1"\n',
    BASE + '[family]\nkind = "annulus"\n',
    BASE + '[family]\nkind = "shell"\neps = 0.0\n',
    BASE + '[family]\nkind = "sector"\nleft = [[0.5, 0.25]]\n',
    BASE + '[family]\nkind = "line-ball"\n',                 # line family on a G-action
    BASE + '[family]\nkind = "ball"\nprofile = "g2"\n',
    BASE + "[grid]\nmin = 5.0\nmax = 2.0\ncount = 3\n",
    BASE + '[grid]\nmin = 0.0\nmax = 2.0\ncount = 3\nspacing = "log"\n',
    BASE + '[starts]\nmode = "random"\n',
    BASE + '[starts]\nmode = "fixed"\npoints = [[0.0, -1.0]]\n',
    BASE + '[output]\nformat = "xml"\n',
    'schema_version = 1\n[action]\nname = "torus"\n[family]\nkind = "line-ball"\n'
    '[family.weight]\nkind = "polynomial"\nkappa = -2.0\n',
    'schema_version = 1\n[action]\nname = "modular"\nslope = 2.0\n',
    BASE + '[family]\nkind = "shell"\nepsilon = 0.5\n',
])
def test_malformed_configs_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_seed_extremes_accepted():
    assert parse_config(BASE + "seed = 0\n").seed == 0
    assert parse_config(BASE + "seed = 18446744073709551615\n").seed == 2**64 - 1


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.toml")


def test_from_dict_requires_version():
    with pytest.raises(ConfigError):
        from_dict({"seed": 1})


def test_profiles():
    assert parse_profile("su21").kappa == 3
    assert parse_profile([1, 0, 1]).is_plane
    assert parse_profile("3,0,1.0").m1 == 3
    for bad in ("g2", [1.5, 0, 1], "1,2"):
        with pytest.raises(ConfigError):
            parse_profile(bad)
