"""Tests for config parsing, scenario plumbing and the command-line interface."""

import math

import numpy as np
import pytest

from cachenet.cli import HARDWARE_CASES, hardware_comparison, main
from cachenet.popularity import BITS_PER_MB
from cachenet.scenarios import (
    BACKHAUL_HARDWARE,
    CACHE_HARDWARE,
    ConfigError,
    apply_sweep_value,
    dbm_to_watts,
    parse_config,
    preset,
    tiers_for_bs_count,
    watts_to_dbm,
    write_sweep_csv,
)
from cachenet.special import harmonic_sum

TINY_CONFIG = """
[network]
preset = pico
bs_count = 7
mean_users = 5.7
interference_factor = 0

[sim]
drops = 6
seed = 1
"""


# ------------------------------------------------------------- scenarios

def test_preset_pico_headline_numbers():
    sc = preset("pico")
    assert sc.net.bs_count == 37
    assert sc.net.antennas == 4
    assert sc.net.cell_radius_m == pytest.approx(250.0 / math.sqrt(37.0))
    assert watts_to_dbm(sc.net.transmit_power_w) == pytest.approx(21.0)
    assert sc.power.backhaul_capacity_bps == 1e8
    assert sc.content.cached_count == 1000
    assert sc.core_tiers == 3


def test_preset_macro_matches_pico_coverage():
    pico, macro = preset("pico"), preset("macro")
    assert macro.net.antennas == 37 * pico.net.antennas
    assert macro.net.mean_users == 37 * pico.net.mean_users
    assert macro.power.backhaul_capacity_bps == 37 * pico.power.backhaul_capacity_bps
    assert macro.net.cell_radius_m == pytest.approx(250.0)
    with pytest.raises(ValueError):
        preset("femto")


def test_tiers_inversion():
    assert tiers_for_bs_count(1) == 0
    assert tiers_for_bs_count(7) == 1
    assert tiers_for_bs_count(37) == 3
    assert tiers_for_bs_count(61) == 4
    with pytest.raises(ValueError):
        tiers_for_bs_count(5)


def test_dbm_conversion_roundtrip():
    assert dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-12)
    assert watts_to_dbm(dbm_to_watts(-95.0)) == pytest.approx(-95.0, abs=1e-12)


def test_scenario_hash_tracks_parameters():
    sc = preset("pico")
    assert sc.scenario_hash() == preset("pico").scenario_hash()
    changed = sc.replace(net=sc.net.replace(mean_users=31.0))
    assert changed.scenario_hash() != sc.scenario_hash()


# ---------------------------------------------------------------- parsing

def test_parse_config_full_document():
    spec = parse_config(
        """
# demo covering every section
[network]
preset = macro
bs_count = 19
antennas = 8
cell_radius_m = 100
bandwidth_mhz = 10
pathloss_exponent = 3.5
pathloss_ref_db = 20
noise_dbm = -90
mean_users = 12
interference_factor = 0.5
transmit_power_dbm = 30

[content]
catalog_size = 5000
content_size_mb = 10
skew = 1.0
cache_fraction = 0.2

[power]
cache = dram
backhaul = fiber
amplifier_factor = 4.0
circuit_active_w = 100
circuit_idle_w = 50
backhaul_capacity_mbps = 500

[sim]
drops = 8
seed = 3
workers = 2
shadowing_db = 4
association = distributed

[sweep]
variable = skew
values = 0.6, 0.8, 1.0
"""
    )
    sc = spec.scenario
    assert sc.name == "macro"
    assert sc.core_tiers == 2
    assert sc.net.bs_count == 19
    assert sc.net.antennas == 8
    assert sc.net.bandwidth_hz == pytest.approx(1e7)
    assert sc.net.noise_power_w == pytest.approx(dbm_to_watts(-90.0))
    assert sc.net.transmit_power_w == pytest.approx(1.0)
    assert sc.net.interference_factor == 0.5
    assert sc.content.catalog_size == 5000
    assert sc.content.content_bits == pytest.approx(10 * BITS_PER_MB)
    assert sc.content.cached_count == 1000  # 0.2 of the catalog
    assert sc.power.cache_w_per_bit == CACHE_HARDWARE["dram"]
    assert sc.power.backhaul_j_per_bit == BACKHAUL_HARDWARE["fiber"][0]
    assert sc.power.backhaul_capacity_bps == pytest.approx(5e8)  # explicit cap wins
    assert sc.power.amplifier_factor == 4.0
    assert spec.sim.drops == 8 and spec.sim.workers == 2
    assert spec.sim.association == "distributed"
    assert spec.sweep.variable == "skew"
    assert np.allclose(spec.sweep.values, [0.6, 0.8, 1.0])


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("[weird]\n", ":1: unknown section"),
        ("[network]\nfoo = 3\n", ":2: unknown key"),
        ("[network]\nmean_users = 1\nmean_users = 2\n", ":3: duplicate key"),
        ("mean_users = 3\n", ":1: key outside"),
        ("[network]\nmean_users = abc\n", ":2: bad value"),
        ("[network]\nno equals sign\n", "expected 'key = value'"),
        ("[content]\ncached_count = 10\ncache_fraction = 0.5\n", "not both"),
        ("[power]\ncache = tape\n", "unknown cache hardware"),
        ("[power]\nbackhaul = pigeon\n", "unknown backhaul hardware"),
        ("[network]\nbs_count = 5\n", "not a full hexagonal lattice"),
        ("[network]\npreset = femto\n", "unknown preset"),
        ("[sim]\nassociation = foo\n", "association must be"),
        ("[sweep]\nvariable = skew\n", "exactly one of 'grid' or 'values'"),
        ("[sweep]\ngrid = 0.5:2:4\n", "needs a 'variable'"),
        ("[sweep]\nvariable = bogus\nvalues = 1, 2\n", "unknown sweep variable"),
        ("[sweep]\nvariable = skew\nvalues = 3, 2, 1\n", "strictly increasing"),
        ("[sweep]\nvariable = skew\ngrid = 1:2\n", "start:stop:count"),
        ("[sweep]\nvariable = skew\ngrid = 1:2:1\n", "at least 2 points"),
        ("[sweep]\nvariable = skew\ngrid = 2:1:5\n", "start must be below stop"),
        ("[sweep]\nvariable = skew\ngrid = 0:1:5:log\n", "positive start"),
        ("[sweep]\nvariable = skew\ngrid = 1:2:5:cubic\n", "'lin' or 'log'"),
    ],
)
def test_parse_config_error_messages(text, fragment):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert fragment in str(err.value)


def test_parse_config_comments_and_defaults():
    spec = parse_config("# only a comment\n; and another\n")
    assert spec.scenario.name == "pico"
    assert spec.sweep is None
    assert spec.sim.drops == 2000


def test_sweep_grid_forms():
    lin = parse_config("[sweep]\nvariable = skew\ngrid = 0:1:5\n").sweep
    assert np.allclose(lin.values, np.linspace(0, 1, 5))
    log = parse_config("[sweep]\nvariable = skew\ngrid = 0.01:1:3:log\n").sweep
    assert np.allclose(log.values, [0.01, 0.1, 1.0])


def test_apply_sweep_value_covers_every_variable():
    sc = preset("pico")
    assert apply_sweep_value(sc, "cache_fraction", 0.25).content.cached_count == 2500
    assert apply_sweep_value(sc, "cached_count", 17.0).content.cached_count == 17
    shrunk = apply_sweep_value(sc, "catalog_size", 500.0)
    assert shrunk.content.catalog_size == 500
    assert shrunk.content.cached_count == 500  # clamped to the catalog
    assert apply_sweep_value(sc, "transmit_power_dbm", 30.0).net.transmit_power_w == pytest.approx(1.0)
    assert apply_sweep_value(sc, "interference_factor", 0.5).net.interference_factor == 0.5
    assert apply_sweep_value(sc, "backhaul_capacity_mbps", 250.0).power.backhaul_capacity_bps == 2.5e8
    assert apply_sweep_value(sc, "skew", 1.2).content.skew == 1.2
    assert apply_sweep_value(sc, "mean_users", 10.0).net.mean_users == 10.0
    with pytest.raises(ValueError):
        apply_sweep_value(sc, "other", 1.0)


# ------------------------------------------------------------- CSV output

def test_write_sweep_csv_format(tmp_path):
    path = tmp_path / "out.csv"
    write_sweep_csv(
        str(path),
        [("x", np.array([1.0 / 3.0, 2.0])), ("y", np.array([4.0, 5.0]))],
        scenario=preset("pico"),
        seed=9,
        descriptor="demo",
    )
    lines = path.read_text().splitlines()
    assert lines[0] == "# sweep: demo"
    assert lines[1].startswith("# scenario: pico ")
    assert lines[2] == "# seed: 9"
    assert lines[3] == "x,y"
    assert lines[4] == "0.333333333,4"
    with pytest.raises(ValueError):
        write_sweep_csv(
            str(path), [("x", np.array([1.0])), ("y", np.array([1.0, 2.0]))],
            scenario=preset("pico"),
        )


# ------------------------------------------------------- hardware survey

def test_hardware_comparison_frozen_cache_costs():
    sc = preset("pico")
    rows = hardware_comparison(sc.net, sc.power, 0.2924)
    assert len(rows) == len(HARDWARE_CASES)
    # lhs = cache power of one copy of the whole catalog's request mass;
    # independent of the interference offset
    expect_lhs = [
        CACHE_HARDWARE[cache] * mb * BITS_PER_MB * harmonic_sum(catalog, 1.0)
        for cache, _, catalog, mb in HARDWARE_CASES
    ]
    assert [r.lhs_w for r in rows] == pytest.approx(expect_lhs, rel=1e-12)
    assert [r.lhs_w for r in rows] == pytest.approx(
        [6.04507e-3, 6.04507e-3, 0.374274, 2.41803, 2.41803, 149.709], rel=1e-5
    )
    assert [r.caching_helps for r in rows] == [True, True, True, True, False, False]
    # rows sharing a backhaul technology share the rhs
    assert rows[0].rhs_w == pytest.approx(rows[3].rhs_w, rel=1e-12)
    assert rows[1].rhs_w == pytest.approx(rows[4].rhs_w, rel=1e-12)
    assert rows[0].rhs_w > rows[1].rhs_w  # microwave saves more energy per bit


# ------------------------------------------------------------ CLI driver

def test_cli_analyze_runs(capsys):
    assert main(["analyze", "--preset", "pico", "--phi", "0.3"]) == 0
    out = capsys.readouterr().out
    assert "energy efficiency" in out
    assert "cell throughput" in out


def test_cli_optimize_explains_skew_restriction(capsys):
    assert main(["optimize", "--preset", "pico", "--phi", "0.3"]) == 0
    assert "skew = 1" in capsys.readouterr().out


def test_cli_optimize_full_output(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text(TINY_CONFIG + "\n[content]\nskew = 1\n")
    assert main(["optimize", "--config", str(cfg), "--phi", "0.3"]) == 0
    out = capsys.readouterr().out
    assert "caching benefit condition" in out
    assert "optimal cache fraction" in out
    assert "optimal transmit power" in out  # interference_factor = 0 in the config


def test_cli_hardware_table(capsys):
    assert main(["hardware", "--preset", "pico", "--phi", "0.3"]) == 0
    out = capsys.readouterr().out
    assert out.count("yes") + out.count("no") >= 6


def test_cli_simulate_writes_csv(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text(TINY_CONFIG)
    out_csv = tmp_path / "sim.csv"
    assert main(["simulate", "--config", str(cfg), "--phi", "0.3", "--out", str(out_csv)]) == 0
    text = out_csv.read_text()
    assert text.startswith("# sweep: simulate drops=6")
    assert "ee_bits_per_joule" in text


def test_cli_validate_pass_and_fail(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text(TINY_CONFIG)
    assert main(["validate", "--config", str(cfg), "--phi", "0.3"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
    assert main(["validate", "--config", str(cfg), "--phi", "0.3",
                 "--tolerance", "0.0001"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_cli_usage_errors(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text(TINY_CONFIG)
    assert main(["analyze", "--config", str(cfg), "--preset", "pico"]) == 2
    assert main(["analyze", "--config", str(tmp_path / "missing.ini")]) == 2
    assert main(["sweep", "--preset", "pico", "--phi", "0.3",
                 "--variable", "skew", "--grid", "0.6:1:3"]) == 2  # no --out
    assert main(["sweep", "--preset", "pico", "--phi", "0.3",
                 "--variable", "skew"]) == 2  # --grid missing
    bad = tmp_path / "bad.ini"
    bad.write_text("[power]\nbackhaul = pigeon\n")
    assert main(["analyze", "--config", str(bad)]) == 2
    capsys.readouterr()


def test_cli_sweep_reruns_are_byte_identical(tmp_path, capsys):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    args = ["sweep", "--preset", "pico", "--phi", "0.3",
            "--variable", "cache_fraction", "--grid", "0.05:0.2:4"]
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    lines = out_a.read_text().splitlines()
    assert lines[-1].count(",") == 3  # variable + three model columns
    assert len(lines) == 2 + 1 + 4  # header comments, column names, 4 rows
    capsys.readouterr()
