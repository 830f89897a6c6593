"""Named scenarios, config-file parsing and CSV output for the CLI.

A Scenario bundles the network, power and content parameters together with
the lattice size used by the simulator.  Two presets are built in (a dense
pico deployment and a macro deployment with the same coverage, user density,
antenna count and sum backhaul capacity), plus hardware shorthands for the
cache and backhaul technologies.

Config files are a small INI dialect: ``[section]`` headers, ``key = value``
pairs, ``#``/``;`` comments.  Keys carry explicit units in their names
(``transmit_power_dbm``, ``content_size_mb``).  Unknown sections or keys are
hard errors with the offending line number, as are non-monotone sweep grids.
"""

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import CellLayout, NetworkConfig, build_hex_layout
from .model import PowerConfig
from .popularity import BITS_PER_MB, ContentConfig

#: J/bit kept in cache memory, by storage technology
CACHE_HARDWARE = {"ssd": 6.25e-12, "dram": 2.5e-9}

#: (J/bit transported, link capacity in bit/s), by backhaul technology
BACKHAUL_HARDWARE = {"microwave": (5e-7, 1e8), "fiber": (4e-8, 1e9)}


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0 - 3.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def tiers_for_bs_count(bs_count: int) -> int:
    """Invert n = 3 t (t + 1) + 1, the cell count of t hexagonal tiers."""
    t = round((math.sqrt(12 * bs_count - 3) - 3) / 6)
    if 3 * t * (t + 1) + 1 != bs_count:
        raise ValueError(
            f"bs_count={bs_count} is not a full hexagonal lattice "
            "(needs 3*t*(t+1)+1: 1, 7, 19, 37, 61, ...)"
        )
    return t


@dataclass(frozen=True)
class SimOptions:
    """Monte-Carlo controls shared by the CLI commands."""

    drops: int = 2000
    seed: int = 1
    workers: int = 1
    shadowing_db: float = 0.0
    association: str = "nearest"  # or "distributed"


@dataclass(frozen=True)
class Scenario:
    name: str
    net: NetworkConfig
    power: PowerConfig
    content: ContentConfig
    core_tiers: int
    guard_tiers: int = 3

    def layout(self) -> CellLayout:
        return build_hex_layout(
            self.core_tiers, self.guard_tiers, cell_radius_m=self.net.cell_radius_m
        )

    def scenario_hash(self) -> str:
        """Short stable digest of every parameter, for tagging output files."""
        blob = repr((self.name, self.net, self.power, self.content, self.core_tiers, self.guard_tiers))
        return hashlib.md5(blob.encode()).hexdigest()[:12]

    def replace(self, **kw) -> "Scenario":
        return replace(self, **kw)


def preset(name: str) -> Scenario:
    """Built-in scenarios: ``pico`` and ``macro``."""
    if name == "pico":
        net = NetworkConfig(
            bs_count=37,
            antennas=4,
            cell_radius_m=250.0 / math.sqrt(37.0),
            bandwidth_hz=20e6,
            pathloss_exponent=3.67,
            noise_power_w=dbm_to_watts(-95.0),
            mean_users=30.0,
            interference_factor=1.0,
            transmit_power_w=dbm_to_watts(21.0),
            pathloss_ref_db=30.6,
        )
        power = PowerConfig(
            amplifier_factor=15.13,
            circuit_active_w=10.16,
            circuit_idle_w=3.85,
            cache_w_per_bit=CACHE_HARDWARE["ssd"],
            backhaul_j_per_bit=BACKHAUL_HARDWARE["microwave"][0],
            backhaul_capacity_bps=BACKHAUL_HARDWARE["microwave"][1],
        )
        content = ContentConfig(
            catalog_size=10_000,
            content_bits=30.0 * BITS_PER_MB,
            skew=0.8,
            cached_count=1000,
        )
        return Scenario("pico", net, power, content, core_tiers=3)
    if name == "macro":
        # same coverage, user density, antenna total and sum backhaul capacity
        # as 37 pico cells per macro cell
        net = NetworkConfig(
            bs_count=37,
            antennas=148,
            cell_radius_m=250.0,
            bandwidth_hz=20e6,
            pathloss_exponent=3.67,
            noise_power_w=dbm_to_watts(-95.0),
            mean_users=30.0 * 37.0,
            interference_factor=1.0,
            transmit_power_w=dbm_to_watts(46.0),
            pathloss_ref_db=30.6,
        )
        power = PowerConfig(
            amplifier_factor=3.22,
            circuit_active_w=3.81e3,
            circuit_idle_w=2.01e3,
            cache_w_per_bit=CACHE_HARDWARE["ssd"],
            backhaul_j_per_bit=BACKHAUL_HARDWARE["microwave"][0],
            backhaul_capacity_bps=37.0 * BACKHAUL_HARDWARE["microwave"][1],
        )
        content = ContentConfig(
            catalog_size=100_000,
            content_bits=30.0 * BITS_PER_MB,
            skew=0.8,
            cached_count=1000,
        )
        return Scenario("macro", net, power, content, core_tiers=3)
    raise ValueError(f"unknown preset {name!r} (choose from: pico, macro)")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: np.ndarray


class ConfigError(ValueError):
    """Raised for malformed or unknown config content; message carries file:line."""


# section -> key -> converter; None marks keys handled specially
_SCHEMA = {
    "network": {
        "preset": str,
        "bs_count": int,
        "antennas": int,
        "cell_radius_m": float,
        "bandwidth_mhz": float,
        "pathloss_exponent": float,
        "pathloss_ref_db": float,
        "noise_dbm": float,
        "mean_users": float,
        "interference_factor": float,
        "transmit_power_dbm": float,
    },
    "content": {
        "catalog_size": int,
        "content_size_mb": float,
        "skew": float,
        "cached_count": int,
        "cache_fraction": float,
    },
    "power": {
        "cache": str,
        "backhaul": str,
        "amplifier_factor": float,
        "circuit_active_w": float,
        "circuit_idle_w": float,
        "cache_w_per_bit": float,
        "backhaul_j_per_bit": float,
        "backhaul_capacity_mbps": float,
    },
    "sim": {
        "drops": int,
        "seed": int,
        "workers": int,
        "shadowing_db": float,
        "association": str,
    },
    "sweep": {
        "variable": str,
        "grid": str,
        "values": str,
    },
}

#: sweep variables the CLI knows how to apply to a scenario
SWEEP_VARIABLES = (
    "cache_fraction",
    "cached_count",
    "catalog_size",
    "transmit_power_dbm",
    "interference_factor",
    "backhaul_capacity_mbps",
    "skew",
    "mean_users",
)


def apply_sweep_value(scenario: Scenario, variable: str, value: float) -> Scenario:
    """Return the scenario with one swept parameter replaced by ``value``."""
    net, power, content = scenario.net, scenario.power, scenario.content
    if variable == "cache_fraction":
        return scenario.replace(content=content.with_cache_fraction(float(value)))
    if variable == "cached_count":
        return scenario.replace(content=content.with_cached_count(int(round(value))))
    if variable == "catalog_size":
        n_f = int(round(value))
        return scenario.replace(
            content=replace(content, catalog_size=n_f, cached_count=min(content.cached_count, n_f))
        )
    if variable == "transmit_power_dbm":
        return scenario.replace(net=net.replace(transmit_power_w=dbm_to_watts(value)))
    if variable == "interference_factor":
        return scenario.replace(net=net.replace(interference_factor=float(value)))
    if variable == "backhaul_capacity_mbps":
        return scenario.replace(power=power.replace(backhaul_capacity_bps=value * 1e6))
    if variable == "skew":
        return scenario.replace(content=replace(content, skew=float(value)))
    if variable == "mean_users":
        return scenario.replace(net=net.replace(mean_users=float(value)))
    raise ValueError(
        f"unknown sweep variable {variable!r} (choose from: {', '.join(SWEEP_VARIABLES)})"
    )


@dataclass(frozen=True)
class RunSpec:
    """Everything a CLI run needs: the scenario, sim options and optional sweep."""

    scenario: Scenario
    sim: SimOptions
    sweep: SweepSpec | None


def parse_config(text: str, source: str = "<config>") -> RunSpec:
    """Parse the INI dialect described in the module docstring."""
    entries: dict[str, dict[str, tuple[int, str]]] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SCHEMA:
                raise ConfigError(
                    f"{source}:{lineno}: unknown section [{section}] "
                    f"(choose from: {', '.join(_SCHEMA)})"
                )
            entries.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        if section is None:
            raise ConfigError(f"{source}:{lineno}: key outside of any [section]")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        if key not in _SCHEMA[section]:
            raise ConfigError(
                f"{source}:{lineno}: unknown key {key!r} in [{section}] "
                f"(choose from: {', '.join(_SCHEMA[section])})"
            )
        if key in entries[section]:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} in [{section}]")
        entries[section][key] = (lineno, value.strip())

    def take(section: str, key: str):
        pair = entries.get(section, {}).pop(key, None)
        if pair is None:
            return None
        lineno, raw = pair
        conv = _SCHEMA[section][key]
        try:
            return conv(raw)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None

    try:
        scenario = preset(take("network", "preset") or "pico")
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    net, power, content = scenario.net, scenario.power, scenario.content

    bs_count = take("network", "bs_count")
    core_tiers = scenario.core_tiers
    if bs_count is not None:
        try:
            core_tiers = tiers_for_bs_count(bs_count)
        except ValueError as exc:
            raise ConfigError(f"{source}: {exc}") from None
        net = net.replace(bs_count=bs_count)
    net_updates = {}
    for key, field, conv in [
        ("antennas", "antennas", int),
        ("cell_radius_m", "cell_radius_m", float),
        ("pathloss_exponent", "pathloss_exponent", float),
        ("pathloss_ref_db", "pathloss_ref_db", float),
        ("mean_users", "mean_users", float),
        ("interference_factor", "interference_factor", float),
    ]:
        val = take("network", key)
        if val is not None:
            net_updates[field] = conv(val)
    if (val := take("network", "bandwidth_mhz")) is not None:
        net_updates["bandwidth_hz"] = val * 1e6
    if (val := take("network", "noise_dbm")) is not None:
        net_updates["noise_power_w"] = dbm_to_watts(val)
    if (val := take("network", "transmit_power_dbm")) is not None:
        net_updates["transmit_power_w"] = dbm_to_watts(val)
    if net_updates:
        net = net.replace(**net_updates)

    content_updates = {}
    if (val := take("content", "catalog_size")) is not None:
        content_updates["catalog_size"] = val
    if (val := take("content", "content_size_mb")) is not None:
        content_updates["content_bits"] = val * BITS_PER_MB
    if (val := take("content", "skew")) is not None:
        content_updates["skew"] = val
    cached_count = take("content", "cached_count")
    cache_fraction = take("content", "cache_fraction")
    if cached_count is not None and cache_fraction is not None:
        raise ConfigError(
            f"{source}: give either cached_count or cache_fraction in [content], not both"
        )
    if content_updates or cached_count is not None:
        base_cached = cached_count if cached_count is not None else content.cached_count
        n_f = content_updates.get("catalog_size", content.catalog_size)
        content = replace(
            content, cached_count=min(base_cached, n_f), **content_updates
        )
    if cache_fraction is not None:
        content = content.with_cache_fraction(cache_fraction)

    power_updates = {}
    if (val := take("power", "cache")) is not None:
        if val.lower() not in CACHE_HARDWARE:
            raise ConfigError(
                f"{source}: unknown cache hardware {val!r} "
                f"(choose from: {', '.join(CACHE_HARDWARE)})"
            )
        power_updates["cache_w_per_bit"] = CACHE_HARDWARE[val.lower()]
    if (val := take("power", "backhaul")) is not None:
        if val.lower() not in BACKHAUL_HARDWARE:
            raise ConfigError(
                f"{source}: unknown backhaul hardware {val!r} "
                f"(choose from: {', '.join(BACKHAUL_HARDWARE)})"
            )
        j_per_bit, capacity = BACKHAUL_HARDWARE[val.lower()]
        power_updates["backhaul_j_per_bit"] = j_per_bit
        power_updates["backhaul_capacity_bps"] = capacity
    for key, field in [
        ("amplifier_factor", "amplifier_factor"),
        ("circuit_active_w", "circuit_active_w"),
        ("circuit_idle_w", "circuit_idle_w"),
        ("cache_w_per_bit", "cache_w_per_bit"),
        ("backhaul_j_per_bit", "backhaul_j_per_bit"),
    ]:
        if (val := take("power", key)) is not None:
            power_updates[field] = val
    if (val := take("power", "backhaul_capacity_mbps")) is not None:
        power_updates["backhaul_capacity_bps"] = val * 1e6
    if power_updates:
        power = power.replace(**power_updates)

    sim_kw = {}
    for key in ("drops", "seed", "workers", "shadowing_db", "association"):
        if (val := take("sim", key)) is not None:
            sim_kw[key] = val
    if sim_kw.get("association") not in (None, "nearest", "distributed"):
        raise ConfigError(
            f"{source}: association must be 'nearest' or 'distributed', "
            f"got {sim_kw['association']!r}"
        )
    sim = SimOptions(**sim_kw)

    sweep = None
    if "sweep" in entries or any(
        k in entries.get("sweep", {}) for k in ("variable", "grid", "values")
    ):
        variable = take("sweep", "variable")
        grid = take("sweep", "grid")
        values_raw = entries.get("sweep", {}).get("values")
        take("sweep", "values")
        if variable is not None or grid is not None or values_raw is not None:
            if variable is None:
                raise ConfigError(f"{source}: [sweep] needs a 'variable' key")
            if variable not in SWEEP_VARIABLES:
                raise ConfigError(
                    f"{source}: unknown sweep variable {variable!r} "
                    f"(choose from: {', '.join(SWEEP_VARIABLES)})"
                )
            if (grid is None) == (values_raw is None):
                raise ConfigError(
                    f"{source}: [sweep] needs exactly one of 'grid' or 'values'"
                )
            if grid is not None:
                values = _parse_grid(grid, source)
            else:
                lineno, raw = values_raw
                try:
                    values = np.array([float(v) for v in raw.split(",")])
                except ValueError:
                    raise ConfigError(
                        f"{source}:{lineno}: values must be a comma-separated list of numbers"
                    ) from None
                if len(values) < 2 or not np.all(np.diff(values) > 0):
                    raise ConfigError(
                        f"{source}:{lineno}: sweep values must be strictly increasing "
                        "with at least two entries"
                    )
            sweep = SweepSpec(variable=variable, values=values)

    leftovers = {s: d for s, d in entries.items() if d}
    assert not leftovers, f"config keys not consumed: {leftovers}"

    scenario = Scenario(
        scenario.name, net, power, content, core_tiers, scenario.guard_tiers
    )
    return RunSpec(scenario=scenario, sim=sim, sweep=sweep)


def load_config(path: str) -> RunSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), source=path)


def _parse_grid(spec: str, source: str) -> np.ndarray:
    """``start:stop:count[:lin|log]`` -> strictly increasing grid."""
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(f"{source}: grid must be 'start:stop:count[:lin|log]', got {spec!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"{source}: bad grid numbers in {spec!r}") from None
    scale = parts[3] if len(parts) == 4 else "lin"
    if count < 2:
        raise ConfigError(f"{source}: grid needs at least 2 points, got {count}")
    if not start < stop:
        raise ConfigError(f"{source}: grid start must be below stop ({spec!r})")
    if scale == "lin":
        return np.linspace(start, stop, count)
    if scale == "log":
        if start <= 0:
            raise ConfigError(f"{source}: log grid needs a positive start ({spec!r})")
        return np.geomspace(start, stop, count)
    raise ConfigError(f"{source}: grid scale must be 'lin' or 'log', got {scale!r}")


def write_sweep_csv(
    path: str,
    columns: list[tuple[str, np.ndarray]],
    *,
    scenario: Scenario,
    seed: int | None = None,
    descriptor: str = "",
) -> None:
    """Write sweep results: comment header with provenance, then plain CSV.

    Values are rendered with 9 significant digits so reruns diff cleanly.
    """
    names = [name for name, _ in columns]
    arrays = [np.asarray(vals) for _, vals in columns]
    if any(len(a) != len(arrays[0]) for a in arrays):
        raise ValueError("all columns must have the same length")
    lines = []
    if descriptor:
        lines.append(f"# sweep: {descriptor}")
    lines.append(f"# scenario: {scenario.name} {scenario.scenario_hash()}")
    if seed is not None:
        lines.append(f"# seed: {seed}")
    lines.append(",".join(names))
    for row in zip(*arrays):
        lines.append(",".join(f"{v:.9g}" for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
