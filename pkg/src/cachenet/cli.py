"""Command-line interface.

Subcommands:
  analyze    print the analytic rates, power breakdown and EE for a scenario
  optimize   evaluate the caching benefit condition and the closed-form optima
  simulate   run the Monte-Carlo simulator and compare against the model
  sweep      evaluate the model (optionally plus simulation) over a parameter
             grid and write a CSV
  validate   pass/fail check of the simulator against the analytic model
  hardware   caching benefit condition across cache/backhaul hardware combos

Exit codes: 0 success, 1 validation failure, 2 usage or config errors.
"""

import argparse
import sys
from dataclasses import dataclass, replace

from . import _kernels, model, optimize, popularity
from .geometry import active_probability, scheduled_count_pmf
from .simulate import simulate as run_simulation
from .popularity import BITS_PER_MB, ContentConfig
from .scenarios import (
    BACKHAUL_HARDWARE,
    CACHE_HARDWARE,
    ConfigError,
    RunSpec,
    Scenario,
    SimOptions,
    apply_sweep_value,
    load_config,
    preset,
    watts_to_dbm,
    write_sweep_csv,
)

_MBIT = 1e6


@dataclass(frozen=True)
class HardwareRow:
    """One line of the cache/backhaul hardware comparison."""

    cache: str
    backhaul: str
    catalog_size: int
    content_mb: float
    lhs_w: float
    rhs_w: float
    caching_helps: bool


#: (cache hw, backhaul hw, catalog size, content size in MB)
HARDWARE_CASES = [
    ("ssd", "microwave", 100_000, 10.0),
    ("ssd", "fiber", 100_000, 10.0),
    ("ssd", "fiber", 1_000, 1000.0),
    ("dram", "microwave", 100_000, 10.0),
    ("dram", "fiber", 100_000, 10.0),
    ("dram", "microwave", 1_000, 1000.0),
]


def hardware_comparison(net, power_base, phi, cases=HARDWARE_CASES):
    """Evaluate the caching benefit condition for each hardware combination.

    Each case carries its own catalog size and content size; the cache and
    backhaul technologies set the energy coefficients and the backhaul
    capacity.  Uniform request popularity (skew 1 closed form) is used.
    """
    rows = []
    for cache_hw, backhaul_hw, catalog, content_mb in cases:
        j_per_bit, capacity = BACKHAUL_HARDWARE[backhaul_hw]
        pw = power_base.replace(
            cache_w_per_bit=CACHE_HARDWARE[cache_hw],
            backhaul_j_per_bit=j_per_bit,
            backhaul_capacity_bps=capacity,
        )
        content = ContentConfig(
            catalog_size=catalog,
            content_bits=content_mb * BITS_PER_MB,
            skew=1.0,
            cached_count=1,
        )
        cond = optimize.caching_benefit_condition(net, pw, content, phi)
        rows.append(
            HardwareRow(
                cache=cache_hw,
                backhaul=backhaul_hw,
                catalog_size=catalog,
                content_mb=content_mb,
                lhs_w=cond.lhs,
                rhs_w=cond.rhs,
                caching_helps=cond.holds,
            )
        )
    return rows


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="config file (INI dialect, see README)")
    p.add_argument("--preset", choices=("pico", "macro"), help="built-in scenario")
    p.add_argument("--phi", type=float, help="interference offset; skips estimation")
    p.add_argument(
        "--phi-samples",
        type=int,
        default=200_000,
        help="Monte-Carlo samples for the interference offset (min 100000)",
    )
    p.add_argument("--seed", type=int, help="simulation seed")
    p.add_argument("--drops", type=int, help="simulation drops")
    p.add_argument("--workers", type=int, help="simulation worker threads")


def _load(args) -> RunSpec:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        spec = load_config(args.config)
    else:
        spec = RunSpec(preset(args.preset or "pico"), SimOptions(), None)
    sim = spec.sim
    if args.seed is not None:
        sim = replace(sim, seed=args.seed)
    if args.drops is not None:
        sim = replace(sim, drops=args.drops)
    if args.workers is not None:
        sim = replace(sim, workers=args.workers)
    return RunSpec(spec.scenario, sim, spec.sweep)


def _phi(args, scenario: Scenario) -> float:
    if args.phi is not None:
        return args.phi
    net = scenario.net
    pmf = scheduled_count_pmf(net.mean_users, net.bs_count, net.antennas)
    est = model.estimate_phi(
        net.pathloss_exponent,
        scenario.layout(),
        samples=args.phi_samples,
        stream_pmf=pmf,
    )
    return est.phi


def cmd_analyze(args) -> int:
    spec = _load(args)
    sc = spec.scenario
    net, pw, content = sc.net, sc.power, sc.content
    phi = _phi(args, sc)
    report = model.network_ee(net, pw, content, phi)
    single = model.single_user_ee(net, pw, content, phi)
    p_hit = popularity.hit_ratio(content)
    print(f"scenario: {sc.name} {sc.scenario_hash()}")
    print(f"backend: {_kernels.BACKEND}")
    print(f"interference offset phi: {phi:.4f}")
    print(f"cells: {net.bs_count}  antennas: {net.antennas}  "
          f"cell radius: {net.cell_radius_m:.1f} m")
    print(f"transmit power: {watts_to_dbm(net.transmit_power_w):.1f} dBm  "
          f"load per cell: {net.load:.3f}  active probability: {active_probability(net.mean_users, net.bs_count):.4f}")
    print(f"cache: {content.cached_count}/{content.catalog_size} contents "
          f"({content.cache_fraction:.3%}), hit ratio: {p_hit:.4f}")
    r = report.rate
    print(f"single-stream edge rate: {r.edge_rate / _MBIT:.2f} Mbit/s")
    print(f"single-stream rate, cache hit: {r.cache_hit_rate / _MBIT:.2f} Mbit/s")
    print(f"single-stream rate, cache miss: {r.cache_miss_rate / _MBIT:.2f} Mbit/s")
    print(f"cell throughput: {report.throughput_bps / _MBIT:.2f} Mbit/s")
    p = report.power
    print(f"power per cell: transmit+circuit {p.tx_circuit_w:.3f} W, "
          f"caching {p.caching_w:.3f} W, backhaul {p.backhaul_w:.3f} W, "
          f"total {p.total_w:.3f} W")
    print(f"energy efficiency: {report.ee_bits_per_joule / _MBIT:.3f} Mbit/J "
          f"(one user per cell: {single.ee_bits_per_joule / _MBIT:.3f} Mbit/J)")
    return 0


def cmd_optimize(args) -> int:
    spec = _load(args)
    sc = spec.scenario
    net, pw, content = sc.net, sc.power, sc.content
    phi = _phi(args, sc)
    print(f"scenario: {sc.name} {sc.scenario_hash()}")
    print(f"interference offset phi: {phi:.4f}")

    if content.skew != 1.0:
        print(f"closed forms need skew = 1; this scenario has skew = {content.skew}.")
        print("re-run with '[content] skew = 1' (other parameters unchanged).")
        return 0

    cond = optimize.caching_benefit_condition(net, pw, content, phi)
    verdict = "holds" if cond.holds else "does NOT hold"
    print(f"caching benefit condition: lhs {cond.lhs:.4g} W < rhs {cond.rhs:.4g} W "
          f"-> {verdict}")

    opt = optimize.optimal_eta(net, pw, content, phi)
    print(f"optimal cache fraction: {opt.eta_star:.6g} "
          f"(unclamped {opt.eta_unclamped:.6g}, "
          f"{opt.eta_star * content.catalog_size:.0f} contents)")
    ee_at_opt = optimize.ee_of_eta(opt.eta_star, net, pw, content, phi)
    print(f"EE at the optimum: {ee_at_opt / _MBIT:.4f} Mbit/J")

    inf_opt = optimize.optimal_eta_infinite_backhaul(net, pw, content, phi)
    print(f"optimal cache fraction, unlimited backhaul: {inf_opt.eta_star:.6g}")
    n_th = optimize.tradeoff_threshold(net, pw, content, phi)
    print(f"catalog size where a full cache stops paying off: {n_th:.0f}")
    if content.catalog_size > 1 and pw.backhaul_capacity_bps == float("inf"):
        gain = optimize.max_ee_gain(net, pw, content, phi)
        print(f"maximum EE gain over no caching: {gain:.3f}x")

    if net.interference_factor == 0.0:
        p_opt = optimize.optimal_power_noise_limited(net, pw, content)
        qualifier = (
            "" if pw.backhaul_capacity_bps == float("inf")
            else " (uncapped-backhaul form; a binding backhaul cap shifts it)"
        )
        print(f"optimal transmit power{qualifier}: {p_opt:.4g} W "
              f"({watts_to_dbm(p_opt):.2f} dBm)")
        if pw.backhaul_capacity_bps == float("inf"):
            joint = optimize.joint_optimum(net, pw, content)
            tag = "" if joint.converged else "  [grid fallback]"
            print(f"joint optimum: power {joint.power_w:.4g} W, "
                  f"cache fraction {joint.eta:.6g}{tag}")
    else:
        print("transmit power optimization needs interference_factor = 0; skipped.")
    return 0


def _analytic_summary(net, pw, content, phi):
    tput = model.cell_throughput(net, pw, content, phi)
    power = model.avg_total_power(net, pw, content, phi)
    return tput, power.total_w, tput / power.total_w


def cmd_simulate(args) -> int:
    spec = _load(args)
    sc, sim_opts = spec.scenario, spec.sim
    net, pw, content = sc.net, sc.power, sc.content
    phi = _phi(args, sc)
    summary = run_simulation(
        net, pw, content, sc.layout(),
        drops=sim_opts.drops, seed=sim_opts.seed,
        shadowing_db=sim_opts.shadowing_db, association=sim_opts.association,
        workers=sim_opts.workers,
    )
    tput, power_w, ee = _analytic_summary(net, pw, content, phi)
    print(f"scenario: {sc.name} {sc.scenario_hash()}")
    print(f"backend: {_kernels.BACKEND}")
    print(f"drops: {summary.drops}  seed: {summary.seed}")
    print(f"cell throughput: {summary.cell_throughput_mean / _MBIT:.3f} "
          f"+/- {summary.cell_throughput_stderr / _MBIT:.3f} Mbit/s "
          f"(model {tput / _MBIT:.3f}, "
          f"gap {summary.cell_throughput_mean / tput - 1:+.2%})")
    print(f"backhaul rate: {summary.backhaul_rate_mean / _MBIT:.3f} "
          f"+/- {summary.backhaul_rate_stderr / _MBIT:.3f} Mbit/s")
    print(f"power per cell: {summary.power_mean:.3f} +/- {summary.power_stderr:.3f} W "
          f"(model {power_w:.3f}, gap {summary.power_mean / power_w - 1:+.2%})")
    print(f"active fraction: {summary.active_fraction:.4f} "
          f"(model {active_probability(net.mean_users, net.bs_count):.4f})")
    print(f"energy efficiency: {summary.ee / _MBIT:.4f} Mbit/J "
          f"(model {ee / _MBIT:.4f}, gap {summary.ee / ee - 1:+.2%})")
    if args.out:
        write_sweep_csv(
            args.out,
            [
                ("cell_throughput_bps", [summary.cell_throughput_mean]),
                ("backhaul_rate_bps", [summary.backhaul_rate_mean]),
                ("power_w", [summary.power_mean]),
                ("active_fraction", [summary.active_fraction]),
                ("ee_bits_per_joule", [summary.ee]),
            ],
            scenario=sc,
            seed=summary.seed,
            descriptor=f"simulate drops={summary.drops}",
        )
        print(f"wrote {args.out}")
    return 0


def cmd_validate(args) -> int:
    spec = _load(args)
    sc, sim_opts = spec.scenario, spec.sim
    net, pw, content = sc.net, sc.power, sc.content
    phi = _phi(args, sc)
    summary = run_simulation(
        net, pw, content, sc.layout(),
        drops=sim_opts.drops, seed=sim_opts.seed,
        shadowing_db=sim_opts.shadowing_db, association=sim_opts.association,
        workers=sim_opts.workers,
    )
    tput, power_w, _ = _analytic_summary(net, pw, content, phi)
    gaps = {
        "cell throughput": summary.cell_throughput_mean / tput - 1,
        "power": summary.power_mean / power_w - 1,
    }
    ok = True
    for name, gap in gaps.items():
        line_ok = abs(gap) <= args.tolerance
        ok = ok and line_ok
        print(f"{'PASS' if line_ok else 'FAIL'}  {name}: simulation vs model "
              f"{gap:+.2%} (tolerance {args.tolerance:.0%})")
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    spec = _load(args)
    if args.variable or args.grid:
        if not (args.variable and args.grid):
            raise ConfigError("--variable and --grid must be given together")
        from .scenarios import SweepSpec, _parse_grid

        spec = RunSpec(
            spec.scenario, spec.sim,
            SweepSpec(args.variable, _parse_grid(args.grid, "--grid")),
        )
    if spec.sweep is None:
        raise ConfigError("no sweep requested: add a [sweep] section or --variable/--grid")
    if not args.out:
        raise ConfigError("sweep needs --out FILE")
    sc, sim_opts, sweep = spec.scenario, spec.sim, spec.sweep

    values = sweep.values
    tputs, powers, ees = [], [], []
    sim_tputs, sim_powers, sim_ees = [], [], []
    for value in values:
        sc_i = apply_sweep_value(sc, sweep.variable, float(value))
        phi = _phi(args, sc_i)
        tput, power_w, ee = _analytic_summary(sc_i.net, sc_i.power, sc_i.content, phi)
        tputs.append(tput)
        powers.append(power_w)
        ees.append(ee)
        if args.with_sim:
            summary = run_simulation(
                sc_i.net, sc_i.power, sc_i.content, sc_i.layout(),
                drops=sim_opts.drops, seed=sim_opts.seed,
                shadowing_db=sim_opts.shadowing_db,
                association=sim_opts.association, workers=sim_opts.workers,
            )
            sim_tputs.append(summary.cell_throughput_mean)
            sim_powers.append(summary.power_mean)
            sim_ees.append(summary.ee)

    columns = [
        (sweep.variable, values),
        ("cell_throughput_bps", tputs),
        ("power_w", powers),
        ("ee_bits_per_joule", ees),
    ]
    if args.with_sim:
        columns += [
            ("sim_cell_throughput_bps", sim_tputs),
            ("sim_power_w", sim_powers),
            ("sim_ee_bits_per_joule", sim_ees),
        ]
    write_sweep_csv(
        args.out, columns, scenario=sc,
        seed=sim_opts.seed if args.with_sim else None,
        descriptor=f"{sweep.variable}, {len(values)} points",
    )
    print(f"wrote {args.out} ({len(values)} rows)")
    return 0


def cmd_hardware(args) -> int:
    spec = _load(args)
    sc = spec.scenario
    phi = _phi(args, sc)
    rows = hardware_comparison(sc.net, sc.power, phi)
    print(f"scenario: {sc.name}  phi: {phi:.4f}")
    header = f"{'cache':<6}{'backhaul':<11}{'catalog':>9}{'size MB':>9}" \
             f"{'lhs W':>12}{'rhs W':>12}  caching helps"
    print(header)
    for row in rows:
        print(f"{row.cache:<6}{row.backhaul:<11}{row.catalog_size:>9}"
              f"{row.content_mb:>9.0f}{row.lhs_w:>12.4g}{row.rhs_w:>12.4g}  "
              f"{'yes' if row.caching_helps else 'no'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cachenet",
        description="energy efficiency of a cache-enabled multi-antenna downlink",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analytic rates, power and EE")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("optimize", help="benefit condition and closed-form optima")
    _add_common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="Monte-Carlo run vs the analytic model")
    _add_common(p)
    p.add_argument("--out", help="write the summary as CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="pass/fail simulator check (exit 1 on failure)")
    _add_common(p)
    p.add_argument("--tolerance", type=float, default=0.2,
                   help="allowed relative gap (default 0.2; the closed forms "
                        "deliberately lower-bound the full-interference simulation)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="model over a parameter grid, CSV out")
    _add_common(p)
    p.add_argument("--out", help="output CSV path (required)")
    p.add_argument("--variable", help="sweep variable (alternative to [sweep] config)")
    p.add_argument("--grid", help="start:stop:count[:lin|log]")
    p.add_argument("--with-sim", action="store_true",
                   help="also simulate at every grid point")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("hardware", help="benefit condition across hardware combos")
    _add_common(p)
    p.set_defaults(func=cmd_hardware)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
