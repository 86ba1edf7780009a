"""Command-line interface: design reports, simulation runs, waveform analysis.

Exit codes: 0 success, 2 configuration error, 3 solver error, 4 analysis
error. ``MMI_THREADS`` caps the parallelism of ``simulate --all-scenarios``.
"""

import argparse
import configparser
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import analysis, solver, switching, topology
from .config import LimiterConfig, LoadModel, SystemConfig
from .errors import AnalysisError, ConfigError, ScmmiError
from .scenarios import PRESET_NAMES, get_preset
from .waveform import read_csv, write_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_ANALYSIS = 4


# ---------------------------------------------------------------- design

def _format_states_table(n_levels):
    rows = switching.enumerate_legal_states(n_levels)
    n_sw = len(rows[0][1])
    head = [f"S_{k}" for k in range(1, n_sw + 1)] + ["level"]
    lines = ["  ".join(f"{h:>4}" for h in head)]
    for cmd, vec in rows:
        cells = ["  ON" if s else " OFF" for s in vec]
        label = f"{cmd.level:+d}" if cmd.level else " 0"
        lines.append("  ".join(cells) + f"  {label:>5}")
    return "\n".join(lines)


def cmd_design(args):
    spec = topology.component_counts(args.levels)
    ratings = topology.device_ratings(args.levels, args.phases, args.vdc)
    levels = topology.voltage_levels(args.levels, args.phases, args.vdc)
    boost = topology.is_boosting(args.levels, args.phases)
    print(f"{args.levels}-level sub-module, {args.phases} phase(s), "
          f"V_DC = {args.vdc:g} V")
    print(f"  {spec.n_switches} switches, {spec.n_capacitors} capacitors "
          f"per sub-module")
    print(f"  diode census: {spec.n_no_diode} without, {spec.n_with_diode} "
          f"with, {spec.n_any_diode} either")
    print(f"  capacitor / inner switch rating: "
          f"{ratings.capacitor_rating:g} V")
    print(f"  outer switch rating: {ratings.outer_switch_rating:g} V")
    print("  phase voltage levels: "
          + ", ".join(f"{v:g}" for v in levels) + " V")
    print(f"  boosting (peak exceeds V_DC): {'yes' if boost else 'no'}")
    if args.states:
        print("\nSwitching states:")
        print(_format_states_table(args.levels))
    return EXIT_OK


# -------------------------------------------------------------- simulate

_BOOL = {"true": True, "yes": True, "1": True, "on": True,
         "false": False, "no": False, "0": False, "off": False}


def _get(section, key, cast, default):
    if section is None or key not in section:
        return default
    raw = section[key].strip()
    try:
        if cast is bool:
            return _BOOL[raw.lower()]
        return cast(raw)
    except (ValueError, KeyError):
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from None


def _floats(raw):
    vals = [float(p) for p in raw.replace(";", ",").split(",") if p.strip()]
    return vals[0] if len(vals) == 1 else tuple(vals)


def load_config_file(path) -> tuple[SystemConfig, float]:
    """Parse the sectioned key = value config format into a SystemConfig."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    def sec(name):
        return parser[name] if parser.has_section(name) else None

    system, sub = sec("system"), sec("submodule")
    load_s, mod, ctrl, sim = sec("load"), sec("modulation"), sec("control"), sec("simulation")

    load = LoadModel(
        variant=_get(load_s, "variant", str, "coupled_rl"),
        r_phase=_get(load_s, "r_phase", _floats, 460.0),
        l_self=_get(load_s, "l_self", float, 0.3),
        coupling_k=_get(load_s, "coupling_k", float, 0.95),
    )
    limiter = LimiterConfig(
        deadband=_get(ctrl, "deadband", float, 2.5),
        gain=_get(ctrl, "gain", float, 1.0),
        floor=_get(ctrl, "floor", float, 0.8),
        ceiling=_get(ctrl, "ceiling", float, 1.2),
    )
    initial = _get(sim, "initial_cap_voltages", str, None)
    if initial is not None:
        initial = [[float(x) for x in row.split(",") if x.strip()]
                   for row in initial.split(";")]
    cfg = SystemConfig(
        phases=_get(system, "phases", int, 3),
        levels=_get(system, "levels", int, 5),
        v_dc=_get(system, "v_dc", float, 600.0),
        source_r=_get(system, "source_r", float, 10e-3),
        fundamental_f=_get(system, "fundamental_f", float, 50.0),
        capacitance=_get(sub, "capacitance", float, 220e-6),
        cap_esr=_get(sub, "cap_esr", float, 10e-3),
        r_on=_get(sub, "r_on", float, 10e-3),
        g_off=_get(sub, "g_off", float, 1e-9),
        carrier_f=_get(mod, "carrier_f", float, 10e3),
        modulation_index=_get(mod, "modulation_index", float, 1.0),
        modulation_mode=_get(mod, "mode", str, "pwm"),
        balance_in_zero=_get(mod, "balance_in_zero", bool, False),
        mi_limiter_enabled=_get(ctrl, "mi_limiter", bool, False),
        limiter=limiter,
        dt=_get(sim, "dt", float, 1e-6),
        record_every=_get(sim, "record_every", int, 1),
        initial_cap_voltages=initial,
        load=load,
    )
    duration = _get(sim, "duration", float, 0.2)
    return cfg, duration


def _simulate_one(name, cfg, duration, out_path):
    rec = solver.run(cfg, duration)
    write_csv(rec, out_path)
    meta = rec.metadata
    print(f"{name}: {duration:g} s simulated, {meta['steps']} steps, "
          f"{meta['rebuilds']} snapshot rebuilds, "
          f"energy residual {meta['energy_residual']:.3%}")
    print(f"  wrote {out_path}")


def cmd_simulate(args):
    if args.all_scenarios:
        workers = int(os.environ.get("MMI_THREADS", "0")) or len(PRESET_NAMES)
        jobs = []
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for name in PRESET_NAMES:
                preset = get_preset(name)
                dur = args.duration or preset.duration
                out = args.out or f"{name}.csv"
                if args.out:
                    base, ext = os.path.splitext(args.out)
                    out = f"{base}-{name}{ext or '.csv'}"
                jobs.append(pool.submit(_simulate_one, name, preset.config,
                                        dur, out))
        for j in jobs:
            j.result()
        return EXIT_OK

    if args.scenario:
        preset = get_preset(args.scenario)
        cfg, duration = preset.config, preset.duration
        name = preset.name
    elif args.config:
        cfg, duration = load_config_file(args.config)
        name = os.path.basename(args.config)
    else:
        raise ConfigError("give --scenario NAME or --config FILE")
    if args.duration:
        duration = args.duration
    out = args.out or f"{name.removesuffix('.cfg')}.csv"
    _simulate_one(name, cfg, duration, out)
    return EXIT_OK


# --------------------------------------------------------------- analyze

def _analyze_record(rec, f, max_order=13):
    """Metrics report over the record tail (one fundamental period window)."""
    lines = []
    period = 1.0 / f
    window = min(4 * period, rec.n_samples * rec.sample_period / 2)
    cap_names = sorted(n for n in rec.channels if n.startswith("V_C"))
    phase_names = sorted(n for n in rec.channels
                         if n.startswith("V_") and not n.startswith("V_C"))
    lines.append("channel metrics (window: last "
                 f"{window * 1e3:g} ms)")
    for name in cap_names + phase_names:
        x = rec.channel(name)
        pp, pct = analysis.ripple_pp(rec, name, window)
        k = int(round(window / rec.sample_period))
        mean = float(x[-k:].mean())
        levels = analysis.distinct_levels(rec, name, tol=10.0)
        lvl_txt = ", ".join(f"{v:.1f}" for v in levels)
        lines.append(f"  {name}: mean {mean:.2f} V, ripple {pp:.2f} V "
                     f"({pct:.2f} % of mean); levels [{lvl_txt}] V")
    total_cycles = int(rec.n_samples * rec.sample_period * f)
    cycles = min(4, max(1, total_cycles))
    for name in phase_names:
        try:
            spec = analysis.fourier_coefficients(rec, name, f, cycles)
            rms = analysis.fundamental_rms(spec)
            dist = analysis.thd(spec, max_order)
            trip = analysis.triplen_content(spec, max_order)
            lines.append(f"  {name}: fundamental {rms:.2f} V rms, "
                         f"THD(<= {max_order}) {dist:.4f}, "
                         f"triplen ratio {trip:.4f}")
        except AnalysisError as exc:
            lines.append(f"  {name}: spectrum unavailable ({exc})")
    nominal = None
    if cap_names:
        means = [float(rec.channel(c)[-int(round(window / rec.sample_period)):]
                       .mean()) for c in cap_names]
        nominal = sum(means) / len(means)
        worst = None
        for c in cap_names:
            try:
                t_s = analysis.settling_time(rec, c, nominal, 2.0)
                worst = t_s if worst is None else max(worst, t_s)
            except AnalysisError:
                worst = None
                break
        if worst is not None:
            lines.append(f"  settling into +-2 % of {nominal:.1f} V: "
                         f"{worst * 1e3:.1f} ms (worst capacitor)")
    if "energy_residual" in rec.metadata:
        lines.append(f"  energy-balance residual: "
                     f"{rec.metadata['energy_residual']:.3%}")
    return "\n".join(lines)


def _emit_plots(rec, f, out_dir):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    t = rec.time() * 1e3
    groups = {
        "phase_voltages": [n for n in rec.channels
                           if n.startswith("V_") and not n.startswith("V_C")],
        "cap_voltages": [n for n in rec.channels if n.startswith("V_C")],
        "cap_currents": [n for n in rec.channels if n.startswith("I_C")],
    }
    for gname, names in groups.items():
        if not names:
            continue
        fig, ax = plt.subplots(figsize=(9, 4))
        for n in sorted(names):
            ax.plot(t, rec.channel(n), lw=0.7, label=n)
        ax.set_xlabel("time [ms]")
        ax.set_ylabel("A" if gname.endswith("currents") else "V")
        ax.legend(loc="upper right", fontsize=7)
        ax.set_title(gname.replace("_", " "))
        fig.tight_layout()
        path = os.path.join(out_dir, f"{gname}.svg")
        fig.savefig(path)
        plt.close(fig)
        print(f"  plot: {path}")
    # spectrum of the first phase voltage
    phases = sorted(n for n in rec.channels
                    if n.startswith("V_") and not n.startswith("V_C"))
    if phases:
        total_cycles = int(rec.n_samples * rec.sample_period * f)
        cycles = min(4, max(1, total_cycles))
        try:
            spec = analysis.fourier_coefficients(rec, phases[0], f, cycles)
        except AnalysisError:
            return
        orders = sorted(spec.entries)[:40]
        mags = [spec.entries[m][0] for m in orders]
        fig, ax = plt.subplots(figsize=(9, 4))
        ax.bar(orders, mags, width=0.6)
        ax.set_xlabel("harmonic order")
        ax.set_ylabel("magnitude [V]")
        ax.set_title(f"{phases[0]} spectrum")
        fig.tight_layout()
        path = os.path.join(out_dir, "spectrum.svg")
        fig.savefig(path)
        plt.close(fig)
        print(f"  plot: {path}")


def cmd_analyze(args):
    try:
        rec = read_csv(args.csv)
    except (OSError, ValueError) as exc:
        raise AnalysisError(str(exc)) from exc
    report = _analyze_record(rec, args.fundamental)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report + "\n")
        print(f"report written to {args.report}")
    else:
        print(report)
    if args.plot:
        _emit_plots(rec, args.fundamental, args.plot)
    return EXIT_OK


# ------------------------------------------------------------------ main

def build_parser():
    p = argparse.ArgumentParser(
        prog="mmi",
        description="Design and simulate switched-capacitor modular "
                    "multilevel inverters.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="closed-form design report")
    d.add_argument("--levels", type=int, required=True)
    d.add_argument("--phases", type=int, default=3)
    d.add_argument("--vdc", type=float, default=600.0)
    d.add_argument("--states", action="store_true",
                   help="print the switching-state table")
    d.set_defaults(func=cmd_design)

    s = sub.add_parser("simulate", help="run a transient simulation")
    s.add_argument("--scenario", choices=PRESET_NAMES)
    s.add_argument("--config", help="config file (sectioned key = value)")
    s.add_argument("--duration", type=float, help="override duration [s]")
    s.add_argument("--out", help="output CSV path")
    s.add_argument("--all-scenarios", action="store_true")
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("analyze", help="metrics report from a waveform CSV")
    a.add_argument("csv")
    a.add_argument("--fundamental", type=float, default=50.0)
    a.add_argument("--report", help="write the report to this path")
    a.add_argument("--plot", metavar="DIR", help="emit SVG plots into DIR")
    a.set_defaults(func=cmd_analyze)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except ScmmiError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
