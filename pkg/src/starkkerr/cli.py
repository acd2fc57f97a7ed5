"""Command-line entry point: ``starkkerr <subcommand> --config scenario.yaml --out DIR``.

Every run writes ``report.json`` (resolved config, seed, results),
``summary.txt`` and ``metadata.json`` (timestamps, kept apart so reruns
are byte-identical elsewhere), plus subcommand CSVs.  Failures write
``error.json`` listing whatever was written before the error.

Exit codes: 0 success, 2 config error, 3 numerical failure,
4 consistency check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
import warnings
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__, kerrdyn, lattice, pipeline, presets, swpt, synthlab, validation
from .config import Scenario, load_scenario
from .device import ConfigError, DeviceSpec
from .extract import (FitError, InconsistentSignsError, consistency_report, extract_couplings)
from .fockspace import DispersiveRegimeWarning, FockSpaceError, exact_coefficients
from .swpt import ResonanceError
from .synthlab import BistableDriveError, BracketError

log = logging.getLogger("starkkerr")

EXIT_OK, EXIT_UNEXPECTED, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CONSISTENCY = 0, 1, 2, 3, 4

NUMERIC_ERRORS = (FitError, FockSpaceError, ResonanceError, BracketError, BistableDriveError,
                  ArithmeticError, np.linalg.LinAlgError)


class ConsistencyError(RuntimeError):
    """A declared check (tolerance, spread bound, trend) did not hold."""

    def __init__(self, failed: list[str]):
        super().__init__("; ".join(failed))
        self.failed = failed


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (InconsistentSignsError, ConsistencyError)):
        return EXIT_CONSISTENCY
    if isinstance(exc, NUMERIC_ERRORS):
        return EXIT_NUMERIC
    if isinstance(exc, (KeyError, FileNotFoundError)):
        return EXIT_CONFIG
    if isinstance(exc, (ValueError, RuntimeError)):
        return EXIT_NUMERIC
    return EXIT_UNEXPECTED


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, tuples to lists, NaN/inf to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


class Artifacts:
    """Output directory bookkeeping; every write is recorded in ``written``."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.written: list[str] = []

    def path(self, name: str) -> Path:
        self.written.append(name)
        return self.root / name

    def json(self, name: str, obj) -> None:
        text = json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False)
        self.path(name).write_text(text + "\n")

    def csv(self, name: str, header: Sequence[str], rows) -> None:
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(x) for x in r])

    def text(self, name: str, body: str) -> None:
        self.path(name).write_text(body if body.endswith("\n") else body + "\n")


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if x is None:
        return ""
    return x


class Outcome:
    def __init__(self):
        self.results: dict[str, Any] = {}
        self.summary: list[str] = []
        self.checks: dict[str, bool] = {}

    def check(self, name: str, ok: bool) -> None:
        self.checks[name] = bool(ok)

    @property
    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]


def _error_mode(sc: Scenario, default: str) -> str:
    return sc.extraction["error_mode"] or default


# ---------------------------------------------------------------- subcommands

def cmd_paper_numbers(sc: Scenario, art: Artifacts, out: Outcome) -> None:
    from .config import slope_set_from_preset
    sets = sc.slopes or [slope_set_from_preset(k) for k in presets.PUBLISHED_SLOPES]
    mode = _error_mode(sc, "hardware")
    rows = []
    for s in sets:
        est = extract_couplings(
            s["slope_q_MHz_per_nW"], 1e-3 * s["slope_d_kHz_per_nW"],
            1e-3 * s["slope_m_kHz_per_nW"], s["delta_D_MHz"], s["delta_M_MHz"], s["alpha_MHz"],
            slope_errs=(s["slope_q_err_MHz_per_nW"], 1e-3 * s["slope_d_err_kHz_per_nW"],
                        1e-3 * s["slope_m_err_kHz_per_nW"]),
            error_mode=mode, pair_id=tuple(s["pair"]))
        entry = {"input": s, "estimate": est.to_dict()}
        pub = presets.PUBLISHED_SLOPES.get(s["name"])
        if pub is not None:
            entry["published"] = {"g_drive_MHz": pub["g_drive"], "g_drive_err_MHz": pub["g_drive_err"],
                                  "g_monitor_MHz": pub["g_monitor"],
                                  "g_monitor_err_MHz": pub["g_monitor_err"]}
            out.check(f"{s['name']}.g_drive_within_published_error",
                      abs(est.g_drive - pub["g_drive"]) <= pub["g_drive_err"])
            out.check(f"{s['name']}.g_monitor_within_published_error",
                      abs(est.g_monitor - pub["g_monitor"]) <= pub["g_monitor_err"])
        out.results[s["name"]] = entry
        rows.append([s["name"], *est.pair_id, est.g_drive, est.g_drive_err,
                     est.g_monitor, est.g_monitor_err])
        out.summary.append(f"{s['name']:>10s} ({est.pair_id[0]} drive, {est.pair_id[1]} monitor): "
                           f"g_D = {est.g_drive:.2f} +/- {est.g_drive_err:.2f} MHz, "
                           f"g_M = {est.g_monitor:.2f} +/- {est.g_monitor_err:.2f} MHz")
    out.results["error_mode"] = mode
    art.csv("pair_table.csv", ["set", "drive", "monitor", "g_drive_MHz", "g_drive_err_MHz",
                               "g_monitor_MHz", "g_monitor_err_MHz"], rows)


def _plans(sc: Scenario, dev: DeviceSpec, d: str, m: str):
    st, kr = sc.scans["stark"], sc.scans["kerr"]
    stark_opts = {k2: st[k1] for k1, k2 in (("n_points", "n_points"), ("width_MHz", "width"),
                                            ("depth", "depth")) if k1 in st}
    kerr_opts = {k: kr[k] for k in ("n_powers", "max_fraction", "span_kappa", "n_points") if k in kr}
    return pipeline.default_plans(dev, d, m, sc.noise, st.get("powers_nW"), kr.get("powers_nW"),
                                  stark_opts, kerr_opts, sc.drift_rate)


def _run_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def _tag(dev: DeviceSpec, d: str, m: str, several_freqs: bool) -> str:
    base = f"{d}-{m}"
    return f"{base}_q{dev.omega_q:g}" if several_freqs else base


def cmd_simulate(sc: Scenario, art: Artifacts, out: Outcome) -> None:
    devs = sc.qubit_devices()
    pairs = sc.pair_list()
    multi = len(pairs) > 1 or len(devs) > 1
    for iw, dev in enumerate(devs):
        for ip, (d, m) in enumerate(pairs):
            sp, kp = _plans(sc, dev, d, m)
            s0 = _run_seed(sc.seed, ip, iw)
            ss = np.random.SeedSequence(s0).generate_state(2)
            tag = _tag(dev, d, m, len(devs) > 1)
            prefix = f"{tag}_" if multi else ""
            entry = {"seed": s0, "expected_slopes_MHz_per_nW": pipeline.expected_slopes(dev, d, m)}
            for kind, plan, rs in (("stark", sp, ss[0]), ("kerr", kp, ss[1])):
                traces = synthlab.simulate(dev, plan, int(rs))
                name = f"{prefix}{kind}_traces.csv"
                meta = {"device": dev.to_dict(), "pair": [d, m], "plan": plan.to_dict(),
                        "seed": int(rs)}
                side = synthlab.write_traces(art.path(name), traces, meta)
                art.written.append(side.name)
                entry[f"{kind}_file"] = name
                entry[f"{kind}_plan"] = plan.to_dict()
            out.results[tag] = entry
            out.summary.append(f"{tag}: {len(sp.powers)} AC-Stark and {len(kp.powers)} Kerr traces "
                               f"-> {entry['stark_file']}, {entry['kerr_file']}")


def _per_power_rows(tag: str, pa: pipeline.PairAnalysis):
    for r in pa.per_power_table():
        yield [tag, r["scan"], r["power_nW"], r.get("omega_q_eff_MHz"), r.get("err_MHz"),
               r.get("omega_d_eff_MHz"), r.get("omega_m_shift_MHz")]


PER_POWER_HEADER = ["run", "scan", "power_nW", "omega_q_eff_MHz", "omega_q_err_MHz",
                    "omega_d_eff_MHz", "omega_m_shift_MHz"]
PAIR_HEADER = ["run", "drive", "monitor", "qubit_freq_MHz", "g_drive_MHz", "g_drive_err_MHz",
               "g_monitor_MHz", "g_monitor_err_MHz", "slope_q_MHz_per_nW",
               "slope_d_kHz_per_nW", "slope_m_kHz_per_nW"]


def _pair_row(tag, est):
    return [tag, *est.pair_id, est.qubit_freq, est.g_drive, est.g_drive_err, est.g_monitor,
            est.g_monitor_err, est.slope_q, 1e3 * est.slope_d, 1e3 * est.slope_m]


def cmd_extract(sc: Scenario, art: Artifacts, out: Outcome) -> None:
    if not sc.traces:
        raise ConfigError("extract needs a traces section with stark and kerr files")
    stark, smeta = synthlab.read_traces(sc.traces["stark"])
    kerr, _ = synthlab.read_traces(sc.traces["kerr"])
    dev = sc.device
    if dev is None:
        if "device" not in smeta:
            raise ConfigError("extract needs a device (none in config or trace sidecar)")
        dev = DeviceSpec.from_dict(smeta["device"])
    if sc.pairs:
        d, m = sc.pairs[0]
    elif "pair" in smeta:
        d, m = smeta["pair"]
    else:
        d, m = sc.pair_list()[0]
    pa = pipeline.analyze_pair(dev, d, m, stark, kerr, sc.extraction["fit"],
                               _error_mode(sc, "stat"), sc.extraction["filter_sigma"])
    est = pa.estimate
    tag = f"{d}-{m}"
    out.results = {"pair": [d, m], "estimate": est.to_dict(), "method": pa.method,
                   "device_used": dev.to_dict(),
                   "dropped_kerr_powers_nW": list(pa.dropped_powers)}
    if "device" in smeta:
        truth = DeviceSpec.from_dict(smeta["device"])
        gd, gm = abs(truth.mode(d).g), abs(truth.mode(m).g)
        out.results["truth_from_sidecar"] = {
            "g_drive_MHz": gd, "g_monitor_MHz": gm,
            "relative_error": {"g_drive": est.g_drive / gd - 1, "g_monitor": est.g_monitor / gm - 1}}
    art.csv("per_power.csv", PER_POWER_HEADER, _per_power_rows(tag, pa))
    art.csv("pair_table.csv", PAIR_HEADER, [_pair_row(tag, est)])
    out.summary.append(f"{tag}: g_D = {est.g_drive:.3f} +/- {est.g_drive_err:.3f} MHz, "
                       f"g_M = {est.g_monitor:.3f} +/- {est.g_monitor_err:.3f} MHz "
                       f"({pa.method} Kerr fit, {est.error_mode} errors)")


def cmd_closed_loop(sc: Scenario, art: Artifacts, out: Outcome) -> None:
    devs = sc.qubit_devices()
    pairs = sc.pair_list()
    opts = sc.closed_loop
    method, mode = sc.extraction["fit"], _error_mode(sc, "stat")
    runs, estimates, pp_rows, pair_rows = [], [], [], []
    for iw, dev in enumerate(devs):
        for ip, (d, m) in enumerate(pairs):
            sp, kp = _plans(sc, dev, d, m)
            for r in range(int(opts["repeats"])):
                seed = _run_seed(sc.seed, ip, iw, r)
                res = pipeline.run_closed_loop(dev, d, m, sp, kp, seed, method, mode,
                                               filter_sigma=sc.extraction["filter_sigma"])
                tag = f"{_tag(dev, d, m, len(devs) > 1)}_r{r}"
                entry = res.to_dict()
                entry.update(run=tag, repeat=r, qubit_freq_MHz=dev.omega_q)
                runs.append(entry)
                estimates.append(res.analysis.estimate)
                pp_rows += list(_per_power_rows(tag, res.analysis))
                pair_rows.append(_pair_row(tag, res.analysis.estimate))
                log.info("%s: rel err drive %+.4f monitor %+.4f", tag,
                         res.relative_error["g_drive"], res.relative_error["g_monitor"])
    out.results["runs"] = runs
    out.results["method"] = method
    out.results["error_mode"] = mode
    rel = {k: np.abs([r["relative_error"][k] for r in runs]) for k in ("g_drive", "g_monitor")}
    stats = {k: {"max_abs": float(v.max()), "median_abs": float(np.median(v))}
             for k, v in rel.items()}
    out.results["relative_error_stats"] = stats
    if opts["tolerance"] is not None:
        key = "max_abs" if opts["statistic"] == "max" else "median_abs"
        for k in rel:
            out.check(f"{k}.{key}_relative_error<={opts['tolerance']}",
                      stats[k][key] <= float(opts["tolerance"]))
    if len(estimates) >= 2:
        factor = opts["spread_bound_factor"]
        rep = consistency_report(estimates, bound_factor=factor)
        out.results["consistency"] = rep
        if factor is not None:
            for name, stat in rep["modes"].items():
                out.check(f"mode_{name}.spread<=bound", stat["within_bound"])
        if opts["require_trend"]:
            if not rep["sweeps"]:
                out.check("sweep_present", False)
            for pid, sw in rep["sweeps"].items():
                for role in ("drive", "monitor"):
                    out.check(f"sweep_{pid}.{role}.sqrt_trend_resolved", sw[role]["sqrt_trend_resolved"])
        rows = [[n, s["n"], s["mean_MHz"], s["std_MHz"], s["spread_MHz"], s.get("spread_bound_MHz")]
                for n, s in rep["modes"].items()]
        art.csv("mode_table.csv", ["mode", "n", "mean_g_MHz", "std_g_MHz", "spread_MHz",
                                   "spread_bound_MHz"], rows)
        if rep["sweeps"]:
            srows = []
            for pid, sw in rep["sweeps"].items():
                for i, w in enumerate(sw["qubit_freq_MHz"]):
                    srows.append([pid, w, sw["drive"]["g_MHz"][i], sw["drive"]["err_MHz"][i],
                                  sw["monitor"]["g_MHz"][i], sw["monitor"]["err_MHz"][i]])
            art.csv("sweep.csv", ["pair", "qubit_freq_MHz", "g_drive_MHz", "g_drive_err_MHz",
                                  "g_monitor_MHz", "g_monitor_err_MHz"], srows)
    art.csv("runs.csv", PAIR_HEADER, pair_rows)
    art.csv("per_power.csv", PER_POWER_HEADER, pp_rows)
    out.summary.append(f"{len(runs)} closed-loop runs ({method} Kerr fit, noise {sc.noise:g})")
    for k, v in stats.items():
        out.summary.append(f"  {k}: max |rel err| {v['max_abs']:.4f}, median {v['median_abs']:.4f}")


def cmd_sw_check(sc: Scenario, art: Artifacts, out: Outcome) -> None:
    opts = sc.sw_check
    rep = validation.sw_check_report(int(opts["n_systems"]), int(opts["seed"]))
    if sc.device is not None:
        spots = {}
        for d, m in sc.pair_list():
            cf = swpt.device_coefficients(sc.device, d, m)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DispersiveRegimeWarning)
                ex = exact_coefficients(sc.device, [d, m])
            spots[f"{d}-{m}"] = {
                name: {"closed_MHz": float(getattr(cf, name)), "exact_MHz": float(getattr(ex, name)),
                       "rel_diff": float(getattr(cf, name) / getattr(ex, name) - 1)}
                for name in cf._fields}
        rep["device_spot_checks"] = spots
    out.results = rep
    sc_ = rep["order_scaling"]
    out.check("order_scaling_exponent_5+-0.2", rep["exponent_target"]["pass"])
    worst = max(rep["level1"]["max_rel_err"].values())
    out.check("level1_closed_forms_vs_engine<1e-8", worst < 1e-8)
    out.check("critical_drive_rel_diff<1e-6", rep["kerr_critical"]["E_crit_rel_diff"] < 1e-6)
    out.check("three_roots_only_above_threshold", rep["kerr_critical"]["three_roots_only_above"])
    art.csv("order_scaling.csv", ["system", "dim", "exponent"] + [f"residual_eps{e:.4g}" for e in sc_["eps"]],
            [[r["system"], r["dim"], r["exponent"], *r["residuals"]] for r in sc_["systems"]])
    rows = []
    for r in rep["closed_vs_exact"]["stark_self"]:
        rows.append(["stark", r["g_over_delta"], r["stark_closed"], r["stark_exact"], r["stark_rel_err"]])
        rows.append(["self_kerr", r["g_over_delta"], r["self_closed"], r["self_exact"], r["self_rel_err"]])
    for r in rep["closed_vs_exact"]["cross"]:
        rows.append(["cross_kerr", r["g_over_delta"], r["cross_closed"], r["cross_exact"], r["cross_rel_err"]])
    art.csv("closed_vs_exact.csv", ["quantity", "g_over_delta", "closed_MHz", "exact_MHz", "rel_err"], rows)
    kc = rep["kerr_critical"]
    out.summary += [
        f"order scaling exponent: {sc_['min_exponent']:.3f} .. {sc_['max_exponent']:.3f} (target 5 +/- 0.2)",
        "log-log error slopes: stark {stark_loglog_slope:.3f}, self {self_loglog_slope:.3f}, "
        "cross {cross_loglog_slope:.3f}".format(**rep["closed_vs_exact"]),
        f"level-1 closed forms vs engine, worst rel err {worst:.2e}",
        f"critical drive from discriminant vs formula: rel diff {kc['E_crit_rel_diff']:.2e}",
        f"peak photons at threshold {kc['n_peak_at_threshold']:.6g}; 4k/(27 eta) = "
        f"{kc['n_crit_4k_over_27eta']:.6g}, 4k/(3^1.5 eta) = {kc['n_crit_4k_over_3p1.5eta']:.6g} "
        f"-> honoring {kc['honored']}",
    ]


def _kerr_params(sc: Scenario) -> tuple[float, float, str]:
    kc = sc.kerr_curves
    if kc["kappa_MHz"] is not None and kc["eta_MHz"] is not None:
        return float(kc["kappa_MHz"]), float(kc["eta_MHz"]), "config"
    if sc.device is not None:
        d, _ = sc.pair_list()[0]
        mode = sc.device.mode(d)
        if mode.kappa is None:
            raise ConfigError(f"mode {d} needs kappa_MHz for kerr-curves")
        eta = -swpt.kerr_self(mode.g, sc.device.detuning(d), sc.device.alpha)
        kappa = float(kc["kappa_MHz"]) if kc["kappa_MHz"] is not None else mode.kappa
        return kappa, float(eta), f"device mode {d}"
    return (float(kc["kappa_MHz"] or presets.TYPICAL_KAPPA),
            float(kc["eta_MHz"] or presets.TYPICAL_ETA), "defaults")


def cmd_kerr_curves(sc: Scenario, art: Artifacts, out: Outcome) -> None:
    kc = sc.kerr_curves
    kappa, eta, source = _kerr_params(sc)
    e_crit = kerrdyn.critical_drive(kappa, eta)
    res: dict[str, Any] = {
        "kappa_MHz": kappa, "eta_MHz": eta, "source": source,
        "E_crit_sq": e_crit**2, "critical_detuning_MHz": kerrdyn.critical_detuning(kappa, eta),
        "critical_photon_number": kerrdyn.critical_photon_number(kappa, eta),
        "fold_photon_number": kerrdyn.fold_photon_number(kappa, eta), "curves": []}
    for f in kc["drive_fractions"]:
        e2 = float(f) * e_crit**2
        n_pk = kerrdyn.peak_photon_number(kappa, e2)
        pull = -eta * n_pk
        span = float(kc["span_kappa"]) * kappa
        deltas = np.linspace(min(0.0, pull) - span, max(0.0, pull) + span, int(kc["n_points"]))
        base = kerrdyn.KerrDriveParams(0.0, kappa, eta, e2)
        window = kerrdyn.bistable_window(kappa, eta, e2)
        entry = {"drive_fraction": float(f), "drive_power_sq": e2, "peak_photon_number": n_pk,
                 "peak_detuning_MHz": pull, "bistable_window_MHz": list(window) if window else None,
                 "files": {}}
        for br in kc["branches"]:
            name = f"kerr_f{float(f):g}_{br}.csv"
            kerrdyn.write_response_csv(art.path(name), base, deltas, br)
            entry["files"][br] = name
        res["curves"].append(entry)
        w = f"window {window[0]:.4g} .. {window[1]:.4g} MHz" if window else "no bistable window"
        out.summary.append(f"|E|^2 = {f:g} x critical: peak n = {n_pk:.4g} at {pull:.4g} MHz, {w}")
    out.results = res
    out.summary.insert(0, f"kappa = {kappa:g} MHz, eta = {eta:.4g} MHz ({source}); "
                          f"critical |E|^2 = {e_crit**2:.6g}")


def cmd_lattice(sc: Scenario, art: Artifacts, out: Outcome) -> None:
    spec = sc.lattice or lattice.quasi1d_lattice()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", lattice.DisconnectedLatticeWarning)
        nm = lattice.normal_modes(spec)
    nm.to_csv(art.path("modes.csv"))
    counts, edges = lattice.density_of_states(nm, float(sc.dos["bin_MHz"]))
    art.csv("dos.csv", ["bin_lo_MHz", "bin_hi_MHz", "count"],
            zip(edges[:-1].tolist(), edges[1:].tolist(), counts.tolist()))
    out.results = {
        "lattice": spec.to_dict(), "n_modes": len(nm),
        "freq_min_MHz": float(nm.frequencies.min()), "freq_max_MHz": float(nm.frequencies.max()),
        "dos_bin_MHz": float(sc.dos["bin_MHz"]), "dos_max_count": int(counts.max()),
        "coupling_projection": "g_j = g0 * psi_j(qubit_site), a modeling choice",
        "warnings": [str(w.message) for w in caught],
    }
    if sc.device is not None:
        out.results["device"] = sc.device.to_dict()
    out.summary.append(f"{spec.n_sites} sites, {len(spec.edges)} edges: modes "
                       f"{nm.frequencies.min():.2f} .. {nm.frequencies.max():.2f} MHz")
    top = int(counts.argmax())
    out.summary.append(f"densest bin {edges[top]:.1f} .. {edges[top + 1]:.1f} MHz "
                       f"holds {counts[top]} modes (flat-band candidate)")
    out.summary.append("couplings use g_j = g0 * psi_j(qubit_site) (modeling choice)")


COMMANDS: dict[str, Callable[[Scenario, Artifacts, Outcome], None]] = {
    "simulate": cmd_simulate, "extract": cmd_extract, "closed-loop": cmd_closed_loop,
    "sw-check": cmd_sw_check, "kerr-curves": cmd_kerr_curves, "lattice": cmd_lattice,
    "paper-numbers": cmd_paper_numbers,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario YAML file")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--seed", type=int, help="override the scenario seed")
    common.add_argument("--fit", choices=("1d", "2d"), help="Kerr fit method")
    common.add_argument("--error-mode", choices=("stat", "hardware"))
    common.add_argument("--verbose", "-v", action="count", default=0)
    p = argparse.ArgumentParser(prog="starkkerr", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {"simulate": "synthesize AC-Stark and Kerr traces",
             "extract": "fit trace files and extract couplings",
             "closed-loop": "simulate, extract and compare with truth",
             "sw-check": "perturbation theory vs exact diagonalization",
             "kerr-curves": "semiclassical Kerr response sweeps",
             "lattice": "normal modes and density of states",
             "paper-numbers": "couplings from published slope sets"}
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    art = Artifacts(args.out)
    out = Outcome()
    sc = None
    code, err = EXIT_OK, None
    try:
        sc = load_scenario(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be nonnegative")
            sc.seed = args.seed
        if args.fit:
            sc.extraction["fit"] = args.fit
        if args.error_mode:
            sc.extraction["error_mode"] = args.error_mode
        COMMANDS[args.command](sc, art, out)
        if out.failed:
            raise ConsistencyError(out.failed)
    except Exception as exc:  # noqa: BLE001 -- every failure becomes error.json
        code, err = exit_code_for(exc), exc
        log.debug("failure", exc_info=True)
    report = {"subcommand": args.command, "version": __version__,
              "seed": sc.seed if sc else None, "config": sc.to_dict() if sc else None,
              "results": out.results, "checks": out.checks, "exit_code": code}
    if out.results or out.checks:
        art.json("report.json", report)
        lines = [f"starkkerr {args.command}  (seed {report['seed']})", *out.summary]
        lines += [f"check {k}: {'PASS' if v else 'FAIL'}" for k, v in out.checks.items()]
        art.text("summary.txt", "\n".join(lines))
    if err is not None:
        partial = list(art.written)
        art.json("error.json", {"subcommand": args.command, "exit_code": code,
                                "error_type": type(err).__name__, "message": str(err),
                                "partial_artifacts": partial, "partial": bool(partial),
                                "failed_checks": getattr(err, "failed", [])})
        print(f"starkkerr {args.command}: {type(err).__name__}: {err}", file=sys.stderr)
    else:
        print("\n".join(out.summary))
    art.json("metadata.json", {"started_utc": started.isoformat(),
                               "finished_utc": datetime.now(timezone.utc).isoformat(),
                               "elapsed_s": time.perf_counter() - t0, "argv": list(argv or sys.argv[1:]),
                               "config_path": str(args.config) if args.config else None})
    return code


if __name__ == "__main__":
    sys.exit(main())
