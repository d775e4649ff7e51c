"""``chwaves`` command line: profile, simulate, diagnose, export.

Settings come from a TOML file (``--config``) with optional ``[params]`` and ``[sim]``
tables; flags override the file. Errors print a JSON object on stderr and exit 1;
usage problems exit 2.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tomli

from . import io
from .analysis import (DiagnosticsReport, characteristics_compare, conservation_jump, edge_asymmetry,
                       energy_drift, energy_history, identity_drift, translate_fit, trough_label,
                       weak_residual_check)
from .errors import CHWavesError, ConfigError
from .evolution import SimConfig, cfl_dt, plateau_taylor_check, simulate
from .helmholtz import p_closed_form, state_from_profile
from .lagrangian import identity_labeling, to_lagrangian
from .profiles import FAMILIES, GOLDEN, build_profile, cuspon_half_period, derive_params

COMMANDS = ("profile", "simulate", "diagnose", "export")

# default heights per family; the periodic ones use the golden-ratio cuspon with a = 1
DEFAULTS = {
    "cuspon-periodic": dict(M=GOLDEN, m=0.0, s=1.0),
    "stumpon-periodic": dict(M=GOLDEN, m=0.0, s=1.0),
    "peakon-periodic": dict(M=1.0, m=1.0 / math.cosh(0.5), s=1.0),
    "peakon-decay": dict(M=1.0, m=0.0, s=1.0),
    "cuspon-decay": dict(M=2.0, m=-0.5, s=1.0),
    "stumpon-decay": dict(M=5.0, m=-1.0, s=3.0, ell=0.5),
}


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    sim: dict = field(default_factory=dict)
    out_dir: str = "chwaves-out"
    plot: bool = False

    def resolved_params(self):
        fam = self.params.get("family", "cuspon-periodic")
        if fam not in FAMILIES:
            raise ConfigError(f"unknown family {fam!r}")
        d = dict(DEFAULTS[fam])
        d.update({k: v for k, v in self.params.items() if k != "family" and v is not None})
        ell = d.get("ell")
        if ell is None and fam == "stumpon-periodic":
            # plateau chosen so the stumpon period is 4 at the default heights
            c = derive_params(d["M"], d["m"], d["s"], 0.0, "cuspon-periodic")
            ell = 2.0 - cuspon_half_period(c)
        return derive_params(d["M"], d["m"], d["s"], ell or 0.0, fam)


def build_parser():
    ap = argparse.ArgumentParser(prog="chwaves", description=__doc__.splitlines()[0])
    ap.add_argument("command", nargs="?", choices=COMMANDS)
    ap.add_argument("--config", type=Path)
    ap.add_argument("--family", choices=FAMILIES)
    for name in ("M", "m", "s", "ell"):
        ap.add_argument(f"--{name}", type=float, dest=f"p_{name}")
    ap.add_argument("--n-labels", type=int, dest="n_labels")
    ap.add_argument("--dt", type=float)
    ap.add_argument("--T", type=float, dest="T")
    ap.add_argument("--cfl", type=float)
    ap.add_argument("--labeling", choices=("standard", "identity"))
    ap.add_argument("--out", type=Path)
    ap.add_argument("--plot", action="store_true", default=None)
    return ap


def load_config(args):
    raw = {}
    if args.config is not None:
        with open(args.config, "rb") as fh:
            raw = tomli.load(fh)
    cfg = RunConfig(command=args.command or raw.get("command"),
                    params=dict(raw.get("params", {})), sim=dict(raw.get("sim", {})),
                    out_dir=str(raw.get("out_dir", "chwaves-out")), plot=bool(raw.get("plot", False)))
    if args.family:
        cfg.params["family"] = args.family
    for name in ("M", "m", "s", "ell"):
        v = getattr(args, f"p_{name}")
        if v is not None:
            cfg.params[name] = v
    for name in ("n_labels", "dt", "T", "cfl", "labeling"):
        v = getattr(args, name)
        if v is not None:
            cfg.sim[name] = v
    if args.out is not None:
        cfg.out_dir = str(args.out)
    if args.plot is not None:
        cfg.plot = args.plot
    return cfg


# ----------------------------------------------------------------------------------------
# commands


def _profile(params):
    return build_profile(params)


def cmd_profile(cfg, params, out):
    prof = _profile(params)
    io.write_profile(prof, out / "profile", P=p_closed_form(params, prof))
    if cfg.plot:
        from .plots import line_plot
        line_plot([(params.family, prof.xs, prof.vals)], out / "profile.svg", title=params.family)
    return {"profile": "profile.csv", "half_period": prof.half_period}


def _initial_state(prof, sim):
    n = int(sim.get("n_labels", 512))
    labeling = sim.get("labeling", "standard")
    if labeling == "identity":
        return identity_labeling(state_from_profile(prof, n))
    return to_lagrangian(state_from_profile(prof, max(2048, 4 * n)), n)


def run_simulation(params, sim):
    prof = _profile(params)
    ls = _initial_state(prof, sim)
    cfl = float(sim.get("cfl", 0.3))
    T = float(sim.get("T", 2.0 * prof.period if prof.periodic else 10.0))
    dt = float(sim.get("dt", cfl_dt(ls, cfl)))
    config = SimConfig(dt=dt, T=T, n_labels=ls.n, labeling=ls.labeling,
                       snapshot_stride=int(sim.get("snapshot_stride", 10)), cfl=cfl)
    stops = None
    if params.kind == "stumpon":
        stops = [0.02 * k for k in range(1, 11) if 0.02 * k < T]
    tr = simulate(ls, config, snapshot_times=stops)
    return prof, tr


def simulation_summary(params, prof, tr):
    end, excursion = energy_drift(tr)
    info = {
        "params": params.to_dict(),
        "half_period": prof.half_period,
        "period": prof.period,
        "energy_drift": end,
        "energy_excursion": excursion,
        "identity_drift": identity_drift(tr[0], tr.final),
    }
    T = tr.final.t - tr[0].t
    if params.kind == "cuspon" and prof.periodic:
        sup, lag = translate_fit(tr.final, prof, params.s * T)
        info.update(sup_error=sup, phase_lag=lag)
    if params.kind == "stumpon":
        rep = plateau_taylor_check(tr, params)
        dev = rep.deviations - 0.5 * rep.times ** 2 * rep.qt  # U(t, 0) - s
        info.update(qt_plateau=rep.qt, taylor_C=rep.C,
                    plateau_descent=bool(dev.size and np.all(dev < 0)),
                    plateau_ascent=bool(dev.size and np.all(dev > 0)),
                    edge_asymmetry=edge_asymmetry(tr.final, params))
    if params.kind == "peakon":
        x0 = prof.center
        info["char_error"] = characteristics_compare(tr, params, x0)
        j = trough_label(tr[0], x0)
        sub = [s.with_values(s.y[j:j + 1], s.U[j:j + 1], s.H[j:j + 1], s.t) for s in tr]
        info["trough_char_error"] = characteristics_compare(sub, params, x0)
    return info


def cmd_simulate(cfg, params, out):
    prof, tr = run_simulation(params, cfg.sim)
    info = simulation_summary(params, prof, tr)
    info["threads"] = os.environ.get("CHWAVES_THREADS")
    io.write_trajectory(tr, out, extra=info)
    if cfg.plot:
        _plot_run(out)
    return info


def cmd_diagnose(cfg, params, out):
    prof = _profile(params)
    rep = DiagnosticsReport()
    if params.kind in ("cuspon", "stumpon"):
        jr = conservation_jump(prof)
        rep.jump_value, rep.jump_expected = jr.jump_value, jr.jump_expected
        rep.notes["jump_left"] = jr.jump_left
        conservative = abs(jr.jump_value) <= 1e-3 and abs(jr.jump_left) <= 1e-3
        rep.notes["conservative"] = "yes" if conservative else "no"
        if params.kind == "stumpon":
            rep.notes["weak_check"] = weak_residual_check(prof, jr.jump_value).to_dict()
    else:
        rep.notes["conservative"] = "yes"
    if "T" in cfg.sim:
        prof, tr = run_simulation(params, cfg.sim)
        rep.energy_series = energy_history(tr)
        info = simulation_summary(params, prof, tr)
        rep.char_error = info.get("char_error")
        rep.notes.update({k: v for k, v in info.items() if k not in ("params", "char_error")})
        io.write_energy(rep.energy_series, out / "energy.csv")
    io.write_report(rep, out / "report.json")
    return {"conservative": rep.notes["conservative"], "jump_value": rep.jump_value}


def _plot_run(out):
    from .plots import characteristics_fan, line_plot

    man = io.read_json(out / "manifest.json")
    snaps = [io.read_snapshot(out / s["file"]) for s in man["snapshots"]]
    times = [s["t"] for s in man["snapshots"]]
    first, last = snaps[0], snaps[-1]
    line_plot([(f"t = {times[0]:.3g}", first["y"], first["U"]),
               (f"t = {times[-1]:.3g}", last["y"], last["U"])], out / "snapshots.svg")
    Y = np.array([s["y"] for s in snaps])
    characteristics_fan(times, Y, out / "characteristics.svg", every=max(1, Y.shape[1] // 32))
    return out


def cmd_export(cfg, params, out):
    done = {}
    if (out / "manifest.json").exists():
        man = io.read_json(out / "manifest.json")
        io.write_energy(man["energy_history"], out / "energy.csv")
        snaps = [io.read_snapshot(out / s["file"]) for s in man["snapshots"]]
        Y = np.array([s["y"] for s in snaps])
        step = max(1, Y.shape[1] // 32)
        cols = [[s["t"] for s in man["snapshots"]]] + [Y[:, j] for j in range(0, Y.shape[1], step)]
        io.write_csv(out / "characteristics.csv", ["t"] + [f"y{j}" for j in range(0, Y.shape[1], step)], cols)
        done["characteristics"] = "characteristics.csv"
        if cfg.plot:
            _plot_run(out)
    if (out / "profile.csv").exists() and cfg.plot:
        from .plots import line_plot
        c = io.read_csv(out / "profile.csv")
        line_plot([("u", c["x"], c["u"])] + ([("P", c["x"], c["P"])] if "P" in c else []),
                  out / "profile.svg")
        done["profile_plot"] = "profile.svg"
    if not done:
        raise ConfigError(f"nothing to export in {out}")
    return done


HANDLERS = {"profile": cmd_profile, "simulate": cmd_simulate, "diagnose": cmd_diagnose,
            "export": cmd_export}


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args)
    except (OSError, tomli.TOMLDecodeError) as exc:
        print(json.dumps(ConfigError(str(exc)).to_dict()), file=sys.stderr)
        return 1
    if not cfg.command:
        ap.print_usage(sys.stderr)
        print("chwaves: error: no command given (argument or `command` in the config)", file=sys.stderr)
        return 2
    if cfg.command not in COMMANDS:
        ap.print_usage(sys.stderr)
        return 2
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        params = cfg.resolved_params()
        result = HANDLERS[cfg.command](cfg, params, out)
    except CHWavesError as exc:
        print(json.dumps(exc.to_dict(), sort_keys=True), file=sys.stderr)
        return 1
    except (OSError, ValueError, FloatingPointError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    print(json.dumps(io._clean(json.loads(json.dumps(result, default=io._json_default))),
                     sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
