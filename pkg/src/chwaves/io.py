"""CSV/JSON serialization. Data files carry no timestamps, so reruns are byte-identical."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .lagrangian import LagrangianState

FMT = "%.17g"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _clean(o):
    # JSON has no inf/nan; spell them as strings
    if isinstance(o, float) and not math.isfinite(o):
        return repr(o)
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def write_json(obj, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_clean(json.loads(json.dumps(obj, default=_json_default))),
                      indent=2, sort_keys=True)
    path.write_text(text + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def write_csv(path, header, columns):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, data, fmt=FMT, delimiter=",", header=",".join(header), comments="")
    return path


def read_csv(path):
    """Columns of a CSV written by :func:`write_csv` as a dict of arrays."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, k] for k, name in enumerate(header)}


# ----------------------------------------------------------------------------------------
# profiles


def write_profile(profile, stem, P=None):
    """``stem.csv`` with ``x,u,ux,singular`` (plus ``P`` if given) and a ``stem.json`` sidecar."""
    stem = Path(stem)
    cols = [profile.xs, profile.vals, profile.derivs, profile.singular_mask.astype(float)]
    header = ["x", "u", "ux", "singular"]
    if P is not None:
        cols.append(P)
        header.append("P")
    write_csv(stem.with_suffix(".csv"), header, cols)
    meta = {
        "params": profile.params.to_dict(),
        "half_period": float(profile.half_period),
        "center": float(profile.center),
        "singular_points": [float(x) for x in profile.singular_points],
    }
    write_json(meta, stem.with_suffix(".json"))
    return stem.with_suffix(".csv"), stem.with_suffix(".json")


def read_profile(stem):
    stem = Path(stem)
    cols = read_csv(stem.with_suffix(".csv"))
    meta = read_json(stem.with_suffix(".json"))
    hp = meta["half_period"]
    meta["half_period"] = float(hp)
    return cols, meta


# ----------------------------------------------------------------------------------------
# Lagrangian states and trajectories


def _state_meta(ls):
    return {
        "domain": "periodic" if ls.periodic else "line",
        "L": ls.L,
        "E": float(ls.E),
        "r": float(ls.r),
        "t": float(ls.t),
        "labeling": ls.labeling,
        "label_period": ls.label_period,
    }


def write_lagrangian(ls, stem):
    stem = Path(stem)
    write_csv(stem.with_suffix(".csv"), ["xi", "y", "U", "H"], [ls.xis, ls.y, ls.U, ls.H])
    write_json(_state_meta(ls), stem.with_suffix(".json"))
    return stem.with_suffix(".csv")


def read_lagrangian(stem):
    stem = Path(stem)
    c = read_csv(stem.with_suffix(".csv"))
    m = read_json(stem.with_suffix(".json"))
    return LagrangianState(xis=c["xi"], y=c["y"], U=c["U"], H=c["H"], r=m["r"],
                           L=m["L"] if m["domain"] == "periodic" else None, E=m["E"], t=m["t"],
                           labeling=m["labeling"], label_period=m["label_period"])


def write_trajectory(trajectory, out_dir, extra=None):
    """One ``snap_XXXX.csv`` (``xi,y,U,H,P,Q``) per snapshot plus ``manifest.json``."""
    from .analysis import energy_history
    from .evolution import compute_pq

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for k, st in enumerate(trajectory):
        P, Q = compute_pq(st)
        name = f"snap_{k:04d}.csv"
        write_csv(out / name, ["xi", "y", "U", "H", "P", "Q"], [st.xis, st.y, st.U, st.H, P, Q])
        files.append({"file": name, "t": float(st.t)})
    hist = energy_history(trajectory)
    manifest = {
        "config": trajectory.config.to_dict(),
        "steps": trajectory.steps,
        "state": _state_meta(trajectory[0]),
        "snapshots": files,
        "energy_history": [[t, e] for t, e in hist],
    }
    if extra:
        manifest.update(extra)
    write_json(manifest, out / "manifest.json")
    write_energy(hist, out / "energy.csv")
    return out / "manifest.json"


def read_snapshot(path):
    return read_csv(path)


def write_energy(series, path):
    series = list(series)
    t = [a for a, _ in series]
    e = [b for _, b in series]
    return write_csv(path, ["t", "E"], [t, e])


def write_report(report, path):
    return write_json(report.to_dict(), path)
