"""Run driver: each pipeline as a reproducible command emitting CSV/JSON.

Subcommands: maps, steady, fluct, disorder, measure, volume, quench. Every
run writes <outdir>/<command>-<timestamp>/ with manifest.json (full config
echo, seed, tool version), data.csv (RFC-4180, 17 significant digits), and
where relevant diagnostics.json. Bodies are byte-identical under a fixed
(config, seed); only the manifest carries the timestamp.

Config resolution: built-in defaults < JSON file (--config) < flags.
Exit codes: 0 success, 2 config error, 3 invariant violation,
4 unsupported combination.

Times in data files are in units of t_J except the disorder command, whose
absolute t shares units with 1/B, 1/Omega (no exchange scale there).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_UNSUPPORTED = 4

_STATES = ("hierarchy", "neel", "uniform", "custom")


class ConfigError(ValueError):
    pass


class UnsupportedError(ValueError):
    pass


class InvariantError(RuntimeError):
    pass


def preset_state(n: int, state: str, z=None, z_list=None):
    """Initial z polarizations: hierarchy (1, 1/n, ..., (n-1)/n), neel
    alternating +-1, uniform z, or a custom list."""
    if state == "hierarchy":
        vals = [1.0] + [k / n for k in range(1, n)]
    elif state == "neel":
        vals = [1.0 if k % 2 == 0 else -1.0 for k in range(n)]
    elif state == "uniform":
        if z is None:
            raise ConfigError("state.z: uniform preset needs --z")
        vals = [float(z)] * n
    elif state == "custom":
        if z_list is None:
            raise ConfigError("state.z_list: custom preset needs --z-list")
        vals = [float(v) for v in z_list]
        if len(vals) != n:
            raise ConfigError(f"state.z_list: expected {n} values, got {len(vals)}")
    else:
        raise ConfigError(f"state: unknown preset {state!r} (choose from {_STATES})")
    for k, v in enumerate(vals):
        if abs(v) > 1.0:
            raise ConfigError(f"state.z[{k}]: |z| must be <= 1, got {v}")
    return tuple(vals)


def rational_state(n: int, state: str, z=None, z_list=None):
    """preset_state with exact rationals, for the exact steady tables.

    The presets are rational by construction; uniform/custom inputs are read
    back through their decimal repr so --z 0.2 means 1/5, not the binary
    double nearest to it.
    """
    from fractions import Fraction
    floats = preset_state(n, state, z, z_list)  # reuse the validation
    if state == "hierarchy":
        return (Fraction(1),) + tuple(Fraction(k, n) for k in range(1, n))
    if state == "neel":
        return tuple(Fraction(1 if k % 2 == 0 else -1) for k in range(n))
    return tuple(Fraction(str(v)) for v in floats)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _tool_version() -> str:
    try:
        from importlib.metadata import version
        return version("spinmaps")
    except Exception:
        return "unknown"


def _start_run(cfg: dict, command: str) -> Path:
    stamp = time.strftime("%Y%m%dT%H%M%S")
    base = Path(cfg["outdir"]) / f"{command}-{stamp}"
    path, k = base, 0
    while path.exists():
        k += 1
        path = Path(f"{base}-{k:02d}")
    path.mkdir(parents=True)
    _write_json(path / "manifest.json", {
        "command": command,
        "created": stamp,
        "seed": cfg.get("seed"),
        "config": cfg,
        "tool_version": _tool_version(),
    })
    return path


def _merge(defaults: dict, args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags (argparse defaults are None)."""
    merged = dict(defaults)
    if args.config is not None:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON: {exc}")
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be an object")
        for key, val in data.items():
            if key not in defaults:
                raise ConfigError(f"config.{key}: unknown field for this command")
            merged[key] = val
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def _env_for(z, focal):
    return [(0.0, 0.0, z[s]) for s in range(len(z)) if s != focal]


def _uniform_grid(t_j: float, t_max_tj: float, points_per_tj: float):
    import numpy as np
    n_pts = int(round(t_max_tj * points_per_tj)) + 1
    return np.linspace(0.0, t_max_tj * t_j, n_pts)


def _generic_h(cfg) -> float:
    from .ensemble import GENERIC_H_RATIO
    return GENERIC_H_RATIO * abs(cfg["j_perp"]) if cfg["h"] is None else cfg["h"]


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------

# ring + J_par = J_perp is the reference figure setup; the 3-ring is the
# 3-clique, so the N=3 default reproduces the complete-graph series too.
_MAPS_DEFAULTS = {
    "topology": "ring", "n": 3, "h": None, "j_perp": 1.0, "j_par": 1.0,
    "state": "hierarchy", "z": None, "z_list": None,
    "h1": 1.0, "h2": 0.5, "j": 1.0, "x2": 0.0, "y2": 0.0, "z2": None,
    "t_max_tj": 10.0, "points_per_tj": 20, "seed": 0, "outdir": "runs",
}


def _analytic_transfer(topology, n, t, j_perp, j_par, h, z, focal, pair):
    """Closed-form transfer where a family exists, else (None, reason)."""
    import numpy as np
    from . import analytic

    if topology == "xx_pairs":
        eig = analytic.xx_eigenparams(pair[0], pair[1], pair[2])
        return analytic.xx_reduced_map(t, eig, pair[3], which=1), None
    env_cyclic = [z[(focal + 1 + k) % n] for k in range(n - 1)]
    if topology == "complete" or (topology == "ring" and n == 3):
        if not 3 <= n <= 6:
            return None, f"no closed form for complete N={n}"
        p, _ = analytic.cc_params(n, t, j_perp, j_par, h, env_cyclic, focal)
        return p.transfer(), None
    if topology == "ring" and n == 4:
        p, _ = analytic.ring_params(4, t, j_perp, j_par, h, env_cyclic, focal)
        return p.transfer(), None
    if topology == "ring" and n == 5:
        scale = max(1.0, abs(j_perp), abs(j_par))
        if abs(j_par - j_perp) > 1e-12 * scale:
            return None, "ring N=5 closed form needs J_par = J_perp"
        p, _ = analytic.ring_params(5, t, j_perp, j_par, h, env_cyclic, focal)
        out = np.full((4, 4), np.nan)
        out[0] = (1.0, 0.0, 0.0, 0.0)
        out[3, 0], out[3, 3] = p.tau3, p.lambda3
        return out, None
    return None, f"no closed form for ({topology}, N={n})"


def cmd_maps(args) -> int:
    cfg = _merge(_MAPS_DEFAULTS, args)
    import numpy as np
    from .network import NetworkSpec, PairSpec, build_hamiltonian, t_scale
    from .reduced import MapExtractor, fit_pc, cp_ok
    from .ensemble import network_average

    topology, n = cfg["topology"], int(cfg["n"])
    pair = None
    if topology == "xx_pairs":
        n = 2
        if cfg["z2"] is None:
            # longest partner vector consistent with the transverse components
            planar = cfg["x2"] ** 2 + cfg["y2"] ** 2
            cfg["z2"] = math.sqrt(max(1.0 - planar, 0.0))
        env_bloch = (cfg["x2"], cfg["y2"], cfg["z2"])
        if math.hypot(math.hypot(*env_bloch[:2]), env_bloch[2]) > 1.0 + 1e-12:
            raise ConfigError("state: partner Bloch vector longer than 1")
        pair = (cfg["h1"], cfg["h2"], cfg["j"], env_bloch)
        spec = NetworkSpec(topology="xx_pairs", n=2,
                           pairs=(PairSpec(h1=cfg["h1"], h2=cfg["h2"], j=cfg["j"]),))
        h_field = (cfg["h1"] + cfg["h2"]) / 2.0  # enters analytic frame only
        t_j = t_scale(cfg["j"])
        z = (0.0, env_bloch[2])
        sites = [0]
        envs = {0: [env_bloch]}
    else:
        h_field = _generic_h(cfg)
        spec = NetworkSpec(topology=topology, n=n, h=h_field,
                           j_perp=cfg["j_perp"], j_par=cfg["j_par"])
        t_j = t_scale(cfg["j_perp"])
        z = preset_state(n, cfg["state"], cfg["z"], cfg["z_list"])
        sites = list(range(n))
        envs = {s: _env_for(z, s) for s in sites}

    times = _uniform_grid(t_j, cfg["t_max_tj"], cfg["points_per_tj"])
    h_mat = build_hamiltonian(spec)
    extractors = {s: MapExtractor(h_mat, s, envs[s]) for s in sites}

    rows = []
    max_resid = 0.0
    analytic_err = 0.0
    analytic_reason = None
    have_analytic = True
    for t in times:
        per_site = []
        for s in sites:
            tr = extractors[s].transfer(t)
            per_site.append(tr)
            p = fit_pc(tr)
            max_resid = max(max_resid, p.residual)
            if not cp_ok(p.lambda1, p.tau3, p.lambda3, tol=1e-9):
                raise InvariantError(
                    f"CP violation at t={t/t_j:.3f} t_J, site {s}: "
                    f"(l1={p.lambda1}, tau3={p.tau3}, l3={p.lambda3})")
            rows.append((_fmt(t / t_j), str(s), _fmt(p.lambda1), _fmt(p.theta),
                         _fmt(p.lambda3), _fmt(p.tau3), _fmt(p.residual)))
            if have_analytic:
                ana, reason = _analytic_transfer(topology, n, t, cfg["j_perp"],
                                                 cfg["j_par"], h_field, z, s, pair)
                if ana is None:
                    have_analytic = False
                    analytic_reason = reason
                else:
                    mask = ~np.isnan(ana)
                    analytic_err = max(analytic_err,
                                       float(np.abs(ana - tr)[mask].max()))
        avg = network_average(per_site)
        pa = fit_pc(avg)
        if not cp_ok(pa.lambda1, pa.tau3, pa.lambda3, tol=1e-9):
            raise InvariantError(f"CP violation in network average at t={t/t_j:.3f} t_J")
        rows.append((_fmt(t / t_j), "avg", _fmt(pa.lambda1), _fmt(pa.theta),
                     _fmt(pa.lambda3), _fmt(pa.tau3), _fmt(pa.residual)))

    if not have_analytic:
        print(f"warning: running numeric-only ({analytic_reason})", file=sys.stderr)

    out = _start_run(cfg, "maps")
    _write_csv(out / "data.csv",
               ("t_over_tj", "site", "lambda1", "theta", "lambda3", "tau3", "residual"),
               rows)
    _write_json(out / "diagnostics.json", {
        "phase_covariant": bool(max_resid < 1e-8),
        "max_residual": max_resid,
        "analytic_check": {"max_abs_err": analytic_err} if have_analytic else None,
        "analytic_skip_reason": analytic_reason,
        "t_j": t_j,
    })
    print(out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# steady
# ---------------------------------------------------------------------------

_STEADY_DEFAULTS = {
    "topology": "complete", "n": 3, "h": None, "j_perp": 1.0, "j_par": 1.0,
    "state": "hierarchy", "z": None, "z_list": None,
    "horizon_tj": 200.0, "points_per_tj": 20, "tol": 5e-3,
    "seed": 0, "outdir": "runs",
}


def _steady_table_key(topology: str, n: int, j_perp: float, j_par: float):
    """Map the run to a steady-table entry or raise UnsupportedError."""
    if topology == "complete" and 3 <= n <= 6:
        return "complete", n
    if topology == "ring":
        if n == 3:
            return "complete", 3  # the 3-ring is the 3-clique
        if n == 4:
            return "ring", 4
        if n == 5:
            scale = max(1.0, abs(j_perp), abs(j_par))
            if abs(j_par - j_perp) > 1e-12 * scale:
                raise UnsupportedError(
                    "ring N=5 steady table holds at the isotropic point only")
            return "ring", 5
    raise UnsupportedError(f"no steady table for ({topology}, N={n})")


def _running_network_average(spec, z, times):
    """Running time average of the site-averaged transfer on a uniform grid."""
    import numpy as np
    from .network import build_hamiltonian
    from .qlinalg import HermitianEvolver
    from .reduced import transfer_from_unitary
    from .ensemble import network_average, time_average

    n = spec.n
    ev = HermitianEvolver(build_hamiltonian(spec))
    envs = [_env_for(z, s) for s in range(n)]
    stack = np.empty((len(times), 4, 4))
    for k, t in enumerate(times):
        u = ev.unitary(t)
        stack[k] = network_average(
            [transfer_from_unitary(u, s, envs[s]) for s in range(n)])
    return stack, time_average(times, stack)


def cmd_steady(args) -> int:
    cfg = _merge(_STEADY_DEFAULTS, args)
    import numpy as np
    from .network import NetworkSpec, t_scale
    from .ensemble import steady_channel

    topology, n = cfg["topology"], int(cfg["n"])
    table_topology, table_n = _steady_table_key(topology, n, cfg["j_perp"], cfg["j_par"])
    z = preset_state(n, cfg["state"], cfg["z"], cfg["z_list"])
    z_exact = rational_state(n, cfg["state"], cfg["z"], cfg["z_list"])
    steady = steady_channel(table_n, table_topology, z_exact)

    h_field = _generic_h(cfg)
    spec = NetworkSpec(topology=topology, n=n, h=h_field,
                       j_perp=cfg["j_perp"], j_par=cfg["j_par"])
    t_j = t_scale(cfg["j_perp"])
    times = _uniform_grid(t_j, cfg["horizon_tj"], cfg["points_per_tj"])
    _, running = _running_network_average(spec, z, times)

    num_l3 = float(running[-1, 3, 3])
    num_t3 = float(running[-1, 3, 0])
    num_l1 = float(np.hypot(running[-1, 1, 1], running[-1, 2, 1]))
    diff_l3 = abs(num_l3 - steady.lambda3)
    diff_t3 = abs(num_t3 - steady.tau3)

    rows = [(_fmt(t / t_j), _fmt(running[k, 3, 3]), _fmt(running[k, 3, 0]),
             _fmt(np.hypot(running[k, 1, 1], running[k, 2, 1])))
            for k, t in enumerate(times)]
    out = _start_run(cfg, "steady")
    _write_csv(out / "data.csv",
               ("t_over_tj", "lambda3_avg", "tau3_avg", "lambda1_avg"), rows)
    diagnostics = {
        "exact": {
            "lambda3": steady.lambda3, "tau3": steady.tau3,
            "lambda3_fraction": str(steady.lambda3_exact),
            "tau3_fraction": str(steady.tau3_exact),
            "coeffs": {str(k): str(v) for k, v in steady.coeffs.items()},
        },
        "numeric": {"lambda3": num_l3, "tau3": num_t3, "lambda1": num_l1},
        "abs_diff": {"lambda3": diff_l3, "tau3": diff_t3},
        "constraint_ok": steady.constraint_ok(),
        "horizon_tj": cfg["horizon_tj"],
        "tol": cfg["tol"],
        "pass": bool(diff_l3 < cfg["tol"] and diff_t3 < cfg["tol"]),
    }
    _write_json(out / "diagnostics.json", diagnostics)
    print(out)
    if not diagnostics["pass"]:
        print(f"error: horizon too short: |diff| = "
              f"({diff_l3:.2e}, {diff_t3:.2e}) > tol {cfg['tol']}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


# ---------------------------------------------------------------------------
# fluct
# ---------------------------------------------------------------------------

_FLUCT_DEFAULTS = {
    "topology": "complete", "n": 4, "h": None, "j_perp": 1.0, "j_par": 1.0,
    "state": "uniform", "z": 0.2, "z_list": None,
    "horizon_tj": 200.0, "points_per_tj": 20, "onset_tj": 20.0,
    "seed": 0, "outdir": "runs",
}


def cmd_fluct(args) -> int:
    cfg = _merge(_FLUCT_DEFAULTS, args)
    from .network import NetworkSpec, t_scale
    from .ensemble import steady_channel, fluctuations

    topology, n = cfg["topology"], int(cfg["n"])
    table_topology, table_n = _steady_table_key(topology, n, cfg["j_perp"], cfg["j_par"])
    z = preset_state(n, cfg["state"], cfg["z"], cfg["z_list"])
    z_exact = rational_state(n, cfg["state"], cfg["z"], cfg["z_list"])
    steady = steady_channel(table_n, table_topology, z_exact)

    h_field = _generic_h(cfg)
    spec = NetworkSpec(topology=topology, n=n, h=h_field,
                       j_perp=cfg["j_perp"], j_par=cfg["j_par"])
    t_j = t_scale(cfg["j_perp"])
    times = _uniform_grid(t_j, cfg["horizon_tj"], cfg["points_per_tj"])
    _, running = _running_network_average(spec, z, times)
    series = fluctuations(times, running, steady, t_j, onset=cfg["onset_tj"])

    rows = [(_fmt(series.t_over_tj[k]), _fmt(series.delta_lambda3[k]),
             _fmt(series.delta_tau3[k]))
            for k in range(series.t_over_tj.size)]
    out = _start_run(cfg, "fluct")
    _write_csv(out / "data.csv", ("t_over_tj", "delta_lambda3", "delta_tau3"), rows)
    _write_json(out / "diagnostics.json", {
        "c_lambda3": series.c_lambda3,
        "c_tau3": series.c_tau3,
        "lambda3_normalized": series.lambda3_normalized,
        "tau3_normalized": series.tau3_normalized,
        "onset_tj": series.onset,
        "n": series.n,
        "steady": {"lambda3": steady.lambda3, "tau3": steady.tau3},
    })
    print(out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# disorder
# ---------------------------------------------------------------------------

_DISORDER_DEFAULTS = {
    "b": 1.0, "omega": 1.0, "sigma_h": 1.0, "sigma_omega": 1.0,
    "phi_dist": "gaussian", "varphi": 3.0, "sigma_phi": None, "a_phi": None,
    "z2": 1.0, "t_max": 2.0, "steps": 21, "n_samples": 10000,
    "seed": 0, "outdir": "runs",
}


def _disorder_spec(cfg):
    from .disorder import DisorderSpec
    common = dict(B=cfg["b"], Omega=cfg["omega"],
                  sigma_h=cfg["sigma_h"], sigma_omega=cfg["sigma_omega"])
    if cfg["phi_dist"] == "gaussian":
        if cfg["sigma_phi"] is not None:
            return DisorderSpec(phi_dist="gaussian", sigma_phi=cfg["sigma_phi"], **common)
        return DisorderSpec.from_varphi(varphi=cfg["varphi"], **common)
    if cfg["phi_dist"] == "trunc_tanh":
        if cfg["a_phi"] is None:
            raise ConfigError("a_phi: trunc_tanh family needs --a-phi")
        return DisorderSpec(phi_dist="trunc_tanh", a_phi=cfg["a_phi"], **common)
    raise ConfigError(f"phi_dist: unknown family {cfg['phi_dist']!r}")


def cmd_disorder(args) -> int:
    cfg = _merge(_DISORDER_DEFAULTS, args)
    import numpy as np
    from .disorder import (mc_disorder_map, closedform_disorder_components,
                           sample_pair, max_tau3_trunc_tanh, _sample_rng)

    spec = _disorder_spec(cfg)
    gaussian = spec.phi_dist == "gaussian"
    z2 = float(cfg["z2"])
    times = np.linspace(0.0, cfg["t_max"], int(cfg["steps"]))
    slots = {"xx0": (1, 1), "yx0": (2, 1), "z0z": (3, 0), "zz0": (3, 3)}

    rows = []
    flagged = []
    for t in times:
        mean, stderr = mc_disorder_map(spec, float(t), (0.0, 0.0, z2),
                                       int(cfg["n_samples"]), int(cfg["seed"]))
        closed = closedform_disorder_components(spec, float(t)) if gaussian else None
        for name, (i, j) in slots.items():
            mc, err = float(mean[i, j]), float(stderr[i, j])
            if name == "z0z":
                if z2 == 0.0:
                    continue  # partner unpolarized: the z-shift column is dark
                mc, err = mc / z2, err / abs(z2)
            cf = "" if closed is None else _fmt(closed[name])
            rows.append((_fmt(t), name, _fmt(mc), _fmt(err), cf))
            if closed is not None and err > 0 and abs(closed[name] - mc) > 5.0 * err:
                flagged.append({"t": float(t), "component": name,
                                "closed_form": closed[name],
                                "mc_mean": mc, "mc_stderr": err})

    diagnostics = {"flagged": flagged, "phi_dist": spec.phi_dist}
    if not gaussian:
        # headroom report: how close this a_phi gets to the tau3 ceiling
        sin2 = np.array([math.sin(sample_pair(spec, _sample_rng(cfg["seed"], i)).phi12) ** 2
                         for i in range(int(cfg["n_samples"]))])
        diagnostics["max_tau3_ceiling"] = max_tau3_trunc_tanh()
        diagnostics["mc_sin2_phi"] = float(sin2.mean())
        diagnostics["mc_sin2_phi_stderr"] = float(sin2.std(ddof=1) / math.sqrt(sin2.size))

    out = _start_run(cfg, "disorder")
    _write_csv(out / "data.csv",
               ("t", "component", "mc_mean", "mc_stderr", "closed_form"), rows)
    _write_json(out / "diagnostics.json", diagnostics)
    print(out)
    if flagged:
        print(f"error: {len(flagged)} closed-form/MC disagreements beyond "
              f"5 stderr (see diagnostics.json)", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------

_MEASURE_DEFAULTS = {
    "n": 3, "preset": "cc", "state": "hierarchy", "z": None, "z_list": None,
    "c": 1.0, "t_max_tj": 60.0, "steps": 120, "tau3_rule": "symmetric",
    "overlay": True, "points_per_tj": 20, "scatter_samples": 0,
    "h": None, "j_perp": 1.0, "j_par": 0.0, "seed": 0, "outdir": "runs",
}


def cmd_measure(args) -> int:
    cfg = _merge(_MEASURE_DEFAULTS, args)
    import numpy as np
    from .network import NetworkSpec, t_scale
    from .ensemble import steady_channel
    from .measure import (MeasureSpec, time_grid, trajectory_sample, cp_contains,
                          uniform_sample, broken_uniform_sample,
                          eigenvalues_pc, eigenvalues_broken)

    n = int(cfg["n"])
    topology = {"cc": "complete", "ring": "ring"}.get(cfg["preset"])
    if topology is None:
        raise ConfigError(f"preset: unknown preset {cfg['preset']!r} (cc or ring)")
    table_topology, table_n = _steady_table_key(topology, n, cfg["j_perp"], cfg["j_par"])
    z = preset_state(n, cfg["state"], cfg["z"], cfg["z_list"])
    z_exact = rational_state(n, cfg["state"], cfg["z"], cfg["z_list"])
    steady = steady_channel(table_n, table_topology, z_exact)

    times_tj = time_grid(1.0, cfg["t_max_tj"], int(cfg["steps"]))
    mspec = MeasureSpec.from_steady(steady, t_ref=1.0, times=tuple(times_tj),
                                    C=cfg["c"], tau3_rule=cfg["tau3_rule"])
    traj = trajectory_sample(mspec, int(cfg["seed"]))
    for p in traj:
        if not cp_contains(p.lambda1, p.tau3, p.lambda3):
            raise InvariantError("trajectory emitted a non-CP triple")

    header = ["t_over_tref", "lambda3", "tau3", "lambda1"]
    columns = [[_fmt(t) for t in times_tj],
               [_fmt(p.lambda3) for p in traj],
               [_fmt(p.tau3) for p in traj],
               [_fmt(p.lambda1) for p in traj]]
    if cfg["overlay"]:
        h_field = _generic_h(cfg)
        spec = NetworkSpec(topology=topology, n=n, h=h_field,
                           j_perp=cfg["j_perp"], j_par=cfg["j_par"])
        t_j = t_scale(cfg["j_perp"])
        grid = _uniform_grid(t_j, cfg["t_max_tj"], cfg["points_per_tj"])
        _, running = _running_network_average(spec, z, grid)
        l3 = np.interp(times_tj * t_j, grid, running[:, 3, 3])
        t3 = np.interp(times_tj * t_j, grid, running[:, 3, 0])
        header += ["lambda3_timeavg", "tau3_timeavg"]
        columns += [[_fmt(v) for v in l3], [_fmt(v) for v in t3]]
    out = _start_run(cfg, "measure")
    _write_csv(out / "data.csv", header, list(zip(*columns)))

    if int(cfg["scatter_samples"]) > 0:
        rng = np.random.default_rng(int(cfg["seed"]))
        scatter = []
        for _ in range(int(cfg["scatter_samples"])):
            evs = eigenvalues_pc(uniform_sample(rng))
            for which, ev in zip(("rot+", "rot-", "l3"), evs[1:]):
                scatter.append(("pc", which, _fmt(ev.real), _fmt(ev.imag)))
            evb = eigenvalues_broken(broken_uniform_sample(rng))
            for which, ev in zip(("mu+", "mu-", "l3"), evb[1:]):
                scatter.append(("broken", which, _fmt(ev.real), _fmt(ev.imag)))
        _write_csv(out / "eigenvalues.csv", ("family", "which", "re", "im"), scatter)
    _write_json(out / "diagnostics.json", {
        "mu_lambda3": mspec.mu_lambda3, "mu_tau3": mspec.mu_tau3,
        "sigma_first": mspec.sigma(times_tj[0]),
        "sigma_last": mspec.sigma(times_tj[-1]),
        "all_cp": True,
    })
    print(out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# volume
# ---------------------------------------------------------------------------

_VOLUME_DEFAULTS = {"samples": 10**6, "seed": 0, "outdir": "runs"}


def cmd_volume(args) -> int:
    cfg = _merge(_VOLUME_DEFAULTS, args)
    from .measure import volume_mc

    v = volume_mc(int(cfg["samples"]), int(cfg["seed"]))
    exact = {"total": 16.0 / 9.0, "negative": math.pi / 6.0,
             "positive": 16.0 / 9.0 - math.pi / 6.0}
    rows = []
    pulls = {}
    for region in ("total", "negative", "positive"):
        est = getattr(v, region)
        err = getattr(v, region + "_err")
        pulls[region] = (est - exact[region]) / err if err > 0 else 0.0
        rows.append((region, _fmt(est), _fmt(err), _fmt(exact[region]),
                     _fmt(pulls[region])))
    out = _start_run(cfg, "volume")
    _write_csv(out / "data.csv", ("region", "estimate", "stderr", "exact", "pull"), rows)
    _write_json(out / "diagnostics.json", {
        "estimate": v.as_dict(),
        "pulls": pulls,
        "pass": bool(all(abs(p) < 3.0 for p in pulls.values())),
    })
    print(out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# quench
# ---------------------------------------------------------------------------

_QUENCH_DEFAULTS = {
    "n_cl": 400, "n": 3, "h": None, "j": 1.0,
    "state": "uniform", "z": 1.0, "z_list": None,
    "window_tj": 50.0, "t_eval_tj": 100.0, "points_per_tj": 20,
    "schedule": "staggered",  # or "random": iid uniform over the window
    "seed": 0, "outdir": "runs",
}


def cmd_quench(args) -> int:
    cfg = _merge(_QUENCH_DEFAULTS, args)
    import numpy as np
    from .network import NetworkSpec, QuenchSchedule, build_hamiltonian, t_scale
    from .qlinalg import HermitianEvolver
    from .reduced import transfer_from_unitary
    from .ensemble import GENERIC_H_RATIO, quench_demo, time_average

    n, n_cl, j = int(cfg["n"]), int(cfg["n_cl"]), cfg["j"]
    h = GENERIC_H_RATIO * 2.0 * j if cfg["h"] is None else cfg["h"]
    t_j = t_scale(2.0 * j)
    z = preset_state(n, cfg["state"], cfg["z"], cfg["z_list"])
    env_z = [z[s] for s in range(1, n)]  # focal is site 0

    if cfg["schedule"] == "staggered":
        schedule = np.linspace(0.0, cfg["window_tj"] * t_j, n_cl)
    elif cfg["schedule"] == "random":
        rng = np.random.default_rng(int(cfg["seed"]))
        schedule = rng.uniform(0.0, cfg["window_tj"] * t_j, n_cl)
    else:
        raise ConfigError("schedule: expected 'staggered' or 'random'")
    t_eval = cfg["t_eval_tj"] * t_j
    cluster_avg = quench_demo(n_cl, n=n, schedule=schedule, t_eval=t_eval,
                              h=h, j=j, env_z=env_z)

    # reference: running time average of one always-coupled cluster
    spec = NetworkSpec(topology="quench", n=n, h=h, j_perp=j,
                       quench=QuenchSchedule(n_cl=1, t_on=(0.0,)))
    ev = HermitianEvolver(build_hamiltonian(spec, t=0.0))
    env = [(0.0, 0.0, v) for v in env_z]
    grid = _uniform_grid(t_j, cfg["t_eval_tj"], cfg["points_per_tj"])
    stack = np.empty((grid.size, 4, 4))
    for k, t in enumerate(grid):
        stack[k] = transfer_from_unitary(ev.unitary(t), 0, env)
    reference = time_average(grid, stack)[-1]

    diff = np.abs(cluster_avg - reference)
    rows = [(str(i), str(jj), _fmt(cluster_avg[i, jj]), _fmt(reference[i, jj]),
             _fmt(diff[i, jj])) for i in range(4) for jj in range(4)]
    out = _start_run(cfg, "quench")
    _write_csv(out / "data.csv",
               ("row", "col", "cluster_avg", "time_avg", "abs_diff"), rows)
    _write_json(out / "diagnostics.json", {
        "max_abs_diff": float(diff.max()),
        "n_cl": n_cl, "window_tj": cfg["window_tj"], "t_eval_tj": cfg["t_eval_tj"],
        "schedule": cfg["schedule"], "t_j": t_j,
    })
    print(out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------

def _add_common(sp):
    sp.add_argument("--config", help="JSON config file; flags override it")
    sp.add_argument("--outdir", help="output root (default runs/)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--threads", type=int, help="cap BLAS worker threads")


def _add_network_flags(sp, states=True):
    sp.add_argument("--topology", choices=("complete", "ring", "xx_pairs"))
    sp.add_argument("--n", type=int)
    sp.add_argument("--h", type=float)
    sp.add_argument("--j-perp", dest="j_perp", type=float)
    sp.add_argument("--j-par", dest="j_par", type=float)
    if states:
        sp.add_argument("--state", choices=_STATES)
        sp.add_argument("--z", type=float)
        sp.add_argument("--z-list", dest="z_list",
                        type=lambda s: [float(v) for v in s.split(",")])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinmaps",
        description="ensembles of reduced qubit maps from small spin networks")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("maps", help="per-site map parameter time series")
    _add_network_flags(sp)
    sp.add_argument("--h1", type=float)
    sp.add_argument("--h2", type=float)
    sp.add_argument("--j", type=float)
    sp.add_argument("--x2", type=float)
    sp.add_argument("--y2", type=float)
    sp.add_argument("--z2", type=float)
    sp.add_argument("--t-max-tj", dest="t_max_tj", type=float)
    sp.add_argument("--points-per-tj", dest="points_per_tj", type=float)
    _add_common(sp)
    sp.set_defaults(func=cmd_maps)

    sp = sub.add_parser("steady", help="long-time averages vs exact tables")
    _add_network_flags(sp)
    sp.add_argument("--horizon-tj", dest="horizon_tj", type=float)
    sp.add_argument("--points-per-tj", dest="points_per_tj", type=float)
    sp.add_argument("--tol", type=float)
    _add_common(sp)
    sp.set_defaults(func=cmd_steady)

    sp = sub.add_parser("fluct", help="running-average fluctuation constants")
    _add_network_flags(sp)
    sp.add_argument("--horizon-tj", dest="horizon_tj", type=float)
    sp.add_argument("--points-per-tj", dest="points_per_tj", type=float)
    sp.add_argument("--onset-tj", dest="onset_tj", type=float)
    _add_common(sp)
    sp.set_defaults(func=cmd_fluct)

    sp = sub.add_parser("disorder", help="disorder-averaged pair maps, MC vs closed form")
    sp.add_argument("--b", type=float)
    sp.add_argument("--omega", type=float)
    sp.add_argument("--sigma-h", dest="sigma_h", type=float)
    sp.add_argument("--sigma-omega", dest="sigma_omega", type=float)
    sp.add_argument("--phi-dist", dest="phi_dist", choices=("gaussian", "trunc_tanh"))
    sp.add_argument("--varphi", type=float)
    sp.add_argument("--sigma-phi", dest="sigma_phi", type=float)
    sp.add_argument("--a-phi", dest="a_phi", type=float)
    sp.add_argument("--z2", type=float)
    sp.add_argument("--t-max", dest="t_max", type=float)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--n-samples", dest="n_samples", type=int)
    _add_common(sp)
    sp.set_defaults(func=cmd_disorder)

    sp = sub.add_parser("measure", help="trajectory measure over CP channel params")
    sp.add_argument("--n", type=int)
    sp.add_argument("--preset", choices=("cc", "ring"))
    sp.add_argument("--state", choices=_STATES)
    sp.add_argument("--z", type=float)
    sp.add_argument("--z-list", dest="z_list",
                    type=lambda s: [float(v) for v in s.split(",")])
    sp.add_argument("--c", type=float)
    sp.add_argument("--t-max-tj", dest="t_max_tj", type=float)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--tau3-rule", dest="tau3_rule", choices=("symmetric", "signed"))
    sp.add_argument("--overlay", action=argparse.BooleanOptionalAction)
    sp.add_argument("--points-per-tj", dest="points_per_tj", type=float)
    sp.add_argument("--scatter-samples", dest="scatter_samples", type=int)
    sp.add_argument("--h", type=float)
    sp.add_argument("--j-perp", dest="j_perp", type=float)
    sp.add_argument("--j-par", dest="j_par", type=float)
    _add_common(sp)
    sp.set_defaults(func=cmd_measure)

    sp = sub.add_parser("volume", help="MC volume of the CP region")
    sp.add_argument("--samples", type=int)
    _add_common(sp)
    sp.set_defaults(func=cmd_volume)

    sp = sub.add_parser("quench", help="staggered-quench cluster average demo")
    sp.add_argument("--n-cl", dest="n_cl", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--h", type=float)
    sp.add_argument("--j", type=float)
    sp.add_argument("--state", choices=_STATES)
    sp.add_argument("--z", type=float)
    sp.add_argument("--z-list", dest="z_list",
                    type=lambda s: [float(v) for v in s.split(",")])
    sp.add_argument("--window-tj", dest="window_tj", type=float)
    sp.add_argument("--t-eval-tj", dest="t_eval_tj", type=float)
    sp.add_argument("--points-per-tj", dest="points_per_tj", type=float)
    sp.add_argument("--schedule", choices=("staggered", "random"))
    _add_common(sp)
    sp.set_defaults(func=cmd_quench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None):
        # effective only if numpy is not loaded yet in this process
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        return args.func(args)
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
