"""Scenario execution: trajectories, engine comparison, sweeps, threshold scans."""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ..errors import IntegrityError, UsageError
from ..lindblad import (
    DissipatorMatrix,
    LambdaSchedule,
    LindbladModel,
    dephasing_closed_form,
    dephasing_model,
    dephasing_time_dependent,
    evolve_trajectory,
    lindblad_concurrence_rate,
)
from ..micro import (
    GravitationalSpec,
    brute_force_reduced_state,
    env_moments,
    gravitational_model,
    isolated_state,
    random_micro_model,
    reduced_state,
)
from ..observables import (
    concurrence,
    concurrence_growth_rate,
    fidelity,
    fit_power_law,
    purity,
    threshold_scan,
)
from ..qcore import PLUS_PLUS, check_density_matrix
from .config import ScenarioConfig
from .svgplot import emit_plot
from .tables import TRAJECTORY_COLUMNS, Trajectory, provenance, read_table, write_table, write_trajectory

SLOPE_TOL = 0.01
EXPONENT_TOL = 0.05


# ---------------------------------------------------------------- models

def build_micro(config: ScenarioConfig):
    """Random or gravitational microscopic model plus a dict of extra header fields."""
    if config.scenario == "micro_gravitational" or config["gravity"] is not None:
        spec = gravity_spec(config)
        model, sa, sb = gravitational_model(spec)
        return model, {"sigmaA2_predicted": sa, "sigmaB2_predicted": sb, "omega": model.omega}
    model = random_micro_model(config["n_env"], config["omega"], config["seed"], config["coupling_scale"])
    return model, {"omega": model.omega}


def gravity_spec(config: ScenarioConfig, n_env=None) -> GravitationalSpec:
    g = config["gravity"] or {}
    defaults = {"G": 1.0, "m1": 2.0, "m2": 1.0, "d_ab": 1.0, "d_range": [1.0, 5.0]}
    g = {**defaults, **g}
    n = config["n_env"] if n_env is None else n_env
    dA, dB = g.get("dA"), g.get("dB")
    if dA is None or dB is None or n_env is not None:
        lo, hi = g["d_range"]
        if not 0 < lo <= hi:
            raise UsageError("gravity.d_range must satisfy 0 < low <= high")
        rng = np.random.default_rng([config["seed"], n])
        dA, dB = rng.uniform(lo, hi, size=n).tolist(), rng.uniform(lo, hi, size=n).tolist()
    try:
        return GravitationalSpec(g["G"], g["m1"], g["m2"], dA, dB, g["d_ab"])
    except ValueError as exc:
        raise UsageError(f"gravity: {exc}") from None


def micro_sigma(model) -> tuple[float, object]:
    m = env_moments(model)
    return float(np.sqrt(0.5 * (m.sigmaA2 + m.sigmaB2))), m


def lindblad_model(config: ScenarioConfig, lam=None, lam_tilde=None) -> LindbladModel:
    d = DissipatorMatrix.dephasing(1.0)
    if lam_tilde is not None:
        sched = LambdaSchedule.linear(lam_tilde)
    else:
        sched = LambdaSchedule.constant(lam)
    return LindbladModel(config["omega"], d, d, sched, tuple(map(float, config["local_terms"])))


# ---------------------------------------------------------------- grids

def time_grid(config: ScenarioConfig, scale: float) -> np.ndarray:
    tg = config["time_grid"]
    scale = scale if scale > 0 else 1.0
    t_max = tg["t_max"] if tg["t_max"] is not None else 3.0 / scale
    n = tg["points"]
    if tg["spacing"] == "log":
        t_min = tg["t_min"] if tg["t_min"] is not None else t_max * 1e-3
        return np.geomspace(t_min, t_max, n)
    t_min = tg["t_min"] or 0.0
    return np.linspace(t_min, t_max, n)


def fit_grid(config: ScenarioConfig, scale: float) -> np.ndarray:
    fg = config["fit_grid"]
    scale = scale if scale > 0 else 1.0
    lo, hi = fg["t_min"] / scale, fg["t_max"] / scale
    n = max(5, int(round(np.log10(hi / lo) * fg["per_decade"])) + 1)
    return np.geomspace(lo, hi, n)


# ---------------------------------------------------------------- records

def state_row(rho, omega, t, ref=None):
    """Trajectory row for ``rho``; coherences are reported with the coherent phase removed."""
    ph = np.exp(-2j * omega * t)
    ga, gb = 4 * rho[0, 2] * ph, 4 * rho[0, 1] * ph
    lp, lm = 4 * rho[0, 3], 4 * rho[1, 2]
    fid = fidelity(rho, ref) if ref is not None else float("nan")
    return [t, concurrence(rho), purity(rho), fid, abs(ga), float(np.angle(ga)), abs(gb), abs(lp), abs(lm)]


def trajectory_from_states(times, states, omega, header, refs=None) -> Trajectory:
    rows = [state_row(rho, omega, t, None if refs is None else refs[i])
            for i, (t, rho) in enumerate(zip(times, states))]
    arr = np.array(rows, dtype=float).reshape(len(rows), len(TRAJECTORY_COLUMNS))
    cols = {name: arr[:, i] for i, name in enumerate(TRAJECTORY_COLUMNS) if i > 0}
    return Trajectory(np.asarray(times, dtype=float), cols, header)


def _self_check(label, a, b, tol):
    err = float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if len(a) else 0.0
    if err > tol:
        raise IntegrityError(f"self-check failed: {label} deviation {err:.3g} > {tol:.3g}")
    return err


# ---------------------------------------------------------------- engines

def _states_micro(model, times, tol, self_check):
    states = [check_density_matrix(reduced_state(model, t), tol) for t in times]
    extra = {}
    if self_check:
        oracle = [brute_force_reduced_state(model, t) for t in times]
        extra["self_check_max_dev"] = _self_check("closed form vs brute force", states, oracle, 1e-10)
    return states, extra


def _states_lindblad(model, times, tol, self_check):
    states = evolve_trajectory(model, PLUS_PLUS, times, "exponential", tol=tol)
    extra = {}
    if self_check:
        closed = [dephasing_closed_form(model.omega, model.schedule.lam, t) for t in times]
        if model.local == (0.0, 0.0):
            extra["self_check_max_dev"] = _self_check("exponential vs closed form", states, closed, 1e-9)
    return list(states), extra


def _states_tdep(model, times, tol, self_check):
    lt = model.schedule.lam_tilde
    states = [check_density_matrix(dephasing_time_dependent(model.omega, lt, t), tol) for t in times]
    extra = {}
    if self_check:
        stepped = evolve_trajectory(model, PLUS_PLUS, times, "stepped", tol=tol)
        extra["self_check_max_dev"] = _self_check("closed form vs stepped", states, stepped, 1e-8)
    return states, extra


def simulate(config: ScenarioConfig):
    """Compute the trajectory for a single-engine scenario (no files written)."""
    sc = config.scenario
    tol = config["tolerance"]
    check = config["self_check"]
    omega = config["omega"]
    if sc == "isolated":
        times = time_grid(config, abs(omega))
        states = [isolated_state(omega, t) for t in times]
        head = provenance(config, omega=omega)
        return trajectory_from_states(times, states, omega, head)
    if sc in ("micro_random", "micro_gravitational"):
        model, info = build_micro(config)
        sigma, mom = micro_sigma(model)
        times = time_grid(config, max(abs(model.omega), sigma))
        states, extra = _states_micro(model, times, tol, check)
        refs = [isolated_state(model.omega, t) for t in times]
        head = provenance(config, **info, M=model.M, sigmaA2=mom.sigmaA2, sigmaB2=mom.sigmaB2,
                          sigmaC2=mom.sigmaC2, fidelity_ref="isolated pair", **extra)
        return trajectory_from_states(times, states, model.omega, head, refs)
    if sc == "lindblad":
        lam = config["lambda"]
        model = lindblad_model(config, lam=lam)
        times = time_grid(config, max(abs(omega), lam))
        states, extra = _states_lindblad(model, times, tol, check)
        refs = [isolated_state(omega, t) for t in times]
        head = provenance(config, omega=omega, **{"lambda": lam},
                          analytic_rate=lindblad_concurrence_rate(omega, lam),
                          fidelity_ref="isolated pair", **extra)
        return trajectory_from_states(times, states, omega, head, refs)
    if sc == "lindblad_tdep":
        lt = config["lambda_tilde"]
        model = lindblad_model(config, lam_tilde=lt)
        times = time_grid(config, max(abs(omega), np.sqrt(lt)))
        states, extra = _states_tdep(model, times, tol, check)
        refs = [isolated_state(omega, t) for t in times]
        head = provenance(config, omega=omega, lambda_tilde=lt, fidelity_ref="isolated pair", **extra)
        return trajectory_from_states(times, states, omega, head, refs)
    raise UsageError(f"scenario {sc!r} is not a trajectory scenario")


def _write_outputs(config, traj, stem=None):
    out = config.out_dir
    stem = stem or config.stem
    files = [write_trajectory(out / f"{stem}.csv", traj)]
    if config["output"]["plot"]:
        files.append(emit_plot(traj, out / f"{stem}.svg", loglog=config["output"]["loglog"],
                               title=config.scenario))
    return files


def run_scenario(config: ScenarioConfig):
    """Run ``config`` and write its files; returns ``(result, files)``."""
    if config.scenario == "compare":
        return compare(config)
    if config.scenario == "threshold_scan":
        return scan(config)
    if config["sweep"] is not None:
        return sweep(config)
    traj = simulate(config)
    return traj, _write_outputs(config, traj)


# ---------------------------------------------------------------- compare

def _deficit_fit(times, states):
    y = np.array([1.0 - purity(r) for r in states])
    fit = fit_power_law(times, y)
    return {"exponent": fit.exponent, "prefactor": fit.prefactor, "r_squared": fit.r_squared,
            "window": list(fit.window), "samples": fit.n_samples}


def _claim(cid, text, value, expected, tol, relative=True):
    if relative and expected != 0:
        ok = abs(value - expected) <= tol * abs(expected)
    else:
        ok = abs(value - expected) <= (tol if not relative else 1e-8)
    return {"id": cid, "claim": text, "value": value, "expected": expected,
            "tolerance": tol, "relative": relative, "pass": bool(ok)}


def compare(config: ScenarioConfig):
    """Run the microscopic engine and both Lindblad variants on shared grids.

    ``lambda`` defaults to ``lambda_factor * sigma`` and ``lambda_tilde`` to
    ``lambda_tilde_factor * sigma^2`` with ``sigma^2 = (sigmaA2 + sigmaB2) / 2``;
    explicit values in the config take precedence.  The rule used is
    recorded in the report.
    """
    model, info = build_micro(config)
    omega = model.omega
    sigma, mom = micro_sigma(model)
    cal = config["calibration"]
    if config["lambda"] is not None:
        lam, lam_rule = float(config["lambda"]), "explicit"
    else:
        lam, lam_rule = cal["lambda_factor"] * sigma, f"lambda = {cal['lambda_factor']!r} * sigma"
    if config["lambda_tilde"] is not None:
        lt, lt_rule = float(config["lambda_tilde"]), "explicit"
    else:
        lt = cal["lambda_tilde_factor"] * sigma**2
        lt_rule = f"lambda_tilde = {cal['lambda_tilde_factor']!r} * sigma^2"
    lind = lindblad_model(config, lam=lam)
    tdep = lindblad_model(config, lam_tilde=lt)
    tol = config["tolerance"]
    scale = max(abs(omega), lam, sigma)

    def run_all(times):
        micro_states, _ = _states_micro(model, times, tol, False)
        lind_states, _ = _states_lindblad(lind, times, tol, False)
        tdep_states, _ = _states_tdep(tdep, times, tol, False)
        return micro_states, lind_states, tdep_states

    times = time_grid(config, scale)
    ms, ls, ts = run_all(times)
    extra = {}
    if config["self_check"]:
        extra["micro_self_check"] = _states_micro(model, times, tol, True)[1]["self_check_max_dev"]
        extra["lindblad_self_check"] = _states_lindblad(lind, times, tol, True)[1].get("self_check_max_dev")
        extra["tdep_self_check"] = _states_tdep(tdep, times, tol, True)[1]["self_check_max_dev"]

    ftimes = fit_grid(config, scale)
    fms, fls, fts = run_all(ftimes)
    fits = {
        "micro": _deficit_fit(ftimes, fms),
        "lindblad": _deficit_fit(ftimes, fls) if lam > 0 else None,
        "lindblad_tdep": _deficit_fit(ftimes, fts) if lt > 0 else None,
    }
    t_s = 1e-3 / scale
    slope = {
        "micro": concurrence(reduced_state(model, t_s)) / t_s,
        "lindblad": concurrence(dephasing_closed_form(omega, lam, t_s)) / t_s,
        "lindblad_tdep": concurrence(dephasing_time_dependent(omega, lt, t_s)) / t_s,
    }
    analytic = lindblad_concurrence_rate(omega, lam)
    claims = [
        _claim("micro_purity_exponent", "microscopic purity loss is quadratic in t",
               fits["micro"]["exponent"], 2.0, EXPONENT_TOL, relative=False),
        _claim("micro_purity_prefactor", "microscopic purity loss prefactor equals (sigmaA2 + sigmaB2) / 2",
               fits["micro"]["prefactor"], 0.5 * (mom.sigmaA2 + mom.sigmaB2), 0.05),
        _claim("micro_concurrence_slope", "microscopic concurrence grows as 2 |omega| t",
               slope["micro"], 2 * abs(omega), SLOPE_TOL),
        _claim("lindblad_concurrence_slope", "Lindblad concurrence slope follows the rate formula",
               slope["lindblad"], max(0.0, analytic), SLOPE_TOL),
        _claim("tdep_concurrence_slope", "time-dependent Lindblad concurrence grows as 2 |omega| t",
               slope["lindblad_tdep"], 2 * abs(omega), SLOPE_TOL),
    ]
    if fits["lindblad"] is not None:
        claims.insert(2, _claim("lindblad_purity_exponent", "Lindblad purity loss is linear in t",
                                fits["lindblad"]["exponent"], 1.0, EXPONENT_TOL, relative=False))
        claims.insert(3, _claim("lindblad_purity_prefactor", "Lindblad purity loss prefactor equals 4 lambda",
                                fits["lindblad"]["prefactor"], 4 * lam, 0.05))
    if fits["lindblad_tdep"] is not None:
        claims.append(_claim("tdep_purity_exponent", "time-dependent Lindblad purity loss is quadratic in t",
                             fits["lindblad_tdep"]["exponent"], 2.0, EXPONENT_TOL, relative=False))

    head = provenance(config, **info, M=model.M, sigma=sigma, sigmaA2=mom.sigmaA2, sigmaB2=mom.sigmaB2,
                      sigmaC2=mom.sigmaC2, **{"lambda": lam}, lambda_rule=lam_rule,
                      lambda_tilde=lt, lambda_tilde_rule=lt_rule, **extra)
    names = ("t", "micro_concurrence", "micro_purity", "lindblad_concurrence", "lindblad_purity",
             "tdep_concurrence", "tdep_purity", "fidelity_micro_lindblad", "fidelity_micro_tdep")
    rows = []
    for t, a, b, c in zip(times, ms, ls, ts):
        rows.append([t, concurrence(a), purity(a), concurrence(b), purity(b), concurrence(c), purity(c),
                     fidelity(a, b), fidelity(a, c)])
    arr = np.array(rows).reshape(len(rows), len(names))
    traj = Trajectory(times, {n: arr[:, i] for i, n in enumerate(names) if i > 0}, head)

    report = {
        "provenance": head,
        "parameters": {"omega": omega, "sigma": sigma, "sigmaA2": mom.sigmaA2, "sigmaB2": mom.sigmaB2,
                       "sigmaC2": mom.sigmaC2, "lambda": lam, "lambda_rule": lam_rule,
                       "lambda_tilde": lt, "lambda_tilde_rule": lt_rule, "M": model.M,
                       "seed": config["seed"], "local_terms": list(lind.local),
                       "fit_window": [float(ftimes[0]), float(ftimes[-1])], "slope_time": t_s},
        "fits": fits,
        "concurrence_slopes": slope,
        "analytic_lindblad_rate": analytic,
        "claims": claims,
    }
    out = config.out_dir
    stem = config.stem
    files = [write_trajectory(out / f"{stem}.csv", traj)]
    rpath = out / f"{stem}_report.json"
    rpath.parent.mkdir(parents=True, exist_ok=True)
    rpath.write_text(json.dumps(report, indent=2) + "\n")
    files.append(rpath)
    if config["output"]["plot"]:
        series = ("micro_concurrence", "lindblad_concurrence", "tdep_concurrence",
                  "micro_purity", "lindblad_purity", "tdep_purity")
        files.append(emit_plot(traj, out / f"{stem}.svg", series=series, title="compare"))
        fits_traj = Trajectory(ftimes, {
            "micro_purity": [purity(r) for r in fms],
            "lindblad_purity": [purity(r) for r in fls],
            "tdep_purity": [purity(r) for r in fts],
        }, head)
        files.append(emit_plot(fits_traj, out / f"{stem}_loglog.svg", loglog=True,
                               series=tuple(fits_traj.columns), title="purity deficit"))
    return report, files


def format_report(report) -> str:
    lines = []
    p = report["parameters"]
    lines.append("parameters: " + ", ".join(f"{k}={p[k]!r}" for k in p))
    for c in report["claims"]:
        mark = "PASS" if c["pass"] else "FAIL"
        lines.append(f"[{mark}] {c['id']}: {c['value']:.6g} (expected {c['expected']:.6g}) - {c['claim']}")
    return "\n".join(lines)


# ---------------------------------------------------------------- threshold

def scan(config: ScenarioConfig):
    omega = config["omega"]
    th = config["threshold"]
    low = th["low"] if th["low"] is not None else 0.5 * abs(omega)
    high = th["high"] if th["high"] is not None else 1.5 * abs(omega)
    res = threshold_scan(omega, (low, high), th["resolution"], th["mode"])
    analytic = threshold_scan(omega, (low, high), th["resolution"], "analytic")
    head = provenance(config, omega=omega, mode=th["mode"], lambda_star=res.lambda_star,
                      bracket_low=res.bracket[0], bracket_high=res.bracket[1],
                      analytic_root=analytic.lambda_star, resolution=th["resolution"])
    pts = sorted(res.scan_points)
    rows = [[lam, g, lindblad_concurrence_rate(omega, lam)] for lam, g in pts]
    path = write_table(config.out_dir / f"{config.stem}.csv",
                       ("lambda", "growth_rate", "analytic_rate"), rows, head)
    return res, [path]


# ---------------------------------------------------------------- sweep

def _sweep_row(args):
    kind, data, index, value = args
    config = ScenarioConfig(data)
    if kind == "lambda_ratio":
        omega = config["omega"]
        lam = float(value) * abs(omega)
        rate = concurrence_growth_rate(omega, lam)
        analytic = lindblad_concurrence_rate(omega, lam)
        ftimes = fit_grid(config, max(abs(omega), lam))
        if lam > 0:
            fit = _deficit_fit(ftimes, [dephasing_closed_form(omega, lam, t) for t in ftimes])
            exp_, pre = fit["exponent"], fit["prefactor"]
        else:
            exp_, pre = float("nan"), float("nan")
        return [index, float(value), lam, rate, analytic, max(0.0, analytic), exp_, pre]
    n = int(value)
    if kind == "n_env_gravitational":
        spec = gravity_spec(config, n_env=n)
        model, sa, sb = gravitational_model(spec)
        m = env_moments(model)
        err = max(abs(m.sigmaA2 - sa), abs(m.sigmaB2 - sb))
        return [index, n, m.sigmaA2, sa, m.sigmaB2, sb, err]
    model = random_micro_model(n, config["omega"], config["seed"], config["coupling_scale"])
    sigma, m = micro_sigma(model)
    scale = max(abs(model.omega), sigma)
    ftimes = fit_grid(config, scale)
    fit = _deficit_fit(ftimes, [reduced_state(model, t) for t in ftimes])
    t_s = 1e-3 / scale
    slope = concurrence(reduced_state(model, t_s)) / t_s
    return [index, n, m.sigmaA2, m.sigmaB2, m.sigmaC2, fit["exponent"], fit["prefactor"], slope]


SWEEP_COLUMNS = {
    "lambda_ratio": ("index", "lambda_ratio", "lambda", "growth_rate", "analytic_rate",
                     "analytic_rate_clamped", "purity_exponent", "purity_prefactor"),
    "n_env_gravitational": ("index", "n_env", "sigmaA2", "sigmaA2_predicted", "sigmaB2",
                            "sigmaB2_predicted", "max_abs_error"),
    "n_env_random": ("index", "n_env", "sigmaA2", "sigmaB2", "sigmaC2", "purity_exponent",
                     "purity_prefactor", "concurrence_slope"),
}


def sweep_kind(config: ScenarioConfig) -> str:
    param = config["sweep"]["parameter"]
    if param == "lambda_ratio":
        return "lambda_ratio"
    if config.scenario == "micro_gravitational" or config["gravity"] is not None:
        return "n_env_gravitational"
    return "n_env_random"


def sweep(config: ScenarioConfig):
    """One CSV row per grid value, ordered by grid index.

    With ``resume`` set, rows already present in the output file (matched
    by index and config hash) are kept and only missing rows are computed.
    """
    sw = config["sweep"]
    if sw is None:
        raise UsageError("config has no sweep section")
    kind = sweep_kind(config)
    names = SWEEP_COLUMNS[kind]
    path = config.out_dir / f"{config.stem}_sweep.csv"
    head = provenance(config, sweep=kind, points=len(sw["values"]))
    done = {}
    if sw["resume"] and path.exists():
        old_head, old_names, old_rows = read_table(path)
        if old_head.get("config_hash") == head["config_hash"] and tuple(old_names) == names:
            for r in old_rows:
                done[int(r[0])] = r
    todo = [(kind, config.data, i, v) for i, v in enumerate(sw["values"]) if i not in done]
    if sw["workers"] > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=sw["workers"]) as pool:
            results = list(pool.map(_sweep_row, todo))
    else:
        results = [_sweep_row(a) for a in todo]
    rows = dict(done)
    for r in results:
        rows[r[0]] = r
    ordered = [rows[i] for i in sorted(rows)]
    write_table(path, names, ordered, head)
    return {"kind": kind, "computed": len(results), "reused": len(done), "rows": len(ordered)}, [path]
