"""Scenario schema, validation and execution for the CLI.

A scenario is a single JSON file::

    {
      "schema_version": 1,
      "name": "fig3_aspect_ratio",
      "kind": "design",
      "description": "...",
      "seed": 1,
      "params": { ... kind-specific ... }
    }

Kinds: design, map, simulate-classical, analyze, simulate-quantum. Every
random quantity consumes the declared seed, so reruns with identical inputs
produce byte-identical data files. Outputs are CSV tables plus a JSON run
manifest named ``<name>.manifest.json``.
"""

from __future__ import annotations

import json
import math
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis, classical, coupling, environment, io, magnetostatics
from . import quantum
from .constants import from_hz, to_hz
from .core import MagnetBody, ProlateEllipsoid, Sphere, get_material, libration_inertia

SCHEMA_VERSION = 1
KINDS = ("design", "map", "simulate-classical", "analyze", "simulate-quantum")


class ScenarioError(ValueError):
    """Scenario file failed schema validation."""


class ScenarioRunError(RuntimeError):
    """A numerical operation failed while running a valid scenario."""


def _require(params: dict, path: str, key: str, types, choices=None):
    if key not in params:
        raise ScenarioError(f"{path}.{key}: required key missing")
    value = params[key]
    if types is not None and not isinstance(value, types):
        names = getattr(types, "__name__", None) or "/".join(
            t.__name__ for t in types
        )
        raise ScenarioError(f"{path}.{key}: expected {names}, got {type(value).__name__}")
    if choices is not None and value not in choices:
        raise ScenarioError(f"{path}.{key}: must be one of {sorted(choices)}")
    return value


_NUM = (int, float)


def load_scenario(path) -> dict:
    """Parse and validate a scenario file; raises ScenarioError with a
    line-anchored message on parse failure."""
    text = Path(path).read_text()
    try:
        scenario = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    validate_scenario(scenario)
    return scenario


def validate_scenario(scenario) -> None:
    if not isinstance(scenario, dict):
        raise ScenarioError("scenario: top level must be a JSON object")
    version = _require(scenario, "scenario", "schema_version", int)
    if version != SCHEMA_VERSION:
        raise ScenarioError(
            f"scenario.schema_version: unsupported version {version} "
            f"(this build reads {SCHEMA_VERSION})"
        )
    _require(scenario, "scenario", "name", str)
    kind = _require(scenario, "scenario", "kind", str, choices=KINDS)
    _require(scenario, "scenario", "seed", int)
    params = _require(scenario, "scenario", "params", dict)
    _VALIDATORS[kind](params)


def _validate_shape(shape: dict, path: str):
    if "radius_m" in shape:
        _require(shape, path, "radius_m", _NUM)
    else:
        _require(shape, path, "a_m", _NUM)
        _require(shape, path, "b_m", _NUM)


def _validate_design(params: dict):
    target = _require(params, "params", "target", str,
                      choices=("aspect_ratio", "q_vs_frequency"))
    _require(params, "params", "material", str)
    if target == "aspect_ratio":
        _require(params, "params", "minor_axis_m", _NUM)
        _require(params, "params", "field_t", _NUM)
    else:
        _require(params, "params", "a_m", _NUM)
        _require(params, "params", "b_m", _NUM)
        _require(params, "params", "fields_t", list)
        _require(params, "params", "pressure_pa", _NUM)


def _validate_map(params: dict):
    _require(params, "params", "material", str)
    for rng in ("radius_range_m", "gap_range_m"):
        block = _require(params, "params", rng, dict)
        for key in ("min", "max", "n"):
            _require(block, f"params.{rng}", key, _NUM)
    if "field_t" not in params:
        _require(params, "params", "frequency_hz", _NUM)


def _validate_simulate_classical(params: dict):
    body = _require(params, "params", "body", dict)
    _require(body, "params.body", "material", str)
    _validate_shape(_require(body, "params.body", "shape", dict), "params.body.shape")
    _require(params, "params", "duration_s", _NUM)
    if "field_sweep_t" not in params:
        _require(params, "params", "field_t", _NUM)
    damping = _require(params, "params", "damping", dict)
    if not any(k in damping for k in ("gamma_s", "pressure_pa", "q")):
        raise ScenarioError(
            "params.damping: needs one of gamma_s, q, pressure_pa")
    if "readout" in params:
        for i, block in enumerate(_require(params, "params", "readout", list)):
            if not isinstance(block, dict):
                raise ScenarioError(f"params.readout[{i}]: expected object")
            _require(block, f"params.readout[{i}]", "name", str)
            _require(block, f"params.readout[{i}]", "kind", str,
                     choices=("direct_optical", "spin_pl"))
    if "analyze" in params:
        block = _require(params, "params", "analyze", dict)
        _require(block, "params.analyze", "method", str,
                 choices=("ringdown", "psd_lorentzian", "readout_lag"))


def _validate_analyze(params: dict):
    _require(params, "params", "input_csv", str)
    _require(params, "params", "column", str)
    _require(params, "params", "method", str,
             choices=("ringdown", "psd_lorentzian"))


def _validate_simulate_quantum(params: dict):
    protocol = _require(params, "params", "protocol", str,
                        choices=("fock_prep", "sideband_cool"))
    _require(params, "params", "frequency_hz", _NUM)
    _require(params, "params", "coupling_hz", _NUM)
    _require(params, "params", "fock_cutoff", int)
    if protocol == "sideband_cool":
        _require(params, "params", "n_bar_start", _NUM)
        _require(params, "params", "n_cycles", int)


_VALIDATORS = {
    "design": _validate_design,
    "map": _validate_map,
    "simulate-classical": _validate_simulate_classical,
    "analyze": _validate_analyze,
    "simulate-quantum": _validate_simulate_quantum,
}


def _shape_from(block: dict):
    if "radius_m" in block:
        return Sphere(float(block["radius_m"]))
    return ProlateEllipsoid(a=float(block["a_m"]), b=float(block["b_m"]))


def _decoherence_from(block: dict | None) -> quantum.DecoherenceParams:
    if not block:
        return quantum.DecoherenceParams.none()
    return quantum.DecoherenceParams(
        t1=float(block.get("t1_s", math.inf)),
        t2_star=float(block.get("t2_star_s", math.inf)),
        gamma_gas=float(block.get("gamma_gas_s", 0.0)),
        n_th=float(block.get("n_th", 0.0)),
        init_fidelity=float(block.get("init_fidelity", 1.0)),
    )


def _readout_from(block: dict) -> classical.ReadoutModel:
    fields = {k: v for k, v in block.items() if k not in ("name",)}
    return classical.ReadoutModel(**fields)


def run_scenario(scenario: dict, out_dir, seed: int | None = None) -> list[str]:
    """Execute a validated scenario; returns the list of files written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    resolved = dict(scenario)
    if seed is not None:
        resolved["seed"] = seed
    started = time.monotonic()
    handler = _HANDLERS[resolved["kind"]]
    try:
        outputs, extras = handler(resolved, out_dir)
    except (ScenarioError, ScenarioRunError):
        raise
    except (analysis.AnalysisError, quantum.InvariantError) as exc:
        raise ScenarioRunError(f"{resolved['kind']}: {exc}") from exc
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        raise ScenarioRunError(f"{resolved['kind']}: numerical failure: {exc}") from exc
    manifest_path = out_dir / f"{resolved['name']}.manifest.json"
    io.write_json(
        manifest_path,
        {
            "scenario": resolved,
            "package_version": __version__,
            "seed": resolved["seed"],
            "outputs": sorted(outputs),
            "results": extras,
            "wall_time_s": time.monotonic() - started,
        },
    )
    return sorted(outputs) + [manifest_path.name]


def _run_design(scenario: dict, out: Path):
    p = scenario["params"]
    material = get_material(p["material"])
    name = scenario["name"]
    if p["target"] == "aspect_ratio":
        b = float(p["minor_axis_m"])
        field = float(p["field_t"])
        r_grid = np.linspace(float(p.get("r_min", 1.05)), float(p.get("r_max", 8.0)),
                             int(p.get("n_points", 200)))
        freqs = [
            to_hz(magnetostatics.libration_frequency_soft(
                ProlateEllipsoid(a=r * b, b=b), material, field))
            for r in r_grid
        ]
        r_star, omega_star = magnetostatics.optimal_aspect_ratio(b, material, field)
        table = out / f"{name}.sweep.csv"
        io.write_table(table, {"aspect_ratio": r_grid, "frequency_hz": freqs},
                       params={"material": material.name, "minor_axis_m": b,
                               "field_t": field})
        return [table.name], {"r_star": r_star, "omega_star_hz": to_hz(omega_star)}

    shape = ProlateEllipsoid(a=float(p["a_m"]), b=float(p["b_m"]))
    gas = environment.GasConditions.air(
        float(p["pressure_pa"]), float(p.get("temperature_k", 293.0)))
    radius_eff = float(p.get("effective_radius_m", shape.b))
    gamma = environment.gas_damping(radius_eff, material.density, gas)
    fields = [float(f) for f in p["fields_t"]]
    freqs = [to_hz(magnetostatics.libration_frequency_soft(shape, material, f))
             for f in fields]
    qs = [from_hz(f) / gamma for f in freqs]
    table = out / f"{name}.q_vs_frequency.csv"
    io.write_table(table, {"field_t": fields, "frequency_hz": freqs,
                           "q": qs},
                   params={"material": material.name, "gamma_gas_s": gamma})
    return [table.name], {"gamma_gas_s": gamma}


def _run_map(scenario: dict, out: Path):
    p = scenario["params"]
    material = get_material(p["material"])
    rr, gr = p["radius_range_m"], p["gap_range_m"]
    radii = np.linspace(float(rr["min"]), float(rr["max"]), int(rr["n"]))
    gaps = np.linspace(float(gr["min"]), float(gr["max"]), int(gr["n"]))
    cmap = coupling.coupling_map(
        radii,
        gaps,
        omega=from_hz(float(p.get("frequency_hz", 200e3))),
        material=material,
        t2_star=float(p.get("t2_star_s", 500e-6)),
        bias_field=float(p["field_t"]) if "field_t" in p else None,
    )
    name = scenario["name"]
    r_col, g_col = np.meshgrid(cmap.radii, cmap.gaps, indexing="ij")
    grid = out / f"{name}.grid.csv"
    io.write_table(
        grid,
        {"radius_m": r_col.ravel(), "gap_m": g_col.ravel(),
         "coupling_hz": cmap.rates_hz.ravel()},
        params={"material": material.name, "frequency_hz": to_hz(cmap.omega),
                "threshold_hz": cmap.threshold_hz},
    )
    good = ~np.isnan(cmap.contour)
    contour = out / f"{name}.contour.csv"
    io.write_table(
        contour,
        {"radius_m": cmap.radii[good], "gap_m": cmap.contour[good]},
        params={"threshold_hz": cmap.threshold_hz},
    )
    return [grid.name, contour.name], {
        "max_coupling_hz": float(cmap.rates_hz.max()),
        "strong_coupling_points": int((cmap.rates_hz > cmap.threshold_hz).sum()),
    }


def _resolve_damping(p: dict, body: MagnetBody, omega: float) -> float:
    damping = p["damping"]
    if "gamma_s" in damping:
        return float(damping["gamma_s"])
    if "q" in damping:
        return omega / float(damping["q"])
    gas = environment.GasConditions.air(
        float(damping["pressure_pa"]), float(damping.get("temperature_k", 293.0)))
    shape = body.shape
    radius = shape.radius if isinstance(shape, Sphere) else shape.b
    return environment.gas_damping(radius, body.material.density, gas)


def _run_simulate_classical(scenario: dict, out: Path):
    p = scenario["params"]
    name = scenario["name"]
    seed = int(scenario["seed"])
    body = MagnetBody(_shape_from(p["body"]["shape"]),
                      get_material(p["body"]["material"]))

    if "field_sweep_t" in p:
        return _run_frequency_sweep(scenario, out, body)

    field = float(p["field_t"])
    omega = magnetostatics.libration_frequency(body, field)
    if omega <= 0:
        raise ScenarioRunError("simulate-classical: zero confinement frequency")
    oversample = float(p.get("oversample", 40.0))
    dt = 2.0 * math.pi / (oversample * omega)
    gamma = _resolve_damping(p, body, omega)
    bath = float(p.get("bath_temperature_k", 0.0))

    initial = p.get("initial", {})
    if initial.get("thermal"):
        phi0, om0 = classical.thermal_initial_conditions(body, field, bath, seed + 1)
    else:
        phi0 = float(initial.get("phi_rad", 0.0))
        om0 = float(initial.get("omega_rad_s", 0.0))

    excitation = None
    if "excitation" in p:
        e = p["excitation"]
        pulse_omega = (from_hz(float(e["frequency_hz"]))
                       if "frequency_hz" in e
                       else omega * float(e.get("frequency_factor", 1.0)))
        excitation = classical.ExcitationSequence(
            n_pulses=int(e.get("n_pulses", 3)),
            pulse_frequency=pulse_omega,
            transverse_field=float(e["transverse_field_t"]),
            switch_time=float(e.get("switch_time_s", 2e-6)),
        )

    traj = classical.simulate(
        body, field, gamma, bath, excitation,
        duration=float(p["duration_s"]), dt=dt, seed=seed,
        phi0=phi0, omega0=om0,
    )
    header = {"field_t": field, "gamma_s": gamma, "dt_s": traj.dt,
              "seed": seed, "omega_rad_s": omega}
    outputs = []
    traj_file = out / f"{name}.trajectory.csv"
    io.write_table(traj_file, {"t_s": traj.time, "phi_rad": traj.phi,
                               "omega_rad_s": traj.phi_dot}, params=header)
    outputs.append(traj_file.name)

    signals = {}
    for block in p.get("readout", []):
        model = _readout_from(block)
        signals[block["name"]] = classical.detect(traj, model)
    if signals:
        sig_file = out / f"{name}.readout.csv"
        io.write_table(sig_file, {"t_s": traj.time, **signals}, params=header)
        outputs.append(sig_file.name)

    extras = {"omega_rad_s": omega, "gamma_s": gamma}
    spec = p.get("analyze")
    if spec:
        extras.update(_analyze_trajectory(spec, traj, signals, out, name, outputs))
    return outputs, extras


def _analyze_trajectory(spec, traj, signals, out: Path, name: str, outputs):
    method = spec["method"]
    skip = int(round(float(spec.get("skip_s", 0.0)) / traj.dt))
    signal = traj.phi[skip:]
    if method == "ringdown":
        report = analysis.fit_ringdown(signal, traj.dt)
        fit_file = out / f"{name}.fit.json"
        fit_file.write_text(report.to_json() + "\n")
        outputs.append(fit_file.name)
        return {"fit_frequency_hz": to_hz(report.omega), "fit_gamma_s": report.gamma,
                "fit_q": None if math.isinf(report.q) else report.q}
    if method == "psd_lorentzian":
        spectrum = analysis.psd(signal, traj.dt,
                                n_segments=int(spec.get("n_segments", 8)))
        psd_file = out / f"{name}.psd.csv"
        io.write_table(psd_file, {"frequency_hz": spectrum.frequency,
                                  "density": spectrum.density},
                       params={"n_averages": spectrum.n_averages})
        outputs.append(psd_file.name)
        line = analysis.fit_lorentzian(spectrum)
        return {"fit_frequency_hz": to_hz(line.omega0), "fit_gamma_s": line.gamma,
                "fit_q": line.q}
    if method == "readout_lag":
        ref = signals[spec["reference"]]
        if "difference" in spec:
            pos, neg = spec["difference"]
            other = signals[pos] - signals[neg]
        else:
            other = signals[spec["signal"]]
        ref = ref - ref.mean()
        other = other - other.mean()
        est = analysis.lag_estimate(ref, other, traj.dt,
                                    max_lag=float(spec.get("max_lag_s", 1e-4)))
        corr = float(np.corrcoef(ref, other)[0, 1])
        return {"lag_s": est.lag, "lag_flagged": est.flagged,
                "correlation": corr}
    raise ScenarioRunError(f"unknown analyze method {method!r}")


def _run_frequency_sweep(scenario: dict, out: Path, body: MagnetBody):
    p = scenario["params"]
    name = scenario["name"]
    seed = int(scenario["seed"])
    fields = [float(f) for f in p["field_sweep_t"]]
    n_periods = float(p.get("n_periods", 40.0))
    fitted = []
    for k, field in enumerate(fields):
        omega = magnetostatics.libration_frequency(body, field)
        dt = 2.0 * math.pi / (40.0 * omega)
        gamma = _resolve_damping(p, body, omega)
        traj = classical.simulate(
            body, field, gamma, 0.0, None,
            duration=n_periods * 2.0 * math.pi / omega, dt=dt,
            seed=seed + k, phi0=float(p.get("initial", {}).get("phi_rad", 1e-3)),
        )
        fitted.append(to_hz(analysis.fit_ringdown(traj.phi, traj.dt).omega))
    fit = analysis.linear_fit(fields, fitted)
    prefactor_hz_per_t = to_hz(
        magnetostatics.libration_frequency(body, fields[0])) / fields[0]
    table = out / f"{name}.freq_vs_field.csv"
    io.write_table(table, {"field_t": fields, "frequency_hz": fitted},
                   params={"material": body.material.name})
    return [table.name], {
        "slope_hz_per_t": fit.slope,
        "intercept_hz": fit.intercept,
        "r_squared": fit.r_squared,
        "analytic_slope_hz_per_t": prefactor_hz_per_t,
    }


def _run_analyze(scenario: dict, out: Path):
    p = scenario["params"]
    name = scenario["name"]
    header, columns = io.read_table(p["input_csv"])
    if p["column"] not in columns:
        raise ScenarioError(f"params.column: {p['column']!r} not in input table")
    signal = columns[p["column"]]
    dt = float(p.get("dt_s", header.get("dt_s", 0.0)))
    if dt <= 0:
        tcol = columns.get("t_s")
        if tcol is None or len(tcol) < 2:
            raise ScenarioError("params.dt_s: sampling interval unavailable")
        dt = float(tcol[1] - tcol[0])
    if p["method"] == "ringdown":
        report = analysis.fit_ringdown(signal, dt)
        out_file = out / f"{name}.fit.json"
        out_file.write_text(report.to_json() + "\n")
        return [out_file.name], {"fit_frequency_hz": to_hz(report.omega)}
    spectrum = analysis.psd(signal, dt, n_segments=int(p.get("n_segments", 8)))
    line = analysis.fit_lorentzian(spectrum)
    out_file = out / f"{name}.lorentzian.json"
    io.write_json(out_file, {"frequency_hz": to_hz(line.omega0),
                             "gamma_s": line.gamma, "q": line.q,
                             "area": line.area})
    return [out_file.name], {"fit_q": line.q}


def _run_simulate_quantum(scenario: dict, out: Path):
    p = scenario["params"]
    name = scenario["name"]
    omega = from_hz(float(p["frequency_hz"]))
    lam = from_hz(float(p["coupling_hz"]))
    cutoff = int(p["fock_cutoff"])
    rwa = bool(p.get("rwa", True))
    deco = _decoherence_from(p.get("decoherence"))

    if p["protocol"] == "fock_prep":
        n_record = int(p.get("n_record", 60))
        state = quantum.product_state("0", 0, cutoff)
        state = quantum.rotate_spin(state, "x", 0.5 * math.pi)
        h = quantum.interaction_hamiltonian(omega, lam, cutoff, rwa)
        tau = math.pi / lam
        times, pops, nbars = [0.0], [state.spin_population("-") *
                                     state.fock_population(0)], [state.mean_phonons()]
        seg = tau / n_record
        for k in range(n_record):
            state = quantum.evolve(state, h, deco, seg,
                                   None if rwa else math.pi / omega / 40.0)
            times.append((k + 1) * seg)
            pops.append(float(np.real(
                state.rho[1 * (cutoff + 1) + 1, 1 * (cutoff + 1) + 1])))
            nbars.append(state.mean_phonons())
        state = quantum.rotate_spin(state, "x", -0.5 * math.pi)
        table = out / f"{name}.exchange.csv"
        io.write_table(table, {"t_s": times, "p_minus_1": pops, "nbar": nbars},
                       params={"coupling_hz": to_hz(lam)})
        return [table.name], {
            "phonon_fidelity": state.fock_population(1),
            "spin_one_population": state.spin_population("1"),
        }

    result = quantum.sideband_cool(
        omega, lam, deco,
        n_bar_start=float(p["n_bar_start"]),
        n_cycles=int(p["n_cycles"]),
        cutoff=cutoff, rwa=rwa,
    )
    table = out / f"{name}.cooling.csv"
    io.write_table(table,
                   {"cycle": np.arange(1, len(result.nbar) + 1),
                    "nbar": result.nbar},
                   params={"coupling_hz": to_hz(lam),
                           "init_fidelity": deco.init_fidelity})
    return [table.name], {"final_nbar": float(result.nbar[-1])}


_HANDLERS = {
    "design": _run_design,
    "map": _run_map,
    "simulate-classical": _run_simulate_classical,
    "analyze": _run_analyze,
    "simulate-quantum": _run_simulate_quantum,
}


def bundled_scenarios() -> dict[str, dict]:
    """Name -> parsed scenario for every bundled reproduction scenario."""
    out = {}
    root = resources.files("levimag") / "scenarios"
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            scenario = json.loads(entry.read_text())
            out[scenario["name"]] = scenario
    return out


def resolve_scenario(ref: str) -> dict:
    """Load a scenario from a path or from the bundled catalog by name."""
    path = Path(ref)
    if path.exists():
        return load_scenario(path)
    bundled = bundled_scenarios()
    if ref in bundled:
        scenario = bundled[ref]
        validate_scenario(scenario)
        return scenario
    raise ScenarioError(
        f"{ref!r}: no such file and no bundled scenario with that name "
        f"(bundled: {', '.join(sorted(bundled))})"
    )
