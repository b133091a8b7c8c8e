"""Scenario catalog, configuration parsing and the run pipeline.

A configuration is line-oriented ``key = value`` text.  Every run executes
the solver (or the thermodynamic path builder) together with the diagnostics
and writes four files: ``slices.csv``, ``diagnostics.csv``, ``events.csv`` and
``report.txt``.
"""

from __future__ import annotations

import csv
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import characteristics as chars
from . import diagnostics as diag
from . import euler1d as e1
from . import thermo

# -- configuration -----------------------------------------------------------


class ConfigError(ValueError):
    """Invalid scenario configuration; ``line`` is 1-based or ``None``."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class NumericalFailure(RuntimeError):
    """The solver or a thermodynamic evaluation broke down during a run."""


def _float_list(text: str) -> tuple[float, ...]:
    parts = [p for p in text.replace(",", " ").split() if p]
    return tuple(float(p) for p in parts)


_COMMON = {
    "N": int,
    "cfl": float,
    "gamma": float,
    "R": float,
    "t_end": float,
    "outputs": _float_list,
}


@dataclass(frozen=True)
class _Entry:
    description: str
    N: int
    t_end: float
    options: dict[str, float]


_CATALOG: dict[str, _Entry] = {
    "sod": _Entry(
        "Sod shock tube against the exact Riemann solution",
        400, 0.25,
        {"rho_L": 1.0, "u_L": 0.0, "p_L": 1.0, "rho_R": 0.125, "u_R": 0.0,
         "p_R": 0.1, "x0": 0.5, "seed": 0.6},
    ),
    "simple_wave": _Entry(
        "right-running simple wave steepening into a shock",
        400, 1.75,
        {"eps": 0.1, "a0": 1.0, "rho0": 1.4, "window": 8},
    ),
    "isentropic_advection": _Entry(
        "smooth entropy wave carried by a uniform stream",
        200, 1.0,
        {"amplitude": 0.2, "width": 0.15, "u0": 1.0, "p0": 1.0, "seeds": 16},
    ),
    "uniform": _Entry(
        "uniform steady stream, the stable reference",
        64, 0.5,
        {"rho0": 1.0, "u0": 0.5, "p0": 1.0},
    ),
    "impulsive": _Entry(
        "uniform gas given a smooth impulsive acceleration",
        64, 1.0,
        {"g": 1.0, "t_on": 0.5, "ramp": 0.1, "rho0": 1.0, "p0": 1.0},
    ),
    "shear_layer": _Entry(
        "steady viscous shear profile with dissipative entropy source",
        128, 0.5,
        {"U": 1.0, "delta": 0.05, "mu": 0.01, "rho0": 1.0, "p0": 1.0},
    ),
    "carnot": _Entry(
        "Carnot cycle with and without friction, Clausius balance",
        16, 1.0,
        {"T_h": 2.0, "T_c": 1.0, "V1": 1.0, "V2": 2.0, "steps": 4000, "friction": 0.2},
    ),
    "entropy_contact": _Entry(
        "resting gas with an entropy-gradient kink, break ratio across a trajectory",
        200, 0.2,
        {"s0": 1.0, "p0": 1.0, "slope_L": 0.5, "slope_R": -0.5, "x0": 0.5},
    ),
}

_INT_OPTIONS = {"seeds", "steps", "window"}


def list_scenarios() -> list[tuple[str, str]]:
    """``(name, description)`` pairs in catalog order."""
    return [(name, entry.description) for name, entry in _CATALOG.items()]


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    N: int
    t_end: float
    cfl: float = 0.8
    gamma: float = 1.4
    R: float = 1.0
    outputs: tuple[float, ...] = ()
    options: dict[str, float] = field(default_factory=dict)

    @property
    def params(self) -> thermo.GasParams:
        return thermo.GasParams(self.gamma, self.R)

    def __getitem__(self, key: str):
        return self.options[key]

    @property
    def output_times(self) -> tuple[float, ...]:
        return self.outputs or (self.t_end,)


def parse_config(text: str) -> ScenarioConfig:
    """Parse ``key = value`` lines (``#`` starts a comment).

    ``name`` is required; everything else falls back to the scenario's
    defaults.  Errors name the offending line.
    """
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first set on line {entries[key][1]})", lineno)
        entries[key] = (value, lineno)

    if "name" not in entries:
        raise ConfigError("missing required key 'name'")
    name, name_line = entries.pop("name")
    if name not in _CATALOG:
        raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(_CATALOG)}", name_line)
    entry = _CATALOG[name]

    values: dict[str, object] = {"N": entry.N, "t_end": entry.t_end, "cfl": 0.8,
                                 "gamma": 1.4, "R": 1.0, "outputs": ()}
    options = dict(entry.options)
    lines: dict[str, int | None] = {k: None for k in values}
    for key, (value, lineno) in entries.items():
        if key in _COMMON:
            conv = _COMMON[key]
        elif key in options:
            conv = int if key in _INT_OPTIONS else float
        else:
            raise ConfigError(f"unknown key {key!r} for scenario {name!r}", lineno)
        try:
            parsed = conv(value)
        except ValueError:
            raise ConfigError(f"cannot read {key} = {value!r}", lineno) from None
        if key in _COMMON:
            values[key] = parsed
            lines[key] = lineno
        else:
            options[key] = parsed

    def check(ok: bool, key: str, what: str):
        if not ok:
            raise ConfigError(f"{key} = {values[key]!r} violates {what}", lines[key])

    check(values["N"] >= 16, "N", "N >= 16")
    check(0.0 < values["cfl"] <= e1.CFL_LIMIT, "cfl", f"0 < cfl <= {e1.CFL_LIMIT}")
    check(values["t_end"] > 0.0, "t_end", "t_end > 0")
    check(values["gamma"] > 1.0, "gamma", "gamma > 1")
    check(values["R"] > 0.0, "R", "R > 0")
    outs = values["outputs"]
    check(all(0.0 < t <= values["t_end"] for t in outs), "outputs", "0 < t <= t_end")
    values["outputs"] = tuple(sorted(set(outs)))
    for key, value in options.items():
        if key in _INT_OPTIONS and value < 1:
            raise ConfigError(f"{key} must be a positive integer", entries.get(key, (None, None))[1])
    if name == "carnot" and not options["T_h"] > options["T_c"] > 0.0:
        raise ConfigError("carnot needs T_h > T_c > 0", entries.get("T_h", entries.get("T_c", (None, None)))[1])

    return ScenarioConfig(name=name, options=options, **values)


# -- report ------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return "none"
    return str(v)


@dataclass
class RunReport:
    """Outcome of one scenario run; :meth:`to_text` lists fields in a fixed
    order so identical runs give identical reports apart from ``wall_time``."""

    scenario: str
    N: int
    t_end: float
    steps: int
    conservation_defect: tuple[float, float, float] | None
    metrics: dict[str, float]
    max_commutator: float | None
    noise_floor: float | None
    instability_class: str
    event_count: int
    first_event_t: float | None
    checks: dict[str, bool]
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_text(self) -> str:
        out = [f"scenario = {self.scenario}", f"N = {self.N}", f"t_end = {_fmt(self.t_end)}",
               f"steps = {self.steps}"]
        if self.conservation_defect is None:
            out.append("conservation_defect = none")
        else:
            for k, v in zip(("mass", "momentum", "energy"), self.conservation_defect):
                out.append(f"conservation_defect.{k} = {_fmt(v)}")
        out += [f"metric.{k} = {_fmt(v)}" for k, v in self.metrics.items()]
        out += [f"max_commutator = {_fmt(self.max_commutator)}",
                f"noise_floor = {_fmt(self.noise_floor)}",
                f"instability_class = {self.instability_class}",
                f"event_count = {self.event_count}",
                f"first_event_t = {_fmt(self.first_event_t)}"]
        out += [f"check.{k} = {'pass' if v else 'FAIL'}" for k, v in self.checks.items()]
        out.append(f"wall_time = {self.wall_time:.3f}")
        return "\n".join(out) + "\n"


# -- output files ------------------------------------------------------------

SLICE_HEADER = ("t", "x", "rho", "u", "p", "s", "a")
DIAG_HEADER = ("t", "x", "A1", "Anu", "K", "src_nonstat", "src_force", "src_visc",
               "src_heat", "class")
EVENT_HEADER = ("t", "x", "window", "K_before", "K_after")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


@dataclass
class _Artifacts:
    slices: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    events: list = field(default_factory=list)


@dataclass
class _FlowAnalysis:
    fields: diag.FlowFields
    breakdown: diag.SourceBreakdown
    K_lab: np.ndarray
    max_commutator: float
    floor: float
    klass: diag.InstabilityClass
    events: list


def _analyse(fields: diag.FlowFields, window: int = 8) -> _FlowAnalysis:
    b = diag.source_breakdown(fields)
    form = diag.evolutionary_form(fields, breakdown=b)
    K = diag.evolutionary_commutator(form)
    floor = diag.noise_floor(fields)
    klass = diag.classify(b, tol=10.0 * floor)
    events = diag.transition_detector(fields, window=window)
    return _FlowAnalysis(fields, b, form.to_lab(K.K, fields.x), K.max_abs, floor, klass, events)


def _flow_artifacts(an: _FlowAnalysis, indices) -> _Artifacts:
    f, b = an.fields, an.breakdown
    s = thermo.gasdyn_entropy(f.p, f.rho, f.params)
    a = thermo.sound_speed(f.p, f.rho, f.params)
    Anu = b.reassembled() / b.T
    labels = diag.classify_pointwise(b, tol=10.0 * an.floor)
    art = _Artifacts()
    for n in indices:
        t = f.t[n]
        for i, x in enumerate(f.x):
            art.slices.append((t, x, f.rho[n, i], f.u[n, i], f.p[n, i], s[n, i], a[n, i]))
            art.diagnostics.append((t, x, b.A1[n, i], Anu[n, i], an.K_lab[n, i],
                                    b.nonstationary[n, i], b.nonpotential[n, i],
                                    b.viscous[n, i], b.heat[n, i], labels[n, i]))
    art.events = [(e.t, e.x, e.window, e.K_before, e.K_after) for e in an.events]
    return art


def _flow_report(cfg: ScenarioConfig, an: _FlowAnalysis, defect, metrics, checks) -> RunReport:
    return RunReport(
        scenario=cfg.name, N=cfg.N, t_end=cfg.t_end, steps=an.fields.t.size - 1,
        conservation_defect=None if defect is None else tuple(float(d) for d in defect),
        metrics=metrics, max_commutator=an.max_commutator, noise_floor=an.floor,
        instability_class=an.klass.value, event_count=len(an.events),
        first_event_t=an.events[0].t if an.events else None, checks=checks,
    )


def _solve(cfg: ScenarioConfig, initial: e1.PrimState, x: np.ndarray, boundary: str,
           seeds=()) -> e1.Solution1D:
    setup = e1.FlowSetup(x, initial, cfg.params, cfg.t_end, cfl=cfg.cfl, boundary=boundary,
                         output_times=cfg.output_times, seeds=seeds)
    return e1.run(setup)


def _analytic_times(cfg: ScenarioConfig, dx: float, speed: float) -> np.ndarray:
    nt = max(int(math.ceil(cfg.t_end * speed / (cfg.cfl * dx))), 2) + 1
    return np.unique(np.concatenate([np.linspace(0.0, cfg.t_end, nt), cfg.output_times]))


def _indices(times: np.ndarray, wanted) -> list[int]:
    return [int(np.argmin(np.abs(times - t))) for t in wanted]


# -- scenario runners --------------------------------------------------------


def _run_sod(cfg: ScenarioConfig):
    o, gp = cfg.options, cfg.params
    x = e1.uniform_grid(cfg.N)
    left = e1.PrimState(o["rho_L"], o["u_L"], o["p_L"])
    right = e1.PrimState(o["rho_R"], o["u_R"], o["p_R"])
    init = e1.PrimState(*(np.where(x < o["x0"], getattr(left, k), getattr(right, k))
                          for k in ("rho", "u", "p")))
    sol = _solve(cfg, init, x, "transmissive", seeds=(o["seed"],))
    an = _analyse(diag.FlowFields.from_solution(sol))

    fan = e1.exact_riemann(left, right, gp)
    exact = fan.sample((x - o["x0"]) / cfg.t_end)
    l1 = e1.l1_error(sol.rho[-1], exact.rho, sol.dx)
    traj = e1.entropy_along_trajectory(sol, o["seed"])
    jumps = [c.s_after - c.s_before for c in traj.crossings]

    near_shock = False
    for ev in an.events:
        flags = e1.shock_flags(sol.slice(sol.index_of(ev.t)), gp)
        if flags.any() and np.min(np.abs(sol.x[flags] - ev.x)) <= 3.0 * sol.dx:
            near_shock = True
            break
    metrics = {"L1_rho": l1, "pstar": fan.pstar, "ustar": fan.ustar,
               "shock_crossings": len(jumps),
               "entropy_jump": jumps[0] if jumps else float("nan")}
    checks = {"L1_rho<=2e-2": l1 <= 2e-2,
              "entropy_nondecreasing_across_shock": bool(jumps) and min(jumps) >= 0.0,
              "event_at_shock": near_shock}
    return sol, an, metrics, checks


def simple_wave_state(x: np.ndarray, eps: float, a0: float, rho0: float,
                      params: thermo.GasParams) -> e1.PrimState:
    """Right-running simple wave with ``u = -eps sin(2 pi x)`` on a gas at rest
    with sound speed ``a0`` and density ``rho0``."""
    g = params.gamma
    u = -eps * np.sin(2.0 * np.pi * x)
    a = a0 + 0.5 * (g - 1.0) * u
    rho = rho0 * (a / a0) ** (2.0 / (g - 1.0))
    p0 = rho0 * a0 * a0 / g
    return e1.PrimState(rho, u, p0 * (rho / rho0) ** g)


def _run_simple_wave(cfg: ScenarioConfig):
    o, gp = cfg.options, cfg.params
    eps, a0, rho0 = o["eps"], o["a0"], o["rho0"]
    x = e1.uniform_grid(cfg.N)
    init = simple_wave_state(x, eps, a0, rho0, gp)
    background = e1.PrimState(rho0, 0.0, rho0 * a0 * a0 / gp.gamma)
    predicted = chars.shock_formation(x, np.asarray(init.u), gp, background, period=1.0)
    brute = chars.crossing_time_bruteforce(lambda s: -eps * np.sin(2.0 * np.pi * s), gp,
                                           background, n_seeds=512)
    sol = _solve(cfg, init, x, "periodic")
    an = _analyse(diag.FlowFields.from_solution(sol), window=int(o["window"]))

    t_star = predicted.t_star
    first = an.events[0].t if an.events else None
    metrics = {"t_star": t_star,
               "t_star_formula": 1.0 / ((gp.gamma + 1.0) * math.pi * eps),
               "x_star": predicted.x_star,
               "t_star_bruteforce": brute.t_star,
               "first_event_over_t_star": first / t_star if first is not None else float("nan")}
    checks = {"bruteforce_within_2%": abs(brute.t_star / t_star - 1.0) <= 0.02,
              "first_event_within_15%": first is not None and abs(first / t_star - 1.0) <= 0.15}
    return sol, an, metrics, checks


def entropy_wave_state(x: np.ndarray, amplitude: float, width: float, u0: float,
                       p0: float) -> e1.PrimState:
    """Periodic Gaussian density pulse centred at 0.5 in a uniform stream."""
    d = (x - 0.5 + 0.5) % 1.0 - 0.5
    rho = 1.0 + amplitude * np.exp(-(d / width) ** 2)
    return e1.PrimState(rho, np.full_like(x, u0), np.full_like(x, p0))


def _max_drift(cfg: ScenarioConfig, N: int) -> tuple[e1.Solution1D, float, float]:
    o = cfg.options
    x = e1.uniform_grid(N)
    init = entropy_wave_state(x, o["amplitude"], o["width"], o["u0"], o["p0"])
    n = int(o["seeds"])
    sol = _solve(cfg, init, x, "periodic", seeds=tuple((np.arange(n) + 0.5) / n))
    drift = max(e1.entropy_along_trajectory(sol, k, by_index=True).drift for k in range(n))
    shifted = entropy_wave_state((x - o["u0"] * cfg.t_end) % 1.0, o["amplitude"], o["width"],
                                 o["u0"], o["p0"])
    return sol, drift, e1.l1_error(sol.rho[-1], shifted.rho, sol.dx)


def _run_isentropic(cfg: ScenarioConfig):
    sol, drift, l1 = _max_drift(cfg, cfg.N)
    half = max(cfg.N // 2, 16)
    _, drift_half, _ = _max_drift(cfg, half)
    an = _analyse(diag.FlowFields.from_solution(sol))
    ratio = drift_half / drift if drift > 0 else float("inf")
    metrics = {"max_entropy_drift": drift, "max_entropy_drift_coarse": drift_half,
               "coarse_N": half, "drift_ratio": ratio, "L1_rho": l1}
    checks = {"drift_halves_within_20%": 1.6 <= ratio <= 2.4}
    return sol, an, metrics, checks


def _run_uniform(cfg: ScenarioConfig):
    o = cfg.options
    x = e1.uniform_grid(cfg.N)
    ones = np.ones_like(x)
    sol = _solve(cfg, e1.PrimState(o["rho0"] * ones, o["u0"] * ones, o["p0"] * ones), x,
                 "periodic")
    an = _analyse(diag.FlowFields.from_solution(sol))
    checks = {"commutator_below_floor": an.max_commutator <= an.floor,
              "class_stable": an.klass is diag.InstabilityClass.Stable,
              "no_events": not an.events}
    return sol, an, {}, checks


def impulsive_fields(cfg: ScenarioConfig) -> diag.FlowFields:
    """Uniform gas whose velocity follows ``du/dt = g phi(t)`` with a tanh
    ramp ``phi`` switching on around ``t_on``."""
    o, gp = cfg.options, cfg.params
    x = e1.uniform_grid(cfg.N)
    g, t_on, ramp = o["g"], o["t_on"], o["ramp"]
    a = math.sqrt(gp.gamma * o["p0"] / o["rho0"])
    t = _analytic_times(cfg, x[1] - x[0], a + abs(g) * cfg.t_end)
    lc = lambda z: np.logaddexp(z, -z) - math.log(2.0)  # ln cosh, overflow-safe
    u_t = 0.5 * g * (t + ramp * (lc((t - t_on) / ramp) - lc(-t_on / ramp)))
    shape = (t.size, x.size)
    return diag.FlowFields(t, x, np.full(shape, o["rho0"]), np.broadcast_to(u_t[:, None], shape),
                           np.full(shape, o["p0"]), gp, periodic=True)


def _run_impulsive(cfg: ScenarioConfig):
    an = _analyse(impulsive_fields(cfg))
    checks = {"commutator_above_10x_floor": an.max_commutator >= 10.0 * an.floor,
              "class_shock_type": an.klass is diag.InstabilityClass.ShockType}
    return None, an, {"max_nonstationary": float(np.max(np.abs(an.breakdown.nonstationary)))}, checks


def shear_layer_fields(cfg: ScenarioConfig) -> diag.FlowFields:
    """Steady ``u = U tanh(x / delta)`` on [-1/2, 1/2] with Newtonian stress
    ``tau = mu du/dx``."""
    o, gp = cfg.options, cfg.params
    x = e1.uniform_grid(cfg.N, -0.5, 0.5)
    u = o["U"] * np.tanh(x / o["delta"])
    tau = o["mu"] * o["U"] / o["delta"] / np.cosh(x / o["delta"]) ** 2
    a = math.sqrt(gp.gamma * o["p0"] / o["rho0"])
    t = _analytic_times(cfg, x[1] - x[0], a + abs(o["U"]))
    shape = (t.size, x.size)
    return diag.FlowFields(t, x, np.full(shape, o["rho0"]), np.broadcast_to(u, shape),
                           np.full(shape, o["p0"]), gp, tau=np.broadcast_to(tau, shape))


def _run_shear(cfg: ScenarioConfig):
    an = _analyse(shear_layer_fields(cfg))
    A1 = an.breakdown.A1
    metrics = {"A1_max": float(A1.max()), "A1_min": float(A1.min())}
    checks = {"A1_positive": A1.max() > 0.0 and A1.min() >= 0.0,
              "class_turbulent_pulsation": an.klass is diag.InstabilityClass.TurbulentPulsation}
    return None, an, metrics, checks


def _one_sided(f: np.ndarray, k: int, h: float, side: int) -> float:
    """Second-order one-sided derivative starting at cell ``k`` going ``side``."""
    return side * (-3.0 * f[k] + 4.0 * f[k + side] - f[k + 2 * side]) / (2.0 * h)


def _run_entropy_contact(cfg: ScenarioConfig):
    o, gp = cfg.options, cfg.params
    x = e1.uniform_grid(cfg.N)
    s = o["s0"] + np.where(x < o["x0"], o["slope_L"], o["slope_R"]) * (x - o["x0"])
    if np.any(s <= 0):
        raise ConfigError("entropy profile must stay positive on [0, 1]")
    p = np.full_like(x, o["p0"])
    init = e1.PrimState((p / s) ** (1.0 / gp.gamma), np.zeros_like(x), p)
    sol = _solve(cfg, init, x, "transmissive")
    an = _analyse(diag.FlowFields.from_solution(sol))

    n = -1
    S = sol.entropy()[n]
    A = thermo.sound_speed(sol.p[n], sol.rho[n], gp)
    k = int(np.searchsorted(x, o["x0"]))          # first cell right of the kink
    if k < 3 or k > cfg.N - 3:
        raise ConfigError("x0 must leave three cells on each side")
    h = sol.dx
    dA = _one_sided(A, k, h, +1) - _one_sided(A, k - 1, h, -1)
    dS = _one_sided(S, k, h, +1) - _one_sided(S, k - 1, h, -1)
    kink = e1.PrimState((o["p0"] / o["s0"]) ** (1.0 / gp.gamma), 0.0, o["p0"])
    predicted = chars.trajectory_break_relation(kink, gp)
    measured = dA / dS
    rel = abs(measured / predicted - 1.0)
    metrics = {"break_ratio_measured": measured, "break_ratio_predicted": predicted,
               "relative_error": rel, "max_abs_u": float(np.max(np.abs(sol.u)))}
    checks = {"break_ratio_within_1%": rel <= 1e-2, "gas_stays_at_rest": metrics["max_abs_u"] <= 1e-12}
    return sol, an, metrics, checks


def _run_carnot(cfg: ScenarioConfig):
    o, gp = cfg.options, cfg.params
    steps = int(o["steps"])
    clean = thermo.carnot_cycle(gp, o["T_h"], o["T_c"], o["V1"], o["V2"], steps=steps)
    rough = thermo.carnot_cycle(gp, o["T_h"], o["T_c"], o["V1"], o["V2"], steps=steps,
                                friction=o["friction"])
    c, r = thermo.clausius(clean), thermo.clausius(rough)
    ifc = thermo.integrating_factor_check(gp, n=64)
    metrics = {"loop_heat_over_T": c.heat_integral, "delta_S": c.delta_S,
               "first_law_residual": thermo.first_law_residual(clean),
               "friction_production": r.production,
               "integrating_factor_defect": ifc.defect}
    checks = {"loop_below_1e-6": abs(c.heat_integral) < 1e-6,
              "clean_reversible": c.classification == "reversible",
              "friction_irreversible": r.classification == "irreversible-consistent"
              and r.production > 0.0}
    report = RunReport(
        scenario=cfg.name, N=cfg.N, t_end=cfg.t_end, steps=len(clean.states) - 1,
        conservation_defect=None, metrics=metrics, max_commutator=ifc.defect,
        noise_floor=None, instability_class=f"clausius:{c.classification}/{r.classification}",
        event_count=0, first_event_t=None, checks=checks,
    )
    return report, _Artifacts()


_RUNNERS: dict[str, Callable] = {
    "sod": _run_sod,
    "simple_wave": _run_simple_wave,
    "isentropic_advection": _run_isentropic,
    "uniform": _run_uniform,
    "impulsive": _run_impulsive,
    "shear_layer": _run_shear,
    "entropy_contact": _run_entropy_contact,
}

_NUMERICAL = (e1.VacuumError, e1.CFLError, e1.PositivityError, thermo.DomainError)


def run_scenario(cfg: ScenarioConfig, out_dir: str | os.PathLike | None = None) -> RunReport:
    """Run one scenario; with ``out_dir`` the CSV files and the report are
    written there (the directory is created if needed)."""
    start = time.perf_counter()
    try:
        if cfg.name == "carnot":
            report, art = _run_carnot(cfg)
        else:
            sol, an, metrics, checks = _RUNNERS[cfg.name](cfg)
            if sol is not None:
                indices = sol.output_indices
                defect = e1.conservation_defect(sol)
            else:
                indices = _indices(an.fields.t, cfg.output_times)
                defect = None
            art = _flow_artifacts(an, indices)
            report = _flow_report(cfg, an, defect, metrics, checks)
    except _NUMERICAL as exc:
        raise NumericalFailure(f"scenario {cfg.name}: {exc}") from exc
    report.wall_time = time.perf_counter() - start

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "slices.csv", SLICE_HEADER, art.slices)
        _write_csv(out / "diagnostics.csv", DIAG_HEADER, art.diagnostics)
        _write_csv(out / "events.csv", EVENT_HEADER, art.events)
        with open(out / "report.txt", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report.to_text())
    return report
