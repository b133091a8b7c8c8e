"""Ideal-gas thermodynamics: state equation, heat-form bookkeeping and the
integrating factor 1/T.

The heat form ``dE + p dV`` is not a differential on its own; divided by the
temperature it becomes ``dS``.  The functions here evaluate both sides of that
statement numerically and classify discretized processes with the Clausius
inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class DomainError(ValueError):
    """A physical input is outside its admissible range (e.g. T <= 0)."""


def _require_positive(**values) -> None:
    for name, value in values.items():
        if isinstance(value, (float, int)):
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be positive, got {value!r}")
            continue
        arr = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise DomainError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class GasParams:
    gamma: float = 1.4
    R: float = 1.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise DomainError(f"gamma must exceed 1, got {self.gamma}")
        if not self.R > 0.0:
            raise DomainError(f"R must be positive, got {self.R}")

    @property
    def c_v(self) -> float:
        return self.R / (self.gamma - 1.0)

    @property
    def c_p(self) -> float:
        return self.gamma * self.c_v


@dataclass(frozen=True)
class ThermoState:
    T: float
    V: float
    p: float
    E: float
    S: float


def eos(V: float, T: float, params: GasParams) -> ThermoState:
    """Ideal-gas state at specific volume ``V`` and temperature ``T``.

    Entropy is ``c_v ln T + R ln V`` with the reference ``S(T=1, V=1) = 0``.
    Pass ``V=1/rho`` to start from a density.
    """
    _require_positive(V=V, T=T)
    return ThermoState(
        T=T,
        V=V,
        p=params.R * T / V,
        E=params.c_v * T,
        S=params.c_v * math.log(T) + params.R * math.log(V),
    )


@dataclass
class ThermoPath:
    """Discretized process: ``len(states) - 1`` steps, each with the heat
    ``dQ``, the mechanical action ``dW`` and any other energetic action
    ``dG`` delivered to the gas during that step."""

    states: list[ThermoState]
    dQ: np.ndarray
    dW: np.ndarray = None
    dG: np.ndarray = None
    cyclic: bool = False
    closure_tol: float = 1e-9

    def __post_init__(self):
        if len(self.states) < 2:
            raise ValueError("a path needs at least 2 states")
        n = len(self.states) - 1
        self.dQ = np.asarray(self.dQ, dtype=float)
        self.dW = np.zeros(n) if self.dW is None else np.asarray(self.dW, dtype=float)
        self.dG = np.zeros(n) if self.dG is None else np.asarray(self.dG, dtype=float)
        for name in ("dQ", "dW", "dG"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have one entry per step ({n})")
        if self.cyclic:
            a, b = self.states[0], self.states[-1]
            scale = max(abs(a.T), abs(a.V))
            if abs(a.T - b.T) > self.closure_tol * scale or abs(a.V - b.V) > self.closure_tol * scale:
                raise ValueError("cyclic path does not close on its first state")

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.states])

    @property
    def max_step(self) -> float:
        """Largest relative step in V or T."""
        T, V = self.column("T"), self.column("V")
        dT = np.abs(np.diff(T)) / np.minimum(T[:-1], T[1:])
        dV = np.abs(np.diff(V)) / np.minimum(V[:-1], V[1:])
        return float(max(dT.max(), dV.max()))

    def scaled(self, factor: float) -> "ThermoPath":
        """Same process with every energy multiplied by ``factor`` (done by
        scaling R, which scales p, E and S together)."""
        states = [
            ThermoState(T=s.T, V=s.V, p=s.p * factor, E=s.E * factor, S=s.S * factor)
            for s in self.states
        ]
        return ThermoPath(
            states, self.dQ * factor, self.dW * factor, self.dG * factor,
            cyclic=self.cyclic, closure_tol=self.closure_tol,
        )


def first_law_residual(path: ThermoPath) -> float:
    """Sum over steps of ``dE + p_mid dV - dQ - dG - dW``.

    ``p_mid`` is the mean of the end-point pressures (trapezoidal in V), so a
    consistent path gives a residual that vanishes at second order.
    """
    E, V, p = path.column("E"), path.column("V"), path.column("p")
    p_mid = 0.5 * (p[:-1] + p[1:])
    per_step = np.diff(E) + p_mid * np.diff(V) - path.dQ - path.dG - path.dW
    return float(per_step.sum())


def heat_form_commutator(params: GasParams, T, V):
    """Commutator of ``c_v dT + (R T / V) dV`` in (T, V): ``R / V``."""
    _require_positive(T=T, V=V)
    T, V = np.broadcast_arrays(np.asarray(T, dtype=float), np.asarray(V, dtype=float))
    K = params.R / V
    return float(K) if K.ndim == 0 else K


@dataclass(frozen=True)
class IntegrabilityReport:
    defect: float            # max |K| of (dE + p dV)/T
    undivided_max_error: float  # max |K - R/V| of dE + p dV
    undivided_max: float     # max |K| of dE + p dV
    n: int


def heat_form(params: GasParams, T: np.ndarray, V: np.ndarray, divide_by_T: bool):
    """Coefficients (A_T, A_V) of the heat form on a (T, V) mesh."""
    A_T = np.full_like(T, params.c_v, dtype=float)
    A_V = params.R * T / V
    if divide_by_T:
        return A_T / T, A_V / T
    return A_T, A_V


def integrating_factor_check(
    params: GasParams,
    T_range: tuple[float, float] = (1.0, 2.0),
    V_range: tuple[float, float] = (1.0, 2.0),
    n: int = 256,
) -> IntegrabilityReport:
    """Finite-difference commutators of the heat form with and without the
    factor 1/T on an ``n x n`` grid over the given rectangle."""
    from .forms import Grid2D, OneForm2D, commutator

    _require_positive(T_min=T_range[0], V_min=V_range[0])
    grid = Grid2D(np.linspace(*T_range, n), np.linspace(*V_range, n))
    T, V = grid.mesh()

    divided = commutator(OneForm2D(*heat_form(params, T, V, True), grid))
    undivided = commutator(OneForm2D(*heat_form(params, T, V, False), grid))
    exact = heat_form_commutator(params, T, V)
    err = np.abs(undivided.K - exact)[1:-1, 1:-1]
    return IntegrabilityReport(
        defect=divided.max_abs,
        undivided_max_error=float(err.max()),
        undivided_max=undivided.max_abs,
        n=n,
    )


@dataclass(frozen=True)
class ClausiusResult:
    delta_S: float
    heat_integral: float
    tol: float
    classification: str

    @property
    def production(self) -> float:
        return self.delta_S - self.heat_integral


def clausius(path: ThermoPath, tol: float | None = None) -> ClausiusResult:
    """Compare the entropy change with the discretized integral of dQ/T.

    The step temperature is the mean of the end-point temperatures.  The
    default tolerance is ``max(1e-10, 10 h^2 scale)`` where ``h`` is the
    largest relative step and ``scale`` the total |dQ|/T.
    """
    T = path.column("T")
    _require_positive(T=T)
    T_mid = 0.5 * (T[:-1] + T[1:])
    heat_integral = float(np.sum(path.dQ / T_mid))
    S = path.column("S")
    delta_S = float(S[-1] - S[0])
    if tol is None:
        scale = float(np.sum(np.abs(path.dQ) / T_mid))
        tol = max(1e-10, 10.0 * path.max_step**2 * scale)

    gap = delta_S - heat_integral
    if abs(gap) <= tol:
        label = "reversible"
    elif gap > tol:
        label = "irreversible-consistent"
    else:
        label = "violates-second-law"
    return ClausiusResult(delta_S, heat_integral, tol, label)


def gasdyn_entropy(p, rho, params: GasParams):
    """Gas-dynamic entropy ``p / rho**gamma``."""
    _require_positive(p=p, rho=rho)
    return np.asarray(p, dtype=float) / np.asarray(rho, dtype=float) ** params.gamma


def sound_speed(p, rho, params: GasParams):
    _require_positive(p=p, rho=rho)
    return np.sqrt(params.gamma * np.asarray(p, dtype=float) / np.asarray(rho, dtype=float))


# -- path builders ----------------------------------------------------------

def _states(params: GasParams, V: Sequence[float], T: Sequence[float]) -> list[ThermoState]:
    return [eos(float(v), float(t), params) for v, t in zip(V, T)]


def isothermal_path(
    params: GasParams, T: float, V1: float, V2: float, steps: int, friction: float = 0.0
) -> ThermoPath:
    """Reversible isotherm with the exact step heat ``R T ln(V_{i+1}/V_i)``.

    ``friction`` moves that much of the heat (spread evenly over the steps)
    into the mechanical action ``dW``.
    """
    V = np.linspace(V1, V2, steps + 1)
    dQ = params.R * T * np.log(V[1:] / V[:-1])
    dW = np.full(steps, friction / steps)
    return ThermoPath(_states(params, V, np.full_like(V, T)), dQ - dW, dW)


def adiabatic_path(params: GasParams, T1: float, V1: float, V2: float, steps: int) -> ThermoPath:
    """Reversible adiabat ``T V^(gamma-1) = const`` with no heat exchanged."""
    V = np.linspace(V1, V2, steps + 1)
    T = T1 * (V1 / V) ** (params.gamma - 1.0)
    return ThermoPath(_states(params, V, T), np.zeros(steps))


def carnot_cycle(
    params: GasParams,
    T_h: float,
    T_c: float,
    V1: float = 1.0,
    V2: float = 2.0,
    steps: int = 4000,
    friction: float = 0.0,
) -> ThermoPath:
    """Carnot cycle: hot isotherm V1->V2, adiabat down to T_c, cold isotherm,
    adiabat back to the start.  ``steps`` is the total count (split evenly
    over the four legs).  ``friction`` is applied on the hot isotherm."""
    _require_positive(T_h=T_h, T_c=T_c, V1=V1, V2=V2)
    if not T_h > T_c:
        raise DomainError("T_h must exceed T_c")
    leg = max(steps // 4, 1)
    ratio = (T_h / T_c) ** (1.0 / (params.gamma - 1.0))
    V3, V4 = V2 * ratio, V1 * ratio
    legs = [
        isothermal_path(params, T_h, V1, V2, leg, friction=friction),
        adiabatic_path(params, T_h, V2, V3, leg),
        isothermal_path(params, T_c, V3, V4, leg),
        adiabatic_path(params, T_c, V4, V1, leg),
    ]
    states = legs[0].states[:]
    for p in legs[1:]:
        states.extend(p.states[1:])
    # close exactly on the first state
    states[-1] = states[0]
    cat = lambda name: np.concatenate([getattr(p, name) for p in legs])
    return ThermoPath(states, cat("dQ"), cat("dW"), cat("dG"), cyclic=True)
