"""Characteristic families, derivative-break relations and wave-breaking time.

Breaks (jumps) of the normal derivatives of rho, u and s across a surface
moving with speed ``c`` satisfy a homogeneous 3x3 system.  Its determinant
``(u - c)((u - c)^2 - a^2)`` vanishes on trajectories (``c = u``) and on the
sound characteristics (``c = u +- a``); the nullspace then fixes the ratios
between the breaks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .euler1d import PrimState
from .thermo import GasParams, gasdyn_entropy, sound_speed


class NoBreakSurface(ValueError):
    """The surface speed is not a characteristic or trajectory speed."""


class NonSmoothProfile(ValueError):
    pass


def char_speeds(state: PrimState, params: GasParams) -> tuple[float, float, float]:
    a = float(sound_speed(state.p, state.rho, params))
    u = float(state.u)
    return u + a, u, u - a


@dataclass(frozen=True)
class ConsistencyMatrix:
    M: np.ndarray
    state: PrimState
    c: float
    params: GasParams

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.M))

    @property
    def scale(self) -> float:
        a = float(sound_speed(self.state.p, self.state.rho, self.params))
        return abs(float(self.state.u)) + a


def consistency_matrix(state: PrimState, c: float, params: GasParams) -> ConsistencyMatrix:
    """Rows: mass, momentum and entropy transport with ``p = s rho^gamma``,
    after substituting ``[d_t f] = -c [d_x f]``.  Columns: breaks of
    ``d_x rho``, ``d_x u``, ``d_x s``."""
    rho, u, p = float(state.rho), float(state.u), float(state.p)
    s = float(gasdyn_entropy(p, rho, params))
    a2 = params.gamma * p / rho
    w = u - c
    M = np.array([
        [w, rho, 0.0],
        [a2 / rho, w, p / (s * rho)],
        [0.0, 0.0, w],
    ])
    return ConsistencyMatrix(M, state, float(c), params)


def determinant_formula(state: PrimState, c: float, params: GasParams) -> float:
    a = float(sound_speed(state.p, state.rho, params))
    w = float(state.u) - c
    return w * (w * w - a * a)


@dataclass(frozen=True)
class BreakVector:
    d_rho: float
    d_u: float
    d_s: float
    d_a: float

    def ratio(self, num: str, den: str) -> float:
        return getattr(self, num) / getattr(self, den)


def sound_speed_break(state: PrimState, d_rho: float, d_s: float, params: GasParams) -> float:
    """Chain rule for ``a^2 = gamma s rho^(gamma-1)``."""
    g = params.gamma
    rho = float(state.rho)
    s = float(gasdyn_entropy(state.p, rho, params))
    a = float(sound_speed(state.p, rho, params))
    return (g * s * (g - 1.0) * rho ** (g - 2.0) * d_rho + g * rho ** (g - 1.0) * d_s) / (2.0 * a)


def break_nullspace(cm: ConsistencyMatrix, tol: float = 1e-9) -> BreakVector:
    """Unit nullspace vector of the consistency system.

    Raises :class:`NoBreakSurface` unless ``|det M| <= tol * (|u| + a)^3``.
    The sign is fixed so the largest component is positive.
    """
    det = cm.det
    if abs(det) > tol * cm.scale**3:
        raise NoBreakSurface(f"det M = {det:.6g}; c = {cm.c} carries no break")
    _, _, vt = np.linalg.svd(cm.M)
    v = vt[-1]
    v = v / np.linalg.norm(v)
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    d_rho, d_u, d_s = (float(x) for x in v)
    d_a = sound_speed_break(cm.state, d_rho, d_s, cm.params)
    return BreakVector(d_rho, d_u, d_s, d_a)


def trajectory_break_relation(state: PrimState, params: GasParams) -> float:
    """``[d a] / [d s]`` across a trajectory: ``a / (2 gamma s)``."""
    a = float(sound_speed(state.p, state.rho, params))
    s = float(gasdyn_entropy(state.p, state.rho, params))
    return a / (2.0 * params.gamma * s)


def characteristic_break_relation(params: GasParams, family: int = +1) -> float:
    """``[d u] / [d a]`` across a C+ (``family=+1``) or C- characteristic."""
    if family not in (1, -1):
        raise ValueError("family must be +1 or -1")
    return family * 2.0 / (params.gamma - 1.0)


# -- wave breaking -----------------------------------------------------------

@dataclass(frozen=True)
class ShockFormation:
    t_star: float
    x_star: float


def _simple_wave_speed(u, background: PrimState, params: GasParams):
    """C+ speed ``u + a`` in a right-running simple wave on ``background``."""
    a0 = float(sound_speed(background.p, background.rho, params))
    a = a0 + 0.5 * (params.gamma - 1.0) * (np.asarray(u) - float(background.u))
    return np.asarray(u) + a


def _periodic_slope(x: np.ndarray, f: np.ndarray, period: float, stride: int = 1) -> np.ndarray:
    h = stride * (x[1] - x[0])
    return (np.roll(f, -stride) - np.roll(f, stride)) / (2.0 * h)


def shock_formation(x: np.ndarray, u0: np.ndarray, params: GasParams,
                    background: PrimState, period: float | None = None,
                    smooth_rtol: float = 0.05) -> ShockFormation | None:
    """Earliest C+ crossing for a right-running simple wave with periodic
    initial velocity ``u0`` sampled on the uniform grid ``x``.

    ``t* = -1 / min d(u + a)/dx = -1 / ((gamma + 1)/2 * min u0')``; returns
    ``None`` when the profile has no compressive slope.
    """
    x = np.asarray(x, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    if x.size < 8 or x.shape != u0.shape:
        raise ValueError("need matching x and u0 with at least 8 points")
    dx = x[1] - x[0]
    if not np.allclose(np.diff(x), dx, rtol=1e-9, atol=0):
        raise ValueError("x must be uniform")
    period = period if period is not None else dx * x.size

    slope = _periodic_slope(x, u0, period)
    coarse = _periodic_slope(x, u0, period, stride=2)
    scale = np.max(np.abs(slope))
    if scale == 0.0:
        return None
    if np.max(np.abs(slope - coarse)) > smooth_rtol * scale:
        raise NonSmoothProfile("slope estimate is resolution dependent; profile is not smooth")

    c_slope = 0.5 * (params.gamma + 1.0) * slope
    k = int(np.argmin(c_slope))
    if c_slope[k] >= 0.0:
        return None
    t_star = -1.0 / c_slope[k]
    c = _simple_wave_speed(u0[k], background, params)
    x_star = x[0] - 0.5 * dx + (x[k] + float(c) * t_star - (x[0] - 0.5 * dx)) % period
    return ShockFormation(float(t_star), float(x_star))


def crossing_time_bruteforce(u0: Callable[[np.ndarray], np.ndarray], params: GasParams,
                             background: PrimState, n_seeds: int = 512,
                             x_min: float = 0.0, period: float = 1.0) -> ShockFormation | None:
    """Earliest crossing among straight C+ lines launched from ``n_seeds``
    points, found by checking every pair (including periodic images)."""
    x = x_min + period * np.arange(n_seeds) / n_seeds
    c = _simple_wave_speed(u0(x), background, params)
    # x_i + c_i t = x_j + c_j t + m*period for image shifts m in {-1, 0, 1}
    dx = x[None, :] - x[:, None]
    dc = c[:, None] - c[None, :]
    best_t, best_x = np.inf, np.nan
    with np.errstate(divide="ignore", invalid="ignore"):
        for m in (-1, 0, 1):
            t = (dx + m * period) / dc
            t[~np.isfinite(t) | (t <= 0)] = np.inf
            np.fill_diagonal(t, np.inf)
            i, j = np.unravel_index(np.argmin(t), t.shape)
            if t[i, j] < best_t:
                best_t = float(t[i, j])
                best_x = float(x[i] + c[i] * best_t)
    if not np.isfinite(best_t):
        return None
    return ShockFormation(best_t, x_min + (best_x - x_min) % period)
