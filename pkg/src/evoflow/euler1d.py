"""First-order Godunov solver for the 1D ideal-gas Euler equations.

The interface flux comes from the exact Riemann solver, which is also exposed
on its own as a validation oracle.  Particle trajectories ``dx/dt = u`` are
traced through the stored time history with the midpoint rule.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .thermo import GasParams, gasdyn_entropy, sound_speed

log = logging.getLogger(__name__)

CFL_LIMIT = 0.9


class VacuumError(ValueError):
    """The two states separate fast enough to open a vacuum."""


class CFLError(ValueError):
    pass


class PositivityError(ArithmeticError):
    def __init__(self, cell: int, what: str):
        super().__init__(f"non-positive {what} in cell {cell}")
        self.cell = cell
        self.what = what


@dataclass(frozen=True)
class PrimState:
    """Density, velocity and pressure; scalars or equally shaped arrays."""

    rho: float | np.ndarray
    u: float | np.ndarray
    p: float | np.ndarray

    def validate(self) -> "PrimState":
        for name in ("rho", "p"):
            arr = np.asarray(getattr(self, name))
            if not np.all(arr > 0):
                bad = int(np.argmax(~(arr > 0))) if arr.ndim else 0
                raise PositivityError(bad, name)
        return self

    def sound_speed(self, params: GasParams):
        return sound_speed(self.p, self.rho, params)

    def to_conservative(self, params: GasParams) -> np.ndarray:
        rho, u, p = (np.asarray(v, dtype=float) for v in (self.rho, self.u, self.p))
        return np.stack([rho, rho * u, p / (params.gamma - 1.0) + 0.5 * rho * u * u])

    @classmethod
    def from_conservative(cls, U: np.ndarray, params: GasParams) -> "PrimState":
        rho = U[0]
        u = U[1] / rho
        p = (params.gamma - 1.0) * (U[2] - 0.5 * rho * u * u)
        return cls(rho, u, p)


# -- exact Riemann solver ----------------------------------------------------

def _pressure_function(p, rho, pk, a, gamma):
    """Toro's f_K(p) and its derivative, vectorized."""
    A = 2.0 / ((gamma + 1.0) * rho)
    B = (gamma - 1.0) / (gamma + 1.0) * pk
    shock = p > pk
    ps = np.where(shock, p, pk)  # keep both branches finite
    sq = np.sqrt(A / (ps + B))
    f_shock = (p - pk) * sq
    df_shock = sq * (1.0 - 0.5 * (p - pk) / (ps + B))
    ratio = p / pk
    e = (gamma - 1.0) / (2.0 * gamma)
    f_rare = 2.0 * a / (gamma - 1.0) * (ratio**e - 1.0)
    df_rare = ratio ** (-(gamma + 1.0) / (2.0 * gamma)) / (rho * a)
    return np.where(shock, f_shock, f_rare), np.where(shock, df_shock, df_rare)


def star_state(rhoL, uL, pL, rhoR, uR, pR, gamma, rtol=1e-12, max_iter=100):
    """Star-region pressure and velocity for arrays of interface states.

    Newton iteration on ``f_L(p) + f_R(p) + (uR - uL) = 0``, safeguarded by a
    bracket that is bisected whenever a Newton step leaves it.
    """
    rhoL, uL, pL, rhoR, uR, pR = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (rhoL, uL, pL, rhoR, uR, pR)))
    aL = np.sqrt(gamma * pL / rhoL)
    aR = np.sqrt(gamma * pR / rhoR)
    du = uR - uL
    if np.any(2.0 / (gamma - 1.0) * (aL + aR) <= du):
        raise VacuumError("initial data generate vacuum")

    # PVRS guess, floored away from zero
    p = 0.5 * (pL + pR) - 0.125 * du * (rhoL + rhoR) * (aL + aR)
    p = np.maximum(p, 1e-8 * np.minimum(pL, pR))

    # f is increasing in p; f(0+) < 0, so lo = 0 is a valid lower bracket
    lo = np.zeros_like(p)
    hi = np.full_like(p, np.inf)
    active = np.ones(p.shape, dtype=bool)
    for _ in range(max_iter):
        fL, dfL = _pressure_function(p, rhoL, pL, aL, gamma)
        fR, dfR = _pressure_function(p, rhoR, pR, aR, gamma)
        f = fL + fR + du
        lo = np.where(f < 0, p, lo)
        hi = np.where(f > 0, p, hi)
        p_new = p - f / (dfL + dfR)
        outside = (p_new <= lo) | (p_new >= hi)
        mid = np.where(np.isfinite(hi), 0.5 * (lo + hi), 2.0 * p)
        p_new = np.where(outside, mid, p_new)
        p_new = np.where(f == 0, p, p_new)
        change = np.abs(p_new - p) / (0.5 * (p_new + p))
        p = np.where(active, p_new, p)
        active &= change > rtol
        if not active.any():
            break
    else:
        raise ArithmeticError("star pressure iteration did not converge")

    fL, _ = _pressure_function(p, rhoL, pL, aL, gamma)
    fR, _ = _pressure_function(p, rhoR, pR, aR, gamma)
    u = 0.5 * (uL + uR) + 0.5 * (fR - fL)
    return p, u


def _sample(xi, rhoL, uL, pL, rhoR, uR, pR, pstar, ustar, gamma):
    """Toro's sampling of the self-similar solution at ``xi = x/t``."""
    g = gamma
    G6 = (g - 1.0) / (g + 1.0)
    e = (g - 1.0) / (2.0 * g)

    def side(rho, u, p, sign):
        # sign = +1 for the left state, -1 for the right (mirror u and xi)
        a = np.sqrt(g * p / rho)
        S = sign * xi
        uu = sign * u
        us = sign * ustar
        ratio = pstar / p
        # shock branch
        shock_speed = uu - a * np.sqrt((g + 1.0) / (2.0 * g) * ratio + e)
        rho_sh = rho * (ratio + G6) / (G6 * ratio + 1.0)
        # rarefaction branch
        head = uu - a
        a_star = a * ratio**e
        tail = us - a_star
        rho_ra = rho * ratio ** (1.0 / g)
        base = 2.0 / (g + 1.0) + G6 / a * (uu - S)
        base = np.maximum(base, 0.0)
        rho_fan = rho * base ** (2.0 / (g - 1.0))
        u_fan = 2.0 / (g + 1.0) * (a + 0.5 * (g - 1.0) * uu + S)
        p_fan = p * base ** (2.0 * g / (g - 1.0))

        is_shock = pstar > p
        out_r = np.where(is_shock,
                         np.where(S <= shock_speed, rho, rho_sh),
                         np.where(S <= head, rho,
                                  np.where(S > tail, rho_ra, rho_fan)))
        out_u = np.where(is_shock,
                         np.where(S <= shock_speed, uu, us),
                         np.where(S <= head, uu, np.where(S > tail, us, u_fan)))
        out_p = np.where(is_shock,
                         np.where(S <= shock_speed, p, pstar),
                         np.where(S <= head, p, np.where(S > tail, pstar, p_fan)))
        return out_r, sign * out_u, out_p

    left = side(rhoL, uL, pL, 1.0)
    right = side(rhoR, uR, pR, -1.0)
    on_left = xi <= ustar
    return tuple(np.where(on_left, l, r) for l, r in zip(left, right))


@dataclass(frozen=True)
class RiemannFan:
    left: PrimState
    right: PrimState
    params: GasParams
    pstar: float
    ustar: float
    left_wave: str
    right_wave: str

    def sample(self, xi) -> PrimState:
        """State at similarity coordinate ``xi = (x - x0) / t``."""
        xi = np.asarray(xi, dtype=float)
        L, R = self.left, self.right
        rho, u, p = _sample(xi, L.rho, L.u, L.p, R.rho, R.u, R.p,
                            self.pstar, self.ustar, self.params.gamma)
        if xi.ndim == 0:
            return PrimState(float(rho), float(u), float(p))
        return PrimState(rho, u, p)

    def star_densities(self) -> tuple[float, float]:
        g = self.params.gamma
        G6 = (g - 1.0) / (g + 1.0)
        out = []
        for s in (self.left, self.right):
            r = self.pstar / s.p
            if r > 1.0:
                out.append(s.rho * (r + G6) / (G6 * r + 1.0))
            else:
                out.append(s.rho * r ** (1.0 / g))
        return out[0], out[1]


def exact_riemann(left: PrimState, right: PrimState, params: GasParams) -> RiemannFan:
    left.validate()
    right.validate()
    ps, us = star_state(left.rho, left.u, left.p, right.rho, right.u, right.p, params.gamma)
    ps, us = float(ps), float(us)

    def tag(p_side):
        if np.isclose(ps, p_side, rtol=1e-12, atol=0.0):
            return "none"
        return "shock" if ps > p_side else "rarefaction"

    return RiemannFan(left, right, params, ps, us, tag(left.p), tag(right.p))


def euler_flux(rho, u, p, gamma):
    E = p / (gamma - 1.0) + 0.5 * rho * u * u
    return np.stack([rho * u, rho * u * u + p, u * (E + p)])


def godunov_flux(WL: PrimState, WR: PrimState, params: GasParams) -> np.ndarray:
    g = params.gamma
    ps, us = star_state(WL.rho, WL.u, WL.p, WR.rho, WR.u, WR.p, g)
    rho, u, p = _sample(0.0, WL.rho, WL.u, WL.p, WR.rho, WR.u, WR.p, ps, us, g)
    return euler_flux(rho, u, p, g)


# -- time stepping -----------------------------------------------------------

def max_wave_speed(prim: PrimState, params: GasParams) -> float:
    return float(np.max(np.abs(prim.u) + prim.sound_speed(params)))


def _interface_states(prim: PrimState, boundary: str):
    rho, u, p = (np.asarray(v, dtype=float) for v in (prim.rho, prim.u, prim.p))
    if boundary == "periodic":
        # interface k sits between cell k and cell k+1 (mod N)
        return PrimState(rho, u, p), PrimState(*(np.roll(v, -1) for v in (rho, u, p)))
    if boundary == "transmissive":
        ext = [np.concatenate([v[:1], v, v[-1:]]) for v in (rho, u, p)]
        return PrimState(*(v[:-1] for v in ext)), PrimState(*(v[1:] for v in ext))
    raise ValueError(f"unknown boundary {boundary!r}")


def step_conservative(U: np.ndarray, dt: float, dx: float, params: GasParams,
                      boundary: str = "transmissive") -> np.ndarray:
    prim = PrimState.from_conservative(U, params)
    WL, WR = _interface_states(prim, boundary)
    F = godunov_flux(WL, WR, params)
    if boundary == "periodic":
        net = F - np.roll(F, 1, axis=1)
    else:
        net = F[:, 1:] - F[:, :-1]
    U_new = U - (dt / dx) * net
    new = PrimState.from_conservative(U_new, params)
    for name in ("rho", "p"):
        bad = ~(np.asarray(getattr(new, name)) > 0)
        if bad.any():
            raise PositivityError(int(np.argmax(bad)), name)
    return U_new


def step(prim: PrimState, dt: float, dx: float, params: GasParams,
         boundary: str = "transmissive") -> PrimState:
    """One Godunov update.  Raises :class:`CFLError` if ``dt`` exceeds the
    0.9 Courant limit and :class:`PositivityError` on negative rho or p."""
    prim.validate()
    courant = dt * max_wave_speed(prim, params) / dx
    if courant > CFL_LIMIT * (1.0 + 1e-12):
        raise CFLError(f"Courant number {courant:.4f} exceeds {CFL_LIMIT}")
    U = step_conservative(prim.to_conservative(params), dt, dx, params, boundary)
    return PrimState.from_conservative(U, params)


# -- trajectories ------------------------------------------------------------

def trace_trajectories(times, centers, u_hist, seeds, x_left, x_right, periodic):
    """Midpoint-rule integration of ``dx/dt = u(x, t)``.

    Velocity is interpolated linearly in space between cell centers and in
    time between stored levels.  Periodic positions are left unwrapped.
    Returns positions of shape ``(len(times), len(seeds))`` and, per seed, the
    index of the first stored time outside the domain (``-1`` if it stays in).
    """
    times = np.asarray(times, dtype=float)
    centers = np.asarray(centers, dtype=float)
    u_hist = np.asarray(u_hist, dtype=float)
    X = np.empty((times.size, len(seeds)))
    X[0] = seeds
    exit_step = np.full(len(seeds), -1)
    period = (x_right - x_left) if periodic else None

    def vel(xq, u):
        if periodic:
            return np.interp(xq, centers, u, period=period)
        return np.interp(xq, centers, u)

    for n in range(times.size - 1):
        dt = times[n + 1] - times[n]
        x = X[n]
        x_half = x + 0.5 * dt * vel(x, u_hist[n])
        x_new = x + dt * vel(x_half, 0.5 * (u_hist[n] + u_hist[n + 1]))
        if not periodic:
            frozen = exit_step >= 0
            x_new = np.where(frozen, x, x_new)
            out = (~frozen) & ((x_new < x_left) | (x_new > x_right))
            exit_step[out] = n + 1
        X[n + 1] = x_new
    return X, exit_step


# -- solution container and driver ------------------------------------------

def uniform_grid(N: int, x_min: float = 0.0, x_max: float = 1.0) -> np.ndarray:
    dx = (x_max - x_min) / N
    return x_min + dx * (np.arange(N) + 0.5)


@dataclass
class FlowSetup:
    x: np.ndarray
    initial: PrimState
    params: GasParams
    t_end: float
    cfl: float = 0.8
    boundary: str = "transmissive"
    output_times: Sequence[float] = ()
    seeds: Sequence[float] = ()

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if not 0.0 < self.cfl <= CFL_LIMIT:
            raise CFLError(f"cfl must lie in (0, {CFL_LIMIT}], got {self.cfl}")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.boundary not in ("transmissive", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")


@dataclass
class Solution1D:
    """Every solver level is stored, so diagnostics can difference in time."""

    x: np.ndarray
    dx: float
    times: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    p: np.ndarray
    params: GasParams
    boundary: str
    output_times: np.ndarray
    seeds: np.ndarray
    trajectories: np.ndarray
    exit_step: np.ndarray
    cfl_max: float
    conserved: np.ndarray = field(repr=False, default=None)  # (nt, 3) sums * dx

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    @property
    def x_left(self) -> float:
        return float(self.x[0] - 0.5 * self.dx)

    @property
    def x_right(self) -> float:
        return float(self.x[-1] + 0.5 * self.dx)

    @property
    def N(self) -> int:
        return self.x.size

    def slice(self, n: int) -> PrimState:
        return PrimState(self.rho[n], self.u[n], self.p[n])

    def index_of(self, t: float) -> int:
        n = int(np.argmin(np.abs(self.times - t)))
        if not np.isclose(self.times[n], t, rtol=0, atol=1e-12 * max(1.0, abs(t))):
            raise KeyError(f"time {t} was not recorded")
        return n

    @property
    def output_indices(self) -> list[int]:
        return [self.index_of(t) for t in self.output_times]

    def entropy(self) -> np.ndarray:
        return gasdyn_entropy(self.p, self.rho, self.params)


def run(setup: FlowSetup) -> Solution1D:
    """Advance ``setup`` to ``t_end`` storing every time level; requested
    output times are hit exactly."""
    params = setup.params
    x = setup.x
    dx = float(x[1] - x[0])
    periodic = setup.boundary == "periodic"
    outs = sorted(float(t) for t in setup.output_times if 0.0 < t <= setup.t_end)
    stops = sorted(set(outs + [setup.t_end]))

    U = setup.initial.validate().to_conservative(params)
    U = np.broadcast_to(U.reshape(3, -1), (3, x.size)).copy()
    times = [0.0]
    hist = [U.copy()]
    t = 0.0
    cfl_max = 0.0
    k = 0
    while k < len(stops):
        prim = PrimState.from_conservative(U, params)
        smax = max_wave_speed(prim, params)
        dt = setup.cfl * dx / smax
        target = stops[k]
        if t + dt >= target * (1.0 - 1e-14):
            dt = target - t
            t_next = target
            k += 1
        else:
            t_next = t + dt
        if dt <= 0:
            continue
        cfl_max = max(cfl_max, dt * smax / dx)
        U = step_conservative(U, dt, dx, params, setup.boundary)
        t = t_next
        times.append(t)
        hist.append(U.copy())

    H = np.array(hist)                       # (nt, 3, N)
    rho = H[:, 0]
    u = H[:, 1] / rho
    p = (params.gamma - 1.0) * (H[:, 2] - 0.5 * rho * u * u)
    times = np.array(times)
    seeds = np.asarray(setup.seeds, dtype=float)
    x_left, x_right = x[0] - 0.5 * dx, x[-1] + 0.5 * dx
    X, exit_step = trace_trajectories(times, x, u, seeds, x_left, x_right, periodic)
    log.debug("run finished: %d steps, cfl_max=%.3f", times.size - 1, cfl_max)
    return Solution1D(
        x=x, dx=dx, times=times, rho=rho, u=u, p=p, params=params,
        boundary=setup.boundary, output_times=np.array(outs), seeds=seeds,
        trajectories=X, exit_step=exit_step, cfl_max=cfl_max,
        conserved=H.sum(axis=2) * dx,
    )


def conservation_defect(sol: Solution1D) -> np.ndarray:
    """Change of total mass, momentum and energy not accounted for by the
    boundary fluxes, per component.  Zero (to rounding) for a conservative
    scheme; transmissive edges pass the flux of the edge cell."""
    change = sol.conserved[-1] - sol.conserved[0]
    if sol.periodic:
        return np.abs(change)
    g = sol.params.gamma
    dt = np.diff(sol.times)
    left = euler_flux(sol.rho[:-1, 0], sol.u[:-1, 0], sol.p[:-1, 0], g)
    right = euler_flux(sol.rho[:-1, -1], sol.u[:-1, -1], sol.p[:-1, -1], g)
    through = np.sum((left - right) * dt, axis=1)
    return np.abs(change - through)


# -- entropy -----------------------------------------------------------------

def entropy_field(prim: PrimState, params: GasParams) -> np.ndarray:
    return gasdyn_entropy(prim.p, prim.rho, params)


def shock_flags(prim: PrimState, params: GasParams, periodic: bool = False,
                threshold: float = 0.05, relative_to: str = "local") -> np.ndarray:
    """Cells adjacent to an interface with a pressure jump above
    ``threshold`` across which a characteristic family converges.

    ``relative_to="local"`` measures the jump against the smaller adjacent
    pressure; ``"range"`` against the pressure range of the whole slice, which
    flags any compression carried by fewer than about ``1/threshold`` cells.
    A range below ``threshold`` times the smallest pressure carries no wave
    worth flagging (rounding noise in a uniform state, for instance).
    """
    p = np.asarray(prim.p, dtype=float)
    u = np.asarray(prim.u, dtype=float)
    a = prim.sound_speed(params)
    nxt = (lambda v: np.roll(v, -1)) if periodic else (lambda v: v[1:])
    cur = (lambda v: v) if periodic else (lambda v: v[:-1])
    dp = np.abs(nxt(p) - cur(p))
    if relative_to == "local":
        jump = dp / np.minimum(nxt(p), cur(p))
    elif relative_to == "range":
        spread = float(p.max() - p.min())
        if spread <= threshold * float(p.min()):
            return np.zeros(p.size, dtype=bool)
        jump = dp / spread
    else:
        raise ValueError(f"unknown relative_to {relative_to!r}")
    converge = (cur(u + a) > nxt(u + a)) | (cur(u - a) > nxt(u - a))
    iface = (jump > threshold) & converge
    flags = np.zeros(p.size, dtype=bool)
    if periodic:
        flags |= iface
        flags |= np.roll(iface, 1)
    else:
        flags[:-1] |= iface
        flags[1:] |= iface
    return flags


@dataclass(frozen=True)
class ShockCrossing:
    t_enter: float
    t_exit: float
    s_before: float
    s_after: float


@dataclass(frozen=True)
class TrajectoryEntropy:
    times: np.ndarray
    x: np.ndarray
    s: np.ndarray
    truncated: bool
    crossings: tuple[ShockCrossing, ...]

    @property
    def drift(self) -> float:
        return float(np.max(np.abs(self.s - self.s[0])))


_CROSSING_GAP = 2


def entropy_along_trajectory(solution: Solution1D, seed: float | int,
                             by_index: bool = False) -> TrajectoryEntropy:
    """Gas-dynamic entropy sampled along one traced trajectory.

    ``seed`` is the seed position (or its index with ``by_index=True``).
    Passes through flagged shock cells are reported as crossings.
    """
    if by_index:
        k = int(seed)
    else:
        matches = np.flatnonzero(np.isclose(solution.seeds, seed, rtol=0, atol=1e-12))
        if matches.size == 0:
            raise KeyError(f"no trajectory was seeded at x={seed}")
        k = int(matches[0])

    n_end = solution.times.size
    truncated = bool(solution.exit_step[k] >= 0)
    if truncated:
        n_end = int(solution.exit_step[k])
    X = solution.trajectories[:n_end, k]
    s_field = solution.entropy()[:n_end]
    period = (solution.x_right - solution.x_left) if solution.periodic else None
    cell_pos = lambda xq: (((xq - solution.x_left) % period) if period else (xq - solution.x_left))
    s = np.array([np.interp(X[n], solution.x, s_field[n], period=period) for n in range(n_end)])

    inside = np.zeros(n_end, dtype=bool)
    for n in range(n_end):
        flags = shock_flags(solution.slice(n), solution.params, solution.periodic)
        if not flags.any():
            continue
        c = int(np.floor(cell_pos(X[n]) / solution.dx))
        lo, hi = c - 1, c + 2
        idx = np.arange(lo, hi)
        idx = idx % solution.N if solution.periodic else idx[(idx >= 0) & (idx < solution.N)]
        inside[n] = flags[idx].any()

    # a smeared front can drop out of the flag set for a step or two while
    # the particle is still inside it; treat such short gaps as one pass
    hits = np.flatnonzero(inside)
    for a, b in zip(hits[:-1], hits[1:]):
        if 1 < b - a <= _CROSSING_GAP + 1:
            inside[a:b] = True

    crossings = []
    n = 0
    while n < n_end:
        if inside[n]:
            m = n
            while m + 1 < n_end and inside[m + 1]:
                m += 1
            before = max(n - 1, 0)
            after = min(m + 1, n_end - 1)
            if m + 1 < n_end:  # only completed passes count
                crossings.append(ShockCrossing(
                    float(solution.times[n]), float(solution.times[m]),
                    float(s[before]), float(s[after])))
            n = m + 1
        else:
            n += 1
    return TrajectoryEntropy(solution.times[:n_end], X, s, truncated, tuple(crossings))


def l1_error(numeric: np.ndarray, exact: np.ndarray, dx: float) -> float:
    return float(np.sum(np.abs(np.asarray(numeric) - np.asarray(exact))) * dx)
