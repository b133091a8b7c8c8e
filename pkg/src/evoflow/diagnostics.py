"""Evolutionary-form diagnostics for 1D flows.

Along a particle trajectory the entropy obeys ``ds = A1 dxi1 + Anu dxi2``,
where ``A1`` collects dissipative sources (zero for an ideal gas) and ``Anu``
is the momentum balance divided by ``T``::

    T * Anu = d(h0)/dx + (U x rot U) - F + du/dt

The commutator ``K = dAnu/dxi1 - dA1/dxi2`` of that form is nonzero wherever
something (nonstationarity, non-potential forces, transport) keeps the
entropy from being a function of position.  This module builds the form on an
accompanying frame, evaluates ``K``, splits the sources, classifies the
instability type and detects local collapses of ``K`` next to emerging
discontinuities.

Frame convention: ``xi1`` is time measured along a trajectory and ``xi2`` is
the trajectory label (its starting position).  Fields computed in the
laboratory frame are resampled onto that grid by linear interpolation.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace

import numpy as np

from . import forms
from .euler1d import PrimState, Solution1D, shock_flags, trace_trajectories
from .thermo import GasParams

log = logging.getLogger(__name__)

# Smallest commutator treated as resolvable; K of exactly uniform data is 0.
NOISE_FLOOR_MIN = 1e-10
# Sources below this fraction of the largest balance term are rounding noise.
DEFAULT_RTOL = 1e-8


@dataclass
class FlowFields:
    """Flow quantities on a (t, x) grid; every field has shape ``(nt, nx)``.

    ``F`` is the body force per unit mass, ``q`` the heat flux, ``tau`` the
    viscous stress, ``swirl`` an injected ``U x rot U`` column for quasi-1D
    inputs and ``potential`` a declared force potential.  Missing optional
    inputs count as zero.
    """

    t: np.ndarray
    x: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    p: np.ndarray
    params: GasParams
    F: np.ndarray | None = None
    q: np.ndarray | None = None
    tau: np.ndarray | None = None
    swirl: np.ndarray | None = None
    potential: np.ndarray | None = None
    excluded_subdomains: bool = False
    periodic: bool = False

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        shape = (self.t.size, self.x.size)
        for name in ("rho", "u", "p", "F", "q", "tau", "swirl", "potential"):
            val = getattr(self, name)
            if val is None:
                continue
            arr = np.broadcast_to(np.asarray(val, dtype=float), shape).copy()
            setattr(self, name, arr)
        if np.any(self.rho <= 0) or np.any(self.p <= 0):
            raise ValueError("rho and p must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.t.size, self.x.size)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def T(self) -> np.ndarray:
        return self.p / (self.rho * self.params.R)

    @property
    def bounds(self) -> tuple[float, float]:
        return float(self.x[0] - 0.5 * self.dx), float(self.x[-1] + 0.5 * self.dx)

    @classmethod
    def from_solution(cls, sol: Solution1D, **extra) -> "FlowFields":
        return cls(sol.times, sol.x, sol.rho, sol.u, sol.p, sol.params,
                   periodic=sol.periodic, **extra)

    def slice(self, n: int) -> PrimState:
        return PrimState(self.rho[n], self.u[n], self.p[n])

    # finite differences, second order
    def ddx(self, f: np.ndarray) -> np.ndarray:
        if self.periodic:
            return (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) / (2.0 * self.dx)
        return np.gradient(f, self.x, axis=1, edge_order=2)

    def ddt(self, f: np.ndarray) -> np.ndarray:
        if self.t.size < 2:
            return np.zeros_like(f)
        return np.gradient(f, self.t, axis=0, edge_order=2 if self.t.size > 2 else 1)


@dataclass(frozen=True)
class A1Terms:
    heat: np.ndarray
    viscous: np.ndarray
    missing: frozenset[str]

    @property
    def total(self) -> np.ndarray:
        return self.heat + self.viscous


def a1_viscous(fields: FlowFields) -> A1Terms:
    """Entropy source along trajectories of a viscous, heat-conducting gas::

        A1 = (1/rho) d(-q/T)/dx - q/(rho T) dT/dx + (tau/rho) du/dx

    Missing ``q`` or ``tau`` are taken as zero and listed in ``missing``.
    """
    missing = frozenset(n for n in ("q", "tau") if getattr(fields, n) is None)
    if missing:
        log.debug("a1_viscous: treating %s as zero", ", ".join(sorted(missing)))
    rho, T = fields.rho, fields.T
    if fields.q is None:
        heat = np.zeros(fields.shape)
    else:
        q = fields.q
        heat = fields.ddx(-q / T) / rho - q / (rho * T) * fields.ddx(T)
    if fields.tau is None:
        viscous = np.zeros(fields.shape)
    else:
        viscous = fields.tau / rho * fields.ddx(fields.u)
    return A1Terms(heat, viscous, missing)


@dataclass(frozen=True)
class SourceBreakdown:
    """Terms of the momentum balance feeding ``Anu`` (all times T)."""

    nonstationary: np.ndarray   # du/dt
    potential: np.ndarray       # gradient part of F
    nonpotential: np.ndarray    # F minus its best gradient fit
    convective: np.ndarray      # U x rot U (zero in strict 1D)
    h0_gradient: np.ndarray     # d(u^2/2 + h)/dx
    viscous: np.ndarray
    heat: np.ndarray
    T: np.ndarray

    def reassembled(self) -> np.ndarray:
        """``T * Anu``."""
        return (self.h0_gradient + self.convective
                - (self.potential + self.nonpotential) + self.nonstationary)

    @property
    def A1(self) -> np.ndarray:
        return self.heat + self.viscous

    def scaled(self, factor: float) -> "SourceBreakdown":
        kw = {n: getattr(self, n) * factor for n in
              ("nonstationary", "potential", "nonpotential", "convective",
               "h0_gradient", "viscous", "heat")}
        return replace(self, **kw)


def force_split(fields: FlowFields) -> tuple[np.ndarray, np.ndarray]:
    """Gradient and non-gradient parts of ``F``.

    With a declared ``potential`` the gradient part is ``dPhi/dx``.  Otherwise
    the best time-independent potential is fitted: its gradient is the time
    mean of ``F``, minus the spatial mean on a periodic domain (a force with
    nonzero circulation around the ring has no single-valued potential).
    """
    zeros = np.zeros(fields.shape)
    if fields.F is None:
        return zeros, zeros
    F = fields.F
    if fields.potential is not None:
        grad = fields.ddx(fields.potential)
    else:
        grad = np.broadcast_to(F.mean(axis=0), fields.shape).copy()
        if fields.periodic:
            grad -= grad.mean(axis=1, keepdims=True)
    return grad, F - grad


def source_breakdown(fields: FlowFields) -> SourceBreakdown:
    g = fields.params.gamma
    h = g / (g - 1.0) * fields.p / fields.rho
    h0 = 0.5 * fields.u**2 + h
    potential, nonpotential = force_split(fields)
    a1 = a1_viscous(fields)
    return SourceBreakdown(
        nonstationary=fields.ddt(fields.u),
        potential=potential,
        nonpotential=nonpotential,
        convective=np.zeros(fields.shape) if fields.swirl is None else fields.swirl,
        h0_gradient=fields.ddx(h0),
        viscous=a1.viscous,
        heat=a1.heat,
        T=fields.T,
    )


def a_nu(fields: FlowFields, breakdown: SourceBreakdown | None = None) -> np.ndarray:
    """Normal coefficient of the evolutionary form in the laboratory frame
    (``eta = x`` at fixed ``t``)."""
    b = breakdown if breakdown is not None else source_breakdown(fields)
    return b.reassembled() / b.T


# -- accompanying frame ------------------------------------------------------

@dataclass(frozen=True)
class EvolutionaryForm:
    A1: np.ndarray          # (nt, nlabels)
    Anu: np.ndarray         # (nt, nlabels)
    grid: forms.Grid2D      # xi1 = t, xi2 = trajectory label
    positions: np.ndarray   # x of each label at each time
    period: float | None = None

    def as_one_form(self) -> forms.OneForm2D:
        return forms.OneForm2D(self.A1, self.Anu, self.grid)

    def to_lab(self, field: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Resample a frame field back onto laboratory positions ``x``."""
        out = np.empty((field.shape[0], x.size))
        for n in range(field.shape[0]):
            out[n] = np.interp(x, self.positions[n], field[n], period=self.period)
        return out


def _to_frame(field: np.ndarray, x: np.ndarray, X: np.ndarray, period) -> np.ndarray:
    return np.stack([np.interp(X[n], x, field[n], period=period) for n in range(X.shape[0])])


def evolutionary_form(fields: FlowFields, labels: np.ndarray | None = None,
                      breakdown: SourceBreakdown | None = None,
                      A1: np.ndarray | None = None,
                      Anu: np.ndarray | None = None) -> EvolutionaryForm:
    """Build ``A1 dxi1 + Anu dxi2`` on the trajectory frame.

    ``A1``/``Anu`` may be supplied as laboratory-frame fields; by default they
    come from :func:`a1_viscous` and :func:`a_nu`.
    """
    if fields.t.size < 3:
        raise ValueError("the frame needs at least 3 time levels")
    b = breakdown if breakdown is not None else source_breakdown(fields)
    A1 = b.A1 if A1 is None else np.broadcast_to(A1, fields.shape)
    Anu = a_nu(fields, b) if Anu is None else np.broadcast_to(Anu, fields.shape)
    labels = fields.x if labels is None else np.asarray(labels, dtype=float)
    x_left, x_right = fields.bounds
    X, _ = trace_trajectories(fields.t, fields.x, fields.u, labels, x_left, x_right,
                              fields.periodic)
    period = (x_right - x_left) if fields.periodic else None
    return EvolutionaryForm(
        A1=_to_frame(A1, fields.x, X, period),
        Anu=_to_frame(Anu, fields.x, X, period),
        grid=forms.Grid2D(fields.t, labels),
        positions=X,
        period=period,
    )


def evolutionary_commutator(form: EvolutionaryForm) -> forms.CommutatorField:
    return forms.commutator(form.as_one_form())


def reconstruct_entropy(form: EvolutionaryForm, tol: float):
    """Integrate ``ds = omega`` when the form is closed (see
    :func:`forms.potential_reconstruct`).  The potential is the
    thermodynamic entropy ``c_v ln(p / rho^gamma)`` up to a constant."""
    return forms.potential_reconstruct(form.as_one_form(), tol)


def noise_floor(fields: FlowFields) -> float:
    """Commutator level of a uniform flow on the same grid, with the mean
    state of ``fields``; never below :data:`NOISE_FLOOR_MIN`."""
    mean = lambda f: np.full(fields.shape, float(np.mean(f)))
    calib = FlowFields(fields.t, fields.x, mean(fields.rho), mean(fields.u), mean(fields.p),
                       fields.params, periodic=fields.periodic)
    K = evolutionary_commutator(evolutionary_form(calib))
    return max(K.max_abs, NOISE_FLOOR_MIN)


# -- classification ----------------------------------------------------------

class InstabilityClass(enum.Enum):
    Stable = "Stable"
    ShockType = "ShockType"
    ConvectiveVortex = "ConvectiveVortex"
    TurbulentPulsation = "TurbulentPulsation"


def _decide(nonstat, nonpot, conv, a1, tol) -> InstabilityClass:
    force = max(nonstat, nonpot, conv)
    if force <= tol and a1 <= tol:
        return InstabilityClass.Stable
    if a1 > tol:
        return InstabilityClass.TurbulentPulsation
    if nonstat >= max(nonpot, conv):
        return InstabilityClass.ShockType
    return InstabilityClass.ConvectiveVortex


def _significance(breakdown: SourceBreakdown, A1: np.ndarray, tol: float, rtol: float) -> float:
    """Level above which a source counts: the absolute ``tol`` or ``rtol``
    times the largest term of the balance, whichever is larger."""
    terms = (breakdown.h0_gradient, breakdown.nonstationary, breakdown.potential,
             breakdown.nonpotential, breakdown.convective, A1)
    scale = max((float(np.max(np.abs(f))) for f in terms if np.size(f)), default=0.0)
    return max(tol, rtol * scale)


def classify(breakdown: SourceBreakdown, A1: np.ndarray | None = None,
             tol: float = 10 * NOISE_FLOOR_MIN, rtol: float = DEFAULT_RTOL) -> InstabilityClass:
    """Decision table over the sup norms of the sources.

    Dissipative sources (``A1``) dominate the verdict when significant;
    otherwise nonstationarity points to shocks and non-potential or
    convective forcing to vortex-type instability.  Significance is judged
    against ``max(tol, rtol * largest balance term)``, so rounding noise in
    an otherwise steady run does not count as a source.
    """
    A1 = breakdown.A1 if A1 is None else A1
    level = _significance(breakdown, A1, tol, rtol)
    norm = lambda f: float(np.max(np.abs(f))) if np.size(f) else 0.0
    return _decide(norm(breakdown.nonstationary), norm(breakdown.nonpotential),
                   norm(breakdown.convective), norm(A1), level)


def classify_pointwise(breakdown: SourceBreakdown, A1: np.ndarray | None = None,
                       tol: float = 10 * NOISE_FLOOR_MIN,
                       rtol: float = DEFAULT_RTOL) -> np.ndarray:
    A1 = breakdown.A1 if A1 is None else A1
    level = _significance(breakdown, A1, tol, rtol)
    ns, npot, cv, a1 = (np.abs(f) for f in (breakdown.nonstationary, breakdown.nonpotential,
                                             breakdown.convective, A1))
    out = np.empty(ns.shape, dtype=object)
    for idx in np.ndindex(ns.shape):
        out[idx] = _decide(ns[idx], npot[idx], cv[idx], a1[idx], level).value
    return out


@dataclass(frozen=True)
class LagrangeVerdict:
    steady: bool
    potential_forces: bool
    simply_connected: bool
    max_commutator: float
    commutator_tol: float

    @property
    def stable(self) -> bool:
        return self.steady and self.potential_forces and self.simply_connected

    @property
    def commutator_vanishes(self) -> bool:
        return self.max_commutator <= self.commutator_tol

    def __bool__(self) -> bool:
        return self.stable


def lagrange_check(fields: FlowFields, tol: float = 1e-8,
                   commutator_tol: float | None = None) -> LagrangeVerdict:
    """Lagrange's condition for eddy-free flow: steady, potential forces,
    simply connected domain (declared through ``excluded_subdomains``).

    The commutator is evaluated as well; for fields that satisfy the balance
    laws a stable verdict comes with a vanishing commutator, and a mismatch
    is logged.
    """
    b = source_breakdown(fields)
    steady = float(np.max(np.abs(b.nonstationary))) <= tol
    potential = float(np.max(np.abs(b.nonpotential))) <= tol
    K = evolutionary_commutator(evolutionary_form(fields, breakdown=b)).max_abs
    ktol = commutator_tol if commutator_tol is not None else 10.0 * noise_floor(fields)
    verdict = LagrangeVerdict(steady, potential, not fields.excluded_subdomains, K, ktol)
    if verdict.stable and not verdict.commutator_vanishes:
        log.warning("Lagrange-stable fields with max|K| = %.3e > %.3e; "
                    "inputs may violate the balance laws", K, ktol)
    return verdict


# -- transitions -------------------------------------------------------------

@dataclass(frozen=True)
class TransitionEvent:
    t: float
    x: float
    window: int
    K_before: float
    K_after: float


def window_commutator(K_lab: np.ndarray, window: int) -> np.ndarray:
    """Max ``|K|`` over the interior cells of consecutive ``window``-cell
    windows; shape ``(nt, nwindows)``."""
    nt, nx = K_lab.shape
    nw = nx // window
    out = np.zeros((nt, nw))
    for w in range(nw):
        lo, hi = w * window + 1, (w + 1) * window - 1
        out[:, w] = np.max(np.abs(K_lab[:, lo:hi]), axis=1)
    return out


def transition_detector(source: Solution1D | FlowFields, window: int = 8,
                        collapse: float = 0.5, tol: float | None = None,
                        flag_threshold: float = 0.05,
                        memory: int | None = None) -> list[TransitionEvent]:
    """Find local domains whose commutator collapses while a discontinuity
    sits on their boundary.

    A window's interior ``max|K|`` counts as collapsed at step ``n`` when it
    is at most ``collapse`` times its peak over the previous ``memory`` steps
    (default: ``window`` steps, roughly the time a front needs to cross the
    window at CFL <= 0.9) and that peak was significant (above ``tol``,
    default ten times the noise floor).  An event is emitted at the onset of
    a collapse if a shock-flagged cell touches one of the window edges.
    Events are ordered by time, then position.
    """
    if window < 3:
        raise ValueError("window must span at least 3 cells")
    memory = window if memory is None else int(memory)
    if memory < 1:
        raise ValueError("memory must be at least 1 step")
    fields = source if isinstance(source, FlowFields) else FlowFields.from_solution(source)
    if fields.t.size < 3:
        raise ValueError("need at least 3 time levels")
    form = evolutionary_form(fields)
    K = evolutionary_commutator(form).K
    K_lab = form.to_lab(K, fields.x)
    Kw = window_commutator(K_lab, window)
    sig = tol if tol is not None else 10.0 * noise_floor(fields)

    nt, nw = Kw.shape
    peak = np.zeros_like(Kw)
    for n in range(1, nt):
        peak[n] = Kw[max(0, n - memory):n].max(axis=0)
    collapsed = (peak > sig) & (Kw <= collapse * peak)
    collapsed[0] = False
    onset = collapsed.copy()
    onset[1:] &= ~collapsed[:-1]

    nx = fields.x.size
    x_left, _ = fields.bounds
    events = []
    for n in np.flatnonzero(onset.any(axis=1)):
        flags = shock_flags(fields.slice(n), fields.params, fields.periodic,
                            threshold=flag_threshold, relative_to="range")
        if not flags.any():
            continue
        for w in np.flatnonzero(onset[n]):
            for edge in (w * window, (w + 1) * window):
                cells = np.array([edge - 1, edge])
                cells = cells % nx if fields.periodic else cells[(cells >= 0) & (cells < nx)]
                if flags[cells].any():
                    events.append(TransitionEvent(float(fields.t[n]),
                                                  float(x_left + edge * fields.dx),
                                                  int(w), float(peak[n, w]), float(Kw[n, w])))
                    break
    events.sort(key=lambda e: (e.t, e.x))
    return events
