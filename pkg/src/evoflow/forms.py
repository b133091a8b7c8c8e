"""Degree-1 forms ``A1 dxi1 + A2 dxi2`` sampled on a rectangular 2D grid.

Fields are stored as arrays of shape ``(len(xi1), len(xi2))``: axis 0 runs
along xi1, axis 1 along xi2.  Derivatives are second-order finite differences
(``numpy.gradient`` with second-order edges); boundary nodes are excluded from
closedness verdicts because their stencils are one-sided.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Grid2D:
    xi1: np.ndarray
    xi2: np.ndarray

    def __post_init__(self):
        for name in ("xi1", "xi2"):
            axis = np.asarray(getattr(self, name), dtype=float)
            if axis.ndim != 1 or axis.size < 3:
                raise ValueError(f"{name} needs at least 3 points")
            if np.any(np.diff(axis) <= 0):
                raise ValueError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, axis)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.xi1.size, self.xi2.size)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xi1, self.xi2, indexing="ij")

    def transposed(self) -> "Grid2D":
        return Grid2D(self.xi2, self.xi1)

    @property
    def extent(self) -> float:
        return float((self.xi1[-1] - self.xi1[0]) * (self.xi2[-1] - self.xi2[0]))


@dataclass(frozen=True)
class OneForm2D:
    A1: np.ndarray
    A2: np.ndarray
    grid: Grid2D

    def __post_init__(self):
        for name in ("A1", "A2"):
            field = np.asarray(getattr(self, name), dtype=float)
            if field.shape != self.grid.shape:
                raise ValueError(
                    f"{name} has shape {field.shape}, grid is {self.grid.shape}"
                )
            object.__setattr__(self, name, field)

    @classmethod
    def from_functions(cls, grid: Grid2D, f1, f2) -> "OneForm2D":
        X1, X2 = grid.mesh()
        return cls(np.broadcast_to(f1(X1, X2), grid.shape).astype(float),
                   np.broadcast_to(f2(X1, X2), grid.shape).astype(float), grid)

    def transposed(self) -> "OneForm2D":
        """The same form with the roles of the two axes swapped."""
        return OneForm2D(self.A2.T, self.A1.T, self.grid.transposed())


@dataclass(frozen=True)
class CommutatorField:
    K: np.ndarray
    max_abs: float

    @property
    def interior(self) -> np.ndarray:
        return self.K[1:-1, 1:-1]


def commutator(form: OneForm2D) -> CommutatorField:
    """``K = dA2/dxi1 - dA1/dxi2`` on every node; ``max_abs`` over interior nodes."""
    g = form.grid
    dA2 = np.gradient(form.A2, g.xi1, axis=0, edge_order=2)
    dA1 = np.gradient(form.A1, g.xi2, axis=1, edge_order=2)
    K = dA2 - dA1
    return CommutatorField(K, float(np.max(np.abs(K[1:-1, 1:-1]))))


def is_closed(form: OneForm2D, tol: float) -> tuple[bool, float]:
    c = commutator(form)
    return c.max_abs <= tol, c.max_abs


# -- paths -------------------------------------------------------------------

@dataclass(frozen=True)
class GridPath:
    """Sequence of grid vertices ``(i, j)``; consecutive vertices must differ
    by one index along exactly one axis."""

    vertices: tuple[tuple[int, int], ...]

    def __post_init__(self):
        verts = tuple((int(i), int(j)) for i, j in self.vertices)
        if len(verts) < 2:
            raise ValueError("a path needs at least 2 vertices")
        for (i0, j0), (i1, j1) in zip(verts, verts[1:]):
            if abs(i1 - i0) + abs(j1 - j0) != 1:
                raise ValueError(f"vertices {(i0, j0)} and {(i1, j1)} are not adjacent")
        object.__setattr__(self, "vertices", verts)

    @property
    def is_loop(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    @classmethod
    def through(cls, corners: Sequence[tuple[int, int]]) -> "GridPath":
        """Axis-aligned polyline through ``corners``, filled in vertex by vertex."""
        corners = [(int(i), int(j)) for i, j in corners]
        verts = [corners[0]]
        for (i1, j1) in corners[1:]:
            i0, j0 = verts[-1]
            if i0 != i1 and j0 != j1:
                raise ValueError("corners must be joined by axis-aligned legs")
            step_i = (i1 > i0) - (i1 < i0)
            step_j = (j1 > j0) - (j1 < j0)
            while verts[-1] != (i1, j1):
                i, j = verts[-1]
                verts.append((i + step_i, j + step_j))
        return cls(tuple(verts))

    @classmethod
    def rectangle(cls, i0: int, i1: int, j0: int, j1: int) -> "GridPath":
        """Counterclockwise loop around the index box ``[i0, i1] x [j0, j1]``."""
        if not (i0 < i1 and j0 < j1):
            raise ValueError("rectangle needs i0 < i1 and j0 < j1")
        return cls.through([(i0, j0), (i1, j0), (i1, j1), (i0, j1), (i0, j0)])

    def bounding_box(self) -> tuple[int, int, int, int]:
        ii = [v[0] for v in self.vertices]
        jj = [v[1] for v in self.vertices]
        return min(ii), max(ii), min(jj), max(jj)


def path_integral(form: OneForm2D, path: GridPath) -> float:
    """Trapezoidal line integral of the form along ``path``."""
    g = form.grid
    n1, n2 = g.shape
    total = 0.0
    for (i0, j0), (i1, j1) in zip(path.vertices, path.vertices[1:]):
        if not (0 <= i0 < n1 and 0 <= i1 < n1 and 0 <= j0 < n2 and 0 <= j1 < n2):
            raise ValueError("path leaves the grid")
        if i0 != i1:
            total += 0.5 * (form.A1[i0, j0] + form.A1[i1, j1]) * (g.xi1[i1] - g.xi1[i0])
        else:
            total += 0.5 * (form.A2[i0, j0] + form.A2[i1, j1]) * (g.xi2[j1] - g.xi2[j0])
    return float(total)


def _check_rectangle(loop: GridPath) -> tuple[int, int, int, int]:
    i0, i1, j0, j1 = loop.bounding_box()
    if not loop.is_loop or i0 == i1 or j0 == j1:
        raise ValueError("expected a closed rectangular loop")
    perimeter = 2 * ((i1 - i0) + (j1 - j0))
    on_edge = all(i in (i0, i1) or j in (j0, j1) for i, j in loop.vertices)
    if len(loop.vertices) - 1 != perimeter or not on_edge or len(set(loop.vertices)) != perimeter:
        raise ValueError("loop is not the boundary of a grid rectangle")
    return i0, i1, j0, j1


def _orientation(loop: GridPath) -> float:
    """+1 for counterclockwise loops, -1 for clockwise (shoelace on indices)."""
    v = np.array(loop.vertices, dtype=float)
    area2 = np.sum(v[:-1, 0] * v[1:, 1] - v[1:, 0] * v[:-1, 1])
    return 1.0 if area2 > 0 else -1.0


def area_integral(form: OneForm2D, loop: GridPath) -> float:
    """Trapezoidal area integral of the commutator over the rectangle enclosed
    by ``loop``, signed by the loop's orientation."""
    i0, i1, j0, j1 = _check_rectangle(loop)
    g = form.grid
    K = commutator(form).K[i0:i1 + 1, j0:j1 + 1]
    inner = np.trapezoid(K, g.xi2[j0:j1 + 1], axis=1)
    return float(_orientation(loop) * np.trapezoid(inner, g.xi1[i0:i1 + 1]))


def stokes_defect(form: OneForm2D, loop: GridPath) -> float:
    """``|loop integral - area integral of K|`` for a rectangular loop."""
    return abs(path_integral(form, loop) - area_integral(form, loop))


# -- potentials --------------------------------------------------------------

@dataclass(frozen=True)
class Potential:
    psi: np.ndarray
    path_defect: float


@dataclass(frozen=True)
class ReconstructionFailure:
    obstruction: CommutatorField
    reason: str

    def __bool__(self) -> bool:
        return False


def _cumtrapz(y: np.ndarray, x: np.ndarray, axis: int) -> np.ndarray:
    y = np.moveaxis(y, axis, 0)
    dx = np.diff(x).reshape((-1,) + (1,) * (y.ndim - 1))
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * dx, axis=0)
    return np.moveaxis(out, 0, axis)


def potential_reconstruct(form: OneForm2D, tol: float) -> Potential | ReconstructionFailure:
    """Integrate a closed form to a potential ``psi`` with ``psi = 0`` at the
    first grid node.

    Two axis-first paths are used (xi1 then xi2, and xi2 then xi1); the
    returned potential is their mean and ``path_defect`` their largest
    difference.  A form that is not closed within ``tol`` yields a
    :class:`ReconstructionFailure` carrying the commutator.
    """
    g = form.grid
    c = commutator(form)
    if c.max_abs > tol:
        return ReconstructionFailure(c, f"max |K| = {c.max_abs:.3e} exceeds tol = {tol:.3e}")

    along1 = _cumtrapz(form.A1[:, :1], g.xi1, axis=0)            # psi(xi1, xi2_0)
    first_1 = along1 + _cumtrapz(form.A2, g.xi2, axis=1)
    along2 = _cumtrapz(form.A2[:1, :], g.xi2, axis=1)            # psi(xi1_0, xi2)
    first_2 = along2 + _cumtrapz(form.A1, g.xi1, axis=0)
    defect = float(np.max(np.abs(first_1 - first_2)))
    if defect > 10.0 * max(tol, np.finfo(float).eps) * max(g.extent, 1.0):
        return ReconstructionFailure(c, f"path dependence {defect:.3e} too large")
    return Potential(0.5 * (first_1 + first_2), defect)
