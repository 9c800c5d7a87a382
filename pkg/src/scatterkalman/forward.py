"""Discretised Lippmann-Schwinger solver, far-field map and its Frechet derivative.

The volume integral is collocated at cell centres with a one-point rule off
the diagonal. The self-cell integral of the fundamental solution over the
square cell is evaluated exactly in polar coordinates, using

    int_0^R H0(k r) r dr = R H1(k R) / k + 2i / (pi k^2)

on each of the eight triangles that make up the square.

With ``L = I - k^2 G diag(q)`` the discrete quantities are::

    u_q        = L^{-1} u_inc
    F(q)       = C (q * u_q)
    F'[q] m    = C (q * v + m * u_q),   v = L^{-1} k^2 G (m * u_q)

so the Frechet matrix for direction theta factors as
``(C + k^2 C diag(q) L^{-1} G) diag(u_q)``; the bracket does not depend on the
direction and is computed once per linearisation point.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, gmres

from .grid import Grid, MediumField, unit_directions
from .specfun import hankel1_0, hankel1_1

RCOND_MIN = 1e-12
RESIDUAL_TOL = 1e-10


class SolverError(RuntimeError):
    """The discrete Lippmann-Schwinger system could not be solved."""


def fundamental_solution(k, r):
    """``Phi(r) = (i/4) H0^(1)(k r)`` for ``r > 0``."""
    return 0.25j * hankel1_0(k * np.asarray(r, dtype=float))


def self_cell_integral(k: float, h: float, nodes: int = 32) -> complex:
    """Integral of ``Phi(|y|)`` over the square ``[-h/2, h/2]^2``."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    phi = 0.125 * np.pi * (t + 1.0)  # map [-1, 1] onto [0, pi/4]
    radius = 0.5 * h / np.cos(phi)
    radial = radius * hankel1_1(k * radius) / k + 2j / (np.pi * k * k)
    # 8 triangles, each weighted by i/4, and the Jacobian pi/8 of the angle map.
    return complex(8 * 0.25j * (np.pi / 8) * np.dot(w, radial))


def _check_wavenumber(k):
    if not (np.isfinite(k) and k > 0):
        raise ValueError(f"wavenumber must be positive, got {k!r}")


@dataclass(frozen=True, eq=False)
class GreenMatrix:
    """Dense ``D x D`` collocation matrix of the volume potential.

    ``kernel[d2 + 2M - 1, d1 + 2M - 1]`` holds the entry for cell offset
    ``(d1, d2)``; the matrix is block Toeplitz with Toeplitz blocks.
    """

    grid: Grid
    wavenumber: float
    kernel: np.ndarray = field(repr=False)

    @cached_property
    def entries(self) -> np.ndarray:
        off = self.grid.side - 1
        idx = self.grid.indices
        d1 = idx[:, 0][:, None] - idx[:, 0][None, :]
        d2 = idx[:, 1][:, None] - idx[:, 1][None, :]
        return self.kernel[d2 + off, d1 + off]

    @cached_property
    def _kernel_fft(self):
        n = self.grid.side
        L = 2 * n
        padded = np.zeros((L, L), dtype=complex)
        d = np.arange(-(n - 1), n)
        padded[np.ix_(d % L, d % L)] = self.kernel
        return np.fft.fft2(padded)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """``G @ v`` through a circulant embedding and FFTs."""
        n = self.grid.side
        padded = np.zeros((2 * n, 2 * n), dtype=complex)
        padded[:n, :n] = np.asarray(v).reshape(n, n)
        conv = np.fft.ifft2(np.fft.fft2(padded) * self._kernel_fft)
        return conv[:n, :n].ravel()


def assemble_green_matrix(grid: Grid, k: float) -> GreenMatrix:
    _check_wavenumber(k)
    h = grid.cell_width
    d = np.arange(-(grid.side - 1), grid.side)
    d1, d2 = np.meshgrid(d, d, indexing="xy")
    r = h * np.hypot(d1, d2)
    centre = grid.side - 1
    r[centre, centre] = 1.0  # placeholder, overwritten below
    kernel = grid.cell_area * fundamental_solution(k, r)
    kernel[centre, centre] = self_cell_integral(k, h)
    kernel.setflags(write=False)
    return GreenMatrix(grid, float(k), kernel)


@dataclass(frozen=True, eq=False)
class FarFieldRowOperator:
    """``J x D`` quadrature matrix mapping ``q * u`` to far-field samples."""

    grid: Grid
    wavenumber: float
    observations: np.ndarray
    entries: np.ndarray = field(repr=False)

    @property
    def n_obs(self) -> int:
        return len(self.observations)


def far_field_constant(k: float) -> complex:
    return k * k * np.exp(0.25j * np.pi) / np.sqrt(8 * np.pi * k)


def assemble_far_field_operator(grid: Grid, k: float, observations) -> FarFieldRowOperator:
    """Build ``C[j, c] = const * h^2 * exp(-i k xhat_j . y_c)``.

    ``observations`` is either a count ``J`` (equispaced directions) or a
    ``(J, 2)`` array of unit vectors.
    """
    _check_wavenumber(k)
    if np.ndim(observations) == 0:
        observations = unit_directions(int(observations))
    xhat = np.asarray(observations, dtype=float)
    phase = np.exp(-1j * k * (xhat @ grid.centers.T))
    C = far_field_constant(k) * grid.cell_area * phase
    return FarFieldRowOperator(grid, float(k), xhat, C)


@dataclass(frozen=True, eq=False)
class TotalField:
    grid: Grid
    direction: np.ndarray
    values: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class LinearizedOperator:
    """Frechet derivative of the far-field map at ``point`` for one direction."""

    point: MediumField
    direction: np.ndarray
    entries: np.ndarray = field(repr=False)

    @property
    def shape(self):
        return self.entries.shape

    def __matmul__(self, m):
        return self.entries @ np.asarray(m)


def incident_field(grid: Grid, k: float, theta) -> np.ndarray:
    """Plane wave ``exp(i k y . theta)`` at the cell centres; ``theta`` may be ``(N, 2)``."""
    theta = np.asarray(theta, dtype=float)
    return np.exp(1j * k * (grid.centers @ theta.T))


def _values(q, grid: Grid) -> np.ndarray:
    if isinstance(q, MediumField):
        if q.grid != grid:
            raise ValueError("medium field and operator grids differ")
        return q.values
    vals = np.asarray(q, dtype=complex).ravel()
    if vals.size != grid.size:
        raise ValueError(f"expected {grid.size} cell values, got {vals.size}")
    return vals


def system_matrix(G: GreenMatrix, q) -> np.ndarray:
    """``I - k^2 G diag(q)``."""
    qv = _values(q, G.grid)
    k2 = G.wavenumber**2
    return np.eye(G.grid.size) - k2 * G.entries * qv[None, :]


class Factorization:
    """LU factorisation of ``I - k^2 G diag(q)``, reused for all right-hand sides."""

    def __init__(self, G: GreenMatrix, q):
        self.G = G
        self.q = _values(q, G.grid)
        self.matrix = system_matrix(G, self.q)
        self.anorm = np.linalg.norm(self.matrix, 1)
        self.lu, self.piv = sla.lu_factor(self.matrix, check_finite=False)
        gecon = sla.get_lapack_funcs("gecon", (self.lu,))
        rcond, info = gecon(self.lu, self.anorm, norm="1")
        if info != 0 or not np.isfinite(rcond) or rcond < RCOND_MIN:
            raise SolverError(
                f"Lippmann-Schwinger system is numerically singular (rcond={rcond:.3e})"
            )
        self.rcond = float(rcond)

    def solve(self, rhs: np.ndarray, trans: int = 0) -> np.ndarray:
        return sla.lu_solve((self.lu, self.piv), rhs, trans=trans, check_finite=False)

    def total_fields(self, u_inc: np.ndarray) -> np.ndarray:
        """Solve for one or many incident fields and enforce the residual bound."""
        u = self.solve(u_inc)
        residual = self.matrix @ u - u_inc
        bound = RESIDUAL_TOL * np.linalg.norm(u_inc, axis=0)
        if np.any(np.linalg.norm(residual, axis=0) > bound):
            raise SolverError("Lippmann-Schwinger residual exceeds tolerance after direct solve")
        return u


def solve_total_field(G: GreenMatrix, q, theta, method: str = "dense", tol: float = 1e-13) -> TotalField:
    """Solve ``(I - k^2 G diag(q)) u = u_inc`` for one incident direction.

    ``method="fft"`` uses GMRES with an FFT-accelerated matrix-vector product
    instead of a dense LU factorisation.
    """
    qv = _values(q, G.grid)
    theta = np.asarray(theta, dtype=float)
    u_inc = incident_field(G.grid, G.wavenumber, theta)
    if method == "dense":
        u = Factorization(G, qv).total_fields(u_inc)
    elif method == "fft":
        u = _solve_fft(G, qv, u_inc, tol)
    else:
        raise ValueError(f"unknown solver method {method!r}")
    return TotalField(G.grid, theta, u)


def _solve_fft(G: GreenMatrix, qv, u_inc, tol):
    D = G.grid.size
    k2 = G.wavenumber**2
    op = LinearOperator((D, D), matvec=lambda v: v - k2 * G.matvec(qv * v.ravel()), dtype=complex)
    iterations = 0

    def count(_):
        nonlocal iterations
        iterations += 1

    u, info = gmres(op, u_inc, rtol=tol, atol=0.0, restart=min(D, 200), maxiter=20,
                    callback=count, callback_type="pr_norm")
    residual = np.linalg.norm(op.matvec(u) - u_inc)
    if info != 0 or residual > RESIDUAL_TOL * np.linalg.norm(u_inc):
        raise SolverError(f"GMRES did not converge after {iterations} iterations (info={info})")
    return u


def far_field(C: FarFieldRowOperator, G: GreenMatrix, q, theta) -> np.ndarray:
    """Far-field samples ``C (q * u_q)`` for incident direction ``theta``."""
    qv = _values(q, G.grid)
    u = solve_total_field(G, qv, theta).values
    return C.entries @ (qv * u)


def frechet_apply(C: FarFieldRowOperator, G: GreenMatrix, q, m, theta) -> np.ndarray:
    """Action of the Frechet derivative at ``q`` on the perturbation ``m``."""
    qv = _values(q, G.grid)
    mv = _values(m, G.grid)
    fact = Factorization(G, qv)
    u = fact.total_fields(incident_field(G.grid, G.wavenumber, theta))
    v = fact.solve(G.wavenumber**2 * (G.entries @ (mv * u)))
    return C.entries @ (qv * v + mv * u)


def _sensitivity(C: FarFieldRowOperator, fact: Factorization) -> np.ndarray:
    # C + k^2 C diag(q) L^{-1} G, via the transposed LU solve.
    G = fact.G
    CQ = C.entries * fact.q[None, :]
    CQLinv = fact.solve(CQ.T, trans=1).T
    return C.entries + G.wavenumber**2 * (CQLinv @ G.entries)


def assemble_frechet_matrix(C: FarFieldRowOperator, G: GreenMatrix, q, theta) -> LinearizedOperator:
    qv = _values(q, G.grid)
    fact = Factorization(G, qv)
    theta = np.asarray(theta, dtype=float)
    u = fact.total_fields(incident_field(G.grid, G.wavenumber, theta))
    A = _sensitivity(C, fact) * u[None, :]
    point = q if isinstance(q, MediumField) else MediumField(G.grid, qv)
    return LinearizedOperator(point, theta, A)


def adjoint_weight(n_obs: int, grid: Grid) -> float:
    """Ratio ``w_Y / w_X = (2 pi / J) / h^2`` of the discrete inner-product weights."""
    return (2.0 * np.pi / n_obs) / grid.cell_area


def weighted_adjoint(A, r: float = 1.0, weight: float | None = None) -> np.ndarray:
    """Adjoint of ``A`` between the weighted spaces ``X`` and ``(Y, R^{-1})``, ``R = r I``.

    Returns ``(w_Y / w_X) conj(A).T / r`` so that
    ``<A m, f>_{Y, R^-1} == <m, A* f>_X``. ``weight`` overrides ``w_Y / w_X``;
    by default it is derived from a :class:`LinearizedOperator`'s grid and row
    count, or taken as 1 for a bare matrix.
    """
    if not (np.isfinite(r) and r > 0):
        raise ValueError(f"measurement weight r must be positive, got {r!r}")
    if isinstance(A, LinearizedOperator):
        if weight is None:
            weight = adjoint_weight(A.shape[0], A.point.grid)
        A = A.entries
    elif weight is None:
        weight = 1.0
    return (weight / r) * np.conj(np.asarray(A)).T


class Linearization:
    """Everything the inversion needs at one linearisation point ``q``.

    Holds the factorisation, the total fields and far fields for every
    incident direction, and builds Frechet matrices on demand.
    """

    def __init__(self, model: "ForwardModel", q):
        self.model = model
        self.q = _values(q, model.grid).copy()
        self.factorization = Factorization(model.G, self.q)
        u_inc = incident_field(model.grid, model.k, model.directions)
        self.total = self.factorization.total_fields(u_inc)  # (D, N)
        self.far = model.C.entries @ (self.q[:, None] * self.total)  # (J, N)

    @cached_property
    def sensitivity(self) -> np.ndarray:
        return _sensitivity(self.model.C, self.factorization)

    def frechet(self, n: int) -> np.ndarray:
        """``J x D`` Frechet matrix for direction index ``n`` (0-based)."""
        return self.sensitivity * self.total[:, n][None, :]

    def frechet_matrices(self) -> list:
        return [self.frechet(n) for n in range(self.model.n_directions)]


class ForwardModel:
    """Grid, wavenumber, incident and observation directions with assembled operators.

    Parameters
    ----------
    grid : Grid
    k : float
        Wavenumber.
    directions : int or array_like
        Incident directions, as a count ``N`` or an ``(N, 2)`` array.
    observations : int or array_like
        Observation directions, as a count ``J`` or a ``(J, 2)`` array.
    """

    def __init__(self, grid: Grid, k: float, directions=60, observations=60):
        self.grid = grid
        self.k = float(k)
        if np.ndim(directions) == 0:
            directions = unit_directions(int(directions))
        self.directions = np.asarray(directions, dtype=float)
        self.G = assemble_green_matrix(grid, k)
        self.C = assemble_far_field_operator(grid, k, observations)

    @property
    def n_directions(self) -> int:
        return len(self.directions)

    @property
    def n_obs(self) -> int:
        return self.C.n_obs

    @property
    def weight(self) -> float:
        return adjoint_weight(self.n_obs, self.grid)

    def linearize(self, q) -> Linearization:
        return Linearization(self, q)

    def far_fields(self, q) -> np.ndarray:
        """``(N, J)`` far-field data, one row per incident direction."""
        return self.linearize(q).far.T.copy()
