"""Regularised inversion: Kalman updates, full-data Tikhonov and Levenberg-Marquardt,
the Kalman filter Levenberg-Marquardt sweep (KFL), the iterative extended
Kalman filter sweep (EKF), weight policies and a discrepancy-principle
selector for the regularisation parameter.

Operators act between a state space ``X`` and a measurement space ``Y``
whose discrete inner products carry weights ``w_X`` and ``w_Y``. All adjoints
use the ratio ``weight = w_Y / w_X`` (see
:func:`scatterkalman.forward.weighted_adjoint`); the measurement weight is
``R = r I``.
"""

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import scipy.linalg as sla

from .forward import ForwardModel, SolverError


class FilterError(RuntimeError):
    """Failure inside an inversion step, tagged with its ``(i, n)`` position."""

    def __init__(self, message, iteration=None, measurement=None):
        tag = []
        if iteration is not None:
            tag.append(f"i={iteration}")
        if measurement is not None:
            tag.append(f"n={measurement}")
        super().__init__(f"{message} [{', '.join(tag)}]" if tag else message)
        self.iteration = iteration
        self.measurement = measurement


@dataclass(frozen=True, eq=False)
class FilterState:
    """Estimate, weight operator ``B`` and the outer/inner indices ``(i, n)``."""

    estimate: np.ndarray = field(repr=False)
    weight: np.ndarray = field(repr=False)
    iteration: int = 0
    measurement: int = 0

    @classmethod
    def initial(cls, estimate, alpha: float, iteration: int = 0):
        estimate = np.asarray(estimate, dtype=complex).ravel()
        return cls(estimate, np.eye(estimate.size, dtype=complex) / alpha, iteration, 0)


class WeightPolicy(str, Enum):
    INITIALIZE = "initialize"
    CARRY_OVER = "carry_over"


@dataclass(frozen=True)
class RegularizationSchedule:
    """Constant ``alpha`` or the Morozov discrepancy rule with fraction ``rho``."""

    mode: str = "constant"
    alpha: float = 100.0
    rho: float = 0.8

    def __post_init__(self):
        if self.mode == "constant":
            if not (np.isfinite(self.alpha) and self.alpha > 0):
                raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        elif self.mode == "morozov":
            if not 0 < self.rho < 1:
                raise ValueError(f"rho must lie in (0, 1), got {self.rho!r}")
        else:
            raise ValueError(f"unknown schedule mode {self.mode!r}")


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Far-field data ``(N, J)``, one row per incident direction."""

    directions: np.ndarray = field(repr=False)
    data: np.ndarray = field(repr=False)
    sigma: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != len(self.directions):
            raise ValueError("need one data row per incident direction")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)


def _hermitize(B):
    return 0.5 * (B + B.conj().T)


def kalman_update(state: FilterState, A, f, r: float = 1.0, weight: float = 1.0) -> FilterState:
    """One Kalman step for the measurement ``A phi = f``.

    ``K = B A^* (R + A B A^*)^{-1}``, ``phi <- phi + K (f - A phi)`` and
    ``B <- (I - K A) B``, with ``A^* = weight * A^H`` and ``R = r I``.
    """
    A = np.asarray(A)
    f = np.asarray(f).ravel()
    B = state.weight
    n = state.measurement + 1
    BAh = weight * (B @ A.conj().T)  # D x J
    S = r * np.eye(A.shape[0]) + A @ BAh
    try:
        cho = sla.cho_factor(_hermitize(S), lower=True, check_finite=False)
    except (np.linalg.LinAlgError, ValueError):
        raise FilterError("innovation matrix R + A B A* is singular",
                          state.iteration, n) from None
    K = sla.cho_solve(cho, BAh.conj().T, check_finite=False).conj().T
    innovation = f - A @ state.estimate
    estimate = state.estimate + K @ innovation
    B_new = _hermitize(B - K @ (A @ B))
    return FilterState(estimate, B_new, state.iteration, n)


def kalman_sweep(state: FilterState, operators, data, r: float = 1.0, weight: float = 1.0) -> FilterState:
    """Apply :func:`kalman_update` for each ``(A_n, f_n)`` in turn."""
    for A, f in zip(operators, data):
        state = kalman_update(state, A, f, r, weight)
    return state


def full_tikhonov(prior, operators, data, alpha: float, r: float = 1.0, weight: float = 1.0) -> np.ndarray:
    """Minimiser of ``alpha ||phi - prior||_X^2 + sum_n ||f_n - A_n phi||_{Y,R^-1}^2``."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    prior = np.asarray(prior, dtype=complex).ravel()
    normal = alpha * np.eye(prior.size, dtype=complex)
    rhs = np.zeros(prior.size, dtype=complex)
    scale = weight / r
    for A, f in zip(operators, data):
        A = np.asarray(A)
        Ah = A.conj().T
        normal += scale * (Ah @ A)
        rhs += scale * (Ah @ (np.asarray(f).ravel() - A @ prior))
    try:
        step = sla.cho_solve(sla.cho_factor(_hermitize(normal), check_finite=False), rhs)
    except np.linalg.LinAlgError as exc:
        raise FilterError(f"Tikhonov normal matrix not positive definite: {exc}") from None
    return prior + step


def _residuals(lin, measurements: MeasurementSet):
    # (N, J) data minus predicted far fields
    return measurements.data - lin.far.T


def _linearize(model: ForwardModel, q, iteration, measurement=None):
    try:
        return model.linearize(q)
    except SolverError as exc:
        raise FilterError(f"forward solve failed: {exc}", iteration, measurement) from exc


def flm_step(q, measurements: MeasurementSet, alpha: float, model: ForwardModel,
             r: float = 1.0, iteration: int = 0) -> np.ndarray:
    """One full-data Levenberg-Marquardt step from ``q``."""
    q = np.asarray(q, dtype=complex).ravel()
    lin = _linearize(model, q, iteration)
    operators = lin.frechet_matrices()
    residuals = _residuals(lin, measurements)
    # Tikhonov on the linearised problem A_n x = res_n + A_n q, prior q.
    data = [res + A @ q for A, res in zip(operators, residuals)]
    return full_tikhonov(q, operators, data, alpha, r, model.weight)


def apply_weight_policy(prev: FilterState | None, alpha: float, policy,
                        estimate=None, iteration: int | None = None) -> FilterState:
    """Starting state for an outer iteration.

    ``initialize`` resets ``B`` to ``I / alpha``; ``carry_over`` keeps the
    final ``B`` of the previous sweep. With no previous state, both policies
    initialise. The estimate is always carried over from ``prev`` unless
    ``estimate`` is given.
    """
    policy = WeightPolicy(policy)
    if prev is None:
        if estimate is None:
            raise ValueError("need either a previous state or an initial estimate")
        return FilterState.initial(estimate, alpha, iteration or 0)
    it = prev.iteration + 1 if iteration is None else iteration
    q = prev.estimate if estimate is None else np.asarray(estimate, dtype=complex).ravel()
    if policy is WeightPolicy.CARRY_OVER:
        return FilterState(q, prev.weight, it, 0)
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    return FilterState.initial(q, alpha, it)


def kfl_sweep(state: FilterState, measurements: MeasurementSet, model: ForwardModel,
              r: float = 1.0) -> FilterState:
    """Kalman filter Levenberg-Marquardt sweep: linearise once, update over all ``n``."""
    q0 = state.estimate
    lin = _linearize(model, q0, state.iteration)
    residuals = _residuals(lin, measurements)
    state = replace(state, measurement=0)
    for n in range(model.n_directions):
        A = lin.frechet(n)
        f = residuals[n] + A @ q0
        state = kalman_update(state, A, f, r, model.weight)
    return state


def ekf_sweep(state: FilterState, measurements: MeasurementSet, model: ForwardModel,
              r: float = 1.0) -> FilterState:
    """Iterative extended Kalman sweep: relinearise at the current estimate for every ``n``."""
    state = replace(state, measurement=0)
    for n in range(model.n_directions):
        lin = _linearize(model, state.estimate, state.iteration, n + 1)
        A = lin.frechet(n)
        # innovation is data minus F(current); fold it into f for kalman_update
        f = measurements.data[n] - lin.far[:, n] + A @ state.estimate
        state = kalman_update(state, A, f, r, model.weight)
    return state


def _normal_system(model, q, measurements, r):
    lin = model.linearize(q)
    operators = lin.frechet_matrices()
    res = _residuals(lin, measurements)
    scale = model.weight / r
    normal = scale * sum(A.conj().T @ A for A in operators)
    grad = scale * sum(A.conj().T @ f for A, f in zip(operators, res))
    return operators, res, _hermitize(normal), grad


def linearized_residual_curve(q, measurements: MeasurementSet, model: ForwardModel, r: float = 1.0):
    """Return ``(g, current)`` where ``g(alpha)`` is the stacked linearised residual
    norm after an LM step with parameter ``alpha`` and ``current`` the stacked
    nonlinear residual norm at ``q``."""
    q = np.asarray(q, dtype=complex).ravel()
    operators, res, normal, grad = _normal_system(model, q, measurements, r)
    lam, V = np.linalg.eigh(normal)
    lam = np.clip(lam, 0.0, None)
    coeffs = V.conj().T @ grad
    stacked = np.vstack(operators)
    res_flat = res.ravel()

    def g(alpha):
        step = V @ (coeffs / (lam + alpha))
        return float(np.linalg.norm(res_flat - stacked @ step))

    return g, float(np.linalg.norm(res_flat))


def morozov_alpha(q, measurements: MeasurementSet, rho: float, model: ForwardModel,
                  r: float = 1.0, bracket=(1e-8, 1e12), rtol: float = 1e-3) -> float:
    """Pick ``alpha`` so the linearised residual equals ``rho`` times the current one.

    Bisection on ``log(alpha)``; the linearised residual is nondecreasing in
    ``alpha``. Stops once the residual is within ``rtol`` of the target.
    """
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho!r}")
    g, current = linearized_residual_curve(q, measurements, model, r)
    if current == 0.0:
        raise FilterError("residual is zero; iteration has already converged")
    target = rho * current
    lo, hi = np.log(bracket[0]), np.log(bracket[1])
    if g(np.exp(lo)) > target or g(np.exp(hi)) < target:
        raise FilterError(
            f"no alpha in [{bracket[0]:g}, {bracket[1]:g}] meets the discrepancy target"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        value = g(np.exp(mid))
        if abs(value - target) <= rtol * target:
            return float(np.exp(mid))
        if value < target:
            lo = mid
        else:
            hi = mid
    raise FilterError("bisection for the discrepancy principle did not converge")
