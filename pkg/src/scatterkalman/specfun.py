"""Bessel functions of the first and second kind, orders 0 and 1, and the
zeroth-order Hankel function of the first kind.

Only real positive arguments are supported. Three evaluation bands are used:

* ``x <= SERIES_MAX``: ascending power series.
* ``SERIES_MAX < x < ASYMPTOTIC_MIN``: Miller backward recurrence normalised
  by ``J0 + 2*sum(J_2k) = 1``, with Y0 from the Neumann series.
* ``x >= ASYMPTOTIC_MIN``: Hankel asymptotic expansion.

All functions accept scalars or arrays and return the same shape.
"""

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286060651209008240243

SERIES_MAX = 8.0
ASYMPTOTIC_MIN = 25.0

_SERIES_TERMS = 45
_ASYMPTOTIC_TERMS = 40


class DomainError(ValueError):
    """Raised for arguments outside ``0 < x < inf``."""


def _as_positive(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError("Bessel functions here are defined only for finite x > 0")
    return arr


def _series(x):
    # Returns J0, Y0, J1, Y1 from the ascending series.
    z = 0.25 * x * x
    log_term = np.log(0.5 * x) + EULER_GAMMA

    j0 = np.zeros_like(x)
    y0_tail = np.zeros_like(x)
    j1 = np.zeros_like(x)
    y1_tail = np.zeros_like(x)

    term0 = np.ones_like(x)  # (-z)^k / (k!)^2
    term1 = np.ones_like(x)  # (-z)^k / (k! (k+1)!)
    harmonic = 0.0
    for k in range(_SERIES_TERMS):
        if k > 0:
            term0 = term0 * (-z) / (k * k)
            term1 = term1 * (-z) / (k * (k + 1))
            harmonic += 1.0 / k
        j0 += term0
        y0_tail -= harmonic * term0
        j1 += term1
        # psi(k+1) + psi(k+2) = 2*(H_k - gamma) + 1/(k+1)
        y1_tail += (2.0 * harmonic + 1.0 / (k + 1)) * term1

    j1 *= 0.5 * x
    y0 = (2.0 / math.pi) * (log_term * j0 + y0_tail)
    # The gamma parts of psi are absorbed into log_term.
    y1 = (
        -2.0 / (math.pi * x)
        + (2.0 / math.pi) * log_term * j1
        - (0.5 * x / math.pi) * y1_tail
    )
    return j0, y0, j1, y1


def _miller(x):
    # Backward recurrence J_{n-1} = (2n/x) J_n - J_{n+1}, started far above x.
    top = int(np.max(x)) + 60
    top += top % 2
    vals = np.zeros((top + 2,) + x.shape)
    vals[top] = 1e-30
    for n in range(top, 0, -1):
        vals[n - 1] = (2.0 * n / x) * vals[n] - vals[n + 1]

    norm = vals[0] + 2.0 * vals[2:top + 1:2].sum(axis=0)
    vals /= norm

    j0 = vals[0]
    j1 = vals[1]
    ks = np.arange(1, top // 2 + 1)
    coef = (np.where(ks % 2 == 1, 1.0, -1.0) / ks)[:, None]
    even = vals[2:top + 1:2]
    odd_below = vals[1:top:2]
    odd_above = vals[3:top + 2:2]
    neumann = np.sum(coef * even, axis=0)
    neumann_diff = np.sum(coef * (odd_below - odd_above), axis=0)

    log_term = np.log(0.5 * x) + EULER_GAMMA
    y0 = (2.0 / math.pi) * (log_term * j0 + 2.0 * neumann)
    # Y1 = -Y0', differentiating the Neumann form term by term.
    y1 = -(2.0 / math.pi) * (j0 / x - log_term * j1 + neumann_diff)
    return j0, y0, j1, y1


def _asymptotic(x, order):
    mu = 4.0 * order * order
    p = np.ones_like(x)
    q = np.zeros_like(x)
    coef = 1.0
    inv = 1.0 / x
    power = np.ones_like(x)
    for k in range(1, _ASYMPTOTIC_TERMS):
        coef *= (mu - (2 * k - 1) ** 2) / (8.0 * k)
        power = power * inv
        term = coef * power
        if k % 2 == 1:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += term if (k // 2) % 2 == 0 else -term
        if np.all(np.abs(term) < 1e-18):
            break
    chi = x - (0.5 * order + 0.25) * math.pi
    amp = np.sqrt(2.0 / (math.pi * x))
    c, s = np.cos(chi), np.sin(chi)
    return amp * (p * c - q * s), amp * (p * s + q * c)


def bessel_all(x):
    """Evaluate ``(J0, Y0, J1, Y1)`` at positive real ``x``.

    Parameters
    ----------
    x : float or array_like
        Strictly positive, finite arguments.

    Returns
    -------
    tuple of ndarray
        Four arrays with the shape of ``x``.
    """
    x = _as_positive(x)
    flat = np.atleast_1d(x).ravel()
    out = np.empty((4, flat.size))

    low = flat <= SERIES_MAX
    high = flat >= ASYMPTOTIC_MIN
    mid = ~(low | high)
    if low.any():
        out[:, low] = _series(flat[low])
    if mid.any():
        out[:, mid] = _miller(flat[mid])
    if high.any():
        xs = flat[high]
        out[0, high], out[1, high] = _asymptotic(xs, 0)
        out[2, high], out[3, high] = _asymptotic(xs, 1)

    shaped = out.reshape((4,) + x.shape)
    if x.ndim == 0:
        return tuple(float(v) for v in shaped)
    return tuple(shaped)


def bessel_j0(x):
    """Bessel function of the first kind, order zero."""
    return bessel_all(x)[0]


def bessel_y0(x):
    """Bessel function of the second kind, order zero."""
    return bessel_all(x)[1]


def bessel_j1(x):
    return bessel_all(x)[2]


def bessel_y1(x):
    return bessel_all(x)[3]


def hankel1_0(x):
    """Hankel function of the first kind, order zero: ``J0(x) + i*Y0(x)``.

    The imaginary part diverges logarithmically as ``x -> 0+``, so callers
    must never pass zero (the fundamental solution is singular there).
    """
    j0, y0, _, _ = bessel_all(x)
    return j0 + 1j * y0


def hankel1_1(x):
    """Hankel function of the first kind, order one."""
    _, _, j1, y1 = bessel_all(x)
    return j1 + 1j * y1
