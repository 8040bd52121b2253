"""Complex special functions on and near the 1-line.

Riemann zeta and its logarithmic derivative via Euler-Maclaurin summation
(accurate on the strip needed here, |Im s| <= ~100), digamma/Gamma-ratio
helpers, the first Stieltjes constants, and a sign-change locator for zeta
zeros on the critical line.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import digamma as _digamma
from scipy.special import loggamma as _loggamma

EULER_GAMMA = float(np.euler_gamma)
# gamma_1, gamma_2: coefficients of the Laurent expansion of zeta about s = 1
STIELTJES_1 = -0.07281584548367672486058637587490131914
STIELTJES_2 = -0.00969036319287231848453038603521252936

_BERNOULLI = [
    1.0 / 6,
    -1.0 / 30,
    1.0 / 42,
    -1.0 / 30,
    5.0 / 66,
    -691.0 / 2730,
    7.0 / 6,
    -3617.0 / 510,
    43867.0 / 798,
    -174611.0 / 330,
    854513.0 / 138,
    -236364091.0 / 2730,
]


class PoleError(ZeroDivisionError):
    pass


class NearZeroError(ArithmeticError):
    pass


def _em_terms(s: np.ndarray) -> int:
    tmax = float(np.max(np.abs(s.imag))) if s.size else 0.0
    return int(50 + 2 * tmax)


def zeta(s, n_terms: int | None = None):
    """Riemann zeta for Re(s) > 0, s != 1; scalar or array argument."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(s_arr == 1.0):
        raise PoleError("zeta pole at s = 1")
    if np.any(s_arr.real <= 0):
        raise ValueError("zeta implemented for Re(s) > 0 only")
    if np.any(~np.isfinite(s_arr)):
        raise ValueError("non-finite argument")
    N = n_terms or _em_terms(s_arr)
    n = np.arange(1, N, dtype=float)
    sc = s_arr[:, None]
    pows = np.exp(-sc * np.log(n)[None, :])
    out = pows.sum(axis=1)
    out += N ** (1.0 - s_arr) / (s_arr - 1.0) + 0.5 * N ** (-s_arr)
    # Bernoulli corrections: B_2k/(2k)! * s(s+1)...(s+2k-2) * N^(-s-2k+1)
    poch = s_arr.copy()
    fact = 2.0
    for k, b in enumerate(_BERNOULLI, start=1):
        out += (b / fact) * poch * N ** (-s_arr - 2 * k + 1)
        if k < len(_BERNOULLI):
            poch = poch * (s_arr + 2 * k - 1) * (s_arr + 2 * k)
            fact *= (2 * k + 1) * (2 * k + 2)
    return out[0] if np.isscalar(s) or np.asarray(s).ndim == 0 else out


def zeta_deriv(s, n_terms: int | None = None):
    """zeta'(s) by term-wise differentiation of the Euler-Maclaurin form."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(s_arr == 1.0):
        raise PoleError("zeta pole at s = 1")
    N = n_terms or _em_terms(s_arr)
    n = np.arange(1, N, dtype=float)
    ln_n = np.log(n)
    sc = s_arr[:, None]
    pows = np.exp(-sc * ln_n[None, :])
    out = -(pows * ln_n[None, :]).sum(axis=1)
    lnN = math.log(N)
    out += -lnN * N ** (1.0 - s_arr) / (s_arr - 1.0) - N ** (1.0 - s_arr) / (s_arr - 1.0) ** 2
    out += -0.5 * lnN * N ** (-s_arr)
    poch = s_arr.copy()
    dlog = 1.0 / s_arr  # d/ds log poch
    fact = 2.0
    for k, b in enumerate(_BERNOULLI, start=1):
        term = (b / fact) * poch * N ** (-s_arr - 2 * k + 1)
        out += term * (dlog - lnN)
        if k < len(_BERNOULLI):
            poch = poch * (s_arr + 2 * k - 1) * (s_arr + 2 * k)
            dlog = dlog + 1.0 / (s_arr + 2 * k - 1) + 1.0 / (s_arr + 2 * k)
            fact *= (2 * k + 1) * (2 * k + 2)
    return out[0] if np.isscalar(s) or np.asarray(s).ndim == 0 else out


_ZETA_GUARD = 1e-12


def zeta_log_deriv(s):
    """zeta'(s)/zeta(s); near s = 1 the pole is handled by the Stieltjes
    expansion so no cancellation occurs."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    w = s_arr - 1.0
    out = np.empty_like(s_arr)
    tiny = np.abs(w) < 1e-6
    if np.any(tiny):
        g0, g1, g2 = EULER_GAMMA, STIELTJES_1, STIELTJES_2
        wt = w[tiny]
        out[tiny] = (
            -1.0 / wt
            + g0
            - (g0 * g0 + 2 * g1) * wt
            + (1.5 * g2 + 3 * g0 * g1 + g0**3) * wt * wt
        )
    if np.any(~tiny):
        z = zeta(s_arr[~tiny])
        z = np.atleast_1d(z)
        if np.any(np.abs(z) < _ZETA_GUARD):
            raise NearZeroError("zeta too close to a zero for a stable log-derivative")
        out[~tiny] = np.atleast_1d(zeta_deriv(s_arr[~tiny])) / z
    return out[0] if np.isscalar(s) or np.asarray(s).ndim == 0 else out


def digamma_pair(t):
    """psi(1+it) + psi(1-it); real by reflection symmetry."""
    val = _digamma(1.0 + 1j * np.asarray(t, dtype=float))
    return 2.0 * np.real(val)


def gamma_ratio(t):
    """Gamma(1-it)/Gamma(1+it); unit modulus for real t."""
    lg = _loggamma(1.0 + 1j * np.asarray(t, dtype=float))
    return np.exp(-2j * np.imag(lg))


def gamma_terms(t: float) -> tuple[float, complex]:
    """(psi(1+it)+psi(1-it), Gamma(1-it)/Gamma(1+it))."""
    return float(digamma_pair(t)), complex(gamma_ratio(t))


def loggamma(z):
    return _loggamma(z)


def digamma(z):
    return _digamma(z)


# -- zeros of zeta on the critical line (dip markers) -----------------------


def hardy_z(t):
    """Real function with the same zeros as zeta(1/2+it) for t > 0."""
    t_arr = np.asarray(t, dtype=float)
    theta = np.imag(_loggamma(0.25 + 0.5j * t_arr)) - 0.5 * t_arr * math.log(math.pi)
    val = np.exp(1j * theta) * zeta(0.5 + 1j * np.atleast_1d(t_arr))
    out = np.real(val)
    return out[0] if t_arr.ndim == 0 else out


def zeta_zeros_up_to(t_max: float, step: float = 0.05, tol: float = 1e-9) -> list[float]:
    """Ordinates of zeta zeros in (1, t_max] by sign scan + bisection."""
    grid = np.arange(1.0, t_max + step, step)
    z = hardy_z(grid)
    zeros = []
    for i in np.nonzero(np.signbit(z[:-1]) != np.signbit(z[1:]))[0]:
        a, b = grid[i], grid[i + 1]
        fa = z[i]
        while b - a > tol:
            mid = 0.5 * (a + b)
            fm = hardy_z(mid)
            if (fm < 0) == (fa < 0):
                a, fa = mid, fm
            else:
                b = mid
        zeros.append(0.5 * (a + b))
    return zeros
