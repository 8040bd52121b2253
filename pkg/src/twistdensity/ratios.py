"""The arithmetic factor A(alpha, gamma), its derivatives, and the averaged
logarithmic derivative over the even twist family.

Per prime the slowly-converging pieces (zeta and symmetric-square local
factors making up Y) are merged into the product *before* truncation, so each
local factor is 1 + O(p^-2) near the origin and the product converges
absolutely.  With

    x = p^-(1+2 alpha),  u = p^-(1+alpha+gamma),  w = p^-(1+2 gamma),
    l1 = lambda(p), l2 = lambda(p^2),
    D(x)    = 1 + (1 - l2) x + x^2,
    Psym(v) = 1 - l2 v + l2 v^2 - v^3,

the good-prime local factor is

    f_p = (1-w) Psym(x) / ((1-u) Psym(u))
          * [1 + p/(p+1) * (x (l2 - x) - l1^2 u + w (1 + x)) / D(x)],

where the bracket is the closed form of the three lambda(p^m) generating
series (the Chebyshev-type recursions sum to rational functions of x with
denominator D).  At the conductor prime the local factor is

    f_M = (1-w)(1 - l1^2 x) / ((1-u)(1 - l1^2 u))
          * (1 - omega l1 p^-(1/2+gamma)) / (1 - omega l1 p^-(1/2+alpha)).

On the diagonal alpha = gamma every factor is exactly 1.  The alpha-derivative
on the diagonal is likewise a convergent prime sum, computed analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma

from .curve import CurveData, ap_for_primes, sieve_primes
from .discriminants import TwistFamily
from . import specfun
from .symsquare import SymSquareEvaluator

ADMISSIBLE = 0.25


class AdmissibleRegionError(ValueError):
    pass


class StepInstabilityError(ArithmeticError):
    pass


@dataclass
class RatiosContext:
    curve: CurveData
    prime_cutoff: int = 10_000
    series_depth: int = 30  # used by the series cross-check route only
    sym2: SymSquareEvaluator | None = None
    _primes: np.ndarray | None = field(default=None, repr=False)
    _lam1: np.ndarray | None = field(default=None, repr=False)
    _lam2: np.ndarray | None = field(default=None, repr=False)
    _logp: np.ndarray | None = field(default=None, repr=False)
    _good: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.curve.omega is None:
            raise ValueError("curve sign omega must be determined first")
        if self.sym2 is None:
            self.sym2 = SymSquareEvaluator(self.curve)
        primes = sieve_primes(self.prime_cutoff)
        ap = ap_for_primes(self.curve, primes)
        self._primes = primes
        self._lam1 = ap / np.sqrt(primes.astype(float))
        self._lam2 = self._lam1**2 - 1.0
        self._logp = np.log(primes.astype(float))
        self._good = primes != self.curve.conductor

    # -- A(alpha, gamma) ------------------------------------------------------

    def _check_region(self, *vals: complex) -> None:
        for v in vals:
            if abs(v.real) >= ADMISSIBLE:
                raise AdmissibleRegionError(f"Re {v} outside (-1/4, 1/4)")

    def _local_factors(self, alpha: complex, gamma: complex) -> np.ndarray:
        p = self._primes.astype(float)
        lp = self._logp
        l1, l2 = self._lam1, self._lam2
        # identical float expressions so x == u == w bitwise on the diagonal
        x = np.exp(-(1.0 + alpha + alpha) * lp)
        u = np.exp(-(1.0 + alpha + gamma) * lp)
        w = np.exp(-(1.0 + gamma + gamma) * lp)
        good = self._good
        f = np.empty(len(p), dtype=complex)

        xg, ug, wg = x[good], u[good], w[good]
        l1g, l2g = l1[good], l2[good]
        psym_x = 1.0 - l2g * xg + l2g * xg**2 - xg**3
        psym_u = 1.0 - l2g * ug + l2g * ug**2 - ug**3
        dx = 1.0 + (1.0 - l2g) * xg + xg**2
        bracket = 1.0 + (p[good] / (p[good] + 1.0)) * (
            xg * (l2g - xg) - l1g**2 * ug + wg * (1.0 + xg)
        ) / dx
        f[good] = (1.0 - wg) * psym_x / ((1.0 - ug) * psym_u) * bracket

        bad = ~good
        if np.any(bad):
            l1b = l1[bad]
            pb = p[bad]
            xb, ub, wb = x[bad], u[bad], w[bad]
            ka = self.curve.omega * l1b * pb ** -(0.5) * np.exp(-alpha * lp[bad])
            kg = self.curve.omega * l1b * pb ** -(0.5) * np.exp(-gamma * lp[bad])
            f[bad] = (
                (1.0 - wb)
                * (1.0 - l1b**2 * xb)
                / ((1.0 - ub) * (1.0 - l1b**2 * ub))
                * (1.0 - kg)
                / (1.0 - ka)
            )
        return f

    def a_factor(self, alpha: complex, gamma: complex) -> complex:
        """A(alpha, gamma) truncated at the prime cutoff."""
        alpha, gamma = complex(alpha), complex(gamma)
        self._check_region(alpha, gamma)
        return complex(np.prod(self._local_factors(alpha, gamma)))

    def a_tail_estimate(self, alpha: complex, gamma: complex) -> float:
        """Crude bound on the neglected log-tail: C p^(-2+2 delta) per prime."""
        delta = max(abs(alpha.real), abs(gamma.real))
        P = self.prime_cutoff
        c_bound = 16.0
        return c_bound * P ** (-1.0 + 2 * delta) / ((1.0 - 2 * delta) * math.log(P))

    def a_factor_dalpha(self, r: complex) -> complex:
        """A^1(r, r) = d/d alpha A(alpha, gamma) at alpha = gamma = r.

        Every local factor equals 1 on the diagonal, so the derivative of the
        product is the sum of per-prime derivatives, each in closed form.
        """
        r = complex(r)
        self._check_region(r)
        lp = self._logp
        good = self._good
        v = np.exp(-(1.0 + 2.0 * r) * lp)
        l1, l2 = self._lam1, self._lam2
        out = np.empty(len(lp), dtype=complex)

        vg = v[good]
        l2g = l2[good]
        pg = self._primes[good].astype(float)
        psym = 1.0 - l2g * vg + l2g * vg**2 - vg**3
        dpsym = -l2g + 2.0 * l2g * vg - 3.0 * vg**2
        dD = (1.0 - l2g) + 2.0 * vg
        D = 1.0 + (1.0 - l2g) * vg + vg**2
        out[good] = lp[good] * vg * (
            -dpsym / psym - 1.0 / (1.0 - vg) + (pg / (pg + 1.0)) * dD / D
        )

        bad = ~good
        if np.any(bad):
            l1b = l1[bad]
            vb = v[bad]
            pb = self._primes[bad].astype(float)
            kap = self.curve.omega * l1b * pb ** -(0.5) * np.exp(-r * lp[bad])
            lsq = l1b**2
            out[bad] = lp[bad] * (
                lsq * vb / (1.0 - lsq * vb) - vb / (1.0 - vb) - kap / (1.0 - kap)
            )
        return complex(np.sum(out))

    def b_derivs(self, h_pair: tuple[float, float] = (1e-2, 1e-3)) -> tuple[float, float]:
        """(B'(0), B''(0)) for B(r) = A(-r, r), by Richardson-extrapolated
        central differences at two independent step sizes."""

        def g(r: float) -> float:
            val = self.a_factor(-r, r)
            return float(val.real)

        results = []
        for h in h_pair:
            d1 = (g(h) - g(-h)) / (2 * h)
            d1_half = (g(h / 2) - g(-h / 2)) / h
            b1 = (4 * d1_half - d1) / 3
            d2 = (g(h) - 2.0 + g(-h)) / h**2  # A(0,0) = 1 exactly
            d2_half = (g(h / 2) - 2.0 + g(-h / 2)) / (h / 2) ** 2
            b2 = (4 * d2_half - d2) / 3
            results.append((b1, b2))
        (b1a, b2a), (b1b, b2b) = results
        if abs(b1a - b1b) > 1e-4 or abs(b2a - b2b) > 1e-4:
            raise StepInstabilityError(
                f"finite-difference steps disagree: B'={b1a:.8g}/{b1b:.8g}, "
                f"B''={b2a:.8g}/{b2b:.8g}"
            )
        return b1b, b2b

    # -- Y and the averaged logarithmic derivative ---------------------------

    def y_factor(self, alpha: complex, gamma: complex) -> complex:
        """zeta(1+2 gamma) L(sym^2, 1+2 alpha) / (zeta(1+a+g) L(sym^2, 1+a+g))."""
        alpha, gamma = complex(alpha), complex(gamma)
        num = specfun.zeta(1.0 + 2 * gamma) * self.sym2.value(1.0 + 2 * alpha)[0]
        den = specfun.zeta(1.0 + alpha + gamma) * self.sym2.value(1.0 + alpha + gamma)[0]
        return complex(num / den)

    def _sym2_at(self, s: complex) -> complex:
        """sym^2 value routed by the real part; strictly left of the 1-line
        the truncated Euler product is used (real s only)."""
        if s.real >= 1.0 - 1e-12:
            return self.sym2.value(s)[0]
        if abs(s.imag) > 1e-12:
            raise ValueError("left-of-1 evaluation implemented for real s only")
        return complex(self.sym2.value_left_euler(float(s.real))[0])

    def osc_prefactor(self, r: complex) -> complex:
        """Gamma(1-r)/Gamma(1+r) * zeta(1+2r) * L(sym^2,1-2r)/L(sym^2,1) * A(-r,r)."""
        r = complex(r)
        gratio = np.exp(loggamma(1.0 - r) - loggamma(1.0 + r))
        sym_ratio = self._sym2_at(1.0 - 2 * r) / self.sym2.at_one()[0]
        return complex(gratio * specfun.zeta(1.0 + 2 * r) * sym_ratio * self.a_factor(-r, r))

    def log_deriv_average(
        self, r: complex, family: TwistFamily, mode: str = "exact"
    ) -> complex:
        """Right-hand side of the averaged log-derivative formula: the smooth
        part scaled by X* minus the oscillatory d-sum."""
        r = complex(r)
        if not (0 < r.real < ADMISSIBLE or abs(r.real) < 1e-12):
            raise AdmissibleRegionError("need 0 < Re r < 1/4 or purely imaginary r")
        if abs(r) < 1e-8:
            raise ValueError("r = 0 is a pole of the constituents; use the density path")
        smooth = (
            -specfun.zeta_log_deriv(1.0 + 2 * r)
            + self.sym2.log_deriv(1.0 + 2 * r)[0]
            + self.a_factor_dalpha(r)
        )
        if mode == "exact":
            dsum = complex(np.sum(np.exp(-2.0 * r * family.log_conductors())))
        elif mode == "euler_maclaurin":
            M = family.conductor
            lx = math.log(math.sqrt(M) * family.X / (2 * math.pi))
            dsum = family.x_star * np.exp(-2.0 * r * lx) / (1.0 - 2.0 * r)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        return complex(family.x_star * smooth - self.osc_prefactor(r) * dsum)

    # -- series cross-check route (the m-sum form of the local factor) -------

    def v_local_series(self, p_idx: int, alpha: complex, gamma: complex) -> complex:
        """Good-prime bracket via explicit m-sums truncated at series_depth;
        oracle for the closed geometric forms."""
        from .curve import lambda_prime_power

        p = int(self._primes[p_idx])
        if p == self.curve.conductor:
            raise ValueError("series route covers good primes")
        lp = math.log(p)
        x = np.exp(-(1.0 + 2.0 * alpha) * lp)
        u = np.exp(-(1.0 + alpha + gamma) * lp)
        w = np.exp(-(1.0 + 2.0 * gamma) * lp)
        l1 = float(self._lam1[p_idx])
        s_even = sum(
            lambda_prime_power(self.curve, p, 2 * m) * x**m
            for m in range(1, self.series_depth + 1)
        )
        s_odd = sum(
            lambda_prime_power(self.curve, p, 2 * m + 1) * x**m
            for m in range(self.series_depth + 1)
        )
        s_even0 = 1.0 + s_even
        return 1.0 + (p / (p + 1.0)) * (s_even - l1 * u * s_odd + w * s_even0)