"""The symmetric-square L-function attached to the curve.

Local factors (s in the analytic normalization, edge of convergence at 1):

    p | M:      (1 - lambda(p)^2 p^-s)^-1
    p not| M:   (1 - lambda(p^2) p^-s + lambda(p^2) p^-2s - p^-3s)^-1

On and right of the 1-line the Euler product truncated at a prime cutoff P is
used, with a root-mean-square tail heuristic (|lambda(p^2)| <= 3, unit
variance under equidistribution) reported as the error estimate.  The
truncation noise decays only like (P log P)^-1/2, so values carry honest
error bars of order 1e-3 at P = 1e5; cutoff-plateau stability is the
acceptance gate for every downstream use.

For real s strictly left of 1 (needed by the averaged-log-derivative
formula) the Euler product diverges; `value_left` switches to the smoothed
Dirichlet series built from lambda(n^2), with a measured two-N stability
estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curve import CurveData, ap_for_primes, lambda_prime_power, sieve_primes

DEFAULT_CUTOFF = 100_000
MAX_CUTOFF = 800_000


class SymSquareError(ArithmeticError):
    pass


@dataclass
class SymSquareEvaluator:
    curve: CurveData
    prime_cutoff: int = DEFAULT_CUTOFF
    _primes: np.ndarray | None = field(default=None, repr=False)
    _lam1: np.ndarray | None = field(default=None, repr=False)
    _lam2: np.ndarray | None = field(default=None, repr=False)
    _logp: np.ndarray | None = field(default=None, repr=False)
    _bad_idx: np.ndarray | None = field(default=None, repr=False)
    _series_cache: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def ensure_cutoff(self, P: int) -> None:
        if self._primes is not None and self._primes[-1] >= P:
            return
        primes = sieve_primes(min(P, MAX_CUTOFF))
        ap = ap_for_primes(self.curve, primes)
        lam1 = ap / np.sqrt(primes.astype(float))
        lam2 = lam1 * lam1 - 1.0
        bad = primes == self.curve.conductor
        lam2[bad] = np.nan  # never used at the bad prime
        self._primes = primes
        self._lam1 = lam1
        self._lam2 = lam2
        self._logp = np.log(primes.astype(float))
        self._bad_idx = bad

    def _tables(self, P: int):
        self.ensure_cutoff(P)
        sel = self._primes <= P
        return (
            self._primes[sel],
            self._lam1[sel],
            self._lam2[sel],
            self._logp[sel],
            self._bad_idx[sel],
        )

    # -- Euler-product evaluation, Re s >= 1 --------------------------------

    def _tail_estimate(self, sigma: float, P: int) -> float:
        """RMS fluctuation heuristic for the truncated log-product."""
        lp = math.log(P)
        if sigma > 1.0001:
            absolute = 3.0 * P ** (1.0 - sigma) / ((sigma - 1.0) * lp)
        else:
            absolute = math.inf
        rms = math.sqrt(P ** (1.0 - 2 * sigma) / ((2 * sigma - 1.0) * lp))
        return min(absolute, rms)

    def _adaptive_cutoff(self, sigma: float, tol: float) -> tuple[int, float]:
        P = min(self.prime_cutoff, MAX_CUTOFF)
        while True:
            est = self._tail_estimate(sigma, P)
            if est <= tol or P >= MAX_CUTOFF:
                break
            P = min(2 * P, MAX_CUTOFF)
        if est > tol:
            raise SymSquareError(
                f"tolerance {tol:g} unreachable at Re s = {sigma:g} "
                f"(estimated tail {est:.2g} at cutoff {MAX_CUTOFF})"
            )
        return P, est

    def value(self, s: complex, tol: float = 1e-3) -> tuple[complex, float]:
        """Truncated Euler product with tail estimate; domain Re s >= 1."""
        s = complex(s)
        if s.real < 1.0 - 1e-12:
            raise ValueError("Euler-product evaluation needs Re s >= 1; see value_left")
        P, est = self._adaptive_cutoff(s.real, tol)
        primes, lam1, lam2, _, bad = self._tables(P)
        v = np.exp(-s * np.log(primes.astype(float)))
        log_loc = np.empty(len(primes), dtype=complex)
        g = ~bad
        log_loc[g] = -np.log(1.0 - lam2[g] * v[g] + lam2[g] * v[g] ** 2 - v[g] ** 3)
        log_loc[bad] = -np.log(1.0 - lam1[bad] ** 2 * v[bad])
        return complex(np.exp(np.sum(log_loc))), est

    def log_deriv(self, s: complex, tol: float = 1e-3) -> tuple[complex, float]:
        """L'/L(sym^2, s) from the differentiated local factors, Re s >= 1."""
        s = complex(s)
        if s.real < 1.0 - 1e-12:
            raise ValueError("log-derivative needs Re s >= 1")
        P, est = self._adaptive_cutoff(s.real, tol)
        primes, lam1, lam2, logp, bad = self._tables(P)
        v = np.exp(-s * np.log(primes.astype(float)))
        out = np.empty(len(primes), dtype=complex)
        g = ~bad
        psym = 1.0 - lam2[g] * v[g] + lam2[g] * v[g] ** 2 - v[g] ** 3
        dpsym = -lam2[g] + 2.0 * lam2[g] * v[g] - 3.0 * v[g] ** 2
        if np.any(np.abs(psym) < 1e-3):
            raise SymSquareError("too close to a zero of a local factor aggregate")
        out[g] = logp[g] * v[g] * dpsym / psym
        lb2 = lam1[bad] ** 2
        out[bad] = -logp[bad] * lb2 * v[bad] / (1.0 - lb2 * v[bad])
        val = complex(np.sum(out))
        # near a 1-line zero of the function itself the truncated product is
        # meaningless; flag via the value estimate
        mod, _ = self.value(s, tol=max(tol, 1e-3))
        if abs(mod) < 1e-3:
            raise SymSquareError(f"sym^2 value too small at {s} for a stable log-derivative")
        return val, est * math.log(P)

    def at_one(self) -> tuple[float, float, float]:
        """(L(1), L'/L(1), L''/L(1)) from the differentiated Euler product."""
        P = min(self.prime_cutoff, MAX_CUTOFF)
        primes, lam1, lam2, logp, bad = self._tables(P)
        v = 1.0 / primes.astype(float)
        g = ~bad
        psym = 1.0 - lam2[g] * v[g] + lam2[g] * v[g] ** 2 - v[g] ** 3
        dpsym = -lam2[g] + 2.0 * lam2[g] * v[g] - 3.0 * v[g] ** 2
        d2psym = 2.0 * lam2[g] - 6.0 * v[g]
        log_l = -np.sum(np.log(psym))
        dlog = np.sum(logp[g] * v[g] * dpsym / psym)
        # d/ds of the per-prime term; dv/ds = -log p * v
        inner = (dpsym + v[g] * d2psym) / psym - v[g] * (dpsym / psym) ** 2
        d2log = -np.sum(logp[g] ** 2 * v[g] * inner)
        lb2 = lam1[bad] ** 2
        vb = v[bad]
        log_l += -np.sum(np.log(1.0 - lb2 * vb))
        dlog += np.sum(-logp[bad] * lb2 * vb / (1.0 - lb2 * vb))
        d2log += np.sum(logp[bad] ** 2 * lb2 * vb / (1.0 - lb2 * vb) ** 2)
        value = float(np.exp(log_l))
        if value <= 0:
            raise SymSquareError("sym^2 value at 1 must be positive")
        lp_over_l = float(np.real(dlog))
        lpp_over_l = float(np.real(d2log + dlog * dlog))
        return value, lp_over_l, lpp_over_l

    # -- smoothed Dirichlet series, 1/2 < Re s < 1 ---------------------------

    def _lambda_sq_table(self, n_max: int) -> np.ndarray:
        """lambda(n^2) for n <= n_max by multiplicativity."""
        if n_max in self._series_cache:
            return self._series_cache[n_max]
        from .curve import _spf_table

        primes = sieve_primes(n_max)
        ap_for_primes(self.curve, primes)
        spf = _spf_table(n_max)
        out = np.zeros(n_max + 1)
        out[1] = 1.0
        lam2_at_p = np.zeros(n_max + 1)
        for p in primes:
            lam2_at_p[p] = lambda_prime_power(self.curve, int(p), 2)
        for n in range(2, n_max + 1):
            p = int(spf[n])
            m = n // p
            if m % p != 0:
                out[n] = lam2_at_p[p] * out[m]
            else:
                k = 1
                while m % p == 0:
                    m //= p
                    k += 1
                out[n] = lambda_prime_power(self.curve, p, 2 * k) * out[m]
        self._series_cache[n_max] = out
        return out

    def value_left_euler(self, s: float) -> tuple[float, float]:
        """L(sym^2, s) for real s in (1/2, 1) by the truncated Euler product.

        Strictly left of the 1-line the product diverges; the fixed-cutoff
        partial product is an estimator whose fluctuation scale, reported as
        the error, grows as s moves toward 1/2.
        """
        if not (0.5 < s < 1.0):
            raise ValueError("value_left_euler covers real s in (1/2, 1)")
        P = min(self.prime_cutoff, MAX_CUTOFF)
        primes, lam1, lam2, _, bad = self._tables(P)
        v = primes.astype(float) ** (-s)
        g = ~bad
        log_loc = -np.log(1.0 - lam2[g] * v[g] + lam2[g] * v[g] ** 2 - v[g] ** 3)
        log_bad = -np.log(1.0 - lam1[bad] ** 2 * v[bad])
        val = float(np.exp(np.sum(log_loc) + np.sum(log_bad)))
        err = abs(val) * self._tail_estimate(s, P)
        return val, err

    def value_left(self, s: float, n_smooth: int = 16_000) -> tuple[float, float]:
        """L(sym^2, s) for real s in (1/2, 1] via the smoothed series
        zeta(2s) (1 - M^-2s) sum lambda(n^2) n^-s exp(-n/N); independent
        cross-check of the Euler-product route.

        The continuation error scales like n_smooth^(1/2 - s); the returned
        estimate is the measured drift between two smoothing lengths.
        """
        if not (0.5 < s <= 1.0 + 1e-12):
            raise ValueError("value_left covers real s in (1/2, 1]")
        from .specfun import zeta

        M = self.curve.conductor
        n_tbl = 6 * n_smooth
        lam_sq = self._lambda_sq_table(n_tbl)
        n = np.arange(1, n_tbl + 1, dtype=float)
        base = lam_sq[1:] * n ** (-s)
        v1 = float(np.sum(base * np.exp(-n / n_smooth)))
        v2 = float(np.sum(base * np.exp(-n / (n_smooth / 4))))
        zfac = float(np.real(zeta(2.0 * s))) * (1.0 - M ** (-2.0 * s))
        return zfac * v1, abs(zfac) * abs(v1 - v2)

    # -- one-line zeros (peak markers) ---------------------------------------

    def one_line_zero_markers(
        self, t_max: float, threshold: float = 1e-2, step: float = 0.005
    ) -> list[float]:
        """t-values of local minima of |L(sym^2, 1+2it)| with modulus below
        the threshold; qualitative markers, not certified zeros."""
        grid = np.arange(step, t_max + step, step)
        P, _ = self._adaptive_cutoff(1.0, 1.0)  # default cutoff tables
        primes, lam1, lam2, _, bad = self._tables(P)
        lp = np.log(primes.astype(float))
        vals = np.empty(len(grid))
        for i, t in enumerate(grid):
            v = np.exp(-(1.0 + 2j * t) * lp)
            g = ~bad
            loc = -np.log(1.0 - lam2[g] * v[g] + lam2[g] * v[g] ** 2 - v[g] ** 3)
            locb = -np.log(1.0 - lam1[bad] ** 2 * v[bad])
            vals[i] = abs(np.exp(np.sum(loc) + np.sum(locb)))
        idx = np.nonzero((vals[1:-1] < vals[:-2]) & (vals[1:-1] < vals[2:]) & (vals[1:-1] < threshold))[0]
        return [float(grid[i + 1]) for i in idx]
