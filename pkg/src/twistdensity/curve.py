"""Elliptic-curve arithmetic: point counts mod p and normalized Hecke coefficients.

The curve is given by long Weierstrass coefficients (a1, a2, a3, a4, a6) with a
prime conductor M.  Everything downstream consumes the normalized coefficients
lambda(n) = a(n)/sqrt(n), where a(p) = p + 1 - #E(F_p) at good primes, so that
|lambda(p)| <= 2 (Hasse) and the functional equation relates s to 1 - s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LAMBDA_TABLE_LIMIT = 50_000_000


class CurveError(ValueError):
    pass


class ResourceLimitError(RuntimeError):
    pass


def is_prime(n: int) -> bool:
    """Deterministic primality for the sizes used here (trial division)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def sieve_primes(n: int) -> np.ndarray:
    """All primes <= n as an int64 array."""
    if n < 2:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(n + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0].astype(np.int64)


@dataclass
class CurveData:
    """Immutable curve data; lambda_cache is filled lazily but never rewritten."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    conductor: int
    omega: int | None = None  # functional-equation sign, determined numerically
    ap_cache: dict[int, int] = field(default_factory=dict)
    lambda_cache: dict[tuple[int, int], float] = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if not is_prime(self.conductor):
            raise CurveError(f"conductor {self.conductor} is not prime")
        if self.omega is not None and self.omega not in (1, -1):
            raise CurveError("omega must be +1 or -1")

    @property
    def invariants(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def ap(self, p: int) -> int:
        if p not in self.ap_cache:
            self.ap_cache[p] = count_points_mod_p(self, p)
        return self.ap_cache[p]

    def lam(self, p: int, m: int = 1) -> float:
        return lambda_prime_power(self, p, m)


def e11() -> CurveData:
    """The conductor-11 curve y^2 + y = x^3 - x^2 used throughout."""
    return CurveData(0, -1, 1, 0, 0, conductor=11, label="E11")


def _rhs_square_mod_p(curve: CurveData, p: int) -> np.ndarray:
    """g(x) = 4*(x^3+a2 x^2+a4 x+a6) + (a1 x + a3)^2 mod p for x = 0..p-1.

    Completing the square in y (p odd) turns the point count per x into a
    Legendre-symbol test on g(x).
    """
    x = np.arange(p, dtype=np.int64)
    a1, a2, a3, a4, a6 = curve.invariants
    x2 = (x * x) % p
    cubic = (((x2 * x) % p) + a2 * x2 + a4 * x + a6) % p
    lin = (a1 * x + a3) % p
    return (4 * cubic + lin * lin) % p


def _chi_table(p: int) -> np.ndarray:
    """chi[v] = Legendre symbol (v/p) for v = 0..p-1, as int8."""
    v = np.arange(p, dtype=np.int64)
    chi = np.full(p, -1, dtype=np.int8)
    chi[(v * v) % p] = 1
    chi[0] = 0
    return chi


def count_points_mod_p(curve: CurveData, p: int) -> int:
    """Trace of Frobenius a_p.

    Good p: a_p = p + 1 - #E(F_p), point at infinity included.
    p = M (multiplicative reduction, prime conductor): a_p = p - #E_ns(F_p)
    where #E_ns counts the nonsingular points plus infinity, so |a_p| = 1.
    """
    if not is_prime(p):
        raise CurveError(f"p={p} is not prime")
    a1, a2, a3, a4, a6 = curve.invariants
    if p < 5 or p == curve.conductor:
        # brute force; also locate singular points at the bad prime
        pts = [
            (x, y)
            for x in range(p)
            for y in range(p)
            if (y * y + a1 * x * y + a3 * y) % p == (x**3 + a2 * x * x + a4 * x + a6) % p
        ]
        if p == curve.conductor:
            ns = [
                (x, y)
                for (x, y) in pts
                if (2 * y + a1 * x + a3) % p != 0
                or (3 * x * x + 2 * a2 * x + a4 - a1 * y) % p != 0
            ]
            ap = p - (len(ns) + 1)
            if abs(ap) > 1:
                raise CurveError(f"unexpected bad-reduction count at p={p}")
            return ap
        return p + 1 - (len(pts) + 1)
    chi = _chi_table(p)
    g = _rhs_square_mod_p(curve, p)
    ap = -int(chi[g].sum())
    if ap * ap > 4 * p:
        raise CurveError(f"Hasse bound violated at p={p}: a_p={ap}")
    return ap


def ap_for_primes(curve: CurveData, primes: np.ndarray) -> np.ndarray:
    """a_p for each prime in `primes` (cached)."""
    out = np.empty(len(primes), dtype=np.int64)
    for i, p in enumerate(primes):
        out[i] = curve.ap(int(p))
    return out


def lambda_prime_power(curve: CurveData, p: int, m: int) -> float:
    """lambda(p^m) via the binomial-sum recursions at good p, full
    multiplicativity lambda(p)^m at p | M."""
    if m < 0:
        raise CurveError("m must be >= 0")
    if m == 0:
        return 1.0
    key = (p, m)
    if key in curve.lambda_cache:
        return curve.lambda_cache[key]
    lp = curve.ap(p) / math.sqrt(p)
    if p == curve.conductor:
        val = lp**m
        curve.lambda_cache[key] = val
        return val
    # fill the cache upward so the recursions see their predecessors
    vals: dict[int, float] = {0: 1.0, 1: lp}
    for k in range(2, m + 1):
        if k % 2 == 0:
            mm = k // 2
            s = lp ** (2 * mm)
            for r in range(mm):
                s -= (math.comb(2 * mm, mm - r) - math.comb(2 * mm, mm - r - 1)) * vals[2 * r]
        else:
            mm = (k - 1) // 2
            s = lp ** (2 * mm + 1)
            for r in range(mm):
                s -= (
                    math.comb(2 * mm + 1, mm - r) - math.comb(2 * mm + 1, mm - r - 1)
                ) * vals[2 * r + 1]
        vals[k] = s
    for k, v in vals.items():
        if k >= 1:
            curve.lambda_cache[(p, k)] = v
    return vals[m]


def mu_e(curve: CurveData, n: int) -> float:
    """Multiplicative inverse-coefficient function: mu(p) = -lambda(p),
    mu(p^2) = 1 unless p = M (then 0), mu(p^k) = 0 for k > 2."""
    if n < 1:
        raise CurveError("n must be >= 1")
    val = 1.0
    for p, k in _factorize(n):
        if k == 1:
            val *= -lambda_prime_power(curve, p, 1)
        elif k == 2:
            if p == curve.conductor:
                return 0.0
        else:
            return 0.0
    return val


def _factorize(n: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            k = 0
            while n % d == 0:
                n //= d
                k += 1
            out.append((d, k))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def _spf_table(n_max: int) -> np.ndarray:
    """Smallest-prime-factor table, spf[1] = 1."""
    spf = np.zeros(n_max + 1, dtype=np.int64)
    spf[1] = 1
    for p in range(2, int(n_max**0.5) + 1):
        if spf[p] == 0:
            view = spf[p::p]
            view[view == 0] = p
    unset = np.nonzero(spf == 0)[0]
    spf[unset] = unset  # primes above sqrt(n_max)
    return spf


def lambda_table(curve: CurveData, n_max: int, threads: int = 1) -> np.ndarray:
    """lambda(n) for n = 0..n_max (index 0 unused) by multiplicativity.

    Deterministic for any `threads`; the prime point counts are independent,
    so the optional process pool just splits the prime list into ordered
    chunks.
    """
    if n_max < 1:
        raise CurveError("n_max must be >= 1")
    if n_max > LAMBDA_TABLE_LIMIT:
        raise ResourceLimitError(f"n_max={n_max} exceeds limit {LAMBDA_TABLE_LIMIT}")
    primes = sieve_primes(n_max)
    ap = _ap_block(curve, primes, threads)
    for p, a in zip(primes.tolist(), ap.tolist()):
        curve.ap_cache.setdefault(p, a)

    lam = np.zeros(n_max + 1)
    lam[1] = 1.0
    lam_p = ap / np.sqrt(primes.astype(float))
    spf = _spf_table(n_max)
    lam_at_p = np.zeros(n_max + 1)
    lam_at_p[primes] = lam_p
    for n in range(2, n_max + 1):
        p = int(spf[n])
        m = n // p
        if m % p != 0:
            lam[n] = lam_at_p[p] * lam[m]
        else:
            k = 1
            while m % p == 0:
                m //= p
                k += 1
            lam[n] = lambda_prime_power(curve, p, k) * lam[m]
    return lam


def _ap_block(curve: CurveData, primes: np.ndarray, threads: int) -> np.ndarray:
    missing = [int(p) for p in primes if int(p) not in curve.ap_cache]
    if threads > 1 and len(missing) > 64:
        from concurrent.futures import ProcessPoolExecutor

        chunks = np.array_split(np.array(missing, dtype=np.int64), threads)
        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_ap_chunk_worker, [(curve.invariants, curve.conductor, c.tolist()) for c in chunks]))
        for chunk, res in zip(chunks, results):
            for p, a in zip(chunk.tolist(), res):
                curve.ap_cache[p] = a
    else:
        for p in missing:
            curve.ap_cache[p] = count_points_mod_p(curve, p)
    return np.array([curve.ap_cache[int(p)] for p in primes], dtype=np.int64)


def _ap_chunk_worker(args) -> list[int]:
    invs, M, ps = args
    c = CurveData(*invs, conductor=M)
    return [count_points_mod_p(c, p) for p in ps]


def write_ap_cache(curve: CurveData, path: str) -> None:
    """Plain-text cache: header line, then `p a_p` pairs."""
    a = curve.invariants
    with open(path, "w") as fh:
        fh.write(f"# curve M={curve.conductor} a=[{a[0]},{a[1]},{a[2]},{a[3]},{a[4]}]\n")
        for p in sorted(curve.ap_cache):
            fh.write(f"{p} {curve.ap_cache[p]}\n")


def read_ap_cache(curve: CurveData, path: str) -> int:
    """Load `p a_p` pairs; rejects a header that does not match the curve."""
    a = curve.invariants
    expect = f"# curve M={curve.conductor} a=[{a[0]},{a[1]},{a[2]},{a[3]},{a[4]}]"
    n = 0
    with open(path) as fh:
        header = fh.readline().strip()
        if header != expect:
            raise CurveError(f"cache header mismatch: {header!r}")
        for line in fh:
            p_s, ap_s = line.split()
            curve.ap_cache[int(p_s)] = int(ap_s)
            n += 1
    return n
