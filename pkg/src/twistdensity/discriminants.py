"""Fundamental discriminants, the Kronecker symbol, and the even-twist family.

A twist index d is kept when it is a positive fundamental discriminant
(d != 1, no odd square divides d, and d = 1 mod 4 or d = 8, 12 mod 16),
M does not divide d, and chi_d(M) * omega = +1, which for positive d is the
even-functional-equation condition chi_d(-M) * omega = +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curve import CurveData, ResourceLimitError

FAMILY_SIEVE_LIMIT = 100_000_000


def is_fundamental(d: int) -> bool:
    """Fundamental-discriminant test (both signs; d in Z - {0, 1})."""
    if d == 0:
        raise ValueError("d must be nonzero")
    if d == 1:
        return False
    if d % 4 == 1:
        return _odd_squarefree(d)
    if d % 16 in (8, 12):
        return _odd_squarefree(d)
    return False


def _odd_squarefree(d: int) -> bool:
    d = abs(d)
    while d % 2 == 0:
        d //= 2
    f = 3
    while f * f <= d:
        if d % (f * f) == 0:
            return False
        if d % f == 0:
            d //= f
        f += 2
    return True


def kronecker(d: int, n: int) -> int:
    """Full Kronecker symbol (d/n), completely multiplicative in n."""
    if n == 0:
        return 1 if d in (1, -1) else 0
    res = 1
    if n < 0:
        n = -n
        if d < 0:
            res = -1
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        if d % 8 in (3, 5):
            res = -res
    # Jacobi symbol (d/n) for odd n via binary reciprocity
    a = d % n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                res = -res
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            res = -res
        a %= n
    return res if n == 1 else 0


def fundamental_mask(X: int) -> np.ndarray:
    """Boolean mask over 0..X marking positive fundamental discriminants."""
    d = np.arange(X + 1, dtype=np.int64)
    cong = (d % 4 == 1) | (d % 16 == 8) | (d % 16 == 12)
    sq_ok = np.ones(X + 1, dtype=bool)
    for p in range(3, int(X**0.5) + 1, 2):
        if all(p % q for q in range(3, int(p**0.5) + 1, 2)):
            sq_ok[:: p * p] = False
    mask = cong & sq_ok
    mask[: min(2, X + 1)] = False
    return mask


@dataclass
class TwistFamily:
    conductor: int
    omega: int
    X: int
    members: np.ndarray  # ordered fundamental d with chi_d(M)*omega = +1
    n_fundamental: int  # all fundamental 0 < d <= X
    n_excluded: int  # fundamental d with M | d
    n_odd: int  # fundamental d with chi_d(M)*omega = -1
    x_star_by_class: dict[int, int] = field(default_factory=dict)
    log_q: np.ndarray | None = None  # ln(sqrt(M) d / (2 pi)) per member, cached

    @property
    def x_star(self) -> int:
        return len(self.members)

    def log_conductors(self) -> np.ndarray:
        if self.log_q is None:
            M = self.conductor
            self.log_q = np.log(np.sqrt(M) * self.members.astype(float) / (2 * np.pi))
        return self.log_q


def enumerate_family(curve: CurveData, X: int) -> TwistFamily:
    """All even-sign twists 0 < d <= X for the given curve.

    chi_d(M) for positive d equals chi_d(-M); d with M | d are excluded from
    both parities.
    """
    if X < 1:
        raise ValueError("X must be >= 1")
    if X > FAMILY_SIEVE_LIMIT:
        raise ResourceLimitError(
            f"X={X} exceeds the sieve limit; use the closed-form large-X paths"
        )
    if curve.omega is None:
        raise ValueError("curve sign omega has not been determined yet")
    M = curve.conductor
    mask = fundamental_mask(X)
    ds = np.nonzero(mask)[0].astype(np.int64)
    # chi_d(M) = (d/M) is periodic in d mod M for prime M > 2
    legendre = np.array([kronecker(int(r), M) for r in range(M)], dtype=np.int64)
    chi = legendre[ds % M]
    members = ds[chi == curve.omega]
    n_odd = int(np.sum(chi == -curve.omega))
    n_excl = int(np.sum(chi == 0))
    by_class: dict[int, int] = {}
    for b, cnt in zip(*np.unique(members % M, return_counts=True)):
        by_class[int(b)] = int(cnt)
    return TwistFamily(
        conductor=M,
        omega=curve.omega,
        X=X,
        members=members,
        n_fundamental=len(ds),
        n_excluded=n_excl,
        n_odd=n_odd,
        x_star_by_class=by_class,
    )


def family_log_sum(family: TwistFamily) -> tuple[float, float]:
    """(exact, euler_maclaurin) values of sum_d ln(sqrt(M) d / (2 pi)).

    The closed form X* [ln(sqrt(M) X / (2 pi)) - 1] trades the lattice sum
    for the smooth mean, accurate to a relative X^(-1/2) scale.
    """
    if family.x_star == 0:
        raise ValueError("family is empty")
    exact = float(np.sum(family.log_conductors()))
    M = family.conductor
    L = math.log(math.sqrt(M) * family.X / (2 * math.pi))
    return exact, family.x_star * (L - 1.0)


def mean_log_conductor_em(M: int, X: float) -> float:
    """Euler-Maclaurin mean of ln(sqrt(M) d / 2 pi) over the family: L - 1."""
    return math.log(math.sqrt(M) * X / (2 * math.pi)) - 1.0
