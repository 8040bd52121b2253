import math

import numpy as np
import pytest

from twistdensity.discriminants import (
    TwistFamily,
    enumerate_family,
    family_log_sum,
    fundamental_mask,
    is_fundamental,
    kronecker,
)


def legendre_euler(a: int, p: int) -> int:
    """Oracle: Euler's criterion for odd prime p."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def jacobi_bruteforce(d: int, n: int) -> int:
    """Oracle: Jacobi symbol as a product of Legendre symbols."""
    assert n > 0 and n % 2 == 1
    res = 1
    m = n
    p = 3
    while m % 2 == 0:
        m //= 2
    f = 2
    m = n
    while f * f <= m:
        while m % f == 0:
            if f % 2 == 1:
                res *= legendre_euler(d, f)
            m //= f
        f += 1
    if m > 1:
        res *= legendre_euler(d, m)
    return res


def test_fundamental_examples():
    assert is_fundamental(5)
    assert not is_fundamental(9)
    assert is_fundamental(8)
    assert not is_fundamental(4)
    assert not is_fundamental(1)
    assert is_fundamental(-3)
    assert is_fundamental(-4)
    with pytest.raises(ValueError):
        is_fundamental(0)


def test_fundamental_bruteforce():
    def oracle(d):
        if d in (0, 1):
            return False
        ok_cong = d % 4 == 1 or d % 16 in (8, 12)
        v = abs(d)
        for p in range(3, int(v**0.5) + 1, 2):
            if v % (p * p) == 0 and all(p % q for q in range(2, int(p**0.5) + 1)):
                return False
        return ok_cong

    for d in range(-300, 301):
        if d == 0:
            continue
        assert is_fundamental(d) == oracle(d), d


def test_kronecker_basics():
    assert kronecker(5, 2) == -1  # 5 mod 8 = 5
    assert kronecker(17, 2) == 1  # 17 mod 8 = 1
    assert kronecker(6, 3) == 0
    for d in (-7, -1, 3, 12, 40):
        assert kronecker(d, 1) == 1


def test_kronecker_vs_jacobi_oracle():
    for n in range(1, 500, 2):
        for d in range(-500, 501, 37):
            if d == 0:
                continue
            assert kronecker(d, n) == jacobi_bruteforce(d, n), (d, n)


def test_kronecker_complete_multiplicativity():
    for d in (5, -11, 21, 8):
        for m in range(1, 40):
            for n in range(1, 40):
                assert kronecker(d, m * n) == kronecker(d, m) * kronecker(d, n)


def test_family_small_bruteforce(curve):
    fam = enumerate_family(curve, 30)
    expect = [
        d
        for d in range(2, 31)
        if is_fundamental(d) and kronecker(d, 11) == 1
    ]
    assert fam.members.tolist() == expect


def test_family_empty(curve):
    fam = enumerate_family(curve, 1)
    assert fam.x_star == 0


def test_family_nesting(curve):
    small = enumerate_family(curve, 500)
    big = enumerate_family(curve, 2_000)
    assert set(small.members.tolist()) <= set(big.members.tolist())


def test_family_partition(curve):
    fam = enumerate_family(curve, 5_000)
    assert fam.x_star + fam.n_odd + fam.n_excluded == fam.n_fundamental
    assert sum(fam.x_star_by_class.values()) == fam.x_star
    assert all(b % 11 != 0 for b in fam.x_star_by_class)


def test_family_requires_sign():
    from twistdensity.curve import e11

    with pytest.raises(ValueError):
        enumerate_family(e11(), 100)  # omega not determined


def test_fundamental_mask_matches_scalar():
    mask = fundamental_mask(400)
    for d in range(1, 401):
        assert mask[d] == is_fundamental(d), d


def test_family_log_sum(curve):
    fam = enumerate_family(curve, 3_000)
    exact, em = family_log_sum(fam)
    direct = float(np.sum(np.log(np.sqrt(11) * fam.members / (2 * np.pi))))
    assert exact == pytest.approx(direct, rel=1e-13)
    assert abs(exact - em) / abs(exact) < 1e-2
    # singleton family
    single = TwistFamily(11, 1, 5, np.array([5]), 1, 0, 0, {5 % 11: 1})
    ex, _ = family_log_sum(single)
    assert ex == pytest.approx(math.log(math.sqrt(11) * 5 / (2 * math.pi)))


def test_family_log_sum_monotone(curve):
    vals = []
    for X in (100, 400, 1200, 2500):
        exact, _ = family_log_sum(enumerate_family(curve, X))
        vals.append(exact)
    assert all(a < b for a, b in zip(vals, vals[1:]))
