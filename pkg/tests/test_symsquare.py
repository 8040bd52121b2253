import numpy as np
import pytest
import sympy

from twistdensity.symsquare import SymSquareEvaluator, SymSquareError


def test_local_factor_identity_symbolic(curve):
    """Expanding the Satake-parameter product reproduces the lambda-form
    cubic local factor exactly (beta = 1/alpha, lambda = alpha + 1/alpha)."""
    alpha, v = sympy.symbols("alpha v")
    beta = 1 / alpha
    lam = alpha + beta
    prod = (1 - alpha**2 * v) * (1 - alpha * beta * v) * (1 - beta**2 * v)
    lam2 = lam**2 - 1
    target = 1 - lam2 * v + lam2 * v**2 - v**3
    assert sympy.simplify(sympy.expand(prod - target)) == 0
    # numeric spot check over ten primes
    for p in (2, 3, 5, 7, 13, 17, 19, 23, 29, 31):
        lp = curve.ap(p) / np.sqrt(p)
        disc = complex(lp * lp - 4)
        a = (lp + np.sqrt(disc)) / 2
        b = (lp - np.sqrt(disc)) / 2
        vv = 0.37
        lhs = (1 - a * a * vv) * (1 - a * b * vv) * (1 - b * b * vv)
        l2 = lp * lp - 1
        rhs = 1 - l2 * vv + l2 * vv * vv - vv**3
        assert complex(lhs) == pytest.approx(complex(rhs), abs=1e-12)


def test_deep_convergence(sym2):
    # measured drift between cutoffs 1e3 and 1e5 at s = 3 is 1.1e-9, well
    # inside the 2.2e-7 absolute tail bound at the smaller cutoff
    v1, _ = sym2.value(3.0, tol=1e-10)
    small = SymSquareEvaluator(sym2.curve, prime_cutoff=1_000)
    v2, _ = small.value(3.0, tol=1e-6)
    assert abs(v1 - v2) < 5e-9


def test_value_at_one_positive_and_plateau(sym2, curve):
    val, err = sym2.value(1.0 + 0j, tol=1e-2)
    assert val.real > 0
    # cutoff plateau: measured honest drift is ~2e-3 between P=1e4 and 1e5
    # (the rms tail heuristic at P=1e4 is ~3e-3); assert at that level
    small = SymSquareEvaluator(curve, prime_cutoff=10_000)
    v2, err2 = small.value(1.0 + 0j, tol=1e-2)
    assert abs(val - v2) < 2 * err2
    assert abs(val - v2) < 5e-3


def test_conjugation_symmetry(sym2):
    s = 1.3 + 0.8j
    a, _ = sym2.value(s, tol=1e-6)
    b, _ = sym2.value(np.conj(s), tol=1e-6)
    assert b == pytest.approx(np.conj(a), rel=1e-12)


def test_log_deriv_finite_difference(sym2):
    s = 1.3
    h = 1e-5
    va, _ = sym2.value(s + h, tol=1e-6)
    vb, _ = sym2.value(s - h, tol=1e-6)
    fd = (np.log(va) - np.log(vb)) / (2 * h)
    ld, _ = sym2.log_deriv(s, tol=1e-6)
    assert ld == pytest.approx(fd, abs=1e-5)


def symsquare_dirichlet_coeffs(curve, n_max: int) -> np.ndarray:
    """Oracle coefficients b_n of the symmetric square from the local-factor
    recurrences, filled multiplicatively."""
    from twistdensity.curve import _spf_table, lambda_prime_power, sieve_primes

    bp = {}
    for p in sieve_primes(n_max).tolist():
        if p == curve.conductor:
            l1sq = lambda_prime_power(curve, p, 1) ** 2
            vals = [1.0, l1sq]
            while p ** len(vals) <= n_max:
                vals.append(vals[-1] * l1sq)
        else:
            l2 = lambda_prime_power(curve, p, 2)
            vals = [1.0, l2]
            while p ** len(vals) <= n_max:
                k = len(vals)
                vals.append(
                    l2 * vals[k - 1] - l2 * vals[k - 2] + (vals[k - 3] if k >= 3 else 0.0)
                )
        bp[p] = vals
    spf = _spf_table(n_max)
    bn = np.zeros(n_max + 1)
    bn[1] = 1.0
    for n in range(2, n_max + 1):
        p = int(spf[n])
        m = n
        k = 0
        while m % p == 0:
            m //= p
            k += 1
        bn[n] = bp[p][k] * bn[m]
    return bn


def test_log_deriv_series_oracle(sym2, curve):
    """At s = 2 the term-wise differentiated Dirichlet series converges
    absolutely and is an independent check on the Euler-product route."""
    s = 2.0
    n_max = 100_000
    bn = symsquare_dirichlet_coeffs(curve, n_max)
    n = np.arange(1, n_max + 1, dtype=float)
    l_val = np.sum(bn[1:] * n**-s)
    l_deriv = -np.sum(bn[1:] * np.log(n) * n**-s)
    oracle = l_deriv / l_val
    ld, _ = sym2.log_deriv(s, tol=1e-9)
    assert ld == pytest.approx(oracle, abs=1e-8)


def test_log_deriv_reflection_structure(sym2):
    for t in (0.7, -0.7):
        v, _ = sym2.log_deriv(1.0 + 2j * t, tol=1e-3)
        w, _ = sym2.log_deriv(1.0 - 2j * t, tol=1e-3)
        assert v == pytest.approx(np.conj(w), rel=1e-12)


def test_at_one_consistency(sym2):
    val, lp, lpp = sym2.at_one()
    assert val > 0
    # Richardson limit of the 1-line log-derivative as s -> 1+
    l_1em2 = sym2.log_deriv(1.0 + 1e-2, tol=1e-2)[0].real
    l_1em3 = sym2.log_deriv(1.0 + 1e-3, tol=1e-2)[0].real
    extrap = (10 * l_1em3 - l_1em2) / 9
    assert extrap == pytest.approx(lp, abs=1e-4)
    # second derivative vs one-sided second difference of log value
    # (stays inside the Re s >= 1 domain)
    h = 1e-3
    v0, _ = sym2.value(1.0 + 0j, tol=1e-4)
    v1, _ = sym2.value(1.0 + h, tol=1e-4)
    v2, _ = sym2.value(1.0 + 2 * h, tol=1e-4)
    d2 = (np.log(v2.real) - 2 * np.log(v1.real) + np.log(v0.real)) / h**2
    assert d2 + lp**2 == pytest.approx(lpp, abs=1e-3)


def test_cauchy_in_cutoff_on_line(sym2, curve):
    ts = np.linspace(0.0, 30.0, 50)
    a = SymSquareEvaluator(curve, prime_cutoff=50_000)
    for t in ts[::10]:
        v1, e1 = sym2.value(1.0 + 2j * t, tol=5e-3)
        v2, e2 = a.value(1.0 + 2j * t, tol=5e-3)
        assert abs(v1 - v2) < 3 * (e1 + e2)


def test_value_left_two_routes_agree(sym2):
    """Smoothed-series route vs truncated-Euler-product route, each with its
    own honest error estimate."""
    v1, e1 = sym2.value_left(0.8, n_smooth=8_000)
    v2, e2 = sym2.value_left(0.8, n_smooth=16_000)
    assert abs(v1 - v2) < 4 * (e1 + e2)
    ve, ee = sym2.value_left_euler(0.8)
    assert abs(ve - v2) < 3 * (ee + e2)
    assert e2 < 0.05 * abs(v2)


def test_value_domain_errors(sym2):
    with pytest.raises(ValueError):
        sym2.value(0.8, tol=1e-3)
    with pytest.raises(ValueError):
        sym2.value_left(1.4)
    with pytest.raises(SymSquareError):
        sym2.value(1.0, tol=1e-9)  # unreachable tolerance on the 1-line
