"""Acceptance suite: one test per exit criterion, each printing a PASS/FAIL
line with the measured quantity.

The desk-scale zero run (d <= 4000, T = 20, ~15 minutes) is produced once and
cached under .cache/; delete the cache to force regeneration.
"""

import math
import os
import time

import numpy as np
import pytest

from twistdensity import density as D
from twistdensity import lfun
from twistdensity.curve import count_points_mod_p, e11, lambda_table, sieve_primes
from twistdensity.discriminants import enumerate_family
from twistdensity.empirics import build_histogram, discrepancy, kendall_tau_sign
from twistdensity.specfun import zeta_zeros_up_to

CACHE_DIR = os.path.join(os.path.dirname(__file__), "..", ".cache")
DESK_ZEROS = os.path.join(CACHE_DIR, "zeros_desk_d4000_t20.txt")
DESK_DMAX = 4_000
DESK_TMAX = 20.0


def report(name: str, passed: bool, detail: str):
    print(f"\n[{'PASS' if passed else 'FAIL'}] {name}: {detail}")


# -- criterion 1: family counts ----------------------------------------------


def test_family_counts(curve):
    t0 = time.time()
    fam = enumerate_family(curve, 40_000)
    total = fam.x_star + fam.n_odd
    elapsed = time.time() - t0
    # Reference counts from the source data: 11,135 total / 5,562 even.  Our
    # convention (spec definition applied verbatim, d = 1 excluded, 11 | d
    # excluded from both parities) gives 11,139 / 5,563, a documented
    # 0.036% / 0.018% difference, inside the allowed 0.2% band.
    assert total == 11_139 and fam.x_star == 5_563  # frozen for regression
    dev_total = abs(total - 11_135) / 11_135
    dev_even = abs(fam.x_star - 5_562) / 5_562
    ok = dev_total <= 0.002 and dev_even <= 0.002 and elapsed < 1.0
    report(
        "family counts",
        ok,
        f"{total} twists / {fam.x_star} even vs 11135/5562 "
        f"(dev {100*dev_total:.3f}%/{100*dev_even:.3f}%), {elapsed:.2f}s",
    )
    assert ok


# -- criterion 2: diagonal identity ------------------------------------------


def test_diagonal_identity(ratios):
    t0 = time.time()
    worst = max(abs(ratios.a_factor(r, r) - 1.0) for r in (0.0, 0.05, 0.1j, 0.03 + 0.02j))
    elapsed = time.time() - t0
    ok = worst < 1e-8 and elapsed < 10
    report("diagonal identity", ok, f"max |A(r,r)-1| = {worst:.2e}, {elapsed:.1f}s")
    assert ok


# -- criterion 3: relation identity ------------------------------------------


def test_relation_identity(ratios):
    t0 = time.time()
    res = abs(ratios.a_factor_dalpha(0.0) + 0.5 * ratios.b_derivs()[0])
    elapsed = time.time() - t0
    ok = res < 1e-6 and elapsed < 30
    report("relation identity", ok, f"|A1(0,0) + B'(0)/2| = {res:.2e}, {elapsed:.1f}s")
    assert ok


# -- criterion 4: coefficient oracle -----------------------------------------


def _ap_oracle_vectorized(curve, p: int) -> int:
    """Independent enumeration of all (x, y) pairs, vectorized double loop."""
    a1, a2, a3, a4, a6 = curve.invariants
    x = np.arange(p, dtype=np.int64)[:, None]
    y = np.arange(p, dtype=np.int64)[None, :]
    lhs = (y * y + a1 * x * y + a3 * y) % p
    rhs = (x**3 + a2 * x * x + a4 * x + a6) % p
    return p + 1 - (int(np.sum(lhs == rhs)) + 1)


def test_coefficient_oracle(curve):
    t0 = time.time()
    for p in sieve_primes(1_000).tolist():
        if p == curve.conductor:
            continue
        assert count_points_mod_p(curve, p) == _ap_oracle_vectorized(curve, p), p
    hasse_ok = all(
        curve.ap(p) ** 2 <= 4 * p for p in sieve_primes(10_000).tolist()
    )
    elapsed = time.time() - t0
    ok = hasse_ok and elapsed < 10
    report("coefficient oracle", ok, f"p < 1000 exact match, Hasse to 1e4, {elapsed:.1f}s")
    assert ok


# -- criterion 5: SO-limit convergence ---------------------------------------


def test_so_limit_convergence(ratios):
    t0 = time.time()
    tau = np.linspace(0.0, 3.0, 301)
    so = D.so_even_limit(tau)
    dists = []
    for X in (4e4, 1e6, 1e10, 1e20, 1e30, 1e300):
        vals = D.scaled_density(tau, X, ratios, mode="closed_form_large_X")
        dists.append(float(np.max(np.abs(vals - so))))
    elapsed = time.time() - t0
    monotone = all(a > b for a, b in zip(dists, dists[1:]))
    ok = dists[-1] < 0.02 and monotone and elapsed < 60
    report(
        "SO-limit convergence",
        ok,
        f"sup-dist at 1e300 = {dists[-1]:.4f} (<0.02), monotone={monotone}, {elapsed:.0f}s",
    )
    assert ok


# -- criterion 6: dip placement ----------------------------------------------


def test_dip_placement(ratios, curve):
    t0 = time.time()
    fam = enumerate_family(curve, 40_000)
    t = np.arange(0.0, 15.0001, 0.01)
    vals = D.density_curve(t, fam, ratios, mode="exact").normalized
    mins = [
        float(t[i])
        for i in range(1, len(t) - 1)
        if vals[i] < vals[i - 1] and vals[i] <= vals[i + 1]
    ]
    halves = [z / 2 for z in zeta_zeros_up_to(22.5)]  # 7.0674, 10.5110
    offsets = [min(abs(m - h) for m in mins) for h in halves]
    elapsed = time.time() - t0
    ok = all(off < 0.05 for off in offsets) and elapsed < 120
    report(
        "dip placement",
        ok,
        f"minima offsets from zeta-zero halves: {[f'{o:.3f}' for o in offsets]}, {elapsed:.0f}s",
    )
    assert ok


# -- criterion 7: a1 asymptotics ---------------------------------------------


def test_a1_asymptotics(ratios):
    t0 = time.time()
    a1, _ = D.expansion_coeffs(ratios)
    tau0 = 0.25
    so = float(D.so_even_limit(tau0))
    Ls, ys = [], []
    for X in (1e6, 1e10, 1e20):
        L = math.log(math.sqrt(11) * X / (2 * math.pi))
        ys.append(float(D.scaled_density(tau0, X, ratios, mode="closed_form_large_X")) - so)
        Ls.append(L)
    A = np.array([[1.0, 1 / L, 1 / L**2] for L in Ls])
    _, c1, _ = np.linalg.solve(A, np.array(ys))
    target = -a1 * (1.0 + math.cos(2 * math.pi * tau0))
    rel = abs(c1 - target) / abs(target)
    elapsed = time.time() - t0
    ok = rel < 0.05 and elapsed < 120
    report("a1 asymptotics", ok, f"fit {c1:.5f} vs {target:.5f} (rel {100*rel:.2f}%), {elapsed:.0f}s")
    assert ok


# -- criterion 8: ratios-conjecture desk-scale check --------------------------


@pytest.mark.slow
def test_ratios_conjecture_desk_scale(ratios, curve):
    """Honest desk-scale comparison.  The right side is verified elsewhere to
    0.004% against a finite difference of the full conjecture expression and
    the per-twist left side to 9e-15 against 30-digit arithmetic, so the gap
    measured here is the conjecture's own finite-X error.  At X = 2000 it is
    dominated by the fluctuation of the rank >= 2 twist count (each such
    twist contributes ~2/r = 20) and exceeds the stated 5%; the criterion is
    asserted as specified and fails honestly.
    """
    t0 = time.time()
    fam = enumerate_family(curve, 2_000)
    rhs = complex(ratios.log_deriv_average(0.1, fam, mode="exact")).real
    lam_tab = lambda_table(curve, lfun.n_needed(curve, 2_000, 1.0))
    lhs = sum(
        lfun.lvalue_log_deriv(
            curve, int(d), 0.1, ctx=lfun.make_context(curve, int(d), 1.0, lam=lam_tab)
        )
        for d in fam.members
    )
    rel = abs(lhs - rhs) / abs(lhs)
    elapsed = time.time() - t0
    ok = rel < 0.05 and elapsed < 1800
    report(
        "ratios-conjecture desk-scale check",
        ok,
        f"LHS {lhs:.2f} vs RHS {rhs:.2f}: rel {100*rel:.2f}% (criterion < 5%), {elapsed:.0f}s",
    )
    assert ok


# -- criterion 9: end-to-end pipeline ----------------------------------------


@pytest.fixture(scope="session")
def desk_zeros(curve):
    if os.path.exists(DESK_ZEROS):
        ds = lfun.read_zero_file(DESK_ZEROS)
        if ds.X == DESK_DMAX and abs(ds.t_max - DESK_TMAX) < 1e-9:
            return ds
    fam = enumerate_family(curve, DESK_DMAX)
    lam = lambda_table(curve, lfun.n_needed(curve, int(fam.members[-1]), DESK_TMAX))
    ds = lfun.ZeroDataset(curve.label, curve.conductor, DESK_DMAX, DESK_TMAX)
    for d in fam.members:
        ctx = lfun.make_context(curve, int(d), DESK_TMAX, lam=lam)
        try:
            ds.add(lfun.find_zeros(ctx))
        except lfun.CountGateError as exc:
            ds.add(exc.record)
    os.makedirs(CACHE_DIR, exist_ok=True)
    lfun.write_zero_file(ds, DESK_ZEROS)
    return ds


@pytest.mark.slow
def test_end_to_end_pipeline(desk_zeros, ratios, curve):
    t0 = time.time()
    ds = desk_zeros
    fam = enumerate_family(curve, DESK_DMAX)
    assert set(ds.records) == set(int(d) for d in fam.members)

    # (a) count gate >= 99%
    frac = ds.gate_pass_fraction()
    ok_a = frac >= 0.99

    # (b) histogram vs prediction MAD over [0.5, 15] below 5% of plateau
    hist = build_histogram(ds, binwidth=0.1, X=DESK_DMAX)
    theory = D.density_curve(hist.midpoints(), fam, ratios, mode="exact")
    th = theory.for_histogram()
    mids = hist.midpoints()
    sel = (mids >= 0.5) & (mids <= 15.0)
    plateau = float(np.median(th[sel]))
    mad = float(np.mean(np.abs(hist.normalized[sel] - th[sel])))
    ok_b = mad < 0.05 * plateau

    # (c) near-origin repulsion: data below prediction on the bins in (0, 0.05]
    ok_c = bool(hist.normalized[0] < th[0])

    # (d) Q(0.03, X) trend decreasing over the upper half of the X grid
    x_grid = np.array([500.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0, 3500.0, 4000.0])
    q_vals = []
    for x in x_grid:
        h = build_histogram(ds, binwidth=0.01, X=x)
        m = h.midpoints()
        grid_sel = m < 1.0
        th_x = D.density_curve(m[grid_sel], enumerate_family(curve, int(x)), ratios, mode="exact")
        delta = discrepancy(0.03, th_x, h)
        q_vals.append(math.log(abs(delta)) / math.log(x) if delta != 0 else math.nan)
    upper = q_vals[len(q_vals) // 2 :]
    tau_sign = kendall_tau_sign(upper)
    ok_d = tau_sign < 0

    elapsed = time.time() - t0
    report(
        "end-to-end pipeline",
        ok_a and ok_b and ok_c and ok_d,
        f"(a) gate {100*frac:.2f}% (>=99%: {ok_a}); "
        f"(b) MAD {mad:.4f} vs 5% of plateau {plateau:.4f} = {0.05*plateau:.4f} ({ok_b}); "
        f"(c) bin-0 data {hist.normalized[0]:.4f} < theory {th[0]:.4f} ({ok_c}); "
        f"(d) Q(0.03,X) upper-half tau {tau_sign:+.2f} ({ok_d}); {elapsed:.0f}s",
    )
    assert ok_a and ok_b and ok_c and ok_d


# -- criterion 10: full-scale reproduction (opt-in) ---------------------------


@pytest.mark.fullscale
@pytest.mark.skipif(
    not os.environ.get("TWISTDENSITY_FULLSCALE"),
    reason="paper-scale run (X=40000, T=30): days of compute and heights past the "
    "double-precision envelope (noise ~ eps * e^(pi t/2) swamps Z above t ~ 22); "
    "set TWISTDENSITY_FULLSCALE=1 to attempt",
)
def test_full_scale_reproduction(curve, ratios):
    fam = enumerate_family(curve, 40_000)
    lam = lambda_table(curve, lfun.n_needed(curve, int(fam.members[-1]), 30.0))
    ds = lfun.ZeroDataset(curve.label, curve.conductor, 40_000, 30.0)
    for d in fam.members:
        ctx = lfun.make_context(curve, int(d), 30.0, lam=lam)
        try:
            ds.add(lfun.find_zeros(ctx))
        except lfun.CountGateError as exc:
            ds.add(exc.record)
    total = ds.total_zeros()
    doubles = sum(1 for r in ds.records.values() if r.order0 >= 2)
    ok = abs(total - 590_170) / 590_170 < 0.01 and abs(doubles - 593) / 593 < 0.05
    report("full-scale reproduction", ok, f"{total} zeros (ref 590170), {doubles} double-zero twists (ref 593)")
    assert ok
