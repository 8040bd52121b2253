"""Command-line orchestration: family dumps, coefficient tables, the density
prediction, zero-data generation, comparisons, and the identity suite.

Configuration is plain key=value text plus flag overrides (no environment
variables); every output CSV starts with the serialized configuration and
the package version, `#`-prefixed, values at 12+ significant digits.  No
randomness anywhere: two runs with the same configuration are identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .curve import CurveData, e11, lambda_table, write_ap_cache
from .density import density_curve, expansion_coeffs, scaled_density, so_even_limit
from .discriminants import enumerate_family, family_log_sum, kronecker
from .empirics import DEFAULT_SAMPLE_POINTS, build_histogram, discrepancy, q_sweep
from .lfun import (
    CountGateError,
    ZeroDataset,
    determine_sign,
    find_zeros,
    make_context,
    n_needed,
    read_zero_file,
    write_zero_file,
)
from .ratios import RatiosContext
from .symsquare import SymSquareEvaluator

SCALED_PANEL_X = (4e4, 1e6, 1e10, 1e20, 1e30, 1e300)


@dataclass
class RunConfig:
    curve: str = "e11"
    X: int = 40_000
    tmax: float = 30.0
    dmax: int = 4_000
    grid: float = 0.02
    mode: str = "exact"
    prime_cutoff: int = 10_000
    sym2_cutoff: int = 100_000
    threads: int = 1
    out: str = "out"
    binwidth: float = 0.1

    @classmethod
    def from_args(cls, args, config_path: str | None):
        cfg = cls()
        if config_path:
            for line in open(config_path):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, _, val = line.partition("=")
                key = key.strip()
                if key not in {f.name for f in fields(cls)}:
                    raise SystemExit(f"unknown config key {key!r}")
                typ = type(getattr(cfg, key))
                setattr(cfg, key, typ(val.strip()))
        for f in fields(cls):
            val = getattr(args, f.name, None)
            if val is not None:
                setattr(cfg, f.name, val)
        return cfg

    def header_lines(self) -> list[str]:
        items = ",".join(f"{k}={v}" for k, v in sorted(asdict(self).items()))
        return [f"# twistdensity version={__version__}", f"# config {items}"]


def _load_curve(cfg: RunConfig) -> CurveData:
    if cfg.curve.lower() == "e11":
        curve = e11()
    else:
        try:
            a_part, m_part = cfg.curve.split(":")
            a = [int(x) for x in a_part.split(",")]
            curve = CurveData(*a, conductor=int(m_part))
        except Exception as exc:
            raise SystemExit(f"cannot parse curve spec {cfg.curve!r}: {exc}")
    curve.omega = determine_sign(curve)
    return curve


def _write_csv(path: str, cfg: RunConfig, columns: list[str], rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        for line in cfg.header_lines():
            fh.write(line + "\n")
        fh.write("# columns: " + ",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def cmd_family(cfg: RunConfig) -> int:
    curve = _load_curve(cfg)
    fam = enumerate_family(curve, cfg.X)
    m = curve.conductor
    rows = []
    for d in fam.members:
        rows.append((int(d), kronecker(int(d), m), "even"))
    _write_csv(os.path.join(cfg.out, "family.csv"), cfg, ["d", "chi_d_M", "parity"], rows)
    exact, em = family_log_sum(fam)
    print(
        f"family X={cfg.X}: {fam.x_star} even, {fam.n_odd} odd, "
        f"{fam.n_excluded} excluded (M | d); log-sum exact={exact:.6f} em={em:.6f}"
    )
    return 0


def cmd_coeffs(cfg: RunConfig) -> int:
    curve = _load_curve(cfg)
    n_max = n_needed(curve, cfg.dmax, cfg.tmax)
    lambda_table(curve, n_max, threads=cfg.threads)
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, "ap_cache.txt")
    write_ap_cache(curve, path)
    print(f"wrote {len(curve.ap_cache)} prime coefficients (n <= {n_max}) to {path}")
    return 0


def _contexts(cfg: RunConfig, curve: CurveData):
    sym2 = SymSquareEvaluator(curve, prime_cutoff=cfg.sym2_cutoff)
    ratios = RatiosContext(curve, prime_cutoff=cfg.prime_cutoff, sym2=sym2)
    return sym2, ratios


def cmd_predict(cfg: RunConfig, scaled: bool = False) -> int:
    curve = _load_curve(cfg)
    _, ratios = _contexts(cfg, curve)
    if scaled:
        tau = np.arange(0.0, 3.0 + 1e-9, max(cfg.grid, 1e-3))
        limit = so_even_limit(tau)
        for X in SCALED_PANEL_X:
            if X <= 10**7:
                fam = enumerate_family(curve, int(X))
                vals = scaled_density(tau, float(X), ratios, family=fam, mode="exact")
            else:
                vals = scaled_density(tau, float(X), ratios, mode="closed_form_large_X")
            rows = zip(tau.tolist(), vals.tolist(), limit.tolist())
            name = f"scaled_{X:.0e}.csv".replace("+", "")
            _write_csv(os.path.join(cfg.out, name), cfg, ["tau", "scaled_density", "so_limit"], rows)
        print(f"wrote {len(SCALED_PANEL_X)} scaled panels to {cfg.out}")
        return 0
    if cfg.grid <= 0:
        raise SystemExit("empty t-grid: grid step must be positive")
    t = np.arange(0.0, cfg.tmax + 1e-9, cfg.grid)
    if len(t) == 0:
        raise SystemExit("empty t-grid")
    fam = enumerate_family(curve, cfg.X)
    curve_out = density_curve(t, fam, ratios, mode=cfg.mode)
    rows = zip(
        t.tolist(),
        curve_out.values.tolist(),
        curve_out.normalized.tolist(),
        [cfg.mode] * len(t),
        [float(cfg.X)] * len(t),
    )
    _write_csv(
        os.path.join(cfg.out, "density.csv"),
        cfg,
        ["t", "density", "normalized_density", "mode", "X"],
        rows,
    )
    from .specfun import zeta_zeros_up_to

    zmarks = [(z / 2,) for z in zeta_zeros_up_to(2 * cfg.tmax) if z / 2 <= cfg.tmax]
    _write_csv(os.path.join(cfg.out, "zeta_marks.csv"), cfg, ["t"], zmarks)
    smarks = [(t_,) for t_ in ratios.sym2.one_line_zero_markers(cfg.tmax)]
    _write_csv(os.path.join(cfg.out, "sym2_marks.csv"), cfg, ["t"], smarks)
    print(f"wrote density curve ({len(t)} points) and zero markers to {cfg.out}")
    return 0


def cmd_zeros(cfg: RunConfig) -> int:
    curve = _load_curve(cfg)
    fam = enumerate_family(curve, cfg.dmax)
    path = os.path.join(cfg.out, "zeros.txt")
    ds = ZeroDataset(curve.label or cfg.curve, curve.conductor, cfg.dmax, cfg.tmax)
    ds.params = {"grid_rule": "quarter-mean-spacing", "bisection_tol": "1e-06"}
    done: set[int] = set()
    if os.path.exists(path):
        try:
            prev = read_zero_file(path)
            if prev.conductor == curve.conductor and abs(prev.t_max - cfg.tmax) < 1e-9:
                ds.records.update(prev.records)
                done = set(prev.records)
                print(f"resuming: {len(done)} twists already done")
        except ValueError:
            pass
    todo = [int(d) for d in fam.members if int(d) not in done]
    n_max = n_needed(curve, cfg.dmax, cfg.tmax)
    lam = lambda_table(curve, n_max, threads=cfg.threads)
    t0 = time.time()
    failures = 0
    if cfg.threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        chunks = np.array_split(np.array(todo), cfg.threads * 4)
        jobs = [
            (curve.invariants, curve.conductor, curve.omega, c.tolist(), cfg.tmax, n_max)
            for c in chunks
            if len(c)
        ]
        with ProcessPoolExecutor(max_workers=cfg.threads) as ex:
            for recs in ex.map(_zeros_chunk_worker, jobs):
                for rec in recs:
                    failures += not rec.gate_passed
                    ds.add(rec)
    else:
        for i, d in enumerate(todo):
            ctx = make_context(curve, d, cfg.tmax, lam=lam)
            try:
                rec = find_zeros(ctx)
            except CountGateError as exc:
                rec = exc.record
                failures += 1
                print(f"  count gate failed: {exc}")
            ds.add(rec)
            if (i + 1) % 50 == 0:
                print(f"  {i+1}/{len(todo)} twists, {time.time()-t0:.0f}s")
    write_zero_file(ds, path)
    frac = ds.gate_pass_fraction()
    print(
        f"zeros: {ds.total_zeros()} ordinates over {len(ds.records)} twists "
        f"(gate pass {100*frac:.2f}%, {failures} failures) -> {path}"
    )
    return 0


def _zeros_chunk_worker(args):
    invs, M, omega, ds_chunk, tmax, n_max = args
    curve = CurveData(*invs, conductor=M, omega=omega)
    lam = lambda_table(curve, n_max)
    out = []
    for d in ds_chunk:
        ctx = make_context(curve, int(d), tmax, lam=lam)
        try:
            out.append(find_zeros(ctx))
        except CountGateError as exc:
            out.append(exc.record)
    return out


def cmd_compare(cfg: RunConfig) -> int:
    curve = _load_curve(cfg)
    path = os.path.join(cfg.out, "zeros.txt")
    if not os.path.exists(path):
        raise SystemExit(f"missing zero file: expected {path} (run the zeros command first)")
    ds = read_zero_file(path)
    _, ratios = _contexts(cfg, curve)
    X = float(ds.X)
    fam = enumerate_family(curve, int(X))
    hist = build_histogram(ds, binwidth=cfg.binwidth, X=X)
    theory = density_curve(hist.midpoints(), fam, ratios, mode=cfg.mode)
    _write_csv(
        os.path.join(cfg.out, "histogram.csv"),
        cfg,
        ["bin_lo", "bin_hi", "count", "normalized", "theory_normalized"],
        zip(
            hist.edges[:-1].tolist(),
            hist.edges[1:].tolist(),
            hist.counts.tolist(),
            hist.normalized.tolist(),
            theory.for_histogram().tolist(),
        ),
    )
    deltas = [
        (float(mid), X, discrepancy(float(mid), theory, hist))
        for mid in hist.midpoints()
    ]
    _write_csv(os.path.join(cfg.out, "delta.csv"), cfg, ["t", "X", "delta"], deltas)

    # Q sweep on fine bins so the near-origin sample points fall in distinct bins
    x_grid = np.unique(np.geomspace(max(ds.X / 8, 200), ds.X, 8).astype(int))
    fine_bw = 0.01
    fams = {int(x): enumerate_family(curve, int(x)) for x in x_grid}

    def theory_for_x(x):
        h = build_histogram(ds, binwidth=fine_bw, X=x)
        return density_curve(h.midpoints()[h.midpoints() < 1.0], fams[int(x)], ratios, mode=cfg.mode)

    def data_for_x(x):
        return build_histogram(ds, binwidth=fine_bw, X=x)

    series = q_sweep(DEFAULT_SAMPLE_POINTS, x_grid.astype(float), theory_for_x, data_for_x)
    _write_csv(
        os.path.join(cfg.out, "qsweep.csv"),
        cfg,
        ["t", "X", "delta", "q_delta"],
        series.rows(),
    )
    print(f"compare: histogram/delta/qsweep written to {cfg.out}")
    return 0


def cmd_identities(cfg: RunConfig) -> int:
    curve = _load_curve(cfg)
    sym2, ratios = _contexts(cfg, curve)
    checks = []

    for r in (0.0, 0.05, 0.1j, 0.03 + 0.02j):
        res = abs(ratios.a_factor(r, r) - 1.0)
        checks.append((f"diagonal A(r,r)=1 at r={r}", res, res < 1e-8))
    a1 = ratios.a_factor_dalpha(0.0)
    b1, b2 = ratios.b_derivs()
    res = abs(a1 + 0.5 * b1)
    checks.append(("relation A1(0,0) = -B'(0)/2", float(res), res < 1e-6))
    for p, m in ((2, 2), (3, 3), (7, 2)):
        from .curve import lambda_prime_power

        lp = lambda_prime_power
        res = abs(
            lp(curve, p, 1) * lp(curve, p, 2 * m + 1)
            - lp(curve, p, 2 * m + 2)
            - lp(curve, p, 2 * m)
        )
        checks.append((f"Hecke recursion p={p} m={m}", res, res < 1e-12))
    fam = enumerate_family(curve, min(cfg.X, 40_000))
    exact, em = family_log_sum(fam)
    res = abs(exact - em) / abs(exact)
    checks.append(("Euler-Maclaurin log-sum relative delta", res, res < 1e-2))
    val, err = sym2.value(1.0 + 0.0j)
    checks.append(("sym^2 value at 1 positive", float(val.real), val.real > 0))

    ok = all(c[2] for c in checks)
    for name, res, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}: residual {res:.3e}")
    print("# json-lines")
    for name, res, passed in checks:
        print(json.dumps({"check": name, "residual": res, "pass": bool(passed)}))
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="twistdensity",
        description="1-level density of zeros of even quadratic twists: prediction vs data",
    )
    parser.add_argument("--config", help="key=value config file")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--curve", help="curve label (e11) or a1,a2,a3,a4,a6:M")
    common.add_argument("--X", type=int)
    common.add_argument("--tmax", type=float)
    common.add_argument("--dmax", type=int)
    common.add_argument("--grid", type=float)
    common.add_argument("--mode", choices=["exact", "euler_maclaurin"])
    common.add_argument("--prime-cutoff", dest="prime_cutoff", type=int)
    common.add_argument("--sym2-cutoff", dest="sym2_cutoff", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--out")
    common.add_argument("--binwidth", type=float)

    sub.add_parser("family", parents=[common])
    sub.add_parser("coeffs", parents=[common])
    pred = sub.add_parser("predict", parents=[common])
    pred.add_argument("--scaled", action="store_true")
    sub.add_parser("zeros", parents=[common])
    sub.add_parser("compare", parents=[common])
    sub.add_parser("identities", parents=[common])

    args = parser.parse_args(argv)
    cfg = RunConfig.from_args(args, args.config)
    try:
        if args.command == "family":
            return cmd_family(cfg)
        if args.command == "coeffs":
            return cmd_coeffs(cfg)
        if args.command == "predict":
            return cmd_predict(cfg, scaled=args.scaled)
        if args.command == "zeros":
            return cmd_zeros(cfg)
        if args.command == "compare":
            return cmd_compare(cfg)
        if args.command == "identities":
            return cmd_identities(cfg)
    except (ValueError, ArithmeticError) as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1
    raise SystemExit(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
