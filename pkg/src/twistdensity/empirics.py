"""Histograms of zero data, theory-minus-data differencing, and the
log-scaled discrepancy statistic.

Normalized histogram heights are counts / (N_even * binwidth * L) with
L = log(sqrt(M) X / (2 pi)); the matching theory value is the delta-pair
density divided by the same factor and by the recorded pair factor 2 (the
delta pair counts every positive ordinate and its mirror).  Both sides carry
the normalization record and a mismatch is a hard error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .density import DensityCurve
from .lfun import ZeroDataset


class NormalizationError(ValueError):
    pass


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    normalized: np.ndarray
    normalization: dict = field(default_factory=dict)

    @property
    def binwidth(self) -> float:
        return float(self.edges[1] - self.edges[0])

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def bin_index(self, t: float) -> int:
        i = int(np.searchsorted(self.edges, t, side="right")) - 1
        if i < 0 or i >= len(self.counts):
            raise ValueError(f"t={t} outside histogram range")
        return i


def build_histogram(
    zeros: ZeroDataset,
    binwidth: float = 0.1,
    X: float | None = None,
    t_max: float | None = None,
) -> Histogram:
    """Pool positive ordinates over even twists d <= X; central zeros are
    excluded by construction (they are recorded separately, not as
    ordinates)."""
    if binwidth <= 0:
        raise ValueError("binwidth must be positive")
    if not zeros.records:
        raise ValueError("empty zero dataset")
    X = float(zeros.X if X is None else X)
    t_max = float(zeros.t_max if t_max is None else t_max)
    pool = [r.zeros[r.zeros <= t_max] for d, r in zeros.records.items() if d <= X]
    n_even = sum(1 for d in zeros.records if d <= X)
    if n_even == 0:
        raise ValueError(f"no records with d <= {X}")
    allz = np.concatenate(pool) if pool else np.empty(0)
    n_bins = int(math.ceil(t_max / binwidth - 1e-9))
    edges = binwidth * np.arange(n_bins + 1)
    counts, _ = np.histogram(allz, bins=edges)
    M = zeros.conductor
    L = math.log(math.sqrt(M) * X / (2 * math.pi))
    normalized = counts / (n_even * binwidth * L)
    record = {
        "n_even": n_even,
        "binwidth": binwidth,
        "L": L,
        "M": M,
        "X": X,
        "pair_factor": 1.0,  # each positive ordinate counted once
    }
    return Histogram(edges, counts, normalized, record)


def _check_match(theory: DensityCurve, data: Histogram) -> None:
    tn, dn = theory.normalization, data.normalization
    for key in ("M", "X", "L"):
        if not math.isclose(float(tn[key]), float(dn[key]), rel_tol=1e-12):
            raise NormalizationError(
                f"normalization mismatch on {key!r}: theory {tn[key]} vs data {dn[key]}"
            )
    if tn.get("x_star") != dn.get("n_even"):
        raise NormalizationError(
            f"family size mismatch: theory {tn.get('x_star')} vs data {dn.get('n_even')}"
        )


def discrepancy(t: float, theory: DensityCurve, data: Histogram) -> float:
    """Delta(t, X): normalized theory at the midpoint of the bin containing t
    minus the normalized data height of that bin."""
    _check_match(theory, data)
    i = data.bin_index(t)
    mid = data.midpoints()[i]
    j = int(np.argmin(np.abs(theory.grid - mid)))
    if abs(theory.grid[j] - mid) > 0.5 * data.binwidth:
        raise ValueError(f"theory curve has no sample near bin midpoint {mid}")
    return float(theory.for_histogram()[j] - data.normalized[i])


@dataclass
class DiscrepancySeries:
    t_points: np.ndarray
    x_grid: np.ndarray
    delta: np.ndarray  # shape (len(t_points), len(x_grid))
    q_delta: np.ndarray  # log|delta| / log X; NaN marks a vanishing delta

    def rows(self):
        for i, t in enumerate(self.t_points):
            for j, x in enumerate(self.x_grid):
                yield t, x, self.delta[i, j], self.q_delta[i, j]


DEFAULT_SAMPLE_POINTS = (0.01, 0.02, 0.03, 0.04, 0.05, 0.4, 0.6)


def q_sweep(
    t_points,
    x_grid,
    theory_for_x,
    data_for_x,
) -> DiscrepancySeries:
    """Q_Delta(t, X) = log|Delta(t, X)| / log X over a grid of cutoffs.

    `theory_for_x` and `data_for_x` map X to a DensityCurve / Histogram with
    matching normalization records.  A vanishing Delta is recorded as a gap
    (NaN), not zero.
    """
    t_points = np.asarray(t_points, dtype=float)
    x_grid = np.asarray(x_grid, dtype=float)
    if np.any(np.diff(x_grid) <= 0):
        raise ValueError("X grid must be increasing")
    delta = np.empty((len(t_points), len(x_grid)))
    qd = np.empty_like(delta)
    for j, x in enumerate(x_grid):
        theory = theory_for_x(x)
        data = data_for_x(x)
        for i, t in enumerate(t_points):
            dlt = discrepancy(t, theory, data)
            delta[i, j] = dlt
            qd[i, j] = math.log(abs(dlt)) / math.log(x) if dlt != 0.0 else math.nan
    return DiscrepancySeries(t_points, x_grid, delta, qd)


def kendall_tau_sign(values) -> float:
    """Sign statistic of the monotone trend (concordant minus discordant
    pairs, normalized); negative means decaying."""
    v = np.asarray(values, dtype=float)
    v = v[~np.isnan(v)]
    n = len(v)
    if n < 2:
        return 0.0
    conc = disc = 0
    for i in range(n):
        for j in range(i + 1, n):
            if v[j] > v[i]:
                conc += 1
            elif v[j] < v[i]:
                disc += 1
    return (conc - disc) / (n * (n - 1) / 2)


def merge_bins(hist: Histogram, factor: int) -> Histogram:
    """Merge `factor` adjacent bins; counts add exactly."""
    n = (len(hist.counts) // factor) * factor
    counts = hist.counts[:n].reshape(-1, factor).sum(axis=1)
    edges = hist.edges[: n + 1 : factor]
    rec = dict(hist.normalization)
    rec["binwidth"] = hist.binwidth * factor
    normalized = counts / (rec["n_even"] * rec["binwidth"] * rec["L"])
    return Histogram(edges, counts, normalized, rec)
