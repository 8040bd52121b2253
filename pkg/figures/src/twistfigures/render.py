"""Render the five figure analogues from twistdensity CSV outputs.

Strictly a plotting layer: every number comes from the CSV files, nothing is
recomputed.  Output images are byte-identical across repeated invocations
(fixed dpi, no timestamps or software tags in the PNG metadata).

Figure kinds:
    overlay  histogram bars vs dashed prediction (density.csv + histogram.csv)
    markers  prediction with zeta-zero halves (*) and sym^2-zero halves (<>)
    panels   six scaled-density panels against the even-orthogonal limit
    zoom     near-origin overlay detail
    qsweep   log-discrepancy curves per sample height
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

SAVE_OPTS = dict(dpi=110, metadata={"Software": None})


class SchemaError(ValueError):
    pass


def read_csv(path: str, required: list[str]) -> dict[str, np.ndarray]:
    """CSV with `#`-prefixed headers; the last header line names the columns."""
    columns: list[str] | None = None
    rows: list[list[str]] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# columns:"):
                    columns = [c.strip() for c in line.split(":", 1)[1].split(",")]
                continue
            rows.append(line.split(","))
    if columns is None:
        raise SchemaError(f"{path}: no '# columns:' header line")
    for col in required:
        if col not in columns:
            raise SchemaError(f"{path}: missing required column {col!r}")
    out: dict[str, np.ndarray] = {}
    for j, name in enumerate(columns):
        vals = [r[j] for r in rows]
        try:
            out[name] = np.array([float(v) for v in vals])
        except ValueError:
            out[name] = np.array(vals)
    return out


def render_overlay(hist_csv: str, out_path: str, zoom: tuple[float, float] | None = None):
    data = read_csv(hist_csv, ["bin_lo", "bin_hi", "normalized", "theory_normalized"])
    fig, ax = plt.subplots(figsize=(9, 4.2))
    width = data["bin_hi"] - data["bin_lo"]
    ax.bar(
        data["bin_lo"],
        data["normalized"],
        width=width,
        align="edge",
        color="#6a87b8",
        edgecolor="#3c5a8a",
        linewidth=0.4,
        label="zero data",
    )
    mid = 0.5 * (data["bin_lo"] + data["bin_hi"])
    ax.plot(mid, data["theory_normalized"], "k--", linewidth=1.2, label="prediction")
    if zoom:
        ax.set_xlim(*zoom)
        sel = (mid >= zoom[0]) & (mid <= zoom[1])
        if np.any(sel):
            ax.set_ylim(0, 1.3 * max(data["normalized"][sel].max(), data["theory_normalized"][sel].max()))
    ax.set_xlabel("t")
    ax.set_ylabel("normalized density")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_path, **SAVE_OPTS)
    plt.close(fig)


def render_markers(density_csv: str, zeta_csv: str, sym2_csv: str, out_path: str):
    dens = read_csv(density_csv, ["t", "normalized_density"])
    fig, ax = plt.subplots(figsize=(9, 4.2))
    ax.plot(dens["t"], dens["normalized_density"], "k-", linewidth=0.9)
    for path, marker, label in ((zeta_csv, "*", "zeta zero / 2"), (sym2_csv, "D", "sym^2 zero / 2")):
        marks = read_csv(path, ["t"])["t"] if path else np.empty(0)
        if len(marks):
            y = np.interp(marks, dens["t"], dens["normalized_density"])
            ax.plot(marks, y, marker, linestyle="none", markersize=7, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("normalized density")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_path, **SAVE_OPTS)
    plt.close(fig)


def render_panels(panel_csvs: list[str], out_path: str):
    if len(panel_csvs) != 6:
        raise SchemaError(f"panels mode needs exactly 6 CSVs, got {len(panel_csvs)}")
    fig, axes = plt.subplots(3, 2, figsize=(9, 10), sharex=True, sharey=True)
    for ax, path in zip(axes.flat, panel_csvs):
        data = read_csv(path, ["tau", "scaled_density", "so_limit"])
        ax.plot(data["tau"], data["so_limit"], "k-", linewidth=1.0, label="SO limit")
        ax.plot(data["tau"], data["scaled_density"], "k--", linewidth=1.0, label="prediction")
        ax.set_title(path.rsplit("/", 1)[-1].replace(".csv", ""), fontsize=9)
    axes.flat[0].legend(frameon=False, fontsize=8)
    for ax in axes[-1]:
        ax.set_xlabel("tau")
    for ax in axes[:, 0]:
        ax.set_ylabel("scaled density")
    fig.tight_layout()
    fig.savefig(out_path, **SAVE_OPTS)
    plt.close(fig)


def render_qsweep(qsweep_csv: str, out_path: str):
    data = read_csv(qsweep_csv, ["t", "X", "q_delta"])
    fig, ax = plt.subplots(figsize=(9, 4.2))
    for t in np.unique(data["t"]):
        sel = data["t"] == t
        ax.plot(data["X"][sel], data["q_delta"][sel], marker=".", label=f"t = {t:g}")
    ax.set_xscale("log")
    ax.set_xlabel("X")
    ax.set_ylabel("log|Delta| / log X")
    ax.legend(frameon=False, fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(out_path, **SAVE_OPTS)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="twistdensity-figures")
    sub = parser.add_subparsers(dest="kind", required=True)

    p = sub.add_parser("overlay")
    p.add_argument("histogram_csv")
    p.add_argument("out")

    p = sub.add_parser("zoom")
    p.add_argument("histogram_csv")
    p.add_argument("out")
    p.add_argument("--window", type=float, nargs=2, default=(0.0, 1.0))

    p = sub.add_parser("markers")
    p.add_argument("density_csv")
    p.add_argument("zeta_marks_csv")
    p.add_argument("sym2_marks_csv")
    p.add_argument("out")

    p = sub.add_parser("panels")
    p.add_argument("panel_csvs", nargs=6)
    p.add_argument("out")

    p = sub.add_parser("qsweep")
    p.add_argument("qsweep_csv")
    p.add_argument("out")

    args = parser.parse_args(argv)
    try:
        if args.kind == "overlay":
            render_overlay(args.histogram_csv, args.out)
        elif args.kind == "zoom":
            render_overlay(args.histogram_csv, args.out, zoom=tuple(args.window))
        elif args.kind == "markers":
            render_markers(args.density_csv, args.zeta_marks_csv, args.sym2_marks_csv, args.out)
        elif args.kind == "panels":
            render_panels(args.panel_csvs, args.out)
        elif args.kind == "qsweep":
            render_qsweep(args.qsweep_csv, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
