"""CSV / JSON / SVG reports for an experiment."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .estimator import ClusterStats

PK_HEADER = ["k", "p_hat", "q1", "median", "q3", "min", "max"]
PK_FILE = "pk.csv"
SUMMARY_FILE = "summary.json"
SVG_FILE = "boxplots.svg"


def write_pk_csv(stats: ClusterStats, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PK_HEADER)
        for k in range(1, stats.k_max + 1):
            w.writerow([k, repr(stats.p_hat[k - 1]), *map(repr, stats.p_summary[k - 1])])
        w.writerow(["theta", repr(stats.theta_hat), *map(repr, stats.theta_summary)])


def summary_dict(result) -> dict:
    stats = result.stats
    return {
        "config": result.config.to_dict(),
        "threshold": result.plan.v0,
        "scanning_window": list(result.plan.q_window.as_tuple()),
        "p_hat": stats.p_hat,
        "theta_hat": stats.theta_hat,
        "pi_hat": stats.pi_hat,
        "overflow": stats.overflow,
        "guard_retries": result.guard_retries,
        "stats": stats.to_dict(),
        # The only run-dependent field.
        "timing": {"wall_time_s": result.wall_time},
    }


def write_boxplots_svg(stats: ClusterStats, path: Path, title: str = "") -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    sub_p = np.asarray(stats.subsample_p)
    with matplotlib.rc_context({"svg.hashsalt": "palmcluster", "svg.fonttype": "none"}):
        fig, (ax_p, ax_t) = plt.subplots(
            1, 2, figsize=(9, 4), gridspec_kw={"width_ratios": [stats.k_max, 1.5]}
        )
        ax_p.boxplot(sub_p, whis=(0, 100))
        ax_p.set_xticks(range(1, stats.k_max + 1), [str(k) for k in range(1, stats.k_max + 1)])
        ax_p.set_xlabel("k")
        ax_p.set_ylabel("subsample p_k")
        ax_t.boxplot(np.asarray(stats.subsample_theta), whis=(0, 100))
        ax_t.set_xticks([1], ["theta"])
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def emit_reports(result, out_dir, svg: bool = False) -> dict[str, Path]:
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create report directory {out_dir}: {exc}") from exc
    paths = {"pk": out_dir / PK_FILE, "summary": out_dir / SUMMARY_FILE}
    try:
        write_pk_csv(result.stats, paths["pk"])
        with open(paths["summary"], "w", encoding="utf-8") as fh:
            json.dump(summary_dict(result), fh, indent=2, sort_keys=True)
            fh.write("\n")
        if svg:
            paths["svg"] = out_dir / SVG_FILE
            write_boxplots_svg(result.stats, paths["svg"], title=result.config.characteristic.value)
    except OSError as exc:
        raise OSError(f"writing reports to {out_dir}: {exc}") from exc
    return paths


def load_stats(path) -> ClusterStats:
    with open(path, encoding="utf-8") as fh:
        return ClusterStats.from_dict(json.load(fh)["stats"])
