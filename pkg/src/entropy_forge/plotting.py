"""Report figures, rendered off-screen to files."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def phi_margin_plot(g: np.ndarray, margins: dict[str, np.ndarray], out_dir: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, m in margins.items():
        ax.plot(g, m, label=name)
    ax.set_xlabel("g")
    ax.set_ylabel("worst margin over alpha")
    ax.set_yscale("symlog", linthresh=1e-6)
    ax.axhline(0.0, color="k", lw=0.5)
    ax.legend(fontsize=8)
    return _save(fig, out_dir, "phi_margins.png")


def stage_entropies(stages: list[dict], out_dir: str) -> str:
    names, guar, meas = [], [], []
    for s in stages:
        names.append(s["stage"] + (" %d" % s["round"] if "round" in s else ""))
        guar.append(s["guaranteed_entropy"])
        meas.append(s.get("measured_entropy", min(s.get("measured_row_entropy", [np.nan]))))
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(x - 0.2, np.maximum(guar, -1), 0.4, label="guaranteed (floored at -1)")
    ax.bar(x + 0.2, meas, 0.4, label="measured")
    ax.set_xticks(x, names)
    ax.set_ylabel("smooth min-entropy (bits)")
    ax.legend(fontsize=8)
    return _save(fig, out_dir, "pipeline_stages.png")


def slack_histogram(slacks: list[float], out_dir: str, name: str = "adversary_slack.png") -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(slacks, bins=30)
    ax.axvline(0.0, color="r", lw=1)
    ax.set_xlabel("bound - measured (bits)")
    ax.set_ylabel("count")
    return _save(fig, out_dir, name)


def mc_summary(rate: float, part1: float, part2: float, trials: int, out_dir: str) -> str:
    fig, ax = plt.subplots(figsize=(5, 4))
    vals = [max(rate, 0.5 / trials), part1, part2]
    ax.bar(["empirical", "part I", "part II"], vals, color=["C0", "C1", "C2"])
    ax.set_yscale("log")
    ax.set_ylabel("failure probability")
    ax.set_title("%d trials" % trials)
    return _save(fig, out_dir, "mc_failure.png")
