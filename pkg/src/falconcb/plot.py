"""Static SVG of cumulative regret with the theoretical bound as a reference curve."""

from __future__ import annotations

import numpy as np

from .sim import RunResult, bound_for


def bound_curve(cfg: dict, rounds: np.ndarray) -> np.ndarray | None:
    if bound_for(cfg, 1) is None:
        return None
    return np.array([bound_for(cfg, int(t)) for t in rounds])


def emit_plot(result: RunResult, path) -> None:
    if result.horizon < 2:
        raise ValueError("need at least two logged rounds to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = result.logged_rows(result.config["output"]["log_every"])
    t = rows + 1
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(t, result.cum_regret[rows], label=f"cumulative regret ({result.config['algorithm']['name']})")
    ref = bound_curve(result.config, t)
    if ref is not None:
        ax.plot(t, ref, linestyle="--", color="gray", label="theoretical bound")
        ax.set_yscale("symlog", linthresh=10.0)
    ax.set_xlabel("round")
    ax.set_ylabel("regret")
    ax.legend(loc="upper left")
    fig.tight_layout()
    try:
        # fixed salt keeps element ids, and so the file bytes, reproducible
        with matplotlib.rc_context({"svg.hashsalt": "falconcb"}):
            fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
