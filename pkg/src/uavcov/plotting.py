"""Figure rendering for sweep and LOS-curve reports.

Figures are written straight to files (Agg backend); the CSV stream stays
the primary output and the plots are a convenience view of the same rows.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_AXIS_LABELS = {
    "gamma": "UAV height [m]",
    "lambda": "UAV density [per km$^2$]",
    "omega": "antenna beamwidth [rad]",
    "theta_db": "SINR threshold [dB]",
}


def _style(ax, xlabel, ylabel):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3, linestyle=":")


def save_sweep_figure(rows, path: str) -> None:
    """Coverage vs the swept axis: analytic line plus MC error bars."""
    ok = [r for r in rows if r.error is None and r.p_cov_analytic is not None]
    if not ok:
        raise ValueError("no plottable rows")
    x = [r.axis_value for r in ok]
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(x, [r.p_cov_analytic for r in ok], "-", color="#0072BD",
            label="analytic")
    mc = [r for r in ok if r.p_cov_mc is not None]
    if mc:
        ax.errorbar([r.axis_value for r in mc], [r.p_cov_mc for r in mc],
                    yerr=[r.mc_ci95 for r in mc], fmt="o", ms=4,
                    color="#D95319", linestyle="none", capsize=2,
                    label="Monte Carlo")
    axis = ok[0].axis_name
    _style(ax, _AXIS_LABELS.get(axis, axis), "coverage probability")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=200)
    plt.close(fig)


def save_los_curve_figure(rows, path: str) -> None:
    """Serving-link LOS probability vs height, with optional MC markers
    and the sigmoid comparison model."""
    ok = [r for r in rows if r.error is None]
    if not ok:
        raise ValueError("no plottable rows")
    x = [r.axis_value for r in ok]
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(x, [r.p_los_serving for r in ok], "-", color="#0072BD",
            label="grid model")
    mc = [r for r in ok if r.p_los_serving_mc is not None]
    if mc:
        ax.errorbar([r.axis_value for r in mc],
                    [r.p_los_serving_mc for r in mc],
                    yerr=[r.mc_ci95 for r in mc], fmt="o", ms=4,
                    color="#D95319", linestyle="none", capsize=2,
                    label="Monte Carlo")
    sig = [r for r in ok if r.sigmoid_p_los is not None]
    if sig:
        ax.plot([r.axis_value for r in sig], [r.sigmoid_p_los for r in sig],
                "--", color="#77AC30", label="sigmoid model")
    _style(ax, _AXIS_LABELS["gamma"], "P(serving link is LOS)")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=200)
    plt.close(fig)
