"""Figure rendering for bound curves and simulation reports."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_AXIS_LABELS = {
    "alpha_lower": ("fugacity", "density lower bound"),
    "asymptotic_alpha": ("dimension", "density lower bound (main term)"),
    "pressure_lower": ("c (fugacity exponent)", "pressure lower bound"),
    "entropy_lower": ("dimension", "entropy lower bound"),
    "cell_model": ("dimension", "cell-model entropy"),
}


def plot_curve(curve, path, title=None):
    """Render one bound curve to an image file."""
    xs = [p for _, p, _ in curve.points]
    ys = [v for _, _, v in curve.points]
    xlabel, ylabel = _AXIS_LABELS.get(curve.kind, ("parameter", "value"))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, ys, marker=".", lw=1.2)
    if all(y > 0 for y in ys) and max(ys) / max(min(ys), 1e-300) > 1e3:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title or curve.kind)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
