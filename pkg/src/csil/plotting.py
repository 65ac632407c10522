"""Matplotlib figures written as files (SVG by default)."""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed ids and no timestamp, so identical inputs give identical files
plt.rcParams["svg.hashsalt"] = "csil"
plt.rcParams["svg.fonttype"] = "none"


def _save(fig, path):
    fmt = str(path).rsplit(".", 1)[-1].lower()
    metadata = {"Date": None} if fmt == "svg" else None
    fig.savefig(path, format=fmt, metadata=metadata, bbox_inches="tight")
    plt.close(fig)


def plot_traces(traces, path, labels=None, title="Running compound regret"):
    """One running-regret series per trace."""
    fig, ax = plt.subplots(figsize=(6.0, 3.7))
    for k, trace in enumerate(traces):
        label = labels[k] if labels else None
        ax.plot(range(1, trace.T + 1), trace.running_regret, lw=1.4, label=label,
                marker="o" if trace.T == 1 else None)
    ax.axhline(0.0, color="0.6", lw=0.8, ls="--")
    ax.set_xlabel("task t")
    ax.set_ylabel("running regret")
    ax.set_title(title)
    if labels:
        ax.legend(frameon=False, fontsize=8)
    _save(fig, path)


def plot_sweep(rows, x_key, y_key, path, group_key=None):
    """Sweep summary: ``y_key`` against ``x_key``, one line per ``group_key`` value."""
    fig, ax = plt.subplots(figsize=(6.0, 3.7))
    groups = {}
    for r in rows:
        groups.setdefault(r.get(group_key) if group_key else None, []).append(r)
    for g, rs in sorted(groups.items(), key=lambda kv: str(kv[0])):
        rs = sorted(rs, key=lambda r: r[x_key])
        ax.plot([r[x_key] for r in rs], [r[y_key] for r in rs], marker="o", lw=1.2,
                label=None if g is None else f"{group_key}={g}")
    ax.set_xscale("log")
    ax.set_xlabel(x_key)
    ax.set_ylabel(y_key)
    if group_key:
        ax.legend(frameon=False, fontsize=8)
    _save(fig, path)
