"""Figure rendering for the CLI report paths.

Each CSV artifact the CLI writes has a matching PNG rendered here. All
figures use the Agg backend so the CLI works headless.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_COLORS = {"sgelu": "black", "gelu": "red", "lisht": "blue",
           "relu": "green", "elu": "purple"}


def _color(name):
    return _COLORS.get(name.split("(")[0], None)


def plot_activation_table(table, label, path):
    """f(x) and f'(x) side by side, from a tabulate() table."""
    fig, (ax_f, ax_d) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_f.plot(table[:, 0], table[:, 1])
    ax_f.set_xlabel("x")
    ax_f.set_ylabel("f(x)")
    ax_f.set_title(label)
    ax_d.plot(table[:, 0], table[:, 2])
    ax_d.set_xlabel("x")
    ax_d.set_ylabel("f'(x)")
    ax_d.set_title(f"{label} derivative")
    for ax in (ax_f, ax_d):
        ax.axhline(0, color="gray", lw=0.5)
        ax.axvline(0, color="gray", lw=0.5)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_training_curves(medians, task, path):
    """Median train (solid) and test (dashed) curves per activation."""
    fig, ax = plt.subplots(figsize=(6, 4))
    by_act = {}
    for m in medians:
        by_act.setdefault(m["activation"], []).append(m)
    for name, ms in by_act.items():
        epochs = [m["epoch"] for m in ms]
        color = _color(name)
        ax.plot(epochs, [m["train_loss"] for m in ms],
                color=color, linestyle="-", label=f"{name} train")
        ax.plot(epochs, [m["test_loss"] for m in ms],
                color=color, linestyle="--", label=f"{name} test")
    ax.set_xlabel("epoch")
    ax.set_ylabel("MSE loss")
    ax.set_title("MNIST classification" if task == "classify" else "MNIST auto-encoder")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_weight_histogram(counts, edges, label, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    widths = edges[1:] - edges[:-1]
    ax.bar(edges[:-1], counts, width=widths, align="edge", edgecolor="none")
    ax.set_xlabel("weight value")
    ax.set_ylabel("count")
    ax.set_title(label)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_update_demo(traces, path):
    """|error| trajectories for one or more (label, rows) demo traces."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, rows in traces:
        steps = [r[0] for r in rows]
        errs = [r[4] for r in rows]
        ax.plot(steps, errs, label=label, color=_color(label))
    ax.set_xlabel("descent step")
    ax.set_ylabel("|target - output|")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_timing(rows, path):
    """Bar chart of per-element normalizer cost."""
    fig, ax = plt.subplots(figsize=(5, 4))
    names = [r[0] for r in rows]
    vals = [r[3] for r in rows]
    ax.bar(names, vals)
    ax.set_ylabel("ns per element")
    ax.set_title("normalizer forward cost")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
