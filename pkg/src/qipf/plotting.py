"""SVG figures derived from the CSV outputs."""

import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed element ids and no timestamp, so reruns give identical files
matplotlib.rcParams["svg.hashsalt"] = "qipf"
_SVG_META = {"Date": None}


def _read_columns(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {key: [float(r[key]) for r in rows] for key in rows[0]} if rows else {}


def plot_sine_csv(csv_path, svg_path, title=None, clip=None):
    """Overlay of IPF (dashed), QIPF (dotted) and modes (solid) over ``x``."""
    cols = _read_columns(csv_path)
    x = cols.pop("x")
    fig, ax = plt.subplots(figsize=(6, 4))

    def clipped(v):
        return v if clip is None else [min(max(t, -clip), clip) for t in v]

    ax.plot(x, cols.pop("ipf"), "k--", label="IPF")
    ax.plot(x, clipped(cols.pop("qipf")), "k:", label="QIPF")
    for name, values in cols.items():
        ax.plot(x, clipped(values), lw=1, label=name.replace("_", " "))
    ax.set_xlabel("x")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=6, ncol=2)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_metric_vs_severity(rows, metric, svg_path, title=None):
    """One line per method; ``rows`` are dicts with method/severity/metric keys."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    methods = sorted({r["method"] for r in rows})
    for method in methods:
        pts = sorted((r["severity"], r[metric]) for r in rows if r["method"] == method)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=method)
    ax.set_xlabel("severity")
    ax.set_ylabel(metric.replace("_", " "))
    if title:
        ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg", metadata=_SVG_META)
    plt.close(fig)
