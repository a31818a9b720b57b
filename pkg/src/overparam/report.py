"""Render run-directory CSVs as standalone SVG files.

Output is byte-stable: the SVG id salt is fixed and no date is embedded.
"""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import InputError  # noqa: E402

_RC = {"svg.hashsalt": "overparam", "svg.fonttype": "none", "path.simplify": False}

# (trace, reference, reference column, reference label) per run kind
_PAIRS = {
    "convergence": [("trace_main.csv", "bound_main.csv", "bound", "rate bound")],
    "regularized": [("trace_main.csv", "bound_main.csv", "bound", "regularized bound")],
    "eigen-prediction": [
        ("trace_top.csv", "prediction_top.csv", "predicted", "prediction"),
        ("trace_random.csv", "prediction_random.csv", "predicted", "prediction"),
    ],
}


def _read(path) -> dict:
    if not os.path.isfile(path):
        raise InputError(f"missing file: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    cols = {}
    for row in rows:
        for k, v in row.items():
            cols.setdefault(k, []).append(float(v) if v not in ("", None) else float("nan"))
    return cols


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _curve_pair(run_dir, out_dir, trace_name, ref_name, ref_col, ref_label):
    tr = _read(os.path.join(run_dir, trace_name))
    ref = _read(os.path.join(run_dir, ref_name))
    fig, ax = plt.subplots(figsize=(6, 4))
    if ref_col == "predicted":
        # the prediction is for |u - y|_2, the trace stores its square
        ax.plot(tr["k"], [v ** 0.5 for v in tr["loss_sq"]], label="measured |u(k) - y|")
        ax.plot(ref["k"], ref[ref_col], "--", label=ref_label)
    else:
        ax.plot(tr["k"], tr["loss_sq"], label="measured |u(k) - y|^2")
        ax.plot(ref["k"], ref[ref_col], "--", label=ref_label)
    ax.set_yscale("log")
    ax.set_xlabel("step k")
    ax.legend()
    stem = trace_name[len("trace_"):-len(".csv")]
    return _save(fig, os.path.join(out_dir, f"loss_{stem}.svg"))


def _appendix_b(run_dir, out_dir):
    f1 = _read(os.path.join(run_dir, "fig1.csv"))
    f2 = _read(os.path.join(run_dir, "fig2.csv"))
    fig, (a, b) = plt.subplots(1, 2, figsize=(9, 3.5))
    a.plot(f1["n"], f1["lambda"], "o-")
    a.set_xlabel("n")
    a.set_ylabel("lambda_min(H^cts)")
    b.plot(f1["n"], f1["theta"], "o-")
    b.set_xlabel("n")
    b.set_ylabel("theta")
    fig.tight_layout()
    p1 = _save(fig, os.path.join(out_dir, "fig1.svg"))
    fig, (a, b) = plt.subplots(1, 2, figsize=(9, 3.5))
    a.hist(f2["deviation_norm"], bins=40)
    a.set_xlabel("|H(w) - E H|_2")
    b.hist(f2["product_norm"], bins=40)
    b.set_xlabel("|(H(w) - E H)(H(w) - E H)^T|_2")
    fig.tight_layout()
    p2 = _save(fig, os.path.join(out_dir, "fig2.svg"))
    return [p1, p2]


def render_run_dir(run_dir, svg_dir=None) -> list:
    """Render every plot the run directory supports; return the SVG paths."""
    if not os.path.isdir(run_dir):
        raise InputError(f"missing run directory: {run_dir}")
    out_dir = svg_dir or run_dir
    os.makedirs(out_dir, exist_ok=True)
    name = None
    cfg_path = os.path.join(run_dir, "config.json")
    if os.path.isfile(cfg_path):
        with open(cfg_path) as fh:
            name = json.load(fh).get("name")
    with plt.rc_context(_RC):
        if name == "appendix-b":
            return _appendix_b(run_dir, out_dir)
        pairs = _PAIRS.get(name)
        if pairs is None:
            # unknown or absent config: pair every trace with a bound or prediction
            pairs = []
            for f in sorted(os.listdir(run_dir)):
                if f.startswith("prediction_"):
                    stem = f[len("prediction_"):]
                    pairs.append(("trace_" + stem, f, "predicted", "prediction"))
                elif f.startswith("bound_"):
                    stem = f[len("bound_"):]
                    pairs.append(("trace_" + stem, f, "bound", "bound"))
            if not pairs:
                raise InputError(f"missing file: {os.path.join(run_dir, 'trace_main.csv')}")
        return [_curve_pair(run_dir, out_dir, *p) for p in pairs]
