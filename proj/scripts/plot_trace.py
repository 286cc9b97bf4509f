#!/usr/bin/env python3
"""Plot a refine-sdo JSON trace: IPM mu per call, IR gap/residual per refinement, and kappa vs mu."""
import argparse
import json
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def load(path):
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as f:
        return json.load(f)


def plot_ipm(ax, trace):
    calls = {}
    for rec in trace.get("ipm_iterations", []):
        calls.setdefault((rec["phase"], rec["call"]), []).append(rec)
    for (phase, call), recs in sorted(calls.items()):
        label = phase if phase == "embedding" else f"oracle {call}"
        ax.semilogy([r["k"] for r in recs], [r["mu"] for r in recs], label=label)
    ax.set_xlabel("IPM iteration")
    ax.set_ylabel("mu")
    ax.set_title("Interior point runs")
    if calls:
        ax.legend(fontsize="small")


def plot_ir(ax, trace):
    recs = trace.get("ir_iterations", [])
    if not recs:
        ax.set_visible(False)
        return
    ks = [r["k"] for r in recs]
    ax.semilogy(ks, [max(r["gap"], 1e-300) for r in recs], "o-", label="gap")
    ax.semilogy(ks, [max(r["residual"], 1e-300) for r in recs], "s--", label="residual")
    ax.semilogy(ks, [r["eta"] for r in recs], "^:", label="eta")
    ax.set_xlabel("refinement")
    ax.set_xticks(ks)
    ax.set_title("Iterative refinement")
    ax.legend(fontsize="small")


def plot_condition(ax, trace):
    rows = trace.get("condition")
    if rows is None:
        rows = [r for r in trace.get("ipm_iterations", []) if r.get("kappa") is not None]
    rows = [r for r in rows if r.get("kappa") is not None]
    if not rows:
        ax.set_visible(False)
        return
    ax.loglog([r["mu"] for r in rows], [r["kappa"] for r in rows], ".")
    ax.invert_xaxis()
    ax.set_xlabel("mu")
    ax.set_ylabel("kappa(M)")
    ax.set_title("Newton system conditioning")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("trace", help="JSON trace written by refine-sdo ('-' for stdin)")
    parser.add_argument("-o", "--output", default="trace.png", help="image file (default: trace.png)")
    args = parser.parse_args()

    trace = load(args.trace)
    fig, axes = plt.subplots(1, 3, figsize=(15, 4.5))
    plot_ipm(axes[0], trace)
    plot_ir(axes[1], trace)
    plot_condition(axes[2], trace)
    status = trace.get("result", {}).get("status", "?")
    fig.suptitle(f"{trace.get('config', {}).get('input', '')} ({status})")
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)
    print(args.output)


if __name__ == "__main__":
    main()
